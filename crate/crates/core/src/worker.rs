//! Off-chain listener: watches for OnchainMpcSeedReady, expands the seed
//! into message bits and a derandomized error stream, runs the Ring-LWE
//! encryption, hashes the ciphertexts into the VRF output, signs with the
//! delegated key, and submits the result back to the ledger.
//!
//! The error stream is keyed on (seed, secret-key context) rather than
//! fresh randomness, so for fixed keys the whole evaluation is a pure
//! function of the seed.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::delegation::{offchain_sign, DelegationError, OffchainKeys};
use crate::keccak::{keccak256_concat, Digest};
use crate::ledger::{Ledger, LedgerError, LedgerEvent, LedgerTx, Receipt};
use crate::ringsig::SigMode;
use crate::rlwe::{rlwe_enc2, serialize_ciphertext, BitSource, RlweError, RlweKeyPair, RlweParams, SampleError};
use crate::vrf::VrfProof;

#[derive(Debug, Error)]
pub enum WorkerError {
    #[error("no delegation package passed validation")]
    NoUsablePackage,
    #[error(transparent)]
    Rlwe(#[from] RlweError),
    #[error(transparent)]
    Delegation(#[from] DelegationError),
    #[error("ledger error: {0}")]
    Ledger(#[from] LedgerError),
    #[error("bus unavailable: {0}")]
    Bus(String),
}

/// Unbounded keccak counter-mode bit stream, MSB first within each byte.
pub struct DeterministicBitStream {
    prefix: Vec<u8>,
    counter: u64,
    buffer: [u8; 32],
    bit_pos: usize,
}

impl DeterministicBitStream {
    pub fn new(prefix: Vec<u8>) -> Self {
        let mut s = DeterministicBitStream {
            prefix,
            counter: 0,
            buffer: [0; 32],
            bit_pos: 0,
        };
        s.refill();
        s
    }

    fn refill(&mut self) {
        let d = keccak256_concat(&[&self.prefix, &self.counter.to_be_bytes()]);
        self.buffer = *d.as_bytes();
        self.counter += 1;
        self.bit_pos = 0;
    }
}

impl BitSource for DeterministicBitStream {
    fn next_bit(&mut self) -> Result<bool, SampleError> {
        if self.bit_pos == 256 {
            self.refill();
        }
        let byte = self.buffer[self.bit_pos / 8];
        let bit = byte >> (7 - self.bit_pos % 8) & 1 == 1;
        self.bit_pos += 1;
        Ok(bit)
    }
}

/// Message bits plus the error-bit stream, both derived from the seed.
pub struct SeedExpansion {
    pub message_bits: Vec<bool>,
    pub error_stream: DeterministicBitStream,
}

/// message_bits come from keccak256(seed || "msg" || counter); the error
/// stream from keccak256(seed || sk_context || "err" || counter).
pub fn expand_seed(seed: &Digest, sk_context: &[u8], n: usize) -> SeedExpansion {
    let mut msg_prefix = seed.as_bytes().to_vec();
    msg_prefix.extend_from_slice(b"msg");
    let mut msg_stream = DeterministicBitStream::new(msg_prefix);
    let message_bits = (0..n)
        .map(|_| msg_stream.next_bit().expect("stream is unbounded"))
        .collect();

    let mut err_prefix = seed.as_bytes().to_vec();
    err_prefix.extend_from_slice(sk_context);
    err_prefix.extend_from_slice(b"err");
    SeedExpansion {
        message_bits,
        error_stream: DeterministicBitStream::new(err_prefix),
    }
}

/// Seed to serialized ciphertext halves (2N bytes each), deterministically.
pub fn rlwe_processing(
    seed: &Digest,
    keys: &RlweKeyPair,
    params: &RlweParams,
) -> Result<(Vec<u8>, Vec<u8>), RlweError> {
    let mut sk_context = Vec::with_capacity(2 * params.n());
    for &c in &keys.r2.coeffs {
        sk_context.extend_from_slice(&(c as u16).to_le_bytes());
    }
    let sk_context = keccak256_concat(&[&sk_context]);
    let mut expansion = expand_seed(seed, sk_context.as_bytes(), params.n());
    let ct = rlwe_enc2(
        params,
        &keys.a,
        &keys.p,
        &expansion.message_bits,
        &mut expansion.error_stream,
    )?;
    let bytes = serialize_ciphertext(params, &ct)?;
    let n2 = 2 * params.n();
    Ok((bytes[..n2].to_vec(), bytes[n2..].to_vec()))
}

/// Handle to whatever transports events and submissions. The in-process
/// bus wraps the ledger in a mutex; tests may substitute flaky variants.
pub trait LedgerBus: Send + Sync {
    fn events_since(&self, cursor: usize) -> Result<Vec<(usize, LedgerEvent)>, WorkerError>;
    fn submit_result(
        &self,
        c1: Vec<u8>,
        c2: Vec<u8>,
        proof: VrfProof,
    ) -> Result<Receipt, WorkerError>;
}

/// Shared in-process ledger behind a single-writer lock.
#[derive(Clone)]
pub struct SharedLedger(pub Arc<Mutex<Ledger>>);

impl SharedLedger {
    pub fn new(ledger: Ledger) -> SharedLedger {
        SharedLedger(Arc::new(Mutex::new(ledger)))
    }

    pub fn lock(&self) -> std::sync::MutexGuard<'_, Ledger> {
        self.0.lock().expect("ledger lock poisoned")
    }
}

impl LedgerBus for SharedLedger {
    fn events_since(&self, cursor: usize) -> Result<Vec<(usize, LedgerEvent)>, WorkerError> {
        Ok(self.lock().events_since(cursor))
    }

    fn submit_result(
        &self,
        c1: Vec<u8>,
        c2: Vec<u8>,
        proof: VrfProof,
    ) -> Result<Receipt, WorkerError> {
        let receipt = self
            .lock()
            .apply(LedgerTx::SubmitResult { c1, c2, proof })?;
        Ok(receipt.expect("submit always yields a receipt"))
    }
}

/// Worker configuration: parameter handles, receiving keys, polling.
pub struct WorkerConfig {
    pub group: crate::group::GroupParams,
    pub rlwe_params: RlweParams,
    pub rlwe_keys: RlweKeyPair,
    pub offchain: OffchainKeys,
    pub sig_mode: SigMode,
    pub poll_interval: Duration,
    pub max_retries: u32,
}

/// Outcome counters for a listener run.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct WorkerStats {
    pub events_seen: usize,
    pub submissions_accepted: usize,
    pub submissions_rejected: usize,
    pub handler_errors: usize,
}

/// Off-chain worker state: cursor over the event log plus activity log.
pub struct Worker {
    cfg: WorkerConfig,
    cursor: usize,
    pub stats: WorkerStats,
    pub log: Vec<String>,
}

impl Worker {
    pub fn new(cfg: WorkerConfig) -> Worker {
        Worker {
            cfg,
            cursor: 0,
            stats: WorkerStats::default(),
            log: Vec::new(),
        }
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// React to one seed-ready event: pick the first delegation package
    /// that validates, encrypt, sign, submit. Never signs when the
    /// binding proof or key consistency fails.
    pub fn handle_event(
        &mut self,
        event: &LedgerEvent,
        bus: &dyn LedgerBus,
    ) -> Result<Receipt, WorkerError> {
        let started = std::time::Instant::now();
        let LedgerEvent::OnchainMpcSeedReady {
            seed,
            sender: _,
            ring,
            packages,
        } = event
        else {
            return Err(WorkerError::NoUsablePackage);
        };

        let (c1, c2) = rlwe_processing(seed, &self.cfg.rlwe_keys, &self.cfg.rlwe_params)?;
        let vrf_output = keccak256_concat(&[&c1, &c2]);

        let mut proof = None;
        let mut last_err = WorkerError::NoUsablePackage;
        for pkg in packages {
            // signing randomness is derived from (package, seed) so a
            // replayed event reproduces the identical submission
            let derand = keccak256_concat(&[
                &pkg.to_bytes(&self.cfg.group),
                seed.as_bytes(),
                b"worker-sig",
            ]);
            let mut rng = ChaCha20Rng::from_seed(*derand.as_bytes());
            match offchain_sign(
                &self.cfg.group,
                &self.cfg.offchain.sk_off,
                pkg,
                seed,
                &vrf_output,
                ring,
                self.cfg.sig_mode,
                &mut rng,
            ) {
                Ok(p) => {
                    proof = Some(p);
                    break;
                }
                Err(e) => last_err = WorkerError::from(e),
            }
        }
        let Some(proof) = proof else {
            self.log.push(format!(
                "seed={} status=refused detail=no-usable-package elapsed_ms={}",
                seed,
                started.elapsed().as_millis()
            ));
            return Err(last_err);
        };

        let receipt = bus.submit_result(c1, c2, proof)?;
        if receipt.status == 1 {
            self.stats.submissions_accepted += 1;
            self.log.push(format!(
                "round={} phase=Finished seed={} status=1 elapsed_ms={} Result and proof submitted successfully!",
                receipt.round_id,
                seed,
                started.elapsed().as_millis()
            ));
        } else {
            self.stats.submissions_rejected += 1;
            self.log.push(format!(
                "round={} phase=SeedReady seed={} status=0 elapsed_ms={} Submission failed.",
                receipt.round_id,
                seed,
                started.elapsed().as_millis()
            ));
        }
        Ok(receipt)
    }

    /// One polling step: fetch new events past the cursor and handle the
    /// seed-ready ones in arrival order.
    pub fn poll_once(&mut self, bus: &dyn LedgerBus) -> Result<usize, WorkerError> {
        let mut attempts = 0;
        let events = loop {
            match bus.events_since(self.cursor) {
                Ok(ev) => break ev,
                Err(e) => {
                    attempts += 1;
                    if attempts > self.cfg.max_retries {
                        return Err(e);
                    }
                    std::thread::sleep(self.cfg.poll_interval * attempts.min(8));
                }
            }
        };
        let mut handled = 0;
        for (idx, event) in events {
            self.cursor = idx + 1;
            if matches!(event, LedgerEvent::OnchainMpcSeedReady { .. }) {
                self.stats.events_seen += 1;
                handled += 1;
                if self.handle_event(&event, bus).is_err() {
                    self.stats.handler_errors += 1;
                }
            }
        }
        Ok(handled)
    }

    /// Poll until the shutdown flag is raised; the loop exits within one
    /// poll interval of the signal.
    pub fn run_listener(
        &mut self,
        bus: &dyn LedgerBus,
        shutdown: &AtomicBool,
    ) -> Result<WorkerStats, WorkerError> {
        while !shutdown.load(Ordering::Relaxed) {
            self.poll_once(bus)?;
            if shutdown.load(Ordering::Relaxed) {
                break;
            }
            std::thread::sleep(self.cfg.poll_interval);
        }
        Ok(self.stats)
    }
}
