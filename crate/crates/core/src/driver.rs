//! End-to-end protocol driver: owns a simulated ledger, the participant
//! secrets, and an off-chain worker, and runs complete rounds
//! (commit, reveal, delegation, seed derivation, off-chain evaluation,
//! submission). Used by the command-line tool, the evaluation harness,
//! and the language bindings.

use num_bigint::BigUint;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::delegation::delegate_key;
use crate::keccak::Digest;
use crate::ledger::{commitment_digest, Address, Ledger, LedgerError, LedgerEvent, LedgerTx, Phase, Receipt};
use crate::vrf::{VrfKeyMaterial, VrfProof};
use crate::worker::{SharedLedger, Worker, WorkerConfig, WorkerError};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Worker(#[from] WorkerError),
    #[error("no seed-ready event emitted")]
    MissingEvent,
}

/// Everything one finished round leaves behind.
#[derive(Clone, Debug)]
pub struct RoundArtifacts {
    pub round_id: u64,
    pub seed: Digest,
    pub vrf_output: Digest,
    pub c1: Vec<u8>,
    pub c2: Vec<u8>,
    pub proof: VrfProof,
    pub receipt: Receipt,
}

pub struct ProtocolDriver {
    pub bus: SharedLedger,
    pub worker: Worker,
    km: VrfKeyMaterial,
    addresses: Vec<Address>,
    rng: ChaCha20Rng,
    pending_reveals: Vec<(Address, BigUint, u64, [u8; 32])>,
}

impl ProtocolDriver {
    /// Register every participant and leave the contract in the Commit
    /// phase of round 0.
    pub fn new(
        km: VrfKeyMaterial,
        reveal_threshold: Option<usize>,
        chain_seed: &[u8],
        rng_seed: u64,
    ) -> Result<ProtocolDriver, DriverError> {
        let mut ledger = Ledger::new(km.group.clone(), reveal_threshold, chain_seed);
        let mut addresses = Vec::new();
        for p in &km.participants {
            ledger.apply(LedgerTx::Register {
                pk_onchain: p.onchain.pk.clone(),
                pk_delegate: p.delegation.pk.clone(),
            })?;
            addresses.push(Address::from_pk(&km.group, &p.onchain.pk));
        }
        ledger.apply(LedgerTx::OpenCommit)?;
        let worker = Worker::new(WorkerConfig {
            group: km.group.clone(),
            rlwe_params: km.rlwe_params.clone(),
            rlwe_keys: km.rlwe.clone(),
            offchain: km.offchain.clone(),
            sig_mode: km.sig_mode,
            poll_interval: std::time::Duration::from_millis(1),
            max_retries: 3,
        });
        Ok(ProtocolDriver {
            bus: SharedLedger::new(ledger),
            worker,
            km,
            addresses,
            rng: ChaCha20Rng::seed_from_u64(rng_seed),
            pending_reveals: Vec::new(),
        })
    }

    pub fn key_material(&self) -> &VrfKeyMaterial {
        &self.km
    }

    pub fn addresses(&self) -> &[Address] {
        &self.addresses
    }

    /// Drive the on-chain half up to the seed-ready event and return it.
    /// The designated delegator rotates with the round id.
    pub fn advance_to_seed(&mut self) -> Result<LedgerEvent, DriverError> {
        let mut ledger = self.bus.lock();
        if ledger.state().phase == Phase::Finished {
            ledger.apply(LedgerTx::BeginRound)?;
        }
        let round = ledger.state().round_id;
        for address in self.addresses.clone() {
            let mut cb = [0u8; 32];
            self.rng.fill_bytes(&mut cb);
            let contribution = BigUint::from_bytes_be(&cb);
            let share = self.rng.gen_range(1..=1_000u64);
            let mut salt = [0u8; 32];
            self.rng.fill_bytes(&mut salt);
            ledger.apply(LedgerTx::Commit {
                address,
                commitment: commitment_digest(&contribution, share, &salt),
            })?;
            // reveals queue up after the phase flips below
            self.pending_reveals.push((address, contribution, share, salt));
        }
        ledger.apply(LedgerTx::OpenReveal)?;
        for (address, contribution, share, salt) in self.pending_reveals.drain(..) {
            ledger.apply(LedgerTx::Reveal {
                address,
                contribution,
                share,
                salt,
            })?;
        }
        ledger.apply(LedgerTx::MineBlocks { count: 3 })?;
        let delegator = (round as usize) % self.addresses.len();
        let pkg = delegate_key(
            &self.km.group,
            &self.km.participants[delegator],
            delegator,
            &self.km.offchain.pk_off,
            &round.to_be_bytes(),
            &mut self.rng,
        );
        ledger.apply(LedgerTx::CommitDelegation {
            sender: self.addresses[delegator],
            package: pkg,
        })?;
        ledger.apply(LedgerTx::DeriveSeed {
            sender: self.addresses[delegator],
        })?;
        let event = ledger
            .events()
            .last()
            .cloned()
            .ok_or(DriverError::MissingEvent)?;
        Ok(event)
    }

    /// One complete round through the worker; returns the artifacts.
    pub fn run_round(&mut self) -> Result<RoundArtifacts, DriverError> {
        let event = self.advance_to_seed()?;
        let LedgerEvent::OnchainMpcSeedReady { seed, .. } = &event else {
            return Err(DriverError::MissingEvent);
        };
        let seed = *seed;
        let bus = self.bus.clone();
        let receipt = self.worker.handle_event(&event, &bus)?;
        let (c1, c2) =
            crate::worker::rlwe_processing(&seed, &self.km.rlwe, &self.km.rlwe_params)
                .map_err(WorkerError::from)?;
        let proof = {
            let ledger = self.bus.lock();
            match ledger.events().last() {
                Some(LedgerEvent::ComputationFinished { proof, .. }) => proof.clone(),
                _ => return Err(DriverError::MissingEvent),
            }
        };
        Ok(RoundArtifacts {
            round_id: receipt.round_id,
            seed,
            vrf_output: proof.vrf_output,
            c1,
            c2,
            proof,
            receipt,
        })
    }

    /// Concatenated VRF outputs (32 bytes per round) until `bytes` bytes
    /// are available; the desk-scale stream the evaluation harness tests.
    pub fn output_stream(&mut self, bytes: usize) -> Result<Vec<u8>, DriverError> {
        let mut out = Vec::with_capacity(bytes);
        while out.len() < bytes {
            let artifacts = self.run_round()?;
            out.extend_from_slice(artifacts.vrf_output.as_bytes());
        }
        out.truncate(bytes);
        Ok(out)
    }
}
