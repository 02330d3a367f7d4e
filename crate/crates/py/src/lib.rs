//! Python bindings for the pqvrf pipeline: hashing, the VRF facade,
//! a full-protocol round runner over the simulated ledger, and the
//! statistical evaluation entry points.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pqvrf::complexity::{complexity_report, ComplexityInputs};
use pqvrf::driver::ProtocolDriver;
use pqvrf::keccak::Digest;
use pqvrf::ringsig::SigMode;
use pqvrf::stats::{run_suite, BitSequence, SuiteConfig};
use pqvrf::vrf::{
    eval_full, gen, ring_to_armored, verify, VrfConfig, VrfKeyMaterial, VrfProof,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Keccak-256 (the pre-standard padding variant) of `data`.
#[pyfunction]
fn keccak256(data: &[u8]) -> Vec<u8> {
    pqvrf::keccak256(data).as_bytes().to_vec()
}

/// Key material plus ring for Gen/Eval/Ver round trips.
#[pyclass]
struct VrfSystem {
    km: VrfKeyMaterial,
}

#[pymethods]
impl VrfSystem {
    /// Generate key material for `participants` members. `seed` drives
    /// every random choice, so equal arguments rebuild equal systems.
    #[new]
    #[pyo3(signature = (participants=5, seed=0, group="toy64", rlwe="R256"))]
    fn new(participants: usize, seed: u64, group: &str, rlwe: &str) -> PyResult<Self> {
        let config = VrfConfig {
            group: group.to_string(),
            rlwe: rlwe.to_string(),
            participants,
            sig_mode: SigMode::Generalized,
        };
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let km = gen(&config, &mut rng).map_err(value_err)?;
        Ok(VrfSystem { km })
    }

    fn participants(&self) -> usize {
        self.km.participants.len()
    }

    /// Hex-armored ring file contents for external verifiers.
    fn ring_file(&self) -> String {
        ring_to_armored(&self.km.group, &self.km.ring())
    }

    /// Evaluate on (the keccak digest of) `seed_material`; returns
    /// (vrf_output bytes, armored proof string).
    #[pyo3(signature = (seed_material, delegator=0))]
    fn eval(&self, seed_material: &[u8], delegator: usize) -> PyResult<(Vec<u8>, String)> {
        let seed = pqvrf::keccak256(seed_material);
        let ring = self.km.ring();
        let (out, proof, _, _) =
            eval_full(&seed, &self.km, &ring, delegator).map_err(runtime_err)?;
        Ok((out.as_bytes().to_vec(), proof.to_armored(&self.km.group)))
    }

    /// Check an armored proof against this system's ring.
    fn verify(&self, proof: &str) -> PyResult<bool> {
        let proof = match VrfProof::from_armored(&self.km.group, proof) {
            Ok(p) => p,
            Err(_) => return Ok(false),
        };
        Ok(verify(&self.km.group, &proof, &self.km.ring()))
    }
}

/// Full-protocol driver: commit-reveal seed generation on the simulated
/// contract, off-chain evaluation, verified submission.
#[pyclass]
struct RoundRunner {
    driver: ProtocolDriver,
}

#[pymethods]
impl RoundRunner {
    #[new]
    #[pyo3(signature = (participants=5, seed=0, group="toy64", rlwe="R256", threshold=None))]
    fn new(
        participants: usize,
        seed: u64,
        group: &str,
        rlwe: &str,
        threshold: Option<usize>,
    ) -> PyResult<Self> {
        let config = VrfConfig {
            group: group.to_string(),
            rlwe: rlwe.to_string(),
            participants,
            sig_mode: SigMode::Generalized,
        };
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let km = gen(&config, &mut rng).map_err(value_err)?;
        let driver = ProtocolDriver::new(km, threshold, &seed.to_be_bytes(), seed)
            .map_err(runtime_err)?;
        Ok(RoundRunner { driver })
    }

    /// Run one round; returns (round_id, seed_hex, vrf_output_hex,
    /// proof_armored, receipt_status).
    fn run_round(&mut self) -> PyResult<(u64, String, String, String, u8)> {
        let a = self.driver.run_round().map_err(runtime_err)?;
        Ok((
            a.round_id,
            a.seed.to_hex(),
            a.vrf_output.to_hex(),
            a.proof.to_armored(&self.driver.key_material().group),
            a.receipt.status,
        ))
    }

    /// Concatenated VRF output bytes across as many rounds as needed.
    fn output_stream(&mut self, bytes: usize) -> PyResult<Vec<u8>> {
        self.driver.output_stream(bytes).map_err(runtime_err)
    }

    /// Check an armored proof against the current on-chain ring.
    fn verify(&self, proof: &str) -> PyResult<bool> {
        let km = self.driver.key_material();
        let proof = match VrfProof::from_armored(&km.group, proof) {
            Ok(p) => p,
            Err(_) => return Ok(false),
        };
        let ring = self.driver.bus.lock().state().ring();
        Ok(verify(&km.group, &proof, &ring))
    }

    fn event_log(&self) -> String {
        self.driver.bus.lock().event_log_lines()
    }

    fn snapshot(&self) -> String {
        self.driver.bus.lock().snapshot()
    }
}

/// Run the eleven-test suite over `data`, split into `sequences` pieces
/// of `bits` bits; returns the rendered report table.
#[pyfunction]
#[pyo3(signature = (data, sequences=4, bits=1 << 17, alpha=0.01))]
fn nist_suite(data: &[u8], sequences: usize, bits: usize, alpha: f64) -> PyResult<String> {
    if bits % 8 != 0 {
        return Err(value_err("bits must be a multiple of 8"));
    }
    let bytes_per_seq = bits / 8;
    if data.len() < sequences * bytes_per_seq {
        return Err(value_err(format!(
            "need {} bytes, got {}",
            sequences * bytes_per_seq,
            data.len()
        )));
    }
    let cfg = SuiteConfig {
        sequences,
        bits_per_sequence: bits,
        alpha,
        ..SuiteConfig::default()
    };
    let report = run_suite(
        |i| BitSequence::from_bytes(&data[i * bytes_per_seq..(i + 1) * bytes_per_seq]),
        &cfg,
    );
    Ok(report.render_table())
}

/// Shannon entropy of the byte histogram, in bits per byte.
#[pyfunction]
fn empirical_entropy(data: &[u8]) -> PyResult<f64> {
    pqvrf::stats::empirical_shannon_entropy(data).map_err(value_err)
}

/// Closed-form entropy estimate for n participants at normalization z.
#[pyfunction]
fn closed_form_entropy(participants: u32, z: f64) -> PyResult<f64> {
    if z <= 0.0 {
        return Err(value_err("normalization must be positive"));
    }
    Ok(pqvrf::stats::closed_form_entropy(participants, z))
}

/// Per-block ones ratio of `data` and the overall mean.
#[pyfunction]
#[pyo3(signature = (data, block_bits=128))]
fn ones_ratio(data: &[u8], block_bits: usize) -> PyResult<(Vec<f64>, f64)> {
    pqvrf::stats::ones_ratio_blocks(&BitSequence::from_bytes(data), block_bits)
        .map_err(value_err)
}

/// Complexity contributions as (name, raw, log2) triples.
#[pyfunction]
#[pyo3(signature = (hash_bits=256, participants=10, poly_degree=1024, log_p=11))]
fn complexity(
    hash_bits: u64,
    participants: u64,
    poly_degree: u64,
    log_p: u64,
) -> Vec<(String, f64, f64)> {
    complexity_report(ComplexityInputs {
        hash_bits,
        participants,
        poly_degree,
        log_p,
    })
    .components
    .into_iter()
    .map(|c| (c.name.to_string(), c.raw, c.log2))
    .collect()
}

/// Hex helper mirroring the digest formatting used in artifacts.
#[pyfunction]
fn digest_hex(data: &[u8]) -> PyResult<String> {
    Digest::from_slice(data)
        .map(|d| d.to_hex())
        .ok_or_else(|| value_err("digest must be exactly 32 bytes"))
}

#[pymodule]
fn pqvrf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(keccak256, m)?)?;
    m.add_function(wrap_pyfunction!(nist_suite, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(ones_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(complexity, m)?)?;
    m.add_function(wrap_pyfunction!(digest_hex, m)?)?;
    m.add_class::<VrfSystem>()?;
    m.add_class::<RoundRunner>()?;
    Ok(())
}
