//! Entropy estimators: the empirical byte-histogram Shannon estimator,
//! the closed-form participant-count formula evaluated in log-space, and
//! the per-block ones-ratio distribution check.

use super::bitseq::BitSequence;
use super::nist::StatsError;

/// Shannon entropy in bits per byte from the byte histogram.
pub fn empirical_shannon_entropy(bytes: &[u8]) -> Result<f64, StatsError> {
    if bytes.len() < 256 {
        return Err(StatsError::TooShort {
            test: "empirical byte entropy",
            need: 256,
            got: bytes.len(),
        });
    }
    let mut counts = [0u64; 256];
    for &b in bytes {
        counts[b as usize] += 1;
    }
    let n = bytes.len() as f64;
    Ok(-counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / n;
            f * f.log2()
        })
        .sum::<f64>())
}

/// H = -(1/Z * 2^(-256 n)) * log2(1/Z * 2^(-256 n)) * 2^256, evaluated in
/// log-space: with L = -256 n - log2 Z, H = -L * 2^(L + 256).
pub fn closed_form_entropy(participants: u32, z: f64) -> f64 {
    assert!(z > 0.0, "normalization must be positive");
    let l = -256.0 * participants as f64 - z.log2();
    -l * (l + 256.0).exp2()
}

/// Ones-ratio per fixed-size block plus the overall mean.
pub fn ones_ratio_blocks(seq: &BitSequence, block_bits: usize) -> Result<(Vec<f64>, f64), StatsError> {
    let n = seq.len();
    if block_bits == 0 || n < block_bits {
        return Err(StatsError::TooShort {
            test: "ones-ratio blocks",
            need: block_bits.max(1),
            got: n,
        });
    }
    let blocks = n / block_bits;
    let mut ratios = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let ones = (0..block_bits)
            .filter(|&i| seq.get(b * block_bits + i))
            .count();
        ratios.push(ones as f64 / block_bits as f64);
    }
    let mean = ratios.iter().sum::<f64>() / blocks as f64;
    Ok((ratios, mean))
}
