//! Knuth-Yao discrete Gaussian sampling from a binary probability matrix.
//!
//! The magnitude is drawn from the one-sided table with the zero row at
//! half weight, then a sign bit is applied; -0 folds onto 0, which makes
//! the two-sided distribution exactly symmetric without double-counting
//! zero. Rows are the binary expansions (MSB first) of the magnitude
//! probabilities to `precision_bits`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("bit source exhausted")]
    BitsExhausted,
    #[error("sampler walk failed to terminate")]
    Diverged,
}

/// Source of single random bits. Deterministic implementations may run
/// dry, which surfaces as [`SampleError::BitsExhausted`].
pub trait BitSource {
    fn next_bit(&mut self) -> Result<bool, SampleError>;
}

/// Adapter draining an `RngCore` one u64 at a time.
pub struct RngBitSource<'a, R: rand::RngCore> {
    rng: &'a mut R,
    cache: u64,
    remaining: u32,
}

impl<'a, R: rand::RngCore> RngBitSource<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        RngBitSource {
            rng,
            cache: 0,
            remaining: 0,
        }
    }
}

impl<R: rand::RngCore> BitSource for RngBitSource<'_, R> {
    fn next_bit(&mut self) -> Result<bool, SampleError> {
        if self.remaining == 0 {
            self.cache = self.rng.next_u64();
            self.remaining = 64;
        }
        let bit = self.cache & 1 == 1;
        self.cache >>= 1;
        self.remaining -= 1;
        Ok(bit)
    }
}

/// Finite scripted bit source; mainly for deterministic tests.
pub struct FixedBits {
    bits: Vec<bool>,
    pos: usize,
}

impl FixedBits {
    pub fn new(bits: Vec<bool>) -> Self {
        FixedBits { bits, pos: 0 }
    }
}

impl BitSource for FixedBits {
    fn next_bit(&mut self) -> Result<bool, SampleError> {
        if self.pos >= self.bits.len() {
            return Err(SampleError::BitsExhausted);
        }
        let b = self.bits[self.pos];
        self.pos += 1;
        Ok(b)
    }
}

const MAX_RESTARTS: u32 = 128;

/// Probability matrix and metadata for one (sigma, tail, precision) choice.
#[derive(Clone, Debug, PartialEq)]
pub struct KnuthYaoSampler {
    /// rows[m] = floor(P(magnitude = m) * 2^precision_bits)
    rows: Vec<u64>,
    pub sigma: f64,
    pub tail_bound: u32,
    pub precision_bits: u32,
}

impl KnuthYaoSampler {
    pub fn new(sigma: f64, tail_bound: u32, precision_bits: u32) -> KnuthYaoSampler {
        assert!(sigma > 0.0);
        assert!(precision_bits >= 8 && precision_bits <= 62);
        let rho = |k: u32| (-((k as f64) * (k as f64)) / (2.0 * sigma * sigma)).exp();
        // one-sided magnitude table with the zero row halved
        let mut weights: Vec<f64> = (0..=tail_bound).map(rho).collect();
        weights[0] /= 2.0;
        let total: f64 = weights.iter().sum();
        let scale = (1u64 << precision_bits) as f64;
        let rows: Vec<u64> = weights.iter().map(|w| (w / total * scale) as u64).collect();
        debug_assert!(rows.iter().sum::<u64>() <= 1u64 << precision_bits);
        KnuthYaoSampler {
            rows,
            sigma,
            tail_bound,
            precision_bits,
        }
    }

    /// The two-sided analytic pmf this sampler realizes (up to the
    /// 2^-precision rounding): P(k) = rho(k) / Z over [-tail, tail].
    pub fn analytic_pmf(&self) -> Vec<(i32, f64)> {
        let t = self.tail_bound as i32;
        let rho =
            |k: i32| (-((k as f64) * (k as f64)) / (2.0 * self.sigma * self.sigma)).exp();
        let z: f64 = (-t..=t).map(rho).sum();
        (-t..=t).map(|k| (k, rho(k) / z)).collect()
    }

    /// Reconstructed magnitude probability from the matrix rows, for
    /// verifying the expansion against the analytic pmf.
    pub fn row_probability(&self, magnitude: u32) -> f64 {
        self.rows[magnitude as usize] as f64 / (1u64 << self.precision_bits) as f64
    }

    fn walk_once(&self, bits: &mut impl BitSource) -> Result<Option<u32>, SampleError> {
        let mut d: i64 = 0;
        for col in (0..self.precision_bits).rev() {
            let b = bits.next_bit()?;
            d = 2 * d + b as i64;
            for row in (0..=self.tail_bound).rev() {
                d -= (self.rows[row as usize] >> col & 1) as i64;
                if d < 0 {
                    return Ok(Some(row));
                }
            }
        }
        // landed in the truncated probability mass; caller restarts
        Ok(None)
    }

    /// Draw one signed sample. |k| <= tail_bound always holds.
    pub fn sample(&self, bits: &mut impl BitSource) -> Result<i32, SampleError> {
        for _ in 0..MAX_RESTARTS {
            if let Some(magnitude) = self.walk_once(bits)? {
                let negative = bits.next_bit()?;
                let m = magnitude as i32;
                return Ok(if negative { -m } else { m });
            }
        }
        Err(SampleError::Diverged)
    }
}
