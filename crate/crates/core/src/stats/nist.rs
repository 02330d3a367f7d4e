//! The eleven statistical tests used for the randomness evaluation, each
//! returning one or two p-values. Degenerate and worked-example behavior
//! follows the published test descriptions; every implemented test is
//! pinned to its worked example in the test suite before being trusted.

use thiserror::Error;

use super::bitseq::BitSequence;
use super::special::{erfc, igamc, normal_cdf, SpecialError};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("{test} requires at least {need} bits, got {got}")]
    TooShort {
        test: &'static str,
        need: usize,
        got: usize,
    },
    #[error("block length {m} invalid for {n} bits")]
    BadBlockLength { m: usize, n: usize },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("sequence length {0} unsupported for the spectral transform")]
    UnsupportedDftLength(usize),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Outcome of one test run: the row name and its p-values (serial emits
/// two). A run passes at significance alpha iff every p-value >= alpha.
#[derive(Clone, Debug, PartialEq)]
pub struct TestResult {
    pub name: &'static str,
    pub p_values: Vec<f64>,
}

impl TestResult {
    fn new(name: &'static str, p_values: Vec<f64>) -> TestResult {
        for p in &p_values {
            debug_assert!((0.0..=1.0).contains(p), "{name} p={p}");
        }
        TestResult { name, p_values }
    }

    pub fn pass(&self, alpha: f64) -> bool {
        self.p_values.iter().all(|&p| p >= alpha)
    }

    pub fn min_p(&self) -> f64 {
        self.p_values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

pub const NAME_MONOBIT: &str = "Frequency (Monobit) Test";
pub const NAME_BLOCK_FREQUENCY: &str = "Frequency Test within a Block";
pub const NAME_RUNS: &str = "Runs Test";
pub const NAME_LONGEST_RUN: &str = "Test for the Longest Run of Ones in a Block";
pub const NAME_DFT: &str = "Discrete Fourier Transform (Spectral) Test";
pub const NAME_NON_OVERLAPPING: &str = "Non-overlapping Template Matching Test";
pub const NAME_OVERLAPPING: &str = "Overlapping Template Matching Test";
pub const NAME_LINEAR_COMPLEXITY: &str = "Linear Complexity Test";
pub const NAME_SERIAL: &str = "Serial Test";
pub const NAME_APPROXIMATE_ENTROPY: &str = "Approximate Entropy Test";
pub const NAME_CUMULATIVE_SUMS: &str = "Cumulative Sums Test";

/// s_obs = |sum(2e-1)|/sqrt(n), p = erfc(s_obs/sqrt(2)).
pub fn frequency_monobit(seq: &BitSequence) -> Result<TestResult, StatsError> {
    let n = seq.len();
    if n == 0 {
        return Err(StatsError::TooShort {
            test: NAME_MONOBIT,
            need: 1,
            got: 0,
        });
    }
    let sum = 2.0 * seq.ones() as f64 - n as f64;
    let s_obs = sum.abs() / (n as f64).sqrt();
    Ok(TestResult::new(
        NAME_MONOBIT,
        vec![erfc(s_obs / std::f64::consts::SQRT_2)],
    ))
}

/// chi^2 = 4M sum(pi_i - 1/2)^2 over N = floor(n/M) blocks,
/// p = igamc(N/2, chi^2/2).
pub fn block_frequency(seq: &BitSequence, m: usize) -> Result<TestResult, StatsError> {
    let n = seq.len();
    if m < 2 || m > n {
        return Err(StatsError::BadBlockLength { m, n });
    }
    let blocks = n / m;
    let mut chi = 0.0;
    for b in 0..blocks {
        let ones = (0..m).filter(|&i| seq.get(b * m + i)).count();
        let pi = ones as f64 / m as f64;
        chi += (pi - 0.5) * (pi - 0.5);
    }
    chi *= 4.0 * m as f64;
    Ok(TestResult::new(
        NAME_BLOCK_FREQUENCY,
        vec![igamc(blocks as f64 / 2.0, chi / 2.0)?],
    ))
}

/// Total runs V against its expectation; the frequency pre-test failing
/// pins p to zero, as the published procedure prescribes.
pub fn runs(seq: &BitSequence) -> Result<TestResult, StatsError> {
    let n = seq.len();
    if n < 2 {
        return Err(StatsError::TooShort {
            test: NAME_RUNS,
            need: 2,
            got: n,
        });
    }
    let pi = seq.ones() as f64 / n as f64;
    if (pi - 0.5).abs() >= 2.0 / (n as f64).sqrt() {
        return Ok(TestResult::new(NAME_RUNS, vec![0.0]));
    }
    let mut v = 1u64;
    let mut prev = seq.get(0);
    for i in 1..n {
        let cur = seq.get(i);
        if cur != prev {
            v += 1;
        }
        prev = cur;
    }
    let nf = n as f64;
    let num = (v as f64 - 2.0 * nf * pi * (1.0 - pi)).abs();
    let den = 2.0 * (2.0 * nf).sqrt() * pi * (1.0 - pi);
    Ok(TestResult::new(NAME_RUNS, vec![erfc(num / den)]))
}

/// Longest run of ones per block, binned against the reference
/// probabilities for M in {8, 128, 10^4}.
pub fn longest_run_of_ones(seq: &BitSequence) -> Result<TestResult, StatsError> {
    let n = seq.len();
    if n < 128 {
        return Err(StatsError::TooShort {
            test: NAME_LONGEST_RUN,
            need: 128,
            got: n,
        });
    }
    let (m, classes, pi): (usize, &[usize], &[f64]) = if n < 6272 {
        (8, &[1, 2, 3, 4], &[0.2148, 0.3672, 0.2305, 0.1875])
    } else if n < 750_000 {
        (
            128,
            &[4, 5, 6, 7, 8, 9],
            &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124],
        )
    } else {
        (
            10_000,
            &[10, 11, 12, 13, 14, 15, 16],
            &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
        )
    };
    let k = classes.len() - 1;
    let blocks = n / m;
    let mut v = vec![0u64; classes.len()];
    for b in 0..blocks {
        let mut longest = 0usize;
        let mut run = 0usize;
        for i in 0..m {
            if seq.get(b * m + i) {
                run += 1;
                longest = longest.max(run);
            } else {
                run = 0;
            }
        }
        let lo = classes[0];
        let hi = classes[k];
        let idx = if longest <= lo {
            0
        } else if longest >= hi {
            k
        } else {
            longest - lo
        };
        v[idx] += 1;
    }
    let nf = blocks as f64;
    let chi: f64 = v
        .iter()
        .zip(pi)
        .map(|(&obs, &p)| {
            let e = nf * p;
            (obs as f64 - e) * (obs as f64 - e) / e
        })
        .sum();
    Ok(TestResult::new(
        NAME_LONGEST_RUN,
        vec![igamc(k as f64 / 2.0, chi / 2.0)?],
    ))
}

fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    let log_n = n.trailing_zeros();
    for i in 0..n {
        let j = ((i as u32).reverse_bits() >> (32 - log_n)) as usize;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = -2.0 * std::f64::consts::PI / len as f64;
        let (w_im, w_re) = ang.sin_cos();
        for base in (0..n).step_by(len) {
            let mut cur_re = 1.0;
            let mut cur_im = 0.0;
            for j in 0..len / 2 {
                let a = base + j;
                let b = a + len / 2;
                let tr = re[b] * cur_re - im[b] * cur_im;
                let ti = re[b] * cur_im + im[b] * cur_re;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                let nr = cur_re * w_re - cur_im * w_im;
                cur_im = cur_re * w_im + cur_im * w_re;
                cur_re = nr;
            }
        }
        len <<= 1;
    }
}

/// Peak heights of the first n/2 DFT bins of the +/-1 sequence against
/// the 95% threshold T = sqrt(n ln(1/0.05)).
pub fn dft_spectral(seq: &BitSequence) -> Result<TestResult, StatsError> {
    let n = seq.len();
    if n < 10 {
        return Err(StatsError::TooShort {
            test: NAME_DFT,
            need: 10,
            got: n,
        });
    }
    let x = seq.to_pm1();
    let mods: Vec<f64> = if n.is_power_of_two() && n >= 64 {
        let mut re = x;
        let mut im = vec![0.0; n];
        fft_in_place(&mut re, &mut im);
        (0..n / 2)
            .map(|i| (re[i] * re[i] + im[i] * im[i]).sqrt())
            .collect()
    } else if n <= 8192 {
        // direct transform for small or non-power-of-two lengths
        (0..n / 2)
            .map(|j| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (k, &v) in x.iter().enumerate() {
                    let ang = 2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                    re += v * ang.cos();
                    im += v * ang.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    } else {
        return Err(StatsError::UnsupportedDftLength(n));
    };
    let t = ((1.0f64 / 0.05).ln() * n as f64).sqrt();
    let n0 = 0.95 * n as f64 / 2.0;
    let n1 = mods.iter().filter(|&&m| m < t).count() as f64;
    let d = (n1 - n0) / (n as f64 * 0.95 * 0.05 / 4.0).sqrt();
    Ok(TestResult::new(
        NAME_DFT,
        vec![erfc(d.abs() / std::f64::consts::SQRT_2)],
    ))
}

/// Non-overlapping occurrences of an aperiodic template per block.
pub fn non_overlapping_template(
    seq: &BitSequence,
    template: &[bool],
    block_len: usize,
) -> Result<TestResult, StatsError> {
    let n = seq.len();
    let m = template.len();
    if m == 0 || m > block_len {
        return Err(StatsError::BadParameter(format!(
            "template length {m} incompatible with block length {block_len}"
        )));
    }
    let blocks = n / block_len;
    if blocks == 0 {
        return Err(StatsError::TooShort {
            test: NAME_NON_OVERLAPPING,
            need: block_len,
            got: n,
        });
    }
    let mf = block_len as f64;
    let mu = (mf - m as f64 + 1.0) / 2f64.powi(m as i32);
    let var = mf * (2f64.powi(-(m as i32)) - (2.0 * m as f64 - 1.0) * 2f64.powi(-2 * m as i32));
    let mut chi = 0.0;
    for b in 0..blocks {
        let base = b * block_len;
        let mut w = 0u64;
        let mut i = 0usize;
        while i + m <= block_len {
            let hit = (0..m).all(|j| seq.get(base + i + j) == template[j]);
            if hit {
                w += 1;
                i += m;
            } else {
                i += 1;
            }
        }
        chi += (w as f64 - mu) * (w as f64 - mu) / var;
    }
    Ok(TestResult::new(
        NAME_NON_OVERLAPPING,
        vec![igamc(blocks as f64 / 2.0, chi / 2.0)?],
    ))
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Overlapping all-ones template occurrences, binned 0..=K per block.
pub fn overlapping_template_with(
    seq: &BitSequence,
    m: usize,
    block_len: usize,
    k: usize,
) -> Result<TestResult, StatsError> {
    let n = seq.len();
    if m == 0 || m > block_len {
        return Err(StatsError::BadParameter(format!(
            "template length {m} incompatible with block length {block_len}"
        )));
    }
    let blocks = n / block_len;
    if blocks == 0 {
        return Err(StatsError::TooShort {
            test: NAME_OVERLAPPING,
            need: block_len,
            got: n,
        });
    }
    let lambda = (block_len - m + 1) as f64 / 2f64.powi(m as i32);
    let eta = lambda / 2.0;
    // occupancy probabilities for the compound-Poisson count
    let mut pi = Vec::with_capacity(k + 1);
    pi.push((-eta).exp());
    for u in 1..k {
        let mut s = 0.0;
        for l in 1..=u {
            s += (-eta).exp() * 2f64.powi(-(u as i32)) * eta.powi(l as i32) / factorial(l)
                * binomial(u - 1, l - 1);
        }
        pi.push(s);
    }
    pi.push(1.0 - pi.iter().sum::<f64>());

    let mut v = vec![0u64; k + 1];
    for b in 0..blocks {
        let base = b * block_len;
        let mut count = 0usize;
        for i in 0..=(block_len - m) {
            if (0..m).all(|j| seq.get(base + i + j)) {
                count += 1;
            }
        }
        v[count.min(k)] += 1;
    }
    let nf = blocks as f64;
    let chi: f64 = v
        .iter()
        .zip(&pi)
        .map(|(&obs, &p)| {
            let e = nf * p;
            (obs as f64 - e) * (obs as f64 - e) / e
        })
        .sum();
    Ok(TestResult::new(
        NAME_OVERLAPPING,
        vec![igamc(k as f64 / 2.0, chi / 2.0)?],
    ))
}

/// Standard geometry: all-ones template, block length 1032, K = 5.
pub fn overlapping_template(seq: &BitSequence, m: usize) -> Result<TestResult, StatsError> {
    overlapping_template_with(seq, m, 1032, 5)
}

/// Berlekamp-Massey linear complexity of a bit block, word-packed.
pub fn berlekamp_massey(bits: &[bool]) -> usize {
    let n = bits.len();
    let words = n.div_ceil(64) + 1;
    let mut c = vec![0u64; words];
    let mut b = vec![0u64; words];
    c[0] = 1;
    b[0] = 1;
    let mut l = 0usize;
    let mut m_idx: isize = -1;
    let get = |v: &[u64], i: usize| v[i / 64] >> (i % 64) & 1;
    for i in 0..n {
        // discrepancy d = s_i + sum_{j=1..L} c_j s_{i-j}
        let mut d = bits[i] as u64;
        for j in 1..=l {
            d ^= get(&c, j) & bits[i - j] as u64;
        }
        if d == 1 {
            let t = c.clone();
            let shift = (i as isize - m_idx) as usize;
            // c ^= b << shift
            let word_shift = shift / 64;
            let bit_shift = shift % 64;
            for w in (0..words).rev() {
                if w < word_shift {
                    break;
                }
                let mut v = b[w - word_shift] << bit_shift;
                if bit_shift > 0 && w > word_shift {
                    v |= b[w - word_shift - 1] >> (64 - bit_shift);
                }
                c[w] ^= v;
            }
            if l <= i / 2 {
                l = i + 1 - l;
                m_idx = i as isize;
                b = t;
            }
        }
    }
    l
}

/// Linear complexity per M-bit block against the reference class
/// probabilities; p = igamc(3, chi^2/2).
pub fn linear_complexity(seq: &BitSequence, m: usize) -> Result<TestResult, StatsError> {
    let n = seq.len();
    if m < 4 {
        return Err(StatsError::BadParameter(format!("block length {m} too small")));
    }
    let blocks = n / m;
    if blocks == 0 {
        return Err(StatsError::TooShort {
            test: NAME_LINEAR_COMPLEXITY,
            need: m,
            got: n,
        });
    }
    const PI: [f64; 7] = [0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833];
    let mf = m as f64;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mu = mf / 2.0 + (9.0 - sign) / 36.0 - (mf / 3.0 + 2.0 / 9.0) / 2f64.powi(m as i32);
    let mut v = [0u64; 7];
    let mut block = vec![false; m];
    for bi in 0..blocks {
        for (i, slot) in block.iter_mut().enumerate() {
            *slot = seq.get(bi * m + i);
        }
        let l = berlekamp_massey(&block);
        // T = (-1)^M (L - mu) + 2/9
        let t = sign * (l as f64 - mu) + 2.0 / 9.0;
        let idx = if t <= -2.5 {
            0
        } else if t <= -1.5 {
            1
        } else if t <= -0.5 {
            2
        } else if t <= 0.5 {
            3
        } else if t <= 1.5 {
            4
        } else if t <= 2.5 {
            5
        } else {
            6
        };
        v[idx] += 1;
    }
    let nf = blocks as f64;
    let chi: f64 = v
        .iter()
        .zip(PI)
        .map(|(&obs, p)| {
            let e = nf * p;
            (obs as f64 - e) * (obs as f64 - e) / e
        })
        .sum();
    Ok(TestResult::new(
        NAME_LINEAR_COMPLEXITY,
        vec![igamc(3.0, chi / 2.0)?],
    ))
}

/// psi^2_m statistic over wrapped m-bit windows.
fn psi_sq(seq: &BitSequence, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = seq.len();
    let mut counts = vec![0u64; 1 << m];
    let mask = (1usize << m) - 1;
    let mut window = 0usize;
    // prime the window with the first m-1 bits
    for i in 0..m - 1 {
        window = window << 1 | seq.get(i) as usize;
    }
    for i in 0..n {
        let next = seq.get((i + m - 1) % n) as usize;
        window = (window << 1 | next) & mask;
        counts[window] += 1;
    }
    let nf = n as f64;
    (1u64 << m) as f64 / nf * counts.iter().map(|&c| (c * c) as f64).sum::<f64>() - nf
}

/// Two p-values from the first and second differences of psi^2.
pub fn serial(seq: &BitSequence, m: usize) -> Result<TestResult, StatsError> {
    let n = seq.len();
    if m < 2 {
        return Err(StatsError::BadParameter("serial needs m >= 2".into()));
    }
    if n < m + 2 {
        return Err(StatsError::TooShort {
            test: NAME_SERIAL,
            need: m + 2,
            got: n,
        });
    }
    let p2 = psi_sq(seq, m);
    let p1 = psi_sq(seq, m - 1);
    let p0 = psi_sq(seq, m.saturating_sub(2));
    let d1 = p2 - p1;
    let d2 = p2 - 2.0 * p1 + p0;
    let pv1 = igamc(2f64.powi(m as i32 - 2), d1 / 2.0)?;
    let pv2 = igamc(2f64.powi(m as i32 - 3), d2 / 2.0)?;
    Ok(TestResult::new(NAME_SERIAL, vec![pv1, pv2]))
}

/// ApEn(m) = phi_m - phi_{m+1}; chi^2 = 2n (ln 2 - ApEn).
pub fn approximate_entropy(seq: &BitSequence, m: usize) -> Result<TestResult, StatsError> {
    let n = seq.len();
    if n < m + 2 {
        return Err(StatsError::TooShort {
            test: NAME_APPROXIMATE_ENTROPY,
            need: m + 2,
            got: n,
        });
    }
    let phi = |mm: usize| -> f64 {
        if mm == 0 {
            return 0.0;
        }
        let mut counts = vec![0u64; 1 << mm];
        let mask = (1usize << mm) - 1;
        let mut window = 0usize;
        for i in 0..mm - 1 {
            window = window << 1 | seq.get(i) as usize;
        }
        for i in 0..n {
            let next = seq.get((i + mm - 1) % n) as usize;
            window = (window << 1 | next) & mask;
            counts[window] += 1;
        }
        let nf = n as f64;
        counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| c as f64 / nf * (c as f64 / nf).ln())
            .sum()
    };
    let apen = phi(m) - phi(m + 1);
    let chi = 2.0 * n as f64 * (std::f64::consts::LN_2 - apen);
    Ok(TestResult::new(
        NAME_APPROXIMATE_ENTROPY,
        vec![igamc(2f64.powi(m as i32 - 1), chi / 2.0)?],
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CusumMode {
    Forward,
    Backward,
}

/// Maximum partial-sum excursion of the +/-1 walk.
pub fn cumulative_sums(seq: &BitSequence, mode: CusumMode) -> Result<TestResult, StatsError> {
    let n = seq.len();
    if n < 2 {
        return Err(StatsError::TooShort {
            test: NAME_CUMULATIVE_SUMS,
            need: 2,
            got: n,
        });
    }
    let mut s = 0i64;
    let mut z = 0i64;
    let take = |i: usize| -> i64 {
        let idx = match mode {
            CusumMode::Forward => i,
            CusumMode::Backward => n - 1 - i,
        };
        if seq.get(idx) {
            1
        } else {
            -1
        }
    };
    for i in 0..n {
        s += take(i);
        z = z.max(s.abs());
    }
    let nf = n as f64;
    let zf = z as f64;
    let sqrt_n = nf.sqrt();
    let k_lo1 = ((-nf / zf + 1.0) / 4.0).floor() as i64;
    let k_hi = ((nf / zf - 1.0) / 4.0).floor() as i64;
    let mut sum1 = 0.0;
    for k in k_lo1..=k_hi {
        sum1 += normal_cdf((4.0 * k as f64 + 1.0) * zf / sqrt_n)
            - normal_cdf((4.0 * k as f64 - 1.0) * zf / sqrt_n);
    }
    let k_lo2 = ((-nf / zf - 3.0) / 4.0).floor() as i64;
    let mut sum2 = 0.0;
    for k in k_lo2..=k_hi {
        sum2 += normal_cdf((4.0 * k as f64 + 3.0) * zf / sqrt_n)
            - normal_cdf((4.0 * k as f64 + 1.0) * zf / sqrt_n);
    }
    let p = (1.0 - sum1 + sum2).clamp(0.0, 1.0);
    Ok(TestResult::new(NAME_CUMULATIVE_SUMS, vec![p]))
}

/// All aperiodic templates of length m, in ascending numeric order.
/// A template is aperiodic when no proper shift of it matches its own
/// prefix, the precondition for the non-overlapping statistic.
pub fn aperiodic_templates(m: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    'outer: for v in 0..(1usize << m) {
        let bits: Vec<bool> = (0..m).map(|i| v >> (m - 1 - i) & 1 == 1).collect();
        for k in 1..m {
            if bits[k..] == bits[..m - k] {
                continue 'outer;
            }
        }
        out.push(bits);
    }
    out
}
