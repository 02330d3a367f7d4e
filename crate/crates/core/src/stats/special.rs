//! Numerical special functions backing the statistical tests: the
//! complementary error function and the upper regularized incomplete
//! gamma function, each accurate to well past ten significant digits.
//! The two are implemented by independent routes (Taylor series plus
//! Laplace continued fraction for erfc; power series plus Lentz
//! continued fraction for igamc) so the identity igamc(1/2, x^2) =
//! erfc(x) is a genuine cross-check.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpecialError {
    #[error("igamc requires a > 0 and x >= 0, got a={a}, x={x}")]
    Domain { a: f64, x: f64 },
    #[error("series or continued fraction failed to converge")]
    NoConvergence,
}

const MAX_ITER: usize = 600;
const EPS: f64 = 1e-16;

/// ln Gamma via the Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn erf_series(x: f64) -> f64 {
    // erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1))
    if x == 0.0 {
        return 0.0;
    }
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for n in 1..MAX_ITER {
        term *= -x2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < sum.abs() * EPS {
            return sum * 2.0 / std::f64::consts::PI.sqrt();
        }
    }
    f64::NAN
}

fn erfc_cf(x: f64) -> f64 {
    // Laplace continued fraction:
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + (2/2)/(x + ...)))
    // evaluated with the modified Lentz algorithm.
    let tiny = 1e-300;
    let mut f = x.max(tiny);
    let mut c = f;
    let mut d = 0.0;
    for n in 1..MAX_ITER {
        let a_n = n as f64 / 2.0;
        d = x + a_n * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a_n / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            return (-x * x).exp() / std::f64::consts::PI.sqrt() / f;
        }
    }
    f64::NAN
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.5 {
        1.0 - erf_series(x)
    } else if x > 27.0 {
        0.0
    } else {
        erfc_cf(x)
    }
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.abs() < 2.5 {
        erf_series(x)
    } else {
        1.0 - erfc(x.abs()) * x.signum()
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn igamc_series(a: f64, x: f64) -> Result<f64, SpecialError> {
    // lower incomplete P(a,x) by power series, return Q = 1 - P
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            let p = sum * (-x + a * x.ln() - ln_gamma(a)).exp();
            return Ok(1.0 - p);
        }
    }
    Err(SpecialError::NoConvergence)
}

fn igamc_cf(a: f64, x: f64) -> Result<f64, SpecialError> {
    // Q(a,x) by continued fraction, modified Lentz
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok((-x + a * x.ln() - ln_gamma(a)).exp() * h);
        }
    }
    Err(SpecialError::NoConvergence)
}

/// Upper regularized incomplete gamma function Q(a, x).
pub fn igamc(a: f64, x: f64) -> Result<f64, SpecialError> {
    if a <= 0.0 || x < 0.0 || !a.is_finite() || !x.is_finite() {
        return Err(SpecialError::Domain { a, x });
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        igamc_series(a, x)
    } else {
        igamc_cf(a, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn erfc_reference_values() {
        // reference digits from an independent arbitrary-precision oracle
        let cases = [
            (0.0, 1.0),
            (0.5, 0.479500122186953),
            (1.0, 0.157299207050285),
            (1.539, 0.0295197855204864),
            (2.1, 0.00297946665633298),
            (2.6, 0.000236034416529349),
            (3.5, 7.43098372341413e-7),
            (5.0, 1.53745979442803e-12),
            (0.086, 0.903198099189648),
        ];
        for (x, want) in cases {
            assert!(close(erfc(x), want, 1e-12), "erfc({x}) = {} != {want}", erfc(x));
        }
        assert!(close(erfc(-1.0), 2.0 - 0.157299207050285, 1e-12));
    }

    #[test]
    fn igamc_reference_values() {
        let cases = [
            (0.5, 0.25, 0.4795001221869534),
            (0.5, 1.0, 0.15729920705028513),
            (0.5, 2.0, 0.04550026389635841),
            (0.5, 4.0, 0.004677734981047266),
            (1.5, 0.5, 0.8012519569012008),
            (2.0, 0.8, 0.8087921354109988),
            (1.0, 1.0667, 0.3441423152637113),
            (4.0, 5.0219, 0.2619651819231363),
            (3.0, 2.5, 0.5438131158833295),
            (26.0, 30.0, 0.20835736466733292),
            (8.0, 3.0, 0.9880954961436426),
        ];
        for (a, x, want) in cases {
            let got = igamc(a, x).unwrap();
            assert!(close(got, want, 1e-11), "igamc({a},{x}) = {got} != {want}");
        }
    }

    #[test]
    fn igamc_boundaries() {
        assert_eq!(igamc(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(igamc(7.5, 0.0).unwrap(), 1.0);
        assert!(igamc(0.0, 1.0).is_err());
        assert!(igamc(1.0, -1.0).is_err());
        // igamc(1, x) = exp(-x)
        for x in [0.1, 1.0, 5.0, 20.0] {
            assert!(close(igamc(1.0, x).unwrap(), (-x).exp(), 1e-12));
        }
    }

    #[test]
    fn igamc_erfc_identity_cross_check() {
        // igamc(1/2, x) = erfc(sqrt(x)); the two sides use disjoint code
        for x in [0.25, 1.0, 4.0] {
            let lhs = igamc(0.5, x).unwrap();
            let rhs = erfc(x.sqrt());
            assert!(
                (lhs - rhs).abs() < 1e-10,
                "igamc(0.5,{x})={lhs} vs erfc={rhs}"
            );
        }
    }

    #[test]
    fn erf_and_cdf_sanity() {
        assert!(close(erf(0.5) + erfc(0.5), 1.0, 1e-14));
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.6448536269514722) - 0.95).abs() < 1e-10);
        assert!((normal_cdf(-8.0)).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_reference() {
        assert!(close(ln_gamma(1.0), 0.0_f64.max(0.0), 1e-12) || ln_gamma(1.0).abs() < 1e-13);
        assert!(close(ln_gamma(5.0), 24.0_f64.ln(), 1e-13));
        assert!(close(ln_gamma(0.5), std::f64::consts::PI.sqrt().ln(), 1e-13));
        assert!(close(ln_gamma(10.5), 13.940625219403763, 1e-12));
    }
}
