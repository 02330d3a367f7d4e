//! Ring-LWE encryption engine: parameter sets, negacyclic NTT arithmetic,
//! Knuth-Yao error sampling, key generation, the two-ciphertext encryption
//! routine, and a decryption oracle for round-trip testing.
//!
//! Keys follow the scheme underlying the cited software implementation:
//! a uniform, r1 and r2 Gaussian, p = r1 - a*r2 (all NTT domain), with
//! decryption recovering m from c1*r2 + c2.

mod ntt;
pub mod sampler;

use rand::Rng;
use thiserror::Error;

use ntt::NttTables;
pub use ntt::{add_mod, mul_mod, pow_mod, sub_mod};
pub use sampler::{BitSource, FixedBits, KnuthYaoSampler, RngBitSource, SampleError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RlweError {
    #[error("message must supply exactly {expected} bits, got {got}")]
    BadMessageLength { expected: usize, got: usize },
    #[error("unknown parameter set {0:?}")]
    UnknownParams(String),
    #[error("coefficient does not fit the 2-byte wire encoding")]
    CoefficientOverflow,
    #[error("ciphertext must be {expected} bytes, got {got}")]
    BadCiphertextLength { expected: usize, got: usize },
    #[error("sampling failed: {0}")]
    Sampling(#[from] SampleError),
}

/// Polynomial in coefficient representation, length N, entries in [0, q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingPoly {
    pub coeffs: Vec<u32>,
}

/// Polynomial in NTT representation; the separate type keeps the two
/// domains from mixing in arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NttPoly {
    pub coeffs: Vec<u32>,
}

/// Ciphertext pair, both halves NTT-domain in natural coefficient order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RlweCiphertext {
    pub c1: NttPoly,
    pub c2: NttPoly,
}

/// Public (a, p) and secret r2, all NTT domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RlweKeyPair {
    pub a: NttPoly,
    pub p: NttPoly,
    pub r2: NttPoly,
}

/// Ring dimension, modulus, Gaussian parameter, and derived tables.
#[derive(Clone, Debug)]
pub struct RlweParams {
    name: String,
    n: usize,
    q: u32,
    sigma: f64,
    tail_bound: u32,
    precision_bits: u32,
    tables: NttTables,
    sampler: KnuthYaoSampler,
}

impl PartialEq for RlweParams {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.n == other.n && self.q == other.q
    }
}

impl RlweParams {
    /// Default set: N=256, q=7681, sigma=4.516.
    pub fn r256() -> RlweParams {
        Self::build("R256", 256, 7681, 4.516, 54, 32)
    }

    /// Alternate set: N=512, q=12289, same sigma.
    pub fn r512() -> RlweParams {
        Self::build("R512", 512, 12289, 4.516, 54, 32)
    }

    pub fn by_name(name: &str) -> Result<RlweParams, RlweError> {
        match name {
            "R256" | "r256" => Ok(Self::r256()),
            "R512" | "r512" => Ok(Self::r512()),
            other => Err(RlweError::UnknownParams(other.to_string())),
        }
    }

    /// Non-default parameter sets, e.g. narrower noise for exactness tests.
    pub fn custom(
        name: &str,
        n: usize,
        q: u32,
        sigma: f64,
        tail_bound: u32,
        precision_bits: u32,
    ) -> RlweParams {
        Self::build(name, n, q, sigma, tail_bound, precision_bits)
    }

    fn build(
        name: &str,
        n: usize,
        q: u32,
        sigma: f64,
        tail_bound: u32,
        precision_bits: u32,
    ) -> RlweParams {
        assert!(n.is_power_of_two());
        assert_eq!((q as u64 - 1) % (2 * n as u64), 0, "need q = 1 mod 2N");
        assert!(
            tail_bound as f64 >= (12.0 * sigma).floor(),
            "tail bound below 12 sigma"
        );
        // psi = primitive 2N-th root of unity: generator^((q-1)/2N)
        let g = ntt::find_generator(q);
        let psi = pow_mod(g, (q as u64 - 1) / (2 * n as u64), q);
        assert_eq!(pow_mod(psi, n as u64, q), q - 1);
        RlweParams {
            name: name.to_string(),
            n,
            q,
            sigma,
            tail_bound,
            precision_bits,
            tables: NttTables::new(n, q, psi),
            sampler: KnuthYaoSampler::new(sigma, tail_bound, precision_bits),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tail_bound(&self) -> u32 {
        self.tail_bound
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn psi(&self) -> u32 {
        self.tables.psi
    }

    pub fn sampler(&self) -> &KnuthYaoSampler {
        &self.sampler
    }

    pub fn zero_ring(&self) -> RingPoly {
        RingPoly {
            coeffs: vec![0; self.n],
        }
    }

    pub fn fwd_ntt(&self, x: &RingPoly) -> NttPoly {
        NttPoly {
            coeffs: self.tables.forward(&x.coeffs),
        }
    }

    pub fn inv_ntt(&self, x: &NttPoly) -> RingPoly {
        RingPoly {
            coeffs: self.tables.inverse(&x.coeffs),
        }
    }

    pub fn ntt_add(&self, a: &NttPoly, b: &NttPoly) -> NttPoly {
        NttPoly {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| add_mod(x, y, self.q))
                .collect(),
        }
    }

    pub fn ntt_sub(&self, a: &NttPoly, b: &NttPoly) -> NttPoly {
        NttPoly {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| sub_mod(x, y, self.q))
                .collect(),
        }
    }

    /// Pointwise product; equals negacyclic convolution in the ring.
    pub fn ntt_mul(&self, a: &NttPoly, b: &NttPoly) -> NttPoly {
        NttPoly {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(&x, &y)| mul_mod(x, y, self.q))
                .collect(),
        }
    }

    /// Gaussian polynomial in coefficient form: N Knuth-Yao draws, signed
    /// values reduced into [0, q).
    pub fn sample_error_poly(&self, bits: &mut impl BitSource) -> Result<RingPoly, SampleError> {
        let mut coeffs = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let k = self.sampler.sample(bits)?;
            coeffs.push(if k < 0 {
                self.q - k.unsigned_abs()
            } else {
                k as u32
            });
        }
        Ok(RingPoly { coeffs })
    }

    /// Uniform NTT-domain polynomial.
    pub fn sample_uniform_ntt(&self, rng: &mut impl rand::RngCore) -> NttPoly {
        NttPoly {
            coeffs: (0..self.n).map(|_| rng.gen_range(0..self.q)).collect(),
        }
    }
}

/// Draw one Knuth-Yao sample with the parameter set's matrix.
pub fn knuth_yao_sample(
    params: &RlweParams,
    bits: &mut impl BitSource,
) -> Result<i32, SampleError> {
    params.sampler().sample(bits)
}

/// Key generation: a uniform, r1/r2 Gaussian, p = ntt(r1) - a * ntt(r2).
pub fn rlwe_keygen(params: &RlweParams, rng: &mut impl rand::RngCore) -> RlweKeyPair {
    keygen_with_noise(params, rng).0
}

/// Also returns r1 so the construction identity is checkable.
pub fn keygen_with_noise(
    params: &RlweParams,
    rng: &mut impl rand::RngCore,
) -> (RlweKeyPair, RingPoly) {
    let a = params.sample_uniform_ntt(rng);
    let (r1, r2) = {
        let mut bits = RngBitSource::new(rng);
        let r1 = params.sample_error_poly(&mut bits).expect("rng never dry");
        let r2 = params.sample_error_poly(&mut bits).expect("rng never dry");
        (r1, r2)
    };
    let r2_ntt = params.fwd_ntt(&r2);
    let p = params.ntt_sub(&params.fwd_ntt(&r1), &params.ntt_mul(&a, &r2_ntt));
    (
        RlweKeyPair {
            a,
            p,
            r2: r2_ntt,
        },
        r1,
    )
}

/// Scale message bits by floor(q/2) into ring coefficients.
pub fn encode_message(params: &RlweParams, bits: &[bool]) -> Result<RingPoly, RlweError> {
    if bits.len() != params.n() {
        return Err(RlweError::BadMessageLength {
            expected: params.n(),
            got: bits.len(),
        });
    }
    let half = params.q() / 2;
    Ok(RingPoly {
        coeffs: bits.iter().map(|&b| if b { half } else { 0 }).collect(),
    })
}

/// Encrypt N message bits under (a, p): sample e1, e2, e3, fold the encoded
/// message into e3, transform, then c1 = e2 + a*e1 and c2 = e3 + p*e1.
/// Deterministic given the error-bit stream.
pub fn rlwe_enc2(
    params: &RlweParams,
    a: &NttPoly,
    p: &NttPoly,
    m_bits: &[bool],
    error_bits: &mut impl BitSource,
) -> Result<RlweCiphertext, RlweError> {
    let encoded = encode_message(params, m_bits)?;
    let e1 = params.sample_error_poly(error_bits)?;
    let e2 = params.sample_error_poly(error_bits)?;
    let mut e3 = params.sample_error_poly(error_bits)?;
    for (c, m) in e3.coeffs.iter_mut().zip(&encoded.coeffs) {
        *c = add_mod(*c, *m, params.q());
    }
    let e1 = params.fwd_ntt(&e1);
    let e2 = params.fwd_ntt(&e2);
    let e3 = params.fwd_ntt(&e3);
    let c1 = params.ntt_add(&e2, &params.ntt_mul(a, &e1));
    let c2 = params.ntt_add(&e3, &params.ntt_mul(p, &e1));
    Ok(RlweCiphertext { c1, c2 })
}

/// Round-trip oracle: m' = inv_ntt(c1*r2 + c2), bit i set iff
/// m'[i] lies in (q/4, 3q/4).
pub fn rlwe_decrypt(params: &RlweParams, r2: &NttPoly, ct: &RlweCiphertext) -> Vec<bool> {
    let folded = params.ntt_add(&params.ntt_mul(&ct.c1, r2), &ct.c2);
    let m = params.inv_ntt(&folded);
    let q = params.q() as u64;
    m.coeffs
        .iter()
        .map(|&c| {
            let v = 4 * c as u64;
            v > q && v < 3 * q
        })
        .collect()
}

/// Wire format: c1 then c2, each coefficient 2-byte little-endian in
/// natural index order; 4N bytes total. This is the VRF hash preimage.
pub fn serialize_ciphertext(params: &RlweParams, ct: &RlweCiphertext) -> Result<Vec<u8>, RlweError> {
    let mut out = Vec::with_capacity(4 * params.n());
    for half in [&ct.c1, &ct.c2] {
        for &c in &half.coeffs {
            if c >= 1 << 16 {
                return Err(RlweError::CoefficientOverflow);
            }
            out.extend_from_slice(&(c as u16).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn deserialize_ciphertext(
    params: &RlweParams,
    bytes: &[u8],
) -> Result<RlweCiphertext, RlweError> {
    let n = params.n();
    if bytes.len() != 4 * n {
        return Err(RlweError::BadCiphertextLength {
            expected: 4 * n,
            got: bytes.len(),
        });
    }
    let mut halves = bytes
        .chunks_exact(2 * n)
        .map(|chunk| NttPoly {
            coeffs: chunk
                .chunks_exact(2)
                .map(|b| u16::from_le_bytes([b[0], b[1]]) as u32)
                .collect(),
        })
        .collect::<Vec<_>>();
    let c2 = halves.pop().unwrap();
    let c1 = halves.pop().unwrap();
    Ok(RlweCiphertext { c1, c2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(0x726c7765)
    }

    /// Schoolbook negacyclic product: an independent multiplication route.
    fn negacyclic_schoolbook(params: &RlweParams, a: &RingPoly, b: &RingPoly) -> RingPoly {
        let n = params.n();
        let q = params.q() as u64;
        let mut acc = vec![0i64; n];
        for i in 0..n {
            for j in 0..n {
                let prod = (a.coeffs[i] as u64 * b.coeffs[j] as u64 % q) as i64;
                let k = i + j;
                if k < n {
                    acc[k] = (acc[k] + prod) % q as i64;
                } else {
                    acc[k - n] = (acc[k - n] - prod).rem_euclid(q as i64);
                }
            }
        }
        RingPoly {
            coeffs: acc.iter().map(|&x| x as u32).collect(),
        }
    }

    fn random_poly(params: &RlweParams, rng: &mut impl RngCore) -> RingPoly {
        RingPoly {
            coeffs: (0..params.n()).map(|_| rng.gen_range(0..params.q())).collect(),
        }
    }

    fn random_bits(n: usize, rng: &mut impl RngCore) -> Vec<bool> {
        (0..n).map(|_| rng.gen_bool(0.5)).collect()
    }

    #[test]
    fn ntt_zero_and_impulse() {
        let p = RlweParams::r256();
        let zero = p.zero_ring();
        assert_eq!(p.fwd_ntt(&zero).coeffs, vec![0u32; 256]);
        let mut delta = p.zero_ring();
        delta.coeffs[0] = 1;
        assert_eq!(p.fwd_ntt(&delta).coeffs, vec![1u32; 256]);
        let ones = NttPoly {
            coeffs: vec![1u32; 256],
        };
        assert_eq!(p.inv_ntt(&ones), delta);
    }

    #[test]
    fn ntt_round_trip() {
        let mut rng = rng();
        for params in [RlweParams::r256(), RlweParams::r512()] {
            for _ in 0..100 {
                let x = random_poly(&params, &mut rng);
                assert_eq!(params.inv_ntt(&params.fwd_ntt(&x)), x);
            }
        }
    }

    #[test]
    fn pointwise_product_equals_schoolbook() {
        let mut rng = rng();
        for params in [RlweParams::r256(), RlweParams::r512()] {
            for _ in 0..100 {
                let a = random_poly(&params, &mut rng);
                let b = random_poly(&params, &mut rng);
                let via_ntt = params.inv_ntt(&params.ntt_mul(
                    &params.fwd_ntt(&a),
                    &params.fwd_ntt(&b),
                ));
                assert_eq!(via_ntt, negacyclic_schoolbook(&params, &a, &b));
            }
        }
    }

    #[test]
    fn keygen_construction_identity() {
        let params = RlweParams::r256();
        let mut rng = rng();
        let (kp, r1) = keygen_with_noise(&params, &mut rng);
        let expect = params.ntt_sub(&params.fwd_ntt(&r1), &params.ntt_mul(&kp.a, &kp.r2));
        assert_eq!(kp.p, expect);
    }

    #[test]
    fn keygen_differs_across_seeds() {
        let params = RlweParams::r256();
        let a1 = rlwe_keygen(&params, &mut ChaCha20Rng::seed_from_u64(1)).a;
        let a2 = rlwe_keygen(&params, &mut ChaCha20Rng::seed_from_u64(2)).a;
        assert_ne!(a1, a2);
    }

    #[test]
    fn encode_fixtures() {
        let params = RlweParams::r256();
        let zeros = encode_message(&params, &vec![false; 256]).unwrap();
        assert_eq!(zeros, params.zero_ring());
        let ones = encode_message(&params, &vec![true; 256]).unwrap();
        assert!(ones.coeffs.iter().all(|&c| c == 3840));
        let mut single = vec![false; 256];
        single[17] = true;
        let enc = encode_message(&params, &single).unwrap();
        assert_eq!(enc.coeffs[17], 3840);
        assert_eq!(enc.coeffs.iter().filter(|&&c| c != 0).count(), 1);
        assert!(matches!(
            encode_message(&params, &vec![false; 255]),
            Err(RlweError::BadMessageLength { .. })
        ));
    }

    #[test]
    fn encryption_is_deterministic_in_stream() {
        let params = RlweParams::r256();
        let mut rng = rng();
        let kp = rlwe_keygen(&params, &mut rng);
        let m = random_bits(256, &mut rng);
        let stream: Vec<bool> = (0..200_000).map(|_| rng.gen_bool(0.5)).collect();
        let ct1 = rlwe_enc2(
            &params,
            &kp.a,
            &kp.p,
            &m,
            &mut FixedBits::new(stream.clone()),
        )
        .unwrap();
        let ct2 = rlwe_enc2(&params, &kp.a, &kp.p, &m, &mut FixedBits::new(stream)).unwrap();
        assert_eq!(ct1, ct2);
        assert_eq!(
            serialize_ciphertext(&params, &ct1).unwrap(),
            serialize_ciphertext(&params, &ct2).unwrap()
        );
    }

    #[test]
    fn flipping_message_bit_changes_c2() {
        let params = RlweParams::r256();
        let mut rng = rng();
        let kp = rlwe_keygen(&params, &mut rng);
        let m = vec![false; 256];
        let mut m_flipped = m.clone();
        m_flipped[123] = true;
        let stream: Vec<bool> = (0..200_000).map(|_| rng.gen_bool(0.5)).collect();
        let ct = rlwe_enc2(
            &params,
            &kp.a,
            &kp.p,
            &m,
            &mut FixedBits::new(stream.clone()),
        )
        .unwrap();
        let ct_f = rlwe_enc2(&params, &kp.a, &kp.p, &m_flipped, &mut FixedBits::new(stream))
            .unwrap();
        assert_eq!(ct.c1, ct_f.c1);
        assert_ne!(ct.c2, ct_f.c2);
    }

    // The default parameter set carries an inherent ~3.6e-5 per-bit
    // decryption failure rate, so exact round-trips are checked on a
    // narrow-noise variant and the default set is held to a rate bound.
    #[test]
    fn round_trip_exact_with_narrow_noise() {
        let params = RlweParams::custom("R256-narrow", 256, 7681, 2.0, 24, 32);
        let mut rng = rng();
        let kp = rlwe_keygen(&params, &mut rng);
        for _ in 0..1000 {
            let m = random_bits(256, &mut rng);
            let mut bits = RngBitSource::new(&mut rng);
            let ct = rlwe_enc2(&params, &kp.a, &kp.p, &m, &mut bits).unwrap();
            assert_eq!(rlwe_decrypt(&params, &kp.r2, &ct), m);
        }
    }

    #[test]
    fn round_trip_default_params_failure_rate_in_band() {
        let params = RlweParams::r256();
        let mut rng = rng();
        let kp = rlwe_keygen(&params, &mut rng);
        let mut bit_errors = 0usize;
        let trials = 1000;
        for _ in 0..trials {
            let m = random_bits(256, &mut rng);
            let mut bits = RngBitSource::new(&mut rng);
            let ct = rlwe_enc2(&params, &kp.a, &kp.p, &m, &mut bits).unwrap();
            let got = rlwe_decrypt(&params, &kp.r2, &ct);
            bit_errors += got.iter().zip(&m).filter(|(a, b)| a != b).count();
        }
        // analytic rate is 3.57e-5/bit, i.e. about 9 expected bit errors
        // over 256,000 bits; far above 40 would indicate an engine bug
        assert!(bit_errors <= 40, "bit errors {bit_errors} out of band");
    }

    #[test]
    fn decrypt_all_zero_message() {
        let params = RlweParams::r256();
        let mut rng = rng();
        let kp = rlwe_keygen(&params, &mut rng);
        let m = vec![false; 256];
        let mut bits = RngBitSource::new(&mut rng);
        let ct = rlwe_enc2(&params, &kp.a, &kp.p, &m, &mut bits).unwrap();
        assert_eq!(rlwe_decrypt(&params, &kp.r2, &ct), m);
    }

    #[test]
    fn wrong_key_decrypts_to_coin_flips() {
        let params = RlweParams::r256();
        let mut rng = rng();
        let kp = rlwe_keygen(&params, &mut rng);
        let mut total_distance = 0usize;
        let trials = 100;
        for _ in 0..trials {
            let wrong = rlwe_keygen(&params, &mut rng);
            let m = random_bits(256, &mut rng);
            let mut bits = RngBitSource::new(&mut rng);
            let ct = rlwe_enc2(&params, &kp.a, &kp.p, &m, &mut bits).unwrap();
            let got = rlwe_decrypt(&params, &wrong.r2, &ct);
            total_distance += got.iter().zip(&m).filter(|(a, b)| a != b).count();
        }
        let mean = total_distance as f64 / trials as f64;
        assert!(
            mean >= 0.4 * 256.0 && mean <= 0.6 * 256.0,
            "mean hamming distance {mean}"
        );
    }

    #[test]
    fn ciphertext_wire_format() {
        let params = RlweParams::r256();
        let mut rng = rng();
        let kp = rlwe_keygen(&params, &mut rng);
        let zero_ct = RlweCiphertext {
            c1: NttPoly {
                coeffs: vec![0; 256],
            },
            c2: NttPoly {
                coeffs: vec![0; 256],
            },
        };
        let bytes = serialize_ciphertext(&params, &zero_ct).unwrap();
        assert_eq!(bytes.len(), 4 * 256);
        assert!(bytes.iter().all(|&b| b == 0));

        let m = random_bits(256, &mut rng);
        let mut bits = RngBitSource::new(&mut rng);
        let ct = rlwe_enc2(&params, &kp.a, &kp.p, &m, &mut bits).unwrap();
        let bytes = serialize_ciphertext(&params, &ct).unwrap();
        assert_eq!(bytes.len(), 4 * 256);
        assert_eq!(deserialize_ciphertext(&params, &bytes).unwrap(), ct);
        assert!(deserialize_ciphertext(&params, &bytes[1..]).is_err());
    }

    #[test]
    fn oversized_coefficient_rejected_by_serializer() {
        let params = RlweParams::custom("wide", 16, 786433, 2.0, 24, 32);
        let ct = RlweCiphertext {
            c1: NttPoly {
                coeffs: vec![1 << 16; 16],
            },
            c2: NttPoly {
                coeffs: vec![0; 16],
            },
        };
        assert_eq!(
            serialize_ciphertext(&params, &ct).unwrap_err(),
            RlweError::CoefficientOverflow
        );
    }
}
