//! Multiplicative-group arithmetic over a prime-order subgroup of Z_p*,
//! scalar encoding, Fiat-Shamir hashing into the scalar field, and the
//! hashed-ElGamal encryption used for delegated key hand-off.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::RngCore;
use thiserror::Error;

use crate::keccak::{keccak256_concat, Digest};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("ciphertext mask must be {expected} bytes, got {got}")]
    MalformedCiphertext { expected: usize, got: usize },
    #[error("encoded element must be {expected} bytes, got {got}")]
    BadElementLength { expected: usize, got: usize },
    #[error("element out of range")]
    ElementRange,
    #[error("scalar does not fit the 32-byte encoding")]
    ScalarWidth,
}

/// A scalar in [0, o), the exponent field of the working subgroup.
#[derive(Clone, PartialEq, Eq, Debug, Hash, PartialOrd, Ord)]
pub struct Scalar(pub(crate) BigUint);

/// A member of the order-o subgroup of Z_p*, stored in [1, p).
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct GroupElement(pub(crate) BigUint);

impl Scalar {
    pub fn from_u64(v: u64) -> Scalar {
        Scalar(BigUint::from(v))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Canonical 32-byte big-endian encoding, zero-padded.
    pub fn to_bytes(&self) -> [u8; 32] {
        let raw = self.0.to_bytes_be();
        assert!(raw.len() <= 32, "scalar exceeds 32-byte encoding");
        let mut out = [0u8; 32];
        out[32 - raw.len()..].copy_from_slice(&raw);
        out
    }
}

impl GroupElement {
    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

/// Parameters of the working group: prime modulus, prime subgroup order,
/// and two generators with no known discrete-log relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams {
    modulus_p: BigUint,
    order_o: BigUint,
    generator_g: GroupElement,
    generator_h: GroupElement,
    elem_len: usize,
    name: String,
}

// RFC 5114 section 2.3: 2048-bit MODP group with 256-bit prime-order subgroup.
const MODP2048_P: &str = "87A8E61DB4B6663CFFBBD19C651959998CEEF608660DD0F25D2CEED4435E3B00\
E00DF8F1D61957D4FAF7DF4561B2AA3016C3D91134096FAA3BF4296D830E9A7C\
209E0C6497517ABD5A8A9D306BCF67ED91F9E6725B4758C022E0B1EF4275BF7B\
6C5BFC11D45F9088B941F54EB1E59BB8BC39A0BF12307F5C4FDB70C581B23F76\
B63ACAE1CAA6B7902D52526735488A0EF13C6D9A51BFA4AB3AD8347796524D8E\
F6A167B5A41825D967E144E5140564251CCACB83E6B486F6B3CA3F7971506026\
C0B857F689962856DED4010ABD0BE621C3A3960A54E710C375F26375D7014103\
A4B54330C198AF126116D2276E11715F693877FAD7EF09CADB094AE91E1A1597";
const MODP2048_G: &str = "3FB32C9B73134D0B2E77506660EDBD484CA7B18F21EF205407F4793A1A0BA125\
10DBC15077BE463FFF4FED4AAC0BB555BE3A6C1B0C6B47B1BC3773BF7E8C6F62\
901228F8C28CBB18A55AE31341000A650196F931C77A57F2DDF463E5E9EC144B\
777DE62AAAB8A8628AC376D282D6ED3864E67982428EBC831D14348F6F2F9193\
B5045AF2767164E1DFC967C1FB3F2E55A4BD1BFFE83B9C80D052B985D182EA0A\
DB2A3B7313D3FE14C8484B1E052588B9B7D2BBD2DF016199ECD06E1557CD0915\
B3353BBB64E0EC377FD028370DF92B52C7891428CDC67EB6184B523D1DB246C3\
2F63078490F00EF8D647D148D47954515E2327CFEF98C582664B4C0F6CC41659";
const MODP2048_Q: &str = "8CF83642A709A097B447997640129DA299B1A47D1EB3750BA308B0FE64F5FBD3";

impl GroupParams {
    /// Default production group: RFC 5114 2048-bit MODP group with a
    /// 256-bit prime-order subgroup, so scalars fit the 32-byte encoding.
    pub fn modp2048() -> GroupParams {
        let p = BigUint::parse_bytes(MODP2048_P.as_bytes(), 16).unwrap();
        let g = BigUint::parse_bytes(MODP2048_G.as_bytes(), 16).unwrap();
        let q = BigUint::parse_bytes(MODP2048_Q.as_bytes(), 16).unwrap();
        Self::build(p, q, g, 256, "modp2048")
    }

    /// 64-bit safe-prime group for fast tests; elements encode in 8 bytes.
    pub fn toy64() -> GroupParams {
        let p = BigUint::from(9223372036854778487u64); // 0x8000000000000a77, safe prime
        let q = BigUint::from(4611686018427389243u64); // (p-1)/2, prime
        Self::build(p, q, BigUint::from(2u32), 8, "toy64")
    }

    /// Arbitrary subgroup parameters, mainly for worked-example fixtures.
    /// The caller is responsible for p prime, o prime, o | p-1, ord(g) = o.
    pub fn custom(p: u64, o: u64, g: u64) -> GroupParams {
        Self::build(
            BigUint::from(p),
            BigUint::from(o),
            BigUint::from(g),
            8,
            "custom",
        )
    }

    pub fn by_name(name: &str) -> Option<GroupParams> {
        match name {
            "modp2048" => Some(Self::modp2048()),
            "toy64" => Some(Self::toy64()),
            _ => None,
        }
    }

    fn build(p: BigUint, o: BigUint, g: BigUint, elem_len: usize, name: &str) -> GroupParams {
        assert!(o.bits() <= 256, "subgroup order must fit 32 bytes");
        let g = GroupElement(g);
        let mut params = GroupParams {
            modulus_p: p,
            order_o: o,
            generator_g: g,
            generator_h: GroupElement(BigUint::one()),
            elem_len,
            name: name.to_string(),
        };
        params.generator_h = params.derive_second_generator();
        params
    }

    /// Second base for DLEQ statements: hash-to-group of the primary
    /// generator, cofactor-exponentiated into the subgroup, so no party
    /// knows log_g(h).
    fn derive_second_generator(&self) -> GroupElement {
        let cofactor = (&self.modulus_p - BigUint::one()) / &self.order_o;
        let g_ser = self.element_to_bytes(&self.generator_g);
        let mut counter: u64 = 0;
        loop {
            let mut wide = Vec::with_capacity(self.elem_len + 32);
            let mut block: u64 = 0;
            while wide.len() < self.elem_len {
                let d = keccak256_concat(&[
                    &g_ser,
                    b"dleq-h",
                    &counter.to_be_bytes(),
                    &block.to_be_bytes(),
                ]);
                wide.extend_from_slice(d.as_bytes());
                block += 1;
            }
            let candidate = BigUint::from_bytes_be(&wide) % &self.modulus_p;
            let h = candidate.modpow(&cofactor, &self.modulus_p);
            if !h.is_one() && h != self.generator_g.0 {
                return GroupElement(h);
            }
            counter += 1;
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus_p
    }

    pub fn order(&self) -> &BigUint {
        &self.order_o
    }

    pub fn generator(&self) -> &GroupElement {
        &self.generator_g
    }

    pub fn second_generator(&self) -> &GroupElement {
        &self.generator_h
    }

    /// Fixed serialized width of a group element in bytes.
    pub fn element_len(&self) -> usize {
        self.elem_len
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(BigUint::one())
    }

    /// base^e mod p.
    pub fn exp(&self, base: &GroupElement, e: &Scalar) -> GroupElement {
        GroupElement(base.0.modpow(&e.0, &self.modulus_p))
    }

    /// g^e mod p for the primary generator.
    pub fn exp_g(&self, e: &Scalar) -> GroupElement {
        self.exp(&self.generator_g, e)
    }

    /// Group multiplication a*b mod p.
    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement(&a.0 * &b.0 % &self.modulus_p)
    }

    /// base^(-e) mod p, computed through the subgroup order.
    pub fn exp_neg(&self, base: &GroupElement, e: &Scalar) -> GroupElement {
        let neg = self.scalar_neg(e);
        self.exp(base, &neg)
    }

    pub fn scalar_from_biguint(&self, v: BigUint) -> Scalar {
        Scalar(v % &self.order_o)
    }

    pub fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &b.0) % &self.order_o)
    }

    pub fn scalar_sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &self.order_o - &b.0) % &self.order_o)
    }

    pub fn scalar_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar(&a.0 * &b.0 % &self.order_o)
    }

    pub fn scalar_neg(&self, a: &Scalar) -> Scalar {
        if a.0.is_zero() {
            Scalar(BigUint::zero())
        } else {
            Scalar(&self.order_o - &a.0)
        }
    }

    /// Uniform scalar in [0, o).
    pub fn random_scalar(&self, rng: &mut impl RngCore) -> Scalar {
        Scalar(rng.gen_biguint_below(&self.order_o))
    }

    /// Uniform nonzero scalar, suitable as a secret key.
    pub fn random_nonzero_scalar(&self, rng: &mut impl RngCore) -> Scalar {
        loop {
            let s = self.random_scalar(rng);
            if !s.is_zero() {
                return s;
            }
        }
    }

    /// Hash arbitrary bytes into the scalar field under a domain tag:
    /// keccak256(tag || data) taken big-endian, reduced mod o.
    pub fn hash_to_scalar(&self, domain_tag: &[u8], data: &[u8]) -> Scalar {
        let d = keccak256_concat(&[domain_tag, data]);
        Scalar(BigUint::from_bytes_be(d.as_bytes()) % &self.order_o)
    }

    pub fn digest_to_scalar(&self, domain_tag: &[u8], d: &Digest) -> Scalar {
        self.hash_to_scalar(domain_tag, d.as_bytes())
    }

    /// Fixed-width big-endian encoding of a group element.
    pub fn element_to_bytes(&self, e: &GroupElement) -> Vec<u8> {
        let raw = e.0.to_bytes_be();
        assert!(raw.len() <= self.elem_len, "element exceeds configured width");
        let mut out = vec![0u8; self.elem_len];
        out[self.elem_len - raw.len()..].copy_from_slice(&raw);
        out
    }

    pub fn element_from_bytes(&self, bytes: &[u8]) -> Result<GroupElement, GroupError> {
        if bytes.len() != self.elem_len {
            return Err(GroupError::BadElementLength {
                expected: self.elem_len,
                got: bytes.len(),
            });
        }
        let v = BigUint::from_bytes_be(bytes);
        if v.is_zero() || v >= self.modulus_p {
            return Err(GroupError::ElementRange);
        }
        Ok(GroupElement(v))
    }

    pub fn scalar_from_bytes(&self, bytes: &[u8]) -> Result<Scalar, GroupError> {
        if bytes.len() != 32 {
            return Err(GroupError::ScalarWidth);
        }
        Ok(Scalar(BigUint::from_bytes_be(bytes) % &self.order_o))
    }

    /// Membership check: value^o = 1 mod p.
    pub fn is_subgroup_member(&self, e: &GroupElement) -> bool {
        !e.0.is_zero()
            && e.0 < self.modulus_p
            && e.0.modpow(&self.order_o, &self.modulus_p).is_one()
    }
}

/// Hashed-ElGamal ciphertext: ephemeral g^r plus a keccak-derived mask
/// over the 32-byte scalar encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PkeCiphertext {
    pub ephemeral: GroupElement,
    pub mask: Vec<u8>,
}

const PKE_TAG: &[u8] = b"pke";

fn pke_keystream(params: &GroupParams, shared: &GroupElement) -> [u8; 32] {
    let d = keccak256_concat(&[PKE_TAG, &params.element_to_bytes(shared)]);
    *d.as_bytes()
}

/// Encrypt a scalar to the holder of sk with pk = g^sk.
pub fn pke_encrypt(
    params: &GroupParams,
    pk_receiver: &GroupElement,
    m: &Scalar,
    rng: &mut impl RngCore,
) -> PkeCiphertext {
    let r = params.random_nonzero_scalar(rng);
    let ephemeral = params.exp_g(&r);
    let shared = params.exp(pk_receiver, &r);
    let ks = pke_keystream(params, &shared);
    let mut mask = m.to_bytes().to_vec();
    for (b, k) in mask.iter_mut().zip(ks.iter()) {
        *b ^= k;
    }
    PkeCiphertext { ephemeral, mask }
}

/// Inverse of [`pke_encrypt`] under the matching secret key.
pub fn pke_decrypt(
    params: &GroupParams,
    sk_receiver: &Scalar,
    ct: &PkeCiphertext,
) -> Result<Scalar, GroupError> {
    if ct.mask.len() != 32 {
        return Err(GroupError::MalformedCiphertext {
            expected: 32,
            got: ct.mask.len(),
        });
    }
    let shared = params.exp(&ct.ephemeral, sk_receiver);
    let ks = pke_keystream(params, &shared);
    let mut plain = [0u8; 32];
    for i in 0..32 {
        plain[i] = ct.mask[i] ^ ks[i];
    }
    params.scalar_from_bytes(&plain)
}

impl PkeCiphertext {
    pub fn to_bytes(&self, params: &GroupParams) -> Vec<u8> {
        let mut out = params.element_to_bytes(&self.ephemeral);
        out.extend_from_slice(&self.mask);
        out
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<PkeCiphertext, GroupError> {
        let el = params.element_len();
        if bytes.len() != el + 32 {
            return Err(GroupError::MalformedCiphertext {
                expected: el + 32,
                got: bytes.len(),
            });
        }
        Ok(PkeCiphertext {
            ephemeral: params.element_from_bytes(&bytes[..el])?,
            mask: bytes[el..].to_vec(),
        })
    }
}
