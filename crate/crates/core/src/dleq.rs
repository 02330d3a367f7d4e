//! Chaum-Pedersen discrete-log-equality proof, made non-interactive with
//! the Fiat-Shamir transform. Proves knowledge of x with h1 = g1^x and
//! h2 = g2^x without revealing x; the challenge binds the full statement
//! plus a caller-supplied context so proofs cannot be replayed elsewhere.

use rand::RngCore;
use thiserror::Error;

use crate::group::{GroupElement, GroupError, GroupParams, Scalar};

const DLEQ_TAG: &[u8] = b"dleq-v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DleqError {
    #[error("witness does not satisfy the statement")]
    BadWitness,
    #[error("malformed proof encoding")]
    Malformed,
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// The claim "log_g1(h1) = log_g2(h2)".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DleqStatement {
    pub g1: GroupElement,
    pub g2: GroupElement,
    pub h1: GroupElement,
    pub h2: GroupElement,
}

impl DleqStatement {
    pub fn new(g1: GroupElement, g2: GroupElement, h1: GroupElement, h2: GroupElement) -> Self {
        DleqStatement { g1, g2, h1, h2 }
    }

    fn serialize(&self, params: &GroupParams) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 * params.element_len());
        for e in [&self.g1, &self.g2, &self.h1, &self.h2] {
            out.extend_from_slice(&params.element_to_bytes(e));
        }
        out
    }
}

/// Non-interactive proof (t1, t2, s) with the bound context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DleqProof {
    pub t1: GroupElement,
    pub t2: GroupElement,
    pub s: Scalar,
    pub context: Vec<u8>,
}

/// c = hash_to_scalar("dleq-v1", t1 || t2 || statement || context).
pub fn fiat_shamir_challenge(
    params: &GroupParams,
    t1: &GroupElement,
    t2: &GroupElement,
    stmt: &DleqStatement,
    context: &[u8],
) -> Scalar {
    let mut data = params.element_to_bytes(t1);
    data.extend_from_slice(&params.element_to_bytes(t2));
    data.extend_from_slice(&stmt.serialize(params));
    data.extend_from_slice(context);
    params.hash_to_scalar(DLEQ_TAG, &data)
}

/// Prove the statement with witness x: pick r, commit t1 = g1^r, t2 = g2^r,
/// derive c by Fiat-Shamir, respond s = r + c*x.
pub fn dleq_prove(
    params: &GroupParams,
    x: &Scalar,
    stmt: &DleqStatement,
    context: &[u8],
    rng: &mut impl RngCore,
) -> Result<DleqProof, DleqError> {
    if params.exp(&stmt.g1, x) != stmt.h1 || params.exp(&stmt.g2, x) != stmt.h2 {
        return Err(DleqError::BadWitness);
    }
    let r = params.random_scalar(rng);
    let t1 = params.exp(&stmt.g1, &r);
    let t2 = params.exp(&stmt.g2, &r);
    let c = fiat_shamir_challenge(params, &t1, &t2, stmt, context);
    let s = params.scalar_add(&r, &params.scalar_mul(&c, x));
    Ok(DleqProof {
        t1,
        t2,
        s,
        context: context.to_vec(),
    })
}

/// Check the commitment equations against the recomputed challenge:
/// g1^s * h1^(-c) = t1 and g2^s * h2^(-c) = t2.
pub fn dleq_verify(params: &GroupParams, stmt: &DleqStatement, proof: &DleqProof) -> bool {
    let c = fiat_shamir_challenge(params, &proof.t1, &proof.t2, stmt, &proof.context);
    verify_with_challenge(params, stmt, &proof.t1, &proof.t2, &proof.s, &c)
}

/// The interactive-protocol check, with an explicitly supplied challenge.
pub fn verify_with_challenge(
    params: &GroupParams,
    stmt: &DleqStatement,
    t1: &GroupElement,
    t2: &GroupElement,
    s: &Scalar,
    c: &Scalar,
) -> bool {
    let lhs1 = params.mul(&params.exp(&stmt.g1, s), &params.exp_neg(&stmt.h1, c));
    let lhs2 = params.mul(&params.exp(&stmt.g2, s), &params.exp_neg(&stmt.h2, c));
    lhs1 == *t1 && lhs2 == *t2
}

impl DleqProof {
    /// t1, t2 as group elements, s as a 32-byte scalar, context
    /// length-prefixed with 4 big-endian bytes.
    pub fn to_bytes(&self, params: &GroupParams) -> Vec<u8> {
        let mut out = params.element_to_bytes(&self.t1);
        out.extend_from_slice(&params.element_to_bytes(&self.t2));
        out.extend_from_slice(&self.s.to_bytes());
        out.extend_from_slice(&(self.context.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.context);
        out
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<DleqProof, DleqError> {
        let el = params.element_len();
        if bytes.len() < 2 * el + 32 + 4 {
            return Err(DleqError::Malformed);
        }
        let t1 = params.element_from_bytes(&bytes[..el])?;
        let t2 = params.element_from_bytes(&bytes[el..2 * el])?;
        let s = params.scalar_from_bytes(&bytes[2 * el..2 * el + 32])?;
        let ctx_len =
            u32::from_be_bytes(bytes[2 * el + 32..2 * el + 36].try_into().unwrap()) as usize;
        let rest = &bytes[2 * el + 36..];
        if rest.len() != ctx_len {
            return Err(DleqError::Malformed);
        }
        Ok(DleqProof {
            t1,
            t2,
            s,
            context: rest.to_vec(),
        })
    }
}
