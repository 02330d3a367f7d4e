//! DID-based ring signature binding (vrf_output, seed) to a set of public
//! keys. The default "generalized" form hides the signer slot behind an
//! OR-proof commitment list; the "literal" form pins the signer to slot 1
//! and serializes the commitment T, matching the classic layout exactly.
//! The generalized form reduces to the literal one when the signer sits
//! at slot 1: both hash the same transcript.
//!
//! Ring ordering is authenticated by the challenge hash; callers who
//! want per-session unlinkability should shuffle the ring before
//! signing.

use rand::RngCore;
use thiserror::Error;

use crate::group::{GroupElement, GroupError, GroupParams, Scalar};
use crate::keccak::Digest;

const RINGSIG_TAG: &[u8] = b"ringsig-v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingSigError {
    #[error("signer public key does not match ring slot {0}")]
    SignerNotInRing(usize),
    #[error("signer index {got} out of range for ring of {n}")]
    IndexOutOfRange { got: usize, n: usize },
    #[error("literal mode requires the signer at slot 1")]
    LiteralSignerSlot,
    #[error("ring must not be empty")]
    EmptyRing,
    #[error("duplicate public key in ring")]
    DuplicateKey,
    #[error("malformed signature encoding")]
    Malformed,
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Why a signature failed verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyReject {
    /// challenge/response vectors do not match the ring size
    LengthMismatch,
    /// literal mode: reconstructed e_1 does not equal the carried T
    CommitmentMismatch,
    /// sum of challenges differs from the recomputed hash
    ChallengeSumMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigMode {
    Generalized,
    Literal,
}

/// A DID label with its key pair; pk = g^sk.
#[derive(Clone, Debug)]
pub struct DidKeyPair {
    pub did: String,
    pub sk: Scalar,
    pub pk: GroupElement,
}

impl DidKeyPair {
    pub fn generate(params: &GroupParams, did: impl Into<String>, rng: &mut impl RngCore) -> Self {
        let sk = params.random_nonzero_scalar(rng);
        let pk = params.exp_g(&sk);
        DidKeyPair {
            did: did.into(),
            sk,
            pk,
        }
    }
}

/// Ordered set of (did, pk); the order is part of signature semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ring {
    members: Vec<(String, GroupElement)>,
}

impl Ring {
    pub fn new(members: Vec<(String, GroupElement)>) -> Result<Ring, RingSigError> {
        if members.is_empty() {
            return Err(RingSigError::EmptyRing);
        }
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                if members[i].1 == members[j].1 {
                    return Err(RingSigError::DuplicateKey);
                }
            }
        }
        Ok(Ring { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn pk(&self, i: usize) -> &GroupElement {
        &self.members[i].1
    }

    pub fn did(&self, i: usize) -> &str {
        &self.members[i].0
    }

    pub fn members(&self) -> &[(String, GroupElement)] {
        &self.members
    }

    pub fn replace_pk(&mut self, i: usize, pk: GroupElement) {
        self.members[i].1 = pk;
    }
}

/// Ring signature: per-slot challenges and responses, plus the commitment
/// T in literal mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingSig {
    pub mode: SigMode,
    pub challenges: Vec<Scalar>,
    pub responses: Vec<Scalar>,
    pub commitment_t: Option<GroupElement>,
}

/// Challenge over the bound message and commitment list:
/// hash_to_scalar("ringsig-v1", vrf_output || seed || a_1 || ... || a_k).
pub fn challenge_hash(
    params: &GroupParams,
    vrf_output: &Digest,
    seed: &Digest,
    commitments: &[GroupElement],
) -> Scalar {
    let mut data = Vec::with_capacity(64 + commitments.len() * params.element_len());
    data.extend_from_slice(vrf_output.as_bytes());
    data.extend_from_slice(seed.as_bytes());
    for a in commitments {
        data.extend_from_slice(&params.element_to_bytes(a));
    }
    params.hash_to_scalar(RINGSIG_TAG, &data)
}

pub fn ring_sign(
    params: &GroupParams,
    sk_signer: &Scalar,
    signer_index: usize,
    seed: &Digest,
    vrf_output: &Digest,
    ring: &Ring,
    mode: SigMode,
    rng: &mut impl RngCore,
) -> Result<RingSig, RingSigError> {
    let n = ring.len();
    if signer_index >= n {
        return Err(RingSigError::IndexOutOfRange {
            got: signer_index,
            n,
        });
    }
    if params.exp_g(sk_signer) != *ring.pk(signer_index) {
        return Err(RingSigError::SignerNotInRing(signer_index));
    }
    if mode == SigMode::Literal && signer_index != 0 {
        return Err(RingSigError::LiteralSignerSlot);
    }

    let t = params.random_nonzero_scalar(rng);
    let t_commit = params.exp_g(&t);

    let mut challenges = vec![Scalar::from_u64(0); n];
    let mut responses = vec![Scalar::from_u64(0); n];
    let mut commitments = vec![params.identity(); n];
    commitments[signer_index] = t_commit.clone();
    for i in 0..n {
        if i == signer_index {
            continue;
        }
        let c_i = params.random_scalar(rng);
        let s_i = params.random_scalar(rng);
        commitments[i] = params.mul(&params.exp_g(&s_i), &params.exp(ring.pk(i), &c_i));
        challenges[i] = c_i;
        responses[i] = s_i;
    }

    let c_prime = challenge_hash(params, vrf_output, seed, &commitments);

    // close the ring: c_j = c' - sum of the other challenges
    let mut others = Scalar::from_u64(0);
    for (i, c) in challenges.iter().enumerate() {
        if i != signer_index {
            others = params.scalar_add(&others, c);
        }
    }
    let c_j = params.scalar_sub(&c_prime, &others);
    let s_j = params.scalar_sub(&t, &params.scalar_mul(sk_signer, &c_j));
    challenges[signer_index] = c_j;
    responses[signer_index] = s_j;

    Ok(RingSig {
        mode,
        challenges,
        responses,
        commitment_t: match mode {
            SigMode::Generalized => None,
            SigMode::Literal => Some(t_commit),
        },
    })
}

/// Recompute each slot commitment e_i = g^{s_i} * Y_i^{c_i} and accept iff
/// the challenge hash equals the sum of the carried challenges (and, in
/// literal mode, e_1 reproduces the carried T).
pub fn ring_verify_detailed(
    params: &GroupParams,
    vrf_output: &Digest,
    seed: &Digest,
    sig: &RingSig,
    ring: &Ring,
) -> Result<(), VerifyReject> {
    let n = ring.len();
    if sig.challenges.len() != n || sig.responses.len() != n {
        return Err(VerifyReject::LengthMismatch);
    }
    if sig.mode == SigMode::Literal && sig.commitment_t.is_none() {
        return Err(VerifyReject::LengthMismatch);
    }

    let mut commitments = Vec::with_capacity(n);
    for i in 0..n {
        commitments.push(params.mul(
            &params.exp_g(&sig.responses[i]),
            &params.exp(ring.pk(i), &sig.challenges[i]),
        ));
    }

    if sig.mode == SigMode::Literal {
        // slot 1 must reproduce the carried commitment, which also feeds
        // the hash in place of e_1
        let t = sig.commitment_t.as_ref().unwrap();
        if commitments[0] != *t {
            return Err(VerifyReject::CommitmentMismatch);
        }
        commitments[0] = t.clone();
    }

    let c_prime = challenge_hash(params, vrf_output, seed, &commitments);
    let mut sum = Scalar::from_u64(0);
    for c in &sig.challenges {
        sum = params.scalar_add(&sum, c);
    }
    if sum != c_prime {
        return Err(VerifyReject::ChallengeSumMismatch);
    }
    Ok(())
}

pub fn ring_verify(
    params: &GroupParams,
    vrf_output: &Digest,
    seed: &Digest,
    sig: &RingSig,
    ring: &Ring,
) -> bool {
    ring_verify_detailed(params, vrf_output, seed, sig, ring).is_ok()
}

impl RingSig {
    /// version byte, mode byte, n as 2-byte big-endian, then the challenge
    /// and response scalars as 32-byte big-endian; literal mode appends T.
    pub fn to_bytes(&self, params: &GroupParams) -> Vec<u8> {
        let n = self.challenges.len();
        let mut out = Vec::with_capacity(4 + 64 * n + params.element_len());
        out.push(1u8);
        out.push(match self.mode {
            SigMode::Generalized => 0,
            SigMode::Literal => 1,
        });
        out.extend_from_slice(&(n as u16).to_be_bytes());
        for c in &self.challenges {
            out.extend_from_slice(&c.to_bytes());
        }
        for s in &self.responses {
            out.extend_from_slice(&s.to_bytes());
        }
        if let Some(t) = &self.commitment_t {
            out.extend_from_slice(&params.element_to_bytes(t));
        }
        out
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<RingSig, RingSigError> {
        if bytes.len() < 4 || bytes[0] != 1 {
            return Err(RingSigError::Malformed);
        }
        let mode = match bytes[1] {
            0 => SigMode::Generalized,
            1 => SigMode::Literal,
            _ => return Err(RingSigError::Malformed),
        };
        let n = u16::from_be_bytes([bytes[2], bytes[3]]) as usize;
        let scalars_end = 4 + 64 * n;
        let expected = match mode {
            SigMode::Generalized => scalars_end,
            SigMode::Literal => scalars_end + params.element_len(),
        };
        if bytes.len() != expected {
            return Err(RingSigError::Malformed);
        }
        let mut challenges = Vec::with_capacity(n);
        let mut responses = Vec::with_capacity(n);
        for i in 0..n {
            let off = 4 + 32 * i;
            challenges.push(params.scalar_from_bytes(&bytes[off..off + 32])?);
        }
        for i in 0..n {
            let off = 4 + 32 * (n + i);
            responses.push(params.scalar_from_bytes(&bytes[off..off + 32])?);
        }
        let commitment_t = match mode {
            SigMode::Generalized => None,
            SigMode::Literal => Some(params.element_from_bytes(&bytes[scalars_end..])?),
        };
        Ok(RingSig {
            mode,
            challenges,
            responses,
            commitment_t,
        })
    }
}
