//! Delegated key generation: every participant holds an on-chain DID key
//! pair plus a delegation pair, hands the delegation secret to the
//! off-chain worker under hashed-ElGamal, and binds the ciphertext to the
//! committed delegation key with a DLEQ proof (pk' = g^sk' and k = h^sk'
//! share the exponent, k published alongside).

use rand::RngCore;
use thiserror::Error;

use crate::dleq::{dleq_prove, dleq_verify, DleqError, DleqProof, DleqStatement};
use crate::group::{pke_decrypt, pke_encrypt, GroupElement, GroupError, GroupParams, PkeCiphertext, Scalar};
use crate::keccak::Digest;
use crate::ringsig::{ring_sign, Ring, RingSigError, SigMode};
use crate::vrf::VrfProof;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DelegationError {
    #[error("binding proof does not verify against the committed key")]
    BindingProofInvalid,
    #[error("decrypted delegation key does not match the committed public key")]
    KeyMismatch,
    #[error("delegator index {got} out of range for ring of {n}")]
    IndexOutOfRange { got: usize, n: usize },
    #[error("malformed package encoding")]
    Malformed,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Dleq(#[from] DleqError),
    #[error(transparent)]
    RingSig(#[from] RingSigError),
}

/// Dual DID key pairs: (sk_i, pk_i) for on-chain calls and the independent
/// delegation pair (sk'_i, pk'_i).
#[derive(Clone, Debug)]
pub struct ParticipantKeys {
    pub onchain: crate::ringsig::DidKeyPair,
    pub delegation: crate::ringsig::DidKeyPair,
}

/// The off-chain worker's receiving key pair.
#[derive(Clone, Debug)]
pub struct OffchainKeys {
    pub sk_off: Scalar,
    pub pk_off: GroupElement,
}

impl OffchainKeys {
    pub fn generate(params: &GroupParams, rng: &mut impl RngCore) -> OffchainKeys {
        let sk_off = params.random_nonzero_scalar(rng);
        let pk_off = params.exp_g(&sk_off);
        OffchainKeys { sk_off, pk_off }
    }
}

/// Everything the worker needs to sign on a participant's behalf: the
/// encrypted delegation secret, the DLEQ companion value k = h^sk', and
/// the binding proof tying both to the committed pk'.
#[derive(Clone, Debug, PartialEq)]
pub struct DelegationPackage {
    pub delegator_index: usize,
    pub encrypted_key: PkeCiphertext,
    pub companion: GroupElement,
    pub binding_proof: DleqProof,
}

/// Two fresh independent DID pairs for one participant.
pub fn generate_keys(
    params: &GroupParams,
    label: &str,
    rng: &mut impl RngCore,
) -> ParticipantKeys {
    ParticipantKeys {
        onchain: crate::ringsig::DidKeyPair::generate(params, label.to_string(), rng),
        delegation: crate::ringsig::DidKeyPair::generate(params, format!("{label}#delegate"), rng),
    }
}

/// Encrypt sk' to the worker and prove, bound to `context`, that the
/// ciphertext's key matches the committed pk'.
pub fn delegate_key(
    params: &GroupParams,
    keys: &ParticipantKeys,
    delegator_index: usize,
    pk_off: &GroupElement,
    context: &[u8],
    rng: &mut impl RngCore,
) -> DelegationPackage {
    let sk_prime = &keys.delegation.sk;
    let encrypted_key = pke_encrypt(params, pk_off, sk_prime, rng);
    let companion = params.exp(params.second_generator(), sk_prime);
    let stmt = DleqStatement::new(
        params.generator().clone(),
        params.second_generator().clone(),
        keys.delegation.pk.clone(),
        companion.clone(),
    );
    let binding_proof =
        dleq_prove(params, sk_prime, &stmt, context, rng).expect("witness satisfies statement");
    DelegationPackage {
        delegator_index,
        encrypted_key,
        companion,
        binding_proof,
    }
}

/// Check the package's DLEQ proof against a committed delegation key.
pub fn verify_package(
    params: &GroupParams,
    pkg: &DelegationPackage,
    committed_pk: &GroupElement,
) -> bool {
    let stmt = DleqStatement::new(
        params.generator().clone(),
        params.second_generator().clone(),
        committed_pk.clone(),
        pkg.companion.clone(),
    );
    dleq_verify(params, &stmt, &pkg.binding_proof)
}

/// Recover sk' from a package after its binding proof has been checked,
/// enforcing consistency with the committed key.
pub fn recover_delegated_key(
    params: &GroupParams,
    sk_off: &Scalar,
    pkg: &DelegationPackage,
    committed_pk: &GroupElement,
) -> Result<Scalar, DelegationError> {
    if !verify_package(params, pkg, committed_pk) {
        return Err(DelegationError::BindingProofInvalid);
    }
    let sk_prime = pke_decrypt(params, sk_off, &pkg.encrypted_key)?;
    if params.exp_g(&sk_prime) != *committed_pk {
        return Err(DelegationError::KeyMismatch);
    }
    Ok(sk_prime)
}

/// The worker-side signing path: validate the package, decrypt the
/// delegated key, and produce the proof object (vrf_output, seed, sigma).
pub fn offchain_sign(
    params: &GroupParams,
    sk_off: &Scalar,
    pkg: &DelegationPackage,
    seed: &Digest,
    vrf_output: &Digest,
    ring: &Ring,
    mode: SigMode,
    rng: &mut impl RngCore,
) -> Result<VrfProof, DelegationError> {
    if pkg.delegator_index >= ring.len() {
        return Err(DelegationError::IndexOutOfRange {
            got: pkg.delegator_index,
            n: ring.len(),
        });
    }
    let committed_pk = ring.pk(pkg.delegator_index);
    let sk_prime = recover_delegated_key(params, sk_off, pkg, committed_pk)?;
    let sigma = ring_sign(
        params,
        &sk_prime,
        pkg.delegator_index,
        seed,
        vrf_output,
        ring,
        mode,
        rng,
    )?;
    Ok(VrfProof {
        vrf_output: *vrf_output,
        seed: *seed,
        sigma,
    })
}

impl DelegationPackage {
    /// index (2-byte BE), pke ciphertext (group element + 32-byte mask),
    /// companion element, then the DLEQ proof encoding.
    pub fn to_bytes(&self, params: &GroupParams) -> Vec<u8> {
        let mut out = (self.delegator_index as u16).to_be_bytes().to_vec();
        out.extend_from_slice(&self.encrypted_key.to_bytes(params));
        out.extend_from_slice(&params.element_to_bytes(&self.companion));
        out.extend_from_slice(&self.binding_proof.to_bytes(params));
        out
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<DelegationPackage, DelegationError> {
        let el = params.element_len();
        let ct_len = el + 32;
        if bytes.len() < 2 + ct_len + el {
            return Err(DelegationError::Malformed);
        }
        let delegator_index = u16::from_be_bytes([bytes[0], bytes[1]]) as usize;
        let encrypted_key = PkeCiphertext::from_bytes(params, &bytes[2..2 + ct_len])?;
        let companion = params.element_from_bytes(&bytes[2 + ct_len..2 + ct_len + el])?;
        let binding_proof = DleqProof::from_bytes(params, &bytes[2 + ct_len + el..])?;
        Ok(DelegationPackage {
            delegator_index,
            encrypted_key,
            companion,
            binding_proof,
        })
    }
}
