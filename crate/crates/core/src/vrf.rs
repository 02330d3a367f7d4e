//! The formal VRF facade: Gen produces all key material, Eval turns a seed
//! into (output, proof) through the derandomized Ring-LWE path plus the
//! delegated ring signature, Ver checks the proof against the ring.
//!
//! Eval is a pure function of (seed, key material, ring, delegator): the
//! signing and encryption randomness is itself derived from the seed and
//! the delegation secret, so repeated calls are byte-identical.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::delegation::{
    delegate_key, generate_keys, offchain_sign, DelegationError, OffchainKeys, ParticipantKeys,
};
use crate::group::{GroupParams, Scalar};
use crate::keccak::{keccak256_concat, Digest};
use crate::ringsig::{ring_verify, Ring, RingSig, RingSigError, SigMode};
use crate::rlwe::{rlwe_keygen, NttPoly, RlweKeyPair, RlweParams};
use crate::worker::rlwe_processing;

#[derive(Debug, Error)]
pub enum VrfError {
    #[error("unknown group parameter set {0:?}")]
    UnknownGroup(String),
    #[error("delegator index {got} out of range for ring of {n}")]
    DelegatorOutOfRange { got: usize, n: usize },
    #[error("participant count must be at least 1")]
    NoParticipants,
    #[error("malformed proof encoding")]
    Malformed,
    #[error(transparent)]
    Rlwe(#[from] crate::rlwe::RlweError),
    #[error(transparent)]
    Delegation(#[from] DelegationError),
    #[error(transparent)]
    RingSig(#[from] RingSigError),
}

/// The verifiable object handed back on-chain: output, seed, signature.
#[derive(Clone, Debug, PartialEq)]
pub struct VrfProof {
    pub vrf_output: Digest,
    pub seed: Digest,
    pub sigma: RingSig,
}

/// Names selecting the group and lattice parameter sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VrfConfig {
    pub group: String,
    pub rlwe: String,
    pub participants: usize,
    pub sig_mode: SigMode,
}

impl Default for VrfConfig {
    fn default() -> Self {
        VrfConfig {
            group: "modp2048".into(),
            rlwe: "R256".into(),
            participants: 5,
            sig_mode: SigMode::Generalized,
        }
    }
}

/// Everything Gen produces: per-participant dual DID pairs, the lattice
/// key pair, the off-chain key pair, and the parameter handles.
#[derive(Clone, Debug)]
pub struct VrfKeyMaterial {
    pub group: GroupParams,
    pub rlwe_params: RlweParams,
    pub participants: Vec<ParticipantKeys>,
    pub rlwe: RlweKeyPair,
    pub offchain: OffchainKeys,
    pub sig_mode: SigMode,
}

/// Gen: build all key material for the named parameter sets.
pub fn gen(config: &VrfConfig, rng: &mut impl RngCore) -> Result<VrfKeyMaterial, VrfError> {
    if config.participants == 0 {
        return Err(VrfError::NoParticipants);
    }
    let group = GroupParams::by_name(&config.group)
        .ok_or_else(|| VrfError::UnknownGroup(config.group.clone()))?;
    let rlwe_params = RlweParams::by_name(&config.rlwe)?;
    let participants = (0..config.participants)
        .map(|i| generate_keys(&group, &format!("did:pqvrf:participant-{i}"), rng))
        .collect();
    let rlwe = rlwe_keygen(&rlwe_params, rng);
    let offchain = OffchainKeys::generate(&group, rng);
    Ok(VrfKeyMaterial {
        group,
        rlwe_params,
        participants,
        rlwe,
        offchain,
        sig_mode: config.sig_mode,
    })
}

impl VrfKeyMaterial {
    /// The ring of committed delegation keys, in participant order.
    pub fn ring(&self) -> Ring {
        Ring::new(
            self.participants
                .iter()
                .map(|p| (p.delegation.did.clone(), p.delegation.pk.clone()))
                .collect(),
        )
        .expect("participant keys are distinct")
    }
}

fn derandomized_rng(sk: &Scalar, seed: &Digest, tag: &[u8]) -> ChaCha20Rng {
    let d = keccak256_concat(&[&sk.to_bytes(), seed.as_bytes(), tag]);
    ChaCha20Rng::from_seed(*d.as_bytes())
}

/// Eval plus the raw ciphertext halves, for callers that feed the ledger.
pub fn eval_full(
    seed: &Digest,
    km: &VrfKeyMaterial,
    ring: &Ring,
    delegator: usize,
) -> Result<(Digest, VrfProof, Vec<u8>, Vec<u8>), VrfError> {
    if delegator >= ring.len() {
        return Err(VrfError::DelegatorOutOfRange {
            got: delegator,
            n: ring.len(),
        });
    }
    let (c1, c2) = rlwe_processing(seed, &km.rlwe, &km.rlwe_params)?;
    let vrf_output = keccak256_concat(&[&c1, &c2]);
    // all remaining randomness flows from (delegation secret, seed)
    let sk_prime = &km.participants[delegator].delegation.sk;
    let mut rng = derandomized_rng(sk_prime, seed, b"eval-derand");
    let pkg = delegate_key(
        &km.group,
        &km.participants[delegator],
        delegator,
        &km.offchain.pk_off,
        seed.as_bytes(),
        &mut rng,
    );
    let proof = offchain_sign(
        &km.group,
        &km.offchain.sk_off,
        &pkg,
        seed,
        &vrf_output,
        ring,
        km.sig_mode,
        &mut rng,
    )?;
    Ok((vrf_output, proof, c1, c2))
}

/// Eval: seed to (vrf_output, proof).
pub fn eval(
    seed: &Digest,
    km: &VrfKeyMaterial,
    ring: &Ring,
    delegator: usize,
) -> Result<(Digest, VrfProof), VrfError> {
    let (out, proof, _, _) = eval_full(seed, km, ring, delegator)?;
    Ok((out, proof))
}

/// Ver: check the ring signature binding (vrf_output, seed) to the ring.
/// The output-ciphertext link (the hash equality) is enforced where the
/// ciphertexts are available, at result submission.
pub fn verify(params: &GroupParams, proof: &VrfProof, ring: &Ring) -> bool {
    ring_verify(params, &proof.vrf_output, &proof.seed, &proof.sigma, ring)
}

const PROOF_VERSION: u8 = 1;

impl VrfProof {
    /// version byte, vrf_output (32B), seed (32B), signature encoding.
    pub fn to_bytes(&self, params: &GroupParams) -> Vec<u8> {
        let mut out = vec![PROOF_VERSION];
        out.extend_from_slice(self.vrf_output.as_bytes());
        out.extend_from_slice(self.seed.as_bytes());
        out.extend_from_slice(&self.sigma.to_bytes(params));
        out
    }

    pub fn from_bytes(params: &GroupParams, bytes: &[u8]) -> Result<VrfProof, VrfError> {
        if bytes.len() < 65 || bytes[0] != PROOF_VERSION {
            return Err(VrfError::Malformed);
        }
        let vrf_output = Digest::from_slice(&bytes[1..33]).unwrap();
        let seed = Digest::from_slice(&bytes[33..65]).unwrap();
        let sigma = RingSig::from_bytes(params, &bytes[65..])?;
        Ok(VrfProof {
            vrf_output,
            seed,
            sigma,
        })
    }

    /// Hex-armored single-proof file form.
    pub fn to_armored(&self, params: &GroupParams) -> String {
        format!("pqvrf-proof v1\n{}\n", hex::encode(self.to_bytes(params)))
    }

    pub fn from_armored(params: &GroupParams, text: &str) -> Result<VrfProof, VrfError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("pqvrf-proof v1") {
            return Err(VrfError::Malformed);
        }
        let body = lines.next().ok_or(VrfError::Malformed)?;
        let bytes = hex::decode(body.trim()).map_err(|_| VrfError::Malformed)?;
        Self::from_bytes(params, &bytes)
    }
}

/// Hex-armored ring file: one did,pk line per member.
pub fn ring_to_armored(params: &GroupParams, ring: &Ring) -> String {
    let mut out = String::from("pqvrf-ring v1\n");
    for (did, pk) in ring.members() {
        out.push_str(&format!("{did},{}\n", hex::encode(params.element_to_bytes(pk))));
    }
    out
}

pub fn ring_from_armored(params: &GroupParams, text: &str) -> Result<Ring, VrfError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("pqvrf-ring v1") {
        return Err(VrfError::Malformed);
    }
    let mut members = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (did, pk_hex) = line.split_once(',').ok_or(VrfError::Malformed)?;
        let bytes = hex::decode(pk_hex).map_err(|_| VrfError::Malformed)?;
        let pk = params
            .element_from_bytes(&bytes)
            .map_err(|_| VrfError::Malformed)?;
        members.push((did.to_string(), pk));
    }
    Ring::new(members).map_err(VrfError::from)
}

/// Hex-armored key material file, line-oriented key=value.
pub fn key_material_to_armored(km: &VrfKeyMaterial) -> String {
    let gp = &km.group;
    let mut out = String::from("pqvrf-keys v1\n");
    out.push_str(&format!("group={}\n", gp.name()));
    out.push_str(&format!("rlwe={}\n", km.rlwe_params.name()));
    out.push_str(&format!(
        "sig_mode={}\n",
        match km.sig_mode {
            SigMode::Generalized => "generalized",
            SigMode::Literal => "literal",
        }
    ));
    out.push_str(&format!("participants={}\n", km.participants.len()));
    for (i, p) in km.participants.iter().enumerate() {
        out.push_str(&format!(
            "participant.{i}.onchain={},{}\n",
            p.onchain.did,
            hex::encode(p.onchain.sk.to_bytes())
        ));
        out.push_str(&format!(
            "participant.{i}.delegation={},{}\n",
            p.delegation.did,
            hex::encode(p.delegation.sk.to_bytes())
        ));
    }
    out.push_str(&format!("offchain.sk={}\n", hex::encode(km.offchain.sk_off.to_bytes())));
    let poly_hex = |p: &NttPoly| {
        let mut bytes = Vec::with_capacity(2 * p.coeffs.len());
        for &c in &p.coeffs {
            bytes.extend_from_slice(&(c as u16).to_le_bytes());
        }
        hex::encode(bytes)
    };
    out.push_str(&format!("rlwe.a={}\n", poly_hex(&km.rlwe.a)));
    out.push_str(&format!("rlwe.p={}\n", poly_hex(&km.rlwe.p)));
    out.push_str(&format!("rlwe.r2={}\n", poly_hex(&km.rlwe.r2)));
    out
}

pub fn key_material_from_armored(text: &str) -> Result<VrfKeyMaterial, VrfError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("pqvrf-keys v1") {
        return Err(VrfError::Malformed);
    }
    let mut fields = std::collections::BTreeMap::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(VrfError::Malformed)?;
        fields.insert(k.to_string(), v.to_string());
    }
    let group_name = fields.get("group").ok_or(VrfError::Malformed)?;
    let group =
        GroupParams::by_name(group_name).ok_or_else(|| VrfError::UnknownGroup(group_name.clone()))?;
    let rlwe_params = RlweParams::by_name(fields.get("rlwe").ok_or(VrfError::Malformed)?)?;
    let sig_mode = match fields.get("sig_mode").map(String::as_str) {
        Some("literal") => SigMode::Literal,
        _ => SigMode::Generalized,
    };
    let n: usize = fields
        .get("participants")
        .and_then(|v| v.parse().ok())
        .ok_or(VrfError::Malformed)?;
    let parse_pair = |v: &str| -> Result<crate::ringsig::DidKeyPair, VrfError> {
        let (did, sk_hex) = v.split_once(',').ok_or(VrfError::Malformed)?;
        let sk_bytes = hex::decode(sk_hex).map_err(|_| VrfError::Malformed)?;
        let sk = group
            .scalar_from_bytes(&sk_bytes)
            .map_err(|_| VrfError::Malformed)?;
        let pk = group.exp_g(&sk);
        Ok(crate::ringsig::DidKeyPair {
            did: did.to_string(),
            sk,
            pk,
        })
    };
    let mut participants = Vec::with_capacity(n);
    for i in 0..n {
        let onchain = parse_pair(
            fields
                .get(&format!("participant.{i}.onchain"))
                .ok_or(VrfError::Malformed)?,
        )?;
        let delegation = parse_pair(
            fields
                .get(&format!("participant.{i}.delegation"))
                .ok_or(VrfError::Malformed)?,
        )?;
        participants.push(ParticipantKeys { onchain, delegation });
    }
    let sk_off_bytes = hex::decode(fields.get("offchain.sk").ok_or(VrfError::Malformed)?)
        .map_err(|_| VrfError::Malformed)?;
    let sk_off = group
        .scalar_from_bytes(&sk_off_bytes)
        .map_err(|_| VrfError::Malformed)?;
    let pk_off = group.exp_g(&sk_off);
    let parse_poly = |key: &str| -> Result<NttPoly, VrfError> {
        let bytes = hex::decode(fields.get(key).ok_or(VrfError::Malformed)?)
            .map_err(|_| VrfError::Malformed)?;
        if bytes.len() != 2 * rlwe_params.n() {
            return Err(VrfError::Malformed);
        }
        Ok(NttPoly {
            coeffs: bytes
                .chunks_exact(2)
                .map(|b| u16::from_le_bytes([b[0], b[1]]) as u32)
                .collect(),
        })
    };
    let rlwe = RlweKeyPair {
        a: parse_poly("rlwe.a")?,
        p: parse_poly("rlwe.p")?,
        r2: parse_poly("rlwe.r2")?,
    };
    Ok(VrfKeyMaterial {
        group,
        rlwe_params,
        participants,
        rlwe,
        offchain: OffchainKeys { sk_off, pk_off },
        sig_mode,
    })
}
