//! Deterministic in-process simulation of the on-chain contract:
//! registration, commit-reveal seed generation, delegation hand-off,
//! event emission, and proof-checked result submission.
//!
//! Every accepted mutation goes through one transaction type and is
//! journaled, so replaying the journal from the same genesis reproduces
//! the exact state (event-sourcing determinism). Failed submissions
//! return a status-0 receipt and leave the state untouched.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::delegation::DelegationPackage;
use crate::group::{GroupElement, GroupParams};
use crate::keccak::{keccak256_concat, Digest};
use crate::ringsig::Ring;
use crate::vrf::{verify, VrfProof};

/// 20-byte account identifier: low 20 bytes of keccak256(pk_onchain).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub fn from_pk(params: &GroupParams, pk: &GroupElement) -> Address {
        let d = keccak256_concat(&[&params.element_to_bytes(pk)]);
        let mut a = [0u8; 20];
        a.copy_from_slice(&d.as_bytes()[12..]);
        Address(a)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("operation requires phase {expected:?}, current phase {got:?}")]
    WrongPhase { expected: Phase, got: Phase },
    #[error("address already registered")]
    DuplicateAddress,
    #[error("address not registered")]
    UnknownAddress,
    #[error("address already committed this round")]
    AlreadyCommitted,
    #[error("no commitment recorded for address")]
    NoCommitment,
    #[error("reveal does not match the stored commitment")]
    CommitmentMismatch,
    #[error("share must be a positive integer")]
    ZeroShare,
    #[error("contribution exceeds 256 bits")]
    ContributionRange,
    #[error("only {got} reveals, threshold is {need}")]
    InsufficientReveals { got: usize, need: usize },
    #[error("chain must hold at least 3 blocks, has {0}")]
    ChainTooShort(usize),
    #[error("caller does not own this participant slot")]
    NotOwner,
    #[error("participant index out of range")]
    IndexOutOfRange,
    #[error("threshold must be within (n/2, n]")]
    BadThreshold,
    #[error("duplicate public key")]
    DuplicateKey,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Registration,
    Commit,
    Reveal,
    SeedReady,
    Submitted,
    Finished,
    Aborted,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticipantRecord {
    pub address: Address,
    pub pk_onchain: GroupElement,
    pub pk_delegate: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevealRecord {
    pub contribution: BigUint,
    pub share: u64,
    pub salt: [u8; 32],
}

/// Emitted contract events, totally ordered by their journal index.
#[derive(Clone, Debug, PartialEq)]
pub enum LedgerEvent {
    OnchainMpcSeedReady {
        seed: Digest,
        sender: Address,
        ring: Ring,
        packages: Vec<DelegationPackage>,
    },
    ComputationFinished {
        round_id: u64,
        proof: VrfProof,
    },
}

impl LedgerEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            LedgerEvent::OnchainMpcSeedReady { .. } => "OnchainMpcSeedReady",
            LedgerEvent::ComputationFinished { .. } => "ComputationFinished",
        }
    }
}

/// Append-only simulated block-hash chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SimChain {
    hashes: Vec<Digest>,
}

impl SimChain {
    pub fn new(genesis_seed: &[u8]) -> SimChain {
        SimChain {
            hashes: vec![keccak256_concat(&[b"simchain-genesis", genesis_seed])],
        }
    }

    pub fn mine(&mut self, round_id: u64) {
        let k = self.hashes.len() as u64;
        let prev = *self.hashes.last().unwrap();
        self.hashes.push(keccak256_concat(&[
            prev.as_bytes(),
            &round_id.to_be_bytes(),
            &k.to_be_bytes(),
        ]));
    }

    pub fn len(&self) -> usize {
        self.hashes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }

    pub fn last_three(&self) -> Option<[&Digest; 3]> {
        let n = self.hashes.len();
        if n < 3 {
            return None;
        }
        Some([&self.hashes[n - 1], &self.hashes[n - 2], &self.hashes[n - 3]])
    }
}

/// Commitment preimage hash: keccak256(C (32B BE) || S (8B BE) || salt).
pub fn commitment_digest(contribution: &BigUint, share: u64, salt: &[u8; 32]) -> Digest {
    let raw = contribution.to_bytes_be();
    let mut c = [0u8; 32];
    c[32 - raw.len()..].copy_from_slice(&raw);
    keccak256_concat(&[&c, &share.to_be_bytes(), salt])
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractState {
    pub round_id: u64,
    pub phase: Phase,
    pub participants: Vec<ParticipantRecord>,
    pub commitments: BTreeMap<Address, Digest>,
    pub reveals: BTreeMap<Address, RevealRecord>,
    pub seed: Option<Digest>,
    pub delegation_packages: Vec<DelegationPackage>,
}

impl ContractState {
    fn new() -> ContractState {
        ContractState {
            round_id: 0,
            phase: Phase::Registration,
            participants: Vec::new(),
            commitments: BTreeMap::new(),
            reveals: BTreeMap::new(),
            seed: None,
            delegation_packages: Vec::new(),
        }
    }

    pub fn ring(&self) -> Ring {
        Ring::new(
            self.participants
                .iter()
                .enumerate()
                .map(|(i, p)| (format!("did:pqvrf:participant-{i}"), p.pk_delegate.clone()))
                .collect(),
        )
        .expect("registration rejects duplicates")
    }

    fn find(&self, address: &Address) -> Option<usize> {
        self.participants.iter().position(|p| p.address == *address)
    }
}

/// Result submission receipt; status 1 accepted, 0 rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Receipt {
    pub status: u8,
    pub round_id: u64,
}

/// Every accepted state mutation; journaled for replay.
#[derive(Clone, Debug, PartialEq)]
pub enum LedgerTx {
    Register {
        pk_onchain: GroupElement,
        pk_delegate: GroupElement,
    },
    OpenCommit,
    OpenReveal,
    Commit {
        address: Address,
        commitment: Digest,
    },
    Reveal {
        address: Address,
        contribution: BigUint,
        share: u64,
        salt: [u8; 32],
    },
    CommitDelegation {
        sender: Address,
        package: DelegationPackage,
    },
    MineBlocks {
        count: u32,
    },
    DeriveSeed {
        sender: Address,
    },
    SubmitResult {
        c1: Vec<u8>,
        c2: Vec<u8>,
        proof: VrfProof,
    },
    RevokeDelegation {
        sender: Address,
        participant: usize,
        new_pk: GroupElement,
    },
    BeginRound,
    Abort,
}

/// The simulated contract plus its chain, journal, and event log.
/// Single-writer: all mutation flows through [`Ledger::apply`].
#[derive(Clone, Debug)]
pub struct Ledger {
    group: GroupParams,
    state: ContractState,
    chain: SimChain,
    reveal_threshold: Option<usize>,
    journal: Vec<LedgerTx>,
    events: Vec<LedgerEvent>,
}

impl Ledger {
    pub fn new(group: GroupParams, reveal_threshold: Option<usize>, chain_seed: &[u8]) -> Ledger {
        Ledger {
            group,
            state: ContractState::new(),
            chain: SimChain::new(chain_seed),
            reveal_threshold,
            journal: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn state(&self) -> &ContractState {
        &self.state
    }

    pub fn group(&self) -> &GroupParams {
        &self.group
    }

    pub fn chain(&self) -> &SimChain {
        &self.chain
    }

    pub fn journal(&self) -> &[LedgerTx] {
        &self.journal
    }

    pub fn events(&self) -> &[LedgerEvent] {
        &self.events
    }

    pub fn events_since(&self, cursor: usize) -> Vec<(usize, LedgerEvent)> {
        self.events
            .iter()
            .enumerate()
            .skip(cursor)
            .map(|(i, e)| (i, e.clone()))
            .collect()
    }

    fn effective_threshold(&self) -> Result<usize, LedgerError> {
        let n = self.state.participants.len();
        match self.reveal_threshold {
            None => Ok(n),
            Some(t) => {
                if t > n || t < n / 2 + 1 {
                    Err(LedgerError::BadThreshold)
                } else {
                    Ok(t)
                }
            }
        }
    }

    fn require_phase(&self, expected: Phase) -> Result<(), LedgerError> {
        if self.state.phase != expected {
            return Err(LedgerError::WrongPhase {
                expected,
                got: self.state.phase,
            });
        }
        Ok(())
    }

    /// Apply one transaction; on success it is journaled and any events
    /// are appended. A status-0 receipt for SubmitResult is NOT an error
    /// but leaves the state unchanged and is not journaled.
    pub fn apply(&mut self, tx: LedgerTx) -> Result<Option<Receipt>, LedgerError> {
        let receipt = self.execute(&tx)?;
        if receipt.map(|r| r.status) != Some(0) {
            self.journal.push(tx);
        }
        Ok(receipt)
    }

    fn execute(&mut self, tx: &LedgerTx) -> Result<Option<Receipt>, LedgerError> {
        match tx {
            LedgerTx::Register {
                pk_onchain,
                pk_delegate,
            } => {
                self.require_phase(Phase::Registration)?;
                let address = Address::from_pk(&self.group, pk_onchain);
                if self.state.find(&address).is_some() {
                    return Err(LedgerError::DuplicateAddress);
                }
                if self
                    .state
                    .participants
                    .iter()
                    .any(|p| p.pk_delegate == *pk_delegate || p.pk_onchain == *pk_onchain)
                {
                    return Err(LedgerError::DuplicateKey);
                }
                self.state.participants.push(ParticipantRecord {
                    address,
                    pk_onchain: pk_onchain.clone(),
                    pk_delegate: pk_delegate.clone(),
                });
                Ok(None)
            }
            LedgerTx::OpenCommit => {
                self.require_phase(Phase::Registration)?;
                self.state.phase = Phase::Commit;
                Ok(None)
            }
            LedgerTx::OpenReveal => {
                self.require_phase(Phase::Commit)?;
                self.state.phase = Phase::Reveal;
                Ok(None)
            }
            LedgerTx::Commit {
                address,
                commitment,
            } => {
                self.require_phase(Phase::Commit)?;
                if self.state.find(address).is_none() {
                    return Err(LedgerError::UnknownAddress);
                }
                if self.state.commitments.contains_key(address) {
                    return Err(LedgerError::AlreadyCommitted);
                }
                self.state.commitments.insert(*address, *commitment);
                Ok(None)
            }
            LedgerTx::Reveal {
                address,
                contribution,
                share,
                salt,
            } => {
                self.require_phase(Phase::Reveal)?;
                if *share == 0 {
                    return Err(LedgerError::ZeroShare);
                }
                if contribution.bits() > 256 {
                    return Err(LedgerError::ContributionRange);
                }
                let Some(stored) = self.state.commitments.get(address) else {
                    return Err(LedgerError::NoCommitment);
                };
                if commitment_digest(contribution, *share, salt) != *stored {
                    return Err(LedgerError::CommitmentMismatch);
                }
                self.state.reveals.insert(
                    *address,
                    RevealRecord {
                        contribution: contribution.clone(),
                        share: *share,
                        salt: *salt,
                    },
                );
                Ok(None)
            }
            LedgerTx::CommitDelegation { sender, package } => {
                if self.state.phase >= Phase::Finished {
                    return Err(LedgerError::WrongPhase {
                        expected: Phase::Commit,
                        got: self.state.phase,
                    });
                }
                let idx = package.delegator_index;
                if idx >= self.state.participants.len() {
                    return Err(LedgerError::IndexOutOfRange);
                }
                if self.state.participants[idx].address != *sender {
                    return Err(LedgerError::NotOwner);
                }
                self.state.delegation_packages.push(package.clone());
                Ok(None)
            }
            LedgerTx::MineBlocks { count } => {
                for _ in 0..*count {
                    self.chain.mine(self.state.round_id);
                }
                Ok(None)
            }
            LedgerTx::DeriveSeed { sender } => {
                self.require_phase(Phase::Reveal)?;
                if self.state.find(sender).is_none() {
                    return Err(LedgerError::UnknownAddress);
                }
                let need = self.effective_threshold()?;
                let got = self.state.reveals.len();
                if got < need {
                    return Err(LedgerError::InsufficientReveals { got, need });
                }
                let Some([h_k, h_k1, h_k2]) = self.chain.last_three() else {
                    return Err(LedgerError::ChainTooShort(self.chain.len()));
                };
                let seed = derive_seed_value(&self.state.reveals, h_k, h_k1, h_k2, sender);
                self.state.seed = Some(seed);
                self.state.phase = Phase::SeedReady;
                self.events.push(LedgerEvent::OnchainMpcSeedReady {
                    seed,
                    sender: *sender,
                    ring: self.state.ring(),
                    packages: self.state.delegation_packages.clone(),
                });
                Ok(None)
            }
            LedgerTx::SubmitResult { c1, c2, proof } => {
                self.require_phase(Phase::SeedReady)?;
                let round_id = self.state.round_id;
                let accepted = keccak256_concat(&[c1, c2]) == proof.vrf_output
                    && Some(proof.seed) == self.state.seed
                    && onchain_verify(&self.group, proof, &self.state.ring());
                if !accepted {
                    return Ok(Some(Receipt {
                        status: 0,
                        round_id,
                    }));
                }
                self.state.phase = Phase::Submitted;
                self.state.phase = Phase::Finished;
                self.events.push(LedgerEvent::ComputationFinished {
                    round_id,
                    proof: proof.clone(),
                });
                Ok(Some(Receipt {
                    status: 1,
                    round_id,
                }))
            }
            LedgerTx::RevokeDelegation {
                sender,
                participant,
                new_pk,
            } => {
                if *participant >= self.state.participants.len() {
                    return Err(LedgerError::IndexOutOfRange);
                }
                if self.state.participants[*participant].address != *sender {
                    return Err(LedgerError::NotOwner);
                }
                if self
                    .state
                    .participants
                    .iter()
                    .any(|p| p.pk_delegate == *new_pk)
                {
                    return Err(LedgerError::DuplicateKey);
                }
                self.state.participants[*participant].pk_delegate = new_pk.clone();
                // outstanding packages for this slot no longer bind
                Ok(None)
            }
            LedgerTx::BeginRound => {
                self.require_phase(Phase::Finished)?;
                self.state.round_id += 1;
                self.state.phase = Phase::Commit;
                self.state.commitments.clear();
                self.state.reveals.clear();
                self.state.seed = None;
                self.state.delegation_packages.clear();
                Ok(None)
            }
            LedgerTx::Abort => {
                self.state.phase = Phase::Aborted;
                Ok(None)
            }
        }
    }

    /// Rebuild a ledger by replaying a journal from the same genesis.
    pub fn replay(
        group: GroupParams,
        reveal_threshold: Option<usize>,
        chain_seed: &[u8],
        journal: &[LedgerTx],
    ) -> Result<Ledger, LedgerError> {
        let mut ledger = Ledger::new(group, reveal_threshold, chain_seed);
        for tx in journal {
            ledger.apply(tx.clone())?;
        }
        Ok(ledger)
    }

    /// Canonical key-sorted snapshot of the full contract state.
    pub fn snapshot(&self) -> String {
        let gp = &self.group;
        let mut out = String::new();
        out.push_str(&format!("chain.len={}\n", self.chain.len()));
        for (i, h) in self.chain.hashes.iter().enumerate() {
            out.push_str(&format!("chain.{i}={h}\n"));
        }
        for (a, d) in &self.state.commitments {
            out.push_str(&format!("commitment.{}={}\n", a.to_hex(), d));
        }
        out.push_str(&format!("events.len={}\n", self.events.len()));
        for (i, e) in self.events.iter().enumerate() {
            out.push_str(&format!("events.{i}={}\n", self.format_event(e)));
        }
        for (i, p) in self.state.delegation_packages.iter().enumerate() {
            out.push_str(&format!("package.{i}={}\n", hex::encode(p.to_bytes(gp))));
        }
        for (i, p) in self.state.participants.iter().enumerate() {
            out.push_str(&format!(
                "participant.{i}={},{},{}\n",
                p.address.to_hex(),
                hex::encode(gp.element_to_bytes(&p.pk_onchain)),
                hex::encode(gp.element_to_bytes(&p.pk_delegate)),
            ));
        }
        out.push_str(&format!("phase={}\n", self.state.phase));
        for (a, r) in &self.state.reveals {
            let mut c = [0u8; 32];
            let raw = r.contribution.to_bytes_be();
            c[32 - raw.len()..].copy_from_slice(&raw);
            out.push_str(&format!(
                "reveal.{}={},{},{}\n",
                a.to_hex(),
                hex::encode(c),
                r.share,
                hex::encode(r.salt)
            ));
        }
        out.push_str(&format!("round={}\n", self.state.round_id));
        out.push_str(&format!(
            "seed={}\n",
            self.state
                .seed
                .map(|s| s.to_hex())
                .unwrap_or_else(|| "-".into())
        ));
        out
    }

    fn format_event(&self, e: &LedgerEvent) -> String {
        let gp = &self.group;
        match e {
            LedgerEvent::OnchainMpcSeedReady {
                seed,
                sender,
                ring,
                packages,
            } => {
                let ring_hex: Vec<String> = ring
                    .members()
                    .iter()
                    .map(|(_, pk)| hex::encode(gp.element_to_bytes(pk)))
                    .collect();
                let pkg_hex: Vec<String> = packages
                    .iter()
                    .map(|p| hex::encode(p.to_bytes(gp)))
                    .collect();
                format!(
                    "OnchainMpcSeedReady seed={seed} sender={} ring={} packages={}",
                    sender.to_hex(),
                    ring_hex.join(";"),
                    pkg_hex.join(";"),
                )
            }
            LedgerEvent::ComputationFinished { round_id, proof } => format!(
                "ComputationFinished round_id={round_id} proof={}",
                hex::encode(proof.to_bytes(gp))
            ),
        }
    }

    /// Line-delimited event log: monotonic index, kind, hex payload fields.
    pub fn event_log_lines(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.events.iter().enumerate() {
            out.push_str(&format!("{i} {}\n", self.format_event(e)));
        }
        out
    }
}

/// weightedSum = sum of C_i * S_i mod 2^256 over the revealers, then
/// seed = keccak256(keccak256(h_k || h_k-1 || h_k-2) || sender || sum).
fn derive_seed_value(
    reveals: &BTreeMap<Address, RevealRecord>,
    h_k: &Digest,
    h_k1: &Digest,
    h_k2: &Digest,
    sender: &Address,
) -> Digest {
    let modulus = BigUint::one() << 256u32;
    let mut weighted = BigUint::ZERO;
    for r in reveals.values() {
        weighted = (weighted + &r.contribution * BigUint::from(r.share)) % &modulus;
    }
    let mut ws = [0u8; 32];
    let raw = weighted.to_bytes_be();
    ws[32 - raw.len()..].copy_from_slice(&raw);
    let combined = keccak256_concat(&[h_k.as_bytes(), h_k1.as_bytes(), h_k2.as_bytes()]);
    keccak256_concat(&[combined.as_bytes(), &sender.0, &ws])
}

/// On-chain side of proof checking; same semantics as the facade verify.
pub fn onchain_verify(params: &GroupParams, proof: &VrfProof, ring: &Ring) -> bool {
    verify(params, proof, ring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delegation::{delegate_key, generate_keys, OffchainKeys, ParticipantKeys};
    use num_traits::Zero;
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(0x6c656467)
    }

    struct Setup {
        ledger: Ledger,
        keys: Vec<ParticipantKeys>,
        addresses: Vec<Address>,
        off: OffchainKeys,
    }

    fn setup(n: usize, threshold: Option<usize>, rng: &mut impl RngCore) -> Setup {
        let gp = GroupParams::toy64();
        let mut ledger = Ledger::new(gp.clone(), threshold, b"test-genesis");
        let keys: Vec<ParticipantKeys> = (0..n)
            .map(|i| generate_keys(&gp, &format!("did:pqvrf:participant-{i}"), rng))
            .collect();
        let mut addresses = Vec::new();
        for k in &keys {
            ledger
                .apply(LedgerTx::Register {
                    pk_onchain: k.onchain.pk.clone(),
                    pk_delegate: k.delegation.pk.clone(),
                })
                .unwrap();
            addresses.push(Address::from_pk(&gp, &k.onchain.pk));
        }
        let off = OffchainKeys::generate(&gp, rng);
        Setup {
            ledger,
            keys,
            addresses,
            off,
        }
    }

    fn commit_all(
        s: &mut Setup,
        rng: &mut impl RngCore,
    ) -> Vec<(BigUint, u64, [u8; 32])> {
        s.ledger.apply(LedgerTx::OpenCommit).unwrap();
        let mut secrets = Vec::new();
        for a in s.addresses.clone() {
            let mut cb = [0u8; 32];
            rng.fill_bytes(&mut cb);
            let contribution = BigUint::from_bytes_be(&cb);
            let share = rng.gen_range(1..1000u64);
            let mut salt = [0u8; 32];
            rng.fill_bytes(&mut salt);
            s.ledger
                .apply(LedgerTx::Commit {
                    address: a,
                    commitment: commitment_digest(&contribution, share, &salt),
                })
                .unwrap();
            secrets.push((contribution, share, salt));
        }
        secrets
    }

    fn reveal_all(s: &mut Setup, secrets: &[(BigUint, u64, [u8; 32])]) {
        s.ledger.apply(LedgerTx::OpenReveal).unwrap();
        for (a, (c, sh, salt)) in s.addresses.clone().iter().zip(secrets) {
            s.ledger
                .apply(LedgerTx::Reveal {
                    address: *a,
                    contribution: c.clone(),
                    share: *sh,
                    salt: *salt,
                })
                .unwrap();
        }
    }

    #[test]
    fn registration_rules() {
        let mut rng = rng();
        let mut s = setup(5, None, &mut rng);
        assert_eq!(s.ledger.state().participants.len(), 5);
        assert_eq!(s.ledger.state().ring().len(), 5);
        // duplicate
        let err = s
            .ledger
            .apply(LedgerTx::Register {
                pk_onchain: s.keys[0].onchain.pk.clone(),
                pk_delegate: s.keys[0].delegation.pk.clone(),
            })
            .unwrap_err();
        assert_eq!(err, LedgerError::DuplicateAddress);
        // registration closed after commit opens
        s.ledger.apply(LedgerTx::OpenCommit).unwrap();
        let gp = GroupParams::toy64();
        let late = generate_keys(&gp, "did:pqvrf:late", &mut rng);
        assert!(matches!(
            s.ledger
                .apply(LedgerTx::Register {
                    pk_onchain: late.onchain.pk.clone(),
                    pk_delegate: late.delegation.pk.clone(),
                })
                .unwrap_err(),
            LedgerError::WrongPhase { .. }
        ));
    }

    #[test]
    fn commit_reveal_rules() {
        let mut rng = rng();
        let mut s = setup(3, None, &mut rng);
        let secrets = commit_all(&mut s, &mut rng);

        // unregistered address cannot commit
        let ghost = Address([9u8; 20]);
        assert_eq!(
            s.ledger
                .apply(LedgerTx::Commit {
                    address: ghost,
                    commitment: commitment_digest(&BigUint::from(1u32), 1, &[0; 32]),
                })
                .unwrap_err(),
            LedgerError::UnknownAddress
        );
        // double commit
        assert_eq!(
            s.ledger
                .apply(LedgerTx::Commit {
                    address: s.addresses[0],
                    commitment: commitment_digest(&BigUint::from(1u32), 1, &[0; 32]),
                })
                .unwrap_err(),
            LedgerError::AlreadyCommitted
        );

        s.ledger.apply(LedgerTx::OpenReveal).unwrap();
        // altered contribution rejected
        let (c, sh, salt) = &secrets[0];
        assert_eq!(
            s.ledger
                .apply(LedgerTx::Reveal {
                    address: s.addresses[0],
                    contribution: c + BigUint::from(1u32),
                    share: *sh,
                    salt: *salt,
                })
                .unwrap_err(),
            LedgerError::CommitmentMismatch
        );
        // altered salt rejected
        let mut bad_salt = *salt;
        bad_salt[0] ^= 1;
        assert_eq!(
            s.ledger
                .apply(LedgerTx::Reveal {
                    address: s.addresses[0],
                    contribution: c.clone(),
                    share: *sh,
                    salt: bad_salt,
                })
                .unwrap_err(),
            LedgerError::CommitmentMismatch
        );
        // zero share rejected
        assert_eq!(
            s.ledger
                .apply(LedgerTx::Reveal {
                    address: s.addresses[0],
                    contribution: c.clone(),
                    share: 0,
                    salt: *salt,
                })
                .unwrap_err(),
            LedgerError::ZeroShare
        );
        // honest reveal accepted
        s.ledger
            .apply(LedgerTx::Reveal {
                address: s.addresses[0],
                contribution: c.clone(),
                share: *sh,
                salt: *salt,
            })
            .unwrap();
    }

    #[test]
    fn weighted_sum_fixtures() {
        // single participant: C=2, S=3 gives weightedSum 6
        let mut reveals = BTreeMap::new();
        reveals.insert(
            Address([1u8; 20]),
            RevealRecord {
                contribution: BigUint::from(2u32),
                share: 3,
                salt: [0; 32],
            },
        );
        let modulus = BigUint::one() << 256u32;
        let sum: BigUint = reveals
            .values()
            .map(|r| &r.contribution * BigUint::from(r.share))
            .sum::<BigUint>()
            % &modulus;
        assert_eq!(sum, BigUint::from(6u32));

        // two participants: (5,2) and (7,3) give 5*2 + 7*3 = 31
        reveals.insert(
            Address([2u8; 20]),
            RevealRecord {
                contribution: BigUint::from(5u32),
                share: 2,
                salt: [0; 32],
            },
        );
        reveals.insert(
            Address([1u8; 20]),
            RevealRecord {
                contribution: BigUint::from(7u32),
                share: 3,
                salt: [0; 32],
            },
        );
        let sum: BigUint = reveals
            .values()
            .map(|r| &r.contribution * BigUint::from(r.share))
            .sum::<BigUint>()
            % &modulus;
        assert_eq!(sum, BigUint::from(31u32));
    }

    #[test]
    fn seed_requires_three_blocks_and_threshold() {
        let mut rng = rng();
        let mut s = setup(3, None, &mut rng);
        let secrets = commit_all(&mut s, &mut rng);
        s.ledger.apply(LedgerTx::OpenReveal).unwrap();
        // no reveals yet
        assert_eq!(
            s.ledger
                .apply(LedgerTx::DeriveSeed {
                    sender: s.addresses[0]
                })
                .unwrap_err(),
            LedgerError::InsufficientReveals { got: 0, need: 3 }
        );
        for (a, (c, sh, salt)) in s.addresses.clone().iter().zip(&secrets) {
            s.ledger
                .apply(LedgerTx::Reveal {
                    address: *a,
                    contribution: c.clone(),
                    share: *sh,
                    salt: *salt,
                })
                .unwrap();
        }
        // chain has only the genesis block
        assert_eq!(
            s.ledger
                .apply(LedgerTx::DeriveSeed {
                    sender: s.addresses[0]
                })
                .unwrap_err(),
            LedgerError::ChainTooShort(1)
        );
        s.ledger.apply(LedgerTx::MineBlocks { count: 2 }).unwrap();
        s.ledger
            .apply(LedgerTx::DeriveSeed {
                sender: s.addresses[0],
            })
            .unwrap();
        assert_eq!(s.ledger.state().phase, Phase::SeedReady);
        assert!(s.ledger.state().seed.is_some());
        assert_eq!(s.ledger.events().len(), 1);
    }

    #[test]
    fn seed_is_deterministic() {
        let run = |seed_val: u64| -> Digest {
            let mut rng = ChaCha20Rng::seed_from_u64(seed_val);
            let mut s = setup(3, None, &mut rng);
            let secrets = commit_all(&mut s, &mut rng);
            reveal_all(&mut s, &secrets);
            s.ledger.apply(LedgerTx::MineBlocks { count: 2 }).unwrap();
            s.ledger
                .apply(LedgerTx::DeriveSeed {
                    sender: s.addresses[0],
                })
                .unwrap();
            s.ledger.state().seed.unwrap()
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }

    #[test]
    fn threshold_allows_missing_revealer() {
        let mut rng = rng();
        let mut s = setup(5, Some(4), &mut rng);
        let secrets = commit_all(&mut s, &mut rng);
        s.ledger.apply(LedgerTx::OpenReveal).unwrap();
        // only 4 of 5 reveal
        for (a, (c, sh, salt)) in s.addresses.clone().iter().zip(&secrets).take(4) {
            s.ledger
                .apply(LedgerTx::Reveal {
                    address: *a,
                    contribution: c.clone(),
                    share: *sh,
                    salt: *salt,
                })
                .unwrap();
        }
        s.ledger.apply(LedgerTx::MineBlocks { count: 3 }).unwrap();
        s.ledger
            .apply(LedgerTx::DeriveSeed {
                sender: s.addresses[1],
            })
            .unwrap();
        assert_eq!(s.ledger.state().phase, Phase::SeedReady);
    }

    #[test]
    fn bad_threshold_rejected() {
        let mut rng = rng();
        let mut s = setup(5, Some(2), &mut rng); // below n/2+1
        let secrets = commit_all(&mut s, &mut rng);
        reveal_all(&mut s, &secrets);
        s.ledger.apply(LedgerTx::MineBlocks { count: 3 }).unwrap();
        assert_eq!(
            s.ledger
                .apply(LedgerTx::DeriveSeed {
                    sender: s.addresses[0]
                })
                .unwrap_err(),
            LedgerError::BadThreshold
        );
    }

    fn drive_to_seed(s: &mut Setup, rng: &mut impl RngCore) {
        let secrets = commit_all(s, rng);
        reveal_all(s, &secrets);
        s.ledger.apply(LedgerTx::MineBlocks { count: 3 }).unwrap();
        // participant 0 delegates before triggering the seed
        let pkg = delegate_key(
            s.ledger.group(),
            &s.keys[0],
            0,
            &s.off.pk_off,
            &s.ledger.state().round_id.to_be_bytes(),
            rng,
        );
        s.ledger
            .apply(LedgerTx::CommitDelegation {
                sender: s.addresses[0],
                package: pkg,
            })
            .unwrap();
        s.ledger
            .apply(LedgerTx::DeriveSeed {
                sender: s.addresses[0],
            })
            .unwrap();
    }

    fn honest_submission(s: &Setup) -> (Vec<u8>, Vec<u8>, VrfProof) {
        let seed = s.ledger.state().seed.unwrap();
        let ring = s.ledger.state().ring();
        let km = crate::vrf::VrfKeyMaterial {
            group: s.ledger.group().clone(),
            rlwe_params: crate::rlwe::RlweParams::r256(),
            participants: s.keys.clone(),
            rlwe: crate::rlwe::rlwe_keygen(
                &crate::rlwe::RlweParams::r256(),
                &mut ChaCha20Rng::seed_from_u64(99),
            ),
            offchain: OffchainKeys {
                sk_off: s.off.sk_off.clone(),
                pk_off: s.off.pk_off.clone(),
            },
            sig_mode: crate::ringsig::SigMode::Generalized,
        };
        let (_, proof, c1, c2) = crate::vrf::eval_full(&seed, &km, &ring, 0).unwrap();
        (c1, c2, proof)
    }

    #[test]
    fn submit_accepts_honest_and_rejects_tampered() {
        let mut rng = rng();
        let mut s = setup(4, None, &mut rng);
        drive_to_seed(&mut s, &mut rng);
        let (c1, c2, proof) = honest_submission(&s);

        // tampered c2 byte: status 0, state unchanged
        let snapshot_before = s.ledger.snapshot();
        let mut bad_c2 = c2.clone();
        bad_c2[17] ^= 0xff;
        let r = s
            .ledger
            .apply(LedgerTx::SubmitResult {
                c1: c1.clone(),
                c2: bad_c2,
                proof: proof.clone(),
            })
            .unwrap()
            .unwrap();
        assert_eq!(r.status, 0);
        assert_eq!(s.ledger.snapshot(), snapshot_before);
        assert_eq!(s.ledger.state().phase, Phase::SeedReady);

        // honest: status 1, Finished, event emitted
        let r = s
            .ledger
            .apply(LedgerTx::SubmitResult {
                c1,
                c2,
                proof,
            })
            .unwrap()
            .unwrap();
        assert_eq!(r.status, 1);
        assert_eq!(s.ledger.state().phase, Phase::Finished);
        assert_eq!(s.ledger.events().len(), 2);
        assert_eq!(s.ledger.events()[1].kind(), "ComputationFinished");

        // replay of a stale proof next round is rejected by the phase gate
        assert!(matches!(
            s.ledger.apply(LedgerTx::SubmitResult {
                c1: vec![],
                c2: vec![],
                proof: honest_submission(&s).2,
            }),
            Err(LedgerError::WrongPhase { .. })
        ));
    }

    #[test]
    fn replay_reconstructs_state() {
        let mut rng = rng();
        let mut s = setup(4, None, &mut rng);
        drive_to_seed(&mut s, &mut rng);
        let (c1, c2, proof) = honest_submission(&s);
        s.ledger
            .apply(LedgerTx::SubmitResult { c1, c2, proof })
            .unwrap();

        let replayed = Ledger::replay(
            GroupParams::toy64(),
            None,
            b"test-genesis",
            s.ledger.journal(),
        )
        .unwrap();
        assert_eq!(replayed.snapshot(), s.ledger.snapshot());
        assert_eq!(replayed.state(), s.ledger.state());
        assert_eq!(replayed.events(), s.ledger.events());
    }

    #[test]
    fn revocation_rules() {
        let mut rng = rng();
        let mut s = setup(3, None, &mut rng);
        let gp = s.ledger.group().clone();
        let pkg = delegate_key(&gp, &s.keys[1], 1, &s.off.pk_off, b"0", &mut rng);
        s.ledger
            .apply(LedgerTx::CommitDelegation {
                sender: s.addresses[1],
                package: pkg.clone(),
            })
            .unwrap();
        assert!(crate::delegation::verify_package(
            &gp,
            &pkg,
            &s.ledger.state().participants[1].pk_delegate
        ));

        // non-owner cannot revoke
        let fresh = generate_keys(&gp, "did:pqvrf:fresh", &mut rng);
        assert_eq!(
            s.ledger
                .apply(LedgerTx::RevokeDelegation {
                    sender: s.addresses[0],
                    participant: 1,
                    new_pk: fresh.delegation.pk.clone(),
                })
                .unwrap_err(),
            LedgerError::NotOwner
        );

        // owner revokes; the old package no longer binds, a new one does
        s.ledger
            .apply(LedgerTx::RevokeDelegation {
                sender: s.addresses[1],
                participant: 1,
                new_pk: fresh.delegation.pk.clone(),
            })
            .unwrap();
        let committed = &s.ledger.state().participants[1].pk_delegate;
        assert!(!crate::delegation::verify_package(&gp, &pkg, committed));
        let replacement = ParticipantKeys {
            onchain: s.keys[1].onchain.clone(),
            delegation: fresh.delegation.clone(),
        };
        let new_pkg = delegate_key(&gp, &replacement, 1, &s.off.pk_off, b"0", &mut rng);
        assert!(crate::delegation::verify_package(&gp, &new_pkg, committed));
    }

    #[test]
    fn multi_round_progression() {
        let mut rng = rng();
        let mut s = setup(3, None, &mut rng);
        for round in 0..3u64 {
            if round > 0 {
                s.ledger.apply(LedgerTx::BeginRound).unwrap();
            }
            assert_eq!(s.ledger.state().round_id, round);
            if round == 0 {
                drive_to_seed(&mut s, &mut rng);
            } else {
                let secrets = commit_all_postreg(&mut s, &mut rng);
                reveal_all(&mut s, &secrets);
                s.ledger.apply(LedgerTx::MineBlocks { count: 3 }).unwrap();
                let pkg = delegate_key(
                    s.ledger.group(),
                    &s.keys[0],
                    0,
                    &s.off.pk_off,
                    &round.to_be_bytes(),
                    &mut rng,
                );
                s.ledger
                    .apply(LedgerTx::CommitDelegation {
                        sender: s.addresses[0],
                        package: pkg,
                    })
                    .unwrap();
                s.ledger
                    .apply(LedgerTx::DeriveSeed {
                        sender: s.addresses[0],
                    })
                    .unwrap();
            }
            let (c1, c2, proof) = honest_submission(&s);
            let r = s
                .ledger
                .apply(LedgerTx::SubmitResult { c1, c2, proof })
                .unwrap()
                .unwrap();
            assert_eq!(r.status, 1);
        }
        assert_eq!(s.ledger.events().len(), 6);
    }

    fn commit_all_postreg(
        s: &mut Setup,
        rng: &mut impl RngCore,
    ) -> Vec<(BigUint, u64, [u8; 32])> {
        // like commit_all but without the OpenCommit transition
        let mut secrets = Vec::new();
        for a in s.addresses.clone() {
            let mut cb = [0u8; 32];
            rng.fill_bytes(&mut cb);
            let contribution = BigUint::from_bytes_be(&cb);
            let share = rng.gen_range(1..1000u64);
            let mut salt = [0u8; 32];
            rng.fill_bytes(&mut salt);
            s.ledger
                .apply(LedgerTx::Commit {
                    address: a,
                    commitment: commitment_digest(&contribution, share, &salt),
                })
                .unwrap();
            secrets.push((contribution, share, salt));
        }
        secrets
    }

    #[test]
    fn event_log_and_snapshot_are_textual() {
        let mut rng = rng();
        let mut s = setup(2, None, &mut rng);
        drive_to_seed(&mut s, &mut rng);
        let log = s.ledger.event_log_lines();
        assert!(log.starts_with("0 OnchainMpcSeedReady "));
        let snap = s.ledger.snapshot();
        assert!(snap.contains("phase=SeedReady"));
        assert!(!BigUint::from(s.ledger.chain().len()).is_zero());
    }
}
