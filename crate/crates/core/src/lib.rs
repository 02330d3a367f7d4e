//! MPC-seeded verifiable random function over a simulated ledger.
//!
//! The pipeline: participants run a commit-reveal round on an in-process
//! contract simulation to derive a seed nobody controls alone; an off-chain
//! worker expands that seed into a derandomized Ring-LWE encryption whose
//! ciphertext hash is the VRF output; a delegated-key ring signature binds
//! the output to the participant set, and the contract verifies the proof
//! before accepting the result. A statistical suite (NIST SP800-22 subset
//! plus entropy estimators) evaluates the produced randomness.

pub mod complexity;
pub mod delegation;
pub mod dleq;
pub mod driver;
pub mod group;
pub mod keccak;
pub mod ledger;
pub mod ringsig;
pub mod rlwe;
pub mod stats;
pub mod vrf;
pub mod worker;

pub use keccak::{keccak256, Digest};
