//! Statistical evaluation of the produced randomness: a NIST SP800-22
//! eleven-test subset with its report generator, the special functions
//! they need, and entropy estimators.

pub mod bitseq;
pub mod entropy;
pub mod nist;
pub mod special;
pub mod suite;

pub use bitseq::BitSequence;
pub use entropy::{closed_form_entropy, empirical_shannon_entropy, ones_ratio_blocks};
pub use nist::{CusumMode, StatsError, TestResult};
pub use special::{erf, erfc, igamc, ln_gamma, normal_cdf};
pub use suite::{run_suite, SuiteConfig, SuiteReport, SuiteRow};
