//! Boundary false discovery rate control with the Domino procedure.
//!
//! The k-bFDR of a rejection set is the probability that its `k` least
//! significant members are all true nulls. Domino controls it under
//! arbitrary dependence by finding the largest candidate set whose
//! marginal `k` hypotheses survive a closure-style check: every
//! intersection hypothesis containing them must be rejected by a valid
//! k-local test.
//!
//! Modules:
//! * [`evidence`]: evidence vectors, orderings, rejection sets.
//! * [`local_tests`]: the k-local tests (generalized Bonferroni, Simes,
//!   scaled harmonic mean, e-value averaging, e-closure).
//! * [`engine`]: Domino for p-values and e-values with brute-force,
//!   rectangular-exact and fast condition checks.
//! * [`baselines`]: BH and generalized Holm.
//! * [`metrics`]: k-bFDR, k-FWER, FDP, TDR and power.
//! * [`simulate`]: the equicorrelated Gaussian experiment harness.
//! * [`validation`]: oracle-agreement suites used by the CLI.

pub mod baselines;
pub mod engine;
pub mod error;
pub mod evidence;
pub mod local_tests;
pub mod metrics;
pub mod simulate;
pub mod validation;

pub use baselines::{bh, holm_k};
pub use engine::{domino, domino_e, domino_p, ConditionTrace};
pub use error::{Error, Result};
pub use evidence::{
    CheckMode, DominoConfig, EvidenceKind, EvidenceVector, GroundTruth, RejectionSet, SortedView,
};
pub use local_tests::{LocalTestDescriptor, TestId};
pub use metrics::{MetricsReport, RunSample};
pub use simulate::{Procedure, SimScenario};
