//! Evidence vectors, their significance ordering, and rejection sets.
//!
//! Hypotheses are addressed by 0-based indices throughout the library.
//! Ranks are 1-based: rank 1 is the most significant hypothesis.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::local_tests::{LocalTestDescriptor, TestId};

/// Default largest `m` accepted by the brute-force condition check.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvidenceKind {
    PValue,
    EValue,
}

impl EvidenceKind {
    /// Orders two evidence values from most to least significant.
    pub fn cmp_significance(self, a: f64, b: f64) -> Ordering {
        match self {
            EvidenceKind::PValue => a.total_cmp(&b),
            EvidenceKind::EValue => b.total_cmp(&a),
        }
    }

    /// True when `a` is at least as significant as `b`.
    pub fn at_least_as_significant(self, a: f64, b: f64) -> bool {
        match self {
            EvidenceKind::PValue => a <= b,
            EvidenceKind::EValue => a >= b,
        }
    }

    /// The value standing in for rank 0: `p := 0`, `e := +inf`.
    pub fn rank_zero_value(self) -> f64 {
        match self {
            EvidenceKind::PValue => 0.0,
            EvidenceKind::EValue => f64::INFINITY,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EvidenceKind::PValue => "p-value",
            EvidenceKind::EValue => "e-value",
        }
    }
}

/// The observed p-values or e-values for `m` hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceVector {
    kind: EvidenceKind,
    values: Vec<f64>,
}

impl EvidenceVector {
    pub fn new(kind: EvidenceKind, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidEvidence("at least one hypothesis is required".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            let ok = match kind {
                EvidenceKind::PValue => (0.0..=1.0).contains(&v),
                EvidenceKind::EValue => v >= 0.0, // +inf allowed, NaN rejected
            };
            if !ok {
                return Err(Error::InvalidEvidence(format!(
                    "{} at index {i} is out of range: {v}",
                    kind.name()
                )));
            }
        }
        Ok(Self { kind, values })
    }

    pub fn p_values(values: Vec<f64>) -> Result<Self> {
        Self::new(EvidenceKind::PValue, values)
    }

    pub fn e_values(values: Vec<f64>) -> Result<Self> {
        Self::new(EvidenceKind::EValue, values)
    }

    pub fn kind(&self) -> EvidenceKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }
}

/// A significance ordering of an evidence vector. Ties are broken by
/// ascending original index.
#[derive(Debug, Clone)]
pub struct SortedView<'a> {
    source: &'a EvidenceVector,
    perm: Vec<usize>,
    sorted: Vec<f64>,
}

/// Sorts evidence from most to least significant (ascending p, descending e).
pub fn sort_evidence(ev: &EvidenceVector) -> SortedView<'_> {
    let kind = ev.kind();
    let values = ev.values();
    let mut perm: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps ascending index among ties
    perm.sort_by(|&a, &b| kind.cmp_significance(values[a], values[b]));
    let sorted = perm.iter().map(|&j| values[j]).collect();
    SortedView { source: ev, perm, sorted }
}

impl<'a> SortedView<'a> {
    pub fn source(&self) -> &'a EvidenceVector {
        self.source
    }

    pub fn kind(&self) -> EvidenceKind {
        self.source.kind()
    }

    pub fn m(&self) -> usize {
        self.perm.len()
    }

    /// `perm()[i]` is the original index at rank `i + 1`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Evidence values in rank order.
    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// Original index of the hypothesis at 1-based `rank`.
    pub fn index_at(&self, rank: usize) -> usize {
        self.perm[rank - 1]
    }

    /// Evidence value at 1-based `rank`; rank 0 maps to the kind's sentinel.
    pub fn value_at(&self, rank: usize) -> f64 {
        if rank == 0 {
            self.kind().rank_zero_value()
        } else {
            self.sorted[rank - 1]
        }
    }

    /// Number of hypotheses whose evidence is at least as significant as
    /// `threshold`. These always occupy ranks `1..=count`.
    fn count_at_least(&self, threshold: f64) -> usize {
        let kind = self.kind();
        self.sorted
            .partition_point(|&v| kind.at_least_as_significant(v, threshold))
    }
}

/// The `k` rank-consecutive least significant members of a candidate
/// rejection set of size `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalSet {
    pub r: usize,
    pub k: usize,
    /// Original indices at ranks `r-k+1..=r`, in rank order.
    pub indices: Vec<usize>,
}

pub fn marginal_set(sv: &SortedView<'_>, r: usize, k: usize) -> Result<MarginalSet> {
    let m = sv.m();
    if k == 0 || r < k || r > m {
        return Err(Error::OutOfRange { r, k, m });
    }
    Ok(MarginalSet {
        r,
        k,
        indices: sv.perm[r - k..r].to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RejectionSet {
    /// Rejected original indices, ascending.
    pub indices: Vec<usize>,
    /// Rank whose evidence set the threshold; 0 for the empty or trivial set.
    pub boundary_rank: usize,
    /// The `min(k, |R|)` least significant rejections, least significant first.
    pub marginal_indices: Vec<usize>,
}

impl RejectionSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }
}

/// Rejects every hypothesis at least as significant as `threshold`.
pub(crate) fn reject_by_threshold(
    sv: &SortedView<'_>,
    threshold: f64,
    k: usize,
    boundary_rank: usize,
) -> RejectionSet {
    let count = sv.count_at_least(threshold);
    let mut indices = sv.perm[..count].to_vec();
    indices.sort_unstable();
    let marginal_indices = sv.perm[..count].iter().rev().take(k).copied().collect();
    RejectionSet {
        indices,
        boundary_rank,
        marginal_indices,
    }
}

/// `{j : value_j at least as significant as value at rank r}`; empty for
/// `r = 0`. Ties with rank `r` are rejected even past rank `r`.
pub fn reject_by_rank(sv: &SortedView<'_>, r: usize, k: usize) -> RejectionSet {
    assert!(r <= sv.m(), "rank {r} exceeds m = {}", sv.m());
    if r == 0 {
        return RejectionSet::default();
    }
    reject_by_threshold(sv, sv.value_at(r), k, r)
}

/// The fallback set of the `k-1` most significant hypotheses (plus ties),
/// using the rank-zero sentinel when `k = 1`.
pub fn trivial_rejection(sv: &SortedView<'_>, k: usize) -> RejectionSet {
    let threshold = sv.value_at(k.saturating_sub(1).min(sv.m()));
    reject_by_threshold(sv, threshold, k, 0)
}

/// True state of each hypothesis: `false` for a true null.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    theta: Vec<bool>,
}

impl GroundTruth {
    pub fn new(theta: Vec<bool>) -> Self {
        Self { theta }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self::new(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn m(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[bool] {
        &self.theta
    }

    pub fn is_null(&self, j: usize) -> bool {
        !self.theta[j]
    }

    pub fn null_set(&self) -> Vec<usize> {
        (0..self.m()).filter(|&j| !self.theta[j]).collect()
    }

    pub fn num_alternatives(&self) -> usize {
        self.theta.iter().filter(|&&t| t).count()
    }
}

/// How the Domino condition is verified for a candidate rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckMode {
    /// The specialized fast algorithms (Bonferroni chain, harmonic tail
    /// recursion, mean reduction for e-values).
    PaperFast,
    /// Exact check over the rectangular family of dominating supersets.
    RectangularExact,
    /// Enumerates every superset of the marginal set.
    BruteForce,
}

impl CheckMode {
    pub fn name(self) -> &'static str {
        match self {
            CheckMode::PaperFast => "fast",
            CheckMode::RectangularExact => "exact",
            CheckMode::BruteForce => "brute",
        }
    }

    /// `PaperFast` where a fast path exists, `RectangularExact` otherwise.
    pub fn default_for(test: TestId) -> Self {
        if test.has_fast_path() {
            CheckMode::PaperFast
        } else {
            CheckMode::RectangularExact
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominoConfig {
    pub k: usize,
    pub alpha: f64,
    pub test: LocalTestDescriptor,
    pub mode: CheckMode,
    pub brute_force_cap: usize,
}

impl DominoConfig {
    /// Config at level `alpha` using the test's own order and default mode.
    pub fn new(test: LocalTestDescriptor, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        Ok(Self {
            k: test.k,
            alpha,
            test,
            mode: CheckMode::default_for(test.id),
            brute_force_cap: DEFAULT_BRUTE_FORCE_CAP,
        })
    }

    pub fn with_mode(mut self, mode: CheckMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.brute_force_cap = cap;
        self
    }

    pub(crate) fn validate_for(&self, ev: &EvidenceVector) -> Result<()> {
        if self.k != self.test.k {
            return Err(Error::InvalidConfig(format!(
                "config order k = {} differs from the local test order {}",
                self.k, self.test.k
            )));
        }
        if self.k > ev.m() {
            return Err(Error::InvalidConfig(format!("k = {} exceeds m = {}", self.k, ev.m())));
        }
        if self.test.evidence_kind != ev.kind() {
            return Err(Error::InvalidConfig(format!(
                "local test {} expects {} evidence",
                self.test.id.name(),
                self.test.evidence_kind.name()
            )));
        }
        if self.mode == CheckMode::BruteForce && ev.m() > self.brute_force_cap {
            return Err(Error::CapExceeded {
                m: ev.m(),
                cap: self.brute_force_cap,
            });
        }
        Ok(())
    }
}
