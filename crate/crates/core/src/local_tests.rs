//! Valid k-local tests for intersection hypotheses.
//!
//! Each test answers whether at least `k` members of a subset `S` are
//! significant at level `alpha`. The `*_sorted` entry points take subset
//! values already in significance order (ascending p, descending e) so the
//! engine can evaluate many subsets without re-sorting.

use std::f64::consts::E;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evidence::EvidenceKind;

/// Largest subset the direct e-closure test will enumerate.
pub const E_CLOSURE_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestId {
    BonferroniK,
    Simes,
    HarmonicMean,
    EAverage,
    EClosureK,
}

impl TestId {
    pub const ALL: [TestId; 5] = [
        TestId::BonferroniK,
        TestId::Simes,
        TestId::HarmonicMean,
        TestId::EAverage,
        TestId::EClosureK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestId::BonferroniK => "bonferroni",
            TestId::Simes => "simes",
            TestId::HarmonicMean => "harmonic",
            TestId::EAverage => "eavg",
            TestId::EClosureK => "eclosure",
        }
    }

    pub fn evidence_kind(self) -> EvidenceKind {
        match self {
            TestId::BonferroniK | TestId::Simes | TestId::HarmonicMean => EvidenceKind::PValue,
            TestId::EAverage | TestId::EClosureK => EvidenceKind::EValue,
        }
    }

    /// Tests that only exist for `k = 1`.
    pub fn requires_k1(self) -> bool {
        matches!(self, TestId::Simes | TestId::HarmonicMean | TestId::EAverage)
    }

    /// Whether the engine has a specialized fast condition check.
    pub fn has_fast_path(self) -> bool {
        !matches!(self, TestId::Simes)
    }
}

impl FromStr for TestId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown local test `{s}`")))
    }
}

/// Identity, order and monotonicity class of a k-local test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalTestDescriptor {
    pub id: TestId,
    pub k: usize,
    /// The decision can only flip from reject to accept when a p-value grows
    /// (or an e-value shrinks).
    pub monotone: bool,
    pub evidence_kind: EvidenceKind,
}

impl LocalTestDescriptor {
    pub fn new(id: TestId, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("test order k must be at least 1".into()));
        }
        if id.requires_k1() && k != 1 {
            return Err(Error::InvalidConfig(format!("{} is only defined for k = 1", id.name())));
        }
        Ok(Self {
            id,
            k,
            monotone: true,
            evidence_kind: id.evidence_kind(),
        })
    }

    pub fn bonferroni(k: usize) -> Self {
        Self::new(TestId::BonferroniK, k).expect("k >= 1")
    }

    pub fn simes() -> Self {
        Self::new(TestId::Simes, 1).unwrap()
    }

    pub fn harmonic() -> Self {
        Self::new(TestId::HarmonicMean, 1).unwrap()
    }

    pub fn e_average() -> Self {
        Self::new(TestId::EAverage, 1).unwrap()
    }

    pub fn e_closure(k: usize) -> Self {
        Self::new(TestId::EClosureK, k).expect("k >= 1")
    }

    /// Evaluates the test on subset values in arbitrary order.
    pub fn evaluate(&self, values: &[f64], alpha: f64) -> Result<bool> {
        let mut sorted = values.to_vec();
        let kind = self.evidence_kind;
        sorted.sort_by(|a, b| kind.cmp_significance(*a, *b));
        self.evaluate_sorted(&sorted, alpha)
    }

    /// Evaluates the test on subset values given in significance order.
    pub fn evaluate_sorted(&self, sorted: &[f64], alpha: f64) -> Result<bool> {
        if sorted.len() < self.k {
            return Err(Error::SubsetTooSmall { size: sorted.len(), k: self.k });
        }
        Ok(match self.id {
            TestId::BonferroniK => bonferroni_sorted(sorted, self.k, alpha),
            TestId::Simes => simes_sorted(sorted, alpha),
            TestId::HarmonicMean => harmonic_combination(sorted).0 <= alpha,
            TestId::EAverage => mean_combination(sorted).0 >= 1.0 / alpha,
            TestId::EClosureK => e_closure_k(sorted, self.k, alpha)?,
        })
    }
}

/// A combined statistic for an intersection hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CombinedEvidence(pub f64);

fn check_nonempty(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        Err(Error::EmptyInput)
    } else {
        Ok(())
    }
}

fn ascending(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Generalized Bonferroni: rejects iff `(|S|/k) * p_(k:S) <= alpha`.
pub fn bonferroni_k(p_subset: &[f64], k: usize, alpha: f64) -> Result<bool> {
    if k == 0 || p_subset.len() < k {
        return Err(Error::SubsetTooSmall { size: p_subset.len(), k });
    }
    Ok(bonferroni_sorted(&ascending(p_subset), k, alpha))
}

pub(crate) fn bonferroni_sorted(sorted: &[f64], k: usize, alpha: f64) -> bool {
    let scale = sorted.len() as f64 / k as f64;
    scale * sorted[k - 1] <= alpha
}

/// Simes: rejects iff `min_j (|S|/j) * p_(j:S) <= alpha`.
pub fn simes(p_subset: &[f64], alpha: f64) -> Result<bool> {
    check_nonempty(p_subset)?;
    Ok(simes_sorted(&ascending(p_subset), alpha))
}

pub(crate) fn simes_sorted(sorted: &[f64], alpha: f64) -> bool {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .any(|(j, &p)| n / (j + 1) as f64 * p <= alpha)
}

/// Scaled harmonic mean `e * ln|S| * Har(S)`; the raw p-value for a singleton.
/// `1/0` is `+inf`, so any zero p-value yields 0.
pub fn harmonic_combination(p_subset: &[f64]) -> CombinedEvidence {
    let n = p_subset.len();
    if n == 1 {
        return CombinedEvidence(p_subset[0]);
    }
    let reciprocal_sum: f64 = p_subset.iter().map(|&p| 1.0 / p).sum();
    let har = n as f64 / reciprocal_sum;
    CombinedEvidence(E * (n as f64).ln() * har)
}

pub fn harmonic_mean_test(p_subset: &[f64], alpha: f64) -> Result<bool> {
    check_nonempty(p_subset)?;
    Ok(harmonic_combination(p_subset).0 <= alpha)
}

/// Arithmetic mean of e-values; any `+inf` member makes it `+inf`.
pub fn mean_combination(e_subset: &[f64]) -> CombinedEvidence {
    CombinedEvidence(e_subset.iter().sum::<f64>() / e_subset.len() as f64)
}

pub fn e_average(e_subset: &[f64], alpha: f64) -> Result<bool> {
    check_nonempty(e_subset)?;
    Ok(mean_combination(e_subset).0 >= 1.0 / alpha)
}

/// The e-closure k-local test with arithmetic-mean combination, evaluated
/// by direct enumeration: rejects iff some `W ⊆ S` with `|W| >= k` has
/// `mean(T) >= 1/alpha` for every `T ⊆ S` with `|T ∩ W| >= k`.
///
/// Doubly exponential; limited to `|S| <= E_CLOSURE_CAP`.
pub fn e_closure_k(e_subset: &[f64], k: usize, alpha: f64) -> Result<bool> {
    let n = e_subset.len();
    if k == 0 || n < k {
        return Err(Error::SubsetTooSmall { size: n, k });
    }
    if n > E_CLOSURE_CAP {
        return Err(Error::SubsetTooLarge { size: n, cap: E_CLOSURE_CAP });
    }
    let full = 1usize << n;
    let bar = 1.0 / alpha;
    let k = k as u32;

    // failing[] lists every nonempty T whose mean misses 1/alpha
    let mut sums = vec![0.0f64; full];
    let mut failing = Vec::new();
    for t in 1..full {
        let low = t.trailing_zeros() as usize;
        sums[t] = sums[t & (t - 1)] + e_subset[low];
        if sums[t] / (t.count_ones() as f64) < bar {
            failing.push(t);
        }
    }

    Ok((1..full)
        .filter(|w| w.count_ones() >= k)
        .any(|w| failing.iter().all(|&t| (t & w).count_ones() < k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bonferroni_examples() {
        let p = [0.01, 0.2, 0.3, 0.4];
        assert!(bonferroni_k(&p, 1, 0.05).unwrap());
        assert!(!bonferroni_k(&p, 2, 0.05).unwrap());
        assert!(bonferroni_k(&[0.0, 1.0, 1.0], 1, 1e-9).unwrap());
        assert_eq!(
            bonferroni_k(&[0.1], 2, 0.05),
            Err(Error::SubsetTooSmall { size: 1, k: 2 })
        );
    }

    #[test]
    fn simes_examples() {
        assert!(simes(&[0.01, 0.04], 0.05).unwrap());
        assert!(!simes(&[0.03, 0.06, 0.9], 0.05).unwrap());
        assert!(!simes(&[1.0, 1.0], 0.05).unwrap());
        assert_eq!(simes(&[], 0.05), Err(Error::EmptyInput));
    }

    #[test]
    fn harmonic_examples() {
        let c = harmonic_combination(&[0.001, 0.001]).0;
        assert!((c - E * 2f64.ln() * 0.001).abs() < 1e-15);
        assert!((c - 0.001884).abs() < 1e-6);
        assert!(harmonic_mean_test(&[0.001, 0.001], 0.05).unwrap());

        let c = harmonic_combination(&[0.05, 0.5]).0;
        assert!((c - 0.1713).abs() < 1e-4);
        assert!(!harmonic_mean_test(&[0.05, 0.5], 0.05).unwrap());

        assert!(harmonic_mean_test(&[0.04], 0.05).unwrap());
        assert!(!harmonic_mean_test(&[0.06], 0.05).unwrap());
        assert_eq!(harmonic_combination(&[0.0, 1.0, 1.0]).0, 0.0);
    }

    #[test]
    fn e_average_examples() {
        assert!(e_average(&[30.0, 10.0], 0.05).unwrap());
        assert!(e_average(&[100.0, 2.0, 3.0], 0.05).unwrap());
        assert!(!e_average(&[0.0, 0.0], 0.05).unwrap());
        assert!(e_average(&[f64::INFINITY, 0.0], 0.05).unwrap());
    }

    #[test]
    fn e_closure_examples() {
        assert!(e_closure_k(&[50.0, 40.0], 1, 0.05).unwrap());
        // only W = {1,2}; T = {1,2} has mean 25.05
        assert!(e_closure_k(&[50.0, 0.1], 2, 0.05).unwrap());
        assert!(!e_closure_k(&[1.0, 1.0, 1.0], 1, 0.05).unwrap());
        assert!(matches!(
            e_closure_k(&[1.0; 13], 1, 0.05),
            Err(Error::SubsetTooLarge { size: 13, cap: 12 })
        ));
    }

    #[test]
    fn e_closure_k1_matches_all_subset_means_via_singletons() {
        // k = 1: W = {j} works iff every T containing j has mean >= 1/alpha
        let e = [50.0, 25.0, 0.1];
        assert!(e_closure_k(&e, 1, 0.05).unwrap());
        assert!(!e_closure_k(&[25.0, 0.1], 1, 0.05).unwrap());
    }

    #[test]
    fn descriptor_invariants() {
        assert!(LocalTestDescriptor::new(TestId::Simes, 2).is_err());
        assert!(LocalTestDescriptor::new(TestId::EAverage, 2).is_err());
        assert!(LocalTestDescriptor::new(TestId::BonferroniK, 0).is_err());
        for id in TestId::ALL {
            let d = LocalTestDescriptor::new(id, 1).unwrap();
            assert!(d.monotone);
            assert_eq!(id.name().parse::<TestId>().unwrap(), id);
        }
        assert_eq!(LocalTestDescriptor::bonferroni(3).evidence_kind, EvidenceKind::PValue);
        assert_eq!(LocalTestDescriptor::e_closure(2).evidence_kind, EvidenceKind::EValue);
    }

    #[test]
    fn evaluate_sorts_before_dispatch() {
        let d = LocalTestDescriptor::bonferroni(2);
        assert_eq!(d.evaluate(&[0.4, 0.01, 0.3, 0.2], 0.05), Ok(false));
        assert_eq!(d.evaluate(&[0.02, 0.001], 0.05), Ok(true));
        let e = LocalTestDescriptor::e_closure(1);
        assert_eq!(e.evaluate(&[40.0, 50.0], 0.05), Ok(true));
    }
}
