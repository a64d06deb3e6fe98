//! The Domino rejection procedure and its condition checks.
//!
//! A candidate size `r` passes the Domino condition when the k-local test
//! rejects every superset of the marginal set `M(r, k)` (ranks `r-k+1..=r`).
//! Three ways of checking it are provided:
//!
//! * brute force over all `2^(m-k)` supersets, capped at small `m`;
//! * an exact rectangular reduction for elementwise-monotone tests, which
//!   only visits `M ∪ A_a ∪ B_b` where `A_a` are the `a` least significant
//!   stronger hypotheses and `B_b` the `b` least significant weaker ones;
//! * the specialized fast paths (Bonferroni chain, harmonic tail recursion,
//!   mean reduction for e-values).
//!
//! The Bonferroni and harmonic fast paths check fewer sets than the full
//! condition and can reject more than brute force does.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::evidence::{
    reject_by_rank, sort_evidence, trivial_rejection, CheckMode, DominoConfig, EvidenceKind,
    EvidenceVector, RejectionSet, SortedView,
};
use crate::local_tests::{LocalTestDescriptor, TestId};

/// Diagnostics for one Domino condition check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionTrace {
    pub r: usize,
    pub evaluated_subsets: usize,
    /// Original indices (ascending) of the first subset the test accepted.
    pub first_failing_subset: Option<Vec<usize>>,
    pub passed: bool,
}

impl ConditionTrace {
    fn pass(r: usize, evaluated_subsets: usize) -> Self {
        Self { r, evaluated_subsets, first_failing_subset: None, passed: true }
    }

    fn fail(r: usize, evaluated_subsets: usize, subset: Vec<usize>) -> Self {
        Self { r, evaluated_subsets, first_failing_subset: Some(subset), passed: false }
    }
}

fn check_rank(sv: &SortedView<'_>, r: usize, k: usize) -> Result<()> {
    let m = sv.m();
    if k == 0 || r < k || r > m {
        return Err(Error::OutOfRange { r, k, m });
    }
    Ok(())
}

fn check_order(test: &LocalTestDescriptor, k: usize, kind: EvidenceKind) -> Result<()> {
    if test.k != k {
        return Err(Error::InvalidConfig(format!(
            "marginal size k = {k} differs from the local test order {}",
            test.k
        )));
    }
    if test.evidence_kind != kind {
        return Err(Error::InvalidConfig(format!(
            "local test {} expects {} evidence",
            test.id.name(),
            test.evidence_kind.name()
        )));
    }
    Ok(())
}

fn indices_of_ranks(sv: &SortedView<'_>, ranks0: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = ranks0.into_iter().map(|q| sv.perm()[q]).collect();
    idx.sort_unstable();
    idx
}

/// Advances `idx` (a strictly increasing `c`-subset of `0..n`) to the next
/// combination in lexicographic order. Returns false after the last one.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let c = idx.len();
    let mut i = c;
    while i > 0 {
        i -= 1;
        if idx[i] < n - c + i {
            idx[i] += 1;
            for j in i + 1..c {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Checks the Domino condition at rank `r` by enumerating every superset
/// of `M(r, k)`.
///
/// Supersets are visited by cardinality, then lexicographically over the
/// outside hypotheses listed in rank order, so the reported failing subset
/// is deterministic.
pub fn check_condition_bruteforce(
    sv: &SortedView<'_>,
    r: usize,
    k: usize,
    test: &LocalTestDescriptor,
    alpha: f64,
    cap: usize,
) -> Result<ConditionTrace> {
    let m = sv.m();
    if m > cap {
        return Err(Error::CapExceeded { m, cap });
    }
    check_rank(sv, r, k)?;
    check_order(test, k, sv.kind())?;

    let sorted = sv.sorted_values();
    // 0-based ranks outside the marginal window, in rank order
    let outside: Vec<usize> = (0..r - k).chain(r..m).collect();
    let n_out = outside.len();
    let mut buf = Vec::with_capacity(m);
    let mut evaluated = 0;

    for c in 0..=n_out {
        let mut idx: Vec<usize> = (0..c).collect();
        loop {
            buf.clear();
            let split = idx.partition_point(|&i| outside[i] < r - k);
            buf.extend(idx[..split].iter().map(|&i| sorted[outside[i]]));
            buf.extend_from_slice(&sorted[r - k..r]);
            buf.extend(idx[split..].iter().map(|&i| sorted[outside[i]]));
            evaluated += 1;
            if !test.evaluate_sorted(&buf, alpha)? {
                let ranks = idx.iter().map(|&i| outside[i]).chain(r - k..r);
                return Ok(ConditionTrace::fail(r, evaluated, indices_of_ranks(sv, ranks)));
            }
            if !next_combination(&mut idx, n_out) {
                break;
            }
        }
    }
    Ok(ConditionTrace::pass(r, evaluated))
}

/// Exact Domino condition check for elementwise-monotone tests over the
/// rectangular family `M ∪ A_a ∪ B_b`, `0 <= a <= r-k`, `0 <= b <= m-r`.
///
/// Every superset with `a` stronger and `b` weaker extra members is
/// dominated, order statistic by order statistic, by `M ∪ A_a ∪ B_b`, so
/// the decision matches [`check_condition_bruteforce`].
pub fn check_condition_rectangular(
    sv: &SortedView<'_>,
    r: usize,
    k: usize,
    test: &LocalTestDescriptor,
    alpha: f64,
) -> Result<ConditionTrace> {
    if !test.monotone {
        return Err(Error::NotMonotone);
    }
    check_rank(sv, r, k)?;
    check_order(test, k, sv.kind())?;

    let m = sv.m();
    let sorted = sv.sorted_values();
    let mut buf = Vec::with_capacity(m);
    let mut evaluated = 0;
    for a in 0..=r - k {
        for b in 0..=m - r {
            buf.clear();
            buf.extend_from_slice(&sorted[r - k - a..r]);
            buf.extend_from_slice(&sorted[m - b..m]);
            evaluated += 1;
            if !test.evaluate_sorted(&buf, alpha)? {
                let ranks = (r - k - a..r).chain(m - b..m);
                return Ok(ConditionTrace::fail(r, evaluated, indices_of_ranks(sv, ranks)));
            }
        }
    }
    Ok(ConditionTrace::pass(r, evaluated))
}

/// The generalized-Bonferroni chain: `((k + r - l)/k) * p(l) <= alpha` for
/// `l = r` down to 1. Only strong hypotheses are ever added.
pub fn check_condition_fast_bonferroni(
    sv: &SortedView<'_>,
    r: usize,
    k: usize,
    alpha: f64,
) -> Result<ConditionTrace> {
    check_rank(sv, r, k)?;
    if sv.kind() != EvidenceKind::PValue {
        return Err(Error::InvalidConfig("Bonferroni chain needs p-values".into()));
    }
    Ok(bonferroni_chain(sv, r, k, alpha))
}

fn bonferroni_chain(sv: &SortedView<'_>, r: usize, k: usize, alpha: f64) -> ConditionTrace {
    let kf = k as f64;
    for (step, l) in (1..=r).rev().enumerate() {
        let scale = (k + r - l) as f64 / kf;
        if scale * sv.value_at(l) > alpha {
            let lo = (l + 1).saturating_sub(k).max(1);
            return ConditionTrace::fail(r, step + 1, indices_of_ranks(sv, lo - 1..r));
        }
    }
    ConditionTrace::pass(r, r)
}

/// The harmonic tail recursion for `k = 1`: starting from `{π(r)}`, adds
/// `π(m), π(m-1), ..., π(r+1)` one at a time and requires
/// `e * ln|S| * Har(S) <= alpha` after every addition.
pub fn check_condition_fast_harmonic(
    sv: &SortedView<'_>,
    r: usize,
    alpha: f64,
) -> Result<ConditionTrace> {
    check_rank(sv, r, 1)?;
    if sv.kind() != EvidenceKind::PValue {
        return Err(Error::InvalidConfig("harmonic recursion needs p-values".into()));
    }
    Ok(harmonic_tail(sv, r, alpha))
}

fn harmonic_tail(sv: &SortedView<'_>, r: usize, alpha: f64) -> ConditionTrace {
    let m = sv.m();
    let mut har = sv.value_at(r);
    let mut size = 1usize;
    let mut evaluated = 0;
    for l in (r + 1..=m).rev() {
        size += 1;
        har = size as f64 / ((size - 1) as f64 / har + 1.0 / sv.value_at(l));
        evaluated += 1;
        if E * (size as f64).ln() * har > alpha {
            let ranks = std::iter::once(r - 1).chain(l - 1..m);
            return ConditionTrace::fail(r, evaluated, indices_of_ranks(sv, ranks));
        }
    }
    ConditionTrace::pass(r, evaluated)
}

/// Domino condition for e-values under the mean-combined e-closure test:
/// every superset of `M(r, k)` has mean at least `1/alpha`.
///
/// For each size the superset with the smallest mean adds the smallest
/// outside e-values, so only `m - k + 1` means are needed.
pub fn domino_e_mean_reduction_check(
    sv: &SortedView<'_>,
    r: usize,
    k: usize,
    alpha: f64,
) -> Result<ConditionTrace> {
    check_rank(sv, r, k)?;
    if sv.kind() != EvidenceKind::EValue {
        return Err(Error::InvalidConfig("mean reduction needs e-values".into()));
    }
    let m = sv.m();
    let sorted = sv.sorted_values();
    let bar = 1.0 / alpha;
    // outsiders from smallest e-value upwards: weak tail, then strong block
    let outside_smallest_first = (r..m).rev().chain((0..r - k).rev());

    let mut sum: f64 = sorted[r - k..r].iter().sum();
    let mut size = k;
    let mut added: Vec<usize> = Vec::new();
    let mut evaluated = 1;
    if sum / (size as f64) < bar {
        return Ok(ConditionTrace::fail(r, evaluated, indices_of_ranks(sv, r - k..r)));
    }
    for q in outside_smallest_first {
        sum += sorted[q];
        size += 1;
        added.push(q);
        evaluated += 1;
        if sum / (size as f64) < bar {
            let ranks = (r - k..r).chain(added.iter().copied());
            return Ok(ConditionTrace::fail(r, evaluated, indices_of_ranks(sv, ranks)));
        }
    }
    Ok(ConditionTrace::pass(r, evaluated))
}

/// Dispatches one condition check according to the configured mode.
pub fn check_condition(sv: &SortedView<'_>, r: usize, cfg: &DominoConfig) -> Result<ConditionTrace> {
    let (k, alpha, test) = (cfg.k, cfg.alpha, &cfg.test);
    match cfg.mode {
        CheckMode::BruteForce => {
            check_condition_bruteforce(sv, r, k, test, alpha, cfg.brute_force_cap)
        }
        CheckMode::RectangularExact => check_condition_rectangular(sv, r, k, test, alpha),
        CheckMode::PaperFast => match test.id {
            TestId::BonferroniK => check_condition_fast_bonferroni(sv, r, k, alpha),
            TestId::HarmonicMean => check_condition_fast_harmonic(sv, r, alpha),
            TestId::EAverage | TestId::EClosureK => domino_e_mean_reduction_check(sv, r, k, alpha),
            TestId::Simes => Err(Error::ModeUnsupported { mode: "fast", test: "simes" }),
        },
    }
}

/// Scans `r = m, m-1, ..., k` and rejects at the first rank passing the
/// condition; falls back to the trivial `(k-1)`-set.
fn scan(sv: &SortedView<'_>, cfg: &DominoConfig) -> Result<RejectionSet> {
    for r in (cfg.k..=sv.m()).rev() {
        if check_condition(sv, r, cfg)?.passed {
            return Ok(reject_by_rank(sv, r, cfg.k));
        }
    }
    Ok(trivial_rejection(sv, cfg.k))
}

/// Domino on p-values.
pub fn domino_p(p: &EvidenceVector, cfg: &DominoConfig) -> Result<RejectionSet> {
    if p.kind() != EvidenceKind::PValue {
        return Err(Error::InvalidConfig("domino_p needs p-values".into()));
    }
    cfg.validate_for(p)?;
    if cfg.mode == CheckMode::PaperFast {
        return match cfg.test.id {
            TestId::BonferroniK => domino_p_fast_bonferroni(p, cfg.k, cfg.alpha),
            TestId::HarmonicMean => domino_p_fast_harmonic(p, cfg.alpha),
            other => Err(Error::ModeUnsupported { mode: "fast", test: other.name() }),
        };
    }
    scan(&sort_evidence(p), cfg)
}

/// Domino on e-values; ranks run in descending e-value order.
pub fn domino_e(e: &EvidenceVector, cfg: &DominoConfig) -> Result<RejectionSet> {
    if e.kind() != EvidenceKind::EValue {
        return Err(Error::InvalidConfig("domino_e needs e-values".into()));
    }
    cfg.validate_for(e)?;
    scan(&sort_evidence(e), cfg)
}

/// Dispatches to [`domino_p`] or [`domino_e`] by evidence kind.
pub fn domino(ev: &EvidenceVector, cfg: &DominoConfig) -> Result<RejectionSet> {
    match ev.kind() {
        EvidenceKind::PValue => domino_p(ev, cfg),
        EvidenceKind::EValue => domino_e(ev, cfg),
    }
}

/// Largest rank whose p-value is at most alpha (0 if none).
fn last_rank_at_most(sv: &SortedView<'_>, alpha: f64) -> usize {
    sv.sorted_values().partition_point(|&v| v <= alpha)
}

/// Domino-P with the generalized Bonferroni test via the O(m^2) chain.
///
/// Starts at the largest rank with `p <= alpha` and only augments the
/// marginal set with stronger hypotheses.
pub fn domino_p_fast_bonferroni(p: &EvidenceVector, k: usize, alpha: f64) -> Result<RejectionSet> {
    if p.kind() != EvidenceKind::PValue {
        return Err(Error::InvalidConfig("Bonferroni chain needs p-values".into()));
    }
    if k == 0 || k > p.m() {
        return Err(Error::InvalidConfig(format!("k = {k} must lie in 1..={}", p.m())));
    }
    let sv = sort_evidence(p);
    let mut r = last_rank_at_most(&sv, alpha);
    while r >= k {
        if bonferroni_chain(&sv, r, k, alpha).passed {
            return Ok(reject_by_rank(&sv, r, k));
        }
        r -= 1;
    }
    Ok(trivial_rejection(&sv, k))
}

/// Domino-P with the scaled harmonic-mean test (`k = 1`) via the recursive
/// harmonic-mean update.
pub fn domino_p_fast_harmonic(p: &EvidenceVector, alpha: f64) -> Result<RejectionSet> {
    if p.kind() != EvidenceKind::PValue {
        return Err(Error::InvalidConfig("harmonic recursion needs p-values".into()));
    }
    let sv = sort_evidence(p);
    let mut r = last_rank_at_most(&sv, alpha);
    while r >= 1 {
        if harmonic_tail(&sv, r, alpha).passed {
            return Ok(reject_by_rank(&sv, r, 1));
        }
        r -= 1;
    }
    Ok(RejectionSet::default())
}
