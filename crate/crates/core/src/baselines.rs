//! Classical comparison procedures: BH for FDR, generalized Holm for
//! k-FWER, and a slot for externally defined boundary procedures.

use crate::error::{Error, Result};
use crate::evidence::{reject_by_rank, sort_evidence, EvidenceKind, EvidenceVector, RejectionSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineId {
    Bh,
    HolmK { k: usize },
    ExternalPlugin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineDescriptor {
    pub id: BaselineId,
    pub alpha: f64,
}

fn require_p(p: &EvidenceVector) -> Result<()> {
    if p.kind() != EvidenceKind::PValue {
        return Err(Error::InvalidConfig("baseline procedures need p-values".into()));
    }
    Ok(())
}

/// Benjamini-Hochberg step-up: rejects ranks `1..=r` with
/// `r = max{i : p(i) <= i * alpha / m}`.
pub fn bh(p: &EvidenceVector, alpha: f64) -> Result<RejectionSet> {
    require_p(p)?;
    let sv = sort_evidence(p);
    let m = sv.m() as f64;
    let r = sv
        .sorted_values()
        .iter()
        .enumerate()
        .rev()
        .find(|(i, &v)| v <= (i + 1) as f64 * alpha / m)
        .map_or(0, |(i, _)| i + 1);
    Ok(reject_by_rank(&sv, r, 1))
}

/// Critical value for step `i` (1-based) of the generalized Holm procedure.
pub fn holm_k_critical_value(i: usize, m: usize, k: usize, alpha: f64) -> f64 {
    let kf = k as f64;
    if i <= k {
        kf * alpha / m as f64
    } else {
        kf * alpha / (m + k - i) as f64
    }
}

/// Generalized Holm step-down controlling k-FWER, with critical values
/// `k*alpha/m` for `i <= k` and `k*alpha/(m + k - i)` beyond.
pub fn holm_k(p: &EvidenceVector, k: usize, alpha: f64) -> Result<RejectionSet> {
    require_p(p)?;
    if k == 0 {
        return Err(Error::InvalidConfig("holm_k needs k >= 1".into()));
    }
    let sv = sort_evidence(p);
    let m = sv.m();
    let r = sv
        .sorted_values()
        .iter()
        .enumerate()
        .take_while(|(i, &v)| v <= holm_k_critical_value(i + 1, m, k, alpha))
        .count();
    Ok(reject_by_rank(&sv, r, k))
}

/// Runs an externally defined boundary procedure. `select_rank` receives
/// the ascending p-values and `alpha` and returns the boundary rank.
pub fn external_plugin<F>(p: &EvidenceVector, k: usize, alpha: f64, select_rank: F) -> Result<RejectionSet>
where
    F: Fn(&[f64], f64) -> usize,
{
    require_p(p)?;
    let sv = sort_evidence(p);
    let r = select_rank(sv.sorted_values(), alpha);
    if r > sv.m() {
        return Err(Error::OutOfRange { r, k, m: sv.m() });
    }
    Ok(reject_by_rank(&sv, r, k))
}
