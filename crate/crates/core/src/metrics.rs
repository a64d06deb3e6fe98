//! Per-run error indicators and their Monte Carlo aggregation.

use crate::error::{Error, Result};
use crate::evidence::{GroundTruth, RejectionSet};

/// 1 iff `|R| >= k` and the `k` least significant rejections are all nulls.
pub fn kbfdr_indicator(rejections: &RejectionSet, truth: &GroundTruth, k: usize) -> bool {
    rejections.len() >= k
        && rejections.marginal_indices.len() >= k
        && rejections.marginal_indices[..k].iter().all(|&j| truth.is_null(j))
}

/// 1 iff at least `k` true nulls are rejected.
pub fn kfwer_indicator(rejections: &RejectionSet, truth: &GroundTruth, k: usize) -> bool {
    false_rejections(rejections, truth) >= k
}

fn false_rejections(rejections: &RejectionSet, truth: &GroundTruth) -> usize {
    rejections.indices.iter().filter(|&&j| truth.is_null(j)).count()
}

/// Error and discovery summaries of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSample {
    pub kbfdr_ind: bool,
    pub kfwer_ind: bool,
    pub fdp: f64,
    /// Defined as 1 for an empty rejection set, so `fdp + tdr = 1` always.
    pub tdr: f64,
    pub power: f64,
    pub rejections: usize,
}

impl RunSample {
    pub fn is_empty(&self) -> bool {
        self.rejections == 0
    }
}

pub fn run_sample(rejections: &RejectionSet, truth: &GroundTruth, m: usize, k: usize) -> Result<RunSample> {
    if truth.m() != m {
        return Err(Error::DimensionMismatch(format!(
            "ground truth has {} entries for m = {m}",
            truth.m()
        )));
    }
    if let Some(&j) = rejections.indices.iter().find(|&&j| j >= m) {
        return Err(Error::DimensionMismatch(format!("rejected index {j} >= m = {m}")));
    }
    let n_rej = rejections.len();
    let false_rej = false_rejections(rejections, truth);
    let true_rej = n_rej - false_rej;
    let denom = n_rej.max(1) as f64;
    let fdp = false_rej as f64 / denom;
    Ok(RunSample {
        kbfdr_ind: kbfdr_indicator(rejections, truth, k),
        kfwer_ind: kfwer_indicator(rejections, truth, k),
        fdp,
        tdr: if n_rej == 0 { 1.0 } else { true_rej as f64 / denom },
        power: true_rej as f64 / truth.num_alternatives().max(1) as f64,
        rejections: n_rej,
    })
}

/// Monte Carlo means and standard errors over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scenario_id: String,
    pub procedure: String,
    pub reps: usize,
    pub kbfdr: f64,
    pub kbfdr_se: f64,
    pub kfwer: f64,
    pub kfwer_se: f64,
    pub fdr: f64,
    pub fdr_se: f64,
    /// Counts empty runs with TDR 1.
    pub tdr: f64,
    pub tdr_se: f64,
    /// TDR averaged over runs with at least one rejection only.
    pub tdr_nonempty: Option<f64>,
    pub empty_runs: usize,
    pub power: f64,
    pub power_se: f64,
    pub mean_rejections: f64,
}

impl MetricsReport {
    pub fn labeled(mut self, scenario_id: impl Into<String>, procedure: impl Into<String>) -> Self {
        self.scenario_id = scenario_id.into();
        self.procedure = procedure.into();
        self
    }
}

/// Mean and `sd / sqrt(n)`, where `sd` divides by `n`.
fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, (var / n).sqrt())
}

fn bit(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn aggregate(samples: &[RunSample]) -> Result<MetricsReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let s = samples.iter();
    let (kbfdr, kbfdr_se) = mean_se(s.clone().map(|r| bit(r.kbfdr_ind)));
    let (kfwer, kfwer_se) = mean_se(s.clone().map(|r| bit(r.kfwer_ind)));
    let (fdr, fdr_se) = mean_se(s.clone().map(|r| r.fdp));
    let (tdr, tdr_se) = mean_se(s.clone().map(|r| r.tdr));
    let (power, power_se) = mean_se(s.clone().map(|r| r.power));
    let (mean_rejections, _) = mean_se(s.clone().map(|r| r.rejections as f64));
    let nonempty = s.clone().filter(|r| !r.is_empty());
    let n_nonempty = nonempty.clone().count();
    let tdr_nonempty = (n_nonempty > 0).then(|| nonempty.map(|r| r.tdr).sum::<f64>() / n_nonempty as f64);
    Ok(MetricsReport {
        scenario_id: String::new(),
        procedure: String::new(),
        reps: samples.len(),
        kbfdr,
        kbfdr_se,
        kfwer,
        kfwer_se,
        fdr,
        fdr_se,
        tdr,
        tdr_se,
        tdr_nonempty,
        empty_runs: samples.len() - n_nonempty,
        power,
        power_se,
        mean_rejections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::{reject_by_rank, sort_evidence, EvidenceVector};

    fn rejected(p: &[f64], r: usize, k: usize) -> RejectionSet {
        let ev = EvidenceVector::p_values(p.to_vec()).unwrap();
        reject_by_rank(&sort_evidence(&ev), r, k)
    }

    #[test]
    fn kbfdr_examples() {
        let truth = GroundTruth::from_bits(&[1, 1, 0]);
        let p = [0.01, 0.02, 0.03];
        assert!(kbfdr_indicator(&rejected(&p, 3, 1), &truth, 1));
        assert!(!kbfdr_indicator(&rejected(&p, 3, 2), &truth, 2));
        assert!(!kbfdr_indicator(&RejectionSet::default(), &truth, 1));
        // fewer than k rejections never count
        let all_null = GroundTruth::from_bits(&[0, 0, 0]);
        assert!(!kbfdr_indicator(&rejected(&p, 1, 2), &all_null, 2));
    }

    #[test]
    fn kfwer_examples() {
        let truth = GroundTruth::from_bits(&[1, 1, 0]);
        let r = rejected(&[0.01, 0.02, 0.03], 3, 1);
        assert!(kfwer_indicator(&r, &truth, 1));
        assert!(!kfwer_indicator(&r, &truth, 2));
        assert!(!kfwer_indicator(&RejectionSet::default(), &truth, 1));
    }

    #[test]
    fn run_sample_examples() {
        let truth = GroundTruth::from_bits(&[1, 0, 0]);
        let r = rejected(&[0.01, 0.02, 0.5], 2, 1);
        let s = run_sample(&r, &truth, 3, 1).unwrap();
        assert_eq!((s.fdp, s.tdr, s.power), (0.5, 0.5, 1.0));

        let s = run_sample(&RejectionSet::default(), &truth, 3, 1).unwrap();
        assert_eq!((s.fdp, s.tdr, s.power), (0.0, 1.0, 0.0));

        let truth = GroundTruth::from_bits(&[1, 1, 1]);
        let s = run_sample(&rejected(&[0.1, 0.2, 0.3], 3, 1), &truth, 3, 1).unwrap();
        assert_eq!((s.fdp, s.tdr, s.power), (0.0, 1.0, 1.0));

        assert!(matches!(
            run_sample(&RejectionSet::default(), &truth, 4, 1),
            Err(Error::DimensionMismatch(_))
        ));
    }

    fn sample(kbfdr: bool) -> RunSample {
        RunSample { kbfdr_ind: kbfdr, kfwer_ind: kbfdr, fdp: 0.0, tdr: 1.0, power: 0.0, rejections: 0 }
    }

    #[test]
    fn aggregate_examples() {
        let rep = aggregate(&vec![sample(false); 100]).unwrap();
        assert_eq!((rep.kbfdr, rep.kbfdr_se), (0.0, 0.0));
        assert_eq!(rep.empty_runs, 100);
        assert_eq!(rep.tdr_nonempty, None);

        let rep = aggregate(&[sample(false), sample(true)]).unwrap();
        assert_eq!(rep.kbfdr, 0.5);
        assert!((rep.kbfdr_se - 0.5 / 2f64.sqrt()).abs() < 1e-15);

        let rep = aggregate(&[sample(true)]).unwrap();
        assert_eq!(rep.kbfdr_se, 0.0);

        assert_eq!(aggregate(&[]), Err(Error::EmptyInput));
    }
}
