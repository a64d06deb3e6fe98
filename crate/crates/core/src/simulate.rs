//! Synthetic one-sided Z-test experiments and the grid runner.
//!
//! Each replication draws latent states `theta_j ~ Bern(pi1)`, alternative
//! means from `N(mu_c, sigma^2)` truncated to `(0, inf)`, and
//! `X ~ N(mu, Sigma)` with `Sigma_jj = sigma^2`, `Sigma_ij = sigma^2 rho`.
//! P-values are `Phi(-X_j / sigma)`; e-values are the likelihood ratio
//! `exp((mu_c X_j - mu_c^2 / 2) / sigma^2)`.
//!
//! Replication `i` of a scenario with base seed `s` draws from a ChaCha8
//! stream seeded with `substream_seed(s, i)`, so results do not depend on
//! scheduling.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::baselines::{bh, holm_k};
use crate::engine::domino;
use crate::error::{Error, Result};
use crate::evidence::{CheckMode, DominoConfig, EvidenceKind, EvidenceVector, GroundTruth, RejectionSet};
use crate::local_tests::{LocalTestDescriptor, TestId};
use crate::metrics::{aggregate, run_sample, MetricsReport, RunSample};

pub const CSV_HEADER: &str =
    "scenario_id,procedure,k,alpha,rho,pi1,mu_c,reps,kbfdr,kbfdr_se,kfwer,fdr,tdr,tdr_se,power,power_se";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimScenario {
    pub m: usize,
    pub pi1: f64,
    pub mu_c: f64,
    pub sigma: f64,
    pub rho: f64,
    pub alpha: f64,
    pub k: usize,
    pub reps: usize,
    pub seed: u64,
}

impl SimScenario {
    /// Smallest admissible equicorrelation for `m` hypotheses.
    pub fn min_rho(m: usize) -> f64 {
        if m <= 1 {
            f64::NEG_INFINITY
        } else {
            -1.0 / (m - 1) as f64
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.pi1) {
            return bad(format!("pi1 = {} outside [0, 1]", self.pi1));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma = {} must be positive", self.sigma));
        }
        if !self.mu_c.is_finite() {
            return bad("mu_c must be finite".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} outside (0, 1)", self.alpha));
        }
        if self.k == 0 || self.k > self.m {
            return bad(format!("k = {} outside 1..={}", self.k, self.m));
        }
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        // small slack so a decimal spelling of -1/(m-1) is accepted
        if !(self.rho < 1.0 && self.rho >= Self::min_rho(self.m) - 1e-12) {
            return Err(Error::InvalidRho { rho: self.rho, m: self.m });
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        format!(
            "m{}_pi{}_mu{}_sd{}_rho{}_a{}_k{}",
            self.m,
            fmt_sig6(self.pi1),
            fmt_sig6(self.mu_c),
            fmt_sig6(self.sigma),
            fmt_sig6(self.rho),
            fmt_sig6(self.alpha),
            self.k
        )
    }
}

/// Mixes a base seed and a replication index into a substream seed.
pub fn substream_seed(base: u64, rep: u64) -> u64 {
    splitmix64(base ^ splitmix64(rep))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimInstance {
    pub x: Vec<f64>,
    pub pvalues: EvidenceVector,
    pub evalues: EvidenceVector,
    pub truth: GroundTruth,
    /// Signal means (0 for nulls).
    pub mu: Vec<f64>,
}

impl SimInstance {
    pub fn evidence(&self, kind: EvidenceKind) -> &EvidenceVector {
        match kind {
            EvidenceKind::PValue => &self.pvalues,
            EvidenceKind::EValue => &self.evalues,
        }
    }
}

/// Draws replications of one scenario; holds a square root of `Sigma`.
#[derive(Debug, Clone)]
pub struct InstanceGenerator {
    scenario: SimScenario,
    cov_root: DMatrix<f64>,
}

impl InstanceGenerator {
    pub fn new(scenario: SimScenario) -> Result<Self> {
        scenario.validate()?;
        let m = scenario.m;
        let var = scenario.sigma * scenario.sigma;
        let cov = DMatrix::from_fn(m, m, |i, j| if i == j { var } else { var * scenario.rho });
        // eigendecomposition handles the singular rho = -1/(m-1) case
        let eig = cov.symmetric_eigen();
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let cov_root = eig.eigenvectors * DMatrix::from_diagonal(&roots);
        Ok(Self { scenario, cov_root })
    }

    pub fn scenario(&self) -> &SimScenario {
        &self.scenario
    }

    pub fn generate(&self, rep: u64) -> SimInstance {
        let sc = &self.scenario;
        let m = sc.m;
        let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(sc.seed, rep));

        let theta: Vec<bool> = (0..m).map(|_| rng.gen_bool(sc.pi1)).collect();
        let mu: Vec<f64> = theta
            .iter()
            .map(|&alt| if alt { truncated_normal(&mut rng, sc.mu_c, sc.sigma) } else { 0.0 })
            .collect();
        let z = DVector::from_iterator(m, (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let noise = &self.cov_root * z;
        let x: Vec<f64> = mu.iter().zip(noise.iter()).map(|(a, b)| a + b).collect();

        let var = sc.sigma * sc.sigma;
        let p = x.iter().map(|&xj| std_normal_cdf(-xj / sc.sigma)).collect();
        let e = x
            .iter()
            .map(|&xj| ((sc.mu_c * xj - 0.5 * sc.mu_c * sc.mu_c) / var).exp())
            .collect();
        SimInstance {
            pvalues: EvidenceVector::p_values(p).expect("normal cdf lies in [0, 1]"),
            evalues: EvidenceVector::e_values(e).expect("exp is nonnegative"),
            truth: GroundTruth::new(theta),
            x,
            mu,
        }
    }
}

/// `N(mean, sd^2)` conditioned on `(0, inf)` by rejection.
fn truncated_normal<R: Rng>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    loop {
        let v = mean + sd * rng.sample::<f64, _>(StandardNormal);
        if v > 0.0 {
            return v;
        }
    }
}

pub fn gen_instance(sc: &SimScenario, rep: u64) -> Result<SimInstance> {
    Ok(InstanceGenerator::new(*sc)?.generate(rep))
}

/// A procedure evaluated in the simulation grid. Its order `k` and level
/// come from the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Procedure {
    Domino { test: TestId, mode: CheckMode },
    Bh,
    Holm,
}

impl Procedure {
    pub fn domino(test: TestId) -> Self {
        Procedure::Domino { test, mode: CheckMode::default_for(test) }
    }

    pub fn name(&self) -> String {
        match self {
            Procedure::Domino { test, mode } => {
                let family = match test.evidence_kind() {
                    EvidenceKind::PValue => "domino-p",
                    EvidenceKind::EValue => "domino-e",
                };
                format!("{family}:{}:{}", test.name(), mode.name())
            }
            Procedure::Bh => "bh".into(),
            Procedure::Holm => "holm".into(),
        }
    }

    /// Checks the procedure is defined at order `k`.
    pub fn check_order(&self, k: usize) -> Result<()> {
        if let Procedure::Domino { test, .. } = self {
            LocalTestDescriptor::new(*test, k)?;
        }
        Ok(())
    }

    pub fn run(&self, inst: &SimInstance, k: usize, alpha: f64) -> Result<RejectionSet> {
        match *self {
            Procedure::Domino { test, mode } => {
                let desc = LocalTestDescriptor::new(test, k)?;
                let cfg = DominoConfig::new(desc, alpha)?.with_mode(mode);
                domino(inst.evidence(test.evidence_kind()), &cfg)
            }
            Procedure::Bh => bh(&inst.pvalues, alpha),
            Procedure::Holm => holm_k(&inst.pvalues, k, alpha),
        }
    }
}

/// Per-procedure, per-replication samples for one scenario. Every procedure
/// sees the same instance in a given replication.
pub fn run_scenario(sc: &SimScenario, procedures: &[Procedure]) -> Result<Vec<Vec<RunSample>>> {
    if procedures.is_empty() {
        return Err(Error::EmptyInput);
    }
    for p in procedures {
        p.check_order(sc.k)?;
    }
    let generator = InstanceGenerator::new(*sc)?;
    let by_rep: Vec<Vec<RunSample>> = (0..sc.reps as u64)
        .into_par_iter()
        .map(|rep| {
            let inst = generator.generate(rep);
            procedures
                .iter()
                .map(|p| {
                    let rejected = p.run(&inst, sc.k, sc.alpha)?;
                    run_sample(&rejected, &inst.truth, sc.m, sc.k)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    Ok((0..procedures.len())
        .map(|i| by_rep.iter().map(|row| row[i]).collect())
        .collect())
}

/// A metrics report tagged with the scenario that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub scenario: SimScenario,
    pub metrics: MetricsReport,
}

/// One report per (scenario, procedure), scenario-major.
pub fn run_grid(scenarios: &[SimScenario], procedures: &[Procedure]) -> Result<Vec<ScenarioReport>> {
    if scenarios.is_empty() || procedures.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut out = Vec::with_capacity(scenarios.len() * procedures.len());
    for sc in scenarios {
        let samples = run_scenario(sc, procedures)?;
        for (proc_, runs) in procedures.iter().zip(samples) {
            let metrics = aggregate(&runs)?.labeled(sc.id(), proc_.name());
            out.push(ScenarioReport { scenario: *sc, metrics });
        }
    }
    Ok(out)
}

/// Formats like C's `%.6g`.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    } else {
        strip_zeros(&format!("{x:.*}", (5 - exp) as usize)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Renders the results table (header plus one row per report, LF endings).
pub fn format_table(reports: &[ScenarioReport]) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for ScenarioReport { scenario: sc, metrics: r } in reports {
        let floats = [
            sc.alpha, sc.rho, sc.pi1, sc.mu_c,
        ]
        .map(fmt_sig6);
        let stats = [r.kbfdr, r.kbfdr_se, r.kfwer, r.fdr, r.tdr, r.tdr_se, r.power, r.power_se].map(fmt_sig6);
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.scenario_id,
            r.procedure,
            sc.k,
            floats.join(","),
            r.reps,
            stats.join(",")
        )
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn emit_table(reports: &[ScenarioReport], path: &Path) -> Result<()> {
    let table = format_table(reports)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(table.as_bytes())?;
    Ok(())
}
