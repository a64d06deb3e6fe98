//! Oracle-agreement suites: each pits a fast or reduced route against an
//! exhaustive one on random inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::engine::{
    check_condition_bruteforce, check_condition_rectangular, domino_e, domino_p,
    domino_p_fast_bonferroni,
};
use crate::error::{Error, Result};
use crate::evidence::{sort_evidence, CheckMode, DominoConfig, EvidenceVector};
use crate::local_tests::LocalTestDescriptor;
use crate::metrics::{kbfdr_indicator, kfwer_indicator};
use crate::simulate::{std_normal_cdf, InstanceGenerator, Procedure, SimScenario};
use crate::local_tests::TestId;

pub const SUITES: [&str; 4] = ["rectangular", "mean-reduction", "kbfdr-kfwer", "fastpath-divergence"];

/// Suites run when none is named.
pub const DEFAULT_SUITES: [&str; 3] = ["rectangular", "mean-reduction", "kbfdr-kfwer"];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub failures: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Random instances per suite.
    pub instances: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 20_240_601, instances: 1000 }
    }
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    match name {
        "rectangular" => rectangular_vs_bruteforce(opts),
        "mean-reduction" => mean_reduction_vs_e_closure(opts),
        "kbfdr-kfwer" => kbfdr_below_kfwer(opts),
        "fastpath-divergence" => fastpath_divergence(),
        other => Err(Error::InvalidConfig(format!("unknown suite `{other}`"))),
    }
}

/// Random p-values: a mix of uniform nulls and Gaussian signals, with some
/// values snapped to a coarse grid so ties occur.
pub fn random_p_vector<R: Rng>(rng: &mut R, m: usize) -> EvidenceVector {
    let values = (0..m)
        .map(|_| {
            let p = if rng.gen_bool(0.4) {
                let z: f64 = rng.sample(StandardNormal);
                std_normal_cdf(-(2.5 + z))
            } else {
                rng.gen::<f64>()
            };
            if rng.gen_bool(0.1) {
                (p * 50.0).round() / 50.0
            } else {
                p
            }
        })
        .collect();
    EvidenceVector::p_values(values).expect("values lie in [0, 1]")
}

/// Random e-values from the Gaussian likelihood ratio with random signals,
/// occasionally zero or infinite.
pub fn random_e_vector<R: Rng>(rng: &mut R, m: usize) -> EvidenceVector {
    let values = (0..m)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < 0.03 {
                return 0.0;
            }
            if u < 0.05 {
                return f64::INFINITY;
            }
            let mu = if rng.gen_bool(0.5) { 3.0 } else { 0.0 };
            let x = mu + rng.sample::<f64, _>(StandardNormal);
            (3.0 * x - 4.5).exp()
        })
        .collect();
    EvidenceVector::e_values(values).expect("nonnegative values")
}

fn rectangular_vs_bruteforce(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let tests = [
        LocalTestDescriptor::bonferroni(1),
        LocalTestDescriptor::bonferroni(2),
        LocalTestDescriptor::bonferroni(3),
        LocalTestDescriptor::simes(),
        LocalTestDescriptor::harmonic(),
    ];
    let (mut checks, mut failures) = (0, 0);
    let mut detail = String::new();
    for _ in 0..opts.instances {
        let m = rng.gen_range(1..=12);
        let p = random_p_vector(&mut rng, m);
        let sv = sort_evidence(&p);
        for alpha in [0.05, 0.2] {
            for test in tests.iter().filter(|t| t.k <= m) {
                for r in test.k..=m {
                    let rect = check_condition_rectangular(&sv, r, test.k, test, alpha)?;
                    let brute = check_condition_bruteforce(&sv, r, test.k, test, alpha, 12)?;
                    checks += 1;
                    if rect.passed != brute.passed {
                        failures += 1;
                        if detail.is_empty() {
                            detail = format!("{:?} alpha={alpha} r={r} p={:?}", test.id, p.values());
                        }
                    }
                }
            }
        }
    }
    Ok(SuiteReport { name: "rectangular", passed: failures == 0, checks, failures, detail })
}

fn mean_reduction_vs_e_closure(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x4141);
    let (mut checks, mut failures) = (0, 0);
    let mut detail = String::new();
    for _ in 0..opts.instances {
        let k = rng.gen_range(1..=2);
        let m = rng.gen_range(k..=10);
        let alpha = [0.05, 0.1, 0.2][rng.gen_range(0..3)];
        let e = random_e_vector(&mut rng, m);
        let test = LocalTestDescriptor::e_closure(k);
        let fast = DominoConfig::new(test, alpha)?.with_mode(CheckMode::PaperFast);
        let brute = fast.with_mode(CheckMode::BruteForce);
        let a = domino_e(&e, &fast)?;
        let b = domino_e(&e, &brute)?;
        checks += 1;
        if a != b {
            failures += 1;
            if detail.is_empty() {
                detail = format!("k={k} alpha={alpha} e={:?}", e.values());
            }
        }
    }
    Ok(SuiteReport { name: "mean-reduction", passed: failures == 0, checks, failures, detail })
}

fn kbfdr_below_kfwer(opts: &SuiteOptions) -> Result<SuiteReport> {
    let reps = (opts.instances / 10).max(1);
    let procedures = [
        Procedure::domino(TestId::HarmonicMean),
        Procedure::domino(TestId::Simes),
        Procedure::Bh,
    ];
    let (mut checks, mut failures) = (0, 0);
    let mut detail = String::new();
    for (pi1, rho) in [(0.2, 0.0), (0.2, 0.5), (0.0, 0.0), (0.0, 0.5)] {
        let sc = SimScenario {
            m: 50, pi1, mu_c: 3.0, sigma: 1.0, rho, alpha: 0.1, k: 1, reps, seed: opts.seed,
        };
        let generator = InstanceGenerator::new(sc)?;
        for rep in 0..reps as u64 {
            let inst = generator.generate(rep);
            for proc_ in &procedures {
                let rejected = proc_.run(&inst, sc.k, sc.alpha)?;
                let b = kbfdr_indicator(&rejected, &inst.truth, sc.k);
                let f = kfwer_indicator(&rejected, &inst.truth, sc.k);
                checks += 1;
                let ok = if pi1 == 0.0 { b == f } else { !b || f };
                if !ok {
                    failures += 1;
                    if detail.is_empty() {
                        detail = format!("{} pi1={pi1} rho={rho} rep={rep}", proc_.name());
                    }
                }
            }
        }
    }
    Ok(SuiteReport { name: "kbfdr-kfwer", passed: failures == 0, checks, failures, detail })
}

/// The Bonferroni chain never adds weaker hypotheses, so on
/// `p = (0.02, 0.02, 0.9)` it rejects two hypotheses where the full
/// condition rejects none. The suite passes when that divergence shows up.
fn fastpath_divergence() -> Result<SuiteReport> {
    let p = EvidenceVector::p_values(vec![0.02, 0.02, 0.9])?;
    let fast = domino_p_fast_bonferroni(&p, 1, 0.05)?;
    let cfg = DominoConfig::new(LocalTestDescriptor::bonferroni(1), 0.05)?
        .with_mode(CheckMode::BruteForce);
    let brute = domino_p(&p, &cfg)?;
    let passed = fast.len() == 2 && brute.is_empty();
    Ok(SuiteReport {
        name: "fastpath-divergence",
        passed,
        checks: 1,
        failures: usize::from(!passed),
        detail: format!(
            "p=(0.02, 0.02, 0.9) k=1 alpha=0.05: fast chain |R|={}, brute force |R|={}",
            fast.len(),
            brute.len()
        ),
    })
}
