use clap::ValueEnum;
use domino_core::{
    bh, domino, holm_k, CheckMode, DominoConfig, EvidenceKind, EvidenceVector, LocalTestDescriptor,
    RejectionSet, TestId,
};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcArg {
    Domino,
    DominoE,
    Bh,
    Holm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dependence {
    Independent,
    Prds,
    Arbitrary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fast,
    Exact,
    Brute,
}

impl From<ModeArg> for CheckMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Fast => CheckMode::PaperFast,
            ModeArg::Exact => CheckMode::RectangularExact,
            ModeArg::Brute => CheckMode::BruteForce,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestArg {
    Bonferroni,
    Simes,
    Harmonic,
    Eavg,
    Eclosure,
}

impl From<TestArg> for TestId {
    fn from(t: TestArg) -> Self {
        match t {
            TestArg::Bonferroni => TestId::BonferroniK,
            TestArg::Simes => TestId::Simes,
            TestArg::Harmonic => TestId::HarmonicMean,
            TestArg::Eavg => TestId::EAverage,
            TestArg::Eclosure => TestId::EClosureK,
        }
    }
}

/// Everything `run` needs besides the evidence itself.
#[derive(Debug, Clone)]
pub struct RunRequest {
    pub procedure: ProcArg,
    pub k: usize,
    pub alpha: f64,
    pub test: Option<TestArg>,
    pub mode: Option<ModeArg>,
    pub dependence: Option<Dependence>,
    pub brute_cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolved {
    Domino(DominoConfig),
    Bh { alpha: f64 },
    Holm { k: usize, alpha: f64 },
}

impl Resolved {
    pub fn describe(&self) -> String {
        match self {
            Resolved::Domino(cfg) => format!(
                "domino test={} k={} alpha={} mode={}",
                cfg.test.id.name(),
                cfg.k,
                cfg.alpha,
                cfg.mode.name()
            ),
            Resolved::Bh { alpha } => format!("bh alpha={alpha}"),
            Resolved::Holm { k, alpha } => format!("holm k={k} alpha={alpha}"),
        }
    }

    pub fn apply(&self, ev: &EvidenceVector) -> CliResult<RejectionSet> {
        Ok(match *self {
            Resolved::Domino(cfg) => domino(ev, &cfg)?,
            Resolved::Bh { alpha } => bh(ev, alpha)?,
            Resolved::Holm { k, alpha } => holm_k(ev, k, alpha)?,
        })
    }
}

/// The local test used when `--test` is omitted. For p-values at `k = 1`
/// this follows the declared dependence: Simes under independence or PRDS,
/// the scaled harmonic mean otherwise (including when nothing is declared).
pub fn default_test(kind: EvidenceKind, k: usize, dependence: Option<Dependence>) -> TestId {
    match kind {
        EvidenceKind::EValue => TestId::EClosureK,
        EvidenceKind::PValue if k > 1 => TestId::BonferroniK,
        EvidenceKind::PValue => match dependence {
            Some(Dependence::Independent | Dependence::Prds) => TestId::Simes,
            Some(Dependence::Arbitrary) | None => TestId::HarmonicMean,
        },
    }
}

pub fn resolve(req: &RunRequest, kind: EvidenceKind) -> CliResult<Resolved> {
    if !(req.alpha > 0.0 && req.alpha < 1.0) {
        return Err(CliError::Parse(format!("--alpha {} must lie in (0, 1)", req.alpha)));
    }
    if req.k == 0 {
        return Err(CliError::Parse("--k must be at least 1".into()));
    }
    let wanted = match req.procedure {
        ProcArg::DominoE => EvidenceKind::EValue,
        _ => EvidenceKind::PValue,
    };
    if wanted != kind {
        return Err(CliError::Conflict(format!(
            "--proc {} needs {} input but the file holds {}",
            req.procedure.to_possible_value().expect("named").get_name(),
            wanted.name(),
            kind.name()
        )));
    }
    match req.procedure {
        ProcArg::Bh => return Ok(Resolved::Bh { alpha: req.alpha }),
        ProcArg::Holm => return Ok(Resolved::Holm { k: req.k, alpha: req.alpha }),
        ProcArg::Domino | ProcArg::DominoE => {}
    }

    let test = req
        .test
        .map(TestId::from)
        .unwrap_or_else(|| default_test(kind, req.k, req.dependence));
    if test.evidence_kind() != kind {
        return Err(CliError::Conflict(format!(
            "local test {} works on {}, the input holds {}",
            test.name(),
            test.evidence_kind().name(),
            kind.name()
        )));
    }
    if test == TestId::Simes && req.dependence == Some(Dependence::Arbitrary) {
        return Err(CliError::Conflict(
            "the Simes test is not valid under arbitrary dependence".into(),
        ));
    }
    let desc = LocalTestDescriptor::new(test, req.k).map_err(|e| CliError::Conflict(e.to_string()))?;
    let mut cfg = DominoConfig::new(desc, req.alpha)?;
    if let Some(mode) = req.mode {
        cfg = cfg.with_mode(mode.into());
    }
    if cfg.mode == CheckMode::PaperFast && !test.has_fast_path() {
        return Err(CliError::Conflict(format!("no fast path for {}", test.name())));
    }
    if let Some(cap) = req.brute_cap {
        cfg = cfg.with_cap(cap);
    }
    Ok(Resolved::Domino(cfg))
}
