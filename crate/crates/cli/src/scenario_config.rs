//! Flat `key = value` scenario files for the `simulate` subcommand.
//!
//! Every key is required. `m`, `pi1`, `mu_c`, `sigma`, `rho`, `alpha` and `k`
//! take comma-separated lists and span a Cartesian grid; `reps` and `seed`
//! are scalars. Numbers may be written as fractions (`rho = -1/99`).
//!
//! `procedures` lists tokens of the form `<test>[@k][:mode]`, `bh` or
//! `holm[@k]`. A token without `@k` runs at every listed `k` where it is
//! defined.

use std::collections::BTreeMap;

use domino_core::{CheckMode, Procedure, SimScenario, TestId};

use crate::error::{CliError, CliResult};

const LIST_KEYS: [&str; 7] = ["m", "pi1", "mu_c", "sigma", "rho", "alpha", "k"];
const SCALAR_KEYS: [&str; 3] = ["reps", "seed", "procedures"];

/// Scenarios sharing one `k`, and the procedures defined at that `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub scenarios: Vec<SimScenario>,
    pub procedures: Vec<Procedure>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ProcSpec {
    procedure: Procedure,
    k: Option<usize>,
}

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

fn parse_number(s: &str) -> CliResult<f64> {
    let bad = || parse_err(format!("not a number: `{s}`"));
    let x = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            num / den
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

fn parse_count(s: &str) -> CliResult<usize> {
    s.parse().map_err(|_| parse_err(format!("not a nonnegative integer: `{s}`")))
}

fn list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim)
}

fn parse_procedure(token: &str) -> CliResult<ProcSpec> {
    let (head, mode) = match token.split_once(':') {
        Some((h, m)) => (h, Some(m)),
        None => (token, None),
    };
    let (name, k) = match head.split_once('@') {
        Some((n, k)) => (n, Some(parse_count(k)?)),
        None => (head, None),
    };
    if k == Some(0) {
        return Err(parse_err(format!("`{token}`: k must be at least 1")));
    }
    let procedure = match name {
        "bh" | "holm" if mode.is_some() => {
            return Err(parse_err(format!("`{token}`: {name} takes no mode")))
        }
        "bh" if k.is_some() => return Err(parse_err(format!("`{token}`: bh takes no order"))),
        "bh" => Procedure::Bh,
        "holm" => Procedure::Holm,
        _ => {
            let test: TestId = name.parse().map_err(|_| parse_err(format!("unknown procedure `{token}`")))?;
            let mode = match mode {
                None => CheckMode::default_for(test),
                Some("fast") => CheckMode::PaperFast,
                Some("exact") => CheckMode::RectangularExact,
                Some("brute") => CheckMode::BruteForce,
                Some(other) => return Err(parse_err(format!("`{token}`: unknown mode `{other}`"))),
            };
            if mode == CheckMode::PaperFast && !test.has_fast_path() {
                return Err(parse_err(format!("`{token}`: no fast path for {name}")));
            }
            Procedure::Domino { test, mode }
        }
    };
    if let Some(k) = k {
        procedure
            .check_order(k)
            .map_err(|e| parse_err(format!("`{token}`: {e}")))?;
    }
    Ok(ProcSpec { procedure, k })
}

/// Parses a scenario file into `k`-blocks, in the order the `k` values are
/// listed. Within a block, `rho` varies fastest.
pub fn parse_config(text: &str, seed_override: Option<u64>) -> CliResult<Vec<Block>> {
    let mut entries: BTreeMap<&str, &str> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        if !LIST_KEYS.contains(&key) && !SCALAR_KEYS.contains(&key) {
            return Err(parse_err(format!("line {}: unknown key `{key}`", n + 1)));
        }
        if entries.insert(key, value.trim()).is_some() {
            return Err(parse_err(format!("line {}: duplicate key `{key}`", n + 1)));
        }
    }
    let get = |key: &str| {
        entries
            .get(key)
            .copied()
            .filter(|v| !v.is_empty())
            .ok_or_else(|| parse_err(format!("missing key `{key}`")))
    };
    let floats = |key: &str| -> CliResult<Vec<f64>> { list(get(key)?).map(parse_number).collect() };
    let counts = |key: &str| -> CliResult<Vec<usize>> { list(get(key)?).map(parse_count).collect() };

    let ms = counts("m")?;
    let pi1s = floats("pi1")?;
    let mus = floats("mu_c")?;
    let sigmas = floats("sigma")?;
    let rhos = floats("rho")?;
    let alphas = floats("alpha")?;
    let ks = counts("k")?;
    let reps = parse_count(get("reps")?)?;
    let seed: u64 = get("seed")?
        .parse()
        .map_err(|_| parse_err("seed must be an unsigned integer"))?;
    let seed = seed_override.unwrap_or(seed);
    let specs: Vec<ProcSpec> = list(get("procedures")?).map(parse_procedure).collect::<CliResult<_>>()?;

    for spec in &specs {
        if let Some(k) = spec.k {
            if !ks.contains(&k) {
                return Err(parse_err(format!("{} is pinned to k = {k}, which is not listed", spec.procedure.name())));
            }
        }
    }

    let mut blocks = Vec::new();
    for &k in &ks {
        let procedures: Vec<Procedure> = specs
            .iter()
            .filter(|s| s.k.map_or(s.procedure.check_order(k).is_ok(), |sk| sk == k))
            .map(|s| s.procedure)
            .collect();
        if procedures.is_empty() {
            continue;
        }
        let mut scenarios = Vec::new();
        for &m in &ms {
            for &pi1 in &pi1s {
                for &mu_c in &mus {
                    for &sigma in &sigmas {
                        for &alpha in &alphas {
                            for &rho in &rhos {
                                let sc = SimScenario { m, pi1, mu_c, sigma, rho, alpha, k, reps, seed };
                                sc.validate().map_err(|e| parse_err(e.to_string()))?;
                                scenarios.push(sc);
                            }
                        }
                    }
                }
            }
        }
        blocks.push(Block { scenarios, procedures });
    }
    if blocks.is_empty() {
        return Err(parse_err("no procedure is defined at any listed k"));
    }
    Ok(blocks)
}
