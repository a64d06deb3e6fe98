//! Evidence CSV input and rejection CSV output.

use std::io::{Read, Write};

use domino_core::{EvidenceKind, EvidenceVector, RejectionSet};

use crate::error::{CliError, CliResult};

/// Evidence read from disk, with the original value strings kept for echoing.
#[derive(Debug, Clone)]
pub struct EvidenceFile {
    pub evidence: EvidenceVector,
    pub raw: Vec<String>,
}

/// Reads `index,p_value` or `index,e_value` rows. Indices are 1-based and
/// must cover `1..=m` exactly once, in any order.
pub fn read_evidence<R: Read>(input: R) -> CliResult<EvidenceFile> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let kind = match (headers.get(0), headers.get(1), headers.len()) {
        (Some("index"), Some("p_value"), 2) => EvidenceKind::PValue,
        (Some("index"), Some("e_value"), 2) => EvidenceKind::EValue,
        (None, _, _) | (Some(""), None, 1) => return Err(CliError::Parse("empty input file".into())),
        _ => {
            return Err(CliError::Parse(format!(
                "expected header `index,p_value` or `index,e_value`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )))
        }
    };

    let mut rows: Vec<(usize, String, f64)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let at = || format!("data row {}", line + 1);
        let index: usize = record[0]
            .parse()
            .map_err(|_| CliError::Parse(format!("{}: bad index `{}`", at(), &record[0])))?;
        let raw = record[1].to_string();
        let value: f64 = raw
            .parse()
            .map_err(|_| CliError::Parse(format!("{}: bad value `{raw}`", at())))?;
        rows.push((index, raw, value));
    }
    if rows.is_empty() {
        return Err(CliError::Parse("input has no data rows".into()));
    }

    let m = rows.len();
    let mut slots: Vec<Option<(String, f64)>> = vec![None; m];
    for (index, raw, value) in rows {
        if index == 0 || index > m {
            return Err(CliError::Parse(format!("index {index} outside 1..={m}")));
        }
        if slots[index - 1].replace((raw, value)).is_some() {
            return Err(CliError::Parse(format!("duplicate index {index}")));
        }
    }
    let (raw, values): (Vec<String>, Vec<f64>) = slots.into_iter().map(|s| s.expect("filled")).unzip();
    let evidence = EvidenceVector::new(kind, values)?;
    Ok(EvidenceFile { evidence, raw })
}

/// Writes `index,evidence,rejected,marginal_rank` in index order.
/// `marginal_rank` is 1 for the least significant rejection, up to `k`.
pub fn write_rejections<W: Write>(out: W, file: &EvidenceFile, rejected: &RejectionSet) -> CliResult<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(["index", "evidence", "rejected", "marginal_rank"])?;
    for (j, raw) in file.raw.iter().enumerate() {
        let marginal = rejected
            .marginal_indices
            .iter()
            .position(|&i| i == j)
            .map(|pos| (pos + 1).to_string())
            .unwrap_or_default();
        let flag = if rejected.contains(j) { "1" } else { "0" };
        writer.write_record([&(j + 1).to_string(), raw.as_str(), flag, &marginal])?;
    }
    writer.flush()?;
    Ok(())
}

/// Evidence value of the least significant rejection.
pub fn boundary_value(ev: &EvidenceVector, rejected: &RejectionSet) -> Option<f64> {
    rejected.marginal_indices.first().map(|&j| ev.values()[j])
}
