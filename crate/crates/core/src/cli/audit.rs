//! Batch feasibility audit of a CSV file.
//!
//! Input columns: `id,n,mean,sd,min,max` are required;
//! `convention,semantics,mean_decimals,sd_decimals` are optional. A row that
//! cannot be interpreted becomes an `invalid_input` verdict and the batch
//! carries on. Rows are evaluated in parallel; output order is input order.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;

use super::report::{VerdictRecord, CSV_HEADER};
use super::{CliError, OutputFormat};
use crate::bounds::Semantics;
use crate::dataset::Convention;
use crate::feasibility::{check, ReportedStats, RoundedValue, Status};
use crate::rational::parse_rational;

const REQUIRED: [&str; 6] = ["id", "n", "mean", "sd", "min", "max"];

/// One input row, already split into named fields.
#[derive(Debug, Clone, Default)]
pub struct AuditRow {
    pub line: usize,
    pub id: String,
    pub n: String,
    pub mean: String,
    pub sd: String,
    pub min: String,
    pub max: String,
    pub convention: Option<String>,
    pub semantics: Option<String>,
    pub mean_decimals: Option<String>,
    pub sd_decimals: Option<String>,
    /// Set when the row itself is unreadable.
    pub defect: Option<String>,
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Summary {
    pub rows: usize,
    pub feasible: usize,
    pub infeasible: usize,
    pub invalid: usize,
}

impl Summary {
    fn add(&mut self, status: Status) {
        self.rows += 1;
        match status {
            Status::Feasible => self.feasible += 1,
            Status::Infeasible => self.infeasible += 1,
            Status::InvalidInput => self.invalid += 1,
        }
    }
}

/// Reads rows; fails only when the file as a whole is unusable.
pub fn read_rows(input: &[u8]) -> Result<Vec<AuditRow>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| CliError::Parse(format!("cannot read header: {e}")))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    for name in REQUIRED {
        if column(name).is_none() {
            return Err(CliError::Parse(format!("missing required column {name:?}")));
        }
    }
    let idx = |name: &str| column(name);
    let (i_id, i_n, i_mean, i_sd, i_min, i_max) = (
        idx("id").unwrap(),
        idx("n").unwrap(),
        idx("mean").unwrap(),
        idx("sd").unwrap(),
        idx("min").unwrap(),
        idx("max").unwrap(),
    );
    let (i_conv, i_sem, i_md, i_sdd) = (
        idx("convention"),
        idx("semantics"),
        idx("mean_decimals"),
        idx("sd_decimals"),
    );

    let mut rows = Vec::new();
    for (k, record) in reader.byte_records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| CliError::Parse(format!("line {line}: {e}")))?;
        let mut row = AuditRow {
            line,
            ..AuditRow::default()
        };
        let fields: Result<Vec<&str>, _> =
            record.iter().map(std::str::from_utf8).collect();
        let Ok(fields) = fields else {
            row.id = format!("line{line}");
            row.defect = Some("row is not valid UTF-8".into());
            rows.push(row);
            continue;
        };
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        let get = |i: usize| fields.get(i).map(|s| s.to_string()).unwrap_or_default();
        let opt = |i: Option<usize>| {
            i.and_then(|i| fields.get(i))
                .filter(|s| !s.is_empty())
                .map(|s| s.to_string())
        };
        row.id = get(i_id);
        row.n = get(i_n);
        row.mean = get(i_mean);
        row.sd = get(i_sd);
        row.min = get(i_min);
        row.max = get(i_max);
        row.convention = opt(i_conv);
        row.semantics = opt(i_sem);
        row.mean_decimals = opt(i_md);
        row.sd_decimals = opt(i_sdd);
        if fields.len() != headers.len() {
            row.defect = Some(format!(
                "expected {} fields, found {}",
                headers.len(),
                fields.len()
            ));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn rounded(literal: &str, decimals: &Option<String>, what: &str) -> Result<RoundedValue, String> {
    let v = RoundedValue::parse(literal).map_err(|e| format!("{what}: {e}"))?;
    match decimals {
        None => Ok(v),
        Some(d) => {
            let d: u32 = d
                .parse()
                .map_err(|_| format!("{what}_decimals: cannot parse {d:?}"))?;
            Ok(v.with_decimals(d))
        }
    }
}

fn to_stats(row: &AuditRow) -> Result<ReportedStats, String> {
    if let Some(defect) = &row.defect {
        return Err(defect.clone());
    }
    if row.id.is_empty() {
        return Err("missing id".into());
    }
    let n: usize = row
        .n
        .parse()
        .map_err(|_| format!("n: cannot parse {:?}", row.n))?;
    let convention: Convention = row
        .convention
        .as_deref()
        .unwrap_or("population")
        .parse()
        .map_err(|e: crate::Error| e.to_string())?;
    let semantics: Semantics = row
        .semantics
        .as_deref()
        .unwrap_or("bounds")
        .parse()
        .map_err(|e: crate::Error| e.to_string())?;
    Ok(ReportedStats {
        n,
        mean: rounded(&row.mean, &row.mean_decimals, "mean")?,
        sd: rounded(&row.sd, &row.sd_decimals, "sd")?,
        lower: parse_rational(&row.min).map_err(|e| format!("min: {e}"))?,
        upper: parse_rational(&row.max).map_err(|e| format!("max: {e}"))?,
        convention,
        semantics,
    })
}

pub fn evaluate(row: &AuditRow, duplicate: bool) -> VerdictRecord {
    let id = Some(row.id.clone());
    if duplicate {
        return VerdictRecord::invalid(id, format!("duplicate id {:?}", row.id));
    }
    match to_stats(row).and_then(|s| check(&s).map_err(|e| e.to_string())) {
        Ok(v) => VerdictRecord::from_verdict(id, &v),
        Err(msg) => VerdictRecord::invalid(id, msg),
    }
}

/// Evaluates all rows on `threads` workers (0 = rayon default), preserving
/// input order.
pub fn evaluate_all(rows: &[AuditRow], threads: usize) -> Result<Vec<VerdictRecord>, CliError> {
    let mut seen = HashSet::new();
    let duplicate: Vec<bool> = rows
        .iter()
        .map(|r| !r.id.is_empty() && !seen.insert(r.id.clone()))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        rows.par_iter()
            .zip(duplicate.par_iter())
            .map(|(row, &dup)| evaluate(row, dup))
            .collect()
    }))
}

pub fn write_records(
    records: &[VerdictRecord],
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<Summary, CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    let mut summary = Summary::default();
    match format {
        OutputFormat::Json => {
            for r in records {
                summary.add(r.status);
                let line = serde_json::to_string(r).expect("serializable record");
                writeln!(out, "{line}").map_err(io)?;
            }
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("in-memory write");
            for r in records {
                summary.add(r.status);
                w.write_record(r.csv_row()).expect("in-memory write");
            }
            let bytes = w.into_inner().expect("in-memory flush");
            out.write_all(&bytes).map_err(io)?;
        }
    }
    Ok(summary)
}
