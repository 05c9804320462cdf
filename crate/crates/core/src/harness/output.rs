//! Metrics CSV and advice log.
//!
//! Advice log lines: `M <step> <vertex> <from> <to>` for a move and
//! `X <step> <vertex> <from> <to>` for an evacuation off a released resource.

use std::fmt::Write as _;

use super::{field, syntax, tokens, HarnessError};
use crate::advisor::{MigrationAdvice, Move, ResourceId};
use crate::graph::VertexId;
use crate::metrics::MetricsRecord;

pub const CSV_HEADER: &str = "step,cut_ratio,balance,stability,score,moves_advised";

/// One CSV row, without the trailing newline.
pub fn csv_row(record: &MetricsRecord, moves_advised: usize) -> String {
    format!(
        "{},{:.6},{:.6},{:.6},{:.6},{}",
        record.step, record.cut_ratio, record.balance, record.stability, record.score, moves_advised
    )
}

/// A parsed CSV row. Values carry the 6-decimal rounding of the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub record: MetricsRecord,
    pub moves_advised: usize,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, HarnessError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        _ => return Err(syntax(1, format!("expected header `{CSV_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let cells: Vec<&str> = raw.split(',').collect();
        if cells.len() != 6 {
            return Err(syntax(line, "expected 6 columns"));
        }
        let real = |k: usize, name: &str| field::<f64>(line, name, cells[k]);
        rows.push(CsvRow {
            record: MetricsRecord {
                step: field(line, "step", cells[0])?,
                cut_ratio: real(1, "cut_ratio")?,
                balance: real(2, "balance")?,
                stability: real(3, "stability")?,
                score: real(4, "score")?,
            },
            moves_advised: field(line, "moves_advised", cells[5])?,
        });
    }
    Ok(rows)
}

pub fn advice_lines(advice: &MigrationAdvice) -> String {
    let mut out = String::new();
    for (tag, moves) in [("M", &advice.moves), ("X", &advice.evacuations)] {
        for m in moves {
            let _ = writeln!(out, "{tag} {} {} {} {}", advice.step, m.vertex, m.from, m.to);
        }
    }
    out
}

/// Reads an advice log back into one entry per step that has any line.
pub fn parse_advice(text: &str) -> Result<Vec<MigrationAdvice>, HarnessError> {
    let mut out: Vec<MigrationAdvice> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let Some(t) = tokens(raw) else { continue };
        if t.len() != 5 {
            return Err(syntax(line, "expected `<M|X> <step> <vertex> <from> <to>`"));
        }
        let step: u64 = field(line, "step", t[1])?;
        let m = Move {
            vertex: VertexId(field(line, "vertex id", t[2])?),
            from: field::<ResourceId>(line, "resource", t[3])?,
            to: field::<ResourceId>(line, "resource", t[4])?,
        };
        if out.last().is_none_or(|a| a.step != step) {
            if out.last().is_some_and(|a| a.step > step) {
                return Err(syntax(line, "steps must not decrease"));
            }
            out.push(MigrationAdvice {
                step,
                ..MigrationAdvice::default()
            });
        }
        let advice = out.last_mut().expect("just pushed");
        match t[0] {
            "M" => advice.moves.push(m),
            "X" => advice.evacuations.push(m),
            other => return Err(syntax(line, format!("unknown advice tag `{other}`"))),
        }
    }
    Ok(out)
}
