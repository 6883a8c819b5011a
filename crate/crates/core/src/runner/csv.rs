//! CSV output of curves. Floats use Rust's shortest round-trip formatting,
//! so the text is deterministic and parses back to identical values.

use std::io::{self, Write};

use super::config::{Method, NoiseKind};
use super::Curve;
use crate::error::{Error, Result};
use crate::evolver::Topology;

pub const CSV_HEADER: &str = "nt,negativity,discord,mutual_info,classical,method,topology,noise";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub nt: f64,
    pub negativity: f64,
    pub discord: f64,
    pub mutual_info: f64,
    pub classical: f64,
    pub method: Method,
    pub topology: Topology,
    pub noise: NoiseKind,
}

pub fn write_csv<W: Write>(curves: &[Curve], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for curve in curves {
        let p = &curve.provenance;
        for (nt, r) in curve.times.iter().zip(&curve.reports) {
            writeln!(
                out,
                "{nt},{},{},{},{},{},{},{}",
                r.negativity, r.discord, r.mutual_info, r.classical, p.method, p.topology, p.noise
            )?;
        }
    }
    Ok(())
}

pub fn emit_csv(curves: &[Curve]) -> String {
    let mut buf = Vec::new();
    write_csv(curves, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is ASCII")
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Usage(format!("csv: expected header `{CSV_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Usage(format!("csv line {}: {what}", i + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(bad(&format!("expected 8 fields, found {}", fields.len())));
        }
        let num = |j: usize| fields[j].parse::<f64>().map_err(|_| bad(&format!("bad number {:?}", fields[j])));
        rows.push(CsvRow {
            nt: num(0)?,
            negativity: num(1)?,
            discord: num(2)?,
            mutual_info: num(3)?,
            classical: num(4)?,
            method: fields[5].parse().map_err(|e: Error| bad(&e.to_string()))?,
            topology: fields[6].parse().map_err(|e: Error| bad(&e.to_string()))?,
            noise: fields[7].parse().map_err(|e: Error| bad(&e.to_string()))?,
        });
    }
    Ok(rows)
}

/// Rows grouped by `(method, topology, noise)`, in first-appearance order.
pub fn group_rows(rows: &[CsvRow]) -> Vec<((Method, Topology, NoiseKind), Vec<CsvRow>)> {
    let mut groups: Vec<((Method, Topology, NoiseKind), Vec<CsvRow>)> = Vec::new();
    for row in rows {
        let key = (row.method, row.topology, row.noise);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(*row),
            None => groups.push((key, vec![*row])),
        }
    }
    groups
}
