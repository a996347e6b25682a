//! Certificate reports: JSON (stable key order, fixed numeric formatting),
//! CSV (flattened 3×3 Gram), and a human-readable text block.
//!
//! JSON emission is byte-deterministic: reals are always rendered with 12
//! significant digits in scientific form, and big integers as decimal
//! strings, so parsing an emitted certificate and re-serializing it
//! reproduces the bytes exactly.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use rank3_core::families::{Family, LogBase, RankCertificate};
use rank3_core::pell::PellPair;

/// A certificate flattened to report form. Field order is the JSON key
/// order; do not reorder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub family: String,
    pub a: String,
    pub b: String,
    pub hypothesis_flags: FlagsReport,
    pub torsion: Option<TorsionReport>,
    pub gram: GramReport,
    pub verdict: VerdictReport,
    pub params: ParamsReport,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagsReport {
    pub pell_relation_holds: bool,
    pub theorem1_hypotheses: bool,
    pub a_less_than_b: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub order: u32,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub entries: Vec<Vec<f64>>,
    pub errors: Vec<Vec<f64>>,
    /// "natural", or the display base as a decimal string (a or b).
    pub log_base: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub determinant: f64,
    pub margin: f64,
    pub independent: bool,
    pub rank_lower_bound: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsReport {
    pub tol: f64,
    pub n_max: u32,
    pub primes: Vec<u64>,
}

impl CertificateReport {
    pub fn from_certificate(cert: &RankCertificate, log_base: LogBase, runtime_ms: u64) -> Self {
        let inst = &cert.instance;
        let log_base = match log_base {
            LogBase::Natural => "natural".to_string(),
            LogBase::FamilyBase => match inst.family {
                Family::Square => inst.a.to_string(),
                Family::Sixth => inst.b.to_string(),
            },
        };
        CertificateReport {
            family: inst.family.as_str().to_string(),
            a: inst.a.to_string(),
            b: inst.b.to_string(),
            hypothesis_flags: FlagsReport {
                pell_relation_holds: inst.hypothesis_flags.pell_relation_holds,
                theorem1_hypotheses: inst.hypothesis_flags.theorem1_hypotheses,
                a_less_than_b: inst.hypothesis_flags.a_less_than_b,
            },
            torsion: cert.torsion.as_ref().map(|t| TorsionReport {
                order: t.order as u32,
                method: t.method.as_str().to_string(),
            }),
            gram: GramReport {
                entries: cert.gram.entries().to_vec(),
                errors: cert.gram.entry_errors().to_vec(),
                log_base,
            },
            verdict: VerdictReport {
                determinant: cert.verdict.determinant,
                margin: cert.verdict.margin,
                independent: cert.verdict.independent,
                rank_lower_bound: cert.verdict.rank_lower_bound as u32,
            },
            params: ParamsReport {
                tol: cert.params.tol,
                n_max: cert.params.max_doublings,
                primes: cert.params.primes.clone(),
            },
            runtime_ms,
        }
    }
}

/// 12 significant digits in scientific form, e.g. `2.15311210579e1`.
/// Idempotent under parse-then-format, which is what makes JSON output
/// round-trip byte-identically.
pub fn format_real(value: f64) -> String {
    let v = if value == 0.0 { 0.0 } else { value };
    format!("{v:.11e}")
}

struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        if !value.is_finite() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "non-finite real in certificate",
            ));
        }
        writer.write_all(format_real(value).as_bytes())
    }
}

pub fn to_json(report: &CertificateReport) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    report
        .serialize(&mut ser)
        .expect("certificate serializes infallibly");
    String::from_utf8(out).expect("serializer emits UTF-8")
}

pub fn from_json(s: &str) -> Result<CertificateReport, serde_json::Error> {
    serde_json::from_str(s)
}

pub const CSV_HEADER: &str = "family,a,b,pell_relation_holds,theorem1_hypotheses,a_less_than_b,\
torsion_order,torsion_method,\
g11,g12,g13,g21,g22,g23,g31,g32,g33,\
e11,e12,e13,e21,e22,e23,e31,e32,e33,\
log_base,determinant,margin,independent,rank_lower_bound,tol,n_max,primes,runtime_ms";

/// One CSV row; the 3×3 Gram matrix flattens to g11..g33 and e11..e33,
/// primes are ';'-separated.
pub fn to_csv_row(report: &CertificateReport) -> String {
    assert_eq!(
        report.gram.entries.len(),
        3,
        "CSV schema is for 3-point certificates"
    );
    let mut fields: Vec<String> = vec![
        report.family.clone(),
        report.a.clone(),
        report.b.clone(),
        report.hypothesis_flags.pell_relation_holds.to_string(),
        report.hypothesis_flags.theorem1_hypotheses.to_string(),
        report.hypothesis_flags.a_less_than_b.to_string(),
    ];
    match &report.torsion {
        Some(t) => {
            fields.push(t.order.to_string());
            fields.push(t.method.clone());
        }
        None => {
            fields.push(String::new());
            fields.push(String::new());
        }
    }
    for matrix in [&report.gram.entries, &report.gram.errors] {
        for row in matrix {
            for v in row {
                fields.push(format_real(*v));
            }
        }
    }
    fields.push(report.gram.log_base.clone());
    fields.push(format_real(report.verdict.determinant));
    fields.push(format_real(report.verdict.margin));
    fields.push(report.verdict.independent.to_string());
    fields.push(report.verdict.rank_lower_bound.to_string());
    fields.push(format_real(report.params.tol));
    fields.push(report.params.n_max.to_string());
    fields.push(
        report
            .params
            .primes
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(";"),
    );
    fields.push(report.runtime_ms.to_string());
    fields.join(",")
}

/// Parses a row produced by `to_csv_row` back into a report (used to check
/// CSV/JSON content parity).
pub fn from_csv_row(row: &str) -> Result<CertificateReport, String> {
    let fields: Vec<&str> = row.split(',').collect();
    if fields.len() != 35 {
        return Err(format!("expected 35 CSV fields, found {}", fields.len()));
    }
    let real = |s: &str| s.parse::<f64>().map_err(|e| format!("bad real {s:?}: {e}"));
    let boolean = |s: &str| {
        s.parse::<bool>()
            .map_err(|e| format!("bad bool {s:?}: {e}"))
    };
    let mut gram = vec![vec![0.0; 3]; 3];
    let mut errors = vec![vec![0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            gram[i][j] = real(fields[8 + 3 * i + j])?;
            errors[i][j] = real(fields[17 + 3 * i + j])?;
        }
    }
    let torsion = if fields[6].is_empty() {
        None
    } else {
        Some(TorsionReport {
            order: fields[6].parse().map_err(|e| format!("bad order: {e}"))?,
            method: fields[7].to_string(),
        })
    };
    let primes = if fields[33].is_empty() {
        Vec::new()
    } else {
        fields[33]
            .split(';')
            .map(|p| p.parse::<u64>().map_err(|e| format!("bad prime: {e}")))
            .collect::<Result<_, _>>()?
    };
    Ok(CertificateReport {
        family: fields[0].to_string(),
        a: fields[1].to_string(),
        b: fields[2].to_string(),
        hypothesis_flags: FlagsReport {
            pell_relation_holds: boolean(fields[3])?,
            theorem1_hypotheses: boolean(fields[4])?,
            a_less_than_b: boolean(fields[5])?,
        },
        torsion,
        gram: GramReport {
            entries: gram,
            errors,
            log_base: fields[26].to_string(),
        },
        verdict: VerdictReport {
            determinant: real(fields[27])?,
            margin: real(fields[28])?,
            independent: boolean(fields[29])?,
            rank_lower_bound: fields[30].parse().map_err(|e| format!("bad rank: {e}"))?,
        },
        params: ParamsReport {
            tol: real(fields[31])?,
            n_max: fields[32].parse().map_err(|e| format!("bad n_max: {e}"))?,
            primes,
        },
        runtime_ms: fields[34]
            .parse()
            .map_err(|e| format!("bad runtime: {e}"))?,
    })
}

pub fn to_text(report: &CertificateReport, diagnostic: Option<&str>) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "family:     {} (a = {}, b = {})\n",
        report.family, report.a, report.b
    ));
    out.push_str(&format!(
        "hypotheses: pell_relation={} theorem1={} a<b={}\n",
        report.hypothesis_flags.pell_relation_holds,
        report.hypothesis_flags.theorem1_hypotheses,
        report.hypothesis_flags.a_less_than_b,
    ));
    match &report.torsion {
        Some(t) if t.order == 1 => {
            out.push_str(&format!("torsion:    trivial ({})\n", t.method));
        }
        Some(t) => {
            out.push_str(&format!("torsion:    order {} ({})\n", t.order, t.method));
        }
        None => out.push_str("torsion:    not computed\n"),
    }
    out.push_str(&format!("gram (log base {}):\n", report.gram.log_base));
    for (row, errs) in report.gram.entries.iter().zip(&report.gram.errors) {
        let cells: Vec<String> = row
            .iter()
            .zip(errs)
            .map(|(v, e)| format!("{v:>14.8} (±{e:.2e})"))
            .collect();
        out.push_str(&format!("  {}\n", cells.join("  ")));
    }
    out.push_str(&format!(
        "verdict:    det = {}, margin = {}, independent = {}\n",
        format_real(report.verdict.determinant),
        format_real(report.verdict.margin),
        report.verdict.independent,
    ));
    if report.verdict.independent {
        out.push_str(&format!(
            "            rank(E(Q)) >= {} CERTIFIED\n",
            report.verdict.rank_lower_bound
        ));
    } else {
        out.push_str("            independence not certified\n");
    }
    if let Some(d) = diagnostic {
        out.push_str(&format!("diagnostic: {d}\n"));
    }
    out.push_str(&format!(
        "params:     tol = {:e}, N_max = {}, primes = {:?}\n",
        report.params.tol, report.params.n_max, report.params.primes
    ));
    out.push_str(&format!("runtime:    {} ms\n", report.runtime_ms));
    out
}

/// One Pell record per line: n, a, b, admissible.
pub fn pell_line(pair: &PellPair) -> String {
    format!(
        "{},{},{},{}",
        pair.index(),
        pair.a(),
        pair.b(),
        pair.admissible()
    )
}

#[derive(Debug, Serialize)]
struct PellRecord {
    n: u64,
    a: String,
    b: String,
    admissible: bool,
}

pub fn pell_json(pairs: &[PellPair]) -> String {
    let records: Vec<PellRecord> = pairs
        .iter()
        .map(|p| PellRecord {
            n: p.index(),
            a: p.a().to_string(),
            b: p.b().to_string(),
            admissible: p.admissible(),
        })
        .collect();
    serde_json::to_string_pretty(&records).expect("pell records serialize infallibly")
}
