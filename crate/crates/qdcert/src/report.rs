use std::fmt::Write as _;

use qdcert_core::UcpCertificate;
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_HEADER: &str = "degree,m,eps_conv,eps_dist,vu_gap,defect_mult,defect_equiv,defect_norm,pass,wall_ms";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub degree: usize,
    pub m: usize,
    pub eps_conv: f64,
    pub eps_dist: f64,
    pub vu_gap: f64,
    pub defect_mult: f64,
    pub defect_equiv: f64,
    pub defect_norm: f64,
    pub pass: bool,
    /// Zero unless timing was requested.
    pub wall_ms: u64,
}

impl SweepRow {
    pub fn of(cert: &UcpCertificate, wall_ms: u64) -> Self {
        Self {
            degree: cert.provenance.kernel.degree.unwrap_or(0),
            m: cert.provenance.grid_points,
            eps_conv: cert.eps_conv,
            eps_dist: cert.eps_dist,
            vu_gap: cert.vu_gap,
            defect_mult: cert.defect_mult,
            defect_equiv: cert.defect_equiv,
            defect_norm: cert.defect_norm,
            pass: cert.pass,
            wall_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportError {
    pub id: String,
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub version: String,
    /// SHA-256 of the scenario text, hex.
    pub input_hash: String,
    pub certificates: Vec<UcpCertificate>,
    pub sweep: Vec<SweepRow>,
    pub errors: Vec<ReportError>,
}

impl Report {
    pub fn new(input_hash: String) -> Self {
        Self { version: VERSION.into(), input_hash, certificates: Vec::new(), sweep: Vec::new(), errors: Vec::new() }
    }

    pub fn all_pass(&self) -> bool {
        self.errors.is_empty() && !self.certificates.is_empty() && self.certificates.iter().all(|c| c.pass)
    }

    /// 0 when every certificate passes, 2 when any run reported an error,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if !self.errors.is_empty() {
            2
        } else if self.all_pass() {
            0
        } else {
            1
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Human,
    Csv,
}

pub fn emit(report: &Report, format: Format) -> String {
    match format {
        Format::Json => json(report),
        Format::Csv => csv(report),
        Format::Human => human(report),
    }
}

fn json(report: &Report) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("reports contain only finite data");
    out.push('\n');
    out
}

fn csv(report: &Report) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.sweep {
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{},{}",
            r.degree, r.m, r.eps_conv, r.eps_dist, r.vu_gap, r.defect_mult, r.defect_equiv, r.defect_norm, r.pass, r.wall_ms
        );
    }
    out
}

fn human(report: &Report) -> String {
    let headers = ["id", "kernel", "m", "eps_total", "mult", "bound", "equiv", "bound", "norm", "bound", "result"];
    let rows: Vec<Vec<String>> = report
        .certificates
        .iter()
        .map(|c| {
            let kernel = match c.provenance.kernel.degree {
                Some(d) => format!("{}({d})", c.provenance.kernel.kind),
                None => c.provenance.kernel.kind.clone(),
            };
            vec![
                c.id.clone(),
                kernel,
                c.provenance.grid_points.to_string(),
                format!("{:.3e}", c.eps_total),
                format!("{:.3e}", c.defect_mult),
                format!("{:.3e}", c.bound_mult),
                format!("{:.3e}", c.defect_equiv),
                format!("{:.3e}", c.bound_equiv),
                format!("{:.3e}", c.defect_norm),
                format!("{:.3e}", c.bound_norm),
                if c.pass { "pass".into() } else { "FAIL".into() },
            ]
        })
        .collect();
    let widths: Vec<usize> =
        (0..headers.len()).map(|i| rows.iter().map(|r| r[i].len()).chain([headers[i].len()]).max().unwrap_or(0)).collect();
    let line = |cells: &[&str]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string()
    };

    let mut out = String::new();
    let _ = writeln!(out, "{}", line(&headers));
    for r in &rows {
        let cells: Vec<&str> = r.iter().map(String::as_str).collect();
        let _ = writeln!(out, "{}", line(&cells));
    }
    for e in &report.errors {
        let _ = writeln!(out, "error [{}] {}: {}", e.code, e.id, e.message);
    }
    let passed = report.certificates.iter().filter(|c| c.pass).count();
    let _ = writeln!(
        out,
        "\n{passed}/{} certificates pass, {} error(s): {}",
        report.certificates.len(),
        report.errors.len(),
        if report.all_pass() { "PASS" } else { "FAIL" }
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sweep_is_header_only() {
        let r = Report::new("00".into());
        assert_eq!(emit(&r, Format::Csv), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn exit_codes() {
        let mut r = Report::new(String::new());
        assert_eq!(r.exit_code(), 1, "nothing certified is not a pass");
        r.errors.push(ReportError { id: "x".into(), code: "unachievable".into(), message: String::new() });
        assert_eq!(r.exit_code(), 2);
    }
}
