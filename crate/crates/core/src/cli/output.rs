//! CSV tables with a `#` comment header, and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;

/// Column layouts of every table the CLI writes. The first sweep column is
/// `K` or `K0` depending on the regime.
pub mod schema {
    pub const EVOLVE: [&str; 6] = ["t", "rho_aa", "rho_bb", "rho_cc", "Gamma", "Gamma_p"];
    pub const SWEEP_TAIL: [&str; 7] = [
        "gamma0",
        "rho_bb_stat",
        "residual",
        "rho_aa_stat",
        "rho_cc_stat",
        "Gamma_stat",
        "status",
    ];
    pub const SPECTRUM: [&str; 3] = ["delta", "trapped", "absorption"];
    pub const ASYMPTOTE: [&str; 9] = [
        "density_param",
        "K_eff",
        "closed_form",
        "simulated",
        "ratio",
        "spread",
        "late_time_exact",
        "t_end",
        "status",
    ];
    pub const ORACLE: [&str; 9] = [
        "t",
        "rho_aa",
        "rho_aa_se",
        "rho_bb",
        "rho_bb_se",
        "rho_cc",
        "rho_cc_se",
        "rho_bb_rate_eq",
        "z_score",
    ];

    /// Full sweep header for the given density label.
    pub fn sweep(label: &str) -> Vec<String> {
        std::iter::once(label.to_string())
            .chain(SWEEP_TAIL.iter().map(|s| s.to_string()))
            .collect()
    }
}

/// One output table. Cells are pre-formatted strings.
#[derive(Debug, Clone)]
pub struct Table {
    pub file_name: String,
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-tripping decimal form of a float.
pub fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

impl Table {
    pub fn new<S: AsRef<str>>(file_name: impl Into<String>, columns: &[S]) -> Self {
        Table {
            file_name: file_name.into(),
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(&self.file_name);
        let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
        let mut out = BufWriter::new(File::create(&path).map_err(io)?);
        for line in &self.comments {
            writeln!(out, "# {line}").map_err(io)?;
        }
        let mut csv = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
        csv.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            csv.write_record(row).map_err(csv_err)?;
        }
        csv.flush().map_err(io)
    }
}

/// Comment lines, header and rows of a table read back from disk.
pub type TableContents = (Vec<String>, Vec<String>, Vec<Vec<String>>);

/// Reads a table written by [`Table::write`].
pub fn read_table(path: &Path) -> Result<TableContents, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
    let comments: Vec<String> = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim().to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let bad = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    let header = reader.headers().map_err(bad)?.iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(bad)?;
    Ok((comments, header, rows))
}

/// Record of one run: enough to reproduce every CSV it lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub mode: super::Mode,
    /// Fully resolved scenario.
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
    pub threads: usize,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1e-300, 123456.789, -2.5e-7, 1.0, 0.0] {
            assert_eq!(fmt(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt(f64::NAN), "nan");
    }

    #[test]
    fn table_write_read() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("x.csv", &schema::SPECTRUM);
        t.comment("units: delta in gamma");
        t.push(vec![fmt(-1.0), fmt(0.5), fmt(0.25)]);
        t.write(dir.path()).unwrap();
        let (comments, header, rows) = read_table(&dir.path().join("x.csv")).unwrap();
        assert_eq!(comments, vec!["units: delta in gamma"]);
        assert_eq!(header, schema::SPECTRUM);
        assert_eq!(rows, vec![vec!["-1.0", "0.5", "0.25"]]);
    }
}
