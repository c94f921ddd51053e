//! Table writers shared by the commands: a `#` header block, then CSV or JSON.

use crate::error::{Error, Result};
use crate::estimation::CurvePoint;
use crate::extended;
use crate::identification::IdentifiedSet;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Provenance written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub tolerances: Vec<(String, f64)>,
}

impl Meta {
    pub fn new(config_bytes: &[u8], seed: u64, tolerances: Vec<(String, f64)>) -> Self {
        Meta {
            tool: "qhstop".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: hex::encode(Sha256::digest(config_bytes)),
            seed,
            tolerances,
        }
    }

    fn header_lines(&self) -> String {
        let tol: Vec<String> = self.tolerances.iter().map(|(k, v)| format!("{k}={v:e}")).collect();
        format!(
            "# tool: {} {}\n# config_sha256: {}\n# seed: {}\n# tolerances: {}\n",
            self.tool,
            self.version,
            self.config_sha256,
            self.seed,
            tol.join(" ")
        )
    }
}

/// A header row plus string cells; numbers go through [`num`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(format!("csv buffer: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Numerical(format!("csv is not utf-8: {e}")))
    }
}

/// Shortest round-trip decimal; infinities as `inf` / `-inf`.
pub fn num(x: f64) -> String {
    extended::format(x)
}

/// Writes `<dir>/<name>.<ext>`. CSV gets the header block and `table`;
/// JSON gets `{"meta": ..., "result": json}`.
pub fn write_output<T: Serialize>(
    dir: &Path,
    name: &str,
    format: Format,
    meta: &Meta,
    table: &Table,
    json: &T,
) -> Result<PathBuf> {
    let path = dir.join(format!("{name}.{}", format.extension()));
    let body = match format {
        Format::Csv => format!("{}{}", meta.header_lines(), table.to_csv()?),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&serde_json::json!({ "meta": meta, "result": json }))?;
            s.push('\n');
            s
        }
    };
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// What a plot file shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// Per-period completion masses and conditional probabilities.
    Bars,
    /// Long-format consistency mask of a `(β, δ)` grid.
    Region,
    /// Criterion against β.
    Curve,
}

impl FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bars" => Ok(PlotKind::Bars),
            "region" => Ok(PlotKind::Region),
            "curve" => Ok(PlotKind::Curve),
            other => Err(Error::Invalid(format!("unknown plot kind '{other}' (expected bars, region or curve)"))),
        }
    }
}

/// One labelled bar series.
#[derive(Debug, Clone, PartialEq)]
pub struct BarSeries {
    pub label: String,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

/// Results that can be turned into plot data.
#[derive(Debug, Clone, Copy)]
pub enum PlotSource<'a> {
    Bars(&'a [BarSeries]),
    Region(&'a IdentifiedSet),
    Curve(&'a [(String, Vec<CurvePoint>)]),
}

/// Plot-ready long-format table. The kind must match the result.
pub fn emit_plot_data(source: PlotSource<'_>, kind: PlotKind) -> Result<Table> {
    match (source, kind) {
        (PlotSource::Bars(series), PlotKind::Bars) => {
            let mut t = Table::new(&["series", "t", "q", "p"]);
            for s in series {
                for (i, (q, p)) in s.q.iter().zip(&s.p).enumerate() {
                    t.push(vec![s.label.clone(), (i + 1).to_string(), num(*q), num(*p)]);
                }
            }
            Ok(t)
        }
        (PlotSource::Region(set), PlotKind::Region) => {
            let mut t = Table::new(&["beta", "delta", "consistent"]);
            for (b, d, ok) in set.cells() {
                t.push(vec![num(b), num(d), u8::from(ok).to_string()]);
            }
            Ok(t)
        }
        (PlotSource::Curve(curves), PlotKind::Curve) => {
            let mut t = Table::new(&["model", "beta", "value"]);
            for (label, curve) in curves {
                for c in curve {
                    t.push(vec![label.clone(), num(c.beta), num(c.value)]);
                }
            }
            Ok(t)
        }
        (_, kind) => Err(Error::Invalid(format!("plot kind {kind:?} does not fit this result"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identification::{identified_set, Grid, RichData};

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["t", "v"]);
        t.push(vec!["1".into(), num(0.25)]);
        t.push(vec!["2".into(), num(f64::NEG_INFINITY)]);
        assert_eq!(t.to_csv().unwrap(), "t,v\n1,0.25\n2,-inf\n");
    }

    #[test]
    fn header_is_stable() {
        let a = Meta::new(b"{}", 7, vec![("tol".into(), 1e-10)]);
        let b = Meta::new(b"{}", 7, vec![("tol".into(), 1e-10)]);
        assert_eq!(a.header_lines(), b.header_lines());
        assert!(a.header_lines().contains("# seed: 7"));
        assert!(a.header_lines().contains("tol=1e-10"));
        assert_ne!(a.config_sha256, Meta::new(b"{ }", 7, vec![]).config_sha256);
    }

    #[test]
    fn plot_kinds() {
        assert!("scatter".parse::<PlotKind>().is_err());
        let data = RichData::new(vec![0.5, 0.25, 0.0], vec![0.25, 0.375, 0.5]).unwrap();
        let set = identified_set(&data, &Grid::point(1.0), &Grid::point(1.0)).unwrap();
        let region = emit_plot_data(PlotSource::Region(&set), PlotKind::Region).unwrap();
        assert_eq!(region.rows.len(), 1);
        assert!(emit_plot_data(PlotSource::Region(&set), PlotKind::Bars).is_err());
        let curve = vec![(
            "m".to_string(),
            vec![CurvePoint { beta: 0.5, value: 1.0 }, CurvePoint { beta: 0.6, value: 0.5 }],
        )];
        let t = emit_plot_data(PlotSource::Curve(&curve), PlotKind::Curve).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0][1], "0.5");
        assert_eq!(t.rows[1][1], "0.6");
    }
}
