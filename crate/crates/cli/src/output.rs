//! CSV tables and metadata files.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use crate::config::Config;

/// Numeric table with an optional trailing `reason` column for failed rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// One entry per row when present; empty string on success.
    pub reasons: Option<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            reasons: None,
        }
    }

    pub fn with_reasons<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        let mut t = Self::new(columns);
        t.reasons = Some(Vec::new());
        t
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
        if let Some(r) = &mut self.reasons {
            r.push(String::new());
        }
    }

    pub fn push_with_reason(&mut self, row: Vec<f64>, reason: String) {
        self.rows.push(row);
        self.reasons.get_or_insert_with(Vec::new).push(reason);
    }

    pub fn failures(&self) -> usize {
        self.reasons
            .as_ref()
            .map_or(0, |r| r.iter().filter(|s| !s.is_empty()).count())
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = self.columns.clone();
        if self.reasons.is_some() {
            h.push("reason".into());
        }
        h
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(table.header())?;
    for (i, row) in table.rows.iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        if let Some(r) = &table.reasons {
            rec.push(r[i].clone());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Gnuplot commands drawing every column against the first one.
pub fn gnuplot_script(file: &str, table: &Table) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\n");
    let curves: Vec<String> = (2..=table.columns.len())
        .filter(|&i| !table.columns[i - 1].ends_with("stderr"))
        .map(|i| {
            let src = if i == 2 { format!("'{file}'") } else { "''".into() };
            format!("{src} using 1:{i} with lines")
        })
        .collect();
    if !curves.is_empty() {
        s.push_str("plot ");
        s.push_str(&curves.join(", "));
        s.push('\n');
    }
    s
}

/// Files written by one command.
#[derive(Debug, Clone)]
pub struct Written {
    pub data: PathBuf,
    pub meta: PathBuf,
}

/// Writes `<stem>_data.csv` and `<stem>_meta.json`. The metadata file is the
/// resolved configuration with a `meta` section, so it can be fed back as
/// `--config`.
pub fn write_outputs(dir: &Path, stem: &str, table: &Table, config: &Config, meta: Map<String, Value>) -> Result<Written> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let data = dir.join(format!("{stem}_data.csv"));
    write_csv(&data, table)?;
    let mut meta = meta;
    let name = format!("{stem}_data.csv");
    meta.insert("data_file".into(), json!(name));
    meta.insert("columns".into(), json!(table.header()));
    meta.insert("failed_rows".into(), json!(table.failures()));
    meta.insert("gnuplot".into(), json!(gnuplot_script(&name, table)));
    let meta_path = dir.join(format!("{stem}_meta.json"));
    write_meta(&meta_path, config, meta)?;
    Ok(Written { data, meta: meta_path })
}

pub fn write_meta(path: &Path, config: &Config, meta: Map<String, Value>) -> Result<()> {
    let mut c = config.clone();
    c.meta = Some(Value::Object(meta));
    let text = serde_json::to_string_pretty(&c)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 9.03] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn reasons_only_when_requested() {
        let mut t = Table::new(["v", "R"]);
        t.push(vec![1.0, 0.5]);
        assert_eq!(t.header(), vec!["v", "R"]);
        let mut t = Table::with_reasons(["v", "R"]);
        t.push(vec![1.0, 0.5]);
        t.push_with_reason(vec![2.0, f64::NAN], "bad".into());
        assert_eq!(t.header(), vec!["v", "R", "reason"]);
        assert_eq!(t.failures(), 1);
    }

    #[test]
    fn gnuplot_skips_error_columns() {
        let t = Table::new(["t", "P2", "P2_stderr", "P2_ref"]);
        let s = gnuplot_script("a.csv", &t);
        assert!(s.contains("'a.csv' using 1:2"));
        assert!(s.contains("'' using 1:4"));
        assert!(!s.contains("1:3"));
    }
}
