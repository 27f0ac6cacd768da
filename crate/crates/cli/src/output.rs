//! Deterministic CSV emission.
//!
//! Every file starts with a `#` comment block holding the program version,
//! the command, the seed, and the fully resolved configuration. Floats are
//! written with 17 significant digits so values survive a text round trip.

use std::fmt::Write as _;

use crate::config::RunConfig;

pub const CONFIG_BEGIN: &str = "# config begin";
pub const CONFIG_END: &str = "# config end";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Header comment block plus table.
    pub fn render(&self, command: &str, seed: u64, cfg: &RunConfig, extra: &[(&str, String)]) -> String {
        let mut out = String::new();
        writeln!(out, "# heom {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(out, "# command: {command}").unwrap();
        writeln!(out, "# seed: {seed}").unwrap();
        for (k, v) in extra {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        out.push_str(CONFIG_BEGIN);
        out.push('\n');
        for line in cfg.to_toml_string().lines() {
            if line.is_empty() {
                out.push_str("#\n");
            } else {
                writeln!(out, "# {line}").unwrap();
            }
        }
        out.push_str(CONFIG_END);
        out.push('\n');
        out.push_str(&self.columns.iter().map(|c| quote(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => format_float(*x),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(s) => quote(s),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_float(f64::NAN), "nan");
    }

    #[test]
    fn text_cells_are_quoted_when_needed() {
        assert_eq!(quote("plain"), "plain");
        assert_eq!(quote("a,b"), "\"a,b\"");
        assert_eq!(quote("say \"x\""), "\"say \"\"x\"\"\"");
    }

    #[test]
    fn header_round_trips_the_config() {
        let mut cfg = RunConfig::default();
        cfg.bath.gamma = Some(0.2);
        cfg.bath.delta_sq = Some(0.4);
        cfg.bath.beta = Some(0.32);
        let mut t = CsvTable::new(&["x"]);
        t.push(vec![1.5.into()]);
        let text = t.render("steady", 7, &cfg, &[]);
        assert_eq!(crate::config::config_from_header(&text).unwrap(), cfg);
        assert!(text.ends_with("x\n1.5000000000000000e0\n"));
    }
}
