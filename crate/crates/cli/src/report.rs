//! Tabular results and their text, CSV and JSON renderings.

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self, precision: usize) -> String {
        match self {
            Cell::Num(x) => sig(*x, precision),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => "-".into(),
        }
    }
}

/// One object of the JSON array.
#[derive(Debug, Clone, Default, Serialize)]
pub struct JsonRow {
    #[serde(rename = "E")]
    pub energy: f64,
    pub n: u32,
    pub l_exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    pub alpha_unren: Option<f64>,
    pub alpha_pms: Option<f64>,
    pub alpha_fc: Option<f64>,
    pub m1: Value,
    pub m2: Value,
    pub residuals: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub json: Vec<JsonRow>,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Report {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Report::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>, json: JsonRow) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
        self.json.push(json);
    }

    pub fn render(&self, format: Format, precision: usize) -> String {
        match format {
            Format::Table => self.table(precision),
            Format::Csv => self.csv(precision),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("rows serialize");
                s.push('\n');
                s
            }
        }
    }

    fn cells(&self, precision: usize) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|c| c.render(precision)).collect())
            .collect()
    }

    fn table(&self, precision: usize) -> String {
        let body = self.cells(precision);
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|j| {
                body.iter()
                    .map(|r| r[j].chars().count())
                    .chain([self.columns[j].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let mut line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            out.push_str(&padded.join("  "));
            out.push('\n');
        };
        line(&self.columns);
        for row in &body {
            line(row);
        }
        out
    }

    fn csv(&self, precision: usize) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in self.cells(precision) {
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

/// `x` to `p` significant digits; fixed notation for moderate magnitudes.
pub fn sig(x: f64, p: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", p - 1, x);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..15).contains(&exp) {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(0.00622349, 6), "0.00622349");
        assert_eq!(sig(1.0015234567, 6), "1.00152");
        assert_eq!(sig(9.9999996, 6), "10.0000");
        assert_eq!(sig(-1234567.0, 3), "-1234567");
        assert_eq!(sig(1.5e-9, 3), "1.50e-9");
        assert_eq!(sig(0.0, 6), "0");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut r = Report::new(&["a", "b"]);
        r.push(vec![Cell::Text("x,y".into()), Cell::Num(0.5)], JsonRow::default());
        assert_eq!(r.render(Format::Csv, 3), "a,b\n\"x,y\",0.500\n");
    }
}
