//! Deterministic CSV/JSON emission.
//!
//! All floating-point values in CSV output go through [`fmt_f64`], which
//! prints 17 significant digits in scientific notation, so identical
//! configurations produce byte-identical files.  JSON mirrors the CSV data
//! with a metadata header (version and the echoed configuration).

use serde::Serialize;

/// Fixed 17-significant-digit scientific rendering.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Optional value: empty CSV field when absent.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// A rectangular CSV table with a fixed header.
pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: Vec<&'static str>) -> Self {
        CsvTable {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// JSON mirror: {"version", "config", "columns", "data"}.
    pub fn render_json<C: Serialize>(&self, config: &C) -> String {
        let data: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| serde_json::Value::Array(row.iter().map(|v| v.clone().into()).collect()))
            .collect();
        let doc = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "columns": self.header,
            "data": data,
        });
        let mut rendered = serde_json::to_string_pretty(&doc).expect("serializable");
        rendered.push('\n');
        rendered
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(-20.0), "-2.0000000000000000e1");
        assert_eq!(fmt_opt(None), "");
    }

    #[test]
    fn csv_round_trip_shape() {
        let mut t = CsvTable::new(vec!["a", "b"]);
        t.push(vec!["1".into(), fmt_f64(0.5)]);
        let text = t.render();
        assert_eq!(text, "a,b\n1,5.0000000000000000e-1\n");
        let json = t.render_json(&serde_json::json!({"k": 2}));
        assert!(json.contains("\"columns\""));
        assert!(json.ends_with('\n'));
    }
}
