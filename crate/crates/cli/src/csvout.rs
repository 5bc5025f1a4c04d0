//! CSV emission with the run configuration echoed as `#` header lines, so
//! every output file carries its own provenance.

use std::io::Write;

use crate::error::CliError;

pub struct CsvDoc {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvDoc {
    pub fn new(subcommand: &str, columns: &[&str]) -> Self {
        Self {
            meta: vec![("command".to_string(), subcommand.to_string())],
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Write to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&str>) -> Result<(), CliError> {
        let text = self.render();
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .map_err(|e| CliError::io("<stdout>", e))
            }
        }
    }
}

/// Float cell formatting: plain decimal in a readable range, scientific
/// outside it. Both forms round-trip.
pub fn fmt(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Cell for an optional value; absent values are empty fields.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_header_and_rows() {
        let mut doc = CsvDoc::new("demo", &["a", "b"]);
        doc.meta("seed", 7);
        doc.row(vec![fmt(1.5), fmt_opt(None)]);
        let text = doc.render();
        assert_eq!(text, "# command=demo\n# seed=7\na,b\n1.5,\n");
    }
}
