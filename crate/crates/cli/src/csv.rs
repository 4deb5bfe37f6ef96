//! Plain CSV tables with a commented provenance header.

use std::fmt::Write;

/// Fixed scientific notation with 17 significant digits; `-0` prints as `0`.
pub fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

/// Empty field for a missing value.
pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            header: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    /// Append comment lines; each line of `text` gets a `# ` prefix.
    pub fn comment(&mut self, text: &str) {
        self.header.extend(text.lines().map(|l| if l.is_empty() { "#".into() } else { format!("# {l}") }));
    }

    pub fn row(&mut self, fields: Vec<String>) {
        assert_eq!(fields.len(), self.columns.len(), "row width");
        self.rows.push(fields);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            writeln!(out, "{h}").unwrap();
        }
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for r in &self.rows {
            writeln!(out, "{}", r.join(",")).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(num(5.0), "5.0000000000000000e0");
        assert_eq!(num(-0.0), num(0.0));
        assert_eq!(num(-1.25e-3), "-1.2500000000000000e-3");
        assert_eq!(opt(None), "");
        let mut t = Table::new(vec!["a", "b"]);
        t.comment("x = 1\n\ny");
        t.row(vec![num(1.0), opt(None)]);
        assert_eq!(t.render(), "# x = 1\n#\n# y\na,b\n1.0000000000000000e0,\n");
    }
}
