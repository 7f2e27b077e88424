//! Comma-separated results tables.

/// A results table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn header(&self) -> &[&'static str] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Appends a row. Cells must not contain separators.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match the header");
        assert!(
            row.iter().all(|c| !c.contains([',', '"', '\n', '\r'])),
            "cell contains a separator: {row:?}"
        );
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip formatting; scientific notation outside
/// `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn int(v: impl Into<u64>) -> String {
    v.into().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), num(0.5)]);
        t.push(vec!["2".into(), num(1e-20)]);
        assert_eq!(t.to_csv(), "a,b\n1,0.5\n2,1e-20\n");
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, -0.0, 1.0, 0.1 + 0.2, -3.5e-9, 6.02e23, 1e-4, 123.456, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits(), "{v}");
        }
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    #[should_panic]
    fn separators_are_refused() {
        Table::new(&["a"]).push(vec!["x,y".into()]);
    }
}
