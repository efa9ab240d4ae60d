use std::fmt::Write as _;

/// Scientific notation with `precision` significant digits.
pub fn num(x: f64, precision: usize) -> String {
    format!("{:.*e}", precision.saturating_sub(1), x)
}

/// CSV table with a schema line, a header and numeric rows.
pub struct Table {
    schema: String,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    precision: usize,
}

impl Table {
    pub fn new(schema: &str, header: &[&'static str], precision: usize) -> Self {
        Self {
            schema: schema.to_string(),
            header: header.to_vec(),
            rows: Vec::new(),
            precision,
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.header.len());
        self.rows.push(values.iter().map(|v| num(*v, self.precision)).collect());
    }

    /// Row with pre-rendered cells, for text columns.
    pub fn raw_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn num(&self, x: f64) -> String {
        num(x, self.precision)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.schema);
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1, 17), "1.0000000000000001e-1");
        assert_eq!(num(-2.0, 3), "-2.00e0");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new("density/v1", &["lambda", "density"], 17);
        t.row(&[1.0, 0.5]);
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# density/v1");
        assert_eq!(lines[1], "lambda,density");
        assert_eq!(lines[2].split(',').count(), 2);
    }
}
