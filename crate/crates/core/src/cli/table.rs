use serde_json::{json, Map, Value};

/// Named numeric columns of equal length, plus summary values printed after the rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    columns: Vec<(String, Vec<f64>)>,
    footer: Vec<(String, f64)>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) {
        if let Some((_, first)) = self.columns.first() {
            assert_eq!(first.len(), values.len(), "column {name} has the wrong length");
        }
        self.columns.push((name.to_string(), values));
    }

    pub fn push_footer(&mut self, name: &str, value: f64) {
        self.footer.push((name.to_string(), value));
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.1.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.0 == name).map(|c| c.1.as_slice())
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.0.as_str()).collect()
    }

    pub fn footer(&self) -> &[(String, f64)] {
        &self.footer
    }

    /// Header row, one line per row, then `# name,value` footer lines.
    pub fn to_csv(&self) -> String {
        let mut out = self.names().join(",");
        out.push('\n');
        for r in 0..self.rows() {
            let cells: Vec<String> = self.columns.iter().map(|c| format_number(c.1[r])).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for (k, v) in &self.footer {
            out.push_str(&format!("# {k},{}\n", format_number(*v)));
        }
        out
    }

    pub fn to_json(&self, metadata: Value) -> String {
        let mut cols = Map::new();
        for (k, v) in &self.columns {
            cols.insert(k.clone(), Value::Array(v.iter().map(|&x| number(x)).collect()));
        }
        let mut foot = Map::new();
        for (k, v) in &self.footer {
            foot.insert(k.clone(), number(*v));
        }
        let doc = json!({ "metadata": metadata, "columns": cols, "footer": foot });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Shortest round-trip decimal; exponent form outside `[1e-5, 1e16)`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new();
        t.push_column("x", vec![1.0, 2.5]);
        t.push_column("cdf", vec![0.015625, 1e-300]);
        t.push_footer("gap", 0.5);
        assert_eq!(t.to_csv(), "x,cdf\n1,0.015625\n2.5,1e-300\n# gap,0.5\n");
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new();
        t.push_column("pf", vec![0.5]);
        let v: Value = serde_json::from_str(&t.to_json(json!({"seed": 3}))).unwrap();
        assert_eq!(v["columns"]["pf"][0], 0.5);
        assert_eq!(v["metadata"]["seed"], 3);
    }
}
