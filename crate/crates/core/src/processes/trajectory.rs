use std::fmt::Write as _;

use serde::Serialize;

/// Per-step state record of one simulated path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub columns: Vec<String>,
    pub steps: Vec<u64>,
    pub values: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn new(columns: Vec<String>) -> Self {
        TrajectoryRecord {
            columns,
            steps: Vec::new(),
            values: Vec::new(),
            norms: Vec::new(),
        }
    }

    pub fn push(&mut self, step: u64, values: Vec<f64>, norm: f64) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.steps.push(step);
        self.values.push(values);
        self.norms.push(norm);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Values of one named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.values.iter().map(|row| row[k]).collect())
    }

    /// CSV with header `n,<columns>,norm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push('n');
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push_str(",norm\n");
        for ((n, row), norm) in self.steps.iter().zip(&self.values).zip(&self.norms) {
            write!(out, "{n}").unwrap();
            for v in row {
                write!(out, ",{v}").unwrap();
            }
            writeln!(out, ",{norm}").unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = TrajectoryRecord::new(vec!["x1".into(), "m1".into()]);
        t.push(0, vec![1.0, 1.0], 1.0);
        t.push(1, vec![1.5, f64::INFINITY], 1.5);
        assert_eq!(t.to_csv(), "n,x1,m1,norm\n0,1,1,1\n1,1.5,inf,1.5\n");
        assert_eq!(t.column("m1").unwrap()[1], f64::INFINITY);
    }
}
