use crate::error::{Error, Result};

/// `n × d` matrix of observations, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("dataset dimension must be at least 1"));
        }
        if values.len() != n * d {
            return Err(Error::domain(format!(
                "expected {} values for a {n} x {d} dataset, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "non-finite value at row {}, column {}",
                pos / d + 1,
                pos % d + 1
            )));
        }
        Ok(Self { n, d, values })
    }

    pub fn from_column(xs: &[f64]) -> Result<Self> {
        Self::new(xs.len(), 1, xs.to_vec())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(1, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::domain("rows have different lengths"));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Rows reordered so that row `i` of the result is row `order[i]` here.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let values = order.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Self {
            n: order.len(),
            d: self.d,
            values,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
