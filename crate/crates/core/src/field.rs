//! Per-cell conserved-variable averages.

/// Dense storage of m components per cell, row-major by cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    m: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(n_cells: usize, m: usize) -> Self {
        assert!(m >= 1);
        Field {
            m,
            data: vec![0.0; n_cells * m],
        }
    }

    pub fn from_data(m: usize, data: Vec<f64>) -> Self {
        assert!(m >= 1 && data.len() % m == 0);
        Field { m, data }
    }

    pub fn n_cells(&self) -> usize {
        self.data.len() / self.m
    }

    pub fn n_components(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, cell: usize, comp: usize) -> f64 {
        self.data[cell * self.m + comp]
    }

    #[inline]
    pub fn set(&mut self, cell: usize, comp: usize, value: f64) {
        self.data[cell * self.m + comp] = value;
    }

    #[inline]
    pub fn cell(&self, cell: usize) -> &[f64] {
        &self.data[cell * self.m..(cell + 1) * self.m]
    }

    pub fn cell_mut(&mut self, cell: usize) -> &mut [f64] {
        &mut self.data[cell * self.m..(cell + 1) * self.m]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Scalar view of a one-component field.
    pub fn scalar(&self, cell: usize) -> f64 {
        debug_assert_eq!(self.m, 1);
        self.data[cell]
    }

    /// self + dt * rhs, componentwise.
    pub fn axpy(&self, dt: f64, rhs: &Field) -> Field {
        debug_assert_eq!(self.data.len(), rhs.data.len());
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(u, r)| u + dt * r)
            .collect();
        Field { m: self.m, data }
    }

    /// a*self + b*other, componentwise.
    pub fn lin_comb(&self, a: f64, b: f64, other: &Field) -> Field {
        debug_assert_eq!(self.data.len(), other.data.len());
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(u, v)| a * u + b * v)
            .collect();
        Field { m: self.m, data }
    }

    /// Sum over cells of h_j * U_j per component (the conserved totals).
    pub fn totals(&self, widths: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (j, &h) in widths.iter().enumerate() {
            for c in 0..self.m {
                out[c] += h * self.get(j, c);
            }
        }
        out
    }
}
