//! Modal DG coefficient storage.

/// Per-variable values at a point (trace, mean, flux). Scalar models use slot 0.
pub type Vars = [f64; MAX_VARS];

pub const MAX_VARS: usize = 3;

/// Legendre coefficients `u_j^(l)` for every cell and conserved variable.
///
/// Layout is cell-major: for cell `j`, variable `v`, degree `l` the flat
/// index is `(j * nvar + v) * (k + 1) + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    nvar: usize,
    degree: usize,
    coeffs: Vec<f64>,
    pub time: f64,
}

/// Output of the spatial operator; same shape as the state it was computed from.
pub type ResidualState = SolutionState;

impl SolutionState {
    pub fn zeros(ncells: usize, nvar: usize, degree: usize) -> Self {
        assert!(nvar >= 1 && nvar <= MAX_VARS);
        Self {
            nvar,
            degree,
            coeffs: vec![0.0; ncells * nvar * (degree + 1)],
            time: 0.0,
        }
    }

    /// Zero-filled state with the same shape.
    pub fn zeros_like(&self) -> Self {
        Self {
            nvar: self.nvar,
            degree: self.degree,
            coeffs: vec![0.0; self.coeffs.len()],
            time: self.time,
        }
    }

    pub fn nvar(&self) -> usize {
        self.nvar
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ncoef(&self) -> usize {
        self.degree + 1
    }

    pub fn ncells(&self) -> usize {
        self.coeffs.len() / self.cell_stride()
    }

    pub fn cell_stride(&self) -> usize {
        self.nvar * (self.degree + 1)
    }

    pub fn coeff(&self, j: usize, v: usize, l: usize) -> f64 {
        self.coeffs[(j * self.nvar + v) * (self.degree + 1) + l]
    }

    pub fn set_coeff(&mut self, j: usize, v: usize, l: usize, value: f64) {
        let idx = (j * self.nvar + v) * (self.degree + 1) + l;
        self.coeffs[idx] = value;
    }

    pub fn cell(&self, j: usize) -> &[f64] {
        let s = self.cell_stride();
        &self.coeffs[j * s..(j + 1) * s]
    }

    pub fn cell_mut(&mut self, j: usize) -> &mut [f64] {
        let s = self.cell_stride();
        &mut self.coeffs[j * s..(j + 1) * s]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Cell mean (coefficient l = 0) of every variable.
    pub fn mean(&self, j: usize) -> Vars {
        cell_mean(self.cell(j), self.nvar, self.degree)
    }

    /// `u^-_{j+1/2}`: sum of all coefficients.
    pub fn right_trace(&self, j: usize) -> Vars {
        cell_right_trace(self.cell(j), self.nvar, self.degree)
    }

    /// `u^+_{j-1/2}`: alternating sum of coefficients.
    pub fn left_trace(&self, j: usize) -> Vars {
        cell_left_trace(self.cell(j), self.nvar, self.degree)
    }

    /// Both traces of cell `j` as `(u^-_{j+1/2}, u^+_{j-1/2})`.
    pub fn edge_values(&self, j: usize) -> (Vars, Vars) {
        (self.right_trace(j), self.left_trace(j))
    }
}

pub fn cell_mean(cell: &[f64], nvar: usize, degree: usize) -> Vars {
    let mut out = [0.0; MAX_VARS];
    for (v, o) in out.iter_mut().enumerate().take(nvar) {
        *o = cell[v * (degree + 1)];
    }
    out
}

pub fn cell_right_trace(cell: &[f64], nvar: usize, degree: usize) -> Vars {
    let mut out = [0.0; MAX_VARS];
    for (v, o) in out.iter_mut().enumerate().take(nvar) {
        let c = &cell[v * (degree + 1)..(v + 1) * (degree + 1)];
        *o = c.iter().sum();
    }
    out
}

pub fn cell_left_trace(cell: &[f64], nvar: usize, degree: usize) -> Vars {
    let mut out = [0.0; MAX_VARS];
    for (v, o) in out.iter_mut().enumerate().take(nvar) {
        let c = &cell[v * (degree + 1)..(v + 1) * (degree + 1)];
        let mut acc = 0.0;
        for (l, x) in c.iter().enumerate() {
            if l % 2 == 0 {
                acc += x;
            } else {
                acc -= x;
            }
        }
        *o = acc;
    }
    out
}

/// Value of the cell polynomial at reference coordinate `xi`.
pub fn cell_value_at(cell: &[f64], nvar: usize, degree: usize, basis_at_xi: &[f64]) -> Vars {
    let mut out = [0.0; MAX_VARS];
    for (v, o) in out.iter_mut().enumerate().take(nvar) {
        let c = &cell[v * (degree + 1)..(v + 1) * (degree + 1)];
        *o = c.iter().zip(basis_at_xi).map(|(a, b)| a * b).sum();
    }
    out
}
