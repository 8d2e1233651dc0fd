//! Modal DG spatial discretization: initial projection and the operator `L_h`.

use crate::basis::{legendre_derivative, legendre_eval, Quadrature};
use crate::error::{Error, Result};
use crate::flux::{Model, NumericalFlux};
use crate::mesh::{BoundaryKind, MeshPartition, Segment};
use crate::state::{cell_value_at, ResidualState, SolutionState, Vars, MAX_VARS};

pub const MAX_DEGREE: usize = 3;

/// Everything the spatial operator needs besides the mesh and the state.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub model: Model,
    pub degree: usize,
    pub flux: NumericalFlux,
    weights: Vec<f64>,
    basis: Vec<Vec<f64>>,
    dbasis: Vec<Vec<f64>>,
}

impl Discretization {
    pub fn new(model: Model, degree: usize, flux: NumericalFlux) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::Unsupported(format!(
                "polynomial degree {degree} (supported: 0..={MAX_DEGREE})"
            )));
        }
        flux.check_model(&model)?;
        // k + 2 Gauss-Lobatto points: exact through degree 2k + 1, endpoints included.
        let q = Quadrature::gauss_lobatto(degree + 2);
        let basis = q
            .nodes
            .iter()
            .map(|&x| (0..=degree).map(|l| legendre_eval(l, x)).collect())
            .collect();
        let dbasis = q
            .nodes
            .iter()
            .map(|&x| (0..=degree).map(|l| legendre_derivative(l, x)).collect())
            .collect();
        Ok(Self {
            model,
            degree,
            flux,
            weights: q.weights,
            basis,
            dbasis,
        })
    }

    pub fn nvar(&self) -> usize {
        self.model.nvar()
    }

    pub fn zero_state(&self, ncells: usize) -> SolutionState {
        SolutionState::zeros(ncells, self.nvar(), self.degree)
    }

    pub fn numerical_flux(&self, ul: &Vars, ur: &Vars, alpha: f64) -> Result<Vars> {
        self.flux.evaluate(&self.model, ul, ur, alpha)
    }

    /// `L_{h,j}^{(l)}` of one cell given the numerical fluxes on its two edges.
    pub fn cell_residual(
        &self,
        cell: &[f64],
        dx: f64,
        h_left: &Vars,
        h_right: &Vars,
        out: &mut [f64],
    ) -> Result<()> {
        let nvar = self.nvar();
        let ncoef = self.degree + 1;
        let mut vol = [[0.0; MAX_DEGREE + 1]; MAX_VARS];
        for (q, w) in self.weights.iter().enumerate() {
            let u = cell_value_at(cell, nvar, self.degree, &self.basis[q]);
            let f = self.model.physical_flux(&u)?;
            for v in 0..nvar {
                for l in 1..ncoef {
                    vol[v][l] += w * f[v] * self.dbasis[q][l];
                }
            }
        }
        for v in 0..nvar {
            for l in 0..ncoef {
                let jump = if l % 2 == 0 {
                    h_right[v] - h_left[v]
                } else {
                    h_right[v] + h_left[v]
                };
                out[v * ncoef + l] = (2 * l + 1) as f64 / dx * (vol[v][l] - jump);
            }
        }
        Ok(())
    }
}

/// Exterior trace supplied by a physical boundary given the interior one.
pub fn boundary_value(kind: BoundaryKind, model: &Model, interior: &Vars) -> Vars {
    match kind {
        BoundaryKind::Outflow | BoundaryKind::Periodic => *interior,
        BoundaryKind::Reflective => model.reflect(interior),
        BoundaryKind::Inflow(state) => state,
    }
}

/// Exterior trace at the left edge of cell `j`, read from the left neighbour
/// or from the boundary condition.
pub fn exterior_left(state: &SolutionState, mesh: &MeshPartition, model: &Model, j: usize) -> Vars {
    match mesh.left_neighbor(j) {
        Some(nb) => state.right_trace(nb),
        None => boundary_value(mesh.boundaries().left, model, &state.left_trace(j)),
    }
}

pub fn exterior_right(state: &SolutionState, mesh: &MeshPartition, model: &Model, j: usize) -> Vars {
    match mesh.right_neighbor(j) {
        Some(nb) => state.left_trace(nb),
        None => boundary_value(mesh.boundaries().right, model, &state.right_trace(j)),
    }
}

/// Neighbour means of cell `j` with boundary ghosts; used by the limiter.
pub fn neighbor_means(state: &SolutionState, mesh: &MeshPartition, model: &Model, j: usize) -> (Vars, Vars) {
    let mean = state.mean(j);
    let left = match mesh.left_neighbor(j) {
        Some(nb) => state.mean(nb),
        None => boundary_value(mesh.boundaries().left, model, &mean),
    };
    let right = match mesh.right_neighbor(j) {
        Some(nb) => state.mean(nb),
        None => boundary_value(mesh.boundaries().right, model, &mean),
    };
    (left, right)
}

/// Exterior traces to impose at the two ends of a segment instead of the
/// neighbour/boundary values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EdgeOverrides {
    pub left: Option<Vars>,
    pub right: Option<Vars>,
}

/// Numerical fluxes through the two outer edges of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentFluxes {
    pub left: Vars,
    pub right: Vars,
}

/// Evaluate `L_h` on `seg`, writing into the matching cells of `out`.
///
/// Edge fluxes are formed left to right, each once, so the summation order is
/// fixed and neighbouring cells see bitwise identical fluxes.
pub fn residual_segment(
    disc: &Discretization,
    mesh: &MeshPartition,
    state: &SolutionState,
    seg: Segment,
    left_ext: &Vars,
    right_ext: &Vars,
    alpha: f64,
    out: &mut ResidualState,
) -> Result<SegmentFluxes> {
    let n = mesh.ncells();
    let first = seg.first();
    let mut h_left = disc
        .numerical_flux(left_ext, &state.left_trace(first), alpha)
        .map_err(|e| e.in_cell(first))?;
    let left_flux = h_left;
    for i in 0..seg.len {
        let j = seg.cell(i, n);
        let h_right = if i + 1 < seg.len {
            let nb = seg.cell(i + 1, n);
            disc.numerical_flux(&state.right_trace(j), &state.left_trace(nb), alpha)
        } else {
            disc.numerical_flux(&state.right_trace(j), right_ext, alpha)
        }
        .map_err(|e| e.in_cell(j))?;
        disc.cell_residual(state.cell(j), mesh.size(j), &h_left, &h_right, out.cell_mut(j))
            .map_err(|e| e.in_cell(j))?;
        h_left = h_right;
    }
    Ok(SegmentFluxes {
        left: left_flux,
        right: h_left,
    })
}

/// `L_h(U)` restricted to `seg`; cells outside the segment are zero.
pub fn compute_lh(
    disc: &Discretization,
    mesh: &MeshPartition,
    state: &SolutionState,
    seg: Segment,
    overrides: EdgeOverrides,
    alpha: f64,
) -> Result<ResidualState> {
    let mut out = state.zeros_like();
    let (left, right) = segment_exteriors(disc, mesh, state, seg, overrides);
    residual_segment(disc, mesh, state, seg, &left, &right, alpha, &mut out)?;
    Ok(out)
}

/// Default exterior traces of a segment, replaced by any overrides.
pub fn segment_exteriors(
    disc: &Discretization,
    mesh: &MeshPartition,
    state: &SolutionState,
    seg: Segment,
    overrides: EdgeOverrides,
) -> (Vars, Vars) {
    let n = mesh.ncells();
    let whole_ring = mesh.is_periodic() && seg.len == n;
    let left = overrides.left.unwrap_or_else(|| {
        if whole_ring {
            state.right_trace(seg.last(n))
        } else {
            exterior_left(state, mesh, &disc.model, seg.first())
        }
    });
    let right = overrides.right.unwrap_or_else(|| {
        if whole_ring {
            state.left_trace(seg.first())
        } else {
            exterior_right(state, mesh, &disc.model, seg.last(n))
        }
    });
    (left, right)
}

/// Largest wave speed over cell means and edge traces.
pub fn max_wave_speed(disc: &Discretization, state: &SolutionState) -> Result<f64> {
    let mut alpha: f64 = 0.0;
    for j in 0..state.ncells() {
        for u in [state.mean(j), state.left_trace(j), state.right_trace(j)] {
            alpha = alpha.max(disc.model.max_wave_speed(&u).map_err(|e| e.in_cell(j))?);
        }
    }
    Ok(alpha)
}

/// Points of the quadrature used for the initial projection. Must be exact
/// for degree 2k + 2 with k <= 3.
const PROJECTION_POINTS: usize = 8;

/// L2 projection `u_j^(l) = (2l+1)/dx * int u0 phi_l`. The integral is split at
/// any `breakpoints` inside a cell so piecewise-smooth data projects exactly.
pub fn project_initial(
    u0: impl Fn(f64) -> Vars,
    breakpoints: &[f64],
    mesh: &MeshPartition,
    nvar: usize,
    degree: usize,
) -> SolutionState {
    let quad = Quadrature::gauss_legendre(PROJECTION_POINTS);
    let mut state = SolutionState::zeros(mesh.ncells(), nvar, degree);
    for j in 0..mesh.ncells() {
        let (a, b) = mesh.cell_bounds(j);
        let dx = b - a;
        let xc = 0.5 * (a + b);
        let mut pieces = vec![a];
        pieces.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
        pieces.push(b);
        for v in 0..nvar {
            for l in 0..=degree {
                let mut acc = 0.0;
                for w in pieces.windows(2) {
                    acc += quad.integrate(w[0], w[1], |x| {
                        u0(x)[v] * legendre_eval(l, 2.0 * (x - xc) / dx)
                    });
                }
                state.set_coeff(j, v, l, (2 * l + 1) as f64 / dx * acc);
            }
        }
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxKind;
    use crate::mesh::Boundaries;
    use std::f64::consts::PI;

    fn advection(k: usize, kind: FluxKind) -> Discretization {
        Discretization::new(Model::Advection { speed: 1.0 }, k, NumericalFlux::new(kind)).unwrap()
    }

    #[test]
    fn projection_of_constants_and_lines() {
        let mesh = MeshPartition::uniform(0.0, 1.0, 1, Boundaries::periodic()).unwrap();
        let s = project_initial(|x| [x, 0.0, 0.0], &[], &mesh, 1, 1);
        assert!((s.coeff(0, 0, 0) - 0.5).abs() < 1e-15);
        assert!((s.coeff(0, 0, 1) - 0.5).abs() < 1e-15);

        let mesh = MeshPartition::uniform(-1.0, 1.0, 7, Boundaries::periodic()).unwrap();
        let s = project_initial(|_| [2.5, 0.0, 0.0], &[], &mesh, 1, 3);
        for j in 0..7 {
            assert!((s.coeff(j, 0, 0) - 2.5).abs() < 1e-14);
            for l in 1..4 {
                assert!(s.coeff(j, 0, l).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn projection_of_sine_means() {
        let mesh = MeshPartition::uniform(-1.0, 1.0, 10, Boundaries::periodic()).unwrap();
        let s = project_initial(|x| [(PI * x).sin(), 0.0, 0.0], &[], &mesh, 1, 2);
        for j in 0..10 {
            let (a, b) = mesh.cell_bounds(j);
            let exact = ((PI * a).cos() - (PI * b).cos()) / (PI * (b - a));
            assert!((s.coeff(j, 0, 0) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_state_has_zero_residual() {
        let mesh = MeshPartition::uniform(0.0, 1.0, 6, Boundaries::periodic()).unwrap();
        for kind in [FluxKind::LaxFriedrichs, FluxKind::Godunov, FluxKind::EngquistOsher] {
            let disc = Discretization::new(Model::Burgers, 2, NumericalFlux::new(kind)).unwrap();
            let s = project_initial(|_| [0.7, 0.0, 0.0], &[], &mesh, 1, 2);
            let r = compute_lh(&disc, &mesh, &s, mesh.all_cells(), EdgeOverrides::default(), 0.7)
                .unwrap();
            assert!(r.as_slice().iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn piecewise_constant_upwind_equivalence() {
        let mesh = MeshPartition::uniform(0.0, 1.0, 4, Boundaries::periodic()).unwrap();
        let disc = advection(0, FluxKind::Godunov);
        let mut s = disc.zero_state(4);
        let vals = [1.0, 3.0, -2.0, 0.5];
        for (j, v) in vals.iter().enumerate() {
            s.set_coeff(j, 0, 0, *v);
        }
        let r = compute_lh(&disc, &mesh, &s, mesh.all_cells(), EdgeOverrides::default(), 1.0).unwrap();
        for j in 0..4 {
            let upstream = vals[(j + 3) % 4];
            let expected = (upstream - vals[j]) / 0.25;
            assert!((r.coeff(j, 0, 0) - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_single_cell_against_hand_evaluation() {
        // f(u) = u on [0, 0.5], u_h = a + b xi, upwind flux with exterior
        // traces uL (left) and uR (right, unused by upwinding).
        let mesh = MeshPartition::uniform(0.0, 0.5, 1, Boundaries::uniform(BoundaryKind::Outflow))
            .unwrap();
        let disc = advection(1, FluxKind::Godunov);
        let (a, b, ul) = (0.3, -0.8, 1.7);
        let mut s = disc.zero_state(1);
        s.set_coeff(0, 0, 0, a);
        s.set_coeff(0, 0, 1, b);
        let ov = EdgeOverrides {
            left: Some([ul, 0.0, 0.0]),
            right: Some([-5.0, 0.0, 0.0]),
        };
        let r = compute_lh(&disc, &mesh, &s, mesh.all_cells(), ov, 1.0).unwrap();
        // l=0: (1/dx)(0 - (h_R - h_L)) with h_R = a + b, h_L = uL.
        // l=1: (3/dx)(int_{-1}^{1} (a + b xi) dxi - (h_R + h_L)) = (3/dx)(2a - (a + b) - uL).
        let dx = 0.5;
        assert!((r.coeff(0, 0, 0) - (ul - (a + b)) / dx).abs() < 1e-14);
        assert!((r.coeff(0, 0, 1) - 3.0 / dx * (2.0 * a - (a + b) - ul)).abs() < 1e-14);
    }

    #[test]
    fn periodic_mean_updates_telescope() {
        let mesh = MeshPartition::uniform(-1.0, 1.0, 9, Boundaries::periodic()).unwrap();
        let disc = Discretization::new(Model::Burgers, 2, NumericalFlux::lax_friedrichs()).unwrap();
        let s = project_initial(|x| [0.25 + 0.5 * (PI * x).sin(), 0.0, 0.0], &[], &mesh, 1, 2);
        let alpha = max_wave_speed(&disc, &s).unwrap();
        let r = compute_lh(&disc, &mesh, &s, mesh.all_cells(), EdgeOverrides::default(), alpha)
            .unwrap();
        let total: f64 = (0..9).map(|j| mesh.size(j) * r.coeff(j, 0, 0)).sum();
        assert!(total.abs() < 1e-12);
    }

    #[test]
    fn linear_flux_operator_is_linear() {
        let mesh = MeshPartition::uniform(0.0, 1.0, 5, Boundaries::periodic()).unwrap();
        let disc = advection(2, FluxKind::LaxFriedrichs);
        let a = project_initial(|x| [(3.0 * x).sin(), 0.0, 0.0], &[], &mesh, 1, 2);
        let b = project_initial(|x| [x * x - 0.2, 0.0, 0.0], &[], &mesh, 1, 2);
        let mut c = a.clone();
        for (ci, bi) in c.as_mut_slice().iter_mut().zip(b.as_slice()) {
            *ci = 2.0 * *ci - 3.0 * bi;
        }
        let lh = |s: &SolutionState| {
            compute_lh(&disc, &mesh, s, mesh.all_cells(), EdgeOverrides::default(), 1.0).unwrap()
        };
        let (ra, rb, rc) = (lh(&a), lh(&b), lh(&c));
        for i in 0..rc.as_slice().len() {
            let lin = 2.0 * ra.as_slice()[i] - 3.0 * rb.as_slice()[i];
            assert!((rc.as_slice()[i] - lin).abs() < 1e-12);
        }
    }
}
