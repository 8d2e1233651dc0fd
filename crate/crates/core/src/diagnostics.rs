//! Mass, total variation, relative L1 errors and convergence rates.

use crate::basis::{legendre_eval, Quadrature};
use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::flux::{Model, Primitive};
use crate::mesh::{BoundaryKind, MeshPartition};
use crate::state::{cell_value_at, SolutionState, Vars, MAX_VARS};

pub const ERROR_QUADRATURE_POINTS: usize = 5;

/// Integral of `u_h` over the domain, per variable.
pub fn total_mass(state: &SolutionState, mesh: &MeshPartition) -> Vars {
    let mut out = [0.0; MAX_VARS];
    for j in 0..mesh.ncells() {
        let m = state.mean(j);
        for v in 0..state.nvar() {
            out[v] += mesh.size(j) * m[v];
        }
    }
    out
}

/// `sum_j |ubar_{j+1} - ubar_j|`, wrapping around on a periodic mesh. An
/// inflow boundary counts as a ghost cell holding the inflow state, so data
/// entering through it is seen from the start.
pub fn total_variation_means(state: &SolutionState, mesh: &MeshPartition) -> Vars {
    let n = state.ncells();
    let pairs = if mesh.is_periodic() { n } else { n.saturating_sub(1) };
    let mut out = [0.0; MAX_VARS];
    let mut add = |a: &Vars, b: &Vars| {
        for v in 0..state.nvar() {
            out[v] += (b[v] - a[v]).abs();
        }
    };
    for j in 0..pairs {
        add(&state.mean(j), &state.mean((j + 1) % n));
    }
    if n > 0 && !mesh.is_periodic() {
        let b = mesh.boundaries();
        if let BoundaryKind::Inflow(g) = b.left {
            add(&g, &state.mean(0));
        }
        if let BoundaryKind::Inflow(g) = b.right {
            add(&state.mean(n - 1), &g);
        }
    }
    out
}

/// Band of cells left out of an error integral, e.g. around a shock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exclusion {
    pub center: f64,
    pub half_width: f64,
}

impl Exclusion {
    pub fn new(center: f64, half_width: f64) -> Self {
        Self { center, half_width }
    }

    /// True when `[a, b]` meets the open band, counting periodic images.
    pub fn excludes(&self, a: f64, b: f64, period: Option<f64>) -> bool {
        let images: &[f64] = match period {
            Some(_) => &[-1.0, 0.0, 1.0],
            None => &[0.0],
        };
        images.iter().any(|k| {
            let c = self.center + k * period.unwrap_or(0.0);
            b > c - self.half_width && a < c + self.half_width
        })
    }
}

/// Variables in which errors are measured: the solution itself for scalar
/// models, density/velocity/pressure for Euler.
fn error_vars(model: &Model, u: &Vars) -> Result<Vars> {
    match model {
        Model::Euler { gamma } => {
            let p = Primitive::from_conserved(u, *gamma)?;
            Ok([p.density, p.velocity, p.pressure])
        }
        _ => Ok(*u),
    }
}

pub fn l1_rel_error(
    state: &SolutionState,
    mesh: &MeshPartition,
    model: &Model,
    exact: &ExactSolution,
    t: f64,
    exclusion: Option<Exclusion>,
) -> Result<Vars> {
    l1_rel_error_with(state, mesh, model, exact, t, exclusion, ERROR_QUADRATURE_POINTS)
}

/// As [`l1_rel_error`] with a chosen number of Gauss points per cell.
pub fn l1_rel_error_with(
    state: &SolutionState,
    mesh: &MeshPartition,
    model: &Model,
    exact: &ExactSolution,
    t: f64,
    exclusion: Option<Exclusion>,
    points: usize,
) -> Result<Vars> {
    let nvar = state.nvar();
    let k = state.degree();
    let quad = Quadrature::gauss_legendre(points);
    let basis: Vec<Vec<f64>> = quad
        .nodes
        .iter()
        .map(|&xi| (0..=k).map(|l| legendre_eval(l, xi)).collect())
        .collect();
    let (lo, hi) = mesh.domain();
    let period = mesh.is_periodic().then_some(hi - lo);
    let mut num = [0.0; MAX_VARS];
    let mut den = [0.0; MAX_VARS];
    for j in 0..mesh.ncells() {
        let (a, b) = mesh.cell_bounds(j);
        if exclusion.is_some_and(|e| e.excludes(a, b, period)) {
            continue;
        }
        let half = 0.5 * (b - a);
        for (q, (&xi, &w)) in quad.nodes.iter().zip(&quad.weights).enumerate() {
            let x = 0.5 * (a + b) + half * xi;
            let uh = error_vars(model, &cell_value_at(state.cell(j), nvar, k, &basis[q])).map_err(|e| e.in_cell(j))?;
            let ue = error_vars(model, &exact.evaluate(x, t)?)?;
            for v in 0..nvar {
                num[v] += w * half * (uh[v] - ue[v]).abs();
                den[v] += w * half * ue[v].abs();
            }
        }
    }
    let mut out = [0.0; MAX_VARS];
    for v in 0..nvar {
        out[v] = if den[v] > 0.0 { num[v] / den[v] } else { num[v] };
    }
    Ok(out)
}

/// `log2(e_{i-1} / e_i)` for consecutive rows of a halving sequence.
pub fn convergence_rates(rows: &[(f64, f64)]) -> Result<Vec<f64>> {
    if rows.len() < 2 {
        return Err(Error::Config("convergence rates need at least two rows".into()));
    }
    rows.windows(2)
        .map(|w| {
            let ((h0, e0), (h1, e1)) = (w[0], w[1]);
            if ((h0 / h1) - 2.0).abs() > 1e-9 {
                return Err(Error::Config(format!("mesh sizes {h0} -> {h1} do not halve")));
            }
            Ok((e0 / e1).log2())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub time: f64,
    pub rel_l1_error: Option<Vars>,
    pub total_mass: Vars,
    pub tv_of_means: Vars,
    pub nvar: usize,
    pub mesh: String,
    pub scheme: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::project_initial;
    use crate::mesh::Boundaries;
    use std::f64::consts::PI;

    fn periodic(n: usize) -> MeshPartition {
        MeshPartition::uniform(-1.0, 1.0, n, Boundaries::periodic()).unwrap()
    }

    fn means(m: &[f64], periodic_bc: bool) -> (SolutionState, MeshPartition) {
        let b = if periodic_bc {
            Boundaries::periodic()
        } else {
            Boundaries::uniform(crate::mesh::BoundaryKind::Outflow)
        };
        let mesh = MeshPartition::uniform(0.0, m.len() as f64, m.len(), b).unwrap();
        let mut s = SolutionState::zeros(m.len(), 1, 0);
        for (j, &v) in m.iter().enumerate() {
            s.set_coeff(j, 0, 0, v);
        }
        (s, mesh)
    }

    #[test]
    fn mass_examples() {
        let mesh = periodic(10);
        let c = project_initial(|_| [3.0, 0.0, 0.0], &[], &mesh, 1, 2);
        assert!((total_mass(&c, &mesh)[0] - 6.0).abs() < 1e-13);
        let s = project_initial(|x| [(PI * x).sin(), 0.0, 0.0], &[], &mesh, 1, 2);
        assert!(total_mass(&s, &mesh)[0].abs() < 1e-13);
    }

    #[test]
    fn sod_density_mass() {
        let mesh = crate::mesh::build_partition(
            (-4.9, 5.1),
            0.1,
            &[crate::mesh::RegionSpec::new(-4.9, 5.1, 1)],
            Boundaries::uniform(crate::mesh::BoundaryKind::Outflow),
            crate::mesh::Alignment::Strict,
        )
        .unwrap();
        let g = 1.4;
        let l = Primitive::new(1.0, 0.0, 1.0).to_conserved(g);
        let r = Primitive::new(0.125, 0.0, 0.1).to_conserved(g);
        let s = project_initial(|x| if x < 0.0 { l } else { r }, &[0.0], &mesh, 3, 1);
        assert!((total_mass(&s, &mesh)[0] - 5.5375).abs() < 1e-12);
    }

    #[test]
    fn tv_examples() {
        assert_eq!(total_variation_means(&means(&[0.0, 1.0, 0.0], false).0, &means(&[0.0, 1.0, 0.0], false).1)[0], 2.0);
        let (s, m) = means(&[4.0, 4.0, 4.0], true);
        assert_eq!(total_variation_means(&s, &m)[0], 0.0);
        let (s, m) = means(&[2.0, 2.0, -1.0, -1.0], false);
        assert_eq!(total_variation_means(&s, &m)[0], 3.0);
        let (s, m) = means(&[2.0, 2.0, -1.0, -1.0], true);
        assert_eq!(total_variation_means(&s, &m)[0], 6.0);
        let (s, _) = means(&[-1.0, -1.0], false);
        let b = Boundaries {
            left: BoundaryKind::Inflow([2.0, 0.0, 0.0]),
            right: BoundaryKind::Outflow,
        };
        let m = MeshPartition::uniform(0.0, 2.0, 2, b).unwrap();
        assert_eq!(total_variation_means(&s, &m)[0], 3.0);
    }

    #[test]
    fn rates() {
        let r = convergence_rates(&[(0.2, 5.70e-2), (0.1, 1.36e-2)]).unwrap();
        assert!((r[0] - 2.07).abs() < 0.005);
        assert_eq!(convergence_rates(&[(0.2, 1e-3), (0.1, 1e-3)]).unwrap(), vec![0.0]);
        assert!((convergence_rates(&[(0.5, 1.0), (0.25, 1.0 / 16.0)]).unwrap()[0] - 4.0).abs() < 1e-14);
        assert!(convergence_rates(&[(0.2, 1.0), (0.15, 0.5)]).is_err());
        assert!(convergence_rates(&[(0.2, 1.0)]).is_err());
    }

    #[test]
    fn projection_of_polynomial_has_no_error() {
        // The smooth advection oracle at t = 0 is not polynomial, so compare
        // the step solution on cells aligned with its jump.
        let mesh = MeshPartition::uniform(-1.0, 1.0, 8, Boundaries::uniform(crate::mesh::BoundaryKind::Outflow)).unwrap();
        let s = project_initial(|x| [crate::exact::advection_step(x, 0.5), 0.0, 0.0], &[-0.5], &mesh, 1, 2);
        let e = l1_rel_error(&s, &mesh, &Model::Advection { speed: 1.0 }, &ExactSolution::AdvectionStep, 0.5, None).unwrap();
        assert!(e[0] <= 1e-13, "{}", e[0]);
    }

    #[test]
    fn quadrature_refinement_agrees() {
        // Polynomial error of one sign: both rules integrate it exactly.
        let mesh = MeshPartition::uniform(-1.0, 1.0, 10, Boundaries::uniform(crate::mesh::BoundaryKind::Outflow)).unwrap();
        let s = project_initial(|x| [crate::exact::advection_step(x, 0.4) + 0.05 + 0.01 * x * x, 0.0, 0.0], &[-0.6], &mesh, 1, 2);
        let m = Model::Advection { speed: 1.0 };
        let e5 = l1_rel_error_with(&s, &mesh, &m, &ExactSolution::AdvectionStep, 0.4, None, 5).unwrap();
        let e7 = l1_rel_error_with(&s, &mesh, &m, &ExactSolution::AdvectionStep, 0.4, None, 7).unwrap();
        assert!(e5[0] > 0.01);
        assert!((e5[0] - e7[0]).abs() < 1e-10, "{} {}", e5[0], e7[0]);
    }

    #[test]
    fn exclusion_band_wraps() {
        let e = Exclusion::new(-0.95, 0.1);
        assert!(e.excludes(0.9, 1.0, Some(2.0)));
        assert!(!e.excludes(0.9, 1.0, None));
        assert!(!e.excludes(-0.8, -0.7, Some(2.0)));
    }
}
