//! SSP Runge-Kutta schemes in Shu-Osher form and the global time stepper.

use crate::dg::{compute_lh, max_wave_speed, Discretization, EdgeOverrides};
use crate::error::{Error, Result};
use crate::limiter::{apply_limiter, LimiterConfig, MeanOverrides};
use crate::mesh::MeshPartition;
use crate::state::{ResidualState, SolutionState};

/// `U^(i) = sum_nu alpha[i][nu] U^(nu) + beta[i][nu] dt L(U^(nu))` for
/// `i = 1..=s`; row `i - 1` of `alpha`/`beta` holds stage `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RkScheme {
    pub stages: usize,
    pub order: usize,
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub ssp_coeff: f64,
}

const RK54_ALPHA: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [0.261216512493821, 0.738783487506179, 0.0, 0.0, 0.0],
    [0.623613752757655, 0.0, 0.376386247242345, 0.0, 0.0],
    [0.444745181201454, 0.120932584902288, 0.0, 0.434322233896258, 0.0],
    [0.213357715199957, 0.209928473023448, 0.063353148180384, 0.0, 0.513360663596212],
];

const RK54_BETA: [[f64; 5]; 5] = [
    [0.605491839566400, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.447327372891397, 0.0, 0.0, 0.0],
    [0.000000844149769, 0.0, 0.227898801230261, 0.0, 0.0],
    [0.002856233144485, 0.073223693296006, 0.0, 0.262978568366434, 0.0],
    [0.002362549760441, 0.127109977308333, 0.038359814234063, 0.0, 0.310835692561898],
];

fn rows<const N: usize>(table: &[[f64; N]; N]) -> Vec<Vec<f64>> {
    table.iter().enumerate().map(|(i, r)| r[..=i].to_vec()).collect()
}

pub fn scheme_coeffs(stages: usize, order: usize) -> Result<RkScheme> {
    let (alpha, beta, ssp_coeff) = match (stages, order) {
        (2, 2) => (
            vec![vec![1.0], vec![0.5, 0.5]],
            vec![vec![1.0], vec![0.0, 0.5]],
            1.0,
        ),
        (3, 3) => (
            vec![vec![1.0], vec![0.75, 0.25], vec![1.0 / 3.0, 0.0, 2.0 / 3.0]],
            vec![vec![1.0], vec![0.0, 0.25], vec![0.0, 0.0, 2.0 / 3.0]],
            1.0,
        ),
        (5, 4) => (rows(&RK54_ALPHA), rows(&RK54_BETA), 1.652),
        _ => {
            return Err(Error::Unsupported(format!(
                "SSP-RK({stages},{order}); expected (2,2), (3,3) or (5,4)"
            )))
        }
    };
    Ok(RkScheme {
        stages,
        order,
        alpha,
        beta,
        ssp_coeff,
    })
}

impl RkScheme {
    /// Scheme of order `k + 1` for polynomial degree `k`. Degree 0 uses (2,2)
    /// since no first-order scheme is offered.
    pub fn for_degree(k: usize) -> Result<Self> {
        match k {
            0 | 1 => scheme_coeffs(2, 2),
            2 => scheme_coeffs(3, 3),
            3 => scheme_coeffs(5, 4),
            _ => Err(Error::Unsupported(format!("no SSP-RK scheme paired with degree {k}"))),
        }
    }

    pub fn for_order(order: usize) -> Result<Self> {
        match order {
            2 => scheme_coeffs(2, 2),
            3 => scheme_coeffs(3, 3),
            4 => scheme_coeffs(5, 4),
            _ => Err(Error::Unsupported(format!("SSP-RK of order {order}"))),
        }
    }

    /// Minimum of `alpha / beta` over nonzero `beta`, computed from the table.
    pub fn computed_ssp_coeff(&self) -> f64 {
        let mut c = f64::INFINITY;
        for (ar, br) in self.alpha.iter().zip(&self.beta) {
            for (a, b) in ar.iter().zip(br) {
                if *b != 0.0 {
                    c = c.min(a / b);
                }
            }
        }
        c
    }

    /// Coefficients (ascending powers of `z = lambda dt`) of the factor the
    /// scheme applies to `u' = lambda u` over one step.
    pub fn amplification_polynomial(&self) -> Vec<f64> {
        let mut stages: Vec<Vec<f64>> = vec![vec![1.0]];
        for i in 0..self.stages {
            let mut p = vec![0.0; i + 2];
            for (nu, prev) in stages.iter().enumerate() {
                let (a, b) = (self.alpha[i][nu], self.beta[i][nu]);
                for (d, c) in prev.iter().enumerate() {
                    p[d] += a * c;
                    p[d + 1] += b * c;
                }
            }
            stages.push(p);
        }
        stages.pop().unwrap_or_default()
    }

    /// Stable time step `cfl * C / (2k + 1) * dx / max_speed`.
    pub fn cfl_dt(&self, degree: usize, dx: f64, max_speed: f64, cfl: f64) -> f64 {
        cfl * self.ssp_coeff / (2 * degree + 1) as f64 * dx / max_speed
    }
}

/// Accumulate stage `i` over the given cells of `out` in a fixed order.
pub fn combine_stage(
    scheme: &RkScheme,
    i: usize,
    dt: f64,
    stages: &[SolutionState],
    residuals: &[ResidualState],
    cells: impl Iterator<Item = usize>,
    out: &mut SolutionState,
) {
    let row_a = &scheme.alpha[i - 1];
    let row_b = &scheme.beta[i - 1];
    for j in cells {
        let dst = out.cell_mut(j);
        dst.iter_mut().for_each(|x| *x = 0.0);
        for nu in 0..i {
            let (a, b) = (row_a[nu], row_b[nu]);
            let u = stages[nu].cell(j);
            let r = residuals[nu].cell(j);
            for ((d, uu), rr) in dst.iter_mut().zip(u).zip(r) {
                *d += a * uu + b * dt * rr;
            }
        }
    }
}

/// One limited SSP-RK step of the whole mesh with a given Lax-Friedrichs
/// dissipation speed.
pub fn gts_step_with_alpha(
    state: &SolutionState,
    dt: f64,
    scheme: &RkScheme,
    disc: &Discretization,
    limiter: &LimiterConfig,
    mesh: &MeshPartition,
    alpha: f64,
) -> Result<SolutionState> {
    let all = mesh.all_cells();
    let n = mesh.ncells();
    let mut stages = vec![state.clone()];
    let mut residuals = Vec::with_capacity(scheme.stages);
    for i in 1..=scheme.stages {
        residuals.push(compute_lh(disc, mesh, &stages[i - 1], all, EdgeOverrides::default(), alpha)?);
        let mut next = state.zeros_like();
        combine_stage(scheme, i, dt, &stages, &residuals, 0..n, &mut next);
        apply_limiter(&mut next, mesh, &disc.model, limiter, all, MeanOverrides::default())?;
        stages.push(next);
    }
    let mut out = stages.pop().unwrap_or_else(|| state.clone());
    out.time = state.time + dt;
    Ok(out)
}

/// One limited SSP-RK step of the whole mesh.
pub fn gts_step(
    state: &SolutionState,
    dt: f64,
    scheme: &RkScheme,
    disc: &Discretization,
    limiter: &LimiterConfig,
    mesh: &MeshPartition,
) -> Result<SolutionState> {
    let alpha = max_wave_speed(disc, state)?;
    gts_step_with_alpha(state, dt, scheme, disc, limiter, mesh, alpha)
}
