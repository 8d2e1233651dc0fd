//! TVB slope limiter (`ΛΠ_h`), optionally in characteristic variables.

use crate::dg::neighbor_means;
use crate::error::Result;
use crate::flux::{euler_char_transform, CharTransform, Model};
use crate::mesh::{MeshPartition, Segment};
use crate::state::{SolutionState, Vars, MAX_VARS};

pub fn minmod(args: &[f64]) -> f64 {
    let Some(&first) = args.first() else {
        return 0.0;
    };
    let s = first.signum();
    if first == 0.0 || args.iter().any(|a| a.signum() != s || *a == 0.0) {
        return 0.0;
    }
    s * args.iter().fold(f64::INFINITY, |m, a| m.min(a.abs()))
}

/// TVB-corrected minmod: `a1` is returned untouched when `|a1| <= cm h^2`.
pub fn modified_minmod(a1: f64, a2: f64, a3: f64, cm: f64, h: f64) -> f64 {
    if a1.abs() <= cm * h * h {
        a1
    } else {
        minmod(&[a1, a2, a3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterConfig {
    pub enabled: bool,
    /// TVB constant `M`; zero gives the plain TVD minmod limiter.
    pub cm: f64,
    /// Limit Euler solutions in local characteristic variables.
    pub characteristic: bool,
}

impl Default for LimiterConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            cm: 0.0,
            characteristic: true,
        }
    }
}

impl LimiterConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn tvb(cm: f64) -> Self {
        Self {
            cm,
            ..Self::default()
        }
    }
}

/// Limit one scalar component given its Legendre coefficients. Returns
/// whether anything changed; an unchanged cell is left bitwise intact.
pub fn limit_scalar(c: &mut [f64], left_mean: f64, right_mean: f64, cm: f64, h: f64) -> bool {
    let k = c.len() - 1;
    if k == 0 {
        return false;
    }
    let mean = c[0];
    let dp = right_mean - mean;
    let dm = mean - left_mean;
    let right_dev: f64 = c[1..].iter().sum();
    let left_dev: f64 = c[1..]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { *v } else { -*v })
        .sum();
    let r = modified_minmod(right_dev, dp, dm, cm, h);
    let l = modified_minmod(left_dev, dp, dm, cm, h);
    if r == right_dev && l == left_dev {
        return false;
    }
    let slope = modified_minmod(c[1], dp, dm, cm, h);
    let changed = slope != c[1] || c[2..].iter().any(|v| *v != 0.0);
    c[1] = slope;
    for v in c[2..].iter_mut() {
        *v = 0.0;
    }
    changed
}

fn transform_for(model: &Model, mean: &Vars, cfg: &LimiterConfig) -> Result<Option<CharTransform>> {
    match model {
        Model::Euler { gamma } if cfg.characteristic => Ok(Some(euler_char_transform(mean, *gamma)?)),
        _ => Ok(None),
    }
}

/// Limit a single cell (all components) against the given neighbour means.
pub fn limit_cell(
    cell: &mut [f64],
    nvar: usize,
    model: &Model,
    left_mean: &Vars,
    right_mean: &Vars,
    h: f64,
    cfg: &LimiterConfig,
) -> Result<bool> {
    if !cfg.enabled {
        return Ok(false);
    }
    let ncoef = cell.len() / nvar;
    if ncoef < 2 {
        return Ok(false);
    }
    let mut mean = [0.0; MAX_VARS];
    for v in 0..nvar {
        mean[v] = cell[v * ncoef];
    }
    let Some(t) = transform_for(model, &mean, cfg)? else {
        let mut changed = false;
        for v in 0..nvar {
            let c = &mut cell[v * ncoef..(v + 1) * ncoef];
            changed |= limit_scalar(c, left_mean[v], right_mean[v], cfg.cm, h);
        }
        return Ok(changed);
    };

    let mut w = [[0.0; 4]; MAX_VARS];
    for l in 0..ncoef {
        let mut u = [0.0; MAX_VARS];
        for v in 0..nvar {
            u[v] = cell[v * ncoef + l];
        }
        let wl = t.to_char(&u);
        for v in 0..nvar {
            w[v][l] = wl[v];
        }
    }
    let wl_mean = t.to_char(left_mean);
    let wr_mean = t.to_char(right_mean);
    let mut changed = false;
    for v in 0..nvar {
        changed |= limit_scalar(&mut w[v][..ncoef], wl_mean[v], wr_mean[v], cfg.cm, h);
    }
    if !changed {
        return Ok(false);
    }
    // The mean is restored exactly rather than round-tripped.
    for l in 1..ncoef {
        let mut wl = [0.0; MAX_VARS];
        for v in 0..nvar {
            wl[v] = w[v][l];
        }
        let u = t.from_char(&wl);
        for v in 0..nvar {
            cell[v * ncoef + l] = u[v];
        }
    }
    Ok(true)
}

/// Neighbour means to use at the two ends of a segment instead of those read
/// from the state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanOverrides {
    pub left: Option<Vars>,
    pub right: Option<Vars>,
}

/// Apply the limiter to every cell of `seg` in place. Limiting leaves means
/// unchanged, so the sweep order does not matter.
pub fn apply_limiter(
    state: &mut SolutionState,
    mesh: &MeshPartition,
    model: &Model,
    cfg: &LimiterConfig,
    seg: Segment,
    overrides: MeanOverrides,
) -> Result<()> {
    if !cfg.enabled || state.degree() == 0 {
        return Ok(());
    }
    let n = mesh.ncells();
    let nvar = state.nvar();
    for i in 0..seg.len {
        let j = seg.cell(i, n);
        let (mut lm, mut rm) = neighbor_means(state, mesh, model, j);
        if i == 0 {
            if let Some(m) = overrides.left {
                lm = m;
            }
        }
        if i + 1 == seg.len {
            if let Some(m) = overrides.right {
                rm = m;
            }
        }
        let h = mesh.size(j);
        limit_cell(state.cell_mut(j), nvar, model, &lm, &rm, h, cfg).map_err(|e| e.in_cell(j))?;
    }
    Ok(())
}

/// Which cell trace a limited trace value stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSide {
    /// `u^-` at the right edge.
    Right,
    /// `u^+` at the left edge.
    Left,
}

/// Limit a trace value of a cell with mean `mean` against its neighbour means:
/// `u^- = mean + m(u^- - mean, dp, dm)` or `u^+ = mean - m(mean - u^+, dp, dm)`.
pub fn limit_trace(
    side: TraceSide,
    trace: &Vars,
    mean: &Vars,
    left_mean: &Vars,
    right_mean: &Vars,
    nvar: usize,
    model: &Model,
    h: f64,
    cfg: &LimiterConfig,
) -> Result<Vars> {
    if !cfg.enabled {
        return Ok(*trace);
    }
    let t = transform_for(model, mean, cfg)?;
    let map = |u: &Vars| t.as_ref().map_or(*u, |t| t.to_char(u));
    let (tr, m, lm, rm) = (map(trace), map(mean), map(left_mean), map(right_mean));
    let mut out = tr;
    let mut changed = false;
    for v in 0..nvar {
        let dp = rm[v] - m[v];
        let dm = m[v] - lm[v];
        out[v] = match side {
            TraceSide::Right => {
                let dev = tr[v] - m[v];
                let lim = modified_minmod(dev, dp, dm, cfg.cm, h);
                if lim == dev {
                    tr[v]
                } else {
                    changed = true;
                    m[v] + lim
                }
            }
            TraceSide::Left => {
                let dev = m[v] - tr[v];
                let lim = modified_minmod(dev, dp, dm, cfg.cm, h);
                if lim == dev {
                    tr[v]
                } else {
                    changed = true;
                    m[v] - lim
                }
            }
        };
    }
    if !changed {
        return Ok(*trace);
    }
    Ok(t.map_or(out, |t| t.from_char(&out)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Boundaries;
    use proptest::prelude::*;

    #[test]
    fn minmod_cases() {
        assert_eq!(minmod(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(minmod(&[-3.0, -0.5, -2.0]), -0.5);
        assert_eq!(minmod(&[1.0, -2.0, 3.0]), 0.0);
        assert_eq!(minmod(&[0.0, 1.0, 1.0]), 0.0);
    }

    #[test]
    fn tvb_threshold_keeps_small_slopes() {
        // |a1| = 0.01 <= 20 * 0.1^2 = 0.2
        assert_eq!(modified_minmod(0.01, -1.0, 1.0, 20.0, 0.1), 0.01);
        assert_eq!(modified_minmod(0.5, -1.0, 1.0, 20.0, 0.1), 0.0);
        assert_eq!(modified_minmod(0.5, 0.2, 0.3, 0.0, 0.1), 0.2);
    }

    #[test]
    fn linear_cell_at_extremum_is_flattened() {
        let mut c = [1.0, 0.4];
        assert!(limit_scalar(&mut c, 0.0, 0.0, 0.0, 0.1));
        assert_eq!(c, [1.0, 0.0]);
    }

    #[test]
    fn monotone_smooth_cell_untouched() {
        let mut c = [1.0, 0.4, 0.05];
        assert!(!limit_scalar(&mut c, 0.0, 2.0, 0.0, 0.1));
        assert_eq!(c, [1.0, 0.4, 0.05]);
    }

    #[test]
    fn quadratic_falls_back_to_linear() {
        let mut c = [1.0, 0.4, 0.3];
        assert!(limit_scalar(&mut c, 0.8, 1.2, 0.0, 0.1));
        assert_eq!(c[0], 1.0);
        assert!((c[1] - 0.2).abs() < 1e-15);
        assert_eq!(c[2], 0.0);
    }

    #[test]
    fn trace_limiting_orientation() {
        let m = Model::Advection { speed: 1.0 };
        let cfg = LimiterConfig::tvb(0.0);
        let r = limit_trace(TraceSide::Right, &[2.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.9, 0.0, 0.0], &[1.3, 0.0, 0.0], 1, &m, 0.1, &cfg).unwrap();
        assert!((r[0] - 1.1).abs() < 1e-15);
        let l = limit_trace(TraceSide::Left, &[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.9, 0.0, 0.0], &[1.3, 0.0, 0.0], 1, &m, 0.1, &cfg).unwrap();
        assert!((l[0] - 0.9).abs() < 1e-15);
        let same = limit_trace(TraceSide::Right, &[1.05, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.9, 0.0, 0.0], &[1.3, 0.0, 0.0], 1, &m, 0.1, &cfg).unwrap();
        assert_eq!(same[0], 1.05);
    }

    #[test]
    fn euler_characteristic_limiting_preserves_means() {
        let mesh = MeshPartition::uniform(0.0, 1.0, 3, Boundaries::uniform(crate::mesh::BoundaryKind::Outflow)).unwrap();
        let model = Model::Euler { gamma: 1.4 };
        let mut s = SolutionState::zeros(3, 3, 1);
        let means = [[1.0, 0.0, 2.5], [0.6, 0.1, 1.6], [0.125, 0.0, 0.25]];
        for (j, m) in means.iter().enumerate() {
            for v in 0..3 {
                s.set_coeff(j, v, 0, m[v]);
                s.set_coeff(j, v, 1, if j == 1 { 0.3 * m[v] } else { 0.0 });
            }
        }
        let before: Vec<_> = (0..3).map(|j| s.mean(j)).collect();
        apply_limiter(&mut s, &mesh, &model, &LimiterConfig::tvb(0.0), mesh.all_cells(), MeanOverrides::default()).unwrap();
        for j in 0..3 {
            assert_eq!(s.mean(j), before[j]);
        }
    }

    proptest! {
        #[test]
        fn limiter_preserves_means_and_is_idempotent(
            coeffs in prop::collection::vec(-2.0f64..2.0, 4 * 8),
            cm in prop_oneof![Just(0.0), 0.0f64..50.0],
        ) {
            let mesh = MeshPartition::uniform(-1.0, 1.0, 8, Boundaries::periodic()).unwrap();
            let model = Model::Burgers;
            let cfg = LimiterConfig::tvb(cm);
            let mut s = SolutionState::zeros(8, 1, 3);
            s.as_mut_slice().copy_from_slice(&coeffs);
            let means: Vec<_> = (0..8).map(|j| s.mean(j)).collect();
            apply_limiter(&mut s, &mesh, &model, &cfg, mesh.all_cells(), MeanOverrides::default()).unwrap();
            for j in 0..8 {
                prop_assert_eq!(s.mean(j), means[j]);
            }
            let once = s.clone();
            apply_limiter(&mut s, &mesh, &model, &cfg, mesh.all_cells(), MeanOverrides::default()).unwrap();
            prop_assert_eq!(once.as_slice(), s.as_slice());
        }

        #[test]
        fn minmod_bounded_by_arguments(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
            let m = minmod(&[a, b, c]);
            prop_assert!(m.abs() <= a.abs().min(b.abs()).min(c.abs()));
            prop_assert!(m == 0.0 || (m.signum() == a.signum() && m.signum() == b.signum()));
        }
    }
}
