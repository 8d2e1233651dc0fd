//! Interface predictors: stage values at the fine time levels as linear
//! combinations of the coarse-step stage values of the interface cell.

use crate::error::{Error, Result};
use crate::ssprk::RkScheme;

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorTable {
    pub order: usize,
    pub ratio: usize,
    pub stages: usize,
    weights: Vec<Vec<f64>>,
}

impl PredictorTable {
    /// Weights over `(w^(0), ..., w^(s-1))` for level `p` and stage `i`.
    pub fn weights(&self, p: usize, i: usize) -> &[f64] {
        &self.weights[p * self.stages + i]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.iter().map(Vec::as_slice)
    }

    /// Apply the weights for `(p, i)` to per-stage coefficient vectors.
    pub fn predict(&self, p: usize, i: usize, stage_values: &[&[f64]], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (w, vals) in self.weights(p, i).iter().zip(stage_values) {
            for (o, v) in out.iter_mut().zip(vals.iter()) {
                *o += w * v;
            }
        }
    }
}

/// Predicted coefficients of the interface cell for every `(p, i)`;
/// `stage_cells[nu]` holds the cell coefficients at coarse stage `nu`.
pub fn predict_interface(stage_cells: &[&[f64]], table: &PredictorTable) -> Vec<Vec<Vec<f64>>> {
    let len = stage_cells.first().map_or(0, |c| c.len());
    (0..table.ratio)
        .map(|p| {
            (0..table.stages)
                .map(|i| {
                    let mut out = vec![0.0; len];
                    table.predict(p, i, stage_cells, &mut out);
                    out
                })
                .collect()
        })
        .collect()
}

/// How the SSP-RK(5,4) predictor obtains its weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rk54Predictor {
    /// Match the stage values of a fine step started from the exact
    /// solution through all elementary differentials up to third order.
    #[default]
    OrderConditions,
    /// Taylor expansion with second and third derivatives averaged from the
    /// stage sets (0,1,2,3) and (0,1,3,4). Treats `L(w^(i))` as a function of
    /// the stage time only, which is third-order accurate.
    Averaged,
}

pub fn build_predictor_table(scheme: &RkScheme, ratio: usize) -> Result<PredictorTable> {
    build_predictor_table_with(scheme, ratio, Rk54Predictor::default())
}

pub fn build_predictor_table_with(
    scheme: &RkScheme,
    ratio: usize,
    variant: Rk54Predictor,
) -> Result<PredictorTable> {
    if ratio == 0 {
        return Err(Error::Config("refinement ratio must be at least 1".into()));
    }
    let s = scheme.stages;
    let m = ratio as f64;
    let mut weights = Vec::with_capacity(ratio * s);
    match (s, scheme.order) {
        (2, 2) => {
            for p in 0..ratio {
                let p = p as f64;
                let theta = p / m;
                let eta = (p + 1.0) / m;
                weights.push(vec![1.0 - theta, theta]);
                weights.push(vec![1.0 - eta, eta]);
            }
        }
        (3, 3) => {
            for p in 0..ratio {
                let p = p as f64;
                let m2 = m * m;
                let pairs = [
                    (p / m, p * p / m2),
                    ((p + 1.0) / m, p * (p + 2.0) / m2),
                    ((2.0 * p + 1.0) / (2.0 * m), (2.0 * p * p + 2.0 * p + 1.0) / (2.0 * m2)),
                ];
                for (a, b) in pairs {
                    weights.push(vec![1.0 - a - b, a - b, 2.0 * b]);
                }
            }
        }
        (5, 4) => {
            weights = match variant {
                Rk54Predictor::OrderConditions => order_condition_weights(scheme, ratio, 5)?,
                Rk54Predictor::Averaged => rk54_averaged_weights(scheme, ratio)?,
            }
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "no predictor for SSP-RK({},{})",
                s, scheme.order
            )))
        }
    }
    Ok(PredictorTable {
        order: scheme.order,
        ratio,
        stages: s,
        weights,
    })
}

type Functional = [f64; 5];

fn unit(i: usize) -> Functional {
    let mut f = [0.0; 5];
    f[i] = 1.0;
    f
}

fn axpy(acc: &mut Functional, a: f64, x: &Functional) {
    for (o, v) in acc.iter_mut().zip(x) {
        *o += a * v;
    }
}

fn lin(terms: &[(f64, &Functional)]) -> Functional {
    let mut out = [0.0; 5];
    for (a, x) in terms {
        axpy(&mut out, *a, x);
    }
    out
}

/// Solve `[a11 a12; a21 a22] (X, Y) = (r1, r2)` for functionals `X`, `Y`.
fn solve2(a: [[f64; 2]; 2], r1: &Functional, r2: &Functional) -> Result<(Functional, Functional)> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-12 {
        return Err(Error::Internal("singular predictor system".into()));
    }
    let x = lin(&[(a[1][1] / det, r1), (-a[0][1] / det, r2)]);
    let y = lin(&[(a[0][0] / det, r2), (-a[1][0] / det, r1)]);
    Ok((x, y))
}

/// Expansion of a state about `w^n` in the elementary differentials
/// `[1, dt L, dt^2 L'L, dt^3 L''(L,L), dt^3 L'L'L]`.
type Expansion = [f64; 5];

/// `h L(w)` for `w` with expansion `e`, `h = dt / m`.
fn flux_expansion(e: &Expansion, m: f64) -> Expansion {
    [0.0, 1.0 / m, e[1] / m, e[1] * e[1] / (2.0 * m), e[2] / m]
}

fn stage_expansions(scheme: &RkScheme, start: Expansion, m: f64) -> Vec<Expansion> {
    let mut st = vec![start];
    let mut fl = vec![flux_expansion(&start, m)];
    for i in 1..scheme.stages {
        let mut e = [0.0; 5];
        for nu in 0..i {
            let (a, b) = (scheme.alpha[i - 1][nu], scheme.beta[i - 1][nu]);
            for t in 0..5 {
                e[t] += a * st[nu][t] + b * fl[nu][t];
            }
        }
        fl.push(flux_expansion(&e, m));
        st.push(e);
    }
    st
}

/// Gaussian elimination with partial pivoting on an `n x n` system.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap_or(col);
        if a[piv][col].abs() < 1e-13 {
            return Err(Error::Internal("singular predictor system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Weights over the first `terms` coarse stages reproducing, through the
/// first `terms` elementary differentials, the stages of a fine step of size
/// `dt / ratio` started from the exact solution at `t^n + p dt / ratio`.
pub fn order_condition_weights(scheme: &RkScheme, ratio: usize, terms: usize) -> Result<Vec<Vec<f64>>> {
    let s = scheme.stages;
    if terms > s || terms > 5 {
        return Err(Error::Internal(format!("{terms} order conditions for {s} stages")));
    }
    let coarse = stage_expansions(scheme, [1.0, 0.0, 0.0, 0.0, 0.0], 1.0);
    let matrix: Vec<Vec<f64>> = (0..terms)
        .map(|t| (0..terms).map(|nu| coarse[nu][t]).collect())
        .collect();
    let m = ratio as f64;
    let mut out = Vec::with_capacity(ratio * s);
    for p in 0..ratio {
        let th = p as f64 / m;
        let exact = [1.0, th, th * th / 2.0, th.powi(3) / 6.0, th.powi(3) / 6.0];
        for target in stage_expansions(scheme, exact, m) {
            let mut w = solve_dense(matrix.clone(), target[..terms].to_vec())?;
            w.resize(s, 0.0);
            out.push(w);
        }
    }
    Ok(out)
}

/// Order-4 weights. `D = dt L(w0)`, `X = dt^2 w_tt`, `Y = dt^3 w_ttt` are
/// expressed through the stage values, the latter two as the average of the
/// estimates from stages (0,1,2,3) and (0,1,3,4).
fn rk54_averaged_weights(scheme: &RkScheme, ratio: usize) -> Result<Vec<Vec<f64>>> {
    let a = |i: usize, nu: usize| scheme.alpha[i - 1][nu];
    let b = |i: usize, nu: usize| scheme.beta[i - 1][nu];
    let w: Vec<Functional> = (0..5).map(unit).collect();

    let g1 = b(1, 0);
    let g2 = a(2, 1) * g1 + b(2, 1);
    let g3 = a(3, 2) * g2 + b(3, 2) + b(3, 0);
    let gamma = [0.0, g1, g2, g3];

    let d = lin(&[(1.0 / b(1, 0), &w[1]), (-a(1, 0) / b(1, 0), &w[0])]);
    let big_a = lin(&[(a(2, 0), &w[0]), (a(2, 1), &w[1]), (b(2, 1), &d)]);
    let big_b = lin(&[(a(3, 0), &w[0]), (a(3, 2), &w[2]), (b(3, 0) + b(3, 2), &d)]);

    let r1 = lin(&[(1.0, &w[2]), (-1.0, &big_a)]);
    let r2 = lin(&[(1.0, &w[3]), (-1.0, &big_b)]);
    let (x1, y1) = solve2(
        [
            [b(2, 1) * g1, b(2, 1) * g1 * g1 / 2.0],
            [b(3, 2) * g2, b(3, 2) * g2 * g2 / 2.0],
        ],
        &r1,
        &r2,
    )?;

    // Stage 3 with w2 replaced through the stage-2 relation.
    let r3 = lin(&[
        (1.0, &w[3]),
        (-a(3, 0), &w[0]),
        (-a(3, 2), &big_a),
        (-(b(3, 0) + b(3, 2)), &d),
    ]);
    let r4 = lin(&[
        (1.0, &w[4]),
        (-a(4, 0), &w[0]),
        (-a(4, 1), &w[1]),
        (-a(4, 3), &w[3]),
        (-(b(4, 0) + b(4, 1) + b(4, 3)), &d),
    ]);
    let (x2, y2) = solve2(
        [
            [
                a(3, 2) * b(2, 1) * g1 + b(3, 2) * g2,
                (a(3, 2) * b(2, 1) * g1 * g1 + b(3, 2) * g2 * g2) / 2.0,
            ],
            [
                b(4, 1) * g1 + b(4, 3) * g3,
                (b(4, 1) * g1 * g1 + b(4, 3) * g3 * g3) / 2.0,
            ],
        ],
        &r3,
        &r4,
    )?;
    let x = lin(&[(0.5, &x1), (0.5, &x2)]);
    let y = lin(&[(0.5, &y1), (0.5, &y2)]);

    let m = ratio as f64;
    let mut out = Vec::with_capacity(ratio * 5);
    for p in 0..ratio {
        let pf = p as f64;
        let theta = pf / m;
        let mut stages: Vec<Functional> = Vec::with_capacity(5);
        stages.push(lin(&[
            (1.0, &w[0]),
            (theta, &d),
            (theta * theta / 2.0, &x),
            (theta * theta * theta / 6.0, &y),
        ]));
        for i in 1..5 {
            let mut acc = [0.0; 5];
            for nu in 0..i {
                let t = (pf + gamma[nu]) / m;
                // dt/M L(w^{p,(nu)}) expanded about t^n.
                let l = lin(&[(1.0 / m, &d), (t / m, &x), (t * t / (2.0 * m), &y)]);
                axpy(&mut acc, a(i, nu), &stages[nu]);
                axpy(&mut acc, b(i, nu), &l);
            }
            stages.push(acc);
        }
        out.extend(stages.into_iter().map(|f| f.to_vec()));
    }
    Ok(out)
}
