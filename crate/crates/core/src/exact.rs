//! Reference solutions: linear advection, smooth Burgers data through the
//! shock, and the exact Riemann solution of the Euler equations.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flux::Primitive;
use crate::state::Vars;

pub fn advection_smooth(x: f64, t: f64) -> f64 {
    (PI * (x - t)).sin()
}

/// Step from `u = 2` (entering at x = -1) into `u = -1`, speed 1.
pub fn advection_step(x: f64, t: f64) -> f64 {
    if x - t <= -1.0 {
        2.0
    } else {
        -1.0
    }
}

const NEWTON_MAX_ITERS: usize = 100;

/// Solution of `v_t + (v^2/2)_x = 0`, `v(x,0) = sin(pi x)`, 2-periodic, at
/// time `tau`. After breaking the shock stays at odd integers.
pub fn burgers_v(x: f64, tau: f64) -> Result<f64> {
    let y = (x + 1.0).rem_euclid(2.0) - 1.0;
    if y < 0.0 {
        return burgers_v_half(-y, tau, x).map(|v| -v);
    }
    burgers_v_half(y, tau, x)
}

/// `burgers_v` for `y` in [0, 1]; `x` is only used in error messages.
fn burgers_v_half(y: f64, tau: f64, x: f64) -> Result<f64> {
    if y == 0.0 || y == 1.0 {
        return Ok(0.0);
    }
    if tau == 0.0 {
        return Ok((PI * y).sin());
    }
    // Characteristic foot xi in [0, xi_max] with xi + tau sin(pi xi) = y; the
    // map is increasing there and covers [0, 1].
    let xi_max = if PI * tau <= 1.0 {
        1.0
    } else {
        (-1.0 / (PI * tau)).acos() / PI
    };
    let g = |xi: f64| xi + tau * (PI * xi).sin() - y;
    let (mut lo, mut hi) = (0.0, xi_max);
    let mut xi = y.min(xi_max);
    for _ in 0..NEWTON_MAX_ITERS {
        let r = g(xi);
        if r.abs() <= 1e-15 {
            return Ok((PI * xi).sin());
        }
        if r > 0.0 {
            hi = xi;
        } else {
            lo = xi;
        }
        let d = 1.0 + PI * tau * (PI * xi).cos();
        let mut next = xi - r / d;
        if !(d > 0.0) || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - xi).abs() <= 1e-16 * xi.abs().max(1.0) {
            return Ok((PI * next).sin());
        }
        xi = next;
    }
    let v = (PI * xi).sin();
    if (v - (PI * (y - v * tau)).sin()).abs() <= 1e-13 {
        Ok(v)
    } else {
        Err(Error::Oracle(format!("Burgers characteristic solve did not converge at x={x}, t={tau}")))
    }
}

/// `u(x,t)` for `u_t + (u^2/2)_x = 0`, `u(x,0) = 1/4 + sin(pi x)/2` on [-1,1].
pub fn burgers_exact(x: f64, t: f64) -> Result<f64> {
    Ok(0.25 + 0.5 * burgers_v(x - 0.25 * t, 0.5 * t)?)
}

/// Time at which the Burgers solution forms a shock.
pub const BURGERS_BREAKING_TIME: f64 = 2.0 / PI;

/// Shock location of the Burgers solution in [-1, 1), once formed.
pub fn burgers_shock_position(t: f64) -> Option<f64> {
    (t > BURGERS_BREAKING_TIME).then(|| (1.0 + 0.25 * t + 1.0).rem_euclid(2.0) - 1.0)
}

/// Exact solution of a Riemann problem for a polytropic gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSolution {
    pub left: Primitive,
    pub right: Primitive,
    pub gamma: f64,
    pub p_star: f64,
    pub u_star: f64,
}

/// Pressure function of one side and its derivative.
fn pressure_fn(p: f64, side: &Primitive, gamma: f64) -> (f64, f64) {
    let (rho, pk) = (side.density, side.pressure);
    let c = side.sound_speed(gamma);
    if p > pk {
        let a = 2.0 / ((gamma + 1.0) * rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * pk;
        let q = (a / (p + b)).sqrt();
        ((p - pk) * q, q * (1.0 - 0.5 * (p - pk) / (b + p)))
    } else {
        let e = (gamma - 1.0) / (2.0 * gamma);
        let f = 2.0 * c / (gamma - 1.0) * ((p / pk).powf(e) - 1.0);
        (f, (p / pk).powf(-(gamma + 1.0) / (2.0 * gamma)) / (rho * c))
    }
}

pub fn solve_riemann(left: Primitive, right: Primitive, gamma: f64) -> Result<RiemannSolution> {
    for s in [&left, &right] {
        if !(s.density > 0.0 && s.pressure > 0.0) {
            return Err(Error::InvalidState {
                cell: None,
                density: s.density,
                pressure: s.pressure,
            });
        }
    }
    let (cl, cr) = (left.sound_speed(gamma), right.sound_speed(gamma));
    let du = right.velocity - left.velocity;
    if 2.0 / (gamma - 1.0) * (cl + cr) <= du {
        return Err(Error::Unsupported("Riemann data generates vacuum".into()));
    }
    // Two-rarefaction guess.
    let z = (gamma - 1.0) / (2.0 * gamma);
    let num = cl + cr - 0.5 * (gamma - 1.0) * du;
    let den = cl / left.pressure.powf(z) + cr / right.pressure.powf(z);
    let mut p = (num / den).powf(1.0 / z).max(1e-14);
    for _ in 0..NEWTON_MAX_ITERS {
        let (fl, dl) = pressure_fn(p, &left, gamma);
        let (fr, dr) = pressure_fn(p, &right, gamma);
        let next = (p - (fl + fr + du) / (dl + dr)).max(1e-14 * p);
        let change = 2.0 * (next - p).abs() / (next + p);
        p = next;
        if change <= 1e-12 {
            let (fl, _) = pressure_fn(p, &left, gamma);
            let (fr, _) = pressure_fn(p, &right, gamma);
            return Ok(RiemannSolution {
                left,
                right,
                gamma,
                p_star: p,
                u_star: 0.5 * (left.velocity + right.velocity) + 0.5 * (fr - fl),
            });
        }
    }
    Err(Error::Oracle("Riemann pressure iteration did not converge".into()))
}

impl RiemannSolution {
    /// State on the ray `x / t = xi`.
    pub fn sample(&self, xi: f64) -> Primitive {
        let g = self.gamma;
        let (ps, us) = (self.p_star, self.u_star);
        let (side, sign) = if xi <= us {
            (&self.left, -1.0)
        } else {
            (&self.right, 1.0)
        };
        // Mirror the right side onto the left-wave formulas.
        let u = sign * -side.velocity;
        let ust = sign * -us;
        let x = sign * -xi;
        let c = side.sound_speed(g);
        let (rho, p) = (side.density, side.pressure);
        let out = |d: f64, v: f64, pr: f64| Primitive::new(d, sign * -v, pr);
        if ps > p {
            let s = u - c * ((g + 1.0) / (2.0 * g) * ps / p + (g - 1.0) / (2.0 * g)).sqrt();
            if x <= s {
                out(rho, u, p)
            } else {
                let r = ps / p;
                let gr = (g - 1.0) / (g + 1.0);
                out(rho * (r + gr) / (r * gr + 1.0), ust, ps)
            }
        } else {
            let head = u - c;
            let cs = c * (ps / p).powf((g - 1.0) / (2.0 * g));
            let tail = ust - cs;
            if x <= head {
                out(rho, u, p)
            } else if x > tail {
                out(rho * (ps / p).powf(1.0 / g), ust, ps)
            } else {
                let k = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * c) * (u - x);
                let d = rho * k.powf(2.0 / (g - 1.0));
                let v = 2.0 / (g + 1.0) * (c + (g - 1.0) / 2.0 * u + x);
                out(d, v, p * k.powf(2.0 * g / (g - 1.0)))
            }
        }
    }
}

/// Primitive state of the Riemann problem at `x / t = xi`.
pub fn euler_riemann_exact(left: Primitive, right: Primitive, gamma: f64, xi: f64) -> Result<Primitive> {
    Ok(solve_riemann(left, right, gamma)?.sample(xi))
}

/// A reference solution evaluable at any `(x, t)` of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactSolution {
    AdvectionSmooth,
    AdvectionStep,
    BurgersSmooth,
    EulerRiemann { solution: RiemannSolution, x0: f64 },
}

impl ExactSolution {
    pub fn riemann(left: Primitive, right: Primitive, gamma: f64, x0: f64) -> Result<Self> {
        Ok(Self::EulerRiemann {
            solution: solve_riemann(left, right, gamma)?,
            x0,
        })
    }

    /// Conserved variables at `(x, t)`.
    pub fn evaluate(&self, x: f64, t: f64) -> Result<Vars> {
        match self {
            Self::AdvectionSmooth => Ok([advection_smooth(x, t), 0.0, 0.0]),
            Self::AdvectionStep => Ok([advection_step(x, t), 0.0, 0.0]),
            Self::BurgersSmooth => Ok([burgers_exact(x, t)?, 0.0, 0.0]),
            Self::EulerRiemann { solution, x0 } => {
                let s = if t > 0.0 {
                    solution.sample((x - x0) / t)
                } else if x < *x0 {
                    solution.left
                } else {
                    solution.right
                };
                Ok(s.to_conserved(solution.gamma))
            }
        }
    }
}
