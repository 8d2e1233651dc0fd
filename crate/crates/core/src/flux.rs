//! Physical fluxes, wave speeds, monotone numerical fluxes and the Euler
//! characteristic decomposition.

use crate::error::{Error, Result};
use crate::state::{Vars, MAX_VARS};

/// Conservation law being solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// `u_t + a u_x = 0`.
    Advection { speed: f64 },
    /// `u_t + (u^2/2)_x = 0`.
    Burgers,
    /// Polytropic gas, conserved variables `(rho, m, E)`.
    Euler { gamma: f64 },
}

impl Model {
    pub fn nvar(&self) -> usize {
        match self {
            Model::Euler { .. } => 3,
            _ => 1,
        }
    }

    pub fn is_system(&self) -> bool {
        self.nvar() > 1
    }

    pub fn physical_flux(&self, u: &Vars) -> Result<Vars> {
        match *self {
            Model::Advection { speed } => Ok([speed * u[0], 0.0, 0.0]),
            Model::Burgers => Ok([0.5 * u[0] * u[0], 0.0, 0.0]),
            Model::Euler { gamma } => {
                let p = Primitive::from_conserved(u, gamma)?;
                Ok([u[1], u[1] * p.velocity + p.pressure, p.velocity * (u[2] + p.pressure)])
            }
        }
    }

    /// Largest characteristic speed magnitude at `u`.
    pub fn max_wave_speed(&self, u: &Vars) -> Result<f64> {
        match *self {
            Model::Advection { speed } => Ok(speed.abs()),
            Model::Burgers => Ok(u[0].abs()),
            Model::Euler { gamma } => {
                let p = Primitive::from_conserved(u, gamma)?;
                Ok(p.velocity.abs() + p.sound_speed(gamma))
            }
        }
    }

    /// Ghost state for a reflecting wall.
    pub fn reflect(&self, u: &Vars) -> Vars {
        match self {
            Model::Euler { .. } => [u[0], -u[1], u[2]],
            _ => *u,
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            Model::Euler { gamma } => Some(gamma),
            _ => None,
        }
    }
}

/// Density, velocity, pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub density: f64,
    pub velocity: f64,
    pub pressure: f64,
}

impl Primitive {
    pub fn new(density: f64, velocity: f64, pressure: f64) -> Self {
        Self {
            density,
            velocity,
            pressure,
        }
    }

    pub fn from_conserved(u: &Vars, gamma: f64) -> Result<Self> {
        let density = u[0];
        if !(density > 0.0) {
            return Err(Error::InvalidState {
                cell: None,
                density,
                pressure: f64::NAN,
            });
        }
        let velocity = u[1] / density;
        let pressure = (gamma - 1.0) * (u[2] - 0.5 * density * velocity * velocity);
        if !(pressure > 0.0) {
            return Err(Error::InvalidState {
                cell: None,
                density,
                pressure,
            });
        }
        Ok(Self {
            density,
            velocity,
            pressure,
        })
    }

    pub fn to_conserved(&self, gamma: f64) -> Vars {
        let m = self.density * self.velocity;
        let e = self.pressure / (gamma - 1.0) + 0.5 * self.density * self.velocity * self.velocity;
        [self.density, m, e]
    }

    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.pressure / self.density).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    LaxFriedrichs,
    Godunov,
    EngquistOsher,
}

/// Where the Lax-Friedrichs dissipation speed comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LfAlpha {
    /// One speed for the whole step, taken over the state at the step start.
    #[default]
    Global,
    /// Per edge: the larger wave speed of the two traces.
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericalFlux {
    pub kind: FluxKind,
    pub alpha: LfAlpha,
}

impl NumericalFlux {
    pub fn lax_friedrichs() -> Self {
        Self {
            kind: FluxKind::LaxFriedrichs,
            alpha: LfAlpha::Global,
        }
    }

    pub fn new(kind: FluxKind) -> Self {
        Self {
            kind,
            alpha: LfAlpha::Global,
        }
    }

    pub fn check_model(&self, model: &Model) -> Result<()> {
        if model.is_system() && self.kind != FluxKind::LaxFriedrichs {
            return Err(Error::Unsupported(format!(
                "{:?} flux is implemented for scalar models only",
                self.kind
            )));
        }
        Ok(())
    }

    /// `h(u_l, u_r)`. `global_alpha` is only read by global Lax-Friedrichs.
    pub fn evaluate(&self, model: &Model, ul: &Vars, ur: &Vars, global_alpha: f64) -> Result<Vars> {
        match self.kind {
            FluxKind::LaxFriedrichs => {
                let alpha = match self.alpha {
                    LfAlpha::Global => global_alpha,
                    LfAlpha::Local => model.max_wave_speed(ul)?.max(model.max_wave_speed(ur)?),
                };
                lax_friedrichs(model, ul, ur, alpha)
            }
            FluxKind::Godunov => Ok([scalar_godunov(model, ul[0], ur[0])?, 0.0, 0.0]),
            FluxKind::EngquistOsher => Ok([scalar_engquist_osher(model, ul[0], ur[0])?, 0.0, 0.0]),
        }
    }
}

/// `1/2 (f(u_l) + f(u_r)) - alpha/2 (u_r - u_l)`.
pub fn lax_friedrichs(model: &Model, ul: &Vars, ur: &Vars, alpha: f64) -> Result<Vars> {
    let fl = model.physical_flux(ul)?;
    let fr = model.physical_flux(ur)?;
    let mut h = [0.0; MAX_VARS];
    for v in 0..model.nvar() {
        h[v] = 0.5 * (fl[v] + fr[v]) - 0.5 * alpha * (ur[v] - ul[v]);
    }
    Ok(h)
}

/// Exact Riemann flux: min of f over [ul, ur] if ul <= ur, else max over [ur, ul].
pub fn scalar_godunov(model: &Model, ul: f64, ur: f64) -> Result<f64> {
    match *model {
        Model::Advection { speed } => Ok(if speed >= 0.0 { speed * ul } else { speed * ur }),
        Model::Burgers => {
            let f = |u: f64| 0.5 * u * u;
            Ok(if ul <= ur {
                if ul <= 0.0 && 0.0 <= ur {
                    0.0
                } else {
                    f(ul).min(f(ur))
                }
            } else {
                f(ul).max(f(ur))
            })
        }
        Model::Euler { .. } => Err(Error::Unsupported("Godunov flux for Euler".into())),
    }
}

/// `f(0) + int_0^{ul} max(f', 0) + int_0^{ur} min(f', 0)`.
pub fn scalar_engquist_osher(model: &Model, ul: f64, ur: f64) -> Result<f64> {
    match *model {
        Model::Advection { speed } => Ok(speed.max(0.0) * ul + speed.min(0.0) * ur),
        Model::Burgers => {
            let a = ul.max(0.0);
            let b = ur.min(0.0);
            Ok(0.5 * a * a + 0.5 * b * b)
        }
        Model::Euler { .. } => Err(Error::Unsupported("Engquist-Osher flux for Euler".into())),
    }
}

/// Right eigenvectors (columns) of the Euler flux Jacobian and their inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharTransform {
    pub right: [[f64; 3]; 3],
    pub left: [[f64; 3]; 3],
    pub eigenvalues: [f64; 3],
}

impl CharTransform {
    /// Characteristic variables `R^{-1} u`.
    pub fn to_char(&self, u: &Vars) -> Vars {
        mat_vec(&self.left, u)
    }

    pub fn from_char(&self, w: &Vars) -> Vars {
        mat_vec(&self.right, w)
    }
}

fn mat_vec(m: &[[f64; 3]; 3], x: &Vars) -> Vars {
    let mut out = [0.0; 3];
    for (i, row) in m.iter().enumerate() {
        out[i] = row[0] * x[0] + row[1] * x[1] + row[2] * x[2];
    }
    out
}

/// Eigen-decomposition of the Euler flux Jacobian at a (cell-mean) state.
pub fn euler_char_transform(mean: &Vars, gamma: f64) -> Result<CharTransform> {
    let p = Primitive::from_conserved(mean, gamma)?;
    let q = p.velocity;
    let c = p.sound_speed(gamma);
    let h = (mean[2] + p.pressure) / p.density;
    let right = [
        [1.0, 1.0, 1.0],
        [q - c, q, q + c],
        [h - q * c, 0.5 * q * q, h + q * c],
    ];
    let b1 = (gamma - 1.0) / (c * c);
    let b2 = 0.5 * b1 * q * q;
    let left = [
        [0.5 * (b2 + q / c), -0.5 * (b1 * q + 1.0 / c), 0.5 * b1],
        [1.0 - b2, b1 * q, -b1],
        [0.5 * (b2 - q / c), -0.5 * (b1 * q - 1.0 / c), 0.5 * b1],
    ];
    Ok(CharTransform {
        right,
        left,
        eigenvalues: [q - c, q, q + c],
    })
}
