//! Preset problems: model, domain, data, region layout and reference solution.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exact::{burgers_shock_position, ExactSolution};
use crate::flux::{FluxKind, Model, Primitive};
use crate::mesh::{Alignment, Boundaries, BoundaryKind, RegionSpec};
use crate::state::Vars;

pub const GAMMA: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    AdvectionSmooth,
    AdvectionStep,
    Burgers,
    Sod,
    Lax,
    Blast,
}

/// Region layout for cases that offer more than one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Layout {
    #[default]
    Two,
    Three,
}

/// Speed used to size the coarse time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSpeed {
    Fixed(f64),
    /// Maximum wave speed of the solution at the start of each step.
    Adaptive,
}

impl Case {
    pub const ALL: [Case; 6] = [
        Case::AdvectionSmooth,
        Case::AdvectionStep,
        Case::Burgers,
        Case::Sod,
        Case::Lax,
        Case::Blast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Case::AdvectionSmooth => "advection_smooth",
            Case::AdvectionStep => "advection_step",
            Case::Burgers => "burgers",
            Case::Sod => "sod",
            Case::Lax => "lax",
            Case::Blast => "blast",
        }
    }

    pub fn model(self) -> Model {
        match self {
            Case::AdvectionSmooth | Case::AdvectionStep => Model::Advection { speed: 1.0 },
            Case::Burgers => Model::Burgers,
            _ => Model::Euler { gamma: GAMMA },
        }
    }

    pub fn domain(self) -> (f64, f64) {
        match self {
            Case::AdvectionSmooth | Case::AdvectionStep | Case::Burgers => (-1.0, 1.0),
            Case::Sod | Case::Lax => (-4.9, 5.1),
            Case::Blast => (0.0, 1.0),
        }
    }

    pub fn boundaries(self) -> Boundaries {
        match self {
            Case::AdvectionSmooth | Case::Burgers => Boundaries::periodic(),
            Case::AdvectionStep => Boundaries {
                left: BoundaryKind::Inflow([2.0, 0.0, 0.0]),
                right: BoundaryKind::Outflow,
            },
            Case::Sod | Case::Lax => Boundaries::uniform(BoundaryKind::Outflow),
            Case::Blast => Boundaries::uniform(BoundaryKind::Reflective),
        }
    }

    pub fn default_t_end(self) -> f64 {
        match self {
            Case::AdvectionSmooth => 2.0,
            Case::AdvectionStep => 1.0,
            Case::Burgers => 0.3,
            Case::Sod => 2.0,
            Case::Lax => 1.3,
            Case::Blast => 0.038,
        }
    }

    pub fn default_dx_coarse(self) -> f64 {
        match self {
            Case::AdvectionSmooth => 0.2,
            Case::AdvectionStep | Case::Burgers => 1.0 / 40.0,
            Case::Sod | Case::Lax => 0.2,
            Case::Blast => 1.0 / 200.0,
        }
    }

    /// Godunov for scalar models, Lax-Friedrichs for Euler.
    pub fn default_flux(self) -> FluxKind {
        if self.model().is_system() {
            FluxKind::LaxFriedrichs
        } else {
            FluxKind::Godunov
        }
    }

    pub fn default_limiter_cm(self) -> f64 {
        match self {
            Case::AdvectionSmooth | Case::Burgers => SMOOTH_TVB_CM,
            _ => 0.0,
        }
    }

    /// Whether interface cells are limited during the coarse step: needed
    /// where the data can be discontinuous at an interface.
    pub fn interface_limiting(self) -> bool {
        !matches!(self, Case::AdvectionSmooth | Case::Burgers)
    }

    pub fn step_speed(self) -> StepSpeed {
        match self {
            Case::AdvectionSmooth | Case::AdvectionStep | Case::Burgers => StepSpeed::Fixed(1.0),
            _ => StepSpeed::Adaptive,
        }
    }

    pub fn alignment(self) -> Alignment {
        match self {
            Case::Sod | Case::Lax => Alignment::Snap,
            _ => Alignment::Strict,
        }
    }

    /// Sub-intervals and ratios: `ratio` applies to the refined part.
    pub fn regions(self, layout: Layout, ratio: usize) -> Vec<RegionSpec> {
        let r = RegionSpec::new;
        match (self, layout) {
            (Case::AdvectionSmooth | Case::AdvectionStep | Case::Burgers, _) => {
                vec![r(-1.0, 0.0, ratio), r(0.0, 1.0, 1)]
            }
            (Case::Sod, Layout::Two) => vec![r(-4.9, -0.5, 1), r(-0.5, 5.1, ratio)],
            (Case::Sod, Layout::Three) => vec![r(-4.9, -2.9, 1), r(-2.9, 4.0, ratio), r(4.0, 5.1, 1)],
            (Case::Lax, _) => vec![r(-4.9, 0.0, 1), r(0.0, 5.1, ratio)],
            (Case::Blast, _) => vec![r(0.0, 0.2, 1), r(0.2, 0.9, ratio), r(0.9, 1.0, 1)],
        }
    }

    /// Points where the initial data jumps.
    pub fn breakpoints(self) -> Vec<f64> {
        match self {
            Case::AdvectionStep => vec![-1.0],
            Case::Sod | Case::Lax => vec![0.0],
            Case::Blast => vec![0.1, 0.9],
            _ => vec![],
        }
    }

    fn riemann_states(self) -> Option<(Primitive, Primitive)> {
        match self {
            Case::Sod => Some((Primitive::new(1.0, 0.0, 1.0), Primitive::new(0.125, 0.0, 0.1))),
            Case::Lax => Some((Primitive::new(0.445, 0.698, 3.528), Primitive::new(0.5, 0.0, 0.571))),
            _ => None,
        }
    }

    /// Conserved initial data at `x`.
    pub fn initial(self, x: f64) -> Vars {
        match self {
            Case::AdvectionSmooth => [crate::exact::advection_smooth(x, 0.0), 0.0, 0.0],
            Case::AdvectionStep => [crate::exact::advection_step(x, 0.0), 0.0, 0.0],
            Case::Burgers => [0.25 + 0.5 * (std::f64::consts::PI * x).sin(), 0.0, 0.0],
            Case::Sod | Case::Lax => {
                let (l, r) = self.riemann_states().unwrap_or((Primitive::new(1.0, 0.0, 1.0), Primitive::new(1.0, 0.0, 1.0)));
                if x < 0.0 { l } else { r }.to_conserved(GAMMA)
            }
            Case::Blast => {
                let p = if x < 0.1 {
                    1000.0
                } else if x < 0.9 {
                    0.01
                } else {
                    100.0
                };
                Primitive::new(1.0, 0.0, p).to_conserved(GAMMA)
            }
        }
    }

    pub fn exact(self) -> Result<Option<ExactSolution>> {
        Ok(match self {
            Case::AdvectionSmooth => Some(ExactSolution::AdvectionSmooth),
            Case::AdvectionStep => Some(ExactSolution::AdvectionStep),
            Case::Burgers => Some(ExactSolution::BurgersSmooth),
            Case::Sod | Case::Lax => {
                let (l, r) = self.riemann_states().ok_or_else(|| Error::Internal("missing Riemann data".into()))?;
                Some(ExactSolution::riemann(l, r, GAMMA, 0.0)?)
            }
            Case::Blast => None,
        })
    }

    /// Centre of the band left out of error integrals at time `t`.
    pub fn shock_exclusion_center(self, t: f64) -> Option<f64> {
        match self {
            Case::Burgers => burgers_shock_position(t),
            _ => None,
        }
    }
}

/// TVB constant used for the smooth scalar problems.
pub const SMOOTH_TVB_CM: f64 = 50.0;

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Case::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown case '{s}'")))
    }
}

impl FromStr for Layout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "two" | "2" => Ok(Layout::Two),
            "three" | "3" => Ok(Layout::Three),
            _ => Err(Error::Config(format!("unknown layout '{s}'"))),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layout::Two => "two",
            Layout::Three => "three",
        })
    }
}
