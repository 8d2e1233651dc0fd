//! Run orchestration: time loop, error reports, sweeps and CSV output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::cases::{Case, Layout, StepSpeed};
use crate::dg::{max_wave_speed, project_initial, Discretization};
use crate::diagnostics::{convergence_rates, l1_rel_error, total_mass, total_variation_means, ErrorReport, Exclusion};
use crate::error::{Error, Result};
use crate::flux::{FluxKind, LfAlpha, NumericalFlux};
use crate::limiter::{apply_limiter, LimiterConfig, MeanOverrides};
use crate::lts::{LtsEngine, Rk54Predictor};
use crate::mesh::{build_partition, MeshPartition, RegionSpec};
use crate::ssprk::{gts_step_with_alpha, RkScheme};
use crate::state::{SolutionState, Vars};

/// How the refined mesh is advanced in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stepping {
    /// Coarse step outside, `dt / M` inside the refined regions.
    #[default]
    Lts,
    /// One global step of the coarse size everywhere.
    GtsCoarse,
    /// One global step of the finest size everywhere.
    GtsFine,
}

impl std::str::FromStr for Stepping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lts" => Ok(Stepping::Lts),
            "gts-coarse" => Ok(Stepping::GtsCoarse),
            "gts-fine" => Ok(Stepping::GtsFine),
            _ => Err(Error::Config(format!("unknown stepping '{s}'"))),
        }
    }
}

impl std::fmt::Display for Stepping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stepping::Lts => "lts",
            Stepping::GtsCoarse => "gts-coarse",
            Stepping::GtsFine => "gts-fine",
        })
    }
}

/// Default step multiplier. The fourth-order interface corrector is only
/// stable to about 0.55 of the SSP step with P3 elements.
pub fn default_cfl(order: usize) -> f64 {
    if order >= 4 {
        0.5
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: Case,
    pub order: usize,
    pub dx_coarse: f64,
    /// Ratio of the refined region(s) in the case's layout.
    pub ratio: usize,
    /// Explicit regions; replaces the case layout when set.
    pub regions: Option<Vec<RegionSpec>>,
    pub layout: Layout,
    pub t_end: f64,
    /// Multiplier on `C/(2k+1) dx/speed`; `None` takes [`default_cfl`].
    pub cfl: Option<f64>,
    pub limiter_cm: f64,
    pub limiter: bool,
    pub interface_limiting: bool,
    pub flux: FluxKind,
    pub lf_alpha: LfAlpha,
    /// Limit Euler solutions in characteristic rather than conserved variables.
    pub characteristic: bool,
    pub stepping: Stepping,
    pub snapshots: Vec<f64>,
    /// Half width of the band around a shock left out of the error.
    pub exclusion: Option<f64>,
    pub rk54_predictor: Rk54Predictor,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(case: Case) -> Self {
        Self {
            case,
            order: 2,
            dx_coarse: case.default_dx_coarse(),
            ratio: 1,
            regions: None,
            layout: Layout::Two,
            t_end: case.default_t_end(),
            cfl: None,
            limiter_cm: case.default_limiter_cm(),
            limiter: true,
            interface_limiting: case.interface_limiting(),
            flux: case.default_flux(),
            lf_alpha: LfAlpha::Global,
            characteristic: true,
            stepping: Stepping::Lts,
            snapshots: Vec::new(),
            exclusion: (case == Case::Burgers).then_some(0.1),
            rk54_predictor: Rk54Predictor::default(),
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(2..=4).contains(&self.order) {
            return bad(format!("order must be 2, 3 or 4, got {}", self.order));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.dx_coarse > 0.0 && self.dx_coarse.is_finite()) {
            return bad(format!("dx_coarse must be positive, got {}", self.dx_coarse));
        }
        if self.ratio == 0 {
            return bad("ratio must be at least 1".into());
        }
        if !(self.cfl() > 0.0 && self.cfl().is_finite()) {
            return bad(format!("cfl must be positive, got {}", self.cfl()));
        }
        if !(self.limiter_cm >= 0.0) {
            return bad(format!("limiter C_M must be non-negative, got {}", self.limiter_cm));
        }
        if let Some(t) = self.snapshots.iter().find(|&&t| !(t >= 0.0 && t <= self.t_end)) {
            return bad(format!("snapshot time {t} outside [0, {}]", self.t_end));
        }
        self.numerical_flux().check_model(&self.case.model())
    }

    pub fn region_specs(&self) -> Vec<RegionSpec> {
        self.regions.clone().unwrap_or_else(|| self.case.regions(self.layout, self.ratio))
    }

    pub fn cfl(&self) -> f64 {
        self.cfl.unwrap_or_else(|| default_cfl(self.order))
    }

    pub fn degree(&self) -> usize {
        self.order - 1
    }

    /// Canonical text of every setting that affects the results.
    pub fn canonical(&self) -> String {
        let regions: Vec<String> = self.region_specs().iter().map(|r| format!("{}:{}:{}", r.lo, r.hi, r.ratio)).collect();
        let snaps: Vec<String> = self.snapshots.iter().map(|t| format!("{t}")).collect();
        format!(
            "case={}\norder={}\ndx_coarse={}\nregions={}\nt_end={}\ncfl={}\nlimiter={}\nlimiter_cm={}\ninterface_limiting={}\nflux={:?}\nlf_alpha={:?}\ncharacteristic={}\nstepping={}\nsnapshots={}\nexclusion={:?}\nrk54_predictor={:?}\n",
            self.case,
            self.order,
            self.dx_coarse,
            regions.join(","),
            self.t_end,
            self.cfl(),
            self.limiter,
            self.limiter_cm,
            self.interface_limiting,
            self.flux,
            self.lf_alpha,
            self.characteristic,
            self.stepping,
            snaps.join(","),
            self.exclusion,
            self.rk54_predictor
        )
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn limiter_config(&self) -> LimiterConfig {
        LimiterConfig {
            enabled: self.limiter,
            cm: self.limiter_cm,
            characteristic: self.characteristic,
        }
    }

    pub fn numerical_flux(&self) -> NumericalFlux {
        NumericalFlux {
            kind: self.flux,
            alpha: self.lf_alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub time: f64,
    pub mass: Vars,
    /// `sum_j dx_j |ubar_j|`.
    pub abs_mass: Vars,
    pub tv: Vars,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: RunConfig,
    pub mesh: MeshPartition,
    pub state: SolutionState,
    pub report: ErrorReport,
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<SolutionState>,
    pub steps: usize,
}

impl RunResult {
    /// Largest `|mass(t) - mass(0)|` over the series relative to the initial
    /// mass, or to the initial `L1` norm of the means when the mass is tiny.
    /// A variable that starts identically zero reports the absolute drift.
    pub fn max_relative_mass_drift(&self) -> Vars {
        let m0 = self.series[0].mass;
        let abs0 = self.series[0].abs_mass;
        let mut out = [0.0; 3];
        for row in &self.series {
            for v in 0..self.state.nvar() {
                let scale = if m0[v].abs() > 1e-8 * abs0[v] {
                    m0[v].abs()
                } else if abs0[v] > 0.0 {
                    abs0[v]
                } else {
                    1.0
                };
                out[v] = f64::max(out[v], (row.mass[v] - m0[v]).abs() / scale);
            }
        }
        out
    }
}

enum Stepper {
    Lts(LtsEngine),
    Global { scheme: RkScheme, disc: Discretization, limiter: LimiterConfig },
}

/// Everything needed to advance one configuration.
pub struct Simulation {
    pub config: RunConfig,
    pub mesh: MeshPartition,
    pub disc: Discretization,
    pub scheme: RkScheme,
    stepper: Stepper,
}

impl Simulation {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let case = config.case;
        let mesh = build_partition(case.domain(), config.dx_coarse, &config.region_specs(), case.boundaries(), case.alignment())?;
        let disc = Discretization::new(case.model(), config.degree(), config.numerical_flux())?;
        let scheme = RkScheme::for_order(config.order)?;
        let limiter = config.limiter_config();
        let stepper = match config.stepping {
            Stepping::Lts => Stepper::Lts(
                LtsEngine::new(&mesh, &disc, &scheme, limiter)?
                    .with_interface_limiting(config.interface_limiting)
                    .with_rk54_predictor(config.rk54_predictor)?,
            ),
            _ => Stepper::Global {
                scheme: scheme.clone(),
                disc: disc.clone(),
                limiter,
            },
        };
        Ok(Self {
            config: config.clone(),
            mesh,
            disc,
            scheme,
            stepper,
        })
    }

    /// Limited `L2` projection of the initial data.
    pub fn initial_state(&self) -> Result<SolutionState> {
        let case = self.config.case;
        let mut s = project_initial(|x| case.initial(x), &case.breakpoints(), &self.mesh, self.disc.nvar(), self.config.degree());
        apply_limiter(&mut s, &self.mesh, &self.disc.model, &self.config.limiter_config(), self.mesh.all_cells(), MeanOverrides::default())?;
        Ok(s)
    }

    /// Step size for the current state before landing adjustments.
    pub fn nominal_dt(&self, state: &SolutionState) -> Result<f64> {
        let speed = match self.config.case.step_speed() {
            StepSpeed::Fixed(s) => s,
            StepSpeed::Adaptive => max_wave_speed(&self.disc, state)?,
        };
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::Internal(format!("non-positive wave speed {speed}")));
        }
        let dt = self.scheme.cfl_dt(self.config.degree(), self.config.dx_coarse, speed, self.config.cfl());
        Ok(match self.config.stepping {
            Stepping::GtsFine => dt / self.mesh.max_ratio() as f64,
            _ => dt,
        })
    }

    pub fn step(&self, state: &SolutionState, dt: f64) -> Result<SolutionState> {
        match &self.stepper {
            Stepper::Lts(engine) => engine.step(state, dt),
            Stepper::Global { scheme, disc, limiter } => {
                let alpha = max_wave_speed(disc, state)?;
                gts_step_with_alpha(state, dt, scheme, disc, limiter, &self.mesh, alpha)
            }
        }
    }

    pub fn report(&self, state: &SolutionState) -> Result<ErrorReport> {
        let case = self.config.case;
        let t = state.time;
        let rel_l1_error = match case.exact()? {
            Some(exact) => {
                let exclusion = case
                    .shock_exclusion_center(t)
                    .zip(self.config.exclusion)
                    .map(|(c, w)| Exclusion::new(c, w));
                Some(l1_rel_error(state, &self.mesh, &self.disc.model, &exact, t, exclusion)?)
            }
            None => None,
        };
        Ok(ErrorReport {
            time: t,
            rel_l1_error,
            total_mass: total_mass(state, &self.mesh),
            tv_of_means: total_variation_means(state, &self.mesh),
            nvar: state.nvar(),
            mesh: format!(
                "{} cells, dx_coarse {}, max ratio {}",
                self.mesh.ncells(),
                self.config.dx_coarse,
                self.mesh.max_ratio()
            ),
            scheme: format!("RK-DG{} SSP-RK({},{}) {}", self.config.order, self.scheme.stages, self.scheme.order, self.config.stepping),
        })
    }
}

fn abs_mass(state: &SolutionState, mesh: &MeshPartition) -> Vars {
    let mut out = [0.0; 3];
    for j in 0..mesh.ncells() {
        let m = state.mean(j);
        for v in 0..state.nvar() {
            out[v] += mesh.size(j) * m[v].abs();
        }
    }
    out
}

/// Integrate a case from 0 to `t_end`, landing exactly on every snapshot
/// time and on `t_end`.
pub fn run_case(config: &RunConfig) -> Result<RunResult> {
    let sim = Simulation::new(config)?;
    let mut state = sim.initial_state()?;
    let mut targets: Vec<f64> = config.snapshots.clone();
    targets.push(config.t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let row = |s: &SolutionState| SeriesRow {
        time: s.time,
        mass: total_mass(s, &sim.mesh),
        abs_mass: abs_mass(s, &sim.mesh),
        tv: total_variation_means(s, &sim.mesh),
    };
    let mut series = vec![row(&state)];
    let mut snapshots = Vec::new();
    let mut steps = 0usize;
    for &target in &targets {
        let tol = 1e-12 * target.max(1.0);
        while state.time < target - tol {
            let context = |e: Error| Error::Solver {
                step: steps + 1,
                time: state.time,
                source: Box::new(e),
            };
            let nominal = sim.nominal_dt(&state).map_err(context)?;
            let remaining = target - state.time;
            let dt = if nominal >= remaining - tol { remaining } else { nominal };
            let mut next = sim.step(&state, dt).map_err(context)?;
            if next.as_slice().iter().any(|c| !c.is_finite()) {
                return Err(context(Error::Internal("non-finite coefficients".into())));
            }
            if target - next.time <= tol {
                next.time = target;
            }
            state = next;
            steps += 1;
            series.push(row(&state));
        }
        if config.snapshots.iter().any(|&t| t == target) {
            snapshots.push(state.clone());
        }
    }
    let report = sim.report(&state)?;
    Ok(RunResult {
        config: config.clone(),
        mesh: sim.mesh,
        state,
        report,
        series,
        snapshots,
        steps,
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub dx_coarse: f64,
    pub ratio: usize,
    pub errors: Vars,
    /// Rate against the previous `dx` at the same ratio.
    pub rates: Option<Vars>,
    pub mass_drift: Vars,
}

/// Errors for every `(dx, M)` pair; runs execute in parallel.
pub fn convergence_study(base: &RunConfig, dxs: &[f64], ratios: &[usize]) -> Result<Vec<StudyRow>> {
    let jobs: Vec<(f64, usize)> = dxs.iter().flat_map(|&dx| ratios.iter().map(move |&m| (dx, m))).collect();
    let results = jobs
        .par_iter()
        .map(|&(dx, m)| {
            let cfg = RunConfig {
                dx_coarse: dx,
                ratio: m,
                ..base.clone()
            };
            let run = run_case(&cfg)?;
            let err = run
                .report
                .rel_l1_error
                .ok_or_else(|| Error::Config(format!("case {} has no reference solution", base.case)))?;
            Ok((err, run.max_relative_mass_drift()))
        })
        .collect::<Result<Vec<_>>>()?;
    let nvar = base.case.model().nvar();
    let mut rows: Vec<StudyRow> = Vec::with_capacity(jobs.len());
    for (i, (&(dx, m), (errors, drift))) in jobs.iter().zip(results).enumerate() {
        let prev = i.checked_sub(ratios.len()).map(|p| (jobs[p].0, rows[p].errors));
        let rates = match prev {
            Some((pdx, perr)) => {
                let mut r = [0.0; 3];
                for v in 0..nvar {
                    r[v] = convergence_rates(&[(pdx, perr[v]), (dx, errors[v])])?[0];
                }
                Some(r)
            }
            None => None,
        };
        rows.push(StudyRow {
            dx_coarse: dx,
            ratio: m,
            errors,
            rates,
            mass_drift: drift,
        });
    }
    Ok(rows)
}

fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn var_names(case: Case) -> &'static [&'static str] {
    match case.model().nvar() {
        1 => &["u"],
        _ => &["density", "velocity", "pressure"],
    }
}

fn conserved_names(case: Case) -> &'static [&'static str] {
    match case.model().nvar() {
        1 => &["u"],
        _ => &["density", "momentum", "energy"],
    }
}

fn header(config: &RunConfig) -> String {
    format!("# config-sha256 {}\n", config.hash())
}

pub fn errors_csv(config: &RunConfig, rows: &[StudyRow]) -> String {
    let mut s = header(config);
    s.push_str("case,order,dx_coarse,M,variable,rel_l1,rate\n");
    for r in rows {
        for (v, name) in var_names(config.case).iter().enumerate() {
            let rate = r.rates.map(|x| num(x[v])).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{},{},{},{}", config.case, config.order, num(r.dx_coarse), r.ratio, name, num(r.errors[v]), rate);
        }
    }
    s
}

pub fn series_csv(config: &RunConfig, series: &[SeriesRow]) -> String {
    let names = conserved_names(config.case);
    let mut s = header(config);
    s.push_str("time");
    for n in names {
        let _ = write!(s, ",mass_{n}");
    }
    for n in names {
        let _ = write!(s, ",tv_{n}");
    }
    s.push('\n');
    for row in series {
        s.push_str(&num(row.time));
        for v in 0..names.len() {
            let _ = write!(s, ",{}", num(row.mass[v]));
        }
        for v in 0..names.len() {
            let _ = write!(s, ",{}", num(row.tv[v]));
        }
        s.push('\n');
    }
    s
}

pub fn snapshot_csv(config: &RunConfig, mesh: &MeshPartition, state: &SolutionState) -> String {
    let names = conserved_names(config.case);
    let mut s = header(config);
    s.push_str("x_left,x_right");
    for prefix in ["mean", "trace_left", "trace_right"] {
        for n in names {
            let _ = write!(s, ",{prefix}_{n}");
        }
    }
    s.push('\n');
    for j in 0..mesh.ncells() {
        let (a, b) = mesh.cell_bounds(j);
        let _ = write!(s, "{},{}", num(a), num(b));
        for vals in [state.mean(j), state.left_trace(j), state.right_trace(j)] {
            for v in vals.iter().take(names.len()) {
                let _ = write!(s, ",{}", num(*v));
            }
        }
        s.push('\n');
    }
    s
}

/// Write `errors.csv`, `series.csv` and one `snapshot_<T>.csv` per snapshot.
pub fn write_outputs(result: &RunResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let cfg = &result.config;
    if let Some(errors) = result.report.rel_l1_error {
        let row = StudyRow {
            dx_coarse: cfg.dx_coarse,
            ratio: cfg.ratio,
            errors,
            rates: None,
            mass_drift: result.max_relative_mass_drift(),
        };
        fs::write(dir.join("errors.csv"), errors_csv(cfg, &[row]))?;
    }
    fs::write(dir.join("series.csv"), series_csv(cfg, &result.series))?;
    for snap in &result.snapshots {
        fs::write(dir.join(format!("snapshot_{}.csv", snap.time)), snapshot_csv(cfg, &result.mesh, snap))?;
    }
    Ok(())
}
