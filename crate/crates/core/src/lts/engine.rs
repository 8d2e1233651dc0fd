//! The three-step local time stepping scheme: interface prediction, coarse
//! and fine advancement, and the conservative interface correction.

use rayon::prelude::*;

use crate::dg::{boundary_value, max_wave_speed, residual_segment, segment_exteriors, Discretization, EdgeOverrides};
use crate::error::{Error, Result};
use crate::limiter::{apply_limiter, limit_cell, limit_trace, LimiterConfig, MeanOverrides, TraceSide};
use crate::lts::predictor::{build_predictor_table_with, PredictorTable, Rk54Predictor};
use crate::mesh::{MeshPartition, Segment};
use crate::ssprk::{combine_stage, gts_step_with_alpha, RkScheme};
use crate::state::{cell_left_trace, cell_mean, cell_right_trace, SolutionState, Vars};

/// What lies across one edge of an interface cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Coarse(usize),
    /// Index into the engine's fine regions.
    Fine(usize),
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfaceCell {
    pub cell: usize,
    pub left: Side,
    pub right: Side,
}

/// What lies across one end of a fine region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FineEnd {
    /// Index into the engine's interface cells.
    Interface(usize),
    Boundary,
}

#[derive(Debug, Clone)]
pub struct FineRegion {
    pub segment: Segment,
    pub ratio: usize,
    pub left: FineEnd,
    pub right: FineEnd,
    pub table: PredictorTable,
}

/// Result of advancing one fine region over a coarse step.
#[derive(Debug, Clone)]
pub struct FineAdvance {
    /// Full-size state whose cells in the region hold the new solution.
    pub state: SolutionState,
    /// Flux through the region's left end, indexed `[p][nu]`.
    pub left_fluxes: Vec<Vec<Vars>>,
    pub right_fluxes: Vec<Vec<Vars>>,
}

#[derive(Debug, Clone)]
pub struct LtsEngine {
    mesh: MeshPartition,
    disc: Discretization,
    scheme: RkScheme,
    limiter: LimiterConfig,
    interface_limiting: bool,
    interfaces: Vec<InterfaceCell>,
    coarse_segments: Vec<Segment>,
    coarse_cells: Vec<usize>,
    fine: Vec<FineRegion>,
}

impl LtsEngine {
    pub fn new(
        mesh: &MeshPartition,
        disc: &Discretization,
        scheme: &RkScheme,
        limiter: LimiterConfig,
    ) -> Result<Self> {
        let n = mesh.ncells();
        let regions = mesh.regions();
        let mut fine_of_region = vec![None; regions.len()];
        let mut fine = Vec::new();
        for (ri, r) in regions.iter().enumerate() {
            if r.ratio > 1 {
                fine_of_region[ri] = Some(fine.len());
                fine.push(FineRegion {
                    segment: r.segment,
                    ratio: r.ratio,
                    left: FineEnd::Boundary,
                    right: FineEnd::Boundary,
                    table: build_predictor_table_with(scheme, r.ratio, Rk54Predictor::default())?,
                });
            }
        }

        let side_of = |nb: Option<usize>| match nb {
            None => Side::Boundary,
            Some(c) => match fine_of_region[mesh.region_index(c)] {
                Some(fi) => Side::Fine(fi),
                None => Side::Coarse(c),
            },
        };
        let interfaces: Vec<InterfaceCell> = mesh
            .interface_indices()
            .iter()
            .map(|&j| InterfaceCell {
                cell: j,
                left: side_of(mesh.left_neighbor(j)),
                right: side_of(mesh.right_neighbor(j)),
            })
            .collect();
        let interface_at = |c: usize| interfaces.iter().position(|ic| ic.cell == c);

        for region in fine.iter_mut() {
            let seg = region.segment;
            let end = |nb: Option<usize>| -> Result<FineEnd> {
                match nb {
                    None => Ok(FineEnd::Boundary),
                    Some(c) if mesh.ratio_of(c) > 1 => Ok(FineEnd::Boundary),
                    Some(c) => interface_at(c).map(FineEnd::Interface).ok_or_else(|| {
                        Error::Internal(format!("cell {c} borders a fine region but is not an interface"))
                    }),
                }
            };
            region.left = end(mesh.left_neighbor(seg.first()))?;
            region.right = end(mesh.right_neighbor(seg.last(n)))?;
        }

        let free: Vec<bool> = (0..n)
            .map(|j| mesh.ratio_of(j) == 1 && interface_at(j).is_none())
            .collect();
        let coarse_segments = runs(&free, mesh.is_periodic());
        let mut coarse_cells: Vec<usize> = (0..n).filter(|&j| mesh.ratio_of(j) == 1).collect();
        coarse_cells.sort_unstable();

        Ok(Self {
            mesh: mesh.clone(),
            disc: disc.clone(),
            scheme: scheme.clone(),
            limiter,
            interface_limiting: false,
            interfaces,
            coarse_segments,
            coarse_cells,
            fine,
        })
    }

    /// Limit the interface cell's local stage values, for data that is not
    /// smooth across the interface.
    pub fn with_interface_limiting(mut self, on: bool) -> Self {
        self.interface_limiting = on;
        self
    }

    pub fn with_rk54_predictor(mut self, variant: Rk54Predictor) -> Result<Self> {
        for region in self.fine.iter_mut() {
            region.table = build_predictor_table_with(&self.scheme, region.ratio, variant)?;
        }
        Ok(self)
    }

    pub fn interfaces(&self) -> &[InterfaceCell] {
        &self.interfaces
    }

    pub fn fine_regions(&self) -> &[FineRegion] {
        &self.fine
    }

    pub fn coarse_segments(&self) -> &[Segment] {
        &self.coarse_segments
    }

    /// One coarse step of size `dt`.
    pub fn step(&self, state: &SolutionState, dt: f64) -> Result<SolutionState> {
        let alpha = max_wave_speed(&self.disc, state)?;
        if self.mesh.is_single_rate() {
            return gts_step_with_alpha(state, dt, &self.scheme, &self.disc, &self.limiter, &self.mesh, alpha);
        }
        let s = self.scheme.stages;
        let n = self.mesh.ncells();
        let coarse = self.advance_coarse(state, dt, alpha)?;
        let fines = (0..self.fine.len())
            .into_par_iter()
            .map(|fi| self.advance_fine(fi, state, &coarse, dt, alpha))
            .collect::<Result<Vec<_>>>()?;

        let mut out = coarse[s].clone();
        for (region, adv) in self.fine.iter().zip(&fines) {
            for c in region.segment.cells(n) {
                out.cell_mut(c).copy_from_slice(adv.state.cell(c));
            }
        }
        for k in 0..self.interfaces.len() {
            let corrected = self.correct_interface(k, state, &coarse, &fines, dt, alpha)?;
            out.cell_mut(self.interfaces[k].cell).copy_from_slice(&corrected);
        }
        let all = self.mesh.all_cells();
        apply_limiter(&mut out, &self.mesh, &self.disc.model, &self.limiter, all, MeanOverrides::default())?;
        out.time = state.time + dt;
        Ok(out)
    }

    /// Coarse-step stage values `0..=s`. Interface cells are evolved locally
    /// with their own traces on both edges; the remaining coarse cells take
    /// their exterior traces from those. Fine cells keep the input values.
    pub fn advance_coarse(&self, state: &SolutionState, dt: f64, alpha: f64) -> Result<Vec<SolutionState>> {
        let s = self.scheme.stages;
        let disc = &self.disc;
        let model = &disc.model;
        let mut stages = vec![state.clone()];
        let mut residuals = Vec::with_capacity(s);
        for i in 1..=s {
            let prev = &stages[i - 1];
            let mut r = state.zeros_like();
            for &seg in &self.coarse_segments {
                let (le, re) = segment_exteriors(disc, &self.mesh, prev, seg, EdgeOverrides::default());
                residual_segment(disc, &self.mesh, prev, seg, &le, &re, alpha, &mut r)?;
            }
            for ic in &self.interfaces {
                let j = ic.cell;
                let (ur, ul) = prev.edge_values(j);
                let hl = disc.numerical_flux(&ul, &ul, alpha).map_err(|e| e.in_cell(j))?;
                let hr = disc.numerical_flux(&ur, &ur, alpha).map_err(|e| e.in_cell(j))?;
                disc.cell_residual(prev.cell(j), self.mesh.size(j), &hl, &hr, r.cell_mut(j))
                    .map_err(|e| e.in_cell(j))?;
            }
            residuals.push(r);

            let mut next = state.clone();
            combine_stage(&self.scheme, i, dt, &stages, &residuals, self.coarse_cells.iter().copied(), &mut next);
            if i < s {
                for &seg in &self.coarse_segments {
                    apply_limiter(&mut next, &self.mesh, model, &self.limiter, seg, MeanOverrides::default())?;
                }
            }
            if self.interface_limiting {
                for ic in &self.interfaces {
                    let j = ic.cell;
                    let mean = next.mean(j);
                    let across = |side: Side, nb: Option<usize>, kind| match (side, nb) {
                        (Side::Coarse(c), _) => next.mean(c),
                        (Side::Fine(_), Some(c)) => state.mean(c),
                        _ => boundary_value(kind, model, &mean),
                    };
                    let b = self.mesh.boundaries();
                    let lm = across(ic.left, self.mesh.left_neighbor(j), b.left);
                    let rm = across(ic.right, self.mesh.right_neighbor(j), b.right);
                    let nvar = next.nvar();
                    let h = self.mesh.size(j);
                    limit_cell(next.cell_mut(j), nvar, model, &lm, &rm, h, &self.limiter)
                        .map_err(|e| e.in_cell(j))?;
                }
            }
            stages.push(next);
        }
        Ok(stages)
    }

    /// Advance fine region `fi` through its `M` substeps using predicted
    /// interface traces, recording the end fluxes of every substage.
    pub fn advance_fine(
        &self,
        fi: usize,
        state: &SolutionState,
        coarse: &[SolutionState],
        dt: f64,
        alpha: f64,
    ) -> Result<FineAdvance> {
        let region = &self.fine[fi];
        let disc = &self.disc;
        let model = &disc.model;
        let n = self.mesh.ncells();
        let s = self.scheme.stages;
        let m = region.ratio;
        let seg = region.segment;
        let dtf = dt / m as f64;
        let nvar = state.nvar();

        let left = match region.left {
            FineEnd::Interface(ii) => Some(self.slots(ii, TraceSide::Right, region, coarse)),
            FineEnd::Boundary => None,
        };
        let right = match region.right {
            FineEnd::Interface(ii) => Some(self.slots(ii, TraceSide::Left, region, coarse)),
            FineEnd::Boundary => None,
        };
        let mut left = left;
        let mut right = right;

        let mut left_fluxes = vec![vec![[0.0; 3]; s]; m];
        let mut right_fluxes = vec![vec![[0.0; 3]; s]; m];
        let mut cur = state.clone();
        for p in 0..m {
            let mut stages = vec![cur.clone()];
            let mut residuals = Vec::with_capacity(s);
            for i in 1..=s {
                let prev = &stages[i - 1];
                let ov = EdgeOverrides {
                    left: left.as_ref().map(|sl| sl.traces[p * s + i - 1]),
                    right: right.as_ref().map(|sl| sl.traces[p * s + i - 1]),
                };
                let (le, re) = segment_exteriors(disc, &self.mesh, prev, seg, ov);
                let mut r = state.zeros_like();
                let f = residual_segment(disc, &self.mesh, prev, seg, &le, &re, alpha, &mut r)?;
                left_fluxes[p][i - 1] = f.left;
                right_fluxes[p][i - 1] = f.right;
                residuals.push(r);

                let mut next = cur.clone();
                combine_stage(&self.scheme, i, dtf, &stages, &residuals, seg.cells(n), &mut next);
                if !(p + 1 == m && i == s) {
                    let slot = if i < s { p * s + i } else { (p + 1) * s };
                    let mo = MeanOverrides {
                        left: left.as_ref().map(|sl| sl.means[slot]),
                        right: right.as_ref().map(|sl| sl.means[slot]),
                    };
                    apply_limiter(&mut next, &self.mesh, model, &self.limiter, seg, mo)?;
                    if let Some(sl) = left.as_mut() {
                        let fine_mean = next.mean(seg.first());
                        sl.traces[slot] = limit_trace(
                            TraceSide::Right,
                            &sl.traces[slot],
                            &sl.means[slot],
                            &sl.other_means[i],
                            &fine_mean,
                            nvar,
                            model,
                            sl.h,
                            &self.limiter,
                        )
                        .map_err(|e| e.in_cell(sl.cell))?;
                    }
                    if let Some(sl) = right.as_mut() {
                        let fine_mean = next.mean(seg.last(n));
                        sl.traces[slot] = limit_trace(
                            TraceSide::Left,
                            &sl.traces[slot],
                            &sl.means[slot],
                            &fine_mean,
                            &sl.other_means[i],
                            nvar,
                            model,
                            sl.h,
                            &self.limiter,
                        )
                        .map_err(|e| e.in_cell(sl.cell))?;
                    }
                }
                stages.push(next);
            }
            cur = stages.pop().ok_or_else(|| Error::Internal("empty stage list".into()))?;
        }
        Ok(FineAdvance {
            state: cur,
            left_fluxes,
            right_fluxes,
        })
    }

    /// Predicted traces and means of interface `ii` for every `(p, i)`, plus
    /// the coarse-stage means of its neighbour away from `region`.
    fn slots(&self, ii: usize, side: TraceSide, region: &FineRegion, coarse: &[SolutionState]) -> Slots {
        let ic = self.interfaces[ii];
        let j = ic.cell;
        let s = self.scheme.stages;
        let st0 = &coarse[0];
        let (nvar, k) = (st0.nvar(), st0.degree());
        let cells: Vec<&[f64]> = coarse[..s].iter().map(|c| c.cell(j)).collect();
        let mut traces = Vec::with_capacity(region.ratio * s);
        let mut means = Vec::with_capacity(region.ratio * s);
        let mut buf = vec![0.0; st0.cell_stride()];
        for p in 0..region.ratio {
            for i in 0..s {
                region.table.predict(p, i, &cells, &mut buf);
                traces.push(match side {
                    TraceSide::Right => cell_right_trace(&buf, nvar, k),
                    TraceSide::Left => cell_left_trace(&buf, nvar, k),
                });
                means.push(cell_mean(&buf, nvar, k));
            }
        }
        let b = self.mesh.boundaries();
        let (other, kind) = match side {
            TraceSide::Right => (self.mesh.left_neighbor(j), b.left),
            TraceSide::Left => (self.mesh.right_neighbor(j), b.right),
        };
        let other_means = coarse
            .iter()
            .map(|c| match other {
                Some(o) => c.mean(o),
                None => boundary_value(kind, &self.disc.model, &c.mean(j)),
            })
            .collect();
        Slots {
            cell: j,
            h: self.mesh.size(j),
            traces,
            means,
            other_means,
        }
    }

    /// Corrected interface cell after the coarse step: the stage recursion
    /// driven by the local stage values, with fine-side fluxes averaged over
    /// the substeps so that the fluxes balance those seen by the fine region.
    pub fn correct_interface(
        &self,
        ii: usize,
        state: &SolutionState,
        coarse: &[SolutionState],
        fines: &[FineAdvance],
        dt: f64,
        alpha: f64,
    ) -> Result<Vec<f64>> {
        let ic = self.interfaces[ii];
        let j = ic.cell;
        let s = self.scheme.stages;
        let disc = &self.disc;
        let model = &disc.model;
        let b = self.mesh.boundaries();
        let averaged = |fluxes: &[Vec<Vars>], nu: usize| -> Result<Vars> {
            if fluxes.is_empty() || fluxes.iter().any(|row| row.len() <= nu) {
                return Err(Error::Internal(format!("missing recorded flux for stage {nu} at cell {j}")));
            }
            let mut acc = [0.0; 3];
            for row in fluxes {
                for v in 0..3 {
                    acc[v] += row[nu][v];
                }
            }
            let m = fluxes.len() as f64;
            Ok(acc.map(|x| x / m))
        };

        let mut residuals = Vec::with_capacity(s);
        for nu in 0..s {
            let st = &coarse[nu];
            let (ur, ul) = st.edge_values(j);
            let hl = match ic.left {
                Side::Coarse(c) => disc.numerical_flux(&st.right_trace(c), &ul, alpha),
                Side::Fine(fi) => averaged(&fines[fi].right_fluxes, nu),
                Side::Boundary => disc.numerical_flux(&boundary_value(b.left, model, &ul), &ul, alpha),
            }
            .map_err(|e| e.in_cell(j))?;
            let hr = match ic.right {
                Side::Coarse(c) => disc.numerical_flux(&ur, &st.left_trace(c), alpha),
                Side::Fine(fi) => averaged(&fines[fi].left_fluxes, nu),
                Side::Boundary => disc.numerical_flux(&ur, &boundary_value(b.right, model, &ur), alpha),
            }
            .map_err(|e| e.in_cell(j))?;
            let mut r = vec![0.0; st.cell_stride()];
            disc.cell_residual(st.cell(j), self.mesh.size(j), &hl, &hr, &mut r)
                .map_err(|e| e.in_cell(j))?;
            residuals.push(r);
        }

        let mut hat: Vec<Vec<f64>> = vec![state.cell(j).to_vec()];
        for i in 1..=s {
            let (ra, rb) = (&self.scheme.alpha[i - 1], &self.scheme.beta[i - 1]);
            let mut v = vec![0.0; hat[0].len()];
            for nu in 0..i {
                for (o, (u, r)) in v.iter_mut().zip(hat[nu].iter().zip(&residuals[nu])) {
                    *o += ra[nu] * u + rb[nu] * dt * r;
                }
            }
            hat.push(v);
        }
        hat.pop().ok_or_else(|| Error::Internal("empty corrector".into()))
    }
}

struct Slots {
    cell: usize,
    h: f64,
    traces: Vec<Vars>,
    means: Vec<Vars>,
    other_means: Vec<Vars>,
}

/// Maximal runs of `true` entries, joined across the seam when periodic.
fn runs(mask: &[bool], periodic: bool) -> Vec<Segment> {
    let n = mask.len();
    let mut out: Vec<Segment> = Vec::new();
    let mut j = 0;
    while j < n {
        if mask[j] {
            let start = j;
            while j < n && mask[j] {
                j += 1;
            }
            out.push(Segment::new(start, j - start));
        } else {
            j += 1;
        }
    }
    if periodic && out.len() > 1 && mask[0] && mask[n - 1] {
        let first = out.remove(0);
        if let Some(last) = out.last_mut() {
            last.len += first.len;
        }
    }
    out
}

/// One local time step of size `dt` (the coarse step).
pub fn lts_step(
    state: &SolutionState,
    dt: f64,
    scheme: &RkScheme,
    disc: &Discretization,
    mesh: &MeshPartition,
    limiter: &LimiterConfig,
) -> Result<SolutionState> {
    LtsEngine::new(mesh, disc, scheme, *limiter)?.step(state, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::project_initial;
    use crate::flux::{Model, NumericalFlux};
    use crate::mesh::{build_partition, Alignment, Boundaries, RegionSpec};
    use crate::ssprk::gts_step;
    use std::f64::consts::PI;

    fn mass(mesh: &MeshPartition, s: &SolutionState) -> f64 {
        (0..mesh.ncells()).map(|j| mesh.size(j) * s.mean(j)[0]).sum()
    }

    fn advection_mesh(dx: f64, m: usize) -> MeshPartition {
        build_partition(
            (-1.0, 1.0),
            dx,
            &[RegionSpec::new(-1.0, 0.0, m), RegionSpec::new(0.0, 1.0, 1)],
            Boundaries::periodic(),
            Alignment::Strict,
        )
        .unwrap()
    }

    #[test]
    fn runs_wrap_periodic_seam() {
        let mask = [true, true, false, true, false, true];
        assert_eq!(runs(&mask, false).len(), 3);
        let r = runs(&mask, true);
        assert_eq!(r, vec![Segment::new(3, 1), Segment::new(5, 3)]);
    }

    #[test]
    fn layout_of_two_interface_periodic_mesh() {
        let mesh = advection_mesh(0.2, 2);
        let disc = Discretization::new(Model::Advection { speed: 1.0 }, 1, NumericalFlux::lax_friedrichs()).unwrap();
        let e = LtsEngine::new(&mesh, &disc, &RkScheme::for_degree(1).unwrap(), LimiterConfig::disabled()).unwrap();
        assert_eq!(e.interfaces().len(), 2);
        assert_eq!(e.fine_regions().len(), 1);
        let f = &e.fine_regions()[0];
        assert!(matches!(f.left, FineEnd::Interface(_)) && matches!(f.right, FineEnd::Interface(_)));
        assert_eq!(e.coarse_segments().len(), 1);
        assert_eq!(e.coarse_segments()[0].len, 3);
    }

    #[test]
    fn constant_state_is_preserved() {
        for k in 1..=3 {
            let mesh = advection_mesh(0.2, 3);
            let disc = Discretization::new(Model::Burgers, k, NumericalFlux::lax_friedrichs()).unwrap();
            let scheme = RkScheme::for_degree(k).unwrap();
            let u = project_initial(|_| [0.4, 0.0, 0.0], &[], &mesh, 1, k);
            let out = lts_step(&u, 0.02, &scheme, &disc, &mesh, &LimiterConfig::tvb(0.0)).unwrap();
            for (a, b) in out.as_slice().iter().zip(u.as_slice()) {
                assert!((a - b).abs() < 1e-13, "k={k}");
            }
        }
    }

    #[test]
    fn single_rate_matches_global_stepping_bitwise() {
        let mesh = build_partition(
            (-1.0, 1.0),
            0.1,
            &[RegionSpec::new(-1.0, 0.0, 1), RegionSpec::new(0.0, 1.0, 1)],
            Boundaries::periodic(),
            Alignment::Strict,
        )
        .unwrap();
        let disc = Discretization::new(Model::Burgers, 2, NumericalFlux::lax_friedrichs()).unwrap();
        let scheme = RkScheme::for_degree(2).unwrap();
        let u = project_initial(|x| [0.25 + 0.5 * (PI * x).sin(), 0.0, 0.0], &[], &mesh, 1, 2);
        let lim = LimiterConfig::tvb(0.0);
        let a = lts_step(&u, 0.02, &scheme, &disc, &mesh, &lim).unwrap();
        let b = gts_step(&u, 0.02, &scheme, &disc, &lim, &mesh).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn mass_is_conserved_for_every_order() {
        for k in 1..=3 {
            for m in [2, 4] {
                let mesh = advection_mesh(0.1, m);
                let disc = Discretization::new(Model::Burgers, k, NumericalFlux::lax_friedrichs()).unwrap();
                let scheme = RkScheme::for_degree(k).unwrap();
                let engine = LtsEngine::new(&mesh, &disc, &scheme, LimiterConfig::tvb(0.0)).unwrap();
                let mut u = project_initial(|x| [0.25 + 0.5 * (PI * x).sin(), 0.0, 0.0], &[], &mesh, 1, k);
                let m0 = mass(&mesh, &u);
                let dt = scheme.cfl_dt(k, 0.1, 0.75, 1.0);
                for _ in 0..20 {
                    u = engine.step(&u, dt).unwrap();
                }
                assert!((mass(&mesh, &u) - m0).abs() < 1e-13, "k={k} M={m}");
            }
        }
    }

    #[test]
    fn smooth_advection_stays_accurate() {
        let mesh = advection_mesh(0.1, 2);
        let disc = Discretization::new(Model::Advection { speed: 1.0 }, 1, NumericalFlux::lax_friedrichs()).unwrap();
        let scheme = RkScheme::for_degree(1).unwrap();
        let engine = LtsEngine::new(&mesh, &disc, &scheme, LimiterConfig::disabled()).unwrap();
        let mut u = project_initial(|x| [(PI * x).sin(), 0.0, 0.0], &[], &mesh, 1, 1);
        let dt: f64 = 0.1 / 3.0 / 2.0;
        for _ in 0..(2.0 / dt).round() as usize {
            u = engine.step(&u, dt).unwrap();
        }
        let exact = project_initial(|x| [(PI * x).sin(), 0.0, 0.0], &[], &mesh, 1, 1);
        let err: f64 = (0..mesh.ncells()).map(|j| mesh.size(j) * (u.mean(j)[0] - exact.mean(j)[0]).abs()).sum();
        assert!(err < 0.05, "{err}");
    }
}
