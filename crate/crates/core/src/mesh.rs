//! 1D mesh with coarse and locally refined regions.

use crate::error::{Error, Result};
use crate::state::Vars;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    Periodic,
    /// Zero-gradient: the exterior trace copies the interior one.
    Outflow,
    /// Mirror state with the momentum component negated.
    Reflective,
    /// Fixed exterior state.
    Inflow(Vars),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundaries {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
}

impl Boundaries {
    pub fn periodic() -> Self {
        Self::uniform(BoundaryKind::Periodic)
    }

    pub fn uniform(kind: BoundaryKind) -> Self {
        Self {
            left: kind,
            right: kind,
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.left == BoundaryKind::Periodic
    }
}

/// Requested sub-interval `[lo, hi)` refined by `ratio` in space and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    pub lo: f64,
    pub hi: f64,
    pub ratio: usize,
}

impl RegionSpec {
    pub fn new(lo: f64, hi: f64, ratio: usize) -> Self {
        Self { lo, hi, ratio }
    }
}

/// How sub-interval boundaries that miss a coarse edge are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alignment {
    /// Reject boundaries farther than 1e-12 from a coarse edge.
    #[default]
    Strict,
    /// Move boundaries to the nearest coarse edge; exact ties grow the finer side.
    Snap,
}

/// Contiguous run of cells on the (possibly periodic) cell ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
}

impl Segment {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    /// Cell index of the `i`-th member on a ring of `n` cells.
    pub fn cell(&self, i: usize, n: usize) -> usize {
        (self.start + i) % n
    }

    pub fn first(&self) -> usize {
        self.start
    }

    pub fn last(&self, n: usize) -> usize {
        (self.start + self.len - 1) % n
    }

    pub fn cells(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |i| (self.start + i) % n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub segment: Segment,
    pub ratio: usize,
}

#[derive(Debug, Clone)]
pub struct MeshPartition {
    edges: Vec<f64>,
    sizes: Vec<f64>,
    regions: Vec<Region>,
    region_of: Vec<usize>,
    interface_indices: Vec<usize>,
    boundaries: Boundaries,
    dx_coarse: f64,
}

const ALIGN_TOL: f64 = 1e-12;

impl MeshPartition {
    /// Uniform single-region mesh.
    pub fn uniform(lo: f64, hi: f64, ncells: usize, boundaries: Boundaries) -> Result<Self> {
        if ncells == 0 {
            return Err(Error::Mesh("at least one cell is required".into()));
        }
        let dx = (hi - lo) / ncells as f64;
        build_partition(
            (lo, hi),
            dx,
            &[RegionSpec::new(lo, hi, 1)],
            boundaries,
            Alignment::Strict,
        )
    }

    pub fn ncells(&self) -> usize {
        self.sizes.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn size(&self, j: usize) -> f64 {
        self.sizes[j]
    }

    pub fn center(&self, j: usize) -> f64 {
        0.5 * (self.edges[j] + self.edges[j + 1])
    }

    pub fn cell_bounds(&self, j: usize) -> (f64, f64) {
        (self.edges[j], self.edges[j + 1])
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region_of(&self, j: usize) -> &Region {
        &self.regions[self.region_of[j]]
    }

    pub fn region_index(&self, j: usize) -> usize {
        self.region_of[j]
    }

    pub fn ratio_of(&self, j: usize) -> usize {
        self.region_of(j).ratio
    }

    /// Coarse cells that share an edge with a refined region.
    pub fn interface_indices(&self) -> &[usize] {
        &self.interface_indices
    }

    pub fn boundaries(&self) -> Boundaries {
        self.boundaries
    }

    pub fn is_periodic(&self) -> bool {
        self.boundaries.is_periodic()
    }

    pub fn dx_coarse(&self) -> f64 {
        self.dx_coarse
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.edges[0], self.edges[self.ncells()])
    }

    pub fn min_size(&self) -> f64 {
        self.sizes.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_ratio(&self) -> usize {
        self.regions.iter().map(|r| r.ratio).max().unwrap_or(1)
    }

    /// True when every region advances with the coarse step.
    pub fn is_single_rate(&self) -> bool {
        self.regions.iter().all(|r| r.ratio == 1)
    }

    pub fn left_neighbor(&self, j: usize) -> Option<usize> {
        match (j, self.is_periodic()) {
            (0, true) => Some(self.ncells() - 1),
            (0, false) => None,
            _ => Some(j - 1),
        }
    }

    pub fn right_neighbor(&self, j: usize) -> Option<usize> {
        let n = self.ncells();
        match (j + 1 == n, self.is_periodic()) {
            (true, true) => Some(0),
            (true, false) => None,
            _ => Some(j + 1),
        }
    }

    /// The whole mesh as one segment.
    pub fn all_cells(&self) -> Segment {
        Segment::new(0, self.ncells())
    }
}

/// Build the mesh for `domain` tiled by `regions`; refined regions use cells
/// of size `dx_coarse / ratio`.
pub fn build_partition(
    domain: (f64, f64),
    dx_coarse: f64,
    regions: &[RegionSpec],
    boundaries: Boundaries,
    alignment: Alignment,
) -> Result<MeshPartition> {
    let (lo, hi) = domain;
    if !(dx_coarse > 0.0) || !dx_coarse.is_finite() {
        return Err(Error::Mesh(format!("dx_coarse must be positive, got {dx_coarse}")));
    }
    if !(hi > lo) {
        return Err(Error::Mesh(format!("empty domain [{lo}, {hi}]")));
    }
    if regions.is_empty() {
        return Err(Error::Mesh("no regions given".into()));
    }
    if boundaries.left.eq(&BoundaryKind::Periodic) != boundaries.right.eq(&BoundaryKind::Periodic) {
        return Err(Error::Mesh("periodic boundaries must be set on both sides".into()));
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let n_total_f = (hi - lo) / dx_coarse;
    let n_total = n_total_f.round();
    if n_total < 1.0 || (n_total_f - n_total).abs() > 1e-9 * n_total.max(1.0) {
        return Err(Error::Mesh(format!(
            "domain length {} is not a multiple of dx_coarse {dx_coarse}",
            hi - lo
        )));
    }
    let n_total = n_total as usize;

    for (i, r) in regions.iter().enumerate() {
        if r.ratio == 0 {
            return Err(Error::Mesh(format!("region {i} has ratio 0")));
        }
        if !(r.hi > r.lo) {
            return Err(Error::Mesh(format!("region {i} is empty: [{}, {})", r.lo, r.hi)));
        }
    }
    if (regions[0].lo - lo).abs() > ALIGN_TOL * scale
        || (regions[regions.len() - 1].hi - hi).abs() > ALIGN_TOL * scale
    {
        return Err(Error::Mesh("regions do not cover the domain".into()));
    }
    for w in regions.windows(2) {
        let gap = w[1].lo - w[0].hi;
        if gap.abs() > ALIGN_TOL * scale {
            return Err(Error::Mesh(if gap < 0.0 {
                format!("regions overlap at [{}, {}]", w[1].lo, w[0].hi)
            } else {
                format!("gap between regions at [{}, {}]", w[0].hi, w[1].lo)
            }));
        }
    }

    // Merge neighbours with equal ratio; their shared boundary is irrelevant.
    let mut merged: Vec<RegionSpec> = Vec::with_capacity(regions.len());
    for r in regions {
        match merged.last_mut() {
            Some(prev) if prev.ratio == r.ratio => prev.hi = r.hi,
            _ => merged.push(*r),
        }
    }

    // Region boundaries in coarse-cell units.
    let mut cuts = vec![0usize];
    for w in merged.windows(2) {
        let b = w[0].hi;
        let k_f = (b - lo) / dx_coarse;
        let k_near = k_f.round();
        let snapped = lo + k_near * dx_coarse;
        let k = if (snapped - b).abs() <= ALIGN_TOL * scale {
            k_near
        } else {
            match alignment {
                Alignment::Strict => {
                    return Err(Error::Mesh(format!(
                        "region boundary {b} is not aligned to a coarse cell edge"
                    )))
                }
                Alignment::Snap => {
                    let frac = k_f - k_f.floor();
                    if (frac - 0.5).abs() < 1e-9 {
                        // Tie: move the boundary into the coarser neighbour.
                        if w[1].ratio > w[0].ratio {
                            k_f.floor()
                        } else {
                            k_f.ceil()
                        }
                    } else {
                        k_near
                    }
                }
            }
        };
        cuts.push(k as usize);
    }
    cuts.push(n_total);
    for (i, w) in cuts.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::Mesh(format!(
                "region {i} has no coarse cells after aligning to dx_coarse"
            )));
        }
    }

    let mut edges = Vec::new();
    let mut sizes = Vec::new();
    let mut built: Vec<Region> = Vec::new();
    let mut region_of = Vec::new();
    for (ri, spec) in merged.iter().enumerate() {
        let start = sizes.len();
        let k0 = cuts[ri];
        let k1 = cuts[ri + 1];
        let region_lo = lo + k0 as f64 * dx_coarse;
        let region_hi = if ri + 1 == merged.len() {
            hi
        } else {
            lo + k1 as f64 * dx_coarse
        };
        let count = (k1 - k0) * spec.ratio;
        let h = (region_hi - region_lo) / count as f64;
        for i in 0..count {
            edges.push(region_lo + i as f64 * h);
        }
        for i in 0..count {
            let right = if i + 1 == count {
                region_hi
            } else {
                region_lo + (i + 1) as f64 * h
            };
            sizes.push(right - (region_lo + i as f64 * h));
            region_of.push(ri);
        }
        built.push(Region {
            segment: Segment::new(start, count),
            ratio: spec.ratio,
        });
    }
    edges.push(hi);

    // Adjacent refined regions with different ratios need nested stepping.
    let adjacent_fine = |a: &Region, b: &Region| a.ratio > 1 && b.ratio > 1 && a.ratio != b.ratio;
    for w in built.windows(2) {
        if adjacent_fine(&w[0], &w[1]) {
            return Err(Error::Unsupported(
                "adjacent refined regions with different ratios".into(),
            ));
        }
    }
    let n = sizes.len();
    if boundaries.is_periodic() && built.len() >= 2 {
        let first = &built[0];
        let last = &built[built.len() - 1];
        if adjacent_fine(first, last) {
            return Err(Error::Unsupported(
                "adjacent refined regions with different ratios across the periodic seam".into(),
            ));
        }
        if first.ratio == last.ratio {
            let first = built.remove(0);
            let last = built.last_mut().unwrap();
            last.segment.len += first.segment.len;
            for r in region_of.iter_mut() {
                *r = if *r == 0 { built.len() - 1 } else { *r - 1 };
            }
        }
    }

    let mut mesh = MeshPartition {
        edges,
        sizes,
        regions: built,
        region_of,
        interface_indices: Vec::new(),
        boundaries,
        dx_coarse,
    };
    mesh.interface_indices = (0..n)
        .filter(|&j| {
            mesh.ratio_of(j) == 1
                && [mesh.left_neighbor(j), mesh.right_neighbor(j)]
                    .into_iter()
                    .flatten()
                    .any(|nb| mesh.ratio_of(nb) > 1)
        })
        .collect();
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn advection_layout_fine_left() {
        let mesh = build_partition(
            (-1.0, 1.0),
            0.2,
            &[RegionSpec::new(-1.0, 0.0, 4), RegionSpec::new(0.0, 1.0, 1)],
            Boundaries::uniform(BoundaryKind::Outflow),
            Alignment::Strict,
        )
        .unwrap();
        assert_eq!(mesh.ncells(), 25);
        for j in 0..20 {
            assert!(rel(mesh.size(j), 0.05) < 1e-12);
        }
        for j in 20..25 {
            assert!(rel(mesh.size(j), 0.2) < 1e-12);
        }
        assert_eq!(mesh.interface_indices(), &[20]);
        assert_eq!(mesh.edges()[20], 0.0);
    }

    #[test]
    fn periodic_layout_has_two_interfaces() {
        let mesh = build_partition(
            (-1.0, 1.0),
            0.2,
            &[RegionSpec::new(-1.0, 0.0, 2), RegionSpec::new(0.0, 1.0, 1)],
            Boundaries::periodic(),
            Alignment::Strict,
        )
        .unwrap();
        assert_eq!(mesh.ncells(), 15);
        assert_eq!(mesh.interface_indices(), &[10, 14]);
        assert_eq!(mesh.left_neighbor(0), Some(14));
        assert_eq!(mesh.right_neighbor(14), Some(0));
    }

    #[test]
    fn single_region_is_uniform() {
        let mesh = build_partition(
            (0.0, 1.0),
            0.1,
            &[RegionSpec::new(0.0, 1.0, 1)],
            Boundaries::periodic(),
            Alignment::Strict,
        )
        .unwrap();
        assert_eq!(mesh.ncells(), 10);
        assert!(mesh.interface_indices().is_empty());
        assert!(mesh.is_single_rate());
    }

    #[test]
    fn blast_layout() {
        let mesh = build_partition(
            (0.0, 1.0),
            1.0 / 200.0,
            &[
                RegionSpec::new(0.0, 0.2, 1),
                RegionSpec::new(0.2, 0.9, 2),
                RegionSpec::new(0.9, 1.0, 1),
            ],
            Boundaries::uniform(BoundaryKind::Reflective),
            Alignment::Strict,
        )
        .unwrap();
        assert_eq!(mesh.ncells(), 40 + 280 + 20);
        assert_eq!(mesh.interface_indices(), &[39, 320]);
        let total: f64 = mesh.sizes().iter().sum();
        assert!(rel(total, 1.0) < 1e-14);
    }

    #[test]
    fn rejects_overlap_gap_and_misalignment() {
        let b = Boundaries::uniform(BoundaryKind::Outflow);
        let overlap = [RegionSpec::new(0.0, 0.6, 1), RegionSpec::new(0.5, 1.0, 2)];
        assert!(build_partition((0.0, 1.0), 0.1, &overlap, b, Alignment::Strict).is_err());
        let gap = [RegionSpec::new(0.0, 0.4, 1), RegionSpec::new(0.5, 1.0, 2)];
        assert!(build_partition((0.0, 1.0), 0.1, &gap, b, Alignment::Strict).is_err());
        let off = [RegionSpec::new(0.0, 0.45, 1), RegionSpec::new(0.45, 1.0, 2)];
        assert!(build_partition((0.0, 1.0), 0.1, &off, b, Alignment::Strict).is_err());
        assert!(build_partition((0.0, 1.0), 0.0, &off, b, Alignment::Strict).is_err());
    }

    #[test]
    fn snapping_ties_grow_fine_region() {
        // 4.0 sits half-way between coarse edges 3.9 and 4.1 when dx = 0.2.
        let mesh = build_partition(
            (-4.9, 5.1),
            0.2,
            &[
                RegionSpec::new(-4.9, -2.9, 1),
                RegionSpec::new(-2.9, 4.0, 2),
                RegionSpec::new(4.0, 5.1, 1),
            ],
            Boundaries::uniform(BoundaryKind::Outflow),
            Alignment::Snap,
        )
        .unwrap();
        let fine = &mesh.regions()[1];
        assert_eq!(fine.segment.len, 35 * 2);
        let last_fine = fine.segment.last(mesh.ncells());
        assert!((mesh.edges()[last_fine + 1] - 4.1).abs() < 1e-12);
    }

    #[test]
    fn periodic_seam_merges_equal_ratios() {
        let mesh = build_partition(
            (0.0, 1.0),
            0.1,
            &[
                RegionSpec::new(0.0, 0.2, 1),
                RegionSpec::new(0.2, 0.6, 2),
                RegionSpec::new(0.6, 1.0, 1),
            ],
            Boundaries::periodic(),
            Alignment::Strict,
        )
        .unwrap();
        assert_eq!(mesh.regions().len(), 2);
        let coarse = mesh.regions().iter().find(|r| r.ratio == 1).unwrap();
        assert_eq!(coarse.segment.len, 6);
        assert_eq!(mesh.ratio_of(0), 1);
        assert_eq!(mesh.ratio_of(2), 2);
        assert_eq!(mesh.interface_indices(), &[1, 10]);
    }
}
