//! Lattice-aligned one-dimensional domains.
//!
//! A domain is a finite union of disjoint open intervals whose endpoints sit on
//! the global lattice `{m h : m integer}`. Cells are the lattice cells inside
//! the domain; the cell with lattice index `m` covers `(m h, (m + 1) h)` and has
//! its center at `(m + 1/2) h`. Because every component shares one lattice, the
//! distance between two cells is always an integer multiple of `h`.

use serde::Serialize;

use crate::error::{check_exponent, check_spacing, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Self {
        Interval { left, right }
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }
}

/// How one input interval moved when its endpoints were snapped to the lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapRecord {
    pub index: usize,
    pub original: Interval,
    pub snapped: Interval,
}

impl SnapRecord {
    /// Whether snapping moved an endpoint by more than rounding noise.
    pub fn moved(&self) -> bool {
        let tol = 1e-9 * self.snapped.length();
        (self.original.left - self.snapped.left).abs() > tol
            || (self.original.right - self.snapped.right).abs() > tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    h: f64,
    /// Component endpoints as lattice indices, `[lo, hi)` in cell units.
    spans: Vec<(i64, i64)>,
    intervals: Vec<Interval>,
    lattice: Vec<i64>,
    component: Vec<usize>,
    centers: Vec<f64>,
    snaps: Vec<SnapRecord>,
}

/// Nearest lattice index to `x`, ties toward negative infinity.
fn snap_index(x: f64, h: f64) -> i64 {
    (x / h - 0.5).ceil() as i64
}

impl Grid {
    /// Snaps the given intervals to the lattice of spacing `h` and enumerates
    /// the cells left to right.
    pub fn build(intervals: &[(f64, f64)], h: f64) -> Result<Grid> {
        check_spacing(h)?;
        if intervals.is_empty() {
            return Err(Error::EmptyDomain);
        }

        let mut snapped = Vec::with_capacity(intervals.len());
        for (index, &(left, right)) in intervals.iter().enumerate() {
            if !(left.is_finite() && right.is_finite() && right > left) {
                return Err(Error::InvalidInterval { index, left, right });
            }
            let lo = snap_index(left, h);
            let hi = snap_index(right, h);
            if hi <= lo {
                return Err(Error::IntervalCollapsed {
                    index,
                    left,
                    right,
                    h,
                });
            }
            snapped.push((index, lo, hi));
        }
        snapped.sort_by_key(|&(_, lo, _)| lo);

        for pair in snapped.windows(2) {
            let (_, lo0, hi0) = pair[0];
            let (_, lo1, hi1) = pair[1];
            if lo1 <= hi0 {
                return Err(Error::Overlap(
                    lo0 as f64 * h,
                    hi0 as f64 * h,
                    lo1 as f64 * h,
                    hi1 as f64 * h,
                ));
            }
        }

        let mut snaps: Vec<SnapRecord> = snapped
            .iter()
            .map(|&(index, lo, hi)| SnapRecord {
                index,
                original: Interval::new(intervals[index].0, intervals[index].1),
                snapped: Interval::new(lo as f64 * h, hi as f64 * h),
            })
            .collect();
        snaps.sort_by_key(|r| r.index);

        let spans: Vec<(i64, i64)> = snapped.iter().map(|&(_, lo, hi)| (lo, hi)).collect();
        let mut lattice = Vec::new();
        let mut component = Vec::new();
        for (c, &(lo, hi)) in spans.iter().enumerate() {
            for m in lo..hi {
                lattice.push(m);
                component.push(c);
            }
        }
        let centers = lattice.iter().map(|&m| (m as f64 + 0.5) * h).collect();
        let intervals = spans
            .iter()
            .map(|&(lo, hi)| Interval::new(lo as f64 * h, hi as f64 * h))
            .collect();

        Ok(Grid {
            h,
            spans,
            intervals,
            lattice,
            component,
            centers,
            snaps,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.lattice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattice.is_empty()
    }

    /// Snapped components, sorted ascending.
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Snapped components as `(left, right)` pairs, suitable for [`Grid::build`].
    pub fn interval_pairs(&self) -> Vec<(f64, f64)> {
        self.intervals.iter().map(|i| (i.left, i.right)).collect()
    }

    pub fn snap_report(&self) -> &[SnapRecord] {
        &self.snaps
    }

    /// Cell centers `x_i`, left to right.
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Global lattice index of each cell.
    pub fn lattice_indices(&self) -> &[i64] {
        &self.lattice
    }

    /// Component (0-based, left to right) owning each cell.
    pub fn component_of(&self) -> &[usize] {
        &self.component
    }

    pub fn component_count(&self) -> usize {
        self.spans.len()
    }

    /// Cell index range of component `c`.
    pub fn component_cells(&self, c: usize) -> std::ops::Range<usize> {
        let start: usize = self.spans[..c]
            .iter()
            .map(|&(lo, hi)| (hi - lo) as usize)
            .sum();
        let (lo, hi) = self.spans[c];
        start..start + (hi - lo) as usize
    }

    /// Distance from the leftmost to the rightmost endpoint.
    pub fn diam(&self) -> f64 {
        let lo = self.spans.first().map(|s| s.0).unwrap_or(0);
        let hi = self.spans.last().map(|s| s.1).unwrap_or(0);
        (hi - lo) as f64 * self.h
    }

    /// Lengths of the bounded complement intervals between components.
    pub fn gaps(&self) -> Vec<f64> {
        self.spans
            .windows(2)
            .map(|w| (w[1].0 - w[0].1) as f64 * self.h)
            .collect()
    }

    /// Total measure `n h`.
    pub fn measure(&self) -> f64 {
        self.len() as f64 * self.h
    }

    /// Lattice span `max index - min index` over all cells, the largest index
    /// distance the operator needs a weight for.
    pub fn lattice_span(&self) -> u64 {
        match (self.lattice.first(), self.lattice.last()) {
            (Some(a), Some(b)) => (b - a) as u64,
            _ => 0,
        }
    }
}

/// Result of rounding a mass constraint to a whole number of cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassSnap {
    pub k: usize,
    pub beta_eff: f64,
    pub discrepancy: f64,
}

/// Rounds `beta` to `k h` with `k` in `[1, n]`.
pub fn snap_mass(grid: &Grid, beta: f64) -> Result<MassSnap> {
    let max = grid.measure();
    // allow representation error when beta is meant to be the full measure
    if !(beta > 0.0 && beta <= max * (1.0 + 1e-12)) {
        return Err(Error::MassOutOfRange { beta, max });
    }
    let k = ((beta / grid.h()).round() as usize).clamp(1, grid.len());
    let beta_eff = k as f64 * grid.h();
    Ok(MassSnap {
        k,
        beta_eff,
        discrepancy: (beta - beta_eff).abs(),
    })
}

/// The Poincaré constant `C(1, s, D) = min_B diam(D ∪ B)^{1+2s} / |B|` over
/// intervals `B` in the complement of `D`.
///
/// In one dimension the minimum is attained either by an exterior interval of
/// length `diam / (2s)` touching the hull, or by filling one interior gap.
pub fn poincare_constant(grid: &Grid, s: f64) -> Result<f64> {
    check_exponent(s)?;
    let d = grid.diam();
    let p = 1.0 + 2.0 * s;
    let exterior = 2.0 * s * d.powf(2.0 * s) * (1.0 + 1.0 / (2.0 * s)).powf(p);
    Ok(grid
        .gaps()
        .into_iter()
        .map(|g| d.powf(p) / g)
        .fold(exterior, f64::min))
}
