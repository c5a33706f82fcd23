//! Discrete rearrangement class: densities `0 ≤ f ≤ 1` with mass `h Σ f_i`,
//! bang-bang densities selecting exactly `k` cells, and the top-`k` linear
//! maximization oracle.

use std::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    values: Vec<f64>,
    h: f64,
}

impl Density {
    /// Wraps per-cell values; entries outside `[0, 1]` are rejected.
    pub fn new(values: Vec<f64>, h: f64) -> Option<Density> {
        values
            .iter()
            .all(|v| (0.0..=1.0).contains(v))
            .then_some(Density { values, h })
    }

    /// The bang-bang density equal to 1 on `selected` and 0 elsewhere.
    pub fn from_selection(n: usize, selected: &[usize], h: f64) -> Density {
        let mut values = vec![0.0; n];
        for &i in selected {
            values[i] = 1.0;
        }
        Density { values, h }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn mass(&self) -> f64 {
        self.h * self.values.iter().sum::<f64>()
    }

    pub fn is_bang_bang(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Number of cells with value exactly 1.
    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1.0).count()
    }

    /// Indices of cells with value exactly 1, ascending.
    pub fn selected(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// `h Σ f_i u_i`.
    pub fn pair(&self, u: &[f64]) -> f64 {
        self.h * self.values.iter().zip(u).map(|(f, u)| f * u).sum::<f64>()
    }
}

/// Tolerance used to call two field values tied.
pub fn tie_tolerance(u: &[f64]) -> f64 {
    1e-12 * u.iter().fold(1.0f64, |m, x| m.max(x.abs()))
}

/// Outcome of the linear oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub density: Density,
    /// The k-th and (k+1)-th largest values are within the tie tolerance, so
    /// the selected set was decided by the index tie-break.
    pub tied_at_cut: bool,
}

// Descending by value, ascending by index.
fn rank_order(u: &[f64], a: usize, b: usize) -> Ordering {
    u[b].total_cmp(&u[a]).then(a.cmp(&b))
}

/// Selects the `k` cells with the largest `u`, ties broken by ascending index.
/// The result maximizes `h Σ f_i u_i` over all densities with values in
/// `[0, 1]` and `Σ f_i = k`.
pub fn linmax(u: &[f64], k: usize, h: f64) -> Result<Selection> {
    let n = u.len();
    if k == 0 || k > n {
        return Err(Error::SelectionOutOfRange { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    if k < n {
        order.select_nth_unstable_by(k - 1, |&a, &b| rank_order(u, a, b));
    }
    let chosen = &order[..k];
    let tied_at_cut = if k < n {
        let cut = chosen.iter().map(|&i| u[i]).fold(f64::INFINITY, f64::min);
        let next = order[k..]
            .iter()
            .map(|&i| u[i])
            .fold(f64::NEG_INFINITY, f64::max);
        (cut - next).abs() <= tie_tolerance(u)
    } else {
        false
    };
    Ok(Selection {
        density: Density::from_selection(n, chosen, h),
        tied_at_cut,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport {
    /// Largest `u` over unselected cells, `-inf` when every cell is selected.
    #[serde(serialize_with = "crate::io::sig17")]
    pub alpha: f64,
    /// Smallest `u` over selected cells.
    #[serde(serialize_with = "crate::io::sig17")]
    pub gamma: f64,
    /// `(alpha + gamma) / 2`, the canonical level.
    #[serde(serialize_with = "crate::io::sig17")]
    pub alpha_mid: f64,
    pub separated: bool,
    pub tie_cells: usize,
    #[serde(serialize_with = "crate::io::sig17")]
    pub tolerance: f64,
}

/// Level-set separation of a bang-bang density against `u`.
pub fn threshold(u: &[f64], f: &Density) -> Result<ThresholdReport> {
    check_len(u.len(), f.len())?;
    let mut alpha = f64::NEG_INFINITY;
    let mut gamma = f64::INFINITY;
    for (&ui, &fi) in u.iter().zip(f.values()) {
        if fi == 1.0 {
            gamma = gamma.min(ui);
        } else if fi == 0.0 {
            alpha = alpha.max(ui);
        }
    }
    let tol = tie_tolerance(u);
    let alpha_mid = 0.5 * (alpha + gamma);
    let tie_cells = if alpha.is_finite() && gamma.is_finite() {
        u.iter().filter(|&&x| (x - alpha_mid).abs() <= tol).count()
    } else {
        0
    };
    Ok(ThresholdReport {
        alpha,
        gamma,
        alpha_mid,
        separated: gamma >= alpha - tol,
        tie_cells,
        tolerance: tol,
    })
}

/// The density `χ_{u > level}`.
pub fn indicator_above(u: &[f64], level: f64, h: f64) -> Density {
    Density {
        values: u
            .iter()
            .map(|&x| if x > level { 1.0 } else { 0.0 })
            .collect(),
        h,
    }
}

/// A uniformly random `k`-subset of `n` cells from a seeded ChaCha8 stream.
pub fn random_bangbang(n: usize, k: usize, seed: u64, h: f64) -> Result<Density> {
    if k == 0 || k > n {
        return Err(Error::SelectionOutOfRange { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, n, k).into_vec();
    Ok(Density::from_selection(n, &chosen, h))
}
