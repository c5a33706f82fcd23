//! Dense discretization of the unnormalized integral fractional Laplacian
//!
//! ```text
//! (-Δ)^s u(x) = p.v. ∫ (u(x) - u(y)) / |x - y|^{1+2s} dy
//! ```
//!
//! with `u = 0` outside the domain. Each lattice cell at index distance `m ≥ 1`
//! contributes the exact cell integral of the kernel, `λ_m`. Summing over the
//! whole lattice gives the constant diagonal `S`; the exterior cells only enter
//! through `S` because `u` vanishes there. The self-cell principal value is
//! dropped, which leaves an `O(h^{2-2s})` consistency error for smooth `u`.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{check_exponent, check_len, check_spacing, Error, Result};
use crate::grid::Grid;

/// Integral of `r^{-(1+2s)}` over `((m - 1/2) h, (m + 1/2) h)`.
pub fn kernel_weight(m: u64, h: f64, s: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidKernelIndex(m));
    }
    check_spacing(h)?;
    check_exponent(s)?;
    Ok(weight_unchecked(m, h, s))
}

// a^{-2s} - b^{-2s} = a^{-2s} (1 - (b/a)^{-2s}), written with expm1/ln_1p so
// the difference keeps full precision for large m.
fn weight_unchecked(m: u64, h: f64, s: f64) -> f64 {
    let a = m as f64 - 0.5;
    let two_s = 2.0 * s;
    let head = (a * h).powf(-two_s);
    head * -(-two_s * (1.0 / a).ln_1p()).exp_m1() / two_s
}

/// `S = 2 Σ_{m≥1} λ_m = (h/2)^{-2s} / s`.
pub fn row_constant(h: f64, s: f64) -> Result<f64> {
    check_spacing(h)?;
    check_exponent(s)?;
    Ok((0.5 * h).powf(-2.0 * s) / s)
}

#[derive(Debug, Clone)]
pub struct Operator {
    s: f64,
    grid: Grid,
    matrix: DMatrix<f64>,
    row_constant: f64,
}

impl Operator {
    pub fn assemble(grid: &Grid, s: f64) -> Result<Operator> {
        check_exponent(s)?;
        let h = grid.h();
        let diag = row_constant(h, s)?;
        let span = grid.lattice_span() as usize;
        let weights: Vec<f64> = (0..=span)
            .map(|m| {
                if m == 0 {
                    diag
                } else {
                    -weight_unchecked(m as u64, h, s)
                }
            })
            .collect();

        let idx = grid.lattice_indices();
        let n = grid.len();
        let matrix = DMatrix::from_fn(n, n, |i, j| weights[idx[i].abs_diff(idx[j]) as usize]);

        Ok(Operator {
            s,
            grid: grid.clone(),
            matrix,
            row_constant: diag,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn row_constant(&self) -> f64 {
        self.row_constant
    }

    /// `A u`, approximating `(-Δ)^s u` at the cell centers.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), u.len())?;
        Ok(self.apply_unchecked(u))
    }

    pub(crate) fn apply_unchecked(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        // column-major storage: accumulate column by column
        for (j, &uj) in u.iter().enumerate() {
            if uj == 0.0 {
                continue;
            }
            let col = self.matrix.column(j);
            for (o, a) in out.iter_mut().zip(col.iter()) {
                *o += a * uj;
            }
        }
        out
    }

    /// Discrete squared seminorm `h uᵀ A u`.
    pub fn energy(&self, u: &[f64]) -> Result<f64> {
        check_len(self.len(), u.len())?;
        let au = self.apply_unchecked(u);
        Ok(self.h() * dot(u, &au))
    }

    /// Entrywise structural checks of the assembled matrix.
    pub fn invariants(&self) -> OperatorInvariants {
        let n = self.len();
        let a = &self.matrix;
        let mut symmetric = true;
        let mut constant_diagonal = true;
        let mut nonpositive_off_diagonal = true;
        let mut min_dominance_margin = f64::INFINITY;
        for i in 0..n {
            if a[(i, i)] != self.row_constant {
                constant_diagonal = false;
            }
            let mut off = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                if a[(i, j)] != a[(j, i)] {
                    symmetric = false;
                }
                if a[(i, j)] > 0.0 {
                    nonpositive_off_diagonal = false;
                }
                off += a[(i, j)].abs();
            }
            min_dominance_margin = min_dominance_margin.min(a[(i, i)] - off);
        }
        OperatorInvariants {
            symmetric,
            constant_diagonal,
            nonpositive_off_diagonal,
            strictly_diagonally_dominant: min_dominance_margin > 0.0,
            min_dominance_margin,
            cholesky_ok: a.clone().cholesky().is_some(),
        }
    }

    /// Row-major CSV dump, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.len() {
            let row: Vec<String> = (0..self.len())
                .map(|j| crate::io::fmt_f64(self.matrix[(i, j)]))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorInvariants {
    pub symmetric: bool,
    pub constant_diagonal: bool,
    pub nonpositive_off_diagonal: bool,
    pub strictly_diagonally_dominant: bool,
    pub min_dominance_margin: f64,
    pub cholesky_ok: bool,
}

impl OperatorInvariants {
    pub fn all_hold(&self) -> bool {
        self.symmetric
            && self.constant_diagonal
            && self.nonpositive_off_diagonal
            && self.strictly_diagonally_dominant
            && self.cholesky_ok
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solution of `(-Δ)^s u = 1` on `(-1, 1)` with zero exterior data, in the
/// unnormalized convention: `sin(πs)/π · (1 - x²)^s`.
pub fn torsion_profile(x: f64, s: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    (std::f64::consts::PI * s).sin() / std::f64::consts::PI * (1.0 - x * x).powf(s)
}
