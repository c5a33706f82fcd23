//! Maximization of the discrete energy `Φ(f) = h fᵀ A⁻¹ f` over bang-bang
//! densities with exactly `k` selected cells.
//!
//! `Φ` is convex, so replacing `f` by the top-`k` selection of `u_f` never
//! decreases it: `Φ(f') ≥ Φ(f) + 2h uᵀ(f' - f) ≥ Φ(f)`. The ascent alternates
//! a solve with that linear oracle until the current set already maximizes
//! `h Σ f_i u_i`. Such a fixed point has `f = χ_{u > α}` for any level `α`
//! strictly between the largest unselected and the smallest selected value,
//! and then `A u = χ_{u > α}` holds up to the solver residual.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::grid::{snap_mass, Grid, Interval};
use crate::operator::Operator;
use crate::rearrangement::{
    indicator_above, linmax, random_bangbang, threshold, tie_tolerance, Density,
};
use crate::solver::{solve_iterative, DirectSolver};

/// Bound on `‖A û - χ_{û > α_mid}‖∞` accepted by [`verify`].
pub const OBSTACLE_TOL: f64 = 1e-8;

/// Relative gap below which two energies count as equal when picking a best.
const ENERGY_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    Random,
    Centered,
    UniformThenSnap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AscentOptions {
    /// Start of the first restart; later restarts start from seeded random subsets.
    pub init: Init,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    #[serde(serialize_with = "crate::io::sig17")]
    pub solver_tol: f64,
    pub solver: SolverKind,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            init: Init::Centered,
            max_iter: 100,
            restarts: 10,
            seed: 0,
            solver_tol: 1e-10,
            solver: SolverKind::Direct,
        }
    }
}

impl AscentOptions {
    fn check(&self) -> Result<()> {
        if self.max_iter == 0 || self.restarts == 0 {
            return Err(Error::InvalidSolverParameter(
                "max_iter and restarts must be at least 1".into(),
            ));
        }
        if self.solver_tol.is_nan() || self.solver_tol <= 0.0 {
            return Err(Error::InvalidSolverParameter(format!(
                "solver_tol = {}",
                self.solver_tol
            )));
        }
        Ok(())
    }
}

enum FieldSolver<'a> {
    Direct(DirectSolver<'a>),
    Iterative { op: &'a Operator, tol: f64 },
}

impl<'a> FieldSolver<'a> {
    fn new(op: &'a Operator, opts: &AscentOptions) -> Result<Self> {
        Ok(match opts.solver {
            SolverKind::Direct => FieldSolver::Direct(DirectSolver::new(op)?),
            SolverKind::Iterative => FieldSolver::Iterative {
                op,
                tol: opts.solver_tol,
            },
        })
    }

    fn solve(&self, f: &[f64]) -> Result<Vec<f64>> {
        match self {
            FieldSolver::Direct(d) => Ok(d.solve(f)?.u),
            FieldSolver::Iterative { op, tol } => {
                Ok(solve_iterative(op, f, *tol, 10 * op.len() + 100)?.u)
            }
        }
    }
}

/// Per-restart record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartLog {
    pub start: Init,
    pub seed: Option<u64>,
    /// Energy of each visited set, in visiting order.
    #[serde(serialize_with = "crate::io::sig17_vec")]
    pub trace: Vec<f64>,
    pub converged: bool,
    /// The oracle proposed a set that had already been visited.
    pub revisited: bool,
    /// Largest relative gap between `h fᵀu` and `h uᵀAu` over the iterates.
    #[serde(serialize_with = "crate::io::sig17")]
    pub max_identity_defect: f64,
    #[serde(skip)]
    selected: Vec<usize>,
    #[serde(skip)]
    u: Vec<f64>,
}

impl RestartLog {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn energy(&self) -> f64 {
        self.trace.last().copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// Final selected cells, ascending.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Potential of the final set.
    pub fn potential(&self) -> &[f64] {
        &self.u
    }
}

/// Structural checks of a candidate maximizer `(f̂, û)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub bang_bang: bool,
    #[serde(serialize_with = "crate::io::sig17")]
    pub alpha: f64,
    #[serde(serialize_with = "crate::io::sig17")]
    pub gamma: f64,
    #[serde(serialize_with = "crate::io::sig17")]
    pub alpha_mid: f64,
    pub separated: bool,
    pub tie_cells: usize,
    /// `h · tie_cells`, the discrete measure of the plateau `{û = α}`.
    #[serde(serialize_with = "crate::io::sig17")]
    pub tie_mass: f64,
    /// `χ_{û > α_mid} = f̂`; `None` when skipped.
    pub indicator_matches: Option<bool>,
    /// `‖A û - χ_{û > α_mid}‖∞`; `None` when skipped.
    #[serde(serialize_with = "crate::io::sig17_opt")]
    pub obstacle_residual_inf: Option<f64>,
    pub skipped_reason: Option<String>,
    #[serde(serialize_with = "crate::io::sig17")]
    pub mass: f64,
    pub mass_exact: bool,
}

impl VerificationReport {
    /// All hard checks pass. A skipped residual check counts as passing.
    pub fn passed(&self) -> bool {
        self.bang_bang
            && self.separated
            && self.mass_exact
            && self.indicator_matches.unwrap_or(true)
            && self.obstacle_residual_inf.is_none_or(|r| r <= OBSTACLE_TOL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscentResult {
    pub k: usize,
    pub selected: Vec<usize>,
    #[serde(serialize_with = "crate::io::sig17_vec")]
    pub f_hat: Vec<f64>,
    #[serde(serialize_with = "crate::io::sig17_vec")]
    pub u_hat: Vec<f64>,
    /// `Φ = h f̂ᵀû`.
    #[serde(serialize_with = "crate::io::sig17")]
    pub energy: f64,
    /// Energy trace of the winning restart.
    #[serde(serialize_with = "crate::io::sig17_vec")]
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub converged: bool,
    /// `J(û)` at level `α_mid`.
    #[serde(serialize_with = "crate::io::sig17")]
    pub j_value: f64,
    pub verification: VerificationReport,
    pub restarts: Vec<RestartLog>,
}

impl AscentResult {
    pub fn density(&self, h: f64) -> Density {
        Density::from_selection(self.f_hat.len(), &self.selected, h)
    }

    pub fn alpha(&self) -> f64 {
        self.verification.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.verification.gamma
    }

    pub fn alpha_mid(&self) -> f64 {
        self.verification.alpha_mid
    }

    pub fn tie_cells(&self) -> usize {
        self.verification.tie_cells
    }

    pub fn obstacle_residual_inf(&self) -> Option<f64> {
        self.verification.obstacle_residual_inf
    }
}

/// Checks bang-bang structure, level separation, the plateau size, the
/// obstacle equation `A û = χ_{û > α_mid}` and exact mass `k h`.
pub fn verify(op: &Operator, f: &Density, u: &[f64], k: usize) -> Result<VerificationReport> {
    check_len(op.len(), u.len())?;
    check_len(op.len(), f.len())?;
    let h = op.h();
    let bang_bang = f.is_bang_bang();
    let t = threshold(u, f)?;

    let (indicator_matches, obstacle_residual_inf, skipped_reason) = if !bang_bang {
        (None, None, Some("density is not bang-bang".to_string()))
    } else if t.tie_cells > 0 {
        (
            None,
            None,
            Some(format!(
                "{} cells within {:e} of alpha_mid; level set is not resolved",
                t.tie_cells, t.tolerance
            )),
        )
    } else {
        let chi = indicator_above(u, t.alpha_mid, h);
        let au = op.apply_unchecked(u);
        let res = au
            .iter()
            .zip(chi.values())
            .map(|(a, c)| (a - c).abs())
            .fold(0.0, f64::max);
        (Some(chi.values() == f.values()), Some(res), None)
    };

    let mass = f.mass();
    Ok(VerificationReport {
        bang_bang,
        alpha: t.alpha,
        gamma: t.gamma,
        alpha_mid: t.alpha_mid,
        separated: t.separated,
        tie_cells: t.tie_cells,
        tie_mass: h * t.tie_cells as f64,
        indicator_matches,
        obstacle_residual_inf,
        skipped_reason,
        mass,
        mass_exact: f.count() == k && mass == k as f64 * h,
    })
}

/// `J(u) = h uᵀAu - 2h Σ_{u_i > level} u_i`.
pub fn compute_j(op: &Operator, u: &[f64], level: f64) -> Result<f64> {
    let energy = op.energy(u)?;
    let above: f64 = u.iter().filter(|&&x| x > level).sum();
    Ok(energy - 2.0 * op.h() * above)
}

fn check_k(op: &Operator, k: usize) -> Result<()> {
    if k == 0 || k > op.len() {
        Err(Error::SelectionOutOfRange { k, n: op.len() })
    } else {
        Ok(())
    }
}

fn identity_defect(op: &Operator, f: &Density, u: &[f64]) -> f64 {
    let paired = f.pair(u);
    let energy = op.h() * crate::operator::dot(u, &op.apply_unchecked(u));
    (paired - energy).abs() / paired.abs().max(f64::MIN_POSITIVE)
}

fn centered(n: usize, k: usize, h: f64) -> Density {
    let start = (n - k) / 2;
    Density::from_selection(n, &(start..start + k).collect::<Vec<_>>(), h)
}

fn run_restart(
    op: &Operator,
    solver: &FieldSolver,
    k: usize,
    opts: &AscentOptions,
    restart: usize,
) -> Result<RestartLog> {
    let n = op.len();
    let h = op.h();
    let (start, seed) = if restart == 0 {
        let seed = (opts.init == Init::Random).then_some(opts.seed);
        (opts.init, seed)
    } else {
        (Init::Random, Some(opts.seed.wrapping_add(restart as u64)))
    };
    let mut f = match start {
        Init::Centered => centered(n, k, h),
        Init::Random => random_bangbang(n, k, seed.unwrap_or(opts.seed), h)?,
        Init::UniformThenSnap => {
            let u = solver.solve(&vec![k as f64 / n as f64; n])?;
            linmax(&u, k, h)?.density
        }
    };

    let mut visited = BTreeSet::new();
    visited.insert(f.selected());
    let mut trace = Vec::new();
    let mut converged = false;
    let mut revisited = false;
    let mut max_identity_defect: f64 = 0.0;
    let mut u = Vec::new();

    for _ in 0..opts.max_iter {
        u = solver.solve(f.values())?;
        trace.push(f.pair(&u));
        max_identity_defect = max_identity_defect.max(identity_defect(op, &f, &u));

        let next = linmax(&u, k, h)?.density;
        let gain = next.pair(&u) - f.pair(&u);
        if next == f || gain <= h * k as f64 * tie_tolerance(&u) {
            converged = true;
            break;
        }
        if !visited.insert(next.selected()) {
            revisited = true;
            break;
        }
        f = next;
    }

    Ok(RestartLog {
        start,
        seed,
        trace,
        converged,
        revisited,
        max_identity_defect,
        selected: f.selected(),
        u,
    })
}

/// `true` when `(e, set)` should replace the current best `(best_e, best_set)`.
fn better(e: f64, set: &[usize], best_e: f64, best_set: &[usize]) -> bool {
    let scale = e.abs().max(best_e.abs());
    if (e - best_e).abs() <= ENERGY_TIE * scale {
        set.cmp(best_set) == Ordering::Less
    } else {
        e > best_e
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    op: &Operator,
    k: usize,
    selected: Vec<usize>,
    u: Vec<f64>,
    trace: Vec<f64>,
    converged: bool,
    best_restart: usize,
    restarts: Vec<RestartLog>,
) -> Result<AscentResult> {
    let f = Density::from_selection(op.len(), &selected, op.h());
    let verification = verify(op, &f, &u, k)?;
    let j_value = compute_j(op, &u, verification.alpha_mid)?;
    Ok(AscentResult {
        k,
        energy: f.pair(&u),
        f_hat: f.values().to_vec(),
        selected,
        u_hat: u,
        iterations: trace.len(),
        trace,
        restarts_used: restarts.len(),
        best_restart,
        converged,
        j_value,
        verification,
        restarts,
    })
}

/// Alternating linear-oracle ascent with `opts.restarts` independent starts.
/// Restarts run in parallel; the winner is chosen by a sequential reduction in
/// restart order, so the result does not depend on the thread count.
pub fn ascend(op: &Operator, k: usize, opts: &AscentOptions) -> Result<AscentResult> {
    check_k(op, k)?;
    opts.check()?;
    let solver = FieldSolver::new(op, opts)?;
    let logs: Vec<RestartLog> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| run_restart(op, &solver, k, opts, r))
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (r, log) in logs.iter().enumerate().skip(1) {
        if better(
            log.energy(),
            &log.selected,
            logs[best].energy(),
            &logs[best].selected,
        ) {
            best = r;
        }
    }
    let win = &logs[best];
    finish(
        op,
        k,
        win.selected.clone(),
        win.u.clone(),
        win.trace.clone(),
        win.converged,
        best,
        logs,
    )
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exhaustive maximization over all `k`-subsets.
///
/// Energies are evaluated as `h Σ_{i,j ∈ E} (A⁻¹)_{ij}`, independently of the
/// solve-and-select path used by [`ascend`]. Ties within relative `1e-12` go to
/// the lexicographically smallest subset.
pub fn brute_force(op: &Operator, k: usize, limit: u128) -> Result<AscentResult> {
    check_k(op, k)?;
    let n = op.len();
    let count = binomial(n, k);
    if count > limit {
        return Err(Error::BudgetExceeded { count, limit });
    }
    let direct = DirectSolver::new(op)?;
    let inv = direct.inverse();
    let h = op.h();
    let energy_of = |set: &[usize]| -> f64 {
        let mut acc = 0.0;
        for &i in set {
            let row = &inv[i];
            for &j in set {
                acc += row[j];
            }
        }
        h * acc
    };

    // one task per leading element; merge in ascending order
    let per_head: Vec<(f64, Vec<usize>)> = (0..=n - k)
        .into_par_iter()
        .map(|head| {
            let mut best: Option<(f64, Vec<usize>)> = None;
            for tail in (head + 1..n).combinations(k - 1) {
                let mut set = Vec::with_capacity(k);
                set.push(head);
                set.extend(tail);
                let e = energy_of(&set);
                let replace = match &best {
                    None => true,
                    Some((be, bs)) => better(e, &set, *be, bs),
                };
                if replace {
                    best = Some((e, set));
                }
            }
            best.expect("every head has at least one completion")
        })
        .collect();

    let mut best = &per_head[0];
    for cand in &per_head[1..] {
        if better(cand.0, &cand.1, best.0, &best.1) {
            best = cand;
        }
    }

    let selected = best.1.clone();
    let f = Density::from_selection(n, &selected, h);
    let u = direct.solve(f.values())?.u;
    let trace = vec![f.pair(&u)];
    finish(op, k, selected, u, trace, true, 0, Vec::new())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub component_cells: [usize; 2],
    /// Fraction of the selected cells lying in each component.
    #[serde(serialize_with = "crate::io::sig17_vec")]
    pub fractions: Vec<f64>,
    pub dominant_component: usize,
    #[serde(serialize_with = "crate::io::sig17")]
    pub max_fraction: f64,
    #[serde(serialize_with = "crate::io::sig17")]
    pub energy: f64,
    #[serde(serialize_with = "crate::io::sig17")]
    pub alpha_mid: f64,
    /// `J(û)` at `α_mid`.
    #[serde(serialize_with = "crate::io::sig17")]
    pub j_hat: f64,
    /// `J(v)` at `α_mid`, where `v` copies û's profile on the dominant
    /// component onto the other one.
    #[serde(serialize_with = "crate::io::sig17")]
    pub j_copy: f64,
    pub concentrated: bool,
    pub copy_lowers_j: bool,
    pub result: AscentResult,
}

/// Maximizes on a two-component domain and compares `J` at the maximizer with
/// `J` of the field obtained by copying its dominant profile onto the other
/// component.
pub fn two_component_experiment(
    left: Interval,
    right: Interval,
    h: f64,
    s: f64,
    k: usize,
    opts: &AscentOptions,
) -> Result<ConcentrationReport> {
    let grid = Grid::build(&[(left.left, left.right), (right.left, right.right)], h)?;
    let op = Operator::assemble(&grid, s)?;
    two_component_on(&op, k, opts)
}

pub(crate) fn two_component_on(
    op: &Operator,
    k: usize,
    opts: &AscentOptions,
) -> Result<ConcentrationReport> {
    let grid = op.grid();
    if grid.component_count() != 2 {
        return Err(Error::Experiment(format!(
            "expected 2 components, got {}",
            grid.component_count()
        )));
    }
    let cells = [grid.component_cells(0), grid.component_cells(1)];
    if cells[0].len() != cells[1].len() {
        return Err(Error::Experiment(format!(
            "components have {} and {} cells after snapping",
            cells[0].len(),
            cells[1].len()
        )));
    }

    let result = ascend(op, k, opts)?;
    let mut in_comp = [0usize; 2];
    for &i in &result.selected {
        in_comp[grid.component_of()[i]] += 1;
    }
    let fractions: Vec<f64> = in_comp.iter().map(|&c| c as f64 / k as f64).collect();
    let dominant = if in_comp[1] > in_comp[0] { 1 } else { 0 };
    let other = 1 - dominant;

    let mut v = result.u_hat.clone();
    for (dst, src) in cells[other].clone().zip(cells[dominant].clone()) {
        v[dst] = result.u_hat[src];
    }
    let alpha_mid = result.alpha_mid();
    let j_hat = compute_j(op, &result.u_hat, alpha_mid)?;
    let j_copy = compute_j(op, &v, alpha_mid)?;
    let max_fraction = fractions[dominant];

    Ok(ConcentrationReport {
        component_cells: [cells[0].len(), cells[1].len()],
        fractions,
        dominant_component: dominant,
        max_fraction,
        energy: result.energy,
        alpha_mid,
        j_hat,
        j_copy,
        concentrated: max_fraction >= 0.9,
        copy_lowers_j: j_copy < j_hat,
        result,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(serialize_with = "crate::io::sig17")]
    pub s: f64,
    pub k: Option<usize>,
    #[serde(serialize_with = "crate::io::sig17_opt")]
    pub energy: Option<f64>,
    #[serde(serialize_with = "crate::io::sig17_opt")]
    pub alpha_mid: Option<f64>,
    pub iterations: Option<usize>,
    #[serde(serialize_with = "crate::io::sig17_opt")]
    pub residual: Option<f64>,
    pub tie_cells: Option<usize>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

/// One ascent per exponent; a failing row records its error and the sweep
/// continues.
pub fn sweep(grid: &Grid, s_values: &[f64], beta: f64, opts: &AscentOptions) -> Vec<SweepRow> {
    s_values
        .iter()
        .map(|&s| {
            let run = || -> Result<AscentResult> {
                let k = snap_mass(grid, beta)?.k;
                let op = Operator::assemble(grid, s)?;
                ascend(&op, k, opts)
            };
            match run() {
                Ok(r) => SweepRow {
                    s,
                    k: Some(r.k),
                    energy: Some(r.energy),
                    alpha_mid: Some(r.alpha_mid()),
                    iterations: Some(r.iterations),
                    residual: r.obstacle_residual_inf(),
                    tie_cells: Some(r.tie_cells()),
                    converged: Some(r.converged),
                    error: None,
                },
                Err(e) => SweepRow {
                    s,
                    k: None,
                    energy: None,
                    alpha_mid: None,
                    iterations: None,
                    residual: None,
                    tie_cells: None,
                    converged: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
