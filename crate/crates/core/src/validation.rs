//! Small-scale self checks run by `fracmax validate`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{poincare_constant, snap_mass, Grid};
use crate::maximizer::{ascend, brute_force, AscentOptions};
use crate::operator::{torsion_profile, Operator};
use crate::solver::DirectSolver;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Passed, but with a finding worth a look.
    pub warning: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn hard(name: &'static str, passed: bool, detail: String) -> Self {
        CheckOutcome {
            name,
            passed,
            warning: false,
            detail,
        }
    }
}

/// Runs every suite against `grid` at exponent `s`. Errors are reported as
/// failed checks rather than propagated.
pub fn run_suite(grid: &Grid, s: f64, beta: f64, opts: &AscentOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let op = match Operator::assemble(grid, s) {
        Ok(op) => op,
        Err(e) => {
            out.push(CheckOutcome::hard("assemble", false, e.to_string()));
            return out;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let inv = op.invariants();
    out.push(CheckOutcome::hard(
        "operator invariants",
        inv.all_hold(),
        format!("{inv:?}"),
    ));

    out.push(wrap("energy identity", identity_check(&op, &mut rng)));
    out.push(wrap(
        "maximum principle",
        max_principle_check(&op, &mut rng),
    ));
    out.push(poincare_check(&op, &mut rng));
    out.push(wrap("manufactured solution", manufactured_check(s)));
    out.push(wrap("ascent vs brute force", oracle_check(s, opts)));
    out.push(wrap("maximizer structure", maximize_check(&op, beta, opts)));
    out
}

fn wrap(name: &'static str, r: Result<(bool, String)>) -> CheckOutcome {
    match r {
        Ok((passed, detail)) => CheckOutcome::hard(name, passed, detail),
        Err(e) => CheckOutcome::hard(name, false, e.to_string()),
    }
}

fn identity_check(op: &Operator, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let solver = DirectSolver::new(op)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f: Vec<f64> = (0..op.len()).map(|_| rng.random_range(0.0..1.0)).collect();
        let u = solver.solve(&f)?.u;
        let paired = op.h() * crate::operator::dot(&f, &u);
        let energy = op.energy(&u)?;
        worst = worst.max((paired - energy).abs() / paired.abs());
    }
    Ok((worst <= 1e-10, format!("worst relative gap {worst:.3e}")))
}

fn max_principle_check(op: &Operator, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let solver = DirectSolver::new(op)?;
    let mut min_u = f64::INFINITY;
    for _ in 0..20 {
        let f: Vec<f64> = (0..op.len())
            .map(|_| {
                if rng.random_bool(0.5) {
                    0.0
                } else {
                    rng.random_range(0.0..1.0)
                }
            })
            .collect();
        let u = solver.solve(&f)?.u;
        min_u = u.iter().copied().fold(min_u, f64::min);
    }
    Ok((min_u >= -1e-12, format!("min u = {min_u:.3e}")))
}

fn poincare_check(op: &Operator, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let c = match poincare_constant(op.grid(), op.s()) {
        Ok(c) => c,
        Err(e) => return CheckOutcome::hard("poincare", false, e.to_string()),
    };
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let u: Vec<f64> = (0..op.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let l2 = op.h() * u.iter().map(|x| x * x).sum::<f64>();
        let e = op.energy(&u).unwrap_or(f64::NAN);
        worst = worst.max(l2 / (c * e));
    }
    CheckOutcome {
        name: "poincare",
        passed: worst <= 1.1,
        warning: worst > 1.0,
        detail: format!("C = {c:.6}, worst ratio {worst:.4}"),
    }
}

fn manufactured_check(s: f64) -> Result<(bool, String)> {
    let err = |n: usize| -> Result<f64> {
        let g = Grid::build(&[(-1.0, 1.0)], 2.0 / n as f64)?;
        let op = Operator::assemble(&g, s)?;
        let u = DirectSolver::new(&op)?.solve(&vec![1.0; n])?.u;
        Ok(g.centers()
            .iter()
            .zip(&u)
            .filter(|(x, _)| x.abs() <= 0.5)
            .map(|(&x, &ui)| {
                let exact = torsion_profile(x, s);
                ((ui - exact) / exact).abs()
            })
            .fold(0.0, f64::max))
    };
    let coarse = err(64)?;
    let fine = err(128)?;
    Ok((
        fine < coarse,
        format!("interior relative error n=64: {coarse:.3e}, n=128: {fine:.3e}"),
    ))
}

fn oracle_check(s: f64, opts: &AscentOptions) -> Result<(bool, String)> {
    let g = Grid::build(&[(0.0, 1.0)], 0.1)?;
    let op = Operator::assemble(&g, s)?;
    let a = ascend(&op, 3, opts)?;
    let b = brute_force(&op, 3, 1_000)?;
    let rel = (a.energy - b.energy).abs() / b.energy;
    Ok((rel <= 1e-9, format!("relative gap {rel:.3e}")))
}

fn maximize_check(op: &Operator, beta: f64, opts: &AscentOptions) -> Result<(bool, String)> {
    let k = snap_mass(op.grid(), beta)?.k;
    let r = ascend(op, k, opts)?;
    let v = &r.verification;
    Ok((
        r.converged && v.passed(),
        format!(
            "k={k} energy={:.6e} iterations={} ties={} residual={:?}",
            r.energy, r.iterations, v.tie_cells, v.obstacle_residual_inf
        ),
    ))
}
