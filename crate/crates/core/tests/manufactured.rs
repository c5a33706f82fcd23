mod oracle {
    pub mod quadrature;
}

use fracmax::grid::Grid;
use fracmax::operator::{torsion_profile, Operator};
use fracmax::solver::solve_direct;
use oracle::quadrature::{fractional_laplacian_of_profile, tanh_sinh};

#[test]
fn quadrature_sanity() {
    let v = tanh_sinh(|x| x.sqrt(), 0.0, 1.0, 1e-14);
    assert!((v - 2.0 / 3.0).abs() < 1e-13);
    let v = tanh_sinh(|x| 1.0 / x.sqrt(), 0.0, 4.0, 1e-14);
    // unbounded integrand: node truncation limits accuracy
    assert!((v - 4.0).abs() < 1e-7);
}

#[test]
fn torsion_constant_matches_quadrature() {
    for &s in &[0.25, 0.5, 0.75] {
        let c = (std::f64::consts::PI * s).sin() / std::f64::consts::PI;
        for &x in &[0.0, 0.3, -0.5, 0.8] {
            let lap = fractional_laplacian_of_profile(x, s);
            assert!(
                (c * lap - 1.0).abs() < 1e-6,
                "s={s} x={x}: c * L = {}",
                c * lap
            );
        }
    }
}

fn interior_errors(n: usize, s: f64) -> (f64, f64) {
    let g = Grid::build(&[(-1.0, 1.0)], 2.0 / n as f64).unwrap();
    let op = Operator::assemble(&g, s).unwrap();
    let exact: Vec<f64> = g.centers().iter().map(|&x| torsion_profile(x, s)).collect();
    let applied = op.apply(&exact).unwrap();
    let u = solve_direct(&op, &vec![1.0; n]).unwrap().u;
    let mut consistency: f64 = 0.0;
    let mut solution: f64 = 0.0;
    for (i, &x) in g.centers().iter().enumerate() {
        if x.abs() <= 0.5 {
            consistency = consistency.max((applied[i] - 1.0).abs());
            solution = solution.max(((u[i] - exact[i]) / exact[i]).abs());
        }
    }
    (consistency, solution)
}

#[test]
fn consistency_improves_with_refinement() {
    for &s in &[0.25, 0.5, 0.75] {
        let (c64, e64) = interior_errors(64, s);
        let (c256, e256) = interior_errors(256, s);
        assert!(c256 < c64, "s={s}: {c64} -> {c256}");
        assert!(e256 < e64, "s={s}: {e64} -> {e256}");
    }
}
