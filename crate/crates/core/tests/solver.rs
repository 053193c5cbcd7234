use cfbvp_core::problem::builtin;
use cfbvp_core::solver::SolveStatus;
use cfbvp_core::{solve_nonlinear, SolveOptions};

fn solve_on(which: u8, grid_n: usize) -> cfbvp_core::SolveResult {
    let opts = SolveOptions { grid_n, ..SolveOptions::default() };
    solve_nonlinear(&builtin(which).unwrap(), &opts).unwrap()
}

#[test]
fn refinement_changes_the_solution_by_less_than_ten_tolerances() {
    let coarse = solve_on(1, 400);
    let fine = solve_on(1, 800);
    assert!(coarse.converged() && fine.converged());
    let worst = coarse
        .solution
        .values()
        .iter()
        .zip(fine.solution.values().iter().step_by(2))
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(worst <= 10.0 * SolveOptions::default().tol, "{worst:e}");
}

#[test]
fn second_builtin_has_a_positive_solution() {
    let r = solve_on(2, 200);
    assert_eq!(r.status, SolveStatus::Converged, "{r:?}");
    let x = &r.solution;
    assert!(x.values()[1..].iter().all(|&v| v > 0.0));
    assert!(r.residuals.bc1_residual < 1e-6);
    assert!(r.residuals.cone_ratio >= r.residuals.theta.powi(2));
}
