mod support;

use nonlocal_cu::kt::{kt_advance, kt_cfl_dt, kt_prepare, kt_step, KtOptions};
use nonlocal_cu::models::{make_arrhenius_model, make_quadratic_kernel};
use nonlocal_cu::nonlocal::compute_kernel_weights;
use nonlocal_cu::{Grid, State, SystemModel};
use support::{kt_oracle_step, oracle_initial_data};

fn assert_close(label: &str, got: &[f64], want: &[f64], tol: f64) {
    for (j, (a, b)) in got.iter().zip(want).enumerate() {
        assert!((a - b).abs() <= tol, "{label}[{j}]: {a:.17e} vs {b:.17e}");
    }
}

#[test]
fn single_step_matches_scripted_oracle() {
    let grid = Grid::new(-1.0, 1.0, 8).unwrap();
    let kernel = make_quadratic_kernel(0.5).unwrap();
    let weights = compute_kernel_weights(&kernel, grid.dx()).unwrap();
    let model = SystemModel::scalar(make_arrhenius_model());
    let rho = oracle_initial_data();
    let state = State::new(0.0, vec![rho.clone()]).unwrap();

    for safety in [0.3, 0.9] {
        let oracle = kt_oracle_step(&rho, grid.dx(), 0.5, safety);
        let dt = kt_cfl_dt(&state, &grid, &model, &weights, 1.0, safety).unwrap();
        assert!((dt - oracle.dt).abs() <= 1e-15, "dt {dt} vs {}", oracle.dt);

        let start = kt_prepare(&state, &grid, &weights, &model, 1.0).unwrap();
        let (next, ws) = kt_advance(
            &state,
            &start,
            &grid,
            &kernel,
            &weights,
            &model,
            oracle.dt,
            KtOptions::default(),
        )
        .unwrap();
        assert_close("w_mid", &ws[0].w_mid, &oracle.w_mid, 1e-13);
        assert_close("w_smooth", &ws[0].w_smooth, &oracle.w_smooth, 1e-13);
        assert_close("rho", &next.values[0], &oracle.next, 1e-13);
        assert!(ws[0].proj_slopes.iter().any(|&s| s != 0.0));
        assert!(ws[0].slopes.iter().any(|&s| s != 0.0));

        let stepped = kt_step(
            &state,
            &grid,
            &kernel,
            &weights,
            &model,
            oracle.dt,
            1.0,
            KtOptions::default(),
        )
        .unwrap();
        assert_eq!(stepped.values, next.values);
    }
}

#[test]
fn oracle_step_moves_the_state() {
    // guards against a vacuous comparison: the step changes every cell
    let rho = oracle_initial_data();
    let oracle = kt_oracle_step(&rho, 0.25, 0.5, 0.9);
    assert!(rho.iter().zip(&oracle.next).all(|(a, b)| (a - b).abs() > 1e-6));
    let before: f64 = rho.iter().sum();
    let after: f64 = oracle.next.iter().sum();
    assert!((before - after).abs() < 1e-13);
}
