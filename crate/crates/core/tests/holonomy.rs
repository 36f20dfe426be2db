use torus_momentum::grid::{interpolate, Grid, Interpolator};
use torus_momentum::momentum::{
    calibrate_conventions, frame_transport, holonomy_derivative_check, square_rotation_density, Loop, C_NORM,
    KAPPA_CONV, TRANSPORT_DT,
};
use torus_momentum::quadrature::square_integral;
use torus_momentum::riemannian::{scalar_curvature, Metric};
use torus_momentum::sample;
use torus_momentum::symplectic::TangentVector;
use torus_momentum::tensor::SymTensor2;

#[test]
fn transported_angle_is_enclosed_curvature() {
    let grid = Grid::new(64).unwrap();
    for seed in 0..3 {
        let g = sample::random_metric(&grid, seed, 4, 0.3).unwrap();
        let corner = (0.2, 0.3);
        let theta = frame_transport(&g, &Loop::square(corner, 0.3), TRANSPORT_DT).unwrap();
        let s = scalar_curvature(&g);
        let it = Interpolator::new(&[&s, g.volume().density()]);
        let enclosed = 0.5 * square_integral(&it, corner, 0.3, 40);
        assert!((theta - enclosed).abs() <= 1e-5 * enclosed.abs(), "seed {seed}: {theta} vs {enclosed}");
    }
}

#[test]
fn shrinking_squares_recover_pointwise_curvature() {
    let grid = Grid::new(64).unwrap();
    let g = sample::random_metric(&grid, 2, 4, 0.3).unwrap();
    let p = (0.43, 0.61);
    let k = 0.5 * interpolate(&scalar_curvature(&g), p);
    let errors: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&side| (square_rotation_density(&g, p, side).unwrap() - k).abs())
        .collect();
    let order = (errors[1] / errors[2]).log2();
    assert!(errors[2] < errors[1] && errors[1] < errors[0]);
    assert!(order >= 1.95, "observed order {order}");
}

#[test]
fn holonomy_log_derivative_is_line_integral_of_alpha() {
    let grid = Grid::new(64).unwrap();
    for seed in 0..2 {
        let g = sample::random_metric(&grid, seed + 7, 4, 0.3).unwrap();
        let h = sample::random_tangent(&g, seed + 70, 4).unwrap();
        let (fd, line) = holonomy_derivative_check(&g, &h, &Loop::square((0.1, 0.55), 0.3), 1e-4).unwrap();
        assert!((fd - line).abs() <= 1e-4 * line.abs(), "seed {seed}: {fd} vs {line}");
    }
}

#[test]
fn log_derivative_vanishes_for_constant_h_on_flat_torus() {
    let grid = Grid::new(32).unwrap();
    let flat = Metric::flat(&grid);
    let h = TangentVector::new(&flat, SymTensor2::constant(&grid, [[0.4, 0.1], [0.1, -0.4]])).unwrap();
    let (fd, line) = holonomy_derivative_check(&flat, &h, &Loop::square((0.3, 0.3), 0.3), 1e-4).unwrap();
    assert!(fd.abs() <= 1e-9 && line.abs() <= 1e-9, "{fd} {line}");
}

#[test]
fn convention_constants_match_measurement() {
    let grid = Grid::new(64).unwrap();
    let g = sample::random_metric(&grid, 3, 4, 0.3).unwrap();
    let h = sample::random_tangent(&g, 33, 4).unwrap();
    let cal = calibrate_conventions(&g, &h, (0.4, 0.5)).unwrap();
    assert!((cal.kappa_conv - KAPPA_CONV).abs() <= 1e-6, "{cal:?}");
    assert!((cal.c_norm - C_NORM).abs() <= 1e-3, "{cal:?}");
}
