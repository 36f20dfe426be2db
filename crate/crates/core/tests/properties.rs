use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use torus_momentum::diffeo::pairing_kappa;
use torus_momentum::grid::Grid;
use torus_momentum::momentum::{angle_distance, kobayashi_add, kobayashi_neg, wrap_angle, CircleBundleClass};
use torus_momentum::riemannian::project_compatible;
use torus_momentum::sample;
use torus_momentum::symplectic::{omega, tracefree_project};
use torus_momentum::tensor::{OneForm, TwoForm};

fn grid() -> Arc<Grid> {
    Grid::new(16).unwrap()
}

fn class(grid: &Arc<Grid>, seed: u64, chern: i64, a: f64, b: f64) -> CircleBundleClass {
    let flux = sample::unit_field(grid, seed, 2, true).unwrap().map(|v| 3.0 * v + 2.0 * PI * chern as f64);
    CircleBundleClass::new(TwoForm::new(flux), a, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn omega_is_antisymmetric_and_bilinear(seed in 0u64..1_000_000, s in -3.0f64..3.0) {
        let grid = grid();
        let g = sample::random_metric(&grid, seed, 2, 0.3).unwrap();
        let h1 = sample::random_tangent(&g, seed ^ 1, 2).unwrap();
        let h2 = sample::random_tangent(&g, seed ^ 2, 2).unwrap();
        let h3 = sample::random_tangent(&g, seed ^ 3, 2).unwrap();
        let w12 = omega(&g, &h1, &h2).unwrap();
        let w21 = omega(&g, &h2, &h1).unwrap();
        prop_assert!((w12 + w21).abs() <= 1e-12 * w12.abs().max(1.0));
        prop_assert!(omega(&g, &h1, &h1).unwrap().abs() <= 1e-13);
        let lin = omega(&g, &h1.scale(s).add(&h3).unwrap(), &h2).unwrap();
        let parts = s * w12 + omega(&g, &h3, &h2).unwrap();
        prop_assert!((lin - parts).abs() <= 1e-12 * lin.abs().max(1.0));
    }

    #[test]
    fn projections_are_idempotent(seed in 0u64..1_000_000) {
        let grid = grid();
        let g = sample::random_metric(&grid, seed, 2, 0.3).unwrap();
        let raw = sample::random_sym_tensor(&grid, seed ^ 7, 2);
        let h = tracefree_project(&raw, &g);
        prop_assert!(h.trace_residual() <= 1e-13);
        let again = tracefree_project(h.tensor(), &g);
        prop_assert!(again.tensor().sub(h.tensor()).sup_norm() <= 1e-13);
        let reprojected = project_compatible(g.components(), g.volume()).unwrap();
        prop_assert!(reprojected.components().sub(g.components()).sup_norm() <= 1e-13);
    }

    #[test]
    fn kobayashi_group_axioms(
        seeds in (0u64..1000, 1000u64..2000, 2000u64..3000),
        cherns in (-2i64..3, -2i64..3, -2i64..3),
        angles in prop::array::uniform6(-20.0f64..20.0),
    ) {
        let grid = grid();
        let c1 = class(&grid, seeds.0, cherns.0, angles[0], angles[1]);
        let c2 = class(&grid, seeds.1, cherns.1, angles[2], angles[3]);
        let c3 = class(&grid, seeds.2, cherns.2, angles[4], angles[5]);
        let id = CircleBundleClass::identity(&grid);
        prop_assert_eq!(kobayashi_add(&c1, &id).unwrap(), c1.clone());
        prop_assert!(kobayashi_add(&c1, &kobayashi_neg(&c1)).unwrap().distance(&id) <= 1e-14);
        let left = kobayashi_add(&kobayashi_add(&c1, &c2).unwrap(), &c3).unwrap();
        let right = kobayashi_add(&c1, &kobayashi_add(&c2, &c3).unwrap()).unwrap();
        prop_assert!(left.distance(&right) <= 1e-12);
        let ab = kobayashi_add(&c1, &c2).unwrap();
        prop_assert!(ab.distance(&kobayashi_add(&c2, &c1).unwrap()) <= 1e-12);
        prop_assert_eq!(ab.chern, cherns.0 + cherns.1);
    }

    #[test]
    fn wrapped_angles_are_canonical(a in -1e3f64..1e3) {
        let w = wrap_angle(a);
        prop_assert!((0.0..2.0 * PI).contains(&w));
        prop_assert!(angle_distance(w, a) <= 1e-12);
    }

    #[test]
    fn kappa_ignores_exact_forms(seed in 0u64..1_000_000, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let grid = grid();
        let mu = sample::random_volume_form(&grid, seed, 2, 0.3).unwrap();
        let x = sample::random_div_free(&mu, seed ^ 5, 2, 0.1, (a, b)).unwrap();
        let phi = sample::unit_field(&grid, seed ^ 9, 2, false).unwrap();
        let [d1, d2] = phi.gradient();
        prop_assert!(pairing_kappa(&x, &OneForm::new(d1, d2)).abs() <= 1e-11);
    }
}
