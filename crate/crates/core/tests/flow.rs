use std::sync::OnceLock;

use torus_momentum::diffeo::{flow, pushforward_metric, pushforward_tangent, DiscreteDiffeo, DivFreeField, MAX_FLOW_STEP};
use torus_momentum::grid::{Grid, Interpolator, ScalarField};
use torus_momentum::momentum::{angle_distance, canonical_class};
use torus_momentum::riemannian::{scalar_curvature, Metric};
use torus_momentum::sample;
use torus_momentum::symplectic::omega;

struct Fixture {
    g: Metric,
    x: DivFreeField,
    phi: DiscreteDiffeo,
}

fn fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let grid = Grid::new(64).unwrap();
        let g = sample::random_metric(&grid, 8, 4, 0.3).unwrap();
        let x = sample::random_div_free(g.volume(), 9, 4, 0.02, (0.3, -0.2)).unwrap();
        let phi = flow(&x, 0.1, MAX_FLOW_STEP).unwrap();
        Fixture { g, x, phi }
    })
}

#[test]
fn flow_preserves_volume_and_inverts() {
    let fx = fixture();
    assert!(fx.phi.volume_defect(fx.x.volume()) <= 1e-6);
    assert!(fx.phi.composition_residual() <= 1e-7);
}

#[test]
fn omega_is_invariant_under_pushforward() {
    let fx = fixture();
    let h1 = sample::random_tangent(&fx.g, 91, 4).unwrap();
    let h2 = sample::random_tangent(&fx.g, 92, 4).unwrap();
    let pushed = pushforward_metric(&fx.phi, &fx.g).unwrap();
    let before = omega(&fx.g, &h1, &h2).unwrap();
    let after = omega(&pushed, &pushforward_tangent(&fx.phi, &h1, &pushed), &pushforward_tangent(&fx.phi, &h2, &pushed)).unwrap();
    assert!((after - before).abs() <= 1e-5 * before.abs(), "{before} vs {after}");
}

/// Exploratory only: the finite-action law of the canonical class is not
/// asserted. Curvature should transport as `S∘φ⁻¹`; the generator holonomies
/// are printed for inspection.
#[test]
fn canonical_class_under_pushforward_exploratory() {
    let fx = fixture();
    let grid = fx.g.grid();
    let pushed = pushforward_metric(&fx.phi, &fx.g).unwrap();
    let before = canonical_class(&fx.g, 1e-2).unwrap();
    let after = canonical_class(&pushed, 1e-2).unwrap();
    let it = Interpolator::new(&[&scalar_curvature(&fx.g)]);
    let transported = ScalarField::from_values(
        grid,
        (0..grid.len())
            .map(|p| {
                let (x, y) = fx.phi.inverse_point(p);
                -it.eval1(x, y) * fx.g.volume().density().at(p)
            })
            .collect(),
    );
    let curvature_gap = (&after.curvature.c12 - &transported).sup_norm() / transported.sup_norm();
    println!(
        "relative curvature transport gap {curvature_gap:.3e}; holonomy shifts a {:.3e} b {:.3e}",
        angle_distance(after.hol_a, before.hol_a),
        angle_distance(after.hol_b, before.hol_b)
    );
    assert!(curvature_gap.is_finite() && after.chern == before.chern);
}
