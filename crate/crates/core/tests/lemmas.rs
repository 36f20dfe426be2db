use std::f64::consts::PI;
use std::sync::Arc;

use torus_momentum::diffeo::{div_free_from_stream, fundamental_vector, lemma1_rhs, pairing_kappa};
use torus_momentum::grid::{Grid, ScalarField};
use torus_momentum::momentum::{connection_alpha, dalpha_defect, divergence_identity_defect, momentum_residual};
use torus_momentum::riemannian::{christoffel, covariant_divergence_with, raise_both, Metric};
use torus_momentum::sample;
use torus_momentum::symplectic::{omega, TangentVector};
use torus_momentum::tensor::{mat_mul, OneForm, SymTensor2, VectorField};

struct Triple {
    g: Metric,
    x: torus_momentum::diffeo::DivFreeField,
    h: TangentVector,
}

fn triple(grid: &Arc<Grid>, seed: u64) -> Triple {
    let g = sample::random_metric(grid, seed, 4, 0.3).unwrap();
    let harmonic = if seed % 2 == 0 { (0.4, -0.25) } else { (0.0, 0.0) };
    let x = sample::random_div_free(g.volume(), seed + 500, 4, 0.05, harmonic).unwrap();
    let h = sample::random_tangent(&g, seed + 900, 4).unwrap();
    Triple { g, x, h }
}

fn scale(t: &Triple) -> f64 {
    t.x.vector().l2_norm() * t.h.tensor().l2_norm()
}

#[test]
fn lemma1_sides_agree() {
    let grid = Grid::new(64).unwrap();
    for seed in 0..4 {
        let t = triple(&grid, seed);
        let lhs = omega(&t.g, &fundamental_vector(&t.x, &t.g).unwrap(), &t.h).unwrap();
        let rhs = lemma1_rhs(&t.g, &t.x, &t.h).unwrap();
        assert!((lhs - rhs).abs() <= 1e-8 * scale(&t), "seed {seed}: {lhs} vs {rhs}");
        assert!(lhs.abs() > 1e-6 * scale(&t), "seed {seed}: degenerate sample");
    }
}

#[test]
fn momentum_residual_vanishes_with_harmonic_parts() {
    let grid = Grid::new(64).unwrap();
    for seed in 0..4 {
        let t = triple(&grid, seed);
        let r = momentum_residual(&t.g, &t.x, &t.h).unwrap();
        assert!(r.abs() <= 1e-8 * scale(&t), "seed {seed}: {r}");
    }
}

#[test]
fn momentum_residual_trivial_cases() {
    let grid = Grid::new(32).unwrap();
    let g = sample::random_metric(&grid, 3, 2, 0.3).unwrap();
    let h = sample::random_tangent(&g, 4, 2).unwrap();
    let zero_x = div_free_from_stream(&ScalarField::zeros(&grid), (0.0, 0.0), g.volume()).unwrap();
    assert_eq!(momentum_residual(&g, &zero_x, &h).unwrap(), 0.0);
    let x = sample::random_div_free(g.volume(), 5, 2, 0.05, (0.1, 0.2)).unwrap();
    assert_eq!(momentum_residual(&g, &x, &TangentVector::zero(&g)).unwrap(), 0.0);

    let flat = Metric::flat(&grid);
    let killing = div_free_from_stream(&ScalarField::zeros(&grid), (0.7, -1.3), flat.volume()).unwrap();
    let hf = sample::random_tangent(&flat, 8, 2).unwrap();
    assert!(fundamental_vector(&killing, &flat).unwrap().tensor().sup_norm() <= 1e-12);
    assert!(momentum_residual(&flat, &killing, &hf).unwrap().abs() <= 1e-10);
    assert!(lemma1_rhs(&flat, &killing, &hf).unwrap().abs() <= 1e-10);
}

#[test]
fn lemma1_rhs_vanishes_for_constant_h_on_flat_torus() {
    let grid = Grid::new(32).unwrap();
    let flat = Metric::flat(&grid);
    let h = TangentVector::new(&flat, SymTensor2::constant(&grid, [[0.3, -0.8], [-0.8, -0.3]])).unwrap();
    let x = sample::random_div_free(flat.volume(), 2, 3, 0.1, (0.2, 0.1)).unwrap();
    assert!(lemma1_rhs(&flat, &x, &h).unwrap().abs() <= 1e-12);
    assert!(connection_alpha(&flat, &h).unwrap().sup_norm() <= 1e-12);
}

#[test]
fn mu_contracted_tracefree_tensor_is_symmetric() {
    let grid = Grid::new(32).unwrap();
    let g = sample::random_metric(&grid, 11, 3, 0.3).unwrap();
    let h = sample::random_tangent(&g, 12, 3).unwrap();
    let worst = (0..grid.len())
        .map(|p| {
            let m = mat_mul(&mat_mul(&g.volume().matrix_at(p), &g.inverse_at(p)), &h.tensor().at(p));
            (0.5 * (m[0][1] - m[1][0])).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst <= 1e-11, "{worst}");
}

#[test]
fn integration_by_parts_step() {
    let grid = Grid::new(64).unwrap();
    let t = triple(&grid, 21);
    let chr = christoffel(&t.g);
    let hc = raise_both(t.h.tensor(), t.g.components());
    let x = t.x.vector();
    let dx: [[ScalarField; 2]; 2] = std::array::from_fn(|i| x.c[i].gradient());
    // ∇_j X^i μ_ik h^kj
    let lhs_density = ScalarField::from_values(
        &grid,
        (0..grid.len())
            .map(|p| {
                let gam = chr.at(p);
                let xv = x.at(p);
                let mu = t.g.volume().matrix_at(p);
                let hk = hc.at(p);
                let mut s = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        let nabla = dx[i][j].at(p) + gam[i][j][0] * xv[0] + gam[i][j][1] * xv[1];
                        for k in 0..2 {
                            s += nabla * mu[i][k] * hk[k][j];
                        }
                    }
                }
                s
            })
            .collect(),
    );
    let y = covariant_divergence_with(&hc, &chr);
    let rhs_density = ScalarField::from_values(
        &grid,
        (0..grid.len())
            .map(|p| {
                let (xv, yv, mu) = (x.at(p), y.at(p), t.g.volume().matrix_at(p));
                -(xv[0] * (mu[0][1] * yv[1]) + xv[1] * (mu[1][0] * yv[0]))
            })
            .collect(),
    );
    let lhs = t.g.volume().integrate(&lhs_density);
    let rhs = t.g.volume().integrate(&rhs_density);
    assert!((lhs - rhs).abs() <= 1e-9 * scale(&t), "{lhs} vs {rhs}");
}

#[test]
fn dalpha_identity_and_spectral_decay() {
    let mut worst = [0.0f64; 2];
    for (slot, n) in [32usize, 64].into_iter().enumerate() {
        let grid = Grid::new(n).unwrap();
        for seed in 0..3 {
            let g = sample::random_metric(&grid, seed, 4, 0.3).unwrap();
            let h = sample::random_tangent(&g, seed + 40, 4).unwrap();
            let rel = dalpha_defect(&g, &h).unwrap().sup_norm() / h.tensor().sup_norm();
            worst[slot] = worst[slot].max(rel);
        }
    }
    assert!(worst[1] <= 1e-8, "N=64 defect {}", worst[1]);
    assert!(worst[1] / worst[0] <= 1e-2, "ratio {}", worst[1] / worst[0]);
}

#[test]
fn dalpha_on_flat_torus() {
    let grid = Grid::new(64).unwrap();
    let flat = Metric::flat(&grid);
    let h = sample::random_tangent(&flat, 3, 4).unwrap();
    assert!(dalpha_defect(&flat, &h).unwrap().sup_norm() <= 1e-10);
}

#[test]
fn divergence_identity_for_arbitrary_fields() {
    let grid = Grid::new(64).unwrap();
    for seed in 0..4 {
        let g = sample::random_metric(&grid, seed, 4, 0.3).unwrap();
        let y = VectorField::new(
            sample::unit_field(&grid, seed + 60, 4, false).unwrap(),
            sample::unit_field(&grid, seed + 61, 4, false).unwrap().scale(2.0),
        );
        let defect = divergence_identity_defect(&g, &y).c12.sup_norm();
        assert!(defect <= 1e-9 * y.sup_norm(), "seed {seed}: {defect}");
    }
}

/// Forms spanning `Ω¹/dΩ⁰` up to `|k|∞ ≤ 2`: co-exact `(−k₂, k₁)·trig(2πk·x)`
/// over a half-lattice, plus `dx` and `dy`. Each comes with the stream or
/// harmonic generator that pairs with it.
fn probe_basis(grid: &Arc<Grid>, kmax: i64) -> Vec<(OneForm, ScalarField, (f64, f64))> {
    let mut out = Vec::new();
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            if (k1, k2) <= (0, 0) {
                continue;
            }
            for phase in [0.0, 0.5 * PI] {
                let trig = |x: f64, y: f64| (2.0 * PI * (k1 as f64 * x + k2 as f64 * y) + phase).cos();
                let alpha = OneForm::new(
                    ScalarField::from_fn(grid, |x, y| -(k2 as f64) * trig(x, y)),
                    ScalarField::from_fn(grid, |x, y| k1 as f64 * trig(x, y)),
                );
                let psi = ScalarField::from_fn(grid, |x, y| (2.0 * PI * (k1 as f64 * x + k2 as f64 * y) + phase).sin());
                out.push((alpha, psi, (0.0, 0.0)));
            }
        }
    }
    let one = ScalarField::constant(grid, 1.0);
    let zero = ScalarField::zeros(grid);
    out.push((OneForm::new(one.clone(), zero.clone()), zero.clone(), (0.0, 1.0)));
    out.push((OneForm::new(zero.clone(), one), zero, (1.0, 0.0)));
    out
}

#[test]
fn kappa_is_nondegenerate_on_low_band_quotient() {
    let grid = Grid::new(32).unwrap();
    let mu = sample::random_volume_form(&grid, 77, 3, 0.4).unwrap();
    let basis = probe_basis(&grid, 2);
    assert_eq!(basis.len(), 26);
    for (alpha, psi, harmonic) in &basis {
        let x = div_free_from_stream(psi, *harmonic, &mu).unwrap();
        let k = pairing_kappa(&x, alpha);
        assert!(k.abs() > 1e-3, "{k}");
    }
}
