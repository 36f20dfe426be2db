//! Divergence-free vector fields, their flows, and the action of
//! volume-preserving diffeomorphisms on metrics.
//!
//! A field is encoded by its stream function: `X⌟μ = dψ + a dx + b dy`.
//! With `μ_12 = f` this reads `X¹ = (∂₂ψ + b)/f`, `X² = −(∂₁ψ + a)/f`.

use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::grid::{d, Interpolator, ScalarField};
use crate::riemannian::{
    christoffel, covariant_divergence_with, lie_derivative, project_compatible, raise_both,
    Metric, VolumeForm,
};
use crate::symplectic::{omega_raw, tracefree_project, TangentVector};
use crate::tensor::{mat_det, mat_mul, mat_trace, mat_transpose, OneForm, SymTensor2, VectorField};

/// Largest accepted RK4 step for [`flow`].
pub const MAX_FLOW_STEP: f64 = 1e-2;
/// Relative volume defect above which a flow is rejected.
pub const FLOW_VOLUME_LIMIT: f64 = 1e-4;
/// Relative compatibility residual accepted by [`pushforward_metric`].
pub const PUSHFORWARD_TOL: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct DivFreeField {
    stream: ScalarField,
    harmonic: (f64, f64),
    volume: VolumeForm,
    field: VectorField,
}

impl DivFreeField {
    pub fn stream(&self) -> &ScalarField {
        &self.stream
    }

    pub fn harmonic(&self) -> (f64, f64) {
        self.harmonic
    }

    pub fn volume(&self) -> &VolumeForm {
        &self.volume
    }

    pub fn vector(&self) -> &VectorField {
        &self.field
    }

    /// `X⌟μ` recomputed from the components: `(−f X², f X¹)`.
    pub fn contraction(&self) -> OneForm {
        let f = self.volume.density();
        OneForm::new(-&(f * &self.field.c[1]), f * &self.field.c[0])
    }

    /// `sup |d(X⌟μ)|`.
    pub fn closedness_residual(&self) -> f64 {
        let beta = self.contraction();
        (&d(&beta.c[1], 1) - &d(&beta.c[0], 2)).sup_norm()
    }

    pub fn scale(&self, s: f64) -> DivFreeField {
        DivFreeField {
            stream: self.stream.scale(s),
            harmonic: (s * self.harmonic.0, s * self.harmonic.1),
            volume: self.volume.clone(),
            field: self.field.scale(s),
        }
    }
}

pub fn div_free_from_stream(psi: &ScalarField, harmonic: (f64, f64), mu: &VolumeForm) -> Result<DivFreeField> {
    crate::grid::check_same_grid(psi.grid(), mu.grid())?;
    let mean = psi.mean();
    if mean.abs() > 1e-12 * psi.sup_norm().max(1.0) {
        return Err(GeomError::StreamNotZeroMean(mean));
    }
    let (a, b) = harmonic;
    let f = mu.density();
    let x1 = d(psi, 2).zip_with(f, |v, f| (v + b) / f);
    let x2 = d(psi, 1).zip_with(f, |v, f| -(v + a) / f);
    Ok(DivFreeField {
        stream: psi.clone(),
        harmonic,
        volume: mu.clone(),
        field: VectorField::new(x1, x2),
    })
}

/// `X·g = −L_X g`. For compatible `g` and divergence-free `X` this is
/// automatically trace-free; a trace residual signals a mismatched volume form.
pub fn fundamental_vector(x: &DivFreeField, g: &Metric) -> Result<TangentVector> {
    if &x.volume != g.volume() {
        return Err(GeomError::VolumeMismatch);
    }
    let lie = lie_derivative(&x.field, g.components());
    let minus = lie.scale(-1.0);
    let tv = TangentVector::new_unchecked(g, minus);
    let residual = tv.trace_residual();
    if !(residual <= 1e-9 * lie.sup_norm() + 1e-14) {
        return Err(GeomError::NotTraceFree { residual });
    }
    Ok(tv)
}

/// `κ(X, [α]) = ∫ (X⌟α) μ`.
pub fn pairing_kappa(x: &DivFreeField, alpha: &OneForm) -> f64 {
    let f = x.volume.density();
    let len = f.values().len();
    (0..len)
        .map(|p| {
            let v = x.field.at(p);
            let a = alpha.at(p);
            (v[0] * a[0] + v[1] * a[1]) * f.at(p)
        })
        .sum::<f64>()
        / len as f64
}

/// `−∫ X^i (μ_ik ∇_j h^kj) μ`.
pub fn lemma1_rhs(g: &Metric, x: &DivFreeField, h: &TangentVector) -> Result<f64> {
    if h.base() != g {
        return Err(GeomError::BaseMismatch);
    }
    if &x.volume != g.volume() {
        return Err(GeomError::VolumeMismatch);
    }
    let hup = raise_both(h.tensor(), g.components());
    let div = covariant_divergence_with(&hup, &christoffel(g));
    let mu = g.volume();
    let len = g.grid().len();
    let sum: f64 = (0..len)
        .map(|p| {
            let m = mu.matrix_at(p);
            let y = div.at(p);
            let v = x.field.at(p);
            let mut s = 0.0;
            for i in 0..2 {
                for k in 0..2 {
                    s += v[i] * m[i][k] * y[k];
                }
            }
            s * mu.density().at(p)
        })
        .sum();
    Ok(-sum / len as f64)
}

/// `Ω_g(−L_X g, h) − lemma1_rhs(g, X, h)` without certifying that `−L_X g` is
/// trace-free, for grids too coarse for [`fundamental_vector`] to accept.
pub fn lemma1_gap(g: &Metric, x: &DivFreeField, h: &TangentVector) -> Result<f64> {
    let lhs = omega_raw(g, &lie_derivative(&x.field, g.components()).scale(-1.0), h.tensor());
    Ok(lhs - lemma1_rhs(g, x, h)?)
}

/// A volume-preserving map near the identity, sampled on the lattice as
/// periodic displacements `Φ(x) − x` together with its inverse.
#[derive(Clone, Debug)]
pub struct DiscreteDiffeo {
    forward: [ScalarField; 2],
    inverse: [ScalarField; 2],
}

impl DiscreteDiffeo {
    pub fn identity(grid: &std::sync::Arc<crate::grid::Grid>) -> DiscreteDiffeo {
        let z = || [ScalarField::zeros(grid), ScalarField::zeros(grid)];
        DiscreteDiffeo {
            forward: z(),
            inverse: z(),
        }
    }

    pub fn forward_displacement(&self) -> &[ScalarField; 2] {
        &self.forward
    }

    pub fn inverse_displacement(&self) -> &[ScalarField; 2] {
        &self.inverse
    }

    /// `Φ(x_p)` reduced to `[0,1)²`.
    pub fn forward_point(&self, p: usize) -> (f64, f64) {
        let (x, y) = self.forward[0].grid().point(p);
        (
            (x + self.forward[0].at(p)).rem_euclid(1.0),
            (y + self.forward[1].at(p)).rem_euclid(1.0),
        )
    }

    /// `Φ⁻¹(x_p)` reduced to `[0,1)²`.
    pub fn inverse_point(&self, p: usize) -> (f64, f64) {
        let (x, y) = self.inverse[0].grid().point(p);
        (
            (x + self.inverse[0].at(p)).rem_euclid(1.0),
            (y + self.inverse[1].at(p)).rem_euclid(1.0),
        )
    }

    /// `Φ` at an arbitrary point, unwrapped (not reduced mod 1).
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let it = Interpolator::new(&[&self.forward[0], &self.forward[1]]);
        let mut out = [0.0; 2];
        it.eval(x, y, &mut out);
        (x + out[0], y + out[1])
    }

    /// Sup distance between `Φ(Φ⁻¹(x))` and `x` over the lattice.
    pub fn composition_residual(&self) -> f64 {
        let grid = self.forward[0].grid();
        let it = Interpolator::new(&[&self.forward[0], &self.forward[1]]);
        (0..grid.len())
            .into_par_iter()
            .map(|p| {
                let (x, y) = grid.point(p);
                let (u, v) = (x + self.inverse[0].at(p), y + self.inverse[1].at(p));
                let mut out = [0.0; 2];
                it.eval(u, v, &mut out);
                torus_distance((u + out[0], v + out[1]), (x, y))
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `sup |f(Φ(x)) det DΦ(x) − f(x)| / ‖f‖∞`, the defect of `Φ*μ = μ`.
    pub fn volume_defect(&self, mu: &VolumeForm) -> f64 {
        let grid = mu.grid();
        let f = mu.density();
        let jac = jacobian(&self.forward);
        let it = Interpolator::new(&[f]);
        let worst = (0..grid.len())
            .into_par_iter()
            .map(|p| {
                let (x, y) = grid.point(p);
                let fx = it.eval1(x + self.forward[0].at(p), y + self.forward[1].at(p));
                (fx * mat_det(&jac(p)) - f.at(p)).abs()
            })
            .reduce(|| 0.0, f64::max);
        worst / f.sup_norm()
    }
}

fn torus_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let w = |t: f64| t - t.round();
    w(a.0 - b.0).hypot(w(a.1 - b.1))
}

/// `J^i_j = δ^i_j + ∂_j D^i` for a displacement field `D`.
fn jacobian(disp: &[ScalarField; 2]) -> impl Fn(usize) -> [[f64; 2]; 2] {
    let dd: [[ScalarField; 2]; 2] = std::array::from_fn(|i| disp[i].gradient());
    move |p| {
        [
            [1.0 + dd[0][0].at(p), dd[0][1].at(p)],
            [dd[1][0].at(p), 1.0 + dd[1][1].at(p)],
        ]
    }
}

fn integrate_points(it: &Interpolator, grid: &std::sync::Arc<crate::grid::Grid>, t: f64, dt: f64) -> [ScalarField; 2] {
    let steps = (t.abs() / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t / steps as f64 };
    let rhs = |x: f64, y: f64| {
        let mut out = [0.0; 2];
        it.eval(x, y, &mut out);
        out
    };
    let disp: Vec<[f64; 2]> = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let (x0, y0) = grid.point(p);
            let (mut x, mut y) = (x0, y0);
            for _ in 0..steps {
                let k1 = rhs(x, y);
                let k2 = rhs(x + 0.5 * h * k1[0], y + 0.5 * h * k1[1]);
                let k3 = rhs(x + 0.5 * h * k2[0], y + 0.5 * h * k2[1]);
                let k4 = rhs(x + h * k3[0], y + h * k3[1]);
                x += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
                y += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            }
            [x - x0, y - y0]
        })
        .collect();
    [
        ScalarField::from_values(grid, disp.iter().map(|v| v[0]).collect()),
        ScalarField::from_values(grid, disp.iter().map(|v| v[1]).collect()),
    ]
}

/// Time-`t` flow of `X` by RK4 with step at most `dt`; the inverse is the
/// time-`(−t)` flow.
pub fn flow(x: &DivFreeField, t: f64, dt: f64) -> Result<DiscreteDiffeo> {
    if !(dt > 0.0 && dt <= MAX_FLOW_STEP) {
        return Err(GeomError::StepTooLarge(dt));
    }
    let grid = x.volume.grid();
    let it = Interpolator::new(&[&x.field.c[0], &x.field.c[1]]);
    let phi = DiscreteDiffeo {
        forward: integrate_points(&it, grid, t, dt),
        inverse: integrate_points(&it, grid, -t, dt),
    };
    let defect = phi.volume_defect(&x.volume);
    if !(defect <= FLOW_VOLUME_LIMIT) {
        return Err(GeomError::VolumeDefect {
            defect,
            limit: FLOW_VOLUME_LIMIT,
        });
    }
    Ok(phi)
}

/// `(φ_*h)_ij(x) = (∂φ⁻¹)^k_i (∂φ⁻¹)^l_j h_kl(φ⁻¹(x))` for any symmetric tensor.
pub fn pushforward_tensor(phi: &DiscreteDiffeo, h: &SymTensor2) -> SymTensor2 {
    let grid = h.grid();
    let jac = jacobian(&phi.inverse);
    let it = Interpolator::new(&[&h.c11, &h.c12, &h.c22]);
    let vals: Vec<[[f64; 2]; 2]> = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            let (x, y) = grid.point(p);
            let mut c = [0.0; 3];
            it.eval(x + phi.inverse[0].at(p), y + phi.inverse[1].at(p), &mut c);
            let hm = [[c[0], c[1]], [c[1], c[2]]];
            let j = jac(p);
            mat_mul(&mat_mul(&mat_transpose(&j), &hm), &j)
        })
        .collect();
    SymTensor2::from_pointwise(grid, |p| vals[p])
}

/// Push-forward of a compatible metric. The result is certified compatible to
/// [`PUSHFORWARD_TOL`] and then rescaled onto the exact constraint.
pub fn pushforward_metric(phi: &DiscreteDiffeo, g: &Metric) -> Result<Metric> {
    let pushed = pushforward_tensor(phi, g.components());
    let f = g.volume().density();
    let residual = (0..g.grid().len())
        .map(|p| (mat_det(&pushed.at(p)).sqrt() - f.at(p)).abs())
        .fold(0.0, f64::max);
    if !(residual <= PUSHFORWARD_TOL * f.sup_norm()) {
        return Err(GeomError::Incompatible { residual });
    }
    project_compatible(&pushed, g.volume())
}

/// Push-forward of a tangent vector, re-projected trace-free at `pushed_base`.
pub fn pushforward_tangent(phi: &DiscreteDiffeo, h: &TangentVector, pushed_base: &Metric) -> TangentVector {
    tracefree_project(&pushforward_tensor(phi, h.tensor()), pushed_base)
}

/// `sup |g^ij (L_X g)_ij|`.
pub fn lie_trace_residual(x: &DivFreeField, g: &Metric) -> f64 {
    let lie = lie_derivative(&x.field, g.components());
    (0..g.grid().len())
        .map(|p| mat_trace(&mat_mul(&g.inverse_at(p), &lie.at(p))).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::sample;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_only_field_is_constant() {
        let grid = Grid::new(16).unwrap();
        let mu = VolumeForm::standard(&grid);
        let x = div_free_from_stream(&ScalarField::zeros(&grid), (1.0, 0.0), &mu).unwrap();
        assert_eq!(x.vector().at(5), [0.0, -1.0]);
        let beta = x.contraction();
        assert_eq!(beta.at(7), [1.0, 0.0]);
    }

    #[test]
    fn exact_stream_field_is_closed() {
        let grid = Grid::new(32).unwrap();
        let mu = VolumeForm::standard(&grid);
        let psi = ScalarField::from_fn(&grid, |x, _| (2.0 * PI * x).sin());
        let x = div_free_from_stream(&psi, (0.0, 0.0), &mu).unwrap();
        let beta = x.contraction();
        let expected = ScalarField::from_fn(&grid, |x, _| 2.0 * PI * (2.0 * PI * x).cos());
        assert!((&beta.c[0] - &expected).sup_norm() <= 1e-12);
        assert!(beta.c[1].sup_norm() <= 1e-12);
        assert!(x.closedness_residual() <= 1e-12);
    }

    #[test]
    fn rejects_stream_with_mean() {
        let grid = Grid::new(8).unwrap();
        let mu = VolumeForm::standard(&grid);
        let psi = ScalarField::constant(&grid, 0.5);
        assert!(matches!(
            div_free_from_stream(&psi, (0.0, 0.0), &mu),
            Err(GeomError::StreamNotZeroMean(_))
        ));
    }

    #[test]
    fn random_fields_are_divergence_free() {
        let grid = Grid::new(32).unwrap();
        let mu = sample::random_volume_form(&grid, 3, 4, 0.2).unwrap();
        let x = sample::random_div_free(&mu, 4, 4, 0.1, (0.3, -0.2)).unwrap();
        assert!(x.closedness_residual() <= 1e-11);
    }

    #[test]
    fn zero_and_killing_fields_have_zero_fundamental_vector() {
        let grid = Grid::new(16).unwrap();
        let flat = Metric::flat(&grid);
        let mu = flat.volume();
        let zero = div_free_from_stream(&ScalarField::zeros(&grid), (0.0, 0.0), mu).unwrap();
        assert_eq!(fundamental_vector(&zero, &flat).unwrap().tensor().sup_norm(), 0.0);
        let trans = div_free_from_stream(&ScalarField::zeros(&grid), (0.4, -1.3), mu).unwrap();
        assert!(fundamental_vector(&trans, &flat).unwrap().tensor().sup_norm() <= 1e-14);
    }

    #[test]
    fn fundamental_vector_rejects_foreign_volume() {
        let grid = Grid::new(16).unwrap();
        let g = sample::random_metric(&grid, 1, 2, 0.3).unwrap();
        let other = sample::random_volume_form(&grid, 99, 2, 0.3).unwrap();
        let x = sample::random_div_free(&other, 2, 2, 0.1, (0.0, 0.0)).unwrap();
        assert_eq!(fundamental_vector(&x, &g).unwrap_err(), GeomError::VolumeMismatch);
    }

    #[test]
    fn kappa_examples() {
        let grid = Grid::new(32).unwrap();
        let mu = VolumeForm::standard(&grid);
        // X⌟μ = dx ⇒ X = (0, −1); pairing with c·dy is −c.
        let x = div_free_from_stream(&ScalarField::zeros(&grid), (1.0, 0.0), &mu).unwrap();
        let c = 2.5;
        let alpha = OneForm::constant(&grid, [0.0, c]);
        let oracle = 0.0 * 0.0 + (-1.0) * c;
        assert!((pairing_kappa(&x, &alpha) - oracle).abs() <= 1e-14);
    }

    #[test]
    fn kappa_vanishes_on_exact_forms() {
        let grid = Grid::new(32).unwrap();
        let mu = sample::random_volume_form(&grid, 5, 4, 0.3).unwrap();
        let x = sample::random_div_free(&mu, 6, 4, 0.2, (0.5, 0.7)).unwrap();
        let phi = sample::unit_field(&grid, 77, 4, false).unwrap();
        let [p1, p2] = phi.gradient();
        let dphi = OneForm::new(p1, p2);
        assert!(pairing_kappa(&x, &dphi).abs() <= 1e-11);
    }

    #[test]
    fn flow_examples() {
        let grid = Grid::new(16).unwrap();
        let mu = VolumeForm::standard(&grid);
        let trans = div_free_from_stream(&ScalarField::zeros(&grid), (0.0, 1.0), &mu).unwrap();
        assert_eq!(trans.vector().at(0), [1.0, 0.0]);
        let id = flow(&trans, 0.0, 1e-2).unwrap();
        assert_eq!(id.forward_displacement()[0].sup_norm(), 0.0);
        let phi = flow(&trans, 0.25, 1e-2).unwrap();
        for p in [0, 13, 200] {
            let (x, y) = grid.point(p);
            let (u, v) = phi.forward_point(p);
            assert!(((u - x - 0.25).rem_euclid(1.0)).min((x + 0.25 - u).rem_euclid(1.0)) < 1e-13);
            assert!((v - y).abs() < 1e-13);
        }
        assert!(matches!(flow(&trans, 0.1, 0.05), Err(GeomError::StepTooLarge(_))));
    }

    #[test]
    fn pushforward_by_identity_and_translation() {
        let grid = Grid::new(16).unwrap();
        let g = sample::random_metric(&grid, 3, 2, 0.3).unwrap();
        let id = DiscreteDiffeo::identity(&grid);
        assert!(pushforward_metric(&id, &g).unwrap().components().sub(g.components()).sup_norm() <= 1e-13);
        let flat = Metric::flat(&grid);
        let trans = div_free_from_stream(&ScalarField::zeros(&grid), (0.3, 0.2), flat.volume()).unwrap();
        let phi = flow(&trans, 0.1, 1e-2).unwrap();
        assert!(pushforward_metric(&phi, &flat).unwrap().components().sub(flat.components()).sup_norm() <= 1e-12);
    }
}
