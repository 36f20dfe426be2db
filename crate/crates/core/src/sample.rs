//! Seeded random inputs: volume forms, compatible metrics, tangent vectors and
//! divergence-free fields, all band-limited so that products of a few of them
//! stay resolved on the grid.

use std::sync::Arc;

use crate::diffeo::{div_free_from_stream, DivFreeField};
use crate::error::{GeomError, Result};
use crate::grid::{derive_seed, random_band_limited, Grid, ScalarField};
use crate::riemannian::{Metric, VolumeForm};
use crate::symplectic::{tracefree_project, TangentVector};
use crate::tensor::SymTensor2;

pub const DEFAULT_DECAY: f64 = 0.5;

fn check_metric_band(grid: &Grid, kmax: usize) -> Result<()> {
    if 8 * kmax > grid.n() {
        return Err(GeomError::BandLimitTooLarge {
            kmax,
            n: grid.n(),
            bound: "kmax <= N/8",
        });
    }
    Ok(())
}

/// Band-limited field rescaled to unit sup norm.
pub fn unit_field(grid: &Arc<Grid>, seed: u64, kmax: usize, zero_mean: bool) -> Result<ScalarField> {
    let f = random_band_limited(grid, seed, kmax, DEFAULT_DECAY, zero_mean)?;
    let s = f.sup_norm();
    Ok(if s > 0.0 { f.scale(1.0 / s) } else { f })
}

/// `μ = exp(amp·r) dx∧dy` for a zero-mean unit field `r`.
pub fn random_volume_form(grid: &Arc<Grid>, seed: u64, kmax: usize, amp: f64) -> Result<VolumeForm> {
    let r = unit_field(grid, derive_seed(seed, 0x766f6c), kmax, true)?;
    VolumeForm::new(r.map(|v| (amp * v).exp()))
}

/// A metric compatible with a random volume form: `g = f·exp(A)` where `A` is
/// a trace-free symmetric field with sup-norm entries of size `amp`, so that
/// `det g = f²` holds identically.
pub fn random_metric(grid: &Arc<Grid>, seed: u64, kmax: usize, amp: f64) -> Result<Metric> {
    check_metric_band(grid, kmax)?;
    let mu = random_volume_form(grid, seed, kmax, 0.5 * amp)?;
    random_metric_for(&mu, seed, kmax, amp)
}

/// A random metric compatible with the given volume form.
pub fn random_metric_for(mu: &VolumeForm, seed: u64, kmax: usize, amp: f64) -> Result<Metric> {
    let grid = mu.grid();
    check_metric_band(grid, kmax)?;
    let a = unit_field(grid, derive_seed(seed, 1), kmax, false)?.scale(amp);
    let b = unit_field(grid, derive_seed(seed, 2), kmax, false)?.scale(amp);
    let g = SymTensor2::from_pointwise(grid, |p| {
        let (a, b) = (a.at(p), b.at(p));
        let s = (a * a + b * b).sqrt();
        let (c, sh) = if s > 0.0 { (s.cosh(), s.sinh() / s) } else { (1.0, 1.0) };
        let f = mu.density().at(p);
        [
            [f * (c + sh * a), f * sh * b],
            [f * sh * b, f * (c - sh * a)],
        ]
    });
    Metric::new(g, mu.clone())
}

/// Symmetric tensor with unit-sup band-limited components.
pub fn random_sym_tensor(grid: &Arc<Grid>, seed: u64, kmax: usize) -> SymTensor2 {
    let comp = |k: u64| unit_field(grid, derive_seed(seed, 100 + k), kmax, false).expect("band limit checked by caller");
    SymTensor2::new(comp(0), comp(1), comp(2))
}

/// Random tangent vector at `g`: a random symmetric tensor made `g`-trace-free.
pub fn random_tangent(g: &Metric, seed: u64, kmax: usize) -> Result<TangentVector> {
    check_metric_band(g.grid(), kmax)?;
    Ok(tracefree_project(&random_sym_tensor(g.grid(), seed, kmax), g))
}

/// Random divergence-free field whose stream function has sup norm `amp`.
pub fn random_div_free(
    mu: &VolumeForm,
    seed: u64,
    kmax: usize,
    amp: f64,
    harmonic: (f64, f64),
) -> Result<DivFreeField> {
    let psi = unit_field(mu.grid(), derive_seed(seed, 200), kmax, true)?.scale(amp);
    div_free_from_stream(&psi, harmonic, mu)
}
