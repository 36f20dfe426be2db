//! Tangent vectors to the space of `μ`-compatible metrics, the symplectic form
//! `Ω_g(h₁, h₂) = −½ ∫ tr((g⁻¹h₁)(g⁻¹μ)(g⁻¹h₂)) μ`, and the curve
//! `t ↦ g·exp(t g⁻¹h)` used as the chart for every finite-difference check.

use crate::error::{GeomError, Result};
use crate::riemannian::Metric;
use crate::tensor::{mat_det, mat_inv, mat_mul, mat_trace, Mat2, SymTensor2};

/// Relative trace tolerance for [`TangentVector`].
pub const TRACE_TOL: f64 = 1e-10;

/// Lower-bound constant `c` in `Ω_g(h, h′) ≥ c ∫ |h|²_g μ` for the
/// I-rotated witness `h′`. The pointwise 2×2 computation gives equality with
/// `c = ½`: `tr(A (g⁻¹μ)² A) = −tr(A²)` for any `g`-trace-free `A = g⁻¹h`.
pub const WITNESS_CONSTANT: f64 = 0.5;

/// A `g`-trace-free symmetric covariant 2-tensor based at `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: Metric,
    h: SymTensor2,
}

fn trace_residual(g: &Metric, h: &SymTensor2) -> f64 {
    (0..g.grid().len())
        .map(|p| mat_trace(&mat_mul(&g.inverse_at(p), &h.at(p))).abs())
        .fold(0.0, f64::max)
}

impl TangentVector {
    pub fn new(base: &Metric, h: SymTensor2) -> Result<TangentVector> {
        crate::grid::check_same_grid(base.grid(), h.grid())?;
        let residual = trace_residual(base, &h);
        if !(residual <= TRACE_TOL * h.sup_norm()) {
            return Err(GeomError::NotTraceFree { residual });
        }
        Ok(TangentVector {
            base: base.clone(),
            h,
        })
    }

    pub(crate) fn new_unchecked(base: &Metric, h: SymTensor2) -> TangentVector {
        TangentVector {
            base: base.clone(),
            h,
        }
    }

    pub fn zero(base: &Metric) -> TangentVector {
        Self::new_unchecked(base, SymTensor2::zeros(base.grid()))
    }

    pub fn base(&self) -> &Metric {
        &self.base
    }

    pub fn tensor(&self) -> &SymTensor2 {
        &self.h
    }

    pub fn trace_residual(&self) -> f64 {
        trace_residual(&self.base, &self.h)
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        Self::new_unchecked(&self.base, self.h.scale(s))
    }

    pub fn add(&self, other: &TangentVector) -> Result<TangentVector> {
        if self.base != other.base {
            return Err(GeomError::BaseMismatch);
        }
        Ok(Self::new_unchecked(&self.base, self.h.add(&other.h)))
    }

    /// `∫ tr((g⁻¹h)²) μ`, the squared `L²` norm induced by `g`.
    pub fn norm_sq(&self) -> f64 {
        let g = &self.base;
        let mu = g.volume().density();
        (0..g.grid().len())
            .map(|p| {
                let a = mat_mul(&g.inverse_at(p), &self.h.at(p));
                mat_trace(&mat_mul(&a, &a)) * mu.at(p)
            })
            .sum::<f64>()
            / g.grid().len() as f64
    }
}

/// `h − ½ (g^ij h_ij) g`.
pub fn tracefree_project(h_raw: &SymTensor2, g: &Metric) -> TangentVector {
    let h = SymTensor2::from_pointwise(g.grid(), |p| tracefree_at(&h_raw.at(p), &g.at(p)));
    TangentVector::new_unchecked(g, h)
}

#[inline]
fn tracefree_at(h: &Mat2, g: &Mat2) -> Mat2 {
    let t = 0.5 * mat_trace(&mat_mul(&mat_inv(g), h));
    [
        [h[0][0] - t * g[0][0], h[0][1] - t * g[0][1]],
        [h[1][0] - t * g[1][0], h[1][1] - t * g[1][1]],
    ]
}

/// Integrand-level form without base checks.
pub(crate) fn omega_raw(g: &Metric, h1: &SymTensor2, h2: &SymTensor2) -> f64 {
    let len = g.grid().len();
    let mu = g.volume();
    let sum: f64 = (0..len)
        .map(|p| {
            let gi = g.inverse_at(p);
            let a1 = mat_mul(&gi, &h1.at(p));
            let j = mat_mul(&gi, &mu.matrix_at(p));
            let a2 = mat_mul(&gi, &h2.at(p));
            mat_trace(&mat_mul(&mat_mul(&a1, &j), &a2)) * mu.density().at(p)
        })
        .sum();
    -0.5 * sum / len as f64
}

/// The symplectic form on compatible metrics.
pub fn omega(g: &Metric, h1: &TangentVector, h2: &TangentVector) -> Result<f64> {
    if &h1.base != g || &h2.base != g {
        return Err(GeomError::BaseMismatch);
    }
    Ok(omega_raw(g, &h1.h, &h2.h))
}

/// `g_t = g·exp(t g⁻¹h)`, evaluated in closed form: with `A = g⁻¹h` trace-free,
/// `A² = δ² id` and `g_t = cosh(tδ) g + sinh(tδ)/δ · h`. The determinant, hence
/// compatibility, is preserved exactly.
pub fn metric_path(g: &Metric, h: &TangentVector, t: f64) -> Result<Metric> {
    if &h.base != g {
        return Err(GeomError::BaseMismatch);
    }
    path_raw(g, &h.h, t)
}

fn path_raw(g: &Metric, h: &SymTensor2, t: f64) -> Result<Metric> {
    let grid = g.grid();
    let gt = SymTensor2::from_pointwise(grid, |p| {
        let gm = g.at(p);
        let h0 = tracefree_at(&h.at(p), &gm);
        let delta_sq = -mat_det(&h0) / mat_det(&gm);
        let (c, s) = if delta_sq >= 0.0 {
            let dl = delta_sq.sqrt();
            let x = t * dl;
            if x.abs() < 1e-8 {
                (1.0 + 0.5 * x * x, t * (1.0 + x * x / 6.0))
            } else {
                (x.cosh(), x.sinh() / dl)
            }
        } else {
            let dl = (-delta_sq).sqrt();
            let x = t * dl;
            if x.abs() < 1e-8 {
                (1.0 - 0.5 * x * x, t * (1.0 - x * x / 6.0))
            } else {
                (x.cos(), x.sin() / dl)
            }
        };
        std::array::from_fn(|i| std::array::from_fn(|j| c * gm[i][j] + s * h0[i][j]))
    });
    match Metric::new(gt, g.volume().clone()) {
        Ok(m) => Ok(m),
        Err(GeomError::NotPositiveDefinite { x, y, .. }) => Err(GeomError::PathDegenerate { t, x, y }),
        Err(e) => Err(e),
    }
}

/// Derivative at `g` of the projection `g ↦ P_g(h)` in direction `k`:
/// `½ tr(g⁻¹k g⁻¹h) g − ½ tr(g⁻¹h) k`.
fn projection_derivative(g: &Metric, k: &SymTensor2, h: &SymTensor2) -> SymTensor2 {
    SymTensor2::from_pointwise(g.grid(), |p| {
        let gm = g.at(p);
        let gi = mat_inv(&gm);
        let km = k.at(p);
        let hm = h.at(p);
        let a = 0.5 * mat_trace(&mat_mul(&mat_mul(&gi, &km), &mat_mul(&gi, &hm)));
        let b = 0.5 * mat_trace(&mat_mul(&gi, &hm));
        std::array::from_fn(|i| std::array::from_fn(|j| a * gm[i][j] - b * km[i][j]))
    })
}

/// Finite-difference value of `dΩ(V₁, V₂, V₃)` at `g`, where `V_i(g') = P_{g'}(h_i)`
/// are the trace-free projections of constant-coefficient tensors.
///
/// Directional derivatives `V_i(Ω(V_j, V_k))` are central differences of step
/// `eps` along [`metric_path`]; Lie brackets use the exact derivative of the
/// projection. The result is `O(eps²)` since `Ω` is closed.
pub fn closedness_defect(g: &Metric, h: [&SymTensor2; 3], eps: f64) -> Result<f64> {
    for hi in h {
        crate::grid::check_same_grid(g.grid(), hi.grid())?;
    }
    let v: Vec<SymTensor2> = h.iter().map(|hi| tracefree_project(hi, g).h).collect();
    let pairing_at = |gp: &Metric, j: usize, k: usize| {
        let vj = tracefree_project(h[j], gp).h;
        let vk = tracefree_project(h[k], gp).h;
        omega_raw(gp, &vj, &vk)
    };
    let mut defect = 0.0;
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let plus = path_raw(g, &v[i], eps)?;
        let minus = path_raw(g, &v[i], -eps)?;
        defect += (pairing_at(&plus, j, k) - pairing_at(&minus, j, k)) / (2.0 * eps);
        let bracket = projection_derivative(g, &v[i], h[j]).sub(&projection_derivative(g, &v[j], h[i]));
        defect -= omega_raw(g, &bracket, &v[k]);
    }
    Ok(defect)
}

/// `h′ = μ g⁻¹ h` (the I-rotated tensor, symmetric for trace-free `h`) and the
/// value `Ω_g(h, h′) = ½ ∫ |h|²_g μ > 0`.
pub fn nondegeneracy_witness(g: &Metric, h: &TangentVector) -> Result<(TangentVector, f64)> {
    if &h.base != g {
        return Err(GeomError::BaseMismatch);
    }
    if h.h.sup_norm() == 0.0 {
        return Err(GeomError::ZeroTangent);
    }
    let rotated = SymTensor2::from_pointwise(g.grid(), |p| {
        let m = mat_mul(&mat_mul(&g.volume().matrix_at(p), &g.inverse_at(p)), &h.h.at(p));
        let off = 0.5 * (m[0][1] + m[1][0]);
        [[m[0][0], off], [off, m[1][1]]]
    });
    let witness = TangentVector::new_unchecked(g, rotated);
    let value = omega_raw(g, &h.h, &witness.h);
    Ok((witness, value))
}
