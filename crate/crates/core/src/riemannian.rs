//! Metrics compatible with a volume form, Levi-Civita connection, curvature
//! and the complex structure induced by a compatible metric.
//!
//! Orientation: `μ = f dx∧dy` with `μ_12 = +f`, `μ_21 = -f`. The complex
//! structure is `I = -g⁻¹μ`, the sign for which `μ(X, IX) > 0`.
//!
//! Most curvature routines come in two flavours: one taking a compatible
//! [`Metric`] and an `_of` variant that accepts any pointwise positive-definite
//! [`SymTensor2`]. The latter is what finite-difference checks along
//! non-compatible paths need.

use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::grid::{d, Grid, ScalarField};
use crate::tensor::{
    mat_det, mat_inv, mat_mul, ContraSymTensor2, Mat2, MixedTensor, SymTensor2, TwoForm,
    VectorField,
};

/// Relative tolerance for `sup|√det g − f| ≤ tol·‖f‖∞`.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeForm {
    density: ScalarField,
}

impl VolumeForm {
    pub fn new(density: ScalarField) -> Result<VolumeForm> {
        let grid = Arc::clone(density.grid());
        for p in 0..grid.len() {
            let v = density.at(p);
            if !(v > 0.0) {
                let (x, y) = grid.point(p);
                return Err(GeomError::NonPositiveDensity { value: v, x, y });
            }
        }
        Ok(VolumeForm { density })
    }

    /// The coordinate volume form `dx∧dy`.
    pub fn standard(grid: &Arc<Grid>) -> VolumeForm {
        VolumeForm {
            density: ScalarField::constant(grid, 1.0),
        }
    }

    pub fn density(&self) -> &ScalarField {
        &self.density
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.density.grid()
    }

    /// `μ_ij` at sample `p`.
    #[inline]
    pub fn matrix_at(&self, p: usize) -> Mat2 {
        let f = self.density.at(p);
        [[0.0, f], [-f, 0.0]]
    }

    pub fn as_two_form(&self) -> TwoForm {
        TwoForm::new(self.density.clone())
    }

    pub fn total(&self) -> f64 {
        self.density.mean()
    }

    /// `∫ φ μ`.
    pub fn integrate(&self, phi: &ScalarField) -> f64 {
        phi.values()
            .iter()
            .zip(self.density.values())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / phi.values().len() as f64
    }
}

fn check_positive_definite(g: &SymTensor2) -> Result<()> {
    let grid = g.grid();
    for p in 0..grid.len() {
        let m = g.at(p);
        let det = mat_det(&m);
        if !(m[0][0] > 0.0 && det > 0.0) {
            let (x, y) = grid.point(p);
            return Err(GeomError::NotPositiveDefinite {
                x,
                y,
                g11: m[0][0],
                det,
            });
        }
    }
    Ok(())
}

fn compatibility_residual(g: &SymTensor2, mu: &VolumeForm) -> f64 {
    (0..g.grid().len())
        .map(|p| (mat_det(&g.at(p)).sqrt() - mu.density.at(p)).abs())
        .fold(0.0, f64::max)
}

/// A Riemannian metric whose area form is `μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    g: SymTensor2,
    volume: VolumeForm,
}

impl Metric {
    /// Wraps components that are already compatible with `volume`.
    pub fn new(g: SymTensor2, volume: VolumeForm) -> Result<Metric> {
        crate::grid::check_same_grid(g.grid(), volume.grid())?;
        check_positive_definite(&g)?;
        let residual = compatibility_residual(&g, &volume);
        if !(residual <= COMPATIBILITY_TOL * volume.density.sup_norm()) {
            return Err(GeomError::Incompatible { residual });
        }
        Ok(Metric { g, volume })
    }

    /// The flat metric `δ` with the standard volume form.
    pub fn flat(grid: &Arc<Grid>) -> Metric {
        Metric {
            g: SymTensor2::constant(grid, [[1.0, 0.0], [0.0, 1.0]]),
            volume: VolumeForm::standard(grid),
        }
    }

    pub fn components(&self) -> &SymTensor2 {
        &self.g
    }

    pub fn volume(&self) -> &VolumeForm {
        &self.volume
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.g.grid()
    }

    #[inline]
    pub fn at(&self, p: usize) -> Mat2 {
        self.g.at(p)
    }

    #[inline]
    pub fn inverse_at(&self, p: usize) -> Mat2 {
        mat_inv(&self.g.at(p))
    }

    pub fn inverse(&self) -> ContraSymTensor2 {
        ContraSymTensor2::from_pointwise(self.grid(), |p| self.inverse_at(p))
    }

    pub fn compatibility_residual(&self) -> f64 {
        compatibility_residual(&self.g, &self.volume)
    }
}

/// Rescales `g_raw` pointwise by `f/√det g_raw`, the unique conformal factor
/// that makes its area form equal to `μ`.
pub fn project_compatible(g_raw: &SymTensor2, mu: &VolumeForm) -> Result<Metric> {
    crate::grid::check_same_grid(g_raw.grid(), mu.grid())?;
    check_positive_definite(g_raw)?;
    let g = SymTensor2::from_pointwise(g_raw.grid(), |p| {
        let m = g_raw.at(p);
        let s = mu.density.at(p) / mat_det(&m).sqrt();
        [[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]]
    });
    Ok(Metric {
        g,
        volume: mu.clone(),
    })
}

/// Christoffel symbols of the second kind, `Γ^k_ij`, symmetric in `i, j`.
#[derive(Clone, Debug)]
pub struct Christoffel {
    // [k][ij] with ij = 0:(1,1), 1:(1,2), 2:(2,2)
    gamma: [[ScalarField; 3]; 2],
}

#[inline]
fn sym_index(i: usize, j: usize) -> usize {
    i + j
}

impl Christoffel {
    /// `Γ^k_ij` with zero-based indices.
    pub fn get(&self, k: usize, i: usize, j: usize) -> &ScalarField {
        &self.gamma[k][sym_index(i, j)]
    }

    #[inline]
    pub fn at(&self, p: usize) -> [[[f64; 2]; 2]; 2] {
        std::array::from_fn(|k| {
            std::array::from_fn(|i| std::array::from_fn(|j| self.gamma[k][sym_index(i, j)].at(p)))
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.gamma[0][0].grid()
    }

    pub fn fields(&self) -> [&ScalarField; 6] {
        [
            &self.gamma[0][0],
            &self.gamma[0][1],
            &self.gamma[0][2],
            &self.gamma[1][0],
            &self.gamma[1][1],
            &self.gamma[1][2],
        ]
    }

    pub fn sup_norm(&self) -> f64 {
        self.fields().iter().map(|f| f.sup_norm()).fold(0.0, f64::max)
    }
}

/// `∂_l g_ij` as `[l][ij]`.
fn metric_partials(g: &SymTensor2) -> [[ScalarField; 3]; 2] {
    std::array::from_fn(|l| [d(&g.c11, l + 1), d(&g.c12, l + 1), d(&g.c22, l + 1)])
}

/// Levi-Civita connection of any positive-definite symmetric tensor field.
pub fn christoffel_of(g: &SymTensor2) -> Christoffel {
    let dg = metric_partials(g);
    let grid = g.grid();
    let len = grid.len();
    let mut out: [[Vec<f64>; 3]; 2] =
        std::array::from_fn(|_| std::array::from_fn(|_| Vec::with_capacity(len)));
    for p in 0..len {
        let ginv = mat_inv(&g.at(p));
        let dgp = |l: usize, i: usize, j: usize| dg[l][sym_index(i, j)].at(p);
        for (k, row) in out.iter_mut().enumerate() {
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                let mut s = 0.0;
                for l in 0..2 {
                    s += ginv[k][l] * (dgp(i, l, j) + dgp(j, l, i) - dgp(l, i, j));
                }
                row[sym_index(i, j)].push(0.5 * s);
            }
        }
    }
    let gamma = out.map(|row| row.map(|v| ScalarField::from_values(grid, v)));
    Christoffel { gamma }
}

pub fn christoffel(g: &Metric) -> Christoffel {
    christoffel_of(&g.g)
}

/// `sup |∂_k g_ij − Γ^l_ki g_lj − Γ^l_kj g_il|`, zero for the Levi-Civita connection.
pub fn metricity_residual(g: &SymTensor2, chr: &Christoffel) -> f64 {
    let dg = metric_partials(g);
    let mut worst: f64 = 0.0;
    for p in 0..g.grid().len() {
        let gm = g.at(p);
        let gam = chr.at(p);
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut r = dg[k][sym_index(i, j)].at(p);
                    for l in 0..2 {
                        r -= gam[l][k][i] * gm[l][j] + gam[l][k][j] * gm[i][l];
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
    }
    worst
}

/// `∂_m Γ^k_ij` as `[m][k][ij]`.
fn christoffel_partials(chr: &Christoffel) -> [[[ScalarField; 3]; 2]; 2] {
    std::array::from_fn(|m| {
        std::array::from_fn(|k| std::array::from_fn(|ij| d(&chr.gamma[k][ij], m + 1)))
    })
}

/// Ricci tensor `R_σν = ∂_ρΓ^ρ_νσ − ∂_νΓ^ρ_ρσ + Γ^ρ_ρλΓ^λ_νσ − Γ^ρ_νλΓ^λ_ρσ`,
/// computed from the connection without using the 2D relation to `S`.
pub fn ricci_of(g: &SymTensor2) -> SymTensor2 {
    let chr = christoffel_of(g);
    let dchr = christoffel_partials(&chr);
    SymTensor2::from_pointwise(g.grid(), |p| {
        let gam = chr.at(p);
        let dg = |m: usize, k: usize, i: usize, j: usize| dchr[m][k][sym_index(i, j)].at(p);
        std::array::from_fn(|s| {
            std::array::from_fn(|n| {
                let mut r = 0.0;
                for rho in 0..2 {
                    r += dg(rho, rho, n, s) - dg(n, rho, rho, s);
                    for lam in 0..2 {
                        r += gam[rho][rho][lam] * gam[lam][n][s] - gam[rho][n][lam] * gam[lam][rho][s];
                    }
                }
                r
            })
        })
    })
}

pub fn ricci(g: &Metric) -> SymTensor2 {
    ricci_of(&g.g)
}

/// Scalar curvature from the single independent component in two dimensions,
/// `S = 2 R_1212 / det g`.
pub fn scalar_curvature_of(g: &SymTensor2) -> ScalarField {
    let chr = christoffel_of(g);
    let dchr = christoffel_partials(&chr);
    let values = (0..g.grid().len())
        .map(|p| {
            let gam = chr.at(p);
            let gm = g.at(p);
            // R^ρ_{212} = ∂_1Γ^ρ_22 − ∂_2Γ^ρ_12 + Γ^ρ_1λ Γ^λ_22 − Γ^ρ_2λ Γ^λ_12
            let mut r1212 = 0.0;
            for rho in 0..2 {
                let mut r = dchr[0][rho][2].at(p) - dchr[1][rho][1].at(p);
                for lam in 0..2 {
                    r += gam[rho][0][lam] * gam[lam][1][1] - gam[rho][1][lam] * gam[lam][0][1];
                }
                r1212 += gm[0][rho] * r;
            }
            2.0 * r1212 / mat_det(&gm)
        })
        .collect();
    ScalarField::from_values(g.grid(), values)
}

pub fn scalar_curvature(g: &Metric) -> ScalarField {
    scalar_curvature_of(&g.g)
}

/// `g^ij h_ij`.
pub fn trace_of(h: &SymTensor2, g: &SymTensor2) -> ScalarField {
    let values = (0..g.grid().len())
        .map(|p| {
            let gi = mat_inv(&g.at(p));
            let hm = h.at(p);
            gi[0][0] * hm[0][0] + 2.0 * gi[0][1] * hm[0][1] + gi[1][1] * hm[1][1]
        })
        .collect();
    ScalarField::from_values(g.grid(), values)
}

/// `h^ij = g^ia h_ab g^bj`.
pub fn raise_both(h: &SymTensor2, g: &SymTensor2) -> ContraSymTensor2 {
    ContraSymTensor2::from_pointwise(g.grid(), |p| {
        let gi = mat_inv(&g.at(p));
        mat_mul(&mat_mul(&gi, &h.at(p)), &gi)
    })
}

/// `X_j = g_jk X^k`.
pub fn lower(x: &VectorField, g: &SymTensor2) -> VectorField {
    VectorField::from_pointwise(g.grid(), |p| {
        let gm = g.at(p);
        let v = x.at(p);
        [
            gm[0][0] * v[0] + gm[0][1] * v[1],
            gm[1][0] * v[0] + gm[1][1] * v[1],
        ]
    })
}

/// `∇_j h^kj = ∂_j h^kj + Γ^k_jl h^lj + Γ^j_jl h^kl`.
pub fn covariant_divergence_with(h: &ContraSymTensor2, chr: &Christoffel) -> VectorField {
    let grid = h.grid();
    let d11 = d(&h.c11, 1);
    let d12_1 = d(&h.c12, 1);
    let d12_2 = d(&h.c12, 2);
    let d22 = d(&h.c22, 2);
    VectorField::from_pointwise(grid, |p| {
        let gam = chr.at(p);
        let hm = h.at(p);
        let flat = [d11.at(p) + d12_2.at(p), d12_1.at(p) + d22.at(p)];
        std::array::from_fn(|k| {
            let mut v = flat[k];
            for j in 0..2 {
                for l in 0..2 {
                    v += gam[k][j][l] * hm[l][j] + gam[j][j][l] * hm[k][l];
                }
            }
            v
        })
    })
}

pub fn covariant_divergence(h_contra: &ContraSymTensor2, g: &Metric) -> VectorField {
    covariant_divergence_with(h_contra, &christoffel(g))
}

/// `∇_k Y^k = ∂_k Y^k + Γ^k_kl Y^l`.
pub fn vector_divergence(y: &VectorField, chr: &Christoffel) -> ScalarField {
    let d1 = d(&y.c[0], 1);
    let d2 = d(&y.c[1], 2);
    let values = (0..y.grid().len())
        .map(|p| {
            let gam = chr.at(p);
            let v = y.at(p);
            let mut s = d1.at(p) + d2.at(p);
            for k in 0..2 {
                for l in 0..2 {
                    s += gam[k][k][l] * v[l];
                }
            }
            s
        })
        .collect();
    ScalarField::from_values(y.grid(), values)
}

/// `∇_i ∇_j h^ij` for a covariant `h`, raised by `g`.
pub fn double_divergence_of(g: &SymTensor2, h: &SymTensor2) -> ScalarField {
    let chr = christoffel_of(g);
    let y = covariant_divergence_with(&raise_both(h, g), &chr);
    vector_divergence(&y, &chr)
}

/// Positive Laplacian `Δu = −(1/√det g) ∂_i(√det g g^ij ∂_j u)`.
pub fn laplacian_of(g: &SymTensor2, u: &ScalarField) -> ScalarField {
    let [du1, du2] = u.gradient();
    let flux = VectorField::from_pointwise(g.grid(), |p| {
        let gm = g.at(p);
        let gi = mat_inv(&gm);
        let s = mat_det(&gm).sqrt();
        let v = [du1.at(p), du2.at(p)];
        [
            s * (gi[0][0] * v[0] + gi[0][1] * v[1]),
            s * (gi[1][0] * v[0] + gi[1][1] * v[1]),
        ]
    });
    let div = &d(&flux.c[0], 1) + &d(&flux.c[1], 2);
    let values = (0..g.grid().len())
        .map(|p| -div.at(p) / mat_det(&g.at(p)).sqrt())
        .collect();
    ScalarField::from_values(g.grid(), values)
}

/// First variation of scalar curvature, `Δ(tr_g h) + ∇_i∇_j h^ij − R_ij h^ij`,
/// with `Δ` the positive Laplacian of [`laplacian_of`].
pub fn linearized_scalar_curvature_of(g: &SymTensor2, h: &SymTensor2) -> ScalarField {
    let lap = laplacian_of(g, &trace_of(h, g));
    let ddiv = double_divergence_of(g, h);
    let ric = ricci_of(g);
    let hup = raise_both(h, g);
    let values = (0..g.grid().len())
        .map(|p| {
            let r = ric.at(p);
            let hu = hup.at(p);
            let contraction = r[0][0] * hu[0][0] + 2.0 * r[0][1] * hu[0][1] + r[1][1] * hu[1][1];
            lap.at(p) + ddiv.at(p) - contraction
        })
        .collect();
    ScalarField::from_values(g.grid(), values)
}

pub fn linearized_scalar_curvature(g: &Metric, h: &SymTensor2) -> ScalarField {
    linearized_scalar_curvature_of(&g.g, h)
}

/// `I^i_j = −g^ik μ_kj`, the rotation by `+π/2` in every `g`-orthonormal
/// oriented frame.
pub fn complex_structure(g: &Metric) -> MixedTensor {
    MixedTensor::from_pointwise(g.grid(), |p| {
        let m = mat_mul(&g.inverse_at(p), &g.volume.matrix_at(p));
        [[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]]
    })
}

/// `(L_X g)_ij = X^k ∂_k g_ij + g_kj ∂_i X^k + g_ik ∂_j X^k`.
pub fn lie_derivative(x: &VectorField, g: &SymTensor2) -> SymTensor2 {
    let dg = metric_partials(g);
    let dx: [[ScalarField; 2]; 2] = std::array::from_fn(|k| x.c[k].gradient());
    SymTensor2::from_pointwise(g.grid(), |p| {
        let gm = g.at(p);
        let v = x.at(p);
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut s = 0.0;
                for k in 0..2 {
                    s += v[k] * dg[k][sym_index(i, j)].at(p)
                        + gm[k][j] * dx[k][i].at(p)
                        + gm[i][k] * dx[k][j].at(p);
                }
                s
            })
        })
    })
}

/// `∇_i X_j + ∇_j X_i`, the covariant form of `L_X g`.
pub fn killing_operator(x: &VectorField, g: &Metric) -> SymTensor2 {
    let chr = christoffel(g);
    let xl = lower(x, &g.g);
    let dxl: [[ScalarField; 2]; 2] = std::array::from_fn(|j| xl.c[j].gradient());
    SymTensor2::from_pointwise(g.grid(), |p| {
        let gam = chr.at(p);
        let v = xl.at(p);
        let nabla = |i: usize, j: usize| {
            dxl[j][i].at(p) - gam[0][i][j] * v[0] - gam[1][i][j] * v[1]
        };
        std::array::from_fn(|i| std::array::from_fn(|j| nabla(i, j) + nabla(j, i)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::random_band_limited;
    use crate::sample;
    use std::f64::consts::PI;

    fn x_only_metric(grid: &Arc<Grid>, amp: f64) -> Metric {
        let phi = ScalarField::from_fn(grid, |x, _| amp * (2.0 * PI * x).sin());
        let g = SymTensor2::new(
            phi.map(|v| (2.0 * v).exp()),
            ScalarField::zeros(grid),
            phi.map(|v| (-2.0 * v).exp()),
        );
        Metric::new(g, VolumeForm::standard(grid)).unwrap()
    }

    #[test]
    fn volume_form_rejects_non_positive_density() {
        let g = Grid::new(8).unwrap();
        let f = ScalarField::from_fn(&g, |x, _| x - 0.5);
        match VolumeForm::new(f) {
            Err(GeomError::NonPositiveDensity { value, .. }) => assert!(value <= 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn projection_examples() {
        let g = Grid::new(16).unwrap();
        let mu = VolumeForm::standard(&g);
        let id = SymTensor2::constant(&g, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(project_compatible(&id, &mu).unwrap().components(), &id);
        let four = SymTensor2::constant(&g, [[4.0, 0.0], [0.0, 4.0]]);
        let m = project_compatible(&four, &mu).unwrap();
        assert!(m.components().sub(&id).sup_norm() < 1e-15);
        let phi = ScalarField::from_fn(&g, |x, _| 0.3 * (2.0 * PI * x).sin());
        let e = phi.map(|v| (2.0 * v).exp());
        let conf = SymTensor2::new(e.clone(), ScalarField::zeros(&g), e);
        let m = project_compatible(&conf, &mu).unwrap();
        assert!(m.components().sub(&id).sup_norm() < 1e-14);
    }

    #[test]
    fn projection_reports_failure_location() {
        let g = Grid::new(8).unwrap();
        let bad = SymTensor2::from_pointwise(&g, |p| {
            if p == 9 {
                [[1.0, 2.0], [2.0, 1.0]]
            } else {
                [[1.0, 0.0], [0.0, 1.0]]
            }
        });
        match project_compatible(&bad, &VolumeForm::standard(&g)) {
            Err(GeomError::NotPositiveDefinite { x, y, det, .. }) => {
                assert_eq!((x, y), g.point(9));
                assert!(det < 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let g = Grid::new(32).unwrap();
        let m = sample::random_metric(&g, 3, 4, 0.3).unwrap();
        let again = project_compatible(m.components(), m.volume()).unwrap();
        assert!(again.components().sub(m.components()).sup_norm() <= 1e-13);
    }

    #[test]
    fn flat_connection_and_curvature_vanish() {
        let g = Grid::new(16).unwrap();
        let flat = Metric::flat(&g);
        assert!(christoffel(&flat).sup_norm() == 0.0);
        assert!(scalar_curvature(&flat).sup_norm() == 0.0);
    }

    #[test]
    fn christoffel_of_x_only_metric() {
        let g = Grid::new(64).unwrap();
        let amp = 0.2;
        let m = x_only_metric(&g, amp);
        let chr = christoffel(&m);
        let dphi = ScalarField::from_fn(&g, |x, _| 2.0 * PI * amp * (2.0 * PI * x).cos());
        let phi = ScalarField::from_fn(&g, |x, _| amp * (2.0 * PI * x).sin());
        let g122 = dphi.zip_with(&phi, |dp, p| (-4.0 * p).exp() * dp);
        assert!((chr.get(0, 0, 0) - &dphi).sup_norm() <= 1e-10);
        assert!((chr.get(0, 1, 1) - &g122).sup_norm() <= 1e-10);
        assert!((chr.get(1, 0, 1) + &dphi).sup_norm() <= 1e-10);
        assert!(chr.get(0, 0, 1).sup_norm() <= 1e-10);
        assert!(chr.get(1, 0, 0).sup_norm() <= 1e-10);
        assert!(chr.get(1, 1, 1).sup_norm() <= 1e-10);
    }

    #[test]
    fn scalar_curvature_of_x_only_metric() {
        // K = (φ'' − 2φ'²) e^{−2φ} for diag(e^{2φ}, e^{−2φ}); S = 2K.
        let g = Grid::new(64).unwrap();
        let amp = 0.2;
        let m = x_only_metric(&g, amp);
        let w = 2.0 * PI;
        let exact = ScalarField::from_fn(&g, |x, _| {
            let phi = amp * (w * x).sin();
            let d1 = amp * w * (w * x).cos();
            let d2 = -amp * w * w * (w * x).sin();
            2.0 * (d2 - 2.0 * d1 * d1) * (-2.0 * phi).exp()
        });
        let s = scalar_curvature(&m);
        assert!((&s - &exact).sup_norm() <= 1e-9, "{:e}", (&s - &exact).sup_norm());
    }

    #[test]
    fn metricity_on_random_metrics() {
        let g = Grid::new(32).unwrap();
        for seed in 0..10 {
            let m = sample::random_metric(&g, seed, 4, 0.3).unwrap();
            let r = metricity_residual(m.components(), &christoffel(&m));
            assert!(r <= 1e-10, "seed {seed}: {r:e}");
        }
    }

    #[test]
    fn pure_trace_direction_on_flat_torus() {
        let g = Grid::new(16).unwrap();
        let flat = Metric::flat(&g);
        let h = SymTensor2::constant(&g, [[0.7, 0.0], [0.0, 0.7]]);
        assert!(linearized_scalar_curvature(&flat, &h).sup_norm() < 1e-12);
        assert!(linearized_scalar_curvature(&flat, &SymTensor2::zeros(&g)).sup_norm() == 0.0);
    }

    #[test]
    fn conformal_variation_on_flat_torus() {
        // g_ε = e^{2εu} δ has S = −2 e^{−2εu} Δ₀(εu), so S' = −2 Δ₀ u (Δ₀ = ∂₁²+∂₂²).
        let g = Grid::new(32).unwrap();
        let u = random_band_limited(&g, 5, 3, 0.7, true).unwrap();
        let h = SymTensor2::new(u.scale(2.0), ScalarField::zeros(&g), u.scale(2.0));
        let lin = linearized_scalar_curvature(&Metric::flat(&g), &h);
        let lap0 = &d(&d(&u, 1), 1) + &d(&d(&u, 2), 2);
        assert!((&lin + &lap0.scale(2.0)).sup_norm() <= 1e-10 * lap0.sup_norm());
    }

    #[test]
    fn covariant_divergence_on_flat_metric_is_plain_divergence() {
        let g = Grid::new(32).unwrap();
        let flat = Metric::flat(&g);
        let h = ContraSymTensor2::new(
            random_band_limited(&g, 1, 4, 0.6, false).unwrap(),
            random_band_limited(&g, 2, 4, 0.6, false).unwrap(),
            random_band_limited(&g, 3, 4, 0.6, false).unwrap(),
        );
        let y = covariant_divergence(&h, &flat);
        let plain0 = &d(&h.c11, 1) + &d(&h.c12, 2);
        let plain1 = &d(&h.c12, 1) + &d(&h.c22, 2);
        assert!((&y.c[0] - &plain0).sup_norm() <= 1e-12);
        assert!((&y.c[1] - &plain1).sup_norm() <= 1e-12);
        let c = ContraSymTensor2::constant(&g, [[1.0, 2.0], [2.0, 3.0]]);
        assert!(covariant_divergence(&c, &flat).sup_norm() == 0.0);
    }

    #[test]
    fn divergence_theorem() {
        let g = Grid::new(32).unwrap();
        let m = sample::random_metric(&g, 8, 4, 0.3).unwrap();
        let chr = christoffel(&m);
        let h = sample::random_sym_tensor(&g, 9, 4);
        let y = covariant_divergence_with(&raise_both(&h, m.components()), &chr);
        let div = vector_divergence(&y, &chr);
        assert!(m.volume().integrate(&div).abs() <= 1e-11 * y.sup_norm().max(1.0));
    }

    #[test]
    fn complex_structure_conventions() {
        let g = Grid::new(16).unwrap();
        let i = complex_structure(&Metric::flat(&g));
        assert_eq!(i.at(3), [[0.0, -1.0], [1.0, 0.0]]);
        let m = sample::random_metric(&g, 1, 2, 0.3).unwrap();
        let i = complex_structure(&m);
        for p in [0, 17, 200] {
            let j = i.at(p);
            let sq = mat_mul(&j, &j);
            assert!((sq[0][0] + 1.0).abs() < 1e-11 && sq[0][1].abs() < 1e-11);
            // μ(X, IX) > 0
            let x = [0.3, -1.1];
            let ix = [j[0][0] * x[0] + j[0][1] * x[1], j[1][0] * x[0] + j[1][1] * x[1]];
            let mu = m.volume().matrix_at(p);
            assert!(x[0] * mu[0][1] * ix[1] + x[1] * mu[1][0] * ix[0] > 0.0);
        }
    }

    #[test]
    fn lie_derivative_matches_covariant_form() {
        let g = Grid::new(64).unwrap();
        let m = sample::random_metric(&g, 4, 4, 0.3).unwrap();
        let x = VectorField::new(
            random_band_limited(&g, 40, 4, 0.6, false).unwrap(),
            random_band_limited(&g, 41, 4, 0.6, false).unwrap(),
        );
        let a = lie_derivative(&x, m.components());
        let b = killing_operator(&x, &m);
        assert!(a.sub(&b).sup_norm() <= 1e-10 * a.sup_norm().max(1.0));
    }
}
