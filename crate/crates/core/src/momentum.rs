//! The canonical circle bundle of a compatible metric, its torus model in
//! `Ĥ²(T², U(1))`, and the momentum-map identity
//! `Ω_g(X·g, h) + κ(X, α_h) = 0` with `α_h = μ_ik ∇_j h^kj`.
//!
//! Frame transport rotates a `g`-orthonormal frame by `θ = ∫_Σ K dA` around a
//! counter-clockwise contractible loop `∂Σ`. The canonical-bundle connection
//! carries holonomy `exp(−i·KAPPA_CONV·θ)` and curvature
//! `−KAPPA_CONV·(S/C_NORM)·μ`; with `S = 2K` both constants equal 2, which
//! makes the curvature `−S μ` and the logarithmic derivative of the holonomy
//! exactly `∮ α_h`. [`calibrate_conventions`] re-derives the pair numerically.

use std::f64::consts::PI;

use crate::diffeo::{fundamental_vector, pairing_kappa, DivFreeField};
use crate::error::{GeomError, Result};
use crate::grid::{check_same_grid, d, Interpolator, ScalarField};
use crate::quadrature::gauss_legendre;
use crate::riemannian::{
    christoffel, christoffel_of, covariant_divergence_with, double_divergence_of, raise_both,
    scalar_curvature, vector_divergence, Metric,
};
use crate::symplectic::{metric_path, omega, TangentVector};
use crate::tensor::{OneForm, TwoForm, VectorField};

/// Multiplier from the frame rotation angle to the canonical-bundle phase.
pub const KAPPA_CONV: f64 = 2.0;
/// Ratio of scalar curvature to the frame-rotation density `θ/A`.
pub const C_NORM: f64 = 2.0;
/// Default arclength step for frame transport.
pub const TRANSPORT_DT: f64 = 2e-3;
/// Tolerance for `|∫ curvature − 2π·chern|`.
pub const QUANTIZATION_TOL: f64 = 1e-8;

const TWO_PI: f64 = 2.0 * PI;

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let r = (a - b).rem_euclid(TWO_PI);
    r.min(TWO_PI - r)
}

/// A gauge class of circle bundles with connection on the torus: curvature
/// 2-form, holonomies along the two generators, and Chern number.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleBundleClass {
    pub curvature: TwoForm,
    pub hol_a: f64,
    pub hol_b: f64,
    pub chern: i64,
}

impl CircleBundleClass {
    /// Canonicalizes the angles and checks curvature quantization.
    pub fn new(curvature: TwoForm, hol_a: f64, hol_b: f64) -> Result<CircleBundleClass> {
        let integral = crate::tensor::integrate(&curvature);
        let chern = (integral / TWO_PI).round();
        if !((integral - TWO_PI * chern).abs() <= QUANTIZATION_TOL) {
            return Err(GeomError::Quantization { integral });
        }
        Ok(CircleBundleClass {
            curvature,
            hol_a: wrap_angle(hol_a),
            hol_b: wrap_angle(hol_b),
            chern: chern as i64,
        })
    }

    /// The trivial bundle with the trivial connection.
    pub fn identity(grid: &std::sync::Arc<crate::grid::Grid>) -> CircleBundleClass {
        CircleBundleClass {
            curvature: TwoForm::zeros(grid),
            hol_a: 0.0,
            hol_b: 0.0,
            chern: 0,
        }
    }

    /// Largest discrepancy in curvature (sup) or holonomy (mod 2π); `∞` if the
    /// Chern numbers differ.
    pub fn distance(&self, other: &CircleBundleClass) -> f64 {
        if self.chern != other.chern {
            return f64::INFINITY;
        }
        (&self.curvature.c12 - &other.curvature.c12)
            .sup_norm()
            .max(angle_distance(self.hol_a, other.hol_a))
            .max(angle_distance(self.hol_b, other.hol_b))
    }
}

/// Fiber-product sum: curvatures add, holonomies multiply, Chern numbers add.
pub fn kobayashi_add(c1: &CircleBundleClass, c2: &CircleBundleClass) -> Result<CircleBundleClass> {
    check_same_grid(c1.curvature.grid(), c2.curvature.grid())?;
    Ok(CircleBundleClass {
        curvature: c1.curvature.add(&c2.curvature),
        hol_a: wrap_angle(c1.hol_a + c2.hol_a),
        hol_b: wrap_angle(c1.hol_b + c2.hol_b),
        chern: c1.chern + c2.chern,
    })
}

/// The same bundle with the opposite circle action.
pub fn kobayashi_neg(c: &CircleBundleClass) -> CircleBundleClass {
    CircleBundleClass {
        curvature: c.curvature.neg(),
        hol_a: wrap_angle(-c.hol_a),
        hol_b: wrap_angle(-c.hol_b),
        chern: -c.chern,
    }
}

/// Closed piecewise-linear loop in unwrapped chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Loop {
    points: Vec<[f64; 2]>,
    winding: (i64, i64),
}

impl Loop {
    /// `points` are the vertices in order; the last vertex must coincide with
    /// the first modulo `ℤ²`, and the integer offset is the winding.
    pub fn polyline(points: Vec<[f64; 2]>) -> Result<Loop> {
        let first = points[0];
        let last = *points.last().unwrap();
        let (dx, dy) = (last[0] - first[0], last[1] - first[1]);
        if points.len() < 2 || (dx - dx.round()).abs() > 1e-9 || (dy - dy.round()).abs() > 1e-9 {
            return Err(GeomError::OpenLoop { dx, dy });
        }
        Ok(Loop {
            points,
            winding: (dx.round() as i64, dy.round() as i64),
        })
    }

    /// Counter-clockwise boundary of `[x0, x0+side] × [y0, y0+side]`.
    pub fn square(corner: (f64, f64), side: f64) -> Loop {
        let (x, y) = corner;
        Loop {
            points: vec![[x, y], [x + side, y], [x + side, y + side], [x, y + side], [x, y]],
            winding: (0, 0),
        }
    }

    /// The first generator `x ↦ (x, y0)`, `x ∈ [0, 1]`.
    pub fn generator_a(y0: f64) -> Loop {
        Loop {
            points: vec![[0.0, y0], [1.0, y0]],
            winding: (1, 0),
        }
    }

    /// The second generator `y ↦ (x0, y)`, `y ∈ [0, 1]`.
    pub fn generator_b(x0: f64) -> Loop {
        Loop {
            points: vec![[x0, 0.0], [x0, 1.0]],
            winding: (0, 1),
        }
    }

    pub fn winding(&self) -> (i64, i64) {
        self.winding
    }

    pub fn is_contractible(&self) -> bool {
        self.winding == (0, 0)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    fn segments(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }
}

/// `α_i = μ_ik ∇_j h^kj`, a representative of `(δlog 𝓙)_g(h)`.
pub fn connection_alpha(g: &Metric, h: &TangentVector) -> Result<OneForm> {
    if h.base() != g {
        return Err(GeomError::BaseMismatch);
    }
    let y = covariant_divergence_with(&raise_both(h.tensor(), g.components()), &christoffel(g));
    Ok(lower_through_volume(g, &y))
}

/// `α_i = μ_ik Y^k`: `(f Y², −f Y¹)`.
fn lower_through_volume(g: &Metric, y: &VectorField) -> OneForm {
    let f = g.volume().density();
    OneForm::new(f * &y.c[1], -&(f * &y.c[0]))
}

/// `(∂₁α₂ − ∂₂α₁) + f·∇_k∇_l h^kl`, which vanishes when `dα = −(∇∇h) μ`.
pub fn dalpha_defect(g: &Metric, h: &TangentVector) -> Result<ScalarField> {
    let alpha = connection_alpha(g, h)?;
    let curl = &d(&alpha.c[1], 1) - &d(&alpha.c[0], 2);
    let ddiv = double_divergence_of(g.components(), h.tensor());
    Ok(&curl + &(g.volume().density() * &ddiv))
}

/// Defect of `∇_i(Y^k μ_kj) − ∇_j(Y^k μ_ki) = (∇_k Y^k) μ_ij` for `(i, j) = (1, 2)`,
/// with all covariant derivatives expanded through the Christoffel symbols.
pub fn divergence_identity_defect(g: &Metric, y: &VectorField) -> TwoForm {
    let chr = christoffel(g);
    let f = g.volume().density();
    // β_j = Y^k μ_kj = (−f Y², f Y¹)
    let beta = OneForm::new(-&(f * &y.c[1]), f * &y.c[0]);
    let dbeta: [[ScalarField; 2]; 2] = std::array::from_fn(|j| beta.c[j].gradient());
    let div = vector_divergence(y, &chr);
    let values = (0..g.grid().len())
        .map(|p| {
            let gam = chr.at(p);
            let b = beta.at(p);
            let nabla = |i: usize, j: usize| dbeta[j][i].at(p) - gam[0][i][j] * b[0] - gam[1][i][j] * b[1];
            nabla(0, 1) - nabla(1, 0) - div.at(p) * f.at(p)
        })
        .collect();
    TwoForm::new(ScalarField::from_values(g.grid(), values))
}

/// Interpolated connection and metric along a path.
struct TransportField {
    it: Interpolator,
}

impl TransportField {
    fn new(g: &Metric) -> TransportField {
        Self::from_components(g.components())
    }

    fn from_components(g: &crate::tensor::SymTensor2) -> TransportField {
        let chr = christoffel_of(g);
        let [a, b, c, d, e, f] = chr.fields();
        TransportField {
            it: Interpolator::new(&[a, b, c, d, e, f, &g.c11, &g.c12, &g.c22]),
        }
    }

    /// `(Γ^k_ij, g_ij)` at a point.
    fn eval(&self, x: [f64; 2]) -> ([[[f64; 2]; 2]; 2], [[f64; 2]; 2]) {
        let mut v = [0.0; 9];
        self.it.eval(x[0], x[1], &mut v);
        let gam = [
            [[v[0], v[1]], [v[1], v[2]]],
            [[v[3], v[4]], [v[4], v[5]]],
        ];
        (gam, [[v[6], v[7]], [v[7], v[8]]])
    }
}

fn rhs(gam: &[[[f64; 2]; 2]; 2], vel: [f64; 2], v: [f64; 2]) -> [f64; 2] {
    std::array::from_fn(|k| {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s -= gam[k][i][j] * vel[i] * v[j];
            }
        }
        s
    })
}

/// Angle of `v` in the Gram–Schmidt frame `(e₁ ∝ ∂x, e₂)` of `g`.
fn frame_angle(g: &[[f64; 2]; 2], v: [f64; 2]) -> f64 {
    let ip = |a: [f64; 2], b: [f64; 2]| {
        a[0] * (g[0][0] * b[0] + g[0][1] * b[1]) + a[1] * (g[1][0] * b[0] + g[1][1] * b[1])
    };
    let e1 = [1.0 / g[0][0].sqrt(), 0.0];
    let c = ip([0.0, 1.0], e1);
    let u = [-c * e1[0], 1.0];
    let nu = ip(u, u).sqrt();
    let e2 = [u[0] / nu, u[1] / nu];
    ip(v, e2).atan2(ip(v, e1))
}

fn transport_with(field: &TransportField, gamma: &Loop, dt: f64) -> f64 {
    let start = gamma.points[0];
    let (_, g0) = field.eval(start);
    let mut v = [1.0 / g0[0][0].sqrt(), 0.0];
    let mut angle = frame_angle(&g0, v);
    let initial = angle;
    for (a, b) in gamma.segments() {
        let vel = [b[0] - a[0], b[1] - a[1]];
        let len = vel[0].hypot(vel[1]);
        let n = ((len / dt).ceil() as usize).max(1);
        let h = 1.0 / n as f64;
        let at = |s: f64| [a[0] + s * vel[0], a[1] + s * vel[1]];
        let (mut gam0, _) = field.eval(a);
        for step in 0..n {
            let s = step as f64 * h;
            let (gam_mid, _) = field.eval(at(s + 0.5 * h));
            let (gam1, g1) = field.eval(at(s + h));
            let k1 = rhs(&gam0, vel, v);
            let k2 = rhs(&gam_mid, vel, [v[0] + 0.5 * h * k1[0], v[1] + 0.5 * h * k1[1]]);
            let k3 = rhs(&gam_mid, vel, [v[0] + 0.5 * h * k2[0], v[1] + 0.5 * h * k2[1]]);
            let k4 = rhs(&gam1, vel, [v[0] + h * k3[0], v[1] + h * k3[1]]);
            for c in 0..2 {
                v[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            let next = frame_angle(&g1, v);
            let mut delta = next - angle.rem_euclid(TWO_PI);
            delta -= TWO_PI * (delta / TWO_PI).round();
            angle += delta;
            gam0 = gam1;
        }
    }
    angle - initial
}

/// Rotation angle, relative to the Gram–Schmidt reference frame, of a
/// vector parallel-transported once around `gamma` (RK4, arclength step `dt`).
/// The angle is accumulated continuously, so it is not reduced mod 2π.
pub fn frame_transport(g: &Metric, gamma: &Loop, dt: f64) -> Result<f64> {
    let (dx, dy) = gamma.winding;
    let first = gamma.points[0];
    let last = *gamma.points.last().unwrap();
    let off = (last[0] - first[0] - dx as f64, last[1] - first[1] - dy as f64);
    if off.0.abs() > 1e-9 || off.1.abs() > 1e-9 {
        return Err(GeomError::OpenLoop {
            dx: last[0] - first[0],
            dy: last[1] - first[1],
        });
    }
    let theta = transport_with(&TransportField::new(g), gamma, dt);
    if !theta.is_finite() {
        return Err(GeomError::NonFinite("frame_transport"));
    }
    Ok(theta)
}

/// `∮_γ α` by Gauss–Legendre on each segment with spectrally interpolated `α`.
pub fn line_integral(alpha: &OneForm, gamma: &Loop) -> f64 {
    let it = Interpolator::new(&[&alpha.c[0], &alpha.c[1]]);
    let (xs, ws) = gauss_legendre(24);
    let mut total = 0.0;
    let mut v = [0.0; 2];
    for (a, b) in gamma.segments() {
        let vel = [b[0] - a[0], b[1] - a[1]];
        let pieces = ((vel[0].hypot(vel[1]) / 0.1).ceil() as usize).max(1);
        for piece in 0..pieces {
            let s0 = piece as f64 / pieces as f64;
            let hs = 0.5 / pieces as f64;
            for (x, w) in xs.iter().zip(&ws) {
                let s = s0 + hs * (1.0 + x);
                it.eval(a[0] + s * vel[0], a[1] + s * vel[1], &mut v);
                total += w * hs * (v[0] * vel[0] + v[1] * vel[1]);
            }
        }
    }
    total
}

/// `𝓙(g) = K_g M` in the torus model: curvature `−KAPPA_CONV·(S/C_NORM)·μ`,
/// generator holonomies `−KAPPA_CONV·θ` along `y = 0` and `x = 0`.
pub fn canonical_class(g: &Metric, dt: f64) -> Result<CircleBundleClass> {
    let s = scalar_curvature(g);
    let curvature = TwoForm::new((&s * g.volume().density()).scale(-KAPPA_CONV / C_NORM));
    let field = TransportField::new(g);
    let theta_a = transport_with(&field, &Loop::generator_a(0.0), dt);
    let theta_b = transport_with(&field, &Loop::generator_b(0.0), dt);
    if !(theta_a.is_finite() && theta_b.is_finite() && curvature.c12.is_finite()) {
        return Err(GeomError::NonFinite("canonical_class"));
    }
    CircleBundleClass::new(curvature, -KAPPA_CONV * theta_a, -KAPPA_CONV * theta_b)
}

/// `Ω_g(X·g, h) + κ(X, α_h)`; zero when `g ↦ K_g M` is a momentum map.
pub fn momentum_residual(g: &Metric, x: &DivFreeField, h: &TangentVector) -> Result<f64> {
    let xg = fundamental_vector(x, g)?;
    let alpha = connection_alpha(g, h)?;
    Ok(omega(g, &xg, h)? + pairing_kappa(x, &alpha))
}

/// Canonical-bundle phase `−KAPPA_CONV·θ` around `gamma` at `g`.
fn canonical_phase(g: &Metric, gamma: &Loop) -> f64 {
    -KAPPA_CONV * transport_with(&TransportField::new(g), gamma, TRANSPORT_DT)
}

/// Returns `(d/dε phase(g_ε), ∮_γ α_h)` along `g_ε = metric_path(g, h, ε)`. The
/// derivative is a central difference at steps `eps` and `eps/2`, combined by
/// Richardson extrapolation.
pub fn holonomy_derivative_check(g: &Metric, h: &TangentVector, gamma: &Loop, eps: f64) -> Result<(f64, f64)> {
    if !gamma.is_contractible() {
        return Err(GeomError::NonContractible(gamma.winding.0, gamma.winding.1));
    }
    let alpha = connection_alpha(g, h)?;
    let line = line_integral(&alpha, gamma);
    let central = |e: f64| -> Result<f64> {
        let plus = canonical_phase(&metric_path(g, h, e)?, gamma);
        let minus = canonical_phase(&metric_path(g, h, -e)?, gamma);
        Ok((plus - minus) / (2.0 * e))
    };
    let coarse = central(eps)?;
    let fine = central(0.5 * eps)?;
    Ok(((4.0 * fine - coarse) / 3.0, line))
}

/// Measured convention constants.
#[derive(Clone, Copy, Debug)]
pub struct ConventionCalibration {
    /// `S(p) / (θ/A)` for a small square around `p`.
    pub c_norm: f64,
    /// `−∮α / (dθ/dε)` for a contractible loop.
    pub kappa_conv: f64,
}

/// `θ/A` for the counter-clockwise square of side `side` centred at `p`,
/// where `A = ∫ μ` over the square; tends to the Gauss curvature at `p`.
pub fn square_rotation_density(g: &Metric, p: (f64, f64), side: f64) -> Result<f64> {
    let corner = (p.0 - 0.5 * side, p.1 - 0.5 * side);
    let theta = frame_transport(g, &Loop::square(corner, side), side / 100.0)?;
    let it = Interpolator::new(&[g.volume().density()]);
    let area = crate::quadrature::square_integral(&it, corner, side, 12);
    Ok(theta / area)
}

/// Measures `(C_NORM, KAPPA_CONV)` from shrinking squares around `p` and the
/// first variation of the transport angle in direction `h`.
pub fn calibrate_conventions(g: &Metric, h: &TangentVector, p: (f64, f64)) -> Result<ConventionCalibration> {
    let coarse = square_rotation_density(g, p, 0.02)?;
    let fine = square_rotation_density(g, p, 0.01)?;
    let density = (4.0 * fine - coarse) / 3.0;
    let c_norm = crate::grid::interpolate(&scalar_curvature(g), p) / density;

    let big = Loop::square((p.0 - 0.15, p.1 - 0.15), 0.3);
    let eps = 1e-4;
    let th = |e: f64| -> Result<f64> { Ok(transport_with(&TransportField::new(&metric_path(g, h, e)?), &big, TRANSPORT_DT)) };
    let dtheta = (th(eps)? - th(-eps)?) / (2.0 * eps);
    let line = line_integral(&connection_alpha(g, h)?, &big);
    Ok(ConventionCalibration {
        c_norm,
        kappa_conv: -line / dtheta,
    })
}
