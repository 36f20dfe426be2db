//! Periodic lattice on the unit torus `[0,1)²` and scalar fields sampled on it.
//!
//! Values are stored row-major with the x index outermost: sample `(a, b)` sits
//! at `(a/N, b/N)` and lives at `values[a * N + b]`. All differentiation is
//! pseudospectral (FFT along one axis, multiply by `2πik`, inverse FFT), with
//! the Nyquist mode dropped for first derivatives so that the discrete
//! derivative is skew-adjoint under the lattice mean.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{GeomError, Result};

pub struct Grid {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Arc<Grid>> {
        if n < 8 || n % 2 != 0 {
            return Err(GeomError::InvalidGridSize(n));
        }
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Grid {
            n,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        }))
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.n + b
    }

    /// Coordinates of the flat sample index `p`.
    #[inline]
    pub fn point(&self, p: usize) -> (f64, f64) {
        let h = self.spacing();
        ((p / self.n) as f64 * h, (p % self.n) as f64 * h)
    }

    /// Signed wavenumber of DFT bin `k`. Bin `N/2` is reported as `+N/2`.
    #[inline]
    pub fn wavenumber(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    fn derivative_line(&self, line: &mut [Complex64]) {
        let n = self.n;
        self.fft.process(line);
        for (k, c) in line.iter_mut().enumerate() {
            if k == n / 2 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                let w = 2.0 * PI * self.wavenumber(k) as f64;
                *c = Complex64::new(-c.im * w, c.re * w);
            }
        }
        self.ifft.process(line);
        let scale = 1.0 / n as f64;
        for c in line.iter_mut() {
            *c *= scale;
        }
    }

    /// Normalized 2D DFT coefficients `c[k * N + l]`, so that
    /// `f(a/N, b/N) = Σ c_kl exp(2πi (k a + l b) / N)`.
    pub fn spectrum(&self, values: &[f64]) -> Vec<Complex64> {
        let n = self.n;
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for row in data.chunks_mut(n) {
            self.fft.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for b in 0..n {
            for a in 0..n {
                col[a] = data[a * n + b];
            }
            self.fft.process(&mut col);
            for a in 0..n {
                data[a * n + b] = col[a];
            }
        }
        let scale = 1.0 / (n * n) as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
        data
    }
}

pub fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a.n != b.n {
        return Err(GeomError::GridMismatch(a.n, b.n));
    }
    Ok(())
}

/// Samples of a smooth 1-periodic function on the lattice.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl ScalarField {
    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> ScalarField {
        assert_eq!(values.len(), grid.len(), "sample count does not match grid");
        ScalarField {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> ScalarField {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> ScalarField {
        Self::from_values(grid, vec![c; grid.len()])
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        let values = (0..grid.len())
            .map(|p| {
                let (x, y) = grid.point(p);
                f(x, y)
            })
            .collect();
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, p: usize) -> f64 {
        self.values[p]
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[self.grid.index(a, b)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.grid.n, other.grid.n, "fields on different grids");
        ScalarField {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫|f| dx dy` over the unit torus.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.values.len() as f64
    }

    /// `(∫ f² dx dy)^½` over the unit torus.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Spectral partial derivative along `axis` (1 = x, 2 = y).
    pub fn partial(&self, axis: usize) -> Result<ScalarField> {
        let n = self.grid.n;
        let mut out = vec![0.0; n * n];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        match axis {
            1 => {
                for b in 0..n {
                    for a in 0..n {
                        line[a] = Complex64::new(self.values[a * n + b], 0.0);
                    }
                    self.grid.derivative_line(&mut line);
                    for a in 0..n {
                        out[a * n + b] = line[a].re;
                    }
                }
            }
            2 => {
                for a in 0..n {
                    for b in 0..n {
                        line[b] = Complex64::new(self.values[a * n + b], 0.0);
                    }
                    self.grid.derivative_line(&mut line);
                    for b in 0..n {
                        out[a * n + b] = line[b].re;
                    }
                }
            }
            other => return Err(GeomError::InvalidAxis(other)),
        }
        Ok(ScalarField {
            grid: Arc::clone(&self.grid),
            values: out,
        })
    }

    /// Both first partials, `[∂₁f, ∂₂f]`.
    pub fn gradient(&self) -> [ScalarField; 2] {
        [d(self, 1), d(self, 2)]
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.spectrum(&self.values)
    }
}

/// Free-function form of [`ScalarField::partial`].
pub fn partial(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    f.partial(axis)
}

/// Partial derivative along an axis known to be valid.
pub(crate) fn d(f: &ScalarField, axis: usize) -> ScalarField {
    f.partial(axis).expect("internal axis index is 1 or 2")
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Mul<&ScalarField> for f64 {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        rhs.scale(self)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

/// Trigonometric interpolation of one or more fields on the same grid.
///
/// Uses the symmetric interpolant (Nyquist modes split evenly between `±N/2`),
/// so it is real-valued and reproduces the lattice samples exactly.
#[derive(Clone, Debug)]
pub struct Interpolator {
    n: usize,
    nfields: usize,
    // [field][k in 0..=N/2][l in 0..N], real and imaginary parts split
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Interpolator {
    pub fn new(fields: &[&ScalarField]) -> Interpolator {
        assert!(!fields.is_empty(), "interpolator needs at least one field");
        let grid = fields[0].grid();
        let n = grid.n();
        let half = n / 2 + 1;
        let mut re = Vec::with_capacity(fields.len() * half * n);
        let mut im = Vec::with_capacity(fields.len() * half * n);
        for f in fields {
            assert_eq!(f.grid().n(), n, "fields on different grids");
            let spec = f.spectrum();
            re.extend(spec[..half * n].iter().map(|c| c.re));
            im.extend(spec[..half * n].iter().map(|c| c.im));
        }
        Interpolator {
            n,
            nfields: fields.len(),
            re,
            im,
        }
    }

    pub fn nfields(&self) -> usize {
        self.nfields
    }

    /// Evaluates every field at `(x, y)`; coordinates may lie outside `[0,1)`.
    pub fn eval(&self, x: f64, y: f64, out: &mut [f64]) {
        let n = self.n;
        let half = n / 2 + 1;
        let nyq = n / 2;
        let ex: Vec<Complex64> = (0..half)
            .map(|k| {
                if k == nyq {
                    Complex64::new((PI * n as f64 * x).cos(), 0.0)
                } else {
                    let w = if k == 0 { 1.0 } else { 2.0 };
                    Complex64::from_polar(w, 2.0 * PI * k as f64 * x)
                }
            })
            .collect();
        let mut ey_re = vec![0.0; n];
        let mut ey_im = vec![0.0; n];
        for l in 0..n {
            if l == nyq {
                ey_re[l] = (PI * n as f64 * y).cos();
            } else {
                let kl = if l < nyq { l as f64 } else { l as f64 - n as f64 };
                let (s, c) = (2.0 * PI * kl * y).sin_cos();
                ey_re[l] = c;
                ey_im[l] = s;
            }
        }
        for (fi, o) in out.iter_mut().enumerate().take(self.nfields) {
            let base = fi * half * n;
            let mut acc = 0.0;
            for (k, exk) in ex.iter().enumerate() {
                let cr = &self.re[base + k * n..base + (k + 1) * n];
                let ci = &self.im[base + k * n..base + (k + 1) * n];
                let (sr, si) = row_product(cr, ci, &ey_re, &ey_im);
                acc += exk.re * sr - exk.im * si;
            }
            *o = acc;
        }
    }

    pub fn eval1(&self, x: f64, y: f64) -> f64 {
        let mut out = vec![0.0; self.nfields];
        self.eval(x, y, &mut out);
        out[0]
    }
}

/// `Σ_l c_l e_l` for split complex rows, with four independent accumulators.
fn row_product(cr: &[f64], ci: &[f64], er: &[f64], ei: &[f64]) -> (f64, f64) {
    let mut sr = [0.0; 4];
    let mut si = [0.0; 4];
    let chunks = cr
        .chunks_exact(4)
        .zip(ci.chunks_exact(4))
        .zip(er.chunks_exact(4).zip(ei.chunks_exact(4)));
    for ((a, b), (c, d)) in chunks {
        for j in 0..4 {
            sr[j] += a[j] * c[j] - b[j] * d[j];
            si[j] += a[j] * d[j] + b[j] * c[j];
        }
    }
    let body = cr.len() - cr.len() % 4;
    for l in body..cr.len() {
        sr[0] += cr[l] * er[l] - ci[l] * ei[l];
        si[0] += cr[l] * ei[l] + ci[l] * er[l];
    }
    ((sr[0] + sr[1]) + (sr[2] + sr[3]), (si[0] + si[1]) + (si[2] + si[3]))
}

/// Trigonometric interpolation of a single field at `p`.
pub fn interpolate(f: &ScalarField, p: (f64, f64)) -> f64 {
    Interpolator::new(&[f]).eval1(p.0, p.1)
}

/// SplitMix64 step, used to derive independent sub-seeds from one user seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random real field with Fourier support in `|k|∞ ≤ kmax`.
///
/// Each retained mode carries a cosine and a sine amplitude drawn from a
/// standard normal and scaled by `decay^|k|∞`. The field is evaluated directly
/// from its mode sum, so the same seed gives the same continuous function on
/// every grid.
pub fn random_band_limited(
    grid: &Arc<Grid>,
    seed: u64,
    kmax: usize,
    decay: f64,
    zero_mean: bool,
) -> Result<ScalarField> {
    if 4 * kmax >= grid.n() {
        return Err(GeomError::BandLimitTooLarge {
            kmax,
            n: grid.n(),
            bound: "kmax < N/4",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let km = kmax as i64;
    let mut modes = Vec::new();
    for k1 in 0..=km {
        for k2 in -km..=km {
            if k1 == 0 && k2 < 0 {
                continue;
            }
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            if k1 == 0 && k2 == 0 && zero_mean {
                continue;
            }
            let amp = decay.powi(k1.abs().max(k2.abs()) as i32);
            modes.push((k1 as f64, k2 as f64, amp * a, amp * b));
        }
    }
    // a·cos θ + b·sin θ = Re((a − ib)·e^{iθ}), with e^{iθ} split per axis
    let n = grid.n();
    let axis = |k: f64| -> Vec<Complex64> { (0..n).map(|i| Complex64::from_polar(1.0, 2.0 * PI * k * i as f64 / n as f64)).collect() };
    let ex: Vec<Vec<Complex64>> = (0..=km).map(|k| axis(k as f64)).collect();
    let ey: Vec<Vec<Complex64>> = (-km..=km).map(|k| axis(k as f64)).collect();
    let values = (0..n * n)
        .map(|p| {
            let (a_idx, b_idx) = (p / n, p % n);
            modes
                .iter()
                .map(|&(k1, k2, a, b)| {
                    let e = ex[k1 as usize][a_idx] * ey[(k2 as i64 + km) as usize][b_idx];
                    let b = if k1 == 0.0 && k2 == 0.0 { 0.0 } else { b };
                    a * e.re + b * e.im
                })
                .sum()
        })
        .collect();
    Ok(ScalarField::from_values(grid, values))
}
