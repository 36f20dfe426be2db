//! Coordinate tensor fields on the torus. Every component is a [`ScalarField`]
//! and all components of one tensor share a grid.
//!
//! Index conventions: `VectorField` holds `X^i`, `OneForm` holds `α_i`,
//! `SymTensor2` holds `h_ij`, `ContraSymTensor2` holds `h^ij`, `MixedTensor`
//! holds `T^i_j` and `TwoForm` holds the `dx∧dy` coefficient `ω₁₂`.

use std::sync::Arc;

use crate::grid::{Grid, ScalarField};

pub type Mat2 = [[f64; 2]; 2];

#[inline]
pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

#[inline]
pub fn mat_det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

#[inline]
pub fn mat_trace(a: &Mat2) -> f64 {
    a[0][0] + a[1][1]
}

#[inline]
pub fn mat_inv(a: &Mat2) -> Mat2 {
    let det = mat_det(a);
    [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ]
}

#[inline]
pub fn mat_transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Builds the components of a tensor by evaluating a closure at every sample.
fn pointwise<const K: usize>(grid: &Arc<Grid>, f: impl Fn(usize) -> [f64; K]) -> [ScalarField; K] {
    let len = grid.len();
    let mut comps: Vec<Vec<f64>> = (0..K).map(|_| Vec::with_capacity(len)).collect();
    for p in 0..len {
        let v = f(p);
        for (c, x) in comps.iter_mut().zip(v) {
            c.push(x);
        }
    }
    let mut it = comps.into_iter();
    std::array::from_fn(|_| ScalarField::from_values(grid, it.next().unwrap()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub c: [ScalarField; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub c: [ScalarField; 2],
}

/// Symmetric covariant 2-tensor `h_ij`; only `h_11`, `h_12`, `h_22` are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor2 {
    pub c11: ScalarField,
    pub c12: ScalarField,
    pub c22: ScalarField,
}

/// Symmetric contravariant 2-tensor `h^ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContraSymTensor2 {
    pub c11: ScalarField,
    pub c12: ScalarField,
    pub c22: ScalarField,
}

/// `(1,1)`-tensor `T^i_j`, stored as `c[i][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedTensor {
    pub c: [[ScalarField; 2]; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    pub c12: ScalarField,
}

macro_rules! pair_impl {
    ($t:ident) => {
        impl $t {
            pub fn new(c1: ScalarField, c2: ScalarField) -> Self {
                assert_eq!(c1.grid().n(), c2.grid().n(), "components on different grids");
                $t { c: [c1, c2] }
            }

            pub fn zeros(grid: &Arc<Grid>) -> Self {
                Self::new(ScalarField::zeros(grid), ScalarField::zeros(grid))
            }

            pub fn constant(grid: &Arc<Grid>, v: [f64; 2]) -> Self {
                Self::new(ScalarField::constant(grid, v[0]), ScalarField::constant(grid, v[1]))
            }

            pub fn from_pointwise(grid: &Arc<Grid>, f: impl Fn(usize) -> [f64; 2]) -> Self {
                let [a, b] = pointwise(grid, f);
                Self::new(a, b)
            }

            pub fn grid(&self) -> &Arc<Grid> {
                self.c[0].grid()
            }

            #[inline]
            pub fn at(&self, p: usize) -> [f64; 2] {
                [self.c[0].at(p), self.c[1].at(p)]
            }

            pub fn scale(&self, s: f64) -> Self {
                Self::new(self.c[0].scale(s), self.c[1].scale(s))
            }

            pub fn add(&self, other: &Self) -> Self {
                Self::new(&self.c[0] + &other.c[0], &self.c[1] + &other.c[1])
            }

            pub fn sub(&self, other: &Self) -> Self {
                Self::new(&self.c[0] - &other.c[0], &self.c[1] - &other.c[1])
            }

            pub fn sup_norm(&self) -> f64 {
                self.c[0].sup_norm().max(self.c[1].sup_norm())
            }

            /// Coordinate `L²` norm `(∫ Σ_i c_i² dx dy)^½`.
            pub fn l2_norm(&self) -> f64 {
                (self.c[0].l2_norm().powi(2) + self.c[1].l2_norm().powi(2)).sqrt()
            }
        }
    };
}

pair_impl!(VectorField);
pair_impl!(OneForm);

macro_rules! sym_impl {
    ($t:ident) => {
        impl $t {
            pub fn new(c11: ScalarField, c12: ScalarField, c22: ScalarField) -> Self {
                let n = c11.grid().n();
                assert!(
                    c12.grid().n() == n && c22.grid().n() == n,
                    "components on different grids"
                );
                $t { c11, c12, c22 }
            }

            pub fn zeros(grid: &Arc<Grid>) -> Self {
                Self::constant(grid, [[0.0, 0.0], [0.0, 0.0]])
            }

            /// Constant components; only the upper triangle of `m` is read.
            pub fn constant(grid: &Arc<Grid>, m: Mat2) -> Self {
                Self::new(
                    ScalarField::constant(grid, m[0][0]),
                    ScalarField::constant(grid, m[0][1]),
                    ScalarField::constant(grid, m[1][1]),
                )
            }

            /// Builds the tensor from a pointwise matrix; only the upper
            /// triangle is read, so symmetry holds by construction.
            pub fn from_pointwise(grid: &Arc<Grid>, f: impl Fn(usize) -> Mat2) -> Self {
                let [a, b, c] = pointwise(grid, |p| {
                    let m = f(p);
                    [m[0][0], m[0][1], m[1][1]]
                });
                Self::new(a, b, c)
            }

            pub fn grid(&self) -> &Arc<Grid> {
                self.c11.grid()
            }

            #[inline]
            pub fn at(&self, p: usize) -> Mat2 {
                let o = self.c12.at(p);
                [[self.c11.at(p), o], [o, self.c22.at(p)]]
            }

            /// Component `(i, j)` with zero-based indices.
            pub fn comp(&self, i: usize, j: usize) -> &ScalarField {
                match (i, j) {
                    (0, 0) => &self.c11,
                    (1, 1) => &self.c22,
                    _ => &self.c12,
                }
            }

            pub fn scale(&self, s: f64) -> Self {
                Self::new(self.c11.scale(s), self.c12.scale(s), self.c22.scale(s))
            }

            pub fn add(&self, other: &Self) -> Self {
                Self::new(
                    &self.c11 + &other.c11,
                    &self.c12 + &other.c12,
                    &self.c22 + &other.c22,
                )
            }

            pub fn sub(&self, other: &Self) -> Self {
                Self::new(
                    &self.c11 - &other.c11,
                    &self.c12 - &other.c12,
                    &self.c22 - &other.c22,
                )
            }

            pub fn sup_norm(&self) -> f64 {
                self.c11
                    .sup_norm()
                    .max(self.c12.sup_norm())
                    .max(self.c22.sup_norm())
            }

            /// Coordinate `L²` norm `(∫ Σ_ij c_ij² dx dy)^½`, off-diagonal counted twice.
            pub fn l2_norm(&self) -> f64 {
                (self.c11.l2_norm().powi(2)
                    + 2.0 * self.c12.l2_norm().powi(2)
                    + self.c22.l2_norm().powi(2))
                .sqrt()
            }

            pub fn is_finite(&self) -> bool {
                self.c11.is_finite() && self.c12.is_finite() && self.c22.is_finite()
            }
        }
    };
}

sym_impl!(SymTensor2);
sym_impl!(ContraSymTensor2);

impl MixedTensor {
    pub fn from_pointwise(grid: &Arc<Grid>, f: impl Fn(usize) -> Mat2) -> Self {
        let [a, b, c, d] = pointwise(grid, |p| {
            let m = f(p);
            [m[0][0], m[0][1], m[1][0], m[1][1]]
        });
        MixedTensor {
            c: [[a, b], [c, d]],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.c[0][0].grid()
    }

    #[inline]
    pub fn at(&self, p: usize) -> Mat2 {
        [
            [self.c[0][0].at(p), self.c[0][1].at(p)],
            [self.c[1][0].at(p), self.c[1][1].at(p)],
        ]
    }
}

impl TwoForm {
    pub fn new(c12: ScalarField) -> Self {
        TwoForm { c12 }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        TwoForm::new(ScalarField::zeros(grid))
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.c12.grid()
    }

    pub fn add(&self, other: &TwoForm) -> TwoForm {
        TwoForm::new(&self.c12 + &other.c12)
    }

    pub fn neg(&self) -> TwoForm {
        TwoForm::new(-&self.c12)
    }
}

/// `∫_T² ω` by the lattice rule: the mean of `ω₁₂` times the unit area.
pub fn integrate(omega: &TwoForm) -> f64 {
    omega.c12.mean()
}
