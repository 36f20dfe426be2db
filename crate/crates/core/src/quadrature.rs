use std::f64::consts::PI;

use crate::grid::Interpolator;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `∫∫ F dx dy` over the axis-aligned square `[x0, x0+side] × [y0, y0+side]`,
/// where `F` is the product of the interpolated fields.
pub fn square_integral(it: &Interpolator, corner: (f64, f64), side: f64, nodes: usize) -> f64 {
    let (xs, ws) = gauss_legendre(nodes);
    let half = 0.5 * side;
    let mut vals = vec![0.0; it.nfields()];
    let mut total = 0.0;
    for (xi, wi) in xs.iter().zip(&ws) {
        for (yj, wj) in xs.iter().zip(&ws) {
            it.eval(corner.0 + half * (1.0 + xi), corner.1 + half * (1.0 + yj), &mut vals);
            total += wi * wj * vals.iter().product::<f64>();
        }
    }
    total * half * half
}
