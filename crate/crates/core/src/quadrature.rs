//! Gauss–Legendre quadrature used for cell averaging.
//!
//! The 3-node rule is exact for polynomials up to degree 5, which is the
//! accuracy all convergence studies assume when they turn a function into
//! cell averages.

/// 3-node Gauss–Legendre nodes on [-1, 1].
const GL3_NODES: [f64; 3] = [-0.774596669241483377, 0.0, 0.774596669241483377];
/// Matching weights (sum to 2).
const GL3_WEIGHTS: [f64; 3] = [
    0.555555555555555556,
    0.888888888888888889,
    0.555555555555555556,
];

/// 2-node Gauss–Legendre nodes on [-1, 1] (degree-3 exact).
pub const GL2_NODES: [f64; 2] = [-0.577350269189625765, 0.577350269189625765];

/// Integral of `f` over [a, b] with the 3-node rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL3_NODES.iter().zip(GL3_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Average of `f` over the cell [a, b].
pub fn cell_average<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    integrate(f, a, b) / (b - a)
}

/// Average of `f` over the square cell [x0, x0+w] x [y0, y0+w]
/// (tensor product of the 3-node rule).
pub fn cell_average_2d<F: Fn(f64, f64) -> f64>(f: F, x0: f64, y0: f64, w: f64) -> f64 {
    let cx = x0 + 0.5 * w;
    let cy = y0 + 0.5 * w;
    let half = 0.5 * w;
    let mut acc = 0.0;
    for (xi, wx) in GL3_NODES.iter().zip(GL3_WEIGHTS.iter()) {
        for (eta, wy) in GL3_NODES.iter().zip(GL3_WEIGHTS.iter()) {
            acc += wx * wy * f(cx + half * xi, cy + half * eta);
        }
    }
    acc * 0.25
}
