//! Error norms, convergence tables, total variation, the numerical-derivative
//! truncation test, and the Fourier spectrum/stability study.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::mesh1d::{BoundaryKind, GridSpec, Mesh1D};
use crate::reconstruction::{
    candidate_polynomials, reconstruct_cell, weight_deviation, EpsilonPolicy, ReconKind,
    ReconstructionConfig,
};
use crate::timeintegration::scalar_edge_values;
use nalgebra::{Complex, DMatrix, DVector};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Discrete error norms against exact cell averages (3-node Gauss rule):
/// (sum_j h_j |U_j - u_j|, max_j |U_j - u_j|).
pub fn error_norms<F: Fn(f64) -> f64>(field: &Field, mesh: &Mesh1D, exact: F) -> (f64, f64) {
    let exact_avg = mesh.cell_averages(exact);
    let mut one = 0.0;
    let mut max = 0.0f64;
    for j in 0..mesh.n_cells() {
        let d = (field.get(j, 0) - exact_avg.get(j, 0)).abs();
        one += mesh.width(j) * d;
        max = max.max(d);
    }
    (one, max)
}

/// A piecewise-constant function over a mesh (used as reference solution
/// when no closed form exists). Means over arbitrary intervals are exact.
pub struct PiecewiseConstant {
    interfaces: Vec<f64>,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(mesh: &Mesh1D, field: &Field, comp: usize) -> Self {
        let n = mesh.n_cells();
        let interfaces = mesh.interfaces().to_vec();
        let values: Vec<f64> = (0..n).map(|j| field.get(j, comp)).collect();
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for j in 0..n {
            cumulative.push(cumulative[j] + mesh.width(j) * values[j]);
        }
        PiecewiseConstant {
            interfaces,
            values,
            cumulative,
        }
    }

    fn integral_to(&self, x: f64) -> f64 {
        let n = self.values.len();
        if x <= self.interfaces[0] {
            return 0.0;
        }
        if x >= self.interfaces[n] {
            return self.cumulative[n];
        }
        let k = match self
            .interfaces
            .binary_search_by(|p| p.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(n - 1),
            Err(i) => i - 1,
        };
        self.cumulative[k] + (x - self.interfaces[k]) * self.values[k]
    }

    /// Exact mean over [a, b].
    pub fn mean_over(&self, a: f64, b: f64) -> f64 {
        (self.integral_to(b) - self.integral_to(a)) / (b - a)
    }
}

/// Error norms of `field` against a piecewise-constant reference.
pub fn reference_error_norms(
    field: &Field,
    mesh: &Mesh1D,
    comp: usize,
    reference: &PiecewiseConstant,
) -> (f64, f64) {
    let mut one = 0.0;
    let mut max = 0.0f64;
    for j in 0..mesh.n_cells() {
        let r = reference.mean_over(mesh.interface(j), mesh.interface(j + 1));
        let d = (field.get(j, comp) - r).abs();
        one += mesh.width(j) * d;
        max = max.max(d);
    }
    (one, max)
}

/// Max-norm truncation error of the one-sided derivative built from the
/// reconstructed right-edge values (periodic wrap):
/// max_j |(u(x_{j+1/2}) - u(x_{j-1/2}))/h_j - (U_{j+1/2} - U_{j-1/2})/h_j|.
pub fn derivative_error<F: Fn(f64) -> f64>(mesh: &Mesh1D, right_values: &[f64], u: F) -> f64 {
    let n = mesh.n_cells();
    let mut worst = 0.0f64;
    for j in 0..n {
        let h = mesh.width(j);
        let exact = (u(mesh.interface(j + 1)) - u(mesh.interface(j))) / h;
        let prev = right_values[(j + n - 1) % n];
        let numer = (right_values[j] - prev) / h;
        worst = worst.max((exact - numer).abs());
    }
    worst
}

/// Derivative error computed from exact cell averages of `u`.
pub fn derivative_error_for<F: Fn(f64) -> f64 + Copy>(
    mesh: &Mesh1D,
    config: &ReconstructionConfig,
    u: F,
) -> Result<f64> {
    let avgs = mesh.cell_averages(u);
    let (_, right) = scalar_edge_values(mesh, avgs.data(), config)?;
    Ok(derivative_error(mesh, &right, u))
}

/// Total variation with periodic wrap.
pub fn total_variation(data: &[f64]) -> f64 {
    let n = data.len();
    (0..n)
        .map(|j| (data[(j + 1) % n] - data[j]).abs())
        .sum()
}

/// One table row: resolution descriptor, error, rate from the previous row.
#[derive(Clone, Debug)]
pub struct TableRow {
    pub label: String,
    pub error: f64,
    pub rate: Option<f64>,
}

/// (resolution, error, rate) rows with rate = log(e_prev/e)/log(ratio).
#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub title: String,
    pub rows: Vec<TableRow>,
}

impl ConvergenceTable {
    pub fn from_errors<L: std::fmt::Display>(
        title: &str,
        labels: &[L],
        errors: &[f64],
        ratio: f64,
    ) -> Self {
        assert_eq!(labels.len(), errors.len());
        let mut rows = Vec::with_capacity(errors.len());
        for (k, err) in errors.iter().enumerate() {
            let rate = if k == 0 {
                None
            } else {
                Some((errors[k - 1] / err).ln() / ratio.ln())
            };
            rows.push(TableRow {
                label: labels[k].to_string(),
                error: *err,
                rate,
            });
        }
        ConvergenceTable {
            title: title.to_string(),
            rows,
        }
    }

    /// Rates of the final `k` rows (the asymptotic regime).
    pub fn tail_rates(&self, k: usize) -> Vec<f64> {
        self.rows
            .iter()
            .rev()
            .take(k)
            .rev()
            .filter_map(|r| r.rate)
            .collect()
    }

    pub fn last_error(&self) -> f64 {
        self.rows.last().map(|r| r.error).unwrap_or(f64::NAN)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.title);
        let _ = writeln!(out, "resolution,error,rate");
        for row in &self.rows {
            match row.rate {
                Some(rate) => {
                    let _ = writeln!(out, "{},{:.6e},{:.2}", row.label, row.error, rate);
                }
                None => {
                    let _ = writeln!(out, "{},{:.6e},", row.label, row.error);
                }
            }
        }
        out
    }
}

/// The five-cell block grid (h, 2h, h, h/2, h/2) centred so the middle cell
/// spans [-h/2, h/2]; reconstruction studies target that middle cell.
pub fn five_cell_pattern(h: f64) -> Mesh1D {
    Mesh1D::generate(
        &GridSpec::Pattern {
            base: h,
            factors: vec![1.0, 2.0, 1.0, 0.5, 0.5],
        },
        (-3.5 * h, 1.5 * h),
        BoundaryKind::None,
    )
    .expect("static pattern grid")
}

/// Reconstruction error of the boundary-extrapolated value at x = h/2 (the
/// right edge of the middle pattern cell), for dyadically refined block
/// sizes h0/2^k. The value is reconstructed in the cell whose left edge is
/// that interface (local size h/2, neighbour ratios beta = 2, gamma = 1),
/// so eps-policies see the local cell size h/2.
pub fn reconstruction_error_study<F: Fn(f64) -> f64 + Copy>(
    u: F,
    kind: ReconKind,
    epsilon: EpsilonPolicy,
    h0: f64,
    levels: usize,
) -> ConvergenceTable {
    let mut config = ReconstructionConfig::weno3(epsilon);
    config.kind = kind;
    let mut labels = Vec::new();
    let mut errors = Vec::new();
    for k in 0..levels {
        let h = h0 / (1 << k) as f64;
        let mesh = five_cell_pattern(h);
        let avgs = mesh.cell_averages(u);
        let data = [avgs.get(2, 0), avgs.get(3, 0), avgs.get(4, 0)];
        let (beta, gamma) = mesh.local_ratios(3).unwrap();
        let rec = reconstruct_cell(data, mesh.width(3), beta, gamma, &config);
        labels.push(format!("{h:.2e}"));
        errors.push((rec.u_left - u(0.5 * h)).abs());
    }
    ConvergenceTable::from_errors(
        &format!("{} reconstruction error, {}", kind.label(), epsilon.label()),
        &labels,
        &errors,
        2.0,
    )
}

/// Distance between optimal and nonlinear weights on the middle pattern
/// cell (C+_R for WENO3, C_0 for CWENO3), same refinement sequence.
pub fn weight_deviation_study<F: Fn(f64) -> f64 + Copy>(
    u: F,
    kind: ReconKind,
    epsilon: EpsilonPolicy,
    h0: f64,
    levels: usize,
) -> ConvergenceTable {
    let mut config = ReconstructionConfig::weno3(epsilon);
    config.kind = kind;
    let mut labels = Vec::new();
    let mut errors = Vec::new();
    for k in 0..levels {
        let h = h0 / (1 << k) as f64;
        let mesh = five_cell_pattern(h);
        let avgs = mesh.cell_averages(u);
        let data = [avgs.get(1, 0), avgs.get(2, 0), avgs.get(3, 0)];
        let (beta, gamma) = mesh.local_ratios(2).unwrap();
        let dev = weight_deviation(data, h, beta, gamma, &config);
        labels.push(format!("{h:.2e}"));
        errors.push(dev.headline());
    }
    ConvergenceTable::from_errors(
        &format!("{} weight deviation, {}", kind.label(), epsilon.label()),
        &labels,
        &errors,
        2.0,
    )
}

/// Max difference between the gradient of the nonlinear reconstruction map
/// and the gradient of the optimal-parabola evaluation, on a uniform
/// stencil centred at x = 0 (data from exact averages of `u`).
pub fn gradient_distance_study<F: Fn(f64) -> f64 + Copy>(
    u: F,
    kind: ReconKind,
    epsilon: EpsilonPolicy,
    h0: f64,
    levels: usize,
) -> ConvergenceTable {
    let mut config = ReconstructionConfig::weno3(epsilon);
    config.kind = kind;
    let mut labels = Vec::new();
    let mut dist = Vec::new();
    for k in 0..levels {
        let h = h0 / (1 << k) as f64;
        let avg = |a: f64, b: f64| crate::quadrature::cell_average(u, a, b);
        let data = [
            avg(-1.5 * h, -0.5 * h),
            avg(-0.5 * h, 0.5 * h),
            avg(0.5 * h, 1.5 * h),
        ];
        let gr = crate::reconstruction::reconstruction_gradient(data, h, 1.0, 1.0, &config);
        let gp = crate::reconstruction::p2_gradient(h, 1.0, 1.0, &config);
        let d = gr
            .iter()
            .zip(gp.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        labels.push(format!("{h:.2e}"));
        dist.push(d);
    }
    ConvergenceTable::from_errors(
        &format!(
            "{} gradient distance to P2, {}",
            kind.label(),
            epsilon.label()
        ),
        &labels,
        &dist,
        2.0,
    )
}

/// Stability polynomial of the three-stage, third-order SSP scheme.
pub fn ssprk3_amplification(z: Complex<f64>) -> Complex<f64> {
    Complex::new(1.0, 0.0) + z + z * z / 2.0 + z * z * z / 6.0
}

/// Checks |R(dt*lambda)| <= 1 + 1e-12 for every eigenvalue; the margin is
/// max |R| - 1.
pub fn stability_check(eigenvalues: &[Complex<f64>], dt: f64) -> (bool, f64) {
    let mut margin = f64::NEG_INFINITY;
    for ev in eigenvalues {
        let r = ssprk3_amplification(ev * dt).norm();
        margin = margin.max(r - 1.0);
    }
    (margin <= 1e-12, margin)
}

/// Result of the Fourier-basis linearization of the derivative operator.
pub struct SpectrumResult {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<Complex<f64>>,
    /// Number of cells (= matrix dimension = basis size).
    pub n: usize,
    pub h: f64,
}

impl SpectrumResult {
    /// Eigenvalues scaled by dt = cfl * h.
    pub fn scaled_eigenvalues(&self, cfl: f64) -> Vec<Complex<f64>> {
        self.eigenvalues
            .iter()
            .map(|ev| ev * (cfl * self.h))
            .collect()
    }

    /// Largest CFL for which every scaled eigenvalue stays inside the
    /// SSPRK3 stability region (descending scan, then bisection).
    pub fn max_stable_cfl(&self, cfl_hi: f64) -> f64 {
        let stable = |cfl: f64| stability_check(&self.scaled_eigenvalues(cfl), 1.0).0;
        let steps = 200;
        let Some(first_stable) = (0..=steps)
            .rev()
            .map(|i| cfl_hi * i as f64 / steps as f64)
            .find(|&s| stable(s))
        else {
            return 0.0;
        };
        let mut lo = first_stable;
        let mut hi = (first_stable + cfl_hi / steps as f64).min(cfl_hi);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if stable(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// The real Fourier basis on [0,1]: constant, then cos/sin pairs for
/// frequencies 1..=(n-1)/2. Returns exact cell averages on the given mesh.
fn fourier_basis_averages(mesh: &Mesh1D, index: usize) -> Vec<f64> {
    let n = mesh.n_cells();
    (0..n)
        .map(|j| {
            let (a, b) = (mesh.interface(j), mesh.interface(j + 1));
            let h = b - a;
            if index == 0 {
                1.0
            } else {
                let k = ((index + 1) / 2) as f64;
                let w = 2.0 * PI * k;
                if index % 2 == 1 {
                    // average of cos(2 pi k x)
                    ((w * b).sin() - (w * a).sin()) / (w * h)
                } else {
                    ((w * a).cos() - (w * b).cos()) / (w * h)
                }
            }
        })
        .collect()
}

/// Linearization of v_j = -(U_{j+1/2} - U_{j-1/2})/h_j (upwind transport at
/// unit speed) in the real Fourier basis on `n` uniform periodic cells.
/// `pin_linear_weights` replaces the nonlinear blend by the optimal parabola
/// evaluation, making the operator exactly linear (circulant).
pub fn spectrum_matrix(
    config: &ReconstructionConfig,
    n: usize,
    pin_linear_weights: bool,
) -> Result<SpectrumResult> {
    if n % 2 == 0 {
        return Err(Error::Config(
            "spectrum study needs an odd cell count (full cos/sin pairs)".into(),
        ));
    }
    let mesh = Mesh1D::generate(&GridSpec::Uniform { n }, (0.0, 1.0), BoundaryKind::Periodic)?;
    let h = 1.0 / n as f64;
    // basis vectors and their squared norms (diagonal normal equations)
    let basis: Vec<Vec<f64>> = (0..n).map(|i| fourier_basis_averages(&mesh, i)).collect();
    let norms2: Vec<f64> = basis
        .iter()
        .map(|b| b.iter().map(|v| v * v).sum::<f64>())
        .collect();
    let mut matrix = DMatrix::zeros(n, n);
    for (col, b) in basis.iter().enumerate() {
        let right = if pin_linear_weights {
            (0..n)
                .map(|j| {
                    let data = [b[(j + n - 1) % n], b[j], b[(j + 1) % n]];
                    candidate_polynomials(data, h, 1.0, 1.0, config).eval_opt(0.5 * h)
                })
                .collect::<Vec<f64>>()
        } else {
            let (_, right) = scalar_edge_values(&mesh, b, config)?;
            right
        };
        let v: Vec<f64> = (0..n)
            .map(|j| -(right[j] - right[(j + n - 1) % n]) / h)
            .collect();
        for (row, br) in basis.iter().enumerate() {
            let dot: f64 = br.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
            matrix[(row, col)] = dot / norms2[row];
        }
    }
    let eigenvalues = validated_eigenvalues(&matrix)?;
    Ok(SpectrumResult {
        matrix,
        eigenvalues,
        n,
        h,
    })
}

/// Dense nonsymmetric eigenvalues with a residual certificate: each pair
/// must satisfy ||M v - lambda v|| <= 1e-8 ||M|| for the eigenvector
/// recovered by inverse iteration.
pub fn validated_eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let n = matrix.nrows();
    let eigs = matrix.clone().complex_eigenvalues();
    let mnorm = matrix.norm();
    let mc: DMatrix<Complex<f64>> = matrix.map(|v| Complex::new(v, 0.0));
    let mut out = Vec::with_capacity(n);
    for ev in eigs.iter() {
        let shift = ev + Complex::new(1e-12 * mnorm.max(1.0), 1e-12 * mnorm.max(1.0));
        let mut shifted = mc.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        let lu = shifted.lu();
        let mut v = DVector::from_element(n, Complex::new(1.0, 0.0));
        v /= Complex::new(v.norm(), 0.0);
        for _ in 0..3 {
            match lu.solve(&v) {
                Some(w) => {
                    let norm = w.norm();
                    if !norm.is_finite() || norm == 0.0 {
                        break;
                    }
                    v = w / Complex::new(norm, 0.0);
                }
                None => break,
            }
        }
        let residual = (&mc * &v - v.clone() * *ev).norm();
        if residual > 1e-8 * mnorm {
            return Err(Error::Eigensolver(format!(
                "eigenvalue {ev} residual {residual:.3e} exceeds 1e-8 * {mnorm:.3e}"
            )));
        }
        out.push(*ev);
    }
    Ok(out)
}

/// Analytic eigenvalues of the pinned-linear-weight (circulant) derivative
/// operator: the symbol of the stencil
/// u_{j+1/2} = -(1/6) u_{j-1} + (5/6) u_j + (1/3) u_{j+1}
/// differenced and divided by -h, at the n-th roots of unity.
pub fn circulant_symbol_eigenvalues(n: usize, h: f64) -> Vec<Complex<f64>> {
    // v_j = -(1/h) [ (1/6) u_{j-2} - u_{j-1} + (1/2) u_j + (1/3) u_{j+1} ]
    let coeffs: [(isize, f64); 4] = [(-2, 1.0 / 6.0), (-1, -1.0), (0, 0.5), (1, 1.0 / 3.0)];
    (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64;
            let mut sym = Complex::new(0.0, 0.0);
            for (s, w) in coeffs {
                sym += Complex::from_polar(w.abs(), theta * s as f64)
                    * if w < 0.0 { -1.0 } else { 1.0 };
            }
            -sym / h
        })
        .collect()
}

/// Greedy matching distance between two unordered spectra.
pub fn spectrum_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for ea in a {
        let mut best = f64::INFINITY;
        let mut best_i = 0;
        for (i, eb) in b.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = (ea - eb).norm();
            if d < best {
                best = d;
                best_i = i;
            }
        }
        used[best_i] = true;
        worst = worst.max(best);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_norms_trivial_cases() {
        let mesh =
            Mesh1D::generate(&GridSpec::Uniform { n: 10 }, (0.0, 1.0), BoundaryKind::Periodic)
                .unwrap();
        let exact = |x: f64| x * x;
        let field = mesh.cell_averages(exact);
        let (one, max) = error_norms(&field, &mesh, exact);
        assert!(one < 1e-15 && max < 1e-15);
        // single cell off by delta on width h -> (h*delta, delta)
        let mut off = field.clone();
        off.set(3, 0, off.get(3, 0) + 0.5);
        let (one, max) = error_norms(&off, &mesh, exact);
        assert!((one - 0.1 * 0.5).abs() < 1e-14);
        assert!((max - 0.5).abs() < 1e-14);
    }

    #[test]
    fn total_variation_square_wave() {
        let data = [0.0, 0.0, 1.0, 1.0, 0.0];
        assert!((total_variation(&data) - 2.0).abs() < 1e-15);
        // monotone data, non-periodic view: |last - first|
        let mono = [0.0f64, 0.3, 0.9, 2.0];
        let open: f64 = mono.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        assert!((open - 2.0).abs() < 1e-15);
    }

    #[test]
    fn table_rates() {
        let t = ConvergenceTable::from_errors("t", &["a", "b"], &[8.0, 1.0], 2.0);
        assert!(t.rows[0].rate.is_none());
        assert!((t.rows[1].rate.unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn piecewise_constant_means() {
        let mesh =
            Mesh1D::generate(&GridSpec::Uniform { n: 4 }, (0.0, 1.0), BoundaryKind::Periodic)
                .unwrap();
        let field = Field::from_data(1, vec![1.0, 2.0, 3.0, 4.0]);
        let pc = PiecewiseConstant::new(&mesh, &field, 0);
        assert!((pc.mean_over(0.0, 0.25) - 1.0).abs() < 1e-15);
        assert!((pc.mean_over(0.0, 0.5) - 1.5).abs() < 1e-15);
        assert!((pc.mean_over(0.125, 0.375) - 1.5).abs() < 1e-15);
        assert!((pc.mean_over(0.0, 1.0) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn derivative_error_zero_for_linear_on_uniform() {
        let mesh =
            Mesh1D::generate(&GridSpec::Uniform { n: 16 }, (0.0, 1.0), BoundaryKind::Periodic)
                .unwrap();
        let cfg = ReconstructionConfig::weno3(EpsilonPolicy::quadratic_h());
        // periodic linear-in-cell data: use a sine at machine-level check is
        // not exact, so use a genuinely linear function via an open view:
        // reconstructions are exact for linears, so test with u(x) = 3x on
        // averages that wrap consistently is impossible; instead check a
        // constant (derivative 0).
        let err = derivative_error_for(&mesh, &cfg, |_| 2.0).unwrap();
        assert!(err < 1e-14);
    }

    #[test]
    fn stability_boundary_points() {
        // z = 0 inside
        let (ok, _) = stability_check(&[Complex::new(0.0, 0.0)], 1.0);
        assert!(ok);
        // z = i sqrt(3): |R| = 1 exactly
        let r = ssprk3_amplification(Complex::new(0.0, 3.0f64.sqrt())).norm();
        assert!((r - 1.0).abs() < 1e-14);
        // real-axis crossing near -2.5127: root of R(x) = -1
        let f = |x: f64| 1.0 + x + x * x / 2.0 + x * x * x / 6.0 + 1.0;
        let (mut lo, mut hi) = (-3.0, -2.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let crossing = 0.5 * (lo + hi);
        assert!((crossing + 2.5127).abs() < 1e-3, "crossing {crossing}");
        let (inside, _) = stability_check(&[Complex::new(crossing + 1e-6, 0.0)], 1.0);
        assert!(inside);
        let (outside, _) = stability_check(&[Complex::new(crossing - 1e-3, 0.0)], 1.0);
        assert!(!outside);
    }

    #[test]
    fn fourier_projection_is_orthogonal() {
        // projecting a basis vector returns a unit coordinate vector
        let n = 65;
        let mesh =
            Mesh1D::generate(&GridSpec::Uniform { n }, (0.0, 1.0), BoundaryKind::Periodic)
                .unwrap();
        let basis: Vec<Vec<f64>> = (0..n).map(|i| fourier_basis_averages(&mesh, i)).collect();
        let norms2: Vec<f64> = basis
            .iter()
            .map(|b| b.iter().map(|v| v * v).sum::<f64>())
            .collect();
        for probe in [0usize, 1, 2, 17, 64] {
            for row in 0..n {
                let dot: f64 = basis[row]
                    .iter()
                    .zip(basis[probe].iter())
                    .map(|(x, y)| x * y)
                    .sum();
                let coeff = dot / norms2[row];
                let expect = if row == probe { 1.0 } else { 0.0 };
                assert!(
                    (coeff - expect).abs() < 1e-12,
                    "row {row} probe {probe}: {coeff}"
                );
            }
        }
    }

    #[test]
    fn middle_cell_edge_value_is_third_order() {
        // u^-_{j+1/2} of the middle pattern cell itself (beta=2, gamma=1/2)
        // converges at third order for the h-dependent policies
        for policy in [EpsilonPolicy::linear_h(), EpsilonPolicy::quadratic_h()] {
            for kind in [ReconKind::Weno3, ReconKind::Cweno3] {
                let mut cfg = ReconstructionConfig::weno3(policy);
                cfg.kind = kind;
                let mut errors = Vec::new();
                for k in 0..8 {
                    let h = 5e-2 / (1 << k) as f64;
                    let mesh = five_cell_pattern(h);
                    let avgs = mesh.cell_averages(f64::exp);
                    let data = [avgs.get(1, 0), avgs.get(2, 0), avgs.get(3, 0)];
                    let rec = crate::reconstruction::reconstruct_cell(data, h, 2.0, 0.5, &cfg);
                    errors.push((rec.u_right - (0.5 * h).exp()).abs());
                }
                for k in 5..8 {
                    let rate = (errors[k - 1] / errors[k]).log2();
                    assert!(
                        (2.9..=3.1).contains(&rate),
                        "{kind:?} {policy:?} level {k}: rate {rate}"
                    );
                }
            }
        }
    }

    #[test]
    fn circulant_oracle_matches_eigensolver() {
        let cfg = ReconstructionConfig::weno3(EpsilonPolicy::linear_h());
        let spec = spectrum_matrix(&cfg, 65, true).unwrap();
        let oracle = circulant_symbol_eigenvalues(65, spec.h);
        let dist = spectrum_distance(&oracle, &spec.eigenvalues);
        assert!(dist < 1e-8, "spectrum distance {dist}");
    }

    #[test]
    fn constant_basis_column_is_zero() {
        let cfg = ReconstructionConfig::cweno3(EpsilonPolicy::linear_h());
        let spec = spectrum_matrix(&cfg, 65, false).unwrap();
        for row in 0..65 {
            assert!(spec.matrix[(row, 0)].abs() < 1e-11);
        }
    }
}
