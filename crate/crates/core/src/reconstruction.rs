//! WENO3 and CWENO3 cell reconstructions on non-uniform 3-cell stencils.
//!
//! All formulas are written for a stencil with cell sizes
//! (beta*h, h, gamma*h) around the central cell, in the local coordinate
//! xi = x - x_j. Candidate polynomials:
//!
//!   P_L(xi) = u_j + sigma_minus * xi        (matches the left neighbour)
//!   P_R(xi) = u_j + sigma_plus  * xi        (matches the right neighbour)
//!   P_OPT(xi) = a + b*xi + c*xi^2           (matches all three averages)
//!
//! The CWENO3 central candidate is defined by
//! P_0 = (P_OPT - C_L P_L - C_R P_R)/C_0 so that the linear-weight blend
//! reproduces P_OPT identically.

/// Rule for the regularization parameter in the weight denominators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonPolicy {
    /// eps = eps_hat, independent of the mesh.
    Constant { eps_hat: f64 },
    /// eps = eps_hat * h_j.
    LinearH { eps_hat: f64 },
    /// eps = eps_hat * h_j^2.
    QuadraticH { eps_hat: f64 },
}

impl EpsilonPolicy {
    pub fn constant(eps_hat: f64) -> Self {
        EpsilonPolicy::Constant { eps_hat }
    }

    /// eps = h_j (unit prefactor).
    pub fn linear_h() -> Self {
        EpsilonPolicy::LinearH { eps_hat: 1.0 }
    }

    /// eps = h_j^2 (unit prefactor).
    pub fn quadratic_h() -> Self {
        EpsilonPolicy::QuadraticH { eps_hat: 1.0 }
    }

    pub fn eval(&self, h: f64) -> f64 {
        match *self {
            EpsilonPolicy::Constant { eps_hat } => eps_hat,
            EpsilonPolicy::LinearH { eps_hat } => eps_hat * h,
            EpsilonPolicy::QuadraticH { eps_hat } => eps_hat * h * h,
        }
    }

    pub fn is_valid(&self) -> bool {
        let eps_hat = match *self {
            EpsilonPolicy::Constant { eps_hat }
            | EpsilonPolicy::LinearH { eps_hat }
            | EpsilonPolicy::QuadraticH { eps_hat } => eps_hat,
        };
        eps_hat > 0.0
    }

    pub fn label(&self) -> String {
        match *self {
            EpsilonPolicy::Constant { eps_hat } => format!("eps={eps_hat:e}"),
            EpsilonPolicy::LinearH { eps_hat } if eps_hat == 1.0 => "eps=h".into(),
            EpsilonPolicy::LinearH { eps_hat } => format!("eps={eps_hat}*h"),
            EpsilonPolicy::QuadraticH { eps_hat } if eps_hat == 1.0 => "eps=h^2".into(),
            EpsilonPolicy::QuadraticH { eps_hat } => format!("eps={eps_hat}*h^2"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReconKind {
    Weno3,
    Cweno3,
}

impl ReconKind {
    pub fn label(&self) -> &'static str {
        match self {
            ReconKind::Weno3 => "WENO3",
            ReconKind::Cweno3 => "CWENO3",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ReconstructionConfig {
    pub kind: ReconKind,
    pub epsilon: EpsilonPolicy,
    /// Exponent of the weight denominator (>= 1; all experiments use 2).
    pub tau: i32,
    /// CWENO3 linear weights (C_L, C_R); C_0 = 1 - C_L - C_R.
    pub cweno_linear_weights: (f64, f64),
}

impl ReconstructionConfig {
    pub fn weno3(epsilon: EpsilonPolicy) -> Self {
        ReconstructionConfig {
            kind: ReconKind::Weno3,
            epsilon,
            tau: 2,
            cweno_linear_weights: (0.25, 0.25),
        }
    }

    pub fn cweno3(epsilon: EpsilonPolicy) -> Self {
        ReconstructionConfig {
            kind: ReconKind::Cweno3,
            epsilon,
            tau: 2,
            cweno_linear_weights: (0.25, 0.25),
        }
    }

    pub fn cweno_c0(&self) -> f64 {
        1.0 - self.cweno_linear_weights.0 - self.cweno_linear_weights.1
    }

    pub fn is_valid(&self) -> bool {
        let (cl, cr) = self.cweno_linear_weights;
        self.tau >= 1
            && self.epsilon.is_valid()
            && cl > 0.0
            && cl < 1.0
            && cr > 0.0
            && cr < 1.0
            && self.cweno_c0() > 0.0
    }
}

/// Candidate polynomials of one stencil, in local coordinates.
#[derive(Clone, Copy, Debug)]
pub struct CandidateSet {
    pub h: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Central cell average (constant coefficient of P_L and P_R).
    pub u_center: f64,
    pub sigma_minus: f64,
    pub sigma_plus: f64,
    /// Coefficients of the optimal parabola.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Coefficients of the CWENO3 central candidate, when requested.
    pub p0: Option<[f64; 3]>,
}

impl CandidateSet {
    pub fn eval_left(&self, xi: f64) -> f64 {
        self.u_center + self.sigma_minus * xi
    }

    pub fn eval_right(&self, xi: f64) -> f64 {
        self.u_center + self.sigma_plus * xi
    }

    pub fn eval_opt(&self, xi: f64) -> f64 {
        self.a + self.b * xi + self.c * xi * xi
    }
}

/// Slopes, optimal parabola and (for CWENO3) the central candidate.
pub fn candidate_polynomials(
    data: [f64; 3],
    h: f64,
    beta: f64,
    gamma: f64,
    config: &ReconstructionConfig,
) -> CandidateSet {
    let [um, u0, up] = data;
    let sigma_minus = 2.0 * (u0 - um) / ((1.0 + beta) * h);
    let sigma_plus = 2.0 * (up - u0) / ((1.0 + gamma) * h);
    let denom = 1.0 + beta + gamma;
    let c = 1.5 * (sigma_plus - sigma_minus) / (h * denom);
    let b = ((0.5 + beta) * sigma_plus + (0.5 + gamma) * sigma_minus) / denom;
    let a = u0 - c * h * h / 12.0;
    let p0 = match config.kind {
        ReconKind::Weno3 => None,
        ReconKind::Cweno3 => {
            let (cl, cr) = config.cweno_linear_weights;
            let c0 = config.cweno_c0();
            Some([
                (a - cl * u0 - cr * u0) / c0,
                (b - cl * sigma_minus - cr * sigma_plus) / c0,
                c / c0,
            ])
        }
    };
    CandidateSet {
        h,
        beta,
        gamma,
        u_center: u0,
        sigma_minus,
        sigma_plus,
        a,
        b,
        c,
        p0,
    }
}

/// Jiang-Shu smoothness indicators of the candidates.
#[derive(Clone, Copy, Debug)]
pub struct Indicators {
    pub left: f64,
    pub right: f64,
    /// Indicator of the CWENO3 central candidate (when present).
    pub p0: Option<f64>,
    /// Indicator of the optimal parabola (diagnostic).
    pub opt: f64,
}

/// Indicator of a parabola q0 + q1*xi + q2*xi^2 over a cell of width h:
/// sum over derivative orders r >= 1 of h^(2r-1) * integral (P^(r))^2.
fn parabola_indicator(q1: f64, q2: f64, h: f64) -> f64 {
    let h2 = h * h;
    q1 * q1 * h2 + (13.0 / 3.0) * q2 * q2 * h2 * h2
}

pub fn jiang_shu_indicators(cand: &CandidateSet, h: f64) -> Indicators {
    let left = cand.sigma_minus * cand.sigma_minus * h * h;
    let right = cand.sigma_plus * cand.sigma_plus * h * h;
    let p0 = cand.p0.map(|p| parabola_indicator(p[1], p[2], h));
    let opt = parabola_indicator(cand.b, cand.c, h);
    Indicators {
        left,
        right,
        p0,
        opt,
    }
}

/// Nonlinear weights from linear weights and indicators:
/// w~_k = C_k / (eps + I_k)^tau, normalized to sum 1.
pub fn nonlinear_weights<const K: usize>(
    linear: [f64; K],
    indicators: [f64; K],
    eps: f64,
    tau: i32,
) -> [f64; K] {
    let mut w = [0.0; K];
    let mut sum = 0.0;
    for k in 0..K {
        w[k] = linear[k] / (eps + indicators[k]).powi(tau);
        sum += w[k];
    }
    for wk in w.iter_mut() {
        *wk /= sum;
    }
    w
}

/// Optimal (linear) weights of the two WENO3 candidates at both cell edges.
#[derive(Clone, Copy, Debug)]
pub struct OptimalWeights {
    /// (C_L, C_R) for the right edge x_{j+1/2}.
    pub plus: (f64, f64),
    /// (C_L, C_R) for the left edge x_{j-1/2}.
    pub minus: (f64, f64),
}

/// Weights that make the candidate blend match the optimal parabola at the
/// cell edges. The minus pair solves the matching condition
/// P_OPT(x_{j-1/2}) = C_L P_L(x_{j-1/2}) + C_R P_R(x_{j-1/2}) exactly.
pub fn weno_optimal_weights(beta: f64, gamma: f64) -> OptimalWeights {
    let denom = 1.0 + beta + gamma;
    OptimalWeights {
        plus: (gamma / denom, (1.0 + beta) / denom),
        minus: ((1.0 + gamma) / denom, beta / denom),
    }
}

/// Weight sets actually used by a reconstruction.
#[derive(Clone, Copy, Debug)]
pub enum WeightSets {
    /// Two sets, one per edge: [w_L, w_R].
    Weno3 { plus: [f64; 2], minus: [f64; 2] },
    /// One set [w_L, w_R, w_0].
    Cweno3 { weights: [f64; 3] },
}

/// Result of reconstructing one cell.
#[derive(Clone, Copy, Debug)]
pub struct CellReconstruction {
    pub indicators: Indicators,
    pub weights: WeightSets,
    /// u^+_{j-1/2}: value at the left edge of the cell.
    pub u_left: f64,
    /// u^-_{j+1/2}: value at the right edge of the cell.
    pub u_right: f64,
    /// Value at the cell centre (CWENO3 only).
    pub u_center: Option<f64>,
    /// Representative polynomial in local coordinates: the blended CWENO3
    /// polynomial, or the optimal parabola for WENO3.
    pub poly: [f64; 3],
}

impl CellReconstruction {
    pub fn eval_poly(&self, xi: f64) -> f64 {
        self.poly[0] + self.poly[1] * xi + self.poly[2] * xi * xi
    }
}

/// Full reconstruction of one cell from its stencil data.
pub fn reconstruct_cell(
    data: [f64; 3],
    h: f64,
    beta: f64,
    gamma: f64,
    config: &ReconstructionConfig,
) -> CellReconstruction {
    let eps = config.epsilon.eval(h);
    let cand = candidate_polynomials(data, h, beta, gamma, config);
    let ind = jiang_shu_indicators(&cand, h);
    let half = 0.5 * h;
    match config.kind {
        ReconKind::Weno3 => {
            let opt = weno_optimal_weights(beta, gamma);
            let wp = nonlinear_weights(
                [opt.plus.0, opt.plus.1],
                [ind.left, ind.right],
                eps,
                config.tau,
            );
            let wm = nonlinear_weights(
                [opt.minus.0, opt.minus.1],
                [ind.left, ind.right],
                eps,
                config.tau,
            );
            let u_right = wp[0] * cand.eval_left(half) + wp[1] * cand.eval_right(half);
            let u_left = wm[0] * cand.eval_left(-half) + wm[1] * cand.eval_right(-half);
            CellReconstruction {
                indicators: ind,
                weights: WeightSets::Weno3 {
                    plus: wp,
                    minus: wm,
                },
                u_left,
                u_right,
                u_center: None,
                poly: [cand.a, cand.b, cand.c],
            }
        }
        ReconKind::Cweno3 => {
            let (cl, cr) = config.cweno_linear_weights;
            let c0 = config.cweno_c0();
            let i0 = ind.p0.expect("CWENO3 candidate set has P0");
            let w = nonlinear_weights([cl, cr, c0], [ind.left, ind.right, i0], eps, config.tau);
            let p0 = cand.p0.unwrap();
            let poly = [
                w[0] * cand.u_center + w[1] * cand.u_center + w[2] * p0[0],
                w[0] * cand.sigma_minus + w[1] * cand.sigma_plus + w[2] * p0[1],
                w[2] * p0[2],
            ];
            let eval = |xi: f64| poly[0] + poly[1] * xi + poly[2] * xi * xi;
            CellReconstruction {
                indicators: ind,
                weights: WeightSets::Cweno3 { weights: w },
                u_left: eval(-half),
                u_right: eval(half),
                u_center: Some(poly[0]),
                poly,
            }
        }
    }
}

/// Distance between nonlinear and linear weights, per weight set.
#[derive(Clone, Copy, Debug)]
pub enum WeightDeviation {
    Weno3 { plus: [f64; 2], minus: [f64; 2] },
    Cweno3 { deviations: [f64; 3] },
}

impl WeightDeviation {
    /// Deviation of the right-edge right candidate (WENO3) or of the
    /// central candidate (CWENO3) -- the columns tabulated in the studies.
    pub fn headline(&self) -> f64 {
        match self {
            WeightDeviation::Weno3 { plus, .. } => plus[1],
            WeightDeviation::Cweno3 { deviations } => deviations[2],
        }
    }
}

pub fn weight_deviation(
    data: [f64; 3],
    h: f64,
    beta: f64,
    gamma: f64,
    config: &ReconstructionConfig,
) -> WeightDeviation {
    let rec = reconstruct_cell(data, h, beta, gamma, config);
    match rec.weights {
        WeightSets::Weno3 { plus, minus } => {
            let opt = weno_optimal_weights(beta, gamma);
            WeightDeviation::Weno3 {
                plus: [(opt.plus.0 - plus[0]).abs(), (opt.plus.1 - plus[1]).abs()],
                minus: [
                    (opt.minus.0 - minus[0]).abs(),
                    (opt.minus.1 - minus[1]).abs(),
                ],
            }
        }
        WeightSets::Cweno3 { weights } => {
            let (cl, cr) = config.cweno_linear_weights;
            let c0 = config.cweno_c0();
            WeightDeviation::Cweno3 {
                deviations: [
                    (cl - weights[0]).abs(),
                    (cr - weights[1]).abs(),
                    (c0 - weights[2]).abs(),
                ],
            }
        }
    }
}

/// Partial derivatives of the reconstructed right-edge value with respect to
/// the three stencil averages, by central finite differences.
pub fn reconstruction_gradient(
    data: [f64; 3],
    h: f64,
    beta: f64,
    gamma: f64,
    config: &ReconstructionConfig,
) -> [f64; 3] {
    let norm = data.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let delta = 1e-6 * norm.max(1.0);
    let mut grad = [0.0; 3];
    for k in 0..3 {
        let mut dp = data;
        let mut dm = data;
        dp[k] += delta;
        dm[k] -= delta;
        let up = reconstruct_cell(dp, h, beta, gamma, config).u_right;
        let um = reconstruct_cell(dm, h, beta, gamma, config).u_right;
        grad[k] = (up - um) / (2.0 * delta);
    }
    grad
}

/// Gradient of the linear operator that evaluates the optimal parabola at
/// the right edge (independent of the data).
pub fn p2_gradient(h: f64, beta: f64, gamma: f64, config: &ReconstructionConfig) -> [f64; 3] {
    let mut grad = [0.0; 3];
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let cand = candidate_polynomials(e, h, beta, gamma, config);
        grad[k] = cand.eval_opt(0.5 * h);
    }
    grad
}
