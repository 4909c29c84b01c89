//! Third-order well-balanced shallow-water discretization: hydrostatic
//! interface states, Richardson-extrapolated source quadrature, and the
//! positivity bookkeeping used by the pond experiment.
//!
//! The momentum update of cell j reads
//!
//!   dq_j/dt = -(F_{j+1/2} - F_{j-1/2})/h_j
//!             + g/(2 h_j) [ (h*-)^2 - (h-)^2 + (h+)^2 - (h*+)^2 ]
//!             - g S / h_j
//!
//! with starred interface heights from the hydrostatic modification and S
//! one of the trapezoid (S1), two-interval (S2) or Richardson (4 S2 - S1)/3
//! quadratures of h z_x over the cell. For a lake at rest the starred terms
//! cancel the numerical flux exactly and the remaining boundary terms cancel
//! the source, for any of the three quadratures.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::mesh1d::{BoundaryKind, Mesh1D};
use crate::reconstruction::{reconstruct_cell, CellReconstruction, ReconKind, ReconstructionConfig};
use crate::systems::{NumericalFlux, System};
use crate::timeintegration::ssprk3_step;

/// How the point value at the cell centre (needed by S2) is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CenterValueStrategy {
    /// Evaluate the CWENO3 reconstruction polynomial at x_j.
    Cweno3,
    /// Evaluate the optimal parabola at x_j (WENO3+P2).
    Weno3P2,
    /// Use the cell average itself (reduces the scheme to second order).
    Weno3Avg,
}

impl CenterValueStrategy {
    pub fn recon_kind(&self) -> ReconKind {
        match self {
            CenterValueStrategy::Cweno3 => ReconKind::Cweno3,
            _ => ReconKind::Weno3,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CenterValueStrategy::Cweno3 => "CWENO3",
            CenterValueStrategy::Weno3P2 => "WENO3+P2",
            CenterValueStrategy::Weno3Avg => "WENO3+avg",
        }
    }

    fn center(&self, rec: &CellReconstruction, average: f64) -> f64 {
        match self {
            CenterValueStrategy::Cweno3 => rec.u_center.expect("CWENO3 reconstruction"),
            CenterValueStrategy::Weno3P2 => rec.poly[0],
            CenterValueStrategy::Weno3Avg => average,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceQuadrature {
    S1,
    S2,
    Richardson,
}

impl SourceQuadrature {
    pub fn label(&self) -> &'static str {
        match self {
            SourceQuadrature::S1 => "S1",
            SourceQuadrature::S2 => "S2",
            SourceQuadrature::Richardson => "richardson",
        }
    }
}

/// Cell average of h z_x from the cell's reconstructed point values.
pub fn source_quadrature(h: (f64, f64, f64), z: (f64, f64, f64), mode: SourceQuadrature) -> f64 {
    let (hl, hc, hr) = h;
    let (zl, zc, zr) = z;
    let s1 = 0.5 * (hl + hr) * (zr - zl);
    let s2 = || 0.5 * (hl + hc) * (zc - zl) + 0.5 * (hc + hr) * (zr - zc);
    match mode {
        SourceQuadrature::S1 => s1,
        SourceQuadrature::S2 => s2(),
        SourceQuadrature::Richardson => (4.0 * s2() - s1) / 3.0,
    }
}

/// Velocity with dry cutoff and width-scaled desingularization: plain q/h
/// for well-resolved wet states, damped smoothly to zero as h drops below
/// the cell-width scale (draining cells otherwise produce unbounded q/h).
pub fn desingularized_velocity(h: f64, q: f64, dry_tol: f64, width: f64) -> f64 {
    if h <= dry_tol {
        return 0.0;
    }
    let h4 = h * h * h * h;
    let w4 = width * width * width * width;
    std::f64::consts::SQRT_2 * h * q / (h4 + h4.max(w4)).sqrt()
}

/// Hydrostatically corrected states at one interface.
#[derive(Clone, Copy, Debug)]
pub struct InterfaceStates {
    pub z_star: f64,
    pub h_star_minus: f64,
    pub q_star_minus: f64,
    pub h_star_plus: f64,
    pub q_star_plus: f64,
}

/// z* = max(z-, z+); h*_pm = max(0, h_pm + z_pm - z*); q*_pm = h*_pm v_pm.
/// Inputs are (h, v, z) per side; velocities are the caller's (usually
/// desingularized) values.
pub fn hydrostatic_interface_states(minus: (f64, f64, f64), plus: (f64, f64, f64)) -> InterfaceStates {
    let (hm, vm, zm) = minus;
    let (hp, vp, zp) = plus;
    let z_star = zm.max(zp);
    let h_star_minus = (hm + zm - z_star).max(0.0);
    let h_star_plus = (hp + zp - z_star).max(0.0);
    InterfaceStates {
        z_star,
        h_star_minus,
        q_star_minus: h_star_minus * vm,
        h_star_plus,
        q_star_plus: h_star_plus * vp,
    }
}

fn ghost_index(i: isize, n: usize, boundary: BoundaryKind) -> Result<usize> {
    let ni = n as isize;
    if i >= 0 && i < ni {
        return Ok(i as usize);
    }
    match boundary {
        BoundaryKind::Periodic => Ok(i.rem_euclid(ni) as usize),
        BoundaryKind::Outflow => Ok(i.clamp(0, ni - 1) as usize),
        BoundaryKind::ReflectiveWall => {
            let src = if i < 0 { -1 - i } else { 2 * ni - 1 - i };
            if src < 0 || src >= ni {
                return Err(Error::Mesh(format!("mirror ghost {i} out of range")));
            }
            Ok(src as usize)
        }
        BoundaryKind::None => Err(Error::Mesh(format!(
            "ghost cell {i} without boundary policy"
        ))),
    }
}

fn ghost_width(mesh: &Mesh1D, i: isize) -> Result<f64> {
    Ok(mesh.width(ghost_index(i, mesh.n_cells(), mesh.boundary())?))
}

/// Reconstruct left/right/centre point values for every slot (cell index
/// shifted by one, ghosts at both ends) of a scalar average sequence.
fn point_values(
    mesh: &Mesh1D,
    averages: &[f64],
    config: &ReconstructionConfig,
    strategy: CenterValueStrategy,
    negate_at_wall: bool,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = mesh.n_cells();
    let boundary = mesh.boundary();
    let value = |i: isize| -> Result<f64> {
        let src = ghost_index(i, n, boundary)?;
        let v = averages[src];
        let mirrored = (i < 0 || i >= n as isize) && boundary == BoundaryKind::ReflectiveWall;
        Ok(if mirrored && negate_at_wall { -v } else { v })
    };
    let mut left = vec![0.0; n + 2];
    let mut right = vec![0.0; n + 2];
    let mut center = vec![0.0; n + 2];
    for slot in 0..n + 2 {
        let i = slot as isize - 1;
        let h = ghost_width(mesh, i)?;
        let beta = ghost_width(mesh, i - 1)? / h;
        let gamma = ghost_width(mesh, i + 1)? / h;
        let data = [value(i - 1)?, value(i)?, value(i + 1)?];
        let rec = reconstruct_cell(data, h, beta, gamma, config);
        left[slot] = rec.u_left;
        right[slot] = rec.u_right;
        center[slot] = strategy.center(&rec, data[1]);
    }
    Ok((left, right, center))
}

/// Bottom elevation, reconstructed once per mesh with the same machinery as
/// the solution. Point-value arrays are slot-indexed (ghosts included).
#[derive(Clone, Debug)]
pub struct Bathymetry {
    pub averages: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
    center: Vec<f64>,
}

impl Bathymetry {
    pub fn from_fn<F: Fn(f64) -> f64>(
        mesh: &Mesh1D,
        z: F,
        config: &ReconstructionConfig,
        strategy: CenterValueStrategy,
    ) -> Result<Self> {
        let averages: Vec<f64> = (0..mesh.n_cells())
            .map(|j| crate::quadrature::cell_average(&z, mesh.interface(j), mesh.interface(j + 1)))
            .collect();
        let (left, right, center) = point_values(mesh, &averages, config, strategy, false)?;
        Ok(Bathymetry {
            averages,
            left,
            right,
            center,
        })
    }

    pub fn left(&self, slot: usize) -> f64 {
        self.left[slot]
    }

    pub fn right(&self, slot: usize) -> f64 {
        self.right[slot]
    }

    pub fn center(&self, slot: usize) -> f64 {
        self.center[slot]
    }
}

/// Well-balanced shallow-water scheme configuration.
#[derive(Clone, Copy, Debug)]
pub struct SwScheme {
    pub g: f64,
    pub config: ReconstructionConfig,
    pub strategy: CenterValueStrategy,
    pub quadrature: SourceQuadrature,
    /// Heights below this are treated as dry when forming velocities.
    pub dry_tol: f64,
    /// Damp velocities of under-resolved states (width-scaled); when off,
    /// only the hard dry cutoff applies and the step size is still guarded
    /// by the damped speed estimate.
    pub desingularize: bool,
    /// Length scale of the damping, as a fraction of the local cell width.
    pub desing_factor: f64,
}

impl SwScheme {
    pub fn new(
        config: ReconstructionConfig,
        strategy: CenterValueStrategy,
        quadrature: SourceQuadrature,
    ) -> Result<Self> {
        if config.kind != strategy.recon_kind() {
            return Err(Error::Config(format!(
                "centre strategy {} needs reconstruction kind {:?}",
                strategy.label(),
                strategy.recon_kind()
            )));
        }
        Ok(SwScheme {
            g: 9.81,
            config,
            strategy,
            quadrature,
            dry_tol: 0.0,
            desingularize: false,
            desing_factor: 1.0,
        })
    }

    pub fn with_gravity(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    /// Dry tolerance relative to a height scale.
    pub fn with_dry_scale(mut self, h_scale: f64) -> Self {
        self.dry_tol = 1e-10 * h_scale;
        self
    }

    pub fn with_dry_tol(mut self, dry_tol: f64) -> Self {
        self.dry_tol = dry_tol;
        self
    }

    pub fn with_desingularization(mut self, on: bool) -> Self {
        self.desingularize = on;
        self
    }

    pub fn with_desing_factor(mut self, factor: f64) -> Self {
        self.desing_factor = factor;
        self
    }

    fn velocity(&self, h: f64, q: f64, width: f64) -> f64 {
        if self.desingularize {
            desingularized_velocity(h, q, self.dry_tol, self.desing_factor * width)
        } else if h > self.dry_tol {
            q / h
        } else {
            0.0
        }
    }

    /// Semidiscrete RHS of the well-balanced scheme.
    pub fn rhs(&self, mesh: &Mesh1D, field: &Field, bathy: &Bathymetry) -> Result<Field> {
        let n = mesh.n_cells();
        let h_avgs: Vec<f64> = (0..n).map(|j| field.get(j, 0)).collect();
        let q_avgs: Vec<f64> = (0..n).map(|j| field.get(j, 1)).collect();
        let (h_l, h_r, h_c) = point_values(mesh, &h_avgs, &self.config, self.strategy, false)?;
        let (q_l, q_r, _) = point_values(mesh, &q_avgs, &self.config, self.strategy, true)?;
        let system = System::ShallowWater { g: self.g };
        let flux = NumericalFlux::Rusanov;

        // interface fluxes plus the per-side pressure corrections
        let mut f_h = vec![0.0; n + 1];
        let mut f_q = vec![0.0; n + 1];
        let mut corr_minus = vec![0.0; n + 1]; // g/2 [(h-)^2 - (h*-)^2]
        let mut corr_plus = vec![0.0; n + 1]; // g/2 [(h+)^2 - (h*+)^2]
        for i in 0..=n {
            let (sl, sr) = (i, i + 1); // slots of the two adjacent cells
            let w_left = ghost_width(mesh, sl as isize - 1)?;
            let w_right = ghost_width(mesh, sr as isize - 1)?;
            let vm = self.velocity(h_r[sl], q_r[sl], w_left);
            let vp = self.velocity(h_l[sr], q_l[sr], w_right);
            let states = hydrostatic_interface_states(
                (h_r[sl], vm, bathy.right(sl)),
                (h_l[sr], vp, bathy.left(sr)),
            );
            let mut out = [0.0; 2];
            flux.evaluate(
                &system,
                &[states.h_star_minus, states.q_star_minus],
                &[states.h_star_plus, states.q_star_plus],
                &mut out,
            );
            f_h[i] = out[0];
            f_q[i] = out[1];
            corr_minus[i] =
                0.5 * self.g * (h_r[sl] * h_r[sl] - states.h_star_minus * states.h_star_minus);
            corr_plus[i] =
                0.5 * self.g * (h_l[sr] * h_l[sr] - states.h_star_plus * states.h_star_plus);
        }

        let mut rhs = Field::zeros(n, 2);
        for j in 0..n {
            let hj = mesh.width(j);
            let slot = j + 1;
            let s = source_quadrature(
                (h_l[slot], h_c[slot], h_r[slot]),
                (bathy.left(slot), bathy.center(slot), bathy.right(slot)),
                self.quadrature,
            );
            rhs.set(j, 0, -(f_h[j + 1] - f_h[j]) / hj);
            let momentum_flux_right = f_q[j + 1] + corr_minus[j + 1];
            let momentum_flux_left = f_q[j] + corr_plus[j];
            rhs.set(
                j,
                1,
                -(momentum_flux_right - momentum_flux_left) / hj - self.g * s / hj,
            );
        }
        Ok(rhs)
    }
}

/// Truncate negative water heights to zero (zeroing the discharge there);
/// returns the mass removed, sum_j h_j |delta h_j|.
pub fn positivity_filter(field: &mut Field, mesh: &Mesh1D) -> f64 {
    let mut removed = 0.0;
    for j in 0..mesh.n_cells() {
        let h = field.get(j, 0);
        if h < 0.0 {
            removed += mesh.width(j) * h.abs();
            field.set(j, 0, 0.0);
            field.set(j, 1, 0.0);
        }
    }
    removed
}

/// Drop the discharge of cells that are dry up to tolerance (their
/// velocity is meaningless); mass is untouched.
pub fn drop_dry_momentum(field: &mut Field, dry_tol: f64) {
    for j in 0..field.n_cells() {
        if field.get(j, 0) <= dry_tol {
            field.set(j, 1, 0.0);
        }
    }
}

pub struct SwRunResult {
    pub field: Field,
    pub steps: usize,
    /// Accumulated positivity-violation mass over the run.
    pub conservation_error: f64,
}

/// Wave-speed bound for the step size; always uses the damped velocity so
/// an under-resolved draining cell cannot collapse the step.
fn max_speed_dry(mesh: &Mesh1D, field: &Field, scheme: &SwScheme) -> f64 {
    let factor = if scheme.desingularize {
        scheme.desing_factor
    } else {
        1.0
    };
    let mut speed = 0.0f64;
    for j in 0..field.n_cells() {
        let h = field.get(j, 0).max(0.0);
        let v = desingularized_velocity(h, field.get(j, 1), scheme.dry_tol, factor * mesh.width(j));
        speed = speed.max(v.abs() + (scheme.g * h).sqrt());
    }
    speed
}

/// Advance the well-balanced scheme to `t_end`, applying the positivity
/// filter after every full step and accumulating its conservation error.
pub fn run(
    mesh: &Mesh1D,
    scheme: &SwScheme,
    bathy: &Bathymetry,
    initial: Field,
    t_end: f64,
    cfl: f64,
    max_steps: usize,
) -> Result<SwRunResult> {
    let mut field = initial;
    let mut t = 0.0;
    let mut steps = 0;
    let mut conservation_error = 0.0;
    while t < t_end - 1e-14 * t_end.max(1.0) {
        if steps >= max_steps {
            return Err(Error::Config(format!("max step count {max_steps} reached")));
        }
        let speed = max_speed_dry(mesh, &field, scheme);
        let dt = if speed > 0.0 {
            (cfl * mesh.min_width() / speed).min(t_end - t)
        } else {
            (t_end - t).min(1.0)
        };
        field = ssprk3_step(&field, dt, |u| scheme.rhs(mesh, u, bathy))?;
        conservation_error += positivity_filter(&mut field, mesh);
        if !scheme.desingularize {
            drop_dry_momentum(&mut field, scheme.dry_tol);
        }
        t += dt;
        steps += 1;
    }
    Ok(SwRunResult {
        field,
        steps,
        conservation_error,
    })
}

/// The pond experiment: bottom 2x^2 on [-1,1] with reflective walls,
/// initial surface max(1 + 0.4x, z), still water, run to t = 4.
pub mod pond {
    use super::*;
    use crate::mesh1d::GridSpec;

    pub const DOMAIN: (f64, f64) = (-1.0, 1.0);
    pub const T_END: f64 = 4.0;

    pub fn bottom(x: f64) -> f64 {
        2.0 * x * x
    }

    pub fn initial_height(x: f64) -> f64 {
        ((1.0 + 0.4 * x) - bottom(x)).max(0.0)
    }

    pub fn mesh(n: usize) -> Result<Mesh1D> {
        Mesh1D::generate(
            &GridSpec::QuasiRegular { n },
            DOMAIN,
            BoundaryKind::ReflectiveWall,
        )
    }

    /// Accumulated conservation error of the positivity-truncated scheme.
    pub fn conservation_error(scheme: &SwScheme, n: usize, cfl: f64) -> Result<f64> {
        let mesh = mesh(n)?;
        let bathy = Bathymetry::from_fn(&mesh, bottom, &scheme.config, scheme.strategy)?;
        let initial = mesh.cell_averages_vec(2, |x, out| {
            out[0] = initial_height(x);
            out[1] = 0.0;
        });
        let result = run(&mesh, scheme, &bathy, initial, T_END, cfl, 10_000_000)?;
        Ok(result.conservation_error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh1d::GridSpec;
    use crate::reconstruction::EpsilonPolicy;

    fn cweno_scheme() -> SwScheme {
        SwScheme::new(
            ReconstructionConfig::cweno3(EpsilonPolicy::linear_h()),
            CenterValueStrategy::Cweno3,
            SourceQuadrature::Richardson,
        )
        .unwrap()
    }

    #[test]
    fn quadratures_trivial_cases() {
        for mode in [
            SourceQuadrature::S1,
            SourceQuadrature::S2,
            SourceQuadrature::Richardson,
        ] {
            // constant z -> 0
            let s = source_quadrature((1.0, 2.0, 3.0), (0.7, 0.7, 0.7), mode);
            assert!(s.abs() < 1e-15);
            // constant h, linear z -> h * dz
            let s = source_quadrature((2.0, 2.0, 2.0), (0.0, 0.5, 1.0), mode);
            assert!((s - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quadratures_agree_for_linear_data() {
        let h = (1.0, 1.25, 1.5);
        let z = (0.2, 0.3, 0.4);
        let s1 = source_quadrature(h, z, SourceQuadrature::S1);
        let s2 = source_quadrature(h, z, SourceQuadrature::S2);
        let sr = source_quadrature(h, z, SourceQuadrature::Richardson);
        assert!((s1 - s2).abs() < 1e-15);
        assert!((s1 - sr).abs() < 1e-15);
    }

    #[test]
    fn hydrostatic_trivial_cases() {
        // flat bottom: states unchanged (inputs are (h, v, z))
        let s = hydrostatic_interface_states((1.0, 0.5, 0.0), (1.2, -0.25, 0.0));
        assert!((s.h_star_minus - 1.0).abs() < 1e-15);
        assert!((s.h_star_plus - 1.2).abs() < 1e-15);
        assert!((s.q_star_minus - 0.5).abs() < 1e-15);
        assert!((s.q_star_plus + 0.3).abs() < 1e-15);
        // lake at rest: equal starred heights
        let s = hydrostatic_interface_states((0.8, 0.0, 0.2), (0.6, 0.0, 0.4));
        assert!((s.h_star_minus - s.h_star_plus).abs() < 1e-15);
        // wet side facing a higher dry bank stays clipped at zero
        let s = hydrostatic_interface_states((0.0, 0.0, 1.0), (0.5, 0.2, 0.2));
        assert!((s.h_star_minus - 0.0).abs() < 1e-15);
        assert!((s.h_star_plus - 0.0).abs() < 1e-15); // 0.5 + 0.2 - 1.0 < 0
    }

    #[test]
    fn desingularized_velocity_limits() {
        // well-resolved wet state: plain q/h
        let v = desingularized_velocity(1.0, 0.5, 1e-10, 0.01);
        assert!((v - 0.5).abs() < 1e-9);
        // draining cell far below the width scale: strongly damped
        let v = desingularized_velocity(1e-6, -0.07, 1e-10, 0.0074);
        assert!(v.abs() < 1e-2, "v = {v}");
        // below the hard cutoff: exactly zero
        assert_eq!(desingularized_velocity(1e-12, 1.0, 1e-10, 0.01), 0.0);
    }

    #[test]
    fn center_strategies_trivial_cases() {
        let cfgw = ReconstructionConfig::weno3(EpsilonPolicy::linear_h());
        let rec = reconstruct_cell([3.0, 3.0, 3.0], 0.1, 1.0, 1.0, &cfgw);
        assert!((CenterValueStrategy::Weno3P2.center(&rec, 3.0) - 3.0).abs() < 1e-14);
        assert!((CenterValueStrategy::Weno3Avg.center(&rec, 3.0) - 3.0).abs() < 1e-14);
        let cfgc = ReconstructionConfig::cweno3(EpsilonPolicy::linear_h());
        let rec = reconstruct_cell([3.0, 3.0, 3.0], 0.1, 1.0, 1.0, &cfgc);
        assert!((CenterValueStrategy::Cweno3.center(&rec, 3.0) - 3.0).abs() < 1e-14);
        // parabolic data: P2 centre equals the optimal parabola at x_j
        let avg = |a: f64, b: f64| crate::quadrature::cell_average(|x| x * x, a, b);
        let data = [avg(-0.3, -0.1), avg(-0.1, 0.1), avg(0.1, 0.3)];
        let rec = reconstruct_cell(data, 0.2, 1.0, 1.0, &cfgw);
        assert!((CenterValueStrategy::Weno3P2.center(&rec, data[1]) - rec.poly[0]).abs() < 1e-15);
    }

    #[test]
    fn positivity_filter_accounting() {
        let mesh =
            Mesh1D::generate(&GridSpec::Uniform { n: 100 }, (0.0, 1.0), BoundaryKind::Periodic)
                .unwrap();
        let mut field = Field::zeros(100, 2);
        for j in 0..100 {
            field.set(j, 0, 0.5);
        }
        assert_eq!(positivity_filter(&mut field, &mesh), 0.0);
        field.set(7, 0, -1e-5);
        field.set(7, 1, 0.3);
        let inc = positivity_filter(&mut field, &mesh);
        assert!((inc - 1e-7).abs() < 1e-20);
        assert_eq!(field.get(7, 0), 0.0);
        assert_eq!(field.get(7, 1), 0.0);
    }

    fn lake_at_rest_residual(
        mesh: &Mesh1D,
        scheme: &SwScheme,
        z: impl Fn(f64) -> f64 + Copy,
        surface: f64,
    ) -> f64 {
        let bathy = Bathymetry::from_fn(mesh, z, &scheme.config, scheme.strategy).unwrap();
        let field = mesh.cell_averages_vec(2, |x, out| {
            out[0] = surface - z(x);
            out[1] = 0.0;
        });
        let rhs = scheme.rhs(mesh, &field, &bathy).unwrap();
        let scale = scheme.g * surface * surface;
        (0..mesh.n_cells())
            .map(|j| rhs.get(j, 0).abs().max(rhs.get(j, 1).abs()) * mesh.width(j) / scale)
            .fold(0.0, f64::max)
    }

    #[test]
    fn lake_at_rest_is_exact() {
        let z = |x: f64| 0.1 + 0.05 * (2.0 * std::f64::consts::PI * x).cos();
        for strategy in [
            CenterValueStrategy::Cweno3,
            CenterValueStrategy::Weno3P2,
            CenterValueStrategy::Weno3Avg,
        ] {
            for quad in [
                SourceQuadrature::S1,
                SourceQuadrature::S2,
                SourceQuadrature::Richardson,
            ] {
                let mut cfg = ReconstructionConfig::weno3(EpsilonPolicy::linear_h());
                cfg.kind = strategy.recon_kind();
                let scheme = SwScheme::new(cfg, strategy, quad).unwrap();
                let mesh = Mesh1D::generate(
                    &GridSpec::Random { n: 50, seed: 9 },
                    (0.0, 1.0),
                    BoundaryKind::Periodic,
                )
                .unwrap();
                let r = lake_at_rest_residual(&mesh, &scheme, z, 1.0);
                assert!(r < 1e-12, "{} {:?}: residual {r:e}", strategy.label(), quad);
            }
        }
    }

    #[test]
    fn lake_at_rest_with_walls() {
        let scheme = cweno_scheme();
        let mesh = Mesh1D::generate(
            &GridSpec::QuasiRegular { n: 64 },
            (-1.0, 1.0),
            BoundaryKind::ReflectiveWall,
        )
        .unwrap();
        // fully wet pond: surface above max z
        let r = lake_at_rest_residual(&mesh, &scheme, |x| 0.5 * x * x, 1.0);
        assert!(r < 1e-12, "residual {r:e}");
    }

    #[test]
    fn lake_at_rest_survives_time_stepping() {
        let scheme = cweno_scheme();
        let mesh = Mesh1D::generate(
            &GridSpec::QuasiRegular { n: 32 },
            (-1.0, 1.0),
            BoundaryKind::ReflectiveWall,
        )
        .unwrap();
        let z = |x: f64| 0.5 * x * x;
        let bathy = Bathymetry::from_fn(&mesh, z, &scheme.config, scheme.strategy).unwrap();
        let initial = mesh.cell_averages_vec(2, |x, out| {
            out[0] = 1.0 - z(x);
            out[1] = 0.0;
        });
        let system = System::ShallowWater { g: scheme.g };
        let mut field = initial.clone();
        let mut t = 0.0;
        for _ in 0..100 {
            let dt = crate::timeintegration::compute_dt(
                &mesh,
                &field,
                &system,
                0.45,
                1.0,
                t,
                f64::INFINITY,
            );
            field = ssprk3_step(&field, dt, |u| scheme.rhs(&mesh, u, &bathy)).unwrap();
            t += dt;
        }
        for j in 0..mesh.n_cells() {
            assert!((field.get(j, 0) - initial.get(j, 0)).abs() < 1e-12);
            assert!(field.get(j, 1).abs() < 1e-12);
        }
    }

    #[test]
    fn smooth_flow_orders_cweno3_vs_avg() {
        // smooth periodic flow over a smooth bottom. The CWENO3 scheme
        // self-converges at third order; the error component injected by
        // the cell-average centre values (isolated as the run difference
        // against WENO3+P2, whose centres are third-order accurate) decays
        // only at second order, which is what caps WENO3+avg asymptotically.
        use std::f64::consts::PI;
        let z = |x: f64| 2.0 * (PI * x).sin().powi(2);
        let h0 = |x: f64| 3.0 + 0.5 * (2.0 * PI * x).cos().exp();
        let q0 = |x: f64| (2.0 * PI * x).sin();
        let t_end = 0.1;
        let run_at = |strategy: CenterValueStrategy, n: usize| -> (Mesh1D, Field) {
            let mut cfg = ReconstructionConfig::cweno3(EpsilonPolicy::linear_h());
            cfg.kind = strategy.recon_kind();
            let scheme = SwScheme::new(cfg, strategy, SourceQuadrature::Richardson).unwrap();
            let mesh =
                Mesh1D::generate(&GridSpec::Uniform { n }, (0.0, 1.0), BoundaryKind::Periodic)
                    .unwrap();
            let bathy = Bathymetry::from_fn(&mesh, z, &scheme.config, strategy).unwrap();
            let initial = mesh.cell_averages_vec(2, |x, out| {
                out[0] = h0(x);
                out[1] = q0(x);
            });
            let out = run(&mesh, &scheme, &bathy, initial, t_end, 0.45, 1_000_000).unwrap();
            (mesh, out.field)
        };

        // CWENO3 self-convergence on nested grids: third order
        let runs: Vec<(Mesh1D, Field)> = [200usize, 400, 800]
            .iter()
            .map(|&n| run_at(CenterValueStrategy::Cweno3, n))
            .collect();
        let mut errs = Vec::new();
        for k in 0..2 {
            let (coarse_mesh, coarse) = &runs[k];
            let (_, fine) = &runs[k + 1];
            let mut err = 0.0;
            for j in 0..coarse_mesh.n_cells() {
                let proj = 0.5 * (fine.get(2 * j, 1) + fine.get(2 * j + 1, 1));
                err += coarse_mesh.width(j) * (coarse.get(j, 1) - proj).abs();
            }
            errs.push(err);
        }
        let ord_cweno = (errs[0] / errs[1]).log2();
        assert!(ord_cweno > 2.6, "CWENO3 self-convergence order {ord_cweno}");

        // centre-value error component of WENO3+avg: second order
        let mut diffs = Vec::new();
        for &n in &[200usize, 400, 800] {
            let (mesh, p2) = run_at(CenterValueStrategy::Weno3P2, n);
            let (_, avg) = run_at(CenterValueStrategy::Weno3Avg, n);
            let d: f64 = (0..n)
                .map(|j| mesh.width(j) * (p2.get(j, 1) - avg.get(j, 1)).abs())
                .sum();
            diffs.push(d);
        }
        for k in 0..2 {
            let ord = (diffs[k] / diffs[k + 1]).log2();
            assert!(
                (1.7..2.4).contains(&ord),
                "avg centre-value error order {ord} (diffs {diffs:?})"
            );
        }
    }

    #[test]
    fn pond_initial_data_shorelines() {
        assert!(pond::initial_height(0.0) > 0.9);
        assert_eq!(pond::initial_height(0.9), 0.0);
        assert_eq!(pond::initial_height(-0.7), 0.0);
    }

    #[test]
    fn strategy_kind_mismatch_rejected() {
        let cfg = ReconstructionConfig::weno3(EpsilonPolicy::linear_h());
        assert!(SwScheme::new(cfg, CenterValueStrategy::Cweno3, SourceQuadrature::S1).is_err());
    }
}
