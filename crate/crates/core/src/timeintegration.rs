//! Semidiscrete RHS assembly and SSPRK3 time stepping.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::mesh1d::{BoundaryKind, Mesh1D};
use crate::reconstruction::{reconstruct_cell, ReconstructionConfig};
use crate::systems::{NumericalFlux, System};

/// Butcher tableau of the optimal three-stage, third-order strong
/// stability preserving scheme.
#[derive(Clone, Copy, Debug)]
pub struct SsprkTableau {
    pub a: [[f64; 3]; 3],
    pub b: [f64; 3],
}

pub const SSPRK33: SsprkTableau = SsprkTableau {
    a: [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.25, 0.25, 0.0]],
    b: [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
};

impl SsprkTableau {
    pub fn is_consistent(&self) -> bool {
        (self.b.iter().sum::<f64>() - 1.0).abs() < 1e-15
    }
}

/// Time-stepping configuration.
#[derive(Clone, Copy, Debug)]
pub struct CflConfig {
    pub cfl: f64,
    pub t_end: f64,
    pub max_steps: usize,
    /// Fallback step when no wave speed is present.
    pub dt_max: f64,
}

impl CflConfig {
    pub fn new(cfl: f64, t_end: f64) -> Self {
        CflConfig {
            cfl,
            t_end,
            max_steps: 50_000_000,
            dt_max: 1.0,
        }
    }
}

/// Additive cell source: (cell, centre, cell averages, out).
pub type SourceFn<'a> = dyn Fn(usize, f64, &[f64], &mut [f64]) + 'a;

/// Boundary-extrapolated data for every cell plus one ghost on each side.
/// Slot `i` holds cell `i-1`; slots 0 and n+1 are ghosts.
pub struct EdgeData {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub m: usize,
    pub n: usize,
}

impl EdgeData {
    /// States feeding the numerical flux at interface `i` (0..=n):
    /// (right edge of cell i-1, left edge of cell i).
    pub fn interface_states(&self, i: usize) -> (&[f64], &[f64]) {
        let m = self.m;
        (
            &self.right[i * m..(i + 1) * m],
            &self.left[(i + 1) * m..(i + 2) * m],
        )
    }
}

/// Resolve an extended cell index to (source cell, negate momentum flag).
fn resolve_ghost(i: isize, n: usize, boundary: BoundaryKind) -> Result<(usize, bool)> {
    let ni = n as isize;
    if i >= 0 && i < ni {
        return Ok((i as usize, false));
    }
    match boundary {
        BoundaryKind::Periodic => Ok((i.rem_euclid(ni) as usize, false)),
        BoundaryKind::Outflow => Ok((i.clamp(0, ni - 1) as usize, false)),
        BoundaryKind::ReflectiveWall => {
            let src = if i < 0 { -1 - i } else { 2 * ni - 1 - i };
            if src < 0 || src >= ni {
                return Err(Error::Mesh(format!("mirror ghost {i} out of range")));
            }
            Ok((src as usize, true))
        }
        BoundaryKind::None => Err(Error::Mesh(format!(
            "ghost cell {i} requested on a mesh without boundary policy"
        ))),
    }
}

fn ghost_value(
    field: &Field,
    system: &System,
    i: isize,
    n: usize,
    boundary: BoundaryKind,
    comp: usize,
) -> Result<f64> {
    let (src, negate) = resolve_ghost(i, n, boundary)?;
    let v = field.get(src, comp);
    if negate && system.reflective_components().contains(&comp) {
        Ok(-v)
    } else {
        Ok(v)
    }
}

fn ghost_width(mesh: &Mesh1D, i: isize) -> Result<f64> {
    let n = mesh.n_cells();
    let (src, _) = resolve_ghost(i, n, mesh.boundary())?;
    Ok(mesh.width(src))
}

/// Reconstruct boundary-extrapolated data for all cells and one ghost layer.
pub fn edge_data(
    mesh: &Mesh1D,
    field: &Field,
    system: &System,
    config: &ReconstructionConfig,
) -> Result<EdgeData> {
    let n = mesh.n_cells();
    let m = field.n_components();
    let boundary = mesh.boundary();
    let mut left = vec![0.0; (n + 2) * m];
    let mut right = vec![0.0; (n + 2) * m];
    for slot in 0..n + 2 {
        let i = slot as isize - 1;
        let h = ghost_width(mesh, i)?;
        let beta = ghost_width(mesh, i - 1)? / h;
        let gamma = ghost_width(mesh, i + 1)? / h;
        for c in 0..m {
            let data = [
                ghost_value(field, system, i - 1, n, boundary, c)?,
                ghost_value(field, system, i, n, boundary, c)?,
                ghost_value(field, system, i + 1, n, boundary, c)?,
            ];
            let rec = reconstruct_cell(data, h, beta, gamma, config);
            left[slot * m + c] = rec.u_left;
            right[slot * m + c] = rec.u_right;
        }
    }
    Ok(EdgeData { left, right, m, n })
}

/// Edge values of a periodic scalar field (no ghost slots in the output).
pub fn scalar_edge_values(
    mesh: &Mesh1D,
    data: &[f64],
    config: &ReconstructionConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let field = Field::from_data(1, data.to_vec());
    let system = System::Advection { a: 1.0 };
    let edges = edge_data(mesh, &field, &system, config)?;
    let n = mesh.n_cells();
    Ok((
        edges.left[1..n + 1].to_vec(),
        edges.right[1..n + 1].to_vec(),
    ))
}

/// Assemble dU_j/dt from precomputed edge data.
pub fn rhs_from_edges(
    mesh: &Mesh1D,
    edges: &EdgeData,
    system: &System,
    flux: NumericalFlux,
    source: Option<&SourceFn>,
) -> Result<Field> {
    let n = mesh.n_cells();
    let m = edges.m;
    let mut fluxes = vec![0.0; (n + 1) * m];
    for i in 0..=n {
        let (ul, ur) = edges.interface_states(i);
        flux.evaluate(system, ul, ur, &mut fluxes[i * m..(i + 1) * m]);
    }
    let mut rhs = Field::zeros(n, m);
    let mut src = vec![0.0; m];
    for j in 0..n {
        let h = mesh.width(j);
        if let Some(s) = source {
            src.iter_mut().for_each(|v| *v = 0.0);
            s(j, mesh.center(j), &[], &mut src);
        }
        for c in 0..m {
            let df = fluxes[(j + 1) * m + c] - fluxes[j * m + c];
            rhs.set(j, c, -df / h + src[c]);
        }
    }
    Ok(rhs)
}

/// dU_j/dt = -(F_{j+1/2} - F_{j-1/2})/h_j + G_j.
pub fn semidiscrete_rhs(
    mesh: &Mesh1D,
    field: &Field,
    system: &System,
    flux: NumericalFlux,
    config: &ReconstructionConfig,
    source: Option<&SourceFn>,
) -> Result<Field> {
    for j in 0..mesh.n_cells() {
        system.check_admissible(field.cell(j), j)?;
    }
    let edges = edge_data(mesh, field, system, config)?;
    rhs_from_edges(mesh, &edges, system, flux, source)
}

/// One step of the optimal SSPRK(3,3) scheme in convex (Shu-Osher) form.
/// The reconstruction inside `rhs` is re-applied at every stage.
pub fn ssprk3_step<F>(state: &Field, dt: f64, rhs: F) -> Result<Field>
where
    F: Fn(&Field) -> Result<Field>,
{
    let u1 = state.axpy(dt, &rhs(state)?);
    let u1b = u1.axpy(dt, &rhs(&u1)?);
    let u2 = state.lin_comb(0.75, 0.25, &u1b);
    let u2b = u2.axpy(dt, &rhs(&u2)?);
    Ok(state.lin_comb(1.0 / 3.0, 2.0 / 3.0, &u2b))
}

/// CFL-limited step size, clipped to land exactly on `t_target`.
pub fn compute_dt(
    mesh: &Mesh1D,
    field: &Field,
    system: &System,
    cfl: f64,
    dt_max: f64,
    t_now: f64,
    t_target: f64,
) -> f64 {
    let mut speed = 0.0f64;
    for j in 0..mesh.n_cells() {
        speed = speed.max(system.max_speed(field.cell(j)));
    }
    let dt = if speed > 0.0 {
        (cfl * mesh.min_width() / speed).min(dt_max)
    } else {
        dt_max
    };
    dt.min(t_target - t_now)
}

/// Snapshot of a state as CSV: x_center, h, then one column per component.
pub fn state_csv(mesh: &Mesh1D, field: &Field) -> String {
    use std::fmt::Write as _;
    let m = field.n_components();
    let mut out = String::from("x,h");
    for c in 0..m {
        let _ = write!(out, ",u{c}");
    }
    out.push('\n');
    for j in 0..mesh.n_cells() {
        let _ = write!(out, "{:.10e},{:.10e}", mesh.center(j), mesh.width(j));
        for c in 0..m {
            let _ = write!(out, ",{:.10e}", field.get(j, c));
        }
        out.push('\n');
    }
    out
}

pub struct IntegrationResult {
    pub field: Field,
    pub steps: usize,
    pub time: f64,
}

/// Advance `initial` to `cfl.t_end` on a fixed mesh. The observer (if any)
/// sees the state after every accepted step.
pub fn integrate(
    mesh: &Mesh1D,
    initial: Field,
    system: &System,
    flux: NumericalFlux,
    config: &ReconstructionConfig,
    cfl: &CflConfig,
    source: Option<&SourceFn>,
    mut observer: Option<&mut dyn FnMut(usize, f64, &Field)>,
) -> Result<IntegrationResult> {
    let mut field = initial;
    let mut t = 0.0;
    let mut steps = 0;
    while t < cfl.t_end - 1e-14 * cfl.t_end.max(1.0) {
        if steps >= cfl.max_steps {
            return Err(Error::Config(format!(
                "max step count {} reached at t = {t}",
                cfl.max_steps
            )));
        }
        let dt = compute_dt(mesh, &field, system, cfl.cfl, cfl.dt_max, t, cfl.t_end);
        field = ssprk3_step(&field, dt, |u| {
            semidiscrete_rhs(mesh, u, system, flux, config, source)
        })?;
        t += dt;
        steps += 1;
        if let Some(obs) = observer.as_deref_mut() {
            obs(steps, t, &field);
        }
    }
    Ok(IntegrationResult {
        field,
        steps,
        time: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh1d::GridSpec;
    use crate::reconstruction::{EpsilonPolicy, ReconKind};

    fn periodic_uniform(n: usize) -> Mesh1D {
        Mesh1D::generate(&GridSpec::Uniform { n }, (0.0, 1.0), BoundaryKind::Periodic).unwrap()
    }

    #[test]
    fn tableau_is_consistent() {
        assert!(SSPRK33.is_consistent());
        // strictly lower triangular
        for i in 0..3 {
            for j in i..3 {
                assert_eq!(SSPRK33.a[i][j], 0.0);
            }
        }
    }

    #[test]
    fn constant_field_has_zero_rhs() {
        let mesh = periodic_uniform(16);
        let field = mesh.cell_averages(|_| 2.5);
        let cfg = ReconstructionConfig::weno3(EpsilonPolicy::linear_h());
        let rhs = semidiscrete_rhs(
            &mesh,
            &field,
            &System::Advection { a: 1.0 },
            NumericalFlux::Upwind,
            &cfg,
            None,
        )
        .unwrap();
        for j in 0..16 {
            assert!(rhs.get(j, 0).abs() < 1e-14);
        }
    }

    #[test]
    fn euler_free_stream_has_zero_rhs() {
        let mesh = periodic_uniform(12);
        let sys = System::euler();
        // (rho, v, p) = (1.3, 0.7, 2.0)
        let e = 2.0 / 0.4 + 0.5 * 1.3 * 0.7 * 0.7;
        let field = mesh.cell_averages_vec(3, |_, out| {
            out[0] = 1.3;
            out[1] = 1.3 * 0.7;
            out[2] = e;
        });
        let cfg = ReconstructionConfig::cweno3(EpsilonPolicy::quadratic_h());
        let rhs = semidiscrete_rhs(&mesh, &field, &sys, NumericalFlux::Rusanov, &cfg, None).unwrap();
        for j in 0..12 {
            for c in 0..3 {
                assert!(rhs.get(j, c).abs() < 1e-12, "cell {j} comp {c}");
            }
        }
    }

    #[test]
    fn ssprk3_scalar_amplification() {
        // u' = lambda u for one step: factor 1 + z + z^2/2 + z^3/6
        let lambda = -0.7;
        let dt = 0.3;
        let u0 = Field::from_data(1, vec![1.0]);
        let got = ssprk3_step(&u0, dt, |u| {
            Ok(Field::from_data(1, vec![lambda * u.get(0, 0)]))
        })
        .unwrap();
        let z: f64 = lambda * dt;
        let expect = 1.0 + z + z * z / 2.0 + z * z * z / 6.0;
        assert!((got.get(0, 0) - expect).abs() < 1e-14);
    }

    #[test]
    fn compute_dt_basic_and_clipping() {
        let mesh = periodic_uniform(100);
        let field = mesh.cell_averages(|_| 1.0);
        let sys = System::Advection { a: 1.0 };
        let dt = compute_dt(&mesh, &field, &sys, 0.45, 1.0, 0.0, 10.0);
        assert!((dt - 0.45 * 0.01).abs() < 1e-15);
        // Burgers with max|u| = 2, min h = 0.01, cfl 0.4 -> 0.002
        let field = mesh.cell_averages(|x| if x < 0.5 { 2.0 } else { -1.0 });
        let dt = compute_dt(&mesh, &field, &System::Burgers, 0.4, 1.0, 0.0, 10.0);
        assert!((dt - 0.002).abs() < 1e-12);
        // clip to land on the target
        let dt = compute_dt(&mesh, &field, &System::Burgers, 0.4, 1.0, 9.9993, 10.0);
        assert!((dt - 0.0007).abs() < 1e-12);
    }

    #[test]
    fn zero_end_time_returns_initial() {
        let mesh = periodic_uniform(8);
        let field = mesh.cell_averages(|x| x);
        let cfg = ReconstructionConfig::weno3(EpsilonPolicy::linear_h());
        let out = integrate(
            &mesh,
            field.clone(),
            &System::Advection { a: 1.0 },
            NumericalFlux::Upwind,
            &cfg,
            &CflConfig::new(0.45, 0.0),
            None,
            None,
        )
        .unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.field, field);
    }

    #[test]
    fn periodic_transport_returns_close_to_initial() {
        let mesh = Mesh1D::generate(
            &GridSpec::Random { n: 80, seed: 5 },
            (0.0, 1.0),
            BoundaryKind::Periodic,
        )
        .unwrap();
        let u0 = |x: f64| (2.0 * std::f64::consts::PI * x).sin();
        let field = mesh.cell_averages(u0);
        let cfg = ReconstructionConfig::cweno3(EpsilonPolicy::linear_h());
        let out = integrate(
            &mesh,
            field.clone(),
            &System::Advection { a: 1.0 },
            NumericalFlux::Upwind,
            &cfg,
            &CflConfig::new(0.45, 1.0),
            None,
            None,
        )
        .unwrap();
        let mut err = 0.0;
        for j in 0..mesh.n_cells() {
            err += mesh.width(j) * (out.field.get(j, 0) - field.get(j, 0)).abs();
        }
        assert!(err < 1e-3, "transport error {err}");
    }

    #[test]
    fn conservation_on_periodic_burgers() {
        let mesh = periodic_uniform(64);
        let field = mesh.cell_averages(|x| (2.0 * std::f64::consts::PI * x).sin() + 0.3);
        let before = field.totals(mesh.widths())[0];
        let cfg = ReconstructionConfig::cweno3(EpsilonPolicy::linear_h());
        let out = integrate(
            &mesh,
            field,
            &System::Burgers,
            NumericalFlux::Rusanov,
            &cfg,
            &CflConfig::new(0.45, 0.5),
            None,
            None,
        )
        .unwrap();
        let after = out.field.totals(mesh.widths())[0];
        assert!((before - after).abs() < 1e-12 * before.abs().max(1.0));
    }

    #[test]
    fn reflective_wall_keeps_still_water_still() {
        // scalar sanity check of the mirror ghosts: an even profile about
        // the wall stays symmetric under Burgers
        let mesh = Mesh1D::generate(
            &GridSpec::Uniform { n: 32 },
            (0.0, 1.0),
            BoundaryKind::ReflectiveWall,
        )
        .unwrap();
        let field = mesh.cell_averages(|_| 0.0);
        let cfg = ReconstructionConfig::weno3(EpsilonPolicy::linear_h());
        let rhs = semidiscrete_rhs(
            &mesh,
            &field,
            &System::Burgers,
            NumericalFlux::Rusanov,
            &cfg,
            None,
        )
        .unwrap();
        for j in 0..32 {
            assert!(rhs.get(j, 0).abs() < 1e-14);
        }
    }

    #[test]
    fn monotone_transport_does_not_increase_variation() {
        // steep decreasing profile advected at CFL 0.45: the open-view
        // total variation must not grow beyond roundoff
        let mesh = Mesh1D::generate(
            &GridSpec::Random { n: 128, seed: 4 },
            (0.0, 1.0),
            BoundaryKind::Outflow,
        )
        .unwrap();
        let field = mesh.cell_averages(|x| -((x - 0.4) / 0.03).tanh());
        let open_tv = |data: &[f64]| -> f64 {
            data.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
        };
        let before = open_tv(field.data());
        for kind in [ReconKind::Weno3, ReconKind::Cweno3] {
            for policy in [
                EpsilonPolicy::constant(1e-6),
                EpsilonPolicy::linear_h(),
                EpsilonPolicy::quadratic_h(),
            ] {
                let mut cfg = ReconstructionConfig::weno3(policy);
                cfg.kind = kind;
                let run = integrate(
                    &mesh,
                    field.clone(),
                    &System::Advection { a: 1.0 },
                    NumericalFlux::Upwind,
                    &cfg,
                    &CflConfig::new(0.45, 0.2),
                    None,
                    None,
                )
                .unwrap();
                let after = open_tv(run.field.data());
                assert!(
                    after <= before + 1e-12,
                    "{kind:?} {policy:?}: TV {before} -> {after}"
                );
            }
        }
    }

    #[test]
    fn max_steps_guard_fires() {
        let mesh = periodic_uniform(8);
        let field = mesh.cell_averages(|_| 1.0);
        let cfg = ReconstructionConfig::weno3(EpsilonPolicy::linear_h());
        let mut cflcfg = CflConfig::new(0.45, 1.0);
        cflcfg.max_steps = 2;
        let err = integrate(
            &mesh,
            field,
            &System::Advection { a: 1.0 },
            NumericalFlux::Upwind,
            &cfg,
            &cflcfg,
            None,
            None,
        );
        assert!(err.is_err());
    }
}
