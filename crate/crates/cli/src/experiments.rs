//! Experiment drivers: each one runs a study and writes CSV reports.

use crate::config::*;
use fvlab::adaptivity::{integrate_adaptive, IndicatorConfig};
use fvlab::analysis::{
    self, derivative_error_for, error_norms, reference_error_norms, spectrum_matrix,
    total_variation, ConvergenceTable, PiecewiseConstant,
};
use fvlab::mesh1d::{BoundaryKind, GridSpec, Mesh1D};
use fvlab::problems;
use fvlab::quadtree2d;
use fvlab::reconstruction::{EpsilonPolicy, ReconKind, ReconstructionConfig};
use fvlab::swbalance::{pond, CenterValueStrategy, SourceQuadrature, SwScheme};
use fvlab::systems::{NumericalFlux, System};
use fvlab::timeintegration::{integrate, CflConfig};
use fvlab::{Error, Result};
use std::fmt::Write as _;

pub struct Report {
    pub files: Vec<(String, String)>,
}

impl Report {
    fn new() -> Self {
        Report { files: Vec::new() }
    }

    fn add(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }
}

fn study_function(name: &str) -> Result<fn(f64) -> f64> {
    fn f_exp(x: f64) -> f64 {
        x.exp()
    }
    fn f_extremum(x: f64) -> f64 {
        (2.0 * std::f64::consts::PI * x).cos() + x.powi(3)
    }
    match name {
        "exp" => Ok(f_exp),
        "extremum" => Ok(f_extremum),
        other => Err(Error::Config(format!("unknown study function '{other}'"))),
    }
}

fn kind_of(name: &str) -> Result<ReconKind> {
    parse_kind(name).map_err(Error::Config)
}

/// Merge per-policy convergence tables into one CSV with the layout of the
/// printed tables: resolution, then error/rate pairs per policy.
fn tables_to_csv(label: &str, tables: &[(String, ConvergenceTable)]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{label}");
    for (name, _) in tables {
        let _ = write!(out, ",{name} error,{name} rate");
    }
    out.push('\n');
    let rows = tables[0].1.rows.len();
    for r in 0..rows {
        let _ = write!(out, "{}", tables[0].1.rows[r].label);
        for (_, t) in tables {
            match t.rows[r].rate {
                Some(rate) => {
                    let _ = write!(out, ",{:.6e},{rate:.2}", t.rows[r].error);
                }
                None => {
                    let _ = write!(out, ",{:.6e},", t.rows[r].error);
                }
            }
        }
        out.push('\n');
    }
    out
}

pub fn recon_convergence(cfg: &ReconStudyConfig) -> Result<Report> {
    let kind = kind_of(&cfg.kind)?;
    let u = study_function(&cfg.function)?;
    let tables: Vec<(String, ConvergenceTable)> = table_policies()
        .into_iter()
        .map(|(name, pol)| {
            (
                name,
                analysis::reconstruction_error_study(u, kind, pol, cfg.h0, cfg.levels),
            )
        })
        .collect();
    let mut report = Report::new();
    report.add(
        &format!("recon_{}_{}.csv", cfg.kind, cfg.function),
        tables_to_csv("h", &tables),
    );
    Ok(report)
}

pub fn weight_convergence(cfg: &ReconStudyConfig) -> Result<Report> {
    let kind = kind_of(&cfg.kind)?;
    let u = study_function(&cfg.function)?;
    let tables: Vec<(String, ConvergenceTable)> = table_policies()
        .into_iter()
        .map(|(name, pol)| {
            (
                name,
                analysis::weight_deviation_study(u, kind, pol, cfg.h0, cfg.levels),
            )
        })
        .collect();
    let mut report = Report::new();
    report.add(
        &format!("weights_{}_{}.csv", cfg.kind, cfg.function),
        tables_to_csv("h", &tables),
    );
    Ok(report)
}

pub fn gradient_diagnostic(cfg: &GradientConfig) -> Result<Report> {
    let kind = kind_of(&cfg.kind)?;
    let u = |x: f64| x.powi(3) + x.cos();
    let tables: Vec<(String, ConvergenceTable)> = table_policies()
        .into_iter()
        .map(|(name, pol)| {
            (
                name,
                analysis::gradient_distance_study(u, kind, pol, cfg.h0, cfg.levels),
            )
        })
        .collect();
    let mut report = Report::new();
    report.add(
        &format!("gradient_{}.csv", cfg.kind),
        tables_to_csv("h", &tables),
    );
    Ok(report)
}

fn family_mesh(family: &str, n: usize, seed: u64) -> Result<Mesh1D> {
    let spec = match family {
        "uniform" => GridSpec::Uniform { n },
        "quasi-regular" => GridSpec::QuasiRegular { n },
        "random" => GridSpec::Random { n, seed },
        "pattern" => GridSpec::Pattern {
            base: 2.0 / n as f64,
            factors: vec![1.0, 0.5, 0.25, 0.25],
        },
        other => return Err(Error::Config(format!("unknown grid family '{other}'"))),
    };
    Mesh1D::generate(&spec, (0.0, 1.0), BoundaryKind::Periodic)
}

pub const GRID_FAMILIES: [&str; 4] = ["uniform", "quasi-regular", "random", "pattern"];

pub fn derivative_transport(cfg: &DerivativeTransportConfig) -> Result<Report> {
    let mut config = ReconstructionConfig::weno3(parse_policy(&cfg.epsilon).map_err(Error::Config)?);
    config.kind = kind_of(&cfg.kind)?;
    let mut report = Report::new();
    for family in GRID_FAMILIES {
        let mut deriv = Vec::new();
        let mut transport = Vec::new();
        for &n in &cfg.resolutions {
            let mesh = family_mesh(family, n, cfg.seed)?;
            deriv.push(derivative_error_for(&mesh, &config, problems::transport_u0)?);
            let out = integrate(
                &mesh,
                mesh.cell_averages(problems::transport_u0),
                &System::Advection { a: 1.0 },
                NumericalFlux::Upwind,
                &config,
                &CflConfig::new(cfg.cfl, 1.0),
                None,
                None,
            )?;
            let (one, _) = error_norms(&out.field, &mesh, problems::transport_u0);
            transport.push(one);
        }
        let labels: Vec<String> = cfg.resolutions.iter().map(|n| n.to_string()).collect();
        let dt_table = ConvergenceTable::from_errors("derivative", &labels, &deriv, 2.0);
        let tr_table = ConvergenceTable::from_errors("transport", &labels, &transport, 2.0);
        report.add(
            &format!("derivative_transport_{}_{family}.csv", cfg.kind),
            tables_to_csv(
                "N",
                &[
                    ("derivative max-norm".into(), dt_table),
                    ("transport 1-norm".into(), tr_table),
                ],
            ),
        );
    }
    Ok(report)
}

pub fn transport_disc(cfg: &TransportDiscConfig) -> Result<Report> {
    let kind = kind_of(&cfg.kind)?;
    let mut report = Report::new();
    let mut out = String::from("epsilon,N,one_norm_error,total_variation\n");
    let finest = cfg.resolutions.iter().copied().max().unwrap_or(0);
    for (name, pol) in run_policies() {
        for &n in &cfg.resolutions {
            let mut config = ReconstructionConfig::weno3(pol);
            config.kind = kind;
            let mesh = family_mesh("random", n, cfg.seed)?;
            let run = integrate(
                &mesh,
                mesh.cell_averages(problems::square_wave),
                &System::Advection { a: 1.0 },
                NumericalFlux::Upwind,
                &config,
                &CflConfig::new(cfg.cfl, 1.0),
                None,
                None,
            )?;
            let (one, _) = error_norms(&run.field, &mesh, problems::square_wave);
            let data: Vec<f64> = (0..mesh.n_cells()).map(|j| run.field.get(j, 0)).collect();
            let tv = total_variation(&data);
            let _ = writeln!(out, "{name},{n},{one:.6e},{tv:.6e}");
            if n == finest {
                report.add(
                    &format!("profile_{}_{}.csv", cfg.kind, name.replace('=', "_")),
                    fvlab::timeintegration::state_csv(&mesh, &run.field),
                );
            }
        }
    }
    report.add(&format!("transport_disc_{}.csv", cfg.kind), out);
    // the mesh the runs used, for reproducibility
    report.add(
        "grid_random.csv",
        family_mesh("random", finest, cfg.seed)?.to_csv(),
    );
    Ok(report)
}

pub fn spectrum(cfg: &SpectrumConfig) -> Result<Report> {
    let mut report = Report::new();
    let mut summary = String::from("kind,epsilon,max_stable_cfl,margin_at_cfl\n");
    for kind in [ReconKind::Weno3, ReconKind::Cweno3] {
        for (name, pol) in table_policies() {
            let mut config = ReconstructionConfig::weno3(pol);
            config.kind = kind;
            let spec = spectrum_matrix(&config, cfg.cells, false)?;
            let mut eig_csv = String::from("re,im,scaled_re,scaled_im\n");
            for ev in &spec.eigenvalues {
                let s = ev * (cfg.cfl * spec.h);
                let _ = writeln!(eig_csv, "{:.12e},{:.12e},{:.12e},{:.12e}", ev.re, ev.im, s.re, s.im);
            }
            report.add(
                &format!("spectrum_{}_{}.csv", kind.label().to_lowercase(), name.replace('=', "_")),
                eig_csv,
            );
            let (_, margin) = analysis::stability_check(&spec.scaled_eigenvalues(cfg.cfl), 1.0);
            let _ = writeln!(
                summary,
                "{},{name},{:.6},{margin:.3e}",
                kind.label(),
                spec.max_stable_cfl(3.0)
            );
        }
    }
    report.add("spectrum_summary.csv", summary);
    Ok(report)
}

struct AdaptiveProblem {
    system: System,
    flux: NumericalFlux,
    t_end: f64,
    m: usize,
    boundary: BoundaryKind,
    init: fn(f64, &mut [f64]),
    max_level_for: fn(usize) -> u32,
    exact: Option<fn(f64) -> f64>,
    refine_factor: f64,
}

fn adaptive_problem(datum: &str) -> Result<AdaptiveProblem> {
    fn init_u1(x: f64, out: &mut [f64]) {
        out[0] = problems::transport_u1(x);
    }
    fn init_u2(x: f64, out: &mut [f64]) {
        out[0] = problems::transport_u2(x);
    }
    fn init_u3(x: f64, out: &mut [f64]) {
        out[0] = problems::burgers_u3(x);
    }
    fn init_u4(x: f64, out: &mut [f64]) {
        out[0] = problems::burgers_u4(x);
    }
    let p = match datum {
        "u1" => AdaptiveProblem {
            system: System::Advection { a: 1.0 },
            flux: NumericalFlux::Upwind,
            t_end: 1.0,
            m: 1,
            boundary: BoundaryKind::Periodic,
            init: init_u1,
            max_level_for: |_| 2,
            exact: Some(problems::transport_u1),
            refine_factor: 1.0,
        },
        "u2" => AdaptiveProblem {
            system: System::Advection { a: 1.0 },
            flux: NumericalFlux::Upwind,
            t_end: 1.0,
            m: 1,
            boundary: BoundaryKind::Periodic,
            init: init_u2,
            max_level_for: |_| 3,
            exact: Some(problems::transport_u2),
            refine_factor: 1.0,
        },
        "u3" => AdaptiveProblem {
            system: System::Burgers,
            flux: NumericalFlux::Rusanov,
            t_end: problems::BURGERS_U3_T_END,
            m: 1,
            boundary: BoundaryKind::Periodic,
            init: init_u3,
            max_level_for: |k| 2 + 2 * k as u32,
            exact: None,
            refine_factor: 3.0,
        },
        "u4" => AdaptiveProblem {
            system: System::Burgers,
            flux: NumericalFlux::Rusanov,
            t_end: problems::BURGERS_U4_T_END,
            m: 1,
            boundary: BoundaryKind::Periodic,
            init: init_u4,
            max_level_for: |k| 3 + 2 * k as u32,
            exact: None,
            refine_factor: 1.0,
        },
        other => return Err(Error::Config(format!("unknown adaptive datum '{other}'"))),
    };
    Ok(p)
}

/// Error of a final field: against the exact profile (transport, where the
/// final time is a full period) or against a fine-reference run.
fn final_error(
    field: &fvlab::Field,
    mesh: &Mesh1D,
    exact: Option<fn(f64) -> f64>,
    reference: Option<&PiecewiseConstant>,
) -> f64 {
    if let Some(u) = exact {
        error_norms(field, mesh, u).0
    } else {
        reference_error_norms(field, mesh, 0, reference.expect("reference run")).0
    }
}

pub fn adaptive_efficiency(cfg: &AdaptiveConfig) -> Result<Report> {
    let problem = adaptive_problem(&cfg.datum)?;
    // reference run for problems without closed-form solutions
    let reference = if problem.exact.is_none() {
        let mesh = Mesh1D::generate(
            &GridSpec::Uniform { n: cfg.reference_n },
            (0.0, 1.0),
            problem.boundary,
        )?;
        let config = ReconstructionConfig::cweno3(EpsilonPolicy::linear_h());
        let run = integrate(
            &mesh,
            mesh.cell_averages_vec(problem.m, problem.init),
            &problem.system,
            problem.flux,
            &config,
            &CflConfig::new(cfg.cfl, problem.t_end),
            None,
            None,
        )?;
        Some(PiecewiseConstant::new(&mesh, &run.field, 0))
    } else {
        None
    };

    let mut adaptive_csv = String::from("epsilon,coarse_n,max_level,avg_cells,one_norm_error\n");
    let mut log_csv = String::from("epsilon,coarse_n,step,time,active_cells,min_level,max_level\n");
    for (name, pol) in run_policies() {
        let config = ReconstructionConfig::cweno3(pol);
        for (k, &coarse_n) in cfg.coarse.iter().enumerate() {
            let coarse =
                Mesh1D::generate(&GridSpec::Uniform { n: coarse_n }, (0.0, 1.0), problem.boundary)?;
            let out = integrate_adaptive(
                coarse,
                &problem.init,
                problem.m,
                &problem.system,
                problem.flux,
                &config,
                &CflConfig::new(cfg.cfl, problem.t_end),
                &{
                    let mut icfg = IndicatorConfig::new((problem.max_level_for)(k));
                    icfg.refine_factor = problem.refine_factor;
                    icfg
                },
            )?;
            let err = final_error(&out.field, &out.mesh, problem.exact, reference.as_ref());
            let _ = writeln!(
                adaptive_csv,
                "{name},{coarse_n},{},{:.2},{err:.6e}",
                (problem.max_level_for)(k),
                out.average_cells
            );
            for entry in out.log.iter().step_by(16) {
                let _ = writeln!(
                    log_csv,
                    "{name},{coarse_n},{},{:.6},{},{},{}",
                    entry.step, entry.time, entry.active_cells, entry.min_level, entry.max_level
                );
            }
        }
    }

    let mut report = Report::new();
    report.add(
        &format!("efficiency_adaptive_{}.csv", cfg.datum),
        adaptive_csv,
    );
    report.add(&format!("adapt_log_{}.csv", cfg.datum), log_csv);

    if cfg.with_uniform {
        let mut uniform_csv = String::from("epsilon,N,one_norm_error\n");
        for (name, pol) in run_policies() {
            let config = ReconstructionConfig::cweno3(pol);
            for &coarse_n in &cfg.coarse {
                for factor in [1usize, 2, 4] {
                    let n = coarse_n * factor;
                    let mesh = Mesh1D::generate(
                        &GridSpec::Uniform { n },
                        (0.0, 1.0),
                        problem.boundary,
                    )?;
                    let run = integrate(
                        &mesh,
                        mesh.cell_averages_vec(problem.m, problem.init),
                        &problem.system,
                        problem.flux,
                        &config,
                        &CflConfig::new(cfg.cfl, problem.t_end),
                        None,
                        None,
                    )?;
                    let err = final_error(&run.field, &mesh, problem.exact, reference.as_ref());
                    let _ = writeln!(uniform_csv, "{name},{n},{err:.6e}");
                }
            }
        }
        report.add(&format!("efficiency_uniform_{}.csv", cfg.datum), uniform_csv);
    }
    Ok(report)
}

pub fn shu_osher(cfg: &ShuOsherConfig) -> Result<Report> {
    if cfg.coarse.len() != cfg.levels.len() {
        return Err(Error::Config(
            "shu-osher needs one max-level entry per coarse resolution".into(),
        ));
    }
    let system = System::euler();
    let ref_mesh = Mesh1D::generate(
        &GridSpec::Uniform { n: cfg.reference_n },
        (0.0, 1.0),
        BoundaryKind::Outflow,
    )?;
    let ref_cfg = ReconstructionConfig::cweno3(EpsilonPolicy::linear_h());
    let ref_run = integrate(
        &ref_mesh,
        ref_mesh.cell_averages_vec(3, problems::shu_osher),
        &system,
        NumericalFlux::Rusanov,
        &ref_cfg,
        &CflConfig::new(cfg.cfl, problems::SHU_OSHER_T_END),
        None,
        None,
    )?;
    let reference = PiecewiseConstant::new(&ref_mesh, &ref_run.field, 0);

    let mut report = Report::new();
    let mut csv = String::from("epsilon,coarse_n,max_level,avg_cells,density_one_norm_error\n");
    let mut best: Option<(f64, Mesh1D, fvlab::Field)> = None;
    for (name, pol) in run_policies() {
        let config = ReconstructionConfig::cweno3(pol);
        for (coarse_n, max_level) in cfg.coarse.iter().zip(cfg.levels.iter()) {
            let coarse = Mesh1D::generate(
                &GridSpec::Uniform { n: *coarse_n },
                (0.0, 1.0),
                BoundaryKind::Outflow,
            )?;
            let out = integrate_adaptive(
                coarse,
                &problems::shu_osher,
                3,
                &system,
                NumericalFlux::Rusanov,
                &config,
                &CflConfig::new(cfg.cfl, problems::SHU_OSHER_T_END),
                &{
                    let mut icfg = IndicatorConfig::new(*max_level);
                    icfg.refine_factor = 1.0;
                    icfg
                },
            )?;
            let (err, _) = reference_error_norms(&out.field, &out.mesh, 0, &reference);
            let _ = writeln!(
                csv,
                "{name},{coarse_n},{max_level},{:.2},{err:.6e}",
                out.average_cells
            );
            if name == "eps=h" && best.as_ref().map(|(e, _, _)| err < *e).unwrap_or(true) {
                best = Some((err, out.mesh, out.field));
            }
        }
    }
    report.add("shu_osher_efficiency.csv", csv);
    if let Some((_, mesh, field)) = best {
        let mut profile = String::from("x,h,rho,momentum,energy\n");
        for j in 0..mesh.n_cells() {
            let _ = writeln!(
                profile,
                "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
                mesh.center(j),
                mesh.width(j),
                field.get(j, 0),
                field.get(j, 1),
                field.get(j, 2)
            );
        }
        report.add("shu_osher_profile.csv", profile);
    }
    Ok(report)
}

pub fn pond_experiment(cfg: &PondConfig) -> Result<Report> {
    let mut csv = String::from("variant,N,conservation_error\n");
    for (strategy, label) in [
        (CenterValueStrategy::Cweno3, "CWENO3"),
        (CenterValueStrategy::Weno3P2, "WENO3+P2"),
        (CenterValueStrategy::Weno3Avg, "WENO3+avg"),
    ] {
        let mut recon = ReconstructionConfig::cweno3(EpsilonPolicy::linear_h());
        recon.kind = strategy.recon_kind();
        let scheme = SwScheme::new(recon, strategy, SourceQuadrature::Richardson)?
            .with_gravity(cfg.gravity)
            .with_dry_scale(1.4)
            .with_desingularization(true);
        for &n in &cfg.resolutions {
            let err = pond::conservation_error(&scheme, n, cfg.cfl)?;
            let _ = writeln!(csv, "{label},{n},{err:.6e}");
        }
    }
    let mut report = Report::new();
    report.add("pond_conservation.csv", csv);
    Ok(report)
}

pub fn quadtree(cfg: &Quadtree2dConfig) -> Result<Report> {
    let g0 = quadtree2d::build_adapted_grid(
        quadtree2d::wave_2d,
        cfg.base,
        cfg.threshold,
        cfg.sweeps,
    );
    let policies = [
        EpsilonPolicy::constant(1e-6),
        EpsilonPolicy::quadratic_h(),
        EpsilonPolicy::linear_h(),
    ];
    let table =
        quadtree2d::reconstruction_error_table(quadtree2d::wave_2d, &g0, cfg.max_k, &policies, 2)?;
    let mut report = Report::new();
    report.add("quadtree_errors.csv", table.to_csv(&policies));
    report.add("quadtree_g0_mesh.csv", g0.to_csv(&g0.averages(quadtree2d::wave_2d)));
    Ok(report)
}
