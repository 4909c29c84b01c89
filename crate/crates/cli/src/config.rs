//! Per-experiment configuration, loadable from JSON with CLI overrides.

use fvlab::reconstruction::{EpsilonPolicy, ReconKind};
use serde::{Deserialize, Serialize};

fn default_levels() -> usize {
    10
}
fn default_h0() -> f64 {
    5e-2
}
fn default_cfl() -> f64 {
    0.45
}
fn default_seed() -> u64 {
    2024
}
fn default_resolutions() -> Vec<usize> {
    vec![20, 40, 80, 160, 320, 640, 1280, 2560]
}
fn default_pond_resolutions() -> Vec<usize> {
    vec![100, 200, 400, 800]
}
fn default_spectrum_cells() -> usize {
    65
}
fn default_reference_n() -> usize {
    4096
}
fn default_coarse() -> Vec<usize> {
    vec![16, 32, 64, 128]
}
fn default_quadtree_base() -> usize {
    32
}
fn default_quadtree_sweeps() -> u32 {
    3
}
fn default_quadtree_threshold() -> f64 {
    fvlab::quadtree2d::WAVE_2D_THRESHOLD
}
fn default_quadtree_max_k() -> u32 {
    4
}
fn default_true() -> bool {
    true
}

/// Reconstruction kind by name ("weno3" / "cweno3").
pub fn parse_kind(s: &str) -> Result<ReconKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "weno3" => Ok(ReconKind::Weno3),
        "cweno3" => Ok(ReconKind::Cweno3),
        other => Err(format!("unknown reconstruction kind '{other}'")),
    }
}

/// Epsilon policy by name: "h", "h2", or a number for a constant policy.
pub fn parse_policy(s: &str) -> Result<EpsilonPolicy, String> {
    match s.to_ascii_lowercase().as_str() {
        "h" => Ok(EpsilonPolicy::linear_h()),
        "h2" | "h^2" => Ok(EpsilonPolicy::quadratic_h()),
        other => other
            .parse::<f64>()
            .map(EpsilonPolicy::constant)
            .map_err(|_| format!("unknown epsilon policy '{other}'")),
    }
}

/// The standard four policies of the reconstruction studies.
pub fn table_policies() -> Vec<(String, EpsilonPolicy)> {
    vec![
        ("eps=1e-30".into(), EpsilonPolicy::constant(1e-30)),
        ("eps=1e-6".into(), EpsilonPolicy::constant(1e-6)),
        ("eps=h".into(), EpsilonPolicy::linear_h()),
        ("eps=h^2".into(), EpsilonPolicy::quadratic_h()),
    ]
}

/// The three policies compared in the time-dependent studies.
pub fn run_policies() -> Vec<(String, EpsilonPolicy)> {
    vec![
        ("eps=1e-6".into(), EpsilonPolicy::constant(1e-6)),
        ("eps=h".into(), EpsilonPolicy::linear_h()),
        ("eps=h^2".into(), EpsilonPolicy::quadratic_h()),
    ]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconStudyConfig {
    pub kind: String,
    /// "exp" (e^x) or "extremum" (cos(2 pi x) + x^3).
    pub function: String,
    pub h0: f64,
    pub levels: usize,
}

impl Default for ReconStudyConfig {
    fn default() -> Self {
        ReconStudyConfig {
            kind: "weno3".into(),
            function: "exp".into(),
            h0: default_h0(),
            levels: default_levels(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DerivativeTransportConfig {
    pub kind: String,
    pub epsilon: String,
    pub resolutions: Vec<usize>,
    pub seed: u64,
    pub cfl: f64,
}

impl Default for DerivativeTransportConfig {
    fn default() -> Self {
        DerivativeTransportConfig {
            kind: "weno3".into(),
            epsilon: "h2".into(),
            resolutions: default_resolutions(),
            seed: default_seed(),
            cfl: default_cfl(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransportDiscConfig {
    pub kind: String,
    pub resolutions: Vec<usize>,
    pub seed: u64,
    pub cfl: f64,
}

impl Default for TransportDiscConfig {
    fn default() -> Self {
        TransportDiscConfig {
            kind: "cweno3".into(),
            resolutions: vec![50, 100, 200, 400],
            seed: default_seed(),
            cfl: default_cfl(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub cells: usize,
    pub cfl: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            cells: default_spectrum_cells(),
            cfl: default_cfl(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaptiveConfig {
    /// "u1" / "u2" for transport, "u3" / "u4" for Burgers.
    pub datum: String,
    pub coarse: Vec<usize>,
    pub cfl: f64,
    pub reference_n: usize,
    /// Also run uniform meshes of comparable effort.
    pub with_uniform: bool,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            datum: "u3".into(),
            coarse: default_coarse(),
            cfl: default_cfl(),
            reference_n: default_reference_n(),
            with_uniform: default_true(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShuOsherConfig {
    pub coarse: Vec<usize>,
    pub levels: Vec<u32>,
    pub cfl: f64,
    pub reference_n: usize,
}

impl Default for ShuOsherConfig {
    fn default() -> Self {
        ShuOsherConfig {
            coarse: vec![32, 64, 128],
            levels: vec![6, 8, 10],
            cfl: default_cfl(),
            reference_n: default_reference_n(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PondConfig {
    pub resolutions: Vec<usize>,
    pub cfl: f64,
    pub gravity: f64,
}

impl Default for PondConfig {
    fn default() -> Self {
        PondConfig {
            resolutions: default_pond_resolutions(),
            cfl: default_cfl(),
            gravity: 9.81,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Quadtree2dConfig {
    pub base: usize,
    pub sweeps: u32,
    pub threshold: f64,
    pub max_k: u32,
}

impl Default for Quadtree2dConfig {
    fn default() -> Self {
        Quadtree2dConfig {
            base: default_quadtree_base(),
            sweeps: default_quadtree_sweeps(),
            threshold: default_quadtree_threshold(),
            max_k: default_quadtree_max_k(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradientConfig {
    pub kind: String,
    pub h0: f64,
    pub levels: usize,
}

impl Default for GradientConfig {
    fn default() -> Self {
        GradientConfig {
            kind: "weno3".into(),
            h0: default_h0(),
            levels: default_levels(),
        }
    }
}
