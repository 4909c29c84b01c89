//! Canonical initial data of the experiments.

use std::f64::consts::PI;

/// Smooth transport profile with non-trivial derivative structure.
pub fn transport_u0(x: f64) -> f64 {
    (2.0 * PI * x - (2.0 * PI * x).sin() / (2.0 * PI)).sin()
}

/// Slowly varying transport profile for the adaptive efficiency runs.
pub fn transport_u1(x: f64) -> f64 {
    (PI * x - (PI * x).sin() / PI).sin()
}

/// Oscillating packet near the left boundary.
pub fn transport_u2(x: f64) -> f64 {
    (PI * x).sin() + 0.25 * (15.0 * PI * x).sin() * (-20.0 * x * x).exp()
}

/// Square wave on [1/2, 1].
pub fn square_wave(x: f64) -> f64 {
    if (0.5..1.0).contains(&x) {
        1.0
    } else {
        0.0
    }
}

/// Burgers datum developing a standing shock in the middle of [0,1]
/// (the classical -sin(pi y) profile on [-1,1], mapped by y = 2x - 1).
pub fn burgers_u3(x: f64) -> f64 {
    -(PI * (2.0 * x - 1.0)).sin()
}

/// Burgers datum with moving shocks and small waves
/// (-sin(pi y) + 0.2 sin(5 pi y) mapped the same way).
pub fn burgers_u4(x: f64) -> f64 {
    let y = 2.0 * x - 1.0;
    -(PI * y).sin() + 0.2 * (5.0 * PI * y).sin()
}

pub const BURGERS_U3_T_END: f64 = 0.35;
pub const BURGERS_U4_T_END: f64 = 0.45;
pub const SHU_OSHER_T_END: f64 = 0.2;

/// Shock-acoustic interaction initial data in conserved variables
/// (gamma = 1.4): a Mach-3 state on [0, 0.25] running into a standing
/// density wave.
pub fn shu_osher(x: f64, out: &mut [f64]) {
    let gamma = 1.4;
    let (rho, v, p) = if x <= 0.25 {
        (3.857143, 2.629369, 10.333333)
    } else {
        (1.0 + 0.2 * (16.0 * PI * x).sin(), 0.0, 1.0)
    };
    out[0] = rho;
    out[1] = rho * v;
    out[2] = p / (gamma - 1.0) + 0.5 * rho * v * v;
}
