//! Conservation/balance-law systems and numerical flux functions.

use crate::error::{Error, Result};

/// Slack allowed on positivity constraints before a state is rejected.
const ADMISSIBILITY_TOL: f64 = -1e-12;

/// The systems used in the experiments. States are conserved variables:
/// advection/Burgers `[u]`, Euler `[rho, rho v, E]`, shallow water `[h, q]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum System {
    /// u_t + (a u)_x = 0 with a > 0.
    Advection { a: f64 },
    /// u_t + (u^2/2)_x = 0.
    Burgers,
    /// 1D Euler equations with ideal-gas law p = (gamma-1)(E - rho v^2/2).
    Euler { gamma: f64 },
    /// Saint-Venant system; the geometric source lives in `swbalance`.
    ShallowWater { g: f64 },
}

impl System {
    pub fn euler() -> Self {
        System::Euler { gamma: 1.4 }
    }

    pub fn shallow_water() -> Self {
        System::ShallowWater { g: 9.81 }
    }

    pub fn n_components(&self) -> usize {
        match self {
            System::Advection { .. } | System::Burgers => 1,
            System::Euler { .. } => 3,
            System::ShallowWater { .. } => 2,
        }
    }

    /// Components negated by a reflective-wall ghost cell.
    pub fn reflective_components(&self) -> &'static [usize] {
        match self {
            System::Advection { .. } | System::Burgers => &[],
            System::Euler { .. } => &[1],
            System::ShallowWater { .. } => &[1],
        }
    }

    /// Checks positivity constraints; `cell` only labels the error.
    pub fn check_admissible(&self, state: &[f64], cell: usize) -> Result<()> {
        let bad = |what: &str, v: f64| Error::Inadmissible {
            cell,
            detail: format!("{what} = {v:e}"),
        };
        match self {
            System::Advection { .. } | System::Burgers => Ok(()),
            System::Euler { gamma } => {
                let rho = state[0];
                if rho < ADMISSIBILITY_TOL {
                    return Err(bad("rho", rho));
                }
                let p = (gamma - 1.0) * (state[2] - 0.5 * state[1] * state[1] / rho.max(1e-300));
                if p < ADMISSIBILITY_TOL {
                    return Err(bad("p", p));
                }
                Ok(())
            }
            System::ShallowWater { .. } => {
                if state[0] < ADMISSIBILITY_TOL {
                    return Err(bad("h", state[0]));
                }
                Ok(())
            }
        }
    }

    /// Physical flux f(u), written into `out`.
    pub fn flux(&self, state: &[f64], out: &mut [f64]) {
        match self {
            System::Advection { a } => out[0] = a * state[0],
            System::Burgers => out[0] = 0.5 * state[0] * state[0],
            System::Euler { gamma } => {
                let (rho, mom, e) = (state[0], state[1], state[2]);
                let v = mom / rho;
                let p = (gamma - 1.0) * (e - 0.5 * mom * v);
                out[0] = mom;
                out[1] = mom * v + p;
                out[2] = v * (e + p);
            }
            System::ShallowWater { g } => {
                let (h, q) = (state[0], state[1]);
                let hp = h.max(0.0);
                let v = if hp > 0.0 { q / hp } else { 0.0 };
                out[0] = q;
                out[1] = q * v + 0.5 * g * hp * hp;
            }
        }
    }

    /// Largest characteristic speed of a single state.
    pub fn max_speed(&self, state: &[f64]) -> f64 {
        match self {
            System::Advection { a } => a.abs(),
            System::Burgers => state[0].abs(),
            System::Euler { gamma } => {
                let rho = state[0].max(1e-300);
                let v = state[1] / rho;
                let p = ((gamma - 1.0) * (state[2] - 0.5 * state[1] * v)).max(0.0);
                v.abs() + (gamma * p / rho).sqrt()
            }
            System::ShallowWater { g } => {
                let h = state[0].max(0.0);
                let v = if h > 1e-300 { state[1] / h } else { 0.0 };
                v.abs() + (g * h).sqrt()
            }
        }
    }

    /// Wave-speed bound over a pair of states (used by Rusanov).
    pub fn max_wave_speed(&self, left: &[f64], right: &[f64]) -> f64 {
        self.max_speed(left).max(self.max_speed(right))
    }

    /// Entropy pair (eta, psi), when the system provides one.
    pub fn entropy(&self, state: &[f64]) -> Option<f64> {
        match self {
            System::Advection { .. } | System::Burgers => Some(0.5 * state[0] * state[0]),
            System::Euler { gamma } => {
                let rho = state[0];
                if rho <= 0.0 {
                    return None;
                }
                let p = (gamma - 1.0) * (state[2] - 0.5 * state[1] * state[1] / rho);
                if p <= 0.0 {
                    return None;
                }
                Some(-rho * (p * rho.powf(-gamma)).ln() / (gamma - 1.0))
            }
            System::ShallowWater { .. } => None,
        }
    }

    pub fn entropy_flux(&self, state: &[f64]) -> Option<f64> {
        match self {
            System::Advection { a } => Some(a * 0.5 * state[0] * state[0]),
            System::Burgers => Some(state[0].powi(3) / 3.0),
            System::Euler { .. } => {
                let eta = self.entropy(state)?;
                Some(state[1] / state[0] * eta)
            }
            System::ShallowWater { .. } => None,
        }
    }

    pub fn has_entropy_pair(&self) -> bool {
        !matches!(self, System::ShallowWater { .. })
    }
}

/// Interface flux function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NumericalFlux {
    /// F = f(u_left); only valid for positive transport speeds.
    Upwind,
    /// Local Lax-Friedrichs.
    Rusanov,
}

impl NumericalFlux {
    pub fn evaluate(&self, system: &System, left: &[f64], right: &[f64], out: &mut [f64]) {
        match self {
            NumericalFlux::Upwind => system.flux(left, out),
            NumericalFlux::Rusanov => {
                let m = out.len();
                let mut fl = [0.0; 3];
                let mut fr = [0.0; 3];
                system.flux(left, &mut fl[..m]);
                system.flux(right, &mut fr[..m]);
                let alpha = system.max_wave_speed(left, right);
                for c in 0..m {
                    out[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * alpha * (right[c] - left[c]);
                }
            }
        }
    }
}
