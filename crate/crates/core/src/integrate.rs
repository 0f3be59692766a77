//! Adaptive Dormand–Prince 5(4) integration with invariant monitoring.
//!
//! Every accepted step is recorded together with `H`, `C` and the pointwise
//! dissipation residual `|x·ẋ + ε|x × m|²|`. Backward runs integrate the
//! negated field in a forward pseudo-time and store physical (negative) times.

use serde::{Deserialize, Serialize};

use crate::dynamics::VectorField;
use crate::error::{Error, IntegrationError, Result};
use crate::model::{casimir, hamiltonian, m_vector, State};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub t_end: f64,
    pub direction: Direction,
    pub max_steps: u64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: 1.0,
            t_end: 100.0,
            direction: Direction::Forward,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorSettings {
    pub fn with_horizon(t_end: f64) -> Self {
        Self {
            t_end,
            ..Self::default()
        }
    }

    pub fn backward(mut self) -> Self {
        self.direction = Direction::Backward;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSettings(msg));
        if !(1e-13..=1e-2).contains(&self.rtol) {
            return bad(format!("rtol = {} outside [1e-13, 1e-2]", self.rtol));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return bad(format!("atol = {} must be positive", self.atol));
        }
        if !(self.h_init > 0.0 && self.h_init <= self.h_max && self.h_max.is_finite()) {
            return bad(format!(
                "requires 0 < h_init <= h_max (got {}, {})",
                self.h_init, self.h_max
            ));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if self.max_steps < 1 {
            return bad("max_steps must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
}

/// Samples at every accepted step. All series have equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<State>,
    h_series: Vec<f64>,
    c_series: Vec<f64>,
    diss_residual: Vec<f64>,
    step_stats: StepStats,
    epsilon: f64,
    direction: Direction,
}

impl Trajectory {
    fn start(field: &VectorField, x0: State, direction: Direction) -> Self {
        let mut traj = Self {
            times: Vec::new(),
            states: Vec::new(),
            h_series: Vec::new(),
            c_series: Vec::new(),
            diss_residual: Vec::new(),
            step_stats: StepStats::default(),
            epsilon: field.effective_epsilon(),
            direction,
        };
        traj.push(field, 0.0, x0);
        traj
    }

    fn push(&mut self, field: &VectorField, t: f64, x: State) {
        let cfg = field.config();
        self.times.push(t);
        self.states.push(x);
        self.h_series.push(hamiltonian(cfg, &x));
        self.c_series.push(casimir(&x));
        self.diss_residual.push(dissipation_residual(field, &x));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn h_series(&self) -> &[f64] {
        &self.h_series
    }

    pub fn c_series(&self) -> &[f64] {
        &self.c_series
    }

    pub fn diss_residual(&self) -> &[f64] {
        &self.diss_residual
    }

    pub fn step_stats(&self) -> StepStats {
        self.step_stats
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn initial_state(&self) -> State {
        self.states[0]
    }

    pub fn final_state(&self) -> State {
        *self.states.last().expect("trajectory holds at least x0")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds at least x0")
    }

    /// `max_t |H(x(t)) − H(x0)|`
    pub fn max_energy_drift(&self) -> f64 {
        let h0 = self.h_series[0];
        self.h_series
            .iter()
            .map(|h| (h - h0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        self.states.iter().map(State::norm).fold(0.0, f64::max)
    }
}

/// `|x·ẋ + ε|x × m|²|` with `ẋ` taken from `field`.
pub fn dissipation_residual(field: &VectorField, x: &State) -> f64 {
    let m = m_vector(field.config(), x);
    let xm = vec3::cross(x.0, m);
    let xdot = field.eval(x);
    (vec3::dot(x.0, xdot) + field.effective_epsilon() * vec3::dot(xm, xm)).abs()
}

// Dormand–Prince tableau. The fields are autonomous, so the stage times
// (1/5, 3/10, 4/5, 8/9, 1) never enter.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th-order minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct StepOutput {
    x_new: Vec3,
    error: Vec3,
    /// Field at `x_new`, reused as the first stage of the next step.
    k_last: Vec3,
}

fn combine(x: Vec3, h: f64, terms: &[(f64, Vec3)]) -> Vec3 {
    let mut out = x;
    for &(w, k) in terms {
        for i in 0..3 {
            out[i] += h * w * k[i];
        }
    }
    out
}

fn dp_step<F: Fn(&State) -> Vec3>(f: &F, x: Vec3, k1: Vec3, h: f64) -> StepOutput {
    let k2 = f(&State(combine(x, h, &[(A21, k1)])));
    let k3 = f(&State(combine(x, h, &[(A31, k1), (A32, k2)])));
    let k4 = f(&State(combine(x, h, &[(A41, k1), (A42, k2), (A43, k3)])));
    let k5 = f(&State(combine(
        x,
        h,
        &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)],
    )));
    let k6 = f(&State(combine(
        x,
        h,
        &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
    )));
    let x_new = combine(x, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = f(&State(x_new));
    let mut error = [0.0; 3];
    for i in 0..3 {
        error[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    StepOutput {
        x_new,
        error,
        k_last: k7,
    }
}

fn all_finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// One Dormand–Prince step of size `h` from `x`; returns the 5th-order
/// solution and the difference between the 5th- and 4th-order solutions.
pub fn rk_step(field: &VectorField, x: &State, t: f64, h: f64) -> Result<(State, Vec3)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size {h} must be positive")));
    }
    let f = |s: &State| field.eval(s);
    let out = dp_step(&f, x.0, f(x), h);
    if !all_finite(&out.x_new) || !all_finite(&out.error) || !all_finite(&out.k_last) {
        return Err(IntegrationError::StepFailure { t }.into());
    }
    Ok((State(out.x_new), out.error))
}

/// Fixed-step Dormand–Prince integration (5th-order solution, no control).
/// Used by the convergence-order checks.
pub fn integrate_fixed(field: &VectorField, x0: &State, h: f64, n_steps: usize) -> Result<State> {
    let mut x = *x0;
    for k in 0..n_steps {
        x = rk_step(field, &x, k as f64 * h, h)?.0;
    }
    Ok(x)
}

/// Horizons shorter than this are treated as zero length.
const ZERO_HORIZON: f64 = f64::EPSILON;

/// Integrates `field` from `x0` over `settings.t_end` in the requested
/// direction, recording every accepted step.
pub fn integrate(field: &VectorField, x0: &State, settings: &IntegratorSettings) -> Result<Trajectory> {
    if !all_finite(&x0.0) {
        return Err(Error::NonFinite("initial state"));
    }
    if settings.t_end > 0.0 && settings.t_end < ZERO_HORIZON {
        return Ok(Trajectory::start(field, *x0, settings.direction));
    }
    settings.validate()?;

    let sign = settings.direction.sign();
    let f = |s: &State| vec3::scale(sign, field.eval(s));
    let t_end = settings.t_end;
    let h_min = 1e-14 * t_end;
    let finish_slack = 1e-14 * t_end;

    let mut traj = Trajectory::start(field, *x0, settings.direction);
    let mut x = x0.0;
    let mut k1 = f(x0);
    let mut tau = 0.0;
    let mut h = settings.h_init.min(settings.h_max);
    let mut stats = StepStats::default();

    while tau < t_end {
        if stats.accepted >= settings.max_steps {
            traj.step_stats = stats;
            return Err(IntegrationError::MaxStepsExceeded {
                t: sign * tau,
                max_steps: settings.max_steps,
                partial: Box::new(traj),
            }
            .into());
        }
        let remaining = t_end - tau;
        let last = h >= remaining - finish_slack;
        if last {
            h = remaining;
        }

        let out = dp_step(&f, x, k1, h);
        let finite = all_finite(&out.x_new) && all_finite(&out.error) && all_finite(&out.k_last);
        let err = if finite {
            (0..3)
                .map(|i| {
                    let sc = settings
                        .atol
                        .max(settings.rtol * x[i].abs().max(out.x_new[i].abs()));
                    out.error[i].abs() / sc
                })
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            stats.accepted += 1;
            tau = if last { t_end } else { tau + h };
            x = out.x_new;
            k1 = out.k_last;
            traj.push(field, sign * tau, State(x));
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h * factor).min(settings.h_max);
        } else {
            stats.rejected += 1;
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.25
            };
            h *= factor;
            if h < h_min {
                traj.step_stats = stats;
                return Err(IntegrationError::StepSizeUnderflow {
                    t: sign * tau,
                    h,
                    partial: Box::new(traj),
                }
                .into());
            }
        }
    }
    traj.step_stats = stats;
    Ok(traj)
}
