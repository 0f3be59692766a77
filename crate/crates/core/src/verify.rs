//! Self-check suite behind `rrb verify`.
//!
//! Each check samples from a seeded ChaCha stream and reports pass/fail with
//! the worst observed violation. Sample counts are sized for an interactive
//! run; the test suite exercises the same properties at full scale.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{parse_config, serialize_config, RunConfig};
use crate::dynamics::{rhs_hp, rhs_revised, FieldKind, VectorField};
use crate::equilibria::{
    e2_point, equilibria_on_level, is_equilibrium, line_family_point, scalar_g, scalar_h, Family,
    LineFamily,
};
use crate::integrate::{integrate, IntegratorSettings};
use crate::model::{
    build_metric_generic, drift_v, hamiltonian, hamiltonian_completed_square, m_vector,
    metric_matrix, poisson_matrix, State, SystemConfig,
};
use crate::presets::standard;
use crate::stability::{
    classify, limit_report, lyapunov_k, norm_sq_monotone, probe_stability, ProbeOutcome,
    ProbeSettings, VerdictKind,
};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub results: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.results.iter().filter(|r| !r.passed).count()
    }

    pub fn passes(&self) -> usize {
        self.results.len() - self.failures()
    }
}

type Check = fn(&RunConfig, &mut ChaCha8Rng) -> Result<String, String>;

const CHECKS: &[(&str, Check)] = &[
    ("poisson_skew", poisson_skew),
    ("casimir_annihilation", casimir_annihilation),
    ("metric_annihilation", metric_annihilation),
    ("drift_cross_form", drift_cross_form),
    ("triple_product_identity", triple_product_identity),
    ("energy_forms_agree", energy_forms_agree),
    ("generic_builder", generic_builder),
    ("energy_orthogonality", energy_orthogonality),
    ("dissipation_law", dissipation_law),
    ("equilibrium_equivalence", equilibrium_equivalence),
    ("zero_epsilon_reduction", zero_epsilon_reduction),
    ("trajectory_energy_drift", trajectory_energy_drift),
    ("trajectory_casimir_monotone", trajectory_casimir_monotone),
    ("trajectory_dissipation_residual", trajectory_dissipation_residual),
    ("trajectory_bounded", trajectory_bounded),
    ("time_reversal", time_reversal),
    ("family_substitution", family_substitution),
    ("m_proportionality", m_proportionality),
    ("scalar_g_increasing", scalar_g_increasing),
    ("scalar_h_shape", scalar_h_shape),
    ("level_cardinality_and_roots", level_cardinality_and_roots),
    ("e2_accumulates_at_origin", e2_accumulates_at_origin),
    ("classification_soundness", classification_soundness),
    ("lyapunov_decrease_and_rate", lyapunov_decrease_and_rate),
    ("convergence_to_equilibria", convergence_to_equilibria),
    ("origin_ball_invariant", origin_ball_invariant),
    ("config_round_trip", config_round_trip),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs every check. `base` supplies the body and start used by the
/// trajectory checks and the sampling seed.
pub fn run_suite(base: &RunConfig) -> SuiteReport {
    let results = CHECKS
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(base.seed);
            rng.set_stream(i as u64);
            let (passed, detail) = match check(base, &mut rng) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult { name, passed, detail }
        })
        .collect();
    SuiteReport { results }
}

fn random_vec(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
    [rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r)]
}

fn random_cfg(rng: &mut ChaCha8Rng, eps_range: (f64, f64)) -> SystemConfig {
    let a1 = rng.random_range(0.5..2.0);
    let a2 = a1 + rng.random_range(0.1..2.0);
    let a3 = a2 + rng.random_range(0.1..2.0);
    let eps = rng.random_range(eps_range.0..eps_range.1);
    SystemConfig::new([a1, a2, a3], random_vec(rng, 2.0), eps).expect("ordered sample")
}

/// Tracks the worst `value / bound` ratio; passes when it stays `≤ 1`.
struct Worst(f64);

impl Worst {
    fn new() -> Self {
        Worst(0.0)
    }

    fn see(&mut self, value: f64, bound: f64) {
        let r = if value.is_nan() { f64::INFINITY } else { value / bound };
        if r > self.0 {
            self.0 = r;
        }
    }

    fn finish(self, n: usize) -> Result<String, String> {
        let d = format!("{n} samples, worst violation/bound = {:.3e}", self.0);
        if self.0 <= 1.0 {
            Ok(d)
        } else {
            Err(d)
        }
    }
}

fn ensure(cond: bool, detail: String) -> Result<String, String> {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const N: usize = 2000;

fn poisson_skew(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    for _ in 0..N {
        let p = poisson_matrix(&State(random_vec(rng, 5.0)));
        let (r, t) = (p.rows(), p.transpose_rows());
        if (0..3).any(|i| (0..3).any(|j| t[i][j] != -r[i][j])) {
            return Err(format!("{r:?} is not skew"));
        }
    }
    Ok(format!("{N} samples exact"))
}

fn casimir_annihilation(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut w = Worst::new();
    for _ in 0..N {
        let x = State(random_vec(rng, 5.0));
        w.see(vec3::norm(poisson_matrix(&x).mul_vec(x.0)), 1e-13 * x.norm_sq().max(1e-300));
    }
    w.finish(N)
}

fn metric_annihilation(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut w = Worst::new();
    for _ in 0..N {
        let cfg = random_cfg(rng, (-1.0, 1.0));
        let x = State(random_vec(rng, 3.0));
        let m = m_vector(&cfg, &x);
        w.see(vec3::norm(metric_matrix(&cfg, &x).mul_vec(m)), 1e-12 * (1.0 + vec3::norm(m).powi(3)));
    }
    w.finish(N)
}

fn drift_cross_form(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut w = Worst::new();
    for _ in 0..N {
        let cfg = random_cfg(rng, (-1.0, 1.0));
        let x = State(random_vec(rng, 3.0));
        let m = m_vector(&cfg, &x);
        let cross = vec3::cross(vec3::cross(x.0, m), m);
        let diff = vec3::norm(vec3::sub(drift_v(&cfg, &x), cross));
        w.see(diff, 1e-12 * (1.0 + x.norm() * vec3::dot(m, m)));
    }
    w.finish(N)
}

fn triple_product_identity(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut w = Worst::new();
    for _ in 0..N {
        let (u, v) = (random_vec(rng, 3.0), random_vec(rng, 3.0));
        let lhs = vec3::dot(u, vec3::cross(v, vec3::cross(u, v)));
        let uv = vec3::cross(u, v);
        let rhs = vec3::dot(uv, uv);
        let scale = vec3::dot(u, u) * vec3::dot(v, v);
        w.see((lhs - rhs).abs(), 1e-12 * scale.max(f64::MIN_POSITIVE));
    }
    w.finish(N)
}

fn energy_forms_agree(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut w = Worst::new();
    for _ in 0..N {
        let cfg = random_cfg(rng, (-1.0, 1.0));
        let x = State(random_vec(rng, 3.0));
        let h = hamiltonian(&cfg, &x);
        w.see((h - hamiltonian_completed_square(&cfg, &x)).abs(), 1e-12 * (1.0 + h.abs()));
    }
    w.finish(N)
}

fn generic_builder(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    for _ in 0..200 {
        let cfg = random_cfg(rng, (-1.0, 1.0));
        let x = State(random_vec(rng, 3.0));
        let m = m_vector(&cfg, &x);
        let g = build_metric_generic(&m).map_err(|e| e.to_string())?;
        let r = metric_matrix(&cfg, &x).rows();
        for (i, row) in r.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if g.get(i, j).to_bits() != v.to_bits() {
                    return Err(format!("entry ({i},{j}) differs at {x:?}"));
                }
            }
        }
    }
    let mut w = Worst::new();
    for n in 2..=6 {
        for _ in 0..200 {
            let grad: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g = build_metric_generic(&grad).map_err(|e| e.to_string())?;
            if !g.is_symmetric() {
                return Err(format!("n = {n}: not symmetric"));
            }
            let gn: f64 = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            let out = g.mul_vec(&grad);
            let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
            w.see(norm, 1e-12 * (1.0 + gn.powi(3)));
        }
    }
    w.finish(1200)
}

fn pointwise_scale(cfg: &SystemConfig, x: &State) -> f64 {
    let m = vec3::norm(m_vector(cfg, x));
    1e-12 * (1.0 + m * m * x.norm() * (1.0 + cfg.epsilon().abs() * m))
}

fn energy_orthogonality(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut w = Worst::new();
    for _ in 0..N {
        let cfg = random_cfg(rng, (-1.0, 1.0));
        let x = State(random_vec(rng, 3.0));
        let v = vec3::dot(m_vector(&cfg, &x), rhs_revised(&cfg, &x));
        w.see(v.abs(), pointwise_scale(&cfg, &x));
    }
    w.finish(N)
}

fn dissipation_law(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut w = Worst::new();
    for _ in 0..N {
        let cfg = random_cfg(rng, (-1.0, 1.0));
        let x = State(random_vec(rng, 3.0));
        let xm = vec3::cross(x.0, m_vector(&cfg, &x));
        let v = vec3::dot(x.0, rhs_revised(&cfg, &x)) + cfg.epsilon() * vec3::dot(xm, xm);
        w.see(v.abs(), pointwise_scale(&cfg, &x));
    }
    w.finish(N)
}

fn equilibrium_equivalence(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let tol = 1e-9;
    let mut tested = 0;
    for eps in [0.1, 1.0, -0.5] {
        for _ in 0..300 {
            let cfg = random_cfg(rng, (0.0, 1.0)).with_epsilon(eps).expect("valid");
            let mut points = vec![State(random_vec(rng, 3.0)), cfg.energy_minimizer(), State::ORIGIN];
            let lambda = rng.random_range(-5.0..8.0);
            if let Ok(e) = e2_point(&cfg, lambda) {
                points.push(e.point());
                // a perturbation straddling the tolerance
                points.push(State(vec3::add(e.point().0, random_vec(rng, 1e-10))));
            }
            for x in points {
                let m = vec3::norm(m_vector(&cfg, &x));
                let hp = vec3::norm(rhs_hp(&cfg, &x));
                let rev = vec3::norm(rhs_revised(&cfg, &x));
                let scale = 1.0 + x.norm() * m;
                let left = hp <= tol * scale;
                let right = rev <= tol * scale * (1.0 + eps.abs() * m);
                if left && !right || !left && rev <= tol * scale {
                    return Err(format!("mismatch at {x:?}, eps = {eps}: {hp:e} vs {rev:e}"));
                }
                tested += 1;
            }
        }
    }
    Ok(format!("{tested} points consistent"))
}

fn zero_epsilon_reduction(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    for _ in 0..N {
        let cfg = random_cfg(rng, (0.0, 1.0)).with_epsilon(0.0).expect("valid");
        let x = State(random_vec(rng, 3.0));
        if rhs_revised(&cfg, &x) != rhs_hp(&cfg, &x) {
            return Err(format!("differs at {x:?}"));
        }
    }
    Ok(format!("{N} samples exact"))
}

fn base_start(base: &RunConfig) -> State {
    base.x0.unwrap_or(State::new(1.0, 1.0, 1.0))
}

fn base_trajectory(base: &RunConfig, t_end: f64) -> Result<crate::integrate::Trajectory, String> {
    let settings = IntegratorSettings {
        t_end,
        ..base.integrator
    };
    integrate(&VectorField::revised(base.system), &base_start(base), &settings).map_err(|e| e.to_string())
}

const TRAJ_T: f64 = 20.0;

fn trajectory_energy_drift(base: &RunConfig, _: &mut ChaCha8Rng) -> Result<String, String> {
    let traj = base_trajectory(base, TRAJ_T)?;
    let h0 = traj.h_series()[0];
    let bound = 100.0 * base.integrator.rtol * (1.0 + h0.abs()) * TRAJ_T;
    let drift = traj.max_energy_drift();
    ensure(drift <= bound, format!("max |H - H0| = {drift:e}, bound {bound:e}"))
}

fn trajectory_casimir_monotone(base: &RunConfig, _: &mut ChaCha8Rng) -> Result<String, String> {
    let traj = base_trajectory(base, TRAJ_T)?;
    let ok = norm_sq_monotone(&traj, base.system.epsilon(), base.integrator.rtol);
    ensure(ok, format!("{} samples, epsilon = {}", traj.len(), base.system.epsilon()))
}

fn trajectory_dissipation_residual(base: &RunConfig, _: &mut ChaCha8Rng) -> Result<String, String> {
    let traj = base_trajectory(base, TRAJ_T)?;
    let mut w = Worst::new();
    for (x, r) in traj.states().iter().zip(traj.diss_residual()) {
        let m = vec3::norm(m_vector(&base.system, x));
        w.see(*r, 1e-6 * (1.0 + x.norm_sq() * m * m));
    }
    w.finish(traj.len())
}

/// `|x̄₀| + √(2(H₀ − H_min)/a₁)` bounds every point of the energy ellipsoid.
pub fn ellipsoid_radius_bound(cfg: &SystemConfig, h0: f64) -> f64 {
    let a1 = cfg.inverse_moments()[0];
    cfg.energy_minimizer().norm() + (2.0 * (h0 - cfg.min_energy()).max(0.0) / a1).sqrt()
}

fn trajectory_bounded(base: &RunConfig, _: &mut ChaCha8Rng) -> Result<String, String> {
    let traj = base_trajectory(base, TRAJ_T)?;
    let r = ellipsoid_radius_bound(&base.system, traj.h_series()[0]);
    let max = traj.max_norm();
    ensure(max <= r * (1.0 + 1e-8), format!("max |x| = {max}, R(H0) = {r}"))
}

/// Forward-then-backward round trip. Backward integration of a dissipative
/// flow amplifies errors like `exp(|ε||m|²T)`, so the revised field uses a
/// horizon that keeps that factor `O(e)`; the conservative one runs `T = 2`.
pub fn reversal_horizon(cfg: &SystemConfig, x0: &State) -> f64 {
    let m2 = vec3::dot(m_vector(cfg, x0), m_vector(cfg, x0));
    let rate = cfg.epsilon().abs() * m2;
    if rate > 0.5 {
        (1.0 / rate).min(2.0)
    } else {
        2.0
    }
}

fn time_reversal(base: &RunConfig, _: &mut ChaCha8Rng) -> Result<String, String> {
    let x0 = base_start(base);
    let bound = 1e-5 * (1.0 + x0.norm());
    let mut detail = Vec::new();
    for field in [VectorField::hamilton_poisson(base.system), VectorField::revised(base.system)] {
        let t_end = match field.kind() {
            FieldKind::HamiltonPoisson => 2.0,
            FieldKind::EpsilonRevised => reversal_horizon(&base.system, &x0),
        };
        let fwd = IntegratorSettings { t_end, ..base.integrator };
        let end = integrate(&field, &x0, &fwd).map_err(|e| e.to_string())?.final_state();
        let back = integrate(&field, &end, &fwd.backward()).map_err(|e| e.to_string())?.final_state();
        let err = back.distance(&x0);
        if !(err <= bound) {
            return Err(format!("{:?}, T = {t_end}: return error {err:e}, bound {bound:e}", field.kind()));
        }
        detail.push(format!("{:?} T = {t_end:.3}: {err:.2e}", field.kind()));
    }
    Ok(detail.join("; "))
}

fn family_substitution(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut n = 0;
    for _ in 0..1000 {
        let cfg = random_cfg(rng, (-1.0, 1.0));
        let lambda = rng.random_range(-10.0..10.0);
        let eq = match e2_point(&cfg, lambda) {
            Ok(e) => e,
            Err(crate::Error::PoleProximity { .. }) => continue,
            Err(e) => return Err(e.to_string()),
        };
        if !is_equilibrium(&cfg, &eq.point(), 1e-12) {
            return Err(format!("E2({lambda}) residual {:e}", eq.residual()));
        }
        n += 1;
        for line in LineFamily::ALL {
            let mut u = cfg.controls();
            u[line.axis()] = 0.0;
            let c = cfg.with_controls(u).expect("valid");
            let alpha = rng.random_range(-3.0..3.0);
            let eq = line_family_point(&c, line, alpha).map_err(|e| e.to_string())?;
            if !is_equilibrium(&c, &eq.point(), 1e-12) {
                return Err(format!("{} residual {:e}", eq.family().tag(), eq.residual()));
            }
            n += 1;
        }
    }
    Ok(format!("{n} family points"))
}

fn m_proportionality(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut w = Worst::new();
    let mut n = 0;
    for _ in 0..1000 {
        let cfg = random_cfg(rng, (-1.0, 1.0));
        let lambda = rng.random_range(-10.0..10.0);
        let Ok(eq) = e2_point(&cfg, lambda) else { continue };
        let x = eq.point();
        let diff = vec3::norm(vec3::sub(m_vector(&cfg, &x), vec3::scale(lambda, x.0)));
        w.see(diff, 1e-12 * (1.0 + lambda.abs() * x.norm()));
        n += 1;
    }
    w.finish(n)
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

fn scalar_g_increasing(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    for _ in 0..20 {
        let cfg = random_cfg(rng, (0.1, 1.0));
        let a1 = cfg.inverse_moments()[0];
        let vals: Vec<f64> = grid(-20.0, a1 - 0.01, 1000)
            .map(|l| scalar_g(&cfg, l).expect("off poles"))
            .collect();
        if let Some(i) = vals.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(format!("not increasing at grid index {i}"));
        }
    }
    Ok("20 bodies, 1000-point grids".into())
}

fn strictly(vals: &[f64], increasing: bool) -> bool {
    vals.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn scalar_h_shape(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    for k in 0..20 {
        let cfg = if k == 0 { standard(0.5) } else { random_cfg(rng, (0.1, 1.0)) };
        if cfg.controls().contains(&0.0) {
            continue;
        }
        let [a1, _, a3] = cfg.inverse_moments();
        let h = |s: f64| scalar_h(&cfg, s).expect("off poles");
        let left: Vec<f64> = grid(-20.0, -1e-3, 1000).map(h).collect();
        let mid: Vec<f64> = grid(1e-3, a1 - 1e-3, 1000).map(h).collect();
        let right: Vec<f64> = grid(a3 + 1e-3, a3 + 20.0, 1000).map(h).collect();
        if !strictly(&left, false) || !strictly(&mid, true) || !strictly(&right, false) {
            return Err(format!("shape violated for {cfg:?}"));
        }
        let h0 = h(0.0);
        if left.iter().chain(&mid).any(|&v| v < h0) {
            return Err("h(0) is not the grid minimum".into());
        }
    }
    Ok("20 bodies, three 1000-point grids each".into())
}

fn level_cardinality_and_roots(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut total = 0;
    for _ in 0..100 {
        let mut cfg = random_cfg(rng, (-1.0, 1.0));
        if rng.random_range(0.0..1.0) < 0.3 {
            let mut u = cfg.controls();
            u[rng.random_range(0..3usize)] = 0.0;
            cfg = cfg.with_controls(u).expect("valid");
        }
        let k = cfg.min_energy() + rng.random_range(0.0..5.0);
        let eqs = equilibria_on_level(&cfg, k).map_err(|e| e.to_string())?;
        let mut e2 = 0;
        let mut lines = [0usize; 3];
        for e in &eqs {
            match e.family() {
                Family::E2 { lambda } => {
                    e2 += 1;
                    let h = scalar_h(&cfg, lambda).map_err(|e| e.to_string())?;
                    if (h - k).abs() > 1e-9 * (1.0 + k.abs()) {
                        return Err(format!("root {lambda}: |h - k| = {:e}", (h - k).abs()));
                    }
                }
                Family::E3 { .. } => lines[0] += 1,
                Family::E4 { .. } => lines[1] += 1,
                Family::E5 { .. } => lines[2] += 1,
                Family::E1 => {}
            }
        }
        if e2 > 6 || lines.iter().any(|&c| c > 2) {
            return Err(format!("{e2} E2 points, line counts {lines:?} at k = {k}"));
        }
        total += eqs.len();
    }
    Ok(format!("100 levels, {total} equilibria"))
}

fn e2_accumulates_at_origin(_: &RunConfig, _: &mut ChaCha8Rng) -> Result<String, String> {
    let cfg = standard(0.5);
    let n = [-1e3, 1e3]
        .map(|l| e2_point(&cfg, l).map(|e| e.point().norm()).unwrap_or(f64::INFINITY));
    ensure(n.iter().all(|&v| v <= 3.2e-3), format!("|e2(-1e3)| = {}, |e2(1e3)| = {}", n[0], n[1]))
}

fn classification_soundness(base: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let probe = ProbeSettings {
        n_samples: 4,
        seed: base.seed,
        ..ProbeSettings::default()
    };
    let mut n = 0;
    for k in 0..3 {
        let cfg = if k == 0 { standard(0.5) } else { random_cfg(rng, (0.2, 1.0)) };
        let a1 = cfg.inverse_moments()[0];
        let cases = [(-2.0, true), (-1.0, true), (-0.1, true), (0.2 * a1, false), (0.5 * a1, false), (0.9 * a1, false)];
        for (lambda, stable) in cases {
            let eq = e2_point(&cfg, lambda).map_err(|e| e.to_string())?;
            let v = classify(&cfg, &eq).map_err(|e| e.to_string())?;
            let want = if stable { VerdictKind::LyapunovStable } else { VerdictKind::Unstable };
            if v.kind != want {
                return Err(format!("classify E2({lambda}) = {:?}", v.kind));
            }
            let p = probe_stability(&cfg, &eq, &probe).map_err(|e| format!("probe E2({lambda}): {e}"))?;
            let want = if stable { ProbeOutcome::StaysNear } else { ProbeOutcome::Escapes };
            if p.outcome != want {
                return Err(format!("probe E2({lambda}) = {:?}", p.outcome));
            }
            n += 1;
        }
    }
    Ok(format!("{n} equilibria agree"))
}

fn lyapunov_decrease_and_rate(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let cfg = standard(0.5);
    let mut worst_rate = 0.0f64;
    for lambda in [-0.1, -1.0, -3.0] {
        let e = e2_point(&cfg, lambda).map_err(|e| e.to_string())?.point();
        let x0 = State(vec3::add(e.0, random_vec(rng, 0.2)));
        let settings = IntegratorSettings::with_horizon(5.0);
        let traj = integrate(&VectorField::revised(cfg), &x0, &settings).map_err(|e| e.to_string())?;
        let k = |x: &State| lyapunov_k(&cfg, lambda, vec3::sub(x.0, e.0)).expect("lambda < 0");
        let ks: Vec<f64> = traj.states().iter().map(|x| k(x).value).collect();
        if ks.iter().any(|&v| v < 0.0) {
            return Err("K negative".into());
        }
        for w in ks.windows(2) {
            if w[1] > w[0] + 10.0 * settings.rtol * (1.0 + w[0]) {
                return Err(format!("K increased along lambda = {lambda}"));
            }
        }
        // central difference against the rate formula at interior samples
        for i in (1..traj.len() - 1).step_by(7) {
            let x = traj.states()[i];
            let h = 1e-5;
            let f = crate::dynamics::rhs_revised(&cfg, &x);
            let xp = State(vec3::axpy(x.0, h, f));
            let xm = State(vec3::axpy(x.0, -h, f));
            let fd = (k(&xp).value - k(&xm).value) / (2.0 * h);
            let rate = k(&x).rate;
            if rate.abs() > 1e-12 {
                worst_rate = worst_rate.max((fd - rate).abs() / rate.abs());
            }
        }
    }
    ensure(worst_rate <= 1e-6, format!("worst relative rate error {worst_rate:e}"))
}

fn convergence_to_equilibria(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let cfg = standard(0.5);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let x0 = loop {
            let v = random_vec(rng, 2.0);
            if vec3::norm(v) <= 2.0 {
                break State(v);
            }
        };
        let r = limit_report(&cfg, &x0, 500.0).map_err(|e| e.to_string())?;
        if !r.norms_monotone || !r.ordering_holds {
            return Err(format!("monotonicity or ordering flagged from {x0:?}"));
        }
        worst = worst.max(r.d_forward).max(r.d_backward);
    }
    ensure(worst <= 1e-3, format!("10 starts, worst distance {worst:e}"))
}

fn origin_ball_invariant(_: &RunConfig, rng: &mut ChaCha8Rng) -> Result<String, String> {
    let cfg = standard(0.5);
    for _ in 0..5 {
        let x0 = State(random_vec(rng, 0.3));
        let traj = integrate(&VectorField::revised(cfg), &x0, &IntegratorSettings::with_horizon(50.0))
            .map_err(|e| e.to_string())?;
        let r0 = x0.norm();
        if traj.states().iter().any(|x| x.norm() > r0 * (1.0 + 1e-9)) {
            return Err(format!("left the ball of radius {r0}"));
        }
    }
    Ok("5 starts stay within |x0|".into())
}

fn config_round_trip(base: &RunConfig, _: &mut ChaCha8Rng) -> Result<String, String> {
    let text = serialize_config(base);
    let back = parse_config(&text).map_err(|e| e.to_string())?;
    ensure(back == *base, "parse(serialize(config)) == config".into())
}
