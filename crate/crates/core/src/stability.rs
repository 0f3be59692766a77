//! Stability of equilibria of the revised flow for `ε > 0`, plus forward and
//! backward limit estimation.
//!
//! [`classify`] only issues a definite verdict when the hypotheses of the
//! corresponding result are checked on the inputs:
//!
//! | equilibrium               | verdict  | provenance                    |
//! |---------------------------|----------|-------------------------------|
//! | origin                    | stable   | [`Provenance::NormDecay`]     |
//! | `E2(0)`, energy minimiser | stable   | [`Provenance::EnergyMinimum`] |
//! | `E2(λ)`, `λ < 0`          | stable   | [`Provenance::LyapunovQuadratic`] |
//! | `E2(λ)`, `0 < λ < a₁`     | unstable | [`Provenance::InteriorInstability`] |
//! | anything else             | unstable if a smaller-norm equilibrium shares its energy level, else undetermined |

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::VectorField;
use crate::equilibria::{distance_to_equilibria, e2_point, equilibria_on_level, Equilibrium, Family};
use crate::error::{Error, Result};
use crate::integrate::{integrate, Direction, IntegratorSettings, Trajectory};
use crate::model::{hamiltonian, m_vector, State, SystemConfig};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    LyapunovStable,
    Unstable,
    Undetermined,
}

/// Which argument backs a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// `|x(t)|` never increases for `ε > 0`, so balls around the origin are invariant.
    NormDecay,
    /// The point is the strict global minimum of the conserved energy.
    EnergyMinimum,
    /// Another equilibrium on the same energy level has strictly smaller norm.
    SmallerNormWitness,
    /// `E2(λ)` with `0 < λ < a₁`: such a witness always exists.
    InteriorInstability,
    /// `K(z) = ½ z·I⁻¹z − (λ/2)|z|²` is a strict Lyapunov function for `λ < 0`.
    LyapunovQuadratic,
    /// Decided by simulation only.
    EmpiricalOnly,
    NotCovered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub kind: VerdictKind,
    pub provenance: Provenance,
    pub notes: String,
}

impl StabilityVerdict {
    fn new(kind: VerdictKind, provenance: Provenance, notes: impl Into<String>) -> Self {
        Self {
            kind,
            provenance,
            notes: notes.into(),
        }
    }
}

/// Gap required between `|y|` and `|x₀|` for a witness to count.
pub const WITNESS_NORM_GAP: f64 = 1e-9;

/// Theorem-backed stability classification for `ε > 0`.
pub fn classify(cfg: &SystemConfig, eq: &Equilibrium) -> Result<StabilityVerdict> {
    let eps = cfg.epsilon();
    if !(eps > 0.0) {
        return Err(Error::EpsilonNotPositive(eps));
    }
    // re-validate against this configuration
    let eq = Equilibrium::new(cfg, eq.point(), eq.family())?;
    use Provenance::*;
    use VerdictKind::*;

    let is_origin = eq.point().0 == [0.0; 3];
    match eq.family() {
        _ if is_origin => {
            return Ok(StabilityVerdict::new(
                LyapunovStable,
                NormDecay,
                "origin: |x(t)| is nonincreasing for epsilon > 0",
            ))
        }
        Family::E2 { lambda } if !cfg.is_free_body() => {
            let a1 = cfg.inverse_moments()[0];
            if lambda == 0.0 {
                return Ok(StabilityVerdict::new(
                    LyapunovStable,
                    EnergyMinimum,
                    "E2(0) is the global minimum of H",
                ));
            }
            if lambda < 0.0 {
                return Ok(StabilityVerdict::new(
                    LyapunovStable,
                    LyapunovQuadratic,
                    format!("lambda = {lambda} < 0: K decreases along the flow"),
                ));
            }
            if lambda < a1 {
                return Ok(StabilityVerdict::new(
                    Unstable,
                    InteriorInstability,
                    format!("0 < lambda = {lambda} < a1 = {a1}"),
                ));
            }
        }
        _ => {}
    }

    match instability_certificate(cfg, &eq)? {
        Some(w) => Ok(StabilityVerdict::new(
            Unstable,
            SmallerNormWitness,
            format!(
                "witness {} at {:?} with |y| = {} < |x0| = {}",
                w.family().tag(),
                w.point().0,
                w.point().norm(),
                eq.point().norm()
            ),
        )),
        None => Ok(StabilityVerdict::new(
            Undetermined,
            NotCovered,
            "no stability result covers this equilibrium",
        )),
    }
}

/// Smallest-norm equilibrium `y` with `H(y) = H(x₀)` and `|y| < |x₀| − 1e-9`.
pub fn instability_certificate(cfg: &SystemConfig, eq: &Equilibrium) -> Result<Option<Equilibrium>> {
    let x0 = eq.point();
    let bound = x0.norm() - WITNESS_NORM_GAP;
    if bound <= 0.0 {
        return Ok(None);
    }
    let level = match equilibria_on_level(cfg, hamiltonian(cfg, &x0)) {
        Ok(l) => l,
        // rounding can put H(x₀) a hair below the minimum
        Err(Error::EmptyLevel { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(level
        .into_iter()
        .filter(|y| y.point().norm() < bound)
        .min_by(|p, q| p.point().norm().total_cmp(&q.point().norm())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovValue {
    /// `K(z) = ½ z·I⁻¹z − (λ/2)|z|²`
    pub value: f64,
    /// `ελ |x × m(x)|²` at `x = z + e₂(λ)`
    pub rate: f64,
}

/// The quadratic Lyapunov function around `E2(λ)`, `λ < 0`.
pub fn lyapunov_k(cfg: &SystemConfig, lambda: f64, z: Vec3) -> Result<LyapunovValue> {
    if !(lambda < 0.0) {
        return Err(Error::LambdaNotNegative(lambda));
    }
    let a = cfg.inverse_moments();
    let value = 0.5 * (a[0] * z[0] * z[0] + a[1] * z[1] * z[1] + a[2] * z[2] * z[2])
        - 0.5 * lambda * vec3::dot(z, z);
    let x = State(vec3::add(z, e2_point(cfg, lambda)?.point().0));
    let xm = vec3::cross(x.0, m_vector(cfg, &x));
    Ok(LyapunovValue {
        value,
        rate: cfg.epsilon() * lambda * vec3::dot(xm, xm),
    })
}

/// `∇K(z) = (aᵢ − λ) zᵢ`
pub fn lyapunov_k_gradient(cfg: &SystemConfig, lambda: f64, z: Vec3) -> Vec3 {
    let a = cfg.inverse_moments();
    [(a[0] - lambda) * z[0], (a[1] - lambda) * z[1], (a[2] - lambda) * z[2]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeOutcome {
    StaysNear,
    Escapes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSettings {
    pub delta: f64,
    pub horizon: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Stay bound as a multiple of `delta`.
    pub stay_factor: f64,
    /// Escape radius relative to `1 + |x₀|`.
    pub escape_radius: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            horizon: 200.0,
            n_samples: 20,
            seed: 0,
            stay_factor: 50.0,
            escape_radius: 0.05,
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub outcome: ProbeOutcome,
    /// `max` over samples of `sup_t |x(t) − x₀|`.
    pub max_excursion: f64,
    pub excursions: Vec<f64>,
}

/// Perturbation `i` for a probe: `delta` times a uniform unit vector drawn
/// from a ChaCha stream keyed by `(seed, i)`.
pub fn probe_perturbation(seed: u64, index: u64, delta: f64) -> Vec3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let dir: [f64; 3] = UnitSphere.sample(&mut rng);
    vec3::scale(delta, dir)
}

/// Simulates `n_samples` perturbed starts around `eq` under the revised flow.
///
/// Samples run in parallel; the reduction is in sample order, so the result
/// only depends on the settings.
pub fn probe_stability(cfg: &SystemConfig, eq: &Equilibrium, settings: &ProbeSettings) -> Result<ProbeReport> {
    let x0 = eq.point();
    let stay_bound = settings.stay_factor * settings.delta;
    let escape_radius = settings.escape_radius * (1.0 + x0.norm());
    if settings.delta == 0.0 {
        return Ok(ProbeReport {
            outcome: ProbeOutcome::StaysNear,
            max_excursion: 0.0,
            excursions: vec![0.0; settings.n_samples.max(1)],
        });
    }
    if !(1e-6..=1e-2).contains(&settings.delta) {
        return Err(Error::InvalidArgument(format!(
            "delta = {} outside [1e-6, 1e-2]",
            settings.delta
        )));
    }
    if settings.n_samples < 1 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let field = VectorField::revised(*cfg);
    let integ = IntegratorSettings {
        rtol: settings.rtol,
        atol: settings.atol,
        t_end: settings.horizon,
        ..IntegratorSettings::default()
    };
    let excursions: Vec<Result<f64>> = (0..settings.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let start = State(vec3::add(
                x0.0,
                probe_perturbation(settings.seed, i, settings.delta),
            ));
            let traj = integrate(&field, &start, &integ)?;
            Ok(traj
                .states()
                .iter()
                .map(|s| s.distance(&x0))
                .fold(0.0, f64::max))
        })
        .collect();
    let excursions = excursions.into_iter().collect::<Result<Vec<f64>>>()?;
    let max_excursion = excursions.iter().copied().fold(0.0, f64::max);
    let outcome = if max_excursion <= stay_bound {
        ProbeOutcome::StaysNear
    } else if max_excursion > escape_radius {
        ProbeOutcome::Escapes
    } else {
        return Err(Error::Inconclusive {
            max_excursion,
            stay_bound,
            escape_radius,
        });
    };
    Ok(ProbeReport {
        outcome,
        max_excursion,
        excursions,
    })
}

/// Forward (`x_m`) and backward (`x_M`) limit estimates of one solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub x0: State,
    pub horizon: f64,
    pub x_m: State,
    #[serde(rename = "x_M")]
    pub x_big_m: State,
    pub d_forward: f64,
    pub d_backward: f64,
    /// `|x(t)|²` is monotone in the direction fixed by the sign of `ε`.
    pub norms_monotone: bool,
    /// `|x_M|² > |x_m|²` for `ε > 0` (reversed for `ε < 0`), within `1e-6`.
    pub ordering_holds: bool,
}

/// True when `|x|²` along `traj` moves with physical time in the direction
/// set by `sign(ε)`, allowing `10·rtol·(1 + |x|²)` jitter per sample.
pub fn norm_sq_monotone(traj: &Trajectory, epsilon: f64, rtol: f64) -> bool {
    if epsilon == 0.0 {
        return true;
    }
    // +1 when |x|² must not grow along the sample sequence
    let along_samples = match traj.direction() {
        Direction::Forward => epsilon.signum(),
        Direction::Backward => -epsilon.signum(),
    };
    traj.c_series().windows(2).all(|w| {
        let (c0, c1) = (2.0 * w[0], 2.0 * w[1]);
        along_samples * (c1 - c0) <= 10.0 * rtol * (1.0 + c0)
    })
}

pub fn limit_report(cfg: &SystemConfig, x0: &State, horizon: f64) -> Result<LimitReport> {
    limit_report_with(cfg, x0, &IntegratorSettings::with_horizon(horizon))
}

/// [`limit_report`] with explicit integrator settings; `settings.direction`
/// is ignored.
pub fn limit_report_with(cfg: &SystemConfig, x0: &State, settings: &IntegratorSettings) -> Result<LimitReport> {
    let eps = cfg.epsilon();
    if eps == 0.0 {
        return Err(Error::InvalidArgument(
            "limit estimation requires epsilon != 0".into(),
        ));
    }
    let field = VectorField::revised(*cfg);
    let fwd_settings = IntegratorSettings {
        direction: Direction::Forward,
        ..*settings
    };
    let bwd_settings = IntegratorSettings {
        direction: Direction::Backward,
        ..*settings
    };
    let (fwd, bwd) = rayon::join(
        || integrate(&field, x0, &fwd_settings),
        || integrate(&field, x0, &bwd_settings),
    );
    let (fwd, bwd) = (fwd?, bwd?);
    let x_m = fwd.final_state();
    let x_big_m = bwd.final_state();
    let slack = 1e-6;
    let ordering_holds = if eps > 0.0 {
        x_big_m.norm_sq() + slack > x_m.norm_sq()
    } else {
        x_m.norm_sq() + slack > x_big_m.norm_sq()
    };
    Ok(LimitReport {
        x0: *x0,
        horizon: settings.t_end,
        x_m,
        x_big_m,
        d_forward: distance_to_equilibria(cfg, &x_m),
        d_backward: distance_to_equilibria(cfg, &x_big_m),
        norms_monotone: norm_sq_monotone(&fwd, eps, settings.rtol)
            && norm_sq_monotone(&bwd, eps, settings.rtol),
        ordering_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::e2_point;
    use crate::presets::{standard, standard_free};

    #[test]
    fn classify_examples() {
        let cfg = standard(0.5);
        let v = classify(&cfg, &e2_point(&cfg, -1.0).unwrap()).unwrap();
        assert_eq!((v.kind, v.provenance), (VerdictKind::LyapunovStable, Provenance::LyapunovQuadratic));
        let v = classify(&cfg, &e2_point(&cfg, 0.5).unwrap()).unwrap();
        assert_eq!((v.kind, v.provenance), (VerdictKind::Unstable, Provenance::InteriorInstability));
        let v = classify(&cfg, &e2_point(&cfg, 5.0).unwrap()).unwrap();
        assert_eq!(v.kind, VerdictKind::Undetermined);
        let v = classify(&cfg, &e2_point(&cfg, 0.0).unwrap()).unwrap();
        assert_eq!((v.kind, v.provenance), (VerdictKind::LyapunovStable, Provenance::EnergyMinimum));
        let v = classify(&cfg, &Equilibrium::origin(&cfg)).unwrap();
        assert_eq!((v.kind, v.provenance), (VerdictKind::LyapunovStable, Provenance::NormDecay));
    }

    #[test]
    fn classify_requires_positive_epsilon() {
        for eps in [0.0, -0.3] {
            let cfg = standard(eps);
            let eq = e2_point(&cfg, -1.0).unwrap();
            assert_eq!(classify(&cfg, &eq), Err(Error::EpsilonNotPositive(eps)));
        }
    }

    #[test]
    fn certificate_examples() {
        let cfg = standard(0.5);
        let eq = e2_point(&cfg, 0.5).unwrap();
        let w = instability_certificate(&cfg, &eq).unwrap().expect("witness");
        assert!(w.point().norm() < eq.point().norm());
        let h = hamiltonian(&cfg, &eq.point());
        assert!((hamiltonian(&cfg, &w.point()) - h).abs() < 1e-9);

        let min = e2_point(&cfg, 0.0).unwrap();
        assert_eq!(instability_certificate(&cfg, &min).unwrap(), None);
        assert_eq!(instability_certificate(&cfg, &Equilibrium::origin(&cfg)).unwrap(), None);
    }

    #[test]
    fn lyapunov_examples() {
        let cfg = standard(0.5);
        let k0 = lyapunov_k(&cfg, -1.0, [0.0; 3]).unwrap();
        assert_eq!(k0.value, 0.0);
        assert!(k0.rate.abs() < 1e-30);
        let k1 = lyapunov_k(&cfg, -1.0, [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(k1.value, 1.0);
        assert!(matches!(lyapunov_k(&cfg, 0.0, [1.0; 3]), Err(Error::LambdaNotNegative(_))));
        assert!(matches!(lyapunov_k(&cfg, 0.3, [1.0; 3]), Err(Error::LambdaNotNegative(_))));
    }

    #[test]
    fn lyapunov_rate_is_chain_rule_derivative() {
        let cfg = standard(0.5);
        for (lambda, z) in [(-1.0, [0.3, -0.1, 0.2]), (-0.2, [1.0, 0.5, -0.7]), (-4.0, [-0.05, 0.02, 0.4])] {
            let k = lyapunov_k(&cfg, lambda, z).unwrap();
            let x = State(vec3::add(z, e2_point(&cfg, lambda).unwrap().point().0));
            let xdot = crate::dynamics::rhs_revised(&cfg, &x);
            let chain = vec3::dot(lyapunov_k_gradient(&cfg, lambda, z), xdot);
            assert!((chain - k.rate).abs() <= 1e-10 * (1e-300 + k.rate.abs()), "{chain} vs {}", k.rate);
            assert!(k.rate < 0.0);
        }
    }

    #[test]
    fn perturbations_are_reproducible() {
        let p = probe_perturbation(7, 3, 1e-3);
        assert_eq!(p, probe_perturbation(7, 3, 1e-3));
        assert_ne!(p, probe_perturbation(7, 4, 1e-3));
        assert!((vec3::norm(p) - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn zero_delta_probe_stays() {
        let cfg = standard(0.5);
        let eq = e2_point(&cfg, 0.5).unwrap();
        let settings = ProbeSettings { delta: 0.0, ..Default::default() };
        assert_eq!(probe_stability(&cfg, &eq, &settings).unwrap().outcome, ProbeOutcome::StaysNear);
    }

    #[test]
    fn limits_at_equilibrium_stay_put() {
        let cfg = standard(0.5);
        let r = limit_report(&cfg, &State::ORIGIN, 50.0).unwrap();
        assert_eq!((r.x_m, r.x_big_m), (State::ORIGIN, State::ORIGIN));
        assert!(r.ordering_holds && r.norms_monotone);

        // stable forward; backward in time rounding error is amplified
        let eq = e2_point(&cfg, -1.0).unwrap().point();
        let r = limit_report(&cfg, &eq, 50.0).unwrap();
        assert!(r.x_m.distance(&eq) < 1e-10);
        assert!(r.d_forward < 1e-8);
        assert!(r.ordering_holds);
    }

    #[test]
    fn limits_require_nonzero_epsilon() {
        assert!(limit_report(&standard_free(0.0), &State::new(1.0, 1.0, 1.0), 1.0).is_err());
    }
}
