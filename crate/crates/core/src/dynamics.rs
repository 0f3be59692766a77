//! Right-hand sides of the conservative and the revised flows.

use serde::{Deserialize, Serialize};

use crate::model::{m_vector, State, SystemConfig};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    /// `ẋ = x × m(x)`
    HamiltonPoisson,
    /// `ẋ = x × m(x) + ε (x × m(x)) × m(x)`
    EpsilonRevised,
}

/// A vector field bound to a configuration. The kind is fixed at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorField {
    kind: FieldKind,
    cfg: SystemConfig,
}

impl VectorField {
    pub fn new(kind: FieldKind, cfg: SystemConfig) -> Self {
        Self { kind, cfg }
    }

    pub fn hamilton_poisson(cfg: SystemConfig) -> Self {
        Self::new(FieldKind::HamiltonPoisson, cfg)
    }

    pub fn revised(cfg: SystemConfig) -> Self {
        Self::new(FieldKind::EpsilonRevised, cfg)
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    /// The `ε` that actually enters this field (zero for the conservative one).
    pub fn effective_epsilon(&self) -> f64 {
        match self.kind {
            FieldKind::HamiltonPoisson => 0.0,
            FieldKind::EpsilonRevised => self.cfg.epsilon(),
        }
    }

    #[inline]
    pub fn eval(&self, x: &State) -> Vec3 {
        match self.kind {
            FieldKind::HamiltonPoisson => rhs_hp(&self.cfg, x),
            FieldKind::EpsilonRevised => rhs_revised(&self.cfg, x),
        }
    }
}

/// `x × m(x)`.
#[inline]
pub fn rhs_hp(cfg: &SystemConfig, x: &State) -> Vec3 {
    vec3::cross(x.0, m_vector(cfg, x))
}

/// `x × m + ε (x × m) × m`. With `ε = 0` this is the same computation as
/// [`rhs_hp`].
#[inline]
pub fn rhs_revised(cfg: &SystemConfig, x: &State) -> Vec3 {
    let m = m_vector(cfg, x);
    let xm = vec3::cross(x.0, m);
    let eps = cfg.epsilon();
    if eps == 0.0 {
        return xm;
    }
    vec3::axpy(xm, eps, vec3::cross(xm, m))
}

/// Time derivatives of `H` and `C` along the revised flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralRates {
    pub dh_dt: f64,
    pub dc_dt: f64,
}

/// `dH/dt = m·ẋ` and `dC/dt = x·ẋ` with `ẋ` from the revised field.
pub fn integral_rates(cfg: &SystemConfig, x: &State) -> IntegralRates {
    let xdot = rhs_revised(cfg, x);
    IntegralRates {
        dh_dt: vec3::dot(m_vector(cfg, x), xdot),
        dc_dt: vec3::dot(x.0, xdot),
    }
}

/// The analytic dissipation rate `−ε |x × m|²`.
pub fn casimir_rate_analytic(cfg: &SystemConfig, x: &State) -> f64 {
    let xm = vec3::cross(x.0, m_vector(cfg, x));
    -cfg.epsilon() * vec3::dot(xm, xm)
}

/// Central-difference Jacobian of `field` at `x`, step `1e-6·(1 + |x|)`.
/// Returned as plain rows: it carries neither the skew nor the symmetric tag.
pub fn jacobian(field: &VectorField, x: &State) -> [[f64; 3]; 3] {
    let h = 1e-6 * (1.0 + x.norm());
    let mut jac = [[0.0; 3]; 3];
    for col in 0..3 {
        let mut xp = x.0;
        let mut xm = x.0;
        xp[col] += h;
        xm[col] -= h;
        let fp = field.eval(&State(xp));
        let fm = field.eval(&State(xm));
        let width = xp[col] - xm[col];
        for (row, jr) in jac.iter_mut().enumerate() {
            jr[col] = (fp[row] - fm[row]) / width;
        }
    }
    jac
}
