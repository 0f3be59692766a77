//! Algebraic objects of the controlled rigid body: energy, Casimir, the
//! Poisson tensor and the symmetric tensor `g` that annihilates `∇H`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Body parameters and the revision strength.
///
/// `a1 < a2 < a3` are the inverse principal moments of inertia, `(a, b, c)`
/// the linear feedback gains and `epsilon` the weight of the metric drift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    a1: f64,
    a2: f64,
    a3: f64,
    ctrl_a: f64,
    ctrl_b: f64,
    ctrl_c: f64,
    epsilon: f64,
}

impl SystemConfig {
    pub fn new(inverse_moments: Vec3, controls: Vec3, epsilon: f64) -> Result<Self> {
        let [a1, a2, a3] = inverse_moments;
        let [ctrl_a, ctrl_b, ctrl_c] = controls;
        let all = [a1, a2, a3, ctrl_a, ctrl_b, ctrl_c, epsilon];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("system configuration"));
        }
        if !(0.0 < a1 && a1 < a2 && a2 < a3) {
            return Err(Error::InvariantViolation(format!(
                "requires 0 < a1 < a2 < a3 (got {a1}, {a2}, {a3})"
            )));
        }
        Ok(Self {
            a1,
            a2,
            a3,
            ctrl_a,
            ctrl_b,
            ctrl_c,
            epsilon,
        })
    }

    /// Builds the configuration from principal moments `I1 > I2 > I3 > 0`.
    pub fn from_moments(moments: Vec3, controls: Vec3, epsilon: f64) -> Result<Self> {
        let [i1, i2, i3] = moments;
        if moments.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("moments of inertia"));
        }
        if !(i1 > i2 && i2 > i3 && i3 > 0.0) {
            return Err(Error::InvariantViolation(format!(
                "requires I1 > I2 > I3 > 0 (got {i1}, {i2}, {i3})"
            )));
        }
        Self::new([1.0 / i1, 1.0 / i2, 1.0 / i3], controls, epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.inverse_moments(), self.controls(), epsilon)
    }

    pub fn with_controls(&self, controls: Vec3) -> Result<Self> {
        Self::new(self.inverse_moments(), controls, self.epsilon)
    }

    pub fn inverse_moments(&self) -> Vec3 {
        [self.a1, self.a2, self.a3]
    }

    pub fn moments(&self) -> Vec3 {
        [1.0 / self.a1, 1.0 / self.a2, 1.0 / self.a3]
    }

    pub fn controls(&self) -> Vec3 {
        [self.ctrl_a, self.ctrl_b, self.ctrl_c]
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// True when all three feedback gains vanish (the free rigid body).
    pub fn is_free_body(&self) -> bool {
        self.controls().iter().all(|&c| c == 0.0)
    }

    /// Global minimum of `H`, attained at `-(a/a1, b/a2, c/a3)`.
    pub fn min_energy(&self) -> f64 {
        let a = self.inverse_moments();
        let u = self.controls();
        -0.5 * (u[0] * u[0] / a[0] + u[1] * u[1] / a[1] + u[2] * u[2] / a[2])
    }

    /// The energy minimiser, the `λ = 0` member of the `e2` family.
    pub fn energy_minimizer(&self) -> State {
        let a = self.inverse_moments();
        let u = self.controls();
        State::new(-u[0] / a[0], -u[1] / a[1], -u[2] / a[2])
    }
}

/// Body angular momentum coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State(pub Vec3);

impl State {
    pub const ORIGIN: State = State([0.0; 3]);

    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        State([x1, x2, x3])
    }

    pub fn checked(x: Vec3) -> Result<Self> {
        if x.iter().all(|v| v.is_finite()) {
            Ok(State(x))
        } else {
            Err(Error::NonFinite("state"))
        }
    }

    pub fn as_array(&self) -> Vec3 {
        self.0
    }

    pub fn norm(&self) -> f64 {
        vec3::norm(self.0)
    }

    pub fn norm_sq(&self) -> f64 {
        vec3::dot(self.0, self.0)
    }

    pub fn distance(&self, other: &State) -> f64 {
        vec3::norm(vec3::sub(self.0, other.0))
    }
}

impl From<Vec3> for State {
    fn from(x: Vec3) -> Self {
        State(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixRole {
    Skew,
    Symmetric,
}

/// A 3×3 matrix whose role tag is checked when it is built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix3 {
    rows: [[f64; 3]; 3],
    role: MatrixRole,
}

impl Matrix3 {
    /// Fails unless `rows` is exactly skew (`Mᵀ = −M`) or exactly symmetric,
    /// as requested by `role`.
    pub fn new(rows: [[f64; 3]; 3], role: MatrixRole) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                let ok = match role {
                    MatrixRole::Skew => rows[i][j] == -rows[j][i],
                    MatrixRole::Symmetric => rows[i][j] == rows[j][i],
                };
                if !ok {
                    return Err(Error::MatrixRole(match role {
                        MatrixRole::Skew => "skew-symmetric",
                        MatrixRole::Symmetric => "symmetric",
                    }));
                }
            }
        }
        Ok(Self { rows, role })
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        self.rows
    }

    pub fn role(&self) -> MatrixRole {
        self.role
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let r = &self.rows;
        [
            r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
            r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
            r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
        ]
    }

    pub fn transpose_rows(&self) -> [[f64; 3]; 3] {
        let r = &self.rows;
        [
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ]
    }
}

/// Symmetric `n × n` tensor with `g · ∇h₁ = 0`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericMetric {
    n: usize,
    data: Vec<f64>,
}

impl GenericMetric {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n, "vector length must match metric dimension");
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(g, x)| g * x)
                    .sum()
            })
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

pub const MIN_GENERIC_DIM: usize = 2;
pub const MAX_GENERIC_DIM: usize = 16;

/// Builds the symmetric tensor annihilating `grad_h1`:
/// `gᶦᶦ = −Σ_{k≠i} (∂ₖh₁)²` and `gᶦʲ = ∂ᵢh₁ ∂ⱼh₁` for `i ≠ j`.
///
/// The formula is applied at every point, including where the gradient
/// vanishes (the result is then the zero matrix).
pub fn build_metric_generic(grad_h1: &[f64]) -> Result<GenericMetric> {
    let n = grad_h1.len();
    if !(MIN_GENERIC_DIM..=MAX_GENERIC_DIM).contains(&n) {
        return Err(Error::Dimension(n));
    }
    if grad_h1.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = metric_entry(grad_h1, i, j);
        }
    }
    Ok(GenericMetric { n, data })
}

#[inline]
fn metric_entry(grad: &[f64], i: usize, j: usize) -> f64 {
    if i == j {
        let mut s = 0.0;
        for (k, g) in grad.iter().enumerate() {
            if k != i {
                s += g * g;
            }
        }
        -s
    } else {
        grad[i] * grad[j]
    }
}

/// `H(x) = ½(a₁x₁² + a₂x₂² + a₃x₃²) + a x₁ + b x₂ + c x₃`.
pub fn hamiltonian(cfg: &SystemConfig, x: &State) -> f64 {
    let a = cfg.inverse_moments();
    let u = cfg.controls();
    let x = x.0;
    0.5 * (a[0] * x[0] * x[0] + a[1] * x[1] * x[1] + a[2] * x[2] * x[2])
        + u[0] * x[0]
        + u[1] * x[1]
        + u[2] * x[2]
}

/// The same energy in completed-square form, centred on the minimiser.
pub fn hamiltonian_completed_square(cfg: &SystemConfig, x: &State) -> f64 {
    let a = cfg.inverse_moments();
    let u = cfg.controls();
    let x = x.0;
    let sq: f64 = (0..3)
        .map(|i| {
            let s = x[i] + u[i] / a[i];
            a[i] * s * s
        })
        .sum();
    0.5 * sq + cfg.min_energy()
}

/// `C(x) = ½|x|²`.
pub fn casimir(x: &State) -> f64 {
    0.5 * x.norm_sq()
}

/// `m(x) = ∇H(x) = (a₁x₁ + a, a₂x₂ + b, a₃x₃ + c)`.
pub fn m_vector(cfg: &SystemConfig, x: &State) -> Vec3 {
    let a = cfg.inverse_moments();
    let u = cfg.controls();
    let x = x.0;
    [a[0] * x[0] + u[0], a[1] * x[1] + u[1], a[2] * x[2] + u[2]]
}

/// The rigid-body Poisson tensor `Π(x)`, so that `Π(x) v = x × v`.
pub fn poisson_matrix(x: &State) -> Matrix3 {
    let [x1, x2, x3] = x.0;
    Matrix3 {
        rows: [[0.0, -x3, x2], [x3, 0.0, -x1], [-x2, x1, 0.0]],
        role: MatrixRole::Skew,
    }
}

/// The metric `g(x)` built from `∇H`; shares its entry routine with
/// [`build_metric_generic`].
pub fn metric_matrix(cfg: &SystemConfig, x: &State) -> Matrix3 {
    let m = m_vector(cfg, x);
    let mut rows = [[0.0; 3]; 3];
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = metric_entry(&m, i, j);
        }
    }
    Matrix3 {
        rows,
        role: MatrixRole::Symmetric,
    }
}

/// Metric drift `v = g(x) ∇C(x)`, evaluated through the matrix product.
///
/// Equal to `(x × m) × m` in exact arithmetic; the dynamics use that
/// cross-product form, so the two routes check each other.
pub fn drift_v(cfg: &SystemConfig, x: &State) -> Vec3 {
    metric_matrix(cfg, x).mul_vec(x.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn std_cfg() -> SystemConfig {
        presets::standard(0.0)
    }

    fn std0_cfg() -> SystemConfig {
        presets::standard_free(0.0)
    }

    #[test]
    fn config_rejects_bad_ordering() {
        assert!(SystemConfig::new([2.0, 1.0, 3.0], [0.0; 3], 0.0).is_err());
        assert!(SystemConfig::new([0.0, 1.0, 3.0], [0.0; 3], 0.0).is_err());
        assert!(SystemConfig::new([1.0, 1.0, 3.0], [0.0; 3], 0.0).is_err());
        assert!(SystemConfig::new([1.0, 2.0, 3.0], [f64::NAN, 0.0, 0.0], 0.0).is_err());
        assert!(SystemConfig::new([1.0, 2.0, 3.0], [0.0; 3], f64::INFINITY).is_err());
    }

    #[test]
    fn moments_round_trip() {
        let cfg = SystemConfig::from_moments([4.0, 2.0, 1.0], [0.5, 0.0, -1.0], 0.3).unwrap();
        assert_eq!(cfg.inverse_moments(), [0.25, 0.5, 1.0]);
        assert_eq!(cfg.moments(), [4.0, 2.0, 1.0]);
        let err = SystemConfig::from_moments([1.0, 2.0, 3.0], [0.0; 3], 0.0).unwrap_err();
        assert!(err.to_string().contains("I1 > I2 > I3 > 0"));
    }

    #[test]
    fn hamiltonian_examples() {
        let cfg = std_cfg();
        assert_eq!(hamiltonian(&cfg, &State::ORIGIN), 0.0);
        assert_eq!(hamiltonian(&cfg, &State::new(1.0, 0.0, 0.0)), 1.5);
        let x0 = State::new(-1.0, -0.5, -1.0 / 3.0);
        assert!((hamiltonian(&cfg, &x0) + 11.0 / 12.0).abs() < 1e-15);
        assert!((hamiltonian_completed_square(&cfg, &x0) + 11.0 / 12.0).abs() < 1e-15);
        assert!((cfg.min_energy() + 11.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn casimir_examples() {
        assert_eq!(casimir(&State::ORIGIN), 0.0);
        assert_eq!(casimir(&State::new(1.0, 2.0, 2.0)), 4.5);
        assert_eq!(casimir(&State::new(-1.0, -1.0, -1.0)), 1.5);
    }

    #[test]
    fn m_vector_examples() {
        assert_eq!(m_vector(&std0_cfg(), &State::new(1.0, 1.0, 1.0)), [1.0, 2.0, 3.0]);
        assert_eq!(m_vector(&std_cfg(), &State::new(1.0, 1.0, 1.0)), [2.0, 3.0, 4.0]);
        let m = m_vector(&std_cfg(), &std_cfg().energy_minimizer());
        assert!(m.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn poisson_examples() {
        assert_eq!(poisson_matrix(&State::ORIGIN).rows(), [[0.0; 3]; 3]);
        let p = poisson_matrix(&State::new(1.0, 2.0, 3.0));
        assert_eq!(p.rows(), [[0.0, -3.0, 2.0], [3.0, 0.0, -1.0], [-2.0, 1.0, 0.0]]);
        assert_eq!(p.mul_vec([1.0, 2.0, 3.0]), [0.0, 0.0, 0.0]);
        assert!(Matrix3::new(p.rows(), MatrixRole::Skew).is_ok());
    }

    #[test]
    fn matrix_role_enforced() {
        let rows = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert!(Matrix3::new(rows, MatrixRole::Skew).is_err());
        assert!(Matrix3::new(rows, MatrixRole::Symmetric).is_ok());
        let diag = [[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
        assert!(Matrix3::new(diag, MatrixRole::Skew).is_err());
    }

    #[test]
    fn metric_examples() {
        let g = metric_matrix(&std0_cfg(), &State::new(1.0, 1.0, 1.0));
        assert_eq!(
            g.rows(),
            [[-13.0, 2.0, 3.0], [2.0, -10.0, 6.0], [3.0, 6.0, -5.0]]
        );
        assert_eq!(g.mul_vec([1.0, 2.0, 3.0]), [0.0, 0.0, 0.0]);
        let g0 = metric_matrix(&std_cfg(), &std_cfg().energy_minimizer());
        assert!(g0.rows().iter().flatten().all(|v| v.abs() < 1e-30));
    }

    #[test]
    fn drift_examples() {
        assert_eq!(drift_v(&std0_cfg(), &State::new(1.0, 1.0, 1.0)), [-8.0, -2.0, 4.0]);
        assert_eq!(drift_v(&std_cfg(), &State::new(1.0, 1.0, 1.0)), [-11.0, -2.0, 7.0]);
        // e2 at λ = -1 is an equilibrium
        let x = State::new(-0.5, -1.0 / 3.0, -0.25);
        assert!(drift_v(&std_cfg(), &x).iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn generic_builder_examples() {
        let g = build_metric_generic(&[1.0, 2.0, 3.0]).unwrap();
        let m = metric_matrix(&std0_cfg(), &State::new(1.0, 1.0, 1.0));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(g.get(i, j).to_bits(), m.get(i, j).to_bits());
            }
        }
        let z = build_metric_generic(&[0.0; 5]).unwrap();
        assert!((0..5).all(|i| (0..5).all(|j| z.get(i, j) == 0.0)));

        let (p, q) = (1.5, -0.25);
        let g2 = build_metric_generic(&[p, q]).unwrap();
        assert_eq!(
            [g2.get(0, 0), g2.get(0, 1), g2.get(1, 0), g2.get(1, 1)],
            [-q * q, p * q, p * q, -p * p]
        );
        assert_eq!(g2.mul_vec(&[p, q]), vec![0.0, 0.0]);
    }

    #[test]
    fn generic_builder_errors() {
        assert_eq!(build_metric_generic(&[1.0]), Err(Error::Dimension(1)));
        assert_eq!(build_metric_generic(&[1.0; 17]), Err(Error::Dimension(17)));
        assert!(matches!(
            build_metric_generic(&[1.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
    }
}
