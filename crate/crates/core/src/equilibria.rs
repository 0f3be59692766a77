//! Equilibrium families, equilibria on an energy level and the distance to
//! the equilibrium set.
//!
//! Both flows share the same equilibria, the solutions of `x × m(x) = 0`:
//!
//! * `E1`: the origin;
//! * `E2(λ)`: `(a/(λ−a₁), b/(λ−a₂), c/(λ−a₃))`, for which `m = λ·x`;
//! * `E3(α)`, `E4(α)`, `E5(α)`: lines through the `λ → a₁, a₂, a₃` limits of
//!   `E2`, parallel to the first, second and third axis, present when the
//!   matching gain `a`, `b` or `c` vanishes.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{hamiltonian, m_vector, State, SystemConfig};
use crate::roots;
use crate::vec3::{self, Vec3};

/// Minimum distance between `λ` and a pole `a_i` for `e2_point`.
pub const POLE_GUARD: f64 = 1e-9;
/// Roots of the level polynomial closer than this to a pole are discarded.
pub const ROOT_POLE_GUARD: f64 = 1e-7;
/// Residual bound accepted by [`Equilibrium::new`], relative to `1 + |x||m|`.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Family {
    E1,
    E2 { lambda: f64 },
    E3 { alpha: f64 },
    E4 { alpha: f64 },
    E5 { alpha: f64 },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::E1 => "E1",
            Family::E2 { .. } => "E2",
            Family::E3 { .. } => "E3",
            Family::E4 { .. } => "E4",
            Family::E5 { .. } => "E5",
        }
    }

    /// `λ` for `E2`, `α` for the line families, `None` for `E1`.
    pub fn parameter(&self) -> Option<f64> {
        match *self {
            Family::E1 => None,
            Family::E2 { lambda } => Some(lambda),
            Family::E3 { alpha } | Family::E4 { alpha } | Family::E5 { alpha } => Some(alpha),
        }
    }
}

/// The three line families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineFamily {
    E3,
    E4,
    E5,
}

impl LineFamily {
    pub const ALL: [LineFamily; 3] = [LineFamily::E3, LineFamily::E4, LineFamily::E5];

    /// Coordinate along which the line runs; also the index of the gain that
    /// must vanish.
    pub fn axis(self) -> usize {
        match self {
            LineFamily::E3 => 0,
            LineFamily::E4 => 1,
            LineFamily::E5 => 2,
        }
    }

    fn family(self, alpha: f64) -> Family {
        match self {
            LineFamily::E3 => Family::E3 { alpha },
            LineFamily::E4 => Family::E4 { alpha },
            LineFamily::E5 => Family::E5 { alpha },
        }
    }

    fn name(self) -> &'static str {
        match self {
            LineFamily::E3 => "E3",
            LineFamily::E4 => "E4",
            LineFamily::E5 => "E5",
        }
    }

    pub fn applies_to(self, cfg: &SystemConfig) -> bool {
        cfg.controls()[self.axis()] == 0.0
    }

    /// Point of the line with zero coordinate along its axis.
    fn base(self, cfg: &SystemConfig) -> Vec3 {
        let a = cfg.inverse_moments();
        let u = cfg.controls();
        let k = self.axis();
        let mut p = [0.0; 3];
        for i in 0..3 {
            if i != k {
                p[i] = u[i] / (a[k] - a[i]);
            }
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    point: State,
    family: Family,
    residual: f64,
}

impl Equilibrium {
    /// Validates that `point` solves `x × m(x) = 0` within
    /// `1e-9·(1 + |x||m|)` and that a line family's gain condition holds.
    pub fn new(cfg: &SystemConfig, point: State, family: Family) -> Result<Self> {
        let line = match family {
            Family::E3 { .. } => Some(LineFamily::E3),
            Family::E4 { .. } => Some(LineFamily::E4),
            Family::E5 { .. } => Some(LineFamily::E5),
            _ => None,
        };
        if let Some(line) = line {
            if !line.applies_to(cfg) {
                return Err(family_not_applicable(line));
            }
        }
        let m = m_vector(cfg, &point);
        let residual = vec3::norm(vec3::cross(point.0, m));
        if !(residual <= EQUILIBRIUM_TOL * (1.0 + point.norm() * vec3::norm(m))) {
            return Err(Error::NotAnEquilibrium { residual });
        }
        Ok(Self {
            point,
            family,
            residual,
        })
    }

    pub fn origin(cfg: &SystemConfig) -> Self {
        Self::new(cfg, State::ORIGIN, Family::E1).expect("origin is always an equilibrium")
    }

    pub fn point(&self) -> State {
        self.point
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }
}

fn family_not_applicable(line: LineFamily) -> Error {
    Error::FamilyNotApplicable {
        family: line.name(),
        control: ["a", "b", "c"][line.axis()],
    }
}

fn check_pole(cfg: &SystemConfig, lambda: f64, guard: f64) -> Result<()> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda"));
    }
    let near = cfg
        .inverse_moments()
        .iter()
        .any(|&a| !((lambda - a).abs() > guard));
    if near {
        return Err(Error::PoleProximity {
            lambda,
            tolerance: guard,
        });
    }
    Ok(())
}

#[inline]
fn e2_coords(cfg: &SystemConfig, lambda: f64) -> Vec3 {
    let a = cfg.inverse_moments();
    let u = cfg.controls();
    [
        u[0] / (lambda - a[0]),
        u[1] / (lambda - a[1]),
        u[2] / (lambda - a[2]),
    ]
}

/// The `E2` member at `λ`.
pub fn e2_point(cfg: &SystemConfig, lambda: f64) -> Result<Equilibrium> {
    check_pole(cfg, lambda, POLE_GUARD)?;
    Equilibrium::new(cfg, State(e2_coords(cfg, lambda)), Family::E2 { lambda })
}

/// The member at `alpha` of a line family; requires the matching gain to be zero.
pub fn line_family_point(cfg: &SystemConfig, family: LineFamily, alpha: f64) -> Result<Equilibrium> {
    if !family.applies_to(cfg) {
        return Err(family_not_applicable(family));
    }
    if !alpha.is_finite() {
        return Err(Error::NonFinite("alpha"));
    }
    let mut p = family.base(cfg);
    p[family.axis()] = alpha;
    Equilibrium::new(cfg, State(p), family.family(alpha))
}

/// `|x × m(x)| ≤ tol·(1 + |x||m|)`.
pub fn is_equilibrium(cfg: &SystemConfig, x: &State, tol: f64) -> bool {
    let m = m_vector(cfg, x);
    vec3::norm(vec3::cross(x.0, m)) <= tol * (1.0 + x.norm() * vec3::norm(m))
}

/// `g(λ) = |e₂(λ)|²`.
pub fn scalar_g(cfg: &SystemConfig, lambda: f64) -> Result<f64> {
    check_pole(cfg, lambda, POLE_GUARD)?;
    let p = e2_coords(cfg, lambda);
    Ok(vec3::dot(p, p))
}

#[inline]
fn energy_along_e2(cfg: &SystemConfig, sigma: f64) -> f64 {
    let a = cfg.inverse_moments();
    let u = cfg.controls();
    let mut s = 0.0;
    for i in 0..3 {
        let d = sigma - a[i];
        s += u[i] * u[i] / (a[i] * d * d);
    }
    0.5 * sigma * sigma * s + cfg.min_energy()
}

/// `dh/dσ = −σ Σ uᵢ² / (σ − aᵢ)³`
#[inline]
fn energy_along_e2_derivative(cfg: &SystemConfig, sigma: f64) -> f64 {
    let a = cfg.inverse_moments();
    let u = cfg.controls();
    let mut s = 0.0;
    for i in 0..3 {
        let d = sigma - a[i];
        s += u[i] * u[i] / (d * d * d);
    }
    -sigma * s
}

/// `h(σ) = H(e₂(σ))` in the completed-square form
/// `(σ²/2) Σ uᵢ²/(aᵢ(σ−aᵢ)²) − ½ Σ uᵢ²/aᵢ`.
pub fn scalar_h(cfg: &SystemConfig, sigma: f64) -> Result<f64> {
    check_pole(cfg, sigma, POLE_GUARD)?;
    Ok(energy_along_e2(cfg, sigma))
}

/// `p(λ) = [h(λ) − k]·Π(λ − aᵢ)²`, degree at most 6.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelPolynomial {
    coeffs: [f64; 7],
    level: f64,
}

impl LevelPolynomial {
    /// Ascending coefficients `c₀ … c₆`.
    pub fn coefficients(&self) -> &[f64; 7] {
        &self.coeffs
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        roots::eval(&self.coeffs, lambda)
    }

    pub fn degree(&self) -> Option<usize> {
        roots::degree(&self.coeffs)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }
}

/// Numerator of `h(λ) − k` over `Π_{i∈poles}(λ − aᵢ)²`.
///
/// Each term of `h` reduces to `uᵢ²(λ − aᵢ/2)/(λ − aᵢ)²`, so the numerator is
/// `Σᵢ uᵢ²(λ − aᵢ/2) Π_{j≠i}(λ − aⱼ)² − k Π_j(λ − aⱼ)²`.
fn level_numerator(cfg: &SystemConfig, k: f64, poles: &[usize]) -> Vec<f64> {
    let a = cfg.inverse_moments();
    let u = cfg.controls();
    let square = |i: usize| roots::mul(&[-a[i], 1.0], &[-a[i], 1.0]);
    let product_except = |skip: Option<usize>| {
        poles
            .iter()
            .filter(|&&j| Some(j) != skip)
            .fold(vec![1.0], |acc, &j| roots::mul(&acc, &square(j)))
    };
    let mut p = roots::scale(-k, &product_except(None));
    for &i in poles {
        let lin = [-0.5 * a[i] * u[i] * u[i], u[i] * u[i]];
        roots::add_assign(&mut p, &roots::mul(&lin, &product_except(Some(i))));
    }
    p
}

pub fn level_polynomial(cfg: &SystemConfig, k: f64) -> LevelPolynomial {
    let p = level_numerator(cfg, k, &[0, 1, 2]);
    let mut coeffs = [0.0; 7];
    coeffs[..p.len()].copy_from_slice(&p);
    LevelPolynomial { coeffs, level: k }
}

/// Safeguarded Newton iteration on `h(λ) − k`; returns the iterate with the
/// smallest residual.
fn polish_root(cfg: &SystemConfig, k: f64, start: f64) -> f64 {
    let f = |l: f64| energy_along_e2(cfg, l) - k;
    let mut x = start;
    let mut fx = f(x);
    for _ in 0..100 {
        let d = energy_along_e2_derivative(cfg, x);
        if d == 0.0 || !fx.is_finite() {
            break;
        }
        let mut step = fx / d;
        let mut accepted = false;
        for _ in 0..30 {
            let cand = x - step;
            let fc = f(cand);
            if fc.is_finite() && fc.abs() < fx.abs() {
                x = cand;
                fx = fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || step.abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Real parameters `λ` with `h(λ) = k`, sorted ascending.
fn e2_parameters_on_level(cfg: &SystemConfig, k: f64) -> Vec<f64> {
    let u = cfg.controls();
    let poles: Vec<usize> = (0..3).filter(|&i| u[i] != 0.0).collect();
    if poles.is_empty() {
        return Vec::new();
    }
    // Poles whose gain vanishes cancel out of h(λ), so they are divided out
    // up front instead of appearing as spurious double roots.
    let p = level_numerator(cfg, k, &poles);
    let mut starts = Vec::new();
    for (re, im) in roots::complex_roots(&p) {
        if im.abs() <= 1e-9 * (1.0 + re.abs()) {
            starts.push(re);
        } else if im.abs() <= 1e-4 * (1.0 + re.abs()) {
            // a nearly double real root may surface as a close complex pair
            starts.push(re - im.abs());
            starts.push(re + im.abs());
        }
    }
    let tol = 1e-9 * (1.0 + k.abs());
    let mut found: Vec<f64> = Vec::new();
    for s in starts {
        let l = polish_root(cfg, k, s);
        if check_pole(cfg, l, ROOT_POLE_GUARD).is_err() {
            continue;
        }
        if !((energy_along_e2(cfg, l) - k).abs() <= tol) {
            continue;
        }
        if found.iter().all(|&f| (f - l).abs() > 1e-9 * (1.0 + l.abs())) {
            found.push(l);
        }
    }
    found.sort_by(f64::total_cmp);
    found
}

/// Points of a line family on the level `H = k` (at most two).
fn line_points_on_level(cfg: &SystemConfig, line: LineFamily, k: f64) -> Vec<f64> {
    let axis = line.axis();
    let a = cfg.inverse_moments()[axis];
    let u = cfg.controls()[axis];
    let base = State(line.base(cfg));
    // H(base + α e_axis) = ½aα² + uα + H(base)
    let c0 = hamiltonian(cfg, &base) - k;
    let disc = u * u - 2.0 * a * c0;
    let scale = 1.0 + u * u + 2.0 * a * c0.abs();
    if disc < -1e-12 * scale {
        Vec::new()
    } else if disc <= 1e-12 * scale {
        vec![-u / a]
    } else {
        let sq = disc.sqrt();
        // stable quadratic formula
        let q = -(u + sq.copysign(u));
        let (r1, r2) = if q != 0.0 {
            (q / a, 2.0 * c0 / q)
        } else {
            (sq / a, -sq / a)
        };
        let mut v = vec![r1, r2];
        v.sort_by(f64::total_cmp);
        v
    }
}

/// All equilibria on the ellipsoid `H = k`.
///
/// At the minimum level the ellipsoid degenerates to the energy minimiser.
/// For the free body the `E2` branch collapses onto the origin and only the
/// axis points (and the origin at `k = 0`) remain.
pub fn equilibria_on_level(cfg: &SystemConfig, k: f64) -> Result<Vec<Equilibrium>> {
    if !k.is_finite() {
        return Err(Error::NonFinite("level"));
    }
    let minimum = cfg.min_energy();
    let tol_k = 1e-12 * (1.0 + k.abs());
    if k < minimum - tol_k {
        return Err(Error::EmptyLevel { level: k, minimum });
    }
    if k <= minimum + tol_k {
        let eq = if cfg.is_free_body() {
            Equilibrium::origin(cfg)
        } else {
            Equilibrium::new(cfg, cfg.energy_minimizer(), Family::E2 { lambda: 0.0 })?
        };
        return Ok(vec![eq]);
    }

    let mut candidates = Vec::new();
    if k.abs() <= tol_k {
        candidates.push(Equilibrium::origin(cfg));
    }
    if !cfg.is_free_body() {
        for lambda in e2_parameters_on_level(cfg, k) {
            let p = State(e2_coords(cfg, lambda));
            candidates.push(Equilibrium::new(cfg, p, Family::E2 { lambda })?);
        }
    }
    for line in LineFamily::ALL {
        if line.applies_to(cfg) {
            for alpha in line_points_on_level(cfg, line, k) {
                candidates.push(line_family_point(cfg, line, alpha)?);
            }
        }
    }

    let mut out: Vec<Equilibrium> = Vec::new();
    for eq in candidates {
        let x = eq.point();
        let dup = out
            .iter()
            .any(|e| e.point().distance(&x) <= 1e-9 * (1.0 + x.norm()));
        if !dup {
            out.push(eq);
        }
    }
    Ok(out)
}

const DISTANCE_GRID: usize = 2001;
const DISTANCE_POLE_EXCLUSION: f64 = 1e-6;

/// Distance from `x` to the set of all equilibria.
///
/// The `E2` curve is searched on a grid uniform in `t = atan(λ)`, with every
/// grid-local minimum refined by golden-section search to a width of `1e-10`
/// in `t`. Line families use the exact point-to-line distance.
pub fn distance_to_equilibria(cfg: &SystemConfig, x: &State) -> f64 {
    let mut best = x.norm();

    for line in LineFamily::ALL {
        if line.applies_to(cfg) {
            let base = line.base(cfg);
            let d: f64 = (0..3)
                .filter(|&i| i != line.axis())
                .map(|i| (x.0[i] - base[i]).powi(2))
                .sum::<f64>()
                .sqrt();
            best = best.min(d);
        }
    }

    if cfg.is_free_body() {
        return best;
    }

    let poles = cfg.inverse_moments();
    let dist_at = |t: f64| -> f64 {
        let lambda = t.tan();
        if poles
            .iter()
            .any(|&a| (lambda - a).abs() < DISTANCE_POLE_EXCLUSION)
        {
            return f64::INFINITY;
        }
        vec3::norm(vec3::sub(x.0, e2_coords(cfg, lambda)))
    };

    let step = std::f64::consts::PI / (DISTANCE_GRID + 1) as f64;
    let ts: Vec<f64> = (1..=DISTANCE_GRID).map(|i| -FRAC_PI_2 + i as f64 * step).collect();
    let ds: Vec<f64> = ts.iter().map(|&t| dist_at(t)).collect();
    for i in 0..DISTANCE_GRID {
        let left = if i == 0 { f64::INFINITY } else { ds[i - 1] };
        let right = if i + 1 == DISTANCE_GRID { f64::INFINITY } else { ds[i + 1] };
        if ds[i].is_finite() && ds[i] <= left && ds[i] <= right {
            let lo = (ts[i] - step).max(-FRAC_PI_2 + 1e-12);
            let hi = (ts[i] + step).min(FRAC_PI_2 - 1e-12);
            best = best.min(golden_section_min(&dist_at, lo, hi, 1e-10).min(ds[i]));
        }
    }
    best
}

fn golden_section_min<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > width {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    fc.min(fd)
}
