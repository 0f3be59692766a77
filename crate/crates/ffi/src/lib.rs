//! C ABI over `revised_rigid_body`.
//!
//! Conventions:
//! - every fallible function returns an [`RrbStatus`] and writes results
//!   through out-pointers;
//! - on failure a message is stored per thread and can be fetched with
//!   [`rrb_last_error_message`];
//! - handles (`RrbSystem`, `RrbTrajectory`, `RrbEquilibria`) are opaque and
//!   released with their `*_free` function, which accepts null;
//! - panics never cross the boundary and are reported as `RRB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use revised_rigid_body::dynamics::{integral_rates, rhs_hp, rhs_revised};
use revised_rigid_body::equilibria::{
    distance_to_equilibria, e2_point, equilibria_on_level, Equilibrium, Family,
};
use revised_rigid_body::integrate::{integrate, Direction, IntegratorSettings, Trajectory};
use revised_rigid_body::model::{casimir, hamiltonian};
use revised_rigid_body::stability::{classify, limit_report, Provenance, VerdictKind};
use revised_rigid_body::{Error, State, SystemConfig};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvariantViolation = 3,
    NotAnEquilibrium = 4,
    PoleProximity = 5,
    EmptyLevel = 6,
    EpsilonNotPositive = 7,
    IntegrationFailure = 8,
    IndexOutOfRange = 9,
    Panic = 10,
}

/// Opaque body configuration.
pub struct RrbSystem(SystemConfig);

/// Opaque integration result.
pub struct RrbTrajectory(Trajectory);

/// Opaque list of equilibria.
pub struct RrbEquilibria(Vec<Equilibrium>);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrbFamily {
    E1 = 1,
    E2 = 2,
    E3 = 3,
    E4 = 4,
    E5 = 5,
}

/// One equilibrium; `parameter` is NaN for the origin.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RrbEquilibrium {
    pub family: RrbFamily,
    pub parameter: f64,
    pub point: [f64; 3],
    pub residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RrbIntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub t_end: f64,
    /// 0 forward, 1 backward.
    pub backward: i32,
    pub max_steps: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrbVerdictKind {
    LyapunovStable = 0,
    Unstable = 1,
    Undetermined = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrbProvenance {
    NormDecay = 0,
    EnergyMinimum = 1,
    SmallerNormWitness = 2,
    InteriorInstability = 3,
    LyapunovQuadratic = 4,
    EmpiricalOnly = 5,
    NotCovered = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RrbVerdict {
    pub kind: RrbVerdictKind,
    pub provenance: RrbProvenance,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RrbLimitReport {
    pub x_m: [f64; 3],
    pub x_big_m: [f64; 3],
    pub d_forward: f64,
    pub d_backward: f64,
    pub norms_monotone: bool,
    pub ordering_holds: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(RrbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvariantViolation(_) | Error::Parse { .. } => RrbStatus::InvariantViolation,
            Error::NotAnEquilibrium { .. } | Error::FamilyNotApplicable { .. } => {
                RrbStatus::NotAnEquilibrium
            }
            Error::PoleProximity { .. } => RrbStatus::PoleProximity,
            Error::EmptyLevel { .. } => RrbStatus::EmptyLevel,
            Error::EpsilonNotPositive(_) => RrbStatus::EpsilonNotPositive,
            Error::Integration(_) => RrbStatus::IntegrationFailure,
            _ => RrbStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RrbStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics to a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> RrbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            RrbStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            RrbStatus::Panic
        }
    }
}

unsafe fn read3(p: *const f64, what: &str) -> Result<[f64; 3], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(*(p as *const [f64; 3]))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn config_of<'a>(p: *const RrbSystem) -> Result<&'a SystemConfig, Failure> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null("system"))
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rrb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates a body from inverse moments `a[3]` (`0 < a1 < a2 < a3`), gains
/// `u[3]` and `epsilon`.
///
/// # Safety
/// `a` and `u` must point to three doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rrb_system_new(
    a: *const f64,
    u: *const f64,
    epsilon: f64,
    out_system: *mut *mut RrbSystem,
) -> RrbStatus {
    guard(|| {
        let slot = out(out_system, "out_system")?;
        let cfg = SystemConfig::new(read3(a, "a")?, read3(u, "u")?, epsilon)?;
        *slot = Box::into_raw(Box::new(RrbSystem(cfg)));
        Ok(())
    })
}

/// Creates a body from principal moments `I1 > I2 > I3 > 0`.
///
/// # Safety
/// As [`rrb_system_new`].
#[no_mangle]
pub unsafe extern "C" fn rrb_system_from_moments(
    moments: *const f64,
    u: *const f64,
    epsilon: f64,
    out_system: *mut *mut RrbSystem,
) -> RrbStatus {
    guard(|| {
        let slot = out(out_system, "out_system")?;
        let cfg = SystemConfig::from_moments(read3(moments, "moments")?, read3(u, "u")?, epsilon)?;
        *slot = Box::into_raw(Box::new(RrbSystem(cfg)));
        Ok(())
    })
}

/// # Safety
/// `system` must be null or a handle from `rrb_system_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rrb_system_free(system: *mut RrbSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// # Safety
/// `system` must be a live handle, `x` three doubles, `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn rrb_hamiltonian(
    system: *const RrbSystem,
    x: *const f64,
    out_value: *mut f64,
) -> RrbStatus {
    guard(|| {
        let cfg = config_of(system)?;
        *out(out_value, "out_value")? = hamiltonian(cfg, &State(read3(x, "x")?));
        Ok(())
    })
}

/// # Safety
/// `x` three doubles, `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn rrb_casimir(x: *const f64, out_value: *mut f64) -> RrbStatus {
    guard(|| {
        *out(out_value, "out_value")? = casimir(&State(read3(x, "x")?));
        Ok(())
    })
}

/// Evaluates the revised field (`revised != 0`) or the conservative one.
///
/// # Safety
/// `x` three doubles, `out_xdot` three writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rrb_rhs(
    system: *const RrbSystem,
    revised: i32,
    x: *const f64,
    out_xdot: *mut f64,
) -> RrbStatus {
    guard(|| {
        let cfg = config_of(system)?;
        let x = State(read3(x, "x")?);
        let v = if revised != 0 { rhs_revised(cfg, &x) } else { rhs_hp(cfg, &x) };
        *out(out_xdot as *mut [f64; 3], "out_xdot")? = v;
        Ok(())
    })
}

/// `dH/dt` and `dC/dt` along the revised field.
///
/// # Safety
/// `x` three doubles; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn rrb_integral_rates(
    system: *const RrbSystem,
    x: *const f64,
    out_dh_dt: *mut f64,
    out_dc_dt: *mut f64,
) -> RrbStatus {
    guard(|| {
        let r = integral_rates(config_of(system)?, &State(read3(x, "x")?));
        *out(out_dh_dt, "out_dh_dt")? = r.dh_dt;
        *out(out_dc_dt, "out_dc_dt")? = r.dc_dt;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn rrb_integrator_settings_default() -> RrbIntegratorSettings {
    let d = IntegratorSettings::default();
    RrbIntegratorSettings {
        rtol: d.rtol,
        atol: d.atol,
        h_init: d.h_init,
        h_max: d.h_max,
        t_end: d.t_end,
        backward: 0,
        max_steps: d.max_steps,
    }
}

/// Integrates the revised field from `x0`.
///
/// # Safety
/// `settings` must be readable; `out_trajectory` writable.
#[no_mangle]
pub unsafe extern "C" fn rrb_integrate(
    system: *const RrbSystem,
    x0: *const f64,
    settings: *const RrbIntegratorSettings,
    out_trajectory: *mut *mut RrbTrajectory,
) -> RrbStatus {
    guard(|| {
        let cfg = config_of(system)?;
        let s = settings.as_ref().ok_or_else(|| null("settings"))?;
        let slot = out(out_trajectory, "out_trajectory")?;
        let settings = IntegratorSettings {
            rtol: s.rtol,
            atol: s.atol,
            h_init: s.h_init,
            h_max: s.h_max,
            t_end: s.t_end,
            direction: if s.backward != 0 { Direction::Backward } else { Direction::Forward },
            max_steps: s.max_steps,
        };
        let field = revised_rigid_body::dynamics::VectorField::revised(*cfg);
        let traj = integrate(&field, &State(read3(x0, "x0")?), &settings)?;
        *slot = Box::into_raw(Box::new(RrbTrajectory(traj)));
        Ok(())
    })
}

/// Number of samples; 0 for null.
///
/// # Safety
/// `trajectory` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn rrb_trajectory_len(trajectory: *const RrbTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.0.len())
}

/// Sample `index`: time, state, `H`, `C` and the dissipation residual.
/// Any output pointer may be null to skip it.
///
/// # Safety
/// `trajectory` must be live; non-null outputs writable (`out_x` three doubles).
#[no_mangle]
pub unsafe extern "C" fn rrb_trajectory_sample(
    trajectory: *const RrbTrajectory,
    index: usize,
    out_t: *mut f64,
    out_x: *mut f64,
    out_h: *mut f64,
    out_c: *mut f64,
    out_diss: *mut f64,
) -> RrbStatus {
    guard(|| {
        let t = &trajectory.as_ref().ok_or_else(|| null("trajectory"))?.0;
        if index >= t.len() {
            return Err(Failure(
                RrbStatus::IndexOutOfRange,
                format!("index {index} >= length {}", t.len()),
            ));
        }
        if let Some(p) = out_t.as_mut() {
            *p = t.times()[index];
        }
        if let Some(p) = (out_x as *mut [f64; 3]).as_mut() {
            *p = t.states()[index].0;
        }
        if let Some(p) = out_h.as_mut() {
            *p = t.h_series()[index];
        }
        if let Some(p) = out_c.as_mut() {
            *p = t.c_series()[index];
        }
        if let Some(p) = out_diss.as_mut() {
            *p = t.diss_residual()[index];
        }
        Ok(())
    })
}

/// # Safety
/// `trajectory` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn rrb_trajectory_free(trajectory: *mut RrbTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

fn to_c(eq: &Equilibrium) -> RrbEquilibrium {
    let (family, parameter) = match eq.family() {
        Family::E1 => (RrbFamily::E1, f64::NAN),
        Family::E2 { lambda } => (RrbFamily::E2, lambda),
        Family::E3 { alpha } => (RrbFamily::E3, alpha),
        Family::E4 { alpha } => (RrbFamily::E4, alpha),
        Family::E5 { alpha } => (RrbFamily::E5, alpha),
    };
    RrbEquilibrium {
        family,
        parameter,
        point: eq.point().0,
        residual: eq.residual(),
    }
}

fn from_c(cfg: &SystemConfig, eq: &RrbEquilibrium) -> Result<Equilibrium, Failure> {
    let p = eq.parameter;
    let family = match eq.family {
        RrbFamily::E1 => Family::E1,
        RrbFamily::E2 => Family::E2 { lambda: p },
        RrbFamily::E3 => Family::E3 { alpha: p },
        RrbFamily::E4 => Family::E4 { alpha: p },
        RrbFamily::E5 => Family::E5 { alpha: p },
    };
    Ok(Equilibrium::new(cfg, State(eq.point), family)?)
}

/// All equilibria with `H = level`.
///
/// # Safety
/// `out_equilibria` writable.
#[no_mangle]
pub unsafe extern "C" fn rrb_equilibria_on_level(
    system: *const RrbSystem,
    level: f64,
    out_equilibria: *mut *mut RrbEquilibria,
) -> RrbStatus {
    guard(|| {
        let cfg = config_of(system)?;
        let slot = out(out_equilibria, "out_equilibria")?;
        let list = equilibria_on_level(cfg, level)?;
        *slot = Box::into_raw(Box::new(RrbEquilibria(list)));
        Ok(())
    })
}

/// # Safety
/// `equilibria` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn rrb_equilibria_len(equilibria: *const RrbEquilibria) -> usize {
    equilibria.as_ref().map_or(0, |e| e.0.len())
}

/// # Safety
/// `equilibria` live; `out_equilibrium` writable.
#[no_mangle]
pub unsafe extern "C" fn rrb_equilibria_get(
    equilibria: *const RrbEquilibria,
    index: usize,
    out_equilibrium: *mut RrbEquilibrium,
) -> RrbStatus {
    guard(|| {
        let list = &equilibria.as_ref().ok_or_else(|| null("equilibria"))?.0;
        let eq = list.get(index).ok_or_else(|| {
            Failure(
                RrbStatus::IndexOutOfRange,
                format!("index {index} >= length {}", list.len()),
            )
        })?;
        *out(out_equilibrium, "out_equilibrium")? = to_c(eq);
        Ok(())
    })
}

/// # Safety
/// `equilibria` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn rrb_equilibria_free(equilibria: *mut RrbEquilibria) {
    if !equilibria.is_null() {
        drop(Box::from_raw(equilibria));
    }
}

/// The `E2` member at `lambda`.
///
/// # Safety
/// `out_equilibrium` writable.
#[no_mangle]
pub unsafe extern "C" fn rrb_e2_point(
    system: *const RrbSystem,
    lambda: f64,
    out_equilibrium: *mut RrbEquilibrium,
) -> RrbStatus {
    guard(|| {
        let eq = e2_point(config_of(system)?, lambda)?;
        *out(out_equilibrium, "out_equilibrium")? = to_c(&eq);
        Ok(())
    })
}

/// Distance from `x` to the equilibrium set.
///
/// # Safety
/// `x` three doubles; `out_distance` writable.
#[no_mangle]
pub unsafe extern "C" fn rrb_distance_to_equilibria(
    system: *const RrbSystem,
    x: *const f64,
    out_distance: *mut f64,
) -> RrbStatus {
    guard(|| {
        let d = distance_to_equilibria(config_of(system)?, &State(read3(x, "x")?));
        *out(out_distance, "out_distance")? = d;
        Ok(())
    })
}

/// Theorem-backed classification (requires `epsilon > 0`).
///
/// # Safety
/// `equilibrium` readable; `out_verdict` writable.
#[no_mangle]
pub unsafe extern "C" fn rrb_classify(
    system: *const RrbSystem,
    equilibrium: *const RrbEquilibrium,
    out_verdict: *mut RrbVerdict,
) -> RrbStatus {
    guard(|| {
        let cfg = config_of(system)?;
        let eq = from_c(cfg, equilibrium.as_ref().ok_or_else(|| null("equilibrium"))?)?;
        let v = classify(cfg, &eq)?;
        *out(out_verdict, "out_verdict")? = RrbVerdict {
            kind: match v.kind {
                VerdictKind::LyapunovStable => RrbVerdictKind::LyapunovStable,
                VerdictKind::Unstable => RrbVerdictKind::Unstable,
                VerdictKind::Undetermined => RrbVerdictKind::Undetermined,
            },
            provenance: match v.provenance {
                Provenance::NormDecay => RrbProvenance::NormDecay,
                Provenance::EnergyMinimum => RrbProvenance::EnergyMinimum,
                Provenance::SmallerNormWitness => RrbProvenance::SmallerNormWitness,
                Provenance::InteriorInstability => RrbProvenance::InteriorInstability,
                Provenance::LyapunovQuadratic => RrbProvenance::LyapunovQuadratic,
                Provenance::EmpiricalOnly => RrbProvenance::EmpiricalOnly,
                Provenance::NotCovered => RrbProvenance::NotCovered,
            },
        };
        Ok(())
    })
}

/// Forward and backward limit estimates over `horizon` with default tolerances.
///
/// # Safety
/// `x0` three doubles; `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn rrb_limit_report(
    system: *const RrbSystem,
    x0: *const f64,
    horizon: f64,
    out_report: *mut RrbLimitReport,
) -> RrbStatus {
    guard(|| {
        let r = limit_report(config_of(system)?, &State(read3(x0, "x0")?), horizon)?;
        *out(out_report, "out_report")? = RrbLimitReport {
            x_m: r.x_m.0,
            x_big_m: r.x_big_m.0,
            d_forward: r.d_forward,
            d_backward: r.d_backward,
            norms_monotone: r.norms_monotone,
            ordering_holds: r.ordering_holds,
        };
        Ok(())
    })
}
