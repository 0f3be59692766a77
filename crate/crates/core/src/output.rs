//! CSV trajectories and versioned JSON reports.
//!
//! CSV floats use C's `%.17g` layout, which round-trips every double
//! (`0.1` prints as `0.10000000000000001`). JSON numbers use the shortest
//! round-trip form, and every report opens with `"schema": 1`.

use std::io::{self, Write};

use serde::Serialize;

use crate::equilibria::Equilibrium;
use crate::error::Error;
use crate::integrate::Trajectory;
use crate::model::{hamiltonian, State, SystemConfig};
use crate::stability::{LimitReport, ProbeOutcome, StabilityVerdict};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "t,x1,x2,x3,H,C,diss_residual";

/// `printf("%.17g", x)`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for i in 0..traj.len() {
        let [x1, x2, x3] = traj.states()[i].0;
        let row = [
            traj.times()[i],
            x1,
            x2,
            x3,
            traj.h_series()[i],
            traj.c_series()[i],
            traj.diss_residual()[i],
        ];
        let cells: Vec<String> = row.iter().map(|&v| format_g17(v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_trajectory_csv(traj, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumEntry {
    pub family: &'static str,
    pub parameter: Option<f64>,
    pub point: State,
    pub residual: f64,
    pub norm: f64,
    pub energy: f64,
}

impl EquilibriumEntry {
    pub fn new(cfg: &SystemConfig, eq: &Equilibrium) -> Self {
        Self {
            family: eq.family().tag(),
            parameter: eq.family().parameter(),
            point: eq.point(),
            residual: eq.residual(),
            norm: eq.point().norm(),
            energy: hamiltonian(cfg, &eq.point()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriaReport {
    pub schema: u32,
    pub level: f64,
    pub count: usize,
    pub equilibria: Vec<EquilibriumEntry>,
}

impl EquilibriaReport {
    pub fn new(cfg: &SystemConfig, level: f64, eqs: &[Equilibrium]) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            level,
            count: eqs.len(),
            equilibria: eqs.iter().map(|e| EquilibriumEntry::new(cfg, e)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeEntry {
    pub outcome: Option<ProbeOutcome>,
    pub max_excursion: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationRow {
    pub lambda: f64,
    pub point: Option<State>,
    pub verdict: Option<StabilityVerdict>,
    pub probe: Option<ProbeEntry>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub schema: u32,
    pub epsilon: f64,
    pub rows: Vec<ClassificationRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitsReport<'a> {
    pub schema: u32,
    pub epsilon: f64,
    #[serde(flatten)]
    pub report: &'a LimitReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub schema: u32,
    pub error: ErrorBody,
}

impl ErrorReport {
    pub fn new(kind: &'static str, message: impl Into<String>, exit_code: i32) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            error: ErrorBody {
                kind,
                message: message.into(),
                exit_code,
            },
        }
    }

    pub fn from_error(err: &Error, exit_code: i32) -> Self {
        Self::new(error_kind(err), err.to_string(), exit_code)
    }
}

/// Stable machine-readable name of an error variant.
pub fn error_kind(err: &Error) -> &'static str {
    use crate::error::IntegrationError as I;
    match err {
        Error::InvariantViolation(_) => "InvariantViolation",
        Error::Parse { .. } => "ParseError",
        Error::Io(_) => "IoError",
        Error::NonFinite(_) => "NonFinite",
        Error::MatrixRole(_) => "MatrixRole",
        Error::Dimension(_) => "Dimension",
        Error::PoleProximity { .. } => "PoleProximity",
        Error::FamilyNotApplicable { .. } => "FamilyNotApplicable",
        Error::NotAnEquilibrium { .. } => "NotAnEquilibrium",
        Error::EmptyLevel { .. } => "EmptyLevel",
        Error::EpsilonNotPositive(_) => "EpsilonNotPositive",
        Error::LambdaNotNegative(_) => "LambdaNotNegative",
        Error::Inconclusive { .. } => "Inconclusive",
        Error::InvalidSettings(_) => "InvalidSettings",
        Error::InvalidArgument(_) => "InvalidArgument",
        Error::Integration(I::StepFailure { .. }) => "StepFailure",
        Error::Integration(I::StepSizeUnderflow { .. }) => "StepSizeUnderflow",
        Error::Integration(I::MaxStepsExceeded { .. }) => "MaxStepsExceeded",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::VectorField;
    use crate::equilibria::e2_point;
    use crate::integrate::{integrate, IntegratorSettings};
    use crate::presets::standard;

    #[test]
    fn g17_matches_printf() {
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (100.0, "100"),
            (1e-10, "1e-10"),
            (1.0 / 3.0, "0.33333333333333331"),
            (123456789012345678.0, "1.2345678901234568e+17"),
            (1e16, "10000000000000000"),
            (0.0001, "0.0001"),
            (0.00001, "1.0000000000000001e-05"),
            (f64::MIN_POSITIVE, "2.2250738585072014e-308"),
            (-0.0, "-0"),
            (1e17, "1e+17"),
        ];
        for (x, want) in cases {
            let got = format_g17(x);
            assert_eq!(got, want, "{x:e}");
        }
    }

    #[test]
    fn g17_round_trips() {
        for x in [0.1, 2.0f64.sqrt(), -1e-300, 6.02214076e23, 5e-324, f64::MAX] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_layout() {
        let cfg = standard(0.5);
        let field = VectorField::revised(cfg);
        let traj = integrate(&field, &State::new(1.0, 1.0, 1.0), &IntegratorSettings::with_horizon(1e-300)).unwrap();
        let csv = trajectory_csv(&traj);
        let lines: Vec<&str> = csv.split('\n').collect();
        assert_eq!(lines.len(), 3, "header, one row, trailing empty");
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("0,1,1,1,"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn equilibrium_json_schema() {
        let cfg = standard(0.5);
        let eq = e2_point(&cfg, -1.0).unwrap();
        let json = to_json(&EquilibriaReport::new(&cfg, -0.75, &[eq]));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["equilibria"][0]["family"], "E2");
        assert_eq!(v["equilibria"][0]["parameter"], -1.0);
        assert!(v["equilibria"][0]["residual"].is_number());
        assert!(json.starts_with("{\n  \"schema\": 1,"));
    }

    #[test]
    fn error_json() {
        let r = ErrorReport::from_error(&Error::EpsilonNotPositive(0.0), 2);
        let v: serde_json::Value = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(v["error"]["kind"], "EpsilonNotPositive");
        assert_eq!(v["error"]["exit_code"], 2);
    }
}
