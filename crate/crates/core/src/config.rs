//! `key = value` run configuration files.
//!
//! ```text
//! # standard body
//! I1 = 1
//! I2 = 0.5
//! I3 = 0.3333333333333333
//! ctrl_a = 1
//! ctrl_b = 1
//! ctrl_c = 1
//! epsilon = 0.5
//! x0 = 1, 1, 1
//! ```
//!
//! Moments are given either as `I1, I2, I3` or as inverse moments
//! `a1, a2, a3`, never both. Unknown or repeated keys are rejected.
//! Integrator, probe and output keys are optional:
//!
//! | key | default |
//! |-----|---------|
//! | `rtol`, `atol` | `1e-10`, `1e-12` |
//! | `h_init`, `h_max` | `1e-3`, `1` |
//! | `t_end` | `100` |
//! | `direction` | `forward` |
//! | `max_steps` | `10000000` |
//! | `seed` | `0` |
//! | `probe_delta`, `probe_horizon`, `probe_samples` | `1e-3`, `200`, `20` |
//! | `stay_factor`, `escape_radius` | `50`, `0.05` |
//! | `output` | none |

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::integrate::{Direction, IntegratorSettings};
use crate::model::{State, SystemConfig};
use crate::stability::ProbeSettings;
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub x0: Option<State>,
    pub integrator: IntegratorSettings,
    pub seed: u64,
    pub probe_delta: f64,
    pub probe_horizon: f64,
    pub probe_samples: usize,
    pub stay_factor: f64,
    pub escape_radius: f64,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults for everything but the body itself.
    pub fn new(system: SystemConfig) -> Self {
        let probe = ProbeSettings::default();
        Self {
            system,
            x0: None,
            integrator: IntegratorSettings::default(),
            seed: 0,
            probe_delta: probe.delta,
            probe_horizon: probe.horizon,
            probe_samples: probe.n_samples,
            stay_factor: probe.stay_factor,
            escape_radius: probe.escape_radius,
            output: None,
        }
    }

    pub fn require_x0(&self) -> Result<State> {
        self.x0
            .ok_or_else(|| Error::InvalidArgument("config has no x0".into()))
    }

    pub fn probe_settings(&self) -> ProbeSettings {
        ProbeSettings {
            delta: self.probe_delta,
            horizon: self.probe_horizon,
            n_samples: self.probe_samples,
            seed: self.seed,
            stay_factor: self.stay_factor,
            escape_radius: self.escape_radius,
            rtol: self.integrator.rtol,
            atol: self.integrator.atol,
        }
    }
}

const KEYS: &[&str] = &[
    "a1", "a2", "a3", "I1", "I2", "I3", "ctrl_a", "ctrl_b", "ctrl_c", "epsilon", "x0",
    "rtol", "atol", "h_init", "h_max", "t_end", "direction", "max_steps", "seed",
    "probe_delta", "probe_horizon", "probe_samples", "stay_factor", "escape_radius", "output",
];

struct Entries<'a> {
    map: HashMap<&'a str, (usize, &'a str)>,
}

impl<'a> Entries<'a> {
    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        self.map
            .get(key)
            .map(|&(line, v)| parse_float(v, line, key))
            .transpose()
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.float(key)?.unwrap_or(default))
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.float(key)?.ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing required key `{key}`"),
        })
    }

    fn integer<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.map
            .get(key)
            .map(|&(line, v)| {
                v.parse::<T>().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{key}` expects a nonnegative integer, got `{v}`"),
                })
            })
            .transpose()
    }
}

fn parse_float(v: &str, line: usize, key: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Parse {
            line,
            message: format!("`{key}` expects a finite number, got `{v}`"),
        }),
    }
}

fn parse_triple(v: &str, line: usize, key: &str) -> Result<Vec3> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Parse {
            line,
            message: format!("`{key}` expects three comma-separated numbers, got `{v}`"),
        });
    }
    Ok([
        parse_float(parts[0], line, key)?,
        parse_float(parts[1], line, key)?,
        parse_float(parts[2], line, key)?,
    ])
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut map = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        if let Some((first, _)) = map.insert(key, (line, value)) {
            return Err(Error::Parse {
                line,
                message: format!("duplicate key `{key}` (first set on line {first})"),
            });
        }
    }
    let e = Entries { map };

    let has_a = ["a1", "a2", "a3"].iter().any(|k| e.has(k));
    let has_i = ["I1", "I2", "I3"].iter().any(|k| e.has(k));
    let controls = [e.required("ctrl_a")?, e.required("ctrl_b")?, e.required("ctrl_c")?];
    let epsilon = e.required("epsilon")?;
    let system = match (has_a, has_i) {
        (true, true) | (false, false) => {
            return Err(Error::InvariantViolation(
                "exactly one of {I1, I2, I3} or {a1, a2, a3} must be given".into(),
            ))
        }
        (true, false) => SystemConfig::new(
            [e.required("a1")?, e.required("a2")?, e.required("a3")?],
            controls,
            epsilon,
        )?,
        (false, true) => SystemConfig::from_moments(
            [e.required("I1")?, e.required("I2")?, e.required("I3")?],
            controls,
            epsilon,
        )?,
    };

    let mut cfg = RunConfig::new(system);
    if let Some(&(line, v)) = e.map.get("x0") {
        cfg.x0 = Some(State(parse_triple(v, line, "x0")?));
    }
    let d = IntegratorSettings::default();
    cfg.integrator = IntegratorSettings {
        rtol: e.float_or("rtol", d.rtol)?,
        atol: e.float_or("atol", d.atol)?,
        h_init: e.float_or("h_init", d.h_init)?,
        h_max: e.float_or("h_max", d.h_max)?,
        t_end: e.float_or("t_end", d.t_end)?,
        direction: match e.map.get("direction") {
            None => d.direction,
            Some(&(_, "forward")) => Direction::Forward,
            Some(&(_, "backward")) => Direction::Backward,
            Some(&(line, v)) => {
                return Err(Error::Parse {
                    line,
                    message: format!("`direction` expects forward or backward, got `{v}`"),
                })
            }
        },
        max_steps: e.integer("max_steps")?.unwrap_or(d.max_steps),
    };
    cfg.integrator.validate()?;
    cfg.seed = e.integer("seed")?.unwrap_or(0);
    cfg.probe_delta = e.float_or("probe_delta", cfg.probe_delta)?;
    cfg.probe_horizon = e.float_or("probe_horizon", cfg.probe_horizon)?;
    cfg.probe_samples = e.integer("probe_samples")?.unwrap_or(cfg.probe_samples);
    cfg.stay_factor = e.float_or("stay_factor", cfg.stay_factor)?;
    cfg.escape_radius = e.float_or("escape_radius", cfg.escape_radius)?;
    if !(cfg.stay_factor > 0.0 && cfg.escape_radius > 0.0 && cfg.probe_horizon > 0.0) {
        return Err(Error::InvariantViolation(
            "stay_factor, escape_radius and probe_horizon must be positive".into(),
        ));
    }
    cfg.output = e.map.get("output").map(|&(_, v)| PathBuf::from(v));
    Ok(cfg)
}

/// Inverse of [`parse_config`]. Floats use the shortest representation that
/// parses back to the same bits, and moments are written as `a1, a2, a3`.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    let [a1, a2, a3] = cfg.system.inverse_moments();
    let [ca, cb, cc] = cfg.system.controls();
    put("a1", format!("{a1:?}"));
    put("a2", format!("{a2:?}"));
    put("a3", format!("{a3:?}"));
    put("ctrl_a", format!("{ca:?}"));
    put("ctrl_b", format!("{cb:?}"));
    put("ctrl_c", format!("{cc:?}"));
    put("epsilon", format!("{:?}", cfg.system.epsilon()));
    if let Some(State([x, y, z])) = cfg.x0 {
        put("x0", format!("{x:?}, {y:?}, {z:?}"));
    }
    let s = &cfg.integrator;
    put("rtol", format!("{:?}", s.rtol));
    put("atol", format!("{:?}", s.atol));
    put("h_init", format!("{:?}", s.h_init));
    put("h_max", format!("{:?}", s.h_max));
    put("t_end", format!("{:?}", s.t_end));
    put(
        "direction",
        match s.direction {
            Direction::Forward => "forward".into(),
            Direction::Backward => "backward".into(),
        },
    );
    put("max_steps", s.max_steps.to_string());
    put("seed", cfg.seed.to_string());
    put("probe_delta", format!("{:?}", cfg.probe_delta));
    put("probe_horizon", format!("{:?}", cfg.probe_horizon));
    put("probe_samples", cfg.probe_samples.to_string());
    put("stay_factor", format!("{:?}", cfg.stay_factor));
    put("escape_radius", format!("{:?}", cfg.escape_radius));
    if let Some(p) = &cfg.output {
        put("output", p.display().to_string());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const STD: &str = "I1=1\nI2=0.5\nI3=0.3333333333333333\nctrl_a=1\nctrl_b=1\nctrl_c=1\nepsilon=0.5\nx0=1,1,1";

    #[test]
    fn moments_file_gives_standard_body() {
        let cfg = parse_config(STD).unwrap();
        assert_eq!(cfg.system.inverse_moments()[0], 1.0);
        assert_eq!(cfg.system.inverse_moments()[1], 2.0);
        assert!((cfg.system.inverse_moments()[2] - 3.0).abs() < 1e-15);
        assert_eq!(cfg.system.controls(), [1.0; 3]);
        assert_eq!(cfg.system.epsilon(), 0.5);
        assert_eq!(cfg.x0, Some(State::new(1.0, 1.0, 1.0)));
        assert_eq!(cfg.integrator, IntegratorSettings::default());
        assert_eq!((cfg.integrator.rtol, cfg.integrator.atol), (1e-10, 1e-12));
    }

    #[test]
    fn ordering_violation() {
        let err = parse_config("a1=2\na2=1\na3=3\nctrl_a=0\nctrl_b=0\nctrl_c=0\nepsilon=1").unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(ref m) if m.contains("a1 < a2 < a3")), "{err}");
        let err = parse_config("I1=1\nI2=2\nI3=3\nctrl_a=0\nctrl_b=0\nctrl_c=0\nepsilon=1").unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(ref m) if m.contains("requires I1 > I2 > I3 > 0")));
    }

    #[test]
    fn fail_closed() {
        let e = parse_config(&format!("{STD}\nepsilom=1")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 9, .. }), "{e}");
        let e = parse_config(&format!("{STD}\nepsilon=1")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 9, .. }));
        let e = parse_config(&format!("{STD}\na1=1")).unwrap_err();
        assert!(matches!(e, Error::InvariantViolation(_)));
        let e = parse_config("a1=1\na2=2\na3=3\nctrl_a=1\nctrl_b=1\nepsilon=0").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 0, .. }));
        let e = parse_config(&STD.replace("x0=1,1,1", "x0=1,1")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 8, .. }));
        let e = parse_config(&format!("{STD}\nrtol=nan")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 9, .. }));
        let e = parse_config(&format!("{STD}\njust words")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 9, .. }));
        let e = parse_config(&format!("{STD}\nrtol=1")).unwrap_err();
        assert!(matches!(e, Error::InvalidSettings(_)));
    }

    #[test]
    fn comments_and_whitespace() {
        let text = "# header\n  a1 = 1  # inline\n\na2=2\na3 =3\nctrl_a=0\nctrl_b=0\nctrl_c=0\nepsilon=-0.5\ndirection = backward\nmax_steps=7\nseed=42\noutput=out.csv\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.system.epsilon(), -0.5);
        assert_eq!(cfg.integrator.direction, Direction::Backward);
        assert_eq!(cfg.integrator.max_steps, 7);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.output, Some(PathBuf::from("out.csv")));
        assert_eq!(cfg.x0, None);
        assert!(cfg.require_x0().is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let mut cfg = parse_config(STD).unwrap();
        cfg.integrator.rtol = 3.3e-11;
        cfg.x0 = Some(State::new(0.1, -0.0, 1e-300));
        cfg.output = Some("runs/a.csv".into());
        let back = parse_config(&serialize_config(&cfg)).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.x0.unwrap().0[1].to_bits(), (-0.0f64).to_bits());
    }
}
