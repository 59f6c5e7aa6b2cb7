use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::dynamics::{SystemParams, DEFAULT_ATOL, DEFAULT_RTOL};
use crate::protocols::{window_defaults, Family, ProtocolParams};

/// Adiabaticity policy threshold on `max R(t)` for STIRAP runs.
pub const ADIABATIC_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Bare STIRAP pulses.
    Stirap,
    /// STIRAP pulses plus the counterdiabatic `a1`–`b` coupling.
    Sta,
    /// STA pulse widths without the counterdiabatic coupling.
    StaNoCd,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Stirap => "stirap",
            Mode::Sta => "sta",
            Mode::StaNoCd => "sta_no_cd",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "stirap" => Ok(Mode::Stirap),
            "sta" => Ok(Mode::Sta),
            "sta_no_cd" | "sta_nocd" => Ok(Mode::StaNoCd),
            other => Err(format!(
                "unknown mode `{other}` (expected stirap, sta or sta_no_cd)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub protocol: ProtocolParams,
    pub system: SystemParams,
    pub mode: Mode,
    pub n0: f64,
    pub grid_points: usize,
    /// When set, the window end was placed where `J/G2` falls to this value.
    pub end_ratio: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    /// Policy checks become errors instead of warnings.
    pub strict: bool,
    /// Policy warnings found during validation.
    pub warnings: Vec<String>,
}

const KEYS: &[&str] = &[
    "protocol",
    "mode",
    "T",
    "xi",
    "t_f",
    "g",
    "delta",
    "kappa1",
    "kappa2",
    "gamma_m",
    "n_bar",
    "g1",
    "g2",
    "n0",
    "t_start",
    "t_end",
    "end_ratio",
    "grid_points",
    "include_counter_rotating",
    "strict",
    "rtol",
    "atol",
];

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

/// Splits `key=value` pairs. Several pairs may share a line; `#` starts a comment.
fn tokenize(text: &str, errors: &mut Vec<String>) -> BTreeMap<String, (usize, String)> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        for token in content.split_whitespace() {
            match token.split_once('=') {
                Some((k, v)) if !k.is_empty() && !v.is_empty() => {
                    if map
                        .insert(k.to_string(), (lineno + 1, v.to_string()))
                        .is_some()
                    {
                        errors.push(format!(
                            "line {}: key `{k}` given more than once",
                            lineno + 1
                        ));
                    }
                }
                _ => errors.push(format!(
                    "line {}: expected key=value, found `{token}`",
                    lineno + 1
                )),
            }
        }
    }
    map
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(vec![format!("cannot read {}: {e}", path.display())])
        })?;
        Self::parse(&text)
    }

    /// Parses and validates a configuration, filling unspecified fields with
    /// the default parameters. All problems are reported together.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut errors = Vec::new();
        let map = tokenize(text, &mut errors);
        for (key, (line, _)) in &map {
            if !KEYS.contains(&key.as_str()) {
                errors.push(format!("line {line}: unknown key `{key}`"));
            }
        }
        let raw = |key: &str| map.get(key).map(|(line, v)| (*line, v.as_str()));
        let number = |key: &str, errors: &mut Vec<String>| -> Option<f64> {
            let (line, v) = raw(key)?;
            match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Some(x),
                _ => {
                    errors.push(format!(
                        "line {line}: `{key}` must be a finite number, got `{v}`"
                    ));
                    None
                }
            }
        };

        let family = match raw("protocol") {
            None => {
                errors.push("`protocol` is required (gaussian, sin4, invsqrt or vitanov)".into());
                None
            }
            Some((line, v)) => match v.parse::<Family>() {
                Ok(f) => Some(f),
                Err(e) => {
                    errors.push(format!("line {line}: {e}"));
                    None
                }
            },
        };
        let mode = match raw("mode") {
            None => Mode::Stirap,
            Some((line, v)) => v.parse::<Mode>().unwrap_or_else(|e| {
                errors.push(format!("line {line}: {e}"));
                Mode::Stirap
            }),
        };
        let width = number("T", &mut errors);
        if width.is_none() && raw("T").is_none() {
            errors.push("`T` (pulse width) is required".into());
        }
        let xi = number("xi", &mut errors);
        let t_f = number("t_f", &mut errors);
        let peak = number("g", &mut errors).unwrap_or(0.1);
        let defaults = SystemParams::default();
        let system = SystemParams {
            omega_m: 1.0,
            delta: number("delta", &mut errors).unwrap_or(defaults.delta),
            kappa1: number("kappa1", &mut errors).unwrap_or(defaults.kappa1),
            kappa2: number("kappa2", &mut errors).unwrap_or(defaults.kappa2),
            gamma_m: number("gamma_m", &mut errors).unwrap_or(defaults.gamma_m),
            n_bar: number("n_bar", &mut errors).unwrap_or(defaults.n_bar),
            g1: number("g1", &mut errors).unwrap_or(defaults.g1),
            g2: number("g2", &mut errors).unwrap_or(defaults.g2),
            include_counter_rotating: match raw("include_counter_rotating") {
                None => true,
                Some((line, v)) => parse_bool(v).unwrap_or_else(|e| {
                    errors.push(format!("line {line}: include_counter_rotating: {e}"));
                    true
                }),
            },
            sta_enabled: mode == Mode::Sta,
        };
        if let Err(e) = system.validate() {
            errors.push(e.to_string());
        }
        let n0 = number("n0", &mut errors).unwrap_or(1e4);
        if n0 < 0.0 {
            errors.push(format!("n0 = {n0} must be >= 0"));
        }
        let grid_points = match raw("grid_points") {
            None => 2000,
            Some((line, v)) => match v.parse::<usize>() {
                Ok(n) if n >= 2 => n,
                _ => {
                    errors.push(format!(
                        "line {line}: grid_points must be an integer >= 2, got `{v}`"
                    ));
                    2000
                }
            },
        };
        let strict = match raw("strict") {
            None => false,
            Some((line, v)) => parse_bool(v).unwrap_or_else(|e| {
                errors.push(format!("line {line}: strict: {e}"));
                false
            }),
        };
        let rtol = number("rtol", &mut errors).unwrap_or(DEFAULT_RTOL);
        let atol = number("atol", &mut errors).unwrap_or(DEFAULT_ATOL);
        if !(rtol > 0.0 && atol > 0.0) {
            errors.push(format!(
                "tolerances must be positive (rtol = {rtol}, atol = {atol})"
            ));
        }
        let t_start = number("t_start", &mut errors);
        let t_end = number("t_end", &mut errors);
        let end_ratio = number("end_ratio", &mut errors);
        if end_ratio.is_some() && t_end.is_some() {
            errors.push("give at most one of `t_end` and `end_ratio`".into());
        }
        if let Some(r) = end_ratio {
            if r.is_nan() || r <= 0.0 {
                errors.push(format!("end_ratio = {r} must be positive"));
            }
        }

        let mut protocol = None;
        if let (Some(family), Some(width)) = (family, width) {
            if !family.uses_delay() && xi.is_some() {
                errors.push(format!("`xi` does not apply to the {family} protocol"));
            }
            if !family.uses_shift() && t_f.is_some() {
                errors.push(format!("`t_f` does not apply to the {family} protocol"));
            }
            let (d_delay, d_shift) = family.default_shape(width);
            let delay = if family.uses_delay() {
                xi.unwrap_or(d_delay)
            } else {
                0.0
            };
            let shift = if family.uses_shift() {
                t_f.unwrap_or(d_shift)
            } else {
                0.0
            };
            let (w0, w1) = window_defaults(family, width, delay, shift);
            let mut p = ProtocolParams {
                family,
                peak,
                width,
                delay,
                shift,
                t_start: t_start.unwrap_or(w0),
                t_end: t_end.unwrap_or(w1),
            };
            match p.validate_shape() {
                Err(e) => errors.push(e.to_string()),
                Ok(()) => {
                    if let Some(r) = end_ratio.filter(|r| *r > 0.0) {
                        match p.time_at_ratio(r, p.t_start, p.t_end) {
                            Some(t) => p.t_end = t,
                            None => errors.push(format!(
                                "J/G2 never falls to end_ratio = {r:e} inside [{}, {}]",
                                p.t_start, p.t_end
                            )),
                        }
                    }
                    if let Err(e) = p.validate() {
                        errors.push(e.to_string());
                    }
                }
            }
            protocol = Some(p);
        }

        let mut warnings = Vec::new();
        if let Some(p) = &protocol {
            if errors.is_empty() {
                warnings = policy_warnings(p, &system, mode);
                if strict {
                    errors.append(&mut warnings);
                }
            }
        }
        if !errors.is_empty() {
            return Err(HarnessError::Config(errors));
        }
        Ok(ScenarioConfig {
            protocol: protocol.expect("validated above"),
            system,
            mode,
            n0,
            grid_points,
            end_ratio,
            rtol,
            atol,
            strict,
            warnings,
        })
    }

    /// Canonical text form; `parse(serialize())` reproduces the config.
    pub fn serialize(&self) -> String {
        let p = &self.protocol;
        let s = &self.system;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("protocol", p.family.name().into());
        kv("mode", self.mode.name().into());
        kv("T", p.width.to_string());
        if p.family.uses_delay() {
            kv("xi", p.delay.to_string());
        }
        if p.family.uses_shift() {
            kv("t_f", p.shift.to_string());
        }
        kv("g", p.peak.to_string());
        kv("delta", s.delta.to_string());
        kv("kappa1", s.kappa1.to_string());
        kv("kappa2", s.kappa2.to_string());
        kv("gamma_m", s.gamma_m.to_string());
        kv("n_bar", s.n_bar.to_string());
        kv("g1", s.g1.to_string());
        kv("g2", s.g2.to_string());
        kv("n0", self.n0.to_string());
        kv("t_start", p.t_start.to_string());
        match self.end_ratio {
            Some(r) => kv("end_ratio", r.to_string()),
            None => kv("t_end", p.t_end.to_string()),
        }
        kv("grid_points", self.grid_points.to_string());
        kv(
            "include_counter_rotating",
            s.include_counter_rotating.to_string(),
        );
        kv("strict", self.strict.to_string());
        kv("rtol", self.rtol.to_string());
        kv("atol", self.atol.to_string());
        out
    }

    /// Short name used for output files, e.g. `gaussian_sta_T16`.
    pub fn label(&self) -> String {
        format!(
            "{}_{}_T{}",
            self.protocol.family, self.mode, self.protocol.width
        )
    }

    pub fn window(&self) -> (f64, f64) {
        (self.protocol.t_start, self.protocol.t_end)
    }

    /// Same scenario at a different detuning, with policy checks redone.
    pub fn with_delta(&self, delta: f64) -> Self {
        let mut c = self.clone();
        c.system.delta = delta;
        c.warnings = policy_warnings(&c.protocol, &c.system, c.mode);
        c
    }
}

/// Adiabaticity (STIRAP) and drive-strength (STA) selection rules.
pub fn policy_warnings(p: &ProtocolParams, sys: &SystemParams, mode: Mode) -> Vec<String> {
    let mut w = Vec::new();
    match mode {
        Mode::Stirap => {
            let r = p.max_adiabatic_ratio(sys.delta);
            if r >= ADIABATIC_LIMIT {
                w.push(format!(
                    "adiabaticity: max R(t) = {r:.4} is not below {ADIABATIC_LIMIT} for T = {}; lengthen the pulses or set strict=false",
                    p.width
                ));
            }
        }
        Mode::Sta => {
            let rate = p.max_theta_dot();
            if rate > p.peak * (1.0 + 1e-9) {
                w.push(format!(
                    "drive strength: max |theta_dot| = {rate:.4} exceeds g = {} for T = {}; lengthen the pulses or set strict=false",
                    p.peak, p.width
                ));
            }
        }
        Mode::StaNoCd => {}
    }
    w
}
