//! Preset scenarios: reference pulse widths with their simulation windows.
//!
//! STIRAP windows end where `J/G2` falls to a preset end-of-protocol ratio;
//! STA windows end at fixed end-of-pulse times.

use crate::dynamics::{SystemParams, DEFAULT_ATOL, DEFAULT_RTOL};
use crate::harness::{policy_warnings, Mode, ScenarioConfig};
use crate::protocols::{Family, ProtocolParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub family: Family,
    pub stirap_width: f64,
    /// `J/G2` at the end of the STIRAP protocol.
    pub stirap_end_ratio: f64,
    pub sta_width: f64,
    pub sta_end: f64,
}

pub const PRESETS: [Preset; 4] = [
    Preset {
        family: Family::Gaussian,
        stirap_width: 1600.0,
        stirap_end_ratio: 6.5e-4,
        sta_width: 16.0,
        sta_end: 77.0,
    },
    Preset {
        family: Family::Sin4,
        stirap_width: 35200.0,
        stirap_end_ratio: 4e-5,
        sta_width: 126.0,
        sta_end: 59.0,
    },
    Preset {
        family: Family::InvSqrt,
        stirap_width: 253.0,
        stirap_end_ratio: 1.04e-3,
        sta_width: 2.53,
        sta_end: 102.0,
    },
    Preset {
        family: Family::Vitanov,
        stirap_width: 395.0,
        stirap_end_ratio: 1.32e-3,
        sta_width: 3.95,
        sta_end: 61.5,
    },
];

pub const PEAK_COUPLING: f64 = 0.1;
pub const INITIAL_PHONONS: f64 = 1e4;

pub fn preset(family: Family) -> Preset {
    PRESETS
        .into_iter()
        .find(|s| s.family == family)
        .expect("every family has a preset")
}

fn config(
    protocol: ProtocolParams,
    system: SystemParams,
    mode: Mode,
    end_ratio: Option<f64>,
) -> ScenarioConfig {
    ScenarioConfig {
        warnings: policy_warnings(&protocol, &system, mode),
        protocol,
        system,
        mode,
        n0: INITIAL_PHONONS,
        grid_points: 2000,
        end_ratio,
        rtol: DEFAULT_RTOL,
        atol: DEFAULT_ATOL,
        strict: false,
    }
}

/// Dissipationless STIRAP at the reference width.
pub fn stirap(family: Family) -> ScenarioConfig {
    let s = preset(family);
    let mut p = ProtocolParams::with_defaults(family, PEAK_COUPLING, s.stirap_width)
        .expect("reference widths are valid");
    p.t_end = p
        .time_at_ratio(s.stirap_end_ratio, p.t_start, p.t_end)
        .expect("reference end ratio is reached");
    config(
        p,
        SystemParams::closed(),
        Mode::Stirap,
        Some(s.stirap_end_ratio),
    )
}

fn sta_protocol(family: Family) -> ProtocolParams {
    let s = preset(family);
    let p = ProtocolParams::with_defaults(family, PEAK_COUPLING, s.sta_width)
        .expect("reference widths are valid");
    p.with_window(p.t_start, s.sta_end)
        .expect("reference end times are valid")
}

/// STA at the reference width, closed or with the default dissipation.
pub fn sta(family: Family, dissipative: bool) -> ScenarioConfig {
    let base = if dissipative {
        SystemParams::default()
    } else {
        SystemParams::closed()
    };
    config(
        sta_protocol(family),
        SystemParams {
            sta_enabled: true,
            ..base
        },
        Mode::Sta,
        None,
    )
}

/// STA pulse widths with the counterdiabatic coupling switched off.
pub fn sta_no_cd(family: Family) -> ScenarioConfig {
    config(
        sta_protocol(family),
        SystemParams::closed(),
        Mode::StaNoCd,
        None,
    )
}

/// Preset by name: `<family>-stirap`, `<family>-sta`, `<family>-sta-dissipative`
/// or `<family>-sta-no-cd`.
pub fn by_name(name: &str) -> Option<ScenarioConfig> {
    let (fam, rest) = name.split_once('-')?;
    let family: Family = fam.parse().ok()?;
    match rest {
        "stirap" => Some(stirap(family)),
        "sta" => Some(sta(family, false)),
        "sta-dissipative" => Some(sta(family, true)),
        "sta-no-cd" => Some(sta_no_cd(family)),
        _ => None,
    }
}

pub fn names() -> Vec<String> {
    let mut v = Vec::new();
    for f in Family::ALL {
        for kind in ["stirap", "sta", "sta-dissipative", "sta-no-cd"] {
            v.push(format!("{f}-{kind}"));
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_survive_serialization() {
        for name in names() {
            let c = by_name(&name).unwrap();
            let again = ScenarioConfig::parse(&c.serialize()).unwrap();
            assert_eq!(c, again, "{name}");
        }
    }

    #[test]
    fn dissipative_preset_uses_default_rates() {
        let c = sta(Family::Gaussian, true);
        assert_eq!(c.system.kappa1, 0.02);
        assert_eq!(c.system.gamma_m, 3e-6);
        assert_eq!(c.system.n_bar, 1e4);
        assert!(c.system.sta_enabled);
        assert_eq!(c.window(), (0.0, 77.0));
    }
}
