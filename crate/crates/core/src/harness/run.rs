use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::{io_err, HarnessError};
use crate::drives::{reconstruct_drives, DrivePair};
use crate::dynamics::{initial_state, integrate, IntegrateOptions, RunResult};
use crate::schedule::CouplingSchedule;

pub const TIMESERIES_SCHEMA: &str = "stacool-timeseries/1";
pub const DRIVES_SCHEMA: &str = "stacool-drives/1";
pub const SUMMARY_SCHEMA: &str = "stacool-summary/1";

/// Figures of merit and diagnostics of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub label: String,
    pub protocol: String,
    pub mode: String,
    pub width: f64,
    pub delta: f64,
    pub n0: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub pb_final: f64,
    pub pb_min: f64,
    pub t_reference: f64,
    pub t_ground: Option<f64>,
    pub p1_final: f64,
    pub p2_final: f64,
    pub max_adiabatic_ratio: Option<f64>,
    pub max_theta_dot: Option<f64>,
    /// `J/G2` at the window edges; absent when `G2` vanishes there.
    pub start_ratio: Option<f64>,
    pub end_ratio: Option<f64>,
    pub accepted_steps: usize,
    pub max_drive_amplitude: Option<f64>,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn to_text(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6e}"));
        let mut s = String::new();
        let _ = writeln!(s, "# {SUMMARY_SCHEMA}");
        let _ = writeln!(s, "label               {}", self.label);
        let _ = writeln!(s, "protocol            {} ({})", self.protocol, self.mode);
        let _ = writeln!(s, "T                   {}", self.width);
        let _ = writeln!(s, "delta               {}", self.delta);
        let _ = writeln!(s, "window              [{}, {}]", self.t_start, self.t_end);
        let _ = writeln!(s, "pb_final            {:.6e}", self.pb_final);
        let _ = writeln!(s, "pb_min              {:.6e}", self.pb_min);
        let _ = writeln!(s, "t_reference         {:.6}", self.t_reference);
        let _ = writeln!(
            s,
            "t_ground            {}",
            self.t_ground.map_or("-".into(), |t| format!("{t:.6}"))
        );
        let _ = writeln!(s, "p1_final            {:.6e}", self.p1_final);
        let _ = writeln!(s, "p2_final            {:.6e}", self.p2_final);
        let _ = writeln!(s, "max_R               {}", opt(self.max_adiabatic_ratio));
        let _ = writeln!(s, "max_theta_dot       {}", opt(self.max_theta_dot));
        let _ = writeln!(s, "start_ratio         {}", opt(self.start_ratio));
        let _ = writeln!(s, "end_ratio           {}", opt(self.end_ratio));
        let _ = writeln!(s, "max_drive_amplitude {}", opt(self.max_drive_amplitude));
        for w in &self.warnings {
            let _ = writeln!(s, "warning             {w}");
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: ScenarioConfig,
    pub result: RunResult,
    pub summary: Summary,
    pub drives: Option<DrivePair>,
}

fn finite(x: Option<f64>) -> Option<f64> {
    x.filter(|v| v.is_finite())
}

/// Runs one scenario, optionally reconstructing the drive amplitudes.
pub fn run(config: &ScenarioConfig, with_drives: bool) -> Result<RunOutcome, HarnessError> {
    let label = config.label();
    let sched = CouplingSchedule::new(config.protocol);
    let initial = initial_state(config.n0).map_err(|source| HarnessError::Integration {
        context: label.clone(),
        source,
    })?;
    let opts = IntegrateOptions {
        grid_points: config.grid_points,
        ..IntegrateOptions::with_tolerances(config.rtol, config.atol)
    };
    let result =
        integrate(&config.system, &sched, &initial, config.window(), &opts).map_err(|source| {
            HarnessError::Integration {
                context: label.clone(),
                source,
            }
        })?;
    let drives = if with_drives {
        let pair = reconstruct_drives(&sched, &config.system, config.window(), config.grid_points)
            .map_err(|source| HarnessError::Drives {
                context: label.clone(),
                source,
            })?;
        Some(pair)
    } else {
        None
    };
    let d = &result.diagnostics;
    let summary = Summary {
        schema: SUMMARY_SCHEMA.into(),
        label,
        protocol: config.protocol.family.name().into(),
        mode: config.mode.name().into(),
        width: config.protocol.width,
        delta: config.system.delta,
        n0: config.n0,
        t_start: config.protocol.t_start,
        t_end: config.protocol.t_end,
        pb_final: result.pb_final,
        pb_min: result.pb_min,
        t_reference: result.t_reference,
        t_ground: result.t_ground,
        p1_final: result.final_state.p1(),
        p2_final: result.final_state.p2(),
        max_adiabatic_ratio: finite(d.max_adiabatic_ratio),
        max_theta_dot: finite(d.max_theta_dot),
        start_ratio: finite(d.start_ratio),
        end_ratio: finite(d.end_ratio),
        accepted_steps: d.accepted_steps,
        max_drive_amplitude: drives.as_ref().map(DrivePair::max_amplitude),
        warnings: config.warnings.clone(),
    };
    Ok(RunOutcome {
        config: config.clone(),
        result,
        summary,
        drives,
    })
}

/// Time series with the couplings and angles alongside the populations.
pub fn timeseries_csv(outcome: &RunOutcome) -> String {
    let p = &outcome.config.protocol;
    let delta = outcome.config.system.delta;
    let r = &outcome.result;
    let mut s = String::with_capacity(r.times.len() * 160);
    let _ = writeln!(s, "# {TIMESERIES_SCHEMA}");
    s.push_str("t,P1,P2,Pb,J,G2,theta,theta_dot,R\n");
    for k in 0..r.times.len() {
        let t = r.times[k];
        let (j, g2) = p.couplings(t);
        let theta = j.atan2(g2);
        let ratio = p.adiabatic_ratio(t, delta).unwrap_or(f64::NAN);
        let _ = writeln!(
            s,
            "{t},{},{},{},{j},{g2},{theta},{},{ratio}",
            r.p1[k],
            r.p2[k],
            r.pb[k],
            p.theta_rate(t)
        );
    }
    s
}

pub fn drives_csv(pair: &DrivePair) -> String {
    let mut s = String::with_capacity(pair.times.len() * 100);
    let _ = writeln!(s, "# {DRIVES_SCHEMA}");
    s.push_str("t,Re(Omega1),Im(Omega1),Re(Omega2),Im(Omega2)\n");
    for (k, t) in pair.times.iter().enumerate() {
        let (a, b) = match &pair.omega1 {
            Some(o) => (o[k].re.to_string(), o[k].im.to_string()),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(s, "{t},{a},{b},{},{}", pair.omega2[k].re, pair.omega2[k].im);
    }
    s
}

/// Writes `<stem>_timeseries.csv`, `<stem>_summary.json`, `<stem>_summary.txt`
/// and, when drives were reconstructed, `<stem>_drives.csv`.
pub fn write_outputs(
    outcome: &RunOutcome,
    dir: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = vec![
        (
            dir.join(format!("{stem}_timeseries.csv")),
            timeseries_csv(outcome),
        ),
        (
            dir.join(format!("{stem}_summary.json")),
            serde_json::to_string_pretty(&outcome.summary)
                .map_err(|e| HarnessError::Other(e.to_string()))?
                + "\n",
        ),
        (
            dir.join(format!("{stem}_summary.txt")),
            outcome.summary.to_text(),
        ),
    ];
    if let Some(pair) = &outcome.drives {
        files.push((dir.join(format!("{stem}_drives.csv")), drives_csv(pair)));
    }
    for (path, body) in &files {
        std::fs::write(path, body).map_err(io_err(path))?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// Pulse diagnostics that need no integration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub label: String,
    pub t_start: f64,
    pub t_end: f64,
    pub max_adiabatic_ratio: f64,
    pub max_theta_dot: f64,
    pub start_ratio: f64,
    pub end_ratio: f64,
    pub warnings: Vec<String>,
}

pub fn check(config: &ScenarioConfig) -> CheckReport {
    let p = &config.protocol;
    CheckReport {
        label: config.label(),
        t_start: p.t_start,
        t_end: p.t_end,
        max_adiabatic_ratio: p.max_adiabatic_ratio(config.system.delta),
        max_theta_dot: p.max_theta_dot(),
        start_ratio: p.coupling_ratio(p.t_start),
        end_ratio: p.coupling_ratio(p.t_end),
        warnings: config.warnings.clone(),
    }
}

impl CheckReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "label          {}", self.label);
        let _ = writeln!(s, "window         [{}, {}]", self.t_start, self.t_end);
        let _ = writeln!(s, "max_R          {:.6e}", self.max_adiabatic_ratio);
        let _ = writeln!(s, "max_theta_dot  {:.6e}", self.max_theta_dot);
        let _ = writeln!(s, "J/G2 at start  {:.6e}", self.start_ratio);
        let _ = writeln!(s, "J/G2 at end    {:.6e}", self.end_ratio);
        for w in &self.warnings {
            let _ = writeln!(s, "warning        {w}");
        }
        s
    }
}
