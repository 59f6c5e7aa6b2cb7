use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::Summary;
use super::{io_err, HarnessError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Speedup {
    pub protocol: String,
    pub stirap: String,
    pub sta: String,
    /// Ratio of reference times, STIRAP over STA.
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub runs: Vec<Summary>,
    pub speedups: Vec<Speedup>,
}

/// Tabulates runs and pairs each STA run with the first STIRAP run of the
/// same protocol.
pub fn report(runs: &[Summary]) -> Report {
    let speedups = runs
        .iter()
        .filter(|s| s.mode == "sta")
        .filter_map(|fast| {
            runs.iter()
                .find(|slow| slow.mode == "stirap" && slow.protocol == fast.protocol)
                .map(|slow| Speedup {
                    protocol: fast.protocol.clone(),
                    stirap: slow.label.clone(),
                    sta: fast.label.clone(),
                    factor: slow.t_reference / fast.t_reference,
                })
        })
        .collect();
    Report {
        runs: runs.to_vec(),
        speedups,
    }
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<28} {:>13} {:>13} {:>13} {:>13} {:>11} {:>11}",
            "label", "pb_final", "pb_min", "t_reference", "t_ground", "max_R", "max_thdot"
        );
        let opt = |x: Option<f64>, p: usize| x.map_or("-".to_string(), |v| format!("{v:.p$e}"));
        for r in &self.runs {
            let _ = writeln!(
                s,
                "{:<28} {:>13.6e} {:>13.6e} {:>13.4} {:>13} {:>11} {:>11}",
                r.label,
                r.pb_final,
                r.pb_min,
                r.t_reference,
                r.t_ground.map_or("-".to_string(), |t| format!("{t:.4}")),
                opt(r.max_adiabatic_ratio, 3),
                opt(r.max_theta_dot, 3),
            );
        }
        if !self.speedups.is_empty() {
            s.push('\n');
            for sp in &self.speedups {
                let _ = writeln!(
                    s,
                    "speedup {:<10} {:>9.2}  ({} / {})",
                    sp.protocol, sp.factor, sp.stirap, sp.sta
                );
            }
        }
        s
    }
}

/// Writes `<stem>.json` and `<stem>.txt`.
pub fn write_report(rep: &Report, dir: &Path, stem: &str) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let json =
        serde_json::to_string_pretty(rep).map_err(|e| HarnessError::Other(e.to_string()))? + "\n";
    let jpath = dir.join(format!("{stem}.json"));
    std::fs::write(&jpath, json).map_err(io_err(&jpath))?;
    let tpath = dir.join(format!("{stem}.txt"));
    std::fs::write(&tpath, rep.to_text()).map_err(io_err(&tpath))
}
