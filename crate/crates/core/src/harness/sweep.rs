use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::run::run;
use super::{io_err, HarnessError};

pub const SWEEP_SCHEMA: &str = "stacool-sweep/1";

/// `steps` evenly spaced detunings from `min` to `max` inclusive.
pub fn default_deltas(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        n => (0..n)
            .map(|k| {
                if k + 1 == n {
                    max
                } else {
                    min + (max - min) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSeries {
    pub label: String,
    pub pb_final: Vec<f64>,
    pub pb_min: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub deltas: Vec<f64>,
    pub series: Vec<SweepSeries>,
}

impl SweepResult {
    /// One row per detuning; two columns (`pb_final`, `pb_min`) per scenario.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {SWEEP_SCHEMA}");
        s.push_str("delta");
        for series in &self.series {
            let _ = write!(s, ",{0}_pb_final,{0}_pb_min", series.label);
        }
        s.push('\n');
        for (k, d) in self.deltas.iter().enumerate() {
            let _ = write!(s, "{d}");
            for series in &self.series {
                let _ = write!(s, ",{},{}", series.pb_final[k], series.pb_min[k]);
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        std::fs::write(path, self.to_csv()).map_err(io_err(path))
    }
}

/// Runs every config at every detuning. `workers = None` uses all cores.
pub fn sweep_detuning(
    configs: &[ScenarioConfig],
    deltas: &[f64],
    workers: Option<usize>,
) -> Result<SweepResult, HarnessError> {
    if let Some(bad) = deltas.iter().find(|d| !d.is_finite()) {
        return Err(HarnessError::Config(vec![format!(
            "detuning {bad} is not finite"
        )]));
    }
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..deltas.len()).map(move |d| (c, d)))
        .collect();
    let work = || -> Result<Vec<(f64, f64)>, HarnessError> {
        jobs.par_iter()
            .map(|&(c, d)| {
                let outcome = run(&configs[c].with_delta(deltas[d]), false)?;
                Ok((outcome.result.pb_final, outcome.result.pb_min))
            })
            .collect()
    };
    let values = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::Other(format!("cannot start worker pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let series = configs
        .iter()
        .enumerate()
        .map(|(c, cfg)| {
            let slice = &values[c * deltas.len()..(c + 1) * deltas.len()];
            SweepSeries {
                label: cfg.label(),
                pb_final: slice.iter().map(|v| v.0).collect(),
                pb_min: slice.iter().map(|v| v.1).collect(),
            }
        })
        .collect();
    Ok(SweepResult {
        deltas: deltas.to_vec(),
        series,
    })
}
