//! Monte-Carlo benchmark sweeps over noise levels and poses.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LFIntrinsics;
use crate::sim::{run_trials, BoardPose, BoardSpec, PoseSpec, SimConfig, TrialReport};

/// Noise levels of the noise sweep, px.
pub const TABLE2_SIGMAS: [f64; 7] = [0.1, 0.2, 0.3, 0.4, 0.5, 2.0, 3.0];
/// Pose of the noise sweep.
pub const TABLE2_EULER_DEG: [f64; 3] = [5.0, 20.0, 5.0];
pub const TABLE2_T_MM: [f64; 3] = [80.0, 5.0, 5.0];
/// Noise level of the pose sweep, px.
pub const TABLE3_SIGMA: f64 = 0.3;

/// Named poses of the pose sweep: rotations R1, R2 crossed with baselines
/// T1, T2.
pub fn table3_poses() -> Vec<NamedPose> {
    let r1 = [5.0, 15.0, 5.0];
    let r2 = [5.0, 30.0, 5.0];
    let t1 = [50.0, 0.0, 0.0];
    let t2 = [100.0, 0.0, 0.0];
    vec![
        NamedPose::new("R1T1", r1, t1),
        NamedPose::new("R1T2", r1, t2),
        NamedPose::new("R2T1", r2, t1),
        NamedPose::new("R2T2", r2, t2),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPose {
    pub name: String,
    #[serde(flatten)]
    pub pose: PoseSpec,
}

impl NamedPose {
    pub fn new(name: &str, euler_deg: [f64; 3], t_mm: [f64; 3]) -> Self {
        Self { name: name.to_string(), pose: PoseSpec::euler(euler_deg, t_mm) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Noise sweep at a fixed pose.
    Table2,
    /// Pose sweep at a fixed noise level.
    Table3,
    /// Every pose in `poses` at every level in `sigma_list`.
    Custom,
}

/// Benchmark description. Unset fields take the scenario's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub scenario: Scenario,
    #[serde(default)]
    pub sigma_list: Option<Vec<f64>>,
    #[serde(default)]
    pub poses: Option<Vec<NamedPose>>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub camera1: Option<LFIntrinsics>,
    #[serde(default)]
    pub camera2: Option<LFIntrinsics>,
    #[serde(default)]
    pub board: Option<BoardSpec>,
    #[serde(default)]
    pub board_poses: Option<Vec<BoardPose>>,
    #[serde(default)]
    pub sai_grid: Option<usize>,
}

fn default_trials() -> usize {
    100
}

impl BenchSpec {
    pub fn preset(scenario: Scenario, trials: usize, seed: u64) -> Self {
        Self {
            scenario,
            sigma_list: None,
            poses: None,
            trials,
            seed,
            camera1: None,
            camera2: None,
            board: None,
            board_poses: None,
            sai_grid: None,
        }
    }

    /// The (row label, configuration) of every row of the sweep.
    pub fn rows(&self) -> Result<Vec<(String, SimConfig)>> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        let base = |pose: PoseSpec, sigma: f64| {
            let mut cfg = SimConfig::table1(pose, sigma);
            cfg.trials = self.trials;
            cfg.seed = self.seed;
            if let Some(k) = self.camera1 {
                cfg.camera1 = k;
            }
            if let Some(k) = self.camera2 {
                cfg.camera2 = k;
            }
            if let Some(b) = self.board {
                cfg.board = b;
            }
            if let Some(n) = self.sai_grid {
                cfg.sai_grid = n;
            }
            cfg.board_poses = self.board_poses.clone();
            cfg
        };
        let rows: Vec<(String, SimConfig)> = match self.scenario {
            Scenario::Table2 => {
                let pose = match self.poses.as_deref() {
                    None => PoseSpec::euler(TABLE2_EULER_DEG, TABLE2_T_MM),
                    Some([p]) => p.pose.clone(),
                    Some(_) => {
                        return Err(Error::InvalidConfig("table2 takes at most one pose".into()))
                    }
                };
                let sigmas = self.sigma_list.clone().unwrap_or_else(|| TABLE2_SIGMAS.to_vec());
                sigmas.iter().map(|&s| (format_sigma(s), base(pose.clone(), s))).collect()
            }
            Scenario::Table3 => {
                let sigma = match self.sigma_list.as_deref() {
                    None => TABLE3_SIGMA,
                    Some([s]) => *s,
                    Some(_) => {
                        return Err(Error::InvalidConfig("table3 takes at most one sigma".into()))
                    }
                };
                let poses = self.poses.clone().unwrap_or_else(table3_poses);
                poses.into_iter().map(|p| (p.name, base(p.pose, sigma))).collect()
            }
            Scenario::Custom => {
                let poses = self
                    .poses
                    .clone()
                    .ok_or_else(|| Error::InvalidConfig("custom scenario needs poses".into()))?;
                let sigmas = self
                    .sigma_list
                    .clone()
                    .ok_or_else(|| Error::InvalidConfig("custom scenario needs sigma_list".into()))?;
                let mut rows = Vec::new();
                for p in &poses {
                    for &s in &sigmas {
                        rows.push((format!("{}@{}", p.name, format_sigma(s)), base(p.pose.clone(), s)));
                    }
                }
                rows
            }
        };
        if rows.is_empty() {
            return Err(Error::InvalidConfig("benchmark has no rows".into()));
        }
        for (_, cfg) in &rows {
            cfg.validate()?;
        }
        Ok(rows)
    }
}

fn format_sigma(s: f64) -> String {
    format!("{s}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub label: String,
    pub report: TrialReport,
}

/// Runs every row; rows run one after another, trials within a row on the
/// current rayon pool.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    run_bench_with(spec, |_, _| {})
}

/// [`run_bench`] with a callback after each finished row.
pub fn run_bench_with(
    spec: &BenchSpec,
    mut on_row: impl FnMut(usize, &BenchRow),
) -> Result<Vec<BenchRow>> {
    let mut out = Vec::new();
    for (i, (label, cfg)) in spec.rows()?.into_iter().enumerate() {
        let row = BenchRow { label, report: run_trials(&cfg)? };
        on_row(i, &row);
        out.push(row);
    }
    Ok(out)
}

pub const CSV_HEADER: &str = "sigma_or_pose,mean_err_R,std_err_R,mean_err_T,std_err_T,trials,failures";

/// Summary CSV with a fixed number format, identical for identical inputs.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let rep = &r.report;
        let _ = writeln!(
            s,
            "{},{:.10},{:.10},{:.10},{:.10},{},{}",
            r.label,
            rep.mean_err_r,
            rep.std_err_r,
            rep.mean_err_t,
            rep.std_err_t,
            rep.trials.len(),
            rep.failures
        );
    }
    s
}

/// Whitespace-separated table for plotting: row index, label, then the
/// four statistics.
pub fn bench_dat(rows: &[BenchRow]) -> String {
    let mut s = String::from("# index label mean_err_R std_err_R mean_err_T std_err_T\n");
    for (i, r) in rows.iter().enumerate() {
        let rep = &r.report;
        let _ = writeln!(
            s,
            "{} {} {:.10} {:.10} {:.10} {:.10}",
            i, r.label, rep.mean_err_r, rep.std_err_r, rep.mean_err_t, rep.std_err_t
        );
    }
    s
}

/// Per-trial CSV of one report with a trailing summary row.
pub fn trial_csv(report: &TrialReport) -> String {
    let mut s = String::from("trial,err_R_deg,err_T_deg,converged,iterations\n");
    for t in &report.trials {
        let _ = writeln!(
            s,
            "{},{:.10},{:.10},{},{}",
            t.trial, t.err_r_deg, t.err_t_deg, t.converged, t.iterations
        );
    }
    let _ = writeln!(
        s,
        "summary,{:.10},{:.10},{},{}",
        report.mean_err_r,
        report.mean_err_t,
        report.trials.len() - report.failures,
        report.failures
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_expected_rows() {
        let t2 = BenchSpec::preset(Scenario::Table2, 1, 0).rows().unwrap();
        assert_eq!(t2.len(), 7);
        assert_eq!(t2[0].0, "0.1");
        let t3 = BenchSpec::preset(Scenario::Table3, 1, 0).rows().unwrap();
        let labels: Vec<_> = t3.iter().map(|r| r.0.as_str()).collect();
        assert_eq!(labels, ["R1T1", "R1T2", "R2T1", "R2T2"]);
        assert!(t3.iter().all(|r| r.1.sigma_px == TABLE3_SIGMA));
    }

    #[test]
    fn custom_needs_poses_and_sigmas() {
        let spec = BenchSpec::preset(Scenario::Custom, 1, 0);
        assert!(matches!(spec.rows(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn spec_parses_from_json() {
        let spec: BenchSpec = serde_json::from_str(
            r#"{"scenario":"custom","sigma_list":[0.5],"trials":3,
                "poses":[{"name":"a","euler_deg":[0,10,0],"t_mm":[60,0,0]}]}"#,
        )
        .unwrap();
        let rows = spec.rows().unwrap();
        assert_eq!(rows[0].0, "a@0.5");
        assert_eq!(rows[0].1.trials, 3);
    }
}
