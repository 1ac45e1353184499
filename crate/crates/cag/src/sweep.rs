//! Threshold sweeps with prefix-coupled replicates.

use std::fmt::Write as _;
use std::path::Path;

use cag_core::exact::{disconnect_union_bound, var_isolated, UNION_BOUND_N_CAP};
use cag_core::sim::McEstimate;
use cag_core::sweep::{lambda_for, solve_m_for_lambda};
use cag_core::{CommunityLaw, LayerSchedule};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::format::{fmt_f64, json_f64, load_law, read_file};
use crate::montecarlo::{mc_prefixes, McConnectivity};

pub const SWEEP_HEADER: &str =
    "lambda_target,m,lambda_actual,frac_connected,se_connected,mean_n0,se_n0,frac_n0_zero,en0_exact,varn0_exact,union_bound_S";

/// Sweep description read from JSON. `law` is an inline law or a path,
/// resolved against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: u64,
    pub law: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_grid: Option<Vec<u64>>,
    pub replicates: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Lambda(Vec<f64>),
    Layers(Vec<u64>),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Lambda(g) => g.len(),
            Grid::Layers(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SweepConfig {
    pub fn grid(&self) -> AppResult<Grid> {
        let grid = match (&self.lambda_grid, &self.m_grid) {
            (Some(l), None) => Grid::Lambda(l.clone()),
            (None, Some(m)) => Grid::Layers(m.clone()),
            _ => {
                return Err(AppError::Parse(
                    "sweep config needs exactly one of lambda_grid and m_grid".into(),
                ))
            }
        };
        if grid.is_empty() {
            return Err(AppError::Parse("sweep grid is empty".into()));
        }
        if self.replicates == 0 {
            return Err(AppError::Parse("replicates must be >= 1".into()));
        }
        if self.workers == Some(0) {
            return Err(AppError::Parse("workers must be >= 1".into()));
        }
        Ok(grid)
    }
}

/// Reads a config and its law.
pub fn load_sweep_config(path: &Path) -> AppResult<(SweepConfig, CommunityLaw)> {
    let text = read_file(path)?;
    let config: SweepConfig = serde_json::from_str(&text).map_err(|e| AppError::Parse(format!("sweep config: {e}")))?;
    config.grid()?;
    let law = if crate::format::is_inline_law(&config.law) {
        load_law(&config.law)?
    } else {
        let base = path.parent().unwrap_or(Path::new("."));
        load_law(&base.join(&config.law).to_string_lossy())?
    };
    Ok((config, law))
}

/// Monte Carlo and exact values at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub m: u64,
    pub lambda_actual: f64,
    pub fraction_connected: McEstimate,
    pub mean_n0: McEstimate,
    pub frac_n0_zero: McEstimate,
    pub expected_n0_exact: f64,
    pub var_n0_exact: f64,
    /// `None` above the exact-module size cap.
    pub union_bound_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// `None` for points given by layer count.
    pub lambda_target: Option<f64>,
    pub result: Result<PointResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Per-point, per-replicate connectivity indicators; empty for failed points.
    pub connected: Vec<Vec<bool>>,
}

/// `(m, lambda_actual)` for a grid point, or why it has none.
type Solved = Result<(u64, f64), String>;

/// Runs every grid point in order. All points share replicate seeds and each
/// replicate grows one graph through the ascending layer counts, so a
/// replicate's point with more layers contains its point with fewer.
pub fn run_sweep(
    config: &SweepConfig,
    law: &CommunityLaw,
    master_seed: u64,
    workers: usize,
) -> AppResult<SweepOutcome> {
    let grid = config.grid()?;
    let n = config.n;
    let kappa = if config.truncated {
        law.kappa_truncated(n)
    } else {
        law.kappa()
    };
    let points: Vec<(Option<f64>, Solved)> = match &grid {
        Grid::Lambda(g) => g
            .iter()
            .map(|&t| {
                let sol = solve_m_for_lambda(n, law, t, config.truncated)
                    .map(|s| (s.m, s.lambda_actual))
                    .map_err(|e| e.to_string());
                (Some(t), sol)
            })
            .collect(),
        Grid::Layers(g) => g
            .iter()
            .map(|&m| {
                let sol = if n < 2 {
                    Err(format!("need n >= 2, got {n}"))
                } else {
                    Ok((m, lambda_for(n, m, kappa)))
                };
                (None, sol)
            })
            .collect(),
    };

    let mut checkpoints: Vec<u64> = points
        .iter()
        .filter_map(|(_, p)| p.as_ref().ok().map(|&(m, _)| m))
        .collect();
    checkpoints.sort_unstable();
    checkpoints.dedup();

    let prefixes = match checkpoints.last() {
        Some(&max_m) => {
            let schedule = LayerSchedule::iid(n, law.clone(), max_m)?;
            log::info!(
                "sweep: n = {n}, {} points, {} replicates, up to {max_m} layers",
                points.len(),
                config.replicates
            );
            mc_prefixes(&schedule, &checkpoints, config.replicates, master_seed, workers)?
        }
        None => Vec::new(),
    };

    let mut rows = Vec::with_capacity(points.len());
    let mut connected = Vec::with_capacity(points.len());
    for (lambda_target, point) in points {
        let result = point.and_then(|(m, lambda_actual)| {
            let idx = checkpoints.binary_search(&m).expect("every solved m is a checkpoint");
            let stats = prefixes.iter().map(|rep| rep[idx]).collect();
            let mc = McConnectivity::from_stats(stats, master_seed);
            exact_point(n, law, m).map(|(en0, varn0, s)| {
                connected.push(mc.stats.iter().map(|s| s.connected).collect());
                PointResult {
                    m,
                    lambda_actual,
                    fraction_connected: mc.fraction_connected,
                    mean_n0: mc.mean_n0,
                    frac_n0_zero: mc.n0_zero,
                    expected_n0_exact: en0,
                    var_n0_exact: varn0,
                    union_bound_s: s,
                }
            })
        });
        if let Err(msg) = &result {
            log::warn!("sweep point failed: {msg}");
            connected.push(Vec::new());
        }
        rows.push(SweepRow { lambda_target, result });
    }
    Ok(SweepOutcome { rows, connected })
}

fn exact_point(n: u64, law: &CommunityLaw, m: u64) -> Result<(f64, f64, Option<f64>), String> {
    let schedule = LayerSchedule::iid(n, law.clone(), m).map_err(|e| e.to_string())?;
    let moments = var_isolated(&schedule).map_err(|e| e.to_string())?;
    let s = if n > UNION_BOUND_N_CAP {
        None
    } else {
        Some(
            disconnect_union_bound(&schedule, None, false)
                .map_err(|e| e.to_string())?
                .s,
        )
    };
    Ok((moments.expected_n0, moments.var_n0, s))
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let target = row.lambda_target.map(fmt_f64).unwrap_or_default();
        match &row.result {
            Ok(p) => {
                let s = p.union_bound_s.map(fmt_f64).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "{target},{},{},{},{},{},{},{},{},{},{s}",
                    p.m,
                    fmt_f64(p.lambda_actual),
                    fmt_f64(p.fraction_connected.mean),
                    fmt_f64(p.fraction_connected.std_error),
                    fmt_f64(p.mean_n0.mean),
                    fmt_f64(p.mean_n0.std_error),
                    fmt_f64(p.frac_n0_zero.mean),
                    fmt_f64(p.expected_n0_exact),
                    fmt_f64(p.var_n0_exact),
                );
            }
            Err(_) => {
                let _ = writeln!(out, "{target},FAILED,,,,,,,,,");
            }
        }
    }
    out
}

pub fn sweep_json(rows: &[SweepRow]) -> serde_json::Value {
    let rows = rows
        .iter()
        .map(|row| {
            let mut obj = serde_json::Map::new();
            obj.insert(
                "lambda_target".into(),
                row.lambda_target.map_or(serde_json::Value::Null, json_f64),
            );
            match &row.result {
                Ok(p) => {
                    obj.insert("m".into(), p.m.into());
                    obj.insert("lambda_actual".into(), json_f64(p.lambda_actual));
                    obj.insert("frac_connected".into(), json_f64(p.fraction_connected.mean));
                    obj.insert("se_connected".into(), json_f64(p.fraction_connected.std_error));
                    obj.insert("mean_n0".into(), json_f64(p.mean_n0.mean));
                    obj.insert("se_n0".into(), json_f64(p.mean_n0.std_error));
                    obj.insert("frac_n0_zero".into(), json_f64(p.frac_n0_zero.mean));
                    obj.insert("en0_exact".into(), json_f64(p.expected_n0_exact));
                    obj.insert("varn0_exact".into(), json_f64(p.var_n0_exact));
                    obj.insert(
                        "union_bound_S".into(),
                        p.union_bound_s.map_or(serde_json::Value::Null, json_f64),
                    );
                }
                Err(msg) => {
                    obj.insert("error".into(), msg.clone().into());
                }
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    serde_json::Value::Array(rows)
}
