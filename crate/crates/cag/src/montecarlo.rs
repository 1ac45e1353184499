//! Replicate-parallel Monte Carlo over the core sampler.

use cag_core::sim::{connectivity_stats, ConnectivityStats, GraphSampler, McEstimate};
use cag_core::LayerSchedule;
use rayon::prelude::*;

use crate::error::{AppError, AppResult};

/// The three connectivity estimates, all from the same samples.
#[derive(Debug, Clone, PartialEq)]
pub struct McConnectivity {
    pub fraction_connected: McEstimate,
    pub mean_n0: McEstimate,
    pub n0_zero: McEstimate,
    pub stats: Vec<ConnectivityStats>,
}

impl McConnectivity {
    pub fn from_stats(stats: Vec<ConnectivityStats>, master_seed: u64) -> Self {
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        McConnectivity {
            fraction_connected: McEstimate::from_values(
                "fraction_connected",
                master_seed,
                stats.iter().map(|s| ind(s.connected)),
            ),
            mean_n0: McEstimate::from_values("mean_n0", master_seed, stats.iter().map(|s| s.isolated as f64)),
            n0_zero: McEstimate::from_values("n0_zero", master_seed, stats.iter().map(|s| ind(s.isolated == 0))),
            stats,
        }
    }
}

/// Evaluates `f` on every replicate index in `0..replicates`, using `workers`
/// threads. Results come back in replicate order whatever the worker count.
pub fn map_replicates<T, F>(
    schedule: &LayerSchedule,
    master_seed: u64,
    replicates: u64,
    workers: usize,
    f: F,
) -> AppResult<Vec<T>>
where
    T: Send,
    F: Fn(&mut GraphSampler<'_>, u64) -> cag_core::Result<T> + Sync,
{
    let proto = GraphSampler::new(schedule, master_seed)?;
    if workers <= 1 {
        let mut sampler = proto;
        return (0..replicates)
            .map(|r| f(&mut sampler, r).map_err(AppError::from))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AppError::Io(format!("worker pool: {e}")))?;
    pool.install(|| {
        (0..replicates)
            .into_par_iter()
            .map_init(|| proto.clone(), |s, r| f(s, r).map_err(AppError::from))
            .collect()
    })
}

pub fn mc_connectivity(
    schedule: &LayerSchedule,
    replicates: u64,
    master_seed: u64,
    workers: usize,
) -> AppResult<McConnectivity> {
    if replicates == 0 {
        return Err(AppError::Core(cag_core::Error::Domain(
            "replicates must be >= 1".into(),
        )));
    }
    let stats = map_replicates(schedule, master_seed, replicates, workers, |s, r| {
        s.sample(r, false).map(|g| connectivity_stats(&g))
    })?;
    Ok(McConnectivity::from_stats(stats, master_seed))
}

/// Per-replicate connectivity after each of the ascending layer counts in
/// `checkpoints`; outer index is the replicate.
pub fn mc_prefixes(
    schedule: &LayerSchedule,
    checkpoints: &[u64],
    replicates: u64,
    master_seed: u64,
    workers: usize,
) -> AppResult<Vec<Vec<ConnectivityStats>>> {
    map_replicates(schedule, master_seed, replicates, workers, |s, r| {
        s.sample_prefixes(r, checkpoints)
    })
}
