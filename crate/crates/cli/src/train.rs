//! Parallel, resumable surrogate training.
//!
//! Solves parallelize over design nodes; each node's interpolant is written
//! to disk the moment it is assembled, and a rerun against the same
//! configuration hash picks up only the missing nodes. Results are merged in
//! lattice order, so the trained model is identical whatever the thread
//! count.

use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use chrom_oed_core::sparse::SparseGridInterpolant;
use chrom_oed_core::surrogate::{SurrogateModel, TrainingPlan};
use rayon::prelude::*;

use crate::persist;
use crate::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub solve_count: usize,
    pub wall_seconds: f64,
    /// Per design node, lattice row-major; zero for nodes loaded from disk.
    pub per_node_seconds: Vec<f64>,
    pub nodes_loaded: usize,
    pub nodes_trained: usize,
}

/// Train in memory (no persistence).
pub fn train_parallel(plan: &TrainingPlan) -> CliResult<(SurrogateModel, TrainReport)> {
    let t0 = Instant::now();
    let width = plan.output_width();
    let results: Vec<(SparseGridInterpolant, f64)> = plan
        .grid
        .nodes()
        .par_iter()
        .map(|d| -> CliResult<(SparseGridInterpolant, f64)> {
            let t = Instant::now();
            let values = plan.node_training_values(d).map_err(|e| {
                CliError::Runtime(format!(
                    "forward solve failed at design ({}, {}): {e}",
                    d.tau_inj, d.c_feed
                ))
            })?;
            let interp = SparseGridInterpolant::from_values(plan.sparse_design(), width, &values)?;
            Ok((interp, t.elapsed().as_secs_f64()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let per_node_seconds: Vec<f64> = results.iter().map(|(_, s)| *s).collect();
    let interpolants: Vec<SparseGridInterpolant> = results.into_iter().map(|(i, _)| i).collect();
    let n = interpolants.len();
    let model = SurrogateModel::from_parts(plan, interpolants)?;
    Ok((
        model,
        TrainReport {
            solve_count: plan.solve_count(),
            wall_seconds: t0.elapsed().as_secs_f64(),
            per_node_seconds,
            nodes_loaded: 0,
            nodes_trained: n,
        },
    ))
}

/// Train with persistence under `dir`, resuming any nodes already on disk
/// for the same configuration hash. `force` discards existing state.
pub fn train_persistent(
    plan: &TrainingPlan,
    dir: &Path,
    config_hash: &str,
    force: bool,
) -> CliResult<(SurrogateModel, TrainReport)> {
    let t0 = Instant::now();
    let resume = !force
        && persist::read_manifest(dir)
            .map(|m| m.config_hash == config_hash)
            .unwrap_or(false);
    let mut manifest = persist::manifest_from_plan(plan, config_hash);
    if !resume {
        persist::write_manifest(dir, &manifest)?;
    }

    let width = plan.output_width();
    let nodes = plan.grid.nodes();
    let hashes = Mutex::new(vec![String::new(); nodes.len()]);
    let results: Vec<(SparseGridInterpolant, f64, bool)> = nodes
        .par_iter()
        .enumerate()
        .map(
            |(idx, d)| -> CliResult<(SparseGridInterpolant, f64, bool)> {
                let name = &manifest.node_files[idx];
                if resume && dir.join(name).exists() {
                    if let Ok(interp) = persist::load_node(dir, name) {
                        return Ok((interp, 0.0, true));
                    }
                }
                let t = Instant::now();
                let values = plan.node_training_values(d).map_err(|e| {
                    CliError::Runtime(format!(
                        "forward solve failed at design ({}, {}): {e}",
                        d.tau_inj, d.c_feed
                    ))
                })?;
                let interp =
                    SparseGridInterpolant::from_values(plan.sparse_design(), width, &values)?;
                let h = persist::save_node(dir, name, &interp)?;
                hashes.lock().expect("hash lock")[idx] = h;
                Ok((interp, t.elapsed().as_secs_f64(), false))
            },
        )
        .collect::<CliResult<Vec<_>>>()?;

    let mut node_hashes = hashes.into_inner().expect("hash lock");
    let per_node_seconds: Vec<f64> = results.iter().map(|(_, s, _)| *s).collect();
    let nodes_loaded = results.iter().filter(|(_, _, loaded)| *loaded).count();
    let interpolants: Vec<SparseGridInterpolant> = results.into_iter().map(|(i, _, _)| i).collect();
    let nodes_trained = interpolants.len() - nodes_loaded;
    // refresh hashes for loaded nodes so the manifest is complete
    for (idx, name) in manifest.node_files.iter().enumerate() {
        if node_hashes[idx].is_empty() {
            if let Ok(text) = std::fs::read_to_string(dir.join(name)) {
                node_hashes[idx] = format!("{:016x}", crate::config::fnv1a64(text.as_bytes()));
            }
        }
    }
    manifest.node_hashes = node_hashes;
    persist::write_manifest(dir, &manifest)?;

    let model = SurrogateModel::from_parts(plan, interpolants)?;
    Ok((
        model,
        TrainReport {
            solve_count: plan.solve_count(),
            wall_seconds: t0.elapsed().as_secs_f64(),
            per_node_seconds,
            nodes_loaded,
            nodes_trained,
        },
    ))
}
