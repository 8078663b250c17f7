//! Surrogate persistence: a directory holding `manifest.json` plus one
//! interpolant file per design node, written as each node finishes so an
//! interrupted training run resumes where it stopped.

use std::fs;
use std::path::{Path, PathBuf};

use chrom_oed_core::model::{DesignBox, DesignGrid, ParamBox};
use chrom_oed_core::sparse::SparseGridInterpolant;
use chrom_oed_core::surrogate::{SurrogateModel, TrainingPlan};
use serde::{Deserialize, Serialize};

use crate::config::fnv1a64;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurrogateManifest {
    pub config_hash: String,
    pub param_box: ParamBox,
    pub design_box: DesignBox,
    pub grid: DesignGrid,
    pub time_grid: Vec<f64>,
    pub phase_ratio: f64,
    pub q: usize,
    pub placement: String,
    pub nodes_per_design: usize,
    pub node_files: Vec<String>,
    /// FNV-1a hash of each node file's contents, filled as nodes complete.
    pub node_hashes: Vec<String>,
}

pub fn node_file_name(i: usize, j: usize) -> String {
    format!("node_{i:03}_{j:03}.json")
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}

/// Write the manifest skeleton before training starts.
pub fn write_manifest(dir: &Path, manifest: &SurrogateManifest) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    fs::write(manifest_path(dir), serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> CliResult<SurrogateManifest> {
    let text = fs::read_to_string(manifest_path(dir))
        .map_err(|e| CliError::Runtime(format!("no manifest in {}: {e}", dir.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn manifest_from_plan(plan: &TrainingPlan, config_hash: &str) -> SurrogateManifest {
    let mut node_files = Vec::with_capacity(plan.grid.len());
    for i in 0..plan.grid.n_tau() {
        for j in 0..plan.grid.n_c() {
            node_files.push(node_file_name(i, j));
        }
    }
    SurrogateManifest {
        config_hash: config_hash.to_string(),
        param_box: plan.param_box,
        design_box: plan.design_box,
        grid: plan.grid.clone(),
        time_grid: plan.time_grid.clone(),
        phase_ratio: plan.phase_ratio,
        q: plan.sparse_design().level(),
        placement: format!("{:?}", plan.sparse_design().placement()),
        nodes_per_design: plan.sparse_design().node_count(),
        node_files,
        node_hashes: vec![String::new(); plan.grid.len()],
    }
}

pub fn save_node(dir: &Path, name: &str, interp: &SparseGridInterpolant) -> CliResult<String> {
    let text = serde_json::to_string(interp)?;
    let hash = format!("{:016x}", fnv1a64(text.as_bytes()));
    fs::write(dir.join(name), text)?;
    Ok(hash)
}

pub fn load_node(dir: &Path, name: &str) -> CliResult<SparseGridInterpolant> {
    let text = fs::read_to_string(dir.join(name))?;
    Ok(serde_json::from_str(&text)?)
}

/// Load a fully persisted model.
pub fn load_surrogate(dir: &Path) -> CliResult<(SurrogateModel, SurrogateManifest)> {
    let manifest = read_manifest(dir)?;
    let mut interpolants = Vec::with_capacity(manifest.node_files.len());
    for name in &manifest.node_files {
        interpolants.push(load_node(dir, name)?);
    }
    let model = SurrogateModel::from_raw(
        manifest.param_box,
        manifest.design_box,
        manifest.grid.clone(),
        manifest.time_grid.clone(),
        manifest.phase_ratio,
        interpolants,
    )?;
    Ok((model, manifest))
}
