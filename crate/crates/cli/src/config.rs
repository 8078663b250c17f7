//! The single TOML configuration document all commands read.
//!
//! Defaults reproduce the bundled chromatography case: the uncertainty box over
//! `(b1, b2, qs, ntp)`, the design rectangle, the true data-generating
//! parameters, noise level, horizon and phase ratio, with desk-scale
//! numerics (coarser solver grid, 5x5 training lattice, q = 7, M = 1000)
//! so a default run completes on a laptop. The full-scale settings from the
//! study (14x14 lattice, q = 9 / 1105 nodes, M = 10^4, 80k chains) are plain
//! overrides of the same fields.

use chrom_oed_core::mcmc::DramConfig;
use chrom_oed_core::model::{DesignBox, DesignPoint, ModelParams, ObservationSchedule, ParamBox};
use chrom_oed_core::solver::SolverConfig;
use chrom_oed_core::sparse::Placement;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Base seed; every command derives its streams from it.
    pub seed: u64,
    pub model: ModelSection,
    pub param_box: ParamBoxSection,
    pub design_box: DesignBoxSection,
    pub solver: SolverSection,
    pub schedule: ScheduleSection,
    pub simulate: SimulateSection,
    pub surrogate: SurrogateSection,
    pub eig: EigSection,
    pub dram: DramSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_808,
            model: ModelSection::default(),
            param_box: ParamBoxSection::default(),
            design_box: DesignBoxSection::default(),
            solver: SolverSection::default(),
            schedule: ScheduleSection::default(),
            simulate: SimulateSection::default(),
            surrogate: SurrogateSection::default(),
            eig: EigSection::default(),
            dram: DramSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub phase_ratio: f64,
    pub sigma: f64,
    pub upsilon: f64,
    pub true_theta: [f64; 4],
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            phase_ratio: 1.5,
            sigma: 0.05,
            upsilon: 10.0,
            true_theta: [0.05, 0.10, 10.0, 70.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamBoxSection {
    pub lower: [f64; 4],
    pub upper: [f64; 4],
}

impl Default for ParamBoxSection {
    fn default() -> Self {
        Self {
            lower: [0.02, 0.03, 8.0, 50.0],
            upper: [0.08, 0.17, 11.0, 180.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignBoxSection {
    pub tau_inj: [f64; 2],
    pub c_feed: [f64; 2],
}

impl Default for DesignBoxSection {
    fn default() -> Self {
        Self {
            tau_inj: [0.05, 3.0],
            c_feed: [1.0, 15.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub n_cells: usize,
    pub dense_output_stride: usize,
    pub eta: f64,
    /// Explicit step override; when absent the step comes from the CFL and
    /// diffusion bounds at the box's smallest plate number.
    pub dt: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            n_cells: 100,
            dense_output_stride: 2,
            eta: 1e-10,
            dt: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    /// Observation counts generated by `synth-data`.
    pub n_s: Vec<usize>,
    /// Time window the equidistant observation grids span.
    pub window: [f64; 2],
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            n_s: vec![8, 15, 20],
            window: [0.5, 9.5],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub tau_inj: f64,
    pub c_feed: f64,
    /// Observation count for the sampled-observation file.
    pub n_s: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            tau_inj: 1.0,
            c_feed: 5.0,
            n_s: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateSection {
    pub n_tau: usize,
    pub n_c: usize,
    pub q: usize,
    pub placement: PlacementChoice,
    pub n_time: usize,
}

impl Default for SurrogateSection {
    fn default() -> Self {
        Self {
            n_tau: 5,
            n_c: 5,
            q: 7,
            placement: PlacementChoice::Equidistant,
            n_time: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementChoice {
    Equidistant,
    ClenshawCurtis,
}

impl From<PlacementChoice> for Placement {
    fn from(p: PlacementChoice) -> Self {
        match p {
            PlacementChoice::Equidistant => Placement::Equidistant,
            PlacementChoice::ClenshawCurtis => Placement::ClenshawCurtis,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigSection {
    /// Ensemble size M.
    pub m: usize,
    /// Sweep lattice dimensions.
    pub n_tau: usize,
    pub n_c: usize,
    /// Observation count of the sweep schedule.
    pub n_s: usize,
}

impl Default for EigSection {
    fn default() -> Self {
        Self {
            m: 1000,
            n_tau: 5,
            n_c: 5,
            n_s: 15,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DramSection {
    pub chain_length: usize,
    pub burn_in: usize,
    /// Observation count of the synthetic data the posterior conditions on.
    pub n_s: usize,
    /// Design point the synthetic data is generated at.
    pub tau_inj: f64,
    pub c_feed: f64,
    pub adaptation_start: usize,
    pub adaptation_interval: usize,
    pub dr_shrink: f64,
    pub epsilon: f64,
}

impl Default for DramSection {
    fn default() -> Self {
        Self {
            chain_length: 12_000,
            burn_in: 4_000,
            n_s: 20,
            tau_inj: 1.525,
            c_feed: 8.0,
            adaptation_start: 1000,
            adaptation_interval: 100,
            dr_shrink: 0.2,
            epsilon: 1e-10,
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bx = self.param_box()?;
        if !bx.contains(&self.model.true_theta) {
            return Err(CliError::Config("true_theta lies outside param_box".into()));
        }
        self.design_box()?;
        self.solver_config()?;
        if self.schedule.n_s.is_empty() {
            return Err(CliError::Config("schedule.n_s must not be empty".into()));
        }
        Ok(())
    }

    /// Hash of the canonical serialized form; embedded in every output file.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        format!("{:016x}", fnv1a64(text.as_bytes()))
    }

    pub fn param_box(&self) -> CliResult<ParamBox> {
        Ok(ParamBox::new(self.param_box.lower, self.param_box.upper)?)
    }

    pub fn design_box(&self) -> CliResult<DesignBox> {
        Ok(DesignBox::new(
            (self.design_box.tau_inj[0], self.design_box.tau_inj[1]),
            (self.design_box.c_feed[0], self.design_box.c_feed[1]),
        )?)
    }

    pub fn true_params(&self) -> CliResult<ModelParams> {
        Ok(ModelParams::from_theta(
            self.model.true_theta,
            self.model.phase_ratio,
        )?)
    }

    pub fn solver_config(&self) -> CliResult<SolverConfig> {
        let min_ntp = self.param_box.lower[3];
        let stable = SolverConfig::stable(
            self.solver.n_cells,
            self.model.upsilon,
            min_ntp,
            self.solver.dense_output_stride,
        )?;
        // rebuild so the eta and dt overrides pass the same validation
        SolverConfig::new(
            stable.n_cells,
            self.solver.dt.unwrap_or(stable.dt),
            stable.upsilon,
            self.solver.eta,
            stable.dense_output_stride,
        )
        .map_err(Into::into)
    }

    pub fn schedule(&self, n_s: usize) -> CliResult<ObservationSchedule> {
        Ok(ObservationSchedule::equidistant(
            n_s,
            self.schedule.window[0],
            self.schedule.window[1],
            self.model.sigma,
            self.model.upsilon,
        )?)
    }

    pub fn simulate_design(&self) -> CliResult<DesignPoint> {
        Ok(DesignPoint::new(
            self.simulate.tau_inj,
            self.simulate.c_feed,
        )?)
    }

    pub fn dram_design(&self) -> CliResult<DesignPoint> {
        Ok(DesignPoint::new(self.dram.tau_inj, self.dram.c_feed)?)
    }

    pub fn dram_config(&self, seed: u64) -> CliResult<DramConfig> {
        let bx = self.param_box()?;
        let mut cfg = DramConfig::for_box(&bx, self.dram.chain_length, self.dram.burn_in, seed)?;
        cfg.adaptation_start = self.dram.adaptation_start;
        cfg.adaptation_interval = self.dram.adaptation_interval;
        cfg.dr_shrink = self.dram.dr_shrink;
        cfg.epsilon = self.dram.epsilon;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// FNV-1a 64-bit; stable, dependency-free content hashing for file headers.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_stable() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.hash(), RunConfig::default().hash());
    }

    #[test]
    fn hash_changes_with_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        b.eig.m = 2000;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg.hash(), back.hash());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let result: Result<RunConfig, _> = toml::from_str("walrus = 3\n");
        assert!(result.is_err());
    }

    #[test]
    fn out_of_range_eta_is_rejected() {
        let mut cfg = RunConfig::default();
        cfg.solver.eta = 0.5;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn true_theta_outside_box_is_a_config_error() {
        let mut cfg = RunConfig::default();
        cfg.model.true_theta = [0.5, 0.1, 10.0, 70.0];
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }
}
