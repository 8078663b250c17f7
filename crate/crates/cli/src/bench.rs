//! Wall-clock comparison of the forward paths: mean solver time, mean
//! surrogate evaluation time, the per-design-node cost of one utility
//! estimate with each backend, and DRAM throughput.

use std::time::Instant;

use chrom_oed_core::model::ModelParams;
use chrom_oed_core::oed::{sample_prior, ForwardModel, SolverBackend};
use chrom_oed_core::random::child_seed;
use chrom_oed_core::surrogate::SurrogateModel;
use serde::Serialize;

use crate::config::RunConfig;
use crate::sweep;
use crate::CliResult;

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub mean_solve_seconds: f64,
    pub mean_surrogate_eval_seconds: f64,
    pub speedup: f64,
    pub eig_node_seconds_solver: f64,
    pub eig_node_seconds_surrogate: f64,
    pub dram_seconds_per_1k_iterations_surrogate: f64,
    pub eig_m: usize,
}

pub fn run_bench(config: &RunConfig, model: &SurrogateModel) -> CliResult<BenchReport> {
    let solver_cfg = config.solver_config()?;
    let bx = config.param_box()?;
    let schedule = config.schedule(config.eig.n_s)?;
    let backend = SolverBackend { config: solver_cfg };
    let d = config.simulate_design()?;

    // spread the probe parameters over the box
    let n_probe = 12;
    let thetas: Vec<ModelParams> = sample_prior(
        &bx,
        n_probe,
        child_seed(config.seed, 90),
        config.model.phase_ratio,
    );

    let t0 = Instant::now();
    for theta in &thetas {
        backend.predict(theta, &d, &schedule)?;
    }
    let mean_solve = t0.elapsed().as_secs_f64() / n_probe as f64;

    let n_eval = 2000;
    let t1 = Instant::now();
    for i in 0..n_eval {
        let theta = &thetas[i % n_probe];
        model.predict(theta, &d, &schedule)?;
    }
    let mean_eval = t1.elapsed().as_secs_f64() / n_eval as f64;

    // one utility estimate per backend at the configured ensemble size
    let eig_cfg = chrom_oed_core::oed::EigConfig::new(
        config.eig.m,
        child_seed(config.seed, 91),
        schedule.clone(),
    )?;
    let thetas_m = sample_prior(
        &bx,
        eig_cfg.m,
        child_seed(eig_cfg.seed, 0),
        config.model.phase_ratio,
    );
    let t2 = Instant::now();
    let pred = sweep::map_ensemble_parallel(&backend, &thetas_m, &d, &schedule)?;
    sweep::eig_parallel(&pred, eig_cfg.sigma, child_seed(eig_cfg.seed, 1))?;
    let eig_solver = t2.elapsed().as_secs_f64();
    let t3 = Instant::now();
    let pred = sweep::map_ensemble_parallel(model, &thetas_m, &d, &schedule)?;
    sweep::eig_parallel(&pred, eig_cfg.sigma, child_seed(eig_cfg.seed, 1))?;
    let eig_surrogate = t3.elapsed().as_secs_f64();

    // short surrogate-backend chain extrapolated to per-1k-iteration cost
    let obs = {
        let truth = config.true_params()?;
        model.predict(
            &truth,
            &config.dram_design()?,
            &config.schedule(config.dram.n_s)?,
        )?
    };
    let dram_schedule = config.schedule(config.dram.n_s)?;
    let dram_design = config.dram_design()?;
    let mut dram_cfg = config.dram_config(child_seed(config.seed, 92))?;
    dram_cfg.chain_length = 1000;
    dram_cfg.burn_in = 1;
    let fr = config.model.phase_ratio;
    let t4 = Instant::now();
    chrom_oed_core::mcmc::dram_run(&dram_cfg, |theta| {
        chrom_oed_core::mcmc::log_posterior(
            theta,
            &obs,
            &dram_schedule,
            &dram_design,
            model,
            &bx,
            fr,
        )
    })?;
    let dram_1k = t4.elapsed().as_secs_f64();

    Ok(BenchReport {
        mean_solve_seconds: mean_solve,
        mean_surrogate_eval_seconds: mean_eval,
        speedup: mean_solve / mean_eval,
        eig_node_seconds_solver: eig_solver,
        eig_node_seconds_surrogate: eig_surrogate,
        dram_seconds_per_1k_iterations_surrogate: dram_1k,
        eig_m: config.eig.m,
    })
}
