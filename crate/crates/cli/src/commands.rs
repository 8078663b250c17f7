//! Implementations of the six subcommands.
//!
//! Every command is deterministic given the configuration file (all seeds
//! derive from `config.seed`), embeds the configuration hash in each output
//! file and skips outputs that already carry the current hash unless
//! `--force` is set. Synthetic measurement data is always generated with the
//! full solver; the `--backend` switch only selects the forward model used
//! inside estimators and samplers.

use std::path::{Path, PathBuf};

use chrom_oed_core::mcmc::{chain_summary, dram_run, log_posterior};
use chrom_oed_core::model::{DesignGrid, DesignPoint, Observation};
use chrom_oed_core::oed::{
    argmax_design, argmin_design, EigConfig, ForwardModel, SolverBackend, UtilityMap,
};
use chrom_oed_core::random::{child_seed, rng_from_seed, standard_normal};
use chrom_oed_core::solver::{observe, solve_forward, BreakthroughCurve};
use chrom_oed_core::surrogate::{SurrogateModel, TrainingPlan};

use crate::config::RunConfig;
use crate::{bench, io, persist, sweep, train, CliError, CliResult};

/// Seed stream labels, one per consumer of randomness.
mod streams {
    pub const SIMULATE_NOISE: u64 = 40;
    pub const SYNTH_NOISE_BASE: u64 = 50;
    pub const VALIDATION: u64 = 60;
    pub const EIG: u64 = 70;
    pub const POSTERIOR_DATA: u64 = 80;
    pub const POSTERIOR_CHAIN: u64 = 81;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Solver,
    Surrogate,
    Both,
}

pub struct Ctx {
    pub config: RunConfig,
    pub hash: String,
    pub out: PathBuf,
    pub force: bool,
}

impl Ctx {
    pub fn new(config: RunConfig, out: PathBuf, force: bool) -> Self {
        let hash = config.hash();
        Self {
            config,
            hash,
            out,
            force,
        }
    }

    fn fresh(&self, path: &Path) -> bool {
        self.force || !io::is_up_to_date(path, &self.hash)
    }
}

fn curve_rows(curve: &BreakthroughCurve) -> impl Iterator<Item = String> + '_ {
    curve
        .times
        .iter()
        .zip(&curve.c1_out)
        .zip(&curve.c2_out)
        .map(|((t, a), b)| format!("{t},{a},{b}"))
}

fn add_noise(obs: &Observation, sigma: f64, seed: u64) -> Observation {
    let mut rng = rng_from_seed(seed);
    Observation {
        values: obs
            .values
            .iter()
            .map(|v| v + sigma * standard_normal(&mut rng))
            .collect(),
    }
}

fn observation_rows<'a>(
    times: &'a [f64],
    obs: &'a Observation,
) -> impl Iterator<Item = String> + 'a {
    let n = times.len();
    times
        .iter()
        .enumerate()
        .map(move |(i, t)| format!("{t},{},{}", obs.values[i], obs.values[n + i]))
}

/// `simulate`: one forward solve at the configured design, plus a noisy
/// observation file on the `simulate.n_s` schedule.
pub fn cmd_simulate(ctx: &Ctx) -> CliResult<()> {
    let cfg = &ctx.config;
    let solver = cfg.solver_config()?;
    let truth = cfg.true_params()?;
    let d = cfg.simulate_design()?;
    let schedule = cfg.schedule(cfg.simulate.n_s)?;

    let curve_path = ctx.out.join("curve.csv");
    let obs_path = ctx
        .out
        .join(format!("observations_ns{}.csv", cfg.simulate.n_s));
    if !ctx.fresh(&curve_path) && !ctx.fresh(&obs_path) {
        eprintln!("simulate: outputs up to date, skipping (use --force to rerun)");
        return Ok(());
    }

    let curve = solve_forward(&truth, &d, &solver)?;
    let clean = observe(&curve, &schedule)?;
    let noisy = add_noise(
        &clean,
        cfg.model.sigma,
        child_seed(cfg.seed, streams::SIMULATE_NOISE),
    );

    io::write_csv(
        &curve_path,
        &ctx.hash,
        "tau,c1_out,c2_out",
        curve_rows(&curve),
    )?;
    io::write_csv(
        &obs_path,
        &ctx.hash,
        "tau,c1_obs,c2_obs",
        observation_rows(&schedule.times, &noisy),
    )?;
    println!(
        "simulate: wrote {} ({} points) and {} ({} times)",
        curve_path.display(),
        curve.times.len(),
        obs_path.display(),
        schedule.n_times()
    );
    Ok(())
}

/// `synth-data`: noisy observation files for every configured observation
/// count, all derived from one solver run at the posterior design point.
pub fn cmd_synth_data(ctx: &Ctx) -> CliResult<()> {
    let cfg = &ctx.config;
    let solver = cfg.solver_config()?;
    let truth = cfg.true_params()?;
    let d = cfg.dram_design()?;

    let curve_path = ctx.out.join("synth_curve.csv");
    let all_fresh = ctx.fresh(&curve_path)
        || cfg
            .schedule
            .n_s
            .iter()
            .any(|n| ctx.fresh(&ctx.out.join(format!("synth_obs_ns{n}.csv"))));
    if !all_fresh {
        eprintln!("synth-data: outputs up to date, skipping");
        return Ok(());
    }

    let curve = solve_forward(&truth, &d, &solver)?;
    io::write_csv(
        &curve_path,
        &ctx.hash,
        "tau,c1_out,c2_out",
        curve_rows(&curve),
    )?;
    let mut meta = serde_json::Map::new();
    for &n_s in &cfg.schedule.n_s {
        let schedule = cfg.schedule(n_s)?;
        let clean = observe(&curve, &schedule)?;
        let seed = child_seed(cfg.seed, streams::SYNTH_NOISE_BASE + n_s as u64);
        let noisy = add_noise(&clean, cfg.model.sigma, seed);
        let path = ctx.out.join(format!("synth_obs_ns{n_s}.csv"));
        io::write_csv(
            &path,
            &ctx.hash,
            "tau,c1_obs,c2_obs",
            observation_rows(&schedule.times, &noisy),
        )?;
        meta.insert(
            format!("ns{n_s}"),
            serde_json::json!({"noise_seed": seed, "k": 2 * n_s, "file": format!("synth_obs_ns{n_s}.csv")}),
        );
    }
    meta.insert(
        "design".into(),
        serde_json::json!({"tau_inj": d.tau_inj, "c_feed": d.c_feed}),
    );
    meta.insert("sigma".into(), serde_json::json!(cfg.model.sigma));
    io::write_json(
        &ctx.out.join("synth_meta.json"),
        &ctx.hash,
        serde_json::Value::Object(meta),
    )?;
    println!(
        "synth-data: wrote curve and {} observation files",
        cfg.schedule.n_s.len()
    );
    Ok(())
}

fn surrogate_dir(ctx: &Ctx) -> PathBuf {
    ctx.out.join("surrogate")
}

fn training_plan(cfg: &RunConfig) -> CliResult<TrainingPlan> {
    Ok(TrainingPlan::new(
        cfg.solver_config()?,
        cfg.param_box()?,
        cfg.design_box()?,
        cfg.surrogate.n_tau,
        cfg.surrogate.n_c,
        cfg.surrogate.q,
        cfg.surrogate.placement.into(),
        cfg.model.phase_ratio,
        cfg.surrogate.n_time,
    )?)
}

/// Load the persisted surrogate when it matches the configuration, train
/// (resumably) otherwise.
pub fn obtain_surrogate(ctx: &Ctx) -> CliResult<SurrogateModel> {
    let dir = surrogate_dir(ctx);
    if !ctx.force {
        if let Ok((model, manifest)) = persist::load_surrogate(&dir) {
            if manifest.config_hash == ctx.hash {
                eprintln!(
                    "surrogate: loaded {} design nodes from {}",
                    model.grid().len(),
                    dir.display()
                );
                return Ok(model);
            }
        }
    }
    let plan = training_plan(&ctx.config)?;
    eprintln!(
        "surrogate: training {} nodes x {} design points ({} forward solves)",
        plan.sparse_design().node_count(),
        plan.grid.len(),
        plan.solve_count()
    );
    let (model, report) = train::train_persistent(&plan, &dir, &ctx.hash, ctx.force)?;
    eprintln!(
        "surrogate: trained {} / loaded {} nodes in {:.1} s",
        report.nodes_trained, report.nodes_loaded, report.wall_seconds
    );
    Ok(model)
}

/// `train-surrogate`: build or resume the surrogate, then validate it
/// against the solver on random draws.
pub fn cmd_train_surrogate(ctx: &Ctx) -> CliResult<()> {
    let cfg = &ctx.config;
    let plan = training_plan(cfg)?;
    let dir = surrogate_dir(ctx);
    let (model, report) = train::train_persistent(&plan, &dir, &ctx.hash, ctx.force)?;
    let solver = cfg.solver_config()?;
    let validation = model.validate(&solver, 50, child_seed(cfg.seed, streams::VALIDATION))?;

    io::write_json(
        &ctx.out.join("training.json"),
        &ctx.hash,
        serde_json::json!({
            "solve_count": report.solve_count,
            "wall_seconds": report.wall_seconds,
            "nodes_trained": report.nodes_trained,
            "nodes_loaded": report.nodes_loaded,
            "per_node_seconds": report.per_node_seconds,
            "nodes_per_design": model.nodes_per_design(),
            "design_grid": {"n_tau": cfg.surrogate.n_tau, "n_c": cfg.surrogate.n_c},
            "q": cfg.surrogate.q,
        }),
    )?;
    io::write_json(
        &ctx.out.join("validation.json"),
        &ctx.hash,
        serde_json::json!({
            "n_samples": validation.n_samples,
            "seed": validation.seed,
            "sup_c1": validation.sup[0],
            "sup_c2": validation.sup[1],
            "rms_c1": validation.rms[0],
            "rms_c2": validation.rms[1],
        }),
    )?;
    println!(
        "train-surrogate: {} solves in {:.1} s; validation sup deviation c1 = {:.4}, c2 = {:.4} mol/L",
        report.solve_count, report.wall_seconds, validation.sup[0], validation.sup[1]
    );
    Ok(())
}

fn write_map(ctx: &Ctx, map: &UtilityMap, name: &str, seed: u64) -> CliResult<()> {
    let path = ctx.out.join(format!("utility_{name}.csv"));
    let n_c = map.lattice.n_c();
    io::write_csv(
        &path,
        &ctx.hash,
        "tau_inj,c_feed,U,stderr_proxy",
        map.u.iter().enumerate().map(|(idx, u)| {
            let d = map.lattice.node(idx / n_c, idx % n_c);
            format!("{},{},{u},{}", d.tau_inj, d.c_feed, map.stderr[idx])
        }),
    )?;
    let (best, value) = argmax_design(map);
    let (worst, worst_value) = argmin_design(map);
    io::write_json(
        &ctx.out.join(format!("argmax_{name}.json")),
        &ctx.hash,
        serde_json::json!({
            "backend": map.backend_id,
            "m": map.m,
            "seed": seed,
            "argmax": {"tau_inj": best.tau_inj, "c_feed": best.c_feed, "u": value},
            "argmin": {"tau_inj": worst.tau_inj, "c_feed": worst.c_feed, "u": worst_value},
            "wall_per_node_seconds": map.wall_per_node,
        }),
    )?;
    println!(
        "utility-map[{name}]: argmax at (tau_inj = {}, c_feed = {}) with U = {value:.4}",
        best.tau_inj, best.c_feed
    );
    Ok(())
}

/// `utility-map`: sweep the expected information gain over the design
/// lattice with the selected backend(s); in `both` mode also emit the
/// difference map.
pub fn cmd_utility_map(ctx: &Ctx, backend: Backend) -> CliResult<()> {
    let cfg = &ctx.config;
    let lattice = DesignGrid::equidistant(&cfg.design_box()?, cfg.eig.n_tau, cfg.eig.n_c)?;
    let eig_cfg = EigConfig::new(
        cfg.eig.m,
        child_seed(cfg.seed, streams::EIG),
        cfg.schedule(cfg.eig.n_s)?,
    )?;
    let bx = cfg.param_box()?;
    let fr = cfg.model.phase_ratio;

    let solver_map = |_ctx: &Ctx| -> CliResult<UtilityMap> {
        let backend = SolverBackend {
            config: cfg.solver_config()?,
        };
        sweep::utility_map_timed(&backend, &lattice, &eig_cfg, &bx, fr)
    };
    let surrogate_map = |ctx: &Ctx| -> CliResult<UtilityMap> {
        let model = obtain_surrogate(ctx)?;
        sweep::utility_map_timed(&model, &lattice, &eig_cfg, &bx, fr)
    };

    match backend {
        Backend::Solver => write_map(ctx, &solver_map(ctx)?, "solver", eig_cfg.seed)?,
        Backend::Surrogate => write_map(ctx, &surrogate_map(ctx)?, "surrogate", eig_cfg.seed)?,
        Backend::Both => {
            let a = solver_map(ctx)?;
            let b = surrogate_map(ctx)?;
            write_map(ctx, &a, "solver", eig_cfg.seed)?;
            write_map(ctx, &b, "surrogate", eig_cfg.seed)?;
            let n_c = lattice.n_c();
            io::write_csv(
                &ctx.out.join("utility_diff.csv"),
                &ctx.hash,
                "tau_inj,c_feed,delta_U,combined_stderr",
                a.u.iter().enumerate().map(|(idx, u)| {
                    let d = lattice.node(idx / n_c, idx % n_c);
                    let delta = u - b.u[idx];
                    let comb =
                        (a.stderr[idx] * a.stderr[idx] + b.stderr[idx] * b.stderr[idx]).sqrt();
                    format!("{},{},{delta},{comb}", d.tau_inj, d.c_feed)
                }),
            )?;
            println!(
                "utility-map[both]: wrote difference map over {} nodes",
                lattice.len()
            );
        }
    }
    Ok(())
}

/// Synthetic data for the posterior runs: solver truth plus seeded noise.
pub fn posterior_data(cfg: &RunConfig) -> CliResult<(Observation, DesignPoint)> {
    let solver = cfg.solver_config()?;
    let truth = cfg.true_params()?;
    let d = cfg.dram_design()?;
    let schedule = cfg.schedule(cfg.dram.n_s)?;
    let clean = observe(&solve_forward(&truth, &d, &solver)?, &schedule)?;
    Ok((
        add_noise(
            &clean,
            cfg.model.sigma,
            child_seed(cfg.seed, streams::POSTERIOR_DATA),
        ),
        d,
    ))
}

fn run_posterior_chain(
    cfg: &RunConfig,
    backend: &dyn ForwardModel,
    obs: &Observation,
    d: &DesignPoint,
) -> CliResult<chrom_oed_core::mcmc::Chain> {
    let bx = cfg.param_box()?;
    let schedule = cfg.schedule(cfg.dram.n_s)?;
    let dram_cfg = cfg.dram_config(child_seed(cfg.seed, streams::POSTERIOR_CHAIN))?;
    let fr = cfg.model.phase_ratio;
    Ok(dram_run(&dram_cfg, |theta| {
        log_posterior(theta, obs, &schedule, d, backend, &bx, fr)
    })?)
}

fn write_chain(ctx: &Ctx, chain: &chrom_oed_core::mcmc::Chain, name: &str) -> CliResult<()> {
    io::write_csv(
        &ctx.out.join(format!("chain_{name}.csv")),
        &ctx.hash,
        "b1,b2,qs,ntp,logpost",
        chain
            .samples
            .iter()
            .zip(&chain.log_posterior)
            .map(|(s, lp)| format!("{},{},{},{},{lp}", s[0], s[1], s[2], s[3])),
    )?;
    let summary = chain_summary(chain)?;
    io::write_json(
        &ctx.out.join(format!("posterior_summary_{name}.json")),
        &ctx.hash,
        serde_json::json!({
            "backend": name,
            "kept_samples": chain.len(),
            "acceptance_rate": chain.acceptance_rate(),
            "accepted_first_stage": chain.accepted_first,
            "accepted_second_stage": chain.accepted_second,
            "mean": summary.mean,
            "std": summary.std,
            "std_product": summary.std_product(),
            "ci95": summary.ci95,
            "iact": summary.iact,
        }),
    )?;
    println!(
        "posterior[{name}]: {} kept samples, acceptance {:.2}, posterior std product {:.3e}",
        chain.len(),
        chain.acceptance_rate(),
        summary.std_product()
    );
    Ok(())
}

/// `posterior`: DRAM chain against synthetic data at the configured design.
pub fn cmd_posterior(ctx: &Ctx, backend: Backend) -> CliResult<()> {
    let cfg = &ctx.config;
    let (obs, d) = posterior_data(cfg)?;
    match backend {
        Backend::Solver => {
            let b = SolverBackend {
                config: cfg.solver_config()?,
            };
            write_chain(ctx, &run_posterior_chain(cfg, &b, &obs, &d)?, "solver")
        }
        Backend::Surrogate => {
            let model = obtain_surrogate(ctx)?;
            write_chain(
                ctx,
                &run_posterior_chain(cfg, &model, &obs, &d)?,
                "surrogate",
            )
        }
        Backend::Both => {
            let b = SolverBackend {
                config: cfg.solver_config()?,
            };
            write_chain(ctx, &run_posterior_chain(cfg, &b, &obs, &d)?, "solver")?;
            let model = obtain_surrogate(ctx)?;
            write_chain(
                ctx,
                &run_posterior_chain(cfg, &model, &obs, &d)?,
                "surrogate",
            )
        }
    }
}

/// `bench`: wall-clock table across the forward paths.
pub fn cmd_bench(ctx: &Ctx) -> CliResult<()> {
    let model = obtain_surrogate(ctx)?;
    let report = bench::run_bench(&ctx.config, &model)?;
    io::write_json(
        &ctx.out.join("bench.json"),
        &ctx.hash,
        serde_json::to_value(&report)?,
    )?;
    println!(
        "bench: mean forward solve      {:.3e} s",
        report.mean_solve_seconds
    );
    println!(
        "bench: mean surrogate eval     {:.3e} s",
        report.mean_surrogate_eval_seconds
    );
    println!("bench: speedup                 {:.0}x", report.speedup);
    println!(
        "bench: EIG node (solver)       {:.3e} s",
        report.eig_node_seconds_solver
    );
    println!(
        "bench: EIG node (surrogate)    {:.3e} s",
        report.eig_node_seconds_surrogate
    );
    println!(
        "bench: DRAM per 1k iterations  {:.3e} s (surrogate backend)",
        report.dram_seconds_per_1k_iterations_surrogate
    );
    if report.speedup < 100.0 {
        return Err(CliError::Runtime(format!(
            "surrogate speedup {:.1}x below the expected 100x",
            report.speedup
        )));
    }
    Ok(())
}
