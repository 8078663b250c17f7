//! Acceptance suite: the numerical exit criteria of the project, one test
//! per criterion, each printing a single PASS/FAIL line with the measured
//! quantities (run with `--nocapture` to see them on success).
//!
//! C7's accuracy half is expected to fail and is left red deliberately: a
//! piecewise-linear parameter interpolant cannot meet a sup-norm bound of
//! half the noise level on curves whose self-sharpened fronts move by more
//! than their own width across one interpolation cell. The companion
//! criterion C5 shows the consequence-free side of the same measurement:
//! expected-information-gain values from the surrogate agree with the full
//! solver within Monte Carlo error.

#![allow(clippy::needless_range_loop)]

use std::sync::OnceLock;
use std::time::Instant;

use chrom_oed::sweep;
use chrom_oed::train;
use chrom_oed_core::mcmc::{chain_summary, dram_run, log_posterior, Chain, DramConfig};
use chrom_oed_core::model::{
    DesignBox, DesignGrid, DesignPoint, ModelParams, Observation, ObservationSchedule, ParamBox,
};
use chrom_oed_core::oed::{
    argmax_design, argmin_design, eig_accelerated, eig_combine, eig_double_loop, sample_prior,
    EigConfig, EigEstimate, EigWorkspace, ForwardModel, SolverBackend, UtilityMap,
};
use chrom_oed_core::random::{child_seed, rng_from_seed, standard_normal};
use chrom_oed_core::solver::{koren_rhs, observe, solve_forward, SolverConfig, StateField};
use chrom_oed_core::sparse::{Placement, SparseGridDesign, SparseGridInterpolant};
use chrom_oed_core::surrogate::{SurrogateModel, TrainingPlan};
use rayon::prelude::*;

const SIGMA: f64 = 0.05;
const PHASE_RATIO: f64 = 1.5;
const TRUE_THETA: [f64; 4] = [0.05, 0.10, 10.0, 70.0];
const UPSILON: f64 = 10.0;

fn param_box() -> ParamBox {
    ParamBox::new([0.02, 0.03, 8.0, 50.0], [0.08, 0.17, 11.0, 180.0]).unwrap()
}

fn design_box() -> DesignBox {
    DesignBox::new((0.05, 3.0), (1.0, 15.0)).unwrap()
}

fn desk_solver() -> SolverConfig {
    SolverConfig::stable(100, UPSILON, 50.0, 2).unwrap()
}

fn schedule(n_s: usize) -> ObservationSchedule {
    ObservationSchedule::equidistant(n_s, 0.5, 9.5, SIGMA, UPSILON).unwrap()
}

/// Desk-scale surrogate shared by C5, C6, C7 and C9: 5x5 design grid,
/// q = r + 3, N_t = 100.
fn desk_surrogate() -> &'static (SurrogateModel, TrainingPlan) {
    static MODEL: OnceLock<(SurrogateModel, TrainingPlan)> = OnceLock::new();
    MODEL.get_or_init(|| {
        let plan = TrainingPlan::new(
            desk_solver(),
            param_box(),
            design_box(),
            5,
            5,
            7,
            Placement::Equidistant,
            PHASE_RATIO,
            512,
        )
        .unwrap();
        let t0 = Instant::now();
        let (model, report) = train::train_parallel(&plan).unwrap();
        eprintln!(
            "[fixture] desk surrogate: {} solves in {:.0} s",
            report.solve_count,
            t0.elapsed().as_secs_f64()
        );
        (model, plan)
    })
}

/// Desk-scale N_s = 15 utility map (surrogate backend, CRN seed 42), shared
/// by C6 and C9.
fn desk_utility_map() -> &'static UtilityMap {
    static MAP: OnceLock<UtilityMap> = OnceLock::new();
    MAP.get_or_init(|| {
        let (model, _) = desk_surrogate();
        let lattice = DesignGrid::equidistant(&design_box(), 5, 5).unwrap();
        let cfg = EigConfig::new(1000, 42, schedule(15)).unwrap();
        sweep::utility_map_timed(model, &lattice, &cfg, &param_box(), PHASE_RATIO).unwrap()
    })
}

fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[{criterion}] {verdict}: {detail}");
    eprintln!("[{criterion}] {verdict}: {detail}");
    assert!(pass, "[{criterion}] {detail}");
}

// --- C1: solver convergence orders ---------------------------------------

fn logistic(y: f64, center: f64, width: f64) -> f64 {
    1.0 / (1.0 + (-(y - center) / width).exp())
}

fn rhs_operator_error(n_cells: usize, ntp: f64) -> f64 {
    let params = ModelParams::new(0.05, 0.10, 10.0, ntp, 0.0).unwrap();
    let config = SolverConfig::stable(n_cells, UPSILON, ntp, 1).unwrap();
    let dy = config.dy();
    let (c0, w) = (0.45, 0.12);
    let d1 = |y: f64| {
        let s = logistic(y, c0, w);
        s * (1.0 - s) / w
    };
    let d2 = |y: f64| {
        let s = logistic(y, c0, w);
        s * (1.0 - s) * (1.0 - 2.0 * s) / (w * w)
    };
    let c1: Vec<f64> = (1..=n_cells)
        .map(|m| logistic(m as f64 * dy, c0, w))
        .collect();
    let c2: Vec<f64> = (1..=n_cells)
        .map(|m| 0.6 * logistic(m as f64 * dy, c0, w))
        .collect();
    let state = StateField::from_components(0.0, &c1, &c2).unwrap();
    let inlet = [logistic(0.0, c0, w), 0.6 * logistic(0.0, c0, w)];
    let rhs = koren_rhs(&state, &params, inlet, &config).unwrap();
    let mut worst: f64 = 0.0;
    for m in 1..=n_cells {
        let y = m as f64 * dy;
        if (0.2..=0.8).contains(&y) {
            let exact = -d1(y) + d2(y) / (2.0 * ntp);
            worst = worst.max((rhs.c1()[m - 1] - exact).abs());
        }
    }
    worst
}

#[test]
fn c1_solver_orders() {
    let t0 = Instant::now();
    // spatial order on the adsorption-free linear sub-problem, measured in
    // the diffusion-dominated and advection-dominated regimes
    let mut min_spatial = f64::INFINITY;
    for ntp in [5.0, 1e9] {
        let errs: Vec<f64> = [99, 199, 399]
            .iter()
            .map(|&n| rhs_operator_error(n, ntp))
            .collect();
        for w in errs.windows(2) {
            min_spatial = min_spatial.min((w[0] / w[1]).ln() / 2.0f64.ln());
        }
    }

    // RK4 temporal order on y' = -y over [0, 1]
    let rk4_err = |dt: f64| -> f64 {
        let steps = (1.0 / dt).round() as usize;
        let mut y = vec![1.0];
        for s in 0..steps {
            y = chrom_oed_core::solver::rk4_step(&y, dt * s as f64, dt, |_, x, d| {
                d[0] = -x[0];
                Ok(())
            })
            .unwrap();
        }
        (y[0] - (-1.0f64).exp()).abs()
    };
    let temporal = (rk4_err(0.1) / rk4_err(0.05)).ln() / 2.0f64.ln();

    let wall = t0.elapsed().as_secs_f64();
    report(
        "C1",
        min_spatial >= 1.8 && temporal >= 3.8 && wall < 120.0,
        &format!("spatial order {min_spatial:.2} >= 1.8, temporal order {temporal:.2} >= 3.8 ({wall:.1} s < 120 s)"),
    );
}

// --- C2: sparse-grid node counts ------------------------------------------

#[test]
fn c2_sparse_grid_node_counts() {
    let t0 = Instant::now();
    let count = |r: usize, q: usize| {
        SparseGridDesign::new(r, q, Placement::Equidistant)
            .unwrap()
            .node_count()
    };
    let two_d = [count(2, 6), count(2, 7), count(2, 8)];
    let four_d = count(4, 9);
    let wall = t0.elapsed().as_secs_f64();
    report(
        "C2",
        two_d == [65, 145, 321] && four_d == 1105,
        &format!(
            "r = 2 counts {two_d:?} == [65, 145, 321]; N(9, 4) = {four_d} == 1105 ({wall:.2} s)"
        ),
    );
}

// --- C3: PSLI convergence trend -------------------------------------------

#[test]
fn c3_psli_convergence_trend() {
    let t0 = Instant::now();
    let f = |x: &[f64]| vec![x.iter().map(|v| v * v).sum::<f64>()];
    let sup_err = |q: usize| -> f64 {
        let interp = SparseGridInterpolant::build(4, q, Placement::Equidistant, 1, f).unwrap();
        let mut rng = rng_from_seed(20_240_813);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let x: Vec<f64> = (0..4)
                .map(|_| chrom_oed_core::random::uniform_in(&mut rng, -1.0, 1.0))
                .collect();
            worst = worst.max((interp.eval(&x).unwrap()[0] - f(&x)[0]).abs());
        }
        worst
    };
    let errs: Vec<f64> = (7..=10).map(sup_err).collect();
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[1] / w[0]).collect();
    let wall = t0.elapsed().as_secs_f64();
    report(
        "C3",
        ratios.iter().all(|&r| r < 0.5) && wall < 60.0,
        &format!("sup errors {errs:?}; per-level ratios {ratios:?} all < 0.5 ({wall:.1} s < 60 s)"),
    );
}

// --- C4: EIG estimator oracles --------------------------------------------

const TOY_NOISE: f64 = 0.5;

fn toy_predictions(m: usize, seed: u64) -> Vec<Observation> {
    let mut rng = rng_from_seed(seed);
    (0..m)
        .map(|_| Observation {
            values: vec![standard_normal(&mut rng)],
        })
        .collect()
}

fn toy_double_loop(m: usize, j: usize, seed: u64) -> EigEstimate {
    let outer = toy_predictions(m, child_seed(seed, 0));
    let inner: Vec<Vec<Observation>> = (0..m)
        .map(|k| toy_predictions(j, child_seed(seed, 10 + k as u64)))
        .collect();
    eig_double_loop(&outer, &inner, TOY_NOISE, child_seed(seed, 1)).unwrap()
}

#[test]
fn c4_eig_oracle() {
    let t0 = Instant::now();
    let closed = 0.5 * (1.0 + 1.0 / (TOY_NOISE * TOY_NOISE)).ln();
    let m = 10_000;

    // (a) accelerated estimator vs closed form
    let predictions = toy_predictions(m, 101);
    let ws = EigWorkspace::prepare(&predictions, TOY_NOISE, 202).unwrap();
    let terms: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|k| ws.outer_term(&predictions, k))
        .collect();
    let acc = eig_combine(&terms);
    let closed_ok = (acc.value - closed).abs() < 3.0 * acc.stderr;

    // (b) accelerated vs standard double-loop with J ~ sqrt(M)
    let dl = toy_double_loop(m, 100, 909);
    let combined = (acc.stderr * acc.stderr + dl.stderr * dl.stderr).sqrt();
    let dl_ok = (acc.value - dl.value).abs() < 3.0 * combined;

    // positive bias of the nested estimator at small M (J ~ sqrt(M))
    let small: Vec<f64> = (0..50u64)
        .into_par_iter()
        .map(|rep| toy_double_loop(500, 23, child_seed(11, rep)).value)
        .collect();
    let large: Vec<f64> = (0..8u64)
        .into_par_iter()
        .map(|rep| toy_double_loop(10_000, 100, child_seed(13, rep)).value)
        .collect();
    let mean_small = small.iter().sum::<f64>() / small.len() as f64;
    let mean_large = large.iter().sum::<f64>() / large.len() as f64;
    let bias_ok = mean_small - mean_large >= 0.0;

    let wall = t0.elapsed().as_secs_f64();
    report(
        "C4",
        closed_ok && dl_ok && bias_ok && wall < 300.0,
        &format!(
            "closed form {closed:.4}: accelerated {:.4} +- {:.4}; double-loop {:.4} +- {:.4}; \
             nested bias {:+.4} (M = 500) vs {:+.4} (M = 10^4), difference >= 0 ({wall:.0} s < 300 s)",
            acc.value,
            acc.stderr,
            dl.value,
            dl.stderr,
            mean_small - closed,
            mean_large - closed
        ),
    );
}

// --- C5: backend equivalence ----------------------------------------------

#[test]
fn c5_backend_equivalence() {
    let t0 = Instant::now();
    let (model, _) = desk_surrogate();
    let bx = param_box();
    let sched = schedule(15);
    let m = 1000;
    let seed = 42u64;
    let thetas = sample_prior(&bx, m, child_seed(seed, 0), PHASE_RATIO);
    let noise_seed = child_seed(seed, 1);
    let backend = SolverBackend {
        config: desk_solver(),
    };

    let lattice = DesignGrid::equidistant(&design_box(), 3, 3).unwrap();
    let mut worst_ratio = 0.0f64;
    let mut detail = String::new();
    let mut all_ok = true;
    for d in lattice.nodes() {
        let pred_solver: Vec<Observation> = thetas
            .par_iter()
            .map(|t| backend.predict(t, &d, &sched).unwrap())
            .collect();
        let pred_surr: Vec<Observation> = thetas
            .par_iter()
            .map(|t| model.predict(t, &d, &sched).unwrap())
            .collect();
        let a = eig_accelerated(&pred_solver, SIGMA, noise_seed).unwrap();
        let b = eig_accelerated(&pred_surr, SIGMA, noise_seed).unwrap();
        let bound = 3.0 * (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        let diff = (a.value - b.value).abs();
        if diff >= bound {
            all_ok = false;
            detail.push_str(&format!(
                " node ({:.2}, {:.1}): |dU| = {diff:.3} >= {bound:.3};",
                d.tau_inj, d.c_feed
            ));
        }
        worst_ratio = worst_ratio.max(diff / bound);
    }
    let wall = t0.elapsed().as_secs_f64();
    report(
        "C5",
        all_ok && wall < 1800.0,
        &format!(
            "9/9 lattice nodes within 3 combined se (worst |dU|/bound = {worst_ratio:.2}){detail} ({wall:.0} s < 1800 s)"
        ),
    );
}

// --- C6: utility rises with feed concentration -----------------------------

fn spearman(pairs: &[(f64, f64)]) -> f64 {
    // average ranks with tie correction, then Pearson on the ranks
    fn ranks(values: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let mut out = vec![0.0; values.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                out[k] = avg;
            }
            i = j + 1;
        }
        out
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (rx, ry) = (ranks(&xs), ranks(&ys));
    let n = pairs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..pairs.len() {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    num / (dx * dy).sqrt()
}

#[test]
fn c6_utility_trend_in_feed_concentration() {
    let t0 = Instant::now();
    let map = desk_utility_map();
    let n_c = map.lattice.n_c();
    let pairs: Vec<(f64, f64)> = map
        .u
        .iter()
        .enumerate()
        .map(|(i, &u)| (map.lattice.node(i / n_c, i % n_c).c_feed, u))
        .collect();
    let rho = spearman(&pairs);
    let (best, _) = argmax_design(map);
    let c_mid = 0.5 * (design_box().c_range.0 + design_box().c_range.1);
    let wall = t0.elapsed().as_secs_f64();
    report(
        "C6",
        rho > 0.0 && best.c_feed >= c_mid,
        &format!(
            "Spearman(c_feed, U) = {rho:.3} > 0 on the 5x5 / N_s = 15 map; argmax c_feed = {} in the upper half ({wall:.0} s)",
            best.c_feed
        ),
    );
}

// --- C7: surrogate speed and accuracy --------------------------------------

#[test]
fn c7_surrogate_speed() {
    let (model, _) = desk_surrogate();
    let t0 = Instant::now();
    let sched = schedule(15);
    let d = DesignPoint::new(1.0, 8.0).unwrap();
    let thetas = sample_prior(&param_box(), 12, 77, PHASE_RATIO);
    let backend = SolverBackend {
        config: desk_solver(),
    };

    let t1 = Instant::now();
    for theta in &thetas {
        backend.predict(theta, &d, &sched).unwrap();
    }
    let solve_mean = t1.elapsed().as_secs_f64() / thetas.len() as f64;

    let n_eval = 2000;
    let t2 = Instant::now();
    for i in 0..n_eval {
        model
            .predict(&thetas[i % thetas.len()], &d, &sched)
            .unwrap();
    }
    let eval_mean = t2.elapsed().as_secs_f64() / n_eval as f64;
    let speedup = solve_mean / eval_mean;
    let wall = t0.elapsed().as_secs_f64();
    report(
        "C7-speed",
        speedup >= 100.0,
        &format!(
            "mean solve {solve_mean:.3e} s / mean surrogate eval {eval_mean:.3e} s = {speedup:.0}x >= 100x ({wall:.0} s)"
        ),
    );
}

#[test]
fn c7_surrogate_accuracy() {
    let (model, _) = desk_surrogate();
    let t0 = Instant::now();
    let validation = model.validate(&desk_solver(), 50, 20_240_808).unwrap();
    let sup = validation.sup_overall();
    let wall = t0.elapsed().as_secs_f64();
    // Known red: linear interpolation across parameters that shift
    // self-sharpened fronts by more than their width staircases the front,
    // so the sup-norm deviation sits at a large fraction of the peak height
    // (pointwise; ensemble-averaged quantities are unaffected, see C5).
    report(
        "C7-accuracy",
        sup < 0.025 && wall < 1200.0,
        &format!(
            "validation sup deviation {sup:.3} mol/L vs target 0.025 (rms c1 = {:.3}, c2 = {:.3}; {wall:.0} s)",
            validation.rms[0], validation.rms[1]
        ),
    );
}

// --- C8: DRAM correctness ---------------------------------------------------

#[test]
fn c8_dram_gaussian_recovery() {
    let t0 = Instant::now();
    // correlated 4-D Gaussian target through its Cholesky factor
    let mean = [2.0, 3.0, 4.0, 5.0];
    let l: [[f64; 4]; 4] = [
        [0.5, 0.0, 0.0, 0.0],
        [0.1, 0.8, 0.0, 0.0],
        [-0.2, 0.1, 0.3, 0.0],
        [0.05, -0.15, 0.1, 1.2],
    ];
    let target = move |x: &[f64; 4]| -> chrom_oed_core::Result<f64> {
        let mut v = [0.0; 4];
        for i in 0..4 {
            v[i] = x[i] - mean[i];
        }
        let mut w = [0.0; 4];
        for i in 0..4 {
            let mut s = v[i];
            for k in 0..i {
                s -= l[i][k] * w[k];
            }
            w[i] = s / l[i][i];
        }
        Ok(-0.5 * w.iter().map(|z| z * z).sum::<f64>())
    };
    let cfg = DramConfig {
        chain_length: 80_000,
        burn_in: 10_000,
        initial: [1.0, 1.0, 1.0, 1.0],
        initial_proposal_std: [0.2; 4],
        adaptation_start: 1000,
        adaptation_interval: 100,
        dr_shrink: 0.2,
        epsilon: 1e-10,
        seed: 4242,
    };
    let chain = dram_run(&cfg, target).unwrap();
    let n = chain.len() as f64;
    let mut mu = [0.0f64; 4];
    for s in &chain.samples {
        for i in 0..4 {
            mu[i] += s[i];
        }
    }
    for m in mu.iter_mut() {
        *m /= n;
    }
    let mut cov = [[0.0f64; 4]; 4];
    for s in &chain.samples {
        for i in 0..4 {
            for j in 0..4 {
                cov[i][j] += (s[i] - mu[i]) * (s[j] - mu[j]);
            }
        }
    }
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v /= n - 1.0;
        }
    }
    // truth: Sigma = L L^T
    let mut sigma = [[0.0f64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                sigma[i][j] += l[i][k] * l[j][k];
            }
        }
    }
    let mean_ok = (0..4).all(|i| (mu[i] - mean[i]).abs() / mean[i] < 0.03);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            num += (cov[i][j] - sigma[i][j]) * (cov[i][j] - sigma[i][j]);
            den += sigma[i][j] * sigma[i][j];
        }
    }
    let frob_rel = (num / den).sqrt();
    let wall = t0.elapsed().as_secs_f64();
    report(
        "C8-gaussian",
        mean_ok && frob_rel < 0.10,
        &format!(
            "80k-iteration chain: worst mean error {:.2}% < 3%, covariance Frobenius-relative error {:.1}% < 10% ({wall:.0} s)",
            (0..4).map(|i| (mu[i] - mean[i]).abs() / mean[i] * 100.0).fold(0.0f64, f64::max),
            frob_rel * 100.0
        ),
    );
}

/// One desk-scale posterior chain against the full solver.
fn posterior_chain(
    obs: &Observation,
    d: &DesignPoint,
    sched: &ObservationSchedule,
    seed: u64,
) -> Chain {
    let bx = param_box();
    let backend = SolverBackend {
        config: desk_solver(),
    };
    let mut cfg = DramConfig::for_box(&bx, 6000, 2000, seed).unwrap();
    cfg.adaptation_start = 500;
    dram_run(&cfg, |theta| {
        log_posterior(theta, obs, sched, d, &backend, &bx, PHASE_RATIO)
    })
    .unwrap()
}

#[test]
fn c8_dram_posterior_coverage() {
    let t0 = Instant::now();
    let truth = ModelParams::from_theta(TRUE_THETA, PHASE_RATIO).unwrap();
    let d = DesignPoint::new(1.525, 8.0).unwrap();
    let sched = schedule(20);
    let clean = observe(&solve_forward(&truth, &d, &desk_solver()).unwrap(), &sched).unwrap();

    let mut covered = 0;
    let mut lines = String::new();
    for rep in 0..10u64 {
        let mut rng = rng_from_seed(child_seed(8800, rep));
        let obs = Observation {
            values: clean
                .values
                .iter()
                .map(|v| v + SIGMA * standard_normal(&mut rng))
                .collect(),
        };
        let chain = posterior_chain(&obs, &d, &sched, child_seed(8801, rep));
        let summary = chain_summary(&chain).unwrap();
        let all_inside = (0..4)
            .all(|p| summary.ci95[p].0 <= TRUE_THETA[p] && TRUE_THETA[p] <= summary.ci95[p].1);
        if all_inside {
            covered += 1;
        } else {
            lines.push_str(&format!(" rep {rep} missed;"));
        }
    }
    let wall = t0.elapsed().as_secs_f64();
    report(
        "C8-coverage",
        covered >= 9 && wall < 3600.0,
        &format!(
            "marginal 95% credible intervals contain the true parameters in {covered}/10 replications \
             (N_s = 20, sigma = {SIGMA}, solver backend){lines} ({wall:.0} s < 3600 s)"
        ),
    );
}

// --- C9: higher-utility designs contract the posterior ----------------------

#[test]
fn c9_design_quality_contraction() {
    let t0 = Instant::now();
    let map = desk_utility_map();
    let (best, u_best) = argmax_design(map);
    let (worst, u_worst) = argmin_design(map);

    let truth = ModelParams::from_theta(TRUE_THETA, PHASE_RATIO).unwrap();
    let sched = schedule(15);
    let std_product_at = |d: &DesignPoint| -> f64 {
        let clean = observe(&solve_forward(&truth, d, &desk_solver()).unwrap(), &sched).unwrap();
        let mut rng = rng_from_seed(child_seed(8900, 0));
        let obs = Observation {
            values: clean
                .values
                .iter()
                .map(|v| v + SIGMA * standard_normal(&mut rng))
                .collect(),
        };
        let chain = posterior_chain(&obs, d, &sched, child_seed(8901, 0));
        chain_summary(&chain).unwrap().std_product()
    };
    let sp_best = std_product_at(&best);
    let sp_worst = std_product_at(&worst);
    let wall = t0.elapsed().as_secs_f64();
    report(
        "C9",
        sp_best <= sp_worst,
        &format!(
            "posterior std product {sp_best:.3e} at argmax ({:.2}, {:.1}; U = {u_best:.2}) <= {sp_worst:.3e} \
             at argmin ({:.2}, {:.1}; U = {u_worst:.2}) ({wall:.0} s)",
            best.tau_inj, best.c_feed, worst.tau_inj, worst.c_feed
        ),
    );
}
