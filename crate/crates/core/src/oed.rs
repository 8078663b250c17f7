//! Expected-information-gain estimation and design sweeps.
//!
//! The design utility is the expected Kullback-Leibler divergence from the
//! prior to the posterior. With a uniform prior and Gaussian noise it is
//! estimated by the accelerated double-loop Monte Carlo method: one prior
//! ensemble `theta_k` is mapped through the forward model once,
//! `chat_k = G(theta_k; d)`, synthetic data `c_k = chat_k + sigma xi_k` are
//! drawn, and the same ensemble is reused for the evidence average:
//!
//! ```text
//! U(d) ~= 1/M sum_k [ log p(c_k | theta_k) - log( 1/M sum_j p(c_k | theta_j) ) ]
//! ```
//!
//! The evidence sum runs through a log-sum-exp ladder: with `K` measurement
//! channels and small noise the raw exponentials underflow routinely, while
//! the `j = k` term guarantees the largest exponent is only a chi-square of
//! size `K`, so the stabilized sum never collapses to zero. The estimator is
//! positively biased with bias of order `1/M`; a classical double-loop
//! variant with an independent inner ensemble is provided as the reference
//! oracle.
//!
//! Design sweeps reuse one prior ensemble and one noise matrix across all
//! lattice nodes (common random numbers), which removes node-to-node Monte
//! Carlo jitter from the map without changing any per-node expectation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{
    DesignGrid, DesignPoint, ModelParams, Observation, ObservationSchedule, ParamBox, THETA_DIM,
};
use crate::random::{child_seed, rng_from_seed, standard_normal, uniform_in};
use crate::solver::{observe, solve_forward, SolverConfig};
use crate::surrogate::SurrogateModel;
use crate::{Error, Result};

/// A forward map `G(theta; d)` producing observation vectors.
pub trait ForwardModel: Sync {
    fn predict(
        &self,
        theta: &ModelParams,
        d: &DesignPoint,
        schedule: &ObservationSchedule,
    ) -> Result<Observation>;

    /// Short identifier used in reports and file metadata.
    fn id(&self) -> &'static str;
}

/// The full finite-volume solver as a forward backend.
#[derive(Debug, Clone, Copy)]
pub struct SolverBackend {
    pub config: SolverConfig,
}

impl ForwardModel for SolverBackend {
    fn predict(
        &self,
        theta: &ModelParams,
        d: &DesignPoint,
        schedule: &ObservationSchedule,
    ) -> Result<Observation> {
        let curve = solve_forward(theta, d, &self.config)?;
        observe(&curve, schedule)
    }

    fn id(&self) -> &'static str {
        "solver"
    }
}

impl ForwardModel for SurrogateModel {
    fn predict(
        &self,
        theta: &ModelParams,
        d: &DesignPoint,
        schedule: &ObservationSchedule,
    ) -> Result<Observation> {
        self.eval_observation(theta, d, schedule)
    }

    fn id(&self) -> &'static str {
        "surrogate"
    }
}

/// Monte Carlo settings of one expected-information-gain estimate.
#[derive(Debug, Clone)]
pub struct EigConfig {
    /// Ensemble size `M`.
    pub m: usize,
    /// Base seed; the prior ensemble and the noise matrix derive from it.
    pub seed: u64,
    /// Noise standard deviation (defaults to the schedule's).
    pub sigma: f64,
    pub schedule: ObservationSchedule,
}

impl EigConfig {
    pub fn new(m: usize, seed: u64, schedule: ObservationSchedule) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidConfig(alloc::format!(
                "ensemble size must be >= 2, got {m}"
            )));
        }
        let sigma = schedule.sigma;
        Ok(Self {
            m,
            seed,
            sigma,
            schedule,
        })
    }
}

/// Value and Monte Carlo spread of one estimate.
///
/// `stderr` is the standard error of the outer average; reuse of the
/// ensemble inside the evidence makes it a proxy rather than an exact
/// standard error, which is how it is reported downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// Draw `m` i.i.d. uniform parameter vectors from the prior box.
pub fn sample_prior(bx: &ParamBox, m: usize, seed: u64, phase_ratio: f64) -> Vec<ModelParams> {
    let mut rng = rng_from_seed(seed);
    (0..m)
        .map(|_| {
            let theta: [f64; THETA_DIM] =
                core::array::from_fn(|i| uniform_in(&mut rng, bx.lower[i], bx.upper[i]));
            // bounds are validated, draws stay inside the box
            ModelParams::from_theta(theta, phase_ratio).expect("draw inside validated box")
        })
        .collect()
}

/// Map a parameter ensemble through a forward backend at one design point.
pub fn map_ensemble<B: ForwardModel + ?Sized>(
    backend: &B,
    thetas: &[ModelParams],
    d: &DesignPoint,
    schedule: &ObservationSchedule,
) -> Result<Vec<Observation>> {
    thetas
        .iter()
        .map(|t| backend.predict(t, d, schedule))
        .collect()
}

/// Precomputed quantities shared by all outer-loop terms: the synthetic data
/// and the diagonal log-likelihoods.
pub struct EigWorkspace {
    /// `m x k` synthetic data, row-major.
    data: Vec<f64>,
    /// `-||xi_k||^2 / 2` per outer index.
    loglik_diag: Vec<f64>,
    m: usize,
    k: usize,
    sigma: f64,
}

impl EigWorkspace {
    /// Draw the synthetic data `c_k = chat_k + sigma xi_k`.
    ///
    /// A fixed `noise_seed` reuses the same noise matrix across design nodes
    /// (common random numbers).
    pub fn prepare(predictions: &[Observation], sigma: f64, noise_seed: u64) -> Result<Self> {
        let m = predictions.len();
        if m < 2 {
            return Err(Error::InvalidConfig("need at least 2 predictions".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "sigma must be > 0, got {sigma}"
            )));
        }
        let k = predictions[0].len();
        let mut data = Vec::with_capacity(m * k);
        let mut loglik_diag = Vec::with_capacity(m);
        let mut rng = rng_from_seed(noise_seed);
        for pred in predictions {
            if pred.len() != k {
                return Err(Error::LengthMismatch {
                    expected: k,
                    got: pred.len(),
                });
            }
            let mut chi2 = 0.0;
            for &v in &pred.values {
                if !v.is_finite() {
                    return Err(Error::InvalidConfig("non-finite forward output".into()));
                }
                let xi = standard_normal(&mut rng);
                chi2 += xi * xi;
                data.push(v + sigma * xi);
            }
            loglik_diag.push(-0.5 * chi2);
        }
        Ok(Self {
            data,
            loglik_diag,
            m,
            k,
            sigma,
        })
    }

    /// One outer-loop term `z_k = log p(c_k | theta_k) - log p(c_k | d)`,
    /// with the evidence average computed through log-sum-exp.
    ///
    /// Pure in `(self, predictions, k)`, so callers may evaluate terms for
    /// distinct `k` concurrently and combine them in index order.
    pub fn outer_term(&self, predictions: &[Observation], outer: usize) -> f64 {
        let inv_two_sigma2 = 1.0 / (2.0 * self.sigma * self.sigma);
        let c_k = &self.data[outer * self.k..(outer + 1) * self.k];
        let mut exps = vec![0.0; self.m];
        for (j, e) in exps.iter_mut().enumerate() {
            let pred = &predictions[j].values;
            let mut ss = 0.0;
            for i in 0..self.k {
                let r = c_k[i] - pred[i];
                ss += r * r;
            }
            *e = -ss * inv_two_sigma2;
        }
        // the j = outer term bounds the max exponent from below
        self.loglik_diag[outer] - log_mean_exp(&exps)
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }
}

/// Stabilized `log( mean(exp(values)) )`.
///
/// The maximum exponent is factored out first, so the result stays finite
/// whenever at least one input is finite.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    let max_e = values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    if !max_e.is_finite() {
        return max_e;
    }
    let sum: f64 = values.iter().map(|&e| crate::fmath::exp(e - max_e)).sum();
    max_e + crate::fmath::ln(sum) - crate::fmath::ln(values.len() as f64)
}

/// Combine outer-loop terms into the estimate and its spread.
pub fn eig_combine(terms: &[f64]) -> EigEstimate {
    let m = terms.len() as f64;
    let mean = terms.iter().sum::<f64>() / m;
    let var = terms.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (m - 1.0);
    EigEstimate {
        value: mean,
        stderr: crate::fmath::sqrt(var / m),
    }
}

/// Accelerated estimator on precomputed forward outputs.
pub fn eig_accelerated(
    predictions: &[Observation],
    sigma: f64,
    noise_seed: u64,
) -> Result<EigEstimate> {
    let ws = EigWorkspace::prepare(predictions, sigma, noise_seed)?;
    let terms: Vec<f64> = (0..predictions.len())
        .map(|k| ws.outer_term(predictions, k))
        .collect();
    Ok(eig_combine(&terms))
}

/// Classical double-loop estimator on precomputed outputs: independent inner
/// ensembles `inner[k]` approximate each evidence.
pub fn eig_double_loop(
    outer: &[Observation],
    inner: &[Vec<Observation>],
    sigma: f64,
    noise_seed: u64,
) -> Result<EigEstimate> {
    if outer.len() != inner.len() {
        return Err(Error::LengthMismatch {
            expected: outer.len(),
            got: inner.len(),
        });
    }
    let ws = EigWorkspace::prepare(outer, sigma, noise_seed)?;
    let inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    let mut terms = Vec::with_capacity(outer.len());
    for k in 0..outer.len() {
        let c_k = &ws.data[k * ws.k..(k + 1) * ws.k];
        let ens = &inner[k];
        if ens.is_empty() {
            return Err(Error::InvalidConfig("empty inner ensemble".into()));
        }
        let mut exps = Vec::with_capacity(ens.len());
        for pred in ens {
            let mut ss = 0.0;
            for i in 0..ws.k {
                let r = c_k[i] - pred.values[i];
                ss += r * r;
            }
            exps.push(-ss * inv_two_sigma2);
        }
        terms.push(ws.loglik_diag[k] - log_mean_exp(&exps));
    }
    Ok(eig_combine(&terms))
}

/// Expected information gain of one design by the accelerated estimator.
pub fn eig_estimate<B: ForwardModel + ?Sized>(
    backend: &B,
    d: &DesignPoint,
    cfg: &EigConfig,
    bx: &ParamBox,
    phase_ratio: f64,
) -> Result<EigEstimate> {
    let thetas = sample_prior(bx, cfg.m, child_seed(cfg.seed, 0), phase_ratio);
    let predictions = map_ensemble(backend, &thetas, d, &cfg.schedule)?;
    eig_accelerated(&predictions, cfg.sigma, child_seed(cfg.seed, 1))
}

/// Reference double-loop estimate with an independent inner ensemble of size
/// `j_inner` per outer sample.
pub fn eig_estimate_double_loop<B: ForwardModel + ?Sized>(
    backend: &B,
    d: &DesignPoint,
    cfg: &EigConfig,
    bx: &ParamBox,
    phase_ratio: f64,
    j_inner: usize,
) -> Result<EigEstimate> {
    let thetas = sample_prior(bx, cfg.m, child_seed(cfg.seed, 0), phase_ratio);
    let outer = map_ensemble(backend, &thetas, d, &cfg.schedule)?;
    let mut inner = Vec::with_capacity(cfg.m);
    for k in 0..cfg.m {
        let ens = sample_prior(bx, j_inner, child_seed(cfg.seed, 2 + k as u64), phase_ratio);
        inner.push(map_ensemble(backend, &ens, d, &cfg.schedule)?);
    }
    eig_double_loop(&outer, &inner, cfg.sigma, child_seed(cfg.seed, 1))
}

/// Expected information gain over a design lattice.
#[derive(Debug, Clone)]
pub struct UtilityMap {
    pub lattice: DesignGrid,
    /// Row-major utilities, `u[i_tau * n_c + i_c]`.
    pub u: Vec<f64>,
    /// Standard-error proxy per node.
    pub stderr: Vec<f64>,
    pub m: usize,
    pub backend_id: String,
    /// Wall time per node in seconds; zero when produced without a clock
    /// (timing is filled in by the CLI layer).
    pub wall_per_node: Vec<f64>,
}

impl UtilityMap {
    fn best_by<F: Fn(f64, f64) -> bool>(&self, better: F) -> (DesignPoint, f64) {
        let mut best_idx = 0;
        for idx in 1..self.u.len() {
            if better(self.u[idx], self.u[best_idx]) {
                best_idx = idx;
            }
        }
        let n_c = self.lattice.n_c();
        (
            self.lattice.node(best_idx / n_c, best_idx % n_c),
            self.u[best_idx],
        )
    }
}

/// Sweep the accelerated estimator over a lattice with common random
/// numbers: one prior ensemble and one noise matrix shared by all nodes.
pub fn utility_map<B: ForwardModel + ?Sized>(
    backend: &B,
    lattice: &DesignGrid,
    cfg: &EigConfig,
    bx: &ParamBox,
    phase_ratio: f64,
) -> Result<UtilityMap> {
    let thetas = sample_prior(bx, cfg.m, child_seed(cfg.seed, 0), phase_ratio);
    let noise_seed = child_seed(cfg.seed, 1);
    let mut u = Vec::with_capacity(lattice.len());
    let mut stderr = Vec::with_capacity(lattice.len());
    for d in lattice.nodes() {
        let predictions = map_ensemble(backend, &thetas, &d, &cfg.schedule)?;
        let est = eig_accelerated(&predictions, cfg.sigma, noise_seed)?;
        u.push(est.value);
        stderr.push(est.stderr);
    }
    Ok(UtilityMap {
        lattice: lattice.clone(),
        u,
        stderr,
        m: cfg.m,
        backend_id: String::from(backend.id()),
        wall_per_node: vec![0.0; lattice.len()],
    })
}

/// Lattice node with maximal utility; ties break toward the smallest
/// `tau_inj`, then the smallest `c_feed`.
pub fn argmax_design(map: &UtilityMap) -> (DesignPoint, f64) {
    map.best_by(|candidate, best| candidate > best)
}

/// Lattice node with minimal utility (same tie-breaking).
pub fn argmin_design(map: &UtilityMap) -> (DesignPoint, f64) {
    map.best_by(|candidate, best| candidate < best)
}
