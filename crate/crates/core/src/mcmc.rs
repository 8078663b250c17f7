//! Delayed-rejection adaptive Metropolis (DRAM) sampling of the parameter
//! posterior.
//!
//! The proposal is Gaussian with covariance adapted from the accumulated
//! chain history (scaled by `2.4^2 / dim`, regularized by `epsilon I`),
//! refreshed every `adaptation_interval` iterations once `adaptation_start`
//! is reached. A single delayed-rejection stage retries each rejected move
//! with the same covariance shrunk by `dr_shrink`, using the two-stage
//! acceptance ratio that preserves the stationary distribution.
//!
//! Targets are plain closures returning the unnormalized log posterior; the
//! uniform prior enters as `-inf` outside its box, so out-of-box proposals
//! are rejected without reflection. With a fixed seed the chain is
//! bit-identical between runs.

use alloc::vec::Vec;

use crate::model::{
    DesignPoint, ModelParams, Observation, ObservationSchedule, ParamBox, THETA_DIM,
};
use crate::oed::ForwardModel;
use crate::random::{rng_from_seed, standard_normal, unit_uniform};
use crate::{Error, Result};

type Vec4 = [f64; THETA_DIM];
type Mat4 = [[f64; THETA_DIM]; THETA_DIM];

/// Sampler settings.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DramConfig {
    /// Total iterations, burn-in included.
    pub chain_length: usize,
    /// Leading iterations discarded from the returned chain.
    pub burn_in: usize,
    pub initial: Vec4,
    /// Standard deviations of the initial diagonal proposal.
    pub initial_proposal_std: Vec4,
    pub adaptation_start: usize,
    pub adaptation_interval: usize,
    /// Covariance shrink factor of the delayed-rejection stage, in (0, 1).
    pub dr_shrink: f64,
    /// Ridge added to the adapted covariance.
    pub epsilon: f64,
    pub seed: u64,
}

impl DramConfig {
    /// Defaults for a box-supported posterior: start at the box midpoint
    /// with proposal standard deviations of a twentieth of each box width.
    pub fn for_box(bx: &ParamBox, chain_length: usize, burn_in: usize, seed: u64) -> Result<Self> {
        let width = bx.width();
        let cfg = Self {
            chain_length,
            burn_in,
            initial: bx.midpoint(),
            initial_proposal_std: core::array::from_fn(|i| width[i] / 20.0),
            adaptation_start: 1000,
            adaptation_interval: 100,
            dr_shrink: 0.2,
            epsilon: 1e-10,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.chain_length == 0 || self.burn_in >= self.chain_length {
            return Err(Error::InvalidConfig(alloc::format!(
                "need burn_in < chain_length, got {} / {}",
                self.burn_in,
                self.chain_length
            )));
        }
        if !(self.dr_shrink > 0.0 && self.dr_shrink < 1.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "dr_shrink must lie in (0, 1), got {}",
                self.dr_shrink
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be > 0".into()));
        }
        if self.initial_proposal_std.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidConfig(
                "initial proposal stds must be > 0".into(),
            ));
        }
        if self.adaptation_interval == 0 {
            return Err(Error::InvalidConfig(
                "adaptation_interval must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Posterior samples after burn-in, with acceptance bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub samples: Vec<Vec4>,
    pub log_posterior: Vec<f64>,
    pub accepted_first: usize,
    pub accepted_second: usize,
    pub rejected: usize,
    pub config: DramConfig,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn acceptance_rate(&self) -> f64 {
        (self.accepted_first + self.accepted_second) as f64 / self.config.chain_length as f64
    }
}

/// Unnormalized log posterior of the chromatography inverse problem:
/// Gaussian log-likelihood inside the prior box, `-inf` outside.
pub fn log_posterior<B: ForwardModel + ?Sized>(
    theta: &Vec4,
    obs: &Observation,
    schedule: &ObservationSchedule,
    d: &DesignPoint,
    backend: &B,
    bx: &ParamBox,
    phase_ratio: f64,
) -> Result<f64> {
    if !bx.contains(theta) {
        return Ok(f64::NEG_INFINITY);
    }
    let params = ModelParams::from_theta(*theta, phase_ratio)?;
    let predicted = backend.predict(&params, d, schedule)?;
    crate::model::log_likelihood(obs, &predicted, schedule.sigma)
}

fn cholesky(a: &Mat4) -> Option<Mat4> {
    let mut l = [[0.0; THETA_DIM]; THETA_DIM];
    for i in 0..THETA_DIM {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][j] = crate::fmath::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Squared Mahalanobis norm `(v)' C^-1 (v)` via forward substitution with the
/// Cholesky factor of `C`.
fn mahalanobis_sq(l: &Mat4, v: &Vec4) -> f64 {
    let mut w = [0.0; THETA_DIM];
    for i in 0..THETA_DIM {
        let mut s = v[i];
        for k in 0..i {
            s -= l[i][k] * w[k];
        }
        w[i] = s / l[i][i];
    }
    w.iter().map(|x| x * x).sum()
}

/// `ln(1 - exp(a))` for `a < 0`, stable near both ends.
fn ln_one_minus_exp(a: f64) -> f64 {
    if a >= 0.0 {
        return f64::NEG_INFINITY;
    }
    if a > -core::f64::consts::LN_2 {
        crate::fmath::ln(-libm::expm1(a))
    } else {
        libm::log1p(-crate::fmath::exp(a))
    }
}

/// Running mean and scatter matrix of all visited states.
struct RunningMoments {
    n: f64,
    mean: Vec4,
    scatter: Mat4,
}

impl RunningMoments {
    fn new() -> Self {
        Self {
            n: 0.0,
            mean: [0.0; THETA_DIM],
            scatter: [[0.0; THETA_DIM]; THETA_DIM],
        }
    }

    fn push(&mut self, x: &Vec4) {
        self.n += 1.0;
        let mut delta = [0.0; THETA_DIM];
        for i in 0..THETA_DIM {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] / self.n;
        }
        for i in 0..THETA_DIM {
            for j in 0..THETA_DIM {
                self.scatter[i][j] += delta[i] * (x[j] - self.mean[j]);
            }
        }
    }

    fn covariance(&self) -> Option<Mat4> {
        if self.n < 2.0 {
            return None;
        }
        let mut c = [[0.0; THETA_DIM]; THETA_DIM];
        for i in 0..THETA_DIM {
            for j in 0..THETA_DIM {
                c[i][j] = self.scatter[i][j] / (self.n - 1.0);
            }
        }
        Some(c)
    }
}

/// Run DRAM against an arbitrary log-posterior closure.
pub fn dram_run<F>(config: &DramConfig, mut target: F) -> Result<Chain>
where
    F: FnMut(&Vec4) -> Result<f64>,
{
    config.validate()?;
    // scale of Haario's adaptive Metropolis for dimension 4
    let s_d = 2.4 * 2.4 / THETA_DIM as f64;

    let mut rng = rng_from_seed(config.seed);
    let mut x = config.initial;
    let mut lp_x = target(&x)?;
    if !lp_x.is_finite() {
        return Err(Error::InvalidConfig(
            "initial point has non-finite log posterior".into(),
        ));
    }

    let mut chol = [[0.0; THETA_DIM]; THETA_DIM];
    for i in 0..THETA_DIM {
        chol[i][i] = config.initial_proposal_std[i];
    }

    let mut moments = RunningMoments::new();
    moments.push(&x);

    let kept = config.chain_length - config.burn_in;
    let mut samples = Vec::with_capacity(kept);
    let mut log_post = Vec::with_capacity(kept);
    let (mut acc1, mut acc2, mut rej) = (0usize, 0usize, 0usize);

    let draw_step =
        |rng: &mut crate::random::ChaCha8Rng, l: &Mat4, scale: f64, from: &Vec4| -> Vec4 {
            let z: Vec4 = core::array::from_fn(|_| standard_normal(rng));
            let mut y = *from;
            for i in 0..THETA_DIM {
                let mut s = 0.0;
                for k in 0..=i {
                    s += l[i][k] * z[k];
                }
                y[i] += scale * s;
            }
            y
        };

    for it in 0..config.chain_length {
        // first stage
        let y1 = draw_step(&mut rng, &chol, 1.0, &x);
        let lp_1 = target(&y1)?;
        if lp_1.is_nan() {
            return Err(Error::InvalidConfig("target returned NaN".into()));
        }
        let a1 = (lp_1 - lp_x).min(0.0);
        let u1 = unit_uniform(&mut rng);
        if crate::fmath::ln(u1) < a1 && lp_1.is_finite() {
            x = y1;
            lp_x = lp_1;
            acc1 += 1;
        } else {
            // delayed-rejection stage with shrunk covariance
            let y2 = draw_step(&mut rng, &chol, config.dr_shrink, &x);
            let lp_2 = target(&y2)?;
            if lp_2.is_nan() {
                return Err(Error::InvalidConfig("target returned NaN".into()));
            }
            let mut accepted2 = false;
            if lp_2.is_finite() {
                // alpha1 comparison of the reversed path y2 -> y1
                let a1_rev = (lp_1 - lp_2).min(0.0);
                if a1_rev < 0.0 {
                    // two-stage acceptance ratio with the symmetric
                    // first-stage proposal density q1
                    let mut d21 = [0.0; THETA_DIM];
                    let mut dx1 = [0.0; THETA_DIM];
                    for i in 0..THETA_DIM {
                        d21[i] = y1[i] - y2[i];
                        dx1[i] = y1[i] - x[i];
                    }
                    let lq_num = -0.5 * mahalanobis_sq(&chol, &d21);
                    let lq_den = -0.5 * mahalanobis_sq(&chol, &dx1);
                    let log_num = lp_2 + lq_num + ln_one_minus_exp(a1_rev);
                    let log_den = lp_x + lq_den + ln_one_minus_exp(a1);
                    let a2 = (log_num - log_den).min(0.0);
                    let u2 = unit_uniform(&mut rng);
                    if crate::fmath::ln(u2) < a2 {
                        x = y2;
                        lp_x = lp_2;
                        acc2 += 1;
                        accepted2 = true;
                    }
                }
            }
            if !accepted2 {
                rej += 1;
            }
        }

        moments.push(&x);
        if it >= config.burn_in {
            samples.push(x);
            log_post.push(lp_x);
        }

        // covariance adaptation from the full history
        if it + 1 >= config.adaptation_start && (it + 1) % config.adaptation_interval == 0 {
            if let Some(cov) = moments.covariance() {
                let mut proposal = [[0.0; THETA_DIM]; THETA_DIM];
                for i in 0..THETA_DIM {
                    for j in 0..THETA_DIM {
                        proposal[i][j] = s_d * cov[i][j];
                    }
                    proposal[i][i] += s_d * config.epsilon;
                }
                if let Some(l) = cholesky(&proposal) {
                    chol = l;
                }
                // a non-PD covariance keeps the previous factor
            }
        }
    }

    if acc1 + acc2 == 0 {
        return Err(Error::NoAcceptedMoves {
            iterations: config.chain_length,
        });
    }
    Ok(Chain {
        samples,
        log_posterior: log_post,
        accepted_first: acc1,
        accepted_second: acc2,
        rejected: rej,
        config: *config,
    })
}

/// Per-parameter posterior summaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSummary {
    pub mean: Vec4,
    pub std: Vec4,
    /// Central 95% credible interval per parameter.
    pub ci95: [(f64, f64); THETA_DIM],
    /// Integrated autocorrelation time per parameter.
    pub iact: Vec4,
}

impl ChainSummary {
    /// Product of the four posterior standard deviations; the scalar spread
    /// measure used to compare designs.
    pub fn std_product(&self) -> f64 {
        self.std.iter().product()
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(n - 1);
    let w = pos - lo as f64;
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

/// Integrated autocorrelation time with Sokal's adaptive window: the
/// smallest `W` with `W >= 5 tau(W)`.
fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return 1.0;
    }
    let rho = |t: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..n - t {
            s += (series[i] - mean) * (series[i + t] - mean);
        }
        s / (n as f64 * var)
    };
    let mut tau = 1.0;
    let max_w = n / 3;
    let mut w = 1;
    while w < max_w {
        tau += 2.0 * rho(w);
        if (w as f64) >= 5.0 * tau {
            break;
        }
        w += 1;
    }
    tau.max(1.0)
}

/// Summaries of a kept chain: mean, spread, credible intervals and mixing.
pub fn chain_summary(chain: &Chain) -> Result<ChainSummary> {
    let n = chain.len();
    if n == 0 {
        return Err(Error::InvalidConfig("empty chain".into()));
    }
    let mut mean = [0.0; THETA_DIM];
    let mut std = [0.0; THETA_DIM];
    let mut ci95 = [(0.0, 0.0); THETA_DIM];
    let mut iact = [0.0; THETA_DIM];
    for p in 0..THETA_DIM {
        let series: Vec<f64> = chain.samples.iter().map(|s| s[p]).collect();
        let m = series.iter().sum::<f64>() / n as f64;
        mean[p] = m;
        std[p] = if n > 1 {
            crate::fmath::sqrt(
                series.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64,
            )
        } else {
            0.0
        };
        let mut sorted = series.clone();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        ci95[p] = (quantile(&sorted, 0.025), quantile(&sorted, 0.975));
        iact[p] = integrated_autocorrelation(&series);
    }
    Ok(ChainSummary {
        mean,
        std,
        ci95,
        iact,
    })
}
