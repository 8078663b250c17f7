//! Domain types and the shared physical model pieces.
//!
//! The uncertain parameter vector is `theta = (b1, b2, qs, ntp)`: the two
//! Langmuir constants, the total adsorption capacity and the number of
//! theoretical plates. The phase ratio `F` is a known constant and travels
//! with the parameters so the solver never needs a second argument. Design
//! variables are the injection time and the feed concentration shared by both
//! components.
//!
//! Parameters are kept in physical units everywhere; they are mapped onto the
//! interpolation cube `[-1, 1]^4` only at the sparse-grid boundary via
//! [`affine_to_unit`] / [`affine_from_unit`].

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Number of uncertain parameters.
pub const THETA_DIM: usize = 4;

/// Uncertain model parameters plus the fixed phase ratio.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Langmuir constant of component 1 [L/mol].
    pub b1: f64,
    /// Langmuir constant of component 2 [L/mol].
    pub b2: f64,
    /// Total adsorption capacity [mol/L].
    pub qs: f64,
    /// Number of theoretical plates (dimensionless).
    pub ntp: f64,
    /// Ratio of stationary to mobile volumetric fractions (dimensionless).
    ///
    /// Zero is allowed: it switches adsorption off, which the solver tests
    /// use to recover the linear advection-diffusion limit.
    pub phase_ratio: f64,
}

impl ModelParams {
    pub fn new(b1: f64, b2: f64, qs: f64, ntp: f64, phase_ratio: f64) -> Result<Self> {
        for (name, v) in [("b1", b1), ("b2", b2), ("qs", qs)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(ntp >= 1.0 && ntp.is_finite()) {
            return Err(Error::InvalidConfig(format!("ntp must be >= 1, got {ntp}")));
        }
        if !(phase_ratio >= 0.0 && phase_ratio.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "phase_ratio must be >= 0, got {phase_ratio}"
            )));
        }
        Ok(Self {
            b1,
            b2,
            qs,
            ntp,
            phase_ratio,
        })
    }

    /// The uncertain components as a vector, in `(b1, b2, qs, ntp)` order.
    pub fn theta(&self) -> [f64; THETA_DIM] {
        [self.b1, self.b2, self.qs, self.ntp]
    }

    /// Rebuild parameters from a theta vector and the fixed phase ratio.
    pub fn from_theta(theta: [f64; THETA_DIM], phase_ratio: f64) -> Result<Self> {
        Self::new(theta[0], theta[1], theta[2], theta[3], phase_ratio)
    }
}

/// Axis-aligned box of admissible theta vectors (the uniform prior support).
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamBox {
    pub lower: [f64; THETA_DIM],
    pub upper: [f64; THETA_DIM],
}

impl ParamBox {
    pub fn new(lower: [f64; THETA_DIM], upper: [f64; THETA_DIM]) -> Result<Self> {
        for i in 0..THETA_DIM {
            if !(lower[i] > 0.0 && lower[i] < upper[i] && upper[i].is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "parameter box component {i}: need 0 < lower < upper, got [{}, {}]",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn contains(&self, theta: &[f64; THETA_DIM]) -> bool {
        (0..THETA_DIM).all(|i| theta[i] >= self.lower[i] && theta[i] <= self.upper[i])
    }

    pub fn midpoint(&self) -> [f64; THETA_DIM] {
        core::array::from_fn(|i| 0.5 * (self.lower[i] + self.upper[i]))
    }

    pub fn width(&self) -> [f64; THETA_DIM] {
        core::array::from_fn(|i| self.upper[i] - self.lower[i])
    }
}

/// A single experimental design: injection duration and feed concentration.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignPoint {
    /// Injection time in dimensionless time units.
    pub tau_inj: f64,
    /// Feed concentration of both components [mol/L].
    pub c_feed: f64,
}

impl DesignPoint {
    pub fn new(tau_inj: f64, c_feed: f64) -> Result<Self> {
        if !(tau_inj > 0.0 && tau_inj.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tau_inj must be > 0, got {tau_inj}"
            )));
        }
        if !(c_feed >= 0.0 && c_feed.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "c_feed must be >= 0, got {c_feed}"
            )));
        }
        Ok(Self { tau_inj, c_feed })
    }
}

/// Rectangle of admissible designs.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignBox {
    pub tau_range: (f64, f64),
    pub c_range: (f64, f64),
}

impl DesignBox {
    pub fn new(tau_range: (f64, f64), c_range: (f64, f64)) -> Result<Self> {
        for (name, r) in [("tau_inj", tau_range), ("c_feed", c_range)] {
            if !(r.0 > 0.0 && r.0 < r.1 && r.1.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "design range {name}: need 0 < lo < hi, got [{}, {}]",
                    r.0, r.1
                )));
            }
        }
        Ok(Self { tau_range, c_range })
    }

    pub fn contains(&self, d: &DesignPoint) -> bool {
        d.tau_inj >= self.tau_range.0
            && d.tau_inj <= self.tau_range.1
            && d.c_feed >= self.c_range.0
            && d.c_feed <= self.c_range.1
    }
}

/// Rectangular lattice of design points, sorted ascending in both directions.
///
/// Used both as the surrogate training grid and as the sweep lattice for the
/// expected-information-gain maps.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct DesignGrid {
    pub taus: Vec<f64>,
    pub cs: Vec<f64>,
}

impl DesignGrid {
    pub fn new(taus: Vec<f64>, cs: Vec<f64>) -> Result<Self> {
        for (name, v) in [("tau_inj", &taus), ("c_feed", &cs)] {
            if v.is_empty() {
                return Err(Error::InvalidConfig(format!("{name} axis is empty")));
            }
            if !v.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidConfig(format!(
                    "{name} axis must be strictly increasing"
                )));
            }
            if v[0] <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} axis must be positive"
                )));
            }
        }
        Ok(Self { taus, cs })
    }

    /// Equidistant `n_tau x n_c` lattice spanning the design box.
    pub fn equidistant(bx: &DesignBox, n_tau: usize, n_c: usize) -> Result<Self> {
        if n_tau < 2 || n_c < 2 {
            return Err(Error::InvalidConfig(
                "design grid needs at least 2 nodes per axis".into(),
            ));
        }
        let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            (0..n)
                .map(|i| lo + i as f64 * (hi - lo) / (n - 1) as f64)
                .collect()
        };
        Self::new(
            axis(bx.tau_range.0, bx.tau_range.1, n_tau),
            axis(bx.c_range.0, bx.c_range.1, n_c),
        )
    }

    pub fn n_tau(&self) -> usize {
        self.taus.len()
    }

    pub fn n_c(&self) -> usize {
        self.cs.len()
    }

    pub fn len(&self) -> usize {
        self.taus.len() * self.cs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node at lattice position `(i, j)`; row-major flat index is
    /// `i * n_c + j`.
    pub fn node(&self, i: usize, j: usize) -> DesignPoint {
        DesignPoint {
            tau_inj: self.taus[i],
            c_feed: self.cs[j],
        }
    }

    /// All nodes in row-major order (`tau` outer, `c_feed` inner).
    pub fn nodes(&self) -> Vec<DesignPoint> {
        let mut out = Vec::with_capacity(self.len());
        for &t in &self.taus {
            for &c in &self.cs {
                out.push(DesignPoint {
                    tau_inj: t,
                    c_feed: c,
                });
            }
        }
        out
    }
}

/// Measurement times at the column outlet plus the noise level.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSchedule {
    /// Strictly increasing times in `(0, upsilon)`.
    pub times: Vec<f64>,
    /// Measurement noise standard deviation [mol/L].
    pub sigma: f64,
    /// Simulation horizon the times must stay inside.
    pub upsilon: f64,
}

impl ObservationSchedule {
    pub fn new(times: Vec<f64>, sigma: f64, upsilon: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be > 0, got {sigma}"
            )));
        }
        if times.is_empty() {
            return Err(Error::InvalidConfig(
                "schedule needs at least one time".into(),
            ));
        }
        let mut prev = 0.0;
        for &t in &times {
            if !(t > prev && t < upsilon) {
                return Err(Error::InvalidConfig(format!(
                    "schedule times must be strictly increasing inside (0, {upsilon}); offending time {t}"
                )));
            }
            prev = t;
        }
        Ok(Self {
            times,
            sigma,
            upsilon,
        })
    }

    /// `n` equidistant times on `[t0, t1]`, endpoints included.
    pub fn equidistant(n: usize, t0: f64, t1: f64, sigma: f64, upsilon: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(
                "equidistant schedule needs n >= 2".into(),
            ));
        }
        let step = (t1 - t0) / (n - 1) as f64;
        let times = (0..n).map(|i| t0 + i as f64 * step).collect();
        Self::new(times, sigma, upsilon)
    }

    /// Number of observation times `N_s`.
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    /// Total measurement dimension `K = 2 N_s` (two components).
    pub fn dim(&self) -> usize {
        2 * self.times.len()
    }
}

/// A measurement vector: component-1 values at all times, then component-2.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_nonnegative(c: [f64; 2]) -> Result<()> {
    for (i, v) in c.iter().enumerate() {
        if !(*v >= 0.0) {
            return Err(Error::NegativeConcentration {
                component: i,
                value: *v,
            });
        }
    }
    Ok(())
}

/// Competitive Langmuir isotherm: `q_i = qs b_i c_i / (1 + b1 c1 + b2 c2)`.
pub fn langmuir(params: &ModelParams, c: [f64; 2]) -> Result<[f64; 2]> {
    check_nonnegative(c)?;
    Ok(langmuir_unchecked(params, c))
}

#[inline]
pub(crate) fn langmuir_unchecked(params: &ModelParams, c: [f64; 2]) -> [f64; 2] {
    let denom = 1.0 + params.b1 * c[0] + params.b2 * c[1];
    [
        params.qs * params.b1 * c[0] / denom,
        params.qs * params.b2 * c[1] / denom,
    ]
}

/// Jacobian of the isotherm: `J_ij = d q_i / d c_j`.
///
/// In closed form, with `D = 1 + b1 c1 + b2 c2`:
/// `J_ij = qs * b_i * (delta_ij * D - c_i * b_j) / D^2`.
/// Diagonal entries are nonnegative and off-diagonal entries nonpositive for
/// any admissible parameters and nonnegative concentrations.
pub fn langmuir_jacobian(params: &ModelParams, c: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    check_nonnegative(c)?;
    Ok(langmuir_jacobian_unchecked(params, c))
}

#[inline]
pub(crate) fn langmuir_jacobian_unchecked(params: &ModelParams, c: [f64; 2]) -> [[f64; 2]; 2] {
    let b = [params.b1, params.b2];
    let denom = 1.0 + b[0] * c[0] + b[1] * c[1];
    let inv_d2 = 1.0 / (denom * denom);
    let mut j = [[0.0; 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            let kron = if i == k { denom } else { 0.0 };
            j[i][k] = params.qs * b[i] * (kron - c[i] * b[k]) * inv_d2;
        }
    }
    j
}

/// Gaussian log-likelihood up to its additive constant:
/// `-||obs - predicted||^2 / (2 sigma^2)`.
///
/// The `(2 pi sigma^2)^(-K/2)` normalization is omitted throughout the crate;
/// it cancels in every Metropolis ratio and in the information-gain
/// difference, which the `oed` tests assert explicitly.
pub fn log_likelihood(obs: &Observation, predicted: &Observation, sigma: f64) -> Result<f64> {
    if obs.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            expected: obs.len(),
            got: predicted.len(),
        });
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "sigma must be > 0, got {sigma}"
        )));
    }
    let mut ss = 0.0;
    for (a, b) in obs.values.iter().zip(&predicted.values) {
        let r = a - b;
        ss += r * r;
    }
    Ok(-ss / (2.0 * sigma * sigma))
}

/// Map a parameter vector into the interpolation cube `[-1, 1]^4`.
pub fn affine_to_unit(bx: &ParamBox, params: &ModelParams) -> Result<[f64; THETA_DIM]> {
    let theta = params.theta();
    if !bx.contains(&theta) {
        let i = (0..THETA_DIM)
            .find(|&i| theta[i] < bx.lower[i] || theta[i] > bx.upper[i])
            .unwrap_or(0);
        return Err(Error::OutOfDomain {
            what: "theta component",
            value: theta[i],
            lo: bx.lower[i],
            hi: bx.upper[i],
        });
    }
    Ok(core::array::from_fn(|i| {
        2.0 * (theta[i] - bx.lower[i]) / (bx.upper[i] - bx.lower[i]) - 1.0
    }))
}

/// Inverse of [`affine_to_unit`]; `u` must lie in the closed unit cube.
pub fn affine_from_unit(
    bx: &ParamBox,
    u: [f64; THETA_DIM],
    phase_ratio: f64,
) -> Result<ModelParams> {
    for &v in &u {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::OutOfDomain {
                what: "unit coordinate",
                value: v,
                lo: -1.0,
                hi: 1.0,
            });
        }
    }
    let theta: [f64; THETA_DIM] =
        core::array::from_fn(|i| bx.lower[i] + 0.5 * (u[i] + 1.0) * (bx.upper[i] - bx.lower[i]));
    ModelParams::from_theta(theta, phase_ratio)
}
