//! Sparse-grid surrogate of the forward map.
//!
//! For every node of a rectangular design grid, a sparse-grid interpolant
//! approximates both outlet breakthrough curves as a function of the four
//! uncertain parameters, sampled on a fixed dense time grid. Evaluating the
//! surrogate at an arbitrary design point blends the four surrounding node
//! interpolants bilinearly. This keeps one trained model valid for every
//! observation schedule: the observation operator is applied after
//! interpolation, exactly as for the full solver.
//!
//! Training decomposes into independent forward solves, one per
//! `(parameter node, design node)` pair. [`TrainingPlan`] exposes that job
//! list so callers may run the solves in parallel and assemble the model via
//! [`SurrogateModel::from_parts`]; [`train`] is the sequential reference
//! path.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{
    affine_from_unit, affine_to_unit, DesignBox, DesignGrid, DesignPoint, ModelParams, Observation,
    ObservationSchedule, ParamBox, THETA_DIM,
};
use crate::solver::{observe, solve_forward, BreakthroughCurve, SolverConfig};
use crate::sparse::{Placement, SparseGridDesign, SparseGridInterpolant};
use crate::{Error, Result};

/// Default number of dense output times the curves are sampled on.
pub const DENSE_TIME_POINTS: usize = 512;

/// Everything needed to run the training solves and assemble the model.
#[derive(Debug, Clone)]
pub struct TrainingPlan {
    pub param_box: ParamBox,
    pub design_box: DesignBox,
    pub grid: DesignGrid,
    pub time_grid: Vec<f64>,
    pub phase_ratio: f64,
    pub solver: SolverConfig,
    sparse: SparseGridDesign,
    thetas: Vec<ModelParams>,
}

impl TrainingPlan {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        solver: SolverConfig,
        param_box: ParamBox,
        design_box: DesignBox,
        n_tau: usize,
        n_c: usize,
        q: usize,
        placement: Placement,
        phase_ratio: f64,
        n_time: usize,
    ) -> Result<Self> {
        if q < THETA_DIM {
            return Err(Error::InvalidConfig(alloc::format!(
                "q = {q} must be >= parameter dimension {THETA_DIM}"
            )));
        }
        if n_time < 2 {
            return Err(Error::InvalidConfig(
                "dense time grid needs >= 2 points".into(),
            ));
        }
        if design_box.tau_range.1 >= solver.upsilon {
            return Err(Error::InvalidConfig(alloc::format!(
                "design tau range extends to {} >= horizon {}",
                design_box.tau_range.1,
                solver.upsilon
            )));
        }
        let grid = DesignGrid::equidistant(&design_box, n_tau, n_c)?;
        let sparse = SparseGridDesign::new(THETA_DIM, q, placement)?;
        let thetas = sparse
            .nodes()
            .iter()
            .map(|u| affine_from_unit(&param_box, [u[0], u[1], u[2], u[3]], phase_ratio))
            .collect::<Result<Vec<_>>>()?;
        let time_grid = (0..n_time)
            .map(|i| i as f64 * solver.upsilon / (n_time - 1) as f64)
            .collect();
        Ok(Self {
            param_box,
            design_box,
            grid,
            time_grid,
            phase_ratio,
            solver,
            sparse,
            thetas,
        })
    }

    /// Sparse-grid parameter nodes mapped into physical units, in the
    /// canonical node order.
    pub fn thetas(&self) -> &[ModelParams] {
        &self.thetas
    }

    pub fn sparse_design(&self) -> &SparseGridDesign {
        &self.sparse
    }

    /// Number of output channels per interpolant (both curves).
    pub fn output_width(&self) -> usize {
        2 * self.time_grid.len()
    }

    /// Total number of forward solves: `N(q, 4) * n_tau * n_c`.
    pub fn solve_count(&self) -> usize {
        self.thetas.len() * self.grid.len()
    }

    /// Run all solves of one design node sequentially and pack the values in
    /// canonical sparse-node order, ready for
    /// [`SparseGridInterpolant::from_values`].
    pub fn node_training_values(&self, d: &DesignPoint) -> Result<Vec<f64>> {
        let width = self.output_width();
        let mut values = Vec::with_capacity(self.thetas.len() * width);
        for theta in &self.thetas {
            let curve = solve_forward(theta, d, &self.solver)?;
            pack_curve(&curve, &self.time_grid, &mut values)?;
        }
        Ok(values)
    }
}

/// Resample a curve onto the dense time grid and append both component
/// blocks (c1 first) to `out`.
pub fn pack_curve(curve: &BreakthroughCurve, time_grid: &[f64], out: &mut Vec<f64>) -> Result<()> {
    let (c1, c2) = curve.resample(time_grid)?;
    out.extend_from_slice(&c1);
    out.extend_from_slice(&c2);
    Ok(())
}

/// Trained surrogate: one parameter interpolant per design-grid node.
#[derive(Debug, Clone)]
pub struct SurrogateModel {
    param_box: ParamBox,
    design_box: DesignBox,
    grid: DesignGrid,
    time_grid: Vec<f64>,
    phase_ratio: f64,
    q: usize,
    placement: Placement,
    /// Row-major over the design grid: index `i_tau * n_c + i_c`.
    interpolants: Vec<SparseGridInterpolant>,
}

impl SurrogateModel {
    /// Assemble from per-design-node interpolants (row-major order).
    pub fn from_parts(
        plan: &TrainingPlan,
        interpolants: Vec<SparseGridInterpolant>,
    ) -> Result<Self> {
        if interpolants.len() != plan.grid.len() {
            return Err(Error::LengthMismatch {
                expected: plan.grid.len(),
                got: interpolants.len(),
            });
        }
        let width = plan.output_width();
        for interp in &interpolants {
            if interp.output_width() != width
                || interp.dim() != THETA_DIM
                || interp.level() != plan.sparse.level()
                || interp.placement() != plan.sparse.placement()
            {
                return Err(Error::InvalidConfig("interpolant metadata mismatch".into()));
            }
        }
        Ok(Self {
            param_box: plan.param_box,
            design_box: plan.design_box,
            grid: plan.grid.clone(),
            time_grid: plan.time_grid.clone(),
            phase_ratio: plan.phase_ratio,
            q: plan.sparse.level(),
            placement: plan.sparse.placement(),
            interpolants,
        })
    }

    /// Rebuild a model from previously persisted parts.
    #[allow(clippy::too_many_arguments)]
    pub fn from_raw(
        param_box: ParamBox,
        design_box: DesignBox,
        grid: DesignGrid,
        time_grid: Vec<f64>,
        phase_ratio: f64,
        interpolants: Vec<SparseGridInterpolant>,
    ) -> Result<Self> {
        if interpolants.is_empty() || interpolants.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: interpolants.len(),
            });
        }
        let width = 2 * time_grid.len();
        let q = interpolants[0].level();
        let placement = interpolants[0].placement();
        for interp in &interpolants {
            if interp.output_width() != width
                || interp.dim() != THETA_DIM
                || interp.level() != q
                || interp.placement() != placement
            {
                return Err(Error::InvalidConfig("interpolant metadata mismatch".into()));
            }
        }
        if !(phase_ratio >= 0.0 && phase_ratio.is_finite()) {
            return Err(Error::InvalidConfig("phase_ratio must be >= 0".into()));
        }
        Ok(Self {
            param_box,
            design_box,
            grid,
            time_grid,
            phase_ratio,
            q,
            placement,
            interpolants,
        })
    }

    pub fn param_box(&self) -> &ParamBox {
        &self.param_box
    }

    pub fn design_box(&self) -> &DesignBox {
        &self.design_box
    }

    pub fn grid(&self) -> &DesignGrid {
        &self.grid
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.time_grid
    }

    pub fn phase_ratio(&self) -> f64 {
        self.phase_ratio
    }

    pub fn level(&self) -> usize {
        self.q
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn node_interpolant(&self, i: usize, j: usize) -> &SparseGridInterpolant {
        &self.interpolants[i * self.grid.n_c() + j]
    }

    pub fn interpolants(&self) -> &[SparseGridInterpolant] {
        &self.interpolants
    }

    /// Training nodes per design node, `N(q, 4)`.
    pub fn nodes_per_design(&self) -> usize {
        self.interpolants[0].n_nodes()
    }

    /// Predicted breakthrough curves at `(theta, d)`.
    ///
    /// Evaluates the (up to four) surrounding design-node interpolants at the
    /// unit-cube image of `theta` and blends bilinearly; corners with zero
    /// blend weight are skipped, so lattice nodes reproduce their stored
    /// interpolant output exactly.
    pub fn eval_curve(&self, theta: &ModelParams, d: &DesignPoint) -> Result<BreakthroughCurve> {
        let u = affine_to_unit(&self.param_box, theta)?;
        self.eval_curve_unit(&u, d)
    }

    /// Same as [`Self::eval_curve`] with the parameters already mapped onto
    /// the unit cube.
    ///
    /// Training-node coordinates live in unit space, so queries at exactly
    /// those coordinates (and a lattice design node) reproduce the stored
    /// training curves bitwise; the physical-space entry point is subject to
    /// one rounding of the affine box map.
    pub fn eval_curve_unit(
        &self,
        u: &[f64; THETA_DIM],
        d: &DesignPoint,
    ) -> Result<BreakthroughCurve> {
        let width = 2 * self.time_grid.len();
        let mut blended = vec![0.0; width];
        self.eval_channels(u, d, &mut blended)?;
        let n = self.time_grid.len();
        Ok(BreakthroughCurve {
            times: self.time_grid.clone(),
            c1_out: blended[..n].to_vec(),
            c2_out: blended[n..].to_vec(),
        })
    }

    fn eval_channels(&self, u: &[f64; THETA_DIM], d: &DesignPoint, out: &mut [f64]) -> Result<()> {
        if !self.design_box.contains(d) {
            return Err(Error::OutOfDomain {
                what: "design point",
                value: d.tau_inj,
                lo: self.design_box.tau_range.0,
                hi: self.design_box.tau_range.1,
            });
        }
        let (i, s) = bracket(&self.grid.taus, d.tau_inj);
        let (j, t) = bracket(&self.grid.cs, d.c_feed);
        let n_c = self.grid.n_c();

        out.fill(0.0);
        let mut corner = vec![0.0; out.len()];
        for (di, dj, w) in [
            (0usize, 0usize, (1.0 - s) * (1.0 - t)),
            (0, 1, (1.0 - s) * t),
            (1, 0, s * (1.0 - t)),
            (1, 1, s * t),
        ] {
            if w == 0.0 {
                continue;
            }
            let idx = (i + di) * n_c + (j + dj);
            self.interpolants[idx].eval_into(u, &mut corner)?;
            if w == 1.0 {
                out.copy_from_slice(&corner);
            } else {
                for (o, c) in out.iter_mut().zip(&corner) {
                    *o += w * c;
                }
            }
        }
        Ok(())
    }

    /// The surrogate forward map: observation vector at `(theta, d)`.
    pub fn eval_observation(
        &self,
        theta: &ModelParams,
        d: &DesignPoint,
        schedule: &ObservationSchedule,
    ) -> Result<Observation> {
        let curve = self.eval_curve(theta, d)?;
        observe(&curve, schedule)
    }

    /// Compare the surrogate against the full solver on `n_samples` random
    /// `(theta, d)` draws; deterministic for a given seed.
    pub fn validate(
        &self,
        solver: &SolverConfig,
        n_samples: usize,
        seed: u64,
    ) -> Result<ValidationReport> {
        if n_samples == 0 {
            return Err(Error::InvalidConfig(
                "validation needs n_samples >= 1".into(),
            ));
        }
        let mut rng = crate::random::rng_from_seed(seed);
        let mut sup = [0.0f64; 2];
        let mut sum_sq = [0.0f64; 2];
        let mut count = 0usize;
        for _ in 0..n_samples {
            let theta: [f64; THETA_DIM] = core::array::from_fn(|i| {
                crate::random::uniform_in(
                    &mut rng,
                    self.param_box.lower[i],
                    self.param_box.upper[i],
                )
            });
            let params = ModelParams::from_theta(theta, self.phase_ratio)?;
            let d = DesignPoint {
                tau_inj: crate::random::uniform_in(
                    &mut rng,
                    self.design_box.tau_range.0,
                    self.design_box.tau_range.1,
                ),
                c_feed: crate::random::uniform_in(
                    &mut rng,
                    self.design_box.c_range.0,
                    self.design_box.c_range.1,
                ),
            };
            let truth = solve_forward(&params, &d, solver)?;
            let (t1, t2) = truth.resample(&self.time_grid)?;
            let approx = self.eval_curve(&params, &d)?;
            for k in 0..self.time_grid.len() {
                let d1 = (approx.c1_out[k] - t1[k]).abs();
                let d2 = (approx.c2_out[k] - t2[k]).abs();
                sup[0] = sup[0].max(d1);
                sup[1] = sup[1].max(d2);
                sum_sq[0] += d1 * d1;
                sum_sq[1] += d2 * d2;
            }
            count += self.time_grid.len();
        }
        Ok(ValidationReport {
            n_samples,
            seed,
            sup,
            rms: [
                crate::fmath::sqrt(sum_sq[0] / count as f64),
                crate::fmath::sqrt(sum_sq[1] / count as f64),
            ],
        })
    }
}

/// Bracketing interval of `x` in a sorted axis: returns `(index, weight)`
/// such that `x = axis[index] * (1 - w) + axis[index + 1] * w`, with the
/// convention `(i, 0)` at interior nodes and exact weights at lattice nodes.
fn bracket(axis: &[f64], x: f64) -> (usize, f64) {
    let last = axis.len() - 1;
    let i = axis
        .partition_point(|&a| a <= x)
        .saturating_sub(1)
        .min(last - 1);
    if axis[i] == x {
        return (i, 0.0);
    }
    if axis[i + 1] == x {
        return (i, 1.0);
    }
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}

/// Deviation of the surrogate from the solver over random draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub n_samples: usize,
    pub seed: u64,
    /// Maximum absolute deviation per component [mol/L].
    pub sup: [f64; 2],
    /// Root-mean-square deviation per component [mol/L].
    pub rms: [f64; 2],
}

impl ValidationReport {
    pub fn sup_overall(&self) -> f64 {
        self.sup[0].max(self.sup[1])
    }
}

/// Sequential training: run every solve and assemble the model. Returns the
/// model together with the number of forward solves performed.
#[allow(clippy::too_many_arguments)]
pub fn train(
    solver: SolverConfig,
    param_box: ParamBox,
    design_box: DesignBox,
    n_tau: usize,
    n_c: usize,
    q: usize,
    placement: Placement,
    phase_ratio: f64,
    n_time: usize,
) -> Result<(SurrogateModel, usize)> {
    let plan = TrainingPlan::new(
        solver,
        param_box,
        design_box,
        n_tau,
        n_c,
        q,
        placement,
        phase_ratio,
        n_time,
    )?;
    let width = plan.output_width();
    let mut interpolants = Vec::with_capacity(plan.grid.len());
    for d in plan.grid.nodes() {
        let values = plan.node_training_values(&d)?;
        interpolants.push(SparseGridInterpolant::from_values(
            plan.sparse_design(),
            width,
            &values,
        )?);
    }
    let count = plan.solve_count();
    Ok((SurrogateModel::from_parts(&plan, interpolants)?, count))
}
