//! Derivative-free tuning of the sampling density.
//!
//! The optimization variables are the 2m-1 Euler angles of the Fourier
//! coefficient vector; the objective is a stochastic estimate of the
//! expected centered L2 discrepancy of an n-point, d-dimensional design
//! drawn from the corresponding density. The replicate count per estimate
//! grows on a fixed schedule so the stochastic-approximation error
//! vanishes over the run.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, TAU};

use cobyla::{Func, RhoBeg, StopTols};
use rayon::prelude::*;

use crate::discrepancy::{centered_l2_discrepancy_with, CompensatedSum, DiscrepancyVariant};
use crate::error::{Error, Result};
use crate::spectral::{
    angles_to_coefficients, coefficients_to_pmf, sample_design, EulerAngleVector,
    ProbabilityMassFunction,
};
use crate::stream::{tags, StreamSeed};

/// Initial trust-region radius, in radians.
const RHO_BEGIN: f64 = 0.5;
/// Final trust-region radius; the optimizer's native collapse criterion.
const RHO_END: f64 = 1e-4;

/// Parameters of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    /// Design size each replicate draws.
    pub n: usize,
    /// Design dimension.
    pub d: usize,
    /// Number of density cells (2m-1 angles are optimized).
    pub m: usize,
    /// Replicates per estimate at iteration 0.
    pub a_initial: usize,
    /// Iterations between unit increments of the replicate count.
    pub a_growth_period: usize,
    /// Objective-evaluation budget.
    pub max_iterations: usize,
    /// Root seed for all random streams of the run.
    pub seed: u64,
    /// Discrepancy variant the objective scores against.
    pub variant: DiscrepancyVariant,
}

impl ObjectiveSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("n", self.n),
            ("d", self.d),
            ("m", self.m),
            ("a_initial", self.a_initial),
            ("a_growth_period", self.a_growth_period),
            ("max_iterations", self.max_iterations),
        ] {
            if value == 0 {
                return Err(Error::InvalidSpec(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Number of optimization variables.
    pub fn angle_count(&self) -> usize {
        2 * self.m - 1
    }
}

/// One recorded objective evaluation.
#[derive(Debug, Clone)]
pub struct IterateRecord {
    pub iteration: usize,
    pub angles: EulerAngleVector,
    pub replicates: usize,
    pub objective: f64,
}

/// Full history of a run plus the reported optimum.
#[derive(Debug, Clone)]
pub struct OptimizationTrace {
    pub iterates: Vec<IterateRecord>,
    pub best_angles: EulerAngleVector,
    /// Minimum recorded iterate objective.
    pub best_objective: f64,
    /// The best iterate re-scored once with `rescore_replicates`
    /// replicates; this is the reported final objective. Re-scoring with
    /// a larger sample guards against selecting a lucky noise draw.
    pub rescored_objective: f64,
    pub rescore_replicates: usize,
}

impl OptimizationTrace {
    /// One JSON object per evaluated iterate, then one flagged line for
    /// the final re-scored objective.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for it in &self.iterates {
            out.push_str(&format!(
                "{{\"iter\":{},\"a\":{},\"objective\":{}}}\n",
                it.iteration,
                it.replicates,
                serde_json::Number::from_f64(it.objective)
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "null".into()),
            ));
        }
        out.push_str(&format!(
            "{{\"iter\":{},\"a\":{},\"objective\":{},\"rescored\":true}}\n",
            self.iterates.len(),
            self.rescore_replicates,
            serde_json::Number::from_f64(self.rescored_objective)
                .map(|v| v.to_string())
                .unwrap_or_else(|| "null".into()),
        ));
        out
    }
}

/// Replicates used by evaluation `iteration` (zero-based):
/// `a_initial + floor(iteration / period)`.
pub fn replicate_schedule(iteration: usize, a_initial: usize, period: usize) -> usize {
    a_initial + iteration / period.max(1)
}

/// Mean centered L2 discrepancy over `a` designs drawn independently
/// from the density encoded by `theta`. Replicate streams are derived
/// from `stream`, evaluated in parallel, and reduced in replicate order,
/// so the result depends only on `(theta, spec, a, stream)`.
pub fn estimate_expected_discrepancy(
    theta: &EulerAngleVector,
    spec: &ObjectiveSpec,
    a: usize,
    stream: StreamSeed,
) -> Result<f64> {
    spec.validate()?;
    if a == 0 {
        return Err(Error::InvalidSpec("replicate count must be at least 1".into()));
    }
    if theta.m() != spec.m {
        return Err(Error::InvalidSpec(format!(
            "angle vector encodes m = {} but the objective is configured for m = {}",
            theta.m(),
            spec.m
        )));
    }
    let pmf = coefficients_to_pmf(&angles_to_coefficients(theta));
    let replicate_root = stream.child(tags::REPLICATE);
    let values = (0..a)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_root.child(r as u64).rng();
            let design = sample_design(&pmf, spec.n, spec.d, &mut rng)?;
            Ok(centered_l2_discrepancy_with(&design, spec.variant).value())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut acc = CompensatedSum::default();
    for v in &values {
        acc.add(*v);
    }
    Ok(acc.value() / a as f64)
}

/// Minimizes a blackbox objective over the box `[0, 2pi]^{2m-1}`.
///
/// Backed by a COBYLA-style linear-approximation trust-region method
/// with the box expressed as linear inequality constraints. Candidate
/// points are clamped into the box before evaluation, so `f` is never
/// called outside it, and `f` is called at most `budget` times. Budget
/// exhaustion and trust-region collapse are both normal terminations;
/// the best evaluated point is returned either way.
pub fn minimize_blackbox<F>(
    f: F,
    theta0: &EulerAngleVector,
    budget: usize,
) -> Result<(EulerAngleVector, f64)>
where
    F: FnMut(&EulerAngleVector) -> f64,
{
    if budget == 0 {
        return Err(Error::InvalidSpec("budget must be at least 1".into()));
    }
    struct EvalState<F> {
        f: F,
        evals: usize,
        best: Option<(EulerAngleVector, f64)>,
    }
    let state = RefCell::new(EvalState {
        f,
        evals: 0,
        best: None,
    });

    let objective = |x: &[f64], _: &mut ()| -> f64 {
        let mut guard = state.borrow_mut();
        let st = &mut *guard;
        if st.evals >= budget {
            // The solver is already past its evaluation budget; echo the
            // best value instead of spending another call.
            return st.best.as_ref().map_or(f64::MAX, |b| b.1);
        }
        let (theta, _) = EulerAngleVector::from_clamped(x)
            .expect("trust-region candidates stay finite inside a finite box");
        st.evals += 1;
        let value = (st.f)(&theta);
        if st.best.as_ref().is_none_or(|b| value < b.1) {
            st.best = Some((theta, value));
        }
        value
    };

    let dim = theta0.angles().len();
    let bounds = vec![(0.0, TAU); dim];
    let cons: Vec<&dyn Func<()>> = Vec::new();
    let stop = StopTols {
        xtol_abs: vec![RHO_END; dim],
        ..StopTols::default()
    };
    let _ = cobyla::minimize(
        objective,
        theta0.angles(),
        &bounds,
        &cons,
        (),
        budget,
        RhoBeg::All(RHO_BEGIN),
        Some(stop),
    );

    let state = state.into_inner();
    state
        .best
        .ok_or_else(|| Error::OptimizerFailed("no objective evaluation completed".into()))
}

/// Runs the full density-optimization loop and returns the tuned mass
/// function together with the evaluation trace.
///
/// The starting point is the uniform density. Its angle preimage is
/// taken at all angles = pi/2 (coefficient vector i*e_{m-1}) rather than
/// the all-zeros preimage (e_0): both encode the exact uniform density,
/// but at all-zeros the chart is rank-deficient — single-angle moves
/// only rotate the phase of c_0 and leave the density unchanged, which
/// starves a simplex-based optimizer of signal. At all-pi/2 every angle
/// perturbs the density independently.
pub fn run_sfsfd(spec: &ObjectiveSpec) -> Result<(ProbabilityMassFunction, OptimizationTrace)> {
    spec.validate()?;
    let theta0 = EulerAngleVector::new(vec![FRAC_PI_2; spec.angle_count()])
        .expect("pi/2 lies inside [0, 2pi]");
    let root = StreamSeed::from_root(spec.seed);

    let records: RefCell<Vec<IterateRecord>> = RefCell::new(Vec::new());
    let objective = |theta: &EulerAngleVector| -> f64 {
        let iteration = records.borrow().len();
        let replicates = replicate_schedule(iteration, spec.a_initial, spec.a_growth_period);
        let stream = root.child(tags::EVALUATION).child(iteration as u64);
        let objective = estimate_expected_discrepancy(theta, spec, replicates, stream)
            .expect("objective evaluation cannot fail for a validated spec");
        records.borrow_mut().push(IterateRecord {
            iteration,
            angles: theta.clone(),
            replicates,
            objective,
        });
        objective
    };

    let (best_angles, best_objective) =
        minimize_blackbox(objective, &theta0, spec.max_iterations)?;

    let iterates = records.into_inner();
    let a_final = iterates.last().map_or(spec.a_initial, |it| it.replicates);
    let rescore_replicates = 4 * a_final;
    let rescored_objective = estimate_expected_discrepancy(
        &best_angles,
        spec,
        rescore_replicates,
        root.child(tags::RESCORE),
    )?;

    let pmf = coefficients_to_pmf(&angles_to_coefficients(&best_angles));
    let trace = OptimizationTrace {
        iterates,
        best_angles,
        best_objective,
        rescored_objective,
        rescore_replicates,
    };
    Ok((pmf, trace))
}
