//! Steady-state tracking and robustness bounds for the primal-dual flow,
//! Lipschitz constants `ξ`, `η` of the field, and empirical validation of the
//! bounds against simulated trajectories.
//!
//! All distances are `‖Θ·‖₂` with the certificate metric. The Euclidean
//! supremum is reported alongside but never decides pass/fail.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contraction::ContractionCertificate;
use crate::dynamics::{integrate, observer_augmented_field, pd_vector_field, augmented_initial_state, displacement_jacobian, ObserverConfig, Trajectory, VectorField};
use crate::error::{Error, Result};
use crate::matrixcore::{norm2, spectral_norm, sub_vec, sym_inv_sqrt, DenseMatrix};
use crate::problem::SaddleProblem;
use crate::scalar::Scalar;

/// Relative slack in `observed ≤ predicted·(1 + SATISFACTION_SLACK)`.
pub const SATISFACTION_SLACK: f64 = 1e-6;
/// Grid size used by [`sup_optimum_rate`].
pub const RATE_GRID_POINTS: usize = 10_000;
/// Central-difference step for `ż*`.
pub const RATE_DIFF_STEP: f64 = 1e-4;
/// Default transient cutoff in units of `1/β`.
pub const CUTOFF_TIME_CONSTANTS: f64 = 8.0;
/// Safety factor applied to sampled Lipschitz maxima.
pub const SAMPLED_INFLATION: f64 = 1.1;

fn condition(msg: &str) -> Error {
    Error::Condition(msg.to_string())
}

fn require_nonneg<T: Scalar>(v: T, name: &str) -> Result<()> {
    if v >= T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be nonnegative and not NaN")))
    }
}

fn require_beta<T: Scalar>(beta: T) -> Result<()> {
    if beta > T::zero() {
        Ok(())
    } else {
        Err(condition("beta > 0"))
    }
}

/// Checks `β > 0`, `β̂ > ξ` and `β(β̂ − ξ) > ηξ`; returns `(β̂ − ξ, β(β̂ − ξ) − ηξ)`.
fn observer_margins<T: Scalar>(beta: T, beta_hat: T, xi: T, eta: T) -> Result<(T, T)> {
    require_beta(beta)?;
    require_nonneg(xi, "xi")?;
    require_nonneg(eta, "eta")?;
    let gap = beta_hat - xi;
    if !(gap > T::zero()) {
        return Err(condition("beta_hat > xi"));
    }
    let margin = beta * gap - eta * xi;
    if !(margin > T::zero()) {
        return Err(condition("beta*(beta_hat - xi) > eta*xi"));
    }
    Ok((gap, margin))
}

/// Steady tracking error of the exact flow: `sup‖ż*‖/β`.
pub fn bound_tracking<T: Scalar>(beta: T, sup_rate: T) -> Result<T> {
    require_beta(beta)?;
    require_nonneg(sup_rate, "sup_rate")?;
    Ok(sup_rate / beta)
}

/// Distance between the estimate-driven and exact flows: `ξ·sup‖ẑ − z‖/β`.
pub fn bound_approx_to_pd<T: Scalar>(beta: T, xi: T, sup_estimate_error: T) -> Result<T> {
    require_beta(beta)?;
    require_nonneg(xi, "xi")?;
    require_nonneg(sup_estimate_error, "sup_estimate_error")?;
    Ok(xi * sup_estimate_error / beta)
}

/// Steady observer error: `η·sup‖z − z*‖/(β̂ − ξ)`.
pub fn bound_observer_error<T: Scalar>(eta: T, beta_hat: T, xi: T, sup_tracking: T) -> Result<T> {
    require_nonneg(eta, "eta")?;
    require_nonneg(xi, "xi")?;
    require_nonneg(sup_tracking, "sup_tracking")?;
    let gap = beta_hat - xi;
    if !(gap > T::zero()) {
        return Err(condition("beta_hat > xi"));
    }
    Ok(eta * sup_tracking / gap)
}

/// Steady tracking error with an observer in the loop:
/// `(β̂ − ξ)/(β(β̂ − ξ) − ηξ)·sup‖ż*‖`.
pub fn bound_tracking_with_observer<T: Scalar>(beta: T, beta_hat: T, xi: T, eta: T, sup_rate: T) -> Result<T> {
    require_nonneg(sup_rate, "sup_rate")?;
    let (gap, margin) = observer_margins(beta, beta_hat, xi, eta)?;
    if gap.is_infinite() {
        return Ok(sup_rate / beta);
    }
    Ok(gap / margin * sup_rate)
}

/// Distance between the observer-driven and exact flows:
/// `(1/β)·ηξ/(β(β̂ − ξ) − ηξ)·sup‖ż*‖`.
pub fn bound_perturbed_to_pd<T: Scalar>(beta: T, beta_hat: T, xi: T, eta: T, sup_rate: T) -> Result<T> {
    require_nonneg(sup_rate, "sup_rate")?;
    let (_, margin) = observer_margins(beta, beta_hat, xi, eta)?;
    Ok(eta * xi / margin * sup_rate / beta)
}

/// Default transient cutoff `8/β`.
pub fn default_cutoff<T: Scalar>(beta: T) -> T {
    T::lit(CUTOFF_TIME_CONSTANTS) / beta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipschitzMethod {
    AnalyticLinear,
    Sampled,
}

/// `η` bounds `‖f(z₁) − f(z₂)‖_Θ ≤ η‖z₁ − z₂‖_Θ`; `ξ` bounds the same ratio
/// when `z₁, z₂` differ only in the unobserved coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimates {
    pub xi: f64,
    pub eta: f64,
    pub method: LipschitzMethod,
    /// How `ξ` was restricted, recorded in every report that uses it.
    pub xi_scope: String,
    pub samples: Option<usize>,
    /// Sample pair attaining the `η` maximum.
    pub eta_argmax: Option<(Vec<f64>, Vec<f64>)>,
    /// Sample pair attaining the `ξ` maximum.
    pub xi_argmax: Option<(Vec<f64>, Vec<f64>)>,
}

pub const XI_SCOPE_UNOBSERVED: &str = "unobserved_subspace";

/// Axis-aligned box of states used for sampled estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StateBox<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> StateBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    /// `[−r, r]^dim`.
    pub fn cube(dim: usize, r: T) -> Result<Self> {
        Self::new(vec![-r; dim], vec![r; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(Error::Domain("state box needs matching nonempty bounds".into()));
        }
        if self.lower.iter().zip(&self.upper).any(|(&l, &u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::Domain("state box is degenerate (needs lower < upper in every coordinate)".into()));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| l + (u - l) * T::lit(rng.gen::<f64>()))
            .collect()
    }
}

/// Lipschitz constants in the certificate metric: analytic for quadratic
/// problems, sampled otherwise.
pub fn estimate_lipschitz<T: Scalar>(
    prob: &SaddleProblem<T>,
    cert: &ContractionCertificate<T>,
    obs: &ObserverConfig<T>,
    domain: &StateBox<T>,
    samples: usize,
    seed: u64,
) -> Result<LipschitzEstimates> {
    estimate_lipschitz_in(prob, &cert.theta, obs, domain, samples, seed)
}

/// As [`estimate_lipschitz`] with an explicit metric `Θ`.
pub fn estimate_lipschitz_in<T: Scalar>(
    prob: &SaddleProblem<T>,
    theta: &DenseMatrix<T>,
    obs: &ObserverConfig<T>,
    domain: &StateBox<T>,
    samples: usize,
    seed: u64,
) -> Result<LipschitzEstimates> {
    check_lipschitz_inputs(prob, theta, obs, domain, samples)?;
    if prob.is_quadratic() {
        analytic_lipschitz(prob, theta, obs)
    } else {
        sampled_lipschitz(prob, theta, obs, domain, samples, seed)
    }
}

fn check_lipschitz_inputs<T: Scalar>(
    prob: &SaddleProblem<T>,
    theta: &DenseMatrix<T>,
    obs: &ObserverConfig<T>,
    domain: &StateBox<T>,
    samples: usize,
) -> Result<()> {
    let dim = prob.dim();
    if theta.shape() != (dim, dim) {
        return Err(Error::Dimension(format!("metric is {:?}, expected {dim}x{dim}", theta.shape())));
    }
    obs.validate(dim)?;
    domain.validate()?;
    if domain.dim() != dim {
        return Err(Error::Domain(format!("state box has dimension {}, expected {dim}", domain.dim())));
    }
    if samples == 0 {
        return Err(Error::Domain("at least one sample is required".into()));
    }
    Ok(())
}

/// `η = ‖ΘAΘ⁻¹‖₂` and `ξ = ‖ΘAU·G^{−1/2}‖₂` with `U` the unobserved unit
/// columns and `G = (ΘU)ᵀ(ΘU)`, which is exact over perturbations confined to
/// the unobserved coordinates.
fn analytic_lipschitz<T: Scalar>(
    prob: &SaddleProblem<T>,
    theta: &DenseMatrix<T>,
    obs: &ObserverConfig<T>,
) -> Result<LipschitzEstimates> {
    let x0 = vec![T::zero(); prob.n()];
    let a = displacement_jacobian(prob, &x0, T::zero())?;
    let eta = eta_linear(&a, theta)?;
    let xi = if obs.unobserved().is_empty() {
        T::zero()
    } else {
        let u = DenseMatrix::identity(prob.dim()).select_columns(obs.unobserved());
        xi_on_subspace(&a, theta, &u)?
    };
    Ok(LipschitzEstimates {
        xi: xi.as_f64(),
        eta: eta.as_f64(),
        method: LipschitzMethod::AnalyticLinear,
        xi_scope: XI_SCOPE_UNOBSERVED.into(),
        samples: None,
        eta_argmax: None,
        xi_argmax: None,
    })
}

/// `sup ‖ΘAUδ‖/‖ΘUδ‖ = ‖ΘAU·G^{−1/2}‖₂` with `G = (ΘU)ᵀ(ΘU)`: the exact
/// Lipschitz constant of the linear field `A` over perturbations in `range(U)`.
/// `U` must have full column rank.
pub fn xi_on_subspace<T: Scalar>(a: &DenseMatrix<T>, theta: &DenseMatrix<T>, u: &DenseMatrix<T>) -> Result<T> {
    let theta_u = theta.matmul(u)?;
    let g = theta_u.transpose().matmul(&theta_u)?;
    let theta_au = theta.matmul(&a.matmul(u)?)?;
    spectral_norm(&theta_au.matmul(&sym_inv_sqrt(&g)?)?)
}

/// `‖ΘAΘ⁻¹‖₂`.
pub fn eta_linear<T: Scalar>(a: &DenseMatrix<T>, theta: &DenseMatrix<T>) -> Result<T> {
    let theta_inv = crate::matrixcore::inverse(theta)?;
    spectral_norm(&theta.matmul(a)?.matmul(&theta_inv)?)
}

/// Maximum ratio over `samples` random pairs in `domain`, inflated by 1.1.
/// These are estimates, not certified suprema.
pub fn sampled_lipschitz<T: Scalar>(
    prob: &SaddleProblem<T>,
    theta: &DenseMatrix<T>,
    obs: &ObserverConfig<T>,
    domain: &StateBox<T>,
    samples: usize,
    seed: u64,
) -> Result<LipschitzEstimates> {
    check_lipschitz_inputs(prob, theta, obs, domain, samples)?;
    let field = pd_vector_field(prob);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = T::zero();
    let ratio = |z1: &[T], z2: &[T]| -> Result<Option<T>> {
        let den = norm2(&theta.matvec(&sub_vec(z1, z2))?);
        if !(den > T::min_positive_value()) {
            return Ok(None);
        }
        let num = norm2(&theta.matvec(&sub_vec(&field.eval(z1, t), &field.eval(z2, t)))?);
        Ok(Some(num / den))
    };
    let mut eta = (T::zero(), None);
    let mut xi = (T::zero(), None);
    for _ in 0..samples {
        let z1 = domain.sample(&mut rng);
        let z2 = domain.sample(&mut rng);
        if let Some(r) = ratio(&z1, &z2)? {
            if r > eta.0 {
                eta = (r, Some((z1.clone(), z2.clone())));
            }
        }
        if !obs.unobserved().is_empty() {
            let zh = obs.splice(&z1, &obs.unobserved_part(&z2));
            if let Some(r) = ratio(&zh, &z1)? {
                if r > xi.0 {
                    xi = (r, Some((zh, z1)));
                }
            }
        }
    }
    let to_f64 = |p: Option<(Vec<T>, Vec<T>)>| {
        p.map(|(a, b)| (a.iter().map(|v| v.as_f64()).collect(), b.iter().map(|v| v.as_f64()).collect()))
    };
    Ok(LipschitzEstimates {
        xi: xi.0.as_f64() * SAMPLED_INFLATION,
        eta: eta.0.as_f64() * SAMPLED_INFLATION,
        method: LipschitzMethod::Sampled,
        xi_scope: XI_SCOPE_UNOBSERVED.into(),
        samples: Some(samples),
        eta_argmax: to_f64(eta.1),
        xi_argmax: to_f64(xi.1),
    })
}

/// `max ‖ż*(t)‖_Θ` over 10⁴ uniform points of `[t0, t1]` (Euclidean when
/// `metric` is `None`).
pub fn sup_optimum_rate<T: Scalar>(
    prob: &SaddleProblem<T>,
    t0: T,
    t1: T,
    metric: Option<&DenseMatrix<T>>,
) -> Result<T> {
    if !(t1 > t0) {
        return Err(Error::Window("rate window needs t1 > t0".into()));
    }
    if prob.is_static() {
        return Ok(T::zero());
    }
    let h = T::lit(RATE_DIFF_STEP);
    let last = T::lit((RATE_GRID_POINTS - 1) as f64);
    let mut best = T::zero();
    for k in 0..RATE_GRID_POINTS {
        let t = t0 + (t1 - t0) * T::lit(k as f64) / last;
        best = best.max(prob.optimum_rate(t, h, metric)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    Cor1Tracking,
    Cor2ApproxToPd,
    Lem4Observer,
    Thm1TrackingObserver,
    Cor3PerturbedToPd,
    Thm2Layer,
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundId::Cor1Tracking => "cor1_tracking",
            BoundId::Cor2ApproxToPd => "cor2_approx_to_pd",
            BoundId::Lem4Observer => "lem4_observer",
            BoundId::Thm1TrackingObserver => "thm1_tracking_observer",
            BoundId::Cor3PerturbedToPd => "cor3_perturbed_to_pd",
            BoundId::Thm2Layer => "thm2_layer",
        };
        f.write_str(s)
    }
}

/// Predicted bound versus observed post-transient supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_id: BoundId,
    pub constants: BTreeMap<String, f64>,
    /// `None` when the bound's standing condition fails.
    pub predicted: Option<f64>,
    pub observed_sup: f64,
    pub observed_sup_euclidean: Option<f64>,
    pub transient_cutoff: f64,
    pub satisfied: bool,
    /// Name of the failed inequality, if any.
    pub condition_violated: Option<String>,
    pub xi_scope: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl BoundReport {
    pub fn new(bound_id: BoundId, predicted: Option<f64>, observed_sup: f64, transient_cutoff: f64) -> Self {
        let satisfied = predicted.map_or(false, |p| observed_sup <= p * (1.0 + SATISFACTION_SLACK));
        Self {
            bound_id,
            constants: BTreeMap::new(),
            predicted,
            observed_sup,
            observed_sup_euclidean: None,
            transient_cutoff,
            satisfied,
            condition_violated: None,
            xi_scope: None,
            label: None,
        }
    }

    /// Report for a bound whose condition failed; never satisfied.
    pub fn inapplicable(bound_id: BoundId, err: &Error, observed_sup: f64, transient_cutoff: f64) -> Self {
        let mut r = Self::new(bound_id, None, observed_sup, transient_cutoff);
        r.condition_violated = Some(match err {
            Error::Condition(c) => c.clone(),
            other => other.to_string(),
        });
        r
    }

    pub fn with_constant(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.to_string(), value);
        self
    }

    pub fn with_constants<'a>(mut self, items: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        for (k, v) in items {
            self.constants.insert(k.to_string(), v);
        }
        self
    }

    pub fn with_xi_scope(mut self, scope: &str) -> Self {
        self.xi_scope = Some(scope.to_string());
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_header() -> &'static str {
        "bound_id,label,predicted,observed_sup,observed_sup_euclidean,transient_cutoff,satisfied,condition_violated,constants"
    }

    /// One CSV row; constants are packed as `name=value` pairs separated by `;`.
    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(crate::dynamics::fmt_g17).unwrap_or_default();
        let constants: Vec<String> =
            self.constants.iter().map(|(k, v)| format!("{k}={}", crate::dynamics::fmt_g17(*v))).collect();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.bound_id,
            self.label.as_deref().unwrap_or(""),
            opt(self.predicted),
            crate::dynamics::fmt_g17(self.observed_sup),
            opt(self.observed_sup_euclidean),
            crate::dynamics::fmt_g17(self.transient_cutoff),
            self.satisfied,
            self.condition_violated.as_deref().unwrap_or(""),
            constants.join(";")
        )
    }
}

/// What a trajectory is compared against in [`validate_bound`].
pub enum Reference<'a, T> {
    /// Instantaneous optimum `z*(t)` of a problem.
    Optimum(&'a SaddleProblem<T>),
    /// Another trajectory on the same grid.
    Trajectory(&'a Trajectory<T>),
    /// Observer estimate carried in an augmented trajectory: compares `ẑ` with `z`.
    ObserverEstimate(&'a ObserverConfig<T>),
    /// Closed-form reference `t ↦ z_ref(t)`.
    Function(&'a dyn Fn(T) -> Vec<T>),
}

/// Time series of `(t, ‖Θe(t)‖₂, ‖e(t)‖₂)` for the error `e` the reference dictates.
///
/// Only the first `theta.cols()` components of each state are used.
pub fn error_series<T: Scalar>(
    traj: &Trajectory<T>,
    reference: &Reference<'_, T>,
    theta: &DenseMatrix<T>,
) -> Result<Vec<(T, T, T)>> {
    let k = theta.cols();
    if traj.dim() < k {
        return Err(Error::Dimension(format!("trajectory has {} states, metric needs {k}", traj.dim())));
    }
    if let Reference::Trajectory(other) = reference {
        if !traj.shares_grid(other) || other.dim() < k {
            return Err(Error::Window("reference trajectory does not share the time grid".into()));
        }
    }
    let mut out = Vec::with_capacity(traj.len());
    for (idx, (&t, z)) in traj.times().iter().zip(traj.states()).enumerate() {
        let z = &z[..k];
        let err = match reference {
            Reference::Optimum(p) => sub_vec(z, &p.instantaneous_optimum(t)?.to_vec()),
            Reference::Trajectory(other) => sub_vec(z, &other.states()[idx][..k]),
            Reference::ObserverEstimate(obs) => {
                let full = &traj.states()[idx];
                if full.len() < k + obs.unobserved().len() {
                    return Err(Error::Dimension("trajectory does not carry observer estimates".into()));
                }
                let zhat = obs.splice(z, &full[k..k + obs.unobserved().len()]);
                sub_vec(&zhat, z)
            }
            Reference::Function(f) => {
                let r = f(t);
                if r.len() < k {
                    return Err(Error::Dimension("reference function returned too few components".into()));
                }
                sub_vec(z, &r[..k])
            }
        };
        out.push((t, norm2(&theta.matvec(&err)?), norm2(&err)));
    }
    Ok(out)
}

/// Post-transient supremum of the reference distance, compared with `predicted`.
pub fn validate_bound<T: Scalar>(
    bound_id: BoundId,
    traj: &Trajectory<T>,
    reference: &Reference<'_, T>,
    theta: &DenseMatrix<T>,
    predicted: T,
    transient_cutoff: T,
) -> Result<BoundReport> {
    let (sup, sup_e) = observed_sup(traj, reference, theta, transient_cutoff)?;
    let mut r = BoundReport::new(bound_id, Some(predicted.as_f64()), sup.as_f64(), transient_cutoff.as_f64());
    r.observed_sup_euclidean = Some(sup_e.as_f64());
    Ok(r)
}

/// `(sup ‖Θe‖, sup ‖e‖)` over grid points with `t ≥ cutoff`.
pub fn observed_sup<T: Scalar>(
    traj: &Trajectory<T>,
    reference: &Reference<'_, T>,
    theta: &DenseMatrix<T>,
    cutoff: T,
) -> Result<(T, T)> {
    let end = traj.final_time();
    let slack = T::tolerance(1e-12) * T::one().max(end.abs());
    if cutoff > end + slack {
        return Err(Error::Window(format!(
            "transient cutoff {} lies beyond the trajectory end {}",
            cutoff.as_f64(),
            end.as_f64()
        )));
    }
    let series = error_series(traj, reference, theta)?;
    let mut sup = (T::zero(), T::zero());
    for (t, w, e) in series {
        if t >= cutoff - slack {
            sup = (sup.0.max(w), sup.1.max(e));
        }
    }
    Ok(sup)
}

/// Reports of an observer-in-the-loop run.
#[derive(Debug, Clone)]
pub struct ObserverRun<T> {
    /// Augmented trajectory `(z, ẑ_u)`.
    pub perturbed: Trajectory<T>,
    /// Exact flow from the same initial state.
    pub exact: Trajectory<T>,
    pub lipschitz: LipschitzEstimates,
    pub sup_rate: T,
    pub reports: Vec<BoundReport>,
}

impl<T> ObserverRun<T> {
    pub fn report(&self, id: BoundId) -> Option<&BoundReport> {
        self.reports.iter().find(|r| r.bound_id == id)
    }

    pub fn all_satisfied(&self) -> bool {
        self.reports.iter().all(|r| r.satisfied)
    }
}

/// Inputs for [`run_observer_bounds`].
#[derive(Debug, Clone)]
pub struct ObserverRunSpec<T> {
    pub z0: Vec<T>,
    pub t0: T,
    pub t1: T,
    pub step: T,
    /// Defaults to `8/β`.
    pub cutoff: Option<T>,
    pub samples: usize,
    pub seed: u64,
    /// Box for sampled estimates; defaults to `[−10, 10]^dim`.
    pub domain: Option<StateBox<T>>,
}

/// Integrates the exact and observer-driven flows from `z0` and validates
/// every bound that applies to the pair.
///
/// The steady observer error is predicted from the observer-in-the-loop
/// tracking bound rather than an observed tracking error. The estimate-driven
/// distance uses the whole-run supremum of `‖ẑ − z‖_Θ`, which is valid from
/// `t0` since both flows start at the same state.
///
/// Fails with a condition error before simulating if the observer
/// conditions do not hold.
pub fn run_observer_bounds<T: Scalar>(
    prob: &SaddleProblem<T>,
    cert: &ContractionCertificate<T>,
    obs: &ObserverConfig<T>,
    spec: &ObserverRunSpec<T>,
) -> Result<ObserverRun<T>> {
    let dim = prob.dim();
    if spec.z0.len() != dim {
        return Err(Error::Dimension(format!("initial state has length {}, expected {dim}", spec.z0.len())));
    }
    let domain = match &spec.domain {
        Some(d) => d.clone(),
        None => StateBox::cube(dim, T::lit(10.0))?,
    };
    let lip = estimate_lipschitz(prob, cert, obs, &domain, spec.samples, spec.seed)?;
    let (beta, beta_hat) = (cert.beta, obs.beta_hat());
    let (xi, eta) = (T::lit(lip.xi), T::lit(lip.eta));
    let sup_rate = sup_optimum_rate(prob, spec.t0, spec.t1, Some(&cert.theta))?;
    let thm1 = bound_tracking_with_observer(beta, beta_hat, xi, eta, sup_rate)?;
    let cor3 = bound_perturbed_to_pd(beta, beta_hat, xi, eta, sup_rate)?;
    let lem4 = bound_observer_error(eta, beta_hat, xi, thm1)?;
    let cor1 = bound_tracking(beta, sup_rate)?;

    let cutoff = spec.cutoff.unwrap_or_else(|| default_cutoff(beta));
    let aug = observer_augmented_field(prob, obs)?;
    let perturbed = integrate(&aug, &augmented_initial_state(&spec.z0, obs), spec.t0, spec.t1, spec.step)?;
    let exact = integrate(&pd_vector_field(prob), &spec.z0, spec.t0, spec.t1, spec.step)?;
    let theta = &cert.theta;

    let whole_run_estimate = observed_sup(&perturbed, &Reference::ObserverEstimate(obs), theta, spec.t0)?.0;
    let cor2 = bound_approx_to_pd(beta, xi, whole_run_estimate)?;

    let constants = [
        ("alpha", cert.alpha.as_f64()),
        ("beta", beta.as_f64()),
        ("beta_hat", beta_hat.as_f64()),
        ("xi", lip.xi),
        ("eta", lip.eta),
        ("sup_rate", sup_rate.as_f64()),
    ];
    let finish = |r: BoundReport| r.with_constants(constants).with_xi_scope(&lip.xi_scope);
    let reports = vec![
        finish(validate_bound(BoundId::Cor1Tracking, &exact, &Reference::Optimum(prob), theta, cor1, cutoff)?),
        finish(
            validate_bound(BoundId::Cor2ApproxToPd, &perturbed, &Reference::Trajectory(&exact), theta, cor2, cutoff)?
                .with_constant("sup_estimate_error", whole_run_estimate.as_f64()),
        ),
        finish(
            validate_bound(BoundId::Lem4Observer, &perturbed, &Reference::ObserverEstimate(obs), theta, lem4, cutoff)?
                .with_constant("sup_tracking", thm1.as_f64()),
        ),
        finish(validate_bound(BoundId::Thm1TrackingObserver, &perturbed, &Reference::Optimum(prob), theta, thm1, cutoff)?),
        finish(validate_bound(BoundId::Cor3PerturbedToPd, &perturbed, &Reference::Trajectory(&exact), theta, cor3, cutoff)?),
    ];
    Ok(ObserverRun { perturbed, exact, lipschitz: lip, sup_rate, reports })
}

/// Field whose equilibrium trajectory is used by the tightness check,
/// `ż = −z + t`.
pub fn tightness_field<T: Scalar>() -> VectorField<T> {
    VectorField::new(1, "tightness", |z: &[T], t: T| vec![t - z[0]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::certify;
    use crate::matrixcore::DenseMatrix;
    use crate::problem::make_quadratic_problem;
    use crate::signal::{Signal, VectorSignal};
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    fn scalar(q: Signal<f64>) -> SaddleProblem<f64> {
        make_quadratic_problem(DenseMatrix::identity(1), vec![0.0], DenseMatrix::identity(1), VectorSignal::new(vec![q]))
            .unwrap()
    }

    #[test]
    fn tracking_examples() {
        assert!(close(bound_tracking(0.5, 0.2).unwrap(), 0.4));
        assert_eq!(bound_tracking(0.5, 0.0).unwrap(), 0.0);
        assert!(close(bound_tracking(1.0, 1.0).unwrap(), 1.0));
        assert!(bound_tracking(0.0, 1.0).unwrap_err().is_condition());
    }

    #[test]
    fn approx_to_pd_examples() {
        assert_eq!(bound_approx_to_pd(2.0, 0.0, 0.3).unwrap(), 0.0);
        assert!(close(bound_approx_to_pd(2.0, 1.0, 0.3).unwrap(), 0.15));
        assert!(bound_approx_to_pd(-1.0, 1.0, 0.3).unwrap_err().is_condition());
    }

    #[test]
    fn observer_error_examples() {
        assert!(close(bound_observer_error(2.0, 5.0, 1.0, 0.5).unwrap(), 0.25));
        assert!(bound_observer_error(2.0, 1e300, 1.0, 0.5).unwrap() < 1e-290);
        let err = bound_observer_error(2.0, 1.0, 1.0, 0.5).unwrap_err();
        assert_eq!(err, Error::Condition("beta_hat > xi".into()));
    }

    #[test]
    fn tracking_with_observer_examples() {
        assert!(close(bound_tracking_with_observer(1.0, 5.0, 1.0, 2.0, 0.5).unwrap(), 1.0));
        let limit = bound_tracking_with_observer::<f64>(0.5, 1e12, 1.0, 2.0, 0.2).unwrap();
        assert!((limit - 0.4).abs() < 1e-9);
        assert_eq!(bound_tracking_with_observer(0.5, f64::INFINITY, 1.0, 2.0, 0.2).unwrap(), 0.4);
        let err = bound_tracking_with_observer(1.0, 2.0, 1.0, 2.0, 0.5).unwrap_err();
        assert_eq!(err, Error::Condition("beta*(beta_hat - xi) > eta*xi".into()));
        assert_eq!(
            bound_tracking_with_observer(1.0, 1.0, 1.0, 2.0, 0.5).unwrap_err(),
            Error::Condition("beta_hat > xi".into())
        );
    }

    #[test]
    fn perturbed_to_pd_examples() {
        // (1/β)·ηξ/(β(β̂−ξ)−ηξ)·sup with β=1, β̂=5, ξ=1, η=2, sup=0.5: 2/2·0.5
        assert!(close(bound_perturbed_to_pd(1.0, 5.0, 1.0, 2.0, 0.5).unwrap(), 0.5));
        assert_eq!(bound_perturbed_to_pd(1.0, 5.0, 0.0, 2.0, 0.5).unwrap(), 0.0);
        assert_eq!(bound_perturbed_to_pd(1.0, 5.0, 1.0, 0.0, 0.5).unwrap(), 0.0);
        assert!(bound_perturbed_to_pd(1.0, 2.0, 1.0, 2.0, 0.5).unwrap_err().is_condition());
    }

    #[test]
    fn conditions_reject_on_the_boundary() {
        // β(β̂−ξ) = ηξ exactly: 1·(3−1) = 2·1
        assert!(bound_tracking_with_observer(1.0, 3.0, 1.0, 2.0, 0.5).unwrap_err().is_condition());
        assert!(bound_perturbed_to_pd(1.0, 3.0, 1.0, 2.0, 0.5).unwrap_err().is_condition());
        assert!(bound_observer_error(1.0, 2.0, 2.0, 0.5).unwrap_err().is_condition());
    }

    proptest! {
        #[test]
        fn bounds_monotone(
            beta in 0.1f64..5.0, dbeta in 0.0f64..2.0,
            xi in 0.0f64..2.0, eta in 0.0f64..3.0, extra in 0.1f64..10.0,
            sup in 0.0f64..5.0, dsup in 0.0f64..5.0,
        ) {
            // β̂ large enough that the conditions hold for β as well as β + dβ
            let beta_hat = xi + extra + eta * xi / beta;
            let fns: [fn(f64, f64, f64, f64, f64) -> Result<f64>; 4] = [
                |b, _, _, _, s| bound_tracking(b, s),
                |b, _, x, _, s| bound_approx_to_pd(b, x, s),
                bound_tracking_with_observer,
                bound_perturbed_to_pd,
            ];
            for f in fns {
                let base = f(beta, beta_hat, xi, eta, sup).unwrap();
                let more_sup = f(beta, beta_hat, xi, eta, sup + dsup).unwrap();
                let more_beta = f(beta + dbeta, beta_hat, xi, eta, sup).unwrap();
                prop_assert!(more_sup >= base * (1.0 - 1e-12));
                prop_assert!(more_beta <= base * (1.0 + 1e-12) + 1e-300);
            }
            let l = bound_observer_error(eta, beta_hat, xi, sup).unwrap();
            prop_assert!(bound_observer_error(eta, beta_hat, xi, sup + dsup).unwrap() >= l);
        }
    }

    #[test]
    fn analytic_lipschitz_scalar_identity_metric() {
        let p = scalar(Signal::constant(1.0));
        let obs = ObserverConfig::lag_for(2, vec![1], 0.05).unwrap();
        let dom = StateBox::cube(2, 1.0).unwrap();
        let id = DenseMatrix::identity(2);
        let est = estimate_lipschitz_in(&p, &id, &obs, &dom, 1, 0).unwrap();
        // A = [[−1, −1], [1, 0]]: AᵀA = [[2, 1], [1, 1]], λ_max = (3 + √5)/2
        let oracle = ((3.0 + 5f64.sqrt()) / 2.0).sqrt();
        assert!((est.eta - oracle).abs() < 1e-12);
        assert!((est.xi - 1.0).abs() < 1e-12);
        assert_eq!(est.method, LipschitzMethod::AnalyticLinear);

        let all_observed = ObserverConfig::lag_for(2, vec![], 0.05).unwrap();
        assert_eq!(estimate_lipschitz_in(&p, &id, &all_observed, &dom, 1, 0).unwrap().xi, 0.0);
    }

    #[test]
    fn sampled_matches_analytic() {
        let p = scalar(Signal::constant(1.0));
        let cert = certify(&p, Some(0.4)).unwrap();
        let obs = ObserverConfig::lag_for(2, vec![1], 0.05).unwrap();
        let dom = StateBox::cube(2, 1.0).unwrap();
        let analytic = estimate_lipschitz(&p, &cert, &obs, &dom, 1, 0).unwrap();
        let sampled = sampled_lipschitz(&p, &cert.theta, &obs, &dom, 4000, 7).unwrap();
        assert!((sampled.eta - analytic.eta).abs() <= 0.1 * analytic.eta, "{sampled:?} vs {analytic:?}");
        assert!((sampled.xi - analytic.xi).abs() <= 0.1 * analytic.xi + 1e-12);
        assert!(sampled.eta_argmax.is_some());
        assert_eq!(sampled.samples, Some(4000));
        let again = sampled_lipschitz(&p, &cert.theta, &obs, &dom, 4000, 7).unwrap();
        assert_eq!(sampled, again);
    }

    #[test]
    fn lipschitz_rejects_bad_domain() {
        let p = scalar(Signal::constant(1.0));
        let obs = ObserverConfig::lag_for(2, vec![1], 0.05).unwrap();
        let id = DenseMatrix::identity(2);
        let flat = StateBox { lower: vec![0.0, 0.0], upper: vec![0.0, 1.0] };
        assert!(matches!(estimate_lipschitz_in(&p, &id, &obs, &flat, 1, 0), Err(Error::Domain(_))));
        let dom = StateBox::cube(2, 1.0).unwrap();
        assert!(matches!(estimate_lipschitz_in(&p, &id, &obs, &dom, 0, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn tightness_validation() {
        let traj = integrate::<f64>(&tightness_field(), &[0.0], 0.0, 10.0, 1e-3).unwrap();
        let opt = |t: f64| vec![t];
        let id = DenseMatrix::identity(1);
        let r = validate_bound(BoundId::Cor1Tracking, &traj, &Reference::Function(&opt), &id, 1.0, 10.0).unwrap();
        assert!((r.observed_sup - (1.0 - (-10f64).exp())).abs() < 1e-9);
        assert!(r.satisfied);
        let wrong = validate_bound(
            BoundId::Cor1Tracking,
            &traj,
            &Reference::Function(&opt),
            &id,
            r.observed_sup / 2.0,
            10.0,
        )
        .unwrap();
        assert!(!wrong.satisfied);
        assert!(matches!(
            validate_bound(BoundId::Cor1Tracking, &traj, &Reference::Function(&opt), &id, 1.0, 10.5),
            Err(Error::Window(_))
        ));
    }

    #[test]
    fn identical_trajectories_observe_zero() {
        let traj = integrate(&tightness_field(), &[0.0], 0.0, 2.0, 1e-2).unwrap();
        let id = DenseMatrix::identity(1);
        let r = validate_bound(BoundId::Cor2ApproxToPd, &traj, &Reference::Trajectory(&traj), &id, 0.0, 1.0).unwrap();
        assert_eq!(r.observed_sup, 0.0);
        assert!(r.satisfied);
    }

    #[test]
    fn sup_rate_of_sinusoidal_source() {
        // z*(t) = (q, −q) with q = 0.2 sin(0.5 t): Euclidean speed 0.1·√2·|cos(0.5 t)|
        let p = scalar(Signal::sinusoid(0.2, 0.5, 0.0));
        let s = sup_optimum_rate(&p, 0.0, 10.0, None).unwrap();
        assert!((s - 0.1 * 2f64.sqrt()).abs() < 1e-8);
        assert_eq!(sup_optimum_rate(&scalar(Signal::constant(1.0)), 0.0, 1.0, None).unwrap(), 0.0);
    }

    #[test]
    fn report_serialization() {
        let r = BoundReport::new(BoundId::Thm1TrackingObserver, Some(0.2), 0.1, 16.0).with_constant("beta", 0.5);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["bound_id"], "thm1_tracking_observer");
        assert_eq!(v["satisfied"], true);
        let row = r.to_csv_row();
        assert!(row.starts_with("thm1_tracking_observer,"));
        assert_eq!(row.split(',').count(), BoundReport::csv_header().split(',').count());
        let bad = BoundReport::inapplicable(BoundId::Lem4Observer, &Error::Condition("beta_hat > xi".into()), 0.1, 1.0);
        assert!(!bad.satisfied && bad.predicted.is_none());
        assert_eq!(bad.condition_violated.as_deref(), Some("beta_hat > xi"));
    }
}
