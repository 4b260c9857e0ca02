//! Stacks of contracting layers on separated time scales.
//!
//! Layer `k = 1` is the slowest. Each layer evolves as
//! `ż_k = f_k(z_{k−1}, z_k, z_{k+1}, t)`, where `z_0` is an exogenous input and
//! the deepest layer sees no `z_{k+1}`. Layer `k` is designed against the
//! equilibrium `z*_{k+1}(z_k, t)` of the faster layer; the mismatch
//! `d_k = f_k(·, z*_{k+1}) − f_k(·, z_{k+1})` is the disturbance it feels.
//!
//! Constants follow the bounding chain: `η_k` is the Lipschitz constant of
//! `f_k` in `z_{k+1}`, `ξ_k` the one in `z_k`, and `ρ_k` that of `z*_k` in
//! `z_{k−1}`. They are declared by the user; [`audit_stack`] checks the
//! declared `η_k` and `ρ_k` on samples.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, Trajectory, VectorField};
use crate::error::{Error, Result};
use crate::matrixcore::{norm2, sub_vec, DenseMatrix};
use crate::robustness::{default_cutoff, BoundId, BoundReport};
use crate::scalar::Scalar;
use crate::signal::{Signal, VectorSignal};

/// Residual allowed when auditing equilibrium maps.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

pub type LayerFieldFn<T> = Arc<dyn Fn(&[T], &[T], &[T], T) -> Vec<T> + Send + Sync>;
pub type EquilibriumFn<T> = Arc<dyn Fn(&[T], T) -> Result<Vec<T>> + Send + Sync>;

#[derive(Clone)]
pub struct LayerSpec<T> {
    pub dim: usize,
    /// `f_k(z_{k−1}, z_k, z_{k+1}, t)`.
    pub field: LayerFieldFn<T>,
    /// `z*_k(z_{k−1}, t)`.
    pub equilibrium: EquilibriumFn<T>,
    pub beta: T,
    pub eta: T,
    pub xi: T,
    pub rho: T,
    /// Metric for this layer's errors; identity when `None`.
    pub metric: Option<DenseMatrix<T>>,
    /// Overrides `τ = 1/β` for the deepest layer (e.g. when it runs with an observer).
    pub base_tau: Option<T>,
}

impl<T> fmt::Debug for LayerSpec<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LayerSpec")
            .field("dim", &self.dim)
            .field("beta", &self.beta)
            .field("eta", &self.eta)
            .field("xi", &self.xi)
            .field("rho", &self.rho)
            .finish()
    }
}

impl<T: Scalar> LayerSpec<T> {
    pub fn new(
        dim: usize,
        constants: LayerConstants<T>,
        field: impl Fn(&[T], &[T], &[T], T) -> Vec<T> + Send + Sync + 'static,
        equilibrium: impl Fn(&[T], T) -> Result<Vec<T>> + Send + Sync + 'static,
    ) -> Result<Self> {
        let c = constants;
        if !(c.beta > T::zero()) {
            return Err(Error::Configuration("layer beta must be positive".into()));
        }
        if !(c.eta >= T::zero() && c.xi >= T::zero() && c.rho >= T::zero()) {
            return Err(Error::Configuration("layer eta, xi, rho must be nonnegative".into()));
        }
        if dim == 0 {
            return Err(Error::Dimension("layer dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            field: Arc::new(field),
            equilibrium: Arc::new(equilibrium),
            beta: c.beta,
            eta: c.eta,
            xi: c.xi,
            rho: c.rho,
            metric: None,
            base_tau: None,
        })
    }

    pub fn with_metric(mut self, metric: DenseMatrix<T>) -> Result<Self> {
        if metric.shape() != (self.dim, self.dim) {
            return Err(Error::Dimension(format!("layer metric is {:?}, expected {}x{}", metric.shape(), self.dim, self.dim)));
        }
        self.metric = Some(metric);
        Ok(self)
    }

    pub fn with_base_tau(mut self, tau: T) -> Self {
        self.base_tau = Some(tau);
        self
    }

    fn norm(&self, v: &[T]) -> Result<T> {
        match &self.metric {
            Some(m) => Ok(norm2(&m.matvec(v)?)),
            None => Ok(norm2(v)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LayerConstants<T> {
    pub beta: T,
    pub eta: T,
    pub xi: T,
    pub rho: T,
}

/// Exogenous input `z_0(t)` and layers ordered slowest first.
#[derive(Debug, Clone)]
pub struct LayerStack<T> {
    pub input: VectorSignal<T>,
    pub layers: Vec<LayerSpec<T>>,
}

impl<T: Scalar> LayerStack<T> {
    pub fn new(input: VectorSignal<T>, layers: Vec<LayerSpec<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Configuration("a stack needs at least one layer".into()));
        }
        input.validate()?;
        Ok(Self { input, layers })
    }

    pub fn total_dim(&self) -> usize {
        self.layers.iter().map(|l| l.dim).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for l in &self.layers {
            off.push(off.last().copied().unwrap_or(0) + l.dim);
        }
        off
    }
}

/// `(γ_k, τ_k)` per layer, slowest first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub gamma: f64,
    pub tau: f64,
}

/// Evaluates `τ_k = γ_k/(γ_kβ_k − ξ_k)` with `γ_k = 1 − η_kτ_{k+1}ρ_{k+1}`
/// from the fastest layer up. The deepest layer has `γ = 1` and `τ = 1/β`
/// unless it declares its own base value.
pub fn tau_chain<T: Scalar>(layers: &[LayerSpec<T>]) -> Result<Vec<(T, T)>> {
    let n = layers.len();
    if n == 0 {
        return Err(Error::Configuration("tau chain of an empty stack".into()));
    }
    let mut out = vec![(T::one(), T::zero()); n];
    let deepest = &layers[n - 1];
    if !(deepest.beta > T::zero()) {
        return Err(Error::Condition(format!("beta_{n} > 0")));
    }
    out[n - 1] = (T::one(), deepest.base_tau.unwrap_or(T::one() / deepest.beta));
    for i in (0..n - 1).rev() {
        let k = i + 1;
        let l = &layers[i];
        let gamma = T::one() - l.eta * out[i + 1].1 * layers[i + 1].rho;
        if !(gamma > T::zero()) {
            return Err(Error::Condition(format!("gamma_{k} > 0 (layer {k})")));
        }
        let denom = gamma * l.beta - l.xi;
        if !(denom > T::zero()) {
            return Err(Error::Condition(format!("gamma_{k}*beta_{k} > xi_{k} (layer {k})")));
        }
        out[i] = (gamma, gamma / denom);
    }
    Ok(out)
}

/// `d_k = f_k(z_{k−1}, z_k, z*_{k+1}(z_k, t), t) − f_k(z_{k−1}, z_k, z_{k+1}, t)`;
/// zero for the deepest layer (`next = None`).
pub fn dk_disturbance<T: Scalar>(
    layer: &LayerSpec<T>,
    next: Option<&LayerSpec<T>>,
    z_prev: &[T],
    z_k: &[T],
    z_next: &[T],
    t: T,
) -> Result<Vec<T>> {
    if z_k.len() != layer.dim {
        return Err(Error::Dimension(format!("layer state has length {}, expected {}", z_k.len(), layer.dim)));
    }
    let Some(next) = next else {
        return Ok(vec![T::zero(); layer.dim]);
    };
    if z_next.len() != next.dim {
        return Err(Error::Dimension(format!("next-layer state has length {}, expected {}", z_next.len(), next.dim)));
    }
    let star = (next.equilibrium)(z_k, t)?;
    let designed = (layer.field)(z_prev, z_k, &star, t);
    let actual = (layer.field)(z_prev, z_k, z_next, t);
    Ok(sub_vec(&designed, &actual))
}

/// Coupled field over the stacked state `(z_1, …, z_N)`.
pub fn stack_field<T: Scalar>(stack: &LayerStack<T>) -> VectorField<T> {
    let s = stack.clone();
    let off = stack.offsets();
    VectorField::new(stack.total_dim(), "stack", move |z: &[T], t: T| {
        let u = s.input.eval(t);
        let n = s.layers.len();
        let mut out = Vec::with_capacity(z.len());
        for (i, l) in s.layers.iter().enumerate() {
            let prev: &[T] = if i == 0 { &u } else { &z[off[i - 1]..off[i]] };
            let next: &[T] = if i + 1 < n { &z[off[i + 1]..off[i + 2]] } else { &[] };
            out.extend((l.field)(prev, &z[off[i]..off[i + 1]], next, t));
        }
        out
    })
}

/// Per-layer trajectories, bound reports and chain constants of a stack run.
#[derive(Debug, Clone)]
pub struct StackRun<T> {
    pub joint: Trajectory<T>,
    pub layers: Vec<Trajectory<T>>,
    pub chain: Vec<ChainEntry>,
    pub reports: Vec<BoundReport>,
    /// `(t, ‖z_k − z*_k‖)` per layer.
    pub errors: Vec<Vec<(T, T)>>,
}

impl<T> StackRun<T> {
    pub fn all_satisfied(&self) -> bool {
        self.reports.iter().all(|r| r.satisfied)
    }
}

/// JSON summary of a stack run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyReport {
    pub chain: Vec<ChainEntry>,
    pub reports: Vec<BoundReport>,
    pub all_satisfied: bool,
}

impl<T: Scalar> StackRun<T> {
    pub fn summary(&self) -> HierarchyReport {
        HierarchyReport { chain: self.chain.clone(), reports: self.reports.clone(), all_satisfied: self.all_satisfied() }
    }
}

/// Integrates the coupled stack and checks `‖z_k − z*_k‖ ≤ τ_k sup‖ż*_k‖`
/// after the transient cutoff `max_k 8/β_k`.
///
/// `z*_k` is evaluated along the run at the simulated `z_{k−1}` (the input for
/// `k = 1`), and `sup‖ż*_k‖` is taken over central differences on the grid.
/// Refuses to simulate when [`tau_chain`] fails.
pub fn simulate_stack<T: Scalar>(
    stack: &LayerStack<T>,
    initial: &[Vec<T>],
    t0: T,
    t1: T,
    step: T,
) -> Result<StackRun<T>> {
    let chain = tau_chain(&stack.layers)?;
    if initial.len() != stack.layers.len() {
        return Err(Error::Dimension(format!("{} initial states for {} layers", initial.len(), stack.layers.len())));
    }
    let mut z0 = Vec::with_capacity(stack.total_dim());
    for (l, zi) in stack.layers.iter().zip(initial) {
        if zi.len() != l.dim {
            return Err(Error::Dimension(format!("initial layer state has length {}, expected {}", zi.len(), l.dim)));
        }
        z0.extend_from_slice(zi);
    }
    let joint = integrate(&stack_field(stack), &z0, t0, t1, step)?;
    let off = stack.offsets();
    let cutoff = stack.layers.iter().map(|l| default_cutoff(l.beta)).fold(T::zero(), |a, b| a.max(b));
    let times = joint.times();

    let mut layers = Vec::with_capacity(stack.layers.len());
    let mut reports = Vec::with_capacity(stack.layers.len());
    let mut errors = Vec::with_capacity(stack.layers.len());
    for (i, l) in stack.layers.iter().enumerate() {
        let idx: Vec<usize> = (off[i]..off[i + 1]).collect();
        let traj = joint.project(&idx)?.with_state_names((0..l.dim).map(|j| format!("z{}_{j}", i + 1)).collect())?;
        let stars: Vec<Vec<T>> = times
            .iter()
            .zip(joint.states())
            .map(|(&t, z)| {
                let prev = if i == 0 { stack.input.eval(t) } else { z[off[i - 1]..off[i]].to_vec() };
                (l.equilibrium)(&prev, t)
            })
            .collect::<Result<_>>()?;
        let mut sup_rate = T::zero();
        for j in 1..times.len().saturating_sub(1) {
            let dt = times[j + 1] - times[j - 1];
            let v: Vec<T> = sub_vec(&stars[j + 1], &stars[j - 1]).into_iter().map(|d| d / dt).collect();
            sup_rate = sup_rate.max(l.norm(&v)?);
        }
        let mut series = Vec::with_capacity(times.len());
        let mut sup = T::zero();
        for ((&t, z), star) in times.iter().zip(traj.states()).zip(&stars) {
            let e = l.norm(&sub_vec(z, star))?;
            if t >= cutoff {
                sup = sup.max(e);
            }
            series.push((t, e));
        }
        let (gamma, tau) = chain[i];
        let predicted = tau * sup_rate;
        let report = BoundReport::new(BoundId::Thm2Layer, Some(predicted.as_f64()), sup.as_f64(), cutoff.as_f64())
            .with_constants([
                ("beta", l.beta.as_f64()),
                ("eta", l.eta.as_f64()),
                ("xi", l.xi.as_f64()),
                ("rho", l.rho.as_f64()),
                ("gamma", gamma.as_f64()),
                ("tau", tau.as_f64()),
                ("sup_rate", sup_rate.as_f64()),
            ])
            .with_label(format!("layer{}", i + 1));
        layers.push(traj);
        reports.push(report);
        errors.push(series);
    }
    let chain = chain.into_iter().map(|(g, t)| ChainEntry { gamma: g.as_f64(), tau: t.as_f64() }).collect();
    Ok(StackRun { joint, layers, chain, reports, errors })
}

/// Largest observed values from [`audit_stack`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerAudit {
    pub layer: usize,
    pub max_equilibrium_residual: f64,
    /// `max ‖d_k‖/‖z_{k+1} − z*_{k+1}‖` over samples.
    pub eta_observed: f64,
    /// `max ‖z*_k(a) − z*_k(b)‖/‖a − b‖` over samples.
    pub rho_observed: f64,
    pub consistent: bool,
}

/// Samples states in `[−radius, radius]` and checks the equilibrium maps and
/// the declared `η_k`, `ρ_k` of each layer.
pub fn audit_stack<T: Scalar>(stack: &LayerStack<T>, samples: usize, radius: T, seed: u64) -> Result<Vec<LayerAudit>> {
    if samples == 0 || !(radius > T::zero()) {
        return Err(Error::Domain("audit needs samples ≥ 1 and a positive radius".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |d: usize| -> Vec<T> { (0..d).map(|_| radius * T::lit(rng.gen_range(-1.0..1.0))).collect() };
    let n = stack.layers.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let l = &stack.layers[i];
        let prev_dim = if i == 0 { stack.input.dim() } else { stack.layers[i - 1].dim };
        let next = stack.layers.get(i + 1);
        let (mut resid, mut eta_obs, mut rho_obs) = (T::zero(), T::zero(), T::zero());
        for _ in 0..samples {
            let t = draw(1)[0].abs();
            let a = draw(prev_dim);
            let b = draw(prev_dim);
            let za = (l.equilibrium)(&a, t)?;
            let next_star = match next {
                Some(nx) => (nx.equilibrium)(&za, t)?,
                None => Vec::new(),
            };
            resid = resid.max(norm2(&(l.field)(&a, &za, &next_star, t)));
            let zb = (l.equilibrium)(&b, t)?;
            let dab = norm2(&sub_vec(&a, &b));
            if dab > T::min_positive_value() {
                rho_obs = rho_obs.max(l.norm(&sub_vec(&za, &zb))? / dab);
            }
            if let Some(nx) = next {
                let zk = draw(l.dim);
                let zn = draw(nx.dim);
                let star = (nx.equilibrium)(&zk, t)?;
                let gap = nx.norm(&sub_vec(&zn, &star))?;
                if gap > T::min_positive_value() {
                    let d = dk_disturbance(l, Some(nx), &a, &zk, &zn, t)?;
                    eta_obs = eta_obs.max(l.norm(&d)? / gap);
                }
            }
        }
        let slack = T::one() + T::tolerance(1e-9);
        let consistent = resid <= T::tolerance(EQUILIBRIUM_TOL)
            && eta_obs <= l.eta * slack + T::tolerance(1e-12)
            && rho_obs <= l.rho * slack + T::tolerance(1e-12);
        out.push(LayerAudit {
            layer: i + 1,
            max_equilibrium_residual: resid.as_f64(),
            eta_observed: eta_obs.as_f64(),
            rho_observed: rho_obs.as_f64(),
            consistent,
        });
    }
    Ok(out)
}

/// Scalar linear cascade: `f_k = −β_k(z_k − ρ_k z_{k−1}) − η_k(z_{k+1} − ρ_{k+1} z_k)`,
/// so that `z*_k = ρ_k z_{k−1}` and `ρ_1` scales the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CascadeParams<T> {
    pub beta: Vec<T>,
    pub eta: Vec<T>,
    pub xi: Vec<T>,
    pub rho: Vec<T>,
    pub input: Signal<T>,
}

impl CascadeParams<f64> {
    /// Two layers with `β = (1, 10)`, `η₁ = 0.2`, `ξ₁ = 0.1`, `ρ₂ = 0.5`
    /// and input `sin(0.5t)`.
    pub fn two_layer_default() -> Self {
        Self {
            beta: vec![1.0, 10.0],
            eta: vec![0.2, 0.0],
            xi: vec![0.1, 0.0],
            rho: vec![1.0, 0.5],
            input: Signal::sinusoid(1.0, 0.5, 0.0),
        }
    }
}

pub fn linear_cascade<T: Scalar>(p: &CascadeParams<T>) -> Result<LayerStack<T>> {
    let n = p.beta.len();
    if n == 0 || p.eta.len() != n || p.xi.len() != n || p.rho.len() != n {
        return Err(Error::Configuration("cascade needs equally many beta, eta, xi, rho entries".into()));
    }
    let mut layers = Vec::with_capacity(n);
    for k in 0..n {
        let (beta, eta, rho) = (p.beta[k], p.eta[k], p.rho[k]);
        let rho_next = if k + 1 < n { p.rho[k + 1] } else { T::zero() };
        let consts = LayerConstants { beta, eta, xi: p.xi[k], rho };
        let field = move |prev: &[T], z: &[T], next: &[T], _t: T| {
            let coupling = next.first().map_or(T::zero(), |&zn| eta * (zn - rho_next * z[0]));
            vec![-beta * (z[0] - rho * prev[0]) - coupling]
        };
        layers.push(LayerSpec::new(1, consts, field, move |prev: &[T], _t: T| Ok(vec![rho * prev[0]]))?);
    }
    LayerStack::new(VectorSignal::new(vec![p.input.clone()]), layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn layer(beta: f64, eta: f64, xi: f64, rho: f64) -> LayerSpec<f64> {
        LayerSpec::new(
            1,
            LayerConstants { beta, eta, xi, rho },
            |_: &[f64], z: &[f64], _: &[f64], _| vec![-z[0]],
            |_: &[f64], _| Ok(vec![0.0]),
        )
        .unwrap()
    }

    #[test]
    fn two_layer_chain() {
        let c = tau_chain(&[layer(1.0, 0.2, 0.1, 1.0), layer(10.0, 0.0, 0.0, 0.5)]).unwrap();
        assert!((c[1].1 - 0.1).abs() < 1e-15);
        assert!((c[0].0 - 0.99).abs() < 1e-15);
        assert!((c[0].1 - 0.99 / 0.89).abs() < 1e-14);
        assert!((c[0].1 - 1.11236).abs() < 1e-5);
    }

    #[test]
    fn single_layer_chain() {
        let c = tau_chain(&[layer(4.0, 0.0, 0.0, 0.0)]).unwrap();
        assert_eq!(c, vec![(1.0, 0.25)]);
    }

    #[test]
    fn chain_rejects_nonpositive_gamma() {
        // τ₂ρ₂ = 0.1·0.5 = 0.05 and η₁ = 200 give γ₁ = −9
        let err = tau_chain(&[layer(1.0, 200.0, 0.1, 1.0), layer(10.0, 0.0, 0.0, 0.5)]).unwrap_err();
        assert!(err.is_condition());
        assert!(err.to_string().contains("gamma_1 > 0"));
        let err = tau_chain(&[layer(1.0, 0.0, 1.0, 1.0), layer(10.0, 0.0, 0.0, 0.5)]).unwrap_err();
        assert!(err.to_string().contains("gamma_1*beta_1 > xi_1"));
    }

    proptest! {
        #[test]
        fn tau_monotone(
            b1 in 1.0f64..5.0, b2 in 5.0f64..20.0, db in 0.0f64..1.0,
            eta in 0.0f64..1.0, xi in 0.0f64..0.3, rho in 0.0f64..1.0, d in 0.0f64..0.2,
        ) {
            let tau1 = |b1: f64, eta: f64, xi: f64, rho: f64| {
                tau_chain(&[layer(b1, eta, xi, 1.0), layer(b2, 0.0, 0.0, rho)]).unwrap()[0].1
            };
            let base = tau1(b1, eta, xi, rho);
            prop_assert!(tau1(b1 + db, eta, xi, rho) <= base);
            prop_assert!(tau1(b1, eta + d, xi, rho) >= base);
            prop_assert!(tau1(b1, eta, xi + d, rho) >= base);
            prop_assert!(tau1(b1, eta, xi, rho + d) >= base);
            if db > 1e-9 {
                prop_assert!(tau1(b1 + db, eta, xi, rho) < base);
            }
        }

        #[test]
        fn zero_eta_decouples(b in proptest::collection::vec(1.0f64..10.0, 1..5), frac in 0.0f64..0.9) {
            let layers: Vec<_> = b.iter().map(|&bk| layer(bk, 0.0, frac * bk, 0.7)).collect();
            let c = tau_chain(&layers).unwrap();
            let last = b.len() - 1;
            for (k, &(g, t)) in c.iter().enumerate() {
                prop_assert_eq!(g, 1.0);
                let expect = if k == last { 1.0 / b[k] } else { 1.0 / (b[k] - frac * b[k]) };
                prop_assert!((t - expect).abs() <= 1e-12 * expect);
            }
        }
    }

    #[test]
    fn disturbance_examples() {
        let stack = linear_cascade(&CascadeParams::two_layer_default()).unwrap();
        let (l1, l2) = (&stack.layers[0], &stack.layers[1]);
        let d = dk_disturbance(l1, Some(l2), &[0.3], &[0.8], &[0.4], 0.0).unwrap();
        assert_eq!(d, vec![0.0]);
        // f₁ = … − η₁(z₂ − ρ₂z₁): d = η₁(z₂ − z₂*) with z₂* = 0.4
        let d = dk_disturbance(l1, Some(l2), &[0.3], &[0.8], &[1.4], 0.0).unwrap();
        assert!((d[0] - 0.2).abs() < 1e-15);
        assert_eq!(dk_disturbance(l2, None, &[0.8], &[0.1], &[], 0.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn audit_accepts_declared_constants() {
        let stack = linear_cascade(&CascadeParams::two_layer_default()).unwrap();
        let audit = audit_stack(&stack, 200, 2.0, 3).unwrap();
        assert!(audit.iter().all(|a| a.consistent), "{audit:?}");
        assert!((audit[0].eta_observed - 0.2).abs() < 1e-12);
        assert!((audit[1].rho_observed - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_stays_put() {
        let mut p = CascadeParams::two_layer_default();
        p.input = Signal::constant(0.6);
        let stack = linear_cascade(&p).unwrap();
        let run = simulate_stack(&stack, &[vec![0.6], vec![0.3]], 0.0, 10.0, 1e-3).unwrap();
        let last = run.joint.final_state();
        assert!((last[0] - 0.6).abs() <= 1e-8 && (last[1] - 0.3).abs() <= 1e-8);
        assert!(run.reports.iter().all(|r| r.observed_sup <= 1e-8));
    }

    #[test]
    fn refuses_infeasible_stack() {
        let mut p = CascadeParams::two_layer_default();
        p.eta[0] = 200.0;
        let stack = linear_cascade(&p).unwrap();
        assert!(simulate_stack(&stack, &[vec![0.0], vec![0.0]], 0.0, 1.0, 1e-2).unwrap_err().is_condition());
    }

    #[test]
    fn constant_input_errors_vanish() {
        let mut p = CascadeParams::two_layer_default();
        p.input = Signal::constant(1.0);
        let stack = linear_cascade(&p).unwrap();
        let run = simulate_stack(&stack, &[vec![0.0], vec![0.0]], 0.0, 40.0, 1e-3).unwrap();
        assert!(run.reports.iter().all(|r| r.observed_sup < 1e-3), "{:?}", run.reports);
    }
}
