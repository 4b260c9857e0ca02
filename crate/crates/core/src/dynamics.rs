//! Primal-dual vector fields (true, perturbed, observer-augmented), the
//! displacement Jacobian, and a fixed-step RK4 integrator.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrixcore::DenseMatrix;
use crate::problem::SaddleProblem;
use crate::scalar::Scalar;

/// Default integration step (nondimensional time).
pub const DEFAULT_STEP: f64 = 1e-3;
/// States with any component above this magnitude abort integration.
pub const DIVERGENCE_LIMIT: f64 = 1e9;

pub type FieldFn<T> = Arc<dyn Fn(&[T], T) -> Vec<T> + Send + Sync>;

/// Deterministic right-hand side `ż = f(z, t)`.
#[derive(Clone)]
pub struct VectorField<T> {
    dim: usize,
    label: String,
    f: FieldFn<T>,
}

impl<T> fmt::Debug for VectorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField").field("dim", &self.dim).field("label", &self.label).finish()
    }
}

impl<T: Scalar> VectorField<T> {
    pub fn new(dim: usize, label: impl Into<String>, f: impl Fn(&[T], T) -> Vec<T> + Send + Sync + 'static) -> Self {
        Self { dim, label: label.into(), f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, z: &[T], t: T) -> Vec<T> {
        (self.f)(z, t)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// Time grid and states from one integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    times: Vec<T>,
    states: Vec<Vec<T>>,
    field_label: String,
    state_names: Vec<String>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(times: Vec<T>, states: Vec<Vec<T>>, field_label: impl Into<String>) -> Result<Self> {
        if times.len() < 2 || times.len() != states.len() {
            return Err(Error::Dimension(format!(
                "trajectory needs >= 2 matching times and states, got {} and {}",
                times.len(),
                states.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("trajectory times must be strictly increasing".into()));
        }
        let dim = states[0].len();
        if states.iter().any(|s| s.len() != dim) {
            return Err(Error::Dimension("trajectory states have different lengths".into()));
        }
        if states.iter().flatten().chain(&times).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trajectory entry".into()));
        }
        let state_names = (0..dim).map(|i| format!("z{i}")).collect();
        Ok(Self { times, states, field_label: field_label.into(), state_names })
    }

    pub fn with_state_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim() {
            return Err(Error::Dimension(format!("{} names for {} states", names.len(), self.dim())));
        }
        self.state_names = names;
        Ok(self)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<T>] {
        &self.states
    }

    pub fn field_label(&self) -> &str {
        &self.field_label
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn final_state(&self) -> &[T] {
        self.states.last().expect("at least two states")
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("at least two times")
    }

    /// Same grid within a relative tolerance of `1e-12`.
    pub fn shares_grid(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self.times.iter().zip(&other.times).all(|(&a, &b)| {
                (a - b).abs() <= T::tolerance(1e-12) * (T::one() + a.abs())
            })
    }

    /// Keeps only the listed state components.
    pub fn project(&self, idx: &[usize]) -> Result<Self> {
        if idx.iter().any(|&i| i >= self.dim()) {
            return Err(Error::Dimension("projection index out of range".into()));
        }
        Ok(Self {
            times: self.times.clone(),
            states: self.states.iter().map(|s| idx.iter().map(|&i| s[i]).collect()).collect(),
            field_label: self.field_label.clone(),
            state_names: idx.iter().map(|&i| self.state_names[i].clone()).collect(),
        })
    }

    /// CSV with header `t,<state names>` and 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for name in &self.state_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{}", fmt_g17(t.as_f64()));
            for v in s {
                let _ = write!(out, ",{}", fmt_g17(v.as_f64()));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, field_label: impl Into<String>) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Csv("empty input".into()))?;
        let mut cols = header.split(',');
        if cols.next().map(str::trim) != Some("t") {
            return Err(Error::Csv("first header column must be `t`".into()));
        }
        let names: Vec<String> = cols.map(|c| c.trim().to_string()).collect();
        let mut times = Vec::new();
        let mut states = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| Error::Csv(format!("row {}: {e}", lineno + 1)))?;
            if vals.len() != names.len() + 1 {
                return Err(Error::Csv(format!("row {} has {} columns", lineno + 1, vals.len())));
            }
            times.push(T::lit(vals[0]));
            states.push(vals[1..].iter().map(|&v| T::lit(v)).collect());
        }
        Self::new(times, states, field_label)?.with_state_names(names)
    }
}

/// Formats with 17 significant digits (round-trips any `f64`).
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Classical fixed-step RK4 from `t0` to `t1`; the last step is shortened to
/// land exactly on `t1`. Every step is recorded.
pub fn integrate<T: Scalar>(field: &VectorField<T>, z0: &[T], t0: T, t1: T, step: T) -> Result<Trajectory<T>> {
    if !(t1 > t0) {
        return Err(Error::Domain("integration needs t1 > t0".into()));
    }
    if !(step > T::zero()) || step > t1 - t0 {
        return Err(Error::Domain("integration step must lie in (0, t1 - t0]".into()));
    }
    if z0.len() != field.dim() {
        return Err(Error::Dimension(format!(
            "initial state has length {}, field `{}` has dimension {}",
            z0.len(),
            field.label(),
            field.dim()
        )));
    }
    let grid = time_grid(t0, t1, step);
    let limit = T::lit(DIVERGENCE_LIMIT);
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let mut states = Vec::with_capacity(grid.len());
    let mut z = z0.to_vec();
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state".into()));
    }
    states.push(z.clone());
    let mut tmp = vec![T::zero(); z.len()];
    for w in grid.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let k1 = field.eval(&z, t);
        for i in 0..z.len() {
            tmp[i] = z[i] + half * h * k1[i];
        }
        let k2 = field.eval(&tmp, t + half * h);
        for i in 0..z.len() {
            tmp[i] = z[i] + half * h * k2[i];
        }
        let k3 = field.eval(&tmp, t + half * h);
        for i in 0..z.len() {
            tmp[i] = z[i] + h * k3[i];
        }
        let k4 = field.eval(&tmp, t + h);
        for i in 0..z.len() {
            z[i] = z[i] + h * sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
        }
        if z.iter().any(|v| !v.is_finite() || v.abs() > limit) {
            return Err(Error::Divergence { last_finite_time: t.as_f64() });
        }
        states.push(z.clone());
    }
    Trajectory::new(grid, states, field.label())
}

fn time_grid<T: Scalar>(t0: T, t1: T, step: T) -> Vec<T> {
    let ratio = ((t1 - t0) / step).as_f64();
    let nearest = ratio.round();
    let full = if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest as usize
    } else {
        ratio.floor() as usize + 1
    };
    let mut grid: Vec<T> = (0..full).map(|k| t0 + step * T::lit(k as f64)).collect();
    grid.push(t1);
    grid
}

/// `ẋ = −∇g(x) − Eᵀν + s(t)`, `ν̇ = Ex − q(t)`.
pub fn pd_vector_field<T: Scalar>(prob: &SaddleProblem<T>) -> VectorField<T> {
    let p = prob.clone();
    let (n, m) = (prob.n(), prob.m());
    VectorField::new(prob.dim(), "pd", move |z: &[T], t: T| {
        let (x, nu) = z.split_at(n);
        let e = p.e();
        let mut out = p.gradient(x);
        for v in out.iter_mut() {
            *v = -*v;
        }
        for (j, &nj) in nu.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(e.row(j)) {
                *o = *o - a * nj;
            }
        }
        if let Some(s) = p.primal_forcing() {
            for (o, sig) in out.iter_mut().zip(&s.0) {
                *o = *o + sig.eval(t);
            }
        }
        let q = &p.source().0;
        out.extend((0..m).map(|j| {
            e.row(j).iter().zip(x).fold(T::zero(), |acc, (&a, &xi)| acc + a * xi) - q[j].eval(t)
        }));
        out
    })
}

/// `[[−H(x), −Eᵀ], [E, 0]]`, the Jacobian of [`pd_vector_field`].
pub fn displacement_jacobian<T: Scalar>(prob: &SaddleProblem<T>, x: &[T], _t: T) -> Result<DenseMatrix<T>> {
    if x.len() != prob.n() {
        return Err(Error::Dimension(format!("x has length {}, expected {}", x.len(), prob.n())));
    }
    let h = prob.hessian(x).scale(-T::one());
    let e = prob.e();
    DenseMatrix::from_blocks(&h, &e.transpose().scale(-T::one()), e, &DenseMatrix::zeros(prob.m(), prob.m()))
}

/// `ż = f(z, t) + d(z, t)`.
pub fn perturbed_field<T: Scalar>(
    base: &VectorField<T>,
    disturbance: impl Fn(&[T], T) -> Vec<T> + Send + Sync + 'static,
) -> VectorField<T> {
    let b = base.clone();
    VectorField::new(base.dim(), format!("{}+perturbed", base.label()), move |z: &[T], t: T| {
        let d = disturbance(z, t);
        b.eval(z, t).into_iter().zip(d).map(|(a, c)| a + c).collect()
    })
}

pub type ObserverFn<T> = Arc<dyn Fn(&[T], &[T], T) -> Vec<T> + Send + Sync>;

/// Observer for the unobserved coordinates `z_u`, with dynamics
/// `ẑ̇_u = observer_field(ẑ_u, z_u, t)` and declared partial contraction rate `β̂`.
#[derive(Clone)]
pub struct ObserverConfig<T> {
    observed: Vec<usize>,
    unobserved: Vec<usize>,
    observer_field: ObserverFn<T>,
    beta_hat: T,
    label: String,
}

impl<T> fmt::Debug for ObserverConfig<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObserverConfig")
            .field("observed", &self.observed)
            .field("unobserved", &self.unobserved)
            .field("label", &self.label)
            .finish()
    }
}

impl<T: Scalar> ObserverConfig<T> {
    pub fn new(
        observed: Vec<usize>,
        unobserved: Vec<usize>,
        beta_hat: T,
        label: impl Into<String>,
        observer_field: impl Fn(&[T], &[T], T) -> Vec<T> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(beta_hat > T::zero()) {
            return Err(Error::Configuration("observer rate beta_hat must be positive".into()));
        }
        Ok(Self { observed, unobserved, observer_field: Arc::new(observer_field), beta_hat, label: label.into() })
    }

    /// First-order lag `ẑ̇_u = (z_u − ẑ_u)/T`, with `β̂ = 1/T`.
    pub fn first_order_lag(observed: Vec<usize>, unobserved: Vec<usize>, time_constant: T) -> Result<Self> {
        if !(time_constant > T::zero()) {
            return Err(Error::Configuration("lag time constant must be positive".into()));
        }
        let inv = T::one() / time_constant;
        Self::new(observed, unobserved, inv, "lag", move |zh: &[T], zu: &[T], _t: T| {
            zh.iter().zip(zu).map(|(&h, &u)| (u - h) * inv).collect()
        })
    }

    /// Lag observer over `dim` states with every index outside `unobserved` observed.
    pub fn lag_for(dim: usize, unobserved: Vec<usize>, time_constant: T) -> Result<Self> {
        let observed = (0..dim).filter(|i| !unobserved.contains(i)).collect();
        Self::first_order_lag(observed, unobserved, time_constant)
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn unobserved(&self) -> &[usize] {
        &self.unobserved
    }

    pub fn beta_hat(&self) -> T {
        self.beta_hat
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn observer_rhs(&self, z_hat_u: &[T], z_u: &[T], t: T) -> Vec<T> {
        (self.observer_field)(z_hat_u, z_u, t)
    }

    /// Checks that observed and unobserved indices partition `0..dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let mut seen = vec![false; dim];
        for &i in self.observed.iter().chain(&self.unobserved) {
            if i >= dim || seen[i] {
                return Err(Error::Configuration(format!(
                    "observer index sets do not partition 0..{dim} (index {i})"
                )));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Configuration(format!("observer index sets do not cover 0..{dim}")));
        }
        Ok(())
    }

    /// `ẑ`: `z` with the unobserved slots replaced by the estimates.
    pub fn splice(&self, z: &[T], z_hat_u: &[T]) -> Vec<T> {
        let mut zh = z.to_vec();
        for (&i, &v) in self.unobserved.iter().zip(z_hat_u) {
            zh[i] = v;
        }
        zh
    }

    pub fn unobserved_part(&self, z: &[T]) -> Vec<T> {
        self.unobserved.iter().map(|&i| z[i]).collect()
    }
}

/// Augmented field over `(z, ẑ_u)`: `ż = f(ẑ, t)` and `ẑ̇_u` from the observer.
pub fn augment_with_observer<T: Scalar>(base: &VectorField<T>, obs: &ObserverConfig<T>) -> Result<VectorField<T>> {
    let dim = base.dim();
    obs.validate(dim)?;
    let b = base.clone();
    let o = obs.clone();
    let label = format!("{}+{}", base.label(), obs.label());
    Ok(VectorField::new(dim + obs.unobserved.len(), label, move |w: &[T], t: T| {
        let (z, zh_u) = w.split_at(dim);
        let zhat = o.splice(z, zh_u);
        let mut out = b.eval(&zhat, t);
        out.extend(o.observer_rhs(zh_u, &o.unobserved_part(z), t));
        out
    }))
}

pub fn observer_augmented_field<T: Scalar>(prob: &SaddleProblem<T>, obs: &ObserverConfig<T>) -> Result<VectorField<T>> {
    augment_with_observer(&pd_vector_field(prob), obs)
}

/// Initial augmented state with estimates equal to the true unobserved values.
pub fn augmented_initial_state<T: Scalar>(z0: &[T], obs: &ObserverConfig<T>) -> Vec<T> {
    let mut w = z0.to_vec();
    w.extend(obs.unobserved_part(z0));
    w
}

/// State names `x0.., nu0..` for a primal-dual problem.
pub fn pd_state_names(n: usize, m: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).chain((0..m).map(|j| format!("nu{j}"))).collect()
}
