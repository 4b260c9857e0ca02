//! Equality-constrained saddle problems `min g(x) s.t. Ex = q(t)` and their
//! instantaneous KKT points.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::{
    dot, min_singular_value, norm2, norm_inf, solve, sub_vec, sym_eig_extremes, DenseMatrix,
};
use crate::scalar::Scalar;
use crate::signal::VectorSignal;

/// Smallest singular value of `E` accepted as full row rank.
pub const RANK_TOL: f64 = 1e-10;
/// Newton termination threshold on the KKT residual (∞-norm).
pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 100;
const NEWTON_MIN_STEP: f64 = 1.0 / 1_048_576.0;
const HESSIAN_AUDIT_SAMPLES: usize = 16;

pub type ValueFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type GradientFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
pub type HessianFn<T> = Arc<dyn Fn(&[T]) -> DenseMatrix<T> + Send + Sync>;

/// User-supplied objective. Evaluators must be pure and re-entrant.
#[derive(Clone)]
pub struct CallableObjective<T> {
    pub value: ValueFn<T>,
    pub gradient: GradientFn<T>,
    pub hessian: HessianFn<T>,
}

impl<T> fmt::Debug for CallableObjective<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CallableObjective { .. }")
    }
}

#[derive(Debug, Clone)]
pub enum ObjectiveModel<T> {
    /// `g(x) = ½ xᵀPx + rᵀx`
    Quadratic { p: DenseMatrix<T>, r: Vec<T> },
    Callable(CallableObjective<T>),
}

/// Primal/dual state `z = (x, ν)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PDState<T> {
    pub x: Vec<T>,
    pub nu: Vec<T>,
}

impl<T: Scalar> PDState<T> {
    pub fn new(x: Vec<T>, nu: Vec<T>) -> Result<Self> {
        if x.iter().chain(&nu).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state entry".into()));
        }
        Ok(Self { x, nu })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self { x: vec![T::zero(); n], nu: vec![T::zero(); m] }
    }

    /// Splits a stacked vector `(x, ν)` with `n` primal entries.
    pub fn from_stacked(z: &[T], n: usize) -> Result<Self> {
        if z.len() < n {
            return Err(Error::Dimension(format!("state of length {} shorter than n = {n}", z.len())));
        }
        Self::new(z[..n].to_vec(), z[n..].to_vec())
    }

    pub fn to_vec(&self) -> Vec<T> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.nu);
        v
    }

    pub fn dim(&self) -> usize {
        self.x.len() + self.nu.len()
    }
}

/// Saddle problem with Lagrangian `g(x) − s(t)ᵀx + νᵀ(Ex − q(t))`.
///
/// `s(t)` is an optional primal forcing (zero unless set), used to model
/// exogenous injections acting directly on the primal equation.
#[derive(Debug, Clone)]
pub struct SaddleProblem<T> {
    n: usize,
    m: usize,
    objective: ObjectiveModel<T>,
    e: DenseMatrix<T>,
    q: VectorSignal<T>,
    forcing: Option<VectorSignal<T>>,
    hessian_bounds: (T, T),
}

/// Builds `g(x) = ½xᵀPx + rᵀx` subject to `Ex = q(t)`.
pub fn make_quadratic_problem<T: Scalar>(
    p: DenseMatrix<T>,
    r: Vec<T>,
    e: DenseMatrix<T>,
    q: VectorSignal<T>,
) -> Result<SaddleProblem<T>> {
    let n = p.rows();
    if !p.is_square() || n == 0 {
        return Err(Error::Dimension(format!("P must be square and nonempty, got {:?}", p.shape())));
    }
    if r.len() != n {
        return Err(Error::Dimension(format!("r has length {}, expected {n}", r.len())));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("r".into()));
    }
    let asym = p.sub(&p.transpose())?.max_abs();
    if asym > T::tolerance(1e-12) * (T::one() + p.max_abs()) {
        return Err(Error::Configuration(format!("P is not symmetric (asymmetry {:e})", asym.as_f64())));
    }
    let p = p.symmetrized();
    let (lmin, lmax) = sym_eig_extremes(&p)?;
    if lmin <= T::zero() {
        return Err(Error::Convexity { lambda_min: lmin.as_f64() });
    }
    check_constraints(n, &e, &q)?;
    Ok(SaddleProblem {
        n,
        m: e.rows(),
        objective: ObjectiveModel::Quadratic { p, r },
        e,
        q,
        forcing: None,
        hessian_bounds: (lmin, lmax),
    })
}

/// Builds a problem with a general strictly convex objective. The declared
/// Hessian bounds are audited on a fixed set of sample points in `[-1, 1]ⁿ`,
/// not proven.
pub fn make_callable_problem<T: Scalar>(
    n: usize,
    objective: CallableObjective<T>,
    e: DenseMatrix<T>,
    q: VectorSignal<T>,
    hessian_bounds: (T, T),
) -> Result<SaddleProblem<T>> {
    let (h_min, h_max) = hessian_bounds;
    if !(h_min > T::zero()) {
        return Err(Error::Convexity { lambda_min: h_min.as_f64() });
    }
    if !(h_min <= h_max) || !h_max.is_finite() {
        return Err(Error::Configuration("hessian bounds must satisfy 0 < h_min <= h_max".into()));
    }
    check_constraints(n, &e, &q)?;
    audit_hessian(n, &objective, hessian_bounds)?;
    Ok(SaddleProblem {
        n,
        m: e.rows(),
        objective: ObjectiveModel::Callable(objective),
        e,
        q,
        forcing: None,
        hessian_bounds,
    })
}

fn check_constraints<T: Scalar>(n: usize, e: &DenseMatrix<T>, q: &VectorSignal<T>) -> Result<()> {
    let m = e.rows();
    if m == 0 || e.cols() != n {
        return Err(Error::Dimension(format!("E is {}x{}, expected m x {n} with m >= 1", m, e.cols())));
    }
    if q.dim() != m {
        return Err(Error::Dimension(format!("q has {} components, expected {m}", q.dim())));
    }
    q.validate()?;
    if m > n {
        return Err(Error::Rank { singular_value: 0.0 });
    }
    let smin = min_singular_value(e)?;
    if smin <= T::tolerance(RANK_TOL) {
        return Err(Error::Rank { singular_value: smin.as_f64() });
    }
    Ok(())
}

fn audit_hessian<T: Scalar>(n: usize, obj: &CallableObjective<T>, (h_min, h_max): (T, T)) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let slack = T::tolerance(1e-9) * (T::one() + h_max);
    for k in 0..HESSIAN_AUDIT_SAMPLES {
        let x: Vec<T> = if k == 0 {
            vec![T::zero(); n]
        } else {
            (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect()
        };
        let h = (obj.hessian)(&x);
        if h.shape() != (n, n) {
            return Err(Error::Dimension(format!("hessian evaluator returned {:?}", h.shape())));
        }
        let asym = h.sub(&h.transpose())?.max_abs();
        if asym > T::tolerance(1e-12) * (T::one() + h.max_abs()) {
            return Err(Error::Configuration("hessian evaluator returned a non-symmetric matrix".into()));
        }
        let (lo, hi) = sym_eig_extremes(&h)?;
        if lo < h_min - slack || hi > h_max + slack {
            return Err(Error::Configuration(format!(
                "sampled Hessian spectrum [{:e}, {:e}] leaves declared bounds [{:e}, {:e}]",
                lo.as_f64(),
                hi.as_f64(),
                h_min.as_f64(),
                h_max.as_f64()
            )));
        }
        if (obj.gradient)(&x).len() != n {
            return Err(Error::Dimension("gradient evaluator output length".into()));
        }
    }
    Ok(())
}

impl<T: Scalar> SaddleProblem<T> {
    /// Adds an exogenous forcing `s(t)` to the primal equation `ẋ = −∇g − Eᵀν + s(t)`.
    pub fn with_primal_forcing(mut self, forcing: VectorSignal<T>) -> Result<Self> {
        if forcing.dim() != self.n {
            return Err(Error::Dimension(format!(
                "forcing has {} components, expected {}",
                forcing.dim(),
                self.n
            )));
        }
        forcing.validate()?;
        self.forcing = Some(forcing);
        Ok(self)
    }

    /// Replaces the source term, keeping everything else.
    pub fn with_source(mut self, q: VectorSignal<T>) -> Result<Self> {
        if q.dim() != self.m {
            return Err(Error::Dimension(format!("q has {} components, expected {}", q.dim(), self.m)));
        }
        q.validate()?;
        self.q = q;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn e(&self) -> &DenseMatrix<T> {
        &self.e
    }

    pub fn objective(&self) -> &ObjectiveModel<T> {
        &self.objective
    }

    pub fn source(&self) -> &VectorSignal<T> {
        &self.q
    }

    pub fn primal_forcing(&self) -> Option<&VectorSignal<T>> {
        self.forcing.as_ref()
    }

    pub fn hessian_bounds(&self) -> (T, T) {
        self.hessian_bounds
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.objective, ObjectiveModel::Quadratic { .. })
    }

    /// True when neither `q` nor the forcing depends on time.
    pub fn is_static(&self) -> bool {
        self.q.is_constant() && self.forcing.as_ref().map_or(true, VectorSignal::is_constant)
    }

    pub fn q_at(&self, t: T) -> Vec<T> {
        self.q.eval(t)
    }

    pub fn forcing_at(&self, t: T) -> Vec<T> {
        match &self.forcing {
            Some(s) => s.eval(t),
            None => vec![T::zero(); self.n],
        }
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        match &self.objective {
            ObjectiveModel::Quadratic { p, r } => {
                let px = p.matvec(x).expect("checked dimensions");
                T::lit(0.5) * dot(x, &px) + dot(r, x)
            }
            ObjectiveModel::Callable(c) => (c.value)(x),
        }
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        match &self.objective {
            ObjectiveModel::Quadratic { p, r } => {
                let px = p.matvec(x).expect("checked dimensions");
                px.iter().zip(r).map(|(&a, &b)| a + b).collect()
            }
            ObjectiveModel::Callable(c) => (c.gradient)(x),
        }
    }

    pub fn hessian(&self, x: &[T]) -> DenseMatrix<T> {
        match &self.objective {
            ObjectiveModel::Quadratic { p, .. } => p.clone(),
            ObjectiveModel::Callable(c) => (c.hessian)(x),
        }
    }

    /// Hessian when it is state independent.
    pub fn constant_hessian(&self) -> Option<&DenseMatrix<T>> {
        match &self.objective {
            ObjectiveModel::Quadratic { p, .. } => Some(p),
            ObjectiveModel::Callable(_) => None,
        }
    }

    fn check_state(&self, z: &PDState<T>) -> Result<()> {
        if z.x.len() != self.n || z.nu.len() != self.m {
            return Err(Error::Dimension(format!(
                "state ({}, {}) does not match problem ({}, {})",
                z.x.len(),
                z.nu.len(),
                self.n,
                self.m
            )));
        }
        Ok(())
    }

    /// `ℓ(x, ν, t)`.
    pub fn lagrangian_value(&self, z: &PDState<T>, t: T) -> Result<T> {
        self.check_state(z)?;
        let h = sub_vec(&self.e.matvec(&z.x)?, &self.q_at(t));
        let forcing = dot(&self.forcing_at(t), &z.x);
        Ok(self.objective_value(&z.x) - forcing + dot(&z.nu, &h))
    }

    /// Stacked KKT residual `(∇g(x) − s(t) + Eᵀν, Ex − q(t))`.
    pub fn kkt_residual(&self, z: &PDState<T>, t: T) -> Result<Vec<T>> {
        self.check_state(z)?;
        let g = self.gradient(&z.x);
        let etnu = self.e.tr_matvec(&z.nu)?;
        let s = self.forcing_at(t);
        let mut res: Vec<T> = g.iter().zip(&etnu).zip(&s).map(|((&a, &b), &c)| a + b - c).collect();
        res.extend(sub_vec(&self.e.matvec(&z.x)?, &self.q_at(t)));
        Ok(res)
    }

    fn kkt_matrix(&self, h: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        DenseMatrix::from_blocks(h, &self.e.transpose(), &self.e, &DenseMatrix::zeros(self.m, self.m))
    }

    /// KKT point `z*(t)` of the problem frozen at time `t`.
    pub fn instantaneous_optimum(&self, t: T) -> Result<PDState<T>> {
        match &self.objective {
            ObjectiveModel::Quadratic { p, r } => {
                let k = self.kkt_matrix(p)?;
                let s = self.forcing_at(t);
                let mut rhs: Vec<T> = s.iter().zip(r).map(|(&a, &b)| a - b).collect();
                rhs.extend(self.q_at(t));
                let sol = solve(&k, &rhs)?;
                PDState::from_stacked(&sol, self.n)
            }
            ObjectiveModel::Callable(_) => self.newton_optimum(t),
        }
    }

    fn newton_optimum(&self, t: T) -> Result<PDState<T>> {
        let tol = T::tolerance(NEWTON_TOL);
        let floor = T::lit(NEWTON_MIN_STEP);
        let mut z = PDState::zeros(self.n, self.m);
        let mut res = self.kkt_residual(&z, t)?;
        let mut rnorm = norm_inf(&res);
        for _ in 0..NEWTON_MAX_ITER {
            if rnorm <= tol {
                return Ok(z);
            }
            let k = self.kkt_matrix(&self.hessian(&z.x))?;
            let neg: Vec<T> = res.iter().map(|&v| -v).collect();
            let step = solve(&k, &neg)?;
            let base = z.to_vec();
            let mut lambda = T::one();
            loop {
                let trial: Vec<T> = base.iter().zip(&step).map(|(&b, &s)| b + lambda * s).collect();
                let cand = PDState::from_stacked(&trial, self.n)?;
                let cres = self.kkt_residual(&cand, t)?;
                let cnorm = norm_inf(&cres);
                if cnorm < rnorm || lambda <= floor {
                    z = cand;
                    res = cres;
                    rnorm = cnorm;
                    break;
                }
                lambda = lambda * T::lit(0.5);
            }
        }
        if rnorm <= tol {
            Ok(z)
        } else {
            Err(Error::Optimizer { residual: rnorm.as_f64() })
        }
    }

    /// Central-difference speed `‖(z*(t+h) − z*(t−h)) / 2h‖`, measured as
    /// `‖Θ·‖₂` when `metric` is given and Euclidean otherwise.
    pub fn optimum_rate(&self, t: T, h: T, metric: Option<&DenseMatrix<T>>) -> Result<T> {
        if !(h > T::zero()) {
            return Err(Error::Domain("difference step must be positive".into()));
        }
        let ahead = self.instantaneous_optimum(t + h)?.to_vec();
        let behind = self.instantaneous_optimum(t - h)?.to_vec();
        let inv = T::one() / (T::lit(2.0) * h);
        let diff: Vec<T> = ahead.iter().zip(&behind).map(|(&a, &b)| (a - b) * inv).collect();
        match metric {
            Some(theta) => Ok(norm2(&theta.matvec(&diff)?)),
            None => Ok(norm2(&diff)),
        }
    }
}

/// Edge-node incidence matrix: row `e` for edge `(u, v)` has `+1` at `u`
/// and `−1` at `v`.
pub fn incidence_from_edges<T: Scalar>(edges: &[(usize, usize)], n_nodes: usize) -> Result<DenseMatrix<T>> {
    let mut e = DenseMatrix::zeros(edges.len(), n_nodes);
    for (row, &(u, v)) in edges.iter().enumerate() {
        if u == v {
            return Err(Error::Graph(format!("self-loop at node {u}")));
        }
        if u >= n_nodes || v >= n_nodes {
            return Err(Error::Graph(format!("edge ({u}, {v}) out of range for {n_nodes} nodes")));
        }
        e[(row, u)] = T::one();
        e[(row, v)] = -T::one();
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Signal;

    fn m(rows: Vec<Vec<f64>>) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    pub(crate) fn scalar_problem(q: Signal<f64>) -> SaddleProblem<f64> {
        make_quadratic_problem(m(vec![vec![1.0]]), vec![0.0], m(vec![vec![1.0]]), VectorSignal::new(vec![q]))
            .unwrap()
    }

    #[test]
    fn construction_examples() {
        let p = scalar_problem(Signal::constant(1.0));
        assert_eq!((p.n(), p.m(), p.hessian_bounds()), (1, 1, (1.0, 1.0)));
        let p2 = make_quadratic_problem(
            DenseMatrix::identity(2),
            vec![0.0, 0.0],
            m(vec![vec![1.0, -1.0]]),
            VectorSignal::constant(&[0.0]),
        )
        .unwrap();
        assert_eq!(p2.hessian_bounds(), (1.0, 1.0));
        let err = make_quadratic_problem(
            DenseMatrix::identity(2),
            vec![0.0, 0.0],
            m(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]),
            VectorSignal::constant(&[0.0, 0.0]),
        )
        .unwrap_err();
        match err {
            Error::Rank { singular_value } => assert!(singular_value < 1e-10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_indefinite_and_wide_duals() {
        let err = make_quadratic_problem(
            DenseMatrix::from_diagonal(&[1.0, -0.5]),
            vec![0.0, 0.0],
            m(vec![vec![1.0, 0.0]]),
            VectorSignal::constant(&[0.0]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Convexity { lambda_min } if (lambda_min + 0.5).abs() < 1e-12));
        let err = make_quadratic_problem(
            m(vec![vec![1.0]]),
            vec![0.0],
            m(vec![vec![1.0], vec![2.0]]),
            VectorSignal::constant(&[0.0, 0.0]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Rank { .. }));
    }

    #[test]
    fn incidence_examples() {
        let e: DenseMatrix<f64> = incidence_from_edges(&[(0, 1)], 2).unwrap();
        assert_eq!(e.to_rows(), vec![vec![1.0, -1.0]]);
        let e: DenseMatrix<f64> = incidence_from_edges(&[(0, 1), (1, 2)], 3).unwrap();
        assert_eq!(e.to_rows(), vec![vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]]);
        assert!(matches!(incidence_from_edges::<f64>(&[(0, 0)], 1), Err(Error::Graph(_))));
        assert!(matches!(incidence_from_edges::<f64>(&[(0, 3)], 2), Err(Error::Graph(_))));
    }

    #[test]
    fn lagrangian_examples() {
        let p = scalar_problem(Signal::constant(1.0));
        let z = PDState::new(vec![1.0], vec![-1.0]).unwrap();
        assert!((p.lagrangian_value(&z, 0.0).unwrap() - 0.5).abs() < 1e-15);
        let z = PDState::new(vec![0.0], vec![2.0]).unwrap();
        assert!((p.lagrangian_value(&z, 0.0).unwrap() + 2.0).abs() < 1e-15);
        let p0 = scalar_problem(Signal::constant(0.0));
        assert_eq!(p0.lagrangian_value(&PDState::zeros(1, 1), 3.0).unwrap(), p0.objective_value(&[0.0]));
        assert!(p.lagrangian_value(&PDState::zeros(2, 1), 0.0).is_err());
    }

    #[test]
    fn optimum_examples() {
        let z = scalar_problem(Signal::constant(1.0)).instantaneous_optimum(0.0).unwrap();
        assert!((z.x[0] - 1.0).abs() < 1e-14 && (z.nu[0] + 1.0).abs() < 1e-14);
        let z = scalar_problem(Signal::constant(0.0)).instantaneous_optimum(0.0).unwrap();
        assert_eq!(z.to_vec(), vec![0.0, 0.0]);
        let p = make_quadratic_problem(
            DenseMatrix::identity(2),
            vec![1.0, 1.0],
            m(vec![vec![1.0, -1.0]]),
            VectorSignal::constant(&[0.0]),
        )
        .unwrap();
        let z = p.instantaneous_optimum(0.0).unwrap();
        assert!((z.x[0] + 1.0).abs() < 1e-14 && (z.x[1] + 1.0).abs() < 1e-14);
        assert!(z.nu[0].abs() < 1e-14);
    }

    #[test]
    fn optimum_rate_examples() {
        let p = scalar_problem(Signal::constant(1.0));
        assert!(p.optimum_rate(2.0, 1e-4, None).unwrap() < 1e-9);
        let p = scalar_problem(Signal::ramp(0.0, 1.0));
        assert!((p.optimum_rate(3.0, 1e-4, None).unwrap() - 2f64.sqrt()).abs() < 1e-9);
        let p = scalar_problem(Signal::sinusoid(1.0, 1.0, 0.0));
        assert!((p.optimum_rate(0.0, 1e-4, None).unwrap() - 2f64.sqrt()).abs() < 1e-6);
        assert!(p.optimum_rate(0.0, 0.0, None).is_err());
    }

    // g(x) = Σ x_i² + ½ log cosh x_i, Hessian diag(2 + ½ sech² x_i) ∈ [2, 2.5]
    fn log_cosh_objective() -> CallableObjective<f64> {
        CallableObjective {
            value: Arc::new(|x: &[f64]| x.iter().map(|v| v * v + 0.5 * v.cosh().ln()).sum()),
            gradient: Arc::new(|x: &[f64]| x.iter().map(|v| 2.0 * v + 0.5 * v.tanh()).collect()),
            hessian: Arc::new(|x: &[f64]| {
                DenseMatrix::from_diagonal(
                    &x.iter().map(|v| 2.0 + 0.5 / v.cosh().powi(2)).collect::<Vec<_>>(),
                )
            }),
        }
    }

    #[test]
    fn newton_solves_callable_kkt() {
        let p = make_callable_problem(
            2,
            log_cosh_objective(),
            m(vec![vec![1.0, 1.0]]),
            VectorSignal::constant(&[3.0]),
            (2.0, 2.5),
        )
        .unwrap();
        let z = p.instantaneous_optimum(0.0).unwrap();
        assert!(norm_inf(&p.kkt_residual(&z, 0.0).unwrap()) <= 1e-10);
        assert!((z.x[0] - 1.5).abs() < 1e-10);
    }

    #[test]
    fn callable_audit_rejects_wrong_bounds() {
        let err = make_callable_problem(
            2,
            log_cosh_objective(),
            m(vec![vec![1.0, 1.0]]),
            VectorSignal::constant(&[3.0]),
            (2.0, 2.1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
        let err = make_callable_problem(
            2,
            log_cosh_objective(),
            m(vec![vec![1.0, 1.0]]),
            VectorSignal::constant(&[3.0]),
            (0.0, 2.5),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Convexity { .. }));
    }

    #[test]
    fn primal_forcing_shifts_optimum() {
        let p = scalar_problem(Signal::constant(0.0))
            .with_primal_forcing(VectorSignal::constant(&[2.0]))
            .unwrap();
        let z = p.instantaneous_optimum(0.0).unwrap();
        assert!(z.x[0].abs() < 1e-14 && (z.nu[0] - 2.0).abs() < 1e-14);
        assert!(!p.clone().with_primal_forcing(VectorSignal::constant(&[1.0, 1.0])).is_ok());
    }
}
