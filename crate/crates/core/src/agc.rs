//! Automatic generation control as a primal-dual flow.
//!
//! Primal variable: bus frequencies `ω ∈ ℝⁿ`. Duals: line powers `p ∈ ℝˡ` and
//! the AGC integrator `u ∈ ℝ`. With `g(ω) = ½ωᵀDω` and the stacked constraint
//! matrix `Ẽ = [B^½E; −kᵀ]` the flow reads
//!
//! ```text
//! ω̇ = −Dω − EᵀB^½p + k·u + A sin(Ωt)·e_bus
//! ṗ = B^½Eω
//! u̇ = −kᵀω
//! ```
//!
//! The torque `A sin(Ωt)` enters additively on the bus it is exerted on.
//! A turbine lag replaces `u` by `û` in the frequency equation only, with
//! `T·û̇ = u − û`.
//!
//! # Rank reduction
//!
//! `Ẽ` need not have full row rank; the single-machine case has
//! `Ẽ = [[1], [−1]]`. [`build_agc_system`] then takes an orthonormal basis
//! `W` of `range(Ẽ)` (eigenvectors of `ẼẼᵀ` with nonzero eigenvalue, each
//! signed so its largest entry is positive) and works with `ν_r = Wᵀν` and
//! `Ẽ_r = WᵀẼ`. Since `ν̇ = Ẽω` stays in `range(Ẽ)` and
//! `ẼᵀWWᵀ = Ẽᵀ`, the frequency trajectory is unchanged; the component of
//! `ν` orthogonal to `range(Ẽ)` is constant and drops out. For one machine
//! this gives `W = [1, −1]ᵀ/√2` and `Ẽ_r = [√2]`.
//!
//! In reduced coordinates the lag perturbs the dual along `Wᵀe_u`, so `ξ` is
//! measured on that direction.

use serde::{Deserialize, Serialize};

use crate::contraction::{certify, CertificateRecord, ContractionCertificate};
use crate::dynamics::{displacement_jacobian, fmt_g17, integrate, Trajectory, VectorField};
use crate::error::{Error, Result};
use crate::matrixcore::{norm2, sub_vec, sym_eigen, sym_sqrt, DenseMatrix};
use crate::problem::{make_quadratic_problem, SaddleProblem};
use crate::robustness::{
    bound_tracking_with_observer, default_cutoff, eta_linear, sup_optimum_rate, xi_on_subspace, BoundId,
    BoundReport, XI_SCOPE_UNOBSERVED,
};
use crate::scalar::Scalar;
use crate::signal::{Signal, VectorSignal};

/// Relative eigenvalue threshold for the range of `Ẽ`.
pub const RANGE_TOL: f64 = 1e-10;

/// Network, controller and disturbance parameters (per-unit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct AgcConfig<T> {
    /// Damping, diagonal `n × n`.
    pub d: DenseMatrix<T>,
    /// Line susceptances, diagonal `l × l`.
    pub b: DenseMatrix<T>,
    /// Line-bus incidence, `l × n`.
    pub e: DenseMatrix<T>,
    /// Secondary-control gains, one per bus.
    pub k: Vec<T>,
    /// Turbine time constant in seconds.
    pub turbine_time_constant: T,
    /// Torque amplitude `A`.
    pub amplitude: T,
    /// Torque angular frequency `Ω` in rad/s.
    pub omega: T,
    /// Bus the torque acts on.
    #[serde(default)]
    pub disturbance_bus: usize,
}

impl Default for AgcConfig<f64> {
    /// Single machine: `D = B = E = k = 1`, `T = 0.1`, `A = 0.1`, `Ω = 0.5`.
    fn default() -> Self {
        Self::smib(1.0, 1.0, 1.0, 0.1, 0.1, 0.5)
    }
}

impl<T: Scalar> AgcConfig<T> {
    pub fn smib(d: T, b: T, k: T, t: T, amplitude: T, omega: T) -> Self {
        Self {
            d: DenseMatrix::from_diagonal(&[d]),
            b: DenseMatrix::from_diagonal(&[b]),
            e: DenseMatrix::from_diagonal(&[T::one()]),
            k: vec![k],
            turbine_time_constant: t,
            amplitude,
            omega,
            disturbance_bus: 0,
        }
    }

    pub fn n_gen(&self) -> usize {
        self.d.rows()
    }

    pub fn n_lines(&self) -> usize {
        self.b.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, l) = (self.n_gen(), self.n_lines());
        check_positive_diagonal(&self.d, "D")?;
        check_positive_diagonal(&self.b, "B")?;
        if self.e.shape() != (l, n) {
            return Err(Error::Dimension(format!("E is {:?}, expected {l}x{n}", self.e.shape())));
        }
        if self.k.len() != n {
            return Err(Error::Dimension(format!("k has length {}, expected {n}", self.k.len())));
        }
        if !(self.turbine_time_constant > T::zero()) {
            return Err(Error::Configuration("turbine time constant must be positive".into()));
        }
        if !self.amplitude.is_finite() || !self.omega.is_finite() || self.k.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("AGC parameter".into()));
        }
        if self.disturbance_bus >= n {
            return Err(Error::Configuration(format!("disturbance bus {} out of range", self.disturbance_bus)));
        }
        Ok(())
    }

    /// `Ẽ = [B^½E; −kᵀ]`.
    pub fn stacked_constraints(&self) -> Result<DenseMatrix<T>> {
        self.validate()?;
        let top = sym_sqrt(&self.b)?.matmul(&self.e)?;
        let bottom = DenseMatrix::row_vector(&self.k.iter().map(|&v| -v).collect::<Vec<_>>());
        DenseMatrix::vstack(&top, &bottom)
    }

    fn torque(&self) -> VectorSignal<T> {
        let mut s = VectorSignal::zeros(self.n_gen());
        s.0[self.disturbance_bus] = Signal::sinusoid(self.amplitude, self.omega, T::zero());
        s
    }

    /// Physical state length `n + l + 1`, ordered `(ω, p, u)`.
    pub fn state_dim(&self) -> usize {
        self.n_gen() + self.n_lines() + 1
    }

    /// Column names for physical states, optionally followed by `u_hat`.
    pub fn state_names(&self, with_estimate: bool) -> Vec<String> {
        let mut names: Vec<String> = (0..self.n_gen()).map(|i| format!("omega{i}")).collect();
        names.extend((0..self.n_lines()).map(|j| format!("p{j}")));
        names.push("u_agc".into());
        if with_estimate {
            names.push("u_hat".into());
        }
        names
    }
}

fn check_positive_diagonal<T: Scalar>(m: &DenseMatrix<T>, name: &str) -> Result<()> {
    if !m.is_square() || m.is_empty() {
        return Err(Error::Dimension(format!("{name} must be a nonempty square matrix")));
    }
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)];
            if i == j && !(v > T::zero()) {
                return Err(Error::Configuration(format!("{name} needs strictly positive diagonal entries")));
            }
            if i != j && v != T::zero() {
                return Err(Error::Configuration(format!("{name} must be diagonal")));
            }
        }
    }
    Ok(())
}

/// The AGC problem with the stacked `Ẽ` as is; rejects rank-deficient stacks.
pub fn build_agc_problem<T: Scalar>(cfg: &AgcConfig<T>) -> Result<SaddleProblem<T>> {
    let e_tilde = cfg.stacked_constraints()?;
    make_quadratic_problem(cfg.d.clone(), vec![T::zero(); cfg.n_gen()], e_tilde.clone(), VectorSignal::zeros(e_tilde.rows()))?
        .with_primal_forcing(cfg.torque())
}

/// Full-rank reduced AGC problem together with the reduction data.
#[derive(Debug, Clone)]
pub struct AgcSystem<T> {
    pub config: AgcConfig<T>,
    /// `Ẽ` before reduction.
    pub e_tilde: DenseMatrix<T>,
    /// Orthonormal basis `W` of `range(Ẽ)`, `(l + 1) × r`.
    pub basis: DenseMatrix<T>,
    /// Problem in `(ω, ν_r)` with constraint matrix `Ẽ_r = WᵀẼ`.
    pub problem: SaddleProblem<T>,
}

impl<T: Scalar> AgcSystem<T> {
    pub fn reduced_e(&self) -> &DenseMatrix<T> {
        self.problem.e()
    }

    pub fn is_reduced(&self) -> bool {
        self.basis.cols() < self.e_tilde.rows()
    }

    /// Maps a physical state `(ω, p, u, …)` to `(ω, Wᵀ(p, u))`.
    pub fn reduce_state(&self, z: &[T]) -> Result<Vec<T>> {
        let n = self.config.n_gen();
        let m = self.e_tilde.rows();
        if z.len() < n + m {
            return Err(Error::Dimension(format!("state has length {}, expected at least {}", z.len(), n + m)));
        }
        let mut out = z[..n].to_vec();
        out.extend(self.basis.tr_matvec(&z[n..n + m])?);
        Ok(out)
    }

    /// Reduced-coordinate direction of a lag error `û − u`: `(0, Wᵀe_u)`.
    pub fn estimate_direction(&self) -> Vec<T> {
        let n = self.config.n_gen();
        let m = self.e_tilde.rows();
        let mut v = vec![T::zero(); n];
        v.extend((0..self.basis.cols()).map(|c| self.basis[(m - 1, c)]));
        v
    }
}

/// Builds the AGC problem, reducing the dual to `range(Ẽ)` when `Ẽ` is rank
/// deficient. Zero rows of `Ẽ` (e.g. `k = 0`) are rejected.
pub fn build_agc_system<T: Scalar>(cfg: &AgcConfig<T>) -> Result<AgcSystem<T>> {
    let e_tilde = cfg.stacked_constraints()?;
    let m = e_tilde.rows();
    for i in 0..m {
        if e_tilde.row(i).iter().all(|&v| v == T::zero()) {
            return Err(Error::Rank { singular_value: 0.0 });
        }
    }
    let eig = sym_eigen(&e_tilde.matmul(&e_tilde.transpose())?)?;
    let top = eig.values.last().copied().unwrap_or(T::zero());
    let keep: Vec<usize> = (0..m).filter(|&i| eig.values[i] > T::tolerance(RANGE_TOL) * top).collect();
    if keep.is_empty() {
        return Err(Error::Rank { singular_value: 0.0 });
    }
    let mut basis = eig.vectors.select_columns(&keep);
    for c in 0..basis.cols() {
        let col = basis.column(c);
        let pivot = col.iter().copied().fold(T::zero(), |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if pivot < T::zero() {
            for r in 0..basis.rows() {
                basis[(r, c)] = -basis[(r, c)];
            }
        }
    }
    let reduced = basis.transpose().matmul(&e_tilde)?;
    let problem = make_quadratic_problem(
        cfg.d.clone(),
        vec![T::zero(); cfg.n_gen()],
        reduced,
        VectorSignal::zeros(keep.len()),
    )?
    .with_primal_forcing(cfg.torque())?;
    Ok(AgcSystem { config: cfg.clone(), e_tilde, basis, problem })
}

fn frequency_rhs<T: Scalar>(cfg: &AgcConfig<T>, b_half_e: &DenseMatrix<T>, omega: &[T], p: &[T], u: T, t: T) -> Result<Vec<T>> {
    let flow = b_half_e.tr_matvec(p)?;
    let mut w = cfg.d.matvec(omega)?;
    for i in 0..w.len() {
        w[i] = -w[i] - flow[i] + cfg.k[i] * u;
    }
    w[cfg.disturbance_bus] = w[cfg.disturbance_bus] + cfg.amplitude * (cfg.omega * t).sin();
    Ok(w)
}

fn network_rhs<T: Scalar>(cfg: &AgcConfig<T>, b_half_e: &DenseMatrix<T>, omega: &[T]) -> Result<(Vec<T>, T)> {
    let pdot = b_half_e.matvec(omega)?;
    let udot = -cfg.k.iter().zip(omega).fold(T::zero(), |acc, (&k, &w)| acc + k * w);
    Ok((pdot, udot))
}

/// Undelayed AGC dynamics on `(ω, p, u)`.
pub fn agc_true_field<T: Scalar>(cfg: &AgcConfig<T>) -> Result<VectorField<T>> {
    cfg.validate()?;
    let c = cfg.clone();
    let bhe = sym_sqrt(&cfg.b)?.matmul(&cfg.e)?;
    let (n, l) = (cfg.n_gen(), cfg.n_lines());
    Ok(VectorField::new(cfg.state_dim(), "agc", move |z: &[T], t: T| {
        let (omega, rest) = z.split_at(n);
        let (p, u) = rest.split_at(l);
        let mut out = frequency_rhs(&c, &bhe, omega, p, u[0], t).expect("dimensions checked at construction");
        let (pdot, udot) = network_rhs(&c, &bhe, omega).expect("dimensions checked at construction");
        out.extend(pdot);
        out.push(udot);
        out
    }))
}

/// AGC dynamics with turbine lag on `(ω, p, u, û)`: the frequency equation
/// sees `û`, and `T·û̇ = u − û`.
pub fn agc_delayed_field<T: Scalar>(cfg: &AgcConfig<T>) -> Result<VectorField<T>> {
    cfg.validate()?;
    let c = cfg.clone();
    let bhe = sym_sqrt(&cfg.b)?.matmul(&cfg.e)?;
    let (n, l) = (cfg.n_gen(), cfg.n_lines());
    let inv_t = T::one() / cfg.turbine_time_constant;
    Ok(VectorField::new(cfg.state_dim() + 1, "agc+turbine_lag", move |z: &[T], t: T| {
        let (omega, rest) = z.split_at(n);
        let (p, rest) = rest.split_at(l);
        let (u, u_hat) = (rest[0], rest[1]);
        let mut out = frequency_rhs(&c, &bhe, omega, p, u_hat, t).expect("dimensions checked at construction");
        let (pdot, udot) = network_rhs(&c, &bhe, omega).expect("dimensions checked at construction");
        out.extend(pdot);
        out.push(udot);
        out.push((u - u_hat) * inv_t);
        out
    }))
}

/// Constants entering the delayed-system bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgcConstants {
    pub beta: f64,
    pub beta_hat: f64,
    pub xi: f64,
    pub eta: f64,
    pub sup_rate: f64,
    pub bound: f64,
}

/// Output of [`run_agc_demo`].
#[derive(Debug, Clone)]
pub struct AgcDemo<T> {
    pub system: AgcSystem<T>,
    pub certificate: ContractionCertificate<T>,
    pub constants: AgcConstants,
    /// Undelayed physical trajectory.
    pub true_traj: Trajectory<T>,
    /// Delayed physical trajectory including `û`.
    pub delayed_traj: Trajectory<T>,
    /// `(t, ‖z − z*‖_Θ, ‖z − z*‖₂)` for the delayed system in reduced coordinates.
    pub error_series: Vec<(T, T, T)>,
    pub report: BoundReport,
}

/// JSON summary of an AGC demo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgcReport {
    pub config: AgcConfig<f64>,
    pub certificate: CertificateRecord,
    pub stacked_e: Vec<Vec<f64>>,
    pub reduced_e: Vec<Vec<f64>>,
    pub dual_basis: Vec<Vec<f64>>,
    pub constants: AgcConstants,
    pub xi_scope: String,
    pub report: BoundReport,
}

impl<T: Scalar> AgcDemo<T> {
    pub fn summary(&self) -> AgcReport {
        let c = &self.system.config;
        let config = AgcConfig {
            d: DenseMatrix::from_rows(c.d.to_f64_rows()).expect("finite"),
            b: DenseMatrix::from_rows(c.b.to_f64_rows()).expect("finite"),
            e: DenseMatrix::from_rows(c.e.to_f64_rows()).expect("finite"),
            k: c.k.iter().map(|v| v.as_f64()).collect(),
            turbine_time_constant: c.turbine_time_constant.as_f64(),
            amplitude: c.amplitude.as_f64(),
            omega: c.omega.as_f64(),
            disturbance_bus: c.disturbance_bus,
        };
        AgcReport {
            config,
            certificate: self.certificate.record(),
            stacked_e: self.system.e_tilde.to_f64_rows(),
            reduced_e: self.system.reduced_e().to_f64_rows(),
            dual_basis: self.system.basis.to_f64_rows(),
            constants: self.constants.clone(),
            xi_scope: XI_SCOPE_UNOBSERVED.into(),
            report: self.report.clone(),
        }
    }

    /// `t,error,bound` with the error in `Θ` (or Euclidean when `euclidean`).
    pub fn error_csv(&self, euclidean: bool) -> String {
        let mut out = String::from("t,error,bound\n");
        let bound = fmt_g17(self.constants.bound);
        for &(t, w, e) in &self.error_series {
            let err = if euclidean { e } else { w };
            out.push_str(&format!("{},{},{}\n", fmt_g17(t.as_f64()), fmt_g17(err.as_f64()), bound));
        }
        out
    }
}

/// Simulates the true and delayed AGC systems from `z0` (physical state
/// `(ω, p, u)`, with `û(0) = u(0)`) and checks the observer-in-the-loop
/// tracking bound past `8/β`.
pub fn run_agc_demo<T: Scalar>(cfg: &AgcConfig<T>, z0: Option<&[T]>, t_end: T, step: T) -> Result<AgcDemo<T>> {
    let system = build_agc_system(cfg)?;
    let prob = &system.problem;
    let certificate = certify(prob, None)?;
    let theta = &certificate.theta;
    let a = displacement_jacobian(prob, &vec![T::zero(); prob.n()], T::zero())?;
    let dir = DenseMatrix::new(prob.dim(), 1, system.estimate_direction())?;
    let xi = xi_on_subspace(&a, theta, &dir)?;
    let eta = eta_linear(&a, theta)?;
    let beta = certificate.beta;
    let beta_hat = T::one() / cfg.turbine_time_constant;
    let sup_rate = sup_optimum_rate(prob, T::zero(), t_end, Some(theta))?;
    let bound = bound_tracking_with_observer(beta, beta_hat, xi, eta, sup_rate).map_err(|e| match e {
        Error::Condition(c) => Error::Condition(format!("{c} (try a smaller turbine time constant or a smaller A·Ω)")),
        other => other,
    })?;

    let dim = cfg.state_dim();
    let z_init = match z0 {
        Some(z) if z.len() == dim => z.to_vec(),
        Some(z) => return Err(Error::Dimension(format!("initial state has length {}, expected {dim}", z.len()))),
        None => vec![T::zero(); dim],
    };
    let mut w0 = z_init.clone();
    w0.push(z_init[dim - 1]);
    let true_traj = integrate(&agc_true_field(cfg)?, &z_init, T::zero(), t_end, step)?.with_state_names(cfg.state_names(false))?;
    let delayed_traj = integrate(&agc_delayed_field(cfg)?, &w0, T::zero(), t_end, step)?.with_state_names(cfg.state_names(true))?;

    let cutoff = default_cutoff(beta);
    let mut error_series = Vec::with_capacity(delayed_traj.len());
    let (mut sup, mut sup_e) = (T::zero(), T::zero());
    for (&t, z) in delayed_traj.times().iter().zip(delayed_traj.states()) {
        let zr = system.reduce_state(z)?;
        let diff = sub_vec(&zr, &prob.instantaneous_optimum(t)?.to_vec());
        let w = norm2(&theta.matvec(&diff)?);
        let e = norm2(&diff);
        if t >= cutoff {
            sup = sup.max(w);
            sup_e = sup_e.max(e);
        }
        error_series.push((t, w, e));
    }
    if cutoff > t_end {
        return Err(Error::Window(format!("run ends before the transient cutoff {}", cutoff.as_f64())));
    }
    let mut report = BoundReport::new(BoundId::Thm1TrackingObserver, Some(bound.as_f64()), sup.as_f64(), cutoff.as_f64())
        .with_constants([
            ("alpha", certificate.alpha.as_f64()),
            ("beta", beta.as_f64()),
            ("beta_hat", beta_hat.as_f64()),
            ("xi", xi.as_f64()),
            ("eta", eta.as_f64()),
            ("sup_rate", sup_rate.as_f64()),
        ])
        .with_xi_scope(XI_SCOPE_UNOBSERVED)
        .with_label("agc");
    report.observed_sup_euclidean = Some(sup_e.as_f64());
    let constants = AgcConstants {
        beta: beta.as_f64(),
        beta_hat: beta_hat.as_f64(),
        xi: xi.as_f64(),
        eta: eta.as_f64(),
        sup_rate: sup_rate.as_f64(),
        bound: bound.as_f64(),
    };
    Ok(AgcDemo { system, certificate, constants, true_traj, delayed_traj, error_series, report })
}
