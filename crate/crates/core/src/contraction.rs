//! Skew metric `Θ`, quadratic form `Q`, step-size bound on `α`, and the
//! certified contraction rate `β = λ_min(Θ⁻ᵀQΘ⁻¹)` of the primal-dual flow.
//!
//! With `Θ = [[I, αEᵀ], [0, (I − α²EEᵀ)^½]]` the displacement dynamics satisfy
//! `d/dt ‖Θδz‖² = −2 δzᵀQδz`, where
//!
//! ```text
//! Q = [[ H − αEᵀE , (α/2) H Eᵀ ],
//!      [ (α/2) E H,  α E Eᵀ    ]]
//! ```
//!
//! so `‖Θδz‖` decays at least at rate `β`. The off-diagonal blocks are
//! placed so that `Q` is symmetric for any `m × n` constraint matrix.

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::matrixcore::{
    min_singular_value, norm2, spectral_norm, sub_vec, sym_eig_extremes, sym_eigen, sym_inv_sqrt,
    sym_sqrt, DenseMatrix,
};
use crate::problem::SaddleProblem;
use crate::scalar::Scalar;

/// Golden-section iterations used when `α` is not given.
pub const GOLDEN_ITERATIONS: usize = 40;
/// Search interval for `α` is `(0, ALPHA_SEARCH_FRACTION · α_max)`.
pub const ALPHA_SEARCH_FRACTION: f64 = 0.999;

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCertificate<T> {
    pub alpha: T,
    pub alpha_max: T,
    pub theta: DenseMatrix<T>,
    pub theta_inv: DenseMatrix<T>,
    pub q_form: DenseMatrix<T>,
    pub beta: T,
    pub hessian_bounds_used: (T, T),
}

/// JSON form of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub alpha: f64,
    pub alpha_max: f64,
    pub beta: f64,
    pub theta: Vec<Vec<f64>>,
    pub q_form: Vec<Vec<f64>>,
    pub hessian_bounds: (f64, f64),
}

impl<T: Scalar> ContractionCertificate<T> {
    pub fn record(&self) -> CertificateRecord {
        CertificateRecord {
            alpha: self.alpha.as_f64(),
            alpha_max: self.alpha_max.as_f64(),
            beta: self.beta.as_f64(),
            theta: self.theta.to_f64_rows(),
            q_form: self.q_form.to_f64_rows(),
            hessian_bounds: (self.hessian_bounds_used.0.as_f64(), self.hessian_bounds_used.1.as_f64()),
        }
    }

    /// `‖Θ(z1 − z2)‖₂`.
    pub fn distance(&self, z1: &[T], z2: &[T]) -> Result<T> {
        weighted_distance(&self.theta, z1, z2)
    }

    pub fn dim(&self) -> usize {
        self.theta.rows()
    }
}

/// Upper end of the admissible step interval,
/// `1 / max{‖E‖₂, ‖EH^{−1/2}‖₂² + ‖H‖₂/4}`.
///
/// For non-quadratic objectives the worst case over the declared Hessian
/// bounds is used: `‖EH^{−1/2}‖₂² ← ‖E‖₂²/h_min` and `‖H‖₂ ← h_max`.
pub fn alpha_max<T: Scalar>(prob: &SaddleProblem<T>) -> Result<T> {
    let e = prob.e();
    let e_norm = spectral_norm(e)?;
    let (weighted, h_norm) = match prob.constant_hessian() {
        Some(h) => {
            let h_inv_half = sym_inv_sqrt(h)?;
            let w = spectral_norm(&e.matmul(&h_inv_half)?)?;
            (w * w, spectral_norm(h)?)
        }
        None => {
            let (h_min, h_max) = prob.hessian_bounds();
            (e_norm * e_norm / h_min, h_max)
        }
    };
    Ok(T::one() / e_norm.max(weighted + h_norm / T::lit(4.0)))
}

/// `Θ = [[I, αEᵀ], [0, (I − α²EEᵀ)^½]]`, defined for `0 ≤ α < 1/‖E‖₂`.
pub fn build_theta<T: Scalar>(e: &DenseMatrix<T>, alpha: T) -> Result<DenseMatrix<T>> {
    let (lower, _) = lower_block(e, alpha)?;
    let (m, n) = e.shape();
    DenseMatrix::from_blocks(
        &DenseMatrix::identity(n),
        &e.transpose().scale(alpha),
        &DenseMatrix::zeros(m, n),
        &sym_sqrt(&lower)?,
    )
}

/// `Θ⁻¹ = [[I, −αEᵀS⁻¹], [0, S⁻¹]]` with `S = (I − α²EEᵀ)^½`, by block back-substitution.
pub fn theta_inverse<T: Scalar>(e: &DenseMatrix<T>, alpha: T) -> Result<DenseMatrix<T>> {
    let (lower, _) = lower_block(e, alpha)?;
    let (m, n) = e.shape();
    let s_inv = sym_inv_sqrt(&lower)?;
    let upper = e.transpose().matmul(&s_inv)?.scale(-alpha);
    DenseMatrix::from_blocks(&DenseMatrix::identity(n), &upper, &DenseMatrix::zeros(m, n), &s_inv)
}

fn lower_block<T: Scalar>(e: &DenseMatrix<T>, alpha: T) -> Result<(DenseMatrix<T>, T)> {
    let e_norm = spectral_norm(e)?;
    if !(alpha >= T::zero()) || alpha * e_norm >= T::one() {
        return Err(Error::Metric(format!(
            "alpha = {:e} outside [0, 1/‖E‖₂ = {:e})",
            alpha.as_f64(),
            (T::one() / e_norm).as_f64()
        )));
    }
    let m = e.rows();
    let eet = e.matmul(&e.transpose())?;
    Ok((DenseMatrix::identity(m).sub(&eet.scale(alpha * alpha))?, e_norm))
}

/// Symmetric `Q(H, E, α)`; see the module docs for the block layout.
pub fn build_q<T: Scalar>(h: &DenseMatrix<T>, e: &DenseMatrix<T>, alpha: T) -> Result<DenseMatrix<T>> {
    let (m, n) = e.shape();
    if h.shape() != (n, n) {
        return Err(Error::Dimension(format!("H is {:?}, expected {n}x{n}", h.shape())));
    }
    let et = e.transpose();
    let half = alpha * T::lit(0.5);
    let top_left = h.sub(&et.matmul(e)?.scale(alpha))?;
    let top_right = h.matmul(&et)?.scale(half);
    let bottom_left = e.matmul(h)?.scale(half);
    let bottom_right = e.matmul(&et)?.scale(alpha);
    let q = DenseMatrix::from_blocks(&top_left, &top_right, &bottom_left, &bottom_right)?;
    debug_assert_eq!(q.rows(), n + m);
    Ok(q.symmetrized())
}

/// `λ_min` of the symmetrized `Θ⁻ᵀ Q Θ⁻¹`.
pub fn metric_rate<T: Scalar>(q: &DenseMatrix<T>, theta_inv: &DenseMatrix<T>) -> Result<T> {
    let m = theta_inv.transpose().matmul(q)?.matmul(theta_inv)?;
    Ok(sym_eig_extremes(&m)?.0)
}

struct Evaluation<T> {
    beta: T,
    q_form: DenseMatrix<T>,
    q_lambda_min: T,
}

/// Worst case over the candidate Hessians at a fixed `α`.
fn evaluate<T: Scalar>(hessians: &[DenseMatrix<T>], e: &DenseMatrix<T>, alpha: T) -> Result<Evaluation<T>> {
    let theta_inv = theta_inverse(e, alpha)?;
    let mut worst: Option<Evaluation<T>> = None;
    for h in hessians {
        let q = build_q(h, e, alpha)?;
        let beta = metric_rate(&q, &theta_inv)?;
        let q_min = sym_eig_extremes(&q)?.0;
        let q_lambda_min = worst.as_ref().map_or(q_min, |w| w.q_lambda_min.min(q_min));
        if worst.as_ref().map_or(true, |w| beta < w.beta) {
            worst = Some(Evaluation { beta, q_form: q, q_lambda_min });
        } else if let Some(w) = worst.as_mut() {
            w.q_lambda_min = q_lambda_min;
        }
    }
    worst.ok_or_else(|| Error::Certification("no Hessian to certify against".into()))
}

fn candidate_hessians<T: Scalar>(prob: &SaddleProblem<T>, extra: &[DenseMatrix<T>]) -> Result<Vec<DenseMatrix<T>>> {
    let n = prob.n();
    let mut hs = match prob.constant_hessian() {
        Some(h) => vec![h.clone()],
        None => {
            let (lo, hi) = prob.hessian_bounds();
            vec![DenseMatrix::identity(n).scale(lo), DenseMatrix::identity(n).scale(hi)]
        }
    };
    for h in extra {
        if h.shape() != (n, n) {
            return Err(Error::Dimension(format!("sample Hessian is {:?}, expected {n}x{n}", h.shape())));
        }
        hs.push(h.symmetrized());
    }
    Ok(hs)
}

/// Certificate for `prob`. With `alpha = None`, `α` maximizes `β` by golden
/// section over `(0, 0.999·α_max)`.
pub fn certify<T: Scalar>(prob: &SaddleProblem<T>, alpha: Option<T>) -> Result<ContractionCertificate<T>> {
    certify_with_samples(prob, alpha, &[])
}

/// As [`certify`], additionally requiring the rate to hold for each sampled
/// Hessian (e.g. Hessians observed along trajectories of a non-quadratic problem).
pub fn certify_with_samples<T: Scalar>(
    prob: &SaddleProblem<T>,
    alpha: Option<T>,
    sample_hessians: &[DenseMatrix<T>],
) -> Result<ContractionCertificate<T>> {
    let amax = alpha_max(prob)?;
    let hessians = candidate_hessians(prob, sample_hessians)?;
    let e = prob.e();
    let alpha = match alpha {
        Some(a) => {
            if !(a > T::zero() && a < amax) {
                return Err(Error::Metric(format!(
                    "alpha = {:e} outside (0, alpha_max = {:e})",
                    a.as_f64(),
                    amax.as_f64()
                )));
            }
            a
        }
        None => golden_section_max(T::zero(), amax * T::lit(ALPHA_SEARCH_FRACTION), GOLDEN_ITERATIONS, |a| {
            evaluate(&hessians, e, a).map(|ev| ev.beta)
        })?,
    };
    let ev = evaluate(&hessians, e, alpha)?;
    if !(ev.q_lambda_min > T::zero()) {
        return Err(Error::Certification(format!(
            "λ_min(Q) = {:e} is not positive at alpha = {:e}",
            ev.q_lambda_min.as_f64(),
            alpha.as_f64()
        )));
    }
    if !(ev.beta > T::zero()) {
        return Err(Error::Certification(format!("certified rate {:e} is not positive", ev.beta.as_f64())));
    }
    let theta = build_theta(e, alpha)?;
    if min_singular_value(&theta)? <= T::tolerance(1e-10) {
        return Err(Error::Certification("metric transformation is numerically singular".into()));
    }
    let theta_inv = theta_inverse(e, alpha)?;
    Ok(ContractionCertificate {
        alpha,
        alpha_max: amax,
        theta,
        theta_inv,
        q_form: ev.q_form,
        beta: ev.beta,
        hessian_bounds_used: prob.hessian_bounds(),
    })
}

/// Maximizes `f` on `(lo, hi)` by golden-section search; returns the best
/// point evaluated.
fn golden_section_max<T: Scalar>(
    lo: T,
    hi: T,
    iterations: usize,
    f: impl Fn(T) -> Result<T>,
) -> Result<T> {
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..iterations {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
            if fd > best.1 {
                best = (d, fd);
            }
        }
    }
    Ok(best.0)
}

/// `‖Θ(z1 − z2)‖₂`.
pub fn weighted_distance<T: Scalar>(theta: &DenseMatrix<T>, z1: &[T], z2: &[T]) -> Result<T> {
    if z1.len() != z2.len() || theta.cols() != z1.len() {
        return Err(Error::Dimension(format!(
            "metric is {:?}, states have lengths {} and {}",
            theta.shape(),
            z1.len(),
            z2.len()
        )));
    }
    Ok(norm2(&theta.matvec(&sub_vec(z1, z2))?))
}

/// Least-squares slope of `−log ‖Θ(z1 − z2)‖` over grid points in `[t_a, t_b]`.
///
/// Only the first `theta.cols()` components of each state are compared.
pub fn empirical_rate<T: Scalar>(
    traj1: &Trajectory<T>,
    traj2: &Trajectory<T>,
    theta: &DenseMatrix<T>,
    window: (T, T),
) -> Result<T> {
    if !traj1.shares_grid(traj2) {
        return Err(Error::Window("trajectories do not share a time grid".into()));
    }
    let (ta, tb) = window;
    if !(ta < tb) {
        return Err(Error::Window("window needs t_a < t_b".into()));
    }
    let k = theta.cols();
    let mut pts = Vec::new();
    for ((&t, z1), z2) in traj1.times().iter().zip(traj1.states()).zip(traj2.states()) {
        if t < ta || t > tb {
            continue;
        }
        let d = weighted_distance(theta, &z1[..k], &z2[..k])?;
        if !(d > T::min_positive_value()) {
            return Err(Error::DegeneratePair(format!("zero separation at t = {}", t.as_f64())));
        }
        pts.push((t, -d.ln()));
    }
    if pts.len() < 2 {
        return Err(Error::Window("fewer than two grid points inside the window".into()));
    }
    let count = T::lit(pts.len() as f64);
    let mean_t = pts.iter().fold(T::zero(), |s, p| s + p.0) / count;
    let mean_y = pts.iter().fold(T::zero(), |s, p| s + p.1) / count;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for &(t, y) in &pts {
        sxy = sxy + (t - mean_t) * (y - mean_y);
        sxx = sxx + (t - mean_t) * (t - mean_t);
    }
    Ok(sxy / sxx)
}

/// `(λ_min(Q), λ_min(ΘᵀΘ))` for a certificate; both positive when valid.
pub fn certificate_margins<T: Scalar>(cert: &ContractionCertificate<T>) -> Result<(T, T)> {
    let q_min = sym_eigen(&cert.q_form)?.values[0];
    let g = cert.theta.transpose().matmul(&cert.theta)?;
    Ok((q_min, sym_eigen(&g)?.values[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, pd_vector_field, VectorField};
    use crate::problem::make_quadratic_problem;
    use crate::signal::VectorSignal;

    fn m(rows: Vec<Vec<f64>>) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn scalar() -> SaddleProblem<f64> {
        make_quadratic_problem(m(vec![vec![1.0]]), vec![0.0], m(vec![vec![1.0]]), VectorSignal::constant(&[1.0]))
            .unwrap()
    }

    fn two_node() -> SaddleProblem<f64> {
        make_quadratic_problem(
            DenseMatrix::identity(2),
            vec![0.0, 0.0],
            m(vec![vec![1.0, -1.0]]),
            VectorSignal::constant(&[0.0]),
        )
        .unwrap()
    }

    #[test]
    fn alpha_max_examples() {
        assert!((alpha_max(&scalar()).unwrap() - 0.8).abs() < 1e-14);
        assert!((alpha_max(&two_node()).unwrap() - 1.0 / 2.25).abs() < 1e-14);
        let scaled = make_quadratic_problem(
            DenseMatrix::identity(2),
            vec![0.0, 0.0],
            m(vec![vec![1.5, -1.5]]),
            VectorSignal::constant(&[0.0]),
        )
        .unwrap();
        assert!(alpha_max(&scaled).unwrap() < alpha_max(&two_node()).unwrap());
    }

    #[test]
    fn theta_examples() {
        let t = build_theta(&m(vec![vec![1.0]]), 0.4).unwrap();
        assert_eq!(t[(0, 0)], 1.0);
        assert!((t[(0, 1)] - 0.4).abs() < 1e-15);
        assert_eq!(t[(1, 0)], 0.0);
        assert!((t[(1, 1)] - 0.84f64.sqrt()).abs() < 1e-14);
        let id = build_theta(&m(vec![vec![1.0, -1.0]]), 0.0).unwrap();
        assert_eq!(id, DenseMatrix::identity(3));
        let t = build_theta(&m(vec![vec![1.0, -1.0]]), 0.4).unwrap();
        assert!((t[(2, 2)] - 0.68f64.sqrt()).abs() < 1e-14);
        assert!((t[(0, 2)] - 0.4).abs() < 1e-15 && (t[(1, 2)] + 0.4).abs() < 1e-15);
        assert!(matches!(build_theta(&m(vec![vec![1.0]]), 1.0), Err(Error::Metric(_))));
        assert!(matches!(build_theta(&m(vec![vec![1.0]]), -0.1), Err(Error::Metric(_))));
    }

    #[test]
    fn theta_inverse_is_inverse() {
        let e = m(vec![vec![1.0, -1.0, 0.5], vec![0.0, 2.0, 1.0]]);
        let a = 0.3;
        let p = build_theta(&e, a).unwrap().matmul(&theta_inverse(&e, a).unwrap()).unwrap();
        assert!(p.sub(&DenseMatrix::identity(5)).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn q_examples() {
        let q = build_q(&m(vec![vec![1.0]]), &m(vec![vec![1.0]]), 0.4).unwrap();
        assert!(q.sub(&m(vec![vec![0.6, 0.2], vec![0.2, 0.4]])).unwrap().max_abs() < 1e-15);
        let q0 = build_q(&m(vec![vec![2.0]]), &m(vec![vec![1.0]]), 0.0).unwrap();
        assert_eq!(q0, m(vec![vec![2.0, 0.0], vec![0.0, 0.0]]));
        let e = m(vec![vec![1.0, -1.0]]);
        let q = build_q(&DenseMatrix::identity(2), &e, 0.2).unwrap();
        assert!((q[(0, 0)] - 0.8).abs() < 1e-15 && (q[(0, 1)] - 0.2).abs() < 1e-15);
        assert!(sym_eig_extremes(&q).unwrap().0 > 0.0);
        assert!(build_q(&DenseMatrix::identity(3), &e, 0.2).is_err());
    }

    #[test]
    fn q_matches_derivative_identity() {
        // d/dt ‖Θδz‖² = 2 δzᵀ ΘᵀΘ J δz must equal −2 δzᵀ Q δz
        let p = make_quadratic_problem(
            m(vec![vec![2.0, 0.3, 0.0], vec![0.3, 1.0, 0.1], vec![0.0, 0.1, 1.5]]),
            vec![0.0; 3],
            m(vec![vec![1.0, -1.0, 0.0], vec![0.0, 1.0, -1.0]]),
            VectorSignal::constant(&[0.0, 0.0]),
        )
        .unwrap();
        let a = 0.15;
        let theta = build_theta(p.e(), a).unwrap();
        let j = crate::dynamics::displacement_jacobian(&p, &[0.0; 3], 0.0).unwrap();
        let lhs = theta.transpose().matmul(&theta).unwrap().matmul(&j).unwrap().symmetrized();
        let q = build_q(&p.hessian(&[0.0; 3]), p.e(), a).unwrap();
        assert!(lhs.add(&q).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn certify_fixed_alpha_scalar() {
        let c = certify(&scalar(), Some(0.4)).unwrap();
        assert!(c.q_form.sub(&m(vec![vec![0.6, 0.2], vec![0.2, 0.4]])).unwrap().max_abs() < 1e-15);
        // oracle: direct inverse of Θ and eigenvalues of the 2×2 by characteristic polynomial
        let s = 0.84f64.sqrt();
        let ti = [[1.0, -0.4 / s], [0.0, 1.0 / s]];
        let q = [[0.6, 0.2], [0.2, 0.4]];
        let mut mm = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        mm[i][j] += ti[k][i] * q[k][l] * ti[l][j];
                    }
                }
            }
        }
        let tr = mm[0][0] + mm[1][1];
        let det = mm[0][0] * mm[1][1] - mm[0][1] * mm[1][0];
        let lmin = tr / 2.0 - (tr * tr / 4.0 - det).sqrt();
        assert!((c.beta - lmin).abs() < 1e-12);
        assert!((c.beta - 0.390_891_054_882).abs() < 1e-9);
        assert!(c.beta > 0.0);
        assert!(matches!(certify(&scalar(), Some(0.8)), Err(Error::Metric(_))));
    }

    #[test]
    fn rate_equals_negated_measure() {
        let c = certify(&two_node(), Some(0.3)).unwrap();
        let j = c.theta_inv.transpose().matmul(&c.q_form).unwrap().matmul(&c.theta_inv).unwrap();
        let mu = crate::matrixcore::matrix_measure_2(&j.scale(-1.0)).unwrap();
        assert!((c.beta + mu).abs() < 1e-12);
    }

    #[test]
    fn golden_section_beats_endpoints_and_scan() {
        let p = scalar();
        let amax = alpha_max(&p).unwrap();
        let best = certify(&p, None).unwrap();
        let b_half = certify(&p, Some(0.5 * amax)).unwrap().beta;
        let b_edge = certify(&p, Some(0.99 * amax)).unwrap().beta;
        assert!(best.beta >= b_half.max(b_edge) - 1e-9);
        let scan = (1..=1000)
            .map(|i| certify(&p, Some(0.999 * amax * i as f64 / 1001.0)).unwrap().beta)
            .fold(0.0, f64::max);
        assert!(best.beta >= scan - 1e-6, "{} vs scan {}", best.beta, scan);
    }

    #[test]
    fn weighted_distance_examples() {
        let theta = build_theta(&m(vec![vec![1.0]]), 0.4).unwrap();
        assert_eq!(weighted_distance(&theta, &[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let id = DenseMatrix::<f64>::identity(2);
        assert!((weighted_distance(&id, &[3.0, 4.0], &[0.0, 0.0]).unwrap() - 5.0).abs() < 1e-15);
        assert!((weighted_distance(&theta, &[0.0, 1.0], &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-9);
        assert!(weighted_distance(&theta, &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn empirical_rate_examples() {
        let f = VectorField::new(1, "decay2", |z: &[f64], _| vec![-2.0 * z[0]]);
        let a = integrate(&f, &[1.0], 0.0, 5.0, 1e-3).unwrap();
        let b = integrate(&f, &[-1.0], 0.0, 5.0, 1e-3).unwrap();
        let id = DenseMatrix::identity(1);
        assert!((empirical_rate(&a, &b, &id, (0.0, 5.0)).unwrap() - 2.0).abs() < 1e-6);

        let p = scalar();
        let field = pd_vector_field(&p);
        let eq = integrate(&field, &[1.0, -1.0], 0.0, 5.0, 1e-2).unwrap();
        let id2 = DenseMatrix::identity(2);
        assert!(matches!(empirical_rate(&eq, &eq.clone(), &id2, (0.0, 5.0)), Err(Error::DegeneratePair(_))));
        assert!(empirical_rate(&eq, &a, &id2, (0.0, 5.0)).is_err());
        assert!(empirical_rate(&a, &b, &id, (3.0, 1.0)).is_err());
    }

    #[test]
    fn scalar_pd_pair_decays_faster_than_certificate() {
        let p = scalar();
        let cert = certify(&p, Some(0.4)).unwrap();
        let field = pd_vector_field(&p);
        let a = integrate(&field, &[0.0, 0.0], 0.0, 30.0, 1e-3).unwrap();
        let b = integrate(&field, &[1.0, 1.0], 0.0, 30.0, 1e-3).unwrap();
        let rate = empirical_rate(&a, &b, &cert.theta, (0.0, 30.0)).unwrap();
        assert!(rate >= 0.95 * cert.beta, "rate {rate} beta {}", cert.beta);
    }

    #[test]
    fn certificate_record_serializes() {
        let rec = certify(&scalar(), Some(0.4)).unwrap().record();
        let v = serde_json::to_value(&rec).unwrap();
        for key in ["alpha", "alpha_max", "beta", "theta", "q_form"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["theta"].as_array().unwrap().len(), 2);
    }
}
