use pdcontract::contraction::certify;
use pdcontract::dynamics::{integrate, observer_augmented_field, augmented_initial_state};
use pdcontract::matrixcore::{norm2, sub_vec};
use pdcontract::robustness::{run_observer_bounds, BoundId, ObserverRunSpec};
use pdcontract::{make_quadratic_problem, pd_vector_field, Matrix, ObserverConfig, Signal, VectorSignal};

fn sinusoidal_problem() -> pdcontract::Problem {
    make_quadratic_problem(
        Matrix::from_rows(vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap(),
        vec![0.1, -0.2],
        Matrix::from_rows(vec![vec![1.0, -1.0]]).unwrap(),
        VectorSignal::new(vec![Signal::sinusoid(0.5, 1.0, 0.3)]),
    )
    .unwrap()
}

fn theta_norm(theta: &Matrix, a: &[f64], b: &[f64]) -> f64 {
    norm2(&theta.matvec(&sub_vec(a, b)).unwrap())
}

// Integrated form of the differential inequality over one step:
// r(t+h) ≤ e^{−βh} r(t) + (1 − e^{−βh})/β · max‖w‖ on [t, t+h].
fn check_step(r0: f64, r1: f64, beta: f64, h: f64, drive: f64) -> bool {
    let decay = (-beta * h).exp();
    r1 <= decay * r0 + (1.0 - decay) / beta * drive + 10.0 * h.powi(4) + 1e-13
}

#[test]
fn distance_to_moving_optimum_obeys_differential_inequality() {
    let p = sinusoidal_problem();
    let cert = certify(&p, None).unwrap();
    let h = 1e-2;
    let traj = integrate(&pd_vector_field(&p), &[1.0, -1.0, 0.5], 0.0, 20.0, h).unwrap();
    let rate = |t: f64| p.optimum_rate(t, 1e-5, Some(&cert.theta)).unwrap();
    let r: Vec<f64> = traj
        .times()
        .iter()
        .zip(traj.states())
        .map(|(&t, z)| theta_norm(&cert.theta, z, &p.instantaneous_optimum(t).unwrap().to_vec()))
        .collect();
    for k in 0..traj.len() - 1 {
        let t = traj.times()[k];
        let drive = rate(t).max(rate(t + h / 2.0)).max(rate(t + h));
        assert!(check_step(r[k], r[k + 1], cert.beta, h, drive), "violated at t = {t}");
    }
}

#[test]
fn observer_perturbed_distance_obeys_differential_inequality() {
    let p = sinusoidal_problem();
    let cert = certify(&p, None).unwrap();
    let obs = ObserverConfig::lag_for(3, vec![2], 0.05).unwrap();
    let h = 1e-2;
    let z0 = [1.0, -1.0, 0.5];
    let aug = integrate(&observer_augmented_field(&p, &obs).unwrap(), &augmented_initial_state(&z0, &obs), 0.0, 20.0, h)
        .unwrap();
    let pd = integrate(&pd_vector_field(&p), &z0, 0.0, 20.0, h).unwrap();
    let f = pd_vector_field(&p);
    // ‖d‖_Θ with d = f(ẑ) − f(z); on a step take the max over the endpoints plus
    // a first-order allowance for its variation
    let d_norm = |w: &[f64], t: f64| {
        let z = &w[..3];
        let zhat = obs.splice(z, &w[3..]);
        theta_norm(&cert.theta, &f.eval(&zhat, t), &f.eval(z, t))
    };
    for k in 0..aug.len() - 1 {
        let (t0, t1) = (aug.times()[k], aug.times()[k + 1]);
        let (w0, w1) = (&aug.states()[k], &aug.states()[k + 1]);
        let d0 = d_norm(w0, t0);
        let d1 = d_norm(w1, t1);
        let drive = d0.max(d1) + (d1 - d0).abs();
        let r0 = theta_norm(&cert.theta, &w0[..3], &pd.states()[k]);
        let r1 = theta_norm(&cert.theta, &w1[..3], &pd.states()[k + 1]);
        assert!(check_step(r0, r1, cert.beta, h, drive), "violated at t = {t0}");
    }
}

#[test]
fn scalar_observer_run_satisfies_every_bound() {
    let p = make_quadratic_problem(
        Matrix::identity(1),
        vec![0.0],
        Matrix::identity(1),
        VectorSignal::new(vec![Signal::sinusoid(0.2, 0.5, 0.0)]),
    )
    .unwrap();
    let cert = certify(&p, None).unwrap();
    let obs = ObserverConfig::lag_for(2, vec![1], 0.05).unwrap();
    let spec = ObserverRunSpec {
        z0: vec![0.0, 0.0],
        t0: 0.0,
        t1: 60.0,
        step: 1e-3,
        cutoff: None,
        samples: 1,
        seed: 0,
        domain: None,
    };
    let run = run_observer_bounds(&p, &cert, &obs, &spec).unwrap();
    for r in &run.reports {
        assert!(r.satisfied, "{r:?}");
    }
    assert!(run.report(BoundId::Thm1TrackingObserver).is_some());
}
