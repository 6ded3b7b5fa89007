use nalgebra::{DMatrix, Matrix6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trio_core::dynamics::{
    change_basis, mme_coefficients, propagate, squeezed_vacuum, Basis, GaussianState,
    MmeCoefficients,
};
use trio_core::lattice::{normal_modes, BathParams, SystemParams};
use trio_core::ns::{tuned_parameters, TuneTarget};

fn random_params(rng: &mut ChaCha8Rng, on_manifold: bool) -> SystemParams {
    loop {
        let w1 = 0.8 + rng.random::<f64>();
        let w3 = if on_manifold { w1 } else { 0.8 + rng.random::<f64>() };
        let w2 = 0.8 + rng.random::<f64>();
        let l = [
            0.5 * rng.random::<f64>() - 0.25,
            0.2 * rng.random::<f64>() - 0.1,
            0.5 * rng.random::<f64>() - 0.25,
        ];
        let p = SystemParams::from_frequencies([w1, w2, w3], l);
        let p = if on_manifold {
            match tuned_parameters(&p, TuneTarget::Omega2) {
                Ok(t) => t[0].params,
                Err(_) => continue,
            }
        } else {
            p
        };
        if normal_modes(&p).is_ok() {
            return p;
        }
    }
}

fn setup(p: &SystemParams, r: [f64; 3], temperature: f64) -> (GaussianState, MmeCoefficients) {
    let modes = normal_modes(p).unwrap();
    let bath = BathParams::new(temperature, 0.07, 50.0).unwrap();
    let c = mme_coefficients(&modes, &bath).unwrap();
    let s = change_basis(&squeezed_vacuum(p.omega_sq, r).unwrap(), &modes, Basis::Normal).unwrap();
    (s, c)
}

/// Classical fourth-order Runge-Kutta for dV/dt = AV + VAᵀ + Diff.
fn rk4(v0: &Matrix6<f64>, a: &Matrix6<f64>, d: &Matrix6<f64>, t_end: f64, dt: f64, out: &[f64]) -> Vec<Matrix6<f64>> {
    let f = |v: &Matrix6<f64>| a * v + v * a.transpose() + d;
    let mut v = *v0;
    let mut t = 0.0;
    let mut samples = Vec::new();
    let mut next = 0;
    let steps = (t_end / dt).round() as usize;
    for k in 0..=steps {
        while next < out.len() && (out[next] - t).abs() < 0.5 * dt {
            samples.push(v);
            next += 1;
        }
        if k == steps {
            break;
        }
        let k1 = f(&v);
        let k2 = f(&(v + k1 * (0.5 * dt)));
        let k3 = f(&(v + k2 * (0.5 * dt)));
        let k4 = f(&(v + k3 * dt));
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        t = (k + 1) as f64 * dt;
    }
    samples
}

#[test]
fn closed_form_matches_runge_kutta() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let out: Vec<f64> = (0..=10).map(|k| 10.0 * k as f64).collect();
    for case in 0..4 {
        let p = random_params(&mut rng, case % 2 == 0);
        let r = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        let (s, c) = setup(&p, r, 0.5 + 2.0 * rng.random::<f64>());
        let numeric = rk4(&s.cov, &c.drift_matrix(), &c.diffusion_matrix(), 100.0, 1e-3, &out);
        assert_eq!(numeric.len(), out.len());
        for (t, v) in out.iter().zip(&numeric) {
            let exact = propagate(&s, &c, *t).unwrap().cov;
            let err = (exact - v).amax();
            assert!(err < 1e-8, "case {case} t={t}: {err:e}");
        }
    }
}

#[test]
fn semigroup() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let on = rng.random::<bool>();
        let p = random_params(&mut rng, on);
        let (s, c) = setup(&p, [1.0, 0.5, 2.0], 3.0);
        let (t1, t2) = (50.0 * rng.random::<f64>(), 50.0 * rng.random::<f64>());
        let direct = propagate(&s, &c, t1 + t2).unwrap();
        let split = propagate(&propagate(&s, &c, t1).unwrap(), &c, t2).unwrap();
        let scale = direct.cov.amax().max(1.0);
        assert!((direct.cov - split.cov).amax() < 1e-10 * scale);
    }
}

#[test]
fn uncertainty_and_free_mode_purity() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let p = random_params(&mut rng, true);
        let (s, c) = setup(&p, [1.5, 0.2, 0.8], 0.0);
        let free: Vec<usize> = (0..3).filter(|&n| c.free[n]).collect();
        assert!(!free.is_empty());
        let det0: Vec<f64> = free.iter().map(|&n| s.single_mode_det(n)).collect();
        for k in 0..40 {
            let t = 5.0 * k as f64;
            let st = propagate(&s, &c, t).unwrap();
            assert!(st.is_physical(), "t={t}");
            for (&n, d0) in free.iter().zip(&det0) {
                assert!((st.single_mode_det(n) - d0).abs() < 1e-12 * d0.max(1.0));
            }
        }
    }
}

/// Eigenvalues of the Lyapunov generator V ↦ AV + VAᵀ are sums of drift
/// eigenvalues, `−(Γi+Γj)/2 ± i|Ωi ± Ωj|`.
#[test]
fn second_moment_spectrum() {
    let p = SystemParams::new([1.1, 1.7, 2.3], [0.2, 0.1, 0.3]);
    let (_, c) = setup(&p, [0.0; 3], 1.0);
    let a = c.drift_matrix();
    let mut gen = DMatrix::<f64>::zeros(36, 36);
    for col in 0..36 {
        let mut e = Matrix6::zeros();
        e[(col % 6, col / 6)] = 1.0;
        let image = a * e + e * a.transpose();
        for row in 0..36 {
            gen[(row, col)] = image[(row % 6, row / 6)];
        }
    }
    let eig = gen.complex_eigenvalues();
    let mut expected = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            let re = -(c.gamma[i] + c.gamma[j]) / 2.0;
            for s in [1.0, -1.0] {
                for im in [c.omega[i] + c.omega[j], c.omega[i] - c.omega[j]] {
                    expected.push((re, s * im));
                }
            }
        }
    }
    for z in eig.iter() {
        let best = expected
            .iter()
            .map(|(re, im)| ((z.re - re).powi(2) + (z.im - im).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-8, "unexpected eigenvalue {z}");
    }
}

#[test]
fn relaxes_to_gibbs_state() {
    let p = SystemParams::new([1.1, 1.7, 2.3], [0.2, 0.1, 0.3]);
    let temperature = 2.0;
    let (s, c) = setup(&p, [0.3, 0.1, 0.2], temperature);
    let t = 20.0 / c.gamma_min().unwrap();
    let st = propagate(&s, &c, t).unwrap();
    for n in 0..3 {
        let w = c.omega[n];
        let coth = 1.0 / (w / (2.0 * temperature)).tanh();
        assert!((st.cov[(n, n)] - coth / (2.0 * w)).abs() < 1e-8);
        assert!((st.cov[(n + 3, n + 3)] - w * coth / 2.0).abs() < 1e-8);
    }
    for i in 0..6 {
        for j in 0..6 {
            if i != j {
                assert!(st.cov[(i, j)].abs() < 1e-8);
            }
        }
    }
}
