use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trio_core::asymptotics::{
    asymptotic_extremes, critical_squeezings, one_mode_entanglement, one_mode_nu,
    phase_classify, sigma_coefficients, two_mode_nu, AsymptoticModel, OneModeNsSpec, Phase,
    TwoModeNsSpec,
};
use trio_core::correlations::{min_symplectic_eig, reduce_pair};
use trio_core::dynamics::{change_basis, mme_coefficients, propagate, squeezed_vacuum, Basis};
use trio_core::lattice::{normal_modes, BathParams};

fn reference_chain() -> OneModeNsSpec {
    OneModeNsSpec::new(1.0, 1.2, 0.6).unwrap()
}

#[test]
fn one_mode_closed_form_matches_direct_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let spec = OneModeNsSpec::new(
            0.8 + rng.random::<f64>(),
            0.8 + rng.random::<f64>(),
            0.1 + 0.3 * rng.random::<f64>(),
        )
        .unwrap();
        let r = 1.5 * rng.random::<f64>();
        let temperature = 5.0 * rng.random::<f64>();
        let model = AsymptoticModel::new(&spec.params(), [r; 3], temperature).unwrap();
        assert_eq!(model.free_modes().len(), 1);
        for _ in 0..10 {
            let t = 100.0 * rng.random::<f64>();
            let direct = min_symplectic_eig(&reduce_pair_at(&model, t)).unwrap();
            let closed = one_mode_nu(&spec, r, temperature, t);
            assert!((direct - closed).abs() < 1e-10 * closed.max(1.0), "{direct} vs {closed}");
        }
    }
}

fn reduce_pair_at(model: &AsymptoticModel, t: f64) -> trio_core::correlations::PairCovariance {
    let angles: Vec<f64> = model.free_modes().iter().map(|&n| model.modes.omega[n] * t).collect();
    model.pair_at_angles(1, 3, &angles).unwrap()
}

#[test]
fn one_mode_closed_form_matches_weak_damping_dynamics() {
    let spec = reference_chain();
    let (r, temperature) = (0.4, 0.5);
    let params = spec.params();
    let modes = normal_modes(&params).unwrap();
    let bath = BathParams::new(temperature, 0.01, 50.0).unwrap();
    let coeffs = mme_coefficients(&modes, &bath).unwrap();
    let s0 = change_basis(&squeezed_vacuum(params.omega_sq, [r; 3]).unwrap(), &modes, Basis::Normal).unwrap();
    let t_late = 30.0 / coeffs.gamma_min().unwrap();
    for k in 0..20 {
        let t = t_late + 0.17 * k as f64;
        let st = change_basis(&propagate(&s0, &coeffs, t).unwrap(), &modes, Basis::Natural).unwrap();
        let nu = min_symplectic_eig(&reduce_pair(&st, 1, 3).unwrap()).unwrap();
        let closed = one_mode_nu(&spec, r, temperature, t);
        assert!((nu - closed).abs() / closed < 0.02, "t={t}: {nu} vs {closed}");
    }
}

/// The damped modes reach the Gibbs state, so the virtual coordinate
/// `(q1 + q3)/√2` carries `⟨Q²⟩ = 2λ²σ_Q/ω` and `⟨P²⟩ = 2λ²ωσ_P`.
#[test]
fn sigma_coefficients_from_virtual_oscillator() {
    let spec = reference_chain();
    let params = spec.params();
    let modes = normal_modes(&params).unwrap();
    for temperature in [0.0, 0.3, 2.0, 10.0] {
        let bath = BathParams::new(temperature, 0.07, 50.0).unwrap();
        let coeffs = mme_coefficients(&modes, &bath).unwrap();
        let s0 = change_basis(&squeezed_vacuum(params.omega_sq, [0.7; 3]).unwrap(), &modes, Basis::Normal).unwrap();
        let t = 40.0 / coeffs.gamma_min().unwrap();
        let st = change_basis(&propagate(&s0, &coeffs, t).unwrap(), &modes, Basis::Natural).unwrap();
        let q = 0.5 * (st.cov[(0, 0)] + st.cov[(2, 2)] + 2.0 * st.cov[(0, 2)]);
        let p = 0.5 * (st.cov[(3, 3)] + st.cov[(5, 5)] + 2.0 * st.cov[(3, 5)]);
        let (sq, sp) = sigma_coefficients(&spec, temperature);
        let l2 = 2.0 * spec.lambda * spec.lambda;
        assert!((q - l2 * sq / spec.omega).abs() < 1e-9, "T={temperature}");
        assert!((p - l2 * spec.omega * sp).abs() < 1e-9, "T={temperature}");
    }
}

#[test]
fn critical_squeezings_at_zero_temperature() {
    let c = critical_squeezings(&reference_chain(), 0.0);
    assert!((c.r0_plus - 0.141084).abs() < 1e-6);
    assert!((c.r0_minus - 0.047801).abs() < 1e-6);
    assert!((c.r_c - 0.047221).abs() < 1e-6);
    assert_eq!(4.0 * c.r_c, c.r0_plus + c.r0_minus);
}

#[test]
fn r0_plus_exceeds_r0_minus() {
    for i in 0..50 {
        let omega2 = 0.6 + 1.2 * i as f64 / 49.0;
        let Ok(spec) = OneModeNsSpec::new(1.0, omega2, 0.3) else { continue };
        for j in 0..50 {
            let c = critical_squeezings(&spec, 10f64.powf(-2.0 + 5.0 * j as f64 / 49.0));
            assert!(c.r0_plus > c.r0_minus);
        }
    }
}

#[test]
fn r0_plus_grows_as_half_log_temperature() {
    let spec = reference_chain();
    let xs: Vec<f64> = (0..40).map(|k| (50f64).ln() + (100f64).ln() * k as f64 / 39.0).collect();
    let ys: Vec<f64> = xs.iter().map(|x| critical_squeezings(&spec, x.exp()).r0_plus).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    assert!((sxy / sxx - 0.5).abs() < 0.01);
}

#[test]
fn swing_saturates_at_high_temperature() {
    let spec = reference_chain();
    let s = spec.shapes();
    let limit = 0.25
        * (spec.omega.powi(2) * (s.c_plus_sq / s.omega_plus.powi(2) + s.c_minus_sq / s.omega_minus.powi(2))
            / (s.c_plus_sq + s.c_minus_sq))
            .ln();
    let e = one_mode_entanglement(&spec, 20.0, 1e3, 0.0);
    assert!((e.delta_e - limit).abs() < 0.01 * limit.abs());
}

#[test]
fn extremes_match_torus_search() {
    let spec = reference_chain();
    for temperature in [0.0, 0.5, 3.0] {
        for r in [0.0, 0.02, 0.1, 0.5, 1.0] {
            let e = one_mode_entanglement(&spec, r, temperature, 0.0);
            let (e0, de) = asymptotic_extremes(&spec.params(), [r; 3], temperature, (1, 3)).unwrap();
            assert!((e.e0 - e0).abs() < 1e-8, "T={temperature} r={r}");
            assert!((e.delta_e - de).abs() < 1e-8);
        }
    }
}

#[test]
fn fig2_phases() {
    let spec = reference_chain();
    let e = one_mode_entanglement(&spec, 0.0, 0.0, 0.0);
    assert!((e.e0 - 0.047801).abs() < 1e-6);
    assert_eq!(phase_classify(e.e0, e.delta_e), Phase::NoSuddenDeath);
    let e = one_mode_entanglement(&spec, 0.0, 20.0, 0.0);
    assert_eq!(phase_classify(e.e0, e.delta_e), Phase::SuddenDeath);
    let c = critical_squeezings(&spec, 5.0);
    let e = one_mode_entanglement(&spec, c.r0_plus + 0.01, 5.0, 0.0);
    assert_eq!(phase_classify(e.e0, e.delta_e), Phase::NoSuddenDeath);
}

#[test]
fn two_mode_closed_form_matches_direct_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut cases = 0;
    while cases < 10 {
        let Ok(spec) = TwoModeNsSpec::new(0.9 + 0.6 * rng.random::<f64>(), 0.9 + 0.6 * rng.random::<f64>()) else { continue };
        let Ok(model) = AsymptoticModel::new(&spec.params(), [0.0; 3], 0.0) else { continue };
        assert_eq!(model.free_modes().len(), 2);
        let r = 1.2 * rng.random::<f64>();
        let temperature = 3.0 * rng.random::<f64>();
        let model = AsymptoticModel::new(&spec.params(), [r; 3], temperature).unwrap();
        for _ in 0..50 {
            let t = 200.0 * rng.random::<f64>();
            let direct = min_symplectic_eig(&reduce_pair_at(&model, t)).unwrap();
            let closed = two_mode_nu(&spec, r, temperature, t).unwrap();
            assert!((direct - closed).abs() < 1e-9 * closed.max(1.0), "{direct} vs {closed}");
        }
        cases += 1;
    }
}

#[test]
fn two_mode_cold_unsqueezed_is_nsd() {
    let spec = TwoModeNsSpec::new(1.3, 1.0).unwrap();
    let (e0, de) = asymptotic_extremes(&spec.params(), [0.0; 3], 0.01, (1, 3)).unwrap();
    assert_eq!(phase_classify(e0, de), Phase::NoSuddenDeath);
    assert!(TwoModeNsSpec::new(2.0, 1.0).is_err());
}
