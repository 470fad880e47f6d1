use serf_core::collisions::{mc_coherence_decay, McConfig, Scheme};
use serf_core::config::{parse_params, to_config_string};
use serf_core::dark_state::{bloch_from_state, solve_quasi_dark_state, storage_map};
use serf_core::params::CesiumParams;
use serf_core::phase::{uniform_grid, wrap_pi};
use serf_core::retrieval::{retrieval_map, retrieved_field_numeric, susceptibility_tensor};

fn matched_params() -> CesiumParams {
    let p = CesiumParams::default();
    CesiumParams {
        f_cs: p.a_cs * p.b_cs,
        ..p
    }
}

#[test]
fn diagonalised_storage_then_retrieval_matches_closed_form() {
    let p = matched_params();
    let eps = p.gamma_over_delta();
    for phi in uniform_grid(16) {
        let state = solve_quasi_dark_state(1e-5, phi, 1e-2 * p.gamma, &p).unwrap();
        let stored = bloch_from_state(&state).unwrap();
        let analytic = storage_map(1e-5, phi, p.alpha()).unwrap();
        assert!((stored.eta_a / analytic.eta_a - 1.0).abs() < 5.0 * eps * eps, "{phi}");
        assert!(wrap_pi(stored.phi_a - analytic.phi_a).abs() < 5.0 * eps * eps, "{phi}");

        let light = retrieved_field_numeric(&susceptibility_tensor(&stored, &p)).unwrap();
        let (eta, out) = retrieval_map(stored.eta_a, stored.phi_a, p.alpha()).unwrap();
        assert!(
            (light.eta_l / eta - 1.0).abs() < 5.0 * eps * eps + 1e-4,
            "{phi}: {} vs {eta}",
            light.eta_l
        );
        assert!(wrap_pi(light.phi_l - out).abs() < 5.0 * eps * eps + 1e-4, "{phi}");
    }
}

#[test]
fn config_text_drives_the_maps() {
    let p = parse_params("[cesium]\ndelta_hz = 2200e6\n").unwrap();
    assert!((p.alpha() - CesiumParams::default().alpha() / 2.0).abs() < 1e-15);
    let again = parse_params(&to_config_string(&p)).unwrap();
    assert_eq!(again, p);
    let a = storage_map(1e-3, 0.4, p.alpha()).unwrap();
    let b = storage_map(1e-3, 0.4, again.alpha()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn monte_carlo_traces_are_seed_determined() {
    let p = CesiumParams::default();
    let run = |seed| mc_coherence_decay(&McConfig::new(Scheme::DeltaM1, 400.0, 0.02, 30, 1e-2, seed), &p).unwrap();
    let (a, b, c) = (run(3), run(3), run(4));
    assert_eq!(a.trace, b.trace);
    assert_ne!(a.collisions, 0);
    assert!(a.trace != c.trace || a.collisions != c.collisions);
    assert_eq!(a.trace.len(), 101);
    assert_eq!(a.trace[0].0, 0.0);
    assert!((a.trace[100].0 - 0.02).abs() < 1e-15);
}

#[test]
fn delta_m2_lifetime_halves_when_collision_rate_doubles() {
    let p = CesiumParams::default();
    let tau = |r: f64| {
        mc_coherence_decay(&McConfig::new(Scheme::DeltaM2, r, 0.05, 100, 1e-2, 9), &p)
            .unwrap()
            .fit
            .unwrap()
            .tau_s
    };
    let ratio = tau(500.0) / tau(1000.0);
    assert!((ratio / 2.0 - 1.0).abs() < 0.15, "{ratio}");
}

#[test]
fn delta_m1_survives_collisions() {
    let p = CesiumParams::default();
    let out = mc_coherence_decay(&McConfig::new(Scheme::DeltaM1, 1000.0, 0.1, 100, 1e-2, 1), &p).unwrap();
    let fit = out.fit.unwrap();
    assert!(fit.rate.abs() < 1e-2 * 1000.0);
    let drop = 1.0 - out.trace.last().unwrap().1 / out.trace[0].1;
    assert!(drop < 1e-3, "{drop}");
}
