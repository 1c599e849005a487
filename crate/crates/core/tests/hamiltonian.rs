use std::f64::consts::PI;
use std::sync::Arc;

use epd_core::hamiltonian::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const L: f64 = 2.0 * PI;

fn smooth_state() -> FieldState {
    FieldState::sample(64, L, |x| 2.0 + x.sin(), |x| (2.0 * x).cos()).unwrap()
}

fn random_state(seed: u64) -> FieldState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b, p): (f64, f64, f64) = (rng.random_range(0.1..0.9), rng.random_range(-1.0..1.0), rng.random_range(0.0..L));
    let k = rng.random_range(1..4) as f64;
    FieldState::sample(64, L, |x| 1.0 + a * (x + p).cos(), |x| b * (k * x).sin() + 0.3).unwrap()
}

fn xs(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| j as f64 * L / n as f64)
}

#[test]
fn gradients() {
    let s = smooth_state();
    let (gr, gu) = grad(&Functional::CasimirU, &s).unwrap();
    assert!(gr.iter().all(|&v| v == 0.0) && gu.iter().all(|&v| v == 1.0));

    let (gr, gu) = grad(&Functional::H1Toda, &s).unwrap();
    for j in 0..s.n() {
        assert_eq!(gr[j], -s.rho[j].ln());
        assert_eq!(gu[j], s.u[j]);
    }

    let (gr, gu) = grad(&Functional::DNLSEnergy, &s).unwrap();
    let custom = Functional::Custom(Arc::new(|r, u| r * u * u / 2.0 - r * r / 2.0));
    let (cr, cu) = grad(&custom, &s).unwrap();
    for j in 0..s.n() {
        let (r, u) = (s.rho[j], s.u[j]);
        assert!((gr[j] - (u * u / 2.0 - r)).abs() < 1e-15);
        assert!((gu[j] - r * u).abs() < 1e-15);
        assert!((cr[j] - gr[j]).abs() < 1e-9 && (cu[j] - gu[j]).abs() < 1e-9);
    }
}

#[test]
fn u_is_a_common_casimir() {
    let s = random_state(5);
    let g = grad(&Functional::CasimirU, &s).unwrap();
    for op in [Operator::J0, Operator::J1] {
        for m in [Differencing::Spectral, Differencing::Central4] {
            let (a, b) = apply(op, &g, &s, m).unwrap();
            let worst = a.iter().chain(&b).fold(0.0f64, |w, v| w.max(v.abs()));
            assert!(worst < 1e-13, "{op:?} {m:?}: {worst}");
        }
    }
    // J1^ε is not resonant: u is no longer a Casimir.
    let (a, _) = apply(Operator::J1Eps(0.1), &g, &s, Differencing::Spectral).unwrap();
    assert!(a.iter().any(|v| v.abs() > 1e-3));
}

#[test]
fn j0_of_dnls_energy_is_the_dnls_system() {
    let s = smooth_state();
    let (rt, ut) = hamiltonian_flow(Operator::J0, &Functional::DNLSEnergy, &s, Differencing::Spectral).unwrap();
    for (j, x) in xs(s.n()).enumerate() {
        let (r, rx) = (2.0 + x.sin(), x.cos());
        let (u, ux) = ((2.0 * x).cos(), -2.0 * (2.0 * x).sin());
        assert!((rt[j] - (rx * u + r * ux)).abs() < 1e-11);
        assert!((ut[j] - (u * ux - rx)).abs() < 1e-11);
    }
}

#[test]
fn j1_matches_the_expanded_operator() {
    let s = smooth_state();
    // g = (sin x, cos x)
    let g: Pair = (xs(64).map(f64::sin).collect(), xs(64).map(f64::cos).collect());
    let (a, b) = apply(Operator::J1, &g, &s, Differencing::Spectral).unwrap();
    for (j, x) in xs(64).enumerate() {
        let (r, rx) = (2.0 + x.sin(), x.cos());
        let (u, ux) = ((2.0 * x).cos(), -2.0 * (2.0 * x).sin());
        let (gr, grx, gux) = (x.sin(), x.cos(), -x.sin());
        let top = 2.0 * r * grx + rx * gr + u * gux;
        let bottom = ux * gr + u * grx - 2.0 * gux;
        assert!((a[j] - top).abs() < 1e-11 && (b[j] - bottom).abs() < 1e-11);
    }
}

#[test]
fn poisson_limit_is_first_order() {
    let s = random_state(9);
    let eps = [0.1, 0.05, 0.025, 0.0125];
    let lf = limit_flow(&s, &eps, Differencing::Spectral).unwrap();
    for o in &lf.orders {
        assert!((o - 1.0).abs() < 0.1, "{:?}", lf.orders);
    }
    // the limit is the dToda flow J0 ∇H₁
    let toda = hamiltonian_flow(Operator::J0, &Functional::H1Toda, &s, Differencing::Spectral).unwrap();
    assert!(max_diff(&toda.0, &lf.reference.0) < 1e-12);
    assert!(max_diff(&toda.1, &lf.reference.1) < 1e-12);
}

#[test]
fn constant_density_limit_is_exact() {
    let s = FieldState::sample(32, L, |_| 1.7, |x| x.sin()).unwrap();
    let lf = limit_flow(&s, &[0.1, 0.05], Differencing::Spectral).unwrap();
    assert!(lf.errors.iter().all(|&e| e < 1e-13), "{:?}", lf.errors);
}

#[test]
fn toda_flow_on_random_states() {
    for seed in 0..10 {
        let s = random_state(seed);
        let (a, b) = hamiltonian_flow(Operator::J0, &Functional::H1Toda, &s, Differencing::Spectral).unwrap();
        let (ra, rb) = limit_reference(&s, Differencing::Spectral);
        assert!(max_diff(&a, &ra) <= 1e-12 && max_diff(&b, &rb) <= 1e-12);
    }
}

#[test]
fn operators_are_skew() {
    let s = random_state(1);
    for (op, tol) in [
        (Operator::J0, 1e-12),
        (Operator::J1, 1e-10),
        (Operator::J1Eps(0.1), 1e-10),
    ] {
        for m in [Differencing::Spectral, Differencing::Central4] {
            let r = skew_check(op, &s, 8, 42, m).unwrap();
            assert!(r.passes(tol), "{op:?} {m:?}: {r:?}");
        }
    }
}

#[test]
fn flows_conserve_mass_and_momentum() {
    let s = random_state(3);
    for (f, op) in [
        (Functional::H1Toda, Operator::J0),
        (Functional::DNLSEnergy, Operator::J0),
        (Functional::CasimirU, Operator::J1Eps(0.2)),
    ] {
        // These flows are elliptic, so only a short run is meaningful.
        let dt = cfl_step(&s, 0.1);
        let end = evolve(&s, &f, op, dt, 10, Differencing::Spectral).unwrap();
        let (m0, p0) = s.integrals();
        let (m1, p1) = end.integrals();
        assert!((m1 - m0).abs() < 1e-12 * m0.abs(), "{f:?}");
        assert!((p1 - p0).abs() < 1e-12 * p0.abs().max(1.0), "{f:?}");
        assert!(max_diff(&end.u, &s.u) > 1e-6, "{f:?} did not move");
    }
}

#[test]
fn invalid_inputs() {
    let s = smooth_state();
    assert!(limit_flow(&s, &[0.1, 0.2], Differencing::Spectral).is_err());
    assert!(apply(Operator::J1Eps(0.0), &(vec![0.0; 64], vec![0.0; 64]), &s, Differencing::Spectral).is_err());
    assert!(apply(Operator::J0, &(vec![0.0; 3], vec![0.0; 3]), &s, Differencing::Spectral).is_err());
}

#[test]
fn csv_round_trip() {
    let s = random_state(2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.csv");
    s.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
    let back = FieldState::read_csv(&path).unwrap();
    assert_eq!(back.rho, s.rho);
    assert_eq!(back.u, s.u);
    assert!((back.length - s.length).abs() < 1e-12);
}
