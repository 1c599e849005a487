use std::f64::consts::PI;

use epd_core::complexfield::{c, CPoint, I};
use epd_core::critical::*;
use epd_core::epd::closed_form::{w1, w2, w3};
use epd_core::epd::{JetSource, SolutionSpec};
use epd_core::params::FlowLabel;
use epd_core::EpdError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn closed_root(x1: f64, x2: f64, y0: f64) -> CPoint {
    c(-x1 / (2.0 * x2), (y0 / x2).sqrt())
}

#[test]
fn monomial_roots_match_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let x1 = rng.random_range(-2.0..2.0);
        let x2 = rng.random_range(0.2..3.0);
        let y0 = rng.random_range(0.2..3.0);
        let spec = SolutionSpec::monomial(vec![x1, x2], vec![y0]);
        let expect = closed_root(x1, x2, y0);
        let cp = find_critical(&spec, expect + c(0.2, -0.1)).unwrap();
        assert!((cp.beta - expect).norm() < 1e-10);
        assert!(cp.wbmix.norm() < 1e-9);
        assert!((cp.beta_bar - cp.beta.conj()).norm() == 0.0);
    }
}

#[test]
fn clinants_of_real_spec_lie_on_unit_circle() {
    let spec = SolutionSpec::monomial(vec![0.3, 1.0, 0.4], vec![1.0]);
    let cp = find_critical(&spec, c(0.0, 1.0)).unwrap();
    let cl = clinants(&cp).unwrap();
    for v in &cl {
        assert!((v.norm() - 1.0).abs() < 1e-10);
    }
    let angles = tangent_angles(&cp).unwrap();
    assert!((angles[1] - angles[0] - PI / 2.0).abs() < 1e-10);
}

#[test]
fn variation_examples() {
    let spec = SolutionSpec::monomial(vec![1.0, 1.0], vec![1.0]);
    let cp = find_critical(&spec, c(0.0, 1.0)).unwrap();
    let eps = 1e-3;
    let (db, dbb) = vary_critical(&cp, &SolutionSpec::monomial(vec![eps], vec![])).unwrap();
    assert!((db - c(-eps / 2.0, 0.0)).norm() < 1e-13);
    assert!((dbb - db.conj()).norm() < 1e-13);
    let (db, _) = vary_critical(&cp, &SolutionSpec::monomial(vec![], vec![eps])).unwrap();
    assert!((db - c(0.0, eps / 2.0)).norm() < 1e-13);
}

#[test]
fn variation_is_first_order_accurate() {
    let spec = SolutionSpec::monomial(vec![0.2, 1.0, 0.3], vec![1.2, 0.0]);
    let cp = find_critical(&spec, c(0.0, 1.0)).unwrap();
    let err = |eps: f64| {
        let delta = SolutionSpec::monomial(vec![0.0, eps, -eps], vec![eps]);
        let (db, _) = vary_critical(&cp, &delta).unwrap();
        let moved = SolutionSpec::monomial(vec![0.2, 1.0 + eps, 0.3 - eps], vec![1.2 + eps]);
        let cp2 = find_critical(&moved, cp.beta).unwrap();
        (cp2.beta - cp.beta - db).norm()
    };
    let errs: Vec<f64> = [4e-3, 2e-3, 1e-3].iter().map(|&e| err(e)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{errs:?}");
    }
}

#[test]
fn exactness_asymmetry_is_second_order() {
    let spec = SolutionSpec::monomial(vec![0.3, 1.0, 0.2], vec![1.0]);
    let labels = [FlowLabel::x(1), FlowLabel::x(2), FlowLabel::x(3), FlowLabel::y(0)];
    let opts = CriticalOptions::default();
    let start = find_critical(&spec, c(0.0, 1.0)).unwrap();
    let coarse = exactness_check(&spec, &labels, &start, 0.02, &opts).unwrap();
    let fine = exactness_check(&spec, &labels, &start, 0.01, &opts).unwrap();
    let order = coarse.order_against(&fine);
    assert!((order - 2.0).abs() < 0.3, "{coarse:?} {fine:?}");

    let single = exactness_check(&spec, &labels[..1], &start, 0.02, &opts).unwrap();
    assert_eq!(single.max, 0.0);
}

#[test]
fn potential_is_single_valued_around_parameter_loops() {
    let spec = SolutionSpec::monomial(vec![0.3, 1.0, 0.2], vec![1.0]);
    let start = find_critical(&spec, c(0.0, 1.0)).unwrap();
    let opts = CriticalOptions::default();
    for pair in [(FlowLabel::x(1), FlowLabel::x(2)), (FlowLabel::x(2), FlowLabel::y(0))] {
        let gap = loop_closure(&spec, pair, 0.1, 64, &start, &opts).unwrap();
        assert!(gap <= 1e-8, "{pair:?}: {gap}");
    }
}

/// Coefficients (x₁, x₂, x₃, x₄, y₀) of a real solution with W_β = W_ββ = 0 at β = i.
fn degenerate_coefficients() -> Vec<f64> {
    let (b, bb) = (I, -I);
    let x4 = SolutionSpec::monomial(vec![0.0, 0.0, 0.0, 1.0], vec![]).jet(b, bb).unwrap();
    let d = b - bb;
    let cols = [
        (w1(b, bb).wz, w1(b, bb).wzz),
        (w2(b, bb).wz, w2(b, bb).wzz),
        (w3(b, bb).wz, w3(b, bb).wzz),
        (x4.wz, x4.wzz),
        (d.inv(), -(d * d).inv()),
    ];
    // Rows: Re/Im of W_β and W_ββ; fix y₀ = 1 and solve for the rest.
    let mut m = [[0.0f64; 5]; 4];
    for (j, (g, h)) in cols.iter().enumerate() {
        m[0][j] = g.re;
        m[1][j] = g.im;
        m[2][j] = h.re;
        m[3][j] = h.im;
    }
    let mut a = [[0.0f64; 5]; 4];
    for i in 0..4 {
        for j in 0..4 {
            a[i][j] = m[i][j];
        }
        a[i][4] = -m[i][4];
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
        a.swap(col, piv);
        for r in 0..4 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..5 {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut x: Vec<f64> = (0..4).map(|i| a[i][4] / a[i][i]).collect();
    x.push(1.0);
    x
}

#[test]
fn higher_order_point_is_classified() {
    let k = degenerate_coefficients();
    let spec = SolutionSpec::monomial(k[..4].to_vec(), vec![k[4]]);
    let err = find_critical(&spec, I).unwrap_err();
    assert!(matches!(err, EpdError::DegenerateHessian { order: 2, .. }), "{err:?}");

    let opts = CriticalOptions {
        allow_degenerate: true,
        ..Default::default()
    };
    let cp = find_critical_with(&spec, I, -I, &opts).unwrap();
    assert_eq!(cp.order, 2);
    let angles = tangent_angles(&cp).unwrap();
    assert_eq!(angles.len(), 3);
    for w in angles.windows(2) {
        assert!((w[1] - w[0] - PI / 3.0).abs() < 1e-9, "{angles:?}");
    }
}

#[test]
fn level_and_dual_curves_are_orthogonal() {
    let spec = SolutionSpec::monomial(vec![0.3, 1.0, 0.2], vec![1.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let z = c(rng.random_range(-1.5..1.5), rng.random_range(0.3..2.0));
        let angle = crossing_angle(&WLevel(&spec), &DualLevel::new(&spec, z), z, 1e-4).unwrap();
        assert!((angle - PI / 2.0).abs() < 1e-6, "{z}: {angle}");
    }
}

#[test]
fn double_point_arcs_meet_at_right_angles() {
    let spec = SolutionSpec::monomial(vec![0.3, 1.0, 0.2], vec![1.0]);
    let cp = find_critical(&spec, c(0.0, 1.0)).unwrap();
    let angle = double_point_angle(&WLevel(&spec), cp.beta, 1e-3).unwrap();
    assert!((angle - PI / 2.0).abs() < 1e-4, "{angle}");
}

#[test]
fn scan_picks_upper_root_nearest_guess() {
    let spec = SolutionSpec::monomial(vec![1.0, 1.0], vec![1.0]);
    let cp = scan_critical(
        &spec,
        c(-0.4, 0.9),
        c(-2.0, 0.2),
        c(2.0, 2.0),
        5,
        &CriticalOptions::default(),
    )
    .unwrap();
    assert!((cp.beta - c(-0.5, 1.0)).norm() < 1e-10);
}

#[test]
fn complex_spec_uses_independent_unknowns() {
    // y₁ ≠ 0 with the principal logarithm: W_z̄ ≠ conj(W_z), so β̄ is solved for separately.
    let spec = SolutionSpec::monomial(vec![0.0, 1.0], vec![1.0, 0.3]);
    assert!(!spec.is_real());
    let cp = find_critical(&spec, c(0.0, 1.0)).unwrap();
    let j = spec.jet(cp.beta, cp.beta_bar).unwrap();
    assert!(j.wz.norm() < 1e-12 && j.wzb.norm() < 1e-12);
}
