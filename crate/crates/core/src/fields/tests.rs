use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;

fn grid(k: usize, n: usize, r: f64) -> Arc<Grid> {
    build_grid(k, n, r, -0.5).unwrap()
}

fn gauss(grid: &Arc<Grid>, amp: f64, x0: f64, y0: f64, w: f64) -> ScalarField {
    sample_analytic(&AnalyticSpec::new(vec![GaussBump { amp, x0, y0, w }]), grid).unwrap()
}

#[test]
fn zero_amplitude_samples_to_zero() {
    let g = grid(8, 128, 30.0);
    assert_eq!(gauss(&g, 0.0, 0.3, 0.0, 1.0).max_abs_coefficient(), 0.0);
}

#[test]
fn centered_gaussian_is_radial() {
    let g = grid(8, 256, 30.0);
    let f = gauss(&g, 1.0, 0.0, 0.0, 1.0);
    for k in 1..=8 {
        assert!(f
            .cos_mode(k)
            .iter()
            .chain(f.sin_mode(k))
            .all(|v| v.abs() < 1e-14));
    }
    assert!((f.cos_mode(0)[0] - 1.0).abs() < 1e-3);
    assert!((f.eval(0.0, 0.0) - 1.0).abs() < 1e-6);
}

#[test]
fn off_center_gaussian_integrates_to_pi() {
    let g = grid(16, 1024, 40.0);
    let f = gauss(&g, 1.0, 0.7, -0.4, 1.0);
    assert!((integrate(&f) - PI).abs() < 1e-5, "{}", integrate(&f));
}

#[test]
fn under_resolved_bump_is_rejected() {
    let g = grid(8, 32, 100.0);
    let spec = AnalyticSpec::new(vec![GaussBump::centered(1.0, 0.1)]);
    assert!(matches!(
        sample_analytic(&spec, &g),
        Err(crate::Error::UnresolvedSpec { .. })
    ));
}

#[test]
fn gradient_of_radial_gaussian() {
    let g = grid(8, 1024, 30.0);
    let f = ScalarField::radial(&g, |r| (-r * r).exp());
    let (fx, fy) = cartesian_gradient(&f);
    assert!((fx.eval(1.0, 0.0) + 2.0 * (-1.0f64).exp()).abs() < 1e-4);
    assert!(fy.eval(1.0, 0.0).abs() < 1e-12);
}

#[test]
fn gradient_of_x_gaussian() {
    let g = grid(8, 1024, 30.0);
    // x e^{-r²} = r e^{-r²} cos θ
    let f = ScalarField::zeros(&g).with_mode(1, |r| (r * (-r * r).exp(), 0.0));
    let (_, fy) = cartesian_gradient(&f);
    for &(x, y) in &[(0.8f64, 0.5), (-0.3, 1.1), (1.5, -0.2)] {
        let exact = -2.0 * x * y * (-(x * x + y * y)).exp();
        assert!((fy.eval(x, y) - exact).abs() < 2e-5, "({x},{y})");
    }
    for &x in &[0.5, 1.0, 2.0] {
        assert!(fy.eval(x, 0.0).abs() < 1e-12);
    }
}

#[test]
fn mixed_partials_commute() {
    let g = grid(12, 512, 30.0);
    let f = gauss(&g, 1.0, 0.5, 0.3, 1.0);
    let (fx, fy) = cartesian_gradient(&f);
    let (_, fxy) = cartesian_gradient(&fx);
    let (fyx, _) = cartesian_gradient(&fy);
    let rel = weighted_l2(&(&fxy - &fyx), 0.0) / weighted_l2(&fxy, 0.0);
    assert!(rel < 1e-3, "{rel:.3e}");
}

#[test]
fn gradient_converges_at_second_order() {
    let spec = AnalyticSpec::new(vec![GaussBump {
        amp: 1.0,
        x0: 0.6,
        y0: -0.2,
        w: 1.0,
    }]);
    let err = |n: usize| {
        let g = grid(16, n, 20.0);
        let (fx, fy) = cartesian_gradient(&sample_analytic(&spec, &g).unwrap());
        let mut worst = 0.0f64;
        for &(x, y) in &[(0.3, 0.2), (1.0, -0.5), (-0.7, 0.9), (2.0, 0.4)] {
            let (ex, ey) = spec.gradient(x, y);
            worst = worst
                .max((fx.eval(x, y) - ex).abs())
                .max((fy.eval(x, y) - ey).abs());
        }
        worst
    };
    let (e1, e2) = (err(128), err(256));
    let order = (e1 / e2).log2();
    assert!(
        (order - 2.0).abs() <= 0.3,
        "order {order} ({e1:.3e}, {e2:.3e})"
    );
}

#[test]
fn product_to_sum_identity() {
    let g = grid(8, 256, 30.0);
    let f = ScalarField::zeros(&g).with_mode(1, |r| ((-r * r).exp(), 0.0));
    let p = multiply(&f, &f).unwrap();
    let expect = ScalarField::radial(&g, |r| 0.5 * (-2.0 * r * r).exp())
        .with_mode(2, |r| (0.5 * (-2.0 * r * r).exp(), 0.0));
    assert!((&p - &expect).max_abs_coefficient() < 1e-15);
    assert_eq!(
        multiply(&f, &ScalarField::zeros(&g))
            .unwrap()
            .max_abs_coefficient(),
        0.0
    );
}

#[test]
fn multiply_rejects_grid_mismatch() {
    let a = ScalarField::zeros(&grid(8, 64, 30.0));
    let b = ScalarField::zeros(&grid(8, 128, 30.0));
    assert_eq!(multiply(&a, &b).unwrap_err(), crate::Error::GridMismatch);
}

#[test]
fn integrals_of_cutoff_profiles() {
    let g = grid(8, 2048, 30.0);
    let f = ScalarField::zeros(&g).with_mode(1, |r| (chi_prime(r) / r, 0.0));
    assert_eq!(integrate(&f), 0.0);
    let f0 = ScalarField::radial(&g, |r| chi_prime(r) / (4.0 * r));
    assert!(
        (integrate(&f0) - PI / 2.0).abs() < 1e-6,
        "{}",
        integrate(&f0)
    );
    let gauss = ScalarField::radial(&g, |r| (-r * r).exp());
    assert!((integrate(&gauss) - PI).abs() < 1e-6);
}

#[test]
fn weighted_norm_basics() {
    let g = grid(8, 256, 30.0);
    assert_eq!(
        weighted_sobolev_norm(&ScalarField::zeros(&g), 2, -0.5).unwrap(),
        0.0
    );
    assert_eq!(
        weighted_sobolev_norm(&ScalarField::zeros(&g), 3, -0.5).unwrap_err(),
        crate::Error::UnsupportedOrder(3)
    );
}

// refined composite Simpson in r: the oracle for the m = 0 weighted norm
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn weighted_norm_matches_radial_quadrature() {
    let g = build_grid(4, 16384, 10.0, -0.5).unwrap();
    let f = ScalarField::radial(&g, |r| (-r * r).exp());
    let got = weighted_sobolev_norm(&f, 0, -0.5).unwrap();
    let oracle = (2.0
        * PI
        * simpson(
            |r| (1.0 + r * r).powf(-0.5) * (-2.0 * r * r).exp() * r,
            0.0,
            10.0,
            200_000,
        ))
    .sqrt();
    assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
}

#[test]
fn embedding_constant_is_shared() {
    // sup |f| (1+|x|²)^{(δ+1)/2} ≤ C ‖f‖_{H²_δ} across a family of bumps
    let g = grid(16, 1024, 80.0);
    let delta = -0.5;
    let mut ratios = Vec::new();
    for &(x0, w) in &[
        (0.0, 0.7),
        (0.0, 1.0),
        (0.5, 1.5),
        (1.0, 2.0),
        (0.0, 4.0),
        (2.0, 3.0),
    ] {
        let f = gauss(&g, 1.0, x0, 0.0, w);
        let lhs = weighted_sup(&f, delta + 1.0);
        let rhs = weighted_sobolev_norm(&f, 2, delta).unwrap();
        ratios.push(lhs / rhs);
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(max < 1.0, "{ratios:?}");
}

#[test]
fn product_estimate_holds() {
    // ‖fg‖_{H⁰_δ} ≤ C ‖f‖_{H¹_{δ₁}} ‖g‖_{H¹_{δ₂}} with δ < δ₁+δ₂+1
    let g = grid(16, 1024, 80.0);
    let (d, d1, d2) = (0.5, -0.5, -0.5);
    let mut worst = 0.0f64;
    for &(x0, w) in &[(0.0, 1.0), (0.5, 1.5), (1.0, 3.0), (0.0, 5.0)] {
        let f = gauss(&g, 1.0, x0, 0.0, w);
        let h = gauss(&g, 1.0, -x0, 0.3, 0.5 * w + 0.5);
        let lhs = weighted_l2(&multiply(&f, &h).unwrap(), d);
        let rhs =
            weighted_sobolev_norm(&f, 1, d1).unwrap() * weighted_sobolev_norm(&h, 1, d2).unwrap();
        worst = worst.max(lhs / rhs);
    }
    assert!(worst < 1.0, "{worst}");
}

#[test]
fn weight_monotonicity_in_delta() {
    let g = grid(8, 256, 60.0);
    let f = gauss(&g, 1.0, 0.4, 0.1, 2.0);
    let mut prev = 0.0;
    for d in [-0.95, -0.7, -0.5, -0.2, -0.01] {
        let n = weighted_sobolev_norm(&f, 0, d).unwrap();
        assert!(n >= prev);
        prev = n;
    }
}

#[test]
fn complex_round_trip_is_exact() {
    let g = grid(6, 64, 20.0);
    let f = gauss(&g, 1.0, 0.4, 0.2, 1.0);
    let back = f.to_complex().re_part();
    assert!((&back - &f).max_abs_coefficient() < 1e-16);
    assert!(f.to_complex().im_part().max_abs_coefficient() < 1e-16);
}

fn low_mode_field(g: &Arc<Grid>, coeffs: &[(f64, f64, f64)]) -> ScalarField {
    let mut f = ScalarField::zeros(g);
    for (k, &(a, b, w)) in coeffs.iter().enumerate() {
        f.set_mode(k, |r| {
            let env = r.powi(k as i32) * (-r * r / (w * w)).exp();
            (a * env, b * env)
        });
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn parseval_consistency(coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0.5..2.0f64), 1..5)) {
        let g = grid(8, 128, 30.0);
        let f = low_mode_field(&g, &coeffs);
        let sq = integrate(&multiply(&f, &f).unwrap());
        let w = g.radial_weights();
        let energy: Vec<f64> = (0..g.n_r())
            .map(|i| {
                f.cos_mode(0)[i].powi(2)
                    + (1..=8)
                        .map(|k| 0.5 * (f.cos_mode(k)[i].powi(2) + f.sin_mode(k)[i].powi(2)))
                        .sum::<f64>()
            })
            .collect();
        let mut parseval: f64 = (0..g.n_r()).map(|i| w[i] * g.r()[i] * energy[i]).sum();
        parseval += g.origin_weight() * origin_value(&g, 0, &energy);
        parseval *= 2.0 * PI;
        prop_assert!(sq >= 0.0);
        prop_assert!((sq - parseval).abs() < 1e-10);
    }

    #[test]
    fn product_matches_fine_angular_oracle(
        a in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0.5..2.0f64), 1..4),
        b in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0.5..2.0f64), 1..4),
    ) {
        let g = grid(8, 64, 20.0);
        let f = low_mode_field(&g, &a);
        let h = low_mode_field(&g, &b);
        let p = multiply(&f, &h).unwrap();
        // 4× finer angular grid evaluation of the pointwise product
        let fine = AngularBasis::new(8, 128);
        for i in (0..g.n_r()).step_by(7) {
            let coeffs = |x: &ScalarField| -> (Vec<f64>, Vec<f64>) {
                ((0..=8).map(|k| x.cos_mode(k)[i]).collect(), (0..=8).map(|k| x.sin_mode(k)[i]).collect())
            };
            let mut fv = vec![0.0; 128];
            let mut hv = vec![0.0; 128];
            let mut pv = vec![0.0; 128];
            let (fa, fb) = coeffs(&f);
            let (ha, hb) = coeffs(&h);
            let (pa, pb) = coeffs(&p);
            fine.synthesize(&fa, &fb, &mut fv);
            fine.synthesize(&ha, &hb, &mut hv);
            fine.synthesize(&pa, &pb, &mut pv);
            for j in 0..128 {
                prop_assert!((fv[j] * hv[j] - pv[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_round_trip(coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0.5..2.0f64), 1..5)) {
        let g = grid(6, 32, 20.0);
        let f = low_mode_field(&g, &coeffs);
        let back = field_from_csv(&field_to_csv(&f), &g).unwrap();
        prop_assert_eq!(back, f);
    }
}
