use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::fields::{
    build_grid, cartesian_gradient, integrate, sample_analytic, AnalyticSpec, GaussBump, Grid,
};
use crate::momentum::assemble_momentum;
use proptest::prelude::*;

fn grid() -> Arc<Grid> {
    build_grid(12, 512, 60.0, -0.5).unwrap()
}

fn bump(g: &Arc<Grid>, amp: f64, x0: f64, y0: f64) -> ScalarField {
    sample_analytic(
        &AnalyticSpec::new(vec![GaussBump {
            amp,
            x0,
            y0,
            w: 1.0,
        }]),
        g,
    )
    .unwrap()
}

fn zero_state(g: &Arc<Grid>) -> (ScalarField, TracelessSymTensorField) {
    (ScalarField::zeros(g), TracelessSymTensorField::zeros(g))
}

#[test]
fn zero_data_selects_zero_charges() {
    let g = grid();
    let (lt, ht) = zero_state(&g);
    let (p, q) = solve_rho_eta(&SeedData::zero(&g), 0.0, &lt, &ht, 0.0).unwrap();
    assert_eq!((p, q), (0.0, 0.0));
}

#[test]
fn udot_grad_u_selects_one_over_pi_moment() {
    let g = grid();
    let (lt, ht) = zero_state(&g);
    let seed = SeedData::new(
        bump(&g, 0.1, 0.0, 0.0),
        bump(&g, 0.1, 0.5, 0.2),
        ScalarField::zeros(&g),
        0.0,
    )
    .unwrap();
    let (p, q) = solve_rho_eta(&seed, 0.0, &lt, &ht, 0.0).unwrap();
    let (ux, uy) = cartesian_gradient(&seed.u);
    let px = integrate(&multiply_fields(&seed.udot, &ux)) / PI;
    let qy = integrate(&multiply_fields(&seed.udot, &uy)) / PI;
    assert!(px.abs() > 1e-4);
    assert!((p - px).abs() < 1e-12 * px.abs().max(1.0), "{p} {px}");
    assert!((q - qy).abs() < 1e-12 * px.abs().max(1.0), "{q} {qy}");
}

fn multiply_fields(a: &ScalarField, b: &ScalarField) -> ScalarField {
    crate::fields::multiply(a, b).unwrap()
}

#[test]
fn selected_charges_are_a_fixed_point() {
    let g = grid();
    let seed = SeedData::new(
        bump(&g, 0.1, 0.0, 0.0),
        bump(&g, 0.1, 0.5, 0.2),
        bump(&g, 0.02, -0.3, 0.1),
        0.01,
    )
    .unwrap();
    let lt = ScalarField::radial(&g, |r| 0.01 / (1.0 + r * r).sqrt());
    let mut ht = TracelessSymTensorField::zeros(&g);
    ht.h12 = ScalarField::zeros(&g).with_mode(1, |r| (0.004 * r * (-r * r).exp(), 0.0));
    let (p, q) = solve_rho_eta(&seed, 0.03, &lt, &ht, seed.b).unwrap();
    let out = assemble_momentum(
        &seed,
        0.03,
        &lt,
        &ht,
        SingularTensorParams::new(seed.b, p, q),
    )
    .unwrap();
    let (mc, ms) = out.leading_vector();
    assert!((p + 4.0 * mc).abs() < 1e-10 && (q + 4.0 * ms).abs() < 1e-10);
}

#[test]
fn condition_number_of_known_matrices() {
    assert!((condition_number([[1.0, 0.0], [0.0, 1.0]]) - 1.0).abs() < 1e-15);
    assert!((condition_number([[3.0, 0.0], [0.0, -0.5]]) - 6.0).abs() < 1e-12);
    assert_eq!(condition_number([[1.0, 2.0], [2.0, 4.0]]), f64::INFINITY);
    // rotation times diag(2, 1)
    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    assert!((condition_number([[2.0 * c, -s], [2.0 * s, c]]) - 2.0).abs() < 1e-12);
}

#[test]
fn hamiltonian_rhs_zero() {
    let g = grid();
    let (lt, ht) = zero_state(&g);
    let h = hamiltonian_rhs(
        &SeedData::zero(&g),
        0.0,
        &lt,
        &ht,
        SingularTensorParams::default(),
    )
    .unwrap();
    assert_eq!(h.rhs.max_abs_coefficient(), 0.0);
}

#[test]
fn hamiltonian_rhs_udot_only() {
    let g = grid();
    let (lt, ht) = zero_state(&g);
    let z = ScalarField::zeros(&g);
    let udot = bump(&g, 0.2, 0.3, 0.0);
    let seed = SeedData::new(udot.clone(), z.clone(), z, 0.0).unwrap();
    let h = hamiltonian_rhs(&seed, 0.0, &lt, &ht, SingularTensorParams::default()).unwrap();
    let expect = multiply_fields(&udot, &udot).scaled(-0.5);
    assert!((&h.rhs - &expect).max_abs_coefficient() < 1e-15);
}

#[test]
fn hamiltonian_rhs_rejects_foreign_grid() {
    let g = grid();
    let other = build_grid(8, 128, 30.0, -0.5).unwrap();
    let (lt, _) = zero_state(&other);
    let ht = TracelessSymTensorField::zeros(&g);
    let err = hamiltonian_rhs(
        &SeedData::zero(&g),
        0.0,
        &lt,
        &ht,
        SingularTensorParams::default(),
    );
    assert!(matches!(err, Err(Error::GridMismatch)));
}

#[test]
fn cross_terms_decay_faster_than_inverse_square() {
    let g = grid();
    let seed = SeedData::new(
        bump(&g, 0.1, 0.0, 0.0),
        bump(&g, 0.1, 0.5, 0.2),
        bump(&g, 0.02, -0.3, 0.1),
        0.2,
    )
    .unwrap();
    let lt = ScalarField::zeros(&g);
    let params = SingularTensorParams::new(0.2, 0.1, -0.05);
    let ht = assemble_momentum(&seed, 0.0, &lt, &TracelessSymTensorField::zeros(&g), params)
        .unwrap()
        .h_tilde;
    let h = hamiltonian_rhs(&seed, 0.0, &lt, &ht, params).unwrap();
    let r = g.r();
    let n = r.len();
    let m0 = h.rhs.cos_mode(0);
    let pts: Vec<(f64, f64)> = (3 * n / 4..n - 1)
        .map(|i| (r[i].ln(), m0[i].abs().ln()))
        .collect();
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / k, sy / k);
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| {
        (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2))
    });
    let slope = num / den;
    assert!(slope < -2.0, "{slope}");
}

#[test]
fn solve_lambda_zero_rhs() {
    let g = grid();
    let (a, lt) = solve_lambda(&HamiltonianRHS {
        rhs: ScalarField::zeros(&g),
    })
    .unwrap();
    assert_eq!(a, 0.0);
    assert_eq!(lt.max_abs_coefficient(), 0.0);
}

#[test]
fn solve_lambda_negative_gaussian_has_half_deficit() {
    let g = build_grid(8, 1024, 60.0, -0.5).unwrap();
    let rhs = ScalarField::radial(&g, |r| -(-r * r).exp());
    let (a, _) = solve_lambda(&HamiltonianRHS { rhs }).unwrap();
    assert!((a - 0.5).abs() < 1e-6, "{a}");
}

#[test]
fn first_step_alpha_is_quarter_pi_energy() {
    let g = grid();
    let (lt, ht) = zero_state(&g);
    let z = ScalarField::zeros(&g);
    let udot = bump(&g, 0.05, 0.2, -0.1);
    let seed = SeedData::new(udot.clone(), z.clone(), z, 0.0).unwrap();
    let h = hamiltonian_rhs(&seed, 0.0, &lt, &ht, SingularTensorParams::default()).unwrap();
    let (a, _) = solve_lambda(&h).unwrap();
    let expect = integrate(&multiply_fields(&udot, &udot)) / (4.0 * PI);
    assert!(a > 0.0);
    assert!((a - expect).abs() < 1e-12 * expect, "{a} {expect}");
}

#[test]
fn lambda_tail_is_consistent_with_weighted_decay() {
    let g = grid();
    let (lt, ht) = zero_state(&g);
    let z = ScalarField::zeros(&g);
    let seed = SeedData::new(bump(&g, 0.1, 0.4, 0.0), bump(&g, 0.1, 0.0, 0.3), z, 0.0).unwrap();
    let h = hamiltonian_rhs(&seed, 0.0, &lt, &ht, SingularTensorParams::default()).unwrap();
    let (_, lp) = solve_lambda(&h).unwrap();
    let n = g.n_r();
    let outer = lp.cos_mode(0)[n - 1].abs();
    let half = lp.cos_mode(0)[g.nearest_node(g.r_max() / 2.0)].abs();
    let delta = g.delta();
    assert!(
        outer <= half * 0.5f64.powf(delta + 1.0) * 1.3,
        "{outer} {half}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn singular_parts_alone_give_zero_rhs(
        b in -2.0f64..2.0,
        rho in 0.0f64..2.0,
        eta in 0.0f64..std::f64::consts::TAU,
    ) {
        let g = build_grid(6, 64, 20.0, -0.5).unwrap();
        let (lt, ht) = zero_state(&g);
        let params = SingularTensorParams::from_polar(b, rho, eta);
        let h = hamiltonian_rhs(&SeedData::zero(&g), 0.0, &lt, &ht, params).unwrap();
        prop_assert_eq!(h.rhs.max_abs_coefficient(), 0.0);
    }

    #[test]
    fn positive_energy_gives_positive_deficit(
        amp in 0.01f64..0.3,
        x0 in -1.0f64..1.0,
    ) {
        let g = build_grid(8, 256, 40.0, -0.5).unwrap();
        let (lt, ht) = zero_state(&g);
        let z = ScalarField::zeros(&g);
        let seed = SeedData::new(z.clone(), bump(&g, amp, x0, 0.0), z, 0.0).unwrap();
        let h = hamiltonian_rhs(&seed, 0.0, &lt, &ht, SingularTensorParams::default()).unwrap();
        let (a, _) = solve_lambda(&h).unwrap();
        prop_assert!(a > 0.0);
    }
}
