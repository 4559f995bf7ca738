//! Identity and oracle checks run by `verify`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use super::RunConfig;
use crate::elliptic::{greens_convolution_oracle, poisson_solve};
use crate::error::Result;
use crate::fields::{
    build_grid, sample_analytic, tensor_norm_sq, weighted_l2, weighted_sobolev_norm, AnalyticSpec,
    CField, GaussBump, Grid, ScalarField,
};
use crate::geometry::asymptotic_charges;
use crate::momentum::{div_h_b, div_h_three, div_leading, singular_tensors, SingularTensorParams};

/// Outcome of one check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    fn failed(name: &str, why: &crate::Error) -> Self {
        log::warn!("check {name} could not run: {why}");
        Check {
            name: name.into(),
            value: f64::NAN,
            tolerance: f64::NAN,
            pass: false,
        }
    }
}

fn gaussian_error(k: usize, n: usize, r_max: f64, delta: f64) -> Result<(f64, f64)> {
    let g = build_grid(k, n, r_max, delta)?;
    let f = ScalarField::radial(&g, |r| (4.0 * r * r - 4.0) * (-r * r).exp());
    let sol = poisson_solve(&f, &g)?;
    let err = sol
        .v
        .cos_mode(0)
        .iter()
        .zip(g.r())
        .map(|(v, r)| (v - (-r * r).exp()).abs())
        .fold(0.0, f64::max);
    Ok((err, g.h()))
}

fn complex_chi(r: Complex64) -> Complex64 {
    let x = r - 1.0;
    if x.re <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if x.re >= 1.0 {
        return Complex64::new(1.0, 0.0);
    }
    let phi = x.inv() - (1.0 - x).inv();
    if phi.re > 0.0 {
        let e = (-phi).exp();
        e / (e + 1.0)
    } else {
        (phi.exp() + 1.0).inv()
    }
}

/// `W(x, y)` of a closed-form tensor, evaluated at complex arguments.
type ClosedForm = dyn Fn(Complex64, Complex64) -> Complex64;

/// Divergence `(∂₁H₁₁ + ∂₂H₁₂, ∂₁H₁₂ − ∂₂H₁₁)` by complex-step differentiation
/// of the two components.
fn complex_step_div(h11: &ClosedForm, h12: &ClosedForm, x: f64, y: f64) -> (f64, f64) {
    let s = 1e-30;
    let dx = |f: &ClosedForm| f(Complex64::new(x, s), Complex64::from(y)).im / s;
    let dy = |f: &ClosedForm| f(Complex64::from(x), Complex64::new(y, s)).im / s;
    (dx(h11) + dy(h12), dx(h12) - dy(h11))
}

fn identity_error(div: &CField, h11: &ClosedForm, h12: &ClosedForm) -> f64 {
    let (d1, d2) = (div.re_part(), div.im_part());
    let g = div.grid();
    let theta = g.angles().theta().to_vec();
    let mut pairs = Vec::new();
    for (i, &r) in g.r().iter().enumerate().filter(|(_, &r)| r > 0.5) {
        let (a1, a2) = (d1.angular_samples(i), d2.angular_samples(i));
        for (j, &t) in theta.iter().enumerate() {
            let (e1, e2) = complex_step_div(h11, h12, r * t.cos(), r * t.sin());
            pairs.push(((a1[j] - e1).hypot(a2[j] - e2), e1.hypot(e2)));
        }
    }
    let peak = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    pairs
        .iter()
        .map(|&(err, e)| err / e.max(1e-3 * peak).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

fn divergence_check(g: &Arc<Grid>) -> f64 {
    let (b, p, q) = (0.7, -0.4, 1.3);
    let polar = |x: Complex64, y: Complex64| {
        let r = (x * x + y * y).sqrt();
        (r, x / r, y / r)
    };
    let hb11 = move |x, y| {
        let (r, c, s) = polar(x, y);
        -complex_chi(r) * b / (r * 2.0) * (c * c - s * s)
    };
    let hb12 = move |x, y| {
        let (r, c, s) = polar(x, y);
        -complex_chi(r) * b / (r * 2.0) * (c * s * 2.0)
    };
    let three = move |x, y| {
        let (r, c, s) = polar(x, y);
        let (c3, s3) = (c * c * c - c * s * s * 3.0, c * c * s * 3.0 - s * s * s);
        (r, c3, s3)
    };
    let h3_11 = move |x, y| {
        let (r, c3, s3) = three(x, y);
        -complex_chi(r) / (r * 4.0) * (c3 * p + s3 * q)
    };
    let h3_12 = move |x, y| {
        let (r, c3, s3) = three(x, y);
        -complex_chi(r) / (r * 4.0) * (s3 * p - c3 * q)
    };
    let lead11 = move |x, y| {
        let (r, c, s) = polar(x, y);
        complex_chi(r) / r * (c * p - s * q)
    };
    let lead12 = move |x, y| {
        let (r, c, s) = polar(x, y);
        complex_chi(r) / r * (s * p + c * q)
    };
    let par = SingularTensorParams::new(b, p, q);
    let lead = Complex64::new(p, q);
    [
        identity_error(&div_h_b(b, g), &hb11, &hb12),
        identity_error(&div_h_three(par, g), &h3_11, &h3_12),
        identity_error(&div_leading(lead.norm(), lead.arg(), g), &lead11, &lead12),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn cancellation_check(g: &Arc<Grid>) -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let b = rng.gen_range(-2.0..2.0);
        let rho = rng.gen_range(0.0..2.0);
        let eta = rng.gen_range(0.0..2.0 * PI);
        let (hb, hre, tau) = singular_tensors(SingularTensorParams::from_polar(b, rho, eta), g);
        let mut h = hb;
        h.axpy(1.0, &hre);
        let h2 = tensor_norm_sq(&h)?;
        let defect = ScalarField::pointwise(&[&h2, &tau], |v| 0.5 * v[0] - 0.25 * v[1] * v[1])?;
        let sup = (0..g.n_r())
            .flat_map(|i| defect.angular_samples(i))
            .fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(sup / (b * b + rho * rho));
    }
    Ok(worst)
}

fn charge_check(g: &Arc<Grid>) -> Result<f64> {
    let params = SingularTensorParams::from_polar(0.3, 0.2, 2.1);
    let (_, _, tau_s) = singular_tensors(params, g);
    let bump = AnalyticSpec::new(vec![GaussBump {
        amp: 0.1,
        x0: 0.5,
        y0: -0.3,
        w: 1.0,
    }]);
    let tau = &tau_s + &sample_analytic(&bump, g)?;
    let (b, p, q) = asymptotic_charges(&tau, g)?;
    Ok((b - params.b)
        .abs()
        .max((p - params.p).abs())
        .max((q - params.q).abs()))
}

/// `‖v‖_{H²_δ} / ‖f‖_{H⁰_{δ+2}}` for a smooth compactly concentrated source.
fn conditioning(g: &Arc<Grid>) -> Result<f64> {
    let f = ScalarField::zeros(g)
        .with_mode(0, |r| ((4.0 * r * r - 4.0) * (-r * r).exp(), 0.0))
        .with_mode(2, |r| (r * r * (-r * r).exp(), 0.0));
    let sol = poisson_solve(&f, g)?;
    Ok(weighted_sobolev_norm(&sol.v, 2, g.delta())? / weighted_l2(&f, g.delta() + 2.0))
}

/// Every check on the configured grid; the grid itself must be valid.
pub fn run_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let g = cfg.grid()?;
    let (k, n, r_max, delta) = (cfg.k_max, cfg.n_r, cfg.r_max, cfg.delta);
    let mut checks = Vec::new();

    match gaussian_error(k, n, r_max, delta) {
        Ok((err, h)) => checks.push(Check::at_most(
            "poisson_gaussian_max_error",
            err,
            0.5 * h * h,
        )),
        Err(e) => checks.push(Check::failed("poisson_gaussian_max_error", &e)),
    }
    let order = gaussian_error(k, n / 2, r_max, delta)
        .and_then(|(coarse, _)| gaussian_error(k, n, r_max, delta).map(|(fine, _)| coarse / fine))
        .map(f64::log2);
    match order {
        Ok(o) => checks.push(Check::at_most(
            "poisson_order_deviation_from_2",
            (o - 2.0).abs(),
            0.3,
        )),
        Err(e) => checks.push(Check::failed("poisson_order_deviation_from_2", &e)),
    }

    let gauss = ScalarField::radial(&g, |r| (-r * r).exp());
    match poisson_solve(&gauss, &g) {
        Ok(sol) => {
            checks.push(Check::at_most(
                "log_coefficient_error",
                (sol.c_log - 0.5).abs(),
                1e-6,
            ));
            let far = greens_convolution_oracle(&gauss, &[(40.0, 0.0)])[0];
            checks.push(Check::at_most(
                "green_far_field_error",
                (far - 0.5 * 40f64.ln()).abs(),
                1e-3,
            ));
        }
        Err(e) => checks.push(Check::failed("log_coefficient_error", &e)),
    }

    match cancellation_check(&g) {
        Ok(v) => checks.push(Check::at_most("singular_square_cancellation", v, 1e-12)),
        Err(e) => checks.push(Check::failed("singular_square_cancellation", &e)),
    }
    checks.push(Check::at_most(
        "divergence_identities",
        divergence_check(&g),
        1e-10,
    ));
    match charge_check(&g) {
        Ok(v) => checks.push(Check::at_most("charge_round_trip", v, 1e-6)),
        Err(e) => checks.push(Check::failed("charge_round_trip", &e)),
    }
    match conditioning(&g) {
        Ok(c) => {
            if delta < -0.9 {
                log::warn!("delta = {delta} is close to -1; solution operator norm ratio {c:.3e}");
            }
            checks.push(Check {
                name: "conditioning_ratio".into(),
                value: c,
                tolerance: f64::INFINITY,
                pass: c.is_finite(),
            });
        }
        Err(e) => checks.push(Check::failed("conditioning_ratio", &e)),
    }
    Ok(checks)
}
