//! Browser bindings: solve a two-bump seed, sweep its amplitude, and check
//! the Poisson solver against a closed-form solution.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use s1_constraints::elliptic::poisson_solve;
use s1_constraints::fields::{
    build_grid, sample_analytic, AnalyticSpec, GaussBump, Grid, ScalarField, SeedData,
};
use s1_constraints::geometry::cone_angle;
use s1_constraints::picard::{solve_constraints, SolverOptions};
use std::sync::Arc;

fn grid() -> Result<Arc<Grid>, JsError> {
    Ok(build_grid(8, 256, 60.0, -0.5)?)
}

fn seed(g: &Arc<Grid>, amp: f64, separation: f64, b: f64) -> Result<SeedData, JsError> {
    let bump = |x0: f64, y0: f64| {
        AnalyticSpec::new(vec![GaussBump {
            amp,
            x0,
            y0,
            w: 1.0,
        }])
    };
    let half = 0.5 * separation;
    Ok(SeedData::new(
        sample_analytic(&bump(half, 0.0), g)?,
        sample_analytic(&bump(-half, 0.0), g)?,
        ScalarField::zeros(g),
        b,
    )?)
}

fn solve_value(g: &Arc<Grid>, amp: f64, separation: f64, b: f64) -> Result<Value, JsError> {
    let s = seed(g, amp, separation, b)?;
    let bundle = solve_constraints(&s, &SolverOptions::default())?;
    let stride = (g.n_r() / 64).max(1);
    let profile: Vec<[f64; 2]> = g
        .r()
        .iter()
        .zip(bundle.lambda_tilde.cos_mode(0))
        .step_by(stride)
        .map(|(&r, &v)| [r, v])
        .collect();
    Ok(json!({
        "epsilon": s.epsilon,
        "alpha": bundle.alpha,
        "rho": bundle.rho,
        "eta": bundle.eta,
        "cone_angle": cone_angle(bundle.alpha)?,
        "iterations": bundle.iterations,
        "momentum_residual": bundle.residuals.momentum_residual_norm,
        "hamiltonian_residual": bundle.residuals.hamiltonian_residual_norm,
        "lambda_profile": profile,
    }))
}

/// Solves for a `u̇`, `u` pair of unit-width bumps a distance `separation` apart.
#[wasm_bindgen]
pub fn solve(amp: f64, separation: f64, b: f64) -> Result<String, JsError> {
    Ok(solve_value(&grid()?, amp, separation, b)?.to_string())
}

/// `α/a²` and `ρ/a²` over amplitudes `a = k·max_amp/steps`, `k = 1..=steps`.
#[wasm_bindgen]
pub fn sweep(max_amp: f64, steps: u32, separation: f64) -> Result<String, JsError> {
    let g = grid()?;
    let rows = (1..=steps.max(1))
        .map(|k| {
            let a = max_amp * f64::from(k) / f64::from(steps.max(1));
            match solve_value(&g, a, separation, 0.0) {
                Ok(v) => json!({
                    "a": a,
                    "alpha_over_a2": v["alpha"].as_f64().unwrap_or(f64::NAN) / (a * a),
                    "rho_over_a2": v["rho"].as_f64().unwrap_or(f64::NAN) / (a * a),
                    "iterations": v["iterations"],
                }),
                Err(_) => json!({ "a": a, "failed": true }),
            }
        })
        .collect::<Vec<_>>();
    Ok(Value::Array(rows).to_string())
}

/// Solves `Δv = (4r²−4)e^{−r²}` on `n_r` radial nodes and reports the error
/// against `e^{−r²}`.
#[wasm_bindgen]
pub fn poisson_check(n_r: usize) -> Result<String, JsError> {
    let g = build_grid(8, n_r, 60.0, -0.5)?;
    let f = ScalarField::radial(&g, |r| (4.0 * r * r - 4.0) * (-r * r).exp());
    let sol = poisson_solve(&f, &g)?;
    let err = sol
        .v
        .cos_mode(0)
        .iter()
        .zip(g.r())
        .map(|(v, r)| (v - (-r * r).exp()).abs())
        .fold(0.0, f64::max);
    Ok(json!({ "n_r": n_r, "max_error": err, "c_log": sol.c_log }).to_string())
}
