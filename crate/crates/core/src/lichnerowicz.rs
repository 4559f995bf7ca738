//! Selection of `(ρ, η)` and the Lichnerowicz equation
//! `Δλ′ = −½u̇² − ½|∇u|² − ½|H|² + ¼τ²` for `λ′ = −α′χ ln r + λ̃′`.

use crate::elliptic::poisson_solve;
use crate::error::{Error, Result};
use crate::fields::{tensor_inner, tensor_norm_sq, ScalarField, SeedData, TracelessSymTensorField};
use crate::momentum::{log_coefficient, momentum_rhs_f, singular_tensors, SingularTensorParams};

/// Largest tolerated condition number of the `(p, q)` selection system.
pub const MAX_SELECTION_CONDITION: f64 = 1e8;

/// Right side of the Lichnerowicz equation with the pure singular squares
/// `½|H_b + H_{ρ,η}|² − ¼τ_sing²` removed (they cancel identically).
#[derive(Debug, Clone)]
pub struct HamiltonianRHS {
    pub rhs: ScalarField,
}

/// 2-norm condition number of a 2×2 matrix.
pub fn condition_number(a: [[f64; 2]; 2]) -> f64 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 {
        return f64::INFINITY;
    }
    let frob2: f64 = a.iter().flatten().map(|x| x * x).sum();
    // σ_max/σ_min from σ₁² + σ₂² = ‖A‖_F² and σ₁σ₂ = |det|
    let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
    let smax2 = 0.5 * (frob2 + disc);
    let smin2 = det * det / smax2;
    (smax2 / smin2).sqrt()
}

/// The fixed point `(p, q) = −4(m cos φ, m sin φ)` of the momentum
/// log-coefficient map, which is affine in `(p, q)`.
pub fn solve_rho_eta(
    seed: &SeedData,
    alpha: f64,
    lambda_tilde: &ScalarField,
    h_tilde: &TracelessSymTensorField,
    b: f64,
) -> Result<(f64, f64)> {
    let probe = |p: f64, q: f64| -> Result<(f64, f64)> {
        let params = SingularTensorParams::new(b, p, q);
        let (f1, f2) = momentum_rhs_f(seed, alpha, lambda_tilde, h_tilde, params)?;
        Ok(log_coefficient(&f1, &f2))
    };
    let c0 = probe(0.0, 0.0)?;
    let c1 = probe(1.0, 0.0)?;
    let c2 = probe(0.0, 1.0)?;
    let a = [
        [1.0 + 4.0 * (c1.0 - c0.0), 4.0 * (c2.0 - c0.0)],
        [4.0 * (c1.1 - c0.1), 1.0 + 4.0 * (c2.1 - c0.1)],
    ];
    let cond = condition_number(a);
    if !cond.is_finite() || cond > MAX_SELECTION_CONDITION {
        return Err(Error::NearSingularSelection { cond });
    }
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let (r1, r2) = (-4.0 * c0.0, -4.0 * c0.1);
    Ok((
        (r1 * a[1][1] - a[0][1] * r2) / det,
        (a[0][0] * r2 - a[1][0] * r1) / det,
    ))
}

/// Assembles `−½u̇² − ½|∇u|² − ⟨H_sing, H̃⟩ − ½|H̃|² + ½τ_sing τ̃ + ¼τ̃²`.
pub fn hamiltonian_rhs(
    seed: &SeedData,
    _alpha: f64,
    lambda_tilde: &ScalarField,
    h_tilde: &TracelessSymTensorField,
    params: SingularTensorParams,
) -> Result<HamiltonianRHS> {
    seed.udot.check_grid(lambda_tilde)?;
    seed.udot.check_grid(&h_tilde.h11)?;
    let grid = seed.grid();
    let (hb, hre, tau_s) = singular_tensors(params, grid);
    let mut h_sing = hb;
    h_sing.axpy(1.0, &hre);
    let cross = tensor_inner(&h_sing, h_tilde)?;
    let ht2 = tensor_norm_sq(h_tilde)?;
    let (ux, uy) = crate::fields::cartesian_gradient(&seed.u);
    let inputs = [&seed.udot, &ux, &uy, &cross, &ht2, &tau_s, &seed.tau_tilde];
    let rhs = ScalarField::pointwise(&inputs, |v| {
        let [ud, ux, uy, cross, ht2, ts, tt]: [f64; 7] = v.try_into().unwrap();
        -0.5 * (ud * ud + ux * ux + uy * uy) - cross - 0.5 * ht2 + 0.5 * ts * tt + 0.25 * tt * tt
    })?;
    Ok(HamiltonianRHS { rhs })
}

/// `(α′, λ̃′)` with `Δ(−α′χ ln r + λ̃′) = rhs`.
pub fn solve_lambda(rhs: &HamiltonianRHS) -> Result<(f64, ScalarField)> {
    let sol = poisson_solve(&rhs.rhs, rhs.rhs.grid())?;
    Ok((-sol.c_log, sol.v))
}

#[cfg(test)]
mod tests;
