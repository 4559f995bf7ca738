//! Outer fixed-point map `(α, λ̃, H̃) ↦ (α′, λ̃′, H̃′)` and its iteration.

use std::sync::Arc;

use serde::Serialize;

use crate::elliptic::{poisson_residual, PoissonSolution};
use crate::error::{Error, Result};
use crate::fields::{
    weighted_l2, weighted_sup, Grid, ScalarField, SeedData, TracelessSymTensorField,
};
use crate::lichnerowicz::{hamiltonian_rhs, solve_lambda, solve_rho_eta};
use crate::momentum::{assemble_momentum, momentum_residual, SingularTensorParams};

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Relative change of the combined norm below which the iteration stops.
    pub tol_fixed_point: f64,
    pub max_iter: usize,
    /// Largest accepted `ε = ∫ u̇² + |∇u|²`.
    pub epsilon_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_fixed_point: 1e-10,
            max_iter: 100,
            epsilon_threshold: 0.5,
        }
    }
}

/// A point `(α, λ̃, H̃)` of the iteration space.
#[derive(Debug, Clone)]
pub struct IterState {
    pub alpha: f64,
    pub lambda_tilde: ScalarField,
    pub h_tilde: TracelessSymTensorField,
}

impl IterState {
    pub fn zero(grid: &Arc<Grid>) -> Self {
        Self {
            alpha: 0.0,
            lambda_tilde: ScalarField::zeros(grid),
            h_tilde: TracelessSymTensorField::zeros(grid),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.lambda_tilde.is_finite() && self.h_tilde.is_finite()
    }

    /// `|α| + ‖λ̃‖_{H²_δ} + ‖H̃‖_{H¹_{δ+1}}`.
    pub fn combined_norm(&self) -> f64 {
        let delta = self.lambda_tilde.grid().delta();
        let lam = crate::fields::weighted_sobolev_norm(&self.lambda_tilde, 2, delta)
            .expect("order 2 is supported");
        let h = self
            .h_tilde
            .sobolev_norm(1, delta + 1.0)
            .expect("order 1 is supported");
        self.alpha.abs() + lam + h
    }

    /// Combined norm of `self − other`.
    pub fn distance(&self, other: &IterState) -> f64 {
        let mut h = self.h_tilde.clone();
        h.axpy(-1.0, &other.h_tilde);
        IterState {
            alpha: self.alpha - other.alpha,
            lambda_tilde: &self.lambda_tilde - &other.lambda_tilde,
            h_tilde: h,
        }
        .combined_norm()
    }
}

/// Residuals of the constraint system at a solution candidate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ResidualReport {
    /// `H⁰_{δ+2}` norm of the momentum residual, both components summed.
    pub momentum_residual_norm: f64,
    /// `H⁰_{δ+2}` norm of the Hamiltonian residual.
    pub hamiltonian_residual_norm: f64,
    pub pointwise_max_momentum: f64,
    pub pointwise_max_hamiltonian: f64,
}

/// Converged solution with diagnostics.
#[derive(Debug, Clone)]
pub struct SolutionBundle {
    pub alpha: f64,
    pub rho: f64,
    pub eta: f64,
    pub p: f64,
    pub q: f64,
    pub lambda_tilde: ScalarField,
    pub h_tilde: TracelessSymTensorField,
    pub iterations: usize,
    pub contraction_ratios: Vec<f64>,
    pub residuals: ResidualReport,
}

impl SolutionBundle {
    pub fn params(&self, b: f64) -> SingularTensorParams {
        SingularTensorParams::new(b, self.p, self.q)
    }

    pub fn state(&self) -> IterState {
        IterState {
            alpha: self.alpha,
            lambda_tilde: self.lambda_tilde.clone(),
            h_tilde: self.h_tilde.clone(),
        }
    }
}

/// One application of the map; also returns the `(p, q)` selected at `state`.
pub fn picard_step(state: &IterState, seed: &SeedData) -> Result<(IterState, f64, f64)> {
    let IterState {
        alpha,
        lambda_tilde,
        h_tilde,
    } = state;
    let (p, q) = solve_rho_eta(seed, *alpha, lambda_tilde, h_tilde, seed.b)?;
    let params = SingularTensorParams::new(seed.b, p, q);
    let momentum = assemble_momentum(seed, *alpha, lambda_tilde, h_tilde, params)?;
    let rhs = hamiltonian_rhs(seed, *alpha, lambda_tilde, h_tilde, params)?;
    let (alpha_next, lambda_next) = solve_lambda(&rhs)?;
    Ok((
        IterState {
            alpha: alpha_next,
            lambda_tilde: lambda_next,
            h_tilde: momentum.h_tilde,
        },
        p,
        q,
    ))
}

/// Iterates from the zero state.
pub fn solve_constraints(seed: &SeedData, opts: &SolverOptions) -> Result<SolutionBundle> {
    solve_constraints_from(seed, opts, IterState::zero(seed.grid()))
}

/// Iterates from `initial` until the relative step falls below the tolerance.
pub fn solve_constraints_from(
    seed: &SeedData,
    opts: &SolverOptions,
    initial: IterState,
) -> Result<SolutionBundle> {
    if seed.epsilon > opts.epsilon_threshold {
        return Err(Error::SmallnessThreshold {
            epsilon: seed.epsilon,
            threshold: opts.epsilon_threshold,
        });
    }
    seed.udot.check_grid(&initial.lambda_tilde)?;
    seed.udot.check_grid(&initial.h_tilde.h11)?;
    let mut state = initial;
    let mut ratios = Vec::new();
    let mut last_step: Option<f64> = None;
    let mut first_norm: Option<f64> = None;
    for iteration in 1..=opts.max_iter {
        let (next, _, _) = picard_step(&state, seed)?;
        let norm = next.combined_norm();
        if !next.is_finite() || !norm.is_finite() {
            return Err(Error::DivergenceDetected { iteration, norm });
        }
        let reference = *first_norm.get_or_insert(norm);
        if norm > 10.0 * reference && norm > 0.0 {
            return Err(Error::DivergenceDetected { iteration, norm });
        }
        let step = next.distance(&state);
        if let Some(prev) = last_step.filter(|&d| d > 0.0) {
            ratios.push(step / prev);
        }
        log::debug!("picard iteration {iteration}: norm {norm:.3e}, step {step:.3e}");
        last_step = Some(step);
        state = next;
        if step <= opts.tol_fixed_point * norm.max(f64::MIN_POSITIVE) {
            return finish(seed, state, iteration, ratios);
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        last_ratio: ratios.last().copied().unwrap_or(f64::NAN),
    })
}

fn finish(
    seed: &SeedData,
    state: IterState,
    iterations: usize,
    contraction_ratios: Vec<f64>,
) -> Result<SolutionBundle> {
    let (p, q) = solve_rho_eta(
        seed,
        state.alpha,
        &state.lambda_tilde,
        &state.h_tilde,
        seed.b,
    )?;
    let params = SingularTensorParams::new(seed.b, p, q);
    let mut bundle = SolutionBundle {
        alpha: state.alpha,
        rho: params.rho(),
        eta: params.eta(),
        p,
        q,
        lambda_tilde: state.lambda_tilde,
        h_tilde: state.h_tilde,
        iterations,
        contraction_ratios,
        residuals: ResidualReport::default(),
    };
    bundle.residuals = residuals(&bundle, seed)?;
    Ok(bundle)
}

/// Evaluates both constraint equations at the bundle.
pub fn residuals(bundle: &SolutionBundle, seed: &SeedData) -> Result<ResidualReport> {
    seed.udot.check_grid(&bundle.lambda_tilde)?;
    seed.udot.check_grid(&bundle.h_tilde.h11)?;
    let params = bundle.params(seed.b);
    let mom = momentum_residual(
        seed,
        bundle.alpha,
        &bundle.lambda_tilde,
        &bundle.h_tilde,
        params,
        &bundle.h_tilde,
    )?;
    let rhs = hamiltonian_rhs(
        seed,
        bundle.alpha,
        &bundle.lambda_tilde,
        &bundle.h_tilde,
        params,
    )?;
    let sol = PoissonSolution {
        c_log: -bundle.alpha,
        v: bundle.lambda_tilde.clone(),
    };
    let ham = poisson_residual(&sol, &rhs.rhs)?;
    let beta = seed.grid().delta() + 2.0;
    Ok(ResidualReport {
        momentum_residual_norm: mom.norm,
        hamiltonian_residual_norm: weighted_l2(&ham, beta),
        pointwise_max_momentum: mom.max,
        pointwise_max_hamiltonian: weighted_sup(&ham, 0.0),
    })
}
