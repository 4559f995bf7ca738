//! Field representation on ℝ²: truncated Fourier series in θ over a radial
//! grid uniform in `ln(1 + r)`, with the calculus, quadrature and weighted
//! norms the solver needs.

mod analytic;
mod chi;
mod grid;
mod io;
mod scalar;
mod tensor;

pub use analytic::{sample_analytic, AnalyticSpec, GaussBump};
pub use chi::{chi, chi_log, chi_prime, chi_profiles, chi_second, RadialProfile};
pub use grid::{build_grid, AngularBasis, Grid, DEFAULT_DELTA};
pub use io::{field_from_csv, field_to_csv};
pub use scalar::{
    cartesian_gradient, d_minus, d_plus, integrate, multiply, origin_value, radial_derivative,
    regularity_defect, weighted_l2, weighted_sobolev_norm, weighted_sup, CField, ScalarField,
};
pub use tensor::{contract, tensor_inner, tensor_norm_sq, TracelessSymTensorField};

/// Given data of the problem: `(u̇, u, τ̃, b)` and `ε = ∫ u̇² + |∇u|²`.
#[derive(Debug, Clone)]
pub struct SeedData {
    pub udot: ScalarField,
    pub u: ScalarField,
    pub tau_tilde: ScalarField,
    pub b: f64,
    pub epsilon: f64,
}

impl SeedData {
    pub fn new(
        udot: ScalarField,
        u: ScalarField,
        tau_tilde: ScalarField,
        b: f64,
    ) -> crate::Result<Self> {
        udot.check_grid(&u)?;
        udot.check_grid(&tau_tilde)?;
        let (ux, uy) = cartesian_gradient(&u);
        let density = ScalarField::pointwise(&[&udot, &ux, &uy], |v| {
            v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
        })?;
        let epsilon = integrate(&density);
        for (name, f) in [("udot", &udot), ("u", &u), ("tau", &tau_tilde)] {
            let d = regularity_defect(f);
            if d > 1e-6 {
                log::warn!("seed field {name} has regularity defect {d:.2e} at the origin");
            }
        }
        Ok(SeedData {
            udot,
            u,
            tau_tilde,
            b,
            epsilon,
        })
    }

    pub fn zero(grid: &std::sync::Arc<Grid>) -> Self {
        SeedData {
            udot: ScalarField::zeros(grid),
            u: ScalarField::zeros(grid),
            tau_tilde: ScalarField::zeros(grid),
            b: 0.0,
            epsilon: 0.0,
        }
    }

    pub fn grid(&self) -> &std::sync::Arc<Grid> {
        self.udot.grid()
    }
}

#[cfg(test)]
mod tests;
