//! Geometric read-out: cone angle, physical metric and extrinsic curvature,
//! and the far-field charges of `τ`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::fields::{chi_log, field_to_csv, Grid, ScalarField, SeedData};
use crate::momentum::singular_tensors;
use crate::picard::SolutionBundle;

/// Symmetric 2×2 tensor field.
#[derive(Debug, Clone)]
pub struct SymTensorField {
    pub k11: ScalarField,
    pub k12: ScalarField,
    pub k22: ScalarField,
}

/// Physical data `g = e^{2λ}δ` and `K`.
#[derive(Debug, Clone)]
pub struct PhysicalData {
    /// `λ = −αχ ln r + λ̃`.
    pub conformal_exponent: ScalarField,
    /// `e^{2λ}`.
    pub metric_factor: ScalarField,
    pub k_tensor: SymTensorField,
    /// `e^{−λ}τ̆`.
    pub tau_full: ScalarField,
}

impl PhysicalData {
    /// Named CSV dumps in the field format of [`field_to_csv`].
    pub fn field_csvs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("lambda", field_to_csv(&self.conformal_exponent)),
            ("metric_factor", field_to_csv(&self.metric_factor)),
            ("K11", field_to_csv(&self.k_tensor.k11)),
            ("K12", field_to_csv(&self.k_tensor.k12)),
            ("K22", field_to_csv(&self.k_tensor.k22)),
            ("tau_full", field_to_csv(&self.tau_full)),
        ]
    }

    /// `g^{ij}K_ij − τ_full`, which vanishes identically.
    pub fn trace_defect(&self) -> Result<ScalarField> {
        let k = &self.k_tensor;
        ScalarField::pointwise(
            &[&self.metric_factor, &k.k11, &k.k22, &self.tau_full],
            |v| (v[1] + v[2]) / v[0] - v[3],
        )
    }
}

/// Total angle `2π(1 − α)` of the asymptotic cone.
pub fn cone_angle(alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha >= 1.0 {
        return Err(Error::DegenerateCone(alpha));
    }
    Ok(TAU * (1.0 - alpha))
}

/// `λ = −αχ ln r + λ̃` as a field.
pub fn full_lambda(alpha: f64, lambda_tilde: &ScalarField) -> ScalarField {
    let log = ScalarField::radial(lambda_tilde.grid(), |r| chi_log(r).0);
    let mut out = lambda_tilde.clone();
    out.axpy(-alpha, &log);
    out
}

/// Rescaled `(H̆₁₁, H̆₁₂, τ̆)`, singular parts included.
pub fn rescaled_fields(
    bundle: &SolutionBundle,
    seed: &SeedData,
) -> (ScalarField, ScalarField, ScalarField) {
    let (hb, hre, tau_s) = singular_tensors(bundle.params(seed.b), seed.grid());
    let h11 = &(&hb.h11 + &hre.h11) + &bundle.h_tilde.h11;
    let h12 = &(&hb.h12 + &hre.h12) + &bundle.h_tilde.h12;
    (h11, h12, &tau_s + &seed.tau_tilde)
}

/// Undoes the rescaling: `K = e^{λ}(H̆ + ½τ̆δ)`, `τ = e^{−λ}τ̆`.
pub fn reconstruct_physical(bundle: &SolutionBundle, seed: &SeedData) -> Result<PhysicalData> {
    seed.udot.check_grid(&bundle.lambda_tilde)?;
    let lambda = full_lambda(bundle.alpha, &bundle.lambda_tilde);
    let (h11, h12, tau) = rescaled_fields(bundle, seed);
    let metric_factor = ScalarField::pointwise(&[&lambda], |v| (2.0 * v[0]).exp())?;
    let ins = [&lambda, &h11, &h12, &tau];
    let k11 = ScalarField::pointwise(&ins, |v| v[0].exp() * (v[1] + 0.5 * v[3]))?;
    let k12 = ScalarField::pointwise(&ins, |v| v[0].exp() * v[2])?;
    let k22 = ScalarField::pointwise(&ins, |v| v[0].exp() * (-v[1] + 0.5 * v[3]))?;
    let tau_full = ScalarField::pointwise(&ins, |v| (-v[0]).exp() * v[3])?;
    Ok(PhysicalData {
        conformal_exponent: lambda,
        metric_factor,
        k_tensor: SymTensorField { k11, k12, k22 },
        tau_full,
    })
}

/// Splits `e^{−λ}K` into `(H̆₁₁, H̆₁₂, τ̆)`.
pub fn decompose_physical(data: &PhysicalData) -> Result<(ScalarField, ScalarField, ScalarField)> {
    let k = &data.k_tensor;
    let ins = [&data.conformal_exponent, &k.k11, &k.k12, &k.k22];
    let h11 = ScalarField::pointwise(&ins, |v| 0.5 * (-v[0]).exp() * (v[1] - v[3]))?;
    let h12 = ScalarField::pointwise(&ins, |v| (-v[0]).exp() * v[2])?;
    let tau = ScalarField::pointwise(&ins, |v| (-v[0]).exp() * (v[1] + v[3]))?;
    Ok((h11, h12, tau))
}

/// `(b̂, p̂, q̂)` read from the mode-0 and mode-1 coefficients of `rτ̆` at `R_max`.
pub fn asymptotic_charges(tau_rescaled: &ScalarField, grid: &Grid) -> Result<(f64, f64, f64)> {
    if tau_rescaled.grid().as_ref() != grid {
        return Err(Error::GridMismatch);
    }
    Ok(charges_at(tau_rescaled, grid.n_r() - 1))
}

/// Charges read at node `i`; comparing two radii estimates the truncation.
pub fn charges_at(tau_rescaled: &ScalarField, i: usize) -> (f64, f64, f64) {
    let r = tau_rescaled.grid().r()[i];
    (
        r * tau_rescaled.cos_mode(0)[i],
        r * tau_rescaled.cos_mode(1)[i],
        r * tau_rescaled.sin_mode(1)[i],
    )
}
