use std::sync::Arc;

use super::grid::Grid;
use super::scalar::{weighted_sobolev_norm, CField, ScalarField};
use crate::error::Result;

/// Symmetric traceless 2-tensor stored by its two independent components;
/// `H₂₂ = −H₁₁` and `H₂₁ = H₁₂` hold by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TracelessSymTensorField {
    pub h11: ScalarField,
    pub h12: ScalarField,
}

impl TracelessSymTensorField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        TracelessSymTensorField {
            h11: ScalarField::zeros(grid),
            h12: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.h11.grid()
    }

    /// `W = H₁₁ + iH₁₂` in complex modes.
    pub fn to_complex(&self) -> CField {
        let mut w = self.h11.to_complex();
        let b = self.h12.to_complex();
        let k = w.k_max() as isize;
        for m in -k..=k {
            let src = b.mode(m).to_vec();
            for (x, y) in w.mode_mut(m).iter_mut().zip(src) {
                *x += y * num_complex::Complex64::i();
            }
        }
        w
    }

    pub fn from_complex(w: &CField) -> Self {
        TracelessSymTensorField {
            h11: w.re_part(),
            h12: w.im_part(),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &TracelessSymTensorField) {
        self.h11.axpy(a, &other.h11);
        self.h12.axpy(a, &other.h12);
    }

    pub fn scaled(&self, a: f64) -> Self {
        TracelessSymTensorField {
            h11: self.h11.scaled(a),
            h12: self.h12.scaled(a),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.h11.is_finite() && self.h12.is_finite()
    }

    /// Full 2×2 matrix at a point.
    pub fn matrix_at(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let a = self.h11.eval(x, y);
        let b = self.h12.eval(x, y);
        [[a, b], [b, -a]]
    }

    /// `Σ` of the component norms in `H^m_δ`.
    pub fn sobolev_norm(&self, m: u32, delta: f64) -> Result<f64> {
        Ok(weighted_sobolev_norm(&self.h11, m, delta)?
            + weighted_sobolev_norm(&self.h12, m, delta)?)
    }
}

/// `⟨A, B⟩ = A_ij B_ij = 2(A₁₁B₁₁ + A₁₂B₁₂)`.
pub fn tensor_inner(
    a: &TracelessSymTensorField,
    b: &TracelessSymTensorField,
) -> Result<ScalarField> {
    ScalarField::pointwise(&[&a.h11, &a.h12, &b.h11, &b.h12], |v| {
        2.0 * (v[0] * v[2] + v[1] * v[3])
    })
}

/// `|H|² = 2(H₁₁² + H₁₂²)`.
pub fn tensor_norm_sq(h: &TracelessSymTensorField) -> Result<ScalarField> {
    ScalarField::pointwise(&[&h.h11, &h.h12], |v| 2.0 * (v[0] * v[0] + v[1] * v[1]))
}

/// `(H_{i1} v_i, H_{i2} v_i)` for a vector field `v`.
pub fn contract(
    h: &TracelessSymTensorField,
    v1: &ScalarField,
    v2: &ScalarField,
) -> Result<(ScalarField, ScalarField)> {
    let c1 = ScalarField::pointwise(&[&h.h11, &h.h12, v1, v2], |x| x[0] * x[2] + x[1] * x[3])?;
    let c2 = ScalarField::pointwise(&[&h.h11, &h.h12, v1, v2], |x| x[1] * x[2] - x[0] * x[3])?;
    Ok((c1, c2))
}
