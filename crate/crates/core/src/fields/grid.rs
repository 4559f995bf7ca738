use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default weight exponent, the midpoint of `(-1, 0)`.
pub const DEFAULT_DELTA: f64 = -0.5;

/// Polar grid: `K` Fourier modes in θ and `N_r` radial nodes uniform in
/// `s = ln(1 + r)`.
///
/// Node `i` (1-based in the math, 0-based in storage) sits at `s_i = i·h`
/// with `h = ln(1 + R_max) / N_r`, so the implicit node `s_0 = 0` is the
/// origin and the last node is exactly `R_max`.
#[derive(Debug, Clone)]
pub struct Grid {
    k_max: usize,
    n_r: usize,
    r_max: f64,
    delta: f64,
    h: f64,
    r: Vec<f64>,
    // three-point d/dr weights; row i acts on (r_{i-1}, r_i, r_{i+1}), the
    // origin standing in for r_{-1}; the last row is one-sided
    deriv: Vec<[f64; 3]>,
    angles: AngularBasis,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.k_max == other.k_max
            && self.n_r == other.n_r
            && self.r_max == other.r_max
            && self.delta == other.delta
    }
}

/// Builds a validated grid.
pub fn build_grid(k_max: usize, n_r: usize, r_max: f64, delta: f64) -> Result<Arc<Grid>> {
    if !(delta > -1.0 && delta < 0.0) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    if k_max < 4 {
        return Err(Error::InvalidResolution(format!(
            "K = {k_max} < 4 cannot carry the cos 3θ profiles"
        )));
    }
    if n_r < 16 {
        return Err(Error::InvalidResolution(format!("N_r = {n_r} < 16")));
    }
    if !(r_max.is_finite() && r_max > 2.0) {
        return Err(Error::InvalidResolution(format!(
            "R_max = {r_max} must exceed the cutoff radius 2"
        )));
    }
    let h = r_max.ln_1p() / n_r as f64;
    let mut r: Vec<f64> = (1..=n_r).map(|i| (i as f64 * h).exp_m1()).collect();
    r[n_r - 1] = r_max;
    let deriv = derivative_weights(&r);
    Ok(Arc::new(Grid {
        k_max,
        n_r,
        r_max,
        delta,
        h,
        r,
        deriv,
        angles: AngularBasis::new(k_max, 4 * k_max),
    }))
}

fn derivative_weights(r: &[f64]) -> Vec<[f64; 3]> {
    let n = r.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let x0 = if i == 0 { 0.0 } else { r[i - 1] };
        let (x1, x2) = (r[i], r[i + 1]);
        out.push([
            (x1 - x2) / ((x0 - x1) * (x0 - x2)),
            1.0 / (x1 - x0) + 1.0 / (x1 - x2),
            (x1 - x0) / ((x2 - x0) * (x2 - x1)),
        ]);
    }
    let (x0, x1, x2) = (r[n - 3], r[n - 2], r[n - 1]);
    out.push([
        (x2 - x1) / ((x0 - x1) * (x0 - x2)),
        (x2 - x0) / ((x1 - x0) * (x1 - x2)),
        1.0 / (x2 - x0) + 1.0 / (x2 - x1),
    ]);
    out
}

impl Grid {
    pub(crate) fn derivative_stencil(&self) -> &[[f64; 3]] {
        &self.deriv
    }

    /// Euler–Maclaurin weight of the origin value `g(0)` in
    /// `∫_0^{R} g(r) r dr`: the trapezoid rule in `s` misses `h²/12 · g(0)`.
    pub fn origin_weight(&self) -> f64 {
        self.h * self.h / 12.0
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Spacing in the mapped coordinate `s`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Radius of the cell face between storage nodes `i` and `i + 1`; `i = -1`
    /// addresses the face between the origin and the first node.
    pub fn r_face(&self, i: isize) -> f64 {
        ((i as f64 + 1.5) * self.h).exp_m1()
    }

    /// `dr/ds = 1 + r` at every node.
    pub fn jacobian(&self) -> Vec<f64> {
        self.r.iter().map(|r| 1.0 + r).collect()
    }

    /// Trapezoid weights in `s` for `∫_0^{R_max} g(r) dr`, Jacobian included.
    /// The origin node carries `r·g = 0` for every integrand we use.
    pub fn radial_weights(&self) -> Vec<f64> {
        let mut w: Vec<f64> = self.r.iter().map(|r| self.h * (1.0 + r)).collect();
        w[self.n_r - 1] *= 0.5;
        w
    }

    /// Local radial spacing near radius `r`.
    pub fn spacing_at(&self, r: f64) -> f64 {
        (1.0 + r) * self.h
    }

    /// Index of the node nearest to radius `r`.
    pub fn nearest_node(&self, r: f64) -> usize {
        let s = r.ln_1p() / self.h;
        (s.round() as isize - 1).clamp(0, self.n_r as isize - 1) as usize
    }

    pub fn angles(&self) -> &AngularBasis {
        &self.angles
    }
}

/// Trigonometric tables for an `M`-point uniform angular grid.
#[derive(Debug, Clone)]
pub struct AngularBasis {
    k_max: usize,
    m: usize,
    theta: Vec<f64>,
    // cos_tab[k * m + j] = cos(k θ_j)
    cos_tab: Vec<f64>,
    sin_tab: Vec<f64>,
}

impl AngularBasis {
    pub fn new(k_max: usize, m: usize) -> Self {
        let theta: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
        let mut cos_tab = vec![0.0; (k_max + 1) * m];
        let mut sin_tab = vec![0.0; (k_max + 1) * m];
        for k in 0..=k_max {
            for (j, t) in theta.iter().enumerate() {
                cos_tab[k * m + j] = (k as f64 * t).cos();
                sin_tab[k * m + j] = (k as f64 * t).sin();
            }
        }
        AngularBasis {
            k_max,
            m,
            theta,
            cos_tab,
            sin_tab,
        }
    }

    pub fn points(&self) -> usize {
        self.m
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Evaluates `Σ a_k cos kθ_j + b_k sin kθ_j` into `out`.
    pub fn synthesize(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        let m = self.m;
        out.fill(a[0]);
        for k in 1..=self.k_max {
            let (ak, bk) = (a[k], b[k]);
            if ak == 0.0 && bk == 0.0 {
                continue;
            }
            let c = &self.cos_tab[k * m..(k + 1) * m];
            let s = &self.sin_tab[k * m..(k + 1) * m];
            for j in 0..m {
                out[j] += ak * c[j] + bk * s[j];
            }
        }
    }

    /// Projects samples back onto modes `0..=K`.
    pub fn analyze(&self, values: &[f64], a: &mut [f64], b: &mut [f64]) {
        let m = self.m;
        let inv = 1.0 / m as f64;
        a[0] = values.iter().sum::<f64>() * inv;
        b[0] = 0.0;
        for k in 1..=self.k_max {
            let c = &self.cos_tab[k * m..(k + 1) * m];
            let s = &self.sin_tab[k * m..(k + 1) * m];
            let (mut sa, mut sb) = (0.0, 0.0);
            for j in 0..m {
                sa += values[j] * c[j];
                sb += values[j] * s[j];
            }
            a[k] = 2.0 * sa * inv;
            b[k] = 2.0 * sb * inv;
        }
    }
}
