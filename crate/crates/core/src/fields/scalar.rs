use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Real function on ℝ² as `Σ_k a_k(r) cos kθ + b_k(r) sin kθ`, `k = 0..=K`,
/// with each coefficient sampled at the radial nodes.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    // [k * n_r + i]
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        *self.grid == *other.grid && self.cos == other.cos && self.sin == other.sin
    }
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let len = (grid.k_max() + 1) * grid.n_r();
        ScalarField {
            grid: Arc::clone(grid),
            cos: vec![0.0; len],
            sin: vec![0.0; len],
        }
    }

    /// Field with a single radial profile in mode 0.
    pub fn radial(grid: &Arc<Grid>, profile: impl Fn(f64) -> f64) -> Self {
        let mut f = Self::zeros(grid);
        f.set_mode(0, |r| (profile(r), 0.0));
        f
    }

    /// Overwrites mode `k` with `(a_k(r), b_k(r))`.
    pub fn set_mode(&mut self, k: usize, profile: impl Fn(f64) -> (f64, f64)) {
        let n = self.grid.n_r();
        for i in 0..n {
            let (a, b) = profile(self.grid.r()[i]);
            self.cos[k * n + i] = a;
            self.sin[k * n + i] = if k == 0 { 0.0 } else { b };
        }
    }

    pub fn with_mode(mut self, k: usize, profile: impl Fn(f64) -> (f64, f64)) -> Self {
        self.set_mode(k, profile);
        self
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn k_max(&self) -> usize {
        self.grid.k_max()
    }

    pub fn cos_mode(&self, k: usize) -> &[f64] {
        let n = self.grid.n_r();
        &self.cos[k * n..(k + 1) * n]
    }

    pub fn sin_mode(&self, k: usize) -> &[f64] {
        let n = self.grid.n_r();
        &self.sin[k * n..(k + 1) * n]
    }

    pub fn cos_mode_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.grid.n_r();
        &mut self.cos[k * n..(k + 1) * n]
    }

    pub fn sin_mode_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.grid.n_r();
        &mut self.sin[k * n..(k + 1) * n]
    }

    pub fn check_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|v| v.is_finite())
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.cos
            .iter()
            .chain(&self.sin)
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: f64) -> ScalarField {
        let mut out = self.clone();
        out.cos
            .iter_mut()
            .chain(out.sin.iter_mut())
            .for_each(|v| *v *= a);
        out
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        debug_assert!(*self.grid == *other.grid);
        for (x, y) in self.cos.iter_mut().zip(&other.cos) {
            *x += a * y;
        }
        for (x, y) in self.sin.iter_mut().zip(&other.sin) {
            *x += a * y;
        }
    }

    /// Multiplies every mode by the radial profile `w(r_i)`.
    pub fn times_radial(&self, w: &[f64]) -> ScalarField {
        let n = self.grid.n_r();
        let mut out = self.clone();
        for (c, s) in out.cos.chunks_mut(n).zip(out.sin.chunks_mut(n)) {
            for ((c, s), w) in c.iter_mut().zip(s.iter_mut()).zip(w) {
                *c *= w;
                *s *= w;
            }
        }
        out
    }

    /// Mode-`k` samples at node `i` as `(a_k, b_k)` arrays of length `K + 1`.
    fn node_coefficients(&self, i: usize, a: &mut [f64], b: &mut [f64]) {
        let n = self.grid.n_r();
        for k in 0..=self.k_max() {
            a[k] = self.cos[k * n + i];
            b[k] = self.sin[k * n + i];
        }
    }

    /// Values on the angular quadrature grid at node `i`.
    pub fn angular_samples(&self, i: usize) -> Vec<f64> {
        let kk = self.k_max() + 1;
        let (mut a, mut b) = (vec![0.0; kk], vec![0.0; kk]);
        self.node_coefficients(i, &mut a, &mut b);
        let mut out = vec![0.0; self.grid.angles().points()];
        self.grid.angles().synthesize(&a, &b, &mut out);
        out
    }

    /// Applies `op` pointwise to the angular samples of `inputs` and projects
    /// the result back onto modes `0..=K`.
    pub fn pointwise(inputs: &[&ScalarField], op: impl Fn(&[f64]) -> f64) -> Result<ScalarField> {
        let first = inputs[0];
        for f in &inputs[1..] {
            first.check_grid(f)?;
        }
        let grid = first.grid();
        let basis = grid.angles();
        let m = basis.points();
        let kk = grid.k_max() + 1;
        let n = grid.n_r();
        let mut out = ScalarField::zeros(grid);
        let mut samples = vec![vec![0.0; m]; inputs.len()];
        let (mut a, mut b) = (vec![0.0; kk], vec![0.0; kk]);
        let mut args = vec![0.0; inputs.len()];
        let mut vals = vec![0.0; m];
        for i in 0..n {
            for (f, s) in inputs.iter().zip(samples.iter_mut()) {
                f.node_coefficients(i, &mut a, &mut b);
                basis.synthesize(&a, &b, s);
            }
            for j in 0..m {
                for (arg, s) in args.iter_mut().zip(&samples) {
                    *arg = s[j];
                }
                vals[j] = op(&args);
            }
            basis.analyze(&vals, &mut a, &mut b);
            for k in 0..kk {
                out.cos[k * n + i] = a[k];
                out.sin[k * n + i] = if k == 0 { 0.0 } else { b[k] };
            }
        }
        Ok(out)
    }

    /// Complex exponential modes `F_m`, `m = -K..=K`, with `F_{-m} = conj F_m`.
    pub fn to_complex(&self) -> CField {
        let n = self.grid.n_r();
        let kmax = self.k_max();
        let mut out = CField::zeros(&self.grid);
        for i in 0..n {
            out.mode_mut(0)[i] = Complex64::new(self.cos[i], 0.0);
        }
        for k in 1..=kmax {
            for i in 0..n {
                let c = Complex64::new(self.cos[k * n + i], -self.sin[k * n + i]) * 0.5;
                out.mode_mut(k as isize)[i] = c;
                out.mode_mut(-(k as isize))[i] = c.conj();
            }
        }
        out
    }

    /// Point evaluation; radial coefficients are interpolated with cubic
    /// Lagrange polynomials in `s`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let r = x.hypot(y);
        let theta = y.atan2(x);
        let mut v = 0.0;
        for k in 0..=self.k_max() {
            let a = interpolate_mode(&self.grid, self.cos_mode(k), k, r);
            let b = if k == 0 {
                0.0
            } else {
                interpolate_mode(&self.grid, self.sin_mode(k), k, r)
            };
            v += a * (k as f64 * theta).cos() + b * (k as f64 * theta).sin();
        }
        v
    }
}

/// Value of a mode-`k` radial coefficient at the origin: zero for `k ≥ 1`,
/// even extrapolation `A + B r²` from the first two nodes for `k = 0`.
pub fn origin_value(grid: &Grid, k: usize, v: &[f64]) -> f64 {
    if k != 0 {
        return 0.0;
    }
    let (r1, r2) = (grid.r()[0], grid.r()[1]);
    (r2 * r2 * v[0] - r1 * r1 * v[1]) / (r2 * r2 - r1 * r1)
}

fn interpolate_mode(grid: &Grid, v: &[f64], k: usize, r: f64) -> f64 {
    let n = grid.n_r();
    if r >= grid.r_max() {
        return v[n - 1];
    }
    let h = grid.h();
    let s = r.ln_1p() / h; // position in units of h; node j (storage) at j+1
    let value = |j: isize| -> f64 {
        if j < 0 {
            origin_value(grid, k, v)
        } else {
            v[j as usize]
        }
    };
    // stencil of four storage indices around s
    let base = (s.floor() as isize - 2).clamp(-1, n as isize - 4);
    let mut out = 0.0;
    for a in 0..4 {
        let ja = base + a;
        let sa = (ja + 1) as f64;
        let mut l = 1.0;
        for b in 0..4 {
            if a != b {
                let sb = (base + b + 1) as f64;
                l *= (s - sb) / (sa - sb);
            }
        }
        out += l * value(ja);
    }
    out
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scaled(rhs)
    }
}

/// Complex-mode field `Σ_{m=-K}^{K} W_m(r) e^{imθ}`; used for the
/// `(∂₁ ± i∂₂)` calculus and for traceless tensors as `H₁₁ + iH₁₂`.
#[derive(Debug, Clone)]
pub struct CField {
    grid: Arc<Grid>,
    // [(m + K) * n_r + i]
    data: Vec<Complex64>,
}

impl CField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        CField {
            grid: Arc::clone(grid),
            data: vec![Complex64::new(0.0, 0.0); (2 * grid.k_max() + 1) * grid.n_r()],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn k_max(&self) -> usize {
        self.grid.k_max()
    }

    fn offset(&self, m: isize) -> usize {
        let k = self.k_max() as isize;
        assert!(m.abs() <= k, "mode {m} outside ±{k}");
        (m + k) as usize * self.grid.n_r()
    }

    pub fn mode(&self, m: isize) -> &[Complex64] {
        let o = self.offset(m);
        &self.data[o..o + self.grid.n_r()]
    }

    pub fn mode_mut(&mut self, m: isize) -> &mut [Complex64] {
        let o = self.offset(m);
        let n = self.grid.n_r();
        &mut self.data[o..o + n]
    }

    pub fn axpy(&mut self, a: f64, other: &CField) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y * a;
        }
    }

    pub fn scaled(&self, a: f64) -> CField {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// Pointwise real part as a real field.
    pub fn re_part(&self) -> ScalarField {
        self.project(|wp, wm| (wp + wm.conj()) * 0.5)
    }

    /// Pointwise imaginary part as a real field.
    pub fn im_part(&self) -> ScalarField {
        self.project(|wp, wm| (wp - wm.conj()) * Complex64::new(0.0, -0.5))
    }

    // real field with complex modes G_k = op(W_k, W_{-k}), k ≥ 0
    fn project(&self, op: impl Fn(Complex64, Complex64) -> Complex64) -> ScalarField {
        let n = self.grid.n_r();
        let mut out = ScalarField::zeros(&self.grid);
        for k in 0..=self.k_max() {
            let kp = self.mode(k as isize).to_vec();
            let km = self.mode(-(k as isize)).to_vec();
            for i in 0..n {
                let g = op(kp[i], km[i]);
                if k == 0 {
                    out.cos_mode_mut(0)[i] = g.re;
                } else {
                    out.cos_mode_mut(k)[i] = 2.0 * g.re;
                    out.sin_mode_mut(k)[i] = -2.0 * g.im;
                }
            }
        }
        out
    }
}

/// Three-point `d/dr` on the mapped nodes (centered in `s`, exact for
/// quadratics in `r`). `origin` is the value at `r = 0`; the last node uses
/// a one-sided stencil.
pub fn radial_derivative<T>(grid: &Grid, v: &[T], origin: T) -> Vec<T>
where
    T: Copy + std::ops::Add<Output = T> + Mul<f64, Output = T>,
{
    let n = grid.n_r();
    let w = grid.derivative_stencil();
    let mut out = Vec::with_capacity(n);
    for i in 0..n - 1 {
        let left = if i == 0 { origin } else { v[i - 1] };
        out.push(left * w[i][0] + v[i] * w[i][1] + v[i + 1] * w[i][2]);
    }
    out.push(v[n - 3] * w[n - 1][0] + v[n - 2] * w[n - 1][1] + v[n - 1] * w[n - 1][2]);
    out
}

fn complex_origin(grid: &Grid, m: isize, v: &[Complex64]) -> Complex64 {
    if m != 0 {
        return Complex64::new(0.0, 0.0);
    }
    let re: Vec<f64> = v[..2].iter().map(|c| c.re).collect();
    let im: Vec<f64> = v[..2].iter().map(|c| c.im).collect();
    Complex64::new(origin_value(grid, 0, &re), origin_value(grid, 0, &im))
}

/// `(∂₁ + i∂₂)`: maps `W_m e^{imθ}` to `(W_m' − m W_m / r) e^{i(m+1)θ}`.
/// Output modes beyond `K` are dropped.
pub fn d_plus(w: &CField) -> CField {
    shift_derivative(w, 1)
}

/// `(∂₁ − i∂₂)`: maps `W_m e^{imθ}` to `(W_m' + m W_m / r) e^{i(m−1)θ}`.
pub fn d_minus(w: &CField) -> CField {
    shift_derivative(w, -1)
}

fn shift_derivative(w: &CField, dir: isize) -> CField {
    let grid = w.grid();
    let k = w.k_max() as isize;
    let r = grid.r();
    let mut out = CField::zeros(grid);
    for m in -k..=k {
        let target = m + dir;
        if target.abs() > k {
            continue;
        }
        let v = w.mode(m);
        let dv = radial_derivative(grid, v, complex_origin(grid, m, v));
        let mf = -(dir as f64) * m as f64;
        let dst = out.mode_mut(target);
        for i in 0..grid.n_r() {
            dst[i] = dv[i] + v[i] * (mf / r[i]);
        }
    }
    out
}

/// `(∂₁f, ∂₂f)` for a real field.
pub fn cartesian_gradient(f: &ScalarField) -> (ScalarField, ScalarField) {
    let p = d_plus(&f.to_complex());
    (p.re_part(), p.im_part())
}

pub fn multiply(f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
    ScalarField::pointwise(&[f, g], |v| v[0] * v[1])
}

/// `∫_{ℝ²} f dx` truncated at `R_max`; only mode 0 contributes.
pub fn integrate(f: &ScalarField) -> f64 {
    let grid = f.grid();
    let w = grid.radial_weights();
    let a0 = f.cos_mode(0);
    let body: f64 = a0
        .iter()
        .zip(w.iter().zip(grid.r()))
        .map(|(a, (w, r))| a * w * r)
        .sum();
    2.0 * PI * (body + grid.origin_weight() * origin_value(grid, 0, a0))
}

/// `‖(1+|x|²)^{β/2} f‖_{L²}` through Parseval.
pub fn weighted_l2(f: &ScalarField, beta: f64) -> f64 {
    let grid = f.grid();
    let w = grid.radial_weights();
    let r = grid.r();
    let mut sum = 0.0;
    for i in 0..grid.n_r() {
        let mut e = f.cos_mode(0)[i].powi(2);
        for k in 1..=f.k_max() {
            e += 0.5 * (f.cos_mode(k)[i].powi(2) + f.sin_mode(k)[i].powi(2));
        }
        sum += w[i] * r[i] * (1.0 + r[i] * r[i]).powf(beta) * e;
    }
    let a0 = f.cos_mode(0);
    sum += grid.origin_weight() * origin_value(grid, 0, a0).powi(2);
    (2.0 * PI * sum).sqrt()
}

/// `Σ_{|β|≤m} ‖(1+|x|²)^{(δ+|β|)/2} D^β f‖_{L²}` over multi-indices β.
pub fn weighted_sobolev_norm(f: &ScalarField, m: u32, delta: f64) -> Result<f64> {
    if m > 2 {
        return Err(Error::UnsupportedOrder(m));
    }
    let mut total = weighted_l2(f, delta);
    if m >= 1 {
        let (fx, fy) = cartesian_gradient(f);
        total += weighted_l2(&fx, delta + 1.0) + weighted_l2(&fy, delta + 1.0);
        if m == 2 {
            let (fxx, fxy) = cartesian_gradient(&fx);
            let (_, fyy) = cartesian_gradient(&fy);
            for d in [&fxx, &fxy, &fyy] {
                total += weighted_l2(d, delta + 2.0);
            }
        }
    }
    Ok(total)
}

/// `sup |f(x)| (1+|x|²)^{β/2}` over nodes and angular samples.
pub fn weighted_sup(f: &ScalarField, beta: f64) -> f64 {
    let grid = f.grid();
    (0..grid.n_r())
        .map(|i| {
            let w = (1.0 + grid.r()[i].powi(2)).powf(0.5 * beta);
            f.angular_samples(i)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                * w
        })
        .fold(0.0, f64::max)
}

/// Origin value of the modes `k ≥ 1`, extrapolated quadratically from the
/// first three nodes and scaled by the largest coefficient. Regular fields
/// have `a_k, b_k ~ r^k`, so this should sit at truncation level.
pub fn regularity_defect(f: &ScalarField) -> f64 {
    let r = f.grid().r();
    let scale = f.max_abs_coefficient().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for k in 1..=f.k_max() {
        // fit c₀ + c₁ρᵏ + c₂ρᵏ⁺² on the first three nodes, ρ = r/r₃; c₀ is the defect
        let rows: Vec<[f64; 3]> = r[..3]
            .iter()
            .map(|ri| {
                let x = ri / r[2];
                [1.0, x.powi(k as i32), x.powi(k as i32 + 2)]
            })
            .collect();
        let det3 = |m: [[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let m = [rows[0], rows[1], rows[2]];
        let d = det3(m);
        for v in [f.cos_mode(k), f.sin_mode(k)] {
            let mut m0 = m;
            for (row, vi) in m0.iter_mut().zip(v) {
                row[0] = *vi;
            }
            worst = worst.max((det3(m0) / d).abs());
        }
    }
    worst / scale
}
