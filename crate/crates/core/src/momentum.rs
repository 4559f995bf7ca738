//! Momentum constraint `∂ᵢH′ᵢⱼ + Hᵢⱼ∂ᵢλ = −u̇∂ⱼu + ½∂ⱼτ − ½τ∂ⱼλ`.
//!
//! Tensors are handled through `W = H₁₁ + iH₁₂`, for which the divergence
//! `(∂ᵢHᵢ₁) + i(∂ᵢHᵢ₂)` is `D₋W` with `D₋ = ∂₁ − i∂₂`. The singular parts
//! `H_b`, `H_{ρ,η}` and `τ_sing` are kept in closed form; only decaying
//! corrections are discretized.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::fields::{
    cartesian_gradient, chi, chi_log, chi_prime, origin_value, radial_derivative, CField, Grid,
    ScalarField, SeedData, TracelessSymTensorField,
};

/// Far-field charges `b` and `(p, q) = ρ(cos η, sin η)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SingularTensorParams {
    pub b: f64,
    pub p: f64,
    pub q: f64,
}

impl SingularTensorParams {
    pub fn new(b: f64, p: f64, q: f64) -> Self {
        Self { b, p, q }
    }

    pub fn from_polar(b: f64, rho: f64, eta: f64) -> Self {
        Self {
            b,
            p: rho * eta.cos(),
            q: rho * eta.sin(),
        }
    }

    pub fn rho(&self) -> f64 {
        self.p.hypot(self.q)
    }

    /// `η ∈ [0, 2π)`; zero when `ρ = 0`.
    pub fn eta(&self) -> f64 {
        normalized_angle(self.q.atan2(self.p))
    }

    fn pq(&self) -> Complex64 {
        Complex64::new(self.p, self.q)
    }
}

fn normalized_angle(a: f64) -> f64 {
    if a == 0.0 || !a.is_finite() {
        return 0.0;
    }
    let a = a.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Result of one momentum solve: `H′ = (mχ/r)e^{i(θ+φ)} + H_b + H_{3θ} + H̃′`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumOutput {
    pub m: f64,
    pub phi: f64,
    pub h_tilde: TracelessSymTensorField,
}

impl MomentumOutput {
    /// `m e^{iφ}` as `(m cos φ, m sin φ)`.
    pub fn leading_vector(&self) -> (f64, f64) {
        (self.m * self.phi.cos(), self.m * self.phi.sin())
    }
}

fn radial_cfield(grid: &Arc<Grid>, modes: &[(isize, &dyn Fn(f64) -> Complex64)]) -> CField {
    let mut out = CField::zeros(grid);
    let r = grid.r().to_vec();
    for (m, profile) in modes {
        for (dst, &ri) in out.mode_mut(*m).iter_mut().zip(&r) {
            *dst += profile(ri);
        }
    }
    out
}

fn complex_from_components(f1: &ScalarField, f2: &ScalarField) -> CField {
    let mut w = f1.to_complex();
    let b = f2.to_complex();
    let k = w.k_max() as isize;
    for m in -k..=k {
        let src = b.mode(m).to_vec();
        for (x, y) in w.mode_mut(m).iter_mut().zip(src) {
            *x += y * Complex64::i();
        }
    }
    w
}

/// `W` of `H_b = −(bχ/2r)(cos 2θ, sin 2θ)`.
fn w_b(b: f64, grid: &Arc<Grid>) -> CField {
    radial_cfield(grid, &[(2, &|r| Complex64::from(-b * chi(r) / (2.0 * r)))])
}

/// `W` of the `θ+η` half of `H_{ρ,η}`.
fn w_lead(pq: Complex64, grid: &Arc<Grid>) -> CField {
    radial_cfield(grid, &[(1, &|r| -pq * (chi(r) / (4.0 * r)))])
}

/// `W` of the `3θ−η` half of `H_{ρ,η}`.
fn w_three(pq: Complex64, grid: &Arc<Grid>) -> CField {
    radial_cfield(grid, &[(3, &|r| -pq.conj() * (chi(r) / (4.0 * r)))])
}

/// Closed-form sampling of `H_b`, `H_{ρ,η}` and `τ_sing = (b + ρcos(θ−η))χ/r`.
pub fn singular_tensors(
    params: SingularTensorParams,
    grid: &Arc<Grid>,
) -> (
    TracelessSymTensorField,
    TracelessSymTensorField,
    ScalarField,
) {
    let h_b = TracelessSymTensorField::from_complex(&w_b(params.b, grid));
    let mut w = w_lead(params.pq(), grid);
    w.axpy(1.0, &w_three(params.pq(), grid));
    let h_re = TracelessSymTensorField::from_complex(&w);
    (h_b, h_re, tau_singular(params, grid))
}

fn tau_singular(params: SingularTensorParams, grid: &Arc<Grid>) -> ScalarField {
    ScalarField::zeros(grid)
        .with_mode(0, |r| (params.b * chi(r) / r, 0.0))
        .with_mode(1, |r| (params.p * chi(r) / r, params.q * chi(r) / r))
}

/// `∂₁τ_sing + i∂₂τ_sing` in closed form.
fn grad_tau_singular(params: SingularTensorParams, grid: &Arc<Grid>) -> CField {
    let b = params.b;
    let pq = params.pq();
    radial_cfield(
        grid,
        &[
            (1, &|r| {
                Complex64::from(b * (chi_prime(r) / r - chi(r) / (r * r)))
            }),
            (2, &|r| {
                pq.conj() * 0.5 * (chi_prime(r) / r - 2.0 * chi(r) / (r * r))
            }),
            (0, &|r| pq * 0.5 * chi_prime(r) / r),
        ],
    )
}

/// `div H_b = −(bχ/2r² + bχ′/2r)(cos θ, sin θ)`.
pub fn div_h_b(b: f64, grid: &Arc<Grid>) -> CField {
    radial_cfield(
        grid,
        &[(1, &|r| {
            Complex64::from(-b * (chi(r) / (2.0 * r * r) + chi_prime(r) / (2.0 * r)))
        })],
    )
}

/// `div` of the `3θ−η` part: `−(ρχ/2r² + ρχ′/4r)(cos(2θ−η), sin(2θ−η))`.
pub fn div_h_three(params: SingularTensorParams, grid: &Arc<Grid>) -> CField {
    let pq = params.pq();
    radial_cfield(
        grid,
        &[(2, &|r| {
            -pq.conj() * (chi(r) / (2.0 * r * r) + chi_prime(r) / (4.0 * r))
        })],
    )
}

/// `div` of `(mχ/r)e^{i(θ+φ)}`: `(mχ′/r)(cos φ, sin φ)`.
pub fn div_leading(m: f64, phi: f64, grid: &Arc<Grid>) -> CField {
    let c = Complex64::from_polar(m, phi);
    radial_cfield(grid, &[(0, &|r| c * (chi_prime(r) / r))])
}

/// `∇λ` for `λ = −αχ ln r + λ̃`, as two real fields.
fn grad_lambda(alpha: f64, lambda_tilde: &ScalarField) -> (ScalarField, ScalarField) {
    let (lx, ly) = cartesian_gradient(lambda_tilde);
    let grid = lambda_tilde.grid();
    let radial = ScalarField::zeros(grid).with_mode(1, |r| (-alpha * chi_log(r).1, 0.0));
    let radial_y = ScalarField::zeros(grid).with_mode(1, |r| (0.0, -alpha * chi_log(r).1));
    (&lx + &radial, &ly + &radial_y)
}

fn check_grids(
    seed: &SeedData,
    lambda_tilde: &ScalarField,
    h: &TracelessSymTensorField,
) -> Result<()> {
    seed.udot.check_grid(lambda_tilde)?;
    seed.udot.check_grid(&h.h11)?;
    seed.udot.check_grid(&h.h12)
}

/// Components `(f₁, f₂)` of the source of the decaying part of the first
/// correction:
/// `f_j = −u̇∂_ju + ½∂_jτ̃ − ½τ̃∂_jλ − H̃_ij∂_iλ + (ρχ′/4r)e_j
///        − ∂_iλ̃(H_b+H_{ρ,η})_ij − ½χ(b+ρcos(θ−η))/r ∂_jλ̃`.
pub fn momentum_rhs_f(
    seed: &SeedData,
    alpha: f64,
    lambda_tilde: &ScalarField,
    h_tilde: &TracelessSymTensorField,
    params: SingularTensorParams,
) -> Result<(ScalarField, ScalarField)> {
    check_grids(seed, lambda_tilde, h_tilde)?;
    let grid = seed.grid();
    let (ux, uy) = cartesian_gradient(&seed.u);
    let (tx, ty) = cartesian_gradient(&seed.tau_tilde);
    let (lx, ly) = grad_lambda(alpha, lambda_tilde);
    let (ltx, lty) = cartesian_gradient(lambda_tilde);
    let (hb, hre, tau_s) = singular_tensors(params, grid);
    let hs11 = &hb.h11 + &hre.h11;
    let hs12 = &hb.h12 + &hre.h12;
    let e = ScalarField::radial(grid, |r| chi_prime(r) / (4.0 * r));
    let inputs = [
        &seed.udot,
        &ux,
        &uy,
        &seed.tau_tilde,
        &tx,
        &ty,
        &lx,
        &ly,
        &h_tilde.h11,
        &h_tilde.h12,
        &ltx,
        &lty,
        &hs11,
        &hs12,
        &tau_s,
        &e,
    ];
    let (p, q) = (params.p, params.q);
    let f1 = ScalarField::pointwise(&inputs, |v| {
        let [ud, ux, _uy, tt, tx, _ty, lx, ly, h11, h12, ltx, lty, s11, s12, ts, e]: [f64; 16] =
            v.try_into().unwrap();
        -ud * ux + 0.5 * tx - 0.5 * tt * lx - (h11 * lx + h12 * ly) + p * e
            - (ltx * s11 + lty * s12)
            - 0.5 * ts * ltx
    })?;
    let f2 = ScalarField::pointwise(&inputs, |v| {
        let [ud, _ux, uy, tt, _tx, ty, lx, ly, h11, h12, ltx, lty, s11, s12, ts, e]: [f64; 16] =
            v.try_into().unwrap();
        -ud * uy + 0.5 * ty - 0.5 * tt * ly - (h12 * lx - h11 * ly) + q * e
            - (ltx * s12 - lty * s11)
            - 0.5 * ts * lty
    })?;
    Ok((f1, f2))
}

/// `(1/2π)∫ f₁ + i(1/2π)∫ f₂` of the first-correction source. Same
/// quadrature as the divergence inversion, so it equals its `m e^{iφ}`.
pub fn log_coefficient(f1: &ScalarField, f2: &ScalarField) -> (f64, f64) {
    (
        crate::fields::integrate(f1) / (2.0 * PI),
        crate::fields::integrate(f2) / (2.0 * PI),
    )
}

/// Inverts `D₋W = G` mode by mode with a trapezoid rule in `s` applied to
/// `(r^m W)_s = (1+r) r^m G_{m−1}`. Modes `m ≥ 1` start from the origin,
/// modes `m ≤ 0` from `W(R) = 0`. Returns the `m = 1` coefficient
/// `r W₁ |_{R}` together with `W`.
fn invert_d_minus(g: &CField) -> (Complex64, CField) {
    let grid = g.grid().clone();
    let k = g.k_max() as isize;
    let n = grid.n_r();
    let r = grid.r();
    let h = grid.h();
    let ow = grid.origin_weight();
    let mut w = CField::zeros(&grid);
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let mut c = Complex64::new(0.0, 0.0);
    for m in -k..=k {
        let src = if m > -k { g.mode(m - 1) } else { &zero[..] };
        let phi: Vec<Complex64> = src.iter().zip(r).map(|(g, r)| g * (1.0 + r)).collect();
        let e = end_slopes(&grid, src, m);
        let out = w.mode_mut(m);
        let mf = m as f64;
        if m >= 1 {
            out[0] = phi[0] * (0.5 * h);
            for i in 0..n - 1 {
                let rho = (r[i] / r[i + 1]).powf(mf);
                out[i + 1] = out[i] * rho + (phi[i] * rho + phi[i + 1]) * (0.5 * h);
            }
            let g0 = if m == 1 {
                mode_origin(&grid, src)
            } else {
                zero[0]
            };
            for ((o, ei), ri) in out.iter_mut().zip(&e).zip(r) {
                *o += (g0 / ri - ei) * ow;
            }
            if m == 1 {
                c = out[n - 1] * r[n - 1];
            }
        } else {
            out[n - 1] = Complex64::new(0.0, 0.0);
            for i in (0..n - 1).rev() {
                let sigma = (r[i] / r[i + 1]).powf(-mf);
                out[i] = out[i + 1] * sigma - (phi[i] + phi[i + 1] * sigma) * (0.5 * h);
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += (e[n - 1] * (r[n - 1] / r[i]).powf(mf) - e[i]) * ow;
            }
        }
    }
    (c, w)
}

fn mode_origin(grid: &Grid, v: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = v[..2].iter().map(|z| z.re).collect();
    let im: Vec<f64> = v[..2].iter().map(|z| z.im).collect();
    Complex64::new(origin_value(grid, 0, &re), origin_value(grid, 0, &im))
}

/// `r^{−m} d/ds[(1+r) r^m G]`, the endpoint slopes of the Euler-Maclaurin
/// correction for the trapezoid rule in `s`.
fn end_slopes(grid: &Grid, src: &[Complex64], m: isize) -> Vec<Complex64> {
    let r = grid.r();
    let psi: Vec<Complex64> = src.iter().zip(r).map(|(g, r)| g * (1.0 + r)).collect();
    let origin = if m == 1 {
        mode_origin(grid, src)
    } else {
        Complex64::new(0.0, 0.0)
    };
    let dpsi = radial_derivative(grid, &psi, origin);
    psi.iter()
        .zip(&dpsi)
        .zip(r)
        .map(|((p, d), ri)| (d + p * (m as f64 / ri)) * (1.0 + ri))
        .collect()
}

/// Solves `∂ᵢKᵢⱼ = f_j` for a symmetric traceless `K = (mχ/r)e^{i(θ+φ)} + K̃`
/// with decaying `K̃`. `m e^{iφ} = (1/2π)∫(f₁ + i f₂)`.
pub fn div_constraint_solve(
    f1: &ScalarField,
    f2: &ScalarField,
) -> Result<(f64, f64, TracelessSymTensorField)> {
    f1.check_grid(f2)?;
    let grid = f1.grid();
    let (c, mut w) = invert_d_minus(&complex_from_components(f1, f2));
    for (dst, &ri) in w.mode_mut(1).iter_mut().zip(grid.r()) {
        *dst -= c * (chi(ri) / ri);
    }
    let m = c.norm();
    let phi = if m == 0.0 {
        0.0
    } else {
        normalized_angle(c.arg())
    };
    Ok((m, phi, TracelessSymTensorField::from_complex(&w)))
}

/// Decaying correction `H̃⁽²⁾` for the source `(bχ′/r)(cos θ, sin θ)`.
pub fn correction_h2(b: f64, grid: &Arc<Grid>) -> TracelessSymTensorField {
    let f = radial_cfield(grid, &[(1, &|r| Complex64::from(b * chi_prime(r) / r))]);
    TracelessSymTensorField::from_complex(&invert_d_minus(&f).1)
}

/// Decaying correction `H̃⁽³⁾` for the source `(ρχ′/2r)(cos(2θ−η), sin(2θ−η))`.
pub fn correction_h3(params: SingularTensorParams, grid: &Arc<Grid>) -> TracelessSymTensorField {
    let pq = params.pq();
    let f = radial_cfield(grid, &[(2, &|r| pq.conj() * (chi_prime(r) / (2.0 * r)))]);
    TracelessSymTensorField::from_complex(&invert_d_minus(&f).1)
}

/// Full momentum solve at fixed `(b, p, q)` and state `(α, λ̃, H̃)`.
pub fn assemble_momentum(
    seed: &SeedData,
    alpha: f64,
    lambda_tilde: &ScalarField,
    h_tilde_in: &TracelessSymTensorField,
    params: SingularTensorParams,
) -> Result<MomentumOutput> {
    let grid = seed.grid();
    let (f1, f2) = momentum_rhs_f(seed, alpha, lambda_tilde, h_tilde_in, params)?;
    let (m, phi, mut h_tilde) = div_constraint_solve(&f1, &f2)?;
    h_tilde.axpy(1.0, &correction_h2(params.b, grid));
    h_tilde.axpy(1.0, &correction_h3(params, grid));
    Ok(MomentumOutput { m, phi, h_tilde })
}

/// Residual of the momentum equation at the half nodes `r_{i+½}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumResidual {
    /// `‖R₁‖ + ‖R₂‖` in `H⁰_{δ+2}`.
    pub norm: f64,
    /// Largest pointwise `|R|` over half nodes and angular samples.
    pub max: f64,
}

/// Evaluates `∂ᵢH′ᵢⱼ + Hᵢⱼ∂ᵢλ + u̇∂ⱼu − ½∂ⱼτ + ½τ∂ⱼλ` with
/// `H = H_b + H_{ρ,η} + H̃_in` and `H′ = H_b + H_{ρ,η} + H̃_out`.
/// Closed-form parts are differentiated exactly; the sampled part through
/// the same trapezoid form of `D₋` used by the solver.
pub fn momentum_residual(
    seed: &SeedData,
    alpha: f64,
    lambda_tilde: &ScalarField,
    h_tilde_in: &TracelessSymTensorField,
    params: SingularTensorParams,
    h_tilde_out: &TracelessSymTensorField,
) -> Result<MomentumResidual> {
    check_grids(seed, lambda_tilde, h_tilde_in)?;
    seed.udot.check_grid(&h_tilde_out.h11)?;
    let grid = seed.grid();
    let (ux, uy) = cartesian_gradient(&seed.u);
    let (tx, ty) = cartesian_gradient(&seed.tau_tilde);
    let (lx, ly) = grad_lambda(alpha, lambda_tilde);
    let (hb, hre, tau_s) = singular_tensors(params, grid);
    let h11 = &(&hb.h11 + &hre.h11) + &h_tilde_in.h11;
    let h12 = &(&hb.h12 + &hre.h12) + &h_tilde_in.h12;
    let tau = &tau_s + &seed.tau_tilde;
    let gts = grad_tau_singular(params, grid);
    let (gsx, gsy) = (gts.re_part(), gts.im_part());
    let inputs = [
        &seed.udot, &ux, &uy, &tau, &tx, &ty, &gsx, &gsy, &lx, &ly, &h11, &h12,
    ];
    // source S = −u̇∇u + ½∇τ − ½τ∇λ − H∇λ
    let s1 = ScalarField::pointwise(&inputs, |v| {
        let [ud, ux, _, t, tx, _, gx, _, lx, ly, h11, h12]: [f64; 12] = v.try_into().unwrap();
        -ud * ux + 0.5 * (tx + gx) - 0.5 * t * lx - (h11 * lx + h12 * ly)
    })?;
    let s2 = ScalarField::pointwise(&inputs, |v| {
        let [ud, _, uy, t, _, ty, _, gy, lx, ly, h11, h12]: [f64; 12] = v.try_into().unwrap();
        -ud * uy + 0.5 * (ty + gy) - 0.5 * t * ly - (h12 * lx - h11 * ly)
    })?;
    let mut target = complex_from_components(&s1, &s2);
    target.axpy(-1.0, &div_h_b(params.b, grid));
    target.axpy(-1.0, &div_h_three(params, grid));
    let mut w = h_tilde_out.to_complex();
    w.axpy(1.0, &w_lead(params.pq(), grid));
    Ok(half_node_residual(&w, &target, grid.delta() + 2.0))
}

fn half_node_residual(w: &CField, g: &CField, beta: f64) -> MomentumResidual {
    let grid = w.grid();
    let k = w.k_max() as isize;
    let n = grid.n_r();
    let r = grid.r();
    let h = grid.h();
    let zero = Complex64::new(0.0, 0.0);
    let zeros = vec![zero; n];
    let slopes: Vec<Vec<Complex64>> = (-k - 1..=k)
        .map(|j| end_slopes(grid, if j >= -k { g.mode(j) } else { &zeros }, j + 1))
        .collect();
    // residual modes indexed by the divergence mode j = m − 1, j = −K−1..=K
    let modes: Vec<Vec<Complex64>> = (-k - 1..=k)
        .map(|j| {
            let m = j + 1;
            let mf = m as f64;
            (0..n - 1)
                .map(|i| {
                    let gi = if j >= -k { g.mode(j)[i] } else { zero };
                    let gn = if j >= -k { g.mode(j)[i + 1] } else { zero };
                    let (wi, wn) = if m <= k {
                        (w.mode(m)[i], w.mode(m)[i + 1])
                    } else {
                        (zero, zero)
                    };
                    let rho = (r[i] / r[i + 1]).powf(mf);
                    let rh = grid.r_face(i as isize);
                    let lhs = (wn - wi * rho) / h;
                    let rhs = (gi * ((1.0 + r[i]) * rho) + gn * (1.0 + r[i + 1])) * 0.5
                        - (slopes[(j + k + 1) as usize][i + 1]
                            - slopes[(j + k + 1) as usize][i] * rho)
                            * (h / 12.0);
                    (lhs - rhs) * ((r[i + 1] / rh).powf(mf) / (1.0 + rh))
                })
                .collect()
        })
        .collect();
    let at = |j: isize, i: usize| -> Complex64 {
        if j < -k - 1 || j > k {
            zero
        } else {
            modes[(j + k + 1) as usize][i]
        }
    };
    let theta = grid.angles().theta().to_vec();
    let mut sum1 = 0.0;
    let mut sum2 = 0.0;
    let mut max = 0.0f64;
    for i in 0..n - 1 {
        let rh = grid.r_face(i as isize);
        let weight = h * (1.0 + rh) * rh * (1.0 + rh * rh).powf(beta);
        let (mut e1, mut e2) = (0.0, 0.0);
        for j in -k - 1..=k {
            let a = at(j, i);
            let b = at(-j, i).conj();
            e1 += ((a + b) * 0.5).norm_sqr();
            e2 += ((a - b) * 0.5).norm_sqr();
        }
        sum1 += weight * e1;
        sum2 += weight * e2;
        for &t in &theta {
            let v: Complex64 = (-k - 1..=k)
                .map(|j| at(j, i) * Complex64::from_polar(1.0, j as f64 * t))
                .sum();
            max = max.max(v.norm());
        }
    }
    MomentumResidual {
        norm: (TAU * sum1).sqrt() + (TAU * sum2).sqrt(),
        max,
    }
}
