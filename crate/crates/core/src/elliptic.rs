//! Planar Poisson solver with log extraction.
//!
//! `Δu = f` is solved as `u = c_log·χ(r) ln r + v`, where
//! `c_log = (1/2π)∫f` and `v` decays. Each Fourier mode of `v` solves a
//! tridiagonal two-point problem in the mapped coordinate `s = ln(1+r)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{chi_log, integrate, origin_value, weighted_l2, Grid, ScalarField};

/// `u = c_log·χ(r) ln r + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSolution {
    pub c_log: f64,
    pub v: ScalarField,
}

impl PoissonSolution {
    /// Value of the represented solution at a point.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let r = x.hypot(y);
        let log_part = if r > 0.0 { chi_log(r).0 } else { 0.0 };
        self.c_log * log_part + self.v.eval(x, y)
    }
}

/// Tridiagonal discretization of `v'' + v'/r − k²v/r²` on the stored nodes.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    mode: usize,
}

impl RadialOperator {
    pub fn new(grid: &Grid, k: usize) -> Self {
        let n = grid.n_r();
        let h = grid.h();
        let r = grid.r();
        let big_r = grid.r_max();
        let a = |rf: f64| rf / (1.0 + rf);
        let kk = (k * k) as f64;
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            let denom = h * h * r[i] * (1.0 + r[i]);
            let al = a(grid.r_face(i as isize - 1)) / denom;
            let ar = a(grid.r_face(i as isize)) / denom;
            lower[i] = al;
            upper[i] = ar;
            diag[i] = -(al + ar) - kk / (r[i] * r[i]);
        }
        if k == 0 {
            // even ghost at the origin: v(0) = c1 v_1 + c2 v_2
            let (r1, r2) = (r[0] * r[0], r[1] * r[1]);
            diag[0] += lower[0] * r2 / (r2 - r1);
            upper[0] -= lower[0] * r1 / (r2 - r1);
        }
        lower[0] = 0.0;
        // Robin ghost beyond R: v' + (κ/r) v = 0, centered in s
        let kappa = k.max(1) as f64;
        let last = n - 1;
        lower[last] += upper[last];
        diag[last] -= upper[last] * 2.0 * h * (1.0 + big_r) * kappa / big_r;
        upper[last] = 0.0;
        Self {
            lower,
            diag,
            upper,
            mode: k,
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.lower[i] * v[i - 1];
                }
                if i + 1 < n {
                    acc += self.upper[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Thomas algorithm.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        let singular = || Error::SingularSystem { mode: self.mode };
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0];
        if pivot.abs() < f64::MIN_POSITIVE {
            return Err(singular());
        }
        c[0] = self.upper[0] / pivot;
        d[0] = rhs[0] / pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i] * c[i - 1];
            if pivot.abs() < f64::MIN_POSITIVE || !pivot.is_finite() {
                return Err(singular());
            }
            c[i] = self.upper[i] / pivot;
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

fn operators(grid: &Grid) -> Vec<RadialOperator> {
    (0..=grid.k_max())
        .map(|k| RadialOperator::new(grid, k))
        .collect()
}

/// Discrete Laplacian used by the solver, applied mode by mode.
pub fn discrete_laplacian(v: &ScalarField) -> ScalarField {
    let grid = v.grid();
    let mut out = ScalarField::zeros(grid);
    for op in operators(grid) {
        let k = op.mode;
        out.cos_mode_mut(k)
            .copy_from_slice(&op.apply(v.cos_mode(k)));
        if k > 0 {
            out.sin_mode_mut(k)
                .copy_from_slice(&op.apply(v.sin_mode(k)));
        }
    }
    out
}

/// `Δ(χ ln r)` sampled on the nodes, from the closed form.
pub fn log_laplacian(grid: &Arc<Grid>) -> ScalarField {
    ScalarField::radial(grid, |r| chi_log(r).2)
}

fn check_tail(f: &ScalarField) -> Result<()> {
    let grid = f.grid();
    let a0 = f.cos_mode(0);
    let r = grid.r();
    let r_max = grid.r_max();
    let scale = a0
        .iter()
        .zip(r)
        .map(|(v, r)| v.abs() * (1.0 + r * r))
        .fold(0.0, f64::max);
    let band_max = |lo: f64, hi: f64| {
        a0.iter()
            .zip(r)
            .filter(|(_, &r)| r >= lo && r <= hi)
            .map(|(v, r)| v.abs() * r * r)
            .fold(0.0, f64::max)
    };
    let outer = band_max(0.75 * r_max, r_max);
    let inner = band_max(0.125 * r_max, 0.5 * r_max);
    if outer > 1e-10 * scale.max(f64::MIN_POSITIVE) && outer >= inner {
        return Err(Error::NonDecayingRhs {
            ratio: outer / inner.max(f64::MIN_POSITIVE),
        });
    }
    Ok(())
}

fn cell_average_mode(grid: &Grid, g: &[f64]) -> Vec<f64> {
    let r = grid.r();
    let n = g.len();
    let big: Vec<f64> = g.iter().zip(r).map(|(g, r)| g * r * (1.0 + r)).collect();
    (0..n)
        .map(|i| {
            let left = if i == 0 { 0.0 } else { big[i - 1] };
            let right = if i + 1 < n {
                big[i + 1]
            } else {
                2.0 * big[n - 1] - big[n - 2]
            };
            (big[i] + (left - 2.0 * big[i] + right) / 24.0) / (r[i] * (1.0 + r[i]))
        })
        .collect()
}

/// Source weighting of the scheme: the cell integral of `r(1+r) f` in `s`
/// (midpoint plus curvature term), divided back by `r(1+r)`.
pub fn cell_average(f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    let mut out = ScalarField::zeros(grid);
    for k in 0..=grid.k_max() {
        out.cos_mode_mut(k)
            .copy_from_slice(&cell_average_mode(grid, f.cos_mode(k)));
        if k > 0 {
            out.sin_mode_mut(k)
                .copy_from_slice(&cell_average_mode(grid, f.sin_mode(k)));
        }
    }
    out
}

/// Solves `Δu = f`, returning the log coefficient and the decaying part.
pub fn poisson_solve(f: &ScalarField, grid: &Arc<Grid>) -> Result<PoissonSolution> {
    if f.grid().as_ref() != grid.as_ref() {
        return Err(Error::GridMismatch);
    }
    if !f.is_finite() {
        return Err(Error::InvalidResolution(
            "right-hand side is not finite".into(),
        ));
    }
    check_tail(f)?;
    let c_log = integrate(f) / (2.0 * PI);
    let mut g = f.clone();
    g.axpy(-c_log, &log_laplacian(grid));
    let mut v = ScalarField::zeros(grid);
    let g = cell_average(&g);
    for op in operators(grid) {
        let k = op.mode;
        let sol = op.solve(g.cos_mode(k))?;
        v.cos_mode_mut(k).copy_from_slice(&sol);
        if k > 0 {
            let sol = op.solve(g.sin_mode(k))?;
            v.sin_mode_mut(k).copy_from_slice(&sol);
        }
    }
    Ok(PoissonSolution { c_log, v })
}

/// Discrete residual `Δ_h v − A(f − c_log Δ(χ ln r))`, where `A` is the
/// source weighting of the scheme and the log part is differentiated exactly.
pub fn poisson_residual(sol: &PoissonSolution, f: &ScalarField) -> Result<ScalarField> {
    sol.v.check_grid(f)?;
    let mut g = f.clone();
    g.axpy(-sol.c_log, &log_laplacian(f.grid()));
    Ok(&discrete_laplacian(&sol.v) - &cell_average(&g))
}

/// Residual measured in `H⁰_{δ+2}` relative to `max(1, ‖f‖)`.
pub fn relative_residual(sol: &PoissonSolution, f: &ScalarField) -> Result<f64> {
    let beta = f.grid().delta() + 2.0;
    let res = poisson_residual(sol, f)?;
    Ok(weighted_l2(&res, beta) / weighted_l2(f, beta).max(1.0))
}

/// `(1/2π)∫ ln|x−y| f(y) dy`, using the multipole expansion of the kernel
/// and radial quadrature. Independent of the tridiagonal solver.
pub fn greens_convolution_oracle(f: &ScalarField, points: &[(f64, f64)]) -> Vec<f64> {
    let grid = f.grid();
    let w = grid.radial_weights();
    let rho = grid.r();
    let kmax = f.k_max();
    points
        .iter()
        .map(|&(x, y)| {
            let rx = x.hypot(y);
            let theta = y.atan2(x);
            let mut total = 0.0;
            for (i, &p) in rho.iter().enumerate() {
                let (small, large) = if p < rx { (p, rx) } else { (rx, p) };
                let mut acc = f.cos_mode(0)[i] * large.ln();
                let ratio = small / large;
                let mut pow = 1.0;
                for k in 1..=kmax {
                    pow *= ratio;
                    let kf = k as f64;
                    let ang = f.cos_mode(k)[i] * (kf * theta).cos()
                        + f.sin_mode(k)[i] * (kf * theta).sin();
                    acc -= 0.5 * pow / kf * ang;
                }
                total += w[i] * p * acc;
            }
            if rx > 0.0 {
                total += grid.origin_weight() * origin_value(grid, 0, f.cos_mode(0)) * rx.ln();
            }
            total
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::build_grid;

    fn gaussian_pair(g: &Arc<Grid>) -> (ScalarField, ScalarField) {
        let f = ScalarField::radial(g, |r| (4.0 * r * r - 4.0) * (-r * r).exp());
        let exact = ScalarField::radial(g, |r| (-r * r).exp());
        (f, exact)
    }

    fn max_error(v: &ScalarField, exact: &ScalarField) -> f64 {
        (v - exact).max_abs_coefficient() / exact.max_abs_coefficient()
    }

    #[test]
    fn radial_gaussian_recovered() {
        let g = build_grid(8, 1024, 60.0, -0.5).unwrap();
        let (f, exact) = gaussian_pair(&g);
        let sol = poisson_solve(&f, &g).unwrap();
        assert!(sol.c_log.abs() < 1e-10);
        assert!(
            max_error(&sol.v, &exact) < 1e-5,
            "{}",
            max_error(&sol.v, &exact)
        );
    }

    #[test]
    fn gaussian_source_has_half_log() {
        let g = build_grid(8, 1024, 60.0, -0.5).unwrap();
        let f = ScalarField::radial(&g, |r| (-r * r).exp());
        let sol = poisson_solve(&f, &g).unwrap();
        assert!((sol.c_log - 0.5).abs() < 1e-6, "{}", sol.c_log);
        // u'(r) = (1 − e^{−r²})/(2r) fixes u up to a constant; compare differences
        let u = |r: f64| sol.eval(r, 0.0);
        let exact = |a: f64, b: f64| {
            let n = 20000;
            let dr = (b - a) / n as f64;
            (0..n)
                .map(|j| {
                    let r = a + (j as f64 + 0.5) * dr;
                    (1.0 - (-r * r).exp()) / (2.0 * r) * dr
                })
                .sum::<f64>()
        };
        let d = u(20.0) - u(1.0);
        assert!((d - exact(1.0, 20.0)).abs() < 1e-4, "{d}");
    }

    #[test]
    fn quadrupole_mode() {
        let g = build_grid(8, 1024, 40.0, -0.5).unwrap();
        let f = ScalarField::zeros(&g).with_mode(2, |r| {
            ((4.0 * r.powi(4) - 12.0 * r * r) * (-r * r).exp(), 0.0)
        });
        let exact = ScalarField::zeros(&g).with_mode(2, |r| (r * r * (-r * r).exp(), 0.0));
        let sol = poisson_solve(&f, &g).unwrap();
        assert!(sol.c_log.abs() < 1e-12);
        assert!(
            max_error(&sol.v, &exact) < 1e-4,
            "{}",
            max_error(&sol.v, &exact)
        );
    }

    #[test]
    fn second_order_convergence() {
        let err = |n| {
            let g = build_grid(8, n, 60.0, -0.5).unwrap();
            let (f, exact) = gaussian_pair(&g);
            max_error(&poisson_solve(&f, &g).unwrap().v, &exact)
        };
        let order = (err(256) / err(512)).log2();
        assert!((order - 2.0).abs() <= 0.3, "{order}");
    }

    #[test]
    fn residual_is_at_solver_precision() {
        let g = build_grid(8, 512, 60.0, -0.5).unwrap();
        let f = ScalarField::radial(&g, |r| (-r * r).exp()).with_mode(3, |r| {
            (
                r.powi(3) * (-r * r).exp(),
                -0.5 * r.powi(3) * (-r * r).exp(),
            )
        });
        let sol = poisson_solve(&f, &g).unwrap();
        assert!(relative_residual(&sol, &f).unwrap() < 1e-12);
    }

    #[test]
    fn oracle_agrees_with_solver() {
        let g = build_grid(8, 1024, 40.0, -0.5).unwrap();
        let f = ScalarField::radial(&g, |r| (-r * r).exp())
            .with_mode(1, |r| (r * (-r * r).exp(), 0.3 * r * (-r * r).exp()));
        let sol = poisson_solve(&f, &g).unwrap();
        let pts = [(1.0, 0.0), (0.3, -0.8), (-2.0, 1.5), (5.0, 5.0)];
        let oracle = greens_convolution_oracle(&f, &pts);
        for (&(x, y), o) in pts.iter().zip(&oracle) {
            assert!(
                (sol.eval(x, y) - o).abs() < 1e-4,
                "({x},{y}) {} vs {o}",
                sol.eval(x, y)
            );
        }
    }

    #[test]
    fn oracle_far_field() {
        let g = build_grid(8, 1024, 60.0, -0.5).unwrap();
        let f = ScalarField::radial(&g, |r| (-r * r).exp());
        let u = greens_convolution_oracle(&f, &[(40.0, 0.0)])[0];
        assert!((u - 0.5 * 40f64.ln()).abs() < 1e-3);
        let (f, _) = gaussian_pair(&g);
        let u = greens_convolution_oracle(&f, &[(1.0, 0.0)])[0];
        assert!((u - (-1f64).exp()).abs() < 1e-4, "{u}");
        assert!(greens_convolution_oracle(&ScalarField::zeros(&g), &[(1.0, 2.0)])[0] == 0.0);
    }

    #[test]
    fn slowly_decaying_source_rejected() {
        let g = build_grid(8, 256, 60.0, -0.5).unwrap();
        let f = ScalarField::radial(&g, |r| 1.0 / (1.0 + r));
        assert!(matches!(
            poisson_solve(&f, &g),
            Err(Error::NonDecayingRhs { .. })
        ));
    }

    #[test]
    fn mode_zero_tail_decays() {
        let g = build_grid(8, 512, 60.0, -0.5).unwrap();
        let f = ScalarField::radial(&g, |r| {
            (1.0 - r * r) * (-r * r).exp() + 0.2 * (-0.5 * r * r).exp()
        });
        let sol = poisson_solve(&f, &g).unwrap();
        let v0 = sol.v.cos_mode(0);
        let mid = g.nearest_node(30.0);
        assert!(v0[g.n_r() - 1].abs() <= v0[mid].abs() + 1e-10);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]
        #[test]
        fn solver_is_linear(a in -2.0..2.0f64, b in -2.0..2.0f64, w in 0.6..1.5f64) {
            let g = build_grid(6, 128, 30.0, -0.5).unwrap();
            let f1 = ScalarField::radial(&g, |r| (-r * r / (w * w)).exp());
            let f2 = ScalarField::zeros(&g).with_mode(2, |r| (r * r * (-r * r).exp(), -(-r * r).exp() * r * r));
            let mut mix = f1.scaled(a);
            mix.axpy(b, &f2);
            let s1 = poisson_solve(&f1, &g).unwrap();
            let s2 = poisson_solve(&f2, &g).unwrap();
            let sm = poisson_solve(&mix, &g).unwrap();
            let mut expect = s1.v.scaled(a);
            expect.axpy(b, &s2.v);
            proptest::prop_assert!((sm.c_log - a * s1.c_log - b * s2.c_log).abs() < 1e-10);
            proptest::prop_assert!((&sm.v - &expect).max_abs_coefficient() < 1e-10);
        }
    }

    #[test]
    fn zero_mass_gives_zero_log() {
        let g = build_grid(8, 256, 30.0, -0.5).unwrap();
        let f = ScalarField::zeros(&g).with_mode(1, |r| ((-r * r).exp(), 0.0));
        assert_eq!(poisson_solve(&f, &g).unwrap().c_log, 0.0);
    }
}
