use super::grid::Grid;

/// One real value per radial node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile(pub Vec<f64>);

impl RadialProfile {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for RadialProfile {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Smooth step `ψ(x) = g(x)/(g(x)+g(1-x))`, `g(x) = exp(-1/x)`, with its
/// first two derivatives. Written as `1/(1+e^φ)`, `φ = 1/x - 1/(1-x)`.
fn step(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let y = 1.0 - x;
    let phi = 1.0 / x - 1.0 / y;
    let psi = if phi > 0.0 {
        let e = (-phi).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + phi.exp())
    };
    let dphi = -1.0 / (x * x) - 1.0 / (y * y);
    let d2phi = 2.0 / (x * x * x) - 2.0 / (y * y * y);
    let p = psi * (1.0 - psi);
    let d1 = -dphi * p;
    let d2 = -d2phi * p - dphi * dphi * p * (2.0 * psi - 1.0);
    (psi, d1, d2)
}

/// Cutoff `χ(r)`: zero on `r ≤ 1`, one on `r ≥ 2`, C^∞ in between.
pub fn chi(r: f64) -> f64 {
    step(r - 1.0).0
}

pub fn chi_prime(r: f64) -> f64 {
    step(r - 1.0).1
}

pub fn chi_second(r: f64) -> f64 {
    step(r - 1.0).2
}

/// `χ`, `χ'` and `χ·ln r` sampled on the grid.
pub fn chi_profiles(grid: &Grid) -> (RadialProfile, RadialProfile, RadialProfile) {
    let r = grid.r();
    (
        RadialProfile(r.iter().map(|&r| chi(r)).collect()),
        RadialProfile(r.iter().map(|&r| chi_prime(r)).collect()),
        RadialProfile(r.iter().map(|&r| chi(r) * r.ln()).collect()),
    )
}

/// `ℓ = χ ln r` and its radial derivatives `ℓ'`, and the exact 2-D
/// Laplacian `Δℓ = χ'' ln r + χ'(2 + ln r)/r`.
pub fn chi_log(r: f64) -> (f64, f64, f64) {
    let (c, c1, c2) = step(r - 1.0);
    let l = r.ln();
    (c * l, c1 * l + c / r, c2 * l + c1 * (2.0 + l) / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::grid::build_grid;

    #[test]
    fn support_and_range() {
        assert_eq!(chi(0.5), 0.0);
        assert_eq!(chi(3.0), 1.0);
        let g = build_grid(4, 512, 50.0, -0.5).unwrap();
        let (c, dc, _) = chi_profiles(&g);
        for (i, &r) in g.r().iter().enumerate() {
            assert!((0.0..=1.0).contains(&c[i]));
            if r <= 1.0 || r >= 2.0 {
                assert_eq!(dc[i], 0.0);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for &r in &[1.1, 1.3, 1.5, 1.77, 1.95] {
            let e = 1e-5;
            let fd1 = (chi(r + e) - chi(r - e)) / (2.0 * e);
            let fd2 = (chi_prime(r + e) - chi_prime(r - e)) / (2.0 * e);
            assert!((fd1 - chi_prime(r)).abs() < 1e-8, "r={r}");
            assert!((fd2 - chi_second(r)).abs() < 1e-6, "r={r}");
        }
    }

    #[test]
    fn chi_prime_integrates_to_one() {
        let n = 20000;
        let dr = 1.0 / n as f64;
        let s: f64 = (0..n)
            .map(|i| chi_prime(1.0 + (i as f64 + 0.5) * dr) * dr)
            .sum();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_laplacian_vanishes_outside_annulus() {
        for &r in &[0.5, 2.0, 7.0, 40.0] {
            assert_eq!(chi_log(r).2, 0.0);
        }
        // (ℓ')' + ℓ'/r by differences
        let r = 1.4;
        let e = 1e-5;
        let d = |r: f64| chi_log(r).1;
        let lap = (d(r + e) - d(r - e)) / (2.0 * e) + d(r) / r;
        assert!((lap - chi_log(r).2).abs() < 1e-6);
    }
}
