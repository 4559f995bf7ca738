use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::grid::Grid;
use super::scalar::ScalarField;
use crate::error::{Error, Result};

/// `amp · exp(−|x − x₀|² / w²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussBump {
    pub amp: f64,
    pub x0: f64,
    pub y0: f64,
    pub w: f64,
}

impl GaussBump {
    pub fn centered(amp: f64, w: f64) -> Self {
        GaussBump {
            amp,
            x0: 0.0,
            y0: 0.0,
            w,
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let d2 = (x - self.x0).powi(2) + (y - self.y0).powi(2);
        self.amp * (-d2 / (self.w * self.w)).exp()
    }

    /// Exact `(∂₁, ∂₂)` of the bump.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let v = self.value(x, y);
        let s = -2.0 / (self.w * self.w);
        (s * (x - self.x0) * v, s * (y - self.y0) * v)
    }
}

impl fmt::Display for GaussBump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gauss amp={:?} x0={:?} y0={:?} w={:?}",
            self.amp, self.x0, self.y0, self.w
        )
    }
}

impl FromStr for GaussBump {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut parts = s.split_whitespace();
        match parts.next() {
            Some("gauss") => {}
            other => return Err(format!("expected `gauss`, found {other:?}")),
        }
        let (mut amp, mut x0, mut y0, mut w) = (None, Some(0.0), Some(0.0), None);
        for p in parts {
            let (key, val) = p
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, found `{p}`"))?;
            let v: f64 = val
                .parse()
                .map_err(|_| format!("`{val}` is not a number"))?;
            if !v.is_finite() {
                return Err(format!("`{key}` must be finite"));
            }
            match key {
                "amp" => amp = Some(v),
                "x0" => x0 = Some(v),
                "y0" => y0 = Some(v),
                "w" => w = Some(v),
                _ => return Err(format!("unknown bump parameter `{key}`")),
            }
        }
        let w = w.ok_or("missing w")?;
        if w <= 0.0 {
            return Err("bump width must be positive".into());
        }
        Ok(GaussBump {
            amp: amp.ok_or("missing amp")?,
            x0: x0.unwrap(),
            y0: y0.unwrap(),
            w,
        })
    }
}

/// Finite sum of Gaussian bumps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnalyticSpec {
    pub bumps: Vec<GaussBump>,
}

impl AnalyticSpec {
    pub fn new(bumps: Vec<GaussBump>) -> Self {
        AnalyticSpec { bumps }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.bumps.iter().map(|b| b.value(x, y)).sum()
    }

    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        self.bumps.iter().fold((0.0, 0.0), |acc, b| {
            let g = b.gradient(x, y);
            (acc.0 + g.0, acc.1 + g.1)
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        AnalyticSpec {
            bumps: self
                .bumps
                .iter()
                .map(|b| GaussBump {
                    amp: b.amp * a,
                    ..*b
                })
                .collect(),
        }
    }
}

/// Samples an analytic spec onto the grid via the angular transform at every
/// radial node.
pub fn sample_analytic(spec: &AnalyticSpec, grid: &Arc<Grid>) -> Result<ScalarField> {
    for b in &spec.bumps {
        if b.amp == 0.0 {
            continue;
        }
        let radius = b.x0.hypot(b.y0);
        let spacing = grid.spacing_at(radius);
        if b.w < 4.0 * spacing {
            return Err(Error::UnresolvedSpec {
                width: b.w,
                radius,
                spacing,
            });
        }
    }
    let basis = grid.angles();
    let kk = grid.k_max() + 1;
    let mut out = ScalarField::zeros(grid);
    let mut vals = vec![0.0; basis.points()];
    let (mut a, mut b) = (vec![0.0; kk], vec![0.0; kk]);
    for (i, &r) in grid.r().iter().enumerate() {
        for (v, t) in vals.iter_mut().zip(basis.theta()) {
            *v = spec.value(r * t.cos(), r * t.sin());
        }
        basis.analyze(&vals, &mut a, &mut b);
        for k in 0..kk {
            out.cos_mode_mut(k)[i] = a[k];
            if k > 0 {
                out.sin_mode_mut(k)[i] = b[k];
            }
        }
    }
    Ok(out)
}
