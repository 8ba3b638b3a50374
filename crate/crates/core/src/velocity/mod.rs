//! Initial velocity fields `v0` for each outer interval, one per model.

mod edge;
mod lpf;

pub use edge::{dual_mode_coefficient, edge_stopping_g, heaviside_alpha, EdgeParams};
pub use lpf::{lpf_energies, lpf_local_fits, lpf_prefit, lpf_velocity, PrefitFunctions};

use crate::error::{Error, Result};
use crate::field::{curvature, dirac_eps, gradient, heaviside_eps, LevelSetState, ScalarField};
use crate::wave::{nine_point_laplacian, BCoeff};

/// Denominators at or below this are treated as an empty region.
pub const DEGENERATE_WEIGHT: f64 = 1e-12;

/// Grayscale image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    intensity: ScalarField,
}

impl Image {
    pub fn new(intensity: ScalarField) -> Result<Self> {
        if intensity.values().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("image intensities must lie in [0, 1]"));
        }
        Ok(Image { intensity })
    }

    /// Clamps every value into `[0, 1]`.
    pub fn from_clamped(field: ScalarField) -> Self {
        Image {
            intensity: field.map(|v| v.clamp(0.0, 1.0)),
        }
    }

    pub fn intensity(&self) -> &ScalarField {
        &self.intensity
    }

    pub fn grid(&self) -> &crate::field::Grid2D {
        self.intensity.grid()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
    /// GAC balloon constant.
    pub u: f64,
    /// LPF kernel scale.
    pub sigma: f64,
    pub n_threshold: f64,
    /// LPF pre-fit window; `None` means `ceil(6 sigma)` rounded up to odd.
    pub window: Option<usize>,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            lambda: 1.0,
            mu: 0.0,
            gamma: 0.0,
            u: 0.0,
            sigma: 3.0,
            n_threshold: 0.5,
            window: None,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be >= 0, got {v}")))
            }
        };
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "lambda must be > 0, got {}",
                self.lambda
            )));
        }
        nonneg("mu", self.mu)?;
        nonneg("gamma", self.gamma)?;
        nonneg("u", self.u)?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if !(self.n_threshold > 0.0 && self.n_threshold < 1.0) {
            return Err(Error::invalid(format!(
                "n_threshold must lie in (0, 1), got {}",
                self.n_threshold
            )));
        }
        if let Some(w) = self.window {
            if w < 3 || w % 2 == 0 {
                return Err(Error::invalid(format!(
                    "window must be odd and >= 3, got {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn resolved_window(&self) -> usize {
        self.window
            .unwrap_or_else(|| ((6.0 * self.sigma).ceil() as usize).max(3) | 1)
    }
}

/// `g * u + <grad g, grad phi>`.
pub fn gac_velocity(phi: &LevelSetState, g: &ScalarField, u: f64) -> Result<ScalarField> {
    phi.grid().ensure_same(g.grid(), "edge map")?;
    let (gx, gy) = gradient(g);
    let (px, py) = gradient(phi.phi());
    let vals = (0..g.values().len())
        .map(|i| {
            g.values()[i] * u + gx.values()[i] * px.values()[i] + gy.values()[i] * py.values()[i]
        })
        .collect();
    ScalarField::new(*g.grid(), vals)
}

fn weighted_mean(image: &Image, weight: impl Fn(usize) -> f64) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, v) in image.intensity().values().iter().enumerate() {
        let w = weight(i);
        num += v * w;
        den += w;
    }
    (den > DEGENERATE_WEIGHT).then(|| num / den)
}

/// Region means `[c1, c2]` of the two-phase model, `None` for an empty region.
pub fn cv_means(image: &Image, phi: &LevelSetState, eps: f64) -> Result<[Option<f64>; 2]> {
    image.grid().ensure_same(phi.grid(), "level set")?;
    let h = heaviside_eps(phi.phi(), eps)?;
    let h = h.values();
    Ok([
        weighted_mean(image, |i| h[i]),
        weighted_mean(image, |i| 1.0 - h[i]),
    ])
}

/// `delta_eps(phi) * lambda * ((I - c2)^2 - (I - c1)^2)`.
pub fn cv_velocity(
    image: &Image,
    phi: &LevelSetState,
    c1: f64,
    c2: f64,
    lambda: f64,
    eps: f64,
) -> Result<ScalarField> {
    image.grid().ensure_same(phi.grid(), "level set")?;
    let d = dirac_eps(phi.phi(), eps)?;
    d.zip_map(image.intensity(), |d, i| {
        d * lambda * ((i - c2) * (i - c2) - (i - c1) * (i - c1))
    })
}

/// Means `[c1, c2, c3, c4]` of the four phases
/// `{phi1 > 0, phi2 > 0}`, `{phi1 > 0, phi2 < 0}`, `{phi1 < 0, phi2 > 0}`,
/// `{phi1 < 0, phi2 < 0}`.
pub fn multiphase_means(
    image: &Image,
    phi1: &LevelSetState,
    phi2: &LevelSetState,
    eps: f64,
) -> Result<[Option<f64>; 4]> {
    image.grid().ensure_same(phi1.grid(), "phi1")?;
    image.grid().ensure_same(phi2.grid(), "phi2")?;
    let h1 = heaviside_eps(phi1.phi(), eps)?;
    let h2 = heaviside_eps(phi2.phi(), eps)?;
    let (h1, h2) = (h1.values(), h2.values());
    Ok([
        weighted_mean(image, |i| h1[i] * h2[i]),
        weighted_mean(image, |i| h1[i] * (1.0 - h2[i])),
        weighted_mean(image, |i| (1.0 - h1[i]) * h2[i]),
        weighted_mean(image, |i| (1.0 - h1[i]) * (1.0 - h2[i])),
    ])
}

/// Data-driven velocities of the coupled pair:
///
/// ```text
/// v1 = delta(phi1) lambda ([(I-c3)^2 - (I-c1)^2] H(phi2) + [(I-c4)^2 - (I-c2)^2] (1 - H(phi2)))
/// v2 = delta(phi2) lambda ([(I-c2)^2 - (I-c1)^2] H(phi1) + [(I-c4)^2 - (I-c3)^2] (1 - H(phi1)))
/// ```
pub fn multiphase_velocities(
    image: &Image,
    phi1: &LevelSetState,
    phi2: &LevelSetState,
    c: [f64; 4],
    lambda: f64,
    eps: f64,
) -> Result<(ScalarField, ScalarField)> {
    image.grid().ensure_same(phi1.grid(), "phi1")?;
    image.grid().ensure_same(phi2.grid(), "phi2")?;
    let h1 = heaviside_eps(phi1.phi(), eps)?;
    let h2 = heaviside_eps(phi2.phi(), eps)?;
    let d1 = dirac_eps(phi1.phi(), eps)?;
    let d2 = dirac_eps(phi2.phi(), eps)?;
    let sq = |i: f64, k: usize| (i - c[k]) * (i - c[k]);
    let g = *image.grid();
    let img = image.intensity().values();
    let v1 = (0..g.len())
        .map(|j| {
            let i = img[j];
            let hw = h2.values()[j];
            d1.values()[j]
                * lambda
                * ((sq(i, 2) - sq(i, 0)) * hw + (sq(i, 3) - sq(i, 1)) * (1.0 - hw))
        })
        .collect();
    let v2 = (0..g.len())
        .map(|j| {
            let i = img[j];
            let hw = h1.values()[j];
            d2.values()[j]
                * lambda
                * ((sq(i, 1) - sq(i, 0)) * hw + (sq(i, 3) - sq(i, 2)) * (1.0 - hw))
        })
        .collect();
    Ok((ScalarField::new(g, v1)?, ScalarField::new(g, v2)?))
}

/// `gamma * (lap9(phi) - div(grad phi / |grad phi|))`.
pub fn distance_regularization(phi: &ScalarField, gamma: f64) -> Result<ScalarField> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("gamma must be >= 0, got {gamma}")));
    }
    if gamma == 0.0 {
        return Ok(ScalarField::zeros(*phi.grid()));
    }
    let lap = nine_point_laplacian(phi, &BCoeff::Scalar(1.0))?;
    // curvature() already carries the minus sign of -div.
    let k = curvature(phi);
    lap.zip_map(&k, |l, k| gamma * (l + k))
}
