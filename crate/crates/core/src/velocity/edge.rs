use std::f64::consts::PI;

use super::Image;
use crate::error::{Error, Result};
use crate::field::{gaussian_convolve, gradient_magnitude, ScalarField};

/// Edge-stopping construction `g = 1 / (1 + A (s / s_max)^p)` where `s` is the
/// gradient magnitude of the Gaussian-smoothed image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeParams {
    pub sigma_g: f64,
    pub amplitude: f64,
    pub exponent: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        EdgeParams {
            sigma_g: 1.5,
            amplitude: 100.0,
            exponent: 2.0,
        }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("edge.sigma_g", self.sigma_g),
            ("edge.amplitude", self.amplitude),
            ("edge.exponent", self.exponent),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Edge map in `(0, 1]`, normalized so its maximum is exactly 1.
pub fn edge_stopping_g(image: &Image, params: &EdgeParams) -> Result<ScalarField> {
    params.validate()?;
    let smooth = gaussian_convolve(image.intensity(), params.sigma_g)?;
    let s = gradient_magnitude(&smooth);
    let s_max = s.max();
    if s_max <= 0.0 {
        return Ok(ScalarField::filled(*image.grid(), 1.0));
    }
    let raw = s.map(|v| 1.0 / (1.0 + params.amplitude * (v / s_max).powf(params.exponent)));
    let top = raw.max();
    Ok(raw.map(|v| v / top))
}

/// `H_alpha(g) = 1/2 (1 + 2/pi * atan((g - n) / alpha))`.
pub fn heaviside_alpha(g: &ScalarField, n: f64, alpha: f64) -> Result<ScalarField> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
    }
    Ok(g.map(|v| 0.5 * (1.0 + (2.0 / PI) * ((v - n) / alpha).atan())))
}

/// Spatially varying curvature coefficient `b * H_alpha(g)`.
pub fn dual_mode_coefficient(b: f64, g: &ScalarField, n: f64, alpha: f64) -> Result<ScalarField> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!("b must be > 0, got {b}")));
    }
    Ok(heaviside_alpha(g, n, alpha)?.scale(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid2D;

    #[test]
    fn constant_image_gives_unit_edge_map() {
        let g = Grid2D::new(16, 16).unwrap();
        let img = Image::new(ScalarField::filled(g, 0.6)).unwrap();
        let e = edge_stopping_g(&img, &EdgeParams::default()).unwrap();
        assert!(e.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn step_edge_lowers_g() {
        let g = Grid2D::new(40, 20).unwrap();
        let img = Image::new(ScalarField::from_fn(
            g,
            |x, _| if x < 20 { 0.0 } else { 1.0 },
        ))
        .unwrap();
        let e = edge_stopping_g(&img, &EdgeParams::default()).unwrap();
        assert_eq!(e.max(), 1.0);
        assert!(e.min() > 0.0);
        assert!(e.get(19, 10) < e.get(15, 10));
        assert!(e.get(20, 10) < e.get(24, 10));
        // The steepest column reaches the floor 1 / (1 + A).
        assert!((e.min() - 1.0 / 101.0).abs() < 1e-12);
    }

    #[test]
    fn heaviside_alpha_reference_points() {
        let g = Grid2D::new(3, 3).unwrap();
        let (n, a) = (0.5, 0.2);
        let h = heaviside_alpha(&ScalarField::filled(g, n), n, a).unwrap();
        assert!((h.get(0, 0) - 0.5).abs() < 1e-15);
        let h = heaviside_alpha(&ScalarField::filled(g, n + a), n, a).unwrap();
        assert!((h.get(0, 0) - 0.75).abs() < 1e-15);
        assert!(heaviside_alpha(&ScalarField::zeros(g), n, 0.0).is_err());
    }

    #[test]
    fn dual_mode_in_homogeneous_region() {
        let g = Grid2D::new(3, 3).unwrap();
        let b = 40.0;
        let c = dual_mode_coefficient(b, &ScalarField::filled(g, 1.0), 0.5, 0.2).unwrap();
        let want = b * 0.5 * (1.0 + (2.0 / PI) * 2.5f64.atan());
        assert!((c.get(1, 1) - want).abs() < 1e-12);
        assert!((c.get(1, 1) / b - 0.8789).abs() < 1e-4);
        let low = dual_mode_coefficient(b, &ScalarField::filled(g, 1.0 / 101.0), 0.5, 0.2).unwrap();
        assert!(low.get(0, 0) < 0.15 * b);
        assert!(dual_mode_coefficient(0.0, &ScalarField::zeros(g), 0.5, 0.2).is_err());
    }
}
