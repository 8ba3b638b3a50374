use std::f64::consts::PI;

use super::{mirror_half, ScalarField};
use crate::error::{Error, Result};

/// Lower bound applied to `|grad phi|` before it is used as a divisor.
pub const GRADIENT_FLOOR: f64 = 1e-8;

/// Central-difference gradient `(d/dx, d/dy)` with mirrored ghost cells.
pub fn gradient(field: &ScalarField) -> (ScalarField, ScalarField) {
    let g = *field.grid();
    let inv = 1.0 / (2.0 * g.spacing());
    let gx = ScalarField::from_fn(g, |x, y| {
        let (x, y) = (x as isize, y as isize);
        (field.get_mirrored(x + 1, y) - field.get_mirrored(x - 1, y)) * inv
    });
    let gy = ScalarField::from_fn(g, |x, y| {
        let (x, y) = (x as isize, y as isize);
        (field.get_mirrored(x, y + 1) - field.get_mirrored(x, y - 1)) * inv
    });
    (gx, gy)
}

pub fn gradient_magnitude(field: &ScalarField) -> ScalarField {
    let (gx, gy) = gradient(field);
    ScalarField::from_vec_unchecked(
        *field.grid(),
        gx.values()
            .iter()
            .zip(gy.values())
            .map(|(a, b)| a.hypot(*b))
            .collect(),
    )
}

/// Level-set curvature `kappa = -div(grad phi / |grad phi|)`.
///
/// Positive on convex parts of the interior region under the positive-inside
/// convention (a circle SDF `r - |x - c|` yields `1 / |x - c|`).
pub fn curvature(phi: &ScalarField) -> ScalarField {
    let g = *phi.grid();
    let h = g.spacing();
    let (i2h, ih2, i4h2) = (1.0 / (2.0 * h), 1.0 / (h * h), 1.0 / (4.0 * h * h));
    ScalarField::from_fn(g, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let c = phi.get_mirrored(x, y);
        let e = phi.get_mirrored(x + 1, y);
        let w = phi.get_mirrored(x - 1, y);
        let n = phi.get_mirrored(x, y + 1);
        let s = phi.get_mirrored(x, y - 1);
        let ne = phi.get_mirrored(x + 1, y + 1);
        let nw = phi.get_mirrored(x - 1, y + 1);
        let se = phi.get_mirrored(x + 1, y - 1);
        let sw = phi.get_mirrored(x - 1, y - 1);

        let px = (e - w) * i2h;
        let py = (n - s) * i2h;
        let pxx = (e - 2.0 * c + w) * ih2;
        let pyy = (n - 2.0 * c + s) * ih2;
        let pxy = (ne - se - nw + sw) * i4h2;

        let norm = px.hypot(py).max(GRADIENT_FLOOR);
        let num = pxx * py * py - 2.0 * px * py * pxy + pyy * px * px;
        -num / (norm * norm * norm)
    })
}

/// `H_eps(phi) = 1/2 (1 + 2/pi * atan(phi / eps))`.
pub fn heaviside_eps(phi: &ScalarField, epsilon: f64) -> Result<ScalarField> {
    check_positive("epsilon", epsilon)?;
    Ok(phi.map(|v| heaviside_scalar(v, epsilon)))
}

/// `delta_eps(phi) = (1/pi) * eps / (eps^2 + phi^2)`.
pub fn dirac_eps(phi: &ScalarField, epsilon: f64) -> Result<ScalarField> {
    check_positive("epsilon", epsilon)?;
    Ok(phi.map(|v| dirac_scalar(v, epsilon)))
}

#[inline]
pub(crate) fn heaviside_scalar(v: f64, epsilon: f64) -> f64 {
    // 1 - h is exact for h in [0.5, 1], so H(v) + H(-v) == 1 bitwise.
    let h = 0.5 + (v.abs() / epsilon).atan() / PI;
    if v >= 0.0 {
        h
    } else {
        1.0 - h
    }
}

#[inline]
pub(crate) fn dirac_scalar(v: f64, epsilon: f64) -> f64 {
    epsilon / (PI * (epsilon * epsilon + v * v))
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be > 0, got {v}")))
    }
}

/// Normalized discrete Gaussian truncated at `±ceil(3 sigma)`.
pub fn gaussian_kernel_1d(sigma: f64) -> Result<Vec<f64>> {
    check_positive("sigma", sigma)?;
    let radius = (3.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    Ok(k)
}

/// Separable Gaussian blur with half-sample mirrored borders (field sum is preserved).
pub fn gaussian_convolve(field: &ScalarField, sigma: f64) -> Result<ScalarField> {
    let kernel = gaussian_kernel_1d(sigma)?;
    let radius = (kernel.len() / 2) as isize;
    let g = *field.grid();
    let (w, h) = (g.width(), g.height());

    let mut tmp = vec![0.0; g.len()];
    for y in 0..h {
        let row = &field.values()[y * w..(y + 1) * w];
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, wgt)| wgt * row[mirror_half(x as isize + k as isize - radius, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; g.len()];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, wgt)| wgt * tmp[mirror_half(y as isize + k as isize - radius, h) * w + x])
                .sum();
        }
    }
    Ok(ScalarField::from_vec_unchecked(g, out))
}
