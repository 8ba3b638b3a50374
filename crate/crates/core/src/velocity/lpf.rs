use rayon::prelude::*;

use super::Image;
use crate::error::{Error, Result};
use crate::field::{dirac_eps, gaussian_convolve, LevelSetState, ScalarField};

/// Local pre-fits and their kernel-weighted fitting energies. Computed once
/// per image and held fixed during evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefitFunctions {
    pub f_s: ScalarField,
    pub f_l: ScalarField,
    pub e_s: ScalarField,
    pub e_l: ScalarField,
}

/// Small and large local fits: within the `window`-sized square centred at
/// each pixel (truncated at the border), the means of the intensities at or
/// below and above the window mean.
pub fn lpf_local_fits(image: &Image, window: usize) -> Result<(ScalarField, ScalarField)> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "window must be odd and >= 3, got {window}"
        )));
    }
    let g = *image.grid();
    let (w, h) = (g.width(), g.height());
    let r = window / 2;
    let v = image.intensity().values();

    let rows: Vec<Vec<(f64, f64)>> = (0..h)
        .into_par_iter()
        .map(|y| {
            let (y0, y1) = (y.saturating_sub(r), (y + r).min(h - 1));
            (0..w)
                .map(|x| {
                    let (x0, x1) = (x.saturating_sub(r), (x + r).min(w - 1));
                    let cells =
                        || (y0..=y1).flat_map(move |yy| (x0..=x1).map(move |xx| v[yy * w + xx]));
                    let n = ((y1 - y0 + 1) * (x1 - x0 + 1)) as f64;
                    let m = cells().sum::<f64>() / n;
                    let (mut ss, mut ns, mut sl, mut nl) = (0.0, 0usize, 0.0, 0usize);
                    for c in cells() {
                        if c <= m {
                            ss += c;
                            ns += 1;
                        } else {
                            sl += c;
                            nl += 1;
                        }
                    }
                    if ns == 0 || nl == 0 {
                        return (m, m);
                    }
                    let fs = ss / ns as f64;
                    let fl = sl / nl as f64;
                    (fs, fl.max(fs))
                })
                .collect()
        })
        .collect();

    let flat: Vec<(f64, f64)> = rows.into_iter().flatten().collect();
    Ok((
        ScalarField::new(g, flat.iter().map(|p| p.0).collect())?,
        ScalarField::new(g, flat.iter().map(|p| p.1).collect())?,
    ))
}

/// `e(x) = sum_y K(y - x) (I(x) - f(y))^2`, expanded into three Gaussian
/// convolutions. Returns `(e_s, e_l)`.
pub fn lpf_energies(
    image: &Image,
    f_s: &ScalarField,
    f_l: &ScalarField,
    sigma: f64,
) -> Result<(ScalarField, ScalarField)> {
    image.grid().ensure_same(f_s.grid(), "f_s")?;
    image.grid().ensure_same(f_l.grid(), "f_l")?;
    let ones = gaussian_convolve(&ScalarField::filled(*image.grid(), 1.0), sigma)?;
    let energy = |f: &ScalarField| -> Result<ScalarField> {
        let kf = gaussian_convolve(f, sigma)?;
        let kf2 = gaussian_convolve(&f.map(|v| v * v), sigma)?;
        let i = image.intensity().values();
        let vals = (0..i.len())
            .map(|j| {
                let e =
                    i[j] * i[j] * ones.values()[j] - 2.0 * i[j] * kf.values()[j] + kf2.values()[j];
                e.max(0.0)
            })
            .collect();
        ScalarField::new(*image.grid(), vals)
    };
    Ok((energy(f_s)?, energy(f_l)?))
}

pub fn lpf_prefit(image: &Image, sigma: f64, window: usize) -> Result<PrefitFunctions> {
    let (f_s, f_l) = lpf_local_fits(image, window)?;
    let (e_s, e_l) = lpf_energies(image, &f_s, &f_l, sigma)?;
    Ok(PrefitFunctions { f_s, f_l, e_s, e_l })
}

/// `delta_eps(phi) * (e_l - e_s)`.
pub fn lpf_velocity(
    phi: &LevelSetState,
    e_s: &ScalarField,
    e_l: &ScalarField,
    eps: f64,
) -> Result<ScalarField> {
    let d = dirac_eps(phi.phi(), eps)?;
    let diff = e_l.zip_map(e_s, |l, s| l - s)?;
    d.zip_map(&diff, |d, e| d * e)
}
