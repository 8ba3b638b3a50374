use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::BinaryMask;
use crate::error::{Error, Result};
use crate::field::{gaussian_convolve, Grid2D, ScalarField};
use crate::velocity::Image;

/// Blur applied to the soft-edged variants.
pub const SOFT_EDGE_SIGMA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyntheticKind {
    Disk,
    BlurredDisk,
    MultiShape,
    FourQuadrant,
    Spiral,
    Star,
    Vessel,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 7] = [
        SyntheticKind::Disk,
        SyntheticKind::BlurredDisk,
        SyntheticKind::MultiShape,
        SyntheticKind::FourQuadrant,
        SyntheticKind::Spiral,
        SyntheticKind::Star,
        SyntheticKind::Vessel,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SyntheticKind::Disk => "disk",
            SyntheticKind::BlurredDisk => "blurred-disk",
            SyntheticKind::MultiShape => "multi-shape",
            SyntheticKind::FourQuadrant => "four-quadrant",
            SyntheticKind::Spiral => "spiral",
            SyntheticKind::Star => "star",
            SyntheticKind::Vessel => "vessel",
        }
    }

    /// Centre and radius of the true boundary for the disk kinds.
    pub fn analytic_circle(&self, grid: &Grid2D) -> Option<(f64, f64, f64)> {
        match self {
            SyntheticKind::Disk | SyntheticKind::BlurredDisk => {
                let (cx, cy, s) = frame(grid);
                Some((cx, cy, 20.0 * s))
            }
            _ => None,
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SyntheticKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown synthetic image '{s}'")))
    }
}

/// Grid centre and a scale factor relative to a 100-pixel frame.
fn frame(grid: &Grid2D) -> (f64, f64, f64) {
    let (w, h) = (grid.width() as f64, grid.height() as f64);
    (w / 2.0, h / 2.0, w.min(h) / 100.0)
}

fn min_dist_to_polyline(p: (f64, f64), pts: &[(f64, f64)]) -> f64 {
    pts.windows(2)
        .map(|s| {
            let (a, b) = (s[0], s[1]);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
            (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Builds a test image and its ground-truth interior mask.
///
/// Shapes are laid out on a frame scaled by `min(width, height) / 100`:
///
/// * `disk`: radius 20 at the centre; `blurred-disk` is the same disk blurred.
/// * `multi-shape`: an annulus (radii 6 and 14) above the centre, a disk and a
///   square below-left and below-right, each centred 30 from the grid centre.
/// * `four-quadrant`: intensities 0, 1/3, 2/3, 1 (top-left, top-right,
///   bottom-left, bottom-right); the mask marks the two brighter quadrants.
/// * `spiral`, `star`, `vessel`: a wound band, a five-pointed star and a
///   blurred wavy tube.
pub fn make_synthetic(kind: SyntheticKind, grid: Grid2D) -> Result<(Image, BinaryMask)> {
    if grid.width() < 64 || grid.height() < 64 {
        return Err(Error::invalid(format!(
            "synthetic images need at least 64x64, got {}x{}",
            grid.width(),
            grid.height()
        )));
    }
    let (cx, cy, s) = frame(&grid);
    let at = |x: usize, y: usize| (x as f64, y as f64);

    let (image, mask) = match kind {
        SyntheticKind::Disk | SyntheticKind::BlurredDisk => {
            let r = 20.0 * s;
            let mask = BinaryMask::from_fn(grid, |x, y| {
                let (px, py) = at(x, y);
                (px - cx).powi(2) + (py - cy).powi(2) < r * r
            });
            (mask_image(&mask), mask)
        }
        SyntheticKind::MultiShape => {
            let (ax, ay) = (cx, cy - 30.0 * s);
            let (dx, dy) = (cx - 26.0 * s, cy + 15.0 * s);
            let (qx, qy) = (cx + 26.0 * s, cy + 15.0 * s);
            let mask = BinaryMask::from_fn(grid, |x, y| {
                let (px, py) = at(x, y);
                let ra = (px - ax).hypot(py - ay);
                let annulus = ra < 14.0 * s && ra > 6.0 * s;
                let disk = (px - dx).hypot(py - dy) < 12.0 * s;
                let square = (px - qx).abs().max((py - qy).abs()) < 10.0 * s;
                annulus || disk || square
            });
            (mask_image(&mask), mask)
        }
        SyntheticKind::FourQuadrant => {
            let img = ScalarField::from_fn(grid, |x, y| {
                let (px, py) = at(x, y);
                match (px < cx, py < cy) {
                    (true, true) => 0.0,
                    (false, true) => 1.0 / 3.0,
                    (true, false) => 2.0 / 3.0,
                    (false, false) => 1.0,
                }
            });
            let mask = BinaryMask::new(grid, img.values().iter().map(|v| *v > 0.5).collect())?;
            (img, mask)
        }
        SyntheticKind::Spiral => {
            let n = 2000;
            let turns = 3.5 * PI;
            let curve: Vec<(f64, f64)> = (0..=n)
                .map(|i| {
                    let t = turns * i as f64 / n as f64;
                    let r = (6.0 + 3.5 * t) * s;
                    (cx + r * t.cos(), cy + r * t.sin())
                })
                .collect();
            let half = 3.0 * s;
            let mask =
                BinaryMask::from_fn(grid, |x, y| min_dist_to_polyline(at(x, y), &curve) <= half);
            (mask_image(&mask), mask)
        }
        SyntheticKind::Star => {
            let (r1, r2) = (25.0 * s, 10.0 * s);
            let mask = BinaryMask::from_fn(grid, |x, y| {
                let (px, py) = at(x, y);
                let theta = (py - cy).atan2(px - cx);
                (px - cx).hypot(py - cy) < r1 + r2 * (5.0 * theta).cos()
            });
            (mask_image(&mask), mask)
        }
        SyntheticKind::Vessel => {
            let w = grid.width() as f64;
            let mask = BinaryMask::from_fn(grid, |x, y| {
                let (px, py) = at(x, y);
                let centre = cy + 12.0 * s * (3.0 * PI * px / w).sin();
                (py - centre).abs() < 5.0 * s
            });
            (mask_image(&mask), mask)
        }
    };

    let image = match kind {
        SyntheticKind::BlurredDisk | SyntheticKind::Vessel => {
            gaussian_convolve(&image, SOFT_EDGE_SIGMA)?
        }
        _ => image,
    };
    Ok((Image::from_clamped(image), mask))
}

fn mask_image(mask: &BinaryMask) -> ScalarField {
    ScalarField::from_vec_unchecked(
        *mask.grid(),
        mask.bits()
            .iter()
            .map(|b| if *b { 1.0 } else { 0.0 })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{mask_to_sdf, zero_level_components};

    fn g100() -> Grid2D {
        Grid2D::new(100, 100).unwrap()
    }

    #[test]
    fn disk_area_is_lattice_count() {
        let (img, mask) = make_synthetic(SyntheticKind::Disk, g100()).unwrap();
        let mut want = 0;
        for y in 0..100i64 {
            for x in 0..100i64 {
                if (x - 50).pow(2) + (y - 50).pow(2) < 400 {
                    want += 1;
                }
            }
        }
        assert_eq!(mask.count(), want);
        assert_eq!(img.intensity().sum(), want as f64);
    }

    #[test]
    fn quadrants_have_equal_area() {
        let (img, mask) = make_synthetic(SyntheticKind::FourQuadrant, g100()).unwrap();
        for v in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
            let n = img.intensity().values().iter().filter(|p| **p == v).count();
            assert_eq!(n, 2500);
        }
        assert_eq!(mask.count(), 5000);
    }

    #[test]
    fn multi_shape_topology() {
        let (_, mask) = make_synthetic(SyntheticKind::MultiShape, g100()).unwrap();
        let sdf = mask_to_sdf(g100(), mask.bits()).unwrap();
        let c = zero_level_components(sdf.phi());
        assert_eq!(c.count(), 3);
        assert_eq!(c.holes, 1);
    }

    #[test]
    fn star_is_not_convex() {
        let (_, mask) = make_synthetic(SyntheticKind::Star, g100()).unwrap();
        // Midpoint of two neighbouring tips lies outside the star.
        let tip = |k: f64| {
            let t = 2.0 * PI * k / 5.0;
            (50.0 + 34.0 * t.cos(), 50.0 + 34.0 * t.sin())
        };
        let (a, b) = (tip(0.0), tip(1.0));
        assert!(mask.get(a.0.round() as usize, a.1.round() as usize));
        assert!(mask.get(b.0.round() as usize, b.1.round() as usize));
        let m = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
        assert!(!mask.get(m.0.round() as usize, m.1.round() as usize));
    }

    #[test]
    fn blurred_variants_stay_in_range() {
        for kind in [
            SyntheticKind::BlurredDisk,
            SyntheticKind::Vessel,
            SyntheticKind::Spiral,
        ] {
            let (img, mask) = make_synthetic(kind, g100()).unwrap();
            assert!(img.intensity().min() >= 0.0 && img.intensity().max() <= 1.0);
            assert!(mask.count() > 0);
        }
        assert!(make_synthetic(SyntheticKind::Disk, Grid2D::new(63, 100).unwrap()).is_err());
    }

    #[test]
    fn names_round_trip() {
        for k in SyntheticKind::ALL {
            assert_eq!(k.as_str().parse::<SyntheticKind>().unwrap(), k);
        }
    }
}
