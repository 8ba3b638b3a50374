use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::velocity::Image;

/// Spatial frequency of the periodic pattern, cycles per pixel on each axis.
pub const PERIODIC_FREQUENCY: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    Gaussian,
    SaltPepper,
    Speckle,
    Periodic,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 4] = [
        NoiseKind::Gaussian,
        NoiseKind::SaltPepper,
        NoiseKind::Speckle,
        NoiseKind::Periodic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::SaltPepper => "salt_pepper",
            NoiseKind::Speckle => "speckle",
            NoiseKind::Periodic => "periodic",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown noise kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub strength: f64,
    pub seed: u64,
}

/// Applies seeded noise; output is clamped to `[0, 1]`.
pub fn apply_noise(image: &Image, spec: &NoiseSpec) -> Result<Image> {
    let s = spec.strength;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid(format!(
            "noise strength must be >= 0, got {s}"
        )));
    }
    let g = *image.grid();
    let src = image.intensity();
    if s == 0.0 {
        return Ok(image.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let out = match spec.kind {
        NoiseKind::Gaussian => {
            let n = Normal::new(0.0, s).map_err(|e| Error::invalid(e.to_string()))?;
            src.map(|v| v + n.sample(&mut rng))
        }
        NoiseKind::Speckle => {
            let n = Normal::new(0.0, s).map_err(|e| Error::invalid(e.to_string()))?;
            src.map(|v| v * (1.0 + n.sample(&mut rng)))
        }
        NoiseKind::SaltPepper => {
            if s > 1.0 {
                return Err(Error::invalid(format!(
                    "salt and pepper density must be <= 1, got {s}"
                )));
            }
            let total = g.len();
            let k = (s * total as f64).round() as usize;
            let mut vals = src.values().to_vec();
            for (j, idx) in sample(&mut rng, total, k).into_iter().enumerate() {
                vals[idx] = if j < k / 2 { 0.0 } else { 1.0 };
            }
            ScalarField::new(g, vals)?
        }
        NoiseKind::Periodic => ScalarField::from_fn(g, |x, y| {
            let phase = TAU * PERIODIC_FREQUENCY * (x as f64 + y as f64);
            src.get(x, y) + s * phase.sin()
        }),
    };
    Ok(Image::from_clamped(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid2D;

    fn gray(n: usize, v: f64) -> Image {
        Image::new(ScalarField::filled(Grid2D::new(n, n).unwrap(), v)).unwrap()
    }

    #[test]
    fn zero_strength_is_identity() {
        let img = gray(16, 0.3);
        for kind in NoiseKind::ALL {
            let out = apply_noise(
                &img,
                &NoiseSpec {
                    kind,
                    strength: 0.0,
                    seed: 9,
                },
            )
            .unwrap();
            assert_eq!(out, img);
        }
    }

    #[test]
    fn salt_pepper_count() {
        let img = gray(100, 0.5);
        let spec = NoiseSpec {
            kind: NoiseKind::SaltPepper,
            strength: 0.1,
            seed: 4,
        };
        let out = apply_noise(&img, &spec).unwrap();
        let changed: Vec<f64> = out
            .intensity()
            .values()
            .iter()
            .copied()
            .filter(|v| *v != 0.5)
            .collect();
        assert_eq!(changed.len(), 1000);
        assert_eq!(changed.iter().filter(|v| **v == 0.0).count(), 500);
    }

    #[test]
    fn gaussian_sample_statistics_and_repeatability() {
        let img = gray(200, 0.5);
        let spec = NoiseSpec {
            kind: NoiseKind::Gaussian,
            strength: 0.1,
            seed: 17,
        };
        let a = apply_noise(&img, &spec).unwrap();
        assert_eq!(a, apply_noise(&img, &spec).unwrap());
        let d: Vec<f64> = a
            .intensity()
            .values()
            .iter()
            .map(|v| v - 0.5)
            .filter(|v| v.abs() < 0.499)
            .collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
        assert!((var.sqrt() - 0.1).abs() < 0.005, "{}", var.sqrt());
        let other = apply_noise(&img, &NoiseSpec { seed: 18, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn periodic_pattern_and_clamping() {
        let img = gray(20, 0.5);
        let spec = NoiseSpec {
            kind: NoiseKind::Periodic,
            strength: 0.3,
            seed: 0,
        };
        let out = apply_noise(&img, &spec).unwrap();
        let want = 0.5 + 0.3 * (TAU * 0.15 * 5.0).sin();
        assert!((out.intensity().get(2, 3) - want).abs() < 1e-15);
        let loud = apply_noise(
            &img,
            &NoiseSpec {
                strength: 2.0,
                ..spec
            },
        )
        .unwrap();
        assert!(loud.intensity().min() >= 0.0 && loud.intensity().max() <= 1.0);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in NoiseKind::ALL {
            assert_eq!(k.as_str().parse::<NoiseKind>().unwrap(), k);
        }
        assert!("pink".parse::<NoiseKind>().is_err());
    }
}
