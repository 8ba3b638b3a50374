use crate::error::{Error, Result};
use crate::field::{extract_segments, Grid2D, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    grid: Grid2D,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(grid: Grid2D, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "mask has {} cells, grid has {}",
                bits.len(),
                grid.len()
            )));
        }
        Ok(BinaryMask { grid, bits })
    }

    /// Interior of a level set (`phi > 0`).
    pub fn from_phi(phi: &ScalarField) -> Self {
        BinaryMask {
            grid: *phi.grid(),
            bits: phi.values().iter().map(|v| *v > 0.0).collect(),
        }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(grid.len());
        for y in 0..grid.height() {
            for x in 0..grid.width() {
                bits.push(f(x, y));
            }
        }
        BinaryMask { grid, bits }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[self.grid.index(x, y)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn invert(&self) -> BinaryMask {
        BinaryMask {
            grid: self.grid,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

/// `2 |A n B| / (|A| + |B|)`, and 1 when both masks are empty.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.grid.ensure_same(&b.grid, "dice")?;
    let (mut na, mut nb, mut both) = (0usize, 0usize, 0usize);
    for (&p, &q) in a.bits.iter().zip(&b.bits) {
        na += p as usize;
        nb += q as usize;
        both += (p && q) as usize;
    }
    if na + nb == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (na + nb) as f64)
}

/// Sub-pixel points on a zero level set, in world coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContourPointSet {
    pub points: Vec<(f64, f64)>,
}

impl ContourPointSet {
    pub fn new(points: Vec<(f64, f64)>) -> Self {
        ContourPointSet { points }
    }

    /// One point per grid edge where `phi > 0` flips, placed by linear
    /// interpolation.
    pub fn crossings(phi: &ScalarField) -> Self {
        let g = phi.grid();
        let h = g.spacing();
        let mut points = Vec::new();
        let mut push = |x0: usize, y0: usize, x1: usize, y1: usize| {
            let (a, b) = (phi.get(x0, y0), phi.get(x1, y1));
            if (a > 0.0) != (b > 0.0) {
                let t = a / (a - b);
                points.push((
                    (x0 as f64 + t * (x1 as f64 - x0 as f64)) * h,
                    (y0 as f64 + t * (y1 as f64 - y0 as f64)) * h,
                ));
            }
        };
        for y in 0..g.height() {
            for x in 0..g.width() {
                if x + 1 < g.width() {
                    push(x, y, x + 1, y);
                }
                if y + 1 < g.height() {
                    push(x, y, x, y + 1);
                }
            }
        }
        ContourPointSet { points }
    }

    /// Points along the piecewise-linear zero set, spaced at most `step`
    /// apart on each segment.
    pub fn dense(phi: &ScalarField, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::invalid(format!("step must be > 0, got {step}")));
        }
        let mut points = Vec::new();
        for s in extract_segments(phi) {
            let n = (s.length() / step).ceil().max(1.0) as usize;
            // Segment end points are shared with neighbours; emit [a, b).
            for i in 0..n {
                let t = i as f64 / n as f64;
                points.push((s.a.0 + t * (s.b.0 - s.a.0), s.a.1 + t * (s.b.1 - s.a.1)));
            }
        }
        Ok(ContourPointSet { points })
    }

    /// `n` equally spaced points on a circle.
    pub fn circle(cx: f64, cy: f64, r: f64, n: usize) -> Self {
        let points = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                (cx + r * t.cos(), cy + r * t.sin())
            })
            .collect();
        ContourPointSet { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn directed_mean(from: &[(f64, f64)], to: &[(f64, f64)]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|p| {
            to.iter()
                .map(|q| (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    total / from.len() as f64
}

/// Maximum of the two directed mean nearest-point distances.
pub fn modified_hausdorff(a: &ContourPointSet, b: &ContourPointSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid(
            "modified Hausdorff distance needs non-empty point sets",
        ));
    }
    Ok(directed_mean(&a.points, &b.points).max(directed_mean(&b.points, &a.points)))
}

/// Area of `phi > 0` with sub-cell resolution, treating `phi` as a signed
/// distance: each cell contributes `clamp(0.5 + phi / h, 0, 1)` of `h^2`.
pub fn enclosed_area(phi: &ScalarField) -> f64 {
    let h = phi.grid().spacing();
    phi.values()
        .iter()
        .map(|v| (0.5 + v / h).clamp(0.0, 1.0))
        .sum::<f64>()
        * h
        * h
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Area of the convex hull (Andrew's monotone chain).
pub fn convex_hull_area(points: &[(f64, f64)]) -> f64 {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }
    let chain = |it: &mut dyn Iterator<Item = (f64, f64)>| {
        let mut c: Vec<(f64, f64)> = Vec::new();
        for p in it {
            while c.len() >= 2 && cross(c[c.len() - 2], c[c.len() - 1], p) <= 0.0 {
                c.pop();
            }
            c.push(p);
        }
        c.pop();
        c
    };
    let mut hull = chain(&mut pts.iter().copied());
    hull.extend(chain(&mut pts.iter().rev().copied()));
    let n = hull.len();
    (0..n)
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

/// `1 - area / hull_area` of the interior; 0 for convex shapes. Returns 0
/// when the level set has no zero crossing.
pub fn convex_deficiency(phi: &ScalarField) -> f64 {
    let hull = convex_hull_area(&ContourPointSet::crossings(phi).points);
    if hull <= 0.0 {
        return 0.0;
    }
    (1.0 - enclosed_area(phi) / hull).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = [
            (0.0, 0.0),
            (2.0, 0.0),
            (2.0, 2.0),
            (0.0, 2.0),
            (1.0, 1.0),
            (1.0, 0.0),
        ];
        assert!((convex_hull_area(&pts) - 4.0).abs() < 1e-12);
        assert_eq!(convex_hull_area(&pts[..2]), 0.0);
    }

    #[test]
    fn circle_area_and_deficiency() {
        let g = Grid2D::new(64, 64).unwrap();
        let phi = crate::field::make_circle_sdf(g, 32.0, 32.0, 15.0).unwrap();
        let area = enclosed_area(phi.phi());
        let exact = std::f64::consts::PI * 225.0;
        assert!((area / exact - 1.0).abs() < 0.01, "{area}");
        assert!(convex_deficiency(phi.phi()) < 0.02);
        let star = crate::eval::make_synthetic(
            crate::eval::SyntheticKind::Star,
            Grid2D::new(100, 100).unwrap(),
        )
        .unwrap()
        .1;
        let sdf = crate::field::mask_to_sdf(*star.grid(), star.bits()).unwrap();
        assert!(convex_deficiency(sdf.phi()) > 0.2);
    }

    #[test]
    fn dice_examples() {
        let g = Grid2D::new(3, 3).unwrap();
        let a = BinaryMask::from_fn(g, |x, y| y == 0 && x < 3 || (x, y) == (0, 1));
        let b = BinaryMask::from_fn(g, |x, y| y == 0 && x < 2);
        assert_eq!(a.count(), 4);
        assert!((dice(&a, &b).unwrap() - 2.0 * 2.0 / 6.0).abs() < 1e-15);
        assert_eq!(dice(&a, &a).unwrap(), 1.0);
        assert_eq!(dice(&a, &a.invert()).unwrap(), 0.0);
        let empty = BinaryMask::from_fn(g, |_, _| false);
        assert_eq!(dice(&empty, &empty).unwrap(), 1.0);
        let other = BinaryMask::new(Grid2D::new(4, 3).unwrap(), vec![false; 12]).unwrap();
        assert!(dice(&a, &other).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let a = ContourPointSet::new(vec![(0.0, 0.0)]);
        let b = ContourPointSet::new(vec![(3.0, 4.0)]);
        assert_eq!(modified_hausdorff(&a, &b).unwrap(), 5.0);
        let a = ContourPointSet::new(vec![(0.0, 0.0), (2.0, 0.0)]);
        let b = ContourPointSet::new(vec![(0.0, 1.0)]);
        let want = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((modified_hausdorff(&a, &b).unwrap() - want).abs() < 1e-15);
        assert_eq!(modified_hausdorff(&a, &a).unwrap(), 0.0);
        assert!(modified_hausdorff(&a, &ContourPointSet::default()).is_err());
    }

    #[test]
    fn crossings_of_vertical_line() {
        let g = Grid2D::new(6, 4).unwrap();
        let phi = ScalarField::from_fn(g, |x, _| 2.25 - x as f64);
        let c = ContourPointSet::crossings(&phi);
        assert_eq!(c.len(), 4);
        assert!(c.points.iter().all(|p| (p.0 - 2.25).abs() < 1e-12));
    }

    #[test]
    fn dense_points_follow_circle() {
        let g = Grid2D::new(60, 60).unwrap();
        let phi = crate::field::make_circle_sdf(g, 30.0, 30.0, 17.3).unwrap();
        let d = ContourPointSet::dense(phi.phi(), 0.05).unwrap();
        assert!(d.len() > (2.0 * std::f64::consts::PI * 17.3 / 0.05) as usize);
        for p in &d.points {
            assert!(((p.0 - 30.0).hypot(p.1 - 30.0) - 17.3).abs() < 0.02);
        }
        let truth = ContourPointSet::circle(30.0, 30.0, 17.3, 4000);
        let m = modified_hausdorff(&d, &truth).unwrap();
        assert!(m < 0.05, "{m}");
    }
}
