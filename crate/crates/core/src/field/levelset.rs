use rayon::prelude::*;

use super::{Grid2D, ScalarField};
use crate::error::{Error, Result};

/// A level-set function together with signed-distance bookkeeping.
///
/// Sign convention is fixed: `phi > 0` inside the contour, `phi <= 0` outside.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetState {
    phi: ScalarField,
    is_sdf: bool,
}

impl LevelSetState {
    /// Wraps an arbitrary level-set function (not assumed to be a distance).
    pub fn new(phi: ScalarField) -> Self {
        LevelSetState { phi, is_sdf: false }
    }

    /// Wraps a field the caller guarantees to be a signed distance function.
    pub fn from_sdf(phi: ScalarField) -> Self {
        LevelSetState { phi, is_sdf: true }
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn into_phi(self) -> ScalarField {
        self.phi
    }

    pub fn is_sdf(&self) -> bool {
        self.is_sdf
    }

    pub fn grid(&self) -> &Grid2D {
        self.phi.grid()
    }

    /// Number of cells with `phi > 0`.
    pub fn interior_count(&self) -> usize {
        self.phi.values().iter().filter(|v| **v > 0.0).count()
    }

    /// True when the field has no zero crossing between adjacent cells.
    pub fn is_vanished(&self) -> bool {
        let n = self.interior_count();
        n == 0 || n == self.phi.values().len()
    }
}

/// `phi(x, y) = r - |(x, y) - (cx, cy)|`, in world units.
pub fn make_circle_sdf(grid: Grid2D, cx: f64, cy: f64, r: f64) -> Result<LevelSetState> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!(
            "circle radius must be > 0, got {r}"
        )));
    }
    let h = grid.spacing();
    let (xmax, ymax) = (
        (grid.width() - 1) as f64 * h,
        (grid.height() - 1) as f64 * h,
    );
    if !(0.0..=xmax).contains(&cx) || !(0.0..=ymax).contains(&cy) {
        return Err(Error::invalid(format!(
            "circle centre ({cx}, {cy}) outside grid [0, {xmax}] x [0, {ymax}]"
        )));
    }
    let phi = ScalarField::from_fn(grid, |x, y| {
        let dx = x as f64 * h - cx;
        let dy = y as f64 * h - cy;
        r - dx.hypot(dy)
    });
    Ok(LevelSetState::from_sdf(phi))
}

/// Builds the signed distance function of a binary mask (true = interior).
/// The contour runs midway between interior and exterior cells.
pub fn mask_to_sdf(grid: Grid2D, inside: &[bool]) -> Result<LevelSetState> {
    if inside.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "mask has {} cells, grid has {}",
            inside.len(),
            grid.len()
        )));
    }
    let phi = ScalarField::from_vec_unchecked(
        grid,
        inside.iter().map(|&b| if b { 0.5 } else { -0.5 }).collect(),
    );
    reinitialize_sdf(&LevelSetState::new(phi))
}

/// Straight piece of the piecewise-linear zero level set, in world units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl Segment {
    pub fn distance_sq(&self, p: (f64, f64)) -> f64 {
        let (dx, dy) = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        let (px, py) = (p.0 - self.a.0, p.1 - self.a.1);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            ((px * dx + py * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (ex, ey) = (px - t * dx, py - t * dy);
        ex * ex + ey * ey
    }

    /// Closest point of the segment to `p`.
    pub fn closest_point(&self, p: (f64, f64)) -> (f64, f64) {
        let (dx, dy) = (self.b.0 - self.a.0, self.b.1 - self.a.1);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            (((p.0 - self.a.0) * dx + (p.1 - self.a.1) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (self.a.0 + t * dx, self.a.1 + t * dy)
    }

    pub fn length(&self) -> f64 {
        (self.b.0 - self.a.0).hypot(self.b.1 - self.a.1)
    }
}

/// Position of the zero crossing on the edge from cell value `a` (inside)
/// to `b` (outside), as a fraction of the edge length measured from `a`.
#[inline]
fn crossing_fraction(a: f64, b: f64) -> f64 {
    a / (a - b)
}

/// Marching-squares extraction of the zero level set. Crossings are found by
/// linear interpolation along grid edges where `phi > 0` flips; saddle cells
/// are disambiguated by the mean of their four corners.
pub fn extract_segments(phi: &ScalarField) -> Vec<Segment> {
    let g = *phi.grid();
    let h = g.spacing();
    let mut out = Vec::new();
    for y in 0..g.height() - 1 {
        for x in 0..g.width() - 1 {
            // c0 (x,y), c1 (x+1,y), c2 (x+1,y+1), c3 (x,y+1)
            let pos = [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)];
            let v = pos.map(|(i, j)| phi.get(i, j));
            let inside = v.map(|s| s > 0.0);
            let mask = inside
                .iter()
                .enumerate()
                .fold(0u8, |m, (i, &b)| m | ((b as u8) << i));
            if mask == 0 || mask == 0b1111 {
                continue;
            }
            let edge_point = |e: usize| -> (f64, f64) {
                let (i, j) = (e, (e + 1) % 4);
                let (p, q, vp, vq) = if inside[i] {
                    (pos[i], pos[j], v[i], v[j])
                } else {
                    (pos[j], pos[i], v[j], v[i])
                };
                let t = crossing_fraction(vp, vq);
                (
                    (p.0 as f64 + t * (q.0 as f64 - p.0 as f64)) * h,
                    (p.1 as f64 + t * (q.1 as f64 - p.1 as f64)) * h,
                )
            };
            let crossing: Vec<usize> = (0..4)
                .filter(|&e| inside[e] != inside[(e + 1) % 4])
                .collect();
            if crossing.len() == 2 {
                out.push(Segment {
                    a: edge_point(crossing[0]),
                    b: edge_point(crossing[1]),
                });
                continue;
            }
            // Saddle: two diagonal corners inside. Corner k is cut off by edges (k-1, k).
            let center_inside = v.iter().sum::<f64>() / 4.0 > 0.0;
            let isolated: [usize; 2] = if inside[0] == center_inside {
                [1, 3]
            } else {
                [0, 2]
            };
            for k in isolated {
                out.push(Segment {
                    a: edge_point((k + 3) % 4),
                    b: edge_point(k),
                });
            }
        }
    }
    out
}

const TILE: usize = 8;

struct Tile {
    lo: (f64, f64),
    hi: (f64, f64),
    segments: Vec<usize>,
}

/// Bins segments into square tiles so distance queries can skip far tiles.
fn build_tiles(grid: &Grid2D, segments: &[Segment]) -> Vec<Tile> {
    let h = grid.spacing();
    let tw = grid.width().div_ceil(TILE);
    let th = grid.height().div_ceil(TILE);
    let mut tiles: Vec<Tile> = (0..tw * th)
        .map(|_| Tile {
            lo: (f64::INFINITY, f64::INFINITY),
            hi: (f64::NEG_INFINITY, f64::NEG_INFINITY),
            segments: Vec::new(),
        })
        .collect();
    for (i, s) in segments.iter().enumerate() {
        let mx = 0.5 * (s.a.0 + s.b.0) / h;
        let my = 0.5 * (s.a.1 + s.b.1) / h;
        let tx = ((mx.max(0.0) as usize) / TILE).min(tw - 1);
        let ty = ((my.max(0.0) as usize) / TILE).min(th - 1);
        let t = &mut tiles[ty * tw + tx];
        t.lo = (t.lo.0.min(s.a.0).min(s.b.0), t.lo.1.min(s.a.1).min(s.b.1));
        t.hi = (t.hi.0.max(s.a.0).max(s.b.0), t.hi.1.max(s.a.1).max(s.b.1));
        t.segments.push(i);
    }
    tiles.retain(|t| !t.segments.is_empty());
    tiles
}

fn box_distance_sq(p: (f64, f64), lo: (f64, f64), hi: (f64, f64)) -> f64 {
    let dx = (lo.0 - p.0).max(0.0).max(p.0 - hi.0);
    let dy = (lo.1 - p.1).max(0.0).max(p.1 - hi.1);
    dx * dx + dy * dy
}

/// Closest point on a set of segments for every cell, in world units.
fn closest_on_segments(grid: &Grid2D, segments: &[Segment]) -> Vec<(f64, f64)> {
    let tiles = build_tiles(grid, segments);
    let h = grid.spacing();
    let w = grid.width();
    let mut out = vec![(0.0, 0.0); grid.len()];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(tiles.len());
        for (x, slot) in row.iter_mut().enumerate() {
            let p = (x as f64 * h, y as f64 * h);
            order.clear();
            order.extend(
                tiles
                    .iter()
                    .enumerate()
                    .map(|(i, t)| (box_distance_sq(p, t.lo, t.hi), i)),
            );
            order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let (mut best, mut best_seg) = (f64::INFINITY, 0);
            for &(lb, ti) in &order {
                if lb >= best {
                    break;
                }
                for &si in &tiles[ti].segments {
                    let d = segments[si].distance_sq(p);
                    if d < best {
                        best = d;
                        best_seg = si;
                    }
                }
            }
            *slot = segments[best_seg].closest_point(p);
        }
    });
    out
}

#[inline]
fn catmull_rom(t: f64) -> [[f64; 4]; 3] {
    let (t2, t3) = (t * t, t * t * t);
    [
        [
            0.5 * (-t3 + 2.0 * t2 - t),
            0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
            0.5 * (-3.0 * t3 + 4.0 * t2 + t),
            0.5 * (t3 - t2),
        ],
        [
            0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
            0.5 * (9.0 * t2 - 10.0 * t),
            0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
            0.5 * (3.0 * t2 - 2.0 * t),
        ],
        [2.0 - 3.0 * t, 9.0 * t - 5.0, 4.0 - 9.0 * t, 3.0 * t - 1.0],
    ]
}

/// Value, gradient and Hessian of the bicubic (Catmull-Rom) interpolant of
/// `phi` at a point in grid units: `[f, fx, fy, fxx, fxy, fyy]`. `None`
/// outside the grid.
fn bicubic(phi: &ScalarField, p: (f64, f64)) -> Option<[f64; 6]> {
    let g = phi.grid();
    let (xmax, ymax) = ((g.width() - 1) as f64, (g.height() - 1) as f64);
    if !(p.0 >= 0.0 && p.0 <= xmax && p.1 >= 0.0 && p.1 <= ymax) {
        return None;
    }
    let i = (p.0.floor() as usize).min(g.width().saturating_sub(2));
    let j = (p.1.floor() as usize).min(g.height().saturating_sub(2));
    let wx = catmull_rom(p.0 - i as f64);
    let wy = catmull_rom(p.1 - j as f64);
    let mut out = [0.0; 6];
    for b in 0..4 {
        // Row sums against x weights of order 0, 1, 2.
        let mut r = [0.0; 3];
        for a in 0..4 {
            let v = phi.get_mirrored(i as isize + a as isize - 1, j as isize + b as isize - 1);
            for (k, rk) in r.iter_mut().enumerate() {
                *rk += wx[k][a] * v;
            }
        }
        out[0] += wy[0][b] * r[0];
        out[1] += wy[0][b] * r[1];
        out[2] += wy[1][b] * r[0];
        out[3] += wy[0][b] * r[2];
        out[4] += wy[1][b] * r[1];
        out[5] += wy[2][b] * r[0];
    }
    Some(out)
}

/// Closest point to `x` on the zero set of the bicubic interpolant, by Newton
/// iteration on `f(p) = 0` and `(x - p) x grad f(p) = 0` from `start` (both in
/// grid units). `None` when it does not converge near `start`.
fn refine_closest(phi: &ScalarField, x: (f64, f64), start: (f64, f64)) -> Option<(f64, f64)> {
    let dist = |p: (f64, f64)| (x.0 - p.0).hypot(x.1 - p.1);
    let mut p = start;
    for _ in 0..20 {
        let [f, fx, fy, fxx, fxy, fyy] = bicubic(phi, p)?;
        let (rx, ry) = (x.0 - p.0, x.1 - p.1);
        let f2 = rx * fy - ry * fx;
        let (a, b) = (fx, fy);
        let c = -fy + rx * fxy - ry * fxx;
        let d = fx + rx * fyy - ry * fxy;
        let det = a * d - b * c;
        if det.abs() < 1e-14 {
            return None;
        }
        let step = ((-f * d + b * f2) / det, (-a * f2 + c * f) / det);
        p = (p.0 + step.0, p.1 + step.1);
        if (p.0 - start.0).hypot(p.1 - start.1) > 4.0 {
            return None;
        }
        if step.0.hypot(step.1) < 1e-10 {
            return (dist(p) <= dist(start) + 0.1).then_some(p);
        }
    }
    None
}

/// Projects a level-set function onto the signed distance function of its
/// current zero set; the sign of every cell is kept. Closest points on the
/// marching-squares polyline are refined onto the zero set of a bicubic
/// interpolant, falling back to the polyline where that fails.
pub fn reinitialize_sdf(state: &LevelSetState) -> Result<LevelSetState> {
    let phi = state.phi();
    let segments = extract_segments(phi);
    if segments.is_empty() {
        return Err(Error::ContourVanished {
            positive: phi.values().iter().any(|v| *v > 0.0),
        });
    }
    let g = *phi.grid();
    let h = g.spacing();
    let w = g.width();
    let closest = closest_on_segments(&g, &segments);
    let mut values = vec![0.0; g.len()];
    values.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, slot) in row.iter_mut().enumerate() {
            let i = y * w + x;
            let c = closest[i];
            let cell = (x as f64, y as f64);
            let q = refine_closest(phi, cell, (c.0 / h, c.1 / h)).unwrap_or((c.0 / h, c.1 / h));
            let d = (q.0 - cell.0).hypot(q.1 - cell.1) * h;
            *slot = if phi.values()[i] > 0.0 {
                d
            } else if d == 0.0 {
                0.0
            } else {
                -d
            };
        }
    });
    Ok(LevelSetState::from_sdf(ScalarField::from_vec_unchecked(
        g, values,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, n).unwrap()
    }

    #[test]
    fn circle_reference_values() {
        let s = make_circle_sdf(grid(200), 100.0, 100.0, 90.0).unwrap();
        assert_eq!(s.phi().get(100, 100), 90.0);
        assert_eq!(s.phi().get(190, 100), 0.0);
        assert!(s.is_sdf());
        let s = make_circle_sdf(grid(100), 50.0, 50.0, 30.0).unwrap();
        assert_eq!(s.phi().get(50, 90), -10.0);
    }

    #[test]
    fn circle_rejects_bad_input() {
        assert!(make_circle_sdf(grid(10), 5.0, 5.0, 0.0).is_err());
        assert!(make_circle_sdf(grid(10), 5.0, 5.0, -1.0).is_err());
        assert!(make_circle_sdf(grid(10), 50.0, 5.0, 2.0).is_err());
    }

    #[test]
    fn reinit_keeps_circle() {
        let s = make_circle_sdf(grid(64), 31.3, 30.8, 17.0).unwrap();
        let r = reinitialize_sdf(&s).unwrap();
        for y in 0..64 {
            for x in 0..64 {
                let d = (x as f64 - 31.3).hypot(y as f64 - 30.8);
                if d > 1.5 {
                    assert!(
                        (r.phi().get(x, y) - s.phi().get(x, y)).abs() < 0.05,
                        "({x},{y}) {} vs {}",
                        r.phi().get(x, y),
                        s.phi().get(x, y)
                    );
                }
            }
        }
    }

    #[test]
    fn reinit_flags_vanished_contour() {
        let g = grid(8);
        let err = reinitialize_sdf(&LevelSetState::new(ScalarField::filled(g, 2.0))).unwrap_err();
        assert!(matches!(err, Error::ContourVanished { positive: true }));
        let err = reinitialize_sdf(&LevelSetState::new(ScalarField::filled(g, -2.0))).unwrap_err();
        assert!(matches!(err, Error::ContourVanished { positive: false }));
    }

    #[test]
    fn saddle_cells_produce_two_segments() {
        let g = grid(3);
        let mut f = ScalarField::filled(g, -1.0);
        f.set(0, 0, 1.0);
        f.set(1, 1, 1.0);
        let segs = extract_segments(&f);
        assert!(segs.len() >= 2);
        for s in &segs {
            assert!(s.length() > 0.0);
        }
    }

    #[test]
    fn mask_to_sdf_half_plane() {
        let g = grid(12);
        let mask: Vec<bool> = (0..g.len()).map(|i| i % 12 < 5).collect();
        let s = mask_to_sdf(g, &mask).unwrap();
        for x in 0..12 {
            assert!((s.phi().get(x, 6) - (4.5 - x as f64)).abs() < 1e-12);
        }
    }
}
