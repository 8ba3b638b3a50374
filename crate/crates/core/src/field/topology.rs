use std::collections::VecDeque;

use super::ScalarField;

/// 4-connected components of the interior region `{phi > 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    /// Component id per cell, `None` outside the interior region.
    pub labels: Vec<Option<usize>>,
    /// Cell count of each component.
    pub sizes: Vec<usize>,
    /// Cells of each component that have a 4-neighbour outside the region.
    pub boundary_cells: Vec<Vec<usize>>,
    /// Components of `{phi <= 0}` that do not touch the grid border.
    pub holes: usize,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Cell mask of one component.
    pub fn mask(&self, component: usize) -> Vec<bool> {
        self.labels.iter().map(|l| *l == Some(component)).collect()
    }
}

fn flood(
    w: usize,
    h: usize,
    member: &[bool],
    labels: &mut [Option<usize>],
    start: usize,
    id: usize,
) -> (usize, bool) {
    let mut queue = VecDeque::from([start]);
    labels[start] = Some(id);
    let (mut size, mut touches_border) = (0, false);
    while let Some(i) = queue.pop_front() {
        size += 1;
        let (x, y) = (i % w, i / w);
        if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
            touches_border = true;
        }
        let mut visit = |j: usize| {
            if member[j] && labels[j].is_none() {
                labels[j] = Some(id);
                queue.push_back(j);
            }
        };
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < w {
            visit(i + 1);
        }
        if y > 0 {
            visit(i - w);
        }
        if y + 1 < h {
            visit(i + w);
        }
    }
    (size, touches_border)
}

pub fn zero_level_components(phi: &ScalarField) -> Components {
    let g = phi.grid();
    let (w, h) = (g.width(), g.height());
    let inside: Vec<bool> = phi.values().iter().map(|v| *v > 0.0).collect();

    let mut labels = vec![None; g.len()];
    let mut sizes = Vec::new();
    for i in 0..g.len() {
        if inside[i] && labels[i].is_none() {
            let (size, _) = flood(w, h, &inside, &mut labels, i, sizes.len());
            sizes.push(size);
        }
    }

    let mut boundary_cells = vec![Vec::new(); sizes.len()];
    for (i, l) in labels.iter().enumerate() {
        if let Some(c) = l {
            let (x, y) = (i % w, i / w);
            let edge = (x > 0 && !inside[i - 1])
                || (x + 1 < w && !inside[i + 1])
                || (y > 0 && !inside[i - w])
                || (y + 1 < h && !inside[i + w]);
            if edge {
                boundary_cells[*c].push(i);
            }
        }
    }

    let outside: Vec<bool> = inside.iter().map(|b| !b).collect();
    let mut out_labels = vec![None; g.len()];
    let mut holes = 0;
    let mut next = 0;
    for i in 0..g.len() {
        if outside[i] && out_labels[i].is_none() {
            let (_, border) = flood(w, h, &outside, &mut out_labels, i, next);
            next += 1;
            if !border {
                holes += 1;
            }
        }
    }

    Components {
        labels,
        sizes,
        boundary_cells,
        holes,
    }
}
