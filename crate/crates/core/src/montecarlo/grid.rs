use super::topology::{BoundaryMode, Point};

/// Uniform bucket grid over `[0, side)²` for nearest-point queries.
#[derive(Debug, Clone)]
pub struct PointGrid {
    side: f64,
    cells: usize,
    cell: f64,
    buckets: Vec<Vec<(usize, Point)>>,
}

impl PointGrid {
    /// Builds a grid holding roughly `per_cell` points per bucket. The `usize`
    /// in each item is returned by queries unchanged.
    pub fn new(side: f64, items: impl IntoIterator<Item = (usize, Point)>, per_cell: f64) -> Self {
        let items: Vec<(usize, Point)> = items.into_iter().collect();
        let target = (items.len() as f64 / per_cell.max(1e-9)).sqrt().ceil();
        let cells = (target as usize).clamp(1, 1024);
        let cell = side / cells as f64;
        let mut buckets = vec![Vec::new(); cells * cells];
        let mut grid = Self { side, cells, cell, buckets: Vec::new() };
        for (id, p) in items {
            let (cx, cy) = grid.cell_of(p);
            buckets[cy * cells + cx].push((id, p));
        }
        grid.buckets = buckets;
        grid
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let f = |v: f64| ((v / self.cell).floor().max(0.0) as usize).min(self.cells - 1);
        (f(p[0]), f(p[1]))
    }

    fn dist2(&self, boundary: BoundaryMode, a: Point, b: Point) -> f64 {
        let mut dx = (a[0] - b[0]).abs();
        let mut dy = (a[1] - b[1]).abs();
        if let BoundaryMode::Torus = boundary {
            dx = dx.min(self.side - dx);
            dy = dy.min(self.side - dy);
        }
        dx * dx + dy * dy
    }

    /// Nearest stored point to `from` (squared distance), skipping id `exclude`.
    pub fn nearest(&self, boundary: BoundaryMode, from: Point, exclude: Option<usize>) -> Option<(usize, f64)> {
        let torus = matches!(boundary, BoundaryMode::Torus);
        let (cx, cy) = self.cell_of(from);
        let m = self.cells as isize;
        let mut best: Option<(usize, f64)> = None;
        let visit = |x: isize, y: isize, best: &mut Option<(usize, f64)>| {
            let (x, y) = if torus {
                (x.rem_euclid(m), y.rem_euclid(m))
            } else if x < 0 || y < 0 || x >= m || y >= m {
                return;
            } else {
                (x, y)
            };
            for &(id, p) in &self.buckets[y as usize * self.cells + x as usize] {
                if Some(id) == exclude {
                    continue;
                }
                let d2 = self.dist2(boundary, from, p);
                if best.is_none_or(|(_, b)| d2 < b) {
                    *best = Some((id, d2));
                }
            }
        };
        let (cx, cy) = (cx as isize, cy as isize);
        for r in 0..=m {
            if r == 0 {
                visit(cx, cy, &mut best);
            } else {
                for d in -r..=r {
                    visit(cx + d, cy - r, &mut best);
                    visit(cx + d, cy + r, &mut best);
                }
                for d in -r + 1..r {
                    visit(cx - r, cy + d, &mut best);
                    visit(cx + r, cy + d, &mut best);
                }
            }
            // cells outside ring r are at least r cell widths away
            if let Some((_, b)) = best {
                let reach = r as f64 * self.cell;
                if b <= reach * reach {
                    break;
                }
            }
        }
        best
    }
}
