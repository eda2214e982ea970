//! Marching-squares level sets on a rectilinear grid.
//!
//! Crossing points are linearly interpolated along cell edges. Segments are
//! joined through the edge they share, which makes the stitching exact: two
//! segments meet iff they cut the same grid edge. Saddle cells are resolved
//! with the cell-centre average. Cells touching a NaN corner are skipped.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    /// First and last points coincide.
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    /// y changes direction along the line, or the line is vertical somewhere.
    Mixed,
}

impl Polyline {
    /// Trend of y against x, with the points ordered by x.
    pub fn monotonicity(&self) -> Monotonicity {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut up = false;
        let mut down = false;
        for w in pts.windows(2) {
            let dx = w[1].0 - w[0].0;
            let dy = w[1].1 - w[0].1;
            if dx == 0.0 && dy != 0.0 {
                return Monotonicity::Mixed;
            }
            if dy > 0.0 {
                up = true;
            } else if dy < 0.0 {
                down = true;
            }
        }
        match (up, down) {
            (true, false) => Monotonicity::Increasing,
            (false, true) => Monotonicity::Decreasing,
            _ => Monotonicity::Mixed,
        }
    }

    /// Linear interpolation of y at `x`, over the first segment spanning it.
    pub fn y_at(&self, x: f64) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            let (lo, hi) = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
            if x < lo || x > hi {
                return None;
            }
            if a.0 == b.0 {
                return Some(a.1);
            }
            Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
        })
    }
}

/// Identifies a grid edge: horizontal edges run along x from (i, j) to
/// (i+1, j), vertical ones along y from (i, j) to (i, j+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Level-set polylines of `values` (row-major, `values[i*ny + j]` at
/// `(x[i], y[j])`). Returns an empty list when the level is never crossed.
pub fn marching_squares(x: &[f64], y: &[f64], values: &[f64], level: f64) -> Vec<Polyline> {
    let (nx, ny) = (x.len(), y.len());
    assert_eq!(values.len(), nx * ny, "grid shape mismatch");
    if nx < 2 || ny < 2 {
        return Vec::new();
    }
    let v = |i: usize, j: usize| values[i * ny + j];
    let point = |e: Edge| -> (f64, f64) {
        let (p, q, pv, qv) = match e {
            Edge::H(i, j) => ((x[i], y[j]), (x[i + 1], y[j]), v(i, j), v(i + 1, j)),
            Edge::V(i, j) => ((x[i], y[j]), (x[i], y[j + 1]), v(i, j), v(i, j + 1)),
        };
        let t = (level - pv) / (qv - pv);
        (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let corners = [v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)];
            if corners.iter().any(|c| c.is_nan()) {
                continue;
            }
            let above = corners.map(|c| c >= level);
            // edges: bottom, right, top, left; edge k joins corners k and k+1
            let edges = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
            let cut: Vec<Edge> = (0..4)
                .filter(|&k| above[k] != above[(k + 1) % 4])
                .map(|k| edges[k])
                .collect();
            match cut.len() {
                2 => segments.push((cut[0], cut[1])),
                4 => {
                    let centre = corners.iter().sum::<f64>() / 4.0 >= level;
                    if centre == above[0] {
                        // a and c joined through the centre; isolate b and d
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }

    let mut at: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        at.entry(a).or_default().push(s);
        at.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let walk = |start_seg: usize, start_edge: Edge, used: &mut Vec<bool>| -> Polyline {
        let mut edges = vec![start_edge];
        let mut seg = start_seg;
        let mut edge = start_edge;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            edge = if a == edge { b } else { a };
            edges.push(edge);
            match at[&edge].iter().find(|&&s| !used[s]) {
                Some(&next) => seg = next,
                None => break,
            }
        }
        let closed = edges.len() > 2 && edges.first() == edges.last();
        Polyline {
            points: edges.into_iter().map(point).collect(),
            closed,
        }
    };

    // open lines start at an edge shared by only one segment (the boundary)
    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        let (a, b) = segments[s];
        if at[&a].len() == 1 {
            out.push(walk(s, a, &mut used));
        } else if at[&b].len() == 1 {
            out.push(walk(s, b, &mut used));
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            let start = segments[s].0;
            out.push(walk(s, start, &mut used));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn constant_grid_has_no_contour() {
        let x = grid(5, 0.0, 1.0);
        let vals = vec![2.0; 25];
        assert!(marching_squares(&x, &x, &vals, 1.0).is_empty());
    }

    #[test]
    fn circle_is_one_closed_loop() {
        let x = grid(41, -2.0, 2.0);
        let vals: Vec<f64> = x
            .iter()
            .flat_map(|&a| x.iter().map(move |&b| a * a + b * b))
            .collect();
        let lines = marching_squares(&x, &x, &vals, 1.1);
        assert_eq!(lines.len(), 1);
        assert!(lines[0].closed);
        for &(a, b) in &lines[0].points {
            assert!(((a * a + b * b).sqrt() - 1.1f64.sqrt()).abs() < 0.01);
        }
    }

    #[test]
    fn plane_gives_straight_decreasing_line() {
        let x = grid(11, 0.0, 1.0);
        // level set x + y = 1.05, off the grid nodes
        let vals: Vec<f64> = x.iter().flat_map(|&a| x.iter().map(move |&b| a + b)).collect();
        let lines = marching_squares(&x, &x, &vals, 1.05);
        assert_eq!(lines.len(), 1);
        let l = &lines[0];
        assert!(!l.closed);
        assert_eq!(l.monotonicity(), Monotonicity::Decreasing);
        for &(a, b) in &l.points {
            assert!((a + b - 1.05).abs() < 1e-12);
        }
        assert!((l.y_at(0.25).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn nan_cells_are_skipped() {
        let x = grid(3, 0.0, 1.0);
        let mut vals: Vec<f64> = x.iter().flat_map(|&a| x.iter().map(move |&b| a + b)).collect();
        vals[4] = f64::NAN;
        assert!(marching_squares(&x, &x, &vals, 1.0).is_empty());
    }
}
