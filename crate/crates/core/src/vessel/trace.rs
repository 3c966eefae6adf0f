//! Partition a thin skeleton into maximal simple paths.
//!
//! Paths split at branch pixels (3 or more skeleton neighbors) and at
//! endpoints. Every degree-2 pixel lands in exactly one segment; branch
//! pixels may terminate several. Isolated pixels yield no segment.
//!
//! A diagonal adjacency is ignored when one of the two shared orthogonal
//! pixels is also foreground; otherwise junctions sprout spurious
//! two-pixel segments along the redundant diagonals.

use super::centerline::{Centerline, VesselClass};
use crate::raster::BinaryMask;
use std::collections::HashSet;

const NEIGHBORS: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

fn neighbors_of(skeleton: &BinaryMask, x: u32, y: u32) -> Vec<(u32, u32)> {
    let (xi, yi) = (x as i64, y as i64);
    NEIGHBORS
        .iter()
        .filter_map(|&(dx, dy)| {
            if !skeleton.get_i(xi + dx, yi + dy) {
                return None;
            }
            if dx != 0
                && dy != 0
                && (skeleton.get_i(xi + dx, yi) || skeleton.get_i(xi, yi + dy))
            {
                return None; // redundant diagonal
            }
            Some(((xi + dx) as u32, (yi + dy) as u32))
        })
        .collect()
}

pub fn trace_segments(skeleton: &BinaryMask, class: VesselClass) -> Vec<Centerline> {
    let (w, h) = skeleton.dims();
    let idx = |x: u32, y: u32| (y * w + x) as usize;
    let mut degree = vec![0u8; (w * h) as usize];
    let mut nodes = Vec::new();
    for (x, y) in skeleton.foreground() {
        let d = neighbors_of(skeleton, x, y).len() as u8;
        degree[idx(x, y)] = d;
        if d != 2 {
            nodes.push((x, y));
        }
    }

    let mut segments: Vec<Vec<(u32, u32)>> = Vec::new();
    let mut used_edges: HashSet<(usize, usize)> = HashSet::new();
    let mut interior_done = vec![false; (w * h) as usize];

    // paths anchored at endpoints / branch pixels, in row-major order
    for &(x, y) in &nodes {
        for nb in neighbors_of(skeleton, x, y) {
            if used_edges.contains(&(idx(x, y), idx(nb.0, nb.1))) {
                continue;
            }
            let start = (x, y);
            let mut path = vec![start, nb];
            let mut prev = start;
            let mut cur = nb;
            while degree[idx(cur.0, cur.1)] == 2 && cur != start {
                interior_done[idx(cur.0, cur.1)] = true;
                let next = neighbors_of(skeleton, cur.0, cur.1)
                    .into_iter()
                    .find(|&p| p != prev)
                    .expect("degree-2 pixel has a second neighbor");
                path.push(next);
                prev = cur;
                cur = next;
            }
            let k = path.len();
            used_edges.insert((idx(path[0].0, path[0].1), idx(path[1].0, path[1].1)));
            used_edges.insert((
                idx(path[k - 1].0, path[k - 1].1),
                idx(path[k - 2].0, path[k - 2].1),
            ));
            segments.push(path);
        }
    }

    // pure cycles: degree-2 pixels no node walk can reach
    for y in 0..h {
        for x in 0..w {
            let i = idx(x, y);
            if degree[i] != 2 || interior_done[i] {
                continue;
            }
            interior_done[i] = true;
            let start = (x, y);
            let first = neighbors_of(skeleton, x, y)[0];
            let mut path = vec![start, first];
            let mut prev = start;
            let mut cur = first;
            while cur != start {
                interior_done[idx(cur.0, cur.1)] = true;
                let next = neighbors_of(skeleton, cur.0, cur.1)
                    .into_iter()
                    .find(|&p| p != prev)
                    .expect("cycle pixel has a second neighbor");
                path.push(next);
                prev = cur;
                cur = next;
            }
            segments.push(path);
        }
    }

    segments
        .into_iter()
        .filter(|p| p.len() >= 2)
        .map(|p| {
            Centerline::new(
                p.into_iter().map(|(x, y)| (x as f64, y as f64)).collect(),
                class,
            )
            .expect("traced path has >= 2 distinct points")
        })
        .collect()
}
