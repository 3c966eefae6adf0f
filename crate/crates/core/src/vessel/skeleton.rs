//! Zhang-Suen thinning. Deterministic, preserves 8-connectivity, and the
//! result is a fixed point of the algorithm (the loop runs to quiescence).

use crate::raster::BinaryMask;

/// Offsets of P2..P9, clockwise from north.
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

fn neighborhood(mask: &BinaryMask, x: u32, y: u32) -> [bool; 8] {
    let mut p = [false; 8];
    for (i, (dx, dy)) in NEIGHBORS.iter().enumerate() {
        p[i] = mask.get_i(x as i64 + dx, y as i64 + dy);
    }
    p
}

/// Reduce each foreground component to an 8-connected unit-width skeleton.
/// The empty mask maps to itself.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut current = mask.clone();
    let mut to_delete: Vec<(u32, u32)> = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            to_delete.clear();
            for y in 0..h {
                for x in 0..w {
                    if !current.get(x, y) {
                        continue;
                    }
                    let p = neighborhood(&current, x, y);
                    let b: u32 = p.iter().map(|&v| v as u32).sum();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    // 0->1 transitions around the ring P2..P9,P2
                    let a = (0..8)
                        .filter(|&i| !p[i] && p[(i + 1) % 8])
                        .count();
                    if a != 1 {
                        continue;
                    }
                    // p[0]=P2 (N), p[2]=P4 (E), p[4]=P6 (S), p[6]=P8 (W)
                    let ok = if pass == 0 {
                        !(p[0] && p[2] && p[4]) && !(p[2] && p[4] && p[6])
                    } else {
                        !(p[0] && p[2] && p[6]) && !(p[0] && p[4] && p[6])
                    };
                    if ok {
                        to_delete.push((x, y));
                    }
                }
            }
            for &(x, y) in &to_delete {
                current.set(x, y, false);
            }
            changed |= !to_delete.is_empty();
        }
        if !changed {
            return current;
        }
    }
}
