//! Exact Euclidean distance transform via the two-pass lower-envelope
//! (parabola) method. Widths derived from it feed the caliber formulas,
//! where a chamfer approximation's systematic bias would compound.

use crate::raster::{BinaryMask, ScalarField};

const FAR: f64 = 1e20;

/// 1D squared-distance transform of a sampled function.
fn dt1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        loop {
            let vk = v[k] as f64;
            let s = ((f[q] + qf * qf) - (f[v[k]] + vk * vk)) / (2.0 * qf - 2.0 * vk);
            if k > 0 && s <= z[k] {
                k -= 1;
            } else {
                z[k + 1] = s;
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let dq = q as f64 - v[k] as f64;
        d[q] = dq * dq + f[v[k]];
    }
}

/// Exact Euclidean distance (between pixel centers) from each foreground
/// pixel to the nearest in-raster background pixel; background pixels map
/// to 0. A mask with no background at all returns the finite sentinel
/// `width + height` everywhere.
pub fn distance_transform(mask: &BinaryMask) -> ScalarField {
    let (w, h) = mask.dims();
    let (wu, hu) = (w as usize, h as usize);
    let sentinel = (w + h) as f64;
    let mut grid = vec![0.0f64; wu * hu];
    for (i, &fg) in mask.bits().iter().enumerate() {
        grid[i] = if fg { FAR } else { 0.0 };
    }

    let n = wu.max(hu);
    let mut f = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    // rows
    for y in 0..hu {
        let row = &mut grid[y * wu..(y + 1) * wu];
        f[..wu].copy_from_slice(row);
        dt1d(&f[..wu], &mut d[..wu], &mut v, &mut z);
        row.copy_from_slice(&d[..wu]);
    }
    // columns
    for x in 0..wu {
        for y in 0..hu {
            f[y] = grid[y * wu + x];
        }
        dt1d(&f[..hu], &mut d[..hu], &mut v, &mut z);
        for y in 0..hu {
            grid[y * wu + x] = d[y];
        }
    }

    let values: Vec<f32> = grid
        .into_iter()
        .map(|sq| (sq.sqrt().min(sentinel)) as f32)
        .collect();
    ScalarField::from_values(w, h, values).expect("EDT values are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// O(n^2) nearest-background search, the independent oracle.
    fn brute_force(mask: &BinaryMask) -> Vec<f32> {
        let (w, h) = mask.dims();
        let sentinel = (w + h) as f64;
        let mut out = vec![0.0f32; (w * h) as usize];
        for y in 0..h {
            for x in 0..w {
                if !mask.get(x, y) {
                    continue;
                }
                let mut best = f64::INFINITY;
                for by in 0..h {
                    for bx in 0..w {
                        if !mask.get(bx, by) {
                            let dx = bx as f64 - x as f64;
                            let dy = by as f64 - y as f64;
                            best = best.min(dx * dx + dy * dy);
                        }
                    }
                }
                out[(y * w + x) as usize] = (best.sqrt().min(sentinel)) as f32;
            }
        }
        out
    }

    #[test]
    fn single_pixel_distance_is_one() {
        let mut m = BinaryMask::new(5, 5);
        m.set(2, 2, true);
        let d = distance_transform(&m);
        assert_eq!(d.get(2, 2), 1.0);
        assert_eq!(d.get(1, 1), 0.0);
    }

    #[test]
    fn five_wide_bar_center_is_three() {
        // bar spanning the full width: rows 3..=7 of a 20x12 raster
        let mut m = BinaryMask::new(20, 12);
        for y in 3..=7 {
            for x in 0..20 {
                m.set(x, y, true);
            }
        }
        let d = distance_transform(&m);
        for x in 0..20 {
            assert_eq!(d.get(x, 5), 3.0);
        }
    }

    #[test]
    fn empty_mask_is_all_zero() {
        let d = distance_transform(&BinaryMask::new(7, 3));
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn full_mask_hits_sentinel() {
        let m = BinaryMask::from_bits(4, 3, vec![true; 12]);
        let d = distance_transform(&m);
        assert!(d.values().iter().all(|&v| v == 7.0));
    }

    #[test]
    fn matches_brute_force_on_random_masks() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1234);
        for trial in 0..60 {
            let w = rng.gen_range(1..=32u32);
            let h = rng.gen_range(1..=32u32);
            let density = rng.gen_range(0.05..0.95);
            let bits = (0..w * h).map(|_| rng.gen_bool(density)).collect();
            let m = BinaryMask::from_bits(w, h, bits);
            let fast = distance_transform(&m);
            let slow = brute_force(&m);
            assert_eq!(fast.values(), &slow[..], "trial {trial} ({w}x{h})");
        }
    }
}
