//! Box-counting fractal dimension of a masked region.

use crate::raster::BinaryMask;
use crate::{Error, Result};

/// Least-squares slope of log N(s) against log(1/s), where N(s) counts
/// grid boxes of side s (powers of two from 2 up to min(dims)/4) holding
/// at least one foreground pixel inside the region. The grid is anchored
/// at the raster origin.
pub fn fractal_dimension(mask: &BinaryMask, region: &BinaryMask) -> Result<f64> {
    if mask.dims() != region.dims() {
        return Err(Error::DimMismatch(
            mask.width(),
            mask.height(),
            region.width(),
            region.height(),
        ));
    }
    let (w, h) = mask.dims();
    let max_side = w.min(h) / 4;
    let mut scales = Vec::new();
    let mut s = 2u32;
    while s <= max_side {
        scales.push(s);
        s *= 2;
    }
    if scales.len() < 3 {
        return Err(Error::DegenerateFit(scales.len()));
    }

    let pixels: Vec<(u32, u32)> = mask
        .foreground()
        .filter(|&(x, y)| region.get(x, y))
        .collect();
    if pixels.is_empty() {
        return Err(Error::EmptyStructure("mask within region"));
    }

    let mut xs = Vec::with_capacity(scales.len());
    let mut ys = Vec::with_capacity(scales.len());
    for &s in &scales {
        let bw = w.div_ceil(s);
        let bh = h.div_ceil(s);
        let mut boxes = vec![false; (bw * bh) as usize];
        let mut n = 0usize;
        for &(x, y) in &pixels {
            let b = ((y / s) * bw + (x / s)) as usize;
            if !boxes[b] {
                boxes[b] = true;
                n += 1;
            }
        }
        xs.push(-(s as f64).ln()); // log(1/s)
        ys.push((n as f64).ln());
    }

    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_region(w: u32, h: u32) -> BinaryMask {
        BinaryMask::from_bits(w, h, vec![true; (w * h) as usize])
    }

    #[test]
    fn filled_square_dimension_two() {
        let m = full_region(512, 512);
        let d = fractal_dimension(&m, &full_region(512, 512)).unwrap();
        assert!((d - 2.0).abs() <= 0.1, "got {d}");
    }

    #[test]
    fn straight_line_dimension_one() {
        let mut m = BinaryMask::new(512, 512);
        for x in 0..512 {
            m.set(x, 200, true);
        }
        let d = fractal_dimension(&m, &full_region(512, 512)).unwrap();
        assert!((d - 1.0).abs() <= 0.1, "got {d}");
    }

    #[test]
    fn sierpinski_order_7() {
        // (x & y) == 0 fills the order-7 Sierpinski triangle on a 128 grid
        let mut m = BinaryMask::new(128, 128);
        for y in 0..128u32 {
            for x in 0..128u32 {
                if x & y == 0 {
                    m.set(x, y, true);
                }
            }
        }
        assert_eq!(m.popcount(), 3usize.pow(7));
        let d = fractal_dimension(&m, &full_region(128, 128)).unwrap();
        let expect = 3f64.ln() / 2f64.ln();
        assert!((d - expect).abs() <= 0.05, "got {d}, want {expect}");
    }

    #[test]
    fn empty_intersection_is_error() {
        let mut m = BinaryMask::new(64, 64);
        m.set(1, 1, true);
        let mut region = full_region(64, 64);
        region.set(1, 1, false);
        assert!(matches!(
            fractal_dimension(&m, &region),
            Err(Error::EmptyStructure(_))
        ));
    }

    #[test]
    fn tiny_raster_is_degenerate() {
        let m = full_region(16, 16);
        assert!(matches!(
            fractal_dimension(&m, &m),
            Err(Error::DegenerateFit(_))
        ));
    }
}
