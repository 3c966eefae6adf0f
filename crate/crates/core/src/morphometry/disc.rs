//! Optic disc / cup geometry from segmentation masks.

use crate::raster::BinaryMask;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Disc and cup bounding-box measurements, in pixels of the source raster.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscGeometry {
    pub disc_width: u32,
    pub disc_height: u32,
    pub cup_width: u32,
    pub cup_height: u32,
    pub vertical_cdr: f64,
    pub horizontal_cdr: f64,
    /// Disc bounding-box center.
    pub center: (f64, f64),
    /// Mean of disc bounding-box width and height.
    pub disc_diameter: f64,
}

/// Axis-aligned bounding box of the largest 8-connected component.
fn largest_component_bbox(mask: &BinaryMask) -> Option<(u32, u32, u32, u32)> {
    let (w, h) = mask.dims();
    let idx = |x: u32, y: u32| (y * w + x) as usize;
    let mut seen = vec![false; (w * h) as usize];
    let mut best: Option<(usize, (u32, u32, u32, u32))> = None;
    let mut stack = Vec::new();
    for (sx, sy) in mask.foreground() {
        if seen[idx(sx, sy)] {
            continue;
        }
        seen[idx(sx, sy)] = true;
        stack.push((sx, sy));
        let (mut count, mut x0, mut y0, mut x1, mut y1) = (0usize, sx, sy, sx, sy);
        while let Some((x, y)) = stack.pop() {
            count += 1;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if mask.get_i(nx, ny) && !seen[idx(nx as u32, ny as u32)] {
                        seen[idx(nx as u32, ny as u32)] = true;
                        stack.push((nx as u32, ny as u32));
                    }
                }
            }
        }
        if best.as_ref().map_or(true, |&(c, _)| count > c) {
            best = Some((count, (x0, y0, x1, y1)));
        }
    }
    best.map(|(_, bbox)| bbox)
}

/// Measure disc and cup bounding boxes and the cup-to-disc ratios.
/// The cup is expected to be pre-intersected with the disc; an empty cup
/// gives zero CDRs, an empty disc is an error.
pub fn disc_cup_geometry(disc: &BinaryMask, cup: &BinaryMask) -> Result<DiscGeometry> {
    let (dx0, dy0, dx1, dy1) =
        largest_component_bbox(disc).ok_or(Error::EmptyStructure("disc"))?;
    let disc_width = dx1 - dx0 + 1;
    let disc_height = dy1 - dy0 + 1;
    let (cup_width, cup_height) = match largest_component_bbox(cup) {
        Some((cx0, cy0, cx1, cy1)) => (cx1 - cx0 + 1, cy1 - cy0 + 1),
        None => (0, 0),
    };
    Ok(DiscGeometry {
        disc_width,
        disc_height,
        cup_width,
        cup_height,
        vertical_cdr: cup_height as f64 / disc_height as f64,
        horizontal_cdr: cup_width as f64 / disc_width as f64,
        center: ((dx0 + dx1) as f64 / 2.0, (dy0 + dy1) as f64 / 2.0),
        disc_diameter: (disc_width + disc_height) as f64 / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: u32, h: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> BinaryMask {
        let mut m = BinaryMask::new(w, h);
        for y in y0..=y1 {
            for x in x0..=x1 {
                m.set(x, y, true);
            }
        }
        m
    }

    #[test]
    fn cup_equal_disc_gives_unit_cdrs() {
        let disc = rect(200, 200, 40, 60, 159, 159);
        let g = disc_cup_geometry(&disc, &disc).unwrap();
        assert_eq!(g.vertical_cdr, 1.0);
        assert_eq!(g.horizontal_cdr, 1.0);
    }

    #[test]
    fn empty_cup_gives_zero_cdrs() {
        let disc = rect(50, 50, 10, 10, 29, 29);
        let g = disc_cup_geometry(&disc, &BinaryMask::new(50, 50)).unwrap();
        assert_eq!(g.vertical_cdr, 0.0);
        assert_eq!(g.horizontal_cdr, 0.0);
        assert_eq!(g.disc_diameter, 20.0);
        assert_eq!(g.center, (19.5, 19.5));
    }

    #[test]
    fn hand_cdr_case() {
        // disc bbox 120x100, cup bbox 60x40
        let disc = rect(300, 300, 40, 50, 159, 149);
        let cup = rect(300, 300, 70, 80, 129, 119);
        let g = disc_cup_geometry(&disc, &cup).unwrap();
        assert_eq!(g.horizontal_cdr, 0.5);
        assert_eq!(g.vertical_cdr, 0.4);
    }

    #[test]
    fn empty_disc_is_error() {
        let e = disc_cup_geometry(&BinaryMask::new(10, 10), &BinaryMask::new(10, 10));
        assert!(matches!(e, Err(Error::EmptyStructure("disc"))));
    }

    #[test]
    fn largest_component_wins() {
        let mut m = rect(100, 100, 10, 10, 39, 39);
        // small distant blob must not affect the bbox
        m.set(90, 90, true);
        let g = disc_cup_geometry(&m, &BinaryMask::new(100, 100)).unwrap();
        assert_eq!((g.disc_width, g.disc_height), (30, 30));
    }
}
