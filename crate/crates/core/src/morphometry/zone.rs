//! Annular measurement zones around the optic disc.
//!
//! Radii are measured from the disc margin: the inner edge sits half a
//! disc diameter beyond the margin, the outer edge one (zone B) or two
//! (zone C) diameters beyond it. With R the disc radius this puts zone B
//! at center distances [2R, 3R] and zone C at [2R, 5R].

use super::disc::DiscGeometry;
use crate::raster::BinaryMask;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    B,
    C,
}

impl Zone {
    pub const BOTH: [Zone; 2] = [Zone::B, Zone::C];

    pub fn name(self) -> &'static str {
        match self {
            Zone::B => "B",
            Zone::C => "C",
        }
    }

    /// Column suffix used in CSV output, e.g. `zoneB`.
    pub fn suffix(self) -> &'static str {
        match self {
            Zone::B => "zoneB",
            Zone::C => "zoneC",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Zone::B => 0,
            Zone::C => 1,
        }
    }
}

/// Inner/outer center-distance radii of a measurement zone.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZoneSpec {
    pub zone: Zone,
    pub inner_radius: f64,
    pub outer_radius: f64,
}

pub fn zone_spec(geom: &DiscGeometry, zone: Zone) -> ZoneSpec {
    let r = geom.disc_diameter / 2.0;
    let (inner, outer) = match zone {
        Zone::B => (2.0 * r, 3.0 * r),
        Zone::C => (2.0 * r, 5.0 * r),
    };
    ZoneSpec {
        zone,
        inner_radius: inner,
        outer_radius: outer,
    }
}

/// True iff a pixel center lies inside the zone annulus.
#[inline]
pub fn in_annulus(spec: &ZoneSpec, center: (f64, f64), x: u32, y: u32) -> bool {
    let dx = x as f64 - center.0;
    let dy = y as f64 - center.1;
    let d2 = dx * dx + dy * dy;
    d2 >= spec.inner_radius * spec.inner_radius && d2 <= spec.outer_radius * spec.outer_radius
}

/// Rasterize the zone annulus, clipped to the raster bounds.
pub fn zone_annulus(geom: &DiscGeometry, zone: Zone, dims: (u32, u32)) -> BinaryMask {
    let spec = zone_spec(geom, zone);
    let (w, h) = dims;
    let mut mask = BinaryMask::new(w, h);
    // bounding box of the outer circle, clipped
    let x0 = (geom.center.0 - spec.outer_radius).floor().max(0.0) as u32;
    let y0 = (geom.center.1 - spec.outer_radius).floor().max(0.0) as u32;
    let x1 = ((geom.center.0 + spec.outer_radius).ceil() as i64).min(w as i64 - 1);
    let y1 = ((geom.center.1 + spec.outer_radius).ceil() as i64).min(h as i64 - 1);
    if x1 < 0 || y1 < 0 {
        return mask;
    }
    for y in y0..=y1 as u32 {
        for x in x0..=x1 as u32 {
            if in_annulus(&spec, geom.center, x, y) {
                mask.set(x, y, true);
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(dd: f64, cx: f64, cy: f64) -> DiscGeometry {
        DiscGeometry {
            disc_width: dd as u32,
            disc_height: dd as u32,
            cup_width: 0,
            cup_height: 0,
            vertical_cdr: 0.0,
            horizontal_cdr: 0.0,
            center: (cx, cy),
            disc_diameter: dd,
        }
    }

    #[test]
    fn radii_for_dd_100() {
        let g = geom(100.0, 456.0, 456.0);
        let b = zone_spec(&g, Zone::B);
        assert_eq!((b.inner_radius, b.outer_radius), (100.0, 150.0));
        let c = zone_spec(&g, Zone::C);
        assert_eq!((c.inner_radius, c.outer_radius), (100.0, 250.0));
    }

    #[test]
    fn zone_b_inside_zone_c() {
        let g = geom(120.0, 300.0, 310.0);
        let b = zone_annulus(&g, Zone::B, (912, 912));
        let c = zone_annulus(&g, Zone::C, (912, 912));
        for (x, y) in b.foreground() {
            assert!(c.get(x, y));
        }
    }

    #[test]
    fn annulus_area_close_to_analytic() {
        let g = geom(100.0, 456.0, 456.0);
        for zone in Zone::BOTH {
            let spec = zone_spec(&g, zone);
            let m = zone_annulus(&g, zone, (912, 912));
            let analytic = std::f64::consts::PI
                * (spec.outer_radius.powi(2) - spec.inner_radius.powi(2));
            let count = m.popcount() as f64;
            assert!(
                (count - analytic).abs() / analytic < 0.02,
                "zone {:?}: {count} vs {analytic}",
                zone
            );
        }
    }

    #[test]
    fn annulus_clipped_at_raster_border() {
        let g = geom(100.0, 30.0, 30.0);
        let m = zone_annulus(&g, Zone::C, (200, 200));
        assert!(m.popcount() > 0);
        // nothing outside bounds blows up; mask covers only valid pixels
        assert!(m.foreground().all(|(x, y)| x < 200 && y < 200));
    }
}
