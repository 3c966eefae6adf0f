//! Vessel geometry: skeletonization, centerline tracing, and width
//! estimation — the substrate for all vascular morphometry.

mod centerline;
mod edt;
mod skeleton;
mod trace;

pub use centerline::{Centerline, VesselClass};
pub use edt::distance_transform;
pub use skeleton::skeletonize;
pub use trace::trace_segments;

use crate::raster::{BinaryMask, ScalarField, SegmentationBundle};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A traced centerline with per-point widths in pixels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VesselSegment {
    pub centerline: Centerline,
    pub widths: Vec<f64>,
}

impl VesselSegment {
    /// Mean of per-point widths.
    pub fn mean_width(&self) -> f64 {
        self.widths.iter().sum::<f64>() / self.widths.len() as f64
    }
}

/// All traced segments of one class for one mask.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VesselGraph {
    pub segments: Vec<VesselSegment>,
    pub width: u32,
    pub height: u32,
}

impl VesselGraph {
    /// Skeletonize, trace, and attach widths in one pass.
    pub fn from_mask(mask: &BinaryMask, class: VesselClass) -> Result<Self> {
        let skel = skeletonize(mask);
        let edt = distance_transform(mask);
        let segments = trace_segments(&skel, class)
            .into_iter()
            .map(|c| {
                let widths = widths_from_edt(&edt, mask, &c)?;
                Ok(VesselSegment {
                    centerline: c,
                    widths,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            segments,
            width: mask.width(),
            height: mask.height(),
        })
    }

    /// Merge artery and vein traces of one bundle into a single graph.
    pub fn from_bundle(bundle: &SegmentationBundle) -> Result<Self> {
        let mut graph = Self::from_mask(&bundle.artery, VesselClass::Artery)?;
        let veins = Self::from_mask(&bundle.vein, VesselClass::Vein)?;
        graph.segments.extend(veins.segments);
        Ok(graph)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Per-point vessel width: `2 * EDT - 1` at the nearest pixel, exact for
/// odd-width rasterized bars.
pub fn estimate_widths(mask: &BinaryMask, centerline: &Centerline) -> Result<Vec<f64>> {
    let edt = distance_transform(mask);
    widths_from_edt(&edt, mask, centerline)
}

fn widths_from_edt(
    edt: &ScalarField,
    mask: &BinaryMask,
    centerline: &Centerline,
) -> Result<Vec<f64>> {
    centerline
        .points
        .iter()
        .map(|&(x, y)| {
            let (px, py) = (x.round() as i64, y.round() as i64);
            if !mask.get_i(px, py) {
                return Err(Error::Geometry(format!(
                    "centerline point ({x:.1}, {y:.1}) is outside the mask"
                )));
            }
            Ok(2.0 * edt.get(px as u32, py as u32) as f64 - 1.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(width: u32) -> BinaryMask {
        // horizontal bar of the given odd thickness, length 40, centered
        let mut m = BinaryMask::new(50, 2 * width + 11);
        let cy = m.height() / 2;
        for y in cy - width / 2..=cy + width / 2 {
            for x in 5..45 {
                m.set(x, y, true);
            }
        }
        m
    }

    #[test]
    fn widths_exact_on_odd_bars() {
        for w in [1u32, 3, 5, 7, 9] {
            let m = bar(w);
            let graph = VesselGraph::from_mask(&m, VesselClass::Artery).unwrap();
            assert_eq!(graph.segments.len(), 1, "width {w}");
            let seg = &graph.segments[0];
            // interior points: at least w pixels from the bar ends
            let interior: Vec<f64> = seg
                .centerline
                .points
                .iter()
                .zip(&seg.widths)
                .filter(|(&(x, _), _)| x >= (5 + w) as f64 && x <= (44 - w) as f64)
                .map(|(_, &wd)| wd)
                .collect();
            assert!(!interior.is_empty());
            assert!(
                interior.iter().all(|&v| v == w as f64),
                "width {w}: got {interior:?}"
            );
        }
    }

    #[test]
    fn point_outside_mask_is_error() {
        let m = bar(3);
        let c = Centerline::new(vec![(0.0, 0.0), (1.0, 0.0)], VesselClass::Vein).unwrap();
        assert!(estimate_widths(&m, &c).is_err());
    }

    #[test]
    fn graph_serializes_to_json() {
        let g = VesselGraph::from_mask(&bar(3), VesselClass::Vein).unwrap();
        let json = g.to_json().unwrap();
        assert!(json.contains("\"vein\""));
        assert!(json.contains("widths"));
    }
}
