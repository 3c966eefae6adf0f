//! Traced centerlines and the geometric operations on them.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Artery/vein class label; carried from the source mask, never inferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VesselClass {
    Artery,
    Vein,
}

impl VesselClass {
    pub const BOTH: [VesselClass; 2] = [VesselClass::Artery, VesselClass::Vein];

    pub fn name(self) -> &'static str {
        match self {
            VesselClass::Artery => "artery",
            VesselClass::Vein => "vein",
        }
    }
}

/// An ordered polyline of subpixel points with a vessel class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Centerline {
    pub points: Vec<(f64, f64)>,
    pub class: VesselClass,
}

impl Centerline {
    /// Requires at least two points with distinct consecutive entries.
    pub fn new(points: Vec<(f64, f64)>, class: VesselClass) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Geometry(format!(
                "centerline needs >= 2 points, got {}",
                points.len()
            )));
        }
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Geometry(
                "consecutive centerline points coincide".into(),
            ));
        }
        Ok(Self { points, class })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Sum of consecutive point distances.
    pub fn arc_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| dist(w[0], w[1]))
            .sum()
    }

    /// Straight-line distance between endpoints.
    pub fn chord_length(&self) -> f64 {
        dist(self.points[0], *self.points.last().unwrap())
    }

    /// Resample to points equally spaced by arc length. Endpoints are
    /// preserved; the number of intervals is `round(arc_length / spacing)`,
    /// clamped to at least one.
    pub fn resample_arclength(&self, spacing: f64) -> Result<Self> {
        assert!(spacing > 0.0, "spacing must be positive");
        let total = self.arc_length();
        if total <= 0.0 {
            return Err(Error::Geometry("zero-length centerline".into()));
        }
        let n_seg = ((total / spacing).round() as usize).max(1);
        let step = total / n_seg as f64;

        let mut out = Vec::with_capacity(n_seg + 1);
        out.push(self.points[0]);
        let mut seg = 0usize; // index into input segments
        let mut seg_start_s = 0.0;
        let mut seg_len = dist(self.points[0], self.points[1]);
        for i in 1..n_seg {
            let target = i as f64 * step;
            while seg_start_s + seg_len < target && seg + 2 < self.points.len() {
                seg_start_s += seg_len;
                seg += 1;
                seg_len = dist(self.points[seg], self.points[seg + 1]);
            }
            let t = ((target - seg_start_s) / seg_len).clamp(0.0, 1.0);
            let a = self.points[seg];
            let b = self.points[seg + 1];
            out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
        out.push(*self.points.last().unwrap());
        out.dedup();
        Centerline::new(out, self.class)
    }

    /// Moving-average smoothing of coordinates with an odd window.
    /// The window shrinks symmetrically near the ends, so the endpoints
    /// are untouched and a window of 1 is the identity.
    pub fn smooth(&self, window: usize) -> Self {
        assert!(window >= 1 && window % 2 == 1, "window must be odd >= 1");
        let half = window / 2;
        let n = self.points.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let r = half.min(i).min(n - 1 - i);
            let (mut sx, mut sy) = (0.0, 0.0);
            for j in i - r..=i + r {
                sx += self.points[j].0;
                sy += self.points[j].1;
            }
            let k = (2 * r + 1) as f64;
            out.push((sx / k, sy / k));
        }
        Self {
            points: out,
            class: self.class,
        }
    }
}

#[inline]
pub(crate) fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}
