//! The three vessel tortuosity metrics: arc/chord ratio, integrated
//! squared curvature per unit length, and the inflection-weighted
//! tortuosity density.

use crate::vessel::Centerline;
use crate::{Error, Result};

/// Preprocessing applied before curvature-based metrics.
#[derive(Debug, Clone, Copy)]
pub struct TortuosityParams {
    /// Arc-length resampling spacing in pixels.
    pub spacing: f64,
    /// Moving-average window (odd).
    pub window: usize,
    /// Number of smoothing passes. Raster-traced centerlines need two to
    /// push staircase curvature noise below the metric tolerances;
    /// analytically sampled curves are fine with one.
    pub smooth_passes: usize,
    /// Curvature magnitude below which the sign is treated as unchanged
    /// when counting inflections.
    pub curvature_hysteresis: f64,
}

impl Default for TortuosityParams {
    fn default() -> Self {
        Self {
            spacing: 1.0,
            window: 5,
            smooth_passes: 1,
            curvature_hysteresis: 1e-4,
        }
    }
}

impl TortuosityParams {
    /// Parameters for centerlines traced from rasterized masks.
    pub fn for_raster() -> Self {
        Self {
            smooth_passes: 2,
            ..Self::default()
        }
    }
}

/// Arc length divided by chord length. Errors if the endpoints coincide.
pub fn distance_tortuosity(c: &Centerline) -> Result<f64> {
    let chord = c.chord_length();
    if chord <= 0.0 {
        return Err(Error::ZeroChord);
    }
    Ok(c.arc_length() / chord)
}

fn preprocess(c: &Centerline, params: &TortuosityParams) -> Result<Centerline> {
    let mut out = c.resample_arclength(params.spacing)?;
    for _ in 0..params.smooth_passes {
        out = out.smooth(params.window);
    }
    if out.len() < 5 {
        return Err(Error::Geometry(format!(
            "only {} points after resampling; need >= 5",
            out.len()
        )));
    }
    Ok(out)
}

/// Signed curvature at interior points via central finite differences:
/// kappa = (x' cross x'') / |x'|^3. Endpoints get zero.
fn signed_curvature(points: &[(f64, f64)]) -> Vec<f64> {
    let n = points.len();
    let mut kappa = vec![0.0; n];
    for i in 1..n - 1 {
        let (xm, ym) = points[i - 1];
        let (x0, y0) = points[i];
        let (xp, yp) = points[i + 1];
        let dx = (xp - xm) / 2.0;
        let dy = (yp - ym) / 2.0;
        let ddx = xp - 2.0 * x0 + xm;
        let ddy = yp - 2.0 * y0 + ym;
        let denom = (dx * dx + dy * dy).powf(1.5);
        if denom > 0.0 {
            kappa[i] = (dx * ddy - dy * ddx) / denom;
        }
    }
    kappa
}

fn local_arc_steps(points: &[(f64, f64)]) -> Vec<f64> {
    let n = points.len();
    let seg = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    (0..n)
        .map(|i| {
            let before = if i > 0 { seg(points[i - 1], points[i]) } else { 0.0 };
            let after = if i < n - 1 { seg(points[i], points[i + 1]) } else { 0.0 };
            (before + after) / 2.0
        })
        .collect()
}

/// Integral of squared curvature along the path divided by total arc
/// length, computed on the smoothed, arc-length-resampled centerline.
pub fn squared_curvature_tortuosity(c: &Centerline) -> Result<f64> {
    squared_curvature_tortuosity_with(c, &TortuosityParams::default())
}

pub fn squared_curvature_tortuosity_with(
    c: &Centerline,
    params: &TortuosityParams,
) -> Result<f64> {
    let pre = preprocess(c, params)?;
    let kappa = signed_curvature(&pre.points);
    let steps = local_arc_steps(&pre.points);
    let total: f64 = pre.arc_length();
    let integral: f64 = kappa
        .iter()
        .zip(&steps)
        .map(|(&k, &ds)| k * k * ds)
        .sum();
    Ok(integral / total)
}

/// Tortuosity density in the Grisan form: split at curvature sign changes
/// into n subsegments, then u = ((n-1)/n) * (1/L) * sum(L_i / C_i - 1).
pub fn tortuosity_density(c: &Centerline) -> Result<f64> {
    tortuosity_density_with(c, &TortuosityParams::default())
}

pub fn tortuosity_density_with(c: &Centerline, params: &TortuosityParams) -> Result<f64> {
    let pre = preprocess(c, params)?;
    let kappa = signed_curvature(&pre.points);

    // subsegment boundaries at hysteresis-filtered sign changes
    let mut boundaries = vec![0usize];
    let mut current_sign = 0i8;
    for (i, &k) in kappa.iter().enumerate() {
        if k.abs() <= params.curvature_hysteresis {
            continue;
        }
        let s = if k > 0.0 { 1i8 } else { -1 };
        if current_sign == 0 {
            current_sign = s;
        } else if s != current_sign {
            boundaries.push(i);
            current_sign = s;
        }
    }
    boundaries.push(pre.len() - 1);

    let seg = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let n = boundaries.len() - 1;
    let total = pre.arc_length();
    let mut sum = 0.0;
    for w in boundaries.windows(2) {
        let pts = &pre.points[w[0]..=w[1]];
        let arc: f64 = pts.windows(2).map(|p| seg(p[0], p[1])).sum();
        let chord = seg(pts[0], *pts.last().unwrap());
        if chord > 0.0 {
            sum += arc / chord - 1.0;
        }
    }
    Ok(((n - 1) as f64 / n as f64) * sum / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vessel::VesselClass;
    use approx::assert_relative_eq;

    fn line(n: usize) -> Centerline {
        Centerline::new(
            (0..n).map(|i| (i as f64, 0.0)).collect(),
            VesselClass::Artery,
        )
        .unwrap()
    }

    fn arc(r: f64, start: f64, sweep: f64, samples: usize) -> Centerline {
        Centerline::new(
            (0..=samples)
                .map(|i| {
                    let t = start + sweep * i as f64 / samples as f64;
                    (100.0 + r * t.cos(), 100.0 + r * t.sin())
                })
                .collect(),
            VesselClass::Artery,
        )
        .unwrap()
    }

    #[test]
    fn straight_line_trivial_values() {
        let c = line(40);
        assert!((distance_tortuosity(&c).unwrap() - 1.0).abs() < 1e-6);
        assert!(squared_curvature_tortuosity(&c).unwrap().abs() < 1e-6);
        assert_eq!(tortuosity_density(&c).unwrap(), 0.0);
    }

    #[test]
    fn semicircle_distance_tortuosity() {
        let c = arc(50.0, 0.0, std::f64::consts::PI, 2000);
        let t = distance_tortuosity(&c).unwrap();
        assert_relative_eq!(t, std::f64::consts::FRAC_PI_2, max_relative = 0.01);
    }

    #[test]
    fn closed_loop_is_zero_chord() {
        let mut c = arc(30.0, 0.0, 2.0 * std::f64::consts::PI, 500);
        let first = c.points[0];
        *c.points.last_mut().unwrap() = first; // close the loop exactly
        assert!(matches!(distance_tortuosity(&c), Err(Error::ZeroChord)));
    }

    #[test]
    fn circular_arc_squared_curvature() {
        let c = arc(50.0, 0.2, 1.8, 3000);
        let k2 = squared_curvature_tortuosity(&c).unwrap();
        assert_relative_eq!(k2, 4.0e-4, max_relative = 0.05);
    }

    #[test]
    fn halving_radius_quadruples_metric() {
        let big = squared_curvature_tortuosity(&arc(50.0, 0.0, 1.5, 3000)).unwrap();
        let small = squared_curvature_tortuosity(&arc(25.0, 0.0, 1.5, 3000)).unwrap();
        assert_relative_eq!(small / big, 4.0, max_relative = 0.02);
    }

    #[test]
    fn rigid_motion_invariance() {
        let c = arc(40.0, 0.3, 1.2, 2000);
        let (angle, tx, ty) = (0.7f64, 31.0, -12.0);
        let moved = Centerline::new(
            c.points
                .iter()
                .map(|&(x, y)| {
                    (
                        x * angle.cos() - y * angle.sin() + tx,
                        x * angle.sin() + y * angle.cos() + ty,
                    )
                })
                .collect(),
            VesselClass::Artery,
        )
        .unwrap();
        let a = squared_curvature_tortuosity(&c).unwrap();
        let b = squared_curvature_tortuosity(&moved).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-4);
    }

    #[test]
    fn uniform_scaling_law() {
        let base = arc(60.0, 0.1, 1.4, 3000);
        let k_base = squared_curvature_tortuosity(&base).unwrap();
        for s in [0.5f64, 2.0] {
            let scaled = Centerline::new(
                base.points.iter().map(|&(x, y)| (x * s, y * s)).collect(),
                VesselClass::Artery,
            )
            .unwrap();
            let k = squared_curvature_tortuosity(&scaled).unwrap();
            assert_relative_eq!(k, k_base / (s * s), max_relative = 0.02);
        }
    }

    #[test]
    fn single_sign_arc_has_zero_density() {
        let c = arc(50.0, 0.0, 1.5, 2000);
        assert_eq!(tortuosity_density(&c).unwrap(), 0.0);
    }

    #[test]
    fn density_increases_with_wave_count() {
        let wave = |m: usize| {
            let len = 400.0;
            Centerline::new(
                (0..=4000)
                    .map(|i| {
                        let x = len * i as f64 / 4000.0;
                        let y = 8.0 * (2.0 * std::f64::consts::PI * m as f64 * x / len).sin();
                        (x, y)
                    })
                    .collect(),
                VesselClass::Vein,
            )
            .unwrap()
        };
        let taus: Vec<f64> = (1..=4)
            .map(|m| tortuosity_density(&wave(m)).unwrap())
            .collect();
        for w in taus.windows(2) {
            assert!(w[1] > w[0], "density not increasing: {taus:?}");
        }
    }

    #[test]
    fn distance_tortuosity_at_least_one() {
        let c = arc(45.0, 0.4, 2.2, 1500);
        assert!(distance_tortuosity(&c).unwrap() >= 1.0);
    }
}
