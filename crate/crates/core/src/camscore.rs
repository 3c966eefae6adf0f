//! Saliency-overlap scoring: the fraction of a structure's pixels that
//! fall inside the thresholded saliency field.

use crate::raster::{BinaryMask, Eye, ScalarField, SegmentationBundle, StructureKind};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Threshold a normalized field at `t`; a pixel is kept when its value is
/// greater than or equal to `t`, so `t = 0` keeps everything.
pub fn binarize(field: &ScalarField, t: f64) -> BinaryMask {
    let (w, h) = field.dims();
    let bits = field.values().iter().map(|&v| v as f64 >= t).collect();
    BinaryMask::from_bits(w, h, bits)
}

/// Overlap ratio between a structure mask and the binarized saliency
/// field: sum of structure pixels at or above threshold divided by the
/// structure pixel count.
pub fn cam_score(structure: &BinaryMask, field: &ScalarField, t: f64) -> Result<f64> {
    if structure.dims() != field.dims() {
        return Err(Error::DimMismatch(
            structure.width(),
            structure.height(),
            field.width(),
            field.height(),
        ));
    }
    let mut total = 0usize;
    let mut hit = 0usize;
    for (i, &m) in structure.bits().iter().enumerate() {
        if m {
            total += 1;
            if field.values()[i] as f64 >= t {
                hit += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::EmptyStructure("saliency target structure"));
    }
    Ok(hit as f64 / total as f64)
}

/// One score row; `score` is absent for empty structures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CamScoreRecord {
    pub subject_id: String,
    pub eye: Eye,
    pub factor: String,
    pub structure: StructureKind,
    pub threshold: f64,
    pub score: Option<f64>,
    pub flag: Option<String>,
}

/// Score all four structures of a bundle against one saliency field.
/// Empty structures yield a flagged record rather than an error.
pub fn cam_scores_for_bundle(
    bundle: &SegmentationBundle,
    field: &ScalarField,
    t: f64,
    factor: &str,
) -> Result<Vec<CamScoreRecord>> {
    if bundle.dims() != field.dims() {
        let (w, h) = bundle.dims();
        return Err(Error::DimMismatch(w, h, field.width(), field.height()));
    }
    Ok(StructureKind::ALL
        .iter()
        .map(|&structure| {
            let (score, flag) = match cam_score(bundle.structure(structure), field, t) {
                Ok(s) => (Some(s), None),
                Err(Error::EmptyStructure(_)) => (None, Some("empty_structure".to_string())),
                Err(e) => (None, Some(e.to_string())),
            };
            CamScoreRecord {
                subject_id: bundle.subject_id.clone(),
                eye: bundle.eye,
                factor: factor.to_string(),
                structure,
                threshold: t,
                score,
                flag,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn field_from(vals: &[f32], w: u32, h: u32) -> ScalarField {
        ScalarField::from_values(w, h, vals.to_vec()).unwrap()
    }

    #[test]
    fn binarize_boundaries() {
        let f = field_from(&[0.2, 0.7], 2, 1);
        assert_eq!(binarize(&f, 0.5).bits(), &[false, true]);
        assert_eq!(binarize(&f, 0.0).popcount(), 2);
        assert_eq!(binarize(&f, 0.71).popcount(), 0);
    }

    #[test]
    fn score_extremes() {
        let mut s = BinaryMask::new(4, 4);
        for i in 0..10u32 {
            s.set(i % 4, i / 4, true);
        }
        let ones = ScalarField::new(4, 4, 1.0);
        let zeros = ScalarField::new(4, 4, 0.0);
        assert_eq!(cam_score(&s, &ones, 0.5).unwrap(), 1.0);
        assert_eq!(cam_score(&s, &zeros, 0.5).unwrap(), 0.0);
        // threshold 0 keeps the whole field
        assert_eq!(cam_score(&s, &zeros, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn partial_overlap_hand_count() {
        // structure of 10 pixels, exactly 4 with saliency above threshold
        let mut s = BinaryMask::new(5, 2);
        let mut f = ScalarField::new(5, 2, 0.1);
        for i in 0..10u32 {
            s.set(i % 5, i / 5, true);
        }
        for i in 0..4u32 {
            f.set(i, 0, 0.9);
        }
        assert_eq!(cam_score(&s, &f, 0.5).unwrap(), 0.4);
    }

    #[test]
    fn empty_structure_errors() {
        let s = BinaryMask::new(3, 3);
        let f = ScalarField::new(3, 3, 1.0);
        assert!(matches!(
            cam_score(&s, &f, 0.5),
            Err(Error::EmptyStructure(_))
        ));
    }

    #[test]
    fn dim_mismatch() {
        let s = BinaryMask::from_bits(2, 2, vec![true; 4]);
        let f = ScalarField::new(3, 2, 1.0);
        assert!(matches!(cam_score(&s, &f, 0.5), Err(Error::DimMismatch(..))));
    }

    #[test]
    fn matches_brute_force_and_monotone() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let vals: Vec<f32> = (0..64 * 64).map(|_| rng.gen::<f32>()).collect();
            let f = field_from(&vals, 64, 64);
            let bits: Vec<bool> = (0..64 * 64).map(|_| rng.gen_bool(0.3)).collect();
            let s = BinaryMask::from_bits(64, 64, bits);
            if s.is_empty() {
                continue;
            }
            let mut prev = f64::INFINITY;
            for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
                // independent pixel loop
                let mut total = 0u32;
                let mut hit = 0u32;
                for y in 0..64 {
                    for x in 0..64 {
                        if s.get(x, y) {
                            total += 1;
                            if f.get(x, y) as f64 >= t {
                                hit += 1;
                            }
                        }
                    }
                }
                let got = cam_score(&s, &f, t).unwrap();
                assert_eq!(got, hit as f64 / total as f64);
                assert!(got <= prev, "score must be non-increasing in t");
                prev = got;
            }
        }
    }

    #[test]
    fn bundle_scores_flag_empty_cup() {
        let mut disc = BinaryMask::new(8, 8);
        let mut artery = BinaryMask::new(8, 8);
        let mut vein = BinaryMask::new(8, 8);
        for i in 0..8 {
            disc.set(i, 4, true);
            artery.set(i, 1, true);
            vein.set(i, 6, true);
        }
        let bundle = SegmentationBundle::new(
            "s",
            Eye::Left,
            artery,
            vein,
            disc,
            BinaryMask::new(8, 8),
        )
        .unwrap();
        let records =
            cam_scores_for_bundle(&bundle, &ScalarField::new(8, 8, 1.0), 0.5, "age").unwrap();
        assert_eq!(records.len(), 4);
        let scored: Vec<_> = records.iter().filter(|r| r.score.is_some()).collect();
        assert_eq!(scored.len(), 3);
        assert!(scored.iter().all(|r| r.score == Some(1.0)));
        let cup = records
            .iter()
            .find(|r| r.structure == StructureKind::OpticCup)
            .unwrap();
        assert!(cup.score.is_none());
        assert_eq!(cup.flag.as_deref(), Some("empty_structure"));
    }

    #[test]
    fn increasing_transform_invariance() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let vals: Vec<f32> = (0..256).map(|_| rng.gen::<f32>()).collect();
        let f = field_from(&vals, 16, 16);
        let g = field_from(
            &vals.iter().map(|&v| v * v * 0.5 + 0.1).collect::<Vec<_>>(),
            16,
            16,
        );
        let bits: Vec<bool> = (0..256).map(|_| rng.gen_bool(0.4)).collect();
        let s = BinaryMask::from_bits(16, 16, bits);
        let t = 0.6f64;
        let gt = (t * t * 0.5 + 0.1) as f32 as f64;
        assert_eq!(
            cam_score(&s, &f, t).unwrap(),
            cam_score(&s, &g, gt).unwrap()
        );
    }
}
