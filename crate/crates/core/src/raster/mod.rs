//! Raster primitives shared by the whole pipeline: binary structure masks,
//! scalar saliency fields, and the per-eye segmentation bundle.
//!
//! All values are immutable after construction and safe to share across
//! threads; decoding of distinct files may proceed concurrently.

mod pfm;
mod png;

pub use pfm::{decode_scalar_field, encode_scalar_field};
pub use png::{decode_mask, encode_mask};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A row-major boolean raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self {
            width,
            height,
            bits: vec![false; (width * height) as usize],
        }
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), (width * height) as usize);
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    /// Out-of-bounds coordinates read as background.
    #[inline]
    pub fn get_i(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            false
        } else {
            self.bits[(y as u32 * self.width + x as u32) as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[(y * self.width + x) as usize] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of foreground pixels.
    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Iterator over foreground pixel coordinates in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.bits.iter().enumerate().filter_map(move |(i, &b)| {
            b.then(|| (i as u32 % self.width, i as u32 / self.width))
        })
    }

    /// Column `c` maps to `width - 1 - c`.
    pub fn flip_horizontal(&self) -> Self {
        let mut bits = vec![false; self.bits.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                bits[(y * self.width + (self.width - 1 - x)) as usize] = self.get(x, y);
            }
        }
        Self {
            width: self.width,
            height: self.height,
            bits,
        }
    }

    /// Pixelwise intersection. Panics on dimension mismatch.
    pub fn intersect(&self, other: &Self) -> Self {
        assert_eq!(self.dims(), other.dims());
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(&a, &b)| a && b)
            .collect();
        Self {
            width: self.width,
            height: self.height,
            bits,
        }
    }
}

/// Count of pixels set in both masks.
pub fn overlap_count(a: &BinaryMask, b: &BinaryMask) -> Result<usize> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch(a.width, a.height, b.width, b.height));
    }
    Ok(a.bits
        .iter()
        .zip(&b.bits)
        .filter(|(&x, &y)| x && y)
        .count())
}

/// A row-major raster of finite 32-bit float values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: u32,
    height: u32,
    values: Vec<f32>,
}

impl ScalarField {
    pub fn new(width: u32, height: u32, fill: f32) -> Self {
        assert!(width > 0 && height > 0);
        Self {
            width,
            height,
            values: vec![fill; (width * height) as usize],
        }
    }

    /// Rejects non-finite values.
    pub fn from_values(width: u32, height: u32, values: Vec<f32>) -> Result<Self> {
        assert_eq!(values.len(), (width * height) as usize);
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField(i));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.values[(y * self.width + x) as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: f32) {
        self.values[(y * self.width + x) as usize] = value;
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Linear min-max normalization to [0, 1]. A constant field maps to all
    /// zeros so that a featureless map carries zero attribution.
    pub fn normalize_minmax(&self) -> Self {
        let mut min = f32::INFINITY;
        let mut max = f32::NEG_INFINITY;
        for &v in &self.values {
            min = min.min(v);
            max = max.max(v);
        }
        let range = max - min;
        let values = if range > 0.0 {
            self.values.iter().map(|&v| (v - min) / range).collect()
        } else {
            vec![0.0; self.values.len()]
        };
        Self {
            width: self.width,
            height: self.height,
            values,
        }
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut values = vec![0.0f32; self.values.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                values[(y * self.width + (self.width - 1 - x)) as usize] = self.get(x, y);
            }
        }
        Self {
            width: self.width,
            height: self.height,
            values,
        }
    }
}

/// The four anatomical structures scored against saliency fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StructureKind {
    Artery,
    Vein,
    OpticDisc,
    OpticCup,
}

impl StructureKind {
    pub const ALL: [StructureKind; 4] = [
        StructureKind::Artery,
        StructureKind::Vein,
        StructureKind::OpticDisc,
        StructureKind::OpticCup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StructureKind::Artery => "artery",
            StructureKind::Vein => "vein",
            StructureKind::OpticDisc => "optic_disc",
            StructureKind::OpticCup => "optic_cup",
        }
    }
}

/// Eye laterality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Eye {
    Left,
    Right,
}

impl Eye {
    pub fn name(self) -> &'static str {
        match self {
            Eye::Left => "left",
            Eye::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Eye::Left),
            "right" | "r" => Ok(Eye::Right),
            other => Err(Error::InvalidInput(format!("unknown eye '{other}'"))),
        }
    }
}

/// The four structure masks of one eye, orientation-normalized so that
/// right-eye anatomy aligns with left-eye anatomy.
#[derive(Debug, Clone)]
pub struct SegmentationBundle {
    pub subject_id: String,
    pub eye: Eye,
    pub artery: BinaryMask,
    pub vein: BinaryMask,
    pub disc: BinaryMask,
    pub cup: BinaryMask,
    /// True once right-eye masks have been horizontally flipped.
    pub eye_normalized: bool,
}

impl SegmentationBundle {
    /// Builds a bundle from raw masks. The cup is intersected with the disc
    /// so cup-to-disc ratios stay within [0, 1]; right-eye masks are flipped.
    pub fn new(
        subject_id: impl Into<String>,
        eye: Eye,
        artery: BinaryMask,
        vein: BinaryMask,
        disc: BinaryMask,
        cup: BinaryMask,
    ) -> Result<Self> {
        let dims = artery.dims();
        for m in [&vein, &disc, &cup] {
            if m.dims() != dims {
                return Err(Error::DimMismatch(dims.0, dims.1, m.width(), m.height()));
            }
        }
        let cup = cup.intersect(&disc);
        let mut bundle = Self {
            subject_id: subject_id.into(),
            eye,
            artery,
            vein,
            disc,
            cup,
            eye_normalized: eye == Eye::Left,
        };
        if !bundle.eye_normalized {
            bundle.artery = bundle.artery.flip_horizontal();
            bundle.vein = bundle.vein.flip_horizontal();
            bundle.disc = bundle.disc.flip_horizontal();
            bundle.cup = bundle.cup.flip_horizontal();
            bundle.eye_normalized = true;
        }
        Ok(bundle)
    }

    pub fn structure(&self, kind: StructureKind) -> &BinaryMask {
        match kind {
            StructureKind::Artery => &self.artery,
            StructureKind::Vein => &self.vein,
            StructureKind::OpticDisc => &self.disc,
            StructureKind::OpticCup => &self.cup,
        }
    }

    pub fn dims(&self) -> (u32, u32) {
        self.artery.dims()
    }
}
