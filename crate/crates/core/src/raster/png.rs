//! PNG mask codec. Masks are written as 8-bit grayscale; on decode any
//! nonzero pixel counts as foreground.

use super::BinaryMask;
use crate::{Error, Result};
use image::{DynamicImage, ImageFormat};

/// Decode an 8-bit grayscale or indexed PNG into a mask.
pub fn decode_mask(bytes: &[u8]) -> Result<BinaryMask> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::Decode(e.to_string()))?;
    let luma = match img {
        DynamicImage::ImageLuma8(l) => l,
        DynamicImage::ImageLumaA8(l) => DynamicImage::ImageLumaA8(l).to_luma8(),
        DynamicImage::ImageRgb8(l) => DynamicImage::ImageRgb8(l).to_luma8(),
        DynamicImage::ImageRgba8(l) => DynamicImage::ImageRgba8(l).to_luma8(),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "PNG color type {:?} (expected 8-bit)",
                other.color()
            )))
        }
    };
    let (width, height) = (luma.width(), luma.height());
    if width == 0 || height == 0 {
        return Err(Error::Decode("zero-sized image".into()));
    }
    let bits = luma.into_raw().into_iter().map(|p| p != 0).collect();
    Ok(BinaryMask::from_bits(width, height, bits))
}

/// Encode a mask as an 8-bit grayscale PNG (foreground 255, background 0).
pub fn encode_mask(mask: &BinaryMask) -> Result<Vec<u8>> {
    let raw: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let img = image::GrayImage::from_raw(mask.width(), mask.height(), raw)
        .expect("buffer matches dimensions");
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Decode(e.to_string()))?;
    Ok(out.into_inner())
}
