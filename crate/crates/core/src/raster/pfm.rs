//! Portable float map codec for saliency fields.
//!
//! Grayscale ("Pf") only. The header scale's sign encodes endianness
//! (negative = little-endian); PFM stores rows bottom-up, which decode
//! normalizes to top-down.

use super::ScalarField;
use crate::{Error, Result};

fn read_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Decode("truncated PFM header".into()));
    }
    Ok(&bytes[start..*pos])
}

/// Decode a grayscale PFM raster.
pub fn decode_scalar_field(bytes: &[u8]) -> Result<ScalarField> {
    let mut pos = 0;
    let magic = read_token(bytes, &mut pos)?;
    match magic {
        b"Pf" => {}
        b"PF" => {
            return Err(Error::UnsupportedFormat(
                "color PFM (PF); expected grayscale (Pf)".into(),
            ))
        }
        _ => return Err(Error::Decode("bad PFM magic".into())),
    }
    let parse_dim = |tok: &[u8]| -> Result<u32> {
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::Decode("bad PFM dimensions".into()))
    };
    let width = parse_dim(read_token(bytes, &mut pos)?)?;
    let height = parse_dim(read_token(bytes, &mut pos)?)?;
    let scale: f32 = std::str::from_utf8(read_token(bytes, &mut pos)?)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Decode("bad PFM scale".into()))?;
    if scale == 0.0 {
        return Err(Error::Decode("PFM scale must be nonzero".into()));
    }
    let little_endian = scale < 0.0;
    // exactly one whitespace byte separates header from data
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Decode("missing PFM header terminator".into()));
    }
    pos += 1;

    let n = (width as usize) * (height as usize);
    let data = &bytes[pos..];
    if data.len() < n * 4 {
        return Err(Error::Decode(format!(
            "PFM data truncated: {} bytes for {} samples",
            data.len(),
            n
        )));
    }
    let mut values = vec![0.0f32; n];
    for row in 0..height as usize {
        // PFM rows run bottom-to-top
        let src_row = (height as usize - 1 - row) * width as usize;
        for col in 0..width as usize {
            let off = (src_row + col) * 4;
            let raw: [u8; 4] = data[off..off + 4].try_into().unwrap();
            values[row * width as usize + col] = if little_endian {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
        }
    }
    ScalarField::from_values(width, height, values)
}

/// Encode a field as little-endian grayscale PFM (scale -1.0).
pub fn encode_scalar_field(field: &ScalarField) -> Vec<u8> {
    let (width, height) = field.dims();
    let mut out = Vec::with_capacity(32 + field.values().len() * 4);
    out.extend_from_slice(format!("Pf\n{} {}\n-1.0\n", width, height).as_bytes());
    for row in (0..height as usize).rev() {
        for col in 0..width as usize {
            let v = field.values()[row * width as usize + col];
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pixel() {
        let f = ScalarField::from_values(1, 1, vec![0.5]).unwrap();
        let d = decode_scalar_field(&encode_scalar_field(&f)).unwrap();
        assert_eq!(d.values(), &[0.5]);
    }

    #[test]
    fn constant_zero_field() {
        let f = ScalarField::new(3, 2, 0.0);
        let d = decode_scalar_field(&encode_scalar_field(&f)).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nan_pixel_rejected() {
        let f = ScalarField::new(2, 1, 0.25);
        let mut bytes = encode_scalar_field(&f);
        let n = bytes.len();
        bytes[n - 4..].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(
            decode_scalar_field(&bytes),
            Err(Error::NonFiniteField(_))
        ));
    }

    #[test]
    fn row_order_is_top_down() {
        let f = ScalarField::from_values(1, 2, vec![1.0, 2.0]).unwrap();
        let d = decode_scalar_field(&encode_scalar_field(&f)).unwrap();
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(d.get(0, 1), 2.0);
    }

    #[test]
    fn big_endian_scale_sign() {
        // hand-built big-endian file, 1x1 with value 2.0
        let mut bytes = b"Pf\n1 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&2.0f32.to_be_bytes());
        let d = decode_scalar_field(&bytes).unwrap();
        assert_eq!(d.values(), &[2.0]);
    }

    #[test]
    fn color_pfm_unsupported() {
        assert!(matches!(
            decode_scalar_field(b"PF\n1 1\n-1.0\n\0\0\0\0"),
            Err(Error::UnsupportedFormat(_))
        ));
        assert!(matches!(
            decode_scalar_field(b"P5\n1 1\n255\n\0"),
            Err(Error::Decode(_))
        ));
    }
}
