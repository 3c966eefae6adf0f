//! Central retinal vessel equivalents (CRAE / CRVE) by iterative pairwise
//! combination of the six largest vessel widths, and their ratio AVR.
//!
//! The revised (Knudtson) pairing is scale-free; the original
//! (Parr-Hubbard) formulas carry additive constants calibrated in
//! micrometers. With no physical pixel scale available they are applied
//! to pixel widths unchanged and the results treated as unit-free.

use crate::vessel::VesselClass;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaliberMethod {
    Hubbard,
    Knudtson,
}

impl CaliberMethod {
    pub const BOTH: [CaliberMethod; 2] = [CaliberMethod::Hubbard, CaliberMethod::Knudtson];

    pub fn name(self) -> &'static str {
        match self {
            CaliberMethod::Hubbard => "hubbard",
            CaliberMethod::Knudtson => "knudtson",
        }
    }
}

/// Knudtson pairing: 0.88 * sqrt(w1^2 + w2^2) for arteries,
/// 0.95 * sqrt(w1^2 + w2^2) for veins.
pub fn pair_knudtson(w1: f64, w2: f64, kind: VesselClass) -> Result<f64> {
    if w1 <= 0.0 || w2 <= 0.0 {
        return Err(Error::NonPositiveWidth(w1.min(w2)));
    }
    let factor = match kind {
        VesselClass::Artery => 0.88,
        VesselClass::Vein => 0.95,
    };
    Ok(factor * (w1 * w1 + w2 * w2).sqrt())
}

/// Parr-Hubbard pairing with Wa the narrower and Wb the wider branch:
/// arteries sqrt(0.87 Wa^2 + 1.01 Wb^2 - 0.22 Wa Wb - 10.76),
/// veins sqrt(0.72 Wa^2 + 0.91 Wb^2 + 450.05).
pub fn pair_hubbard(w1: f64, w2: f64, kind: VesselClass) -> Result<f64> {
    if w1 <= 0.0 || w2 <= 0.0 {
        return Err(Error::NonPositiveWidth(w1.min(w2)));
    }
    let (wa, wb) = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
    let radicand = match kind {
        VesselClass::Artery => 0.87 * wa * wa + 1.01 * wb * wb - 0.22 * wa * wb - 10.76,
        VesselClass::Vein => 0.72 * wa * wa + 0.91 * wb * wb + 450.05,
    };
    if radicand <= 0.0 {
        return Err(Error::InvalidCaliber(radicand));
    }
    Ok(radicand.sqrt())
}

fn pair(w1: f64, w2: f64, kind: VesselClass, method: CaliberMethod) -> Result<f64> {
    match method {
        CaliberMethod::Hubbard => pair_hubbard(w1, w2, kind),
        CaliberMethod::Knudtson => pair_knudtson(w1, w2, kind),
    }
}

/// Summarize up to six widths into one central equivalent.
///
/// The widths are sorted descending and truncated to six; each round pairs
/// the current largest with the current smallest, an odd count carries the
/// median to the next round, and the last remaining value is the result.
/// A single input is returned unchanged.
pub fn central_equivalent(
    widths: &[f64],
    kind: VesselClass,
    method: CaliberMethod,
) -> Result<f64> {
    if widths.is_empty() {
        return Err(Error::EmptyStructure("vessel widths"));
    }
    if let Some(&bad) = widths.iter().find(|&&w| w <= 0.0) {
        return Err(Error::NonPositiveWidth(bad));
    }
    let mut vals: Vec<f64> = widths.to_vec();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals.truncate(6);
    while vals.len() > 1 {
        let k = vals.len();
        let mut next = Vec::with_capacity(k / 2 + 1);
        for i in 0..k / 2 {
            next.push(pair(vals[i], vals[k - 1 - i], kind, method)?);
        }
        if k % 2 == 1 {
            next.push(vals[k / 2]);
        }
        next.sort_by(|a, b| b.partial_cmp(a).unwrap());
        vals = next;
    }
    Ok(vals[0])
}

/// Arteriole-to-venule ratio CRAE / CRVE.
pub fn avr(crae: f64, crve: f64) -> Result<f64> {
    if crve <= 0.0 {
        return Err(Error::DivisionByZero("CRVE"));
    }
    Ok(crae / crve)
}

/// Caliber summary for one zone and method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaliberResult {
    pub crae: f64,
    pub crve: f64,
    pub avr: f64,
    pub method: CaliberMethod,
    pub n_arteries_used: usize,
    pub n_veins_used: usize,
}

/// Compute CRAE, CRVE, and AVR from per-vessel widths.
pub fn caliber_summary(
    artery_widths: &[f64],
    vein_widths: &[f64],
    method: CaliberMethod,
) -> Result<CaliberResult> {
    let crae = central_equivalent(artery_widths, VesselClass::Artery, method)?;
    let crve = central_equivalent(vein_widths, VesselClass::Vein, method)?;
    Ok(CaliberResult {
        crae,
        crve,
        avr: avr(crae, crve)?,
        method,
        n_arteries_used: artery_widths.len().min(6),
        n_veins_used: vein_widths.len().min(6),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn knudtson_hand_values() {
        let a = pair_knudtson(100.0, 100.0, VesselClass::Artery).unwrap();
        assert_relative_eq!(a, 124.4508, epsilon = 1e-3);
        let v = pair_knudtson(100.0, 100.0, VesselClass::Vein).unwrap();
        assert_relative_eq!(v, 134.3503, epsilon = 1e-3);
    }

    #[test]
    fn hubbard_hand_values() {
        let a = pair_hubbard(100.0, 100.0, VesselClass::Artery).unwrap();
        assert_relative_eq!(a, 16589.24f64.sqrt(), epsilon = 1e-9);
        let v = pair_hubbard(100.0, 100.0, VesselClass::Vein).unwrap();
        assert_relative_eq!(v, 16750.05f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn hubbard_tiny_arteries_invalid() {
        assert!(matches!(
            pair_hubbard(1.0, 1.0, VesselClass::Artery),
            Err(Error::InvalidCaliber(_))
        ));
    }

    #[test]
    fn six_equal_arteries_knudtson() {
        let ce =
            central_equivalent(&[100.0; 6], VesselClass::Artery, CaliberMethod::Knudtson)
                .unwrap();
        assert!((ce - 174.843).abs() < 0.01, "got {ce}");
    }

    #[test]
    fn singleton_returns_itself() {
        let ce = central_equivalent(&[80.0], VesselClass::Vein, CaliberMethod::Hubbard).unwrap();
        assert_eq!(ce, 80.0);
    }

    #[test]
    fn permutation_invariant() {
        let a = [90.0, 120.0, 75.0, 101.0, 88.0];
        let mut b = a;
        b.reverse();
        b.swap(1, 3);
        let ca = central_equivalent(&a, VesselClass::Vein, CaliberMethod::Knudtson).unwrap();
        let cb = central_equivalent(&b, VesselClass::Vein, CaliberMethod::Knudtson).unwrap();
        assert_eq!(ca, cb);
    }

    #[test]
    fn knudtson_homogeneous_hubbard_not() {
        let w = [95.0, 120.0, 80.0, 110.0, 70.0, 105.0];
        let scaled: Vec<f64> = w.iter().map(|x| 2.0 * x).collect();
        let base = central_equivalent(&w, VesselClass::Artery, CaliberMethod::Knudtson).unwrap();
        let twice =
            central_equivalent(&scaled, VesselClass::Artery, CaliberMethod::Knudtson).unwrap();
        assert_relative_eq!(twice, 2.0 * base, max_relative = 1e-9);

        let hb = central_equivalent(&w, VesselClass::Artery, CaliberMethod::Hubbard).unwrap();
        let hb2 =
            central_equivalent(&scaled, VesselClass::Artery, CaliberMethod::Hubbard).unwrap();
        assert!((hb2 - 2.0 * hb).abs() > 1e-6);
    }

    #[test]
    fn avr_cases() {
        assert_eq!(avr(5.0, 5.0).unwrap(), 1.0);
        assert_relative_eq!(avr(124.45, 134.35).unwrap(), 0.9263, epsilon = 1e-4);
        assert!(matches!(avr(1.0, 0.0), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn monotone_in_each_width() {
        let w = [90.0, 80.0, 70.0, 60.0];
        let base = central_equivalent(&w, VesselClass::Vein, CaliberMethod::Knudtson).unwrap();
        for i in 0..w.len() {
            let mut bumped = w;
            bumped[i] += 5.0;
            let v =
                central_equivalent(&bumped, VesselClass::Vein, CaliberMethod::Knudtson).unwrap();
            assert!(v >= base);
        }
    }
}
