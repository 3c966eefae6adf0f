//! Per-eye morphometry record: disc/cup geometry plus zone-resolved
//! vascular features, with per-feature quality flags instead of
//! whole-record failures.

use super::disc::{disc_cup_geometry, DiscGeometry};
use super::fractal::fractal_dimension;
use super::tortuosity::{
    distance_tortuosity, squared_curvature_tortuosity_with, tortuosity_density_with,
    TortuosityParams,
};
use super::zone::{zone_annulus, Zone};
use crate::caliber::{caliber_summary, CaliberMethod};
use crate::raster::{overlap_count, BinaryMask, Eye, SegmentationBundle};
use crate::vessel::{Centerline, VesselClass, VesselGraph};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Fraction of vessel pixels within a region.
pub fn vessel_density(mask: &BinaryMask, region: &BinaryMask) -> Result<f64> {
    let area = region.popcount();
    if area == 0 {
        return Err(Error::EmptyStructure("region"));
    }
    Ok(overlap_count(mask, region)? as f64 / area as f64)
}

/// Unweighted mean of per-point widths over centerline points of the given
/// class whose rounded coordinates fall inside the region.
pub fn average_width(
    graph: &VesselGraph,
    region: &BinaryMask,
    class: VesselClass,
) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for seg in graph.segments.iter().filter(|s| s.centerline.class == class) {
        for (&(x, y), &w) in seg.centerline.points.iter().zip(&seg.widths) {
            let (px, py) = (x.round() as i64, y.round() as i64);
            if px >= 0
                && py >= 0
                && (px as u32) < region.width()
                && (py as u32) < region.height()
                && region.get(px as u32, py as u32)
            {
                sum += w;
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::EmptyStructure("centerline points in region"));
    }
    Ok(sum / n as f64)
}

/// Parameters governing record assembly.
#[derive(Debug, Clone)]
pub struct RecordParams {
    /// Segments shorter than this many traced points are excluded from
    /// tortuosity statistics (kept for density and width).
    pub min_tortuosity_points: usize,
    /// A segment belongs to a zone when at least this fraction of its
    /// traced points lies inside the annulus.
    pub zone_membership_frac: f64,
    pub tortuosity: TortuosityParams,
}

impl Default for RecordParams {
    fn default() -> Self {
        Self {
            min_tortuosity_points: 10,
            zone_membership_frac: 0.5,
            tortuosity: TortuosityParams::for_raster(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct VascularFeatures {
    pub fractal_dimension: Option<f64>,
    pub vessel_density: Option<f64>,
    pub average_width: Option<f64>,
    pub distance_tortuosity: Option<f64>,
    pub squared_curvature_tortuosity: Option<f64>,
    pub tortuosity_density: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CaliberFeatures {
    pub crae_hubbard: Option<f64>,
    pub crve_hubbard: Option<f64>,
    pub avr_hubbard: Option<f64>,
    pub crae_knudtson: Option<f64>,
    pub crve_knudtson: Option<f64>,
    pub avr_knudtson: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ZoneFeatures {
    pub artery: VascularFeatures,
    pub vein: VascularFeatures,
    pub calibers: CaliberFeatures,
}

impl ZoneFeatures {
    pub fn class(&self, class: VesselClass) -> &VascularFeatures {
        match class {
            VesselClass::Artery => &self.artery,
            VesselClass::Vein => &self.vein,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorphometryRecord {
    pub subject_id: String,
    pub eye: Eye,
    pub disc: Option<DiscGeometry>,
    /// Indexed by [`Zone::index`].
    pub zones: [ZoneFeatures; 2],
    /// Per-feature absence notes, `<column>:<reason>`.
    pub flags: Vec<String>,
}

/// The 24 base feature names; vascular entries materialize per zone.
pub const BASE_FEATURES: [&str; 24] = [
    "disc_width_px",
    "disc_height_px",
    "cup_width_px",
    "cup_height_px",
    "vertical_cdr",
    "horizontal_cdr",
    "artery_fd",
    "artery_density",
    "artery_avg_width",
    "artery_dist_tort",
    "artery_sq_curv_tort",
    "artery_tort_density",
    "vein_fd",
    "vein_density",
    "vein_avg_width",
    "vein_dist_tort",
    "vein_sq_curv_tort",
    "vein_tort_density",
    "crae_hubbard",
    "crve_hubbard",
    "avr_hubbard",
    "crae_knudtson",
    "crve_knudtson",
    "avr_knudtson",
];

const ZONED_FEATURES: [&str; 18] = [
    "artery_fd",
    "artery_density",
    "artery_avg_width",
    "artery_dist_tort",
    "artery_sq_curv_tort",
    "artery_tort_density",
    "vein_fd",
    "vein_density",
    "vein_avg_width",
    "vein_dist_tort",
    "vein_sq_curv_tort",
    "vein_tort_density",
    "crae_hubbard",
    "crve_hubbard",
    "avr_hubbard",
    "crae_knudtson",
    "crve_knudtson",
    "avr_knudtson",
];

/// Fixed CSV column order: identifiers, disc block, zone B block,
/// zone C block, flags.
pub fn csv_header() -> Vec<String> {
    let mut cols = vec!["subject_id".to_string(), "eye".to_string()];
    cols.extend(BASE_FEATURES[..6].iter().map(|s| s.to_string()));
    for zone in Zone::BOTH {
        for name in ZONED_FEATURES {
            cols.push(format!("{name}_{}", zone.suffix()));
        }
    }
    cols.push("flags".to_string());
    cols
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl MorphometryRecord {
    /// Look up one of the 24 base features, zone-resolved where applicable.
    pub fn feature(&self, name: &str, zone: Zone) -> Option<f64> {
        let d = self.disc.as_ref();
        let z = &self.zones[zone.index()];
        match name {
            "disc_width_px" => d.map(|g| g.disc_width as f64),
            "disc_height_px" => d.map(|g| g.disc_height as f64),
            "cup_width_px" => d.map(|g| g.cup_width as f64),
            "cup_height_px" => d.map(|g| g.cup_height as f64),
            "vertical_cdr" => d.map(|g| g.vertical_cdr),
            "horizontal_cdr" => d.map(|g| g.horizontal_cdr),
            "artery_fd" => z.artery.fractal_dimension,
            "artery_density" => z.artery.vessel_density,
            "artery_avg_width" => z.artery.average_width,
            "artery_dist_tort" => z.artery.distance_tortuosity,
            "artery_sq_curv_tort" => z.artery.squared_curvature_tortuosity,
            "artery_tort_density" => z.artery.tortuosity_density,
            "vein_fd" => z.vein.fractal_dimension,
            "vein_density" => z.vein.vessel_density,
            "vein_avg_width" => z.vein.average_width,
            "vein_dist_tort" => z.vein.distance_tortuosity,
            "vein_sq_curv_tort" => z.vein.squared_curvature_tortuosity,
            "vein_tort_density" => z.vein.tortuosity_density,
            "crae_hubbard" => z.calibers.crae_hubbard,
            "crve_hubbard" => z.calibers.crve_hubbard,
            "avr_hubbard" => z.calibers.avr_hubbard,
            "crae_knudtson" => z.calibers.crae_knudtson,
            "crve_knudtson" => z.calibers.crve_knudtson,
            "avr_knudtson" => z.calibers.avr_knudtson,
            _ => None,
        }
    }

    pub fn csv_row(&self) -> Vec<String> {
        let mut row = vec![self.subject_id.clone(), self.eye.name().to_string()];
        for name in &BASE_FEATURES[..6] {
            row.push(fmt_opt(self.feature(name, Zone::B)));
        }
        for zone in Zone::BOTH {
            for name in ZONED_FEATURES {
                row.push(fmt_opt(self.feature(name, zone)));
            }
        }
        row.push(self.flags.join(";"));
        row
    }
}

/// Tabular view of morphometry output: the 42 zone-materialized feature
/// columns keyed by (subject, eye). This is the form the CSV round-trips
/// and the learning layer consumes.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub keys: Vec<(String, Eye)>,
    /// The 42 feature column names in canonical order.
    pub columns: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    pub flags: Vec<String>,
}

impl FeatureTable {
    pub fn feature_columns() -> Vec<String> {
        csv_header()[2..]
            .iter()
            .filter(|c| c.as_str() != "flags")
            .cloned()
            .collect()
    }

    pub fn from_records(records: &[MorphometryRecord]) -> Self {
        let columns = Self::feature_columns();
        let mut keys = Vec::with_capacity(records.len());
        let mut values = Vec::with_capacity(records.len());
        let mut flags = Vec::with_capacity(records.len());
        for r in records {
            keys.push((r.subject_id.clone(), r.eye));
            let row = r.csv_row();
            values.push(
                row[2..row.len() - 1]
                    .iter()
                    .map(|cell| cell.parse::<f64>().ok())
                    .collect(),
            );
            flags.push(r.flags.join(";"));
        }
        Self {
            keys,
            columns,
            values,
            flags,
        }
    }

    /// Column index of a base feature in a zone (disc features ignore the
    /// zone argument).
    pub fn column_index(&self, feature: &str, zone: Zone) -> Option<usize> {
        let want = if BASE_FEATURES[..6].contains(&feature) {
            feature.to_string()
        } else {
            format!("{feature}_{}", zone.suffix())
        };
        self.columns.iter().position(|c| *c == want)
    }

    pub fn value(&self, row: usize, feature: &str, zone: Zone) -> Option<f64> {
        self.column_index(feature, zone)
            .and_then(|c| self.values[row][c])
    }

    pub fn write_csv<W: std::io::Write>(&self, mut writer: W, preamble: &[String]) -> crate::Result<()> {
        for line in preamble {
            writeln!(writer, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(csv_header())?;
        for (i, (id, eye)) in self.keys.iter().enumerate() {
            let mut record = vec![id.clone(), eye.name().to_string()];
            for v in &self.values[i] {
                record.push(fmt_opt(*v));
            }
            record.push(self.flags[i].clone());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &std::path::Path) -> crate::Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> crate::Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expect = csv_header();
        if headers.iter().ne(expect.iter().map(|s| s.as_str())) {
            return Err(Error::InvalidInput(
                "morphometry CSV header mismatch".into(),
            ));
        }
        let columns = Self::feature_columns();
        let mut out = Self {
            keys: Vec::new(),
            columns,
            values: Vec::new(),
            flags: Vec::new(),
        };
        for record in rdr.records() {
            let record = record?;
            out.keys.push((
                record.get(0).unwrap_or("").to_string(),
                Eye::parse(record.get(1).unwrap_or(""))?,
            ));
            let n = record.len();
            out.values.push(
                (2..n - 1)
                    .map(|i| record.get(i).and_then(|c| c.parse::<f64>().ok()))
                    .collect(),
            );
            out.flags.push(record.get(n - 1).unwrap_or("").to_string());
        }
        Ok(out)
    }
}

fn zone_membership(
    c: &Centerline,
    geom: &DiscGeometry,
    spec: &super::zone::ZoneSpec,
) -> (usize, usize) {
    let inside = c
        .points
        .iter()
        .filter(|&&(x, y)| {
            let dx = x - geom.center.0;
            let dy = y - geom.center.1;
            let d2 = dx * dx + dy * dy;
            d2 >= spec.inner_radius * spec.inner_radius
                && d2 <= spec.outer_radius * spec.outer_radius
        })
        .count();
    (inside, c.points.len())
}

/// Assemble the full record. Per-feature failures become quality flags;
/// the record itself always materializes. `geom = None` (empty disc)
/// leaves every geometry-dependent feature absent.
pub fn compute_record(
    bundle: &SegmentationBundle,
    graph: &VesselGraph,
    geom: Option<&DiscGeometry>,
    params: &RecordParams,
) -> MorphometryRecord {
    let mut flags = Vec::new();
    let mut zones: [ZoneFeatures; 2] = Default::default();

    let Some(geom) = geom else {
        flags.push("disc:empty_structure".to_string());
        return MorphometryRecord {
            subject_id: bundle.subject_id.clone(),
            eye: bundle.eye,
            disc: None,
            zones,
            flags,
        };
    };

    for zone in Zone::BOTH {
        let spec = super::zone::zone_spec(geom, zone);
        let annulus = zone_annulus(geom, zone, bundle.dims());
        let zf = &mut zones[zone.index()];
        let suffix = zone.suffix();

        // per-class raster + centerline features
        for class in VesselClass::BOTH {
            let mask = match class {
                VesselClass::Artery => &bundle.artery,
                VesselClass::Vein => &bundle.vein,
            };
            let cname = class.name();
            let mut out = VascularFeatures::default();

            match vessel_density(mask, &annulus) {
                Ok(v) => out.vessel_density = Some(v),
                Err(_) => flags.push(format!("{cname}_density_{suffix}:empty")),
            }
            match fractal_dimension(mask, &annulus) {
                Ok(v) => out.fractal_dimension = Some(v),
                Err(_) => flags.push(format!("{cname}_fd_{suffix}:unavailable")),
            }
            match average_width(graph, &annulus, class) {
                Ok(v) => out.average_width = Some(v),
                Err(_) => flags.push(format!("{cname}_avg_width_{suffix}:empty")),
            }

            // arc-length-weighted tortuosities over qualifying segments
            let mut acc = [(0.0f64, 0.0f64); 3]; // (weighted sum, weight)
            for seg in graph.segments.iter().filter(|s| s.centerline.class == class) {
                let c = &seg.centerline;
                if c.len() < params.min_tortuosity_points {
                    continue;
                }
                let (inside, total) = zone_membership(c, geom, &spec);
                if (inside as f64) < params.zone_membership_frac * total as f64 {
                    continue;
                }
                let Ok(pre) = c
                    .resample_arclength(params.tortuosity.spacing)
                    .map(|p| {
                        let mut p = p;
                        for _ in 0..params.tortuosity.smooth_passes {
                            p = p.smooth(params.tortuosity.window);
                        }
                        p
                    })
                else {
                    continue;
                };
                let w = pre.arc_length();
                if let Ok(v) = distance_tortuosity(&pre) {
                    acc[0].0 += w * v;
                    acc[0].1 += w;
                }
                // curvature metrics preprocess internally from the raw trace
                if let Ok(v) = squared_curvature_tortuosity_with(c, &params.tortuosity) {
                    acc[1].0 += w * v;
                    acc[1].1 += w;
                }
                if let Ok(v) = tortuosity_density_with(c, &params.tortuosity) {
                    acc[2].0 += w * v;
                    acc[2].1 += w;
                }
            }
            let names = ["dist_tort", "sq_curv_tort", "tort_density"];
            let slots: [&mut Option<f64>; 3] = [
                &mut out.distance_tortuosity,
                &mut out.squared_curvature_tortuosity,
                &mut out.tortuosity_density,
            ];
            for ((slot, &(sum, weight)), metric) in slots.into_iter().zip(&acc).zip(names) {
                if weight > 0.0 {
                    *slot = Some(sum / weight);
                } else {
                    flags.push(format!("{cname}_{metric}_{suffix}:no_segments"));
                }
            }

            match class {
                VesselClass::Artery => zf.artery = out,
                VesselClass::Vein => zf.vein = out,
            }
        }

        // calibers: six largest by mean in-zone width
        let in_zone_widths = |class: VesselClass| -> Vec<f64> {
            let mut per_segment: Vec<f64> = graph
                .segments
                .iter()
                .filter(|s| s.centerline.class == class)
                .filter_map(|seg| {
                    let c = &seg.centerline;
                    let (inside, total) = zone_membership(c, geom, &spec);
                    if (inside as f64) < params.zone_membership_frac * total as f64 {
                        return None;
                    }
                    let ws: Vec<f64> = c
                        .points
                        .iter()
                        .zip(&seg.widths)
                        .filter(|(&(x, y), _)| {
                            let dx = x - geom.center.0;
                            let dy = y - geom.center.1;
                            let d2 = dx * dx + dy * dy;
                            d2 >= spec.inner_radius * spec.inner_radius
                                && d2 <= spec.outer_radius * spec.outer_radius
                        })
                        .map(|(_, &w)| w)
                        .collect();
                    (!ws.is_empty()).then(|| ws.iter().sum::<f64>() / ws.len() as f64)
                })
                .collect();
            per_segment.sort_by(|a, b| b.partial_cmp(a).unwrap());
            per_segment
        };
        let artery_widths = in_zone_widths(VesselClass::Artery);
        let vein_widths = in_zone_widths(VesselClass::Vein);
        for method in CaliberMethod::BOTH {
            match caliber_summary(&artery_widths, &vein_widths, method) {
                Ok(r) => match method {
                    CaliberMethod::Hubbard => {
                        zf.calibers.crae_hubbard = Some(r.crae);
                        zf.calibers.crve_hubbard = Some(r.crve);
                        zf.calibers.avr_hubbard = Some(r.avr);
                    }
                    CaliberMethod::Knudtson => {
                        zf.calibers.crae_knudtson = Some(r.crae);
                        zf.calibers.crve_knudtson = Some(r.crve);
                        zf.calibers.avr_knudtson = Some(r.avr);
                    }
                },
                Err(e) => flags.push(format!(
                    "caliber_{}_{suffix}:{}",
                    method.name(),
                    short_reason(&e)
                )),
            }
        }
    }

    MorphometryRecord {
        subject_id: bundle.subject_id.clone(),
        eye: bundle.eye,
        disc: Some(geom.clone()),
        zones,
        flags,
    }
}

fn short_reason(e: &Error) -> &'static str {
    match e {
        Error::EmptyStructure(_) => "empty",
        Error::InvalidCaliber(_) => "invalid_caliber",
        Error::NonPositiveWidth(_) => "nonpositive_width",
        Error::DivisionByZero(_) => "zero_crve",
        _ => "error",
    }
}

/// Full extraction from a bundle: disc geometry, vessel graph, record.
pub fn extract_record(bundle: &SegmentationBundle, params: &RecordParams) -> MorphometryRecord {
    let geom = disc_cup_geometry(&bundle.disc, &bundle.cup).ok();
    let graph = VesselGraph::from_bundle(bundle)
        .expect("skeleton points always lie inside their mask");
    compute_record(bundle, &graph, geom.as_ref(), params)
}
