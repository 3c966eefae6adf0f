//! The 24 retinal morphology features: optic disc/cup geometry, CDRs, and
//! zone-resolved vascular metrics.

mod disc;
mod fractal;
mod record;
mod tortuosity;
mod zone;

pub use disc::{disc_cup_geometry, DiscGeometry};
pub use fractal::fractal_dimension;
pub use record::{
    average_width, compute_record, csv_header, extract_record, vessel_density, CaliberFeatures,
    FeatureTable, MorphometryRecord, RecordParams, VascularFeatures, ZoneFeatures, BASE_FEATURES,
};
pub use tortuosity::{
    distance_tortuosity, squared_curvature_tortuosity, squared_curvature_tortuosity_with,
    tortuosity_density, tortuosity_density_with, TortuosityParams,
};
pub use zone::{in_annulus, zone_annulus, zone_spec, Zone, ZoneSpec};
