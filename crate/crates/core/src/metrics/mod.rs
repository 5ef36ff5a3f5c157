//! Per-user polarization and selective-exposure measures.

mod exposure;
mod loess;
mod polarization;

pub use exposure::{
    community_page_stats, exposure_curves, pages_per_window, user_engagement, write_exposure, Engagement,
    ExposureAxis, ExposureCurve, ExposureOptions, PageStats, UserEngagement, Window,
};
pub use loess::{loess_fit, LoessPoint};
pub use polarization::{
    detected_sides, polarization_histogram, user_polarization, write_profiles, Histogram, PolarizationProfile,
    DEFAULT_BINS, DEFAULT_MIN_ACTIONS,
};
