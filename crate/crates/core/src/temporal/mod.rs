//! Quarterly growth series, cohesion over time and the interaction tests.

mod anova;
mod cohesion;
mod series;

pub use anova::{
    f_tail, manova_pillai, observations, two_way_anova, write_tests, AnovaResult, Epoch, EpochTest, Observation,
    TwoWayAnova,
};
pub use cohesion::{cohesion_series, write_cohesion, CohesionOptions, CohesionPoint};
pub use series::{activity_series, write_series, Measure, SeriesPoint};
