//! Social-balance machinery on transitive triads and communities.

mod census;
mod label;
mod null_model;
mod triads;

pub use census::{
    meso_consistency_count, triad_census, CensusReport, Pattern, BALANCED_PATTERNS,
};
pub use label::{build_sb_set, meso_sb_label, micro_sb_label, EdgeSample, Provenance, SbMode};
pub use null_model::{
    default_swap_budget, null_model_sample, null_sample_statistics, zscore_report, NullSampleStats,
    SwapStats, ZScore, ZScoreReport,
};
pub use triads::{enumerate_transitive_triads, TransitiveTriad, TransitiveTriads};
