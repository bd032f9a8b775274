//! Run orchestration: configuration, the stage commands, learning-curve
//! splits and the bundled reference scores.

mod config;
mod reference;
mod splits;
mod stages;

pub use config::{
    DatasetConfig, DatasetFormat, RunConfig, ScorerConfig, ScorerMode, SplitConfig, DEFAULT_SIZES, ENDPOINT_ENV,
};
pub use reference::{render_comparison, Reference, ReferenceCurvePoint, ReferenceScore};
pub use splits::{
    aggregate_runs, make_splits, read_split_manifest, render_curve_table, render_curve_tsv, CurvePoint, RunRecord,
    Split, SplitManifest,
};
pub use stages::{
    cmd_aggregate, cmd_eval, cmd_ingest, cmd_pairs, cmd_report, cmd_splits, cmd_transform, load_paired, IngestCount,
    PairCount, RunDir,
};
