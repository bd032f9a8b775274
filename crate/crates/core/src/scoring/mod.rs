//! Single-instance and worst-of-group scoring, chance levels, decision rules
//! and report assembly.

mod decide;
mod metric;
mod report;
mod simulate;

pub use decide::{mc_decide, zero_shot_decide, UNSCORABLE};
pub use metric::{chance_levels, group_score, single_score, Accuracy, Direction, GroupRef, GroupScores, ScoreFunction};
pub(crate) use report::render_rows;
pub use report::{build_report, pct, render_table, EvaluationReport, GroupBreakdown, MemberScore, Outcome, Setup};
pub use simulate::{simulate_uniform_pairs, SimulatedScores};
