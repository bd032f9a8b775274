//! Published reference scores bundled with the crate, and the side-by-side
//! comparison against our reports.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scoring::{pct, render_rows, EvaluationReport, Setup};

const REFERENCE_TOML: &str = include_str!("../../data/reference.toml");

/// Percentages as published.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReferenceScore {
    pub model: String,
    pub dataset: String,
    pub setup: Setup,
    pub single: f64,
    pub group: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReferenceCurvePoint {
    pub model: String,
    pub size: usize,
    pub single_mean: f64,
    pub single_std: f64,
    pub group_mean: f64,
    pub group_std: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Reference {
    pub scores: Vec<ReferenceScore>,
    pub curve: Vec<ReferenceCurvePoint>,
}

/// Lowercases and drops an organisation prefix such as `FacebookAI/`.
fn model_key(model: &str) -> String {
    model.rsplit('/').next().unwrap_or(model).trim().to_ascii_lowercase()
}

impl Reference {
    pub fn bundled() -> Result<Self> {
        toml::from_str(REFERENCE_TOML).map_err(|e| Error::Config(format!("bundled reference data: {e}")))
    }

    pub fn score(&self, model: &str, dataset: &str, setup: Setup) -> Option<&ReferenceScore> {
        let model = model_key(model);
        let dataset = dataset.to_ascii_lowercase();
        self.scores
            .iter()
            .find(|s| s.model == model && s.dataset == dataset && s.setup == setup)
    }

    pub fn curve_point(&self, model: &str, size: usize) -> Option<&ReferenceCurvePoint> {
        let model = model_key(model);
        self.curve.iter().find(|p| p.model == model && p.size == size)
    }
}

fn delta(ours: f64, theirs: Option<f64>) -> [String; 2] {
    match theirs {
        Some(t) => [format!("{t:.2}"), format!("{:+.2}", ours * 100.0 - t)],
        None => ["-".into(), "-".into()],
    }
}

/// One row per report: our single and group scores, the reference value and
/// the difference in points. `model` overrides each report's own model id.
pub fn render_comparison(reports: &[EvaluationReport], reference: &Reference, model: Option<&str>) -> String {
    let header: Vec<String> = ["Dataset", "Setup", "Model", "Single", "Ref", "Δ", "Group", "Ref", "Δ"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let m = model.or(r.model_id.as_deref()).unwrap_or("-");
            let hit = reference.score(m, &r.dataset, r.setup);
            let [s_ref, s_d] = delta(r.single_score, hit.map(|h| h.single));
            let [g_ref, g_d] = delta(r.group_score, hit.map(|h| h.group));
            vec![
                r.dataset.clone(),
                r.setup.to_string(),
                m.to_string(),
                pct(r.single_score),
                s_ref,
                s_d,
                pct(r.group_score),
                g_ref,
                g_d,
            ]
        })
        .collect();
    render_rows(&header, &rows, 3)
}
