//! The pipeline stages. Each reads the previous stage's files from the run
//! directory and writes its own.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use super::config::{DatasetFormat, RunConfig, ScorerMode, ENDPOINT_ENV};
use super::reference::{render_comparison, Reference};
use super::splits::{aggregate_runs, make_splits, render_curve_table, render_curve_tsv, RunRecord, SplitManifest};
use crate::artifact::{from_jsonl, read_to_string, to_json_doc, to_jsonl, write_string, ArtifactMeta};
use crate::corpus::{
    filter_associative, pair_twins_with, parse_winogrande, parse_wsc, read_exclusion_list, read_normalized,
    read_pairing_manifest, write_normalized, write_pairing_manifest, Dataset, PairingManifest,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::protocol::{
    read_response_batch, write_request_batch, write_response_batch, ChoiceScoreRequest, HttpScorer, MaskScoreRequest,
    ScoreRequest, ScoreResponse,
};
use crate::scoring::{
    build_report, mc_decide, render_table, zero_shot_decide, Accuracy, EvaluationReport, Outcome, Setup,
};
use crate::transforms::{run_ablation, run_zero_shot, Mode, ModeCounts, TransformRecord};

/// File layout of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn ingested(&self, dataset: &str) -> PathBuf {
        self.root.join("ingest").join(format!("{dataset}.jsonl"))
    }

    pub fn paired(&self, dataset: &str) -> PathBuf {
        self.root.join("pairs").join(format!("{dataset}.jsonl"))
    }

    pub fn pairing_manifest(&self, dataset: &str) -> PathBuf {
        self.root.join("pairs").join(format!("{dataset}.pairs.jsonl"))
    }

    pub fn transformed(&self, dataset: &str, mode: Mode) -> PathBuf {
        self.root.join("transform").join(format!("{dataset}.{mode}.jsonl"))
    }

    pub fn requests(&self, dataset: &str, setup: Setup) -> PathBuf {
        self.root.join("eval").join(format!("{dataset}.{setup}.requests.jsonl"))
    }

    pub fn responses(&self, dataset: &str, setup: Setup) -> PathBuf {
        self.root
            .join("eval")
            .join(format!("{dataset}.{setup}.responses.jsonl"))
    }

    pub fn report(&self, dataset: &str, setup: Setup) -> PathBuf {
        self.root.join("eval").join(format!("{dataset}.{setup}.report.json"))
    }

    pub fn split(&self, dataset: &str, replicate: usize) -> PathBuf {
        self.root
            .join("splits")
            .join(format!("{dataset}.seed-{replicate}.json"))
    }

    pub fn stage(&self, stage: &str, file: &str) -> PathBuf {
        self.root.join(stage).join(file)
    }
}

fn require(path: &Path, what: &str, stage: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Stage(format!(
            "{what} not found ({}); run `{stage}` first",
            path.display()
        )))
    }
}

fn footer(meta: &ArtifactMeta) -> String {
    format!("# config_hash={} seed={}\n", meta.config_hash, meta.seed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestCount {
    pub dataset: String,
    pub format: DatasetFormat,
    pub instances: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Summary<T> {
    meta: ArtifactMeta,
    entries: Vec<T>,
}

fn write_summary<T: Serialize + Clone>(path: &Path, meta: ArtifactMeta, entries: &[T]) -> Result<()> {
    let doc = Summary {
        meta,
        entries: entries.to_vec(),
    };
    write_string(path, &to_json_doc(&doc)?)
}

fn parse_source(name: &str, format: DatasetFormat, path: &Path) -> Result<Dataset> {
    let raw = read_to_string(path)?;
    let ds = match format {
        DatasetFormat::Wsc => parse_wsc(name, &raw),
        DatasetFormat::Winogrande => parse_winogrande(name, &raw),
        DatasetFormat::Normalized => read_normalized(name, &raw).map(|(_, d)| d),
    }
    .map_err(|e| Error::Document(format!("{}: {e}", path.display())))?;
    let mut seen = HashSet::new();
    for inst in &ds.instances {
        if !seen.insert(inst.id.as_str()) {
            return Err(Error::DuplicateId(inst.id.clone()));
        }
    }
    Ok(ds)
}

/// Parses and validates every configured dataset into the normalized
/// record format.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<Vec<IngestCount>> {
    cfg.check_inputs()?;
    let rd = RunDir::new(cfg.run_dir());
    let meta = cfg.meta("ingest");
    let mut counts = Vec::new();
    for d in &cfg.datasets {
        let ds = parse_source(&d.name, d.format, &cfg.resolve(&d.path))?;
        write_string(&rd.ingested(&d.name), &write_normalized(&ds, Some(&meta))?)?;
        info!("ingested {} instances into {}", ds.instances.len(), d.name);
        counts.push(IngestCount {
            dataset: d.name.clone(),
            format: d.format,
            instances: ds.instances.len(),
        });
    }
    write_summary(&rd.stage("ingest", "summary.json"), meta, &counts)?;
    Ok(counts)
}

fn load_ingested(rd: &RunDir, name: &str) -> Result<Dataset> {
    let path = rd.ingested(name);
    require(&path, &format!("ingested dataset {name}"), "ingest")?;
    Ok(read_normalized(name, &read_to_string(&path)?)?.1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub dataset: String,
    pub instances: usize,
    pub paired_instances: usize,
    pub groups: usize,
    pub orphans: usize,
    pub excluded: usize,
    pub unknown_exclusions: Vec<String>,
    pub orphaned_by_exclusion: Vec<String>,
}

/// Reconstructs twin groups, then drops excluded ids.
pub fn cmd_pairs(cfg: &RunConfig, execution: Execution) -> Result<Vec<PairCount>> {
    let rd = RunDir::new(cfg.run_dir());
    let meta = cfg.meta("pairs");
    let mut counts = Vec::new();
    for d in &cfg.datasets {
        let ds = pair_twins_with(load_ingested(&rd, &d.name)?, execution);
        let (ds, outcome) = match &d.exclusions {
            Some(p) => {
                let ids = read_exclusion_list(&read_to_string(&cfg.resolve(p))?);
                filter_associative(ds, &ids)
            }
            None => (ds, Default::default()),
        };
        let manifest = PairingManifest::from_dataset(&ds);
        write_string(&rd.paired(&d.name), &write_normalized(&ds, Some(&meta))?)?;
        write_string(
            &rd.pairing_manifest(&d.name),
            &write_pairing_manifest(&manifest, Some(&meta.with_kind("pairing-manifest")))?,
        )?;
        info!(
            "{}: {} paired instances in {} groups, {} orphans",
            d.name,
            ds.paired_instance_count(),
            ds.groups.len(),
            ds.orphans.len()
        );
        counts.push(PairCount {
            dataset: d.name.clone(),
            instances: ds.instances.len(),
            paired_instances: ds.paired_instance_count(),
            groups: ds.groups.len(),
            orphans: ds.orphans.len(),
            excluded: outcome.removed.len(),
            unknown_exclusions: outcome.unknown,
            orphaned_by_exclusion: outcome.newly_orphaned,
        });
    }
    write_summary(&rd.stage("pairs", "summary.json"), meta, &counts)?;
    Ok(counts)
}

/// Dataset with its twin groups, as written by `pairs`.
pub fn load_paired(rd: &RunDir, name: &str) -> Result<Dataset> {
    let data = rd.paired(name);
    let manifest = rd.pairing_manifest(name);
    require(&manifest, &format!("pairs manifest for {name}"), "pairs")?;
    require(&data, &format!("paired dataset {name}"), "pairs")?;
    let (_, ds) = read_normalized(name, &read_to_string(&data)?)?;
    let (_, manifest) = read_pairing_manifest(&read_to_string(&manifest)?)?;
    manifest.apply(ds)
}

/// Builds each configured transform and writes one record per source
/// instance plus a counts summary.
pub fn cmd_transform(cfg: &RunConfig, execution: Execution) -> Result<Vec<ModeCounts>> {
    let rd = RunDir::new(cfg.run_dir());
    let meta = cfg.meta("transform");
    let mut counts = Vec::new();
    for d in &cfg.datasets {
        let ds = load_paired(&rd, &d.name)?;
        for &mode in &cfg.modes {
            let (records, c) = match mode {
                Mode::ZeroShot => {
                    let out = run_zero_shot(&ds, execution);
                    (out.records(&ds), out.counts(&d.name))
                }
                _ => {
                    let out = run_ablation(&ds, mode, execution);
                    (out.records(), out.counts(&d.name))
                }
            };
            write_string(&rd.transformed(&d.name, mode), &to_jsonl(Some(&meta), &records)?)?;
            info!("{} {mode}: {} produced, {} skipped", d.name, c.produced, c.skipped);
            counts.push(c);
        }
    }
    write_summary(&rd.stage("transform", "counts.json"), meta, &counts)?;
    Ok(counts)
}

fn load_transform(rd: &RunDir, name: &str, mode: Mode) -> Result<HashMap<String, TransformRecord>> {
    let path = rd.transformed(name, mode);
    require(&path, &format!("{mode} transform output for {name}"), "transform")?;
    let (_, records) = from_jsonl::<TransformRecord>(&read_to_string(&path)?)?;
    Ok(records.into_iter().map(|r| (r.source_id.clone(), r)).collect())
}

enum Requests {
    Choice(Vec<ChoiceScoreRequest>),
    Mask(Vec<MaskScoreRequest>, Vec<crate::transforms::ZeroShotQuery>),
}

fn endpoint(cfg: &RunConfig) -> Result<String> {
    cfg.scorer
        .endpoint
        .clone()
        .or_else(|| std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.is_empty()))
        .ok_or_else(|| {
            Error::Config(format!(
                "http scorer needs an endpoint (scorer.endpoint, --endpoint or {ENDPOINT_ENV})"
            ))
        })
}

fn obtain<R: ScoreRequest>(
    cfg: &RunConfig,
    rd: &RunDir,
    name: &str,
    setup: Setup,
    requests: &[R],
) -> Result<Vec<R::Response>> {
    let meta = cfg.meta("requests");
    let req_path = rd.requests(name, setup);
    write_string(&req_path, &write_request_batch(requests, Some(&meta))?)?;
    let responses = match cfg.scorer.mode {
        ScorerMode::File => {
            let dir = cfg.scorer.responses.as_ref().ok_or_else(|| {
                Error::Config("file scorer needs scorer.responses (a directory of response files)".into())
            })?;
            let path = cfg.resolve(dir).join(format!("{name}.{setup}.responses.jsonl"));
            if !path.is_file() {
                return Err(Error::Stage(format!(
                    "responses for {name} {setup} not found ({}); score {} and place the responses there",
                    path.display(),
                    req_path.display()
                )));
            }
            read_response_batch(requests, &read_to_string(&path)?)
                .map_err(|e| Error::Document(format!("{}: {e}", path.display())))?
        }
        ScorerMode::Http => {
            let scorer = HttpScorer::new(&endpoint(cfg)?, cfg.scorer.max_in_flight)?;
            let responses = scorer.score(requests)?;
            if cfg.scorer.verify_determinism > 0 {
                scorer.verify_determinism(requests, &responses, cfg.scorer.verify_determinism)?;
            }
            responses
        }
    };
    write_string(
        &rd.responses(name, setup),
        &write_response_batch(&responses, Some(&meta.with_kind("responses")))?,
    )?;
    Ok(responses)
}

fn model_of<T: ScoreResponse>(responses: &[T]) -> Option<String> {
    responses.first().map(|r| r.model_id().to_string())
}

fn evaluate(cfg: &RunConfig, rd: &RunDir, ds: &Dataset, setup: Setup) -> Result<EvaluationReport> {
    let mut outcomes: HashMap<String, Outcome> = HashMap::new();
    let members = ds.groups.iter().flat_map(|g| g.members.iter());
    let requests = match setup {
        Setup::Original => Requests::Choice(
            members
                .map(|inst| {
                    let (start, len) = inst.target_span.to_chars(&inst.sentence);
                    ChoiceScoreRequest {
                        id: inst.id.clone(),
                        context: inst.sentence.clone(),
                        target_span_start: start,
                        target_span_len: len,
                        options: inst.candidates.clone(),
                    }
                })
                .collect(),
        ),
        Setup::NoCands | Setup::PartSent => {
            let mode = if setup == Setup::NoCands {
                Mode::NoCands
            } else {
                Mode::PartSent
            };
            let records = load_transform(rd, &ds.name, mode)?;
            let mut reqs = Vec::new();
            for inst in members {
                let rec = records.get(&inst.id).ok_or_else(|| {
                    Error::Stage(format!(
                        "{mode} output for {} has no record for {}; rerun `transform`",
                        ds.name, inst.id
                    ))
                })?;
                match &rec.rejection_reason {
                    Some(reason) => {
                        outcomes.insert(inst.id.clone(), Outcome::Discarded { reason: reason.clone() });
                    }
                    None => {
                        let t = rec.to_transformed()?;
                        let (start, len) = t.target_span.to_chars(&t.text);
                        reqs.push(ChoiceScoreRequest {
                            id: inst.id.clone(),
                            context: t.text,
                            target_span_start: start,
                            target_span_len: len,
                            options: inst.candidates.clone(),
                        });
                    }
                }
            }
            Requests::Choice(reqs)
        }
        Setup::ZeroShot => {
            let records = load_transform(rd, &ds.name, Mode::ZeroShot)?;
            let mut reqs = Vec::new();
            let mut queries = Vec::new();
            for inst in members {
                let rec = records.get(&inst.id).ok_or_else(|| {
                    Error::Stage(format!(
                        "zero-shot output for {} has no record for {}; rerun `transform`",
                        ds.name, inst.id
                    ))
                })?;
                match &rec.rejection_reason {
                    Some(reason) => {
                        outcomes.insert(inst.id.clone(), Outcome::Discarded { reason: reason.clone() });
                    }
                    None => {
                        let q = rec.to_query()?;
                        reqs.push(MaskScoreRequest::from_query(&q));
                        queries.push(q);
                    }
                }
            }
            Requests::Mask(reqs, queries)
        }
    };

    let model_id = match requests {
        Requests::Choice(reqs) => {
            let responses = obtain(cfg, rd, &ds.name, setup, &reqs)?;
            for resp in &responses {
                let inst = ds.instance(&resp.id).expect("request ids come from the dataset");
                let prediction = mc_decide(inst, &resp.option_scores())?;
                outcomes.insert(
                    resp.id.clone(),
                    Outcome::Scored {
                        prediction,
                        gold: inst.label,
                    },
                );
            }
            model_of(&responses)
        }
        Requests::Mask(reqs, queries) => {
            let responses = obtain(cfg, rd, &ds.name, setup, &reqs)?;
            for (q, resp) in queries.iter().zip(&responses) {
                outcomes.insert(q.source_id.clone(), zero_shot_decide(q, resp.log_scores()));
            }
            model_of(&responses)
        }
    };

    let mut report = build_report(ds, setup, &outcomes, &Accuracy)?;
    report.meta = Some(cfg.meta("report"));
    report.model_id = model_id;
    Ok(report)
}

/// Sends each configured setup to the scorer and writes one report per
/// dataset and setup.
pub fn cmd_eval(cfg: &RunConfig) -> Result<Vec<EvaluationReport>> {
    let rd = RunDir::new(cfg.run_dir());
    let mut reports = Vec::new();
    for d in &cfg.datasets {
        let ds = load_paired(&rd, &d.name)?;
        for &setup in &cfg.setups {
            let report = evaluate(cfg, &rd, &ds, setup)?;
            write_string(&rd.report(&d.name, setup), &to_json_doc(&report)?)?;
            info!(
                "{} {setup}: single {:.4} group {:.4} ({} of {} scored)",
                d.name, report.single_score, report.group_score, report.n_scored, report.n_instances
            );
            reports.push(report);
        }
    }
    Ok(reports)
}

/// Collects the evaluation reports into a table, plus a comparison with the
/// bundled reference scores when `compare` is set. Returns the rendered text.
pub fn cmd_report(cfg: &RunConfig, compare: bool, model: Option<&str>) -> Result<String> {
    let rd = RunDir::new(cfg.run_dir());
    let mut reports = Vec::new();
    for d in &cfg.datasets {
        for &setup in &cfg.setups {
            let path = rd.report(&d.name, setup);
            if path.is_file() {
                reports.push(serde_json::from_str::<EvaluationReport>(&read_to_string(&path)?)?);
            }
        }
    }
    if reports.is_empty() {
        return Err(Error::Stage(format!(
            "no evaluation reports found under {}; run `eval` first",
            rd.root().join("eval").display()
        )));
    }
    let meta = cfg.meta("report");
    let mut text = render_table(&reports);
    text.push_str(&footer(&meta));
    write_string(&rd.stage("report", "results.txt"), &text)?;
    write_string(&rd.stage("report", "results.jsonl"), &to_jsonl(Some(&meta), &reports)?)?;
    if compare {
        let mut cmp = render_comparison(&reports, &Reference::bundled()?, model);
        cmp.push_str(&footer(&meta));
        write_string(&rd.stage("report", "comparison.txt"), &cmp)?;
        text.push('\n');
        text.push_str(&cmp);
    }
    Ok(text)
}

/// Writes one nested split manifest per replicate for the configured
/// training dataset.
pub fn cmd_splits(cfg: &RunConfig) -> Result<Vec<SplitManifest>> {
    let sc = cfg
        .splits
        .as_ref()
        .ok_or_else(|| Error::Config("no [splits] section in the config".into()))?;
    let rd = RunDir::new(cfg.run_dir());
    let ds = load_ingested(&rd, &sc.dataset)?;
    let meta = cfg.meta("split-manifest");
    let mut manifests = make_splits(&ds, &sc.sizes, sc.n_seeds, sc.holdout, cfg.seed)?;
    for m in &mut manifests {
        m.meta = Some(meta.clone());
        m.validate()?;
        write_string(&rd.split(&sc.dataset, m.replicate), &to_json_doc(m)?)?;
    }
    Ok(manifests)
}

/// Aggregates per-run scores (one [`RunRecord`] per line) into the
/// learning-curve table and data file. Returns the table and any warnings.
pub fn cmd_aggregate(cfg: &RunConfig, runs_path: &Path) -> Result<(String, Vec<String>)> {
    let rd = RunDir::new(cfg.run_dir());
    let (_, runs) = from_jsonl::<RunRecord>(&read_to_string(runs_path)?)?;
    if runs.is_empty() {
        return Err(Error::Empty);
    }
    let expected = cfg.splits.as_ref().map_or(3, |s| s.n_seeds);
    let (points, warnings) = aggregate_runs(&runs, expected);
    let meta = cfg.meta("learning-curve");
    let mut table = render_curve_table(&points);
    for w in &warnings {
        table.push_str(&format!("warning: {w}\n"));
    }
    table.push_str(&footer(&meta));
    write_string(&rd.stage("splits", "curve.txt"), &table)?;
    write_string(
        &rd.stage("splits", "curve.tsv"),
        &format!("{}{}", footer(&meta), render_curve_tsv(&points)),
    )?;
    Ok((table, warnings))
}
