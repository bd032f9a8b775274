//! Nested learning-curve splits and aggregation of per-run scores.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::artifact::ArtifactMeta;
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::scoring::render_rows;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub size: usize,
    pub ids: Vec<String>,
}

/// Training splits of one replicate. Each split is a prefix of the next
/// larger one and none overlaps the shared holdout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<ArtifactMeta>,
    pub dataset: String,
    pub seed: u64,
    pub replicate: usize,
    /// Seed handed to the trainer for this replicate.
    pub training_seed: u64,
    pub sizes: Vec<usize>,
    pub splits: Vec<Split>,
    pub holdout: Vec<String>,
}

impl SplitManifest {
    /// Structural checks: sizes ascending and matching, nesting, no
    /// duplicates, disjoint from the holdout.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| {
            Err(Error::Manifest(format!(
                "{} replicate {}: {m}",
                self.dataset, self.replicate
            )))
        };
        if self.sizes.len() != self.splits.len() {
            return bad(format!("{} sizes but {} splits", self.sizes.len(), self.splits.len()));
        }
        let holdout: HashSet<&str> = self.holdout.iter().map(String::as_str).collect();
        if holdout.len() != self.holdout.len() {
            return bad("duplicate id in holdout".into());
        }
        let mut prev: Option<&Split> = None;
        for (size, split) in self.sizes.iter().zip(&self.splits) {
            if *size != split.size || split.ids.len() != split.size {
                return bad(format!("split for size {size} holds {} ids", split.ids.len()));
            }
            let ids: HashSet<&str> = split.ids.iter().map(String::as_str).collect();
            if ids.len() != split.ids.len() {
                return bad(format!("duplicate id in split {size}"));
            }
            if let Some(id) = split.ids.iter().find(|id| holdout.contains(id.as_str())) {
                return bad(format!("split {size} contains holdout id {id}"));
            }
            if let Some(p) = prev {
                if p.size > split.size {
                    return bad("sizes are not ascending".into());
                }
                if let Some(id) = p.ids.iter().find(|id| !ids.contains(id.as_str())) {
                    return bad(format!(
                        "split {} is not contained in split {size}: {id} missing",
                        p.size
                    ));
                }
            }
            prev = Some(split);
        }
        Ok(())
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config(format!("split sizes must be ascending, got {sizes:?}")));
    }
    Ok(())
}

/// Draws a holdout once from `seed`, then for each replicate shuffles the
/// remaining pool and takes nested prefixes of the requested sizes.
pub fn make_splits(
    dataset: &Dataset,
    sizes: &[usize],
    n_seeds: usize,
    holdout: usize,
    seed: u64,
) -> Result<Vec<SplitManifest>> {
    check_sizes(sizes)?;
    let train = dataset.instances.len();
    let available = train.saturating_sub(holdout);
    let largest = sizes.last().copied().unwrap_or(0);
    if holdout > train || largest > available {
        return Err(Error::SplitTooLarge {
            requested: largest.max(holdout),
            available,
            train,
            holdout,
        });
    }

    let mut ids: Vec<String> = dataset.instances.iter().map(|i| i.id.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let pool = ids.split_off(holdout);
    let mut holdout_ids = ids;
    holdout_ids.sort();

    Ok((0..n_seeds)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            let mut order = pool.clone();
            order.shuffle(&mut rng);
            SplitManifest {
                meta: None,
                dataset: dataset.name.clone(),
                seed,
                replicate: k,
                training_seed: seed.wrapping_add(k as u64),
                sizes: sizes.to_vec(),
                splits: sizes
                    .iter()
                    .map(|&n| Split {
                        size: n,
                        ids: order[..n].to_vec(),
                    })
                    .collect(),
                holdout: holdout_ids.clone(),
            }
        })
        .collect())
}

pub fn read_split_manifest(raw: &str) -> Result<SplitManifest> {
    let m: SplitManifest = serde_json::from_str(raw)?;
    m.validate()?;
    Ok(m)
}

/// Final scores of one trained model on one split, as fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: String,
    pub size: usize,
    pub seed: u64,
    pub single: f64,
    pub group: f64,
}

/// Mean and sample standard deviation over replicates, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub model: String,
    pub size: usize,
    pub n: usize,
    pub single_mean: f64,
    pub single_std: f64,
    pub group_mean: f64,
    pub group_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups runs by model and size. A cell with fewer than `expected_seeds`
/// runs is still aggregated; the returned warnings name it.
pub fn aggregate_runs(runs: &[RunRecord], expected_seeds: usize) -> (Vec<CurvePoint>, Vec<String>) {
    let mut cells: BTreeMap<(&str, usize), BTreeMap<u64, &RunRecord>> = BTreeMap::new();
    let mut warnings = Vec::new();
    for r in runs {
        let cell = cells.entry((r.model.as_str(), r.size)).or_default();
        if cell.insert(r.seed, r).is_some() {
            warnings.push(format!(
                "{} size {}: seed {} reported twice, keeping the last",
                r.model, r.size, r.seed
            ));
        }
    }
    let points = cells
        .into_iter()
        .map(|((model, size), by_seed)| {
            let n = by_seed.len();
            if n < expected_seeds {
                warnings.push(format!(
                    "{model} size {size}: {n} of {expected_seeds} seed runs present, averaging over {n}"
                ));
            }
            let single: Vec<f64> = by_seed.values().map(|r| r.single * 100.0).collect();
            let group: Vec<f64> = by_seed.values().map(|r| r.group * 100.0).collect();
            let (single_mean, single_std) = mean_std(&single);
            let (group_mean, group_std) = mean_std(&group);
            CurvePoint {
                model: model.to_string(),
                size,
                n,
                single_mean,
                single_std,
                group_mean,
                group_std,
            }
        })
        .collect();
    for w in &warnings {
        log::warn!("{w}");
    }
    (points, warnings)
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Rows per training size, `Single` and `Group` columns per model, each cell
/// `mean (std)`.
pub fn render_curve_table(points: &[CurvePoint]) -> String {
    let models: BTreeSet<&str> = points.iter().map(|p| p.model.as_str()).collect();
    let sizes: BTreeSet<usize> = points.iter().map(|p| p.size).collect();
    let lookup: BTreeMap<(&str, usize), &CurvePoint> = points.iter().map(|p| ((p.model.as_str(), p.size), p)).collect();

    let mut header = vec!["# Training".to_string()];
    for m in &models {
        header.push(format!("{m} Single"));
        header.push(format!("{m} Group"));
    }
    let rows: Vec<Vec<String>> = sizes
        .iter()
        .map(|&s| {
            let mut row = vec![thousands(s)];
            for m in &models {
                match lookup.get(&(*m, s)) {
                    Some(p) => {
                        row.push(format!("{:.2} ({:.2})", p.single_mean, p.single_std));
                        row.push(format!("{:.2} ({:.2})", p.group_mean, p.group_std));
                    }
                    None => row.extend(["-".to_string(), "-".to_string()]),
                }
            }
            row
        })
        .collect();
    render_rows(&header, &rows, 0)
}

/// Tab-separated data file: one line per (model, size).
pub fn render_curve_tsv(points: &[CurvePoint]) -> String {
    let mut out = String::from("model\tsize\tn\tsingle_mean\tsingle_std\tgroup_mean\tgroup_std\n");
    for p in points {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            p.model, p.size, p.n, p.single_mean, p.single_std, p.group_mean, p.group_std
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Source, TargetKind, WinogradInstance};
    use crate::text::Span;

    pub(crate) fn dataset(n: usize) -> Dataset {
        let instances = (0..n)
            .map(|i| WinogradInstance {
                id: format!("t{i:05}"),
                sentence: "_ ran.".into(),
                candidates: ["a".into(), "b".into()],
                target_span: Span::new(0, 1),
                target_kind: TargetKind::Placeholder,
                label: i % 2,
                source: Source::Winogrande,
                group_hint: None,
            })
            .collect();
        Dataset::new("train", instances)
    }

    #[test]
    fn small_example() {
        let ds = dataset(1000);
        let ms = make_splits(&ds, &[0, 100], 1, 200, 5).unwrap();
        let m = &ms[0];
        m.validate().unwrap();
        assert!(m.splits[0].ids.is_empty());
        assert_eq!(m.splits[1].ids.len(), 100);
        assert_eq!(m.holdout.len(), 200);
    }

    #[test]
    fn too_large_reports_bound() {
        let ds = dataset(1000);
        match make_splits(&ds, &[0, 900], 1, 200, 5) {
            Err(Error::SplitTooLarge { available, .. }) => assert_eq!(available, 800),
            other => panic!("unexpected {other:?}"),
        }
        assert!(make_splits(&ds, &[100, 0], 1, 200, 5).is_err());
    }

    #[test]
    fn deterministic_and_replicates_differ() {
        let ds = dataset(500);
        let a = make_splits(&ds, &[10, 50], 3, 100, 9).unwrap();
        let b = make_splits(&ds, &[10, 50], 3, 100, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].splits[1].ids, a[1].splits[1].ids);
        assert_eq!(a[0].holdout, a[2].holdout);
    }

    #[test]
    fn validate_catches_broken_nesting() {
        let ds = dataset(300);
        let mut m = make_splits(&ds, &[10, 20], 1, 50, 1).unwrap().remove(0);
        m.splits[1].ids[0] = "other".into();
        assert!(m.validate().is_err());
        let mut m = make_splits(&ds, &[10, 20], 1, 50, 1).unwrap().remove(0);
        m.splits[0].ids[0] = m.holdout[0].clone();
        assert!(m.validate().is_err());
    }

    fn run(seed: u64, single: f64, group: f64) -> RunRecord {
        RunRecord {
            model: "m".into(),
            size: 1000,
            seed,
            single,
            group,
        }
    }

    #[test]
    fn identical_runs_have_zero_std() {
        let (p, w) = aggregate_runs(&[run(0, 0.6, 0.4), run(1, 0.6, 0.4), run(2, 0.6, 0.4)], 3);
        assert!(w.is_empty());
        assert_eq!(p[0].single_std, 0.0);
        assert!((p[0].single_mean - 60.0).abs() < 1e-9);
    }

    #[test]
    fn missing_seed_warns() {
        let (p, w) = aggregate_runs(&[run(0, 0.6, 0.4), run(1, 0.5, 0.3)], 3);
        assert_eq!(p[0].n, 2);
        assert_eq!(w.len(), 1);
        assert!((p[0].single_mean - 55.0).abs() < 1e-9);
        assert!((p[0].single_std - 50f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn table_layout() {
        let (p, _) = aggregate_runs(&[run(0, 0.625, 0.4289)], 1);
        let t = render_curve_table(&p);
        assert!(t.contains("1,000"), "{t}");
        assert!(t.contains("62.50 (0.00)"), "{t}");
        assert!(t.contains("42.89 (0.00)"), "{t}");
        assert!(render_curve_tsv(&p)
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("m\t1000\t1\t62.5000"));
    }
}
