use std::collections::BTreeMap;

use super::{Dataset, TwinGroup, WinogradInstance};
use crate::exec::{self, Execution};
use crate::text::{diff_tokens, Span, Token};

/// Locates the special-word span of each sentence in a candidate twin pair.
///
/// Tokens are compared after trimming the longest common prefix and suffix.
/// The pair qualifies only when both remaining middles are non-empty and share
/// no token, i.e. the sentences differ in exactly one contiguous substitution.
pub fn detect_special_spans(a: &WinogradInstance, b: &WinogradInstance) -> Option<(Span, Span)> {
    if a.candidate_key() != b.candidate_key() {
        return None;
    }
    let ta = diff_tokens(&a.sentence);
    let tb = diff_tokens(&b.sentence);
    let (ma, mb) = differing_middles(&ta, &tb)?;
    Some((cover(ma), cover(mb)))
}

/// Token-level core of [`detect_special_spans`].
fn differing_middles<'t, 'a>(ta: &'t [Token<'a>], tb: &'t [Token<'a>]) -> Option<(&'t [Token<'a>], &'t [Token<'a>])> {
    let prefix = ta.iter().zip(tb).take_while(|(x, y)| x.text == y.text).count();
    let max_suffix = ta.len().min(tb.len()) - prefix;
    let suffix = ta
        .iter()
        .rev()
        .zip(tb.iter().rev())
        .take(max_suffix)
        .take_while(|(x, y)| x.text == y.text)
        .count();
    let ma = &ta[prefix..ta.len() - suffix];
    let mb = &tb[prefix..tb.len() - suffix];
    if ma.is_empty() || mb.is_empty() {
        return None;
    }
    // A shared token inside the middles means a longer common subsequence
    // exists, so the difference splits into more than one region.
    if ma.iter().any(|x| mb.iter().any(|y| x.text == y.text)) {
        return None;
    }
    Some((ma, mb))
}

fn cover(tokens: &[Token]) -> Span {
    let first = tokens.first().expect("non-empty middle");
    let last = tokens.last().expect("non-empty middle");
    Span::from_bounds(first.span.start, last.span.end())
}

pub fn pair_twins(dataset: Dataset) -> Dataset {
    pair_twins_with(dataset, Execution::default())
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    cost: usize,
    adjacent: bool,
    i: usize,
    j: usize,
    spans: (Span, Span),
}

impl Edge {
    /// Sort key independent of input order: cost, then adjacency, then the
    /// id pair.
    fn key<'a>(&self, instances: &'a [WinogradInstance]) -> (usize, bool, &'a str, &'a str) {
        let (a, b) = (instances[self.i].id.as_str(), instances[self.j].id.as_str());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        (self.cost, !self.adjacent, lo, hi)
    }
}

/// Ids like `wsc-12` and `wsc-13`: same stem, consecutive numeric suffix.
fn ids_adjacent(a: &str, b: &str) -> bool {
    fn split(id: &str) -> Option<(&str, u64)> {
        let stem = id.trim_end_matches(|c: char| c.is_ascii_digit());
        id[stem.len()..].parse().ok().map(|n| (stem, n))
    }
    match (split(a), split(b)) {
        (Some((sa, na)), Some((sb, nb))) => sa == sb && na.abs_diff(nb) == 1,
        _ => false,
    }
}

/// Pairs instances into twin groups of exactly two members.
///
/// Candidate edges come from [`detect_special_spans`] within buckets of equal
/// candidate pairs. Edges are taken greedily by total differing-token count,
/// then id adjacency, then id order; a member already used is never reused,
/// which reduces triplets to their most minimal pair. The chosen pairs do not
/// depend on the order of the input.
pub fn pair_twins_with(mut dataset: Dataset, execution: Execution) -> Dataset {
    let mut buckets: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (idx, inst) in dataset.instances.iter().enumerate() {
        buckets.entry(inst.candidate_key()).or_default().push(idx);
    }
    let buckets: Vec<Vec<usize>> = buckets.into_values().filter(|b| b.len() > 1).collect();

    let instances = &dataset.instances;
    let per_bucket = exec::map(execution, &buckets, |members| bucket_edges(instances, members));
    let mut edges: Vec<Edge> = per_bucket.into_iter().flatten().collect();
    edges.sort_by(|x, y| x.key(instances).cmp(&y.key(instances)));

    let mut used = vec![false; instances.len()];
    let mut pairs = Vec::new();
    for edge in edges {
        if used[edge.i] || used[edge.j] {
            continue;
        }
        used[edge.i] = true;
        used[edge.j] = true;
        pairs.push(edge);
    }
    pairs.sort_by_key(|e| e.i);

    dataset.groups = pairs
        .iter()
        .enumerate()
        .map(|(n, e)| TwinGroup {
            group_id: format!("g{n:04}"),
            members: vec![instances[e.i].clone(), instances[e.j].clone()],
            special_spans: vec![e.spans.0, e.spans.1],
        })
        .collect();
    dataset.orphans = instances
        .iter()
        .zip(&used)
        .filter(|(_, u)| !**u)
        .map(|(inst, _)| inst.id.clone())
        .collect();
    dataset
}

fn bucket_edges(instances: &[WinogradInstance], members: &[usize]) -> Vec<Edge> {
    let tokens: Vec<Vec<Token>> = members.iter().map(|&i| diff_tokens(&instances[i].sentence)).collect();
    let mut edges = Vec::new();
    for x in 0..members.len() {
        for y in x + 1..members.len() {
            if let Some((ma, mb)) = differing_middles(&tokens[x], &tokens[y]) {
                let (i, j) = (members[x], members[y]);
                edges.push(Edge {
                    cost: ma.len() + mb.len(),
                    adjacent: ids_adjacent(&instances[i].id, &instances[j].id),
                    i,
                    j,
                    spans: (cover(ma), cover(mb)),
                });
            }
        }
    }
    edges
}
