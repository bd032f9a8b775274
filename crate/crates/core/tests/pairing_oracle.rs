//! `detect_special_spans` against a brute-force search over all prefix and
//! suffix alignments scored by a dynamic-programming LCS.

use proptest::prelude::*;
use winocheck::corpus::{detect_special_spans, pair_twins, Dataset, Source, TargetKind, WinogradInstance};
use winocheck::text::Span;

fn tokens(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    for w in s.split_whitespace() {
        let stem = w.trim_end_matches(['.', ',', ';', '?', '!']);
        if !stem.is_empty() {
            out.push(stem.to_string());
        }
        out.extend(w[stem.len()..].chars().map(String::from));
    }
    out
}

fn lcs(a: &[String], b: &[String]) -> usize {
    let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            dp[i][j] = if a[i - 1] == b[j - 1] {
                dp[i - 1][j - 1] + 1
            } else {
                dp[i - 1][j].max(dp[i][j - 1])
            };
        }
    }
    dp[a.len()][b.len()]
}

/// Some `(X, Y)` with `a = P X S`, `b = P Y S`, both middles non-empty and
/// `|P| + |S|` equal to the LCS, i.e. one substitution explains every
/// difference.
fn oracle(a: &str, b: &str) -> Option<(Vec<String>, Vec<String>)> {
    let (ta, tb) = (tokens(a), tokens(b));
    let best = lcs(&ta, &tb);
    let m = ta.len().min(tb.len());
    for p in 0..=m {
        for s in 0..=m - p {
            if p + s != best || ta[..p] != tb[..p] || ta[ta.len() - s..] != tb[tb.len() - s..] {
                continue;
            }
            let x = ta[p..ta.len() - s].to_vec();
            let y = tb[p..tb.len() - s].to_vec();
            if !x.is_empty() && !y.is_empty() {
                return Some((x, y));
            }
        }
    }
    None
}

fn inst(id: &str, sentence: &str) -> WinogradInstance {
    WinogradInstance {
        id: id.into(),
        sentence: sentence.into(),
        candidates: ["alpha".into(), "beta".into()],
        target_span: Span::new(0, 0),
        target_kind: TargetKind::Pronoun,
        label: 0,
        source: Source::Wsc,
        group_hint: None,
    }
}

fn implementation(a: &str, b: &str) -> Option<(Vec<String>, Vec<String>)> {
    let (sa, sb) = detect_special_spans(&inst("a", a), &inst("b", b))?;
    Some((tokens(sa.slice(a).unwrap()), tokens(sb.slice(b).unwrap())))
}

#[test]
fn worked_examples() {
    assert_eq!(oracle("red cat sat", "blue cat ran"), None);
    assert_eq!(implementation("red cat sat", "blue cat ran"), None);
    let expect = Some((vec!["large".to_string()], vec!["small".to_string()]));
    let (a, b) = ("it is too large.", "it is too small.");
    assert_eq!(oracle(a, b), expect);
    assert_eq!(implementation(a, b), expect);
    assert_eq!(oracle("a b", "a b c"), None);
    assert_eq!(implementation("a b", "a b c"), None);
}

const VOCAB: &[&str] = &["a", "b", "c", "d", "e", "b.", "c,"];

fn sentence(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(VOCAB), 1..max).prop_map(|w| w.join(" "))
}

/// A base sentence and a variant with one contiguous region rewritten,
/// which is a twin most of the time.
fn near_twins() -> impl Strategy<Value = (String, String)> {
    (
        prop::collection::vec(prop::sample::select(VOCAB), 1..9),
        any::<prop::sample::Index>(),
        0usize..3,
        prop::collection::vec(prop::sample::select(VOCAB), 0..3),
    )
        .prop_map(|(base, at, cut, insert)| {
            let start = at.index(base.len() + 1);
            let end = (start + cut).min(base.len());
            let mut other = base[..start].to_vec();
            other.extend(insert);
            other.extend_from_slice(&base[end..]);
            let other = if other.is_empty() { vec!["e"] } else { other };
            (base.join(" "), other.join(" "))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn agrees_with_oracle_on_near_twins((a, b) in near_twins()) {
        prop_assert_eq!(implementation(&a, &b), oracle(&a, &b));
    }

    #[test]
    fn agrees_with_oracle_on_random_pairs(a in sentence(7), b in sentence(7)) {
        prop_assert_eq!(implementation(&a, &b), oracle(&a, &b));
    }

    #[test]
    fn swap_symmetry((a, b) in near_twins()) {
        let (x, y) = (inst("x", &a), inst("y", &b));
        let forward = detect_special_spans(&x, &y);
        let backward = detect_special_spans(&y, &x);
        prop_assert_eq!(forward, backward.map(|(p, q)| (q, p)));
    }
}

fn pair_sets(ds: &Dataset) -> Vec<[String; 2]> {
    let mut out: Vec<[String; 2]> = ds
        .groups
        .iter()
        .map(|g| {
            let mut ids = [g.members[0].id.clone(), g.members[1].id.clone()];
            ids.sort();
            ids
        })
        .collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn pairing_is_order_independent(
        sentences in prop::collection::vec(sentence(5), 2..10),
        perm_seed in any::<u64>(),
    ) {
        let instances: Vec<WinogradInstance> = sentences
            .iter()
            .enumerate()
            .map(|(i, s)| inst(&format!("wsc-{i}"), s))
            .collect();
        let mut shuffled = instances.clone();
        let mut state = perm_seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let a = pair_twins(Dataset::new("t", instances));
        let b = pair_twins(Dataset::new("t", shuffled));
        prop_assert_eq!(pair_sets(&a), pair_sets(&b));
        prop_assert!(a.groups.iter().all(|g| g.members.len() == 2));
        a.check_partition().unwrap();
    }
}
