use roxmltree::{Document, Node, ParsingOptions};

use super::{normalize_candidate, Dataset, Source, TargetKind, WinogradInstance};
use crate::error::{Error, Result};
use crate::text::{normalize_whitespace, Span};

/// Parses the community WSC collection XML (`<collection><schema>...`).
///
/// Instance ids are `wsc-<n>` with `n` the zero-based record index.
pub fn parse_wsc(name: &str, raw: &str) -> Result<Dataset> {
    let opts = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    let doc = Document::parse_with_options(raw, opts).map_err(|e| Error::Document(e.to_string()))?;
    let schemas: Vec<Node> = doc.descendants().filter(|n| n.has_tag_name("schema")).collect();
    if schemas.is_empty() {
        return Err(Error::Empty);
    }
    let instances = schemas
        .iter()
        .enumerate()
        .map(|(index, node)| parse_schema(index, *node))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(name, instances))
}

fn parse_schema(index: usize, schema: Node) -> Result<WinogradInstance> {
    let err = |message: String| Error::Record { index, message };
    let text = child(schema, "text").ok_or_else(|| err("missing <text>".into()))?;
    let before = child(text, "txt1").map(node_text).unwrap_or_default();
    let pronoun = child(text, "pron")
        .map(node_text)
        .filter(|p| !p.is_empty())
        .ok_or_else(|| err("missing <pron>".into()))?;
    let after = child(text, "txt2").map(node_text).unwrap_or_default();

    let answers: Vec<String> = child(schema, "answers")
        .map(|a| {
            a.children()
                .filter(|n| n.has_tag_name("answer"))
                .map(|n| normalize_candidate(&node_text(n)))
                .collect()
        })
        .unwrap_or_default();
    let [first, second]: [String; 2] = answers
        .try_into()
        .map_err(|a: Vec<String>| err(format!("expected 2 answers, found {}", a.len())))?;

    let correct = child(schema, "correctAnswer")
        .map(node_text)
        .ok_or_else(|| err("missing <correctAnswer>".into()))?;
    let label = match correct.trim().trim_end_matches('.').trim() {
        "A" | "a" => 0,
        "B" | "b" => 1,
        other => return Err(err(format!("unrecognized correct answer {other:?}"))),
    };

    let (sentence, target_span) = assemble(&before, &pronoun, &after);
    let instance = WinogradInstance {
        id: format!("wsc-{index}"),
        sentence,
        candidates: [first, second],
        target_span,
        target_kind: TargetKind::Pronoun,
        label,
        source: Source::Wsc,
        group_hint: None,
    };
    instance.validate().map_err(|e| err(e.to_string()))?;
    Ok(instance)
}

/// Joins the text around the pronoun, attaching leading punctuation and
/// clitics of the trailing part without a space.
fn assemble(before: &str, pronoun: &str, after: &str) -> (String, Span) {
    let mut sentence = String::new();
    if !before.is_empty() {
        sentence.push_str(before);
        sentence.push(' ');
    }
    let span = Span::new(sentence.len(), pronoun.len());
    sentence.push_str(pronoun);
    if !after.is_empty() {
        let glued = after.starts_with(['.', ',', ';', ':', '!', '?', '\'', '\u{2019}']);
        if !glued {
            sentence.push(' ');
        }
        sentence.push_str(after);
    }
    (sentence, span)
}

fn child<'a, 'i>(node: Node<'a, 'i>, tag: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|n| n.has_tag_name(tag))
}

fn node_text(node: Node) -> String {
    let raw: String = node
        .descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect();
    normalize_whitespace(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TROPHY: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<collection>
<schema>
<text>
<txt1>The trophy doesn't fit into the brown suitcase because</txt1>
<pron>it</pron>
<txt2>is too large.</txt2>
</text>
<quote><quote1>because</quote1><pron>it</pron><quote2>is too large</quote2></quote>
<answers>
<answer>the trophy </answer>
<answer> the suitcase</answer>
</answers>
<correctAnswer>A</correctAnswer>
<source>Hector Levesque</source>
</schema>
</collection>"#;

    #[test]
    fn trophy_record() {
        let ds = parse_wsc("wsc", TROPHY).unwrap();
        assert_eq!(ds.instances.len(), 1);
        let inst = &ds.instances[0];
        assert_eq!(
            inst.sentence,
            "The trophy doesn't fit into the brown suitcase because it is too large."
        );
        assert_eq!(inst.label, 0);
        assert_eq!(inst.target_text(), "it");
        assert_eq!(inst.candidates, ["the trophy".to_string(), "the suitcase".to_string()]);
        assert_eq!(inst.target_kind, TargetKind::Pronoun);
        assert_eq!(inst.id, "wsc-0");
    }

    #[test]
    fn empty_collection() {
        assert!(matches!(
            parse_wsc("wsc", "<collection></collection>"),
            Err(Error::Empty)
        ));
    }

    #[test]
    fn malformed_record_names_index() {
        let doc = TROPHY.replace(
            "</collection>",
            "<schema><text><txt1>x</txt1></text></schema></collection>",
        );
        match parse_wsc("wsc", &doc) {
            Err(Error::Record { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn answer_letter_variants() {
        let doc = TROPHY.replace(
            "<correctAnswer>A</correctAnswer>",
            "<correctAnswer> B. </correctAnswer>",
        );
        assert_eq!(parse_wsc("wsc", &doc).unwrap().instances[0].label, 1);
    }

    #[test]
    fn punctuation_after_pronoun_is_glued() {
        let (s, span) = assemble("Bob paid for Charlie's college education, but now Charlie acts as though it never happened. He is very hurt by", "him", ".");
        assert!(s.ends_with("hurt by him."));
        assert_eq!(span.slice(&s), Some("him"));
        let (s, span) = assemble("", "He", "left.");
        assert_eq!(s, "He left.");
        assert_eq!(span, Span::new(0, 2));
    }
}
