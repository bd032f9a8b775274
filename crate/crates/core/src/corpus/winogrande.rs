use serde::Deserialize;

use super::{normalize_candidate, Dataset, Source, TargetKind, WinogradInstance};
use crate::error::{Error, Result};
use crate::text::Span;

#[derive(Deserialize)]
struct RawRecord {
    #[serde(rename = "qID")]
    qid: Option<String>,
    sentence: Option<String>,
    option1: Option<String>,
    option2: Option<String>,
    answer: Option<String>,
}

/// Parses a Winogrande JSON-lines file. Blank lines are skipped; line numbers
/// in errors are one-based.
pub fn parse_winogrande(name: &str, raw: &str) -> Result<Dataset> {
    let mut instances = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        instances.push(parse_line(idx + 1, line)?);
    }
    if instances.is_empty() {
        return Err(Error::Empty);
    }
    Ok(Dataset::new(name, instances))
}

fn parse_line(line: usize, raw: &str) -> Result<WinogradInstance> {
    let err = |message: String| Error::Line { line, message };
    let rec: RawRecord = serde_json::from_str(raw).map_err(|e| err(e.to_string()))?;
    let missing = |field: &str| err(format!("missing field `{field}`"));

    let sentence = rec.sentence.ok_or_else(|| missing("sentence"))?;
    let option1 = rec.option1.ok_or_else(|| missing("option1"))?;
    let option2 = rec.option2.ok_or_else(|| missing("option2"))?;
    let answer = rec.answer.ok_or_else(|| missing("answer"))?;

    let blanks: Vec<usize> = sentence.match_indices('_').map(|(i, _)| i).collect();
    let target_span = match blanks.as_slice() {
        [at] => Span::new(*at, 1),
        _ => {
            return Err(err(format!(
                "expected exactly one `_` placeholder, found {}",
                blanks.len()
            )))
        }
    };
    let label = match answer.trim() {
        "1" => 0,
        "2" => 1,
        other => return Err(err(format!("answer must be \"1\" or \"2\", got {other:?}"))),
    };

    let instance = WinogradInstance {
        id: rec.qid.unwrap_or_else(|| format!("winogrande-{line}")),
        sentence,
        candidates: [normalize_candidate(&option1), normalize_candidate(&option2)],
        target_span,
        target_kind: TargetKind::Placeholder,
        label,
        source: Source::Winogrande,
        group_hint: None,
    };
    instance.validate().map_err(|e| err(e.to_string()))?;
    Ok(instance)
}

#[cfg(test)]
mod tests {
    use super::*;

    const STEEL: &str = r#"{"sentence":"I bought a steel property at the same time as my wooden property. The _ property was harder.","option1":"steel","option2":"wooden","answer":"1"}"#;

    #[test]
    fn steel_record() {
        let ds = parse_winogrande("wg", STEEL).unwrap();
        let inst = &ds.instances[0];
        assert_eq!(inst.label, 0);
        assert_eq!(inst.target_text(), "_");
        assert_eq!(inst.target_kind, TargetKind::Placeholder);
        assert_eq!(inst.id, "winogrande-1");
    }

    #[test]
    fn two_placeholders_is_a_line_error() {
        let raw = format!("{STEEL}\n{}", STEEL.replace("The _ property", "The _ _ property"));
        match parse_winogrande("wg", &raw) {
            Err(Error::Line { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_answer() {
        let raw = r#"{"qID":"x-1","sentence":"A _ b.","option1":"a","option2":"b"}"#;
        let e = parse_winogrande("wg", raw).unwrap_err();
        assert!(e.to_string().contains("answer"), "{e}");
    }

    #[test]
    fn qid_used_as_id() {
        let raw = STEEL.replace("{\"sentence\"", "{\"qID\":\"3QX-1\",\"sentence\"");
        assert_eq!(parse_winogrande("wg", &raw).unwrap().instances[0].id, "3QX-1");
    }
}
