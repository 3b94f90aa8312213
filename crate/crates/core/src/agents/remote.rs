//! Reply parsing for roles served by a chat endpoint.

use serde_json::Value;

use super::mock::BackgroundDraft;
use crate::model::{GroupIndex, SubgroupId};

/// The outermost `{...}` in `reply`, parsed. Tolerates code fences and chatter
/// around the object.
pub fn extract_json(reply: &str) -> Result<Value, String> {
    let start = reply.find('{').ok_or("reply contains no JSON object")?;
    let end = reply.rfind('}').ok_or("reply contains no JSON object")?;
    if end < start {
        return Err("reply contains no JSON object".into());
    }
    let v: Value = serde_json::from_str(&reply[start..=end]).map_err(|e| e.to_string())?;
    if !v.is_object() {
        return Err("reply is not a JSON object".into());
    }
    Ok(v)
}

fn string_field(v: &Value, key: &str) -> Result<String, String> {
    match &v[key] {
        Value::String(s) => Ok(s.clone()),
        Value::Null => Err(format!("missing `{key}`")),
        other => Ok(other.to_string()),
    }
}

fn score_field(v: &Value) -> Result<f64, String> {
    match &v["score"] {
        Value::Number(n) => n.as_f64().ok_or_else(|| "score is not a number".into()),
        Value::String(s) => s.trim().parse().map_err(|_| format!("score `{s}` is not a number")),
        _ => Err("missing numeric `score`".into()),
    }
}

pub fn parse_background(reply: &str) -> Result<BackgroundDraft, String> {
    let v = extract_json(reply)?;
    let stakeholders = match &v["stakeholders"] {
        Value::Array(items) => items
            .iter()
            .filter_map(|i| i.as_str().map(str::to_string))
            .collect(),
        Value::Null => Vec::new(),
        _ => return Err("`stakeholders` must be a list".into()),
    };
    Ok(BackgroundDraft {
        event_summary: string_field(&v, "event_summary")?,
        timeline: string_field(&v, "timeline").unwrap_or_default(),
        stakeholders,
    })
}

pub fn parse_roster(reply: &str) -> Result<Vec<(String, String)>, String> {
    let v = extract_json(reply)?;
    let Value::Array(items) = &v["subgroups"] else {
        return Err("missing `subgroups` list".into());
    };
    let mut out: Vec<(String, String)> = Vec::new();
    for item in items {
        let label = string_field(item, "label")?;
        let label = label.trim().to_string();
        if label.is_empty() {
            return Err("subgroup with empty label".into());
        }
        if out.iter().any(|(l, _)| l.eq_ignore_ascii_case(&label)) {
            continue;
        }
        out.push((label, string_field(item, "description").unwrap_or_default()));
    }
    Ok(out)
}

/// A subgroup reference given as label, index or null.
pub fn resolve_group(v: &Value, roster: &[SubgroupId]) -> Result<Option<GroupIndex>, String> {
    match v {
        Value::Null => Ok(None),
        Value::Number(n) => {
            let i = n.as_u64().ok_or("subgroup index must be a non-negative integer")? as usize;
            if i < roster.len() {
                Ok(Some(i))
            } else {
                Err(format!("subgroup index {i} out of range"))
            }
        }
        Value::String(s) => {
            let s = s.trim();
            if s.is_empty() || s.eq_ignore_ascii_case("null") || s.eq_ignore_ascii_case("none") {
                return Ok(None);
            }
            roster
                .iter()
                .find(|g| g.label.eq_ignore_ascii_case(s))
                .map(|g| Some(g.index))
                .ok_or_else(|| format!("unknown subgroup `{s}`"))
        }
        _ => Err("subgroup must be a label, an index or null".into()),
    }
}

/// `None` means the explorer answered "uncertain" or named no known subgroup.
pub fn parse_classification(reply: &str, roster: &[SubgroupId]) -> Option<GroupIndex> {
    let answer = reply
        .trim()
        .trim_matches(|c: char| c == '"' || c == '\'' || c == '.' || c == '`')
        .trim();
    if answer.eq_ignore_ascii_case("uncertain") {
        return None;
    }
    roster
        .iter()
        .find(|g| g.label.eq_ignore_ascii_case(answer))
        .map(|g| g.index)
}

pub fn parse_sentiment(reply: &str, roster: &[SubgroupId]) -> Result<(f64, Option<GroupIndex>), String> {
    let v = extract_json(reply)?;
    Ok((score_field(&v)?, resolve_group(&v["target"], roster)?))
}

pub struct AssessorReply {
    pub stance: Option<GroupIndex>,
    pub score: f64,
    pub target: Option<GroupIndex>,
}

pub fn parse_assessment(reply: &str, roster: &[SubgroupId]) -> Result<AssessorReply, String> {
    let v = extract_json(reply)?;
    Ok(AssessorReply {
        stance: resolve_group(&v["stance"], roster)?,
        score: score_field(&v)?,
        target: resolve_group(&v["target"], roster)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roster() -> Vec<SubgroupId> {
        vec![SubgroupId::new(0, "Pro-A", ""), SubgroupId::new(1, "Pro-B", "")]
    }

    #[test]
    fn extracts_fenced_json() {
        let v = extract_json("```json\n{\"score\": 0.5}\n```").unwrap();
        assert_eq!(v["score"], 0.5);
        assert!(extract_json("no json here").is_err());
    }

    #[test]
    fn assessment_accepts_labels_indices_and_null() {
        let r = parse_assessment(r#"{"stance":"pro-b","score":-0.8,"target":0}"#, &roster()).unwrap();
        assert_eq!((r.stance, r.score, r.target), (Some(1), -0.8, Some(0)));
        let r = parse_assessment(r#"{"stance":null,"score":"0.5","target":"Pro-A"}"#, &roster()).unwrap();
        assert_eq!((r.stance, r.score, r.target), (None, 0.5, Some(0)));
        assert!(parse_assessment(r#"{"stance":"Pro-C","score":0.1,"target":null}"#, &roster()).is_err());
        assert!(parse_assessment(r#"{"stance":null,"target":null}"#, &roster()).is_err());
    }

    #[test]
    fn classification_tokens() {
        assert_eq!(parse_classification("uncertain", &roster()), None);
        assert_eq!(parse_classification(" \"Pro-A\". ", &roster()), Some(0));
        assert_eq!(parse_classification("Pro-Z", &roster()), None);
    }

    #[test]
    fn roster_deduplicates_labels() {
        let r = parse_roster(r#"{"subgroups":[{"label":"A","description":"x"},{"label":"a"},{"label":"B"}]}"#).unwrap();
        assert_eq!(r.len(), 2);
    }
}
