//! Deterministic rule-based stand-ins for the six agent roles.
//!
//! The rules live in a TOML document (see `assets/mock_rules.toml` for the
//! bundled set). Summary of the behaviour per role:
//!
//! * domain specialist: top-k capitalized words by frequency (ties broken
//!   alphabetically), skipping stopwords, hashtags and all-caps words longer
//!   than four letters.
//! * subgroup explorer: a rule subgroup joins the roster when any of its
//!   stance keywords occurs in the corpus; a comment is assigned when exactly
//!   one roster subgroup's keywords occur in it, otherwise it is uncertain.
//! * social media veteran: hashtag, slang and emoji lookups.
//! * linguistic expert: sentence type, grammatical person, tense and sarcasm
//!   cues.
//! * sentiment expert: sum of lexicon scores plus slang scores flagged by the
//!   veteran, sign-flipped when the linguist reported sarcasm, clamped. The
//!   target is the roster subgroup mentioned first (by alias or label).
//! * polarization assessor: stance from the explorer, score and target from
//!   the sentiment expert.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use serde::Deserialize;

use super::text::{contains_phrase, emoji, phrase_positions, raw_words, tokens};
use crate::model::{Comment, GroupIndex, SubgroupId};

const BUNDLED: &str = include_str!("../../assets/mock_rules.toml");

pub(crate) const NO_PLATFORM_FINDINGS: &str = "no platform-specific constructs";
pub(crate) const SARCASM_MARKER: &str = "sarcasm cues:";

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SlangEntry {
    pub meaning: String,
    #[serde(default)]
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SubgroupRule {
    pub label: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub stance_keywords: Vec<String>,
    #[serde(default)]
    pub target_aliases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct MockRules {
    #[serde(default = "default_top")]
    pub top_stakeholders: usize,
    #[serde(default)]
    pub stopwords: BTreeSet<String>,
    #[serde(default)]
    pub sarcasm_cues: Vec<String>,
    #[serde(default)]
    pub sentiment: BTreeMap<String, f64>,
    #[serde(default)]
    pub slang: BTreeMap<String, SlangEntry>,
    #[serde(default)]
    pub hashtags: BTreeMap<String, String>,
    #[serde(default)]
    pub subgroups: Vec<SubgroupRule>,
}

fn default_top() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackgroundDraft {
    pub event_summary: String,
    pub timeline: String,
    pub stakeholders: Vec<String>,
}

impl MockRules {
    pub fn bundled() -> &'static MockRules {
        static RULES: OnceLock<MockRules> = OnceLock::new();
        RULES.get_or_init(|| MockRules::from_toml(BUNDLED).expect("bundled mock rules parse"))
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn background(&self, sample: &[&Comment]) -> BackgroundDraft {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for c in sample {
            for w in raw_words(&c.text) {
                if self.is_proper_noun(w) {
                    *counts.entry(w).or_default() += 1;
                }
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let stakeholders: Vec<String> = ranked
            .into_iter()
            .take(self.top_stakeholders)
            .map(|(w, _)| w.to_string())
            .collect();

        let event_summary = if stakeholders.is_empty() {
            let evidence = sample.first().map(|c| c.text.trim()).unwrap_or_default();
            format!("No identifiable stakeholders; evidence: \"{evidence}\"")
        } else {
            format!(
                "Discussion centred on {} across {} sampled comments",
                stakeholders.join(", "),
                sample.len()
            )
        };
        let first = sample.iter().map(|c| c.timestamp).min();
        let last = sample.iter().map(|c| c.timestamp).max();
        let timeline = match (first, last) {
            (Some(f), Some(l)) => format!(
                "{} comments from {} to {}",
                sample.len(),
                f.to_rfc3339(),
                l.to_rfc3339()
            ),
            _ => "no comments".to_string(),
        };
        BackgroundDraft {
            event_summary,
            timeline,
            stakeholders,
        }
    }

    fn is_proper_noun(&self, w: &str) -> bool {
        let mut chars = w.chars();
        let Some(first) = chars.next() else {
            return false;
        };
        if !first.is_uppercase() || w.chars().count() < 2 {
            return false;
        }
        if self.stopwords.contains(&w.to_lowercase()) {
            return false;
        }
        let all_caps = w.chars().all(|c| !c.is_lowercase());
        !(all_caps && w.chars().count() > 4)
    }

    /// Rule subgroups whose stance keywords occur somewhere in `comments`,
    /// in rule order.
    pub fn discover_roster(&self, comments: &[&Comment]) -> Vec<(String, String)> {
        let tokenized: Vec<Vec<String>> = comments.iter().map(|c| tokens(&c.text)).collect();
        self.subgroups
            .iter()
            .filter(|rule| {
                tokenized
                    .iter()
                    .any(|toks| rule.stance_keywords.iter().any(|k| contains_phrase(toks, k)))
            })
            .map(|rule| (rule.label.clone(), rule.description.clone()))
            .collect()
    }

    fn rule_for(&self, label: &str) -> Option<&SubgroupRule> {
        self.subgroups
            .iter()
            .find(|r| r.label.eq_ignore_ascii_case(label))
    }

    /// Roster subgroups whose stance keywords occur in `text`.
    pub fn stance_matches(&self, text: &str, roster: &[SubgroupId]) -> Vec<GroupIndex> {
        let toks = tokens(text);
        roster
            .iter()
            .filter(|g| {
                self.rule_for(&g.label)
                    .is_some_and(|r| r.stance_keywords.iter().any(|k| contains_phrase(&toks, k)))
            })
            .map(|g| g.index)
            .collect()
    }

    pub fn classify(&self, text: &str, roster: &[SubgroupId]) -> Option<GroupIndex> {
        match self.stance_matches(text, roster).as_slice() {
            [only] => Some(*only),
            _ => None,
        }
    }

    pub fn platform_notes(&self, text: &str) -> String {
        let toks = tokens(text);
        let mut notes = Vec::new();
        for t in toks.iter().filter(|t| t.starts_with('#')) {
            match self.hashtags.get(t) {
                Some(meaning) => notes.push(format!("hashtag {t}: {meaning}")),
                None => notes.push(format!("hashtag {t}: unrecognized")),
            }
        }
        let mut seen = BTreeSet::new();
        for t in &toks {
            if let Some(entry) = self.slang.get(t) {
                if seen.insert(t.clone()) {
                    notes.push(format!("slang \"{t}\": {}", entry.meaning));
                }
            }
        }
        let emoji = emoji(text);
        if !emoji.is_empty() {
            notes.push(format!("emoji: {}", emoji.into_iter().collect::<String>()));
        }
        if notes.is_empty() {
            NO_PLATFORM_FINDINGS.to_string()
        } else {
            notes.join("; ")
        }
    }

    pub fn linguistic_notes(&self, text: &str) -> String {
        let toks = tokens(text);
        let has = |words: &[&str]| toks.iter().any(|t| words.contains(&t.as_str()));

        let sentence = match text.trim_end().chars().last() {
            Some('?') => "interrogative sentence",
            Some('!') => "exclamatory sentence",
            _ => "declarative sentence",
        };
        let person = if has(&["i", "me", "my", "we", "us", "our"]) {
            "first person"
        } else if has(&["you", "your", "yours"]) {
            "second person"
        } else {
            "third person"
        };
        let tense = if has(&["will", "shall", "gonna"]) || contains_phrase(&toks, "going to") {
            "future tense"
        } else if has(&["was", "were", "did", "had"])
            || toks
                .iter()
                .any(|t| t.len() >= 5 && t.ends_with("ed") && !t.starts_with('#'))
        {
            "past tense"
        } else {
            "present tense"
        };

        let mut notes = format!("{sentence}, {person}, {tense}");
        let cues: Vec<&str> = self
            .sarcasm_cues
            .iter()
            .filter(|c| contains_phrase(&toks, c))
            .map(String::as_str)
            .collect();
        if !cues.is_empty() {
            let quoted: Vec<String> = cues.iter().map(|c| format!("\"{c}\"")).collect();
            notes.push_str(&format!("; {SARCASM_MARKER} {}", quoted.join(", ")));
        }
        let shouted: Vec<&str> = raw_words(text)
            .filter(|w| w.chars().count() > 4 && w.chars().all(|c| c.is_uppercase()))
            .collect();
        if !shouted.is_empty() {
            notes.push_str(&format!("; emphatic capitalization: {}", shouted.join(", ")));
        }
        notes
    }

    /// Sum of sentiment lexicon hits in `text`, before any clamping.
    pub fn lexicon_score(&self, text: &str) -> f64 {
        let toks = tokens(text);
        self.sentiment
            .iter()
            .map(|(k, v)| phrase_positions(&toks, &tokens(k)).len() as f64 * v)
            .sum()
    }

    /// Raw (unclamped) sentiment and its target.
    pub fn sentiment(
        &self,
        text: &str,
        platform_notes: &str,
        linguistic_notes: &str,
        roster: &[SubgroupId],
    ) -> (f64, Option<GroupIndex>) {
        let mut score = self.lexicon_score(text);
        for (token, entry) in &self.slang {
            if platform_notes.contains(&format!("slang \"{token}\"")) {
                score += entry.score;
            }
        }
        if linguistic_notes.contains(SARCASM_MARKER) {
            score = -score;
        }
        (score, self.first_mention(text, roster))
    }

    /// Roster subgroup whose alias (or label) appears earliest in `text`.
    pub fn first_mention(&self, text: &str, roster: &[SubgroupId]) -> Option<GroupIndex> {
        let toks = tokens(text);
        roster
            .iter()
            .filter_map(|g| {
                let mut aliases = vec![g.label.clone()];
                if let Some(rule) = self.rule_for(&g.label) {
                    aliases.extend(rule.target_aliases.iter().cloned());
                }
                aliases
                    .iter()
                    .filter_map(|a| phrase_positions(&toks, &tokens(a)).first().copied())
                    .min()
                    .map(|pos| (pos, g.index))
            })
            .min()
            .map(|(_, idx)| idx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};

    fn rules() -> &'static MockRules {
        MockRules::bundled()
    }

    fn ab_roster() -> Vec<SubgroupId> {
        vec![SubgroupId::new(0, "Group A", ""), SubgroupId::new(1, "Group B", "")]
    }

    #[test]
    fn platform_examples() {
        let notes = rules().platform_notes("#SlavaUkraini 🇺🇦");
        assert!(notes.contains("hashtag #slavaukraini: pro-Ukraine slogan"), "{notes}");
        assert!(notes.contains("emoji"));
        assert_eq!(rules().platform_notes("I went for a walk."), NO_PLATFORM_FINDINGS);
        let notes = rules().platform_notes("ratio + L");
        assert!(notes.contains("slang \"ratio\"") && notes.contains("slang \"l\""), "{notes}");
    }

    #[test]
    fn linguistic_examples() {
        let notes = rules().linguistic_notes("Oh sure, ANOTHER brilliant move.");
        assert!(notes.contains("sarcasm cues: \"oh sure\""), "{notes}");
        assert!(notes.contains("emphatic capitalization: ANOTHER"), "{notes}");
        assert_eq!(
            rules().linguistic_notes("I support X."),
            "declarative sentence, first person, present tense"
        );
    }

    #[test]
    fn sentiment_lexicon_examples() {
        let r = rules();
        let roster = ab_roster();
        let (s, t) = r.sentiment("Group A are heroes", "", "", &roster);
        assert_eq!((s, t), (0.6, Some(0)));
        let (s, t) = r.sentiment("Group A are traitors", "", "", &roster);
        assert_eq!((s, t), (-0.8, Some(0)));
        let (s, t) = r.sentiment("I had lunch", "", "", &roster);
        assert_eq!((s, t), (0.0, None));
    }

    #[test]
    fn sarcasm_flips_sign() {
        let r = rules();
        let text = "Oh sure, ANOTHER brilliant move.";
        let notes = r.linguistic_notes(text);
        let (s, _) = r.sentiment(text, "", &notes, &[]);
        assert_eq!(s, -0.6);
    }

    #[test]
    fn slang_scores_come_from_platform_notes() {
        let r = rules();
        let text = "ratio + L";
        let (without, _) = r.sentiment(text, NO_PLATFORM_FINDINGS, "", &[]);
        let (with, _) = r.sentiment(text, &r.platform_notes(text), "", &[]);
        assert_eq!(without, 0.0);
        assert!((with - (-0.5)).abs() < 1e-12);
    }

    #[test]
    fn stakeholders_by_frequency() {
        let ts = Utc.with_ymd_and_hms(2022, 3, 1, 0, 0, 0).unwrap();
        let cs: Vec<Comment> = [
            "Russia attacked Ukraine.",
            "Ukraine resists, Russia retreats near Kyiv.",
            "NATO watches Ukraine. ANOTHER day.",
        ]
        .iter()
        .enumerate()
        .map(|(i, t)| Comment::new(i.to_string(), *t, "u", 0, ts, "t").unwrap())
        .collect();
        let refs: Vec<&Comment> = cs.iter().collect();
        let bg = rules().background(&refs);
        assert_eq!(bg.stakeholders, ["Ukraine", "Russia", "Kyiv", "NATO"]);
    }

    #[test]
    fn classification_requires_a_single_match() {
        let r = rules();
        let roster: Vec<SubgroupId> = r
            .subgroups
            .iter()
            .enumerate()
            .map(|(i, s)| SubgroupId::new(i, s.label.clone(), ""))
            .collect();
        assert_eq!(r.classify("#SlavaUkraini we resist", &roster), Some(0));
        assert_eq!(r.classify("Peace talks are for cowards #SlavaUkraini", &roster), None);
        assert_eq!(r.classify("the weather is nice", &roster), None);
    }
}
