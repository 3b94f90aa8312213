//! Prompt templates, one text file per role.
//!
//! Templates use `{name}` placeholders. Every role understands `{background}`,
//! `{subgroups}` and `{comment}`; the sentiment expert and the assessor also
//! receive `{platform_notes}`, `{linguistic_notes}`, `{annotations}` and
//! `{assigned_stance}`. Unknown placeholders are left untouched.
//!
//! The subgroup explorer template has two sections introduced by the lines
//! `[[discover]]` and `[[classify]]`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use super::AgentRole;

#[derive(Debug, Clone, PartialEq)]
pub struct PromptSet {
    templates: BTreeMap<AgentRole, String>,
}

impl PromptSet {
    pub fn bundled() -> &'static PromptSet {
        static SET: OnceLock<PromptSet> = OnceLock::new();
        SET.get_or_init(|| {
            let templates = [
                (AgentRole::DomainSpecialist, include_str!("../../prompts/domain_specialist.txt")),
                (AgentRole::SubgroupExplorer, include_str!("../../prompts/subgroup_explorer.txt")),
                (AgentRole::SocialMediaVeteran, include_str!("../../prompts/social_media_veteran.txt")),
                (AgentRole::LinguisticExpert, include_str!("../../prompts/linguistic_expert.txt")),
                (AgentRole::SentimentExpert, include_str!("../../prompts/sentiment_expert.txt")),
                (AgentRole::PolarizationAssessor, include_str!("../../prompts/polarization_assessor.txt")),
            ]
            .into_iter()
            .map(|(r, t)| (r, t.to_string()))
            .collect();
            PromptSet { templates }
        })
    }

    /// Bundled templates overridden by any `<role>.txt` found in `dir`.
    pub fn load_dir(dir: &Path) -> std::io::Result<PromptSet> {
        let mut set = PromptSet::bundled().clone();
        for role in AgentRole::ALL {
            let path = dir.join(format!("{}.txt", role.key()));
            if path.exists() {
                set.templates.insert(role, std::fs::read_to_string(path)?);
            }
        }
        Ok(set)
    }

    pub fn template(&self, role: AgentRole) -> &str {
        &self.templates[&role]
    }
}

/// Substitutes `{key}` placeholders.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

/// Text of the `[[name]]` section, or the whole template when it has no
/// sections.
pub fn section<'a>(template: &'a str, name: &str) -> &'a str {
    let marker = format!("[[{name}]]");
    let Some(start) = template.find(&marker) else {
        return template;
    };
    let body = &template[start + marker.len()..];
    let end = body.find("\n[[").map(|i| i + 1).unwrap_or(body.len());
    body[..end].trim()
}
