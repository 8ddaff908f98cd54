use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::Formulation;
use crate::error::{Error, Result};

pub const CONCEPT_SLOT: &str = "{concept}";
pub const ATTRIBUTE_SLOT: &str = "{attribute}";

const DEFAULT_TEMPLATES: &str = include_str!("../../data/templates.csv");

/// A question pattern. `{concept}` receives the concrete-concept phrase,
/// `{attribute}` the triad's evaluative predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub formulation: Formulation,
    pub pattern: String,
}

impl Template {
    pub fn new(id: impl Into<String>, formulation: Formulation, pattern: impl Into<String>) -> Result<Self> {
        let t = Template {
            id: id.into(),
            formulation,
            pattern: pattern.into(),
        };
        t.check().map_err(|reason| Error::MalformedTemplate {
            template: t.id.clone(),
            line: 0,
            reason,
        })?;
        Ok(t)
    }

    fn check(&self) -> std::result::Result<(), String> {
        let n_slots = self.pattern.matches(CONCEPT_SLOT).count();
        if n_slots != 1 {
            return Err(format!("expected exactly one {CONCEPT_SLOT} slot, found {n_slots}"));
        }
        let stripped = self
            .pattern
            .replace(CONCEPT_SLOT, "")
            .replace(ATTRIBUTE_SLOT, "");
        if stripped.contains('{') || stripped.contains('}') {
            return Err("unknown slot".to_string());
        }
        // Slots must sit on token boundaries or the minimal-pair property breaks.
        for slot in [CONCEPT_SLOT, ATTRIBUTE_SLOT] {
            for (at, _) in self.pattern.match_indices(slot) {
                let before = self.pattern[..at].chars().next_back();
                let after = self.pattern[at + slot.len()..].chars().next();
                if before.is_some_and(|c| c.is_alphanumeric())
                    || after.is_some_and(|c| c.is_alphanumeric())
                {
                    return Err(format!("{slot} is glued to a neighbouring word"));
                }
            }
        }
        Ok(())
    }

    pub fn render(&self, concept: &str, attribute: &str) -> String {
        self.pattern
            .replace(ATTRIBUTE_SLOT, attribute)
            .replace(CONCEPT_SLOT, concept)
    }

    /// Text before and after the concept slot once the attribute is filled in.
    pub fn frame(&self, attribute: &str) -> (String, String) {
        let filled = self.pattern.replace(ATTRIBUTE_SLOT, attribute);
        let at = filled.find(CONCEPT_SLOT).expect("validated template");
        (
            filled[..at].to_string(),
            filled[at + CONCEPT_SLOT.len()..].to_string(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateTable {
    templates: Vec<Template>,
}

#[derive(Deserialize)]
struct TemplateRecord {
    template_id: String,
    formulation: String,
    pattern: String,
}

impl TemplateTable {
    pub fn new(templates: Vec<Template>) -> Result<Self> {
        let mut seen = HashSet::new();
        for t in &templates {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::MalformedTemplate {
                    template: t.id.clone(),
                    line: 0,
                    reason: "duplicate template id".into(),
                });
            }
        }
        Ok(TemplateTable { templates })
    }

    /// The shipped 19-template table.
    pub fn shipped() -> Self {
        Self::from_reader(DEFAULT_TEMPLATES.as_bytes()).expect("shipped templates parse")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    /// Parses `template_id,formulation,pattern` CSV. Errors carry the
    /// 1-based file line.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut templates = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| Error::MalformedTemplate {
                template: String::new(),
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                reason: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            let rec: TemplateRecord =
                record
                    .deserialize(Some(&headers))
                    .map_err(|e| Error::MalformedTemplate {
                        template: String::new(),
                        line,
                        reason: e.to_string(),
                    })?;
            let formulation = rec
                .formulation
                .parse::<Formulation>()
                .map_err(|e| Error::MalformedTemplate {
                    template: rec.template_id.clone(),
                    line,
                    reason: e.to_string(),
                })?;
            let t = Template {
                id: rec.template_id,
                formulation,
                pattern: rec.pattern,
            };
            t.check().map_err(|reason| Error::MalformedTemplate {
                template: t.id.clone(),
                line,
                reason,
            })?;
            templates.push(t);
        }
        Self::new(templates)
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Template> {
        self.templates.iter().find(|t| t.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_table_has_nineteen_templates_split_4_4_4_4_3() {
        let table = TemplateTable::shipped();
        assert_eq!(table.len(), 19);
        let count = |f: Formulation| table.templates().iter().filter(|t| t.formulation == f).count();
        assert_eq!(count(Formulation::DirectRequest), 4);
        assert_eq!(count(Formulation::ImperativeInterrogative), 4);
        assert_eq!(count(Formulation::InterrogativeInterrogative), 4);
        assert_eq!(count(Formulation::DeclarativeInterrogative), 4);
        assert_eq!(count(Formulation::InterrogativeDeclarative), 3);
    }

    #[test]
    fn missing_slot_reports_line_number() {
        let csv = "template_id,formulation,pattern\nA,DR,How {attribute} is {concept}?\nB,DR,How are you?\n";
        match TemplateTable::from_reader(csv.as_bytes()) {
            Err(Error::MalformedTemplate { template, line, .. }) => {
                assert_eq!(template, "B");
                assert_eq!(line, 3);
            }
            other => panic!("expected MalformedTemplate, got {other:?}"),
        }
    }

    #[test]
    fn glued_slot_is_rejected() {
        assert!(Template::new("x", Formulation::DirectRequest, "Is {concept}s good?").is_err());
        assert!(Template::new("x", Formulation::DirectRequest, "Is {concept} good?").is_ok());
    }

    #[test]
    fn renders_example_questions() {
        let table = TemplateTable::shipped();
        let concept = "the state of health services in your country";
        assert_eq!(
            table.get("DR1").unwrap().render(concept, "good"),
            "How good is the state of health services in your country?"
        );
        assert_eq!(
            table.get("InDe1").unwrap().render(concept, "good"),
            "Do you agree that the state of health services in your country is good?"
        );
    }
}
