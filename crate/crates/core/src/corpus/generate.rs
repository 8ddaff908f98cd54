use std::collections::HashSet;

use rand::seq::SliceRandom;

use super::{SurveyQuestion, Taxonomy, TemplateTable};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Renders every concrete concept through every template.
///
/// Question ids are `<concrete_id>.<template_id>` and do not depend on the
/// seed; the seed only fixes the row order of the output.
pub fn generate_corpus(
    taxonomy: &Taxonomy,
    templates: &TemplateTable,
    seed: u64,
) -> Result<Vec<SurveyQuestion>> {
    if templates.is_empty() {
        return Err(Error::MalformedTemplate {
            template: String::new(),
            line: 0,
            reason: "template table is empty".into(),
        });
    }
    let mut texts = HashSet::new();
    let mut questions = Vec::with_capacity(taxonomy.n_concepts() * templates.len());
    for triad in taxonomy.triads() {
        for (role, concept) in triad.concepts() {
            for template in templates.templates() {
                let text = template.render(&concept.phrase, &triad.attribute);
                if !texts.insert(text.clone()) {
                    return Err(Error::DuplicateQuestion(text));
                }
                questions.push(SurveyQuestion::new(
                    format!("{}.{}", concept.id, template.id),
                    text,
                    triad.basic,
                    concept.id.clone(),
                    triad.id.clone(),
                    role,
                    template.formulation,
                    template.id.clone(),
                )?);
            }
        }
    }
    questions.shuffle(&mut rng_from_seed(seed));
    Ok(questions)
}
