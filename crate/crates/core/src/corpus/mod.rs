//! Survey-question taxonomy, the synthetic minimal-pair corpus and the
//! association tests that motivate the probing split constraints.

mod association;
mod generate;
mod io;
mod taxonomy;
mod template;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use association::{chi_square_from_table, chi_square_independence, ChiSquareResult};
pub use generate::generate_corpus;
pub use io::{load_corpus, read_corpus, write_corpus, CorpusSummary};
pub use taxonomy::{Concept, ConceptTriad, Taxonomy};
pub use template::{Template, TemplateTable, CONCEPT_SLOT, ATTRIBUTE_SLOT};

/// Upper bound of the last length bin.
pub const MAX_TOKENS: usize = 25;

macro_rules! closed_vocabulary {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, ::serde::Serialize, ::serde::Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl ::std::str::FromStr for $name {
            type Err = $crate::error::Error;

            fn from_str(s: &str) -> $crate::error::Result<Self> {
                match s.trim() {
                    $($label => Ok($name::$variant),)+
                    other => Err($crate::error::Error::Schema(format!(
                        "unknown {} value {:?}",
                        stringify!($name),
                        other
                    ))),
                }
            }
        }

        impl TryFrom<String> for $name {
            type Error = $crate::error::Error;

            fn try_from(s: String) -> $crate::error::Result<Self> {
                s.parse()
            }
        }

        impl From<$name> for String {
            fn from(v: $name) -> String {
                v.as_str().to_string()
            }
        }

        impl ::std::fmt::Display for $name {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

pub(crate) use closed_vocabulary;

closed_vocabulary!(
    /// The 13 subjective basic concepts.
    BasicConcept {
        Evaluation => "evaluation",
        Importance => "importance",
        Feelings => "feelings",
        CognitiveJudgment => "cognitive_judgment",
        CausalRelationship => "causal_relationship",
        Similarity => "similarity",
        Preferences => "preferences",
        Norms => "norms",
        Policies => "policies",
        Rights => "rights",
        ActionTendency => "action_tendency",
        Expectation => "expectation",
        Belief => "belief",
    }
);

closed_vocabulary!(
    /// Request formulation of a question.
    Formulation {
        DirectRequest => "DR",
        ImperativeInterrogative => "ImIn",
        InterrogativeInterrogative => "InIn",
        DeclarativeInterrogative => "DeIn",
        InterrogativeDeclarative => "InDe",
    }
);

closed_vocabulary!(
    /// Position of a concrete concept inside its triad.
    Role {
        Reference => "reference",
        Similar => "similar",
        Dissimilar => "dissimilar",
    }
);

closed_vocabulary!(
    /// Categorical question length: at most 10, 11-12, 13-15 and 16-25 tokens.
    LengthBin {
        B0To10 => "B0_10",
        B10To12 => "B10_12",
        B12To15 => "B12_15",
        B15To25 => "B15_25",
    }
);

/// Lowercases, drops every non-alphanumeric character and splits on
/// whitespace.
pub fn tokenize(text: &str) -> Result<Vec<String>> {
    let tokens = tokenize_lenient(text);
    if tokens.is_empty() {
        return Err(Error::EmptyText);
    }
    Ok(tokens)
}

/// Same as [`tokenize`] but returns an empty list instead of failing.
pub(crate) fn tokenize_lenient(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

pub fn length_bin(n_tokens: usize) -> Result<LengthBin> {
    match n_tokens {
        0 => Err(Error::EmptyText),
        1..=10 => Ok(LengthBin::B0To10),
        11..=12 => Ok(LengthBin::B10To12),
        13..=15 => Ok(LengthBin::B12To15),
        16..=MAX_TOKENS => Ok(LengthBin::B15To25),
        n => Err(Error::Overflow(n)),
    }
}

/// One generated or loaded survey question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyQuestion {
    pub id: String,
    pub text: String,
    pub basic: BasicConcept,
    pub concrete_id: String,
    pub triad_id: String,
    pub role: Role,
    pub formulation: Formulation,
    pub template_id: String,
    pub n_tokens: usize,
    pub length_bin: LengthBin,
}

impl SurveyQuestion {
    /// Builds a question, deriving the token count and length bin from `text`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        basic: BasicConcept,
        concrete_id: impl Into<String>,
        triad_id: impl Into<String>,
        role: Role,
        formulation: Formulation,
        template_id: impl Into<String>,
    ) -> Result<Self> {
        let text = text.into();
        let n_tokens = tokenize(&text)?.len();
        Ok(SurveyQuestion {
            id: id.into(),
            text,
            basic,
            concrete_id: concrete_id.into(),
            triad_id: triad_id.into(),
            role,
            formulation,
            template_id: template_id.into(),
            n_tokens,
            length_bin: length_bin(n_tokens)?,
        })
    }

    pub fn tokens(&self) -> Vec<String> {
        tokenize_lenient(&self.text)
    }
}

/// Categorical fields of a question usable as probe targets or in
/// association tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    LengthBin,
    NTokens,
    Basic,
    ConcreteId,
    TriadId,
    Role,
    Formulation,
    TemplateId,
}

impl Property {
    pub fn value(self, q: &SurveyQuestion) -> String {
        match self {
            Property::LengthBin => q.length_bin.as_str().to_string(),
            Property::NTokens => q.n_tokens.to_string(),
            Property::Basic => q.basic.as_str().to_string(),
            Property::ConcreteId => q.concrete_id.clone(),
            Property::TriadId => q.triad_id.clone(),
            Property::Role => q.role.as_str().to_string(),
            Property::Formulation => q.formulation.as_str().to_string(),
            Property::TemplateId => q.template_id.clone(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Property::LengthBin => "length_bin",
            Property::NTokens => "n_tokens",
            Property::Basic => "basic",
            Property::ConcreteId => "concrete_id",
            Property::TriadId => "triad_id",
            Property::Role => "role",
            Property::Formulation => "formulation",
            Property::TemplateId => "template_id",
        }
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "length_bin" => Property::LengthBin,
            "n_tokens" => Property::NTokens,
            "basic" => Property::Basic,
            "concrete_id" => Property::ConcreteId,
            "triad_id" => Property::TriadId,
            "role" => Property::Role,
            "formulation" => Property::Formulation,
            "template_id" => Property::TemplateId,
            other => return Err(Error::Schema(format!("unknown property {other:?}"))),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("How happy would you say you are?").unwrap(),
            toks(&["how", "happy", "would", "you", "say", "you", "are"])
        );
        assert_eq!(tokenize("Hello").unwrap(), toks(&["hello"]));
        assert_eq!(
            tokenize("Do you trust the legal system?").unwrap(),
            toks(&["do", "you", "trust", "the", "legal", "system"])
        );
    }

    #[test]
    fn tokenize_rejects_empty_and_punctuation_only() {
        assert!(matches!(tokenize(""), Err(Error::EmptyText)));
        assert!(matches!(tokenize("  ?!. "), Err(Error::EmptyText)));
    }

    #[test]
    fn length_bins_are_disjoint_and_exhaustive() {
        assert_eq!(length_bin(7).unwrap(), LengthBin::B0To10);
        assert_eq!(length_bin(10).unwrap(), LengthBin::B0To10);
        assert_eq!(length_bin(11).unwrap(), LengthBin::B10To12);
        assert_eq!(length_bin(12).unwrap(), LengthBin::B10To12);
        assert_eq!(length_bin(13).unwrap(), LengthBin::B12To15);
        assert_eq!(length_bin(15).unwrap(), LengthBin::B12To15);
        assert_eq!(length_bin(16).unwrap(), LengthBin::B15To25);
        assert_eq!(length_bin(25).unwrap(), LengthBin::B15To25);
        assert!(matches!(length_bin(26), Err(Error::Overflow(26))));
        assert!(matches!(length_bin(0), Err(Error::EmptyText)));
    }

    #[test]
    fn closed_vocabularies_have_fixed_sizes() {
        assert_eq!(BasicConcept::ALL.len(), 13);
        assert_eq!(Formulation::ALL.len(), 5);
        for b in BasicConcept::ALL {
            assert_eq!(b.as_str().parse::<BasicConcept>().unwrap(), *b);
        }
        assert!("objective".parse::<BasicConcept>().is_err());
        assert!("medium".parse::<Role>().is_err());
    }
}
