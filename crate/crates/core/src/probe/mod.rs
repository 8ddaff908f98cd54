//! Content validity: linear probes over controlled train/test splits.

mod logreg;
mod split;
mod suite;

pub use logreg::{
    evaluate_probe, loss_and_gradient, majority_baseline, train_probe, MultinomialModel, ProbeParams, TrainingLog,
};
pub use split::{make_controlled_split, SplitPlan};
pub use suite::{random_baseline_seed, run_probe_suite, ProbeConfig, ProbeReport, ProbeRow};

use crate::corpus::{closed_vocabulary, Property, Role, SurveyQuestion};

closed_vocabulary! {
    /// A question property a probe tries to recover.
    ProbeTarget {
        LengthBin => "length_bin",
        Basic => "basic",
        ConcreteGroup => "concrete_group",
        Formulation => "formulation",
    }
}

impl ProbeTarget {
    /// Properties the two sides of a split may not share.
    pub fn disjoint_on(self) -> Vec<Property> {
        match self {
            ProbeTarget::LengthBin => vec![Property::ConcreteId, Property::Formulation],
            ProbeTarget::Basic => vec![Property::NTokens, Property::ConcreteId],
            ProbeTarget::ConcreteGroup => vec![Property::ConcreteId],
            ProbeTarget::Formulation => vec![Property::NTokens],
        }
    }

    pub fn label(self, q: &SurveyQuestion) -> String {
        match self {
            ProbeTarget::LengthBin => q.length_bin.to_string(),
            ProbeTarget::Basic => q.basic.to_string(),
            ProbeTarget::ConcreteGroup => q.triad_id.clone(),
            ProbeTarget::Formulation => q.formulation.to_string(),
        }
    }

    /// Concrete-group probes never use dissimilar questions.
    pub fn eligible(self, q: &SurveyQuestion) -> bool {
        self != ProbeTarget::ConcreteGroup || q.role != Role::Dissimilar
    }
}
