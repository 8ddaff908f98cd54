use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::ProbeTarget;
use crate::corpus::{Property, Role, SurveyQuestion};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

const TEST_FRACTION: f64 = 0.2;

/// A train/test partition whose sides share no value of `disjoint_on`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub target: ProbeTarget,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub disjoint_on: Vec<Property>,
}

impl SplitPlan {
    /// Checks every declared constraint against the corpus.
    pub fn validate(&self, corpus: &[SurveyQuestion]) -> Result<()> {
        let fail = |msg: String| Err(Error::InternalInvariant(format!("split for {}: {msg}", self.target)));
        if self.train_ids.is_empty() || self.test_ids.is_empty() {
            return fail("empty side".into());
        }
        let by_id: HashMap<&str, &SurveyQuestion> = corpus.iter().map(|q| (q.id.as_str(), q)).collect();
        let side = |ids: &[String]| -> Result<Vec<&SurveyQuestion>> {
            ids.iter()
                .map(|id| {
                    by_id.get(id.as_str()).copied().ok_or_else(|| {
                        Error::InternalInvariant(format!("split references unknown id {id}"))
                    })
                })
                .collect()
        };
        let train = side(&self.train_ids)?;
        let test = side(&self.test_ids)?;
        let train_set: HashSet<&str> = self.train_ids.iter().map(String::as_str).collect();
        if train_set.len() != self.train_ids.len() {
            return fail("repeated train id".into());
        }
        if let Some(id) = self.test_ids.iter().find(|id| train_set.contains(id.as_str())) {
            return fail(format!("id {id} on both sides"));
        }
        for &prop in &self.disjoint_on {
            let a: HashSet<String> = train.iter().map(|q| prop.value(q)).collect();
            if let Some(q) = test.iter().find(|q| a.contains(&prop.value(q))) {
                return fail(format!("{} value {:?} on both sides", prop.as_str(), prop.value(q)));
            }
        }
        let train_labels: HashSet<String> = train.iter().map(|q| self.target.label(q)).collect();
        let all_labels: HashSet<String> = corpus
            .iter()
            .filter(|q| self.target.eligible(q))
            .map(|q| self.target.label(q))
            .collect();
        if train_labels != all_labels {
            return fail("a target category is missing from train".into());
        }
        if self.target == ProbeTarget::ConcreteGroup
            && (train.iter().any(|q| q.role != Role::Reference) || test.iter().any(|q| q.role != Role::Similar))
        {
            return fail("train must hold reference and test similar questions".into());
        }
        Ok(())
    }
}

/// Builds a split for `target` honouring its disjointness rules, sized as
/// close to 80/20 as the rules allow.
///
/// Values of each constrained property are shuffled; the test side takes a
/// prefix of each shuffled list and the train side takes questions whose
/// values all fall outside those prefixes. Questions matching neither side
/// are left out. Every prefix length (pair) is scored and the one closest to
/// the target fraction that keeps all categories in train wins.
pub fn make_controlled_split(corpus: &[SurveyQuestion], target: ProbeTarget, seed: u64) -> Result<SplitPlan> {
    let disjoint_on = target.disjoint_on();
    if target == ProbeTarget::ConcreteGroup {
        return concrete_group_split(corpus, disjoint_on);
    }
    let mut rng = rng_from_seed(seed);
    // Per constrained property: question -> rank of its value in shuffled order.
    let mut ranks: Vec<Vec<usize>> = Vec::new();
    let mut n_values = Vec::new();
    for &prop in &disjoint_on {
        let mut values: Vec<String> = corpus.iter().map(|q| prop.value(q)).collect::<BTreeSet<_>>().into_iter().collect();
        if values.len() < 2 {
            return Err(Error::InfeasibleSplit(format!(
                "{} has {} distinct value(s); cannot separate train and test",
                prop.as_str(),
                values.len()
            )));
        }
        values.shuffle(&mut rng);
        let rank: HashMap<&str, usize> = values.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        ranks.push(corpus.iter().map(|q| rank[prop.value(q).as_str()]).collect());
        n_values.push(values.len());
    }
    let labels: Vec<String> = corpus.iter().map(|q| target.label(q)).collect();
    let all_labels: BTreeSet<&str> = labels.iter().map(String::as_str).collect();

    // Enumerate prefix lengths, each in 1..n-1 so both sides can be non-empty.
    let mut candidates = Vec::new();
    let second = if n_values.len() > 1 { n_values[1] } else { 2 };
    for ka in 1..n_values[0] {
        for kb in 1..second {
            let ks = [ka, kb];
            let (mut n_train, mut n_test) = (0usize, 0usize);
            for i in 0..corpus.len() {
                let side = side_of(&ranks, &ks, i);
                n_test += usize::from(side == Some(Side::Test));
                n_train += usize::from(side == Some(Side::Train));
            }
            if n_train == 0 || n_test == 0 {
                continue;
            }
            let frac = n_test as f64 / (n_train + n_test) as f64;
            candidates.push(((frac - TEST_FRACTION).abs(), usize::MAX - (n_train + n_test), ka, kb));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3)));
    for &(_, _, ka, kb) in &candidates {
        let ks = [ka, kb];
        let train_labels: BTreeSet<&str> = (0..corpus.len())
            .filter(|&i| side_of(&ranks, &ks, i) == Some(Side::Train))
            .map(|i| labels[i].as_str())
            .collect();
        if train_labels != all_labels {
            continue;
        }
        let mut plan = SplitPlan {
            target,
            train_ids: Vec::new(),
            test_ids: Vec::new(),
            disjoint_on: disjoint_on.clone(),
        };
        for (i, q) in corpus.iter().enumerate() {
            match side_of(&ranks, &ks, i) {
                Some(Side::Train) => plan.train_ids.push(q.id.clone()),
                Some(Side::Test) => plan.test_ids.push(q.id.clone()),
                None => {}
            }
        }
        plan.train_ids.sort();
        plan.test_ids.sort();
        return Ok(plan);
    }
    let names: Vec<&str> = disjoint_on.iter().map(|p| p.as_str()).collect();
    Err(Error::InfeasibleSplit(format!(
        "no split disjoint on {} keeps every {} category in train",
        names.join(" and "),
        target
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Train,
    Test,
}

fn side_of(ranks: &[Vec<usize>], ks: &[usize; 2], i: usize) -> Option<Side> {
    let (mut all, mut none) = (true, true);
    for (r, &k) in ranks.iter().zip(ks) {
        if r[i] < k {
            none = false;
        } else {
            all = false;
        }
    }
    match (all, none) {
        (true, _) => Some(Side::Test),
        (_, true) => Some(Side::Train),
        _ => None,
    }
}

fn concrete_group_split(corpus: &[SurveyQuestion], disjoint_on: Vec<Property>) -> Result<SplitPlan> {
    let mut plan = SplitPlan {
        target: ProbeTarget::ConcreteGroup,
        train_ids: Vec::new(),
        test_ids: Vec::new(),
        disjoint_on,
    };
    let mut groups: BTreeMap<&str, [bool; 2]> = BTreeMap::new();
    for q in corpus {
        match q.role {
            Role::Reference => {
                plan.train_ids.push(q.id.clone());
                groups.entry(&q.triad_id).or_default()[0] = true;
            }
            Role::Similar => {
                plan.test_ids.push(q.id.clone());
                groups.entry(&q.triad_id).or_default()[1] = true;
            }
            Role::Dissimilar => {}
        }
    }
    if let Some((triad, _)) = groups.iter().find(|(_, seen)| !seen[0]) {
        return Err(Error::InfeasibleSplit(format!("triad {triad} has no reference questions for training")));
    }
    if plan.test_ids.is_empty() {
        return Err(Error::InfeasibleSplit("corpus has no similar-role questions to test on".into()));
    }
    plan.train_ids.sort();
    plan.test_ids.sort();
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, Taxonomy, TemplateTable};

    fn corpus() -> Vec<SurveyQuestion> {
        generate_corpus(&Taxonomy::shipped(), &TemplateTable::shipped(), 1).unwrap()
    }

    #[test]
    fn basic_split_is_disjoint_on_length_and_concept() {
        let corpus = corpus();
        let plan = make_controlled_split(&corpus, ProbeTarget::Basic, 3).unwrap();
        plan.validate(&corpus).unwrap();
        assert_eq!(plan.disjoint_on, [Property::NTokens, Property::ConcreteId]);
    }

    #[test]
    fn concrete_group_uses_roles() {
        let corpus = corpus();
        let plan = make_controlled_split(&corpus, ProbeTarget::ConcreteGroup, 3).unwrap();
        plan.validate(&corpus).unwrap();
        assert_eq!((plan.train_ids.len(), plan.test_ids.len()), (741, 741));
    }

    #[test]
    fn single_concept_is_infeasible() {
        let corpus: Vec<_> = corpus().into_iter().filter(|q| q.concrete_id == "health_services").collect();
        assert!(matches!(
            make_controlled_split(&corpus, ProbeTarget::LengthBin, 0),
            Err(Error::InfeasibleSplit(_))
        ));
    }

    #[test]
    fn same_seed_same_plan() {
        let corpus = corpus();
        for target in ProbeTarget::ALL {
            let a = make_controlled_split(&corpus, *target, 9).unwrap();
            assert_eq!(a, make_controlled_split(&corpus, *target, 9).unwrap());
        }
    }

    #[test]
    fn validate_catches_leaks() {
        let corpus = corpus();
        let mut plan = make_controlled_split(&corpus, ProbeTarget::Formulation, 2).unwrap();
        let moved = plan.test_ids[0].clone();
        plan.train_ids.push(moved);
        assert!(matches!(plan.validate(&corpus), Err(Error::InternalInvariant(_))));
    }
}
