use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Assignment of questions to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignment: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn fold_of(&self, question_id: &str) -> Option<usize> {
        self.assignment.get(question_id).copied()
    }

    /// Question ids per fold, sorted within each fold.
    pub fn folds(&self) -> Vec<Vec<&str>> {
        let mut out = vec![Vec::new(); self.k];
        for (q, &f) in &self.assignment {
            out[f].push(q.as_str());
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.folds().iter().map(Vec::len).collect()
    }

    /// Every fold non-empty and sizes within one of each other.
    pub fn validate(&self) -> Result<()> {
        let sizes = self.sizes();
        let (lo, hi) = (sizes.iter().min(), sizes.iter().max());
        match (lo, hi) {
            (Some(&lo), Some(&hi)) if lo >= 1 && hi - lo <= 1 => Ok(()),
            _ => Err(Error::InternalInvariant(format!("unbalanced folds {sizes:?}"))),
        }
    }
}

/// Shuffles the distinct question ids with `seed` and deals them
/// round-robin into `k` folds.
pub fn grouped_kfold<S: AsRef<str>>(question_ids: &[S], k: usize, seed: u64) -> Result<FoldPlan> {
    let mut ids: Vec<&str> = question_ids
        .iter()
        .map(AsRef::as_ref)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if k < 2 {
        return Err(Error::InfeasibleSplit(format!("k = {k}; need at least 2 folds")));
    }
    if ids.len() < k {
        return Err(Error::InfeasibleSplit(format!("{} questions cannot fill {k} folds", ids.len())));
    }
    ids.shuffle(&mut rng_from_seed(seed));
    let assignment = ids.into_iter().enumerate().map(|(i, q)| (q.to_owned(), i % k)).collect();
    Ok(FoldPlan { k, seed, assignment })
}

/// Errors unless the two question sets are disjoint.
pub fn assert_no_leak<'a>(
    train: impl IntoIterator<Item = &'a str>,
    test: impl IntoIterator<Item = &'a str>,
) -> Result<()> {
    let train: BTreeSet<&str> = train.into_iter().collect();
    match test.into_iter().find(|q| train.contains(q)) {
        Some(q) => Err(Error::InternalInvariant(format!("question {q} is in train and test"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("q{i:03}")).collect()
    }

    #[test]
    fn ninety_four_into_ten() {
        let plan = grouped_kfold(&ids(94), 10, 7).unwrap();
        let mut sizes = plan.sizes();
        sizes.sort();
        assert_eq!(sizes, [9, 9, 9, 9, 9, 9, 10, 10, 10, 10]);
        assert_eq!(plan, grouped_kfold(&ids(94), 10, 7).unwrap());
    }

    #[test]
    fn infeasible_cases() {
        assert!(matches!(grouped_kfold(&ids(20), 1, 0), Err(Error::InfeasibleSplit(_))));
        assert!(matches!(grouped_kfold(&ids(5), 10, 0), Err(Error::InfeasibleSplit(_))));
    }

    proptest! {
        #[test]
        fn folds_partition_questions(n in 2usize..60, k in 2usize..12, seed in any::<u64>()) {
            prop_assume!(n >= k);
            let all = ids(n);
            let plan = grouped_kfold(&all, k, seed).unwrap();
            plan.validate().unwrap();
            let folds = plan.folds();
            prop_assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), n);
            for f in 0..k {
                let train = folds.iter().enumerate().filter(|(g, _)| *g != f).flat_map(|(_, v)| v.iter().copied());
                prop_assert!(assert_no_leak(train, folds[f].iter().copied()).is_ok());
            }
        }
    }
}
