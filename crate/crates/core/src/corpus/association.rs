use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Property, SurveyQuestion};
use crate::error::{Error, Result};
use crate::special::chi_square_sf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson chi-square test of independence on a contingency table of counts.
pub fn chi_square_from_table(table: &[Vec<f64>]) -> Result<ChiSquareResult> {
    let n_rows = table.len();
    let n_cols = table.first().map_or(0, Vec::len);
    if n_rows < 2 || n_cols < 2 {
        return Err(Error::DegenerateTable(format!("{n_rows}x{n_cols} table")));
    }
    if table.iter().any(|row| row.len() != n_cols) {
        return Err(Error::DegenerateTable("ragged table".into()));
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..n_cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    if row_sums.iter().chain(&col_sums).any(|&s| s <= 0.0) {
        return Err(Error::DegenerateTable("empty row or column".into()));
    }
    let total: f64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &observed) in row.iter().enumerate() {
            let expected = row_sums[i] * col_sums[j] / total;
            statistic += (observed - expected).powi(2) / expected;
        }
    }
    let df = (n_rows - 1) * (n_cols - 1);
    Ok(ChiSquareResult {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
    })
}

/// Tests whether two categorical question properties are independent.
pub fn chi_square_independence(
    corpus: &[SurveyQuestion],
    prop_a: Property,
    prop_b: Property,
) -> Result<ChiSquareResult> {
    let mut counts: BTreeMap<(String, String), f64> = BTreeMap::new();
    let mut rows = BTreeMap::new();
    let mut cols = BTreeMap::new();
    for q in corpus {
        let a = prop_a.value(q);
        let b = prop_b.value(q);
        rows.insert(a.clone(), ());
        cols.insert(b.clone(), ());
        *counts.entry((a, b)).or_insert(0.0) += 1.0;
    }
    for (prop, n) in [(prop_a, rows.len()), (prop_b, cols.len())] {
        if n < 2 {
            return Err(Error::DegenerateTable(format!(
                "property {} has a single category",
                prop.as_str()
            )));
        }
    }
    let table: Vec<Vec<f64>> = rows
        .keys()
        .map(|a| {
            cols.keys()
                .map(|b| counts.get(&(a.clone(), b.clone())).copied().unwrap_or(0.0))
                .collect()
        })
        .collect();
    chi_square_from_table(&table)
}
