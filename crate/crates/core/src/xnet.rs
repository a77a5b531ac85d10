//! Random bipartite expander layers and side-by-side structural comparison.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::rational::{Display, Rational};
use crate::verify::{check_super_regular, regularity_report, Method, VerifyOptions};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpanderSpec {
    pub n_left: usize,
    pub n_right: usize,
    /// Out-degree `D` of every left node.
    pub degree: usize,
    pub seed: u64,
}

/// Square case: the union of `D` edge-disjoint random perfect matchings, so
/// every row and column has degree exactly `D`. Rectangular case: `D`
/// distinct uniform neighbours per left node, duplicates resampled.
pub fn generate_expander(spec: &ExpanderSpec) -> Result<BinaryMask> {
    let ExpanderSpec { n_left, n_right, degree, seed } = *spec;
    if n_left == 0 || n_right == 0 {
        return Err(Error::arg("expander sides must be positive"));
    }
    if degree == 0 || degree > n_right {
        return Err(Error::arg(format!("degree {degree} not in 1..={n_right}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = BinaryMask::zeros(n_left, n_right);
    if n_left == n_right {
        for _ in 0..degree {
            let matching = random_perfect_matching(&mask, &mut rng);
            for (i, j) in matching.into_iter().enumerate() {
                mask.set(i, j, true);
            }
        }
    } else {
        for i in 0..n_left {
            let mut placed = 0;
            while placed < degree {
                let j = rng.gen_range(0..n_right);
                if !mask.get(i, j) {
                    mask.set(i, j, true);
                    placed += 1;
                }
            }
        }
    }
    Ok(mask)
}

/// A perfect matching avoiding the cells already set in the square `used`,
/// found by augmenting paths over randomly ordered candidates.
///
/// After `r` disjoint matchings the free cells form an `(n - r)`-regular
/// bipartite graph, which always has a perfect matching.
fn random_perfect_matching(used: &BinaryMask, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = used.rows();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut c: Vec<usize> = (0..n).filter(|&j| !used.get(i, j)).collect();
            c.shuffle(rng);
            c
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    const FREE: usize = usize::MAX;
    let mut match_row = vec![FREE; n];
    let mut match_col = vec![FREE; n];
    for &root in &order {
        // Iterative DFS for an augmenting path from `root`.
        let mut visited = vec![false; n];
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        let mut via: Vec<usize> = Vec::new();
        let mut found = false;
        while let Some(top) = stack.last_mut() {
            let row = top.0;
            if top.1 == candidates[row].len() {
                stack.pop();
                via.pop();
                continue;
            }
            let col = candidates[row][top.1];
            top.1 += 1;
            if visited[col] {
                continue;
            }
            visited[col] = true;
            via.push(col);
            if match_col[col] == FREE {
                found = true;
                break;
            }
            stack.push((match_col[col], 0));
        }
        assert!(found, "regular bipartite complement must have a perfect matching");
        for (&(row, _), &col) in stack.iter().zip(&via) {
            match_row[row] = col;
            match_col[col] = row;
        }
    }
    match_row
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub rows: usize,
    pub cols: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub density: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub epsilon_star: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub delta_star: Rational,
    pub method: Method,
    pub min_row_degree: usize,
    pub min_col_degree: usize,
    pub spectral_gap: Option<f64>,
    /// Strict (ε,δ)-balance at the report's thresholds.
    pub super_regular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    #[serde(with = "crate::rational::serde_str")]
    pub epsilon: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub delta: Rational,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# thresholds: epsilon = {}, delta = {}",
            Display(&self.epsilon),
            Display(&self.delta)
        );
        let _ = writeln!(
            out,
            "{:<20} {:>9} {:>9} {:>9} {:>9} {:>7} {:>7} {:>9} {:>7}",
            "label", "shape", "density", "eps*", "delta*", "minrow", "mincol", "gamma", "sr"
        );
        for r in &self.rows {
            let method = if r.method == Method::Sampled { "~" } else { "" };
            let _ = writeln!(
                out,
                "{:<20} {:>9} {:>9} {:>9} {:>9} {:>7} {:>7} {:>9} {:>7}",
                r.label,
                format!("{}x{}", r.rows, r.cols),
                Display(&r.density).to_string(),
                format!("{method}{}", Display(&r.epsilon_star)),
                Display(&r.delta_star).to_string(),
                r.min_row_degree,
                r.min_col_degree,
                r.spectral_gap.map(|g| format!("{g:.6}")).unwrap_or_else(|| "-".into()),
                if r.super_regular { "yes" } else { "no" },
            );
        }
        out
    }
}

/// Tabulates density, ε*, δ*, degrees and γ for each mask.
///
/// The super-regularity flag is a strict check at `thresholds`; by default
/// `ε = ε*` and `δ = δ*/2` of the first mask, so the first row is the
/// reference the others are measured against.
pub fn compare(
    masks: &[BinaryMask],
    labels: &[String],
    options: &VerifyOptions,
    thresholds: Option<(Rational, Rational)>,
) -> Result<ComparisonReport> {
    let Some(first) = masks.first() else {
        return Err(Error::arg("nothing to compare"));
    };
    if labels.len() != masks.len() {
        return Err(Error::arg(format!("{} labels for {} masks", labels.len(), masks.len())));
    }
    if let Some(m) = masks.iter().find(|m| (m.rows(), m.cols()) != (first.rows(), first.cols())) {
        return Err(Error::arg(format!(
            "shape mismatch: {}x{} vs {}x{}",
            m.rows(),
            m.cols(),
            first.rows(),
            first.cols()
        )));
    }
    let reports = masks.iter().map(|m| regularity_report(m, options)).collect::<Result<Vec<_>>>()?;
    let (epsilon, delta) = thresholds.unwrap_or((reports[0].epsilon_star, reports[0].delta_star / 2));
    let rows = masks
        .iter()
        .zip(labels)
        .zip(&reports)
        .map(|((m, label), r)| {
            let sr = check_super_regular(m, epsilon, delta, options)?;
            Ok(ComparisonRow {
                label: label.clone(),
                rows: r.rows,
                cols: r.cols,
                density: r.density,
                epsilon_star: r.epsilon_star,
                delta_star: r.delta_star,
                method: r.method,
                min_row_degree: r.min_row_degree,
                min_col_degree: r.min_col_degree,
                spectral_gap: r.spectral_gap,
                super_regular: sr.holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport { epsilon, delta, rows })
}
