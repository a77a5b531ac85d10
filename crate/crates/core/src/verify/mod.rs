//! ε-balance and (ε,δ)-balance of a mask.
//!
//! A mask `Q` with rows `A` and columns `B` is ε-balanced when every pair
//! `X ⊆ A`, `Y ⊆ B` with `|X| > ε|A|` and `|Y| > ε|B|` has
//! `|d(X,Y) - d(Q)| <= ε`. The smallest such ε is reported as `ε*`. The
//! largest δ for which `e(X,Y) > δ|X||Y|` on every qualifying pair and every
//! degree exceeds `δ` times the opposite side is reported as `δ*` (as a
//! supremum: the strict inequalities hold for every `δ < δ*`).
//!
//! All values are exact rationals. Exact results enumerate every row subset
//! of the shorter side; sampled results look at a seeded random selection of
//! pairs and are lower bounds on ε*.

mod bridge;
mod spectral;
pub(crate) mod table;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use bridge::{check_expander_sr_conditions, ExpanderBridgeReport};
pub use spectral::{spectral_gap, SpectralReport};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::rational::{abs_diff, Rational};
use table::{cmp_as_bitmask, exact_pair, exact_table, sampled_pair, sampled_table, ExtremeRef, ExtremeTable};

/// Default largest side enumerated exhaustively.
pub const DEFAULT_EXACT_LIMIT: usize = 14;

/// Hard ceiling on the exact-limit setting.
pub const MAX_EXACT_LIMIT: usize = 30;

pub const DEFAULT_SAMPLES: usize = 4096;

/// A subset pair together with its density and its deviation from the
/// whole-mask density.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetWitness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    #[serde(with = "crate::rational::serde_str")]
    pub subset_density: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub deviation: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Sampled,
}

/// How a verification is carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Full enumeration; fails above the exact limit.
    Exact,
    /// Seeded random subset pairs.
    Sampled { samples: usize, seed: u64 },
    /// Exact up to the limit, sampled beyond.
    Auto { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub strategy: Strategy,
    pub exact_limit: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            strategy: Strategy::Auto { samples: DEFAULT_SAMPLES, seed: 0 },
            exact_limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

impl VerifyOptions {
    pub fn exact() -> Self {
        VerifyOptions { strategy: Strategy::Exact, exact_limit: DEFAULT_EXACT_LIMIT }
    }

    pub fn sampled(samples: usize, seed: u64) -> Self {
        VerifyOptions { strategy: Strategy::Sampled { samples, seed }, exact_limit: DEFAULT_EXACT_LIMIT }
    }

    pub fn auto(samples: usize, seed: u64) -> Self {
        VerifyOptions { strategy: Strategy::Auto { samples, seed }, exact_limit: DEFAULT_EXACT_LIMIT }
    }

    pub fn with_exact_limit(mut self, limit: usize) -> Self {
        self.exact_limit = limit;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub rows: usize,
    pub cols: usize,
    pub edges: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub density: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub epsilon_star: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub delta_star: Rational,
    pub min_row_degree: usize,
    pub min_col_degree: usize,
    pub method: Method,
    pub sample_count: usize,
    pub worst_witness: Option<SubsetWitness>,
    /// `None` for the all-zero mask, whose spectrum is undefined.
    pub spectral_gap: Option<f64>,
    pub second_singular: Option<f64>,
}

/// Result of a strict (ε,δ)-balance check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperRegularCheck {
    pub holds: bool,
    pub method: Method,
    pub violation: Option<Violation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Row,
    Col,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `deg(v) > δ |opposite side|` fails.
    Degree {
        side: Side,
        index: usize,
        degree: usize,
        #[serde(with = "crate::rational::serde_str")]
        bound: Rational,
    },
    /// `|d(X,Y) - d(Q)| < ε` fails for a qualifying pair.
    Regularity { witness: SubsetWitness },
    /// `e(X,Y) > δ |X||Y|` fails for a qualifying pair.
    SubsetDensity { witness: SubsetWitness },
}

/// `e / (rows * cols)`.
pub fn density(mask: &BinaryMask) -> Rational {
    mask.density()
}

/// `e(X, Y) / (|X||Y|)` for explicit index sets (duplicates ignored).
pub fn subset_density(mask: &BinaryMask, rows: &[usize], cols: &[usize]) -> Result<Rational> {
    let mut rows = rows.to_vec();
    let mut cols = cols.to_vec();
    rows.sort_unstable();
    rows.dedup();
    cols.sort_unstable();
    cols.dedup();
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::arg("subset density needs non-empty row and column subsets"));
    }
    if let Some(&i) = rows.iter().find(|&&i| i >= mask.rows()) {
        return Err(Error::arg(format!("row index {i} out of range")));
    }
    if let Some(&j) = cols.iter().find(|&&j| j >= mask.cols()) {
        return Err(Error::arg(format!("column index {j} out of range")));
    }
    let e = table::edges_between(mask, &rows, &cols);
    Ok(Rational::new(e as i64, (rows.len() * cols.len()) as i64))
}

/// The `(rows + cols)`-sided symmetric adjacency `[[0, Q], [Qᵀ, 0]]`.
pub fn to_adjacency(mask: &BinaryMask) -> BinaryMask {
    let (r, c) = (mask.rows(), mask.cols());
    let mut adj = BinaryMask::zeros(r + c, r + c);
    for (i, j) in mask.edges() {
        adj.set(i, r + j, true);
        adj.set(r + j, i, true);
    }
    adj
}

/// The extreme table in the orientation it was built, and how to map it
/// back.
struct Analysis<'a> {
    mask: &'a BinaryMask,
    table: ExtremeTable,
    source: Source,
}

enum Source {
    /// Enumerated over rows of the mask itself.
    Exact,
    /// Enumerated over rows of the transpose.
    ExactTransposed(BinaryMask),
    Sampled { seed: u64, samples: usize },
}

impl<'a> Analysis<'a> {
    fn new(mask: &'a BinaryMask, options: &VerifyOptions) -> Result<Self> {
        if options.exact_limit > MAX_EXACT_LIMIT {
            return Err(Error::arg(format!(
                "exact limit {} exceeds the ceiling {MAX_EXACT_LIMIT}",
                options.exact_limit
            )));
        }
        let short = mask.rows().min(mask.cols());
        let exact = match options.strategy {
            Strategy::Exact => {
                if short > options.exact_limit {
                    return Err(Error::TooLarge { side: short, limit: options.exact_limit });
                }
                true
            }
            Strategy::Sampled { .. } => false,
            Strategy::Auto { .. } => short <= options.exact_limit,
        };
        if exact {
            if mask.rows() <= mask.cols() {
                Ok(Analysis { mask, table: exact_table(mask), source: Source::Exact })
            } else {
                let t = mask.transpose();
                Ok(Analysis { mask, table: exact_table(&t), source: Source::ExactTransposed(t) })
            }
        } else {
            let (samples, seed) = match options.strategy {
                Strategy::Sampled { samples, seed } | Strategy::Auto { samples, seed } => (samples, seed),
                Strategy::Exact => unreachable!(),
            };
            if samples == 0 {
                return Err(Error::arg("sampled verification needs at least one sample"));
            }
            Ok(Analysis { mask, table: sampled_table(mask, samples, seed), source: Source::Sampled { seed, samples } })
        }
    }

    fn method(&self) -> Method {
        match self.source {
            Source::Sampled { .. } => Method::Sampled,
            _ => Method::Exact,
        }
    }

    fn sample_count(&self) -> usize {
        match self.source {
            Source::Sampled { samples, .. } => samples,
            _ => 0,
        }
    }

    /// Concrete `(rows, cols)` in mask coordinates.
    fn pair(&self, x: &ExtremeRef) -> (Vec<usize>, Vec<usize>) {
        match &self.source {
            Source::Exact => exact_pair(self.mask, x.tag, x.b, x.which),
            Source::ExactTransposed(t) => {
                let (cols, rows) = exact_pair(t, x.tag, x.b, x.which);
                (rows, cols)
            }
            Source::Sampled { seed, .. } => sampled_pair(self.mask, *seed, x.tag),
        }
    }

    /// Tie-break: lowest tag first, then lowest pair by bitmask order.
    fn cmp_refs(&self, l: &ExtremeRef, r: &ExtremeRef) -> Ordering {
        l.tag.cmp(&r.tag).then_with(|| {
            let (lx, ly) = self.pair(l);
            let (rx, ry) = self.pair(r);
            match self.source {
                Source::ExactTransposed(_) => cmp_as_bitmask(&ly, &ry).then_with(|| cmp_as_bitmask(&lx, &rx)),
                _ => cmp_as_bitmask(&lx, &rx).then_with(|| cmp_as_bitmask(&ly, &ry)),
            }
        })
    }

    fn witness(&self, x: &ExtremeRef) -> SubsetWitness {
        let (rows, cols) = self.pair(x);
        let subset_density = Rational::new(x.e as i64, (rows.len() * cols.len()) as i64);
        SubsetWitness { rows, cols, subset_density, deviation: abs_diff(subset_density, self.mask.density()) }
    }

    fn epsilon_star(&self) -> (Rational, Option<SubsetWitness>) {
        let eps = self.table.epsilon_star();
        let forcing = self.table.forcing_extreme(eps, |l, r| self.cmp_refs(l, r));
        (eps, forcing.map(|x| self.witness(&x)))
    }

    fn degree_delta(&self) -> Rational {
        let (r, c) = (self.mask.rows() as i64, self.mask.cols() as i64);
        let row = Rational::new(self.mask.min_row_degree() as i64, c);
        let col = Rational::new(self.mask.min_col_degree() as i64, r);
        row.min(col)
    }

    fn delta_star(&self, eps: Rational) -> Rational {
        let d = self.degree_delta();
        match self.table.min_qualifying_density(eps, |l, r| self.cmp_refs(l, r)) {
            Some((sub, _)) => d.min(sub),
            None => d,
        }
    }

    fn check(&self, eps: Rational, delta: Rational) -> SuperRegularCheck {
        let method = self.method();
        let fail = |v| SuperRegularCheck { holds: false, method, violation: Some(v) };
        let (r, c) = (self.mask.rows() as i64, self.mask.cols() as i64);
        let row_bound = delta * c;
        for (i, d) in self.mask.row_degrees().into_iter().enumerate() {
            if Rational::from_integer(d as i64) <= row_bound {
                return fail(Violation::Degree { side: Side::Row, index: i, degree: d, bound: row_bound });
            }
        }
        let col_bound = delta * r;
        for (j, d) in self.mask.col_degrees().into_iter().enumerate() {
            if Rational::from_integer(d as i64) <= col_bound {
                return fail(Violation::Degree { side: Side::Col, index: j, degree: d, bound: col_bound });
            }
        }
        let cmp = |l: &ExtremeRef, r: &ExtremeRef| self.cmp_refs(l, r);
        if let Some((dev, x)) = self.table.max_qualifying_deviation(eps, cmp) {
            if dev >= eps {
                return fail(Violation::Regularity { witness: self.witness(&x) });
            }
        }
        if let Some((sub, x)) = self.table.min_qualifying_density(eps, cmp) {
            if sub <= delta {
                return fail(Violation::SubsetDensity { witness: self.witness(&x) });
            }
        }
        SuperRegularCheck { holds: true, method, violation: None }
    }
}

/// Exact ε* with the pair that forces it.
///
/// The witness is the worst-deviation pair among those with
/// `|X| >= ε*|A|`, `|Y| >= ε*|B|`; ties go to the lowest `(X, Y)` in
/// bitmask order. Enumeration runs over the shorter side, which must not
/// exceed `exact_limit`.
pub fn epsilon_star_exact(mask: &BinaryMask, exact_limit: usize) -> Result<(Rational, SubsetWitness)> {
    let a = Analysis::new(mask, &VerifyOptions::exact().with_exact_limit(exact_limit))?;
    let (eps, w) = a.epsilon_star();
    Ok((eps, w.expect("exact enumeration always has a forcing pair")))
}

/// ε* restricted to `samples` seeded random pairs; a lower bound on the
/// exact value.
pub fn epsilon_star_sampled(mask: &BinaryMask, samples: usize, seed: u64) -> Result<(Rational, SubsetWitness)> {
    let a = Analysis::new(mask, &VerifyOptions::sampled(samples, seed))?;
    let (eps, w) = a.epsilon_star();
    Ok((eps, w.expect("at least one sample was drawn")))
}

/// δ* at a given ε.
pub fn delta_star(mask: &BinaryMask, epsilon: Rational, options: &VerifyOptions) -> Result<Rational> {
    Ok(Analysis::new(mask, options)?.delta_star(epsilon))
}

/// Strict (ε,δ)-balance check.
///
/// Degrees are checked first, then `|d(X,Y) - d(Q)| < ε` and
/// `e(X,Y) > δ|X||Y|` over the pairs with `|X| > ε|A|`, `|Y| > ε|B|`. The
/// first failing condition is reported with its witness.
pub fn check_super_regular(
    mask: &BinaryMask,
    epsilon: Rational,
    delta: Rational,
    options: &VerifyOptions,
) -> Result<SuperRegularCheck> {
    Ok(Analysis::new(mask, options)?.check(epsilon, delta))
}

/// Density, ε*, δ*(ε*), degrees and spectral gap from one enumeration.
pub fn regularity_report(mask: &BinaryMask, options: &VerifyOptions) -> Result<RegularityReport> {
    let a = Analysis::new(mask, options)?;
    let (eps, worst_witness) = a.epsilon_star();
    let delta = a.delta_star(eps);
    let spectral = spectral_gap(mask).ok();
    Ok(RegularityReport {
        rows: mask.rows(),
        cols: mask.cols(),
        edges: mask.edge_count(),
        density: mask.density(),
        epsilon_star: eps,
        delta_star: delta,
        min_row_degree: mask.min_row_degree(),
        min_col_degree: mask.min_col_degree(),
        method: a.method(),
        sample_count: a.sample_count(),
        worst_witness,
        spectral_gap: spectral.as_ref().map(|s| s.gamma),
        second_singular: spectral.as_ref().map(|s| s.lambda2),
    })
}

/// Whether ε is feasible: every pair with `|X| > ε|A|`, `|Y| > ε|B|`
/// deviates by at most ε.
pub fn epsilon_feasible(mask: &BinaryMask, epsilon: Rational, options: &VerifyOptions) -> Result<bool> {
    Ok(Analysis::new(mask, options)?.table.feasible(epsilon))
}
