//! Rectangular layers by column-wise concatenation, seeded node
//! permutations, and whole-network stacking.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::matrix::{densify_to, generate_base, BaseMatrixSpec};
use crate::rational::Rational;
use crate::verify::{regularity_report, RegularityReport, VerifyOptions};

/// Result of [`ccat`]: the concatenated mask and its degree-derived δ.
#[derive(Clone, Debug, PartialEq)]
pub struct Concatenated {
    pub mask: BinaryMask,
    /// `min(δ_U, δ_V)` where `δ_X = min(minrowdeg/cols, mincoldeg/rows)`.
    pub delta: Rational,
    /// Set when the row:column degree ratios differ and δ was degraded.
    pub warning: Option<String>,
}

fn degree_delta(m: &BinaryMask) -> Rational {
    Rational::new(m.min_row_degree() as i64, m.cols() as i64).min(Rational::new(m.min_col_degree() as i64, m.rows() as i64))
}

/// Appends the columns of `v` after those of `u`.
///
/// Requires equal row counts and equal densities. Labels survive when both
/// inputs carry them.
pub fn ccat(u: &BinaryMask, v: &BinaryMask) -> Result<Concatenated> {
    if u.rows() != v.rows() {
        return Err(Error::arg(format!("row counts differ: {} vs {}", u.rows(), v.rows())));
    }
    let (du, dv) = (u.density(), v.density());
    if du != dv {
        return Err(Error::precondition(format!("densities differ: d(U) = {du}, d(V) = {dv}")));
    }
    let mut out = BinaryMask::try_zeros(u.rows(), u.cols() + v.cols())?;
    let labeled = u.has_labels() && v.has_labels();
    for (part, shift) in [(u, 0), (v, u.cols())] {
        for (i, j) in part.edges() {
            match part.label(i, j).filter(|_| labeled) {
                Some(l) => out.set_labeled(i, j + shift, l),
                None => out.set(i, j + shift, true),
            }
        }
    }
    // deg(A):deg(B) compared by cross-multiplication
    let (ur, uc) = (u.min_row_degree(), u.min_col_degree());
    let (vr, vc) = (v.min_row_degree(), v.min_col_degree());
    let warning = (ur * vc != vr * uc).then(|| {
        format!("degree ratios differ (U {ur}:{uc}, V {vr}:{vc}); delta degraded to the minimum of the inputs")
    });
    Ok(Concatenated { mask: out, delta: degree_delta(u).min(degree_delta(v)), warning })
}

/// Rows of `v` below those of `u` (the transpose of [`ccat`]).
pub fn vcat(u: &BinaryMask, v: &BinaryMask) -> Result<Concatenated> {
    let c = ccat(&u.transpose(), &v.transpose())?;
    Ok(Concatenated { mask: c.mask.transpose(), ..c })
}

/// A mask under independent row and column relabellings.
///
/// The effective entry `(i, j)` is `base[row_perm[i]][col_perm[j]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutedMask {
    pub base: BinaryMask,
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    pub seed: u64,
}

impl PermutedMask {
    pub fn identity(base: BinaryMask) -> Self {
        let row_perm = (0..base.rows()).collect();
        let col_perm = (0..base.cols()).collect();
        PermutedMask { base, row_perm, col_perm, seed: 0 }
    }

    /// Checks that both permutations are bijections of the right length.
    pub fn validate(&self) -> Result<()> {
        fn is_perm(p: &[usize], n: usize) -> bool {
            let mut seen = vec![false; n];
            p.len() == n && p.iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
        }
        if !is_perm(&self.row_perm, self.base.rows()) {
            return Err(Error::arg("row permutation is not a bijection on the rows"));
        }
        if !is_perm(&self.col_perm, self.base.cols()) {
            return Err(Error::arg("column permutation is not a bijection on the columns"));
        }
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.base.get(self.row_perm[i], self.col_perm[j])
    }

    /// The permuted mask, labels carried along.
    pub fn effective(&self) -> BinaryMask {
        let mut inv_r = vec![0; self.row_perm.len()];
        for (i, &p) in self.row_perm.iter().enumerate() {
            inv_r[p] = i;
        }
        let mut inv_c = vec![0; self.col_perm.len()];
        for (j, &p) in self.col_perm.iter().enumerate() {
            inv_c[p] = j;
        }
        let mut out = BinaryMask::zeros(self.base.rows(), self.base.cols());
        for (i, j) in self.base.edges() {
            match self.base.label(i, j) {
                Some(l) => out.set_labeled(inv_r[i], inv_c[j], l),
                None => out.set(inv_r[i], inv_c[j], true),
            }
        }
        out
    }
}

/// Seeded Fisher–Yates over `0..n` using ChaCha8.
fn fisher_yates(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Independent row and column permutations drawn from `seed`. Seed 0 is
/// reserved and yields the identity.
pub fn permute(mask: &BinaryMask, seed: u64) -> PermutedMask {
    if seed == 0 {
        return PermutedMask::identity(mask.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let row_perm = fisher_yates(&mut rng, mask.rows());
    let col_perm = fisher_yates(&mut rng, mask.cols());
    PermutedMask { base: mask.clone(), row_perm, col_perm, seed }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for layer `index` of a network seeded with `seed`. A zero network
/// seed stays zero so whole networks can be built unpermuted.
pub fn layer_seed(seed: u64, index: usize) -> u64 {
    if seed == 0 {
        return 0;
    }
    match mix64(seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))) {
        0 => 1,
        s => s,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_size: usize,
    pub out_size: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub target_density: Rational,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// One layer per consecutive pair of `sizes`, all at `density`, with
    /// per-layer seeds from [`layer_seed`].
    pub fn from_sizes(sizes: &[usize], density: Rational, seed: u64) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::arg("a network needs at least two layer sizes"));
        }
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| LayerSpec { in_size: w[0], out_size: w[1], target_density: density, seed: layer_seed(seed, i) })
            .collect();
        Ok(NetworkSpec { layers })
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::arg("network has no layers"));
        }
        for (i, w) in self.layers.windows(2).enumerate() {
            if w[0].out_size != w[1].in_size {
                return Err(Error::arg(format!(
                    "layer {i} ends with {} nodes but layer {} starts with {}",
                    w[0].out_size,
                    i + 1,
                    w[1].in_size
                )));
            }
        }
        Ok(())
    }
}

fn nearest_shapes(rows: usize, cols: usize) -> String {
    let short = rows.min(cols).max(1);
    let lo = 1usize << (usize::BITS - 1 - short.leading_zeros());
    let mut out = Vec::new();
    for side in [lo, lo * 2] {
        let long = rows.max(cols);
        let t = ((long + side / 2) / side).max(1);
        let shape = if rows <= cols { (side, t * side) } else { (t * side, side) };
        let s = format!("{}x{}", shape.0, shape.1);
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out.join(", ")
}

/// Builds one layer: square power-of-two blocks (side = the shorter
/// dimension) densified to the target, tiled along the longer dimension, then
/// permuted with the layer seed.
///
/// The mask has `in_size` rows and `out_size` columns.
pub fn build_layer(spec: &LayerSpec) -> Result<PermutedMask> {
    let (rows, cols) = (spec.in_size, spec.out_size);
    let zero = Rational::from_integer(0);
    if spec.target_density <= zero || spec.target_density > Rational::from_integer(1) {
        return Err(Error::arg(format!("target density {} is not in (0, 1]", spec.target_density)));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::arg("layer sizes must be positive"));
    }
    let side = rows.min(cols);
    let long = rows.max(cols);
    let unsupported = |reason: &str| Error::UnsupportedShape {
        rows,
        cols,
        reason: reason.to_string(),
        nearest: nearest_shapes(rows, cols),
    };
    if !side.is_power_of_two() {
        return Err(unsupported("the shorter side is not a power of two"));
    }
    if long % side != 0 {
        return Err(unsupported("the longer side is not a multiple of the shorter side"));
    }
    let k = side.trailing_zeros();
    let start = generate_base(&BaseMatrixSpec::new(k, [1])?);
    let block = if spec.target_density > start.density() { densify_to(&start, spec.target_density)? } else { start };
    let mut mask = block.clone();
    for _ in 1..long / side {
        mask = if cols >= rows { ccat(&mask, &block)?.mask } else { vcat(&mask, &block)?.mask };
    }
    Ok(permute(&mask, spec.seed))
}

/// A built layer with its regularity report.
#[derive(Clone, Debug, PartialEq)]
pub struct BuiltLayer {
    pub mask: PermutedMask,
    pub report: RegularityReport,
}

/// Builds every layer independently (in parallel) and reports on each.
pub fn build_network(spec: &NetworkSpec, options: &VerifyOptions) -> Result<Vec<BuiltLayer>> {
    spec.validate()?;
    crate::parallel::install(|| {
        spec.layers
            .par_iter()
            .enumerate()
            .map(|(index, layer)| {
                let wrap = |e: Error| Error::Layer { index, source: Box::new(e) };
                let mask = build_layer(layer).map_err(wrap)?;
                let report = regularity_report(&mask.effective(), options).map_err(wrap)?;
                Ok(BuiltLayer { mask, report })
            })
            .collect()
    })
}
