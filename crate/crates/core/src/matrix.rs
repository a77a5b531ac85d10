//! Base-matrix algebra: full diagonals, the base matrices `A(k, s)`, block
//! addition and density modulation.
//!
//! A base matrix of level `k` has side `m = 2^k` and is the union of up to
//! four wrap-around diagonals. Diagonal `j` starts in column 0 at row
//! `off(j)`, with `off = [0, m/4, m/2, 3m/4]` for `k >= 2`. Levels 0 and 1 are
//! too small for quarter offsets and only carry the diagonals that exist
//! there.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, EdgeLabel};
use crate::rational::{round_half_up, Rational};

/// Largest supported level; `2^14` per side.
pub const MAX_LEVEL: u32 = 14;

/// Identifies the base matrix `A(k, s)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BaseMatrixSpec {
    level: u32,
    diagonals: BTreeSet<u8>,
}

impl BaseMatrixSpec {
    /// Validates `level` and the diagonal indices.
    ///
    /// Level 0 admits only diagonal 1. Level 1 admits diagonal 1 (offset 0)
    /// and the wrapped diagonal at offset 1, which may be written either as 2
    /// or as 3; the two names cover the same cells and cannot be combined.
    pub fn new(level: u32, diagonals: impl IntoIterator<Item = u8>) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::arg(format!("level {level} exceeds the maximum {MAX_LEVEL}")));
        }
        let diagonals: BTreeSet<u8> = diagonals.into_iter().collect();
        if diagonals.is_empty() {
            return Err(Error::arg("diagonal set must not be empty"));
        }
        for &j in &diagonals {
            if !(1..=4).contains(&j) {
                return Err(Error::arg(format!("diagonal index {j} is not in 1..=4")));
            }
            if diagonal_offset(level, j).is_none() {
                return Err(Error::arg(format!(
                    "diagonal {j} does not exist at level {level} (side {})",
                    1usize << level
                )));
            }
        }
        if level == 1 && diagonals.contains(&2) && diagonals.contains(&3) {
            return Err(Error::arg("diagonals 2 and 3 coincide at level 1"));
        }
        Ok(BaseMatrixSpec { level, diagonals })
    }

    /// `A_k`: every diagonal that exists at this level.
    pub fn full(level: u32) -> Result<Self> {
        match level {
            0 => Self::new(0, [1]),
            1 => Self::new(1, [1, 2]),
            _ => Self::new(level, [1, 2, 3, 4]),
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn side(&self) -> usize {
        1 << self.level
    }

    pub fn diagonals(&self) -> impl Iterator<Item = u8> + '_ {
        self.diagonals.iter().copied()
    }

    /// `(diagonal index, row offset)` in construction order.
    pub fn offsets(&self) -> Vec<(u8, usize)> {
        self.diagonals
            .iter()
            .map(|&j| (j, diagonal_offset(self.level, j).expect("validated")))
            .collect()
    }
}

impl fmt::Display for BaseMatrixSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.diagonals.iter().map(|j| j.to_string()).collect();
        write!(f, "A({}, {{{}}})", self.level, s.join(","))
    }
}

/// Row offset of diagonal `j` at `level`, or `None` when that diagonal does
/// not exist at this size.
pub fn diagonal_offset(level: u32, j: u8) -> Option<usize> {
    let m = 1usize << level;
    match (level, j) {
        (_, 1) => Some(0),
        (0, _) => None,
        (1, 2 | 3) => Some(1),
        (1, _) => None,
        (_, 2..=4) => Some((j as usize - 1) * m / 4),
        _ => None,
    }
}

/// A wrap-around diagonal of an `m x m` matrix: cell `(i, j)` is covered iff
/// `i ≡ j + offset (mod m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FullDiagonal {
    pub m: usize,
    pub offset: usize,
}

impl FullDiagonal {
    pub fn new(m: usize, offset: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::arg("diagonal side must be positive"));
        }
        if offset >= m {
            return Err(Error::arg(format!("offset {offset} not in [0, {m})")));
        }
        Ok(FullDiagonal { m, offset })
    }

    /// The `m` covered cells, ordered by column.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.m).map(move |j| ((j + self.offset) % self.m, j))
    }
}

pub fn full_diagonal(m: usize, offset: usize) -> Result<BinaryMask> {
    let d = FullDiagonal::new(m, offset)?;
    let mut mask = BinaryMask::zeros(m, m);
    for (i, j) in d.cells() {
        mask.set(i, j, true);
    }
    Ok(mask)
}

/// Union of the spec's diagonals, each edge labelled `(pass 0, diagonal j)`.
pub fn generate_base(spec: &BaseMatrixSpec) -> BinaryMask {
    let m = spec.side();
    let mut mask = BinaryMask::zeros(m, m);
    mask.enable_labels();
    for (j, offset) in spec.offsets() {
        for (r, c) in (FullDiagonal { m, offset }).cells() {
            mask.set_labeled(r, c, EdgeLabel::new(0, j as u16));
        }
    }
    mask
}

/// Bijection between the cells of a `2^r x 2^r` grid and the aligned
/// `2^(k-r)`-sided blocks of a `2^k x 2^k` matrix.
///
/// Cell `(i, j)` maps to block row `i`, block column `j`. The pairs are
/// listed in diagonal construction order over the grid (see
/// [`diagonal_order`]), row-major within each diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockBijection {
    pub grid: usize,
    pub block_side: usize,
    pub pairs: Vec<((usize, usize), (usize, usize))>,
}

impl BlockBijection {
    /// Top-left matrix coordinate of the block that `cell` maps to.
    pub fn block_origin(&self, cell: (usize, usize)) -> (usize, usize) {
        (cell.0 * self.block_side, cell.1 * self.block_side)
    }
}

pub fn block_bijection(k: u32, r: u32) -> Result<BlockBijection> {
    if r >= k {
        return Err(Error::arg(format!("addend level {r} must be below target level {k}")));
    }
    if k > MAX_LEVEL {
        return Err(Error::arg(format!("level {k} exceeds the maximum {MAX_LEVEL}")));
    }
    Ok(grid_bijection(k, r))
}

/// As [`block_bijection`] but also admits `r == k` (blocks of side 1).
fn grid_bijection(k: u32, r: u32) -> BlockBijection {
    let grid = 1usize << r;
    let block_side = 1usize << (k - r);
    let mut pairs = Vec::with_capacity(grid * grid);
    for step in diagonal_order(grid) {
        let mut cells: Vec<(usize, usize)> = (FullDiagonal { m: grid, offset: step.offset }).cells().collect();
        cells.sort_unstable();
        pairs.extend(cells.into_iter().map(|c| (c, c)));
    }
    BlockBijection { grid, block_side, pairs }
}

/// One step of the recursive diagonal order: the full diagonal at `offset`,
/// introduced at refinement `depth` as slot `diagonal` of the level
/// `k - depth` pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiagonalStep {
    pub offset: usize,
    pub depth: u32,
    pub diagonal: u8,
}

/// Every full diagonal of an `m x m` matrix (`m` a power of two), each exactly
/// once, in construction order.
///
/// Depth 0 is the level-`k` pattern `0, m/4, m/2, 3m/4`. Depth `t` replays the
/// pattern of the level `k - t` matrix of side `s = m / 2^t`; a diagonal at
/// offset `o` there, copied into every `s`-block, covers the full diagonals
/// `o, o + s, o + 2s, ...` of the whole matrix. Offsets already emitted are
/// skipped.
pub fn diagonal_order(m: usize) -> Vec<DiagonalStep> {
    assert!(m.is_power_of_two(), "side {m} is not a power of two");
    let k = m.trailing_zeros();
    let mut seen = vec![false; m];
    let mut order = Vec::with_capacity(m);
    for depth in 0..=k {
        let s = m >> depth;
        let level = k - depth;
        for j in 1..=4u8 {
            if level == 1 && j == 3 {
                continue;
            }
            let Some(o) = diagonal_offset(level, j) else { continue };
            for t in 0..m / s {
                let offset = o + t * s;
                if !seen[offset] {
                    seen[offset] = true;
                    order.push(DiagonalStep { offset, depth, diagonal: j });
                }
            }
        }
    }
    debug_assert_eq!(order.len(), m);
    order
}

fn level_of(mask: &BinaryMask) -> Result<u32> {
    let m = mask.rows();
    if !mask.is_square() || !m.is_power_of_two() {
        return Err(Error::arg(format!(
            "expected a square power-of-two mask, got {}x{}",
            mask.rows(),
            mask.cols()
        )));
    }
    Ok(m.trailing_zeros())
}

fn next_pass(mask: &BinaryMask) -> u16 {
    mask.labels().map(|(_, l)| l.pass + 1).max().unwrap_or(1).max(1)
}

/// Whether the `side`-block at `origin` contains a complete wrap-around
/// diagonal of its own (one target edge in every block row and column along
/// some local offset).
fn block_has_true_diagonal(mask: &BinaryMask, origin: (usize, usize), side: usize) -> bool {
    (0..side).any(|o| (0..side).all(|t| mask.get(origin.0 + (t + o) % side, origin.1 + t)))
}

/// Adds `A(q, s)` to a level-`k` target (`q < k`).
///
/// The target is viewed as a `2^(k-q)` grid of `2^q` blocks, paired with the
/// cells of `A(k-q)` by [`block_bijection`]. A copy of the addend is placed in
/// every block that already holds a complete diagonal of block size. Cells
/// that were already set keep their label; new cells get the next pass index.
pub fn add(target: &BinaryMask, addend: &BaseMatrixSpec) -> Result<BinaryMask> {
    let k = level_of(target)?;
    let q = addend.level();
    if q >= k {
        return Err(Error::arg(format!("addend level {q} must be below target level {k}")));
    }
    if !target.has_labels() {
        return Err(Error::precondition(
            "addition target must carry diagonal labels (a union of full diagonals)",
        ));
    }
    let bijection = grid_bijection(k, k - q);
    let copy = generate_base(addend);
    let pass = next_pass(target);
    let mut out = target.clone();
    for &(cell, _) in &bijection.pairs {
        let origin = bijection.block_origin(cell);
        if !block_has_true_diagonal(target, origin, bijection.block_side) {
            continue;
        }
        for ((i, j), label) in copy.labels() {
            let (r, c) = (origin.0 + i, origin.1 + j);
            if !out.get(r, c) {
                out.set_labeled(r, c, EdgeLabel::new(pass, label.diagonal));
            }
        }
    }
    Ok(out)
}

/// Adds whole full diagonals in [`diagonal_order`] until the edge count
/// reaches `round(target * m) * m`.
///
/// Each added diagonal moves the density of a union-of-diagonals mask by
/// exactly `1/m`. Diagonals from the level-`k` pattern are labelled
/// `(0, j)`, so densifying `A(k, {1})` to density `1/2` reproduces `A(k)`
/// exactly; refinement diagonals are labelled `(depth, j)`.
pub fn densify_to(mask: &BinaryMask, target: Rational) -> Result<BinaryMask> {
    let k = level_of(mask)?;
    let m = 1usize << k;
    if target > Rational::from_integer(1) {
        return Err(Error::arg(format!("target density {target} exceeds 1")));
    }
    let current = mask.density();
    if target < current {
        return Err(Error::arg(format!(
            "target density {target} is below the current density {current}; removing edges is not supported"
        )));
    }
    let diagonals = round_half_up(target * Rational::from_integer(m as i64)).clamp(0, m as i64) as usize;
    let goal = diagonals * m;
    let mut out = mask.clone();
    let mut edges = out.edge_count();
    for step in diagonal_order(m) {
        if edges >= goal {
            break;
        }
        let d = FullDiagonal { m, offset: step.offset };
        if d.cells().all(|(i, j)| out.get(i, j)) {
            continue;
        }
        let label = EdgeLabel::new(step.depth as u16, step.diagonal as u16);
        for (i, j) in d.cells() {
            if !out.get(i, j) {
                edges += 1;
                if mask.has_labels() {
                    out.set_labeled(i, j, label);
                } else {
                    out.set(i, j, true);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn spec(k: u32, s: &[u8]) -> BaseMatrixSpec {
        BaseMatrixSpec::new(k, s.iter().copied()).unwrap()
    }

    #[test]
    fn full_diagonal_examples() {
        assert_eq!(full_diagonal(1, 0).unwrap().to_rows(), vec![vec![1]]);

        let d = full_diagonal(4, 1).unwrap();
        assert_eq!(d.edges().collect::<Vec<_>>(), vec![(0, 3), (1, 0), (2, 1), (3, 2)]);

        let d = full_diagonal(4, 2).unwrap();
        let mut cells: Vec<_> = d.edges().collect();
        cells.sort_by_key(|&(i, j)| (j, i));
        assert_eq!(cells, vec![(2, 0), (3, 1), (0, 2), (1, 3)]);
        assert!(d.row_degrees().iter().chain(&d.col_degrees()).all(|&x| x == 1));

        assert!(full_diagonal(4, 4).is_err());
        assert!(full_diagonal(0, 0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(BaseMatrixSpec::new(0, [1]).is_ok());
        assert!(BaseMatrixSpec::new(0, [3]).is_err());
        assert!(BaseMatrixSpec::new(0, [2]).is_err());
        assert!(BaseMatrixSpec::new(1, [1, 3]).is_ok());
        assert!(BaseMatrixSpec::new(1, [1, 2]).is_ok());
        assert!(BaseMatrixSpec::new(1, [2, 3]).is_err());
        assert!(BaseMatrixSpec::new(1, [4]).is_err());
        assert!(BaseMatrixSpec::new(2, [5]).is_err());
        assert!(BaseMatrixSpec::new(2, []).is_err());
        assert!(BaseMatrixSpec::new(MAX_LEVEL + 1, [1]).is_err());
    }

    #[test]
    fn base_examples() {
        assert_eq!(generate_base(&spec(0, &[1])).to_rows(), vec![vec![1]]);
        assert_eq!(generate_base(&spec(2, &[1, 2, 3, 4])).unlabeled(), BinaryMask::ones(4, 4));

        let a = generate_base(&spec(2, &[1, 3]));
        assert_eq!(a.to_rows(), vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1], vec![1, 0, 1, 0], vec![0, 1, 0, 1]]);
        assert!([1, 3].iter().all(|&i| [0, 2].iter().all(|&j| !a.get(i, j))));

        let a1 = generate_base(&spec(1, &[1, 3]));
        assert_eq!(a1.unlabeled(), BinaryMask::ones(2, 2));
        assert_eq!(a1.label(1, 0), Some(EdgeLabel::new(0, 3)));
    }

    #[test]
    fn base_degrees_and_density() {
        for k in 0..=6 {
            for bits in 1u8..16 {
                let s: Vec<u8> = (1..=4).filter(|j| bits & (1 << (j - 1)) != 0).collect();
                let Ok(spec) = BaseMatrixSpec::new(k, s.iter().copied()) else { continue };
                let a = generate_base(&spec);
                let m = spec.side();
                assert_eq!(a.edge_count(), s.len() * m, "{spec}");
                assert_eq!(a.density(), ratio(s.len() as i64, m as i64));
                assert!(a.row_degrees().iter().all(|&d| d == s.len()));
                assert!(a.col_degrees().iter().all(|&d| d == s.len()));
            }
        }
    }

    #[test]
    fn bijection_examples() {
        let b = block_bijection(1, 0).unwrap();
        assert_eq!((b.grid, b.block_side), (1, 2));
        assert_eq!(b.pairs, vec![((0, 0), (0, 0))]);

        let b = block_bijection(3, 1).unwrap();
        assert_eq!((b.grid, b.block_side), (2, 4));
        assert_eq!(b.pairs, vec![((0, 0), (0, 0)), ((1, 1), (1, 1)), ((0, 1), (0, 1)), ((1, 0), (1, 0))]);

        let b = block_bijection(4, 3).unwrap();
        assert_eq!(b.block_side, 2);
        let targets: BTreeSet<_> = b.pairs.iter().map(|p| p.1).collect();
        let sources: BTreeSet<_> = b.pairs.iter().map(|p| p.0).collect();
        assert_eq!((b.pairs.len(), targets.len(), sources.len()), (64, 64, 64));
        // Main block diagonal first, then the block diagonal at offset 2.
        assert!(b.pairs[..8].iter().all(|&((i, j), _)| i == j));
        assert_eq!(b.pairs[8].0, (0, 6));

        assert!(block_bijection(2, 2).is_err());
        assert!(block_bijection(2, 3).is_err());
    }

    #[test]
    fn diagonal_order_covers_everything() {
        let offsets = |m| diagonal_order(m).iter().map(|s| s.offset).collect::<Vec<_>>();
        assert_eq!(offsets(1), vec![0]);
        assert_eq!(offsets(2), vec![0, 1]);
        assert_eq!(offsets(4), vec![0, 1, 2, 3]);
        assert_eq!(offsets(8), vec![0, 2, 4, 6, 1, 5, 3, 7]);
        for k in 0..10 {
            let mut o = offsets(1 << k);
            o.sort_unstable();
            assert_eq!(o, (0..1 << k).collect::<Vec<_>>());
        }
    }

    #[test]
    fn addition_examples() {
        let t = generate_base(&spec(1, &[1, 2]));
        assert_eq!(add(&t, &spec(0, &[1])).unwrap(), t);

        let t = generate_base(&spec(2, &[1]));
        let r = add(&t, &spec(1, &[1])).unwrap();
        assert_eq!(r.unlabeled(), t.unlabeled());

        let t = generate_base(&spec(4, &[1, 2]));
        let r = add(&t, &spec(3, &[1, 2])).unwrap();
        assert_eq!(r.edge_count(), 48);
        assert_eq!(r.density(), ratio(3, 16));
        assert!(t.is_subset_of(&r));
        assert!(r.row_degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn addition_errors() {
        let t = generate_base(&spec(2, &[1]));
        assert!(matches!(add(&t, &spec(2, &[1])), Err(Error::Argument(_))));
        assert!(matches!(add(&t.unlabeled(), &spec(1, &[1])), Err(Error::Precondition(_))));
        assert!(add(&BinaryMask::ones(3, 3), &spec(0, &[1])).is_err());
    }

    #[test]
    fn densify_examples() {
        let a = densify_to(&generate_base(&spec(3, &[1])), ratio(1, 2)).unwrap();
        assert_eq!(a, generate_base(&BaseMatrixSpec::full(3).unwrap()));

        let a = generate_base(&spec(2, &[1, 2]));
        assert_eq!(densify_to(&a, ratio(1, 2)).unwrap(), a);

        let a = densify_to(&generate_base(&spec(2, &[1])), ratio(1, 1)).unwrap();
        assert_eq!(a.unlabeled(), BinaryMask::ones(4, 4));

        let err = densify_to(&generate_base(&spec(2, &[1, 2])), ratio(1, 4));
        assert!(matches!(err, Err(Error::Argument(_))));
        assert!(densify_to(&generate_base(&spec(2, &[1])), ratio(5, 4)).is_err());
    }

    #[test]
    fn densify_rounds_to_whole_diagonals() {
        let base = generate_base(&spec(4, &[1]));
        // 0.3 * 16 = 4.8 -> 5 diagonals
        let a = densify_to(&base, ratio(3, 10)).unwrap();
        assert_eq!(a.edge_count(), 5 * 16);
        assert!((a.density() - ratio(3, 10)) <= ratio(1, 16));
    }
}
