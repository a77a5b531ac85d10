//! Per-size extreme edge counts.
//!
//! For every subset-size pair `(a, b)` the table keeps the largest and the
//! smallest `e(X, Y)` over the pairs it has seen with `|X| = a`, `|Y| = b`.
//! Every quantity the verifier reports (ε*, δ*, strict checks, witnesses)
//! is a function of these extremes: the worst deviation for a size pair is
//! attained at one of its two extremes.
//!
//! The exact table is filled by walking all row subsets in Gray-code order.
//! For a fixed `X` the column counts `c_j = |N(j) ∩ X|` determine the best
//! and worst `Y` of every size in one pass over a count histogram.

use std::cmp::Ordering;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::mask::BinaryMask;
use crate::rational::{abs_diff, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Extreme {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Cell {
    pub max_e: u64,
    pub max_tag: u64,
    pub min_e: u64,
    pub min_tag: u64,
}

impl Cell {
    fn new(e: u64, tag: u64) -> Self {
        Cell { max_e: e, max_tag: tag, min_e: e, min_tag: tag }
    }

    fn offer(&mut self, e: u64, tag: u64) {
        if e > self.max_e || (e == self.max_e && tag < self.max_tag) {
            self.max_e = e;
            self.max_tag = tag;
        }
        if e < self.min_e || (e == self.min_e && tag < self.min_tag) {
            self.min_e = e;
            self.min_tag = tag;
        }
    }

    fn merge(&mut self, other: &Cell) {
        self.offer(other.max_e, other.max_tag);
        self.offer(other.min_e, other.min_tag);
    }
}

/// Extremes indexed by `(a, b)`, `1 <= a <= p`, `1 <= b <= q`, in the
/// coordinates of the mask the table was built from.
#[derive(Clone, Debug)]
pub(crate) struct ExtremeTable {
    pub p: usize,
    pub q: usize,
    pub total_edges: u64,
    cells: Vec<Option<Cell>>,
}

/// A concrete extreme: the size pair, which extreme, its edge count and the
/// tag identifying the subset pair that attains it.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ExtremeRef {
    pub a: usize,
    pub b: usize,
    pub which: Extreme,
    pub e: u64,
    pub tag: u64,
}

impl ExtremeTable {
    fn empty(p: usize, q: usize, total_edges: u64) -> Self {
        ExtremeTable { p, q, total_edges, cells: vec![None; p * q] }
    }

    #[inline]
    fn slot(&mut self, a: usize, b: usize) -> &mut Option<Cell> {
        &mut self.cells[(a - 1) * self.q + (b - 1)]
    }

    #[inline]
    fn offer(&mut self, a: usize, b: usize, e: u64, tag: u64) {
        match self.slot(a, b) {
            Some(c) => c.offer(e, tag),
            s @ None => *s = Some(Cell::new(e, tag)),
        }
    }

    fn merge(mut self, other: &ExtremeTable) -> Self {
        for (mine, theirs) in self.cells.iter_mut().zip(&other.cells) {
            match (mine.as_mut(), theirs) {
                (Some(m), Some(t)) => m.merge(t),
                (None, Some(t)) => *mine = Some(*t),
                _ => {}
            }
        }
        self
    }

    pub fn density(&self) -> Rational {
        Rational::new(self.total_edges as i64, (self.p * self.q) as i64)
    }

    pub fn sample_density(&self, a: usize, b: usize, e: u64) -> Rational {
        Rational::new(e as i64, (a * b) as i64)
    }

    pub fn deviation(&self, a: usize, b: usize, e: u64) -> Rational {
        abs_diff(self.sample_density(a, b, e), self.density())
    }

    /// Both extremes of every populated size pair.
    pub fn extremes(&self) -> impl Iterator<Item = ExtremeRef> + '_ {
        self.cells.iter().enumerate().filter_map(|(idx, c)| c.map(|c| (idx, c))).flat_map(move |(idx, c)| {
            let (a, b) = (idx / self.q + 1, idx % self.q + 1);
            [
                ExtremeRef { a, b, which: Extreme::Max, e: c.max_e, tag: c.max_tag },
                ExtremeRef { a, b, which: Extreme::Min, e: c.min_e, tag: c.min_tag },
            ]
        })
    }

    /// Size pair qualifies at `eps` when `a > eps * p` and `b > eps * q`.
    pub fn qualifies_strict(&self, a: usize, b: usize, eps: Rational) -> bool {
        Rational::from_integer(a as i64) > eps * self.p as i64 && Rational::from_integer(b as i64) > eps * self.q as i64
    }

    /// `a >= eps * p` and `b >= eps * q`: the pairs that still qualify for
    /// every threshold just below `eps`.
    pub fn qualifies_at_or_below(&self, a: usize, b: usize, eps: Rational) -> bool {
        Rational::from_integer(a as i64) >= eps * self.p as i64 && Rational::from_integer(b as i64) >= eps * self.q as i64
    }

    /// `eps` is feasible when every qualifying pair deviates by at most `eps`.
    pub fn feasible(&self, eps: Rational) -> bool {
        self.extremes()
            .filter(|x| self.qualifies_strict(x.a, x.b, eps))
            .all(|x| self.deviation(x.a, x.b, x.e) <= eps)
    }

    /// Smallest feasible ε among the deviations and the size thresholds
    /// `t/p`, `t/q`. Feasibility is monotone, so a binary search over the
    /// sorted candidates finds it.
    pub fn epsilon_star(&self) -> Rational {
        let mut candidates: Vec<Rational> = self.extremes().map(|x| self.deviation(x.a, x.b, x.e)).collect();
        candidates.extend((0..=self.p).map(|t| Rational::new(t as i64, self.p as i64)));
        candidates.extend((0..=self.q).map(|t| Rational::new(t as i64, self.q as i64)));
        candidates.sort_unstable();
        candidates.dedup();
        let first_feasible = candidates.partition_point(|&eps| !self.feasible(eps));
        candidates[first_feasible]
    }

    /// The worst-deviation extreme among pairs still qualifying just below
    /// `eps`; ties go to the lowest key under `key_cmp`.
    pub fn forcing_extreme(
        &self,
        eps: Rational,
        mut key_cmp: impl FnMut(&ExtremeRef, &ExtremeRef) -> Ordering,
    ) -> Option<ExtremeRef> {
        let mut best: Option<(Rational, ExtremeRef)> = None;
        for x in self.extremes().filter(|x| self.qualifies_at_or_below(x.a, x.b, eps)) {
            let dev = self.deviation(x.a, x.b, x.e);
            let better = match &best {
                None => true,
                Some((d, b)) => dev > *d || (dev == *d && key_cmp(&x, b) == Ordering::Less),
            };
            if better {
                best = Some((dev, x));
            }
        }
        best.map(|(_, x)| x)
    }

    /// Minimum subset density over size pairs qualifying strictly at `eps`,
    /// with the extreme attaining it.
    pub fn min_qualifying_density(
        &self,
        eps: Rational,
        mut key_cmp: impl FnMut(&ExtremeRef, &ExtremeRef) -> Ordering,
    ) -> Option<(Rational, ExtremeRef)> {
        let mut best: Option<(Rational, ExtremeRef)> = None;
        for x in self.extremes().filter(|x| x.which == Extreme::Min && self.qualifies_strict(x.a, x.b, eps)) {
            let d = self.sample_density(x.a, x.b, x.e);
            let better = match &best {
                None => true,
                Some((bd, b)) => d < *bd || (d == *bd && key_cmp(&x, b) == Ordering::Less),
            };
            if better {
                best = Some((d, x));
            }
        }
        best
    }

    /// Worst deviation among size pairs qualifying strictly at `eps`.
    pub fn max_qualifying_deviation(
        &self,
        eps: Rational,
        mut key_cmp: impl FnMut(&ExtremeRef, &ExtremeRef) -> Ordering,
    ) -> Option<(Rational, ExtremeRef)> {
        let mut best: Option<(Rational, ExtremeRef)> = None;
        for x in self.extremes().filter(|x| self.qualifies_strict(x.a, x.b, eps)) {
            let d = self.deviation(x.a, x.b, x.e);
            let better = match &best {
                None => true,
                Some((bd, b)) => d > *bd || (d == *bd && key_cmp(&x, b) == Ordering::Less),
            };
            if better {
                best = Some((d, x));
            }
        }
        best
    }
}

/// Column sets as sorted index lists compared as bitmask integers (the
/// highest differing index decides).
pub(crate) fn cmp_as_bitmask(a: &[usize], b: &[usize]) -> Ordering {
    let mut ia = a.iter().rev();
    let mut ib = b.iter().rev();
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) if x != y => return x.cmp(y),
            _ => {}
        }
    }
}

/// Exact enumeration over all non-empty row subsets of `mask`
/// (`mask.rows() <= 30`). Tags are the row-subset bitmasks.
pub(crate) fn exact_table(mask: &BinaryMask) -> ExtremeTable {
    let p = mask.rows();
    let q = mask.cols();
    assert!(p <= 30, "exact enumeration over {p} rows");
    let neighbors: Vec<Vec<usize>> = (0..p).map(|i| mask.neighbors(i)).collect();
    let total = mask.edge_count() as u64;
    let count: u64 = 1 << p;
    let chunks = count.min(256);
    let per = count / chunks;

    let run_chunk = |chunk: u64| -> ExtremeTable {
        let mut table = ExtremeTable::empty(p, q, total);
        let lo = chunk * per;
        let hi = lo + per;
        let mut x = lo ^ (lo >> 1);
        let mut c = vec![0usize; q];
        // hist[v] = number of columns with count v
        let mut hist = vec![0usize; p + 1];
        for (i, nb) in neighbors.iter().enumerate() {
            if x >> i & 1 == 1 {
                for &j in nb {
                    c[j] += 1;
                }
            }
        }
        for &v in &c {
            hist[v] += 1;
        }
        let mut t = lo;
        loop {
            if x != 0 {
                record_subset(&mut table, x, &hist);
            }
            t += 1;
            if t == hi {
                break;
            }
            let i = t.trailing_zeros() as usize;
            let adding = x >> i & 1 == 0;
            x ^= 1 << i;
            for &j in &neighbors[i] {
                hist[c[j]] -= 1;
                if adding {
                    c[j] += 1;
                } else {
                    c[j] -= 1;
                }
                hist[c[j]] += 1;
            }
        }
        table
    };

    crate::parallel::install(|| {
        (0..chunks)
            .into_par_iter()
            .map(run_chunk)
            .reduce(|| ExtremeTable::empty(p, q, total), |a, b| a.merge(&b))
    })
}

/// Offers every `(|X|, b)` extreme for row subset `x` given the histogram of
/// column counts.
fn record_subset(table: &mut ExtremeTable, x: u64, hist: &[usize]) {
    let a = x.count_ones() as usize;
    let q = table.q;
    // Walk the histogram from the top for the max, from the bottom for the min.
    let mut max_e = 0u64;
    let mut min_e = 0u64;
    let (mut hi_v, mut hi_left) = (a, hist[a]);
    let (mut lo_v, mut lo_left) = (0usize, hist[0]);
    for b in 1..=q {
        while hi_left == 0 {
            hi_v -= 1;
            hi_left = hist[hi_v];
        }
        hi_left -= 1;
        max_e += hi_v as u64;
        while lo_left == 0 {
            lo_v += 1;
            lo_left = hist[lo_v];
        }
        lo_left -= 1;
        min_e += lo_v as u64;
        let cell = table.slot(a, b);
        match cell {
            Some(c) => {
                if max_e > c.max_e || (max_e == c.max_e && x < c.max_tag) {
                    c.max_e = max_e;
                    c.max_tag = x;
                }
                if min_e < c.min_e || (min_e == c.min_e && x < c.min_tag) {
                    c.min_e = min_e;
                    c.min_tag = x;
                }
            }
            None => *cell = Some(Cell { max_e, max_tag: x, min_e, min_tag: x }),
        }
    }
}

/// Rows of bitmask `x`, and the lowest-bitmask column set of size `b` that
/// attains the requested extreme for them.
pub(crate) fn exact_pair(mask: &BinaryMask, x: u64, b: usize, which: Extreme) -> (Vec<usize>, Vec<usize>) {
    let rows: Vec<usize> = (0..mask.rows()).filter(|&i| x >> i & 1 == 1).collect();
    let mut c = vec![0usize; mask.cols()];
    for &i in &rows {
        for j in mask.neighbors(i) {
            c[j] += 1;
        }
    }
    let mut order: Vec<usize> = (0..mask.cols()).collect();
    match which {
        Extreme::Max => order.sort_by_key(|&j| (std::cmp::Reverse(c[j]), j)),
        Extreme::Min => order.sort_by_key(|&j| (c[j], j)),
    }
    let mut cols = order[..b].to_vec();
    cols.sort_unstable();
    (rows, cols)
}

/// Deterministic stream of random subset pairs: sizes uniform in `[1, side]`,
/// members uniform among subsets of that size.
pub(crate) struct PairSampler {
    rng: ChaCha8Rng,
    rows: usize,
    cols: usize,
    row_pool: Vec<usize>,
    col_pool: Vec<usize>,
}

impl PairSampler {
    pub fn new(rows: usize, cols: usize, seed: u64) -> Self {
        PairSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            rows,
            cols,
            row_pool: (0..rows).collect(),
            col_pool: (0..cols).collect(),
        }
    }

    fn draw(rng: &mut ChaCha8Rng, pool: &mut [usize], n: usize) -> Vec<usize> {
        let size = rng.gen_range(1..=n);
        for i in 0..size {
            let j = rng.gen_range(i..n);
            pool.swap(i, j);
        }
        let mut out = pool[..size].to_vec();
        out.sort_unstable();
        out
    }

    pub fn next_pair(&mut self) -> (Vec<usize>, Vec<usize>) {
        let x = Self::draw(&mut self.rng, &mut self.row_pool, self.rows);
        let y = Self::draw(&mut self.rng, &mut self.col_pool, self.cols);
        (x, y)
    }
}

pub(crate) fn edges_between(mask: &BinaryMask, rows: &[usize], cols: &[usize]) -> u64 {
    let mut ymask = vec![0u64; mask.words_per_row()];
    for &j in cols {
        ymask[j / 64] |= 1 << (j % 64);
    }
    rows.iter()
        .map(|&i| mask.row_words(i).iter().zip(&ymask).map(|(r, y)| (r & y).count_ones() as u64).sum::<u64>())
        .sum()
}

/// Table over `samples` random pairs; tags are sample indices.
pub(crate) fn sampled_table(mask: &BinaryMask, samples: usize, seed: u64) -> ExtremeTable {
    let mut table = ExtremeTable::empty(mask.rows(), mask.cols(), mask.edge_count() as u64);
    let mut sampler = PairSampler::new(mask.rows(), mask.cols(), seed);
    for tag in 0..samples {
        let (x, y) = sampler.next_pair();
        let e = edges_between(mask, &x, &y);
        table.offer(x.len(), y.len(), e, tag as u64);
    }
    table
}

/// Replays the sampler to recover sample `tag`.
pub(crate) fn sampled_pair(mask: &BinaryMask, seed: u64, tag: u64) -> (Vec<usize>, Vec<usize>) {
    let mut sampler = PairSampler::new(mask.rows(), mask.cols(), seed);
    for _ in 0..tag {
        sampler.next_pair();
    }
    sampler.next_pair()
}
