//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use num_rational::Ratio;
use srn_core::BinaryMask;

pub type Q = Ratio<i64>;

/// Rows as bitmasks over columns (sides up to 16).
pub fn row_bits(mask: &BinaryMask) -> Vec<u32> {
    (0..mask.rows())
        .map(|i| (0..mask.cols()).filter(|&j| mask.get(i, j)).map(|j| 1u32 << j).sum())
        .collect()
}

pub struct Pair {
    pub a: i64,
    pub b: i64,
    pub e: i64,
}

/// Every non-empty `(X, Y)` with its edge count, by direct enumeration.
pub fn all_pairs(mask: &BinaryMask) -> Vec<Pair> {
    let bits = row_bits(mask);
    let (p, q) = (mask.rows(), mask.cols());
    let mut out = Vec::with_capacity(((1usize << p) - 1) * ((1usize << q) - 1));
    for x in 1u32..1 << p {
        for y in 1u32..1 << q {
            let mut e = 0;
            for (i, r) in bits.iter().enumerate() {
                if x >> i & 1 == 1 {
                    e += (r & y).count_ones() as i64;
                }
            }
            out.push(Pair { a: x.count_ones() as i64, b: y.count_ones() as i64, e });
        }
    }
    out
}

fn deviation(mask: &BinaryMask, pair: &Pair) -> Q {
    let d = Q::new(mask.edge_count() as i64, (mask.rows() * mask.cols()) as i64);
    let s = Q::new(pair.e, pair.a * pair.b);
    if s > d { s - d } else { d - s }
}

/// The least ε such that no pair with `|X| > ε p`, `|Y| > ε q` deviates by
/// more than ε: each pair stops constraining once ε reaches either its size
/// ratio or its deviation.
pub fn naive_epsilon_star(mask: &BinaryMask) -> Q {
    let (p, q) = (mask.rows() as i64, mask.cols() as i64);
    all_pairs(mask)
        .iter()
        .map(|pr| {
            let size = Q::new(pr.a, p).min(Q::new(pr.b, q));
            size.min(deviation(mask, pr))
        })
        .max()
        .unwrap_or(Q::new(0, 1))
}

pub fn naive_delta_star(mask: &BinaryMask, eps: Q) -> Q {
    let (p, q) = (mask.rows() as i64, mask.cols() as i64);
    let row_min = (0..mask.rows()).map(|i| (0..mask.cols()).filter(|&j| mask.get(i, j)).count()).min().unwrap();
    let col_min = (0..mask.cols()).map(|j| (0..mask.rows()).filter(|&i| mask.get(i, j)).count()).min().unwrap();
    let mut best = Q::new(row_min as i64, q).min(Q::new(col_min as i64, p));
    for pr in all_pairs(mask) {
        if Q::from_integer(pr.a) > eps * p && Q::from_integer(pr.b) > eps * q {
            best = best.min(Q::new(pr.e, pr.a * pr.b));
        }
    }
    best
}

/// Colour grids transcribed cell-for-cell from the construction figures.
/// `0` is an empty cell; `1..=4` a base diagonal; `5` an edge added by a
/// later addition pass.
pub const FIXTURES: [(&str, &str); 10] = [
    ("a0", include_str!("../fixtures/a0.txt")),
    ("a1", include_str!("../fixtures/a1.txt")),
    ("a2", include_str!("../fixtures/a2.txt")),
    ("a3", include_str!("../fixtures/a3.txt")),
    ("a4", include_str!("../fixtures/a4.txt")),
    ("a2_12", include_str!("../fixtures/a2_12.txt")),
    ("a2_13", include_str!("../fixtures/a2_13.txt")),
    ("a3_12", include_str!("../fixtures/a3_12.txt")),
    ("a4_12", include_str!("../fixtures/a4_12.txt")),
    ("a4_12_plus_a3_12", include_str!("../fixtures/a4_12_plus_a3_12.txt")),
];

pub fn fixture(name: &str) -> Vec<Vec<u8>> {
    let text = FIXTURES.iter().find(|(n, _)| *n == name).unwrap_or_else(|| panic!("no fixture {name}")).1;
    text.lines().map(|l| l.bytes().map(|b| b - b'0').collect()).collect()
}

/// First mismatch between a labelled mask and a colour grid, where colour
/// `c` in `1..=4` means `(pass 0, diagonal c)` and `5` means pass 1.
pub fn grid_mismatch(mask: &BinaryMask, grid: &[Vec<u8>]) -> Option<String> {
    if mask.rows() != grid.len() || grid.iter().any(|r| r.len() != mask.cols()) {
        return Some(format!("shape {}x{} vs grid {}x{}", mask.rows(), mask.cols(), grid.len(), grid[0].len()));
    }
    for (i, row) in grid.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let ok = match (c, mask.label(i, j)) {
                (0, _) => !mask.get(i, j),
                (5, Some(l)) => l.pass == 1,
                (c, Some(l)) => l.pass == 0 && l.diagonal == c as u16,
                (_, None) => false,
            };
            if !ok {
                return Some(format!("cell ({i}, {j}): colour {c}, mask {} {:?}", mask.get(i, j), mask.label(i, j)));
            }
        }
    }
    None
}

/// Whether some `a`-row by `b`-column selection holds no edge, and which.
pub fn empty_selections(mask: &BinaryMask, a: u32, b: u32) -> Vec<(u32, u32)> {
    let bits = row_bits(mask);
    let mut out = Vec::new();
    for x in 1u32..1 << mask.rows() {
        if x.count_ones() != a {
            continue;
        }
        let union = bits.iter().enumerate().filter(|(i, _)| x >> i & 1 == 1).fold(0, |acc, (_, r)| acc | r);
        for y in 1u32..1 << mask.cols() {
            if y.count_ones() == b && union & y == 0 {
                out.push((x, y));
            }
        }
    }
    out
}
