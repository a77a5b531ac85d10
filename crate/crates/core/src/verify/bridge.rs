//! Conditions under which an expander layer is also a super-regular pair.
//!
//! For a row subset `S` with neighbourhood `N(S)` in an `n x n` layer:
//!
//! * R1: `|S| > ε n` and `|N(S)| > ε n`
//! * R2: `D_min |1/|N(S)| - 1/n| < ε < |S|/n < 1/2`
//! * R3: every degree exceeds `δ n`
//!
//! alongside the expander-side bound `ε <= (1-γ) √(|S||N(S)|) / (|S||N(S)|)`.

use serde::{Deserialize, Serialize};

use super::spectral::spectral_gap;
use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::rational::{abs_diff, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderBridgeReport {
    pub subset_size: usize,
    pub neighborhood_size: usize,
    pub n: usize,
    /// Minimum degree over all rows and columns.
    pub d_min: usize,
    /// Row degree `H` (maximum row degree when rows differ).
    pub degree_h: usize,
    /// The ε the conditions were evaluated at.
    #[serde(with = "crate::rational::serde_str")]
    pub epsilon: Rational,
    pub r1_ok: bool,
    pub r2_ok: bool,
    pub r3_ok: bool,
    /// `D_min |1/|N(S)| - 1/n|`
    #[serde(with = "crate::rational::serde_str")]
    pub epsilon_bound_low: Rational,
    /// `(1-γ) √(|S||N(S)|) / (|S||N(S)|)`
    pub epsilon_bound_high: f64,
    pub spectral_gap: f64,
    pub second_singular: f64,
}

/// Evaluates R1–R3 for row subset `s`.
///
/// With `epsilon = None` the conditions are evaluated at the midpoint of the
/// R2 interval `(D_min |1/|N(S)| - 1/n|, |S|/n)` when it is non-empty, and at
/// its lower end otherwise. With `delta = None`, R3 asks only that some
/// `δ > 0` works, i.e. `D_min >= 1`.
pub fn check_expander_sr_conditions(
    mask: &BinaryMask,
    s: &[usize],
    epsilon: Option<Rational>,
    delta: Option<Rational>,
) -> Result<ExpanderBridgeReport> {
    if !mask.is_square() {
        return Err(Error::arg(format!("expected a square mask, got {}x{}", mask.rows(), mask.cols())));
    }
    let n = mask.rows();
    let mut subset = s.to_vec();
    subset.sort_unstable();
    subset.dedup();
    if subset.is_empty() {
        return Err(Error::arg("the starting subset S must be non-empty"));
    }
    if let Some(&i) = subset.iter().find(|&&i| i >= n) {
        return Err(Error::arg(format!("row {i} out of range")));
    }
    let mut in_neighborhood = vec![false; n];
    for &i in &subset {
        for j in mask.neighbors(i) {
            in_neighborhood[j] = true;
        }
    }
    let nbhd = in_neighborhood.iter().filter(|&&b| b).count();
    if nbhd == 0 {
        return Err(Error::DegenerateSubset(format!("S = {subset:?} has no neighbours")));
    }

    let rows = mask.row_degrees();
    let cols = mask.col_degrees();
    let d_min = rows.iter().chain(&cols).copied().min().unwrap_or(0);
    let n_r = n as i64;
    let s_len = subset.len() as i64;
    let low = Rational::from_integer(d_min as i64) * abs_diff(Rational::new(1, nbhd as i64), Rational::new(1, n_r));
    let upper = Rational::new(s_len, n_r);
    let half = Rational::new(1, 2);

    let eps = epsilon.unwrap_or(if low < upper { (low + upper) / 2 } else { low });
    let r1_ok = Rational::from_integer(s_len) > eps * n_r && Rational::from_integer(nbhd as i64) > eps * n_r;
    let r2_ok = low < eps && eps < upper && upper < half;
    let r3_ok = match delta {
        Some(d) => {
            let bound = d * n_r;
            rows.iter().chain(&cols).all(|&x| Rational::from_integer(x as i64) > bound)
        }
        None => d_min >= 1,
    };

    let spectral = spectral_gap(mask)?;
    let prod = (subset.len() * nbhd) as f64;
    let high = (1.0 - spectral.gamma) * prod.sqrt() / prod;

    Ok(ExpanderBridgeReport {
        subset_size: subset.len(),
        neighborhood_size: nbhd,
        n,
        d_min,
        degree_h: spectral.degree_h,
        epsilon: eps,
        r1_ok,
        r2_ok,
        r3_ok,
        epsilon_bound_low: low,
        epsilon_bound_high: high,
        spectral_gap: spectral.gamma,
        second_singular: spectral.lambda2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{generate_base, BaseMatrixSpec};
    use crate::rational::ratio;

    #[test]
    fn complete_layer_passes() {
        let r = check_expander_sr_conditions(&BinaryMask::ones(8, 8), &[0], None, None).unwrap();
        assert_eq!(r.epsilon_bound_low, ratio(0, 1));
        assert!(r.r1_ok && r.r2_ok && r.r3_ok);
        assert_eq!(r.neighborhood_size, 8);
    }

    #[test]
    fn identity_fails_r2() {
        let r = check_expander_sr_conditions(&BinaryMask::identity(8), &[0], None, None).unwrap();
        assert_eq!(r.epsilon_bound_low, ratio(7, 8));
        assert!(!r.r2_ok);
        assert!(r.r3_ok);
    }

    #[test]
    fn base_matrix_hand_values() {
        // D_min = 4, n = 8, |N(S)| = 4: 4 * |1/4 - 1/8| = 1/2 >= 1/8
        let a3 = generate_base(&BaseMatrixSpec::full(3).unwrap());
        let r = check_expander_sr_conditions(&a3, &[0], None, None).unwrap();
        assert_eq!((r.d_min, r.neighborhood_size), (4, 4));
        assert_eq!(r.epsilon_bound_low, ratio(1, 2));
        assert!(!r.r2_ok);
    }

    #[test]
    fn explicit_parameters() {
        let m = BinaryMask::ones(8, 8);
        let r = check_expander_sr_conditions(&m, &[0], Some(ratio(1, 4)), Some(ratio(1, 2))).unwrap();
        // 1/4 is not below |S|/n = 1/8
        assert!(!r.r2_ok);
        assert!(!r.r1_ok);
        assert!(r.r3_ok);
        let r = check_expander_sr_conditions(&m, &[0], None, Some(ratio(1, 1))).unwrap();
        assert!(!r.r3_ok);
    }

    #[test]
    fn degenerate_subset() {
        let mut m = BinaryMask::identity(4);
        m.set(2, 2, false);
        assert!(matches!(check_expander_sr_conditions(&m, &[2], None, None), Err(Error::DegenerateSubset(_))));
        assert!(check_expander_sr_conditions(&m, &[], None, None).is_err());
        assert!(check_expander_sr_conditions(&BinaryMask::ones(2, 3), &[0], None, None).is_err());
    }
}
