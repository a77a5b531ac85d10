use proptest::prelude::*;
use srn_core::io::{export_mask, import_mask, Format};
use srn_core::verify::{epsilon_feasible, subset_density, to_adjacency};
use srn_core::{
    delta_star, densify_to, epsilon_star_exact, epsilon_star_sampled, generate_base, permute, ratio, spectral_gap,
    BaseMatrixSpec, BinaryMask, PermutedMask, Rational, VerifyOptions,
};

fn mask_strategy(max_side: usize) -> impl Strategy<Value = BinaryMask> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(r, c)| {
        proptest::collection::vec(any::<bool>(), r * c).prop_map(move |bits| {
            let mut m = BinaryMask::zeros(r, c);
            for (n, b) in bits.into_iter().enumerate() {
                m.set(n / c, n % c, b);
            }
            m
        })
    })
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_preserves_structure(m in mask_strategy(8), seed in any::<u64>()) {
        let p = permute(&m, seed).effective();
        let ex = VerifyOptions::exact();
        let (e1, _) = epsilon_star_exact(&m, 14).unwrap();
        let (e2, _) = epsilon_star_exact(&p, 14).unwrap();
        prop_assert_eq!(e1, e2);
        prop_assert_eq!(delta_star(&m, e1, &ex).unwrap(), delta_star(&p, e2, &ex).unwrap());
        prop_assert_eq!(m.density(), p.density());
        prop_assert_eq!(sorted(m.row_degrees()), sorted(p.row_degrees()));
        prop_assert_eq!(sorted(m.col_degrees()), sorted(p.col_degrees()));
        if m.edge_count() > 0 {
            let (g1, g2) = (spectral_gap(&m).unwrap().gamma, spectral_gap(&p).unwrap().gamma);
            prop_assert!((g1 - g2).abs() < 1e-8, "{} vs {}", g1, g2);
        }
    }

    #[test]
    fn export_import_round_trip(m in mask_strategy(12), seed in any::<u64>()) {
        let p = permute(&m, seed);
        for format in [Format::Binary, Format::StructuredText] {
            let bytes = export_mask(&p, format);
            let back = import_mask(&bytes, format, None).unwrap();
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(export_mask(&back, format), bytes);
        }
        for format in [Format::DenseText, Format::EdgeCsv] {
            let bytes = export_mask(&p, format);
            let back = import_mask(&bytes, format, Some((m.rows(), m.cols()))).unwrap();
            prop_assert_eq!(&back, &PermutedMask::identity(p.effective().unlabeled()));
            prop_assert_eq!(export_mask(&back, format), bytes);
        }
    }

    #[test]
    fn feasibility_is_monotone(m in mask_strategy(7)) {
        let ex = VerifyOptions::exact();
        let (eps, _) = epsilon_star_exact(&m, 14).unwrap();
        prop_assert!(epsilon_feasible(&m, eps, &ex).unwrap());
        let side = m.rows().max(m.cols()) as i64;
        let step = ratio(1, side * side);
        prop_assert!(epsilon_feasible(&m, eps + step, &ex).unwrap());
        if eps > ratio(0, 1) {
            prop_assert!(!epsilon_feasible(&m, eps - step.min(eps), &ex).unwrap());
        }
    }

    #[test]
    fn sampled_never_exceeds_exact(m in mask_strategy(10), seed in any::<u64>()) {
        let (exact, _) = epsilon_star_exact(&m, 14).unwrap();
        let (sampled, _) = epsilon_star_sampled(&m, 200, seed).unwrap();
        prop_assert!(sampled <= exact, "{} > {}", sampled, exact);
    }

    #[test]
    fn delta_star_within_degree_bounds(m in mask_strategy(8)) {
        let (eps, _) = epsilon_star_exact(&m, 14).unwrap();
        let d = delta_star(&m, eps, &VerifyOptions::exact()).unwrap();
        prop_assert!(d <= Rational::new(m.min_row_degree() as i64, m.cols() as i64));
        prop_assert!(d <= Rational::new(m.min_col_degree() as i64, m.rows() as i64));
    }

    #[test]
    fn adjacency_is_symmetric(m in mask_strategy(12)) {
        let a = to_adjacency(&m);
        prop_assert_eq!(&a, &a.transpose());
        prop_assert_eq!(a.edge_count(), 2 * m.edge_count());
    }

    #[test]
    fn block_partition_recovers_density(m in mask_strategy(12), rcut in 0usize..12, ccut in 0usize..12) {
        let (r, c) = (rcut % m.rows(), ccut % m.cols());
        let row_parts: Vec<Vec<usize>> = [(0..r).collect::<Vec<_>>(), (r..m.rows()).collect()]
            .into_iter().filter(|v| !v.is_empty()).collect();
        let col_parts: Vec<Vec<usize>> = [(0..c).collect::<Vec<_>>(), (c..m.cols()).collect()]
            .into_iter().filter(|v| !v.is_empty()).collect();
        let mut total = ratio(0, 1);
        for x in &row_parts {
            for y in &col_parts {
                let area = (x.len() * y.len()) as i64;
                total += subset_density(&m, x, y).unwrap() * area;
            }
        }
        prop_assert_eq!(total / (m.rows() * m.cols()) as i64, m.density());
    }
}

#[test]
fn densify_moves_one_diagonal_at_a_time() {
    for k in [2u32, 3, 4] {
        let m = 1i64 << k;
        let mut mask = generate_base(&BaseMatrixSpec::new(k, [1]).unwrap());
        for t in 2..=m {
            let next = densify_to(&mask, ratio(t, m)).unwrap();
            assert_eq!(next.density() - mask.density(), ratio(1, m), "m={m} t={t}");
            assert!(mask.is_subset_of(&next));
            mask = next;
        }
        assert_eq!(mask.edge_count() as i64, m * m);
    }
}
