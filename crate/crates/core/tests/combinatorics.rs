//! Forest counts, g and the first moments against independent oracles.

use mif_core::forest::{g_exact, g_limit, g_sum_limit, kernel_exact, ForestCountTable, GEvaluator};
use mif_core::moment::{concentration_points, expected_counts_exact, MomentEngine, MomentQuery};
use mif_core::LogReal;
use mif_core::Probability;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

fn p(s: &str) -> Probability {
    s.parse().unwrap()
}

/// Components of the graph on `k` vertices given by `mask` over the pairs in
/// lexicographic order, or `None` when it has a cycle.
fn forest_components(k: usize, mask: u32) -> Option<usize> {
    let mut parent: Vec<usize> = (0..k).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            x = parent[x];
        }
        x
    }
    let mut components = k;
    let mut bit = 0;
    for u in 0..k {
        for v in u + 1..k {
            if mask >> bit & 1 == 1 {
                let (a, b) = (root(&mut parent, u), root(&mut parent, v));
                if a == b {
                    return None;
                }
                parent[a] = b;
                components -= 1;
            }
            bit += 1;
        }
    }
    Some(components)
}

/// `counts[ℓ]` = labeled forests on `k` vertices with `ℓ` components, by
/// enumerating every graph.
fn brute_forest_counts(k: usize) -> Vec<u64> {
    let pairs = k * (k - 1) / 2;
    let mut counts = vec![0u64; k + 1];
    for mask in 0..1u32 << pairs {
        if let Some(c) = forest_components(k, mask) {
            counts[c] += 1;
        }
    }
    counts
}

#[test]
fn phi_matches_enumeration() {
    let mut table = ForestCountTable::default();
    for k in 1..=6 {
        let counts = brute_forest_counts(k);
        for ell in -1..=(k as i64 + 2) {
            let expected = if (1..=k as i64).contains(&ell) { counts[ell as usize] } else { 0 };
            assert_eq!(table.phi(k, ell).unwrap(), BigUint::from(expected), "k={k} ell={ell}");
        }
        let total: u64 = counts.iter().sum();
        assert_eq!(table.total(k).unwrap(), BigUint::from(total));
    }
    assert_eq!(table.total(3).unwrap(), BigUint::from(7u32));
    assert_eq!(table.total(4).unwrap(), BigUint::from(38u32));
    assert!(table.phi(0, 1).is_err());
}

#[test]
fn phi_closed_form_rows() {
    let mut table = ForestCountTable::default();
    for k in 2..=40usize {
        assert_eq!(table.phi(k, k as i64 - 1).unwrap(), BigUint::from(k * (k - 1) / 2));
        assert_eq!(table.phi(k, k as i64).unwrap(), BigUint::from(1u32));
        let cayley = if k <= 2 { BigUint::from(1u32) } else { BigUint::from(k).pow(k as u32 - 2) };
        assert_eq!(table.phi(k, 1).unwrap(), cayley);
    }
}

#[test]
fn recursion_identity_is_exact() {
    let mut table = ForestCountTable::default();
    for ps in ["0.3", "0.5", "0.7"] {
        let prob = p(ps);
        let odds = BigRational::new(
            BigInt::from(prob.denom() - prob.numer()),
            BigInt::from(prob.numer()),
        );
        for k in 2..=30usize {
            for ell in 2..=k {
                let mut sum = BigRational::zero();
                for m in ell - 1..k {
                    sum += kernel_exact(m, k).unwrap() * g_exact(&mut table, m, ell as i64 - 1, &prob).unwrap();
                }
                let lhs = g_exact(&mut table, k, ell as i64, &prob).unwrap();
                assert_eq!(lhs, &odds * sum, "k={k} ell={ell} p={ps}");
            }
        }
    }
}

#[test]
fn exact_and_log_routes_agree() {
    let mut eval = GEvaluator::default();
    let mut logs = GEvaluator::default();
    for ps in ["0.3", "0.5", "0.7"] {
        let prob = p(ps);
        for k in 1..=64usize {
            for ell in 1..=k {
                let a = eval.g(k, ell, &prob).unwrap();
                let b = logs.g_log(k, ell, &prob);
                assert!(LogReal::rel_diff(a, b) < 1e-12, "k={k} ell={ell} p={ps}");
            }
        }
    }
}

#[test]
fn g_small_cases() {
    let mut eval = GEvaluator::default();
    let half = p("0.5");
    assert_eq!(eval.g(3, 2, &half).unwrap().to_f64(), 1.0);
    for k in [1, 5, 80, 300] {
        assert_eq!(eval.g(k, 1, &p("0.37")).unwrap().to_f64(), 1.0);
    }
    assert!(eval.g(5, 7, &half).unwrap().is_zero());
    assert!((g_limit(2, &half).to_f64() - 0.5).abs() < 1e-15);
    assert!((g_limit(3, &half).to_f64() - 0.125).abs() < 1e-15);
    assert!((g_sum_limit(&half) - 1.648_721_270_700_128).abs() < 1e-12);
    assert!((g_sum_limit(&p("0.25")) - 4.481_689_070_338_065).abs() < 1e-12);
    assert!((g_sum_limit(&p("0.999999")) - 1.0).abs() < 1e-6);
}

#[test]
fn moon_limit_at_2000() {
    let mut eval = GEvaluator::default();
    let half = p("0.5");
    for ell in 1..=6 {
        let g = eval.g(2000, ell, &half).unwrap().to_f64();
        let limit = g_limit(ell, &half).to_f64();
        assert!((g - limit).abs() <= 0.05 * limit, "ell={ell}: {g} vs {limit}");
    }
}

#[test]
fn moments_match_forest_enumeration() {
    // E[Y_n] at n = 30, K = 6 as a sum over every forest on 6 labeled vertices
    let (n, k) = (30u64, 6usize);
    let prob = p("0.5");
    let half = BigRational::new(1.into(), 2.into());
    let choose = BigRational::from_integer(BigInt::from(593_775u64));
    let mut e_y = BigRational::zero();
    let mut e_x = BigRational::zero();
    for mask in 0..1u32 << 15 {
        if let Some(c) = forest_components(k, mask) {
            let term = &choose * num_traits::pow(half.clone(), 15);
            if c == 1 {
                e_x += &term;
            }
            e_y += term;
        }
    }
    let q = MomentQuery::with_k(n, prob.clone(), 0.0, k).unwrap();
    let (ex_exact, ey_exact) = expected_counts_exact(&mut ForestCountTable::default(), &q).unwrap();
    assert_eq!(ex_exact, e_x);
    assert_eq!(ey_exact, e_y);

    let report = MomentEngine::default().expected_forest_count(&q).unwrap();
    let ey = e_y.to_f64().unwrap();
    assert!((report.e_y.to_f64() - ey).abs() <= 1e-10 * ey);
    assert!((report.e_x.to_f64() - e_x.to_f64().unwrap()).abs() <= 1e-10 * ey);
    assert!(report.route_disagreement() < 1e-10);
}

#[test]
fn moments_at_k_two() {
    let prob = p("0.3");
    let q = MomentQuery::with_k(50, prob.clone(), 0.0, 2).unwrap();
    let r = MomentEngine::default().expected_forest_count(&q).unwrap();
    let pairs = 1225.0;
    assert!((r.e_x.to_f64() - pairs * 0.3).abs() < 1e-9);
    assert!((r.e_y_by_ell[1].to_f64() - pairs * 0.7).abs() < 1e-9);
    assert!((r.e_y.to_f64() - pairs).abs() < 1e-9);
    assert!(MomentQuery::with_k(5, prob, 0.0, 6).is_err());
}

#[test]
fn ratio_tends_to_the_limit() {
    let mut engine = MomentEngine::default();
    for ps in ["0.3", "0.5", "0.7"] {
        let prob = p(ps);
        let limit = g_sum_limit(&prob);
        for k in (10..=400).step_by(30).chain([400]) {
            let q = MomentQuery::with_k(1000, prob.clone(), 0.0, k).unwrap();
            let r = engine.expected_forest_count(&q).unwrap();
            assert!(r.route_disagreement() < 1e-10, "p={ps} K={k}");
            assert!(r.ratio >= 1.0 && r.ratio < 3.0 * limit);
            assert_eq!(r.e_y_by_ell[0], r.e_x);
            if k == 400 {
                assert!((r.ratio - limit).abs() <= 0.05 * limit, "p={ps}: {} vs {limit}", r.ratio);
            }
        }
    }
}

#[test]
fn concentration_points_at_1000() {
    let half = p("0.5");
    let expected = (2.0 * (std::f64::consts::E * 500.0).log2() + 2.0).floor() as i64;
    assert_eq!(concentration_points(1000, &half, 0.0), (expected, expected + 1));
    for n in [50u64, 100, 1000, 12345] {
        for ps in ["0.2", "0.5", "0.9"] {
            let (lo, hi) = concentration_points(n, &p(ps), 0.25);
            assert_eq!(hi, lo + 1);
            assert_eq!(concentration_points(n, &p(ps), 1.25).0, lo + 1);
        }
    }
}
