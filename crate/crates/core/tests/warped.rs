use finsler_core::catalog;
use finsler_core::classify::{classify, Tolerances};
use finsler_core::warped::{
    check_theorem_equivalences, dwp_construct, dwp_fundamental_blocks, wp_berwald_blocks, wp_spray, DWPSpec,
    EntryStatus, Selection, Theorem,
};
use finsler_core::{Error, Expr, MetricSpec, Point, SamplingPolicy};

fn spec(m1: MetricSpec, m2: MetricSpec, f1: Expr) -> DWPSpec {
    DWPSpec::new(m1, m2, f1, Expr::constant(1.0)).unwrap()
}

fn composite_points(m: &MetricSpec, count: usize) -> Vec<Point> {
    SamplingPolicy::with_counts(7, count, 1).sample_points(m).unwrap()
}

fn assert_all_blocks(s: &DWPSpec, count: usize) {
    let m = dwp_construct(s).unwrap();
    for p in composite_points(&m, count) {
        let g = dwp_fundamental_blocks(s, &m, &p).unwrap();
        assert!(g.passed(), "{:?}", g.worst());
        let sp = wp_spray(s, &m, &p).unwrap();
        assert!(sp.passed(), "{:?}", sp.worst());
        let b = wp_berwald_blocks(s, &m, &p).unwrap();
        assert!(b.passed(), "{:?}", b.worst());
    }
}

#[test]
fn exponential_warp_of_euclidean_planes() {
    assert_all_blocks(&spec(catalog::euclidean(2), catalog::euclidean(2), Expr::x(0).exp()), 20);
}

#[test]
fn linear_warp_of_euclidean_and_randers() {
    assert_all_blocks(&spec(catalog::euclidean(2), catalog::randers(0.5), 1.0 + 0.1 * Expr::x(0)), 20);
}

#[test]
fn randers_first_factor_exercises_every_block() {
    let s = spec(catalog::randers(0.4), catalog::randers(0.3), Expr::x(0).exp());
    let m = dwp_construct(&s).unwrap();
    let mut nonzero = [0.0_f64; 5];
    for p in composite_points(&m, 10) {
        let b = wp_berwald_blocks(&s, &m, &p).unwrap();
        assert!(b.passed(), "{:?}", b.worst());
        for (slot, name) in ["k_i_j_l", "k_i_beta_l", "k_alpha_beta_l", "k_alpha_beta_lambda", "gamma_alpha_beta_lambda"]
            .iter()
            .enumerate()
        {
            nonzero[slot] = nonzero[slot].max(b.direct.block(name).unwrap().sup_norm());
        }
    }
    // the lower-index blocks carry genuine content, so the check is not vacuous
    assert!(nonzero[..4].iter().all(|v| *v > 1e-3), "{nonzero:?}");
}

#[test]
fn doubled_k_alpha_beta_l_coefficient_is_rejected() {
    // −1 in place of −½ disagrees with direct evaluation once ∂g₁⁻¹/∂y ≠ 0
    let s = spec(catalog::randers(0.4), catalog::euclidean(2), Expr::x(0).exp());
    let m = dwp_construct(&s).unwrap();
    let p = composite_points(&m, 1).remove(0);
    let b = wp_berwald_blocks(&s, &m, &p).unwrap();
    let formula = b.formula.block("k_alpha_beta_l").unwrap();
    let direct = b.direct.block("k_alpha_beta_l").unwrap();
    let half: f64 = formula.components.iter().zip(&direct.components).map(|(a, d)| (a - d).abs()).fold(0.0, f64::max);
    let one: f64 =
        formula.components.iter().zip(&direct.components).map(|(a, d)| (2.0 * a - d).abs()).fold(0.0, f64::max);
    assert!(half <= 1e-5, "{half:e}");
    assert!(one > 1e-2, "{one:e}");
}

#[test]
fn riemannian_factor_kills_k_alpha_beta_lambda() {
    let s = spec(catalog::randers(0.4), catalog::euclidean(2), Expr::x(0).exp());
    let m = dwp_construct(&s).unwrap();
    for p in composite_points(&m, 5) {
        let b = wp_berwald_blocks(&s, &m, &p).unwrap();
        assert!(b.direct.block("k_alpha_beta_lambda").unwrap().sup_norm() < 1e-9);
        assert!(b.direct.block("k_alpha_beta_l").unwrap().sup_norm() > 1e-3);
    }
}

#[test]
fn exponential_warp_scales_second_block() {
    let s = spec(catalog::euclidean(2), catalog::euclidean(2), Expr::x(0).exp());
    let m = dwp_construct(&s).unwrap();
    let p = Point::new(vec![0.7, 0.2, 0.1, 0.9], vec![0.5, 0.5, 0.5, 0.5]);
    let r = dwp_fundamental_blocks(&s, &m, &p).unwrap();
    let ab = r.direct.block("alpha_beta").unwrap();
    let e = (1.4f64).exp();
    assert!((ab.components[0] - e).abs() < 1e-12 && (ab.components[3] - e).abs() < 1e-12);
    assert!(ab.components[1].abs() < 1e-12);
}

#[test]
fn unit_warpings_classify_as_conjunction() {
    let policy = SamplingPolicy::with_counts(3, 4, 4);
    let tol = Tolerances::default();
    let factors = [catalog::euclidean(2), catalog::quartic_minkowski(2), catalog::randers_x()];
    for a in &factors {
        for b in &factors {
            let s = DWPSpec::new(a.clone(), b.clone(), Expr::constant(1.0), Expr::constant(1.0)).unwrap();
            let c = classify(&dwp_construct(&s).unwrap(), &policy, &tol).unwrap();
            let ra = classify(a, &policy, &tol).unwrap();
            let rb = classify(b, &policy, &tol).unwrap();
            assert_eq!(c.riemannian.verdict, ra.riemannian.verdict && rb.riemannian.verdict);
            assert_eq!(c.berwald.verdict, ra.berwald.verdict && rb.berwald.verdict);
            assert_eq!(c.weakly_berwald.verdict, ra.weakly_berwald.verdict && rb.weakly_berwald.verdict);
            if ra.berwald.verdict && rb.berwald.verdict {
                assert!(c.douglas.verdict);
            }
        }
    }
}

#[test]
fn douglas_is_not_inherited_by_products() {
    // D carries 2/(n+1); a Douglas, non-Berwald factor with E ≠ 0 leaves a
    // residue of (2/3 − 2/5)·E in the four-dimensional product
    let policy = SamplingPolicy::with_counts(3, 4, 4);
    let tol = Tolerances::default();
    let factor = classify(&catalog::randers_x(), &policy, &tol).unwrap();
    assert!(factor.douglas.verdict && !factor.weakly_berwald.verdict);
    let s = DWPSpec::new(catalog::euclidean(2), catalog::randers_x(), Expr::constant(1.0), Expr::constant(1.0)).unwrap();
    let c = classify(&dwp_construct(&s).unwrap(), &policy, &tol).unwrap();
    assert!(!c.douglas.verdict);
}

fn evaluated(r: &finsler_core::warped::EquivalenceReport, t: Theorem) -> (bool, bool) {
    match r.entries.iter().find(|e| e.theorem == t).unwrap().status {
        EntryStatus::Evaluated { left, right } => (left, right),
        EntryStatus::Skipped(ref why) => panic!("{t:?} skipped: {why}"),
    }
}

#[test]
fn theorem1_riemannian_factors() {
    let s = spec(catalog::riemannian_mixed(), catalog::conformal(), 1.0 + Expr::x(0).square());
    let r = check_theorem_equivalences(&s, &SamplingPolicy::with_counts(1, 4, 4), &Tolerances::default(), Selection::All)
        .unwrap();
    assert_eq!(evaluated(&r, Theorem::T1), (true, true));
    assert_eq!(evaluated(&r, Theorem::Cor1), (true, true));
}

#[test]
fn theorem1_non_berwald_first_factor() {
    let s = spec(catalog::randers_x(), catalog::euclidean(2), Expr::constant(2.0));
    let r = check_theorem_equivalences(
        &s,
        &SamplingPolicy::with_counts(1, 4, 4),
        &Tolerances::default(),
        Selection::Only(Theorem::T1),
    )
    .unwrap();
    assert_eq!(evaluated(&r, Theorem::T1), (false, false));
    assert_eq!(r.entries.len(), 1);
}

#[test]
fn direct_product_of_berwald_factors() {
    let s = DWPSpec::new(catalog::quartic_minkowski(2), catalog::euclidean(2), Expr::constant(1.0), Expr::constant(1.0))
        .unwrap();
    let r = check_theorem_equivalences(&s, &SamplingPolicy::with_counts(1, 4, 4), &Tolerances::default(), Selection::All)
        .unwrap();
    let (left, right) = evaluated(&r, Theorem::T1);
    assert!(left);
    // the literal right side asks for a Riemannian first factor; the
    // disagreement is reported rather than raised
    assert!(!right);
    assert_eq!(evaluated(&r, Theorem::T1Dual), (true, true));
}

#[test]
fn premises_are_enforced_on_request() {
    let s = spec(catalog::euclidean(2), catalog::euclidean(2), Expr::constant(1.0));
    let policy = SamplingPolicy::with_counts(1, 2, 2);
    for t in [Theorem::Cor1, Theorem::T2, Theorem::T3] {
        let r = check_theorem_equivalences(&s, &policy, &Tolerances::default(), Selection::Only(t));
        assert!(matches!(r, Err(Error::HypothesisViolation { .. })), "{t:?}");
    }
    let all = check_theorem_equivalences(&s, &policy, &Tolerances::default(), Selection::All).unwrap();
    assert!(all.entries.iter().find(|e| e.theorem == Theorem::T3).unwrap().agrees().is_none());
}

#[test]
fn theorem3_with_zero_scalar_on_riemannian_product() {
    let s = spec(catalog::euclidean(2), catalog::conformal(), Expr::x(0).exp())
        .with_isotropic_scalar(Expr::constant(0.0))
        .unwrap();
    let r = check_theorem_equivalences(
        &s,
        &SamplingPolicy::with_counts(1, 3, 3),
        &Tolerances::default(),
        Selection::Only(Theorem::T3),
    )
    .unwrap();
    assert_eq!(evaluated(&r, Theorem::T3), (true, true));
    assert!(r.isotropy_residual.unwrap() < 1e-8);
}
