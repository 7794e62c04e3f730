use finsler_core::catalog;
use finsler_core::crosscheck::{compare, fd_cartan, fd_fundamental};
use finsler_core::fd::fd_partial;
use finsler_core::geometry::{
    berwald_curvature, cartan_raised, cartan_tensor, douglas_curvature, fundamental_tensor, inverse_fundamental_tensor,
    mean_berwald, spray_coefficients,
};
use finsler_core::linalg::{identity, inverse, matmul};
use finsler_core::{Depth, Error, Expr, FinslerEvaluator, MetricSpec, SamplingPolicy};

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

#[test]
fn euclidean_fundamental_is_identity() {
    let g = fundamental_tensor(&catalog::euclidean(2), &[0.3, 0.9], &[0.2, -1.7]).unwrap();
    assert_eq!(g.components, identity(2));
}

#[test]
fn conformal_factor_one_at_origin() {
    let g = fundamental_tensor(&catalog::conformal(), &[0.0, 0.5], &[0.6, 0.8]).unwrap();
    assert!(max_dev(&g.components, &identity(2)) < 1e-15);
}

#[test]
fn randers_fundamental_matches_oracle() {
    let m = catalog::randers(0.5);
    let (x, y) = ([0.0, 0.0], [1.0, 0.0]);
    let g = fundamental_tensor(&m, &x, &y).unwrap();
    let c = compare(&g, &fd_fundamental(&m, &x, &y).unwrap()).unwrap();
    assert!(c.passed, "{c:?}");
    // closed form at y = (1, 0): g = diag((1+b)², 1+b)
    assert!(max_dev(&g.components, &[2.25, 0.0, 0.0, 1.5]) < 1e-13);
}

#[test]
fn diagonal_inverse() {
    let m = MetricSpec::new(2, 2.0 * Expr::y(0).square() + 0.5 * Expr::y(1).square(), vec![(0.0, 1.0); 2], "diag").unwrap();
    let gi = inverse_fundamental_tensor(&m, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    assert!(max_dev(&gi.components, &[0.5, 0.0, 0.0, 2.0]) < 1e-15);
}

#[test]
fn randers_inverse_product_is_identity() {
    let m = catalog::randers(0.5);
    let eval = FinslerEvaluator::new(&m, Depth::Metric).unwrap();
    for p in SamplingPolicy::with_counts(9, 8, 8).sample_points(&m).unwrap() {
        let geo = eval.at(&p.x, &p.y).unwrap();
        assert!(max_dev(&matmul(geo.g(), geo.g_inverse(), 2), &identity(2)) <= 1e-10);
    }
}

#[test]
fn riemannian_cartan_vanishes() {
    for m in [catalog::euclidean(3), catalog::conformal(), catalog::riemannian_mixed()] {
        let x = vec![0.4; m.dimension];
        let y: Vec<f64> = (0..m.dimension).map(|i| 0.3 + i as f64).collect();
        assert!(cartan_tensor(&m, &x, &y).unwrap().sup_norm() <= 1e-12, "{}", m.label);
        let (c, d) = cartan_raised(&m, &x, &y).unwrap();
        assert!(c.sup_norm() <= 1e-12 && d.sup_norm() <= 1e-12);
    }
}

#[test]
fn randers_cartan_matches_oracle_and_is_nonzero() {
    let m = catalog::randers(0.5);
    let (x, y) = ([0.1, 0.2], [1.0, 1.0]);
    let c = cartan_tensor(&m, &x, &y).unwrap();
    assert!(c.sup_norm() > 0.01);
    assert!(compare(&c, &fd_cartan(&m, &x, &y).unwrap()).unwrap().passed);
    assert!(c.lower_asymmetry() == 0.0);
}

#[test]
fn dginv_is_minus_twice_raised_cartan() {
    for m in catalog::standard_suite() {
        let eval = FinslerEvaluator::new(&m, Depth::Metric).unwrap();
        for p in SamplingPolicy::with_counts(4, 4, 4).sample_points(&m).unwrap() {
            let (c, d) = eval.at(&p.x, &p.y).unwrap().cartan_raised();
            let dev = c.components.iter().zip(&d.components).map(|(c, d)| (d + 2.0 * c).abs()).fold(0.0, f64::max);
            assert!(dev <= 1e-7, "{} {dev:e}", m.label);
        }
    }
}

/// `½ Γ^i_jk y^j y^k` with Christoffel symbols from finite differences of
/// the matrix `a(x)`; never touches the jet engine.
fn christoffel_spray(a: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut da = vec![0.0; n * n * n]; // ∂_k a_ij at (i*n+j)*n+k
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                da[(i * n + j) * n + k] = fd_partial(|p: &[f64]| Ok(a(p)[i * n + j]), x, &[k]).unwrap().value;
            }
        }
    }
    let ainv = inverse(&a(x), n).unwrap();
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for l in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let gamma_l = 0.5 * (da[(l * n + j) * n + k] + da[(l * n + k) * n + j] - da[(j * n + k) * n + l]);
                        acc += ainv[i * n + l] * gamma_l * y[j] * y[k];
                    }
                }
            }
            0.5 * acc
        })
        .collect()
}

#[test]
fn conformal_spray_matches_christoffel_oracle() {
    let m = catalog::conformal();
    let a = |x: &[f64]| {
        let e = (2.0 * x[0]).exp();
        vec![e, 0.0, 0.0, e]
    };
    let eval = FinslerEvaluator::new(&m, Depth::Spray).unwrap();
    for p in SamplingPolicy::with_counts(11, 16, 16).sample_points(&m).unwrap() {
        let s = eval.at(&p.x, &p.y).unwrap().spray().unwrap();
        let oracle = christoffel_spray(&a, &p.x, &p.y);
        let scale = oracle.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        assert!(max_dev(&s.components, &oracle) <= 1e-7 * scale, "{:?} vs {oracle:?}", s.components);
    }
}

#[test]
fn mixed_riemannian_spray_matches_christoffel_oracle() {
    let m = catalog::riemannian_mixed();
    let a = |x: &[f64]| vec![1.0 + x[0] * x[0], 0.25 * x[1], 0.25 * x[1], 2.0 + x[0].sin()];
    let s = spray_coefficients(&m, &[0.3, 0.8], &[0.6, -0.8]).unwrap();
    let oracle = christoffel_spray(&a, &[0.3, 0.8], &[0.6, -0.8]);
    assert!(max_dev(&s.components, &oracle) <= 1e-7);
}

#[test]
fn x_independent_sprays_vanish() {
    for m in [catalog::quartic_minkowski(2), catalog::randers(0.5), catalog::euclidean(2)] {
        assert_eq!(spray_coefficients(&m, &[0.2, 0.2], &[0.3, 0.7]).unwrap().sup_norm(), 0.0, "{}", m.label);
    }
}

#[test]
fn spray_is_two_homogeneous() {
    let m = catalog::randers_x();
    let s1 = spray_coefficients(&m, &[0.5, 0.1], &[0.3, -0.4]).unwrap();
    let s2 = spray_coefficients(&m, &[0.5, 0.1], &[0.6, -0.8]).unwrap();
    for (a, b) in s1.components.iter().zip(&s2.components) {
        assert!((b - 4.0 * a).abs() <= 1e-8 * b.abs().max(1e-300));
    }
}

#[test]
fn berwald_family_vanishes_on_riemannian() {
    for m in [catalog::euclidean(2), catalog::conformal(), catalog::riemannian_mixed()] {
        let (x, y) = ([0.3, 0.7], [0.8, 0.6]);
        assert!(berwald_curvature(&m, &x, &y).unwrap().sup_norm() <= 1e-10, "{}", m.label);
        assert!(mean_berwald(&m, &x, &y).unwrap().sup_norm() <= 1e-10);
        assert!(douglas_curvature(&m, &x, &y).unwrap().sup_norm() <= 1e-10);
    }
}

#[test]
fn x_dependent_randers_is_not_berwald() {
    let m = catalog::randers_x();
    let eval = FinslerEvaluator::new(&m, Depth::Douglas).unwrap();
    let geo = eval.at(&[0.5, 0.5], &[0.6, 0.8]).unwrap();
    let b = geo.berwald().unwrap();
    assert!(b.sup_norm() > 1e-3);
    assert!(b.lower_asymmetry() <= 1e-12);
    // E by independent contraction of B
    let e = geo.mean_berwald().unwrap();
    for j in 0..2 {
        for k in 0..2 {
            let tr = 0.5 * (b.get(&[0, j, k, 0]) + b.get(&[1, j, k, 1]));
            assert!((e.get(&[j, k]) - tr).abs() <= 1e-14);
        }
    }
}

#[test]
fn douglas_term_by_term() {
    let m = catalog::randers_x();
    let geo = FinslerEvaluator::new(&m, Depth::Douglas).unwrap().at(&[0.2, 0.9], &[-0.6, 0.8]).unwrap();
    let (b, e, de, d) = (
        geo.berwald().unwrap(),
        geo.mean_berwald().unwrap(),
        geo.mean_berwald_derivative().unwrap(),
        geo.douglas().unwrap(),
    );
    let y = [-0.6, 0.8];
    let delta = |a: usize, b: usize| f64::from(u8::from(a == b));
    for (i, yi) in y.iter().enumerate() {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let expect = b.get(&[i, j, k, l])
                        - 2.0 / 3.0
                            * (e.get(&[j, k]) * delta(i, l)
                                + e.get(&[j, l]) * delta(i, k)
                                + e.get(&[k, l]) * delta(i, j)
                                + de.get(&[j, k, l]) * yi);
                    assert!((d.get(&[i, j, k, l]) - expect).abs() <= 1e-14);
                }
            }
        }
    }
}

#[test]
fn degenerate_metric_reports_eigenvalues() {
    let m = MetricSpec::new(2, Expr::y(0).square(), vec![(0.0, 1.0); 2], "degenerate").unwrap();
    match fundamental_tensor(&m, &[0.0, 0.0], &[1.0, 1.0]) {
        Err(Error::MetricDegeneracy { eigenvalues }) => assert_eq!(eigenvalues.len(), 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn depth_is_enforced() {
    let m = catalog::randers_x();
    let geo = FinslerEvaluator::new(&m, Depth::Spray).unwrap().at(&[0.2, 0.2], &[1.0, 0.0]).unwrap();
    assert!(matches!(geo.berwald(), Err(Error::DepthUnavailable { .. })));
}
