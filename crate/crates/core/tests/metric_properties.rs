mod common;

use funkball::finsler::{
    legendre_gradient, polar_f_star, randers_f, reversibility, uniformity_at, klein_cometric,
};
use funkball::{BallPoint, CoVec, ModelParams, TanVec};
use proptest::prelude::*;

fn point(r: f64, raw: &[f64]) -> BallPoint {
    let len = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
    BallPoint::new(raw.iter().map(|v| r * v / len).collect()).unwrap()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn setup() -> impl Strategy<Value = (ModelParams, BallPoint, Vec<f64>, Vec<f64>)> {
    (2usize..=4, 0.0f64..=1.0, 0.0f64..0.97).prop_flat_map(|(n, a, r)| {
        (
            Just(ModelParams::new(n, a).unwrap()),
            prop::collection::vec(-1.0f64..1.0, n).prop_map(move |raw| point(r, &raw)),
            prop::collection::vec(-3.0f64..3.0, n),
            prop::collection::vec(-3.0f64..3.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn positive_homogeneity((p, x, y, al) in setup(), t in 0.01f64..50.0) {
        let f = randers_f(&p, &x, &TanVec(y.clone())).unwrap();
        let ft = randers_f(&p, &x, &TanVec(y.iter().map(|v| t * v).collect())).unwrap();
        prop_assert!((ft - t * f).abs() <= 1e-12 * (1.0 + t * f));
        let g = polar_f_star(&p, &x, &CoVec(al.clone())).unwrap();
        let gt = polar_f_star(&p, &x, &CoVec(al.iter().map(|v| t * v).collect())).unwrap();
        prop_assert!((gt - t * g).abs() <= 1e-12 * (1.0 + t * g));
    }

    #[test]
    fn triangle_inequalities((p, x, y, z) in setup()) {
        let f = |v: &[f64]| randers_f(&p, &x, &TanVec(v.to_vec())).unwrap();
        let sum: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a + b).collect();
        prop_assert!(f(&sum) <= f(&y) + f(&z) + 1e-10);
        let g = |v: &[f64]| polar_f_star(&p, &x, &CoVec(v.to_vec())).unwrap();
        prop_assert!(g(&sum) <= g(&y) + g(&z) + 1e-10);
    }

    #[test]
    fn fenchel_young_and_reversibility((p, x, y, al) in setup()) {
        let f = randers_f(&p, &x, &TanVec(y.clone())).unwrap();
        let g = polar_f_star(&p, &x, &CoVec(al.clone())).unwrap();
        prop_assert!(dot(&al, &y) <= g * f * (1.0 + 1e-12) + 1e-12);
        if !p.is_funk() {
            let back = randers_f(&p, &x, &TanVec(y.iter().map(|v| -v).collect())).unwrap();
            prop_assert!(back <= reversibility(&p) * f * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn klein_sandwich((p, x, _y, al) in setup()) {
        let g = polar_f_star(&p, &x, &CoVec(al.clone())).unwrap();
        let k = klein_cometric(&x, &CoVec(al.clone())).unwrap().sqrt();
        let b = p.a() * x.norm();
        prop_assert!(g >= k / (1.0 + b) * (1.0 - 1e-12) - 1e-12);
        prop_assert!(g * (1.0 - b) <= k * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn legendre_duality((p, x, _y, al) in setup()) {
        let g = polar_f_star(&p, &x, &CoVec(al.clone())).unwrap();
        let grad = legendre_gradient(&p, &x, &CoVec(al.clone())).unwrap();
        prop_assert!((dot(&al, &grad.0) - g * g).abs() <= 1e-9 * (1.0 + g * g));
        let f = randers_f(&p, &x, &grad).unwrap();
        prop_assert!((f - g).abs() <= 1e-9 * (1.0 + g));
    }

    #[test]
    fn legendre_monotonicity((p, x, al, be) in setup()) {
        let ja = legendre_gradient(&p, &x, &CoVec(al.clone())).unwrap();
        let jb = legendre_gradient(&p, &x, &CoVec(be.clone())).unwrap();
        let diff: Vec<f64> = al.iter().zip(&be).map(|(a, b)| a - b).collect();
        let jd: Vec<f64> = ja.0.iter().zip(&jb.0).map(|(a, b)| a - b).collect();
        let lf = uniformity_at(&p, &x).unwrap();
        let fd = polar_f_star(&p, &x, &CoVec(diff.clone())).unwrap();
        prop_assert!(dot(&diff, &jd) >= lf * fd * fd - 1e-9 * (1.0 + fd * fd));
    }
}

#[test]
fn polar_agrees_with_general_randers_route() {
    use funkball::finsler::oracle::general_randers_polar;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    for _ in 0..500 {
        let n = rng.random_range(2..=5);
        let p = ModelParams::new(n, rng.random_range(0.0..=1.0)).unwrap();
        let r = rng.random_range(0.0..0.99);
        let x = point(r, &common::random_unit(&mut rng, n));
        let al: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let closed = polar_f_star(&p, &x, &CoVec(al.clone())).unwrap();
        let general = general_randers_polar(&p, &x, &CoVec(al));
        assert!((closed - general).abs() <= 1e-9 * (1.0 + closed), "{closed} vs {general}");
    }
}
