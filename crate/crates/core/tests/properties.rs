use gtensor::correspond::{
    estimate_tensor, sample_correspondence, sample_correspondences, DEFAULT_ESTIMATION_TOL,
};
use gtensor::numeric::{det, proj_distance, Mat};
use gtensor::reconstruct::{gauge_fix, pgl_equivalent};
use gtensor::sampling::{gaussian_matrix, seeded_rng};
use gtensor::scene::{apply_homography, random_config};
use gtensor::tensor::{canonicalize, compute_tensor, incidence_value, Profile};
use gtensor::twist::dual_config;
use proptest::prelude::*;

/// Shapes with their profiles: (n, m, alpha).
fn shape() -> impl Strategy<Value = (usize, Vec<usize>, Vec<usize>)> {
    prop_oneof![
        Just((3, vec![2, 2], vec![2, 2])),
        Just((3, vec![2, 2, 2], vec![2, 1, 1])),
        Just((3, vec![2, 2, 2], vec![1, 1, 2])),
        Just((3, vec![1, 1, 1, 1], vec![1, 1, 1, 1])),
        Just((2, vec![1, 1, 1], vec![1, 1, 1])),
        Just((4, vec![2, 2, 3], vec![2, 1, 2])),
        Just((4, vec![3, 3], vec![2, 3])),
    ]
}

fn homography(n: usize, seed: u64) -> Mat {
    let mut rng = seeded_rng(seed);
    loop {
        let h = gaussian_matrix(&mut rng, n + 1, n + 1);
        if det(&h).abs() > 1e-2 {
            return h;
        }
    }
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn canonical_form_is_idempotent_and_scale_free(
        v in prop::collection::vec(-10.0f64..10.0, 2..40),
        scale in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3],
    ) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
        let mut a = v.clone();
        canonicalize(&mut a).unwrap();
        let mut again = a.clone();
        canonicalize(&mut again).unwrap();
        prop_assert_eq!(&a, &again);
        let mut b: Vec<f64> = v.iter().map(|x| x * scale).collect();
        canonicalize(&mut b).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn flat_indices_round_trip((n, m, alpha) in shape(), k in 0usize..1000) {
        let p = Profile::new(n, m, alpha).unwrap();
        let flat = k % p.size();
        prop_assert_eq!(p.flatten(&p.unflatten(flat)), flat);
    }

    #[test]
    fn tensor_class_is_pgl_invariant((n, m, alpha) in shape(), seed in 0u64..10_000) {
        let cfg = random_config(n, &m, seed).unwrap();
        let p = Profile::new(n, m, alpha).unwrap();
        let moved = apply_homography(&cfg, &homography(n, seed + 1)).unwrap();
        let d = compute_tensor(&cfg, &p).unwrap().distance(&compute_tensor(&moved, &p).unwrap()).unwrap();
        prop_assert!(d <= 1e-9, "distance {d}");
    }

    #[test]
    fn sampled_correspondences_are_incident((n, m, alpha) in shape(), seed in 0u64..10_000) {
        let cfg = random_config(n, &m, seed).unwrap();
        let p = Profile::new(n, m, alpha).unwrap();
        let a = compute_tensor(&cfg, &p).unwrap();
        let u = sample_correspondence(&cfg, &p, seed + 7).unwrap();
        prop_assert!(incidence_value(&a, &u).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn estimation_is_pgl_equivariant((n, m, alpha) in shape(), seed in 0u64..10_000) {
        let cfg = random_config(n, &m, seed).unwrap();
        let p = Profile::new(n, m, alpha).unwrap();
        let count = p.size() - 1;
        prop_assume!(count >= 1);
        let moved = apply_homography(&cfg, &homography(n, seed + 3)).unwrap();
        let (ea, _) = estimate_tensor(&sample_correspondences(&cfg, &p, count, seed).unwrap(), DEFAULT_ESTIMATION_TOL).unwrap();
        let (eb, _) = estimate_tensor(&sample_correspondences(&moved, &p, count, seed + 1).unwrap(), DEFAULT_ESTIMATION_TOL).unwrap();
        prop_assert!(ea.distance(&eb).unwrap() <= 1e-8);
    }

    #[test]
    fn homographies_are_recovered((n, m, _alpha) in shape(), seed in 0u64..10_000) {
        let cfg = random_config(n, &m, seed).unwrap();
        let h = homography(n, seed + 5);
        let moved = apply_homography(&cfg, &h).unwrap();
        let (found, lambdas) = pgl_equivalent(&cfg, &moved, 1e-8).unwrap().expect("equivalent");
        let d = proj_distance(found.matrix().as_slice(), h.as_slice()).unwrap();
        prop_assert!(d <= 1e-8, "homography distance {d}");
        prop_assert_eq!(lambdas.len(), m.len());
        prop_assert!(pgl_equivalent(&moved, &cfg, 1e-8).unwrap().is_some());
    }

    #[test]
    fn gauge_fix_picks_one_representative((n, m, _alpha) in shape(), seed in 0u64..10_000) {
        let cfg = random_config(n, &m, seed).unwrap();
        let moved = apply_homography(&cfg, &homography(n, seed + 9)).unwrap();
        let (a, b) = (gauge_fix(&cfg).unwrap(), gauge_fix(&moved).unwrap());
        let diff = (a.stacked() - b.stacked()).amax();
        let scale = a.stacked().amax();
        prop_assert!(diff <= 1e-7 * scale, "gauge-fixed matrices differ by {diff}");
    }

    #[test]
    fn dual_is_an_involution(n in 2usize..5, seed in 0u64..10_000) {
        let cfg = random_config(n, &vec![1; n + 1], seed).unwrap();
        let dual = dual_config(&cfg).unwrap();
        let back = dual_config(dual.config()).unwrap();
        prop_assert!(pgl_equivalent(&cfg, back.config(), 1e-8).unwrap().is_some());
        let twin = dual.identified().unwrap();
        prop_assert!(pgl_equivalent(&cfg, &twin, 1e-6).unwrap().is_none());
    }
}
