//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::time::Instant;

use gtensor::correspond::{
    add_noise_set, estimate_tensor, sample_correspondences, DEFAULT_ESTIMATION_TOL,
};
use gtensor::numeric::{Vector, DEFAULT_RANK_TOL};
use gtensor::reconstruct::{
    expected_jacobian_rank, pgl_equivalent, reconstruct_from_tensor, tensor_map_jacobian_rank,
    DEDUP_TOL, DEFAULT_JACOBIAN_STEP,
};
use gtensor::sampling::{gaussian_matrix, gaussian_vector, seeded_rng};
use gtensor::scene::{project, random_config, ScenePoint};
use gtensor::tensor::{
    compute_tensor, incidence_oracle, incidence_value, rank_profile_at, CodimSubspaceTuple, Profile,
};
use gtensor::twist::{
    dual_config, sample_contracted_points, vanishing_system, verify_same_hypersurface, CremonaMap,
    CONTRACTION_TOL, CREMONA_TOL, HYPERSURFACE_TOL,
};

struct Shape {
    n: usize,
    m: &'static [usize],
    alpha: &'static [usize],
}

const SHAPES: [Shape; 4] = [
    Shape {
        n: 3,
        m: &[2, 2],
        alpha: &[2, 2],
    },
    Shape {
        n: 3,
        m: &[2, 2, 2],
        alpha: &[2, 1, 1],
    },
    Shape {
        n: 3,
        m: &[1, 1, 1, 1],
        alpha: &[1, 1, 1, 1],
    },
    Shape {
        n: 4,
        m: &[2, 2, 3],
        alpha: &[2, 1, 2],
    },
];

impl Shape {
    fn profile(&self) -> Profile {
        Profile::new(self.n, self.m.to_vec(), self.alpha.to_vec()).unwrap()
    }

    fn is_line_case(&self) -> bool {
        self.m.len() == self.n + 1 && self.m.iter().all(|&x| x == 1)
    }

    fn label(&self) -> String {
        format!("n={} m={:?} alpha={:?}", self.n, self.m, self.alpha)
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn random_tuple(rng: &mut gtensor::sampling::Rng, p: &Profile) -> CodimSubspaceTuple {
    let forms = p
        .m()
        .iter()
        .zip(p.alpha())
        .map(|(&mi, &ai)| gaussian_matrix(rng, ai, mi + 1))
        .collect();
    CodimSubspaceTuple::new(forms).unwrap()
}

fn criterion_1() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (k, shape) in SHAPES.iter().enumerate() {
        let start = Instant::now();
        let p = shape.profile();
        let cfg = random_config(shape.n, shape.m, 100 + k as u64).unwrap();
        let a = compute_tensor(&cfg, &p).unwrap();
        let mut rng = seeded_rng(200 + k as u64);
        let ratios: Vec<f64> = (0..1000)
            .map(|_| {
                let u = random_tuple(&mut rng, &p);
                incidence_value(&a, &u).unwrap() / incidence_oracle(&cfg, &u).unwrap()
            })
            .collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let spread = ratios
            .iter()
            .map(|r| ((r - mean) / mean).abs())
            .fold(0.0, f64::max);
        let secs = start.elapsed().as_secs_f64();
        passed &= spread <= 1e-8 && secs <= 10.0;
        parts.push(format!(
            "{}: spread {spread:.1e} in {secs:.2}s",
            shape.label()
        ));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_2() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for shape in &SHAPES {
        let p = shape.profile();
        let (mut worst, mut failures, mut min_gap) = (0.0f64, 0, f64::INFINITY);
        for seed in 0..50u64 {
            let cfg = random_config(shape.n, shape.m, seed).unwrap();
            let truth = compute_tensor(&cfg, &p).unwrap();
            let cs = sample_correspondences(&cfg, &p, p.size() - 1, 10_000 + seed).unwrap();
            match estimate_tensor(&cs, DEFAULT_ESTIMATION_TOL) {
                Ok((est, diag)) => {
                    let d = est.distance(&truth).unwrap();
                    worst = worst.max(d);
                    min_gap = min_gap.min(diag.relative_gap());
                    if d > 1e-8 || diag.nullity != 1 {
                        failures += 1;
                    }
                }
                Err(_) => failures += 1,
            }
        }
        passed &= failures == 0;
        parts.push(format!(
            "{}: {}/50 ok, worst distance {worst:.1e}, min gap {min_gap:.1e}",
            shape.label(),
            50 - failures
        ));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_3() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for shape in SHAPES.iter().filter(|s| !s.is_line_case()) {
        let p = shape.profile();
        let (mut successes, mut extra_orbits) = (0, 0);
        for seed in 0..20u64 {
            let truth = random_config(shape.n, shape.m, 300 + seed).unwrap();
            let a = compute_tensor(&truth, &p).unwrap();
            let Ok(orbits) = reconstruct_from_tensor(&a, 50, seed) else {
                continue;
            };
            if orbits.len() > 1 {
                extra_orbits += 1;
            }
            let all_truth = orbits.iter().all(|o| {
                o.residual <= 1e-6
                    && pgl_equivalent(&o.config, &truth, DEDUP_TOL)
                        .unwrap()
                        .is_some()
            });
            if all_truth {
                successes += 1;
            }
        }
        passed &= successes >= 18 && extra_orbits == 0;
        parts.push(format!(
            "{}: {successes}/20 recovered, {extra_orbits} seeds with extra orbits",
            shape.label()
        ));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for n in [2usize, 3] {
        let m = vec![1; n + 1];
        let p = Profile::new(n, m.clone(), m.clone()).unwrap();
        let (mut converged, mut good) = (0, 0);
        for seed in 0..20u64 {
            let truth = random_config(n, &m, 400 + seed).unwrap();
            let a = compute_tensor(&truth, &p).unwrap();
            let Ok(orbits) = reconstruct_from_tensor(&a, 50, seed) else {
                continue;
            };
            converged += 1;
            let twin = dual_config(&truth).unwrap().identified().unwrap();
            let is = |o: &gtensor::reconstruct::ReconstructionResult, c| {
                pgl_equivalent(&o.config, c, DEDUP_TOL).unwrap().is_some()
            };
            let ok = orbits.len() == 2
                && ((is(&orbits[0], &truth) && is(&orbits[1], &twin))
                    || (is(&orbits[0], &twin) && is(&orbits[1], &truth)))
                && pgl_equivalent(&truth, &twin, DEDUP_TOL).unwrap().is_none();
            if ok {
                good += 1;
            }
        }
        passed &= converged > 0 && good == converged;
        parts.push(format!(
            "n={n}: {good}/{converged} converged seeds show exactly the pair"
        ));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for n in 2..=4usize {
        let mut worst = 0.0f64;
        for seed in 0..20u64 {
            let cfg = random_config(n, &vec![1; n + 1], 500 + seed).unwrap();
            let dual = dual_config(&cfg).unwrap();
            let report = verify_same_hypersurface(&cfg, &dual, 1000, seed).unwrap();
            worst = worst.max(report.max_relative);
        }
        passed &= worst <= HYPERSURFACE_TOL;
        parts.push(format!("n={n}: max {worst:.1e}"));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for n in 2..=4usize {
        let (mut dims_ok, mut worst_cremona, mut worst_contract) = (true, 0.0f64, 0.0f64);
        for seed in 0..20u64 {
            let cfg = random_config(n, &vec![1; n + 1], 600 + seed).unwrap();
            let all: Vec<usize> = (1..=n + 1).collect();
            dims_ok &= vanishing_system(&cfg, n, &all).unwrap().dim() == n + 1;
            for skip in 1..=n + 1 {
                let loci: Vec<usize> = all.iter().copied().filter(|&i| i != skip).collect();
                dims_ok &= vanishing_system(&cfg, n - 1, &loci).unwrap().dim() == 1;
            }
            let map = CremonaMap::fit(&cfg, seed).unwrap();
            worst_cremona = worst_cremona.max(map.consistency(&cfg, 100, seed + 1).unwrap());
            for excluded in 1..=n + 1 {
                let s = map.dual().config().camera(excluded - 1).matrix().clone();
                for z in sample_contracted_points(&cfg, excluded, 3, seed).unwrap() {
                    let w = map.apply(z.as_slice()).unwrap();
                    worst_contract = worst_contract.max((&s * &w).norm() / (s.norm() * w.norm()));
                }
            }
        }
        passed &= dims_ok && worst_cremona <= CREMONA_TOL && worst_contract <= CONTRACTION_TOL;
        parts.push(format!(
            "n={n}: dims {}, cremona {worst_cremona:.1e}, contraction {worst_contract:.1e}",
            if dims_ok { "ok" } else { "WRONG" }
        ));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_7() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for shape in &SHAPES {
        let cfg = random_config(shape.n, shape.m, 700).unwrap();
        let rank = tensor_map_jacobian_rank(&cfg, &shape.profile(), DEFAULT_JACOBIAN_STEP).unwrap();
        let expected = expected_jacobian_rank(shape.n, shape.m);
        passed &= rank == expected;
        parts.push(format!(
            "{}: rank {rank} (expected {expected})",
            shape.label()
        ));
    }
    // The two-view image is a hypersurface of P^8.
    let cfg = random_config(3, &[2, 2], 701).unwrap();
    let p = Profile::new(3, vec![2, 2], vec![2, 2]).unwrap();
    let rank = tensor_map_jacobian_rank(&cfg, &p, DEFAULT_JACOBIAN_STEP).unwrap();
    passed &= rank == 7;
    parts.push(format!("two views: rank {rank} (expected 7)"));
    outcome(passed, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (k, shape) in SHAPES.iter().enumerate() {
        let cfg = random_config(shape.n, shape.m, 800 + k as u64).unwrap();
        let mut rng = seeded_rng(801 + k as u64);
        let mut wrong = 0;
        for _ in 0..1000 {
            let z = ScenePoint::new(gaussian_vector(&mut rng, shape.n + 1)).unwrap();
            let x: Vec<Vector> = project(&cfg, &z).unwrap();
            if rank_profile_at(&cfg, &x, DEFAULT_RANK_TOL).unwrap() != shape.n {
                wrong += 1;
            }
        }
        passed &= wrong == 0;
        parts.push(format!(
            "{}: {}/1000 at rank n",
            shape.label(),
            1000 - wrong
        ));
    }
    outcome(passed, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let sigmas = [0.0, 1e-8, 1e-6, 1e-4];
    let mut passed = true;
    let mut parts = Vec::new();
    for shape in &SHAPES {
        let p = shape.profile();
        let mut errors = vec![0.0f64; sigmas.len()];
        for seed in 0..10u64 {
            let cfg = random_config(shape.n, shape.m, 900 + seed).unwrap();
            let truth = compute_tensor(&cfg, &p).unwrap();
            let cs = sample_correspondences(&cfg, &p, 4 * p.size(), 901 + seed).unwrap();
            for (e, &sigma) in errors.iter_mut().zip(&sigmas) {
                let noisy = add_noise_set(&cs, sigma, 902 + seed).unwrap();
                let (est, _) = estimate_tensor(&noisy, DEFAULT_ESTIMATION_TOL).unwrap();
                *e = e.max(est.distance(&truth).unwrap());
            }
        }
        let bounded = errors
            .iter()
            .zip(&sigmas)
            .all(|(e, s)| *e <= (100.0 * s).max(1e-10));
        let monotone = errors.windows(2).all(|w| w[0] <= w[1]);
        passed &= bounded && monotone;
        let shown: Vec<String> = errors.iter().map(|e| format!("{e:.1e}")).collect();
        parts.push(format!("{}: errors [{}]", shape.label(), shown.join(", ")));
    }
    outcome(passed, parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 oracle equivalence", criterion_1),
        ("2 tensor uniqueness from correspondences", criterion_2),
        ("3 reconstruction uniqueness", criterion_3),
        ("4 twisted pair", criterion_4),
        ("5 hypersurface equality", criterion_5),
        ("6 cremona structure", criterion_6),
        ("7 fiber dimension", criterion_7),
        ("8 rank stratification", criterion_8),
        ("9 noise degradation", criterion_9),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let result = run();
        let status = if result.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {name}: {status} ({:.1}s) {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
