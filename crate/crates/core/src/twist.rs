//! The case `m = (1, ..., 1)` with `n+1` cameras: the dual configuration,
//! the identification `P(W) = P(W^∨)` for 2-dimensional `W`, and the
//! Cremona map between the two reconstructions.
//!
//! For `x` in the multiview hypersurface, the dual scene point over `x` is
//! the kernel of the matrix with rows `x_i^T s'_i`; that matrix is singular
//! exactly on the hypersurface, which is how `X = X'` is checked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    nullspace, proj_distance, rank, right_singular_system, Mat, Vector, DEFAULT_RANK_TOL,
};
use crate::poly::{monomials, substitution_matrix, PolyBasis};
use crate::report::Check;
use crate::sampling::{gaussian_vector, seeded_rng, Rng};
use crate::scene::{project, CameraConfig, ScenePoint, MAX_RESAMPLES};
use crate::tensor::{compute_tensor, contract, Profile};

/// Relative singular-value threshold for the vanishing conditions.
pub const VANISHING_TOL: f64 = 1e-9;
pub const HYPERSURFACE_TOL: f64 = 1e-8;
pub const CREMONA_TOL: f64 = 1e-8;
pub const CONTRACTION_TOL: f64 = 1e-6;

fn require_line_case(cfg: &CameraConfig) -> Result<()> {
    if !cfg.is_line_case() {
        return Err(Error::precondition(format!(
            "expected n+1 = {} cameras onto P^1, got m = {:?}",
            cfg.n() + 1,
            cfg.m()
        )));
    }
    Ok(())
}

/// Cameras `s'_i: V' -> W_i^∨`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualConfig {
    config: CameraConfig,
}

impl DualConfig {
    /// Wrap any configuration of the right shape, e.g. as a negative control.
    pub fn from_config(config: CameraConfig) -> Result<Self> {
        require_line_case(&config)?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &CameraConfig {
        &self.config
    }

    pub fn into_config(self) -> CameraConfig {
        self.config
    }

    /// The same cameras read in `P(W_i)` through `identify`: `J s'_i`.
    pub fn identified(&self) -> Result<CameraConfig> {
        let j = identification_matrix();
        CameraConfig::from_matrices(
            self.config.n(),
            self.config
                .cameras()
                .iter()
                .map(|c| &j * c.matrix())
                .collect(),
        )
    }

    /// The dual scene point over an image tuple of the original cameras.
    pub fn scene_point_over(&self, x: &[Vector]) -> Result<Vector> {
        let m = incidence_rows(&self.config, x)?;
        let (_, v) = right_singular_system(&m)?;
        Ok(v.column(v.ncols() - 1).into_owned())
    }
}

/// `[[0, 1], [-1, 0]]`, sending a functional to a spanning vector of its kernel.
pub fn identification_matrix() -> Mat {
    Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

/// `[f_0 : f_1] -> [f_1 : -f_0]`.
pub fn identify(f: &Vector) -> Result<Vector> {
    if f.len() != 2 {
        return Err(Error::input(format!(
            "expected a 2-vector, got length {}",
            f.len()
        )));
    }
    if !(f.norm() > 0.0) || !f.norm().is_finite() {
        return Err(Error::input("cannot identify a zero or non-finite vector"));
    }
    Ok(identification_matrix() * f)
}

/// Orthonormal basis of `ker(S^T)` sliced into 2-row cameras.
pub fn dual_config(cfg: &CameraConfig) -> Result<DualConfig> {
    require_line_case(cfg)?;
    let dim = cfg.n() + 1;
    let stacked = cfg.stacked();
    if rank(&stacked, DEFAULT_RANK_TOL)? < dim {
        return Err(Error::degenerate("stacked camera matrix is not injective"));
    }
    let kernel = nullspace(&stacked.transpose(), DEFAULT_RANK_TOL)?;
    if kernel.len() != dim {
        return Err(Error::degenerate(format!(
            "cokernel has dimension {}, expected {dim}",
            kernel.len()
        )));
    }
    let dual = Mat::from_columns(&kernel);
    let m = vec![1; dim];
    Ok(DualConfig {
        config: CameraConfig::from_stacked(cfg.n(), &m, &dual)?,
    })
}

/// Rows `x_i^T s'_i`, one per camera.
fn incidence_rows(dual: &CameraConfig, x: &[Vector]) -> Result<Mat> {
    if x.len() != dual.len() || x.iter().any(|xi| xi.len() != 2) {
        return Err(Error::input("need one 2-vector per camera"));
    }
    let mut m = Mat::zeros(dual.len(), dual.n() + 1);
    for (i, (xi, c)) in x.iter().zip(dual.cameras()).enumerate() {
        m.set_row(i, &(xi.transpose() * c.matrix()));
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypersurfaceReport {
    pub samples: usize,
    /// Largest `|B(x)|` relative to `||B|| prod ||x_i||`.
    pub max_relative: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl HypersurfaceReport {
    pub fn to_check(&self, name: &str) -> Check {
        Check::at_most(name, self.max_relative, self.threshold)
    }
}

fn random_image_tuple(cfg: &CameraConfig, rng: &mut Rng) -> Result<(Vector, Vec<Vector>)> {
    for _ in 0..MAX_RESAMPLES {
        let z = ScenePoint::new(gaussian_vector(rng, cfg.n() + 1))?;
        if let Ok(x) = project(cfg, &z) {
            return Ok((z.into_inner(), x));
        }
    }
    Err(Error::Generation {
        attempts: MAX_RESAMPLES,
    })
}

/// Evaluate the multilinear equation of the dual configuration at images of
/// random scene points of `cfg`.
pub fn verify_same_hypersurface(
    cfg: &CameraConfig,
    dual: &DualConfig,
    samples: usize,
    seed: u64,
) -> Result<HypersurfaceReport> {
    require_line_case(cfg)?;
    if dual.config.n() != cfg.n() {
        return Err(Error::input("configuration and dual have different n"));
    }
    let dim = cfg.n() + 1;
    let ones = Profile::new(cfg.n(), vec![1; dim], vec![1; dim])?;
    let b = compute_tensor(&dual.config, &ones)?;
    let mut rng = seeded_rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (_, x) = random_image_tuple(cfg, &mut rng)?;
        // The form annihilating identify^{-1}(x_i) is x_i^T itself.
        let units: Vec<Vector> = x.iter().map(|xi| xi / xi.norm()).collect();
        worst = worst.max(contract(&b, &units).abs());
    }
    Ok(HypersurfaceReport {
        samples,
        max_relative: worst,
        threshold: HYPERSURFACE_TOL,
        passed: worst <= HYPERSURFACE_TOL,
    })
}

fn check_loci(n: usize, loci: &[usize]) -> Result<()> {
    let mut seen = vec![false; n + 1];
    for &i in loci {
        if i == 0 || i > n + 1 {
            return Err(Error::IndexOutOfRange(format!(
                "locus {i} is outside 1..={}",
                n + 1
            )));
        }
        if seen[i - 1] {
            return Err(Error::input(format!("locus {i} listed twice")));
        }
        seen[i - 1] = true;
    }
    Ok(())
}

/// Degree-`degree` forms vanishing on the focal loci `Z_i`, `i` in `loci`
/// (1-based), from exact restriction conditions.
pub fn vanishing_system(cfg: &CameraConfig, degree: usize, loci: &[usize]) -> Result<PolyBasis> {
    require_line_case(cfg)?;
    let n = cfg.n();
    check_loci(n, loci)?;
    let nvars = n + 1;
    let count = monomials(nvars, degree).len();
    let mut blocks = Vec::new();
    for &i in loci {
        let kernel = nullspace(cfg.camera(i - 1).matrix(), DEFAULT_RANK_TOL)?;
        if kernel.is_empty() {
            continue;
        }
        blocks.push(substitution_matrix(&Mat::from_columns(&kernel), degree));
    }
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    if rows == 0 {
        return PolyBasis::new(nvars, degree, Mat::identity(count, count), f64::INFINITY);
    }
    let mut conditions = Mat::zeros(rows, count);
    let mut at = 0;
    for b in &blocks {
        conditions
            .view_mut((at, 0), (b.nrows(), count))
            .copy_from(b);
        at += b.nrows();
    }
    let (sv, v) = right_singular_system(&conditions)?;
    let top = sv[0];
    let kept = sv.iter().filter(|&&s| s > VANISHING_TOL * top).count();
    let smallest_kept = if kept > 0 { sv[kept - 1] } else { top };
    let largest_null = sv.get(kept).copied().unwrap_or(0.0);
    let gap = if largest_null > 0.0 {
        smallest_kept / largest_null
    } else {
        f64::INFINITY
    };
    let mut coefficients = Mat::zeros(count - kept, count);
    for (row, k) in (kept..count).enumerate() {
        coefficients.set_row(row, &v.column(k).transpose());
    }
    PolyBasis::new(nvars, degree, coefficients, gap)
}

/// Projective map taking `src[k]` to `dst[k]` for `n+2` points in general position.
pub fn frame_transform(src: &[Vector], dst: &[Vector]) -> Result<Mat> {
    let k = src.len();
    if k < 2 || dst.len() != k || src.iter().chain(dst).any(|p| p.len() != k - 1) {
        return Err(Error::input("a projective frame needs n+2 points in P^n"));
    }
    let frame = |pts: &[Vector]| -> Result<Mat> {
        let a = Mat::from_columns(&pts[..k - 1]);
        let c = a
            .clone()
            .lu()
            .solve(&pts[k - 1])
            .ok_or_else(|| Error::degenerate("frame points are not in general position"))?;
        let scale = c.amax();
        if c.iter().any(|x| x.abs() <= 1e-10 * scale) {
            return Err(Error::degenerate(
                "frame points are not in general position",
            ));
        }
        Ok(a * Mat::from_diagonal(&c))
    };
    let from = frame(src)?;
    let to = frame(dst)?;
    let inv = from
        .try_inverse()
        .ok_or_else(|| Error::degenerate("frame points are not in general position"))?;
    Ok(to * inv)
}

const FIT_EXTRA_PAIRS: usize = 3;

/// Least-squares `T` with `T src_k` parallel to `dst_k` for every pair.
fn fit_transform(src: &[Vector], dst: &[Vector]) -> Result<Mat> {
    let (ds, dd) = (src[0].len(), dst[0].len());
    let mut rows = Mat::zeros(src.len() * dd, dd * ds);
    for (k, (s, d)) in src.iter().zip(dst).enumerate() {
        let (s, d) = (s.normalize(), d.normalize());
        let perp = Mat::identity(dd, dd) - &d * d.transpose();
        for r in 0..dd {
            for i in 0..dd {
                for j in 0..ds {
                    rows[(k * dd + r, i * ds + j)] = perp[(r, i)] * s[j];
                }
            }
        }
    }
    let (_, v) = right_singular_system(&rows)?;
    let t = v.column(v.ncols() - 1);
    Ok(Mat::from_row_slice(dd, ds, t.as_slice()))
}

/// `phi'^{-1} ∘ phi`: the degree-`n` forms through all focal loci, followed
/// by the linear change of basis fixed by a projective frame.
#[derive(Clone, Debug)]
pub struct CremonaMap {
    basis: PolyBasis,
    transform: Mat,
    dual: DualConfig,
}

impl CremonaMap {
    pub fn fit(cfg: &CameraConfig, seed: u64) -> Result<Self> {
        require_line_case(cfg)?;
        let n = cfg.n();
        let all: Vec<usize> = (1..=n + 1).collect();
        let basis = vanishing_system(cfg, n, &all)?;
        if basis.dim() != n + 1 {
            return Err(Error::degenerate(format!(
                "degree-{n} system through all focal loci has dimension {}, expected {}",
                basis.dim(),
                n + 1
            )));
        }
        let dual = dual_config(cfg)?;
        let mut rng = seeded_rng(seed);
        for _ in 0..MAX_RESAMPLES {
            let mut src = Vec::with_capacity(n + 2);
            let mut dst = Vec::with_capacity(n + 2);
            for _ in 0..n + 2 {
                let (z, x) = random_image_tuple(cfg, &mut rng)?;
                src.push(basis.eval(z.as_slice())?);
                dst.push(dual.scene_point_over(&x)?);
            }
            if frame_transform(&src, &dst).is_ok() {
                for _ in 0..FIT_EXTRA_PAIRS * (n + 2) {
                    let (z, x) = random_image_tuple(cfg, &mut rng)?;
                    src.push(basis.eval(z.as_slice())?);
                    dst.push(dual.scene_point_over(&x)?);
                }
                let transform = fit_transform(&src, &dst)?;
                return Ok(Self {
                    basis,
                    transform,
                    dual,
                });
            }
        }
        Err(Error::Generation {
            attempts: MAX_RESAMPLES,
        })
    }

    pub fn basis(&self) -> &PolyBasis {
        &self.basis
    }

    pub fn transform(&self) -> &Mat {
        &self.transform
    }

    pub fn dual(&self) -> &DualConfig {
        &self.dual
    }

    pub fn apply(&self, z: &[f64]) -> Result<Vector> {
        cremona_apply(self, z)
    }

    /// Largest projective distance between `identify(phi'_i(w))` and
    /// `phi_i(z)` over random scene points.
    pub fn consistency(&self, cfg: &CameraConfig, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = seeded_rng(seed);
        let j = identification_matrix();
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let (z, x) = random_image_tuple(cfg, &mut rng)?;
            let w = self.apply(z.as_slice())?;
            for (xi, c) in x.iter().zip(self.dual.config.cameras()) {
                let back = &j * (c.matrix() * &w);
                worst = worst.max(proj_distance(back.as_slice(), xi.as_slice())?);
            }
        }
        Ok(worst)
    }
}

/// Image of `z` under the Cremona map, in the dual scene coordinates.
pub fn cremona_apply(map: &CremonaMap, z: &[f64]) -> Result<Vector> {
    let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::input("scene point must be finite and nonzero"));
    }
    let values = map.basis.eval(z)?;
    if values.norm() <= 1e-12 * norm.powi(map.basis.degree() as i32) {
        return Err(Error::BaseLocus);
    }
    Ok(&map.transform * values)
}

/// Real roots of `sum_k c[k] t^k`.
fn real_roots(c: &[f64]) -> Vec<f64> {
    let Some(deg) = c.iter().rposition(|x| *x != 0.0) else {
        return Vec::new();
    };
    let scale = c.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if deg == 0 || c[deg].abs() <= 1e-12 * scale {
        return Vec::new();
    }
    let p = |t: f64| c[..=deg].iter().rev().fold(0.0, |acc, &ck| acc * t + ck);
    let dp = |t: f64| {
        (1..=deg)
            .rev()
            .fold(0.0, |acc, k| acc * t + k as f64 * c[k])
    };
    let mut companion = Mat::zeros(deg, deg);
    for k in 0..deg {
        companion[(0, k)] = -c[deg - 1 - k] / c[deg];
        if k + 1 < deg {
            companion[(k + 1, k)] = 1.0;
        }
    }
    companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
        .map(|z| {
            let mut t = z.re;
            for _ in 0..8 {
                let d = dp(t);
                if d == 0.0 {
                    break;
                }
                t -= p(t) / d;
            }
            t
        })
        .collect()
}

/// Points on the degree-`n-1` hypersurface through every focal locus except
/// `excluded` (1-based), found as real roots along random lines.
pub fn sample_contracted_points(
    cfg: &CameraConfig,
    excluded: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vector>> {
    require_line_case(cfg)?;
    let n = cfg.n();
    check_loci(n, &[excluded])?;
    if n < 2 {
        return Err(Error::precondition("contracted hypersurfaces need n >= 2"));
    }
    let loci: Vec<usize> = (1..=n + 1).filter(|&i| i != excluded).collect();
    let g = vanishing_system(cfg, n - 1, &loci)?;
    if g.dim() != 1 {
        return Err(Error::degenerate(format!(
            "expected a unique hypersurface of degree {}, found a {}-dimensional system",
            n - 1,
            g.dim()
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > MAX_RESAMPLES * count.max(1) {
            return Err(Error::Generation { attempts });
        }
        let a = gaussian_vector(&mut rng, n + 1);
        let b = gaussian_vector(&mut rng, n + 1);
        // Coefficients are listed by decreasing power of u_0, i.e. by
        // increasing power of t = u_1 / u_0.
        let binary = g.restrict_to_line(&a, &b)?;
        let c: Vec<f64> = binary.row(0).iter().copied().collect();
        for t in real_roots(&c) {
            let z = &a + &b * t;
            let z = &z / z.norm();
            let value = g.eval(z.as_slice())?[0];
            if value.abs() <= 1e-10 && out.len() < count {
                out.push(z);
            }
        }
    }
    Ok(out)
}

impl Serialize for DualConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.config.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DualConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let config = CameraConfig::deserialize(d)?;
        DualConfig::from_config(config).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::proj_equal;
    use crate::reconstruct::pgl_equivalent;
    use crate::scene::random_config;

    fn ones(n: usize) -> Profile {
        Profile::new(n, vec![1; n + 1], vec![1; n + 1]).unwrap()
    }

    #[test]
    fn identify_examples() {
        let e0 = Vector::from_vec(vec![1.0, 0.0]);
        assert!(proj_equal(identify(&e0).unwrap().as_slice(), &[0.0, 1.0], 1e-15).unwrap());
        let mut rng = seeded_rng(1);
        for _ in 0..20 {
            let f = gaussian_vector(&mut rng, 2);
            let twice = identify(&identify(&f).unwrap()).unwrap();
            assert!(proj_equal(twice.as_slice(), f.as_slice(), 1e-15).unwrap());
            // w in the kernel of f
            let w = Vector::from_vec(vec![-f[1], f[0]]);
            assert!(proj_equal(identify(&f).unwrap().as_slice(), w.as_slice(), 1e-15).unwrap());
        }
        assert!(identify(&Vector::zeros(2)).is_err());
        assert!(identify(&Vector::zeros(3)).is_err());
    }

    #[test]
    fn dual_is_orthogonal_and_involutive() {
        for n in 2..=4 {
            for seed in 0..20 {
                let cfg = random_config(n, &vec![1; n + 1], seed).unwrap();
                let dual = dual_config(&cfg).unwrap();
                let s = cfg.stacked();
                let sp = dual.config().stacked();
                assert!((s.transpose() * &sp).norm() <= 1e-12 * s.norm() * sp.norm());
                let back = dual_config(dual.config()).unwrap();
                assert!(pgl_equivalent(back.config(), &cfg, 1e-6).unwrap().is_some());
                assert!(pgl_equivalent(&dual.identified().unwrap(), &cfg, 1e-6)
                    .unwrap()
                    .is_none());
            }
        }
    }

    #[test]
    fn dual_rejects_other_shapes() {
        let cfg = random_config(3, &[2, 2], 1).unwrap();
        assert!(matches!(dual_config(&cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn identified_dual_has_the_same_tensor() {
        for n in 2..=4 {
            let cfg = random_config(n, &vec![1; n + 1], 3).unwrap();
            let dual = dual_config(&cfg).unwrap();
            let a = compute_tensor(&cfg, &ones(n)).unwrap();
            let b = compute_tensor(&dual.identified().unwrap(), &ones(n)).unwrap();
            assert!(proj_equal(a.entries(), b.entries(), 1e-10).unwrap());
        }
    }

    #[test]
    fn hypersurfaces_coincide() {
        for n in 2..=4 {
            let cfg = random_config(n, &vec![1; n + 1], 4).unwrap();
            let dual = dual_config(&cfg).unwrap();
            let report = verify_same_hypersurface(&cfg, &dual, 200, 5).unwrap();
            assert!(report.passed, "n = {n}: {}", report.max_relative);

            let other =
                DualConfig::from_config(random_config(n, &vec![1; n + 1], 99).unwrap()).unwrap();
            let bad = verify_same_hypersurface(&cfg, &other, 200, 5).unwrap();
            assert!(!bad.passed);
            assert!(bad.max_relative > 1e-3);
        }
    }

    #[test]
    fn vanishing_dimensions() {
        for n in 2..=4 {
            for seed in 0..5 {
                let cfg = random_config(n, &vec![1; n + 1], seed).unwrap();
                let all: Vec<usize> = (1..=n + 1).collect();
                let full = vanishing_system(&cfg, n, &all).unwrap();
                assert_eq!(full.dim(), n + 1);
                assert!(full.gap() > 1e3);
                for skip in 1..=n + 1 {
                    let loci: Vec<usize> = all.iter().copied().filter(|&i| i != skip).collect();
                    assert_eq!(vanishing_system(&cfg, n - 1, &loci).unwrap().dim(), 1);
                }
                assert_eq!(vanishing_system(&cfg, n - 1, &all).unwrap().dim(), 0);
            }
        }
        let cfg = random_config(2, &[1, 1, 1], 1).unwrap();
        assert!(vanishing_system(&cfg, 2, &[4]).is_err());
        assert!(vanishing_system(&cfg, 2, &[1, 1]).is_err());
        assert_eq!(vanishing_system(&cfg, 2, &[]).unwrap().dim(), 6);
    }

    #[test]
    fn forms_vanish_on_the_loci() {
        let cfg = random_config(3, &[1, 1, 1, 1], 7).unwrap();
        let basis = vanishing_system(&cfg, 3, &[1, 2, 3, 4]).unwrap();
        let mut rng = seeded_rng(8);
        for i in 0..4 {
            let k = nullspace(cfg.camera(i).matrix(), DEFAULT_RANK_TOL).unwrap();
            let t = gaussian_vector(&mut rng, k.len());
            let z = Mat::from_columns(&k) * t;
            assert!(basis.eval(z.as_slice()).unwrap().norm() <= 1e-10);
        }
    }

    #[test]
    fn cremona_is_consistent() {
        for n in 2..=4 {
            let cfg = random_config(n, &vec![1; n + 1], 10).unwrap();
            let map = CremonaMap::fit(&cfg, 11).unwrap();
            let worst = map.consistency(&cfg, 100, 12).unwrap();
            assert!(worst <= CREMONA_TOL, "n = {n}: {worst}");
        }
    }

    #[test]
    fn base_locus_is_reported() {
        let cfg = random_config(3, &[1, 1, 1, 1], 13).unwrap();
        let map = CremonaMap::fit(&cfg, 14).unwrap();
        // Every focal locus lies in the base locus.
        let mut rng = seeded_rng(15);
        let k = nullspace(cfg.camera(0).matrix(), DEFAULT_RANK_TOL).unwrap();
        let z = Mat::from_columns(&k) * gaussian_vector(&mut rng, k.len());
        assert!(matches!(map.apply(z.as_slice()), Err(Error::BaseLocus)));
    }

    #[test]
    fn contracted_hypersurface_lands_in_the_dual_locus() {
        for n in 2..=4 {
            let cfg = random_config(n, &vec![1; n + 1], 15).unwrap();
            let map = CremonaMap::fit(&cfg, 16).unwrap();
            for excluded in 1..=n + 1 {
                let s = map.dual().config().camera(excluded - 1).matrix().clone();
                for z in sample_contracted_points(&cfg, excluded, 5, 17).unwrap() {
                    let w = map.apply(z.as_slice()).unwrap();
                    assert!((&s * &w).norm() <= CONTRACTION_TOL * s.norm() * w.norm());
                }
            }
        }
    }

    #[test]
    fn classical_quadratic_transformation() {
        // Cameras whose focal loci are the coordinate points of P^2.
        let cams = (0..3)
            .map(|i| {
                let mut rows = Vec::new();
                for j in 0..3 {
                    if j != i {
                        let mut r = vec![0.0; 3];
                        r[j] = 1.0;
                        rows.push(r);
                    }
                }
                let mut rng = seeded_rng(20 + i as u64);
                let g = crate::sampling::gaussian_matrix(&mut rng, 2, 2);
                g * Mat::from_row_slice(2, 3, &rows.concat())
            })
            .collect();
        let cfg = CameraConfig::from_matrices(2, cams).unwrap();
        let basis = vanishing_system(&cfg, 2, &[1, 2, 3]).unwrap();
        assert_eq!(basis.dim(), 3);
        // Only x0x1, x0x2, x1x2 appear.
        for &sq in &[0usize, 3, 5] {
            assert!(basis.coefficients().column(sq).norm() <= 1e-12);
        }
        let map = CremonaMap::fit(&cfg, 21).unwrap();
        let standard = |z: &Vector| Vector::from_vec(vec![z[1] * z[2], z[0] * z[2], z[0] * z[1]]);
        let mut rng = seeded_rng(22);
        let frame: Vec<Vector> = (0..4).map(|_| gaussian_vector(&mut rng, 3)).collect();
        let src: Vec<Vector> = frame.iter().map(standard).collect();
        let dst: Vec<Vector> = frame
            .iter()
            .map(|z| map.apply(z.as_slice()).unwrap())
            .collect();
        let t = frame_transform(&src, &dst).unwrap();
        for _ in 0..50 {
            let z = gaussian_vector(&mut rng, 3);
            let ours = map.apply(z.as_slice()).unwrap();
            let classical = &t * standard(&z);
            assert!(proj_equal(ours.as_slice(), classical.as_slice(), 1e-9).unwrap());
        }
    }

    #[test]
    fn json_round_trip() {
        let cfg = random_config(2, &[1, 1, 1], 30).unwrap();
        let dual = dual_config(&cfg).unwrap();
        let text = serde_json::to_string(&dual).unwrap();
        let back: DualConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, dual);
    }
}
