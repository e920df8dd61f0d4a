//! Camera configurations `s = (s_1, ..., s_r)`, their focal loci, projection
//! of scene points and the genericity certificates the rest of the crate
//! relies on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    ensure_finite, nullspace, rank, singular_values, vstack, Mat, Vector, DEFAULT_RANK_TOL,
};
use crate::report::Check;
use crate::sampling::{gaussian_matrix, seeded_rng};

/// Relative threshold below which a point counts as lying in a focal locus.
pub const DEFAULT_FOCAL_TOL: f64 = 1e-8;

/// Maximum number of draws `random_config` makes before giving up.
pub const MAX_RESAMPLES: usize = 1000;

/// A linear projection `s_i: V -> W_i`, stored as an `(m_i+1) x (n+1)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Camera {
    matrix: Mat,
}

impl Camera {
    pub fn new(matrix: Mat) -> Result<Self> {
        ensure_finite(&matrix)?;
        if matrix.nrows() < 2 {
            return Err(Error::precondition(
                "a camera needs a target of dimension at least 1",
            ));
        }
        if matrix.nrows() >= matrix.ncols() {
            return Err(Error::precondition(format!(
                "camera target dimension {} must be smaller than the source dimension {}",
                matrix.nrows() - 1,
                matrix.ncols() - 1
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// `m_i`, the dimension of the target projective space.
    pub fn target_dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.ncols() - 1
    }

    fn spectral_norm(&self) -> f64 {
        singular_values(&self.matrix)
            .ok()
            .and_then(|s| s.first().copied())
            .unwrap_or(0.0)
    }
}

/// An ordered tuple of cameras sharing the source space `P^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraConfig {
    n: usize,
    cameras: Vec<Camera>,
}

impl CameraConfig {
    pub fn new(n: usize, cameras: Vec<Camera>) -> Result<Self> {
        if cameras.is_empty() {
            return Err(Error::input("a configuration needs at least one camera"));
        }
        for (i, c) in cameras.iter().enumerate() {
            if c.source_dim() != n {
                return Err(Error::input(format!(
                    "camera {} acts on P^{} but the configuration has n = {n}",
                    i + 1,
                    c.source_dim()
                )));
            }
        }
        Ok(Self { n, cameras })
    }

    pub fn from_matrices(n: usize, matrices: Vec<Mat>) -> Result<Self> {
        let cameras = matrices
            .into_iter()
            .map(Camera::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, cameras)
    }

    /// Split a stacked `sum(m_i+1) x (n+1)` matrix into consecutive camera blocks.
    pub fn from_stacked(n: usize, m: &[usize], stacked: &Mat) -> Result<Self> {
        let rows: usize = m.iter().map(|mi| mi + 1).sum();
        if stacked.nrows() != rows || stacked.ncols() != n + 1 {
            return Err(Error::input(format!(
                "stacked matrix is {}x{}, expected {rows}x{}",
                stacked.nrows(),
                stacked.ncols(),
                n + 1
            )));
        }
        let mut at = 0;
        let mut blocks = Vec::with_capacity(m.len());
        for &mi in m {
            blocks.push(stacked.rows(at, mi + 1).into_owned());
            at += mi + 1;
        }
        Self::from_matrices(n, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> Vec<usize> {
        self.cameras.iter().map(Camera::target_dim).collect()
    }

    /// Number of cameras `r`.
    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn cameras(&self) -> &[Camera] {
        &self.cameras
    }

    pub fn camera(&self, i: usize) -> &Camera {
        &self.cameras[i]
    }

    /// First stacked row of each camera block.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut at = 0;
        self.cameras
            .iter()
            .map(|c| {
                let start = at;
                at += c.matrix.nrows();
                start
            })
            .collect()
    }

    pub fn stacked_rows(&self) -> usize {
        self.cameras.iter().map(|c| c.matrix.nrows()).sum()
    }

    /// The matrix of `s: V -> (+) W_i`.
    pub fn stacked(&self) -> Mat {
        let blocks: Vec<&Mat> = self.cameras.iter().map(|c| &c.matrix).collect();
        vstack(&blocks)
    }

    /// True when every `m_i` equals 1 and there are `n+1` cameras.
    pub fn is_line_case(&self) -> bool {
        self.len() == self.n + 1 && self.cameras.iter().all(|c| c.target_dim() == 1)
    }
}

/// A point of `P^n`, kept with its representative.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenePoint(Vector);

impl ScenePoint {
    pub fn new(coords: Vector) -> Result<Self> {
        if coords.iter().any(|x| !x.is_finite()) || coords.norm() == 0.0 {
            return Err(Error::input("scene point must be finite and nonzero"));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &Vector {
        &self.0
    }

    pub fn into_inner(self) -> Vector {
        self.0
    }
}

/// Gaussian camera configuration for `(n, m)`, redrawn until it passes
/// `validate_genericity`.
pub fn random_config(n: usize, m: &[usize], seed: u64) -> Result<CameraConfig> {
    if m.is_empty() {
        return Err(Error::precondition("m must list at least one camera"));
    }
    if let Some(bad) = m.iter().find(|&&mi| mi == 0 || mi >= n) {
        return Err(Error::precondition(format!(
            "every target dimension must satisfy 1 <= m_i < n = {n}, got {bad}"
        )));
    }
    let mut rng = seeded_rng(seed);
    for _ in 0..MAX_RESAMPLES {
        let matrices = m
            .iter()
            .map(|&mi| gaussian_matrix(&mut rng, mi + 1, n + 1))
            .collect();
        let cfg = CameraConfig::from_matrices(n, matrices)?;
        if validate_genericity(&cfg).passed() {
            return Ok(cfg);
        }
    }
    Err(Error::Generation {
        attempts: MAX_RESAMPLES,
    })
}

/// Orthonormal basis of `ker s_i`, whose projectivization is the focal locus.
pub fn focal_basis(camera: &Camera) -> Vec<Vector> {
    nullspace(&camera.matrix, DEFAULT_RANK_TOL).expect("camera entries are finite")
}

/// Images `x_i = s_i z` (unnormalized representatives).
pub fn project(cfg: &CameraConfig, z: &ScenePoint) -> Result<Vec<Vector>> {
    project_with_tol(cfg, z, DEFAULT_FOCAL_TOL)
}

pub fn project_with_tol(cfg: &CameraConfig, z: &ScenePoint, tol: f64) -> Result<Vec<Vector>> {
    let z = z.coords();
    if z.len() != cfg.n + 1 {
        return Err(Error::input(format!(
            "scene point has {} coordinates, expected {}",
            z.len(),
            cfg.n + 1
        )));
    }
    cfg.cameras
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let x = &c.matrix * z;
            if x.norm() <= tol * c.spectral_norm() * z.norm() {
                Err(Error::Indeterminate { camera: i + 1 })
            } else {
                Ok(x)
            }
        })
        .collect()
}

/// Precompose every camera with `H`: `s_i -> s_i H`.
pub fn apply_homography(cfg: &CameraConfig, h: &Mat) -> Result<CameraConfig> {
    let dim = cfg.n + 1;
    if h.shape() != (dim, dim) {
        return Err(Error::input(format!(
            "homography must be {dim}x{dim}, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if rank(h, DEFAULT_RANK_TOL)? < dim {
        return Err(Error::input("homography is singular"));
    }
    let matrices = cfg.cameras.iter().map(|c| &c.matrix * h).collect();
    CameraConfig::from_matrices(cfg.n, matrices)
}

/// Outcome of the genericity checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub checks: Vec<Check>,
}

impl GenericityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Relative size of the `k`-th singular value (1-based); zero when absent.
fn relative_singular_value(m: &Mat, k: usize) -> f64 {
    let sv = singular_values(m).unwrap_or_default();
    match (sv.first(), sv.get(k - 1)) {
        (Some(&top), Some(&s)) if top > 0.0 => s / top,
        _ => 0.0,
    }
}

/// Surjectivity of each camera, injectivity of the stack (when it has at
/// least `n+1` rows) and pairwise general position of the focal loci.
pub fn validate_genericity(cfg: &CameraConfig) -> GenericityReport {
    validate_genericity_with_tol(cfg, DEFAULT_RANK_TOL)
}

pub fn validate_genericity_with_tol(cfg: &CameraConfig, tol: f64) -> GenericityReport {
    let dim = cfg.n + 1;
    let mut checks = Vec::new();
    for (i, c) in cfg.cameras.iter().enumerate() {
        let margin = relative_singular_value(&c.matrix, c.matrix.nrows());
        checks.push(Check::above(
            format!("camera_{}_surjective", i + 1),
            margin,
            tol,
        ));
    }
    if cfg.stacked_rows() >= dim {
        let margin = relative_singular_value(&cfg.stacked(), dim);
        checks.push(Check::above("stacked_injective", margin, tol));
    }
    for i in 0..cfg.len() {
        for j in i + 1..cfg.len() {
            let (a, b) = (&cfg.cameras[i].matrix, &cfg.cameras[j].matrix);
            let expected = (a.nrows() + b.nrows()).min(dim);
            let margin = relative_singular_value(&vstack(&[a, b]), expected);
            checks.push(Check::above(
                format!("focal_loci_{}_{}_general_position", i + 1, j + 1),
                margin,
                tol,
            ));
        }
    }
    GenericityReport { checks }
}

/// Wire format: `{"n": int, "m": [int], "cameras": [[[f64]]]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CameraConfigJson {
    pub n: usize,
    pub m: Vec<usize>,
    pub cameras: Vec<Vec<Vec<f64>>>,
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Mat> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::input(
            "matrix rows must be non-empty and of equal length",
        ));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Mat::from_row_slice(rows.len(), cols, &flat))
}

pub(crate) fn matrix_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl TryFrom<CameraConfigJson> for CameraConfig {
    type Error = Error;

    fn try_from(json: CameraConfigJson) -> Result<Self> {
        if json.m.len() != json.cameras.len() {
            return Err(Error::input(format!(
                "m lists {} cameras but {} matrices were given",
                json.m.len(),
                json.cameras.len()
            )));
        }
        let mut matrices = Vec::with_capacity(json.cameras.len());
        for (i, (rows, &mi)) in json.cameras.iter().zip(&json.m).enumerate() {
            let mat = matrix_from_rows(rows)?;
            if mat.shape() != (mi + 1, json.n + 1) {
                return Err(Error::input(format!(
                    "camera {} is {}x{}, expected {}x{}",
                    i + 1,
                    mat.nrows(),
                    mat.ncols(),
                    mi + 1,
                    json.n + 1
                )));
            }
            matrices.push(mat);
        }
        CameraConfig::from_matrices(json.n, matrices)
    }
}

impl From<&CameraConfig> for CameraConfigJson {
    fn from(cfg: &CameraConfig) -> Self {
        Self {
            n: cfg.n,
            m: cfg.m(),
            cameras: cfg
                .cameras
                .iter()
                .map(|c| matrix_to_rows(&c.matrix))
                .collect(),
        }
    }
}

impl Serialize for CameraConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CameraConfigJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CameraConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = CameraConfigJson::deserialize(d)?;
        CameraConfig::try_from(json).map_err(serde::de::Error::custom)
    }
}
