//! Orbit tests, gauge fixing and camera recovery from tensors or point tuples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::{self, LmOptions};
use crate::numeric::{
    combinations, det, ensure_finite, orthogonal_complement, proj_distance, rank,
    right_singular_system, singular_values, vstack, Mat, Vector,
};
use crate::sampling::{derive_seed, gaussian_matrix, seeded_rng};
use crate::scene::{matrix_from_rows, matrix_to_rows, validate_genericity, CameraConfig};
use crate::tensor::{canonicalize, raw_tensor, GrassmannTensor};

/// Candidates with tensor residual above this are discarded.
pub const ACCEPT_RESIDUAL: f64 = 1e-6;
/// Tolerance of the orbit test used to merge candidates.
pub const DEDUP_TOL: f64 = 1e-6;
/// Relative singular-value threshold of the gauge pivot search.
pub const PIVOT_TOL: f64 = 1e-9;
/// Relative singular-value threshold for the Jacobian rank.
pub const JACOBIAN_RANK_TOL: f64 = 1e-6;
pub const DEFAULT_JACOBIAN_STEP: f64 = 1e-5;
pub const DEFAULT_POINT_ITERATIONS: usize = 2000;

/// An invertible `(n+1) x (n+1)` matrix, defined up to scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Homography(Mat);

impl Homography {
    pub fn new(h: Mat) -> Result<Self> {
        ensure_finite(&h)?;
        if h.nrows() != h.ncols() || h.nrows() == 0 {
            return Err(Error::input(
                "a homography must be a non-empty square matrix",
            ));
        }
        if rank(&h, crate::numeric::DEFAULT_RANK_TOL)? < h.nrows() {
            return Err(Error::input("homography is singular"));
        }
        Ok(Self(h))
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_inner(self) -> Mat {
        self.0
    }
}

impl Serialize for Homography {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Homography {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        matrix_from_rows(&rows)
            .and_then(Homography::new)
            .map_err(serde::de::Error::custom)
    }
}

fn check_same_shape(a: &CameraConfig, b: &CameraConfig) -> Result<()> {
    if a.n() != b.n() || a.m() != b.m() {
        return Err(Error::input(format!(
            "configurations differ in shape: n = {}, m = {:?} vs n = {}, m = {:?}",
            a.n(),
            a.m(),
            b.n(),
            b.m()
        )));
    }
    Ok(())
}

/// Whether `b` lies in the PGL orbit of `a`. On success returns `H` (unit
/// Frobenius norm) and scales with `S^b_i ≈ lambda_i * S^a_i * H`.
pub fn pgl_equivalent(
    a: &CameraConfig,
    b: &CameraConfig,
    tol: f64,
) -> Result<Option<(Homography, Vec<f64>)>> {
    check_same_shape(a, b)?;
    let dim = a.n() + 1;
    let r = a.len();
    let unknowns = dim * dim + r;
    let rows: usize = a.stacked_rows() * dim;
    let mut system = Mat::zeros(rows, unknowns);
    let mut at = 0;
    for (i, (ca, cb)) in a.cameras().iter().zip(b.cameras()).enumerate() {
        let sa = ca.matrix() / ca.matrix().norm();
        let sb = cb.matrix() / cb.matrix().norm();
        // (S^a K)[p, c] = sum_k S^a[p, k] K[k, c]; K is stored row-major.
        for p in 0..sa.nrows() {
            for c in 0..dim {
                for k in 0..dim {
                    system[(at, k * dim + c)] = sa[(p, k)];
                }
                system[(at, dim * dim + i)] = -sb[(p, c)];
                at += 1;
            }
        }
    }
    let (sv, v) = right_singular_system(&system)?;
    let top = sv[0];
    let nullity = sv.iter().filter(|&&s| s <= tol * top).count();
    if nullity != 1 {
        return Ok(None);
    }
    let null = v.column(unknowns - 1);
    let k = Mat::from_row_slice(dim, dim, &null.as_slice()[..dim * dim]);
    let mu = &null.as_slice()[dim * dim..];
    let mu_max = mu.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if mu.iter().any(|x| x.abs() <= tol * mu_max) {
        return Ok(None);
    }
    let ksv = singular_values(&k)?;
    if ksv[dim - 1] <= tol * ksv[0] {
        return Ok(None);
    }
    let mut entries: Vec<f64> = k.transpose().as_slice().to_vec();
    canonicalize(&mut entries)?;
    let h = Mat::from_column_slice(dim, dim, &entries).transpose();
    let scales = a
        .cameras()
        .iter()
        .zip(b.cameras())
        .map(|(ca, cb)| {
            let moved = ca.matrix() * &h;
            cb.matrix().dot(&moved) / moved.norm_squared()
        })
        .collect();
    Ok(Some((Homography(h), scales)))
}

/// Right-multiply by the inverse of the pivot block so it becomes the identity.
pub fn gauge_fix(cfg: &CameraConfig) -> Result<CameraConfig> {
    gauge_fix_with_pivot(cfg).map(|(c, _)| c)
}

/// Pivot rule: the lexicographically first `(n+1)`-subset of stacked rows
/// whose submatrix has relative rank `n+1` at `PIVOT_TOL`. Also returns the
/// 0-based pivot rows.
pub fn gauge_fix_with_pivot(cfg: &CameraConfig) -> Result<(CameraConfig, Vec<usize>)> {
    let dim = cfg.n() + 1;
    let stacked = cfg.stacked();
    for rows in combinations(stacked.nrows(), dim) {
        let rows: Vec<usize> = rows.zero_based().collect();
        let block = stacked.select_rows(&rows);
        if rank(&block, PIVOT_TOL)? < dim {
            continue;
        }
        let inv = block
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::degenerate("pivot block is not invertible"))?;
        let mut fixed = &stacked * inv;
        // Exact identity on the pivot rows.
        for (a, &row) in rows.iter().enumerate() {
            for c in 0..dim {
                fixed[(row, c)] = if a == c { 1.0 } else { 0.0 };
            }
        }
        return Ok((CameraConfig::from_stacked(cfg.n(), &cfg.m(), &fixed)?, rows));
    }
    Err(Error::degenerate(
        "every (n+1)-row selection of the stacked matrix is singular",
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitLabel {
    Primary,
    Twisted,
}

/// One PGL orbit found by the restarts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    /// Gauge-fixed representative.
    pub config: CameraConfig,
    /// Projective distance of its tensor to the target.
    pub residual: f64,
    /// Total restarts run.
    pub restarts_used: usize,
    /// Accepted restarts that landed in this orbit.
    pub hits: usize,
    /// Index of the restart that produced the representative.
    pub restart: usize,
    pub orbit_label: Option<OrbitLabel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub restarts: usize,
    pub seed: u64,
    pub accept_residual: f64,
    pub dedup_tol: f64,
    pub lm: LmOptions,
}

impl ReconstructOptions {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self {
            restarts,
            seed,
            accept_residual: ACCEPT_RESIDUAL,
            dedup_tol: DEDUP_TOL,
            lm: LmOptions::default(),
        }
    }
}

/// Tensor model with `n+1` chosen stacked rows held fixed and the rest free.
struct TensorModel<'a> {
    n: usize,
    m: Vec<usize>,
    /// Row of `fixed` or free-row index for each stacked row.
    layout: Vec<RowSlot>,
    fixed: Mat,
    rows: Vec<Vec<usize>>,
    target: &'a [f64],
}

#[derive(Clone, Copy)]
enum RowSlot {
    Fixed(usize),
    Free(usize),
}

impl<'a> TensorModel<'a> {
    fn new(a: &'a GrassmannTensor, top: Mat) -> Self {
        let dim = a.profile().n() + 1;
        let pivots: Vec<usize> = (0..dim).collect();
        Self::with_pivots(a, &pivots, top)
    }

    /// `pivots` must be sorted; stacked row `pivots[j]` is held at row `j` of `fixed`.
    fn with_pivots(a: &'a GrassmannTensor, pivots: &[usize], fixed: Mat) -> Self {
        let p = a.profile();
        let total: usize = p.m().iter().map(|mi| mi + 1).sum();
        let mut layout = Vec::with_capacity(total);
        let mut free = 0;
        for g in 0..total {
            match pivots.iter().position(|&r| r == g) {
                Some(j) => layout.push(RowSlot::Fixed(j)),
                None => {
                    layout.push(RowSlot::Free(free));
                    free += 1;
                }
            }
        }
        Self {
            n: p.n(),
            m: p.m().to_vec(),
            layout,
            fixed,
            rows: p.stacked_rows(),
            target: a.entries(),
        }
    }

    fn dim(&self) -> usize {
        self.n + 1
    }

    fn stacked(&self, x: &Vector) -> Mat {
        let dim = self.dim();
        let mut s = Mat::zeros(self.layout.len(), dim);
        for (g, slot) in self.layout.iter().enumerate() {
            match *slot {
                RowSlot::Fixed(j) => s.set_row(g, &self.fixed.row(j)),
                RowSlot::Free(f) => {
                    for c in 0..dim {
                        s[(g, c)] = x[f * dim + c];
                    }
                }
            }
        }
        s
    }

    fn normalized(&self, x: &Vector) -> Option<(Vector, f64)> {
        let t = Vector::from_vec(raw_tensor(&self.stacked(x), &self.rows));
        let norm = t.norm();
        (norm > 0.0 && norm.is_finite()).then(|| (t / norm, norm))
    }

    fn residual(&self, x: &Vector) -> Option<Vector> {
        let (a, _) = self.normalized(x)?;
        let target = Vector::from_column_slice(self.target);
        let sign = if a.dot(&target) < 0.0 { -1.0 } else { 1.0 };
        Some(a - target * sign)
    }

    fn jacobian(&self, x: &Vector) -> Mat {
        let dim = self.dim();
        let s = self.stacked(x);
        let mut jt = Mat::zeros(self.rows.len(), x.len());
        for (k, rows) in self.rows.iter().enumerate() {
            let block = s.select_rows(rows);
            for (a, &g) in rows.iter().enumerate() {
                let RowSlot::Free(free) = self.layout[g] else {
                    continue;
                };
                for c in 0..dim {
                    jt[(k, free * dim + c)] = cofactor(&block, a, c);
                }
            }
        }
        let Some((a, norm)) = self.normalized(x) else {
            return jt;
        };
        let proj = &a * a.tr_mul(&jt);
        (jt - proj) / norm
    }

    fn config(&self, x: &Vector) -> Result<CameraConfig> {
        CameraConfig::from_stacked(self.n, &self.m, &self.stacked(x))
    }
}

fn cofactor(m: &Mat, row: usize, col: usize) -> f64 {
    let minor = m.clone().remove_row(row).remove_column(col);
    let sign = if (row + col).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    if minor.nrows() == 0 {
        sign
    } else {
        sign * det(&minor)
    }
}

/// Outcome of a single local fit.
#[derive(Clone, Debug)]
pub struct RefineOutcome {
    pub config: CameraConfig,
    pub residual: f64,
    pub iterations: usize,
}

fn check_tensor_config(a: &GrassmannTensor, cfg: &CameraConfig) -> Result<()> {
    if !a.profile().matches(cfg) {
        return Err(Error::input(
            "tensor profile does not match the configuration shape",
        ));
    }
    Ok(())
}

/// LM from `init`, holding its first `n+1` stacked rows fixed.
pub fn refine_from(
    a: &GrassmannTensor,
    init: &CameraConfig,
    opts: &LmOptions,
) -> Result<RefineOutcome> {
    check_tensor_config(a, init)?;
    let dim = init.n() + 1;
    let stacked = init.stacked();
    if stacked.nrows() <= dim {
        return Err(Error::precondition("no free rows to fit"));
    }
    let top = stacked.rows(0, dim).into_owned();
    let x0 = Vector::from_row_slice(
        stacked
            .rows(dim, stacked.nrows() - dim)
            .transpose()
            .as_slice(),
    );
    let model = TensorModel::new(a, top);
    let out = lm::minimize(x0, |x| model.residual(x), |x| model.jacobian(x), opts);
    let config = model.config(&out.x)?;
    let residual = tensor_residual(a, &config)?;
    Ok(RefineOutcome {
        config,
        residual,
        iterations: out.iterations,
    })
}

/// Projective distance between the tensor of `cfg` and `a`.
pub fn tensor_residual(a: &GrassmannTensor, cfg: &CameraConfig) -> Result<f64> {
    check_tensor_config(a, cfg)?;
    let t = raw_tensor(&cfg.stacked(), &a.profile().stacked_rows());
    if t.iter().all(|&x| x == 0.0) || t.iter().any(|x| !x.is_finite()) {
        return Ok(f64::INFINITY);
    }
    proj_distance(&t, a.entries())
}

pub fn reconstruct_from_tensor(
    a: &GrassmannTensor,
    restarts: usize,
    seed: u64,
) -> Result<Vec<ReconstructionResult>> {
    reconstruct_from_tensor_with(a, &ReconstructOptions::new(restarts, seed))
}

/// Random gauge-fixed restarts refined by LM, merged into PGL orbits and
/// sorted by residual.
pub fn reconstruct_from_tensor_with(
    a: &GrassmannTensor,
    opts: &ReconstructOptions,
) -> Result<Vec<ReconstructionResult>> {
    if opts.restarts == 0 {
        return Err(Error::input("at least one restart is required"));
    }
    let p = a.profile();
    let dim = p.n() + 1;
    let total_rows: usize = p.m().iter().map(|mi| mi + 1).sum();
    if total_rows <= dim {
        return Err(Error::precondition("the stacked matrix has no free rows"));
    }
    let free_rows = total_rows - dim;

    let mut candidates: Vec<(usize, CameraConfig, f64)> = (0..opts.restarts)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = seeded_rng(derive_seed(opts.seed, k as u64));
            // Restart 0 uses the leading rows as chart; later ones pick a random chart.
            let mut pivots: Vec<usize> = if k == 0 {
                (0..dim).collect()
            } else {
                rand::seq::index::sample(&mut rng, total_rows, dim).into_vec()
            };
            pivots.sort_unstable();
            let model = TensorModel::with_pivots(a, &pivots, Mat::identity(dim, dim));
            let x0 = gaussian_matrix(&mut rng, free_rows * dim, 1)
                .column(0)
                .into_owned();
            let out = lm::minimize(x0, |x| model.residual(x), |x| model.jacobian(x), &opts.lm);
            let raw = model.config(&out.x).ok()?;
            let config = gauge_fix(&raw).unwrap_or(raw);
            let residual = tensor_residual(a, &config).ok()?;
            Some((k, config, residual))
        })
        .collect();
    let best_residual = candidates.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    candidates
        .retain(|(_, cfg, res)| *res <= opts.accept_residual && validate_genericity(cfg).passed());
    if candidates.is_empty() {
        return Err(Error::NoConvergence { best_residual });
    }
    candidates.sort_by(|x, y| x.2.total_cmp(&y.2).then(x.0.cmp(&y.0)));

    let mut orbits: Vec<ReconstructionResult> = Vec::new();
    for (k, config, residual) in candidates {
        let mut merged = false;
        for orbit in orbits.iter_mut() {
            if pgl_equivalent(&orbit.config, &config, opts.dedup_tol)?.is_some() {
                orbit.hits += 1;
                merged = true;
                break;
            }
        }
        if !merged {
            orbits.push(ReconstructionResult {
                config,
                residual,
                restarts_used: opts.restarts,
                hits: 1,
                restart: k,
                orbit_label: None,
            });
        }
    }
    if orbits[0].config.is_line_case() {
        label_orbits(&mut orbits, opts.dedup_tol)?;
    }
    Ok(orbits)
}

fn label_orbits(orbits: &mut [ReconstructionResult], tol: f64) -> Result<()> {
    orbits[0].orbit_label = Some(OrbitLabel::Primary);
    let twin = crate::twist::dual_config(&orbits[0].config)?.identified()?;
    for orbit in orbits.iter_mut().skip(1) {
        if pgl_equivalent(&twin, &orbit.config, tol)?.is_some() {
            orbit.orbit_label = Some(OrbitLabel::Twisted);
        }
    }
    Ok(())
}

/// Cameras and scene points recovered from point tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct PointReconstruction {
    pub config: CameraConfig,
    pub points: Vec<Vector>,
    /// Mean projective distance between each observed and reprojected image point.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn reprojection(cfg: &CameraConfig, tuples: &[Vec<Vector>], points: &[Vector]) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for (tuple, z) in tuples.iter().zip(points) {
        for (x, cam) in tuple.iter().zip(cfg.cameras()) {
            let y = cam.matrix() * z;
            total += proj_distance(x.as_slice(), y.as_slice()).unwrap_or(std::f64::consts::SQRT_2);
            count += 1;
        }
    }
    total / count as f64
}

/// Least-squares scene point for each tuple under the cameras.
fn triangulate(cfg: &CameraConfig, tuples: &[Vec<Vector>]) -> Result<Vec<Vector>> {
    tuples
        .iter()
        .map(|tuple| {
            let blocks = tuple
                .iter()
                .zip(cfg.cameras())
                .map(|(x, c)| Ok(orthogonal_complement(x)? * c.matrix()))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&Mat> = blocks.iter().collect();
            let (_, v) = right_singular_system(&vstack(&refs))?;
            Ok(v.column(v.ncols() - 1).into_owned())
        })
        .collect()
}

/// Alternating projective factorization with projective depths.
pub fn reconstruct_from_points(
    tuples: &[Vec<Vector>],
    n: usize,
    m: &[usize],
    iters: usize,
) -> Result<PointReconstruction> {
    let dim = n + 1;
    let r = m.len();
    if m.is_empty() || m.contains(&0) {
        return Err(Error::input("target dimensions must be positive"));
    }
    if m.iter().sum::<usize>() < dim {
        return Err(Error::precondition(
            "sum of target dimensions is below n+1; point tuples cannot fix the depths",
        ));
    }
    if tuples.len() < n + 2 {
        return Err(Error::precondition(format!(
            "{} point tuples supplied, at least n+2 = {} required",
            tuples.len(),
            n + 2
        )));
    }
    let mut unit: Vec<Vec<Vector>> = Vec::with_capacity(tuples.len());
    for (j, tuple) in tuples.iter().enumerate() {
        if tuple.len() != r {
            return Err(Error::input(format!(
                "point tuple {} has {} points, expected {r}",
                j + 1,
                tuple.len()
            )));
        }
        let mut normalized = Vec::with_capacity(r);
        for (x, &mi) in tuple.iter().zip(m) {
            let norm = x.norm();
            if x.len() != mi + 1 || !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::input(format!(
                    "point tuple {} has an invalid image point",
                    j + 1
                )));
            }
            normalized.push(x / norm);
        }
        unit.push(normalized);
    }
    let rows: usize = m.iter().map(|mi| mi + 1).sum();
    let offsets: Vec<usize> = m
        .iter()
        .scan(0, |at, &mi| {
            let start = *at;
            *at += mi + 1;
            Some(start)
        })
        .collect();
    let npts = unit.len();
    let mut depths = vec![vec![1.0 / (r as f64).sqrt(); r]; npts];

    let measurement = |depths: &[Vec<f64>]| {
        let mut w = Mat::zeros(rows, npts);
        for j in 0..npts {
            for i in 0..r {
                for (a, v) in unit[j][i].iter().enumerate() {
                    w[(offsets[i] + a, j)] = depths[j][i] * v;
                }
            }
        }
        w
    };

    let sv = singular_values(&measurement(&depths))?;
    if sv.len() < dim || sv[dim - 1] <= 1e-9 * sv[0] {
        return Err(Error::degenerate("measurement matrix has rank below n+1"));
    }

    let mut best: Option<(f64, Mat)> = None;
    let mut iterations = 0;
    let mut converged = false;
    let mut previous = f64::INFINITY;
    for it in 0..iters.max(1) {
        iterations = it + 1;
        let w = measurement(&depths);
        let svd = w.svd(true, false);
        let u = svd.u.expect("requested left singular vectors");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let mut p = Mat::zeros(rows, dim);
        for (c, &k) in order.iter().take(dim).enumerate() {
            p.set_column(c, &(u.column(k) * svd.singular_values[k]));
        }
        let cfg = CameraConfig::from_stacked(n, m, &p)?;
        let points = triangulate(&cfg, &unit)?;
        let residual = reprojection(&cfg, &unit, &points);
        if best.as_ref().is_none_or(|(b, _)| residual < *b) {
            best = Some((residual, p.clone()));
        }
        if residual <= 1e-13 || (previous - residual).abs() <= 1e-15 + 1e-9 * residual {
            converged = true;
            break;
        }
        previous = residual;

        for j in 0..npts {
            let mut b = Mat::zeros(rows, r + dim);
            for i in 0..r {
                for (a, v) in unit[j][i].iter().enumerate() {
                    b[(offsets[i] + a, i)] = *v;
                }
            }
            b.view_mut((0, r), (rows, dim)).copy_from(&(-&p));
            let (_, v) = right_singular_system(&b)?;
            let sol = v.column(r + dim - 1);
            let mut lam: Vec<f64> = sol.iter().take(r).copied().collect();
            let norm = lam.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                continue;
            }
            let sign = if lam.iter().sum::<f64>() < 0.0 {
                -1.0
            } else {
                1.0
            };
            lam.iter_mut().for_each(|x| *x *= sign / norm);
            depths[j] = lam;
        }
    }
    let (_, p) = best.expect("at least one iteration ran");
    let config = CameraConfig::from_stacked(n, m, &p)?;
    let points = triangulate(&config, &unit)?;
    let residual = reprojection(&config, &unit, &points);
    Ok(PointReconstruction {
        config,
        points,
        residual,
        iterations,
        converged,
    })
}

/// Central-difference Jacobian of the unit-normalized tensor with respect to
/// all camera entries (camera by camera, row-major within each camera).
pub fn tensor_map_jacobian(cfg: &CameraConfig, p: &crate::tensor::Profile, h: f64) -> Result<Mat> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::input(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    if !p.matches(cfg) {
        return Err(Error::precondition(
            "profile does not match the configuration",
        ));
    }
    let rows = p.stacked_rows();
    let base = cfg.stacked();
    let unit = |s: &Mat| -> Result<Vector> {
        let t = Vector::from_vec(raw_tensor(s, &rows));
        let norm = t.norm();
        if !(norm > 0.0) {
            return Err(Error::degenerate("tensor vanishes"));
        }
        Ok(t / norm)
    };
    let a0 = unit(&base)?;
    let params = base.nrows() * base.ncols();
    let columns = (0..params)
        .into_par_iter()
        .map(|k| {
            let (row, col) = (k / base.ncols(), k % base.ncols());
            let mut plus = base.clone();
            plus[(row, col)] += h;
            let mut minus = base.clone();
            minus[(row, col)] -= h;
            let mut ap = unit(&plus)?;
            let mut am = unit(&minus)?;
            if ap.dot(&a0) < 0.0 {
                ap = -ap;
            }
            if am.dot(&a0) < 0.0 {
                am = -am;
            }
            Ok((ap - am) / (2.0 * h))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Mat::from_columns(&columns))
}

pub fn tensor_map_jacobian_rank(
    cfg: &CameraConfig,
    p: &crate::tensor::Profile,
    h: f64,
) -> Result<usize> {
    rank(&tensor_map_jacobian(cfg, p, h)?, JACOBIAN_RANK_TOL)
}

/// `sum_i ((n+1)(m_i+1) - 1) - ((n+1)^2 - 1)`, the rank expected when a
/// general fiber is a finite union of PGL orbits.
pub fn expected_jacobian_rank(n: usize, m: &[usize]) -> usize {
    let dim = n + 1;
    let params: usize = m.iter().map(|mi| dim * (mi + 1) - 1).sum();
    params.saturating_sub(dim * dim - 1)
}
