//! Subspace correspondences and linear estimation of the Grassmann tensor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{orthogonal_complement, right_singular_system, Mat, Vector};
use crate::sampling::{derive_seed, gaussian_matrix, gaussian_vector, seeded_rng, Rng};
use crate::scene::{project, CameraConfig, ScenePoint, MAX_RESAMPLES};
use crate::tensor::{CodimSubspaceTuple, GrassmannTensor, Profile};

/// Singular values at or below `tol * sigma_max` count toward the nullspace.
pub const DEFAULT_ESTIMATION_TOL: f64 = 1e-9;

/// Subspace tuples expanded from each point tuple.
pub const DEFAULT_POINT_EXPANSION: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct CorrespondenceSet {
    profile: Profile,
    tuples: Vec<CodimSubspaceTuple>,
    provenance: Option<Vec<Vector>>,
}

impl CorrespondenceSet {
    pub fn new(profile: Profile, tuples: Vec<CodimSubspaceTuple>) -> Result<Self> {
        for (k, t) in tuples.iter().enumerate() {
            t.check_profile(&profile)
                .map_err(|e| Error::input(format!("tuple {}: {e}", k + 1)))?;
        }
        Ok(Self {
            profile,
            tuples,
            provenance: None,
        })
    }

    /// Attach the scene point each tuple was drawn through.
    pub fn with_provenance(mut self, points: Vec<Vector>) -> Result<Self> {
        if points.len() != self.tuples.len() {
            return Err(Error::input("one provenance point per tuple is required"));
        }
        self.provenance = Some(points);
        Ok(self)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn tuples(&self) -> &[CodimSubspaceTuple] {
        &self.tuples
    }

    pub fn provenance(&self) -> Option<&[Vector]> {
        self.provenance.as_deref()
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

fn forms_annihilating(rng: &mut Rng, x: &Vector, rows: usize) -> Result<Mat> {
    let q = orthogonal_complement(x)?;
    Ok(gaussian_matrix(rng, rows, q.nrows()) * q)
}

/// A random tuple through the images of a random scene point, with that point.
pub fn sample_correspondence_with_point(
    cfg: &CameraConfig,
    p: &Profile,
    seed: u64,
) -> Result<(CodimSubspaceTuple, Vector)> {
    if !p.matches(cfg) {
        return Err(Error::precondition(
            "profile does not match the configuration",
        ));
    }
    let mut rng = seeded_rng(seed);
    for _ in 0..MAX_RESAMPLES {
        let z = ScenePoint::new(gaussian_vector(&mut rng, cfg.n() + 1))?;
        let Ok(x) = project(cfg, &z) else { continue };
        let forms = x
            .iter()
            .zip(p.alpha())
            .map(|(xi, &ai)| forms_annihilating(&mut rng, xi, ai))
            .collect::<Result<Vec<_>>>()?;
        if let Ok(t) = CodimSubspaceTuple::new(forms) {
            return Ok((t, z.into_inner()));
        }
    }
    Err(Error::Generation {
        attempts: MAX_RESAMPLES,
    })
}

pub fn sample_correspondence(
    cfg: &CameraConfig,
    p: &Profile,
    seed: u64,
) -> Result<CodimSubspaceTuple> {
    sample_correspondence_with_point(cfg, p, seed).map(|(t, _)| t)
}

/// `count` tuples; tuple `k` uses the seed derived from `(seed, k)`.
pub fn sample_correspondences(
    cfg: &CameraConfig,
    p: &Profile,
    count: usize,
    seed: u64,
) -> Result<CorrespondenceSet> {
    let drawn = (0..count)
        .into_par_iter()
        .map(|k| sample_correspondence_with_point(cfg, p, derive_seed(seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;
    let (tuples, points): (Vec<_>, Vec<_>) = drawn.into_iter().unzip();
    CorrespondenceSet::new(p.clone(), tuples)?.with_provenance(points)
}

/// Perturb each `F_i` by Gaussian noise of standard deviation
/// `sigma * ||F_i|| / sqrt(entries)`.
pub fn add_noise(t: &CodimSubspaceTuple, sigma: f64, seed: u64) -> Result<CodimSubspaceTuple> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::input(format!(
            "noise level must be finite and non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(t.clone());
    }
    let mut rng = seeded_rng(seed);
    let forms = t
        .forms()
        .iter()
        .map(|f| {
            let scale = sigma * f.norm() / (f.len() as f64).sqrt();
            f + gaussian_matrix(&mut rng, f.nrows(), f.ncols()) * scale
        })
        .collect();
    CodimSubspaceTuple::new(forms)
}

pub fn add_noise_set(cs: &CorrespondenceSet, sigma: f64, seed: u64) -> Result<CorrespondenceSet> {
    let tuples = cs
        .tuples
        .par_iter()
        .enumerate()
        .map(|(k, t)| add_noise(t, sigma, derive_seed(seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrespondenceSet {
        profile: cs.profile.clone(),
        tuples,
        provenance: cs.provenance.clone(),
    })
}

/// Expand each point tuple into `k` subspace tuples through it.
pub fn expand_point_tuples(
    points: &[Vec<Vector>],
    p: &Profile,
    k: usize,
    seed: u64,
) -> Result<CorrespondenceSet> {
    if k == 0 {
        return Err(Error::input("point expansion factor must be positive"));
    }
    for (j, tuple) in points.iter().enumerate() {
        if tuple.len() != p.num_cameras()
            || tuple.iter().zip(p.m()).any(|(x, &mi)| x.len() != mi + 1)
        {
            return Err(Error::input(format!(
                "point tuple {} does not match the profile's image dimensions",
                j + 1
            )));
        }
    }
    let tuples = (0..points.len() * k)
        .into_par_iter()
        .map(|idx| {
            let mut rng = seeded_rng(derive_seed(seed, idx as u64));
            let forms = points[idx / k]
                .iter()
                .zip(p.alpha())
                .map(|(x, &ai)| forms_annihilating(&mut rng, x, ai))
                .collect::<Result<Vec<_>>>()?;
            CodimSubspaceTuple::new(forms)
        })
        .collect::<Result<Vec<_>>>()?;
    CorrespondenceSet::new(p.clone(), tuples)
}

/// `prod_i p^i_{sigma_i}(U_i)` over all multi-indices, normalized to unit length.
pub fn coefficient_row(t: &CodimSubspaceTuple) -> Vec<f64> {
    let mut row = vec![1.0];
    for v in t.plucker_vectors() {
        row = row
            .iter()
            .flat_map(|&a| v.iter().map(move |&b| a * b))
            .collect();
    }
    let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        row.iter_mut().for_each(|x| *x /= norm);
    }
    row
}

pub fn coefficient_matrix(cs: &CorrespondenceSet) -> Mat {
    let d = cs.profile.size();
    let rows: Vec<Vec<f64>> = cs.tuples.par_iter().map(coefficient_row).collect();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Mat::from_row_slice(cs.tuples.len(), d, &flat)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationDiagnostics {
    pub count: usize,
    /// Smallest singular value of the coefficient matrix.
    pub sigma_min: f64,
    /// Second smallest singular value.
    pub sigma_next: f64,
    pub sigma_max: f64,
    /// Singular values at or below `tol * sigma_max`.
    pub nullity: usize,
    /// `|row . a|` for each (unit) coefficient row.
    pub row_residuals: Vec<f64>,
}

impl EstimationDiagnostics {
    pub fn max_row_residual(&self) -> f64 {
        self.row_residuals.iter().copied().fold(0.0, f64::max)
    }

    /// `sigma_next / sigma_max`: how far the second solution is from existing.
    pub fn relative_gap(&self) -> f64 {
        if self.sigma_max > 0.0 {
            self.sigma_next / self.sigma_max
        } else {
            0.0
        }
    }
}

/// Least-singular right vector of the coefficient matrix, requiring at least
/// `D - 1` tuples.
pub fn estimate_tensor(
    cs: &CorrespondenceSet,
    tol: f64,
) -> Result<(GrassmannTensor, EstimationDiagnostics)> {
    estimate_tensor_with_min(cs, tol, cs.profile.size().saturating_sub(1))
}

pub fn estimate_tensor_with_min(
    cs: &CorrespondenceSet,
    tol: f64,
    min_count: usize,
) -> Result<(GrassmannTensor, EstimationDiagnostics)> {
    let d = cs.profile.size();
    if cs.len() < min_count.max(1) {
        return Err(Error::precondition(format!(
            "{} correspondences supplied, at least {} required",
            cs.len(),
            min_count.max(1)
        )));
    }
    if d < 2 {
        return Err(Error::precondition("tensor has a single entry"));
    }
    let m = coefficient_matrix(cs);
    let (sv, v) = right_singular_system(&m)?;
    let sigma_max = sv[0];
    let nullity = sv.iter().filter(|&&s| s <= tol * sigma_max).count();
    if nullity >= 2 {
        return Err(Error::Ambiguous { dim: nullity });
    }
    let a = v.column(d - 1).iter().copied().collect::<Vec<_>>();
    let tensor = GrassmannTensor::from_entries(cs.profile.clone(), a)?;
    let av = Vector::from_column_slice(tensor.entries());
    let row_residuals = (&m * &av).iter().map(|x| x.abs()).collect();
    let diagnostics = EstimationDiagnostics {
        count: cs.len(),
        sigma_min: sv[d - 1],
        sigma_next: sv[d - 2],
        sigma_max,
        nullity,
        row_residuals,
    };
    Ok((tensor, diagnostics))
}

/// Residual of `a` on each tuple, relative to the tuple's Plücker magnitudes.
pub fn tuple_residuals(a: &GrassmannTensor, cs: &CorrespondenceSet) -> Result<Vec<f64>> {
    if a.profile() != &cs.profile {
        return Err(Error::input(
            "tensor and correspondences have different profiles",
        ));
    }
    let av = Vector::from_column_slice(a.entries());
    Ok(cs
        .tuples
        .iter()
        .map(|t| {
            let row = Vector::from_vec(coefficient_row(t));
            row.dot(&av).abs()
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
struct CorrespondenceSetJson {
    profile: Profile,
    tuples: Vec<CodimSubspaceTuple>,
}

impl Serialize for CorrespondenceSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CorrespondenceSetJson {
            profile: self.profile.clone(),
            tuples: self.tuples.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CorrespondenceSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = CorrespondenceSetJson::deserialize(d)?;
        CorrespondenceSet::new(c.profile, c.tuples).map_err(serde::de::Error::custom)
    }
}
