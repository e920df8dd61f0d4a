//! Profiles, Grassmann tensors and the incidence relation between a tensor
//! and a tuple of linear subspaces.
//!
//! A configuration `s = (s_1, ..., s_r)` stacks into a `sum(m_i+1) x (n+1)`
//! matrix `S`. For a profile `alpha` the tensor entry at `(sigma_1, ...,
//! sigma_r)` is the maximal minor of `S` on the rows `sigma_i` of each block,
//! with rows taken in increasing global order. For subspaces `U_i` cut out by
//! form matrices `F_i`, Cauchy-Binet applied to the block-diagonal
//! `diag(F_i) * S` gives
//!
//! ```text
//! det [F_1 s_1; ...; F_r s_r] = sum_sigma A^sigma * prod_i p^i_{sigma_i}(F_i)
//! ```
//!
//! with no extra signs, so the contraction vanishes exactly when the `U_i`
//! contain the images of a common scene point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    binomial, combinations, det, ensure_finite, nullspace, orthogonal_complement, plucker, rank,
    vstack, IndexSeq, Mat, Vector, DEFAULT_RANK_TOL,
};
use crate::scene::{matrix_from_rows, matrix_to_rows, CameraConfig};

/// Entries below this (after unit normalization) do not fix the sign of the
/// canonical representative.
const SIGN_ZERO_TOL: f64 = 1e-12;

/// An element `alpha` of B°(m): `1 <= alpha_i <= m_i`, `sum alpha_i = n+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Profile {
    n: usize,
    m: Vec<usize>,
    alpha: Vec<usize>,
}

impl Profile {
    pub fn new(n: usize, m: Vec<usize>, alpha: Vec<usize>) -> Result<Self> {
        if m.len() != alpha.len() {
            return Err(Error::precondition(format!(
                "alpha has {} entries but m has {}",
                alpha.len(),
                m.len()
            )));
        }
        if m.contains(&0) {
            return Err(Error::precondition("target dimensions must be positive"));
        }
        if let Some(i) = (0..m.len()).find(|&i| alpha[i] < 1 || alpha[i] > m[i]) {
            return Err(Error::precondition(format!(
                "alpha_{} = {} is outside 1..={}",
                i + 1,
                alpha[i],
                m[i]
            )));
        }
        let total: usize = alpha.iter().sum();
        if total != n + 1 {
            return Err(Error::precondition(format!(
                "alpha sums to {total}, expected n+1 = {}",
                n + 1
            )));
        }
        Ok(Self { n, m, alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> &[usize] {
        &self.m
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn num_cameras(&self) -> usize {
        self.m.len()
    }

    /// `C(m_i+1, alpha_i)` for each camera.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.m
            .iter()
            .zip(&self.alpha)
            .map(|(&mi, &ai)| binomial(mi + 1, ai))
            .collect()
    }

    /// Number of tensor entries `D = prod C(m_i+1, alpha_i)`.
    pub fn size(&self) -> usize {
        self.block_sizes().iter().product()
    }

    /// Per-camera index sequences in canonical order.
    pub fn index_sets(&self) -> Vec<Vec<IndexSeq>> {
        self.m
            .iter()
            .zip(&self.alpha)
            .map(|(&mi, &ai)| combinations(mi + 1, ai))
            .collect()
    }

    /// Mixed-radix digits of a flat index; the last camera varies fastest.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let sizes = self.block_sizes();
        let mut digits = vec![0; sizes.len()];
        for i in (0..sizes.len()).rev() {
            digits[i] = flat % sizes[i];
            flat /= sizes[i];
        }
        digits
    }

    pub fn flatten(&self, digits: &[usize]) -> usize {
        self.block_sizes()
            .iter()
            .zip(digits)
            .fold(0, |acc, (&size, &d)| acc * size + d)
    }

    /// True when the profile is valid for this configuration's `(n, m)`.
    pub fn matches(&self, cfg: &CameraConfig) -> bool {
        self.n == cfg.n() && self.m == cfg.m()
    }

    /// For each tensor entry, the 0-based rows of the stacked matrix it is a minor of.
    pub fn stacked_rows(&self) -> Vec<Vec<usize>> {
        let mut offsets = Vec::with_capacity(self.m.len());
        let mut at = 0;
        for &mi in &self.m {
            offsets.push(at);
            at += mi + 1;
        }
        let sets = self.index_sets();
        (0..self.size())
            .map(|flat| {
                let mut rows = Vec::with_capacity(self.n + 1);
                for (i, d) in self.unflatten(flat).into_iter().enumerate() {
                    rows.extend(sets[i][d].zero_based().map(|r| offsets[i] + r));
                }
                rows
            })
            .collect()
    }
}

/// All `beta` with `0 <= beta_i <= m_i + 1` and `sum beta_i = n+1`, in
/// lexicographic order.
pub fn enumerate_b(m: &[usize], n: usize) -> Vec<Vec<usize>> {
    enumerate_boxed(m.iter().map(|&mi| (0, mi + 1)).collect(), n + 1)
}

/// All profiles in B°(m), in lexicographic order of `alpha`.
pub fn enumerate_b_interior(m: &[usize], n: usize) -> Vec<Profile> {
    enumerate_boxed(m.iter().map(|&mi| (1, mi)).collect(), n + 1)
        .into_iter()
        .filter_map(|alpha| Profile::new(n, m.to_vec(), alpha).ok())
        .collect()
}

fn enumerate_boxed(bounds: Vec<(usize, usize)>, total: usize) -> Vec<Vec<usize>> {
    fn go(
        bounds: &[(usize, usize)],
        remaining: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let Some((&(lo, hi), rest)) = bounds.split_first() else {
            if remaining == 0 {
                out.push(prefix.clone());
            }
            return;
        };
        let rest_min: usize = rest.iter().map(|b| b.0).sum();
        let rest_max: usize = rest.iter().map(|b| b.1).sum();
        for v in lo..=hi.min(remaining) {
            let left = remaining - v;
            if left < rest_min || left > rest_max {
                continue;
            }
            prefix.push(v);
            go(rest, left, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if bounds.is_empty() {
        return out;
    }
    go(&bounds, total, &mut Vec::new(), &mut out);
    out
}

/// Normalize to unit Frobenius norm with the first non-negligible entry positive.
pub fn canonicalize(entries: &mut [f64]) -> Result<()> {
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::input("tensor has non-finite entries"));
    }
    let norm = entries.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::degenerate("tensor is zero"));
    }
    // Leave already-unit vectors bitwise unchanged so canonical form is idempotent.
    let mut scale = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
        1.0
    } else {
        1.0 / norm
    };
    if let Some(first) = entries.iter().find(|x| x.abs() * scale > SIGN_ZERO_TOL) {
        if *first < 0.0 {
            scale = -scale;
        }
    }
    entries.iter_mut().for_each(|x| *x *= scale);
    Ok(())
}

/// Grassmann tensor of a profile, stored as its canonical representative.
#[derive(Clone, Debug, PartialEq)]
pub struct GrassmannTensor {
    profile: Profile,
    entries: Vec<f64>,
}

impl GrassmannTensor {
    /// Build from any representative of the projective class.
    pub fn from_entries(profile: Profile, mut entries: Vec<f64>) -> Result<Self> {
        if entries.len() != profile.size() {
            return Err(Error::input(format!(
                "tensor of profile {:?} needs {} entries, got {}",
                profile.alpha,
                profile.size(),
                entries.len()
            )));
        }
        canonicalize(&mut entries)?;
        Ok(Self { profile, entries })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry at one index sequence per camera.
    pub fn get(&self, sigma: &[IndexSeq]) -> Result<f64> {
        let sets = self.profile.index_sets();
        if sigma.len() != sets.len() {
            return Err(Error::input("one index sequence per camera is required"));
        }
        let digits = sigma
            .iter()
            .zip(&sets)
            .map(|(s, set)| {
                set.iter()
                    .position(|c| c == s)
                    .ok_or_else(|| Error::IndexOutOfRange(format!("{:?}", s.indices())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.entries[self.profile.flatten(&digits)])
    }

    /// Projective distance to another tensor of the same profile.
    pub fn distance(&self, other: &GrassmannTensor) -> Result<f64> {
        if self.profile != other.profile {
            return Err(Error::input("tensors have different profiles"));
        }
        crate::numeric::proj_distance(&self.entries, &other.entries)
    }
}

/// Unnormalized tensor entries of a stacked camera matrix.
pub(crate) fn raw_tensor(stacked: &Mat, rows: &[Vec<usize>]) -> Vec<f64> {
    rows.iter().map(|r| det(&stacked.select_rows(r))).collect()
}

/// The `alpha`-component of the line `wedge^{n+1} s(V)`.
pub fn compute_tensor(cfg: &CameraConfig, profile: &Profile) -> Result<GrassmannTensor> {
    if !profile.matches(cfg) {
        return Err(Error::precondition(format!(
            "profile is for n = {}, m = {:?} but the configuration has n = {}, m = {:?}",
            profile.n,
            profile.m,
            cfg.n(),
            cfg.m()
        )));
    }
    let stacked = cfg.stacked();
    if rank(&stacked, DEFAULT_RANK_TOL)? < cfg.n() + 1 {
        return Err(Error::degenerate(
            "stacked camera matrix does not have rank n+1",
        ));
    }
    let entries = raw_tensor(&stacked, &profile.stacked_rows());
    GrassmannTensor::from_entries(profile.clone(), entries)
}

/// Linear subspaces `U_i ⊂ P(W_i)` of codimension `alpha_i`, each given by an
/// `alpha_i x (m_i+1)` matrix of defining forms.
#[derive(Clone, Debug, PartialEq)]
pub struct CodimSubspaceTuple {
    forms: Vec<Mat>,
}

impl CodimSubspaceTuple {
    pub fn new(forms: Vec<Mat>) -> Result<Self> {
        if forms.is_empty() {
            return Err(Error::input(
                "a subspace tuple needs at least one form matrix",
            ));
        }
        for (i, f) in forms.iter().enumerate() {
            ensure_finite(f)?;
            if f.nrows() == 0 || f.nrows() > f.ncols() {
                return Err(Error::input(format!(
                    "form matrix {} has shape {}x{}",
                    i + 1,
                    f.nrows(),
                    f.ncols()
                )));
            }
            if rank(f, DEFAULT_RANK_TOL)? < f.nrows() {
                return Err(Error::degenerate(format!(
                    "form matrix {} is not of full row rank",
                    i + 1
                )));
            }
        }
        Ok(Self { forms })
    }

    pub fn forms(&self) -> &[Mat] {
        &self.forms
    }

    pub fn into_forms(self) -> Vec<Mat> {
        self.forms
    }

    pub fn plucker_vectors(&self) -> Vec<Vector> {
        self.forms
            .iter()
            .map(|f| plucker(f).expect("forms are full rank by construction"))
            .collect()
    }

    /// Shape compatibility: `F_i` is `alpha_i x (m_i+1)`.
    pub fn check_profile(&self, profile: &Profile) -> Result<()> {
        if self.forms.len() != profile.num_cameras() {
            return Err(Error::input(format!(
                "tuple has {} subspaces, profile has {} cameras",
                self.forms.len(),
                profile.num_cameras()
            )));
        }
        for (i, f) in self.forms.iter().enumerate() {
            if f.shape() != (profile.alpha[i], profile.m[i] + 1) {
                return Err(Error::input(format!(
                    "form matrix {} is {}x{}, expected {}x{}",
                    i + 1,
                    f.nrows(),
                    f.ncols(),
                    profile.alpha[i],
                    profile.m[i] + 1
                )));
            }
        }
        Ok(())
    }
}

/// Contraction of `A` against the Plücker vectors of the tuple.
pub fn incidence_value(a: &GrassmannTensor, u: &CodimSubspaceTuple) -> Result<f64> {
    u.check_profile(&a.profile)?;
    Ok(contract(a, &u.plucker_vectors()))
}

/// `sum_sigma A^sigma prod_i p_i[sigma_i]`, contracting the last index first.
pub(crate) fn contract(a: &GrassmannTensor, vectors: &[Vector]) -> f64 {
    let mut current: Vec<f64> = a.entries.clone();
    for p in vectors.iter().rev() {
        let k = p.len();
        current = current
            .chunks_exact(k)
            .map(|chunk| chunk.iter().zip(p.iter()).map(|(x, y)| x * y).sum())
            .collect();
    }
    current[0]
}

/// Determinant of the `(n+1) x (n+1)` matrix stacking `F_i s_i`.
pub fn incidence_oracle(cfg: &CameraConfig, u: &CodimSubspaceTuple) -> Result<f64> {
    Ok(det(&incidence_matrix(cfg, u)?))
}

pub(crate) fn incidence_matrix(cfg: &CameraConfig, u: &CodimSubspaceTuple) -> Result<Mat> {
    if u.forms.len() != cfg.len() {
        return Err(Error::input(format!(
            "tuple has {} subspaces, configuration has {} cameras",
            u.forms.len(),
            cfg.len()
        )));
    }
    let codim: usize = u.forms.iter().map(|f| f.nrows()).sum();
    if codim != cfg.n() + 1 {
        return Err(Error::input(format!(
            "codimensions sum to {codim}, expected n+1 = {}",
            cfg.n() + 1
        )));
    }
    let blocks = u
        .forms
        .iter()
        .zip(cfg.cameras())
        .enumerate()
        .map(|(i, (f, c))| {
            if f.ncols() != c.matrix().nrows() {
                Err(Error::input(format!(
                    "form matrix {} has {} columns, camera has {} rows",
                    i + 1,
                    f.ncols(),
                    c.matrix().nrows()
                )))
            } else {
                Ok(f * c.matrix())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Mat> = blocks.iter().collect();
    Ok(vstack(&refs))
}

fn quotient_map(cfg: &CameraConfig, x: &[Vector]) -> Result<Mat> {
    if x.len() != cfg.len() {
        return Err(Error::input(format!(
            "need {} image points, got {}",
            cfg.len(),
            x.len()
        )));
    }
    let blocks = x
        .iter()
        .zip(cfg.cameras())
        .enumerate()
        .map(|(i, (xi, c))| {
            if xi.len() != c.matrix().nrows() {
                return Err(Error::input(format!(
                    "image point {} has {} coordinates, expected {}",
                    i + 1,
                    xi.len(),
                    c.matrix().nrows()
                )));
            }
            Ok(orthogonal_complement(xi)? * c.matrix())
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Mat> = blocks.iter().collect();
    Ok(vstack(&refs))
}

/// Rank of `V -> (+) T(-1)|_{x_i}`: the stack of `Q_i s_i`, where the rows of
/// `Q_i` span the orthogonal complement of `x_i`. `x` lies on the multiview
/// variety iff the rank is at most `n`.
pub fn rank_profile_at(cfg: &CameraConfig, x: &[Vector], tol: f64) -> Result<usize> {
    rank(&quotient_map(cfg, x)?, tol)
}

/// Scene points over `x`: an orthonormal basis of the kernel of the quotient map.
pub fn fiber_at(cfg: &CameraConfig, x: &[Vector], tol: f64) -> Result<Vec<Vector>> {
    nullspace(&quotient_map(cfg, x)?, tol)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileJson {
    pub n: usize,
    pub m: Vec<usize>,
    pub alpha: Vec<usize>,
}

impl Serialize for Profile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProfileJson {
            n: self.n,
            m: self.m.clone(),
            alpha: self.alpha.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Profile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = ProfileJson::deserialize(d)?;
        Profile::new(p.n, p.m, p.alpha).map_err(serde::de::Error::custom)
    }
}

/// Wire format: `{"profile": {...}, "entries": [f64]}` in canonical order.
#[derive(Serialize, Deserialize)]
struct GrassmannTensorJson {
    profile: Profile,
    entries: Vec<f64>,
}

impl Serialize for GrassmannTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GrassmannTensorJson {
            profile: self.profile.clone(),
            entries: self.entries.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GrassmannTensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let t = GrassmannTensorJson::deserialize(d)?;
        GrassmannTensor::from_entries(t.profile, t.entries).map_err(serde::de::Error::custom)
    }
}

/// Wire format of one tuple: `{"forms": [[[f64]]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubspaceTupleJson {
    pub forms: Vec<Vec<Vec<f64>>>,
}

impl Serialize for CodimSubspaceTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceTupleJson {
            forms: self.forms.iter().map(matrix_to_rows).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CodimSubspaceTuple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let t = SubspaceTupleJson::deserialize(d)?;
        let forms = t
            .forms
            .iter()
            .map(|f| matrix_from_rows(f))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        CodimSubspaceTuple::new(forms).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::proj_equal;
    use crate::sampling::{gaussian_matrix, gaussian_vector, seeded_rng, Rng};
    use crate::scene::{apply_homography, project, random_config, ScenePoint};

    fn profile(n: usize, m: &[usize], alpha: &[usize]) -> Profile {
        Profile::new(n, m.to_vec(), alpha.to_vec()).unwrap()
    }

    /// Forms annihilating `x`: random combinations of its orthogonal complement.
    fn forms_through(rng: &mut Rng, x: &Vector, rows: usize) -> Mat {
        let q = orthogonal_complement(x).unwrap();
        gaussian_matrix(rng, rows, q.nrows()) * q
    }

    fn random_tuple(rng: &mut Rng, p: &Profile) -> CodimSubspaceTuple {
        let forms = p
            .m()
            .iter()
            .zip(p.alpha())
            .map(|(&mi, &ai)| gaussian_matrix(rng, ai, mi + 1))
            .collect();
        CodimSubspaceTuple::new(forms).unwrap()
    }

    fn tuple_through_point(rng: &mut Rng, cfg: &CameraConfig, p: &Profile) -> CodimSubspaceTuple {
        let z = ScenePoint::new(gaussian_vector(rng, cfg.n() + 1)).unwrap();
        let x = project(cfg, &z).unwrap();
        let forms = x
            .iter()
            .zip(p.alpha())
            .map(|(xi, &ai)| forms_through(rng, xi, ai))
            .collect();
        CodimSubspaceTuple::new(forms).unwrap()
    }

    #[test]
    fn enumerate_small_cases() {
        assert_eq!(
            enumerate_b(&[1, 1], 1),
            vec![vec![0, 2], vec![1, 1], vec![2, 0]]
        );
        let interior: Vec<Vec<usize>> = enumerate_b_interior(&[1, 1], 1)
            .iter()
            .map(|p| p.alpha().to_vec())
            .collect();
        assert_eq!(interior, vec![vec![1, 1]]);
        let fm: Vec<Vec<usize>> = enumerate_b_interior(&[2, 2], 3)
            .iter()
            .map(|p| p.alpha().to_vec())
            .collect();
        assert_eq!(fm, vec![vec![2, 2]]);
        let tri: Vec<Vec<usize>> = enumerate_b_interior(&[2, 2, 2], 3)
            .iter()
            .map(|p| p.alpha().to_vec())
            .collect();
        assert_eq!(tri, vec![vec![1, 1, 2], vec![1, 2, 1], vec![2, 1, 1]]);
        // r = 1 has no interior profile since alpha_1 = n+1 > m_1.
        assert!(enumerate_b_interior(&[2], 3).is_empty());
    }

    /// Number of `alpha` with `1 <= alpha_i <= m_i` summing to `total`, by
    /// inclusion-exclusion over the upper bounds.
    fn composition_count(m: &[usize], total: usize) -> usize {
        let r = m.len();
        if total < r {
            return 0;
        }
        let free = total - r;
        let mut count: i64 = 0;
        for mask in 0u32..(1 << r) {
            let excess: usize = (0..r).filter(|i| mask & (1 << i) != 0).map(|i| m[i]).sum();
            if excess > free {
                continue;
            }
            let term = binomial(free - excess + r - 1, r - 1) as i64;
            count += if mask.count_ones() % 2 == 0 {
                term
            } else {
                -term
            };
        }
        count as usize
    }

    #[test]
    fn interior_enumeration_matches_composition_count() {
        fn all_m(budget: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if !prefix.is_empty() {
                out.push(prefix.clone());
            }
            for mi in 1..=budget.saturating_sub(1) {
                if mi < budget {
                    prefix.push(mi);
                    all_m(budget - mi - 1, prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut ms = Vec::new();
        all_m(14, &mut Vec::new(), &mut ms);
        assert!(ms.len() > 300);
        for m in &ms {
            for n in 1..=14 {
                let got = enumerate_b_interior(m, n);
                assert_eq!(got.len(), composition_count(m, n + 1), "m={m:?} n={n}");
                let b = enumerate_b(m, n);
                for p in &got {
                    assert!(b.contains(&p.alpha().to_vec()));
                }
            }
        }
    }

    #[test]
    fn profile_rejects_bad_alpha() {
        assert!(Profile::new(3, vec![2, 2], vec![3, 1]).is_err());
        assert!(Profile::new(3, vec![2, 2], vec![2, 1]).is_err());
        assert!(Profile::new(3, vec![2, 2, 2], vec![2, 2]).is_err());
    }

    #[test]
    fn tensor_sizes() {
        let cfg = random_config(3, &[2, 2], 1).unwrap();
        assert_eq!(
            compute_tensor(&cfg, &profile(3, &[2, 2], &[2, 2]))
                .unwrap()
                .len(),
            9
        );
        let cfg = random_config(3, &[2, 2, 2], 1).unwrap();
        let t = compute_tensor(&cfg, &profile(3, &[2, 2, 2], &[2, 1, 1])).unwrap();
        assert_eq!(t.len(), 27);
        let norm: f64 = t.entries().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_rows_give_unit_minor() {
        let mut rng = seeded_rng(2);
        let mut s1 = gaussian_matrix(&mut rng, 3, 4);
        let mut s2 = gaussian_matrix(&mut rng, 3, 4);
        let id = Mat::identity(4, 4);
        s1.set_row(0, &id.row(0));
        s1.set_row(1, &id.row(1));
        s2.set_row(0, &id.row(2));
        s2.set_row(1, &id.row(3));
        let cfg = CameraConfig::from_matrices(3, vec![s1, s2]).unwrap();
        let p = profile(3, &[2, 2], &[2, 2]);
        let raw = raw_tensor(&cfg.stacked(), &p.stacked_rows());
        // sigma = ((1,2),(1,2)) is the first entry.
        assert!((raw[0].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn get_matches_flat_order() {
        let cfg = random_config(3, &[2, 2, 2], 3).unwrap();
        let p = profile(3, &[2, 2, 2], &[2, 1, 1]);
        let t = compute_tensor(&cfg, &p).unwrap();
        let sigma = vec![
            IndexSeq::new(vec![1, 3], 3).unwrap(),
            IndexSeq::new(vec![2], 3).unwrap(),
            IndexSeq::new(vec![3], 3).unwrap(),
        ];
        // digits (1, 1, 2) -> 1*9 + 1*3 + 2
        assert_eq!(t.get(&sigma).unwrap(), t.entries()[14]);
    }

    #[test]
    fn incidence_vanishes_through_projected_points() {
        for (n, m, alpha) in [
            (3, vec![2, 2], vec![2, 2]),
            (3, vec![2, 2, 2], vec![2, 1, 1]),
            (3, vec![1, 1, 1, 1], vec![1, 1, 1, 1]),
            (4, vec![2, 2, 3], vec![2, 1, 2]),
        ] {
            let cfg = random_config(n, &m, 10).unwrap();
            let p = profile(n, &m, &alpha);
            let a = compute_tensor(&cfg, &p).unwrap();
            let mut rng = seeded_rng(11);
            for _ in 0..50 {
                let u = tuple_through_point(&mut rng, &cfg, &p);
                let scale: f64 = u.plucker_vectors().iter().map(|v| v.norm()).product();
                assert!(incidence_value(&a, &u).unwrap().abs() <= 1e-9 * scale);
                let oscale: f64 = incidence_matrix(&cfg, &u)
                    .unwrap()
                    .row_iter()
                    .map(|r| r.norm())
                    .product();
                assert!(incidence_oracle(&cfg, &u).unwrap().abs() <= 1e-9 * oscale);
            }
        }
    }

    #[test]
    fn random_subspaces_miss_the_multiview_variety() {
        let p = profile(3, &[2, 2, 2], &[2, 1, 1]);
        let cfg = random_config(3, &[2, 2, 2], 12).unwrap();
        let a = compute_tensor(&cfg, &p).unwrap();
        let mut rng = seeded_rng(13);
        let values: Vec<f64> = (0..200)
            .map(|_| {
                let u = random_tuple(&mut rng, &p);
                let scale: f64 = u.plucker_vectors().iter().map(|v| v.norm()).product();
                incidence_value(&a, &u).unwrap().abs() / scale
            })
            .collect();
        let median = {
            let mut v = values.clone();
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        assert!(median > 1e-3, "median {median}");
    }

    #[test]
    fn contraction_is_a_constant_multiple_of_the_determinant() {
        let p = profile(3, &[1, 1, 1, 1], &[1, 1, 1, 1]);
        let cfg = random_config(3, &[1, 1, 1, 1], 14).unwrap();
        let a = compute_tensor(&cfg, &p).unwrap();
        let mut rng = seeded_rng(15);
        let ratios: Vec<f64> = (0..1000)
            .map(|_| {
                let u = random_tuple(&mut rng, &p);
                incidence_value(&a, &u).unwrap() / incidence_oracle(&cfg, &u).unwrap()
            })
            .collect();
        let first = ratios[0];
        for r in &ratios {
            assert!(((r - first) / first).abs() <= 1e-8);
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let p = profile(3, &[2, 2], &[2, 2]);
        let cfg = random_config(3, &[2, 2], 16).unwrap();
        let a = compute_tensor(&cfg, &p).unwrap();
        let mut rng = seeded_rng(1);
        let wrong = CodimSubspaceTuple::new(vec![
            gaussian_matrix(&mut rng, 1, 3),
            gaussian_matrix(&mut rng, 2, 3),
        ])
        .unwrap();
        assert!(matches!(incidence_value(&a, &wrong), Err(Error::Input(_))));
        assert!(matches!(
            incidence_oracle(&cfg, &wrong),
            Err(Error::Input(_))
        ));
        let other = profile(3, &[2, 2, 2], &[2, 1, 1]);
        assert!(compute_tensor(&cfg, &other).is_err());
    }

    #[test]
    fn tensor_is_pgl_covariant_and_scale_invariant() {
        for seed in 0..10 {
            let cfg = random_config(4, &[2, 2, 3], seed).unwrap();
            let p = profile(4, &[2, 2, 3], &[2, 1, 2]);
            let a = compute_tensor(&cfg, &p).unwrap();
            let mut rng = seeded_rng(100 + seed);
            let h = gaussian_matrix(&mut rng, 5, 5);
            let b = compute_tensor(&apply_homography(&cfg, &h).unwrap(), &p).unwrap();
            assert!(proj_equal(a.entries(), b.entries(), 1e-10).unwrap());

            let scaled = CameraConfig::from_matrices(
                4,
                cfg.cameras()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.matrix() * (0.5 + i as f64 * 1.7))
                    .collect(),
            )
            .unwrap();
            let c = compute_tensor(&scaled, &p).unwrap();
            for (x, y) in a.entries().iter().zip(c.entries()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_profile_on_and_off_the_variety() {
        let cfg = random_config(3, &[2, 2, 2], 20).unwrap();
        let mut rng = seeded_rng(21);
        for _ in 0..100 {
            let z = ScenePoint::new(gaussian_vector(&mut rng, 4)).unwrap();
            let x = project(&cfg, &z).unwrap();
            assert_eq!(rank_profile_at(&cfg, &x, DEFAULT_RANK_TOL).unwrap(), 3);
            let fiber = fiber_at(&cfg, &x, DEFAULT_RANK_TOL).unwrap();
            assert_eq!(fiber.len(), 1);
            assert!(proj_equal(fiber[0].as_slice(), z.coords().as_slice(), 1e-9).unwrap());

            let off: Vec<Vector> = (0..3).map(|_| gaussian_vector(&mut rng, 3)).collect();
            assert_eq!(rank_profile_at(&cfg, &off, DEFAULT_RANK_TOL).unwrap(), 4);
        }
        let zero = vec![Vector::zeros(3), Vector::zeros(3), Vector::zeros(3)];
        assert!(rank_profile_at(&cfg, &zero, DEFAULT_RANK_TOL).is_err());
    }

    #[test]
    fn rank_profile_on_the_line_hypersurface() {
        let cfg = random_config(3, &[1, 1, 1, 1], 22).unwrap();
        let mut rng = seeded_rng(23);
        for _ in 0..200 {
            let z = ScenePoint::new(gaussian_vector(&mut rng, 4)).unwrap();
            let x = project(&cfg, &z).unwrap();
            assert_eq!(rank_profile_at(&cfg, &x, DEFAULT_RANK_TOL).unwrap(), 3);
        }
    }

    #[test]
    fn json_round_trip() {
        let cfg = random_config(3, &[2, 2, 2], 30).unwrap();
        let p = profile(3, &[2, 2, 2], &[1, 2, 1]);
        let t = compute_tensor(&cfg, &p).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.starts_with(r#"{"profile":{"n":3,"m":[2,2,2],"alpha":[1,2,1]},"entries":["#));
        let back: GrassmannTensor = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
        let bad = r#"{"profile":{"n":3,"m":[2,2],"alpha":[3,1]},"entries":[1]}"#;
        assert!(serde_json::from_str::<GrassmannTensor>(bad).is_err());
        let short = r#"{"profile":{"n":3,"m":[2,2],"alpha":[2,2]},"entries":[1,2]}"#;
        assert!(serde_json::from_str::<GrassmannTensor>(short).is_err());
    }
}
