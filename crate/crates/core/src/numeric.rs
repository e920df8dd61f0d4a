//! Dense numerical primitives shared by every other module: singular-value
//! ranks and kernels, minors, lexicographic index enumeration, Plücker
//! vectors and comparison of vectors modulo scale.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense real matrix of homogeneous coordinates.
pub type Mat = DMatrix<f64>;
/// Dense real column vector.
pub type Vector = DVector<f64>;

/// Relative singular-value threshold used wherever a "generic" full-rank
/// assumption has to be checked numerically.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Strictly increasing sequence of 1-based indices into `1..=universe`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSeq {
    indices: Vec<usize>,
    universe: usize,
}

impl IndexSeq {
    pub fn new(indices: Vec<usize>, universe: usize) -> Result<Self> {
        if let Some(&first) = indices.first() {
            if first < 1 {
                return Err(Error::IndexOutOfRange("indices are 1-based".into()));
            }
        }
        if let Some(&last) = indices.last() {
            if last > universe {
                return Err(Error::IndexOutOfRange(format!(
                    "index {last} exceeds universe {universe}"
                )));
            }
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("index sequence must be strictly increasing"));
        }
        Ok(Self { indices, universe })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// The same indices shifted to 0-based positions.
    pub fn zero_based(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().map(|&i| i - 1)
    }
}

pub(crate) fn ensure_finite(m: &Mat) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::input("matrix has non-finite entries"))
    }
}

fn ensure_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

/// Singular values in decreasing order (`min(rows, cols)` of them).
pub fn singular_values(m: &Mat) -> Result<Vec<f64>> {
    ensure_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Full right singular basis: returns the `cols` singular values (padded with
/// zeros when `rows < cols`) in decreasing order together with the matching
/// right singular vectors as the columns of a `cols x cols` orthogonal matrix.
pub fn right_singular_system(m: &Mat) -> Result<(Vec<f64>, Mat)> {
    ensure_finite(m)?;
    let cols = m.ncols();
    let padded = if m.nrows() < cols {
        let mut p = Mat::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let mut v = Mat::zeros(cols, cols);
    for (dst, &src) in order.iter().enumerate() {
        v.set_column(dst, &v_t.row(src).transpose());
    }
    Ok((values, v))
}

/// Number of singular values exceeding `tol * sigma_max`.
pub fn rank(m: &Mat, tol: f64) -> Result<usize> {
    ensure_tol(tol)?;
    let sv = singular_values(m)?;
    Ok(rank_from_singular_values(&sv, tol))
}

pub(crate) fn rank_from_singular_values(sv: &[f64], tol: f64) -> usize {
    let Some(&largest) = sv.first() else {
        return 0;
    };
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * largest).count()
}

/// Orthonormal basis of the numerical kernel of `m`.
pub fn nullspace(m: &Mat, tol: f64) -> Result<Vec<Vector>> {
    ensure_tol(tol)?;
    let sv = singular_values(m)?;
    let r = rank_from_singular_values(&sv, tol);
    let (_, v) = right_singular_system(m)?;
    Ok((r..m.ncols()).map(|k| v.column(k).into_owned()).collect())
}

/// Rows of an orthonormal basis of the orthogonal complement of `x`.
pub fn orthogonal_complement(x: &Vector) -> Result<Mat> {
    let norm = x.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::input(
            "cannot complement a zero or non-finite vector",
        ));
    }
    let row = Mat::from_row_slice(1, x.len(), (x / norm).as_slice());
    let (_, v) = right_singular_system(&row)?;
    let k = x.len();
    let mut out = Mat::zeros(k - 1, k);
    for j in 1..k {
        out.set_row(j - 1, &v.column(j).transpose());
    }
    Ok(out)
}

/// Determinant of a square matrix (LU with partial pivoting).
pub fn det(m: &Mat) -> f64 {
    debug_assert!(m.is_square());
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// Determinant of the submatrix on `rows x cols`, both taken in increasing order.
pub fn minor(m: &Mat, rows: &IndexSeq, cols: &IndexSeq) -> Result<f64> {
    if rows.len() != cols.len() {
        return Err(Error::input(format!(
            "minor needs as many rows as columns, got {} and {}",
            rows.len(),
            cols.len()
        )));
    }
    if rows.indices().last().is_some_and(|&r| r > m.nrows())
        || cols.indices().last().is_some_and(|&c| c > m.ncols())
    {
        return Err(Error::IndexOutOfRange(format!(
            "minor indices exceed a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    ensure_finite(m)?;
    let rows: Vec<usize> = rows.zero_based().collect();
    let cols: Vec<usize> = cols.zero_based().collect();
    Ok(det(&m.select_rows(&rows).select_columns(&cols)))
}

/// All `C(universe, k)` increasing sequences in lexicographic order.
///
/// This order is the flattening order of every tensor index in the crate.
pub fn combinations(universe: usize, k: usize) -> Vec<IndexSeq> {
    let mut out = Vec::new();
    if k > universe {
        return out;
    }
    let mut current: Vec<usize> = (1..=k).collect();
    loop {
        out.push(IndexSeq {
            indices: current.clone(),
            universe,
        });
        // Advance the rightmost index that still has room.
        let mut pos = k;
        while pos > 0 && current[pos - 1] == universe - k + pos {
            pos -= 1;
        }
        if pos == 0 {
            return out;
        }
        current[pos - 1] += 1;
        for j in pos..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Plücker vector of the row space of `f`: all maximal minors in the
/// lexicographic order of `combinations(f.ncols(), f.nrows())`.
pub fn plucker(f: &Mat) -> Result<Vector> {
    if f.nrows() > f.ncols() || f.nrows() == 0 {
        return Err(Error::input(format!(
            "Plücker coordinates need 1 <= rows <= cols, got {}x{}",
            f.nrows(),
            f.ncols()
        )));
    }
    if rank(f, DEFAULT_RANK_TOL)? < f.nrows() {
        return Err(Error::degenerate("form matrix is not of full row rank"));
    }
    Ok(plucker_unchecked(f))
}

/// Maximal minors without the rank certificate.
pub(crate) fn plucker_unchecked(f: &Mat) -> Vector {
    let rows: Vec<usize> = (0..f.nrows()).collect();
    let base = f.select_rows(&rows);
    let entries: Vec<f64> = combinations(f.ncols(), f.nrows())
        .iter()
        .map(|c| {
            let cols: Vec<usize> = c.zero_based().collect();
            det(&base.select_columns(&cols))
        })
        .collect();
    Vector::from_vec(entries)
}

/// Distance between the projective classes of `u` and `v`:
/// `min_s || u/|u| - s v/|v| ||` over `s = +-1`.
pub fn proj_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::input(format!(
            "length mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(nu > 0.0 && nv > 0.0) || !nu.is_finite() || !nv.is_finite() {
        return Err(Error::input(
            "projective comparison of a zero or non-finite vector",
        ));
    }
    let (mut plus, mut minus) = (0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        let (a, b) = (a / nu, b / nv);
        plus += (a - b) * (a - b);
        minus += (a + b) * (a + b);
    }
    Ok(plus.min(minus).sqrt())
}

/// True iff `u` and `v` agree modulo a nonzero scalar, up to `tol`.
pub fn proj_equal(u: &[f64], v: &[f64], tol: f64) -> Result<bool> {
    Ok(proj_distance(u, v)? <= tol)
}

/// Projective distance between two matrices viewed as flat vectors.
pub fn proj_distance_mat(a: &Mat, b: &Mat) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::input("matrix shape mismatch"));
    }
    proj_distance(a.as_slice(), b.as_slice())
}

/// Vertical concatenation of equally wide blocks.
pub fn vstack(blocks: &[&Mat]) -> Mat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    out
}
