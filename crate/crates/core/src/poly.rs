//! Homogeneous polynomials in dense monomial coordinates.
//!
//! Monomials of a fixed degree are ordered graded-lexicographically with
//! `x_0` largest: `x_0^d, x_0^{d-1} x_1, ..., x_n^d`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{Mat, Vector};
use crate::scene::{matrix_from_rows, matrix_to_rows};

/// Exponent vectors of all degree-`degree` monomials in `nvars` variables.
pub fn monomials(nvars: usize, degree: usize) -> Vec<Vec<usize>> {
    fn go(nvars: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            go(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    go(nvars, degree, &mut Vec::new(), &mut out);
    out
}

/// Values of all degree-`degree` monomials at `z`.
pub fn eval_monomials(z: &[f64], degree: usize) -> Vector {
    let mons = monomials(z.len(), degree);
    Vector::from_iterator(
        mons.len(),
        mons.iter()
            .map(|e| e.iter().zip(z).map(|(&k, &x)| x.powi(k as i32)).product()),
    )
}

/// Matrix sending the coefficients of a degree-`degree` form in
/// `k.nrows()` variables to those of its pullback `t -> f(K t)`.
/// Rows index monomials in `t`, columns monomials in `v`.
pub fn substitution_matrix(k: &Mat, degree: usize) -> Mat {
    let (nv, nt) = (k.nrows(), k.ncols());
    let v_mons = monomials(nv, degree);
    let t_mons = monomials(nt, degree);
    let t_index: HashMap<&Vec<usize>, usize> =
        t_mons.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut out = Mat::zeros(t_mons.len(), v_mons.len());
    for (col, alpha) in v_mons.iter().enumerate() {
        let mut poly: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        poly.insert(vec![0; nt], 1.0);
        for (j, &power) in alpha.iter().enumerate() {
            for _ in 0..power {
                let mut next = BTreeMap::new();
                for (e, c) in &poly {
                    for l in 0..nt {
                        let w = k[(j, l)];
                        if w == 0.0 {
                            continue;
                        }
                        let mut e2 = e.clone();
                        e2[l] += 1;
                        *next.entry(e2).or_insert(0.0) += c * w;
                    }
                }
                poly = next;
            }
        }
        for (e, c) in poly {
            out[(t_index[&e], col)] = c;
        }
    }
    out
}

/// A space of degree-`degree` forms on `P^{nvars-1}`, one form per row of
/// `coefficients` in monomial order.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyBasis {
    nvars: usize,
    degree: usize,
    coefficients: Mat,
    /// Smallest kept singular value over the largest discarded one, relative
    /// to the largest; infinite when nothing separates them.
    gap: f64,
}

impl PolyBasis {
    pub fn new(nvars: usize, degree: usize, coefficients: Mat, gap: f64) -> Result<Self> {
        let count = monomials(nvars, degree).len();
        if coefficients.ncols() != count {
            return Err(Error::input(format!(
                "{} coefficients per form, expected {count}",
                coefficients.ncols()
            )));
        }
        Ok(Self {
            nvars,
            degree,
            coefficients,
            gap,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn coefficients(&self) -> &Mat {
        &self.coefficients
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn monomials(&self) -> Vec<Vec<usize>> {
        monomials(self.nvars, self.degree)
    }

    /// Values of each basis form at `z`.
    pub fn eval(&self, z: &[f64]) -> Result<Vector> {
        if z.len() != self.nvars {
            return Err(Error::input(format!(
                "point has {} coordinates, forms have {} variables",
                z.len(),
                self.nvars
            )));
        }
        Ok(&self.coefficients * eval_monomials(z, self.degree))
    }

    /// Coefficients of the binary forms `u -> f(u_0 a + u_1 b)`, highest
    /// power of `u_0` first.
    pub fn restrict_to_line(&self, a: &Vector, b: &Vector) -> Result<Mat> {
        if a.len() != self.nvars || b.len() != self.nvars {
            return Err(Error::input("line endpoints have the wrong length"));
        }
        let mut k = Mat::zeros(self.nvars, 2);
        k.set_column(0, a);
        k.set_column(1, b);
        Ok(&self.coefficients * substitution_matrix(&k, self.degree).transpose())
    }
}

#[derive(Serialize, Deserialize)]
struct PolyBasisJson {
    nvars: usize,
    degree: usize,
    monomials: Vec<Vec<usize>>,
    coefficients: Vec<Vec<f64>>,
    gap: f64,
}

impl Serialize for PolyBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyBasisJson {
            nvars: self.nvars,
            degree: self.degree,
            monomials: self.monomials(),
            coefficients: matrix_to_rows(&self.coefficients),
            gap: self.gap,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyBasis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = PolyBasisJson::deserialize(d)?;
        if p.monomials != monomials(p.nvars, p.degree) {
            return Err(serde::de::Error::custom(
                "monomials are not in graded lexicographic order",
            ));
        }
        let coefficients = if p.coefficients.is_empty() {
            Mat::zeros(0, p.monomials.len())
        } else {
            matrix_from_rows(&p.coefficients).map_err(serde::de::Error::custom)?
        };
        PolyBasis::new(p.nvars, p.degree, coefficients, p.gap).map_err(serde::de::Error::custom)
    }
}
