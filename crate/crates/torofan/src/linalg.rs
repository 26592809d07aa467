//! Exact linear algebra over the rationals.
//!
//! Provides reduced row echelon form, kernels, canonical subspaces, exterior
//! powers in lexicographic coordinates, and cochain complexes of subspaces.
//! Canonical basis choices make structural equality of [`Subspace`] values
//! coincide with equality of the subspaces they present.

use crate::{Error, Result};
use itertools::Itertools;
use num::{BigInt, BigRational, One, Zero};

pub type Rat = BigRational;
pub type Int = BigInt;

/// Shorthand for a small rational constant.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(Int::from(num), Int::from(den))
}

/// Shorthand for an integer rational constant.
pub fn rint(num: i64) -> Rat {
    Rat::from(Int::from(num))
}

pub fn rat_vec(ints: &[i64]) -> Vec<Rat> {
    ints.iter().map(|&x| rint(x)).collect()
}

pub fn int_vec(ints: &[i64]) -> Vec<Int> {
    ints.iter().map(|&x| Int::from(x)).collect()
}

pub fn to_rat_vec(v: &[Int]) -> Vec<Rat> {
    v.iter().map(|x| Rat::from(x.clone())).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_int(a: &[Int], b: &[Int]) -> Int {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pairing of a rational covector with an integer vector.
pub fn pair(a: &[Rat], b: &[Int]) -> Rat {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * Rat::from(y.clone())).sum()
}

pub fn is_zero_vec(v: &[Rat]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// In-place reduced row echelon form. Zero rows are removed; the returned
/// vector lists the pivot column of each remaining row in increasing order.
pub fn rref(mat: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let ncols = mat.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(pr) = (row..mat.len()).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(row, pr);
        let inv = mat[row][col].clone();
        for x in mat[row].iter_mut() {
            *x = &*x / &inv;
        }
        let pivot_row = mat[row].clone();
        for (r, mrow) in mat.iter_mut().enumerate() {
            if r != row && !mrow[col].is_zero() {
                let f = mrow[col].clone();
                for (x, pv) in mrow.iter_mut().zip(&pivot_row) {
                    let sub = &f * pv;
                    *x = &*x - sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == mat.len() {
            break;
        }
    }
    mat.truncate(row);
    pivots
}

pub fn rank(mat: &[Vec<Rat>]) -> usize {
    let mut m = mat.to_vec();
    rref(&mut m);
    m.len()
}

/// Canonical basis of the solution space of `mat * x = 0` with `ncols`
/// unknowns. Each basis vector carries a 1 in one free column.
pub fn kernel_basis(mat: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let mut m = mat.to_vec();
    let pivots = rref(&mut m);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); ncols];
        v[free] = Rat::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -m[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

pub fn det(mat: &[Vec<Rat>]) -> Rat {
    let n = mat.len();
    assert!(mat.iter().all(|r| r.len() == n));
    let mut m = mat.to_vec();
    let mut d = Rat::one();
    for col in 0..n {
        let Some(pr) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rat::zero();
        };
        if pr != col {
            m.swap(col, pr);
            d = -d;
        }
        d *= m[col][col].clone();
        let inv = m[col][col].clone();
        let pivot_row = m[col].clone();
        for mrow in m.iter_mut().skip(col + 1) {
            if !mrow[col].is_zero() {
                let f = &mrow[col] / &inv;
                for (x, pv) in mrow.iter_mut().zip(&pivot_row).skip(col) {
                    let sub = &f * pv;
                    *x = &*x - sub;
                }
            }
        }
    }
    d
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// The `p`-element subsets of `{0, .., n-1}` in lexicographic order; this is
/// the coordinate convention for exterior powers throughout the crate.
pub fn lex_subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    (0..n).combinations(p).collect()
}

/// Coordinates of `v_0 ∧ .. ∧ v_{p-1}` in the lexicographic basis of the
/// `p`-th exterior power of the ambient space.
pub fn wedge_of(vectors: &[Vec<Rat>]) -> Vec<Rat> {
    let p = vectors.len();
    let n = vectors.first().map_or(0, Vec::len);
    lex_subsets(n, p)
        .iter()
        .map(|idx| {
            let minor: Vec<Vec<Rat>> = vectors
                .iter()
                .map(|v| idx.iter().map(|&j| v[j].clone()).collect())
                .collect();
            det(&minor)
        })
        .collect()
}

/// A linear subspace of `ℚ^ambient_dim` held in canonical form: the basis is
/// in reduced row echelon form with strictly increasing pivot columns, so two
/// `Subspace` values are equal as structures exactly when they present the
/// same subspace.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<Rat>>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut v = vec![Rat::zero(); ambient_dim];
                v[i] = Rat::one();
                v
            })
            .collect();
        Subspace { ambient_dim, basis }
    }

    /// Span of the given generators.
    pub fn span(ambient_dim: usize, generators: &[Vec<Rat>]) -> Self {
        assert!(generators.iter().all(|g| g.len() == ambient_dim));
        let mut basis = generators.to_vec();
        rref(&mut basis);
        Subspace { ambient_dim, basis }
    }

    pub fn span_int(ambient_dim: usize, generators: &[Vec<Int>]) -> Self {
        let gens: Vec<Vec<Rat>> = generators.iter().map(|g| to_rat_vec(g)).collect();
        Subspace::span(ambient_dim, &gens)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rat>] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Coefficients of `v` in the canonical basis, or `None` if `v` lies
    /// outside the subspace.
    pub fn coords_of(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(v.len(), self.ambient_dim);
        let mut residual = v.to_vec();
        let mut coords = Vec::with_capacity(self.basis.len());
        for row in &self.basis {
            let pivot = row.iter().position(|x| !x.is_zero()).expect("canonical row");
            let c = residual[pivot].clone();
            for (res, b) in residual.iter_mut().zip(row) {
                let sub = &c * b;
                *res = &*res - sub;
            }
            coords.push(c);
        }
        is_zero_vec(&residual).then_some(coords)
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.coords_of(v).is_some()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    /// Sum of two subspaces of the same ambient space.
    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        let gens: Vec<Vec<Rat>> =
            self.basis.iter().chain(&other.basis).cloned().collect();
        Subspace::span(self.ambient_dim, &gens)
    }
}

/// Canonical solution of `mat * x = rhs` (free coordinates set to zero), or
/// `None` when the system is inconsistent.
pub fn solve_canonical(mat: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(mat.len(), rhs.len());
    let ncols = mat.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Rat>> = mat
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![Rat::zero(); ncols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = aug[r][ncols].clone();
    }
    Some(x)
}

/// Intersection of two subspaces of a common ambient space.
pub fn subspace_intersect(a: &Subspace, b: &Subspace) -> Result<Subspace> {
    if a.ambient_dim != b.ambient_dim {
        return Err(Error::AmbientMismatch(a.ambient_dim, b.ambient_dim));
    }
    let n = a.ambient_dim;
    let (da, db) = (a.dim(), b.dim());
    if da == 0 || db == 0 {
        return Ok(Subspace::zero(n));
    }
    // Solve sum x_i a_i = sum y_j b_j: one equation per ambient coordinate.
    let mut system = vec![vec![Rat::zero(); da + db]; n];
    for (i, row) in a.basis.iter().enumerate() {
        for k in 0..n {
            system[k][i] = row[k].clone();
        }
    }
    for (j, row) in b.basis.iter().enumerate() {
        for k in 0..n {
            system[k][da + j] = -row[k].clone();
        }
    }
    let mut gens = Vec::new();
    for sol in kernel_basis(&system, da + db) {
        let mut v = vec![Rat::zero(); n];
        for (i, row) in a.basis.iter().enumerate() {
            for k in 0..n {
                let add = &sol[i] * &row[k];
                v[k] = &v[k] + add;
            }
        }
        gens.push(v);
    }
    Ok(Subspace::span(n, &gens))
}

/// Intersection of several subspaces; the full space when the list is empty.
pub fn intersect_all(ambient_dim: usize, spaces: &[Subspace]) -> Result<Subspace> {
    let mut acc = Subspace::full(ambient_dim);
    for s in spaces {
        acc = subspace_intersect(&acc, s)?;
    }
    Ok(acc)
}

/// The `p`-th exterior power of a subspace `W ⊆ ℚ^n`, presented inside the
/// `binomial(n, p)`-dimensional lexicographic coordinate space. The zeroth
/// power is the span of the empty wedge for every `W`, including `W = 0`.
pub fn wedge_power(w: &Subspace, p: usize) -> Result<Subspace> {
    let n = w.ambient_dim;
    if p > n {
        return Err(Error::WedgeOutOfRange { p, n });
    }
    let ambient = binomial(n, p);
    if p == 0 {
        return Ok(Subspace::full(1));
    }
    let gens: Vec<Vec<Rat>> = (0..w.dim())
        .combinations(p)
        .map(|idx| {
            let rows: Vec<Vec<Rat>> = idx.iter().map(|&i| w.basis[i].clone()).collect();
            wedge_of(&rows)
        })
        .collect();
    Ok(Subspace::span(ambient, &gens))
}

/// Index bookkeeping for wedge coordinates of fixed ambient dimension.
pub struct WedgeIndex {
    pub n: usize,
    pub p: usize,
    pub subsets: Vec<Vec<usize>>,
    index_of: std::collections::HashMap<Vec<usize>, usize>,
}

impl WedgeIndex {
    pub fn new(n: usize, p: usize) -> Self {
        let subsets = lex_subsets(n, p);
        let index_of = subsets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        WedgeIndex { n, p, subsets, index_of }
    }

    pub fn index(&self, subset: &[usize]) -> usize {
        self.index_of[subset]
    }
}

/// Exterior multiplication `ω ↦ m ∧ ω` from degree-`p` to degree-`p+1`
/// lexicographic coordinates over `ℚ^n`.
pub fn m_wedge(m: &[Rat], omega: &[Rat], n: usize, p: usize) -> Vec<Rat> {
    assert_eq!(m.len(), n);
    assert_eq!(omega.len(), binomial(n, p));
    let lower = WedgeIndex::new(n, p);
    let upper = lex_subsets(n, p + 1);
    upper
        .iter()
        .map(|j_set| {
            let mut acc = Rat::zero();
            for (t, &j) in j_set.iter().enumerate() {
                let mut rest = j_set.clone();
                rest.remove(t);
                let term = &m[j] * &omega[lower.index(&rest)];
                if t % 2 == 0 {
                    acc = &acc + term;
                } else {
                    acc = &acc - term;
                }
            }
            acc
        })
        .collect()
}

/// Matrix of `ω ↦ m ∧ ω` on full lexicographic coordinate spaces.
pub fn m_wedge_matrix(m: &[Rat], n: usize, p: usize) -> Vec<Vec<Rat>> {
    let cols = binomial(n, p);
    let rows = binomial(n, p + 1);
    let mut mat = vec![vec![Rat::zero(); cols]; rows];
    for c in 0..cols {
        let mut unit = vec![Rat::zero(); cols];
        unit[c] = Rat::one();
        let img = m_wedge(m, &unit, n, p);
        for r in 0..rows {
            mat[r][c] = img[r].clone();
        }
    }
    mat
}

pub fn mat_apply(mat: &[Vec<Rat>], v: &[Rat]) -> Vec<Rat> {
    mat.iter().map(|row| dot(row, v)).collect()
}

/// A bounded cochain complex of subspaces. `terms[k]` lives in a per-degree
/// ambient coordinate space and `maps[k]` is an ambient-level matrix carrying
/// degree `k` to degree `k + 1`; there is exactly one map per adjacent pair.
#[derive(Clone, Debug)]
pub struct CochainComplex {
    pub terms: Vec<Subspace>,
    pub maps: Vec<Vec<Vec<Rat>>>,
}

impl CochainComplex {
    /// Checks shape, that every map carries its source term into the target
    /// term, and that consecutive maps compose to zero on the terms.
    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::BadComplex("complex has no terms".into()));
        }
        if self.maps.len() + 1 != self.terms.len() {
            return Err(Error::BadComplex(format!(
                "{} terms need {} maps, found {}",
                self.terms.len(),
                self.terms.len() - 1,
                self.maps.len()
            )));
        }
        for (k, map) in self.maps.iter().enumerate() {
            let (src, dst) = (&self.terms[k], &self.terms[k + 1]);
            if map.len() != dst.ambient_dim()
                || map.iter().any(|row| row.len() != src.ambient_dim())
            {
                return Err(Error::BadComplex(format!(
                    "map {k} has the wrong shape for its adjacent terms"
                )));
            }
            for b in src.basis() {
                if !dst.contains(&mat_apply(map, b)) {
                    return Err(Error::MapEscapesTerm(k));
                }
            }
        }
        for k in 0..self.maps.len().saturating_sub(1) {
            for b in self.terms[k].basis() {
                let once = mat_apply(&self.maps[k], b);
                let twice = mat_apply(&self.maps[k + 1], &once);
                if !is_zero_vec(&twice) {
                    return Err(Error::DSquaredNonzero(k));
                }
            }
        }
        Ok(())
    }
}

/// Cohomology dimensions of a validated cochain complex.
pub fn cohomology_dims(complex: &CochainComplex) -> Result<Vec<usize>> {
    complex.validate()?;
    let len = complex.terms.len();
    let mut ranks = vec![0usize; len];
    for (k, map) in complex.maps.iter().enumerate() {
        let images: Vec<Vec<Rat>> =
            complex.terms[k].basis().iter().map(|b| mat_apply(map, b)).collect();
        ranks[k] = rank(&images);
    }
    Ok((0..len)
        .map(|k| {
            let incoming = if k == 0 { 0 } else { ranks[k - 1] };
            complex.terms[k].dim() - ranks[k] - incoming
        })
        .collect())
}
