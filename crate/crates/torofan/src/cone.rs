//! Rational polyhedral cones in canonical form.
//!
//! A [`Cone`] stores primitive, lexicographically sorted extreme rays, a
//! canonical lineality basis, primitive facet normals reduced modulo the dual
//! lineality, and a canonical basis of the linear equations cutting out its
//! span. Both representations are computed with a double-description pass, so
//! structural equality of two `Cone` values coincides with equality of the
//! cones as point sets.

use crate::linalg::{pair, rref, to_rat_vec, Int, Rat, Subspace};
use crate::{Error, Result};
use num::{BigInt, Signed, Zero};
use std::collections::BTreeSet;

pub type IVec = Vec<Int>;

/// Scales an integer vector to its primitive representative (dividing by the
/// gcd of the entries) without changing direction. `None` for the zero vector.
pub fn primitive_int(v: &[Int]) -> Option<IVec> {
    let mut g = Int::zero();
    for x in v {
        g = num::Integer::gcd(&g, x);
    }
    if g.is_zero() {
        return None;
    }
    Some(v.iter().map(|x| x / &g).collect())
}

/// Clears denominators of a rational vector and scales primitive.
pub fn primitive_rat(v: &[Rat]) -> Option<IVec> {
    let mut lcm = Int::from(1);
    for x in v {
        lcm = num::Integer::lcm(&lcm, x.denom());
    }
    let ints: IVec = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    primitive_int(&ints)
}

pub fn neg(v: &[Int]) -> IVec {
    v.iter().map(|x| -x).collect()
}

pub fn dot(a: &[Int], b: &[Int]) -> Int {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `ca * a + cb * b` componentwise.
fn combine(ca: &Int, a: &[Int], cb: &Int, b: &[Int]) -> IVec {
    a.iter().zip(b).map(|(x, y)| ca * x + cb * y).collect()
}

/// Canonical primitive integer basis (row echelon) of the row space.
pub fn canonical_row_basis(rows: &[IVec], ambient: usize) -> Vec<IVec> {
    let mut m: Vec<Vec<Rat>> = rows.iter().map(|r| to_rat_vec(r)).collect();
    m.iter().for_each(|r| assert_eq!(r.len(), ambient));
    rref(&mut m);
    m.iter().map(|r| primitive_rat(r).expect("nonzero rref row")).collect()
}

/// Canonical primitive integer basis of `{x : <e, x> = 0 for e in eqs}`.
pub fn int_kernel(eqs: &[IVec], ambient: usize) -> Vec<IVec> {
    let m: Vec<Vec<Rat>> = eqs.iter().map(|e| to_rat_vec(e)).collect();
    let kernel = crate::linalg::kernel_basis(&m, ambient);
    let rows: Vec<IVec> = kernel
        .iter()
        .map(|v| primitive_rat(v).expect("kernel basis vector is nonzero"))
        .collect();
    canonical_row_basis(&rows, ambient)
}

/// Reduces `v` modulo the span of canonical `lin` rows, zeroing the pivot
/// coordinates, and rescales primitive. Identity when `lin` is empty.
fn reduce_mod(v: &[Int], lin: &[IVec]) -> IVec {
    if lin.is_empty() {
        return primitive_int(v).unwrap_or_else(|| v.to_vec());
    }
    let mut vq = to_rat_vec(v);
    for l in lin {
        let p = l.iter().position(|x| !x.is_zero()).expect("nonzero lineality row");
        if vq[p].is_zero() {
            continue;
        }
        let f = &vq[p] / Rat::from(l[p].clone());
        for (c, lc) in vq.iter_mut().zip(l) {
            let sub = &f * Rat::from(lc.clone());
            *c = &*c - sub;
        }
    }
    primitive_rat(&vq).unwrap_or_else(|| vec![Int::zero(); v.len()])
}

struct DdRay {
    v: IVec,
    active: BTreeSet<usize>,
}

/// Double-description pass: extreme rays and lineality basis of
/// `{x : <h, x> >= 0 for h in ineqs, <e, x> = 0 for e in eqs}`.
/// Rays come back primitive, reduced modulo the lineality, and sorted.
pub fn vrep_from_hrep(ambient: usize, ineqs: &[IVec], eqs: &[IVec]) -> (Vec<IVec>, Vec<IVec>) {
    let mut lin: Vec<IVec> = int_kernel(eqs, ambient);
    let mut rays: Vec<DdRay> = Vec::new();
    for (i, h) in ineqs.iter().enumerate() {
        assert_eq!(h.len(), ambient);
        if let Some(pos) = lin.iter().position(|l| !dot(h, l).is_zero()) {
            // Split the lineality: one generator leaves the kernel of h and
            // becomes a ray; everything else is projected into h's hyperplane.
            let mut l0 = lin.remove(pos);
            if dot(h, &l0).is_negative() {
                l0 = neg(&l0);
            }
            let hl0 = dot(h, &l0);
            for l in lin.iter_mut() {
                *l = primitive_int(&combine(&hl0, l, &-dot(h, l), &l0)).expect("independent");
            }
            for r in rays.iter_mut() {
                let hr = dot(h, &r.v);
                if !hr.is_zero() {
                    r.v = primitive_int(&combine(&hl0, &r.v, &-hr, &l0)).expect("nonzero");
                }
                r.active.insert(i);
            }
            rays.push(DdRay { v: primitive_int(&l0).unwrap(), active: (0..i).collect() });
        } else {
            let signs: Vec<Int> = rays.iter().map(|r| dot(h, &r.v)).collect();
            if signs.iter().all(|s| !s.is_negative()) {
                for (r, s) in rays.iter_mut().zip(&signs) {
                    if s.is_zero() {
                        r.active.insert(i);
                    }
                }
                continue;
            }
            let mut next: Vec<DdRay> = Vec::new();
            for (r, s) in rays.iter().zip(&signs) {
                if !s.is_negative() {
                    let mut active = r.active.clone();
                    if s.is_zero() {
                        active.insert(i);
                    }
                    next.push(DdRay { v: r.v.clone(), active });
                }
            }
            for (ip, sp) in signs.iter().enumerate() {
                if !sp.is_positive() {
                    continue;
                }
                for (in_, sn) in signs.iter().enumerate() {
                    if !sn.is_negative() {
                        continue;
                    }
                    let common: BTreeSet<usize> = rays[ip]
                        .active
                        .intersection(&rays[in_].active)
                        .copied()
                        .collect();
                    let adjacent = rays.iter().enumerate().all(|(k, other)| {
                        k == ip || k == in_ || !other.active.is_superset(&common)
                    });
                    if !adjacent {
                        continue;
                    }
                    let v = primitive_int(&combine(sp, &rays[in_].v, &-sn.clone(), &rays[ip].v))
                        .expect("combination of nonparallel rays");
                    let mut active = common;
                    active.insert(i);
                    next.push(DdRay { v, active });
                }
            }
            rays = next;
        }
    }
    let lin = canonical_row_basis(&lin, ambient);
    let mut out: Vec<IVec> = rays
        .iter()
        .map(|r| reduce_mod(&r.v, &lin))
        .filter(|v| v.iter().any(|x| !x.is_zero()))
        .collect();
    out.sort();
    out.dedup();
    (out, lin)
}

/// A rational polyhedral cone with canonical dual descriptions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cone {
    ambient_rank: usize,
    rays: Vec<IVec>,
    lineality: Vec<IVec>,
    facets: Vec<IVec>,
    span_eqs: Vec<IVec>,
}

impl Cone {
    /// The conic hull of the given integer generators.
    pub fn from_generators(ambient_rank: usize, generators: &[IVec]) -> Cone {
        let gens: Vec<IVec> = generators
            .iter()
            .filter(|g| g.iter().any(|x| !x.is_zero()))
            .cloned()
            .collect();
        let (facets, span_eqs) = vrep_from_hrep(ambient_rank, &gens, &[]);
        let (rays, lineality) = vrep_from_hrep(ambient_rank, &facets, &span_eqs);
        Cone { ambient_rank, rays, lineality, facets, span_eqs }
    }

    /// The solution cone of `<h, x> >= 0`, `<e, x> = 0`.
    pub fn from_hrep(ambient_rank: usize, ineqs: &[IVec], eqs: &[IVec]) -> Cone {
        let (rays, lineality) = vrep_from_hrep(ambient_rank, ineqs, eqs);
        let (facets, span_eqs) = vrep_from_hrep(ambient_rank, &rays, &lineality);
        Cone { ambient_rank, rays, lineality, facets, span_eqs }
    }

    pub fn origin(ambient_rank: usize) -> Cone {
        Cone::from_generators(ambient_rank, &[])
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rays(&self) -> &[IVec] {
        &self.rays
    }

    pub fn lineality(&self) -> &[IVec] {
        &self.lineality
    }

    pub fn facets(&self) -> &[IVec] {
        &self.facets
    }

    pub fn span_eqs(&self) -> &[IVec] {
        &self.span_eqs
    }

    pub fn dim(&self) -> usize {
        self.ambient_rank - self.span_eqs.len()
    }

    pub fn lineality_dim(&self) -> usize {
        self.lineality.len()
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    /// A cone is simplicial when its ray count equals its dimension over the
    /// lineality space.
    pub fn is_simplicial(&self) -> bool {
        self.rays.len() == self.dim() - self.lineality_dim()
    }

    pub fn contains_int(&self, x: &[Int]) -> bool {
        assert_eq!(x.len(), self.ambient_rank);
        self.span_eqs.iter().all(|e| dot(e, x).is_zero())
            && self.facets.iter().all(|f| !dot(f, x).is_negative())
    }

    pub fn contains_rat(&self, x: &[Rat]) -> bool {
        assert_eq!(x.len(), self.ambient_rank);
        self.span_eqs.iter().all(|e| pair(x, e).is_zero())
            && self.facets.iter().all(|f| !pair(x, f).is_negative())
    }

    pub fn contains_cone(&self, other: &Cone) -> bool {
        other.rays.iter().all(|r| self.contains_int(r))
            && other
                .lineality
                .iter()
                .all(|l| self.contains_int(l) && self.contains_int(&neg(l)))
    }

    /// All generators, rays and (both signs of) lineality, as integer vectors.
    pub fn generators(&self) -> Vec<IVec> {
        let mut g = self.rays.clone();
        for l in &self.lineality {
            g.push(l.clone());
            g.push(neg(l));
        }
        g
    }

    /// The linear span as a subspace of the ambient space.
    pub fn span_subspace(&self) -> Subspace {
        Subspace::span_int(self.ambient_rank, &self.generators())
    }

    /// Face lattice, each face listed with the subset of `self.rays` it
    /// contains, ordered by (dimension data, rayset).
    pub fn faces(&self) -> FaceLattice {
        let nf = self.facets.len();
        let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
        for mask in 0u64..(1u64 << nf) {
            let tight: Vec<usize> = (0..nf).filter(|&i| mask >> i & 1 == 1).collect();
            let rayset: BTreeSet<usize> = (0..self.rays.len())
                .filter(|&r| tight.iter().all(|&f| dot(&self.facets[f], &self.rays[r]).is_zero()))
                .collect();
            seen.insert(rayset);
        }
        let mut raysets: Vec<BTreeSet<usize>> = seen.into_iter().collect();
        raysets.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
        let faces = raysets
            .into_iter()
            .map(|ray_indices| {
                let mut gens: Vec<IVec> =
                    ray_indices.iter().map(|&i| self.rays[i].clone()).collect();
                for l in &self.lineality {
                    gens.push(l.clone());
                    gens.push(neg(l));
                }
                Face { cone: Cone::from_generators(self.ambient_rank, &gens), ray_indices }
            })
            .collect();
        FaceLattice { faces }
    }

    /// The smallest face of the cone containing `x`; errors when `x` lies
    /// outside the cone.
    pub fn smallest_face_containing(&self, x: &[Rat]) -> Result<Cone> {
        if !self.contains_rat(x) {
            return Err(Error::NotInCone);
        }
        let tight: Vec<&IVec> = self.facets.iter().filter(|f| pair(x, f).is_zero()).collect();
        let mut gens: Vec<IVec> = self
            .rays
            .iter()
            .filter(|r| tight.iter().all(|f| dot(f, r).is_zero()))
            .cloned()
            .collect();
        for l in &self.lineality {
            gens.push(l.clone());
            gens.push(neg(l));
        }
        Ok(Cone::from_generators(self.ambient_rank, &gens))
    }
}

/// Intersection of two cones in the same ambient space.
pub fn intersect_cones(a: &Cone, b: &Cone) -> Result<Cone> {
    if a.ambient_rank != b.ambient_rank {
        return Err(Error::AmbientMismatch(a.ambient_rank, b.ambient_rank));
    }
    let ineqs: Vec<IVec> = a.facets.iter().chain(&b.facets).cloned().collect();
    let eqs: Vec<IVec> = a.span_eqs.iter().chain(&b.span_eqs).cloned().collect();
    Ok(Cone::from_hrep(a.ambient_rank, &ineqs, &eqs))
}

/// The dual cone `{y : <y, x> >= 0 for all x in c}`, recomputed canonically
/// from scratch.
pub fn dual_cone(c: &Cone) -> Cone {
    Cone::from_hrep(c.ambient_rank, &c.rays, &c.lineality)
}

/// Whether `face` is a face of `c`, i.e. the locus of `c` where some subset
/// of its facet normals vanishes.
pub fn is_face_of(face: &Cone, c: &Cone) -> bool {
    if !c.contains_cone(face) {
        return false;
    }
    let gens = face.generators();
    let tight: Vec<&IVec> = c
        .facets
        .iter()
        .filter(|f| gens.iter().all(|g| dot(f, g).is_zero()))
        .collect();
    let mut cut: Vec<IVec> = c
        .rays
        .iter()
        .filter(|r| tight.iter().all(|f| dot(f, r).is_zero()))
        .cloned()
        .collect();
    for l in &c.lineality {
        cut.push(l.clone());
        cut.push(neg(l));
    }
    Cone::from_generators(c.ambient_rank, &cut) == *face
}

#[derive(Clone, Debug)]
pub struct Face {
    pub cone: Cone,
    /// Indices into the parent cone's canonical ray list.
    pub ray_indices: BTreeSet<usize>,
}

#[derive(Clone, Debug)]
pub struct FaceLattice {
    pub faces: Vec<Face>,
}

impl FaceLattice {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Incidence by rayset inclusion (valid because faces of a common cone
    /// are determined by the parent rays they contain).
    pub fn leq(&self, sub: usize, sup: usize) -> bool {
        self.faces[sub].ray_indices.is_subset(&self.faces[sup].ray_indices)
    }
}

/// All integer points of the box `[-bound, bound]^n` lying in the cone, in
/// lexicographic order.
pub fn lattice_points_window(c: &Cone, bound: i64) -> Vec<IVec> {
    box_window(c.ambient_rank, bound)
        .into_iter()
        .filter(|p| c.contains_int(p))
        .collect()
}

/// All integer points of `[-bound, bound]^n` in lexicographic order.
pub fn box_window(n: usize, bound: i64) -> Vec<IVec> {
    let mut out = Vec::new();
    let width = 2 * bound + 1;
    let total = (width as u128).pow(n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut p = Vec::with_capacity(n);
        for k in 0..n {
            let digit = (rem / (width as u128).pow((n - 1 - k) as u32)) as i64;
            rem %= (width as u128).pow((n - 1 - k) as u32);
            p.push(Int::from(digit - bound));
        }
        out.push(p);
    }
    out
}

pub fn ivec(xs: &[i64]) -> IVec {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}
