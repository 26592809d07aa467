//! Fans of strongly convex rational cones, boundary decorations, torus
//! divisors, subdivision maps, orders, and the JSON file format.
//!
//! A fan stores its primitive rays and its maximal cones as sets of ray
//! indices; all lower-dimensional cones are derived by face closure. Two fans
//! compare equal when they have the same rays and cones regardless of listing
//! order.

use crate::cone::{dot, intersect_cones, is_face_of, primitive_int, Cone, IVec};
use crate::linalg::{pair, solve_canonical, to_rat_vec, Int, Rat};
use crate::lp::{minimize, Lp, LpOutcome, Rel};
use crate::{Error, Result};
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

pub type RaySet = BTreeSet<usize>;

/// A fan given by primitive rays and maximal cones; faces are derived.
#[derive(Clone, Debug)]
pub struct Fan {
    ambient_rank: usize,
    rays: Vec<IVec>,
    maximal_cones: Vec<RaySet>,
    cones: BTreeSet<RaySet>,
    cone_objs: BTreeMap<RaySet, Cone>,
}

/// All violations of the fan invariants, in a fixed order; empty means valid.
pub fn validate_fan_parts(
    ambient_rank: usize,
    rays: &[IVec],
    maximal_cones: &[RaySet],
) -> Vec<String> {
    let mut violations = Vec::new();
    for (i, r) in rays.iter().enumerate() {
        if r.len() != ambient_rank {
            violations.push(format!("ray {i} does not have {ambient_rank} coordinates"));
        } else {
            match primitive_int(r) {
                None => violations.push(format!("ray {i} is zero")),
                Some(p) if p != *r => violations.push(format!("ray {i} is not primitive")),
                _ => {}
            }
        }
    }
    for i in 0..rays.len() {
        for j in i + 1..rays.len() {
            if rays[i] == rays[j] {
                violations.push(format!("rays {i} and {j} coincide"));
            }
        }
    }
    if maximal_cones.is_empty() {
        violations.push("a fan must have at least one maximal cone".to_string());
    }
    for (k, mc) in maximal_cones.iter().enumerate() {
        for &idx in mc {
            if idx >= rays.len() {
                violations.push(format!("maximal cone {k} references missing ray {idx}"));
            }
        }
    }
    if !violations.is_empty() {
        return violations;
    }
    let used: RaySet = maximal_cones.iter().flatten().copied().collect();
    for i in 0..rays.len() {
        if !used.contains(&i) {
            violations.push(format!("ray {i} does not appear in any maximal cone"));
        }
    }
    let objs: Vec<Cone> = maximal_cones
        .iter()
        .map(|mc| {
            let gens: Vec<IVec> = mc.iter().map(|&i| rays[i].clone()).collect();
            Cone::from_generators(ambient_rank, &gens)
        })
        .collect();
    for (k, (mc, cone)) in maximal_cones.iter().zip(&objs).enumerate() {
        if !cone.is_pointed() {
            violations.push(format!("maximal cone {k} is not strongly convex"));
            continue;
        }
        let listed: BTreeSet<&IVec> = mc.iter().map(|&i| &rays[i]).collect();
        let extreme: BTreeSet<&IVec> = cone.rays().iter().collect();
        if listed != extreme {
            violations.push(format!(
                "maximal cone {k} does not list exactly its extreme rays"
            ));
        }
    }
    if !violations.is_empty() {
        return violations;
    }
    for k in 0..objs.len() {
        for l in 0..objs.len() {
            if k != l && objs[l].contains_cone(&objs[k]) {
                violations.push(format!(
                    "maximal cone {k} is contained in maximal cone {l}"
                ));
            }
        }
    }
    for k in 0..objs.len() {
        for l in k + 1..objs.len() {
            let meet = intersect_cones(&objs[k], &objs[l]).expect("same ambient");
            if !is_face_of(&meet, &objs[k]) || !is_face_of(&meet, &objs[l]) {
                violations.push(format!(
                    "maximal cones {k} and {l} do not intersect in a common face"
                ));
            }
        }
    }
    violations
}

impl Fan {
    /// Builds a fan after checking every invariant; the first violation is
    /// returned as an error.
    pub fn new(ambient_rank: usize, rays: Vec<IVec>, maximal_cones: Vec<RaySet>) -> Result<Fan> {
        let violations = validate_fan_parts(ambient_rank, &rays, &maximal_cones);
        if let Some(first) = violations.into_iter().next() {
            return Err(Error::InvalidFan(first));
        }
        let ray_index: BTreeMap<&IVec, usize> =
            rays.iter().enumerate().map(|(i, r)| (r, i)).collect();
        let mut cones = BTreeSet::new();
        let mut cone_objs = BTreeMap::new();
        for mc in &maximal_cones {
            let gens: Vec<IVec> = mc.iter().map(|&i| rays[i].clone()).collect();
            let cone = Cone::from_generators(ambient_rank, &gens);
            for face in cone.faces().faces {
                let rayset: RaySet = face
                    .cone
                    .rays()
                    .iter()
                    .map(|r| *ray_index.get(r).expect("face ray is a fan ray"))
                    .collect();
                cones.insert(rayset.clone());
                cone_objs.entry(rayset).or_insert(face.cone);
            }
        }
        Ok(Fan { ambient_rank, rays, maximal_cones, cones, cone_objs })
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rays(&self) -> &[IVec] {
        &self.rays
    }

    pub fn ray_index(&self, v: &IVec) -> Option<usize> {
        self.rays.iter().position(|r| r == v)
    }

    pub fn maximal_cones(&self) -> &[RaySet] {
        &self.maximal_cones
    }

    /// Every cone of the fan as a set of ray indices (the face closure of the
    /// maximal cones, including the origin).
    pub fn cones(&self) -> &BTreeSet<RaySet> {
        &self.cones
    }

    pub fn contains_cone(&self, rayset: &RaySet) -> bool {
        self.cones.contains(rayset)
    }

    /// The canonical cone object of a rayset of this fan.
    pub fn cone(&self, rayset: &RaySet) -> Result<&Cone> {
        self.cone_objs
            .get(rayset)
            .ok_or_else(|| Error::Invalid(format!("cone {rayset:?} is not in the fan")))
    }

    pub fn dim_of(&self, rayset: &RaySet) -> Result<usize> {
        Ok(self.cone(rayset)?.dim())
    }

    /// All cones having a ray of `s` among their faces.
    pub fn star_closure(&self, s: &RaySet) -> BTreeSet<RaySet> {
        self.cones
            .iter()
            .filter(|rs| rs.intersection(s).next().is_some())
            .cloned()
            .collect()
    }

    /// Complete fans: full-dimensional maximal cones, every wall shared by
    /// exactly two of them.
    pub fn is_complete(&self) -> bool {
        if self.maximal_cones.iter().any(|mc| {
            self.cone_objs[mc].dim() != self.ambient_rank
        }) {
            return false;
        }
        let walls: BTreeSet<&RaySet> = self
            .cones
            .iter()
            .filter(|rs| self.cone_objs[*rs].dim() + 1 == self.ambient_rank)
            .collect();
        walls.iter().all(|w| {
            let count = self
                .maximal_cones
                .iter()
                .filter(|mc| w.is_subset(mc))
                .count();
            count == 2
        })
    }

    /// The same fan with rays sorted lexicographically and maximal cones
    /// listed in sorted order.
    pub fn canonicalized(&self) -> Fan {
        let mut order: Vec<usize> = (0..self.rays.len()).collect();
        order.sort_by(|&a, &b| self.rays[a].cmp(&self.rays[b]));
        let mut new_index = vec![0usize; self.rays.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let rays: Vec<IVec> = order.iter().map(|&o| self.rays[o].clone()).collect();
        let mut maximal: Vec<RaySet> = self
            .maximal_cones
            .iter()
            .map(|mc| mc.iter().map(|&i| new_index[i]).collect())
            .collect();
        maximal.sort();
        maximal.dedup();
        Fan::new(self.ambient_rank, rays, maximal).expect("canonicalizing a valid fan")
    }
}

impl PartialEq for Fan {
    fn eq(&self, other: &Self) -> bool {
        if self.ambient_rank != other.ambient_rank {
            return false;
        }
        let a = self.canonicalized();
        let b = other.canonicalized();
        a.rays == b.rays && a.maximal_cones == b.maximal_cones
    }
}

impl Eq for Fan {}

/// A fan with disjoint sets of !-rays and *-rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanTriple {
    pub fan: Fan,
    pub b_rays: RaySet,
    pub c_rays: RaySet,
}

impl FanTriple {
    pub fn new(fan: Fan, b_rays: RaySet, c_rays: RaySet) -> Result<FanTriple> {
        check_decoration(&fan, &b_rays, "B")?;
        check_decoration(&fan, &c_rays, "C")?;
        if b_rays.intersection(&c_rays).next().is_some() {
            return Err(Error::Invalid("B and C rays must be disjoint".into()));
        }
        Ok(FanTriple { fan, b_rays, c_rays })
    }

    pub fn plain(fan: Fan) -> FanTriple {
        FanTriple { fan, b_rays: RaySet::new(), c_rays: RaySet::new() }
    }

    /// Undecorated rays.
    pub fn a_rays(&self) -> RaySet {
        (0..self.fan.rays().len())
            .filter(|i| !self.b_rays.contains(i) && !self.c_rays.contains(i))
            .collect()
    }

    pub fn to_quadruple(&self) -> FanQuadruple {
        FanQuadruple {
            fan: self.fan.clone(),
            b_rays: self.b_rays.clone(),
            c_rays: self.c_rays.clone(),
            h_rays: RaySet::new(),
            h: BTreeMap::new(),
        }
    }

    /// The induced triple on the face-fan of a cone of the fan, with rays
    /// reindexed in increasing original order.
    pub fn restrict(&self, rayset: &RaySet) -> Result<FanTriple> {
        let q = self.to_quadruple().restrict(rayset)?;
        Ok(FanTriple { fan: q.fan, b_rays: q.b_rays, c_rays: q.c_rays })
    }
}

fn check_decoration(fan: &Fan, set: &RaySet, name: &str) -> Result<()> {
    for &i in set {
        if i >= fan.rays().len() {
            return Err(Error::Invalid(format!("{name} references missing ray {i}")));
        }
    }
    Ok(())
}

/// A fan triple refined by a set of interpolating rays with coefficients
/// strictly between 0 and 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanQuadruple {
    pub fan: Fan,
    pub b_rays: RaySet,
    pub c_rays: RaySet,
    pub h_rays: RaySet,
    pub h: BTreeMap<usize, Rat>,
}

impl FanQuadruple {
    pub fn new(
        fan: Fan,
        b_rays: RaySet,
        c_rays: RaySet,
        h_rays: RaySet,
        h: BTreeMap<usize, Rat>,
    ) -> Result<FanQuadruple> {
        check_decoration(&fan, &b_rays, "B")?;
        check_decoration(&fan, &c_rays, "C")?;
        check_decoration(&fan, &h_rays, "H")?;
        for (x, y, names) in [
            (&b_rays, &c_rays, "B and C"),
            (&b_rays, &h_rays, "B and H"),
            (&c_rays, &h_rays, "C and H"),
        ] {
            if x.intersection(y).next().is_some() {
                return Err(Error::Invalid(format!("{names} rays must be disjoint")));
            }
        }
        let keys: RaySet = h.keys().copied().collect();
        if keys != h_rays {
            return Err(Error::Invalid("h must assign exactly the H rays".into()));
        }
        for (i, v) in &h {
            if !(v > &Rat::zero() && v < &Rat::one()) {
                return Err(Error::Invalid(format!(
                    "h coefficient of ray {i} must lie strictly between 0 and 1"
                )));
            }
        }
        Ok(FanQuadruple { fan, b_rays, c_rays, h_rays, h })
    }

    pub fn a_rays(&self) -> RaySet {
        (0..self.fan.rays().len())
            .filter(|i| {
                !self.b_rays.contains(i) && !self.c_rays.contains(i) && !self.h_rays.contains(i)
            })
            .collect()
    }

    pub fn triple(&self) -> Result<FanTriple> {
        if !self.h_rays.is_empty() {
            return Err(Error::Invalid("quadruple carries H rays; expected a triple".into()));
        }
        Ok(FanTriple {
            fan: self.fan.clone(),
            b_rays: self.b_rays.clone(),
            c_rays: self.c_rays.clone(),
        })
    }

    /// The induced quadruple on the face-fan of a cone of the fan.
    pub fn restrict(&self, rayset: &RaySet) -> Result<FanQuadruple> {
        if !self.fan.contains_cone(rayset) {
            return Err(Error::Invalid(format!("cone {rayset:?} is not in the fan")));
        }
        let old: Vec<usize> = rayset.iter().copied().collect();
        let rays: Vec<IVec> = old.iter().map(|&i| self.fan.rays()[i].clone()).collect();
        let full: RaySet = (0..old.len()).collect();
        let fan = Fan::new(self.fan.ambient_rank(), rays, vec![full])
            .expect("face of a valid fan cone is a valid affine fan");
        let renumber = |set: &RaySet| -> RaySet {
            old.iter()
                .enumerate()
                .filter(|(_, o)| set.contains(o))
                .map(|(n, _)| n)
                .collect()
        };
        let h = old
            .iter()
            .enumerate()
            .filter_map(|(n, o)| self.h.get(o).map(|v| (n, v.clone())))
            .collect();
        Ok(FanQuadruple {
            fan,
            b_rays: renumber(&self.b_rays),
            c_rays: renumber(&self.c_rays),
            h_rays: renumber(&self.h_rays),
            h,
        })
    }

    /// Whether the underlying fan is the face fan of a single cone.
    pub fn is_affine(&self) -> bool {
        self.fan.maximal_cones().len() == 1
    }
}

/// A torus-invariant divisor: one rational coefficient per fan ray.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusDivisor {
    pub coeffs: Vec<Rat>,
}

impl TorusDivisor {
    pub fn zero(nrays: usize) -> TorusDivisor {
        TorusDivisor { coeffs: vec![Rat::zero(); nrays] }
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }
}

/// The principal divisor of the character with exponent `m`.
pub fn character_divisor(fan: &Fan, m: &[Rat]) -> TorusDivisor {
    assert_eq!(m.len(), fan.ambient_rank());
    TorusDivisor { coeffs: fan.rays().iter().map(|r| pair(m, r)).collect() }
}

/// An exact certificate that `L = b.B - c.C + div(m)` with coefficients in
/// the unit interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub b: BTreeMap<usize, Rat>,
    pub c: BTreeMap<usize, Rat>,
    pub m: Vec<Rat>,
}

/// Searches for coefficients `b in [0,1]^B`, `c in [0,1]^C` and a rational
/// character exponent presenting `l` as `b.B - c.C + div(m)`. Among feasible
/// solutions the result is the lexicographic minimum over the c entries, then
/// the b entries (each in increasing ray order), with `m` canonicalized by
/// solving the remaining linear system with free coordinates set to zero.
pub fn compatibility_witness(l: &TorusDivisor, t: &FanTriple) -> Option<Witness> {
    let fan = &t.fan;
    assert_eq!(l.coeffs.len(), fan.rays().len());
    let n = fan.ambient_rank();
    let cs: Vec<usize> = t.c_rays.iter().copied().collect();
    let bs: Vec<usize> = t.b_rays.iter().copied().collect();
    let nv = cs.len() + bs.len() + n;
    let mut lp = Lp::new(nv);
    for (r, ray) in fan.rays().iter().enumerate() {
        let mut coeffs = vec![Rat::zero(); nv];
        if let Some(p) = cs.iter().position(|&j| j == r) {
            coeffs[p] = -Rat::one();
        }
        if let Some(p) = bs.iter().position(|&j| j == r) {
            coeffs[cs.len() + p] = Rat::one();
        }
        for k in 0..n {
            coeffs[cs.len() + bs.len() + k] = Rat::from(ray[k].clone());
        }
        lp.push(coeffs, Rel::Eq, l.coeffs[r].clone());
    }
    for v in 0..cs.len() + bs.len() {
        let mut lo = vec![Rat::zero(); nv];
        lo[v] = Rat::one();
        lp.push(lo.clone(), Rel::Ge, Rat::zero());
        lp.push(lo, Rel::Le, Rat::one());
    }
    for v in 0..cs.len() + bs.len() {
        let mut obj = vec![Rat::zero(); nv];
        obj[v] = Rat::one();
        match minimize(&lp, &obj) {
            LpOutcome::Infeasible => return None,
            LpOutcome::Unbounded => unreachable!("bounded variable"),
            LpOutcome::Optimal { x, .. } => {
                let mut fix = vec![Rat::zero(); nv];
                fix[v] = Rat::one();
                lp.push(fix, Rel::Eq, x[v].clone());
            }
        }
    }
    let x = crate::lp::feasible_point(&lp)?;
    let c: BTreeMap<usize, Rat> =
        cs.iter().enumerate().map(|(p, &j)| (j, x[p].clone())).collect();
    let b: BTreeMap<usize, Rat> =
        bs.iter().enumerate().map(|(p, &j)| (j, x[cs.len() + p].clone())).collect();
    let m = solve_for_character(fan, l, &b, &c).expect("LP solution admits a character");
    Some(Witness { b, c, m })
}

fn solve_for_character(
    fan: &Fan,
    l: &TorusDivisor,
    b: &BTreeMap<usize, Rat>,
    c: &BTreeMap<usize, Rat>,
) -> Option<Vec<Rat>> {
    let rows: Vec<Vec<Rat>> = fan.rays().iter().map(|r| to_rat_vec(r)).collect();
    let rhs: Vec<Rat> = (0..fan.rays().len())
        .map(|r| {
            let mut v = l.coeffs[r].clone();
            if let Some(x) = b.get(&r) {
                v = &v - x;
            }
            if let Some(x) = c.get(&r) {
                v = &v + x;
            }
            v
        })
        .collect();
    solve_canonical(&rows, &rhs)
}

/// Turns a compatibility witness into the decorated quadruple it induces:
/// extreme coefficients move rays to the !- or *-side and fractional ones
/// become H rays with the interpolation coefficient dictated by the witness.
pub fn induced_quadruple(
    t: &FanTriple,
    l: &TorusDivisor,
    b: &BTreeMap<usize, Rat>,
    c: &BTreeMap<usize, Rat>,
) -> Result<FanQuadruple> {
    let keys_b: RaySet = b.keys().copied().collect();
    let keys_c: RaySet = c.keys().copied().collect();
    if keys_b != t.b_rays || keys_c != t.c_rays {
        return Err(Error::Invalid("witness must assign exactly the B and C rays".into()));
    }
    let in_unit = |v: &Rat| !v.is_negative() && v <= &Rat::one();
    if b.values().chain(c.values()).any(|v| !in_unit(v)) {
        return Err(Error::Invalid("witness coefficients must lie in [0,1]".into()));
    }
    if solve_for_character(&t.fan, l, b, c).is_none() {
        return Err(Error::Invalid(
            "witness does not present the divisor as bB - cC plus a character divisor".into(),
        ));
    }
    let mut f_side = RaySet::new();
    let mut g_side = RaySet::new();
    let mut h_rays = RaySet::new();
    let mut h = BTreeMap::new();
    for (&i, v) in b {
        if v.is_zero() {
            f_side.insert(i);
        } else if v.is_one() {
            g_side.insert(i);
        } else {
            h_rays.insert(i);
            h.insert(i, v.clone());
        }
    }
    for (&j, v) in c {
        if v.is_one() {
            f_side.insert(j);
        } else if v.is_zero() {
            g_side.insert(j);
        } else {
            h_rays.insert(j);
            h.insert(j, Rat::one() - v);
        }
    }
    FanQuadruple::new(t.fan.clone(), f_side, g_side, h_rays, h)
}

/// The refinement relation between two fans with equal support, including the
/// assignment of each source cone to the smallest target cone containing it.
#[derive(Clone, Debug)]
pub struct SubdivisionMap {
    pub source: Fan,
    pub target: Fan,
    pub assignment: BTreeMap<RaySet, RaySet>,
    pub is_efficient: bool,
}

/// Validates that `refined` subdivides `base` and computes the cone
/// assignment. Every maximal cone of `refined` must sit inside a maximal cone
/// of `base`, and inside each base cone the covering cones must have full
/// dimension and match up along interior walls.
pub fn subdivision_map(refined: &Fan, base: &Fan) -> Result<SubdivisionMap> {
    if refined.ambient_rank() != base.ambient_rank() {
        return Err(Error::AmbientMismatch(refined.ambient_rank(), base.ambient_rank()));
    }
    let base_max: Vec<&Cone> = base
        .maximal_cones()
        .iter()
        .map(|mc| base.cone(mc).expect("maximal cone"))
        .collect();
    let fine_max: Vec<&Cone> = refined
        .maximal_cones()
        .iter()
        .map(|mc| refined.cone(mc).expect("maximal cone"))
        .collect();
    for (k, fc) in fine_max.iter().enumerate() {
        if !base_max.iter().any(|bc| bc.contains_cone(fc)) {
            return Err(Error::InvalidFan(format!(
                "support mismatch: source cone {k} is not contained in any target cone"
            )));
        }
    }
    for (k, bc) in base_max.iter().enumerate() {
        let inside: Vec<usize> = (0..fine_max.len())
            .filter(|&i| bc.contains_cone(fine_max[i]))
            .collect();
        if inside.is_empty() {
            return Err(Error::InvalidFan(format!(
                "support mismatch: target cone {k} is not covered"
            )));
        }
        for &i in &inside {
            if fine_max[i].dim() != bc.dim() {
                return Err(Error::InvalidFan(format!(
                    "support mismatch: source cone {i} has lower dimension than target cone {k}"
                )));
            }
        }
        // Interior walls pair up two covering cones; boundary walls lie in a
        // facet hyperplane of the base cone.
        for &i in &inside {
            let rayset = &refined.maximal_cones()[i];
            let walls: Vec<&RaySet> = refined
                .cones()
                .iter()
                .filter(|rs| {
                    rs.is_subset(rayset)
                        && refined.cone(rs).map(|c| c.dim() + 1 == fine_max[i].dim()).unwrap_or(false)
                })
                .collect();
            for wall in walls {
                let wall_cone = refined.cone(wall).expect("fan cone");
                let on_boundary = bc.facets().iter().any(|f| {
                    wall_cone.rays().iter().all(|r| dot(f, r).is_zero())
                });
                if on_boundary {
                    continue;
                }
                let sharers = inside
                    .iter()
                    .filter(|&&j| j != i && wall.is_subset(&refined.maximal_cones()[j]))
                    .count();
                if sharers != 1 {
                    return Err(Error::InvalidFan(format!(
                        "support mismatch: an interior wall of source cone {i} inside target \
                         cone {k} is shared by {sharers} other covering cones"
                    )));
                }
            }
        }
    }
    let mut assignment = BTreeMap::new();
    for rs in refined.cones() {
        let c = refined.cone(rs).expect("fan cone");
        assignment.insert(rs.clone(), smallest_containing_cone(base, c)?);
    }
    let source_rays: BTreeSet<&IVec> = refined.rays().iter().collect();
    let target_rays: BTreeSet<&IVec> = base.rays().iter().collect();
    Ok(SubdivisionMap {
        source: refined.clone(),
        target: base.clone(),
        assignment,
        is_efficient: source_rays == target_rays,
    })
}

/// The smallest cone of `fan` containing `c`, as a rayset.
pub fn smallest_containing_cone(fan: &Fan, c: &Cone) -> Result<RaySet> {
    let mut best: Option<&RaySet> = None;
    for rs in fan.cones() {
        if fan.cone(rs)?.contains_cone(c) {
            let better = match best {
                None => true,
                Some(cur) => fan.cone(rs)?.dim() < fan.cone(cur)?.dim(),
            };
            if better {
                best = Some(rs);
            }
        }
    }
    best.cloned().ok_or_else(|| {
        Error::InvalidFan("cone is not contained in the fan's support".into())
    })
}

/// The largest face of the source cone `tau_i` whose support lies inside the
/// target cone `zeta`.
pub fn xi_face(refined: &Fan, tau_i: &RaySet, zeta: &Cone) -> RaySet {
    let inside: RaySet = tau_i
        .iter()
        .copied()
        .filter(|&r| zeta.contains_int(&refined.rays()[r]))
        .collect();
    assert!(
        refined.contains_cone(&inside),
        "rays of a subdivision cone inside a base cone always span a face"
    );
    inside
}

/// A strict total order on a set of ray indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Order(Vec<usize>);

impl Order {
    pub fn new(seq: Vec<usize>) -> Result<Order> {
        let set: RaySet = seq.iter().copied().collect();
        if set.len() != seq.len() {
            return Err(Error::Invalid("order lists a ray twice".into()));
        }
        Ok(Order(seq))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn carrier(&self) -> RaySet {
        self.0.iter().copied().collect()
    }

    /// The sequence traversed from the greatest element down.
    pub fn reversed(&self) -> Vec<usize> {
        self.0.iter().rev().copied().collect()
    }

    /// The induced order on the given subset of the carrier.
    pub fn restricted_to(&self, set: &RaySet) -> Order {
        Order(self.0.iter().copied().filter(|i| set.contains(i)).collect())
    }
}

/// JSON file format for fans with optional decorations, named divisors, and
/// named orders. Rationals are written as `p/q` strings, ray indices are
/// 0-based, and only maximal cones are listed.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FanFile {
    pub lattice_rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub maximal_cones: Vec<Vec<usize>>,
    #[serde(rename = "B", default, skip_serializing_if = "Vec::is_empty")]
    pub b: Vec<usize>,
    #[serde(rename = "C", default, skip_serializing_if = "Vec::is_empty")]
    pub c: Vec<usize>,
    #[serde(rename = "H", default, skip_serializing_if = "Vec::is_empty")]
    pub h_rays: Vec<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub h: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub divisors: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub orders: BTreeMap<String, Vec<usize>>,
}

fn parse_rat(s: &str) -> Result<Rat> {
    Rat::from_str(s.trim())
        .map_err(|_| Error::Invalid(format!("cannot parse rational '{s}'")))
}

impl FanFile {
    pub fn load(path: &std::path::Path) -> Result<FanFile> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn to_fan(&self) -> Result<Fan> {
        let rays: Vec<IVec> = self
            .rays
            .iter()
            .map(|r| r.iter().map(|&x| Int::from(x)).collect())
            .collect();
        let cones: Vec<RaySet> = self
            .maximal_cones
            .iter()
            .map(|mc| mc.iter().copied().collect())
            .collect();
        Fan::new(self.lattice_rank, rays, cones)
    }

    pub fn to_triple(&self) -> Result<FanTriple> {
        if !self.h_rays.is_empty() || !self.h.is_empty() {
            return Err(Error::Invalid(
                "file carries H decorations; this operation expects a fan triple".into(),
            ));
        }
        FanTriple::new(
            self.to_fan()?,
            self.b.iter().copied().collect(),
            self.c.iter().copied().collect(),
        )
    }

    pub fn to_quadruple(&self) -> Result<FanQuadruple> {
        let mut h = BTreeMap::new();
        for (k, v) in &self.h {
            let idx: usize = k
                .parse()
                .map_err(|_| Error::Invalid(format!("h key '{k}' is not a ray index")))?;
            h.insert(idx, parse_rat(v)?);
        }
        FanQuadruple::new(
            self.to_fan()?,
            self.b.iter().copied().collect(),
            self.c.iter().copied().collect(),
            self.h_rays.iter().copied().collect(),
            h,
        )
    }

    pub fn divisor(&self, name: &str) -> Result<TorusDivisor> {
        let raw = self
            .divisors
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("no divisor named '{name}' in the file")))?;
        if raw.len() != self.rays.len() {
            return Err(Error::Invalid(format!(
                "divisor '{name}' must list one coefficient per ray"
            )));
        }
        Ok(TorusDivisor { coeffs: raw.iter().map(|s| parse_rat(s)).collect::<Result<_>>()? })
    }

    pub fn order(&self, name: &str) -> Result<Order> {
        let raw = self
            .orders
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("no order named '{name}' in the file")))?;
        Order::new(raw.clone())
    }

    pub fn from_fan(fan: &Fan) -> Result<FanFile> {
        let rays = fan
            .rays()
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| {
                        i64::try_from(x).map_err(|_| {
                            Error::Invalid("ray coordinate exceeds the file format range".into())
                        })
                    })
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut maximal_cones: Vec<Vec<usize>> = fan
            .maximal_cones()
            .iter()
            .map(|mc| mc.iter().copied().collect())
            .collect();
        maximal_cones.sort();
        Ok(FanFile {
            lattice_rank: fan.ambient_rank(),
            rays,
            maximal_cones,
            ..FanFile::default()
        })
    }

    pub fn from_triple(t: &FanTriple) -> Result<FanFile> {
        let mut f = FanFile::from_fan(&t.fan)?;
        f.b = t.b_rays.iter().copied().collect();
        f.c = t.c_rays.iter().copied().collect();
        Ok(f)
    }

    pub fn from_quadruple(q: &FanQuadruple) -> Result<FanFile> {
        let mut f = FanFile::from_fan(&q.fan)?;
        f.b = q.b_rays.iter().copied().collect();
        f.c = q.c_rays.iter().copied().collect();
        f.h_rays = q.h_rays.iter().copied().collect();
        f.h = q.h.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Ok(f)
    }
}

/// Example fans used throughout the test suite and documentation.
pub mod fixtures {
    use super::*;
    use crate::cone::ivec;

    /// The quadrant in rank 2 with one !-ray and one *-ray.
    pub fn quadrant() -> FanTriple {
        let fan = Fan::new(
            2,
            vec![ivec(&[1, 0]), ivec(&[0, 1])],
            vec![[0, 1].into_iter().collect()],
        )
        .unwrap();
        FanTriple::new(fan, [0].into_iter().collect(), [1].into_iter().collect()).unwrap()
    }

    /// The cone over the unit square in rank 3; rays are listed in cyclic
    /// order around the square.
    pub fn square_cone_fan() -> Fan {
        Fan::new(
            3,
            vec![ivec(&[0, 0, 1]), ivec(&[1, 0, 1]), ivec(&[1, 1, 1]), ivec(&[0, 1, 1])],
            vec![[0, 1, 2, 3].into_iter().collect()],
        )
        .unwrap()
    }

    /// Square cone with ! on the first ray and * on its neighbor.
    pub fn square_cone() -> FanTriple {
        FanTriple::new(
            square_cone_fan(),
            [0].into_iter().collect(),
            [1].into_iter().collect(),
        )
        .unwrap()
    }

    /// Square cone with ! and * on opposite pairs of rays.
    pub fn square_cone_split() -> FanTriple {
        FanTriple::new(
            square_cone_fan(),
            [0, 2].into_iter().collect(),
            [1, 3].into_iter().collect(),
        )
        .unwrap()
    }

    /// The six-ray cone in rank 4 whose triple is partially but not well
    /// sorted; ! on the first three rays, * on the last three.
    pub fn six_ray() -> FanTriple {
        let fan = Fan::new(
            4,
            vec![
                ivec(&[0, 0, 1, 1]),
                ivec(&[1, 0, 0, 1]),
                ivec(&[-1, 0, 0, 1]),
                ivec(&[0, 0, -1, 1]),
                ivec(&[0, 1, 0, 1]),
                ivec(&[0, -1, 1, 1]),
            ],
            vec![(0..6).collect()],
        )
        .unwrap();
        FanTriple::new(fan, [0, 1, 2].into_iter().collect(), [3, 4, 5].into_iter().collect())
            .unwrap()
    }
}
