//! Subdivisions of decorated fans: star subdivisions, extensions of a
//! subdivided cone by an outside ray, piecewise linear good sorting
//! functions found by exact LP and checked by an independent verifier,
//! local and sequential convexity certificates, and the canonical
//! resolution of an affine triple to a log-simplicial model.

use crate::cone::{dot, intersect_cones, primitive_int, Cone, IVec};
use crate::fan::{subdivision_map, Fan, FanQuadruple, FanTriple, Order, RaySet, SubdivisionMap};
use crate::linalg::{pair, rint, solve_canonical, to_rat_vec, Rat};
use crate::lp::{feasible_point, Lp, Rel};
use crate::sorting::{classify_sorted, find_sorting_function, SortMode, Sortedness};
use crate::{Error, Result};
use num::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// Returns true when every cone containing a marked ray stays a join over
/// that ray: dropping the ray must leave a fan cone of one dimension less.
pub fn is_e_simplicial(fan: &Fan, marked: &RaySet) -> bool {
    for rayset in fan.cones() {
        for nu in rayset.iter().filter(|i| marked.contains(*i)) {
            let rest: RaySet = rayset.iter().copied().filter(|i| i != nu).collect();
            if !fan.contains_cone(&rest) {
                return false;
            }
            let whole = fan.dim_of(rayset).expect("cone of the fan");
            let dropped = fan.dim_of(&rest).expect("face closure");
            if dropped + 1 != whole {
                return false;
            }
        }
    }
    true
}

/// A triple is log-simplicial when its fan is simplicial relative to every
/// decorated ray.
pub fn is_log_simplicial(t: &FanTriple) -> bool {
    let marked: RaySet = t.b_rays.union(&t.c_rays).copied().collect();
    is_e_simplicial(&t.fan, &marked)
}

/// Star subdivision at a primitive ray inside the support. Cones avoiding
/// the ray are kept; each cone containing it is replaced by the joins of the
/// ray with the facets that avoid it.
pub fn star_subdivision(fan: &Fan, nu: &IVec) -> Result<Fan> {
    if nu.len() != fan.ambient_rank() {
        return Err(Error::AmbientMismatch(nu.len(), fan.ambient_rank()));
    }
    match primitive_int(nu) {
        Some(p) if p == *nu => {}
        _ => {
            return Err(Error::Invalid(
                "subdivision ray must be a primitive vector".into(),
            ))
        }
    }
    let mut rays = fan.rays().to_vec();
    let nu_idx = match fan.ray_index(nu) {
        Some(i) => i,
        None => {
            rays.push(nu.clone());
            rays.len() - 1
        }
    };
    let mut in_support = false;
    let mut new_max: BTreeSet<RaySet> = BTreeSet::new();
    for mc in fan.maximal_cones() {
        let cone = fan.cone(mc).expect("maximal cone");
        if !cone.contains_int(nu) {
            new_max.insert(mc.clone());
            continue;
        }
        in_support = true;
        let dim = cone.dim();
        for facet in fan.cones().iter().filter(|rs| rs.is_subset(mc)) {
            if fan.dim_of(facet)? + 1 != dim {
                continue;
            }
            if fan.cone(facet)?.contains_int(nu) {
                continue;
            }
            let mut piece = facet.clone();
            piece.insert(nu_idx);
            new_max.insert(piece);
        }
    }
    if !in_support {
        return Err(Error::Invalid(
            "subdivision ray lies outside the support of the fan".into(),
        ));
    }
    Fan::new(fan.ambient_rank(), rays, new_max.into_iter().collect())
}

fn face_fan(cone: &Cone, ambient: usize) -> Result<Fan> {
    let k = cone.rays().len();
    Fan::new(ambient, cone.rays().to_vec(), vec![(0..k).collect()])
}

fn support_cone(fan: &Fan) -> Cone {
    Cone::from_generators(fan.ambient_rank(), fan.rays())
}

/// Extends a subdivided cone by a primitive ray outside of it. The input fan
/// must subdivide the cone spanned by its own rays. When the ray leaves the
/// span, every maximal cone is joined with it; when it stays in the span,
/// the subdivision is kept and the ray is joined onto the codimension one
/// cones lying on the facets that the ray sees from outside.
pub fn ext(subdivision: &Fan, nu: &IVec) -> Result<Fan> {
    let n = subdivision.ambient_rank();
    if nu.len() != n {
        return Err(Error::AmbientMismatch(nu.len(), n));
    }
    match primitive_int(nu) {
        Some(p) if p == *nu => {}
        _ => {
            return Err(Error::Invalid(
                "extension ray must be a primitive vector".into(),
            ))
        }
    }
    let tau = support_cone(subdivision);
    let base = face_fan(&tau, n)
        .map_err(|_| Error::Invalid("the fan must subdivide the cone spanned by its rays".into()))?;
    subdivision_map(subdivision, &base)
        .map_err(|_| Error::Invalid("the fan must subdivide the cone spanned by its rays".into()))?;
    if tau.contains_int(nu) {
        return Err(Error::Invalid(
            "extension ray already lies in the subdivided cone".into(),
        ));
    }
    let mut rays = subdivision.rays().to_vec();
    rays.push(nu.clone());
    let nu_idx = rays.len() - 1;
    let grown = Cone::from_generators(n, &rays);
    let mut new_max: BTreeSet<RaySet> = BTreeSet::new();
    if grown.dim() == tau.dim() + 1 {
        for mc in subdivision.maximal_cones() {
            let mut joined = mc.clone();
            joined.insert(nu_idx);
            new_max.insert(joined);
        }
    } else {
        debug_assert_eq!(grown.dim(), tau.dim());
        let visible: Vec<&IVec> = tau
            .facets()
            .iter()
            .filter(|f| dot(f, nu).is_negative())
            .collect();
        for mc in subdivision.maximal_cones() {
            new_max.insert(mc.clone());
        }
        for rayset in subdivision.cones() {
            if subdivision.dim_of(rayset)? + 1 != tau.dim() {
                continue;
            }
            let on_visible = visible.iter().any(|f| {
                rayset
                    .iter()
                    .all(|&i| dot(f, &subdivision.rays()[i]).is_zero())
            });
            if on_visible {
                let mut joined = rayset.clone();
                joined.insert(nu_idx);
                new_max.insert(joined);
            }
        }
    }
    Fan::new(n, rays, new_max.into_iter().collect())
}

/// A piecewise linear function on a subdivided cone, one covector per
/// maximal cone of the subdivision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PLFunction {
    pub base: Cone,
    pub pieces: BTreeMap<RaySet, Vec<Rat>>,
}

fn add_block(row: &mut [Rat], piece: usize, n: usize, v: &IVec, sign: i64) {
    for (j, c) in v.iter().enumerate() {
        row[piece * n + j] += Rat::from(c.clone()) * rint(sign);
    }
}

/// Searches for a good sorting function of the quadruple's fan over the base
/// cone it subdivides: continuous, linear on each maximal cone, strictly
/// convex across every interior wall, nonnegative on !-rays, nonpositive on
/// *-rays, zero on undecorated rays, and unconstrained on interpolated rays.
/// Convexity follows the support function convention: the linear extension
/// of every neighbouring piece strictly overestimates across a wall.
pub fn find_good_sorting_function(base: &Cone, q: &FanQuadruple) -> Result<Option<PLFunction>> {
    let n = q.fan.ambient_rank();
    if base.ambient_rank() != n {
        return Err(Error::AmbientMismatch(base.ambient_rank(), n));
    }
    let base_fan = face_fan(base, n)
        .map_err(|_| Error::Invalid("the base cone does not span a valid fan".into()))?;
    subdivision_map(&q.fan, &base_fan)
        .map_err(|_| Error::Invalid("the fan does not subdivide the base cone".into()))?;
    let mcs = q.fan.maximal_cones();
    let k = mcs.len();
    let dim_base = base.dim();
    let mut lp = Lp::new(k * n);
    for i in 0..k {
        for j in (i + 1)..k {
            let common: RaySet = mcs[i].intersection(&mcs[j]).copied().collect();
            for &r in &common {
                let mut row = vec![Rat::zero(); k * n];
                add_block(&mut row, i, n, &q.fan.rays()[r], 1);
                add_block(&mut row, j, n, &q.fan.rays()[r], -1);
                lp.push(row, Rel::Eq, Rat::zero());
            }
            if q.fan.dim_of(&common)? + 1 == dim_base {
                for &g in mcs[j].difference(&common) {
                    let mut row = vec![Rat::zero(); k * n];
                    add_block(&mut row, i, n, &q.fan.rays()[g], 1);
                    add_block(&mut row, j, n, &q.fan.rays()[g], -1);
                    lp.push(row, Rel::Ge, Rat::one());
                }
                for &g in mcs[i].difference(&common) {
                    let mut row = vec![Rat::zero(); k * n];
                    add_block(&mut row, j, n, &q.fan.rays()[g], 1);
                    add_block(&mut row, i, n, &q.fan.rays()[g], -1);
                    lp.push(row, Rel::Ge, Rat::one());
                }
            }
        }
    }
    for r in 0..q.fan.rays().len() {
        let piece = (0..k)
            .find(|&i| mcs[i].contains(&r))
            .expect("every ray appears in a maximal cone");
        let mut row = vec![Rat::zero(); k * n];
        add_block(&mut row, piece, n, &q.fan.rays()[r], 1);
        if q.b_rays.contains(&r) {
            lp.push(row, Rel::Ge, Rat::zero());
        } else if q.c_rays.contains(&r) {
            lp.push(row, Rel::Le, Rat::zero());
        } else if !q.h_rays.contains(&r) {
            lp.push(row, Rel::Eq, Rat::zero());
        }
    }
    match feasible_point(&lp) {
        None => Ok(None),
        Some(x) => {
            let pieces = mcs
                .iter()
                .enumerate()
                .map(|(i, mc)| (mc.clone(), x[i * n..(i + 1) * n].to_vec()))
                .collect();
            Ok(Some(PLFunction {
                base: base.clone(),
                pieces,
            }))
        }
    }
}

/// Checks a good sorting function certificate from scratch. Geometry is
/// recomputed from generators, intersections, and membership tests; nothing
/// is shared with the LP encoder.
pub fn verify_good_sorting_function(base: &Cone, q: &FanQuadruple, psi: &PLFunction) -> Result<()> {
    let n = q.fan.ambient_rank();
    if psi.base != *base {
        return Err(Error::Invalid(
            "certificate records a different base cone".into(),
        ));
    }
    let keys: BTreeSet<&RaySet> = psi.pieces.keys().collect();
    let mcs: BTreeSet<&RaySet> = q.fan.maximal_cones().iter().collect();
    if keys != mcs {
        return Err(Error::Invalid(
            "certificate pieces do not match the maximal cones".into(),
        ));
    }
    let mut cones: Vec<(&RaySet, Cone, &Vec<Rat>)> = Vec::new();
    for (rayset, u) in &psi.pieces {
        if u.len() != n {
            return Err(Error::AmbientMismatch(u.len(), n));
        }
        let gens: Vec<IVec> = rayset.iter().map(|&i| q.fan.rays()[i].clone()).collect();
        let cone = Cone::from_generators(n, &gens);
        if cone.dim() != base.dim() {
            return Err(Error::Invalid(
                "certificate piece does not have full dimension in the base".into(),
            ));
        }
        if !base.contains_cone(&cone) {
            return Err(Error::Invalid(
                "certificate piece leaves the base cone".into(),
            ));
        }
        cones.push((rayset, cone, u));
    }
    for i in 0..cones.len() {
        for j in (i + 1)..cones.len() {
            let meet = intersect_cones(&cones[i].1, &cones[j].1)?;
            for w in meet.rays() {
                if pair(cones[i].2, w) != pair(cones[j].2, w) {
                    return Err(Error::Invalid("certificate is discontinuous".into()));
                }
            }
            if meet.dim() + 1 == base.dim() {
                for (a, b) in [(i, j), (j, i)] {
                    for g in cones[b].1.rays() {
                        if meet.contains_int(g) {
                            continue;
                        }
                        if pair(cones[a].2, g) <= pair(cones[b].2, g) {
                            return Err(Error::Invalid(
                                "certificate is not strictly convex across a wall".into(),
                            ));
                        }
                    }
                }
            }
        }
    }
    for (r, v) in q.fan.rays().iter().enumerate() {
        let holder = cones
            .iter()
            .find(|(_, c, _)| c.contains_int(v))
            .ok_or_else(|| Error::Invalid("a ray escapes every certificate piece".into()))?;
        let value = pair(holder.2, v);
        if q.b_rays.contains(&r) {
            if value.is_negative() {
                return Err(Error::Invalid("certificate is negative on a !-ray".into()));
            }
        } else if q.c_rays.contains(&r) {
            if value.is_positive() {
                return Err(Error::Invalid("certificate is positive on a *-ray".into()));
            }
        } else if !q.h_rays.contains(&r) && !value.is_zero() {
            return Err(Error::Invalid(
                "certificate does not vanish on an undecorated ray".into(),
            ));
        }
    }
    Ok(())
}

/// Searches for one good sorting function of the finer fan glued over a
/// coarser subdivision of the same support: continuity everywhere, but wall
/// strictness only across walls interior to a coarser maximal cone.
pub fn glued_good_sorting_function(mid: &Fan, fine_q: &FanQuadruple) -> Result<Option<PLFunction>> {
    let map = subdivision_map(&fine_q.fan, mid)
        .map_err(|_| Error::Invalid("the fan does not subdivide the coarser fan".into()))?;
    let n = fine_q.fan.ambient_rank();
    let base = support_cone(mid);
    let mcs = fine_q.fan.maximal_cones();
    let k = mcs.len();
    let mut lp = Lp::new(k * n);
    for i in 0..k {
        for j in (i + 1)..k {
            let common: RaySet = mcs[i].intersection(&mcs[j]).copied().collect();
            for &r in &common {
                let mut row = vec![Rat::zero(); k * n];
                add_block(&mut row, i, n, &fine_q.fan.rays()[r], 1);
                add_block(&mut row, j, n, &fine_q.fan.rays()[r], -1);
                lp.push(row, Rel::Eq, Rat::zero());
            }
            let same_piece = map.assignment[&mcs[i]] == map.assignment[&mcs[j]];
            let is_wall = fine_q.fan.dim_of(&common)? + 1 == fine_q.fan.dim_of(&mcs[i])?;
            if same_piece && is_wall {
                for (a, b) in [(i, j), (j, i)] {
                    for &g in mcs[b].difference(&common) {
                        let mut row = vec![Rat::zero(); k * n];
                        add_block(&mut row, a, n, &fine_q.fan.rays()[g], 1);
                        add_block(&mut row, b, n, &fine_q.fan.rays()[g], -1);
                        lp.push(row, Rel::Ge, Rat::one());
                    }
                }
            }
        }
    }
    for r in 0..fine_q.fan.rays().len() {
        let piece = (0..k)
            .find(|&i| mcs[i].contains(&r))
            .expect("every ray appears in a maximal cone");
        let mut row = vec![Rat::zero(); k * n];
        add_block(&mut row, piece, n, &fine_q.fan.rays()[r], 1);
        if fine_q.b_rays.contains(&r) {
            lp.push(row, Rel::Ge, Rat::zero());
        } else if fine_q.c_rays.contains(&r) {
            lp.push(row, Rel::Le, Rat::zero());
        } else if !fine_q.h_rays.contains(&r) {
            lp.push(row, Rel::Eq, Rat::zero());
        }
    }
    match feasible_point(&lp) {
        None => Ok(None),
        Some(x) => {
            let pieces = mcs
                .iter()
                .enumerate()
                .map(|(i, mc)| (mc.clone(), x[i * n..(i + 1) * n].to_vec()))
                .collect();
            Ok(Some(PLFunction { base, pieces }))
        }
    }
}

/// Builds and verifies the composite certificate psi0 + eps * psi1 for a
/// two-stage subdivision: psi0 certifies the coarser stage over the base,
/// psi1 is glued over the coarser fan, and eps is the largest power of 1/2
/// for which every strict constraint survives.
pub fn composition_witness(
    base: &Cone,
    psi0: &PLFunction,
    mid: &Fan,
    psi1: &PLFunction,
    fine_q: &FanQuadruple,
) -> Result<(Rat, PLFunction)> {
    let mut coarse: BTreeMap<RaySet, Vec<Rat>> = BTreeMap::new();
    for mc in fine_q.fan.maximal_cones() {
        let fine_cone = fine_q.fan.cone(mc)?;
        let covector = psi0
            .pieces
            .iter()
            .find(|(rayset, _)| {
                mid.cone(rayset)
                    .map(|c| c.contains_cone(fine_cone))
                    .unwrap_or(false)
            })
            .map(|(_, u)| u.clone())
            .ok_or_else(|| {
                Error::Invalid("a piece of the finer fan escapes the coarser pieces".into())
            })?;
        coarse.insert(mc.clone(), covector);
    }
    let mut eps = Rat::one();
    for _ in 0..=64 {
        let mut pieces: BTreeMap<RaySet, Vec<Rat>> = BTreeMap::new();
        for (rayset, u0) in &coarse {
            let u1 = psi1.pieces.get(rayset).ok_or_else(|| {
                Error::Invalid("glued certificate misses a piece of the finer fan".into())
            })?;
            let combined = u0
                .iter()
                .zip(u1)
                .map(|(a, b)| a + &eps * b)
                .collect::<Vec<Rat>>();
            pieces.insert(rayset.clone(), combined);
        }
        let candidate = PLFunction {
            base: base.clone(),
            pieces,
        };
        if verify_good_sorting_function(base, fine_q, &candidate).is_ok() {
            return Ok((eps, candidate));
        }
        eps /= rint(2);
    }
    Err(Error::Invalid(
        "no scale for the composite certificate was found".into(),
    ))
}

fn fan_from_raysets(
    ambient: usize,
    rays: &[IVec],
    max_cones: &[RaySet],
) -> Result<(Fan, Vec<usize>)> {
    let used: Vec<usize> = max_cones
        .iter()
        .flatten()
        .copied()
        .collect::<RaySet>()
        .into_iter()
        .collect();
    let back: BTreeMap<usize, usize> = used
        .iter()
        .enumerate()
        .map(|(new, &old)| (old, new))
        .collect();
    let sub_rays: Vec<IVec> = used.iter().map(|&i| rays[i].clone()).collect();
    let sub_max: Vec<RaySet> = max_cones
        .iter()
        .map(|rayset| rayset.iter().map(|i| back[i]).collect())
        .collect();
    Ok((Fan::new(ambient, sub_rays, sub_max)?, used))
}

fn restrict_decorations(q: &FanQuadruple, sub: &Fan, used: &[usize]) -> FanQuadruple {
    let mut b = RaySet::new();
    let mut c = RaySet::new();
    let mut h = RaySet::new();
    let mut hv = BTreeMap::new();
    for (new, &old) in used.iter().enumerate() {
        if q.b_rays.contains(&old) {
            b.insert(new);
        } else if q.c_rays.contains(&old) {
            c.insert(new);
        } else if q.h_rays.contains(&old) {
            h.insert(new);
            hv.insert(new, q.h[&old].clone());
        }
    }
    FanQuadruple::new(sub.clone(), b, c, h, hv).expect("restriction of a valid quadruple")
}

/// Transfers decorations to another fan by matching ray vectors; rays absent
/// from the reference stay undecorated.
pub fn induced_decorations(fan: &Fan, q: &FanQuadruple) -> FanQuadruple {
    let mut b = RaySet::new();
    let mut c = RaySet::new();
    let mut h = RaySet::new();
    let mut hv = BTreeMap::new();
    for (i, v) in fan.rays().iter().enumerate() {
        if let Some(old) = q.fan.ray_index(v) {
            if q.b_rays.contains(&old) {
                b.insert(i);
            } else if q.c_rays.contains(&old) {
                c.insert(i);
            } else if q.h_rays.contains(&old) {
                h.insert(i);
                hv.insert(i, q.h[&old].clone());
            }
        }
    }
    FanQuadruple::new(fan.clone(), b, c, h, hv).expect("inherited decorations stay valid")
}

fn translate_pieces(pieces: BTreeMap<RaySet, Vec<Rat>>, used: &[usize]) -> BTreeMap<RaySet, Vec<Rat>> {
    pieces
        .into_iter()
        .map(|(rayset, u)| (rayset.iter().map(|&i| used[i]).collect(), u))
        .collect()
}

/// Certifies a subdivision as locally convex: one good sorting function per
/// maximal cone of the coarser fan, or `None` as soon as one is missing.
/// Certificate keys are the maximal cones of the coarser fan; piece keys use
/// the finer fan's ray indices.
pub fn is_locally_convex(
    map: &SubdivisionMap,
    q: &FanQuadruple,
) -> Result<Option<BTreeMap<RaySet, PLFunction>>> {
    if q.fan != map.source {
        return Err(Error::Invalid(
            "quadruple does not decorate the source of the subdivision".into(),
        ));
    }
    let mut out = BTreeMap::new();
    for mc in map.target.maximal_cones() {
        let base_cone = map.target.cone(mc)?.clone();
        let inside: Vec<RaySet> = map
            .source
            .maximal_cones()
            .iter()
            .filter(|s| map.assignment[*s].is_subset(mc))
            .cloned()
            .collect();
        let (sub, used) = fan_from_raysets(map.source.ambient_rank(), map.source.rays(), &inside)?;
        let sub_q = restrict_decorations(q, &sub, &used);
        match find_good_sorting_function(&base_cone, &sub_q)? {
            None => return Ok(None),
            Some(psi) => {
                let pieces = translate_pieces(psi.pieces, &used);
                out.insert(
                    mc.clone(),
                    PLFunction {
                        base: base_cone,
                        pieces,
                    },
                );
            }
        }
    }
    Ok(Some(out))
}

/// One step of a resolution chain: a star subdivision or an extension, the
/// ray it uses, the fans before and after, the decorations inherited by the
/// new fan, and the convexity certificates. Certificate keys are the base
/// cones the certificates live over: the maximal cones of the fan before,
/// except for extension steps growing the support, where the single key is
/// the full ray set of the fan after.
#[derive(Clone, Debug)]
pub struct ResolutionStep {
    pub kind: StepKind,
    pub ray: IVec,
    pub before: Fan,
    pub after: Fan,
    pub induced: FanQuadruple,
    pub certificates: BTreeMap<RaySet, PLFunction>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Star,
    Ext,
}

/// A chain of subdivision steps starting from a decorated fan.
#[derive(Clone, Debug)]
pub struct ResolutionChain {
    pub initial: FanQuadruple,
    pub steps: Vec<ResolutionStep>,
}

impl ResolutionChain {
    pub fn final_fan(&self) -> &Fan {
        self.steps.last().map(|s| &s.after).unwrap_or(&self.initial.fan)
    }

    pub fn final_quadruple(&self) -> FanQuadruple {
        self.steps
            .last()
            .map(|s| s.induced.clone())
            .unwrap_or_else(|| self.initial.clone())
    }
}

/// Stars the fan at the chosen decorated rays, one step per ray, processing
/// the reversed order. Certificates are left empty; use
/// [`is_sequentially_convex`] to fill in the convexity verdict.
pub fn sequential_star(q: &FanQuadruple, chosen: &RaySet, order: &Order) -> Result<ResolutionChain> {
    let decorated: RaySet = q
        .b_rays
        .iter()
        .chain(&q.c_rays)
        .chain(&q.h_rays)
        .copied()
        .collect();
    if !chosen.is_subset(&decorated) {
        return Err(Error::Invalid("chosen rays must be decorated".into()));
    }
    if order.carrier() != *chosen {
        return Err(Error::Invalid(
            "order must list exactly the chosen rays".into(),
        ));
    }
    let mut steps = Vec::new();
    let mut current = q.fan.clone();
    for idx in order.reversed() {
        let nu = q.fan.rays()[idx].clone();
        let next = star_subdivision(&current, &nu)?;
        let induced = induced_decorations(&next, q);
        steps.push(ResolutionStep {
            kind: StepKind::Star,
            ray: nu,
            before: current,
            after: next.clone(),
            induced,
            certificates: BTreeMap::new(),
        });
        current = next;
    }
    Ok(ResolutionChain {
        initial: q.clone(),
        steps,
    })
}

/// The verdict of a sequential convexity check, with one certificate per
/// unsettled cone of each step's base fan.
#[derive(Clone, Debug)]
pub struct SequentialConvexity {
    pub convex: bool,
    pub failing_step: Option<usize>,
    pub per_step: Vec<BTreeMap<RaySet, PLFunction>>,
}

/// Checks a chain of star subdivisions for sequential convexity: at each
/// step, the restriction of the subdivision to every cone of the base fan
/// not yet touched by an earlier starred ray must admit a good sorting
/// function over that cone.
pub fn is_sequentially_convex(chain: &ResolutionChain) -> Result<SequentialConvexity> {
    if chain.steps.iter().any(|s| s.kind != StepKind::Star) {
        return Err(Error::Invalid(
            "sequential convexity is defined for chains of star subdivisions".into(),
        ));
    }
    let mut starred: Vec<IVec> = Vec::new();
    let mut per_step = Vec::new();
    for (i, step) in chain.steps.iter().enumerate() {
        let before = &step.before;
        let settled: RaySet = starred
            .iter()
            .filter_map(|v| before.ray_index(v))
            .collect();
        let mut certs = BTreeMap::new();
        for zeta_rayset in before.cones() {
            if zeta_rayset.iter().any(|r| settled.contains(r)) {
                continue;
            }
            let zeta = before.cone(zeta_rayset)?.clone();
            let inside: Vec<RaySet> = step
                .after
                .cones()
                .iter()
                .filter(|rayset| {
                    let c = step.after.cone(rayset).expect("cone of the fan");
                    c.dim() == zeta.dim() && zeta.contains_cone(c)
                })
                .cloned()
                .collect();
            let (sub, used) =
                fan_from_raysets(step.after.ambient_rank(), step.after.rays(), &inside)?;
            let sub_q = restrict_decorations(&step.induced, &sub, &used);
            match find_good_sorting_function(&zeta, &sub_q)? {
                None => {
                    return Ok(SequentialConvexity {
                        convex: false,
                        failing_step: Some(i),
                        per_step,
                    })
                }
                Some(psi) => {
                    let pieces = translate_pieces(psi.pieces, &used);
                    certs.insert(zeta_rayset.clone(), PLFunction { base: zeta, pieces });
                }
            }
        }
        per_step.push(certs);
        starred.push(step.ray.clone());
    }
    Ok(SequentialConvexity {
        convex: true,
        failing_step: None,
        per_step,
    })
}

fn resolve_cone(
    t: &FanTriple,
    seq: &[usize],
    xi: &RaySet,
    back: &BTreeMap<IVec, usize>,
) -> Result<BTreeSet<RaySet>> {
    let rays = t.fan.rays();
    let n = t.fan.ambient_rank();
    if !xi.iter().any(|i| t.b_rays.contains(i)) {
        let spine: RaySet = xi
            .iter()
            .copied()
            .filter(|i| !t.c_rays.contains(i))
            .collect();
        let (mut current, _) = fan_from_raysets(n, rays, &[spine])?;
        for &nu in seq.iter().filter(|i| xi.contains(*i) && t.c_rays.contains(*i)) {
            current = ext(&current, &rays[nu])?;
        }
        let mut out = BTreeSet::new();
        for mc in current.maximal_cones() {
            out.insert(mc.iter().map(|&i| back[&current.rays()[i]]).collect());
        }
        Ok(out)
    } else {
        let beta = seq
            .iter()
            .rev()
            .find(|i| xi.contains(*i))
            .copied()
            .expect("a decorated ray exists");
        debug_assert!(t.b_rays.contains(&beta));
        let gens: Vec<IVec> = xi.iter().map(|&i| rays[i].clone()).collect();
        let cone = Cone::from_generators(n, &gens);
        let dim = cone.dim();
        let mut out = BTreeSet::new();
        for face in &cone.faces().faces {
            if face.cone.dim() + 1 != dim {
                continue;
            }
            let facet: RaySet = face.cone.rays().iter().map(|v| back[v]).collect();
            if facet.contains(&beta) {
                continue;
            }
            for resolved in resolve_cone(t, seq, &facet, back)? {
                let mut joined = resolved;
                joined.insert(beta);
                out.insert(joined);
            }
        }
        Ok(out)
    }
}

/// Canonically resolves an affine decorated triple to an efficient
/// log-simplicial model. The order must list every decorated ray with every
/// *-ray before every !-ray. With !-rays present, the cone is starred at the
/// order-last !-ray and the facets avoiding it are resolved recursively;
/// without !-rays, the cone spanned by the undecorated rays is extended by
/// the *-rays in order, each extension acting on the accumulated
/// subdivision. Every step carries verified convexity certificates.
pub fn resolve_log_simplicial(t: &FanTriple, order: &Order) -> Result<ResolutionChain> {
    let q0 = t.to_quadruple();
    if !q0.is_affine() {
        return Err(Error::Unsupported("resolution requires an affine fan".into()));
    }
    let carrier = order.carrier();
    let decorated: RaySet = t.b_rays.union(&t.c_rays).copied().collect();
    let seq = order.as_slice();
    let order_ok = carrier == decorated
        && match seq.iter().position(|i| t.b_rays.contains(i)) {
            None => true,
            Some(p) => seq[p..].iter().all(|i| t.b_rays.contains(i)),
        };
    if !order_ok {
        return Err(Error::BadResolutionOrder);
    }
    if is_log_simplicial(t) {
        return Ok(ResolutionChain {
            initial: q0,
            steps: vec![],
        });
    }
    let rays = t.fan.rays();
    let n = t.fan.ambient_rank();
    let back: BTreeMap<IVec, usize> = rays
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    let full = t.fan.maximal_cones()[0].clone();
    let mut steps = Vec::new();
    if t.b_rays.is_empty() {
        let spine: RaySet = full
            .iter()
            .copied()
            .filter(|i| !t.c_rays.contains(i))
            .collect();
        let (mut current, _) = fan_from_raysets(n, rays, &[spine])?;
        for &nu in seq {
            let next = ext(&current, &rays[nu])?;
            let induced = induced_decorations(&next, &q0);
            let tau = support_cone(&next);
            let psi = find_good_sorting_function(&tau, &induced)?.ok_or_else(|| {
                Error::Invalid("internal: extension step admits no good sorting function".into())
            })?;
            verify_good_sorting_function(&tau, &induced, &psi)?;
            let key: RaySet = (0..next.rays().len()).collect();
            steps.push(ResolutionStep {
                kind: StepKind::Ext,
                ray: rays[nu].clone(),
                before: current,
                after: next.clone(),
                induced,
                certificates: [(key, psi)].into(),
            });
            current = next;
        }
    } else {
        let beta = *seq.last().expect("carrier is nonempty");
        let starred = star_subdivision(&t.fan, &rays[beta])?;
        let q1 = induced_decorations(&starred, &q0);
        if starred != t.fan {
            let map = subdivision_map(&starred, &t.fan)?;
            let certs = is_locally_convex(&map, &q1)?.ok_or_else(|| {
                Error::Invalid("internal: star step admits no good sorting function".into())
            })?;
            steps.push(ResolutionStep {
                kind: StepKind::Star,
                ray: rays[beta].clone(),
                before: t.fan.clone(),
                after: starred.clone(),
                induced: q1.clone(),
                certificates: certs,
            });
        }
        let final_max: Vec<RaySet> = resolve_cone(t, seq, &full, &back)?.into_iter().collect();
        let (final_fan, _) = fan_from_raysets(n, rays, &final_max)?;
        if final_fan != starred {
            let map = subdivision_map(&final_fan, &starred)?;
            let qf = induced_decorations(&final_fan, &q0);
            let certs = is_locally_convex(&map, &qf)?.ok_or_else(|| {
                Error::Invalid("internal: extension step admits no good sorting function".into())
            })?;
            steps.push(ResolutionStep {
                kind: StepKind::Ext,
                ray: rays[beta].clone(),
                before: starred,
                after: final_fan,
                induced: qf,
                certificates: certs,
            });
        }
    }
    let final_q = steps
        .last()
        .map(|s| s.induced.clone())
        .unwrap_or_else(|| q0.clone());
    let final_t = FanTriple::new(
        final_q.fan.clone(),
        final_q.b_rays.clone(),
        final_q.c_rays.clone(),
    )?;
    if !is_log_simplicial(&final_t) {
        return Err(Error::Invalid(
            "internal: resolution did not reach a log-simplicial model".into(),
        ));
    }
    let old_rays: BTreeSet<&IVec> = rays.iter().collect();
    let new_rays: BTreeSet<&IVec> = final_q.fan.rays().iter().collect();
    if old_rays != new_rays {
        return Err(Error::Invalid("internal: resolution is not efficient".into()));
    }
    Ok(ResolutionChain {
        initial: q0,
        steps,
    })
}

/// For an affine triple with one more ray than its dimension, all proper
/// faces simplicial, and no well-sorting, finds the unique ray separating
/// the !-side from the *-side and the two ray sets it splits off.
pub fn find_separating_ray(t: &FanTriple) -> Result<(IVec, RaySet, RaySet)> {
    let q = t.to_quadruple();
    if !q.is_affine() {
        return Err(Error::Unsupported(
            "separating rays require an affine fan".into(),
        ));
    }
    if matches!(
        classify_sorted(&q, &SortMode::well_sorted(&q))?,
        Sortedness::Sorted(_)
    ) {
        return Err(Error::WellSortedInput);
    }
    let full = t.fan.maximal_cones()[0].clone();
    let tau_dim = t.fan.dim_of(&full)?;
    if t.fan.rays().len() != tau_dim + 1 {
        return Err(Error::Invalid(
            "the cone must have exactly one more ray than its dimension".into(),
        ));
    }
    for rayset in t.fan.cones() {
        if *rayset != full && !t.fan.cone(rayset)?.is_simplicial() {
            return Err(Error::Invalid("every proper face must be simplicial".into()));
        }
    }
    let n = t.fan.ambient_rank();
    let rays = t.fan.rays();
    let back: BTreeMap<IVec, usize> = rays
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    let gens_of = |s: &RaySet| -> Vec<IVec> { s.iter().map(|&i| rays[i].clone()).collect() };
    let undecorated = t.a_rays();
    let b_side: RaySet = t.b_rays.union(&undecorated).copied().collect();
    let c_side: RaySet = t.c_rays.union(&undecorated).copied().collect();
    let cone_b = Cone::from_generators(n, &gens_of(&b_side));
    let cone_c = Cone::from_generators(n, &gens_of(&c_side));
    let cone_a = Cone::from_generators(n, &gens_of(&undecorated));
    let crossing = intersect_cones(&cone_b, &cone_c)?;
    let nu = crossing
        .rays()
        .iter()
        .find(|r| !cone_a.rays().contains(r))
        .ok_or_else(|| Error::Invalid("no separating ray exists".into()))?
        .clone();
    let face_indices = |cone: &Cone| -> Result<RaySet> {
        Ok(cone
            .smallest_face_containing(&to_rat_vec(&nu))?
            .rays()
            .iter()
            .map(|v| back[v])
            .collect())
    };
    let b_plus = face_indices(&cone_b)?;
    let c_plus = face_indices(&cone_c)?;
    let meet = intersect_cones(
        &Cone::from_generators(n, &gens_of(&b_plus)),
        &Cone::from_generators(n, &gens_of(&c_plus)),
    )?;
    let union: RaySet = b_plus.union(&c_plus).copied().collect();
    let ok = t.b_rays.is_subset(&b_plus)
        && t.c_rays.is_subset(&c_plus)
        && b_plus.is_disjoint(&c_plus)
        && union == full
        && meet.dim() == 1
        && meet.rays().first() == Some(&nu);
    if !ok {
        return Err(Error::Invalid("separating ray postconditions failed".into()));
    }
    Ok((nu, b_plus, c_plus))
}

/// When the quadruple admits a sorting function strictly negative on the
/// given *-ray, stars the fan there and returns the scale alpha together
/// with the verified convexity certificate psi + alpha * rho, normalized to
/// vanish on the starred ray.
pub fn star_at_c_witness(q: &FanQuadruple, nu: &IVec) -> Result<Option<(Rat, PLFunction)>> {
    if !q.is_affine() {
        return Err(Error::Unsupported(
            "the star convexity witness requires an affine fan".into(),
        ));
    }
    let nu_idx = q
        .fan
        .ray_index(nu)
        .ok_or_else(|| Error::Invalid("the starred ray must be a ray of the fan".into()))?;
    if !q.c_rays.contains(&nu_idx) {
        return Err(Error::Invalid("the starred ray must be a *-ray".into()));
    }
    let strict: RaySet = [nu_idx].into();
    let Some(rho) = find_sorting_function(q, &strict)? else {
        return Ok(None);
    };
    let starred = star_subdivision(&q.fan, nu)?;
    let induced = induced_decorations(&starred, q);
    let nu_new = starred.ray_index(nu).expect("starred ray is kept");
    let n = starred.ambient_rank();
    let mut pieces: BTreeMap<RaySet, Vec<Rat>> = BTreeMap::new();
    for mc in starred.maximal_cones() {
        if !mc.contains(&nu_new) {
            pieces.insert(mc.clone(), vec![Rat::zero(); n]);
            continue;
        }
        let rows: Vec<Vec<Rat>> = mc.iter().map(|&i| to_rat_vec(&starred.rays()[i])).collect();
        let rhs: Vec<Rat> = mc
            .iter()
            .map(|&i| if i == nu_new { Rat::one() } else { Rat::zero() })
            .collect();
        let u = solve_canonical(&rows, &rhs)
            .ok_or_else(|| Error::Invalid("internal: star piece is not a join".into()))?;
        pieces.insert(mc.clone(), u);
    }
    let rho_at_nu = pair(&rho, nu);
    debug_assert!(rho_at_nu.is_negative());
    let alpha = -rho_at_nu.recip();
    for u in pieces.values_mut() {
        for (a, r) in u.iter_mut().zip(&rho) {
            *a += &alpha * r;
        }
    }
    let base = q.fan.cone(&q.fan.maximal_cones()[0])?.clone();
    let witness = PLFunction { base: base.clone(), pieces };
    verify_good_sorting_function(&base, &induced, &witness)?;
    Ok(Some((alpha, witness)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ivec;
    use crate::fan::fixtures::{quadrant, square_cone, square_cone_fan, square_cone_split, six_ray};

    fn rs(xs: &[usize]) -> RaySet {
        xs.iter().copied().collect()
    }

    fn plain_quadruple(fan: Fan) -> FanQuadruple {
        FanQuadruple::new(fan, RaySet::new(), RaySet::new(), RaySet::new(), BTreeMap::new())
            .unwrap()
    }

    fn quadruple(fan: Fan, b: &[usize], c: &[usize]) -> FanQuadruple {
        FanQuadruple::new(fan, rs(b), rs(c), RaySet::new(), BTreeMap::new()).unwrap()
    }

    fn starred_square() -> Fan {
        star_subdivision(&square_cone_fan(), &ivec(&[1, 1, 2])).unwrap()
    }

    #[test]
    fn star_at_interior_ray_splits_square_cone() {
        let fan = starred_square();
        let expected = Fan::new(
            3,
            vec![
                ivec(&[0, 0, 1]),
                ivec(&[1, 0, 1]),
                ivec(&[1, 1, 1]),
                ivec(&[0, 1, 1]),
                ivec(&[1, 1, 2]),
            ],
            vec![rs(&[0, 1, 4]), rs(&[1, 2, 4]), rs(&[2, 3, 4]), rs(&[0, 3, 4])],
        )
        .unwrap();
        assert_eq!(fan, expected);
        assert!(is_e_simplicial(&fan, &rs(&[4])));
        assert!(!is_e_simplicial(&square_cone_fan(), &rs(&[0])));
    }

    #[test]
    fn star_at_existing_ray_is_idempotent() {
        let once = star_subdivision(&square_cone_fan(), &ivec(&[0, 0, 1])).unwrap();
        assert_ne!(once, square_cone_fan());
        let twice = star_subdivision(&once, &ivec(&[0, 0, 1])).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.maximal_cones().len(), 2);
    }

    #[test]
    fn star_at_antipodal_rays_agrees() {
        let fan = six_ray().fan;
        let at_b = star_subdivision(&fan, &ivec(&[0, 0, 1, 1])).unwrap();
        let at_c = star_subdivision(&fan, &ivec(&[0, 0, -1, 1])).unwrap();
        assert_eq!(at_b, at_c);
        assert_ne!(at_b, fan);
        assert_eq!(at_b.maximal_cones().len(), 4);
        for mc in at_b.maximal_cones() {
            assert!(at_b.cone(mc).unwrap().is_simplicial());
        }
    }

    #[test]
    fn star_rejects_bad_rays() {
        let fan = quadrant().fan;
        assert!(star_subdivision(&fan, &ivec(&[-1, 0])).is_err());
        assert!(star_subdivision(&fan, &ivec(&[2, 0])).is_err());
    }

    #[test]
    fn ext_raises_dimension() {
        let ray_fan = Fan::new(2, vec![ivec(&[1, 0])], vec![rs(&[0])]).unwrap();
        let grown = ext(&ray_fan, &ivec(&[0, 1])).unwrap();
        assert_eq!(grown, quadrant().fan);
    }

    #[test]
    fn ext_in_equal_dimension_joins_visible_boundary() {
        let grown = ext(&quadrant().fan, &ivec(&[-1, 0])).unwrap();
        let expected = Fan::new(
            2,
            vec![ivec(&[1, 0]), ivec(&[0, 1]), ivec(&[-1, 0])],
            vec![rs(&[0, 1]), rs(&[1, 2])],
        )
        .unwrap();
        assert_eq!(grown, expected);
    }

    #[test]
    fn ext_rejects_inside_rays_and_gaps() {
        assert!(ext(&quadrant().fan, &ivec(&[1, 1])).is_err());
        let gappy = Fan::new(
            2,
            vec![ivec(&[1, 0]), ivec(&[1, 1]), ivec(&[0, 1])],
            vec![rs(&[0, 1]), rs(&[2])],
        )
        .unwrap();
        assert!(ext(&gappy, &ivec(&[-1, 0])).is_err());
    }

    #[test]
    fn ext_cascade_preserves_marked_simpliciality() {
        let rays = square_cone_fan().rays().to_vec();
        let (spine, _) = fan_from_raysets(3, &rays, &[rs(&[0, 2])]).unwrap();
        let first = ext(&spine, &rays[1]).unwrap();
        assert!(is_e_simplicial(&first, &rs(&[first.ray_index(&rays[1]).unwrap()])));
        let second = ext(&first, &rays[3]).unwrap();
        let marked: RaySet = [1, 3]
            .iter()
            .map(|&i| second.ray_index(&rays[i]).unwrap())
            .collect();
        assert!(is_e_simplicial(&second, &marked));
        assert_eq!(second.maximal_cones().len(), 2);
    }

    #[test]
    fn trivial_good_sorting_function_is_zero() {
        let fan = square_cone_fan();
        let base = fan.cone(&rs(&[0, 1, 2, 3])).unwrap().clone();
        let q = plain_quadruple(fan);
        let psi = find_good_sorting_function(&base, &q).unwrap().unwrap();
        assert!(psi.pieces.values().all(|u| u.iter().all(|x| x.is_zero())));
        verify_good_sorting_function(&base, &q, &psi).unwrap();
    }

    #[test]
    fn star_of_marked_ray_has_positive_certificate() {
        let fan = starred_square();
        let base = square_cone_fan().cone(&rs(&[0, 1, 2, 3])).unwrap().clone();
        let q = quadruple(fan, &[0, 4], &[1]);
        let psi = find_good_sorting_function(&base, &q).unwrap().unwrap();
        verify_good_sorting_function(&base, &q, &psi).unwrap();
        let piece = psi.pieces.get(&rs(&[0, 1, 4])).unwrap();
        assert!(pair(piece, &ivec(&[1, 1, 2])).is_positive());
    }

    #[test]
    fn split_decorations_make_the_star_infeasible() {
        let fan = starred_square();
        let q = quadruple(fan, &[0, 2], &[1, 3, 4]);
        let base = square_cone_fan().cone(&rs(&[0, 1, 2, 3])).unwrap().clone();
        assert!(find_good_sorting_function(&base, &q).unwrap().is_none());
    }

    #[test]
    fn verifier_rejects_tampered_certificates() {
        let fan = starred_square();
        let base = square_cone_fan().cone(&rs(&[0, 1, 2, 3])).unwrap().clone();
        let q = quadruple(fan, &[0, 4], &[1]);
        let psi = find_good_sorting_function(&base, &q).unwrap().unwrap();

        let mut negated = psi.clone();
        for u in negated.pieces.values_mut() {
            for x in u.iter_mut() {
                *x = -x.clone();
            }
        }
        assert!(verify_good_sorting_function(&base, &q, &negated).is_err());

        let mut missing = psi.clone();
        let first = missing.pieces.keys().next().unwrap().clone();
        missing.pieces.remove(&first);
        assert!(verify_good_sorting_function(&base, &q, &missing).is_err());

        let mut broken = psi;
        broken.pieces.insert(rs(&[0, 1, 4]), vec![rint(7), rint(0), rint(0)]);
        assert!(verify_good_sorting_function(&base, &q, &broken).is_err());
    }

    #[test]
    fn identity_subdivision_is_locally_convex() {
        let t = square_cone();
        let map = subdivision_map(&t.fan, &t.fan).unwrap();
        let q = t.to_quadruple();
        let certs = is_locally_convex(&map, &q).unwrap().unwrap();
        assert_eq!(certs.len(), 1);
        let cert = certs.get(&rs(&[0, 1, 2, 3])).unwrap();
        verify_good_sorting_function(&cert.base, &q, cert).unwrap();
    }

    #[test]
    fn interior_star_with_new_marked_ray_is_locally_convex() {
        let starred = starred_square();
        let map = subdivision_map(&starred, &square_cone_fan()).unwrap();
        let q = quadruple(starred, &[4], &[]);
        let certs = is_locally_convex(&map, &q).unwrap().unwrap();
        let cert = certs.get(&rs(&[0, 1, 2, 3])).unwrap();
        assert!(pair(cert.pieces.get(&rs(&[0, 1, 4])).unwrap(), &ivec(&[1, 1, 2])).is_positive());
    }

    #[test]
    fn sequential_star_respects_order_and_certifies_good_orders() {
        let q = square_cone().to_quadruple();
        let chain = sequential_star(&q, &rs(&[0, 1]), &Order::new(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(chain.steps.len(), 2);
        assert_eq!(chain.steps[0].ray, ivec(&[0, 0, 1]));
        assert_eq!(chain.steps[1].ray, ivec(&[1, 0, 1]));
        assert_eq!(chain.steps[1].before, chain.steps[1].after);
        let verdict = is_sequentially_convex(&chain).unwrap();
        assert!(verdict.convex);
        assert_eq!(verdict.per_step.len(), 2);
        assert_eq!(verdict.per_step[0].len(), square_cone_fan().cones().len());
    }

    #[test]
    fn reversed_order_fails_sequential_convexity() {
        let q = square_cone().to_quadruple();
        let chain = sequential_star(&q, &rs(&[0, 1]), &Order::new(vec![0, 1]).unwrap()).unwrap();
        let verdict = is_sequentially_convex(&chain).unwrap();
        assert!(!verdict.convex);
        assert_eq!(verdict.failing_step, Some(0));
    }

    #[test]
    fn well_sorted_input_is_sequentially_convex_in_any_order() {
        let q = quadrant().to_quadruple();
        for order in [vec![0, 1], vec![1, 0]] {
            let chain = sequential_star(&q, &rs(&[0, 1]), &Order::new(order).unwrap()).unwrap();
            assert!(is_sequentially_convex(&chain).unwrap().convex);
        }
    }

    #[test]
    fn sequential_star_validates_inputs() {
        let q = square_cone().to_quadruple();
        assert!(sequential_star(&q, &rs(&[0, 2]), &Order::new(vec![0, 2]).unwrap()).is_err());
        assert!(sequential_star(&q, &rs(&[0, 1]), &Order::new(vec![0]).unwrap()).is_err());
        let empty = sequential_star(&q, &RaySet::new(), &Order::new(vec![]).unwrap()).unwrap();
        assert!(empty.steps.is_empty());
    }

    #[test]
    fn resolve_square_cone_stars_at_the_last_marked_ray() {
        let chain =
            resolve_log_simplicial(&square_cone(), &Order::new(vec![1, 0]).unwrap()).unwrap();
        assert_eq!(chain.steps.len(), 1);
        assert_eq!(chain.steps[0].kind, StepKind::Star);
        assert_eq!(chain.steps[0].ray, ivec(&[0, 0, 1]));
        let expected = star_subdivision(&square_cone_fan(), &ivec(&[0, 0, 1])).unwrap();
        assert_eq!(*chain.final_fan(), expected);
        let step = &chain.steps[0];
        let cert = step.certificates.get(&rs(&[0, 1, 2, 3])).unwrap();
        verify_good_sorting_function(&cert.base, &step.induced, cert).unwrap();
    }

    #[test]
    fn resolve_rejects_bad_orders() {
        let t = square_cone();
        assert!(matches!(
            resolve_log_simplicial(&t, &Order::new(vec![0, 1]).unwrap()),
            Err(Error::BadResolutionOrder)
        ));
        assert!(matches!(
            resolve_log_simplicial(&t, &Order::new(vec![1]).unwrap()),
            Err(Error::BadResolutionOrder)
        ));
    }

    #[test]
    fn resolve_is_empty_on_log_simplicial_input() {
        assert!(is_log_simplicial(&quadrant()));
        let chain = resolve_log_simplicial(&quadrant(), &Order::new(vec![1, 0]).unwrap()).unwrap();
        assert!(chain.steps.is_empty());
        assert_eq!(*chain.final_fan(), quadrant().fan);
    }

    #[test]
    fn resolve_without_marked_b_rays_extends_the_spine() {
        let t = FanTriple::new(square_cone_fan(), RaySet::new(), rs(&[1, 3])).unwrap();
        for order in [vec![1, 3], vec![3, 1]] {
            let chain = resolve_log_simplicial(&t, &Order::new(order).unwrap()).unwrap();
            assert_eq!(chain.steps.len(), 2);
            assert!(chain.steps.iter().all(|s| s.kind == StepKind::Ext));
            let expected = Fan::new(
                3,
                square_cone_fan().rays().to_vec(),
                vec![rs(&[0, 1, 2]), rs(&[0, 2, 3])],
            )
            .unwrap();
            assert_eq!(*chain.final_fan(), expected);
            for step in &chain.steps {
                for cert in step.certificates.values() {
                    verify_good_sorting_function(&cert.base, &step.induced, cert).unwrap();
                }
            }
        }
    }

    #[test]
    fn resolve_six_ray_cone_is_simplicial() {
        let chain =
            resolve_log_simplicial(&six_ray(), &Order::new(vec![3, 4, 5, 0, 1, 2]).unwrap())
                .unwrap();
        assert_eq!(chain.steps.len(), 1);
        assert_eq!(chain.steps[0].ray, ivec(&[-1, 0, 0, 1]));
        let final_fan = chain.final_fan();
        assert_eq!(final_fan.maximal_cones().len(), 4);
        for mc in final_fan.maximal_cones() {
            assert!(final_fan.cone(mc).unwrap().is_simplicial());
        }
    }

    fn restrict_fan_to_face(fan: &Fan, face: &Cone) -> Fan {
        let inside: Vec<RaySet> = fan
            .cones()
            .iter()
            .filter(|rayset| face.contains_cone(fan.cone(rayset).unwrap()))
            .cloned()
            .collect();
        let maximal: Vec<RaySet> = inside
            .iter()
            .filter(|rayset| {
                !inside
                    .iter()
                    .any(|other| *rayset != other && rayset.is_subset(other))
            })
            .cloned()
            .collect();
        fan_from_raysets(fan.ambient_rank(), fan.rays(), &maximal)
            .unwrap()
            .0
    }

    #[test]
    fn resolution_restricts_canonically_to_faces() {
        let cases = [
            (square_cone(), Order::new(vec![1, 0]).unwrap()),
            (
                FanTriple::new(square_cone_fan(), RaySet::new(), rs(&[1, 3])).unwrap(),
                Order::new(vec![1, 3]).unwrap(),
            ),
        ];
        for (t, order) in cases {
            let whole = resolve_log_simplicial(&t, &order).unwrap();
            for xi in t.fan.cones() {
                let restricted = t.restrict(xi).unwrap();
                let xs: Vec<usize> = xi.iter().copied().collect();
                let sub_order = Order::new(
                    order
                        .as_slice()
                        .iter()
                        .filter(|i| xi.contains(*i))
                        .map(|i| xs.iter().position(|j| j == i).unwrap())
                        .collect(),
                )
                .unwrap();
                let sub_chain = resolve_log_simplicial(&restricted, &sub_order).unwrap();
                let face = t.fan.cone(xi).unwrap();
                let expected = restrict_fan_to_face(whole.final_fan(), face);
                assert_eq!(*sub_chain.final_fan(), expected);
            }
        }
    }

    #[test]
    fn separating_ray_splits_both_square_fixtures() {
        for t in [square_cone_split(), square_cone()] {
            let (nu, b_plus, c_plus) = find_separating_ray(&t).unwrap();
            assert_eq!(nu, ivec(&[1, 1, 2]));
            assert_eq!(b_plus, rs(&[0, 2]));
            assert_eq!(c_plus, rs(&[1, 3]));
        }
    }

    #[test]
    fn separating_ray_rejects_sorted_and_oversized_inputs() {
        assert!(matches!(
            find_separating_ray(&quadrant()),
            Err(Error::WellSortedInput)
        ));
        assert!(matches!(
            find_separating_ray(&six_ray()),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn composite_certificate_combines_two_stars() {
        let base = square_cone_fan().cone(&rs(&[0, 1, 2, 3])).unwrap().clone();
        let mid = starred_square();
        let fine = star_subdivision(&mid, &ivec(&[1, 0, 2])).unwrap();
        assert_eq!(fine.maximal_cones().len(), 5);
        let mid_q = quadruple(mid.clone(), &[4], &[]);
        let fine_q = quadruple(fine, &[4, 5], &[]);
        let psi0 = find_good_sorting_function(&base, &mid_q).unwrap().unwrap();
        let psi1 = glued_good_sorting_function(&mid, &fine_q).unwrap().unwrap();
        let direct = find_good_sorting_function(&base, &fine_q).unwrap().unwrap();
        verify_good_sorting_function(&base, &fine_q, &direct).unwrap();
        let (eps, witness) = composition_witness(&base, &psi0, &mid, &psi1, &fine_q).unwrap();
        assert!(eps.is_positive());
        verify_good_sorting_function(&base, &fine_q, &witness).unwrap();
    }

    #[test]
    fn star_witness_vanishes_on_the_starred_ray() {
        let q = quadruple(square_cone_fan(), &[], &[0, 1]);
        let (alpha, witness) = star_at_c_witness(&q, &ivec(&[1, 0, 1])).unwrap().unwrap();
        assert!(alpha.is_positive());
        let far = witness.pieces.get(&rs(&[1, 2, 3])).unwrap();
        assert!(far.iter().all(|x| x.is_zero()));
        let near = witness.pieces.get(&rs(&[0, 1, 3])).unwrap();
        assert_eq!(*near, vec![rint(1), rint(1), rint(-1)]);
    }

    #[test]
    fn star_witness_is_none_without_strict_functions() {
        let q = square_cone().to_quadruple();
        assert!(star_at_c_witness(&q, &ivec(&[1, 0, 1])).unwrap().is_none());
    }
}
