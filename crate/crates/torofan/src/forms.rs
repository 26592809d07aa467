//! Danilov-style modules of logarithmic differential forms on toric charts.
//!
//! The central object is the map `phi` assigning to every cone of a decorated
//! fan a linear subspace of `V = M_Q`; exterior powers of its values are the
//! graded pieces of the form modules. On top of it sit Hilbert tables, the
//! degree-preserving de Rham differential, and exact degreewise verifiers for
//! the reflexive-intersection, pushforward, and divisor-restriction
//! identities.

use crate::cone::{
    box_window, dot, dual_cone, lattice_points_window, primitive_int, Cone, IVec,
};
use crate::fan::{
    smallest_containing_cone, subdivision_map, xi_face, Fan, FanTriple, RaySet, TorusDivisor,
};
use crate::linalg::{
    binomial, m_wedge_matrix, mat_apply, subspace_intersect, to_rat_vec, wedge_power, Int, Rat,
    Subspace,
};
use crate::{Error, Result};
use itertools::Itertools;
use num::{Integer, One, Signed, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// A module of logarithmic `p`-forms on an affine chart, optionally twisted
/// by an integral torus-invariant divisor.
#[derive(Clone, Debug)]
pub struct FormSpec {
    pub triple: FanTriple,
    pub p: usize,
    pub twist: Option<TorusDivisor>,
}

impl FormSpec {
    pub fn untwisted(triple: FanTriple, p: usize) -> FormSpec {
        FormSpec { triple, p, twist: None }
    }

    pub fn twisted(triple: FanTriple, p: usize, twist: TorusDivisor) -> FormSpec {
        FormSpec { triple, p, twist: Some(twist) }
    }
}

/// The weight-`degree` component of a form module: a subspace of the `p`-th
/// exterior power of `V` in lexicographic wedge coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPiece {
    pub degree: IVec,
    pub value: Subspace,
}

/// Dimensions of the graded pieces over a degree window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertTable {
    pub bound: i64,
    pub dims: BTreeMap<IVec, usize>,
}

/// Outcome of a degreewise or cone-wise identity check: violated hypotheses
/// and failed identities are listed separately so a failed precondition does
/// not mask the identities themselves.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub hypothesis_failures: Vec<String>,
    pub mismatches: Vec<String>,
    pub checks: usize,
}

impl VerifyReport {
    /// Every hypothesis holds and every identity checked out.
    pub fn holds(&self) -> bool {
        self.hypothesis_failures.is_empty() && self.mismatches.is_empty()
    }

    /// The identities checked out, whatever the hypotheses did.
    pub fn identities_hold(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Which of the two divisor short exact sequences to check: moving the
/// divisor onto the !-side or onto the *-side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SesMode {
    AddB,
    AddC,
}

/// The decorated fan of a torus-invariant divisor inside the quotient
/// lattice, together with the projection used to build it.
#[derive(Clone, Debug)]
pub struct DivisorChart {
    /// Index of the divisor's ray in the ambient fan.
    pub xi: usize,
    /// The induced triple on the quotient fan.
    pub triple: FanTriple,
    /// Rows of a projection `N -> Z^(n-1)` whose kernel is the saturated
    /// span of the divisor's ray.
    pub projection: Vec<IVec>,
    /// For each quotient ray, the ambient ray spanning a two-dimensional
    /// cone with `xi` that maps onto it.
    pub ray_sources: Vec<usize>,
}

fn fmt_ray(v: &IVec) -> String {
    format!("({})", v.iter().join(", "))
}

fn fmt_degree(m: &IVec) -> String {
    format!("[{}]", m.iter().join(", "))
}

fn affine_cone(t: &FanTriple) -> Result<&Cone> {
    let mcs = t.fan.maximal_cones();
    if mcs.len() != 1 {
        return Err(Error::Unsupported("form computations require an affine fan".into()));
    }
    t.fan.cone(&mcs[0])
}

/// Span of the generators of `sigma` annihilating `nu`: the linear span of
/// the dual face of the ray through `nu`.
fn v_ray_star(sigma: &Cone, nu: &IVec) -> Subspace {
    let gens: Vec<IVec> =
        sigma.generators().into_iter().filter(|g| dot(g, nu).is_zero()).collect();
    Subspace::span_int(sigma.ambient_rank(), &gens)
}

/// The subspace of `V = M_Q` attached to a cone of a decorated fan: zero on
/// the star closure of the !-rays, and otherwise the intersection of the
/// dual-face spans of the undecorated ray faces.
pub fn phi(t: &FanTriple, zeta: &RaySet) -> Result<Subspace> {
    let n = t.fan.ambient_rank();
    t.fan.cone(zeta)?;
    if !zeta.is_disjoint(&t.b_rays) {
        return Ok(Subspace::zero(n));
    }
    let a_rays = t.a_rays();
    let chart = t
        .fan
        .maximal_cones()
        .iter()
        .find(|mc| zeta.is_subset(mc))
        .expect("every cone of a fan lies in a maximal cone");
    let sigma = dual_cone(t.fan.cone(chart)?);
    let mut w = Subspace::full(n);
    for &i in zeta {
        if a_rays.contains(&i) {
            w = subspace_intersect(&w, &v_ray_star(&sigma, &t.fan.rays()[i]))?;
        }
    }
    Ok(w)
}

/// Per-chart state reused across degree sweeps: the dual-face spans of all
/// rays, computed once.
pub(crate) struct PieceCtx {
    t: FanTriple,
    n: usize,
    vstars: Vec<Subspace>,
}

impl PieceCtx {
    pub(crate) fn new(t: &FanTriple) -> Result<PieceCtx> {
        let sigma = dual_cone(affine_cone(t)?);
        let vstars = t.fan.rays().iter().map(|r| v_ray_star(&sigma, r)).collect();
        Ok(PieceCtx { t: t.clone(), n: t.fan.ambient_rank(), vstars })
    }

    /// Signs of the facet pairings `t_i = <m, nu_i> + a_i`, one per ray.
    pub(crate) fn signs(&self, twist: Option<&TorusDivisor>, m: &IVec) -> Vec<i8> {
        self.t
            .fan
            .rays()
            .iter()
            .enumerate()
            .map(|(i, ray)| {
                let mut tv = Rat::from(dot(m, ray));
                if let Some(l) = twist {
                    tv += &l.coeffs[i];
                }
                if tv.is_negative() {
                    -1
                } else {
                    i8::from(!tv.is_zero())
                }
            })
            .collect()
    }

    /// The graded piece at `m` by the facet rules: a facet pairing of `t < 0`
    /// (or `t = 0` on a !-ray) kills the piece, and every undecorated facet
    /// with `t = 0` contributes its dual-face span as a linear constraint.
    pub(crate) fn piece(
        &self,
        p: usize,
        twist: Option<&TorusDivisor>,
        m: &IVec,
    ) -> Result<Subspace> {
        self.piece_from_signs(p, &self.signs(twist, m))
    }

    /// The graded piece determined by a vector of facet-pairing signs; the
    /// value only depends on the signs, which is what makes chamber
    /// decompositions exact.
    pub(crate) fn piece_from_signs(&self, p: usize, signs: &[i8]) -> Result<Subspace> {
        if p > self.n {
            return Ok(Subspace::zero(0));
        }
        let amb = binomial(self.n, p);
        let mut w = Subspace::full(self.n);
        for (i, s) in signs.iter().enumerate() {
            if *s < 0 || (*s == 0 && self.t.b_rays.contains(&i)) {
                return Ok(Subspace::zero(amb));
            }
            if *s == 0 && !self.t.b_rays.contains(&i) && !self.t.c_rays.contains(&i) {
                w = subspace_intersect(&w, &self.vstars[i])?;
            }
        }
        wedge_power(&w, p)
    }
}

fn check_degree(n: usize, p: usize, m: &IVec) -> Result<()> {
    if p > n {
        return Err(Error::WedgeOutOfRange { p, n });
    }
    if m.len() != n {
        return Err(Error::AmbientMismatch(m.len(), n));
    }
    Ok(())
}

fn check_twist(t: &FanTriple, l: &TorusDivisor) -> Result<()> {
    if l.coeffs.len() != t.fan.rays().len() {
        return Err(Error::Invalid(
            "the twisting divisor must assign one coefficient per ray".into(),
        ));
    }
    if !l.is_integral() {
        return Err(Error::NonIntegralTwist);
    }
    Ok(())
}

/// The weight-`m` piece of the untwisted form module: zero unless `m` lies in
/// the dual cone off the !-facets, and otherwise the `p`-th exterior power of
/// `phi` at the face of the chart cone annihilated by `m`.
pub fn graded_piece(s: &FormSpec, m: &IVec) -> Result<GradedPiece> {
    if s.twist.is_some() {
        return Err(Error::Invalid(
            "the spec carries a twisting divisor; use the twisted graded piece".into(),
        ));
    }
    let n = s.triple.fan.ambient_rank();
    check_degree(n, s.p, m)?;
    affine_cone(&s.triple)?;
    let pairings: Vec<Int> = s.triple.fan.rays().iter().map(|r| dot(m, r)).collect();
    let admissible = pairings.iter().all(|x| !x.is_negative())
        && s.triple.b_rays.iter().all(|&b| pairings[b].is_positive());
    if !admissible {
        return Ok(GradedPiece { degree: m.clone(), value: Subspace::zero(binomial(n, s.p)) });
    }
    let gamma_star: RaySet = (0..pairings.len()).filter(|&i| pairings[i].is_zero()).collect();
    let value = wedge_power(&phi(&s.triple, &gamma_star)?, s.p)?;
    Ok(GradedPiece { degree: m.clone(), value })
}

/// The weight-`m` piece of the reflexive hull of the form module twisted by
/// the spec's integral divisor, by the facet rules.
pub fn twisted_graded_piece(s: &FormSpec, m: &IVec) -> Result<GradedPiece> {
    let l = s.twist.as_ref().ok_or_else(|| {
        Error::Invalid("the spec carries no twisting divisor; use the plain graded piece".into())
    })?;
    let n = s.triple.fan.ambient_rank();
    check_degree(n, s.p, m)?;
    check_twist(&s.triple, l)?;
    let ctx = PieceCtx::new(&s.triple)?;
    Ok(GradedPiece { degree: m.clone(), value: ctx.piece(s.p, Some(l), m)? })
}

/// Piece dimensions over a degree window: the chart's dual cone window for
/// untwisted specs, the full coordinate box for twisted ones.
pub fn hilbert_table(s: &FormSpec, bound: i64) -> Result<HilbertTable> {
    let n = s.triple.fan.ambient_rank();
    if s.p > n {
        return Err(Error::WedgeOutOfRange { p: s.p, n });
    }
    if let Some(l) = &s.twist {
        check_twist(&s.triple, l)?;
    }
    let ctx = PieceCtx::new(&s.triple)?;
    let window = match &s.twist {
        Some(_) => box_window(n, bound),
        None => lattice_points_window(&dual_cone(affine_cone(&s.triple)?), bound),
    };
    let dims = window
        .par_iter()
        .map(|m| Ok((m.clone(), ctx.piece(s.p, s.twist.as_ref(), m)?.dim())))
        .collect::<Result<Vec<_>>>()?;
    Ok(HilbertTable { bound, dims: dims.into_iter().collect() })
}

/// The degree-`m` component of the de Rham differential, as a matrix from
/// the canonical basis of the `p`-piece to that of the `(p+1)`-piece.
pub fn de_rham_differential(s: &FormSpec, m: &IVec) -> Result<Vec<Vec<Rat>>> {
    let n = s.triple.fan.ambient_rank();
    check_degree(n, s.p, m)?;
    if let Some(l) = &s.twist {
        check_twist(&s.triple, l)?;
    }
    let ctx = PieceCtx::new(&s.triple)?;
    let source = ctx.piece(s.p, s.twist.as_ref(), m)?;
    let target = ctx.piece(s.p + 1, s.twist.as_ref(), m)?;
    let mult = m_wedge_matrix(&to_rat_vec(m), n, s.p);
    let mut columns = Vec::with_capacity(source.dim());
    for v in source.basis() {
        let image = mat_apply(&mult, v);
        let coords =
            target.coords_of(&image).ok_or_else(|| Error::EscapesPiece(m.clone()))?;
        columns.push(coords);
    }
    Ok((0..target.dim()).map(|r| columns.iter().map(|c| c[r].clone()).collect()).collect())
}

/// Checks degreewise that the form module is the intersection, inside the
/// exterior power, of its half-space localizations: one single-ray chart per
/// ray of the chart cone, decorated by restriction.
pub fn verify_reflexive_intersection(s: &FormSpec, bound: i64) -> Result<VerifyReport> {
    if s.twist.is_some() {
        return Err(Error::Invalid(
            "the reflexive intersection is stated for untwisted specs".into(),
        ));
    }
    let t = &s.triple;
    let n = t.fan.ambient_rank();
    if s.p > n {
        return Err(Error::WedgeOutOfRange { p: s.p, n });
    }
    if affine_cone(t)?.dim() != n {
        return Err(Error::Unsupported(
            "the reflexive intersection requires a full-dimensional cone".into(),
        ));
    }
    let charts: Vec<FanTriple> = t
        .fan
        .rays()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let fan = Fan::new(n, vec![r.clone()], vec![std::iter::once(0).collect()])?;
            let pick = |set: &RaySet| -> RaySet {
                if set.contains(&i) {
                    std::iter::once(0).collect()
                } else {
                    RaySet::new()
                }
            };
            FanTriple::new(fan, pick(&t.b_rays), pick(&t.c_rays))
        })
        .collect::<Result<_>>()?;
    let base = PieceCtx::new(t)?;
    let ctxs: Vec<PieceCtx> = charts.iter().map(PieceCtx::new).collect::<Result<_>>()?;
    let window = box_window(n, bound);
    let rows = window
        .par_iter()
        .map(|m| {
            let lhs = base.piece(s.p, None, m)?;
            let mut rhs = Subspace::full(binomial(n, s.p));
            for ctx in &ctxs {
                rhs = subspace_intersect(&rhs, &ctx.piece(s.p, None, m)?)?;
            }
            Ok((lhs != rhs).then(|| {
                format!(
                    "degree {}: dimension {} differs from the half-space intersection {}",
                    fmt_degree(m),
                    lhs.dim(),
                    rhs.dim()
                )
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        hypothesis_failures: Vec::new(),
        mismatches: rows.into_iter().flatten().collect(),
        checks: window.len(),
    })
}

fn image_cone(base: &Fan, v: &IVec) -> Result<RaySet> {
    smallest_containing_cone(
        base,
        &Cone::from_generators(base.ambient_rank(), std::slice::from_ref(v)),
    )
}

/// Checks that the form module of a decorated subdivision pushes forward to
/// the base module: the four decoration hypotheses, the degreewise identity
/// over the window, and the cone-wise identity for `phi`.
pub fn verify_pushforward(
    t: &FanTriple,
    model: &FanTriple,
    p: usize,
    bound: i64,
) -> Result<VerifyReport> {
    let n = t.fan.ambient_rank();
    if model.fan.ambient_rank() != n {
        return Err(Error::AmbientMismatch(model.fan.ambient_rank(), n));
    }
    if p > n {
        return Err(Error::WedgeOutOfRange { p, n });
    }
    affine_cone(t)?;
    subdivision_map(&model.fan, &t.fan)?;
    let mut hypothesis_failures = Vec::new();
    for &i in &model.b_rays {
        let v = &model.fan.rays()[i];
        if image_cone(&t.fan, v)?.is_disjoint(&t.b_rays) {
            hypothesis_failures
                .push(format!("!-ray {} of the subdivision does not lie over the !-locus", fmt_ray(v)));
        }
    }
    for &i in &model.c_rays {
        let v = &model.fan.rays()[i];
        let over = image_cone(&t.fan, v)?;
        if t.fan.dim_of(&over)? == 1 && over.is_disjoint(&t.c_rays) {
            hypothesis_failures.push(format!(
                "*-ray {} of the subdivision is neither exceptional nor a *-ray of the base",
                fmt_ray(v)
            ));
        }
    }
    for &b in &t.b_rays {
        let v = &t.fan.rays()[b];
        let dominated = model.fan.ray_index(v).is_some_and(|j| model.b_rays.contains(&j));
        if !dominated {
            hypothesis_failures.push(format!(
                "!-ray {} of the base has no dominating !-ray in the subdivision",
                fmt_ray(v)
            ));
        }
    }
    for (i, v) in model.fan.rays().iter().enumerate() {
        let over = image_cone(&t.fan, v)?;
        if !over.is_disjoint(&t.c_rays)
            && over.is_disjoint(&t.b_rays)
            && !model.c_rays.contains(&i)
        {
            hypothesis_failures.push(format!(
                "ray {} lies over the *-locus away from the !-locus but is not *-decorated",
                fmt_ray(v)
            ));
        }
    }

    let charts: Vec<FanTriple> =
        model.fan.maximal_cones().iter().map(|mc| model.restrict(mc)).collect::<Result<_>>()?;
    let base = PieceCtx::new(t)?;
    let ctxs: Vec<PieceCtx> = charts.iter().map(PieceCtx::new).collect::<Result<_>>()?;
    let window = box_window(n, bound);
    let degree_rows = window
        .par_iter()
        .map(|m| {
            let lhs = base.piece(p, None, m)?;
            let mut rhs = Subspace::full(binomial(n, p));
            for ctx in &ctxs {
                rhs = subspace_intersect(&rhs, &ctx.piece(p, None, m)?)?;
            }
            Ok((lhs != rhs).then(|| {
                format!(
                    "degree {}: dimension {} differs from the chart intersection {}",
                    fmt_degree(m),
                    lhs.dim(),
                    rhs.dim()
                )
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut mismatches: Vec<String> = degree_rows.into_iter().flatten().collect();
    let mut checks = window.len();

    for zeta in t.fan.cones() {
        checks += 1;
        let lhs = phi(t, zeta)?;
        let zc = t.fan.cone(zeta)?;
        let mut rhs = Subspace::full(n);
        for (mc, chart) in model.fan.maximal_cones().iter().zip(&charts) {
            let global = xi_face(&model.fan, mc, zc);
            let order: Vec<usize> = mc.iter().copied().collect();
            let local: RaySet = global
                .iter()
                .map(|g| order.iter().position(|x| x == g).expect("ray of the chart"))
                .collect();
            rhs = subspace_intersect(&rhs, &phi(chart, &local)?)?;
        }
        if lhs != rhs {
            mismatches.push(format!(
                "cone {:?}: dimension {} differs from the chart intersection {}",
                zeta,
                lhs.dim(),
                rhs.dim()
            ));
        }
    }
    Ok(VerifyReport { hypothesis_failures, mismatches, checks })
}

/// Rows of an integer projection `Z^n -> Z^(n-1)` that is surjective with
/// kernel exactly the integer span of the primitive vector `xi`.
fn unimodular_complement(xi: &IVec) -> Result<Vec<IVec>> {
    let n = xi.len();
    let mut rows: Vec<IVec> = (0..n)
        .map(|i| {
            let mut r = vec![Int::zero(); n];
            r[i] = Int::one();
            r
        })
        .collect();
    let mut v = xi.clone();
    for i in 1..n {
        if v[i].is_zero() {
            continue;
        }
        let e = v[0].extended_gcd(&v[i]);
        let (q0, qi) = (&v[0] / &e.gcd, &v[i] / &e.gcd);
        let r0: IVec = (0..n).map(|k| &e.x * &rows[0][k] + &e.y * &rows[i][k]).collect();
        let ri: IVec = (0..n).map(|k| &q0 * &rows[i][k] - &qi * &rows[0][k]).collect();
        rows[0] = r0;
        rows[i] = ri;
        v[0] = e.gcd;
        v[i] = Int::zero();
    }
    if !v[0].abs().is_one() {
        return Err(Error::Invalid("the ray is not primitive".into()));
    }
    Ok(rows.split_off(1))
}

/// The decorated quotient fan of the divisor at ray `xi`: rays come from the
/// two-dimensional cones through `xi`, maximal cones from the maximal cones
/// containing `xi`, and decorations restrict along the ray sources.
pub fn divisor_restriction(t: &FanTriple, xi: usize) -> Result<DivisorChart> {
    let fan = &t.fan;
    let n = fan.ambient_rank();
    if xi >= fan.rays().len() {
        return Err(Error::Invalid("the divisor index references a missing ray".into()));
    }
    let projection = unimodular_complement(&fan.rays()[xi])?;
    let ray_sources: Vec<usize> = fan
        .cones()
        .iter()
        .filter(|rs| rs.len() == 2 && rs.contains(&xi))
        .map(|rs| *rs.iter().find(|&&r| r != xi).expect("second ray of a surface cone"))
        .sorted_unstable()
        .collect();
    let qrays: Vec<IVec> = ray_sources
        .iter()
        .map(|&s| {
            let image: IVec = projection.iter().map(|row| dot(row, &fan.rays()[s])).collect();
            primitive_int(&image).expect("a ray independent of the divisor ray")
        })
        .collect();
    let qindex: BTreeMap<usize, usize> =
        ray_sources.iter().enumerate().map(|(q, &s)| (s, q)).collect();
    let qmax: Vec<RaySet> = fan
        .maximal_cones()
        .iter()
        .filter(|mc| mc.contains(&xi))
        .map(|mc| mc.iter().filter_map(|r| qindex.get(r).copied()).collect())
        .collect();
    let qfan = Fan::new(n - 1, qrays, qmax)?;
    let pick = |set: &RaySet| -> RaySet {
        ray_sources
            .iter()
            .enumerate()
            .filter(|(_, s)| set.contains(s))
            .map(|(q, _)| q)
            .collect()
    };
    let triple = FanTriple::new(qfan, pick(&t.b_rays), pick(&t.c_rays))?;
    Ok(DivisorChart { xi, triple, projection, ray_sources })
}

/// Rayset of the smallest fan cone containing all rays of `set`, if any cone
/// does; fans are closed under intersection, so the minimum is unique.
fn minimal_cone_over(fan: &Fan, set: &RaySet) -> Option<RaySet> {
    fan.cones().iter().filter(|rs| set.is_subset(rs)).fold(None, |acc, rs| match acc {
        None => Some(rs.clone()),
        Some(cur) => Some(cur.intersection(rs).copied().collect()),
    })
}

/// Checks the hypotheses and the key identity behind the divisor short exact
/// sequences at an undecorated ray: restriction of `phi` to the divisor chart
/// for [`SesMode::AddB`], the dimension step of moving the divisor to the
/// *-side for [`SesMode::AddC`]. Identities are checked on every cone
/// containing `xi` and disjoint from the !-rays, whatever the hypotheses did.
pub fn verify_phi_ses_identities(
    t: &FanTriple,
    xi: usize,
    mode: SesMode,
) -> Result<VerifyReport> {
    let fan = &t.fan;
    let n = fan.ambient_rank();
    if xi >= fan.rays().len() {
        return Err(Error::Invalid("the divisor index references a missing ray".into()));
    }
    let a_rays = t.a_rays();
    if !a_rays.contains(&xi) {
        return Err(Error::Invalid("the chosen divisor ray must be undecorated".into()));
    }

    let mut hypothesis_failures = Vec::new();
    for &nu in t.b_rays.iter().chain(&t.c_rays) {
        let pair: RaySet = [nu, xi].into_iter().collect();
        if let Some(min) = minimal_cone_over(fan, &pair) {
            if fan.dim_of(&min)? != 2 {
                let side = if t.b_rays.contains(&nu) { "!" } else { "*" };
                hypothesis_failures.push(format!(
                    "{side}-ray {} meets the divisor in codimension at least two",
                    fmt_ray(&fan.rays()[nu])
                ));
            }
        }
    }
    match mode {
        SesMode::AddB => {
            for iota in 0..fan.rays().len() {
                if iota == xi {
                    continue;
                }
                let pair: RaySet = [iota, xi].into_iter().collect();
                let over: Vec<&RaySet> =
                    fan.cones().iter().filter(|rs| pair.is_subset(rs)).collect();
                if over.is_empty() {
                    continue;
                }
                let inside_c = over.iter().all(|rs| !rs.is_disjoint(&t.c_rays));
                let inside_b = over.iter().all(|rs| !rs.is_disjoint(&t.b_rays));
                if inside_c && !inside_b && !t.c_rays.contains(&iota) {
                    hypothesis_failures.push(format!(
                        "ray {} meets the divisor inside the *-locus but is not *-decorated",
                        fmt_ray(&fan.rays()[iota])
                    ));
                }
            }
        }
        SesMode::AddC => {
            let others: Vec<usize> = a_rays.iter().copied().filter(|&r| r != xi).collect();
            for size in 1..=others.len() {
                for combo in others.iter().copied().combinations(size) {
                    let set: RaySet = combo.into_iter().collect();
                    let Some(min) = minimal_cone_over(fan, &set) else { continue };
                    if !min.contains(&xi) {
                        continue;
                    }
                    let maximal = others.iter().all(|&r| {
                        let mut bigger = set.clone();
                        bigger.insert(r);
                        set.contains(&r) || minimal_cone_over(fan, &bigger).is_none()
                    });
                    let reading = if maximal {
                        "the failure occurs under both readings"
                    } else {
                        "the failure depends on the all-intersections reading"
                    };
                    let names = set.iter().map(|&r| fmt_ray(&fan.rays()[r])).join(", ");
                    hypothesis_failures.push(format!(
                        "the undecorated intersection at {names} lies inside the divisor; {reading}"
                    ));
                }
            }
        }
    }

    let mut mismatches = Vec::new();
    let mut checks = 0usize;
    let eligible: Vec<&RaySet> = fan
        .cones()
        .iter()
        .filter(|rs| rs.contains(&xi) && rs.is_disjoint(&t.b_rays))
        .collect();
    match mode {
        SesMode::AddB => {
            let chart = divisor_restriction(t, xi)?;
            let qindex: BTreeMap<usize, usize> =
                chart.ray_sources.iter().enumerate().map(|(q, &s)| (s, q)).collect();
            for zeta in eligible {
                checks += 1;
                let lhs = phi(t, zeta)?;
                let down: RaySet = zeta.iter().filter_map(|r| qindex.get(r).copied()).collect();
                let reduced = phi(&chart.triple, &down)?;
                let lifted: Vec<Vec<Rat>> = reduced
                    .basis()
                    .iter()
                    .map(|w| {
                        (0..n)
                            .map(|k| {
                                chart
                                    .projection
                                    .iter()
                                    .zip(w)
                                    .fold(Rat::zero(), |acc, (row, c)| {
                                        acc + c * Rat::from(row[k].clone())
                                    })
                            })
                            .collect()
                    })
                    .collect();
                let rhs = Subspace::span(n, &lifted);
                if lhs != rhs {
                    mismatches.push(format!(
                        "cone {:?}: dimension {} differs from the divisor chart value {}",
                        zeta,
                        lhs.dim(),
                        rhs.dim()
                    ));
                }
            }
        }
        SesMode::AddC => {
            let mut c_plus = t.c_rays.clone();
            c_plus.insert(xi);
            let moved = FanTriple::new(fan.clone(), t.b_rays.clone(), c_plus)?;
            for zeta in eligible {
                checks += 1;
                let d0 = phi(t, zeta)?.dim();
                let d1 = phi(&moved, zeta)?.dim();
                if d1 != d0 + 1 {
                    mismatches.push(format!(
                        "cone {zeta:?}: dimension moves from {d0} to {d1} instead of rising by one"
                    ));
                }
            }
        }
    }
    Ok(VerifyReport { hypothesis_failures, mismatches, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{int_kernel, ivec};
    use crate::fan::fixtures::{
        quadrant, six_ray, square_cone, square_cone_fan, square_cone_split,
    };
    use crate::fan::Order;
    use crate::linalg::rint;
    use crate::subdivide::{induced_decorations, resolve_log_simplicial, star_subdivision};

    fn rs(xs: &[usize]) -> RaySet {
        xs.iter().copied().collect()
    }

    fn fixtures() -> Vec<FanTriple> {
        vec![quadrant(), square_cone(), square_cone_split(), six_ray()]
    }

    fn resolved_square_cone() -> FanTriple {
        let chain = resolve_log_simplicial(&square_cone(), &Order::new(vec![1, 0]).unwrap())
            .unwrap();
        chain.final_quadruple().triple().unwrap()
    }

    fn diagonal_model() -> FanTriple {
        let fan = Fan::new(
            3,
            square_cone_fan().rays().to_vec(),
            vec![rs(&[0, 1, 2]), rs(&[0, 2, 3])],
        )
        .unwrap();
        FanTriple::new(fan, rs(&[0]), rs(&[1])).unwrap()
    }

    fn line_fan(b: &[usize], c: &[usize]) -> FanTriple {
        let fan = Fan::new(1, vec![ivec(&[1])], vec![rs(&[0])]).unwrap();
        FanTriple::new(fan, rs(b), rs(c)).unwrap()
    }

    fn matmul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
        let cols = b.first().map_or(0, Vec::len);
        a.iter()
            .map(|row| {
                (0..cols)
                    .map(|j| {
                        row.iter()
                            .zip(b)
                            .fold(Rat::zero(), |acc, (x, brow)| acc + x * &brow[j])
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn phi_oracles_on_the_square_cone() {
        let t = square_cone();
        let n = 3;
        assert_eq!(phi(&t, &rs(&[])).unwrap(), Subspace::full(n));
        assert_eq!(phi(&t, &rs(&[0])).unwrap(), Subspace::zero(n));
        assert_eq!(phi(&t, &rs(&[1])).unwrap(), Subspace::full(n));
        let expected = Subspace::span_int(n, &[ivec(&[0, 1, -1])]);
        assert_eq!(phi(&t, &rs(&[2, 3])).unwrap(), expected);
        assert_eq!(phi(&t, &rs(&[0, 1, 2, 3])).unwrap(), Subspace::zero(n));
    }

    #[test]
    fn phi_rejects_raysets_outside_the_fan() {
        let t = square_cone();
        assert!(matches!(phi(&t, &rs(&[0, 2])), Err(Error::Invalid(_))));
    }

    #[test]
    fn phi_is_decreasing_on_all_fixtures() {
        for t in fixtures() {
            for small in t.fan.cones() {
                for big in t.fan.cones() {
                    if small.is_subset(big) {
                        let lo = phi(&t, small).unwrap();
                        let hi = phi(&t, big).unwrap();
                        assert!(lo.contains_subspace(&hi), "{small:?} < {big:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn phi_contains_the_dual_face_span_when_nonzero() {
        for t in fixtures() {
            let sigma = dual_cone(affine_cone(&t).unwrap());
            for zeta in t.fan.cones() {
                let value = phi(&t, zeta).unwrap();
                if value.is_zero() {
                    continue;
                }
                let orth: Vec<IVec> = sigma
                    .generators()
                    .into_iter()
                    .filter(|g| zeta.iter().all(|&r| dot(g, &t.fan.rays()[r]).is_zero()))
                    .collect();
                let span = Subspace::span_int(t.fan.ambient_rank(), &orth);
                assert!(value.contains_subspace(&span), "{zeta:?}");
            }
        }
    }

    #[test]
    fn phi_on_single_rays_is_the_ray_kernel() {
        for t in fixtures() {
            let n = t.fan.ambient_rank();
            for &i in &t.a_rays() {
                let kernel =
                    Subspace::span_int(n, &int_kernel(&[t.fan.rays()[i].clone()], n));
                assert_eq!(phi(&t, &rs(&[i])).unwrap(), kernel);
            }
        }
    }

    #[test]
    fn phi_commutes_with_face_restriction() {
        for t in fixtures() {
            for face in t.fan.cones() {
                let restricted = t.restrict(face).unwrap();
                let order: Vec<usize> = face.iter().copied().collect();
                for local in restricted.fan.cones() {
                    let global: RaySet = local.iter().map(|&l| order[l]).collect();
                    assert_eq!(
                        phi(&t, &global).unwrap(),
                        phi(&restricted, local).unwrap(),
                        "{face:?} / {local:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn phi_is_chart_independent_on_subdivided_fans() {
        let fan = star_subdivision(&square_cone_fan(), &ivec(&[1, 1, 2])).unwrap();
        let t = FanTriple::new(fan, rs(&[0]), rs(&[1])).unwrap();
        for zeta in t.fan.cones() {
            let value = phi(&t, zeta).unwrap();
            for mc in t.fan.maximal_cones() {
                if !zeta.is_subset(mc) {
                    continue;
                }
                let restricted = t.restrict(mc).unwrap();
                let order: Vec<usize> = mc.iter().copied().collect();
                let local: RaySet = zeta
                    .iter()
                    .map(|g| order.iter().position(|x| x == g).unwrap())
                    .collect();
                assert_eq!(value, phi(&restricted, &local).unwrap(), "{zeta:?} in {mc:?}");
            }
        }
    }

    #[test]
    fn graded_piece_oracles_on_the_square_cone() {
        let t = square_cone();
        for p in 0..=3 {
            let s = FormSpec::untwisted(t.clone(), p);
            let at_zero = graded_piece(&s, &ivec(&[0, 0, 0])).unwrap();
            assert_eq!(at_zero.value.dim(), 0, "p = {p}");
            let interior = graded_piece(&s, &ivec(&[0, 0, 1])).unwrap();
            assert_eq!(interior.value.dim(), binomial(3, p), "p = {p}");
        }
    }

    #[test]
    fn graded_piece_of_functions_is_the_admissible_indicator() {
        let t = square_cone();
        let s = FormSpec::untwisted(t.clone(), 0);
        for m in box_window(3, 2) {
            let in_sigma = t.fan.rays().iter().all(|r| !dot(&m, r).is_negative());
            let off_b = t.b_rays.iter().all(|&b| dot(&m, &t.fan.rays()[b]).is_positive());
            let expected = usize::from(in_sigma && off_b);
            assert_eq!(graded_piece(&s, &m).unwrap().value.dim(), expected, "{m:?}");
        }
    }

    #[test]
    fn graded_piece_checks_its_spec() {
        let t = square_cone();
        let twisted = FormSpec::twisted(t.clone(), 1, TorusDivisor::zero(4));
        assert!(matches!(graded_piece(&twisted, &ivec(&[0, 0, 1])), Err(Error::Invalid(_))));
        let plain = FormSpec::untwisted(t.clone(), 1);
        assert!(matches!(twisted_graded_piece(&plain, &ivec(&[0, 0, 1])), Err(Error::Invalid(_))));
        let deep = FormSpec::untwisted(t.clone(), 4);
        assert!(matches!(
            graded_piece(&deep, &ivec(&[0, 0, 1])),
            Err(Error::WedgeOutOfRange { p: 4, n: 3 })
        ));
        let mut fractional = TorusDivisor::zero(4);
        fractional.coeffs[0] = crate::linalg::rat(1, 2);
        let bad = FormSpec::twisted(t, 1, fractional);
        assert!(matches!(
            twisted_graded_piece(&bad, &ivec(&[0, 0, 1])),
            Err(Error::NonIntegralTwist)
        ));
    }

    #[test]
    fn zero_twist_reduces_to_the_plain_piece() {
        let t = square_cone();
        for p in 0..=3 {
            let plain = FormSpec::untwisted(t.clone(), p);
            let zeroed = FormSpec::twisted(t.clone(), p, TorusDivisor::zero(4));
            for m in box_window(3, 2) {
                assert_eq!(
                    graded_piece(&plain, &m).unwrap(),
                    twisted_graded_piece(&zeroed, &m).unwrap(),
                    "p = {p}, m = {m:?}"
                );
            }
        }
    }

    #[test]
    fn rank_one_twist_shifts_the_support() {
        let t = line_fan(&[0], &[]);
        let mut l = TorusDivisor::zero(1);
        l.coeffs[0] = rint(1);
        let s = FormSpec::twisted(t, 0, l);
        assert_eq!(twisted_graded_piece(&s, &ivec(&[-1])).unwrap().value.dim(), 0);
        for m in 0..3 {
            assert_eq!(twisted_graded_piece(&s, &ivec(&[m])).unwrap().value.dim(), 1);
        }
    }

    #[test]
    fn twisting_by_a_character_shifts_degrees() {
        let t = square_cone();
        let m0 = ivec(&[1, 0, 0]);
        let mut l = TorusDivisor::zero(4);
        l.coeffs[0] = rint(1);
        let mut shifted = l.clone();
        for (c, r) in shifted.coeffs.iter_mut().zip(t.fan.rays()) {
            *c += Rat::from(dot(&m0, r));
        }
        for p in 0..=3 {
            let base = FormSpec::twisted(t.clone(), p, l.clone());
            let moved = FormSpec::twisted(t.clone(), p, shifted.clone());
            for m in box_window(3, 2) {
                let sum: IVec = m.iter().zip(&m0).map(|(a, b)| a + b).collect();
                assert_eq!(
                    twisted_graded_piece(&moved, &m).unwrap().value,
                    twisted_graded_piece(&base, &sum).unwrap().value,
                    "p = {p}, m = {m:?}"
                );
            }
        }
    }

    #[test]
    fn hilbert_table_of_functions_is_the_cone_indicator() {
        let t = FanTriple::plain(square_cone_fan());
        let table = hilbert_table(&FormSpec::untwisted(t, 0), 2).unwrap();
        assert!(table.dims.values().all(|&d| d == 1));
        assert_eq!(table.dims.len(), 46);
    }

    #[test]
    fn hilbert_table_on_the_quadrant() {
        let table = hilbert_table(&FormSpec::untwisted(quadrant(), 1), 2).unwrap();
        assert_eq!(table.dims.len(), 9);
        for (m, d) in &table.dims {
            let expected = if m[0].is_positive() { 2 } else { 0 };
            assert_eq!(*d, expected, "{m:?}");
        }
    }

    #[test]
    fn hilbert_table_of_top_forms_is_at_most_a_line() {
        let table = hilbert_table(&FormSpec::untwisted(square_cone(), 3), 2).unwrap();
        assert!(table.dims.values().all(|&d| d <= 1));
        assert!(table.dims.values().any(|&d| d == 1));
    }

    #[test]
    fn de_rham_vanishes_at_the_origin() {
        let fan = Fan::new(2, vec![ivec(&[1, 0]), ivec(&[0, 1])], vec![rs(&[0, 1])]).unwrap();
        let t = FanTriple::new(fan, RaySet::new(), rs(&[0, 1])).unwrap();
        let d = de_rham_differential(&FormSpec::untwisted(t, 0), &ivec(&[0, 0])).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().flatten().all(Rat::is_zero));
    }

    #[test]
    fn de_rham_on_a_line_is_multiplication_by_the_degree() {
        let t = line_fan(&[], &[]);
        let d = de_rham_differential(&FormSpec::untwisted(t, 0), &ivec(&[2])).unwrap();
        assert_eq!(d, vec![vec![rint(2)]]);
    }

    #[test]
    fn de_rham_squares_to_zero_on_windows() {
        for t in [square_cone(), square_cone_split(), quadrant()] {
            let sigma = dual_cone(affine_cone(&t).unwrap());
            for m in lattice_points_window(&sigma, 2) {
                for p in 0..=1 {
                    let d0 =
                        de_rham_differential(&FormSpec::untwisted(t.clone(), p), &m).unwrap();
                    let d1 =
                        de_rham_differential(&FormSpec::untwisted(t.clone(), p + 1), &m)
                            .unwrap();
                    assert!(matmul(&d1, &d0).iter().flatten().all(Rat::is_zero), "{m:?}");
                }
            }
        }
    }

    #[test]
    fn de_rham_escapes_on_a_twisted_line() {
        let t = line_fan(&[], &[]);
        let mut l = TorusDivisor::zero(1);
        l.coeffs[0] = rint(1);
        let s = FormSpec::twisted(t, 0, l);
        let err = de_rham_differential(&s, &ivec(&[-1])).unwrap_err();
        assert!(matches!(err, Error::EscapesPiece(m) if m == ivec(&[-1])));
    }

    #[test]
    fn graded_euler_characteristic_matches_cohomology() {
        let t = square_cone();
        let sigma = dual_cone(affine_cone(&t).unwrap());
        for m in lattice_points_window(&sigma, 2) {
            let dims: Vec<usize> = (0..=3)
                .map(|p| graded_piece(&FormSpec::untwisted(t.clone(), p), &m).unwrap().value.dim())
                .collect();
            let mats: Vec<Vec<Vec<Rat>>> = (0..=3)
                .map(|p| de_rham_differential(&FormSpec::untwisted(t.clone(), p), &m).unwrap())
                .collect();
            let mut euler_h = 0i64;
            let mut euler_dim = 0i64;
            for p in 0..=3usize {
                let out_rank = crate::linalg::rank(&mats[p]) as i64;
                let in_rank = if p == 0 { 0 } else { crate::linalg::rank(&mats[p - 1]) as i64 };
                let h = dims[p] as i64 - out_rank - in_rank;
                assert!(h >= 0, "{m:?}: negative cohomology at p = {p}");
                let sign = if p % 2 == 0 { 1 } else { -1 };
                euler_h += sign * h;
                euler_dim += sign * dims[p] as i64;
            }
            assert_eq!(euler_h, euler_dim, "{m:?}");
        }
    }

    #[test]
    fn reflexive_intersection_holds_on_the_fixtures() {
        for t in [quadrant(), square_cone(), square_cone_split()] {
            let n = t.fan.ambient_rank();
            for p in 0..=n {
                let report =
                    verify_reflexive_intersection(&FormSpec::untwisted(t.clone(), p), 2)
                        .unwrap();
                assert!(report.holds(), "p = {p}: {:?}", report.mismatches);
                assert_eq!(report.checks, 5usize.pow(n as u32));
            }
        }
    }

    #[test]
    fn reflexive_intersection_needs_a_full_dimensional_cone() {
        let fan = Fan::new(2, vec![ivec(&[1, 0])], vec![rs(&[0])]).unwrap();
        let s = FormSpec::untwisted(FanTriple::plain(fan), 1);
        assert!(matches!(verify_reflexive_intersection(&s, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn pushforward_holds_on_the_identity_model() {
        let t = square_cone();
        for p in 0..=3 {
            let report = verify_pushforward(&t, &t, p, 2).unwrap();
            assert!(report.holds(), "p = {p}");
        }
    }

    #[test]
    fn pushforward_holds_on_the_resolved_square_cone() {
        let t = square_cone();
        let model = resolved_square_cone();
        assert_eq!(model.fan.rays().len(), 4);
        for p in 0..=3 {
            let report = verify_pushforward(&t, &model, p, 2).unwrap();
            assert!(report.hypothesis_failures.is_empty(), "{:?}", report.hypothesis_failures);
            assert!(report.identities_hold(), "p = {p}: {:?}", report.mismatches);
        }
    }

    #[test]
    fn pushforward_holds_on_the_starred_six_ray() {
        let t = six_ray();
        let starred = star_subdivision(&t.fan, &ivec(&[0, 0, 1, 1])).unwrap();
        let model = induced_decorations(&starred, &t.to_quadruple()).triple().unwrap();
        assert!(model.fan.maximal_cones().len() > 1);
        for p in 0..=4 {
            let report = verify_pushforward(&t, &model, p, 1).unwrap();
            assert!(report.hypothesis_failures.is_empty(), "{:?}", report.hypothesis_failures);
            assert!(report.identities_hold(), "p = {p}: {:?}", report.mismatches);
        }
    }

    #[test]
    fn pushforward_flags_undominated_and_misplaced_rays() {
        let t = square_cone();
        let model = resolved_square_cone();
        let misplaced =
            FanTriple::new(model.fan.clone(), rs(&[0, 2]), rs(&[1])).unwrap();
        let report = verify_pushforward(&t, &misplaced, 1, 1).unwrap();
        assert!(report
            .hypothesis_failures
            .iter()
            .any(|f| f.contains("does not lie over the !-locus")));
        let dropped = FanTriple::new(model.fan.clone(), RaySet::new(), rs(&[1])).unwrap();
        let report = verify_pushforward(&t, &dropped, 1, 1).unwrap();
        assert!(report
            .hypothesis_failures
            .iter()
            .any(|f| f.contains("no dominating !-ray")));
    }

    #[test]
    fn pushforward_rejects_non_subdivisions() {
        let t = square_cone();
        let model = resolved_square_cone();
        assert!(verify_pushforward(&model, &t, 1, 1).is_err());
        assert!(matches!(
            verify_pushforward(&t, &quadrant(), 1, 1),
            Err(Error::AmbientMismatch(2, 3))
        ));
    }

    #[test]
    fn divisor_restriction_of_the_diagonal_model() {
        let chart = divisor_restriction(&diagonal_model(), 2).unwrap();
        assert_eq!(chart.ray_sources, vec![0, 1, 3]);
        assert_eq!(chart.triple.fan.maximal_cones(), &[rs(&[0, 1]), rs(&[0, 2])]);
        assert_eq!(chart.triple.b_rays, rs(&[0]));
        assert_eq!(chart.triple.c_rays, rs(&[1]));
        for row in &chart.projection {
            assert!(dot(row, &ivec(&[1, 1, 1])).is_zero());
        }
        let q = chart.triple.fan.rays();
        let sum: IVec = q[1].iter().zip(&q[2]).map(|(a, b)| a + b).collect();
        assert_eq!(sum, q[0]);
    }

    #[test]
    fn divisor_restriction_drops_non_divisorial_meets() {
        let chart = divisor_restriction(&square_cone(), 2).unwrap();
        assert_eq!(chart.ray_sources, vec![1, 3]);
        assert_eq!(chart.triple.b_rays, RaySet::new());
        assert_eq!(chart.triple.c_rays, rs(&[0]));
        assert_eq!(chart.triple.fan.maximal_cones().len(), 1);
    }

    #[test]
    fn unimodular_complement_is_a_saturated_projection() {
        let samples = [ivec(&[1, 1, 1]), ivec(&[6, 10, 15]), ivec(&[0, -1]), ivec(&[2, 3])];
        for xi in samples {
            let n = xi.len();
            let rows = unimodular_complement(&xi).unwrap();
            assert_eq!(rows.len(), n - 1);
            for row in &rows {
                assert!(dot(row, &xi).is_zero());
            }
            let minors: Vec<Int> = (0..n)
                .combinations(n - 1)
                .map(|cols| {
                    let sub: Vec<Vec<Rat>> = rows
                        .iter()
                        .map(|r| cols.iter().map(|&c| Rat::from(r[c].clone())).collect())
                        .collect();
                    crate::linalg::det(&sub).to_integer()
                })
                .collect();
            let g = minors.iter().fold(Int::zero(), |acc, m| acc.gcd(m));
            assert!(g.is_one(), "{xi:?}");
        }
    }

    #[test]
    fn ses_identities_on_the_square_cone() {
        let t = square_cone();
        let add_b = verify_phi_ses_identities(&t, 2, SesMode::AddB).unwrap();
        assert!(add_b.identities_hold(), "{:?}", add_b.mismatches);
        assert_eq!(add_b.hypothesis_failures.len(), 1);
        assert!(add_b.hypothesis_failures[0].contains("codimension at least two"));
        let add_c = verify_phi_ses_identities(&t, 3, SesMode::AddC).unwrap();
        assert!(add_c.identities_hold(), "{:?}", add_c.mismatches);
        assert_eq!(add_c.hypothesis_failures.len(), 1);
        assert!(add_c.hypothesis_failures[0].contains("*-ray"));
    }

    #[test]
    fn ses_identities_on_the_simplicial_models() {
        for model in [resolved_square_cone(), diagonal_model()] {
            for xi in model.a_rays() {
                for mode in [SesMode::AddB, SesMode::AddC] {
                    let report = verify_phi_ses_identities(&model, xi, mode).unwrap();
                    assert!(report.holds(), "xi = {xi}, {mode:?}: {report:?}");
                    assert!(report.checks > 0);
                }
            }
        }
    }

    #[test]
    fn ses_rejects_decorated_divisors() {
        let t = square_cone();
        assert!(matches!(
            verify_phi_ses_identities(&t, 0, SesMode::AddB),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn pieces_depend_only_on_pairing_signs() {
        let t = square_cone();
        let ctx = PieceCtx::new(&t).unwrap();
        for p in 0..=3 {
            for m in box_window(3, 2) {
                let signs = ctx.signs(None, &m);
                assert_eq!(
                    ctx.piece(p, None, &m).unwrap(),
                    ctx.piece_from_signs(p, &signs).unwrap()
                );
            }
        }
    }
}
