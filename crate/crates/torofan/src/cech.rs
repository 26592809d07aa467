//! Degreewise equivariant Čech complexes over the cover of a fan by its
//! maximal cones.
//!
//! Per character degree the sheaf data is a diagram of subspaces of a fixed
//! wedge-coordinate space, one per cover intersection, with inclusions as
//! restriction maps; the Čech complex is assembled from signed identity
//! blocks. On top of this sit the relative higher-direct-image check over an
//! affine base, exact total cohomology over complete fans via a sign-chamber
//! decomposition of the threshold arrangement, and the E₁-degeneration check
//! for the Čech-de Rham double complex.

use crate::cone::{box_window, dot, IVec};
use crate::fan::{subdivision_map, FanTriple, RaySet, TorusDivisor};
use crate::forms::{FormSpec, PieceCtx};
use crate::linalg::{
    binomial, cohomology_dims, lex_subsets, m_wedge_matrix, rint, to_rat_vec, CochainComplex,
    Rat, Subspace,
};
use crate::lp::{fm_witness, minimize, Lp, LpOutcome, Rel, StrictIneq};
use crate::{Error, Result};
use itertools::Itertools;
use num::{BigInt, One, Signed, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// A form sheaf on a fan together with the Čech cover by maximal cones, and
/// optionally an affine base fan for relative (higher direct image) checks.
#[derive(Clone, Debug)]
pub struct CechSetup {
    pub sheaf: FormSpec,
    pub base: Option<FanTriple>,
}

impl CechSetup {
    /// A setup for absolute cohomology of the sheaf's fan.
    pub fn new(sheaf: FormSpec) -> Result<CechSetup> {
        let n = sheaf.triple.fan.ambient_rank();
        if sheaf.p > n {
            return Err(Error::WedgeOutOfRange { p: sheaf.p, n });
        }
        if let Some(l) = &sheaf.twist {
            if l.coeffs.len() != sheaf.triple.fan.rays().len() {
                return Err(Error::Invalid(
                    "the twisting divisor must assign one coefficient per ray".into(),
                ));
            }
            if !l.is_integral() {
                return Err(Error::NonIntegralTwist);
            }
        }
        Ok(CechSetup { sheaf, base: None })
    }

    /// A setup for relative checks: `base` must be affine and subdivided by
    /// the sheaf's fan.
    pub fn relative(sheaf: FormSpec, base: FanTriple) -> Result<CechSetup> {
        let mut setup = CechSetup::new(sheaf)?;
        if base.fan.maximal_cones().len() != 1 {
            return Err(Error::Unsupported("relative checks require an affine base".into()));
        }
        subdivision_map(&setup.sheaf.triple.fan, &base.fan)?;
        setup.base = Some(base);
        Ok(setup)
    }
}

/// One relatively open stratum of the threshold arrangement: the locus where
/// every facet pairing `<m, nu_i> + a_i` has a fixed sign.
#[derive(Clone, Debug)]
pub struct Chamber {
    /// Sign of the pairing per ray: -1, 0, or +1.
    pub signs: Vec<i8>,
    /// A rational point realizing the signs.
    pub representative: Vec<Rat>,
    pub bounded: bool,
    /// All lattice points of the stratum; populated only when bounded.
    pub lattice_points: Vec<IVec>,
}

/// The decomposition of `M_ℚ` into sign strata of the threshold arrangement
/// of a decorated fan (one hyperplane per ray, shifted by the twist).
#[derive(Clone, Debug)]
pub struct ChamberDecomposition {
    pub chambers: Vec<Chamber>,
}

/// Dimensions `h^q` of sheaf cohomology per form degree `p`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CohomologyTable {
    pub dims: BTreeMap<(usize, usize), usize>,
}

impl CohomologyTable {
    pub fn h(&self, p: usize, q: usize) -> usize {
        self.dims.get(&(p, q)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    /// The nonzero entries as `(p, q, dim)` rows in lexicographic order.
    pub fn rows(&self) -> Vec<(usize, usize, usize)> {
        self.dims.iter().filter(|(_, &d)| d > 0).map(|(&(p, q), &d)| (p, q, d)).collect()
    }
}

/// Window report of a relative higher-direct-image check over an affine
/// base: nonzero `H^k`, `k >= 1`, and disagreements between `H^0` and the
/// base graded piece. The window is a spot check, not a proof; degrees on
/// the outermost shell that still carry cohomology are counted separately as
/// the margin.
#[derive(Clone, Debug, Default)]
pub struct RelativeReport {
    pub nonzero_higher: Vec<String>,
    pub pushforward_mismatches: Vec<String>,
    pub checks: usize,
    pub shell_support: usize,
}

impl RelativeReport {
    pub fn holds(&self) -> bool {
        self.nonzero_higher.is_empty() && self.pushforward_mismatches.is_empty()
    }
}

/// Comparison of hypercohomology dimensions of the Čech-de Rham double
/// complex against the Hodge-type sums of sheaf cohomology.
#[derive(Clone, Debug)]
pub struct DegenerationReport {
    /// `dim ℍ^k` of the total complex, `k = 0, 1, ...`.
    pub hyper_dims: Vec<usize>,
    /// `Σ_{p+q=k} h^q(Ω^p)` from the cohomology table.
    pub hodge_sums: Vec<usize>,
    pub table: CohomologyTable,
}

impl DegenerationReport {
    /// Degeneration at the first page: agreement in every total degree.
    pub fn degenerates(&self) -> bool {
        self.hyper_dims == self.hodge_sums
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.hyper_dims
            .iter()
            .enumerate()
            .map(|(k, &d)| if k % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }
}

/// The cover data of a setup, computed once per sweep: the chart triple of
/// every cover intersection with its piece context, and for each Čech degree
/// the lexicographic list of cover subsets pointing at their charts.
struct CechEngine {
    n: usize,
    twist: Option<TorusDivisor>,
    rays: Vec<IVec>,
    /// Unique intersection charts: rayset, sorted global ray indices, context.
    charts: Vec<(Vec<usize>, PieceCtx)>,
    /// `layers[k][s]` = chart index of the `s`-th lexicographic `(k+1)`-subset.
    layers: Vec<Vec<usize>>,
}

impl CechEngine {
    fn new(setup: &CechSetup) -> Result<CechEngine> {
        let triple = &setup.sheaf.triple;
        let covers = triple.fan.maximal_cones();
        let mut chart_index: BTreeMap<RaySet, usize> = BTreeMap::new();
        let mut charts = Vec::new();
        let mut layers = Vec::new();
        for k in 0..covers.len() {
            let subsets = lex_subsets(covers.len(), k + 1);
            let mut layer = Vec::with_capacity(subsets.len());
            for subset in &subsets {
                let rayset = subset
                    .iter()
                    .map(|&i| covers[i].clone())
                    .reduce(|a, b| a.intersection(&b).copied().collect())
                    .expect("subsets are nonempty");
                let next = charts.len();
                let idx = *chart_index.entry(rayset.clone()).or_insert(next);
                if idx == next {
                    let chart = triple.restrict(&rayset)?;
                    charts.push((rayset.iter().copied().collect(), PieceCtx::new(&chart)?));
                }
                layer.push(idx);
            }
            layers.push(layer);
        }
        Ok(CechEngine {
            n: triple.fan.ambient_rank(),
            twist: setup.sheaf.twist.clone(),
            rays: triple.fan.rays().to_vec(),
            charts,
            layers,
        })
    }

    /// Signs of the facet pairings at `m`, one per ray of the covering fan.
    fn global_signs(&self, m: &IVec) -> Vec<i8> {
        self.rays
            .iter()
            .enumerate()
            .map(|(i, ray)| {
                let mut tv = Rat::from(dot(m, ray));
                if let Some(l) = &self.twist {
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

    /// The graded pieces of all intersection charts for the given signs.
    fn chart_pieces(&self, p: usize, signs: &[i8]) -> Result<Vec<Subspace>> {
        self.charts
            .iter()
            .map(|(global, ctx)| {
                let local: Vec<i8> = global.iter().map(|&g| signs[g]).collect();
                ctx.piece_from_signs(p, &local)
            })
            .collect()
    }

    /// The Čech complex of the degree-`p` sheaf for the given signs: terms
    /// are direct sums of chart pieces inside copies of the wedge-coordinate
    /// space, maps are signed identity blocks.
    fn complex_from_signs(&self, p: usize, signs: &[i8]) -> Result<CochainComplex> {
        let pieces = self.chart_pieces(p, signs)?;
        let amb = if p > self.n { 0 } else { binomial(self.n, p) };
        let terms: Vec<Subspace> = self
            .layers
            .iter()
            .map(|layer| direct_sum(amb, layer.iter().map(|&c| &pieces[c])))
            .collect();
        let ncovers = self.layers.len();
        let mut maps = Vec::with_capacity(ncovers.saturating_sub(1));
        for k in 0..ncovers - 1 {
            let sources = lex_subsets(ncovers, k + 1);
            let targets = lex_subsets(ncovers, k + 2);
            let source_at: BTreeMap<&[usize], usize> =
                sources.iter().enumerate().map(|(s, v)| (v.as_slice(), s)).collect();
            let mut map = vec![vec![Rat::zero(); amb * sources.len()]; amb * targets.len()];
            for (tpos, target) in targets.iter().enumerate() {
                for drop in 0..target.len() {
                    let mut source = target.clone();
                    source.remove(drop);
                    let spos = source_at[source.as_slice()];
                    let sign = if drop % 2 == 0 { rint(1) } else { rint(-1) };
                    for j in 0..amb {
                        map[amb * tpos + j][amb * spos + j] = sign.clone();
                    }
                }
            }
            maps.push(map);
        }
        Ok(CochainComplex { terms, maps })
    }

    fn complex(&self, p: usize, m: &IVec) -> Result<CochainComplex> {
        self.complex_from_signs(p, &self.global_signs(m))
    }
}

/// Direct sum of subspaces of a common `amb`-dimensional coordinate space,
/// presented inside the concatenation of the summands' coordinates.
fn direct_sum<'a>(amb: usize, spaces: impl Iterator<Item = &'a Subspace>) -> Subspace {
    let spaces: Vec<&Subspace> = spaces.collect();
    let total = amb * spaces.len();
    let mut gens = Vec::new();
    for (i, s) in spaces.iter().enumerate() {
        for b in s.basis() {
            let mut v = vec![Rat::zero(); total];
            v[amb * i..amb * (i + 1)].clone_from_slice(b);
            gens.push(v);
        }
    }
    Subspace::span(total, &gens)
}

/// The Čech complex of the setup's sheaf at character degree `m`, over the
/// cover by maximal cones in list order.
pub fn cech_complex_at_degree(setup: &CechSetup, m: &IVec) -> Result<CochainComplex> {
    let n = setup.sheaf.triple.fan.ambient_rank();
    if m.len() != n {
        return Err(Error::AmbientMismatch(m.len(), n));
    }
    CechEngine::new(setup)?.complex(setup.sheaf.p, m)
}

/// Sweeps a degree window checking that all higher Čech cohomology of the
/// subdivision vanishes and that `H^0` agrees with the base graded piece
/// (the latter for untwisted sheaves). `ps` selects the form degrees.
pub fn higher_direct_image_check(
    setup: &CechSetup,
    ps: &[usize],
    bound: i64,
) -> Result<RelativeReport> {
    let base = setup
        .base
        .as_ref()
        .ok_or_else(|| Error::Invalid("the relative check requires a base fan".into()))?;
    let n = setup.sheaf.triple.fan.ambient_rank();
    if let Some(&p) = ps.iter().find(|&&p| p > n) {
        return Err(Error::WedgeOutOfRange { p, n });
    }
    let engine = CechEngine::new(setup)?;
    let base_ctx = PieceCtx::new(base)?;
    let window = box_window(n, bound);
    let rows = window
        .par_iter()
        .map(|m| {
            let mut higher = Vec::new();
            let mut mismatches = Vec::new();
            let mut shell = 0usize;
            for &p in ps {
                let h = cohomology_dims(&engine.complex(p, m)?)?;
                for (k, &d) in h.iter().enumerate().skip(1) {
                    if d > 0 {
                        higher.push(format!(
                            "p = {p}, degree {}: H^{k} has dimension {d}",
                            fmt_degree(m)
                        ));
                    }
                }
                if setup.sheaf.twist.is_none() {
                    let expected = base_ctx.piece(p, None, m)?.dim();
                    if h[0] != expected {
                        mismatches.push(format!(
                            "p = {p}, degree {}: H^0 has dimension {} but the base piece has {}",
                            fmt_degree(m),
                            h[0],
                            expected
                        ));
                    }
                }
                let on_shell = m.iter().any(|x| x.abs() == BigInt::from(bound));
                if on_shell && h.iter().any(|&d| d > 0) {
                    shell += 1;
                }
            }
            Ok((higher, mismatches, shell))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = RelativeReport { checks: window.len() * ps.len(), ..Default::default() };
    for (higher, mismatches, shell) in rows {
        report.nonzero_higher.extend(higher);
        report.pushforward_mismatches.extend(mismatches);
        report.shell_support += shell;
    }
    Ok(report)
}

fn fmt_degree(m: &IVec) -> String {
    format!("[{}]", m.iter().join(", "))
}

/// Enumerates the nonempty sign strata of the threshold arrangement of the
/// sheaf's decorated fan: per ray the hyperplane `<m, nu> = -a`. Bounded
/// strata come with their full lattice-point lists.
pub fn chamber_decomposition(setup: &CechSetup) -> Result<ChamberDecomposition> {
    let triple = &setup.sheaf.triple;
    let n = triple.fan.ambient_rank();
    let rays = triple.fan.rays();
    let thresholds: Vec<Rat> = (0..rays.len())
        .map(|i| setup.sheaf.twist.as_ref().map_or_else(Rat::zero, |l| l.coeffs[i].clone()))
        .collect();
    let mut chambers = Vec::new();
    for signs in std::iter::repeat_n([-1i8, 0, 1], rays.len()).multi_cartesian_product() {
        let Some(representative) = stratum_witness(n, rays, &thresholds, &signs) else {
            continue;
        };
        let (bounded, lattice_points) = stratum_lattice(n, rays, &thresholds, &signs)?;
        chambers.push(Chamber { signs, representative, bounded, lattice_points });
    }
    Ok(ChamberDecomposition { chambers })
}

/// A rational point with the prescribed pairing signs, if any exists.
fn stratum_witness(
    n: usize,
    rays: &[IVec],
    thresholds: &[Rat],
    signs: &[i8],
) -> Option<Vec<Rat>> {
    let mut system = Vec::new();
    for ((ray, a), &s) in rays.iter().zip(thresholds).zip(signs) {
        let coeffs = to_rat_vec(ray);
        let neg: Vec<Rat> = coeffs.iter().map(|x| -x.clone()).collect();
        match s {
            0 => {
                system.push(StrictIneq::le(coeffs, -a.clone()));
                system.push(StrictIneq::le(neg, a.clone()));
            }
            1 => system.push(StrictIneq::lt(neg, a.clone())),
            _ => system.push(StrictIneq::lt(coeffs, -a.clone())),
        }
    }
    fm_witness(&system, n)
}

/// Boundedness of the closed stratum and, when bounded, the exact list of
/// lattice points realizing the signs.
fn stratum_lattice(
    n: usize,
    rays: &[IVec],
    thresholds: &[Rat],
    signs: &[i8],
) -> Result<(bool, Vec<IVec>)> {
    let mut closure = Lp::new(n);
    for ((ray, a), &s) in rays.iter().zip(thresholds).zip(signs) {
        let rel = match s {
            0 => Rel::Eq,
            1 => Rel::Ge,
            _ => Rel::Le,
        };
        closure.push(to_rat_vec(ray), rel, -a.clone());
    }
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for j in 0..n {
        let mut objective = vec![Rat::zero(); n];
        objective[j] = Rat::one();
        let min = match minimize(&closure, &objective) {
            LpOutcome::Optimal { value, .. } => value,
            LpOutcome::Unbounded => return Ok((false, Vec::new())),
            LpOutcome::Infeasible => {
                return Err(Error::Invalid("a witnessed stratum has an empty closure".into()))
            }
        };
        objective[j] = -Rat::one();
        let max = match minimize(&closure, &objective) {
            LpOutcome::Optimal { value, .. } => -value,
            LpOutcome::Unbounded => return Ok((false, Vec::new())),
            LpOutcome::Infeasible => {
                return Err(Error::Invalid("a witnessed stratum has an empty closure".into()))
            }
        };
        lo.push(min.ceil().to_integer());
        hi.push(max.floor().to_integer());
    }
    let ranges: Vec<Vec<BigInt>> = (0..n)
        .map(|j| {
            let (mut cur, top) = (lo[j].clone(), hi[j].clone());
            let mut cells = Vec::new();
            while cur <= top {
                cells.push(cur.clone());
                cur += BigInt::one();
            }
            cells
        })
        .collect();
    let matches = |m: &IVec| {
        rays.iter().zip(thresholds).zip(signs).all(|((ray, a), &s)| {
            let t = Rat::from(dot(m, ray)) + a;
            match s {
                0 => t.is_zero(),
                1 => t.is_positive(),
                _ => t.is_negative(),
            }
        })
    };
    let points: Vec<IVec> = if ranges.iter().any(Vec::is_empty) {
        Vec::new()
    } else {
        ranges
            .into_iter()
            .multi_cartesian_product()
            .filter(|m| matches(m))
            .collect()
    };
    Ok((true, points))
}

/// Exact total cohomology dimensions `h^q(Ω^p)` for every form degree of a
/// complete decorated fan, computed by the sign-chamber decomposition: each
/// stratum carries a constant Čech complex, bounded strata contribute once
/// per lattice point, and any unbounded stratum must have vanishing
/// cohomology in every degree or the computation aborts.
pub fn complete_cohomology_dims(setup: &CechSetup) -> Result<CohomologyTable> {
    Ok(complete_cohomology(setup)?.0)
}

fn complete_cohomology(setup: &CechSetup) -> Result<(CohomologyTable, Vec<IVec>)> {
    if setup.base.is_some() {
        return Err(Error::Invalid("total cohomology does not take a relative setup".into()));
    }
    let triple = &setup.sheaf.triple;
    if !triple.fan.is_complete() {
        return Err(Error::Unsupported("total cohomology requires a complete fan".into()));
    }
    let n = triple.fan.ambient_rank();
    let engine = CechEngine::new(setup)?;
    let decomposition = chamber_decomposition(setup)?;
    let mut table = CohomologyTable::default();
    let mut support = Vec::new();
    for chamber in &decomposition.chambers {
        let mut contributes = false;
        for p in 0..=n {
            let h = cohomology_dims(&engine.complex_from_signs(p, &chamber.signs)?)?;
            let weight = if chamber.bounded { chamber.lattice_points.len() } else { 0 };
            for (q, &d) in h.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                contributes = true;
                if !chamber.bounded {
                    return Err(Error::UnboundedChamber(format!(
                        "signs {:?} span an unbounded stratum with h^{q} = {d} at p = {p}",
                        chamber.signs
                    )));
                }
                *table.dims.entry((p, q)).or_insert(0) += d * weight;
            }
        }
        if contributes {
            support.extend(chamber.lattice_points.iter().cloned());
        }
    }
    for p in 0..=n {
        for q in 0..triple.fan.maximal_cones().len() {
            table.dims.entry((p, q)).or_insert(0);
        }
    }
    support.sort();
    Ok((table, support))
}

/// Hypercohomology of the Čech-de Rham double complex of an untwisted
/// complete decorated fan, compared degreewise against the Hodge-type sums
/// of the cohomology table. The chamber decomposition certifies that all
/// cohomology lives on the returned finite set of degrees, so the sums are
/// exact, not windowed.
pub fn e1_degeneration_check(setup: &CechSetup) -> Result<DegenerationReport> {
    if setup.sheaf.twist.is_some() {
        return Err(Error::Invalid(
            "the degeneration check is stated for untwisted sheaves".into(),
        ));
    }
    let (table, support) = complete_cohomology(setup)?;
    let triple = &setup.sheaf.triple;
    let n = triple.fan.ambient_rank();
    let ncovers = triple.fan.maximal_cones().len();
    let engine = CechEngine::new(setup)?;
    let top = n + ncovers - 1;
    let mut hyper_dims = vec![0usize; top + 1];
    for m in &support {
        let total = total_complex(&engine, n, ncovers, m)?;
        for (k, d) in cohomology_dims(&total)?.into_iter().enumerate() {
            hyper_dims[k] += d;
        }
    }
    let mut hodge_sums = vec![0usize; top + 1];
    for (&(p, q), &d) in &table.dims {
        hodge_sums[p + q] += d;
    }
    Ok(DegenerationReport { hyper_dims, hodge_sums, table })
}

/// The total complex of the Čech-de Rham double complex at degree `m`: rows
/// are the Čech complexes of each `Ω^p`, columns are connected by
/// `(-1)^q m ∧ -` blocks on each chart.
fn total_complex(engine: &CechEngine, n: usize, ncovers: usize, m: &IVec) -> Result<CochainComplex> {
    let signs = engine.global_signs(m);
    let rows: Vec<CochainComplex> =
        (0..=n).map(|p| engine.complex_from_signs(p, &signs)).collect::<Result<_>>()?;
    let wedges: Vec<Vec<Vec<Rat>>> =
        (0..=n).map(|p| m_wedge_matrix(&to_rat_vec(m), n, p)).collect();
    let top = n + ncovers - 1;
    let offsets = |k: usize| -> (Vec<(usize, usize, usize)>, usize) {
        let mut blocks = Vec::new();
        let mut at = 0usize;
        for (p, row) in rows.iter().enumerate().take(n.min(k) + 1) {
            let q = k - p;
            if q >= ncovers {
                continue;
            }
            let width = row.terms[q].ambient_dim();
            blocks.push((p, q, at));
            at += width;
        }
        (blocks, at)
    };
    let mut terms = Vec::with_capacity(top + 1);
    let mut maps = Vec::with_capacity(top);
    for k in 0..=top {
        let (blocks, width) = offsets(k);
        let mut gens = Vec::new();
        for &(p, q, at) in &blocks {
            for b in rows[p].terms[q].basis() {
                let mut v = vec![Rat::zero(); width];
                v[at..at + b.len()].clone_from_slice(b);
                gens.push(v);
            }
        }
        terms.push(Subspace::span(width, &gens));
        if k == top {
            break;
        }
        let (tblocks, twidth) = offsets(k + 1);
        let tat: BTreeMap<(usize, usize), usize> =
            tblocks.iter().map(|&(p, q, at)| ((p, q), at)).collect();
        let mut map = vec![vec![Rat::zero(); width]; twidth];
        for &(p, q, at) in &blocks {
            let chart_amb = if p > n { 0 } else { binomial(n, p) };
            if let Some(&dst) = tat.get(&(p, q + 1)) {
                let cech = &rows[p].maps[q];
                for (r, row) in cech.iter().enumerate() {
                    for (c, x) in row.iter().enumerate() {
                        if !x.is_zero() {
                            map[dst + r][at + c] = x.clone();
                        }
                    }
                }
            }
            if let Some(&dst) = tat.get(&(p + 1, q)) {
                let wedge = &wedges[p];
                let nblocks = rows[p].terms[q].ambient_dim() / chart_amb.max(1);
                let upper = binomial(n, p + 1);
                for blk in 0..nblocks {
                    for (r, row) in wedge.iter().enumerate() {
                        for (c, x) in row.iter().enumerate() {
                            if x.is_zero() {
                                continue;
                            }
                            let signed = if q % 2 == 0 { x.clone() } else { -x.clone() };
                            map[dst + upper * blk + r][at + chart_amb * blk + c] = signed;
                        }
                    }
                }
            }
        }
        maps.push(map);
    }
    Ok(CochainComplex { terms, maps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ivec;
    use crate::fan::fixtures::{square_cone, square_cone_fan};
    use crate::fan::Fan;
    use crate::forms::{divisor_restriction, graded_piece};
    use crate::subdivide::{induced_decorations, star_subdivision};

    fn rs(xs: &[usize]) -> RaySet {
        xs.iter().copied().collect()
    }

    fn p1(b: &[usize], c: &[usize]) -> FanTriple {
        let fan = Fan::new(1, vec![ivec(&[1]), ivec(&[-1])], vec![rs(&[0]), rs(&[1])]).unwrap();
        FanTriple::new(fan, b.iter().copied().collect(), c.iter().copied().collect()).unwrap()
    }

    fn starred_square_cone() -> FanTriple {
        let fan = star_subdivision(&square_cone_fan(), &ivec(&[1, 1, 2])).unwrap();
        let q = induced_decorations(&fan, &square_cone().to_quadruple());
        let xi = fan.ray_index(&ivec(&[1, 1, 2])).unwrap();
        let mut b = q.b_rays.clone();
        b.insert(xi);
        FanTriple::new(fan, b, q.c_rays.clone()).unwrap()
    }

    fn exceptional_surface() -> FanTriple {
        let starred = starred_square_cone();
        let xi = starred.fan.ray_index(&ivec(&[1, 1, 2])).unwrap();
        divisor_restriction(&starred, xi).unwrap().triple
    }

    fn setup(t: &FanTriple, p: usize) -> CechSetup {
        CechSetup::new(FormSpec::untwisted(t.clone(), p)).unwrap()
    }

    #[test]
    fn one_chart_cover_concentrates_in_degree_zero() {
        let t = square_cone();
        let s = setup(&t, 1);
        let m = ivec(&[0, 0, 1]);
        let complex = cech_complex_at_degree(&s, &m).unwrap();
        assert_eq!(complex.terms.len(), 1);
        assert!(complex.maps.is_empty());
        let h = cohomology_dims(&complex).unwrap();
        assert_eq!(h, vec![graded_piece(&s.sheaf, &m).unwrap().value.dim()]);
    }

    #[test]
    fn starred_cone_structure_sheaf_is_exact_in_positive_degrees() {
        let t = FanTriple::plain(star_subdivision(&square_cone_fan(), &ivec(&[1, 1, 2])).unwrap());
        let s = setup(&t, 0);
        for m in [ivec(&[0, 0, 1]), ivec(&[0, 0, 0]), ivec(&[1, 0, 2]), ivec(&[-1, 0, 0])] {
            let h = cohomology_dims(&cech_complex_at_degree(&s, &m).unwrap()).unwrap();
            assert!(h.iter().skip(1).all(|&d| d == 0), "{m:?}: {h:?}");
        }
    }

    #[test]
    fn projective_line_structure_sheaf_cohomology() {
        let s = setup(&p1(&[], &[]), 0);
        let h = cohomology_dims(&cech_complex_at_degree(&s, &ivec(&[0])).unwrap()).unwrap();
        assert_eq!(h, vec![1, 0]);
        let away = cohomology_dims(&cech_complex_at_degree(&s, &ivec(&[2])).unwrap()).unwrap();
        assert_eq!(away, vec![0, 0]);
    }

    #[test]
    fn relative_check_requires_a_base() {
        let s = setup(&square_cone(), 0);
        assert!(matches!(
            higher_direct_image_check(&s, &[0], 1),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn identity_subdivision_has_no_higher_direct_images() {
        let t = square_cone();
        let s = CechSetup::relative(FormSpec::untwisted(t.clone(), 0), t.clone()).unwrap();
        let report = higher_direct_image_check(&s, &[0, 1, 2, 3], 2).unwrap();
        assert!(report.holds(), "{report:?}");
        assert_eq!(report.checks, 125 * 4);
    }

    #[test]
    fn starred_square_cone_has_no_higher_direct_images() {
        let model = starred_square_cone();
        let s = CechSetup::relative(FormSpec::untwisted(model, 1), square_cone()).unwrap();
        let report = higher_direct_image_check(&s, &[0, 1, 2, 3], 2).unwrap();
        assert!(report.holds(), "{report:?}");
    }

    #[test]
    fn chambers_of_the_projective_line() {
        let s = setup(&p1(&[], &[]), 0);
        let dec = chamber_decomposition(&s).unwrap();
        assert_eq!(dec.chambers.len(), 3);
        let bounded: Vec<_> = dec.chambers.iter().filter(|c| c.bounded).collect();
        assert_eq!(bounded.len(), 1);
        assert_eq!(bounded[0].signs, vec![0, 0]);
        assert_eq!(bounded[0].lattice_points, vec![ivec(&[0])]);
    }

    #[test]
    fn twisted_chambers_count_interior_points() {
        let t = p1(&[], &[]);
        let mut l = TorusDivisor::zero(2);
        l.coeffs[0] = rint(3);
        let s = CechSetup::new(FormSpec::twisted(t, 0, l)).unwrap();
        let dec = chamber_decomposition(&s).unwrap();
        let open_segment = dec
            .chambers
            .iter()
            .find(|c| c.signs == vec![1, 1])
            .expect("the segment between the thresholds is realizable");
        assert!(open_segment.bounded);
        assert_eq!(open_segment.lattice_points, vec![ivec(&[-2]), ivec(&[-1])]);
        let endpoint = dec
            .chambers
            .iter()
            .find(|c| c.signs == vec![1, 0])
            .expect("the threshold of the second ray is realizable");
        assert!(endpoint.bounded);
        assert_eq!(endpoint.lattice_points, vec![ivec(&[0])]);
    }

    #[test]
    fn chamber_pieces_are_constant() {
        let s = setup(&exceptional_surface(), 0);
        let engine = CechEngine::new(&s).unwrap();
        let dec = chamber_decomposition(&s).unwrap();
        for chamber in &dec.chambers {
            for m in chamber.lattice_points.iter().take(2) {
                assert_eq!(engine.global_signs(m), chamber.signs);
                for p in 0..=2 {
                    let from_signs = engine.complex_from_signs(p, &chamber.signs).unwrap();
                    let from_point = engine.complex(p, m).unwrap();
                    let dims = |c: &CochainComplex| {
                        c.terms.iter().map(Subspace::dim).collect::<Vec<_>>()
                    };
                    assert_eq!(dims(&from_signs), dims(&from_point));
                    assert_eq!(
                        cohomology_dims(&from_signs).unwrap(),
                        cohomology_dims(&from_point).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn line_bundles_on_the_projective_line() {
        let t = p1(&[], &[]);
        for (deg, h0, h1) in [(0i64, 1, 0), (1, 2, 0), (3, 4, 0), (-1, 0, 0), (-2, 0, 1), (-3, 0, 2)] {
            let mut l = TorusDivisor::zero(2);
            l.coeffs[0] = rint(deg);
            let s = CechSetup::new(FormSpec::twisted(t.clone(), 0, l)).unwrap();
            let table = complete_cohomology_dims(&s).unwrap();
            assert_eq!((table.h(0, 0), table.h(0, 1)), (h0, h1), "degree {deg}");
        }
    }

    #[test]
    fn decorated_projective_line_matches_the_degree_oracle() {
        let table = complete_cohomology_dims(&setup(&p1(&[0], &[]), 0)).unwrap();
        assert_eq!(table.total(), 1);
        assert_eq!(table.h(1, 1), 1);
        assert_eq!(table.h(0, 0), 0);
        assert_eq!(table.h(0, 1), 0);
        assert_eq!(table.h(1, 0), 0);
    }

    #[test]
    fn plain_projective_line_has_hodge_diamond_of_p1() {
        let table = complete_cohomology_dims(&setup(&p1(&[], &[]), 0)).unwrap();
        assert_eq!(table.h(0, 0), 1);
        assert_eq!(table.h(1, 1), 1);
        assert_eq!(table.total(), 2);
    }

    #[test]
    fn total_cohomology_rejects_affine_fans() {
        assert!(matches!(
            complete_cohomology_dims(&setup(&square_cone(), 0)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn exceptional_surface_is_a_complete_surface_fan() {
        let e = exceptional_surface();
        assert_eq!(e.fan.ambient_rank(), 2);
        assert_eq!(e.fan.rays().len(), 4);
        assert_eq!(e.fan.maximal_cones().len(), 4);
        assert!(e.fan.is_complete());
        assert_eq!(e.b_rays, rs(&[0]));
        assert_eq!(e.c_rays, rs(&[1]));
    }

    #[test]
    fn exceptional_surface_cohomology_is_one_dimensional() {
        let table = complete_cohomology_dims(&setup(&exceptional_surface(), 0)).unwrap();
        assert_eq!(table.total(), 1);
        assert_eq!(table.h(1, 1), 1);
    }

    #[test]
    fn degeneration_on_the_plain_projective_line() {
        let report = e1_degeneration_check(&setup(&p1(&[], &[]), 0)).unwrap();
        assert_eq!(report.hyper_dims, vec![1, 0, 1]);
        assert!(report.degenerates());
        assert_eq!(report.euler_characteristic(), 2);
    }

    #[test]
    fn degeneration_on_the_fully_decorated_projective_line() {
        let report = e1_degeneration_check(&setup(&p1(&[0], &[1]), 0)).unwrap();
        assert_eq!(report.hyper_dims, vec![0, 0, 0]);
        assert_eq!(report.table.total(), 0);
        assert!(report.degenerates());
    }

    #[test]
    fn degeneration_on_the_exceptional_surface() {
        let report = e1_degeneration_check(&setup(&exceptional_surface(), 0)).unwrap();
        assert_eq!(report.hyper_dims.iter().sum::<usize>(), 1);
        assert_eq!(report.hyper_dims[2], 1);
        assert!(report.degenerates());
    }

    #[test]
    fn degeneration_rejects_twisted_sheaves() {
        let t = p1(&[], &[]);
        let l = TorusDivisor::zero(2);
        let s = CechSetup::new(FormSpec::twisted(t, 0, l)).unwrap();
        assert!(matches!(e1_degeneration_check(&s), Err(Error::Invalid(_))));
    }

    #[test]
    fn total_complex_validates_on_the_surface() {
        let s = setup(&exceptional_surface(), 0);
        let engine = CechEngine::new(&s).unwrap();
        for m in [ivec(&[0, 0]), ivec(&[1, 0]), ivec(&[-1, 2])] {
            let total = total_complex(&engine, 2, 4, &m).unwrap();
            total.validate().unwrap();
        }
    }
}
