//! Sortedness of fan quadruples: exact-LP search for (strict) sorting
//! functions, classification with certificates, an independent certificate
//! verifier, and the geometric distinguished-face criterion.

use crate::fan::{FanQuadruple, RaySet};
use crate::linalg::{pair, to_rat_vec, Rat};
use crate::lp::{feasible_point, Lp, Rel};
use crate::{Error, Result};
use num::{One, Signed, Zero};
use std::collections::BTreeMap;

/// A sortedness mode: rays in the sharp sets are exempt from the unsettled
/// filter, and the flat *-rays must be strictly negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortMode {
    pub b_sharp: RaySet,
    pub c_flat: RaySet,
    pub h_sharp: RaySet,
}

impl SortMode {
    /// Every cone is checked and every *-ray is strict.
    pub fn well_sorted(q: &FanQuadruple) -> SortMode {
        SortMode {
            b_sharp: q.b_rays.clone(),
            c_flat: q.c_rays.clone(),
            h_sharp: q.h_rays.clone(),
        }
    }

    /// Only cones without !- or interpolated rays are checked, with every
    /// *-ray strict.
    pub fn partially_sorted(q: &FanQuadruple) -> SortMode {
        SortMode { b_sharp: RaySet::new(), c_flat: q.c_rays.clone(), h_sharp: RaySet::new() }
    }

    /// Rays that settle a cone under this mode.
    fn avoid(&self, q: &FanQuadruple) -> RaySet {
        q.b_rays
            .difference(&self.b_sharp)
            .chain(q.h_rays.difference(&self.h_sharp))
            .copied()
            .collect()
    }

    fn check_subsets(&self, q: &FanQuadruple) -> Result<()> {
        if !self.b_sharp.is_subset(&q.b_rays)
            || !self.c_flat.is_subset(&q.c_rays)
            || !self.h_sharp.is_subset(&q.h_rays)
        {
            return Err(Error::Invalid(
                "mode sets must be subsets of the corresponding decorations".into(),
            ));
        }
        Ok(())
    }
}

/// One sorting function per unsettled cone, keyed by the cone's rayset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortCertificate {
    pub mode: SortMode,
    pub per_cone: BTreeMap<RaySet, Vec<Rat>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sortedness {
    Sorted(SortCertificate),
    Unsorted { mode: SortMode, counterexample: RaySet },
}

impl Sortedness {
    pub fn is_sorted(&self) -> bool {
        matches!(self, Sortedness::Sorted(_))
    }

    pub fn certificate(&self) -> Option<&SortCertificate> {
        match self {
            Sortedness::Sorted(c) => Some(c),
            Sortedness::Unsorted { .. } => None,
        }
    }
}

/// Searches for a linear functional that vanishes on the undecorated rays,
/// is nonnegative on !-rays, nonpositive on *-rays, and at most -1 on the
/// given strict *-rays; interpolated rays are unconstrained. Strictness is
/// normalized to -1 because sorting functions scale.
pub fn find_sorting_function(q: &FanQuadruple, strict: &RaySet) -> Result<Option<Vec<Rat>>> {
    if !q.is_affine() {
        return Err(Error::Unsupported(
            "sorting functions are defined on affine fans".into(),
        ));
    }
    if !strict.is_subset(&q.c_rays) {
        return Err(Error::Invalid("strict rays must be *-rays".into()));
    }
    let mut lp = Lp::new(q.fan.ambient_rank());
    for (r, ray) in q.fan.rays().iter().enumerate() {
        let coeffs = to_rat_vec(ray);
        if q.b_rays.contains(&r) {
            lp.push(coeffs, Rel::Ge, Rat::zero());
        } else if q.c_rays.contains(&r) {
            let rhs = if strict.contains(&r) { -Rat::one() } else { Rat::zero() };
            lp.push(coeffs, Rel::Le, rhs);
        } else if !q.h_rays.contains(&r) {
            lp.push(coeffs, Rel::Eq, Rat::zero());
        }
    }
    Ok(feasible_point(&lp))
}

/// Classifies the quadruple under the given mode: every unsettled cone must
/// admit a strict sorting function on its restriction. Returns the full
/// certificate, or the first failing cone in rayset order.
pub fn classify_sorted(q: &FanQuadruple, mode: &SortMode) -> Result<Sortedness> {
    mode.check_subsets(q)?;
    let avoid = mode.avoid(q);
    let mut per_cone = BTreeMap::new();
    for rayset in q.fan.cones() {
        if !rayset.is_disjoint(&avoid) {
            continue;
        }
        let restricted = q.restrict(rayset)?;
        let strict: RaySet = rayset
            .iter()
            .enumerate()
            .filter(|(_, o)| mode.c_flat.contains(o))
            .map(|(n, _)| n)
            .collect();
        match find_sorting_function(&restricted, &strict)? {
            Some(rho) => {
                per_cone.insert(rayset.clone(), rho);
            }
            None => {
                return Ok(Sortedness::Unsorted {
                    mode: mode.clone(),
                    counterexample: rayset.clone(),
                })
            }
        }
    }
    Ok(Sortedness::Sorted(SortCertificate { mode: mode.clone(), per_cone }))
}

/// Re-checks a certificate from scratch: the listed cones must be exactly
/// the unsettled ones, and every functional must satisfy its cone's sign
/// constraints, with strictness checked as plain negativity. Shares no code
/// with the LP search.
pub fn verify_certificate(q: &FanQuadruple, cert: &SortCertificate) -> Result<()> {
    cert.mode.check_subsets(q)?;
    let avoid = cert.mode.avoid(q);
    for rayset in cert.per_cone.keys() {
        if !q.fan.contains_cone(rayset) {
            return Err(Error::Invalid(format!(
                "certificate lists {rayset:?}, which is not a cone of the fan"
            )));
        }
        if !rayset.is_disjoint(&avoid) {
            return Err(Error::Invalid(format!(
                "certificate lists settled cone {rayset:?}"
            )));
        }
    }
    for rayset in q.fan.cones() {
        if !rayset.is_disjoint(&avoid) {
            continue;
        }
        let rho = cert.per_cone.get(rayset).ok_or_else(|| {
            Error::Invalid(format!("certificate is missing unsettled cone {rayset:?}"))
        })?;
        if rho.len() != q.fan.ambient_rank() {
            return Err(Error::Invalid("functional has the wrong dimension".into()));
        }
        for &r in rayset {
            let value = pair(rho, &q.fan.rays()[r]);
            if q.b_rays.contains(&r) {
                if value.is_negative() {
                    return Err(Error::Invalid(format!(
                        "functional for {rayset:?} is negative on !-ray {r}"
                    )));
                }
            } else if q.c_rays.contains(&r) {
                if cert.mode.c_flat.contains(&r) {
                    if !value.is_negative() {
                        return Err(Error::Invalid(format!(
                            "functional for {rayset:?} is not strictly negative on *-ray {r}"
                        )));
                    }
                } else if value.is_positive() {
                    return Err(Error::Invalid(format!(
                        "functional for {rayset:?} is positive on *-ray {r}"
                    )));
                }
            } else if !q.h_rays.contains(&r) && !value.is_zero() {
                return Err(Error::Invalid(format!(
                    "functional for {rayset:?} does not vanish on undecorated ray {r}"
                )));
            }
        }
    }
    Ok(())
}

/// Outcome of the geometric partial-sortedness criterion: for every cone
/// without !- or interpolated ray faces, the undecorated rays must span a
/// face (the distinguished face).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeometricPartial {
    pub holds: bool,
    pub distinguished: BTreeMap<RaySet, RaySet>,
    pub failing_cone: Option<RaySet>,
}

pub fn geometric_partial_check(q: &FanQuadruple) -> GeometricPartial {
    let avoid: RaySet = q.b_rays.union(&q.h_rays).copied().collect();
    let a_rays = q.a_rays();
    let mut distinguished = BTreeMap::new();
    for rayset in q.fan.cones() {
        if !rayset.is_disjoint(&avoid) {
            continue;
        }
        let a_part: RaySet = rayset.intersection(&a_rays).copied().collect();
        // In a valid fan, a cone whose rays all belong to a second cone is
        // automatically a face of it, so membership in the fan is the whole
        // face condition.
        if q.fan.contains_cone(&a_part) {
            distinguished.insert(rayset.clone(), a_part);
        } else {
            return GeometricPartial {
                holds: false,
                distinguished,
                failing_cone: Some(rayset.clone()),
            };
        }
    }
    GeometricPartial { holds: true, distinguished, failing_cone: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan::fixtures::*;
    use crate::fan::{FanQuadruple, FanTriple};
    use crate::linalg::rint;

    fn full_cone(q: &FanQuadruple) -> RaySet {
        (0..q.fan.rays().len()).collect()
    }

    #[test]
    fn quadrant_has_a_strict_sorting_function() {
        let q = quadrant().to_quadruple();
        let rho = find_sorting_function(&q, &q.c_rays).unwrap().unwrap();
        assert!(!pair(&rho, &q.fan.rays()[0]).is_negative());
        assert!(pair(&rho, &q.fan.rays()[1]) <= -rint(1));
    }

    #[test]
    fn quadrant_is_well_sorted_with_verified_certificate() {
        let q = quadrant().to_quadruple();
        let outcome = classify_sorted(&q, &SortMode::well_sorted(&q)).unwrap();
        let cert = outcome.certificate().expect("well-sorted");
        assert_eq!(cert.per_cone.len(), 4);
        verify_certificate(&q, cert).unwrap();
    }

    #[test]
    fn square_cone_is_not_well_sorted() {
        let q = square_cone().to_quadruple();
        match classify_sorted(&q, &SortMode::well_sorted(&q)).unwrap() {
            Sortedness::Unsorted { counterexample, .. } => {
                assert_eq!(counterexample, full_cone(&q));
            }
            Sortedness::Sorted(_) => panic!("square cone must not be well-sorted"),
        }
    }

    #[test]
    fn square_cone_is_partially_sorted_on_six_cones() {
        let q = square_cone().to_quadruple();
        let outcome = classify_sorted(&q, &SortMode::partially_sorted(&q)).unwrap();
        let cert = outcome.certificate().expect("partially sorted");
        assert_eq!(cert.per_cone.len(), 6);
        assert!(cert.per_cone.keys().all(|rs| !rs.contains(&0)));
        verify_certificate(&q, cert).unwrap();
    }

    #[test]
    fn square_cone_split_has_no_global_strict_function() {
        let q = square_cone_split().to_quadruple();
        assert!(find_sorting_function(&q, &q.c_rays).unwrap().is_none());
        match classify_sorted(&q, &SortMode::well_sorted(&q)).unwrap() {
            Sortedness::Unsorted { counterexample, .. } => {
                assert_eq!(counterexample, full_cone(&q));
            }
            Sortedness::Sorted(_) => panic!("split square cone must not be well-sorted"),
        }
    }

    #[test]
    fn square_cone_split_is_partially_sorted() {
        let q = square_cone_split().to_quadruple();
        let outcome = classify_sorted(&q, &SortMode::partially_sorted(&q)).unwrap();
        let cert = outcome.certificate().expect("partially sorted");
        let keys: Vec<&RaySet> = cert.per_cone.keys().collect();
        assert_eq!(keys.len(), 3);
        verify_certificate(&q, cert).unwrap();
    }

    #[test]
    fn six_ray_is_not_well_sorted_but_partially_sorted() {
        let q = six_ray().to_quadruple();
        match classify_sorted(&q, &SortMode::well_sorted(&q)).unwrap() {
            Sortedness::Unsorted { counterexample, .. } => {
                assert_eq!(counterexample, full_cone(&q));
            }
            Sortedness::Sorted(_) => panic!("six-ray cone must not be well-sorted"),
        }
        let outcome = classify_sorted(&q, &SortMode::partially_sorted(&q)).unwrap();
        let cert = outcome.certificate().expect("partially sorted");
        assert_eq!(cert.per_cone.len(), 6);
        verify_certificate(&q, cert).unwrap();
    }

    #[test]
    fn six_ray_face_lattice_is_the_cone_over_an_octahedron() {
        let q = six_ray().to_quadruple();
        let by_len = |k: usize| q.fan.cones().iter().filter(|rs| rs.len() == k).count();
        assert_eq!(by_len(0), 1);
        assert_eq!(by_len(1), 6);
        assert_eq!(by_len(2), 12);
        assert_eq!(by_len(3), 8);
        assert_eq!(by_len(6), 1);
        assert_eq!(q.fan.cones().len(), 28);
    }

    #[test]
    fn geometric_check_agrees_on_fixtures() {
        for t in [quadrant(), square_cone(), square_cone_split(), six_ray()] {
            let q = t.to_quadruple();
            let lp = classify_sorted(&q, &SortMode::partially_sorted(&q)).unwrap();
            let geo = geometric_partial_check(&q);
            assert_eq!(geo.holds, lp.is_sorted());
            assert!(geo.holds, "all fixtures are partially sorted");
            assert_eq!(
                geo.distinguished.len(),
                lp.certificate().unwrap().per_cone.len()
            );
        }
    }

    #[test]
    fn geometric_distinguished_faces_on_square_cone() {
        let q = square_cone().to_quadruple();
        let geo = geometric_partial_check(&q);
        assert!(geo.holds);
        let facet: RaySet = [2, 3].into_iter().collect();
        assert_eq!(geo.distinguished[&facet], facet);
        let edge: RaySet = [1, 2].into_iter().collect();
        assert_eq!(geo.distinguished[&edge], [2].into_iter().collect());
        let star: RaySet = [1].into_iter().collect();
        assert_eq!(geo.distinguished[&star], RaySet::new());
    }

    #[test]
    fn geometric_check_fails_when_a_rays_span_no_face() {
        // Move one diagonal ray of the square cone to B and leave the other
        // three undecorated: in the full cone the undecorated rays span a
        // three-dimensional cone that is not a face.
        let fan = square_cone_fan();
        let t = FanTriple::new(
            fan,
            [1].into_iter().collect(),
            RaySet::new(),
        )
        .unwrap();
        let q = t.to_quadruple();
        let geo = geometric_partial_check(&q);
        assert!(geo.holds, "settled cones are skipped, so the check passes");
        let lp = classify_sorted(&q, &SortMode::partially_sorted(&q)).unwrap();
        assert!(lp.is_sorted());

        // With the diagonal ray undecorated instead, the full cone becomes
        // unsettled and its A-rays do not span a face.
        let t = FanTriple::plain(square_cone_fan());
        let mut q = t.to_quadruple();
        q.c_rays = [1].into_iter().collect();
        let geo = geometric_partial_check(&q);
        assert!(!geo.holds);
        assert_eq!(geo.failing_cone, Some((0..4).collect()));
        let lp = classify_sorted(&q, &SortMode::partially_sorted(&q)).unwrap();
        assert!(!lp.is_sorted());
    }

    #[test]
    fn certificate_verifier_rejects_tampering() {
        let q = square_cone().to_quadruple();
        let outcome = classify_sorted(&q, &SortMode::partially_sorted(&q)).unwrap();
        let cert = outcome.certificate().unwrap();

        let mut missing = cert.clone();
        let first = missing.per_cone.keys().next().cloned().unwrap();
        missing.per_cone.remove(&first);
        assert!(verify_certificate(&q, &missing).is_err());

        let mut wrong = cert.clone();
        let key: RaySet = [1].into_iter().collect();
        wrong.per_cone.insert(key, vec![Rat::zero(); 3]);
        assert!(verify_certificate(&q, &wrong).is_err());

        let mut extra = cert.clone();
        extra.per_cone.insert([0].into_iter().collect(), vec![Rat::zero(); 3]);
        assert!(verify_certificate(&q, &extra).is_err());
    }

    #[test]
    fn additivity_of_certificates_on_split_square_cone() {
        let q = square_cone_split().to_quadruple();
        let single = |c: usize| SortMode {
            b_sharp: RaySet::new(),
            c_flat: [c].into_iter().collect(),
            h_sharp: RaySet::new(),
        };
        let one = classify_sorted(&q, &single(1)).unwrap();
        let three = classify_sorted(&q, &single(3)).unwrap();
        let a = one.certificate().unwrap();
        let b = three.certificate().unwrap();
        let summed = SortCertificate {
            mode: SortMode {
                b_sharp: RaySet::new(),
                c_flat: [1, 3].into_iter().collect(),
                h_sharp: RaySet::new(),
            },
            per_cone: a
                .per_cone
                .iter()
                .map(|(rs, rho)| {
                    let other = &b.per_cone[rs];
                    let sum: Vec<Rat> =
                        rho.iter().zip(other).map(|(x, y)| x + y).collect();
                    (rs.clone(), sum)
                })
                .collect(),
        };
        verify_certificate(&q, &summed).unwrap();
    }

    #[test]
    fn monotone_enlargement_preserves_certificates() {
        // Enlarging B by an undecorated ray shrinks the unsettled set, and
        // the old functionals still verify for the enlarged quadruple.
        let q = square_cone().to_quadruple();
        let mode = SortMode::partially_sorted(&q);
        let outcome = classify_sorted(&q, &mode).unwrap();
        let cert = outcome.certificate().unwrap();

        let mut bigger = q.clone();
        bigger.b_rays.insert(3);
        let transformed = SortCertificate {
            mode: SortMode::partially_sorted(&bigger),
            per_cone: cert
                .per_cone
                .iter()
                .filter(|(rs, _)| !rs.contains(&3))
                .map(|(rs, rho)| (rs.clone(), rho.clone()))
                .collect(),
        };
        verify_certificate(&bigger, &transformed).unwrap();
        assert!(classify_sorted(&bigger, &transformed.mode).unwrap().is_sorted());
    }

    #[test]
    fn rejects_non_affine_input_and_bad_strict_set() {
        let base = square_cone_fan();
        let starred = crate::fan::Fan::new(
            3,
            base.rays().to_vec(),
            vec![
                [0, 1, 2].into_iter().collect(),
                [0, 2, 3].into_iter().collect(),
            ],
        )
        .unwrap();
        let q = FanTriple::plain(starred).to_quadruple();
        assert!(find_sorting_function(&q, &RaySet::new()).is_err());

        let q = quadrant().to_quadruple();
        assert!(find_sorting_function(&q, &[0].into_iter().collect()).is_err());
        let mut mode = SortMode::well_sorted(&q);
        mode.b_sharp.insert(7);
        assert!(classify_sorted(&q, &mode).is_err());
    }
}
