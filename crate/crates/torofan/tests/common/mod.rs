use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torofan::cone::{ivec, Cone};
use torofan::fan::{Fan, FanQuadruple, RaySet};

/// Generates `count` pointed affine decorated fans with reproducible
/// randomness: ambient rank 2..=4, at most 7 rays, a single maximal cone
/// spanned by all of them, and disjoint random !- and *-subsets.
pub fn random_affine_quadruples(seed: u64, count: usize) -> Vec<FanQuadruple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let rank = rng.gen_range(2..=4usize);
        let wanted = rng.gen_range(rank..=7usize);
        let gens: Vec<_> = (0..wanted)
            .map(|_| {
                let mut v: Vec<i64> =
                    (1..rank).map(|_| rng.gen_range(-3..=3i64)).collect();
                v.push(rng.gen_range(1..=3i64));
                ivec(&v)
            })
            .collect();
        let hull = Cone::from_generators(rank, &gens);
        let rays = hull.rays().to_vec();
        if rays.len() < 2 || rays.len() > 7 {
            continue;
        }
        let top: RaySet = (0..rays.len()).collect();
        let fan = match Fan::new(rank, rays, vec![top]) {
            Ok(fan) => fan,
            Err(_) => continue,
        };
        let mut b_rays = RaySet::new();
        let mut c_rays = RaySet::new();
        for i in 0..fan.rays().len() {
            match rng.gen_range(0..3u8) {
                0 => {
                    b_rays.insert(i);
                }
                1 => {
                    c_rays.insert(i);
                }
                _ => {}
            }
        }
        let q = FanQuadruple::new(fan, b_rays, c_rays, RaySet::new(), BTreeMap::new())
            .expect("generated decorations are disjoint subsets of the rays");
        out.push(q);
    }
    out
}
