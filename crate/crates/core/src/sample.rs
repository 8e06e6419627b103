//! Seeded generators for randomized property runs.
//!
//! Everything is driven by a `ChaCha8Rng`, so a seed fixes every point,
//! function and mutation produced here.

use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::Dyadic;
use crate::funcspace::{Bit, TwoFun};
use crate::spaces::MPoint;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform element of `M_i`.
pub fn grid_value(rng: &mut SampleRng, i: usize) -> Dyadic {
    let j: u64 = rng.random_range(0..=(1u64 << i));
    Dyadic::new(BigInt::from(j), i)
}

/// Nonzero element of `M_i`.
pub fn nonzero_grid_value(rng: &mut SampleRng, i: usize) -> Dyadic {
    let j: u64 = rng.random_range(1..=(1u64 << i));
    Dyadic::new(BigInt::from(j), i)
}

/// Finite-support point with at most `max_support` nonzero coordinates,
/// all at indices `<= max_index` (which must stay below 63).
pub fn random_mpoint(rng: &mut SampleRng, max_support: usize, max_index: usize) -> MPoint {
    let n = rng.random_range(0..=max_support);
    let entries: Vec<(usize, Dyadic)> = (0..n)
        .map(|_| {
            let i = rng.random_range(0..=max_index);
            (i, nonzero_grid_value(rng, i))
        })
        .collect();
    // later draws win on repeated indices
    let mut point = MPoint::zero();
    for (i, q) in entries {
        point = point.with(i, q).expect("grid value");
    }
    point
}

/// The default shape: support `<= 20`, indices `<= 30`.
pub fn standard_mpoint(rng: &mut SampleRng) -> MPoint {
    random_mpoint(rng, 20, 30)
}

/// Dense point of `∏M_i` on `0..depth`, zero afterwards.
pub fn random_grid_point(rng: &mut SampleRng, depth: usize) -> MPoint {
    MPoint::new((0..depth).map(|i| (i, grid_value(rng, i))).filter(|(_, q)| !q.is_zero())).expect("grid values")
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hashed_bit(key: u64, k: usize, a: usize, b: usize) -> Bit {
    let z = mix(mix(mix(key ^ k as u64) ^ a as u64) ^ b as u64);
    Bit::from(z & 1 == 1)
}

/// Levels that get a random modulus and limit; higher levels are
/// constant `0` with modulus `0`.
pub const TABLE_LEVELS: usize = 64;

/// Random `h` with a genuine constancy certificate: `μ(k) <= max_mu`,
/// random limit bits, pseudo-random values below the modulus.
pub fn random_certified_twofun(rng: &mut SampleRng, max_mu: usize) -> TwoFun {
    let key: u64 = rng.random();
    let mu: Arc<Vec<usize>> = Arc::new((0..TABLE_LEVELS).map(|_| rng.random_range(0..=max_mu)).collect());
    let limit: Arc<Vec<Bit>> = Arc::new((0..TABLE_LEVELS).map(|_| Bit::from(rng.random_bool(0.5))).collect());
    let (mu1, lim1, lim2) = (mu.clone(), limit.clone(), limit);
    TwoFun::new(
        move |k, a, b| {
            if k >= TABLE_LEVELS {
                Bit::Zero
            } else if a >= mu1[k] {
                lim1[k]
            } else {
                hashed_bit(key, k, a, b)
            }
        },
        move |k| lim2.get(k).copied().unwrap_or(Bit::Zero),
        move |k| mu.get(k).copied().unwrap_or(0),
    )
}

/// A single change to a function on `ℕ × F` that keeps its certificate
/// valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flip {
    /// Flip one finite value; the modulus of its row grows past `a` if needed.
    Probe { k: usize, a: usize, b: usize },
    /// Flip the limit of row `k` together with every value at or beyond
    /// the modulus.
    Row { k: usize },
}

impl Flip {
    pub fn apply(self, h: &TwoFun) -> TwoFun {
        let (hf, hl, hm) = (h.clone(), h.clone(), h.clone());
        match self {
            Flip::Probe { k, a, b } => TwoFun::new(
                move |kk, aa, bb| {
                    let v = hf.at_finite(kk, aa, bb);
                    if (kk, aa, bb) == (k, a, b) {
                        v.flip()
                    } else {
                        v
                    }
                },
                move |kk| hl.at_limit(kk),
                move |kk| {
                    let m = hm.constancy_modulus(kk);
                    if kk == k {
                        m.max(a + 1)
                    } else {
                        m
                    }
                },
            ),
            Flip::Row { k } => {
                let mk = h.constancy_modulus(k);
                TwoFun::new(
                    move |kk, aa, bb| {
                        let v = hf.at_finite(kk, aa, bb);
                        if kk == k && aa >= mk {
                            v.flip()
                        } else {
                            v
                        }
                    },
                    move |kk| if kk == k { hl.at_limit(kk).flip() } else { hl.at_limit(kk) },
                    move |kk| hm.constancy_modulus(kk),
                )
            }
        }
    }
}

/// Random flip with all indices `<= bound`; rows are flipped one time in
/// eight.
pub fn random_flip(rng: &mut SampleRng, bound: usize) -> Flip {
    let k = rng.random_range(0..=bound);
    if rng.random_range(0..8) == 0 {
        Flip::Row { k }
    } else {
        Flip::Probe { k, a: rng.random_range(0..=bound), b: rng.random_range(0..=bound) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::twofun_certify;
    use crate::retract_core::g_apply;
    use crate::spaces::{grid_check, Coords};

    #[test]
    fn seeded_points_repeat() {
        let a: Vec<MPoint> = (0..20)
            .map({
                let mut r = rng(5);
                move |_| standard_mpoint(&mut r)
            })
            .collect();
        let b: Vec<MPoint> = (0..20)
            .map({
                let mut r = rng(5);
                move |_| standard_mpoint(&mut r)
            })
            .collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x.support().count() <= 20 && x.support_end() <= 31));
    }

    #[test]
    fn grid_points_are_on_grid() {
        let mut r = rng(2);
        let x = random_grid_point(&mut r, 20);
        assert!((0..25).all(|i| grid_check(i, &x.coord(i))));
        assert!(x.support_end() <= 20);
    }

    #[test]
    fn generated_functions_are_certified() {
        let mut r = rng(9);
        for _ in 0..20 {
            let h = random_certified_twofun(&mut r, 6);
            assert!(twofun_certify(&h, 12, 12).is_pass());
            let flip = random_flip(&mut r, 10);
            assert!(twofun_certify(&flip.apply(&h), 12, 12).is_pass(), "{flip:?}");
        }
        let x = standard_mpoint(&mut r);
        let g = g_apply(&x);
        for _ in 0..20 {
            let flip = random_flip(&mut r, 12);
            assert!(twofun_certify(&flip.apply(&g), 14, 12).is_pass(), "{flip:?}");
        }
    }

    #[test]
    fn probe_flip_changes_one_value() {
        let h = TwoFun::constant(Bit::Zero);
        let f = Flip::Probe { k: 2, a: 3, b: 1 }.apply(&h);
        assert_eq!(f.at_finite(2, 3, 1), Bit::One);
        assert_eq!(f.at_finite(2, 3, 2), Bit::Zero);
        assert_eq!(f.constancy_modulus(2), 4);
        let r = Flip::Row { k: 1 }.apply(&h);
        assert_eq!((r.at_limit(1), r.at_finite(1, 0, 0), r.at_limit(0)), (Bit::One, Bit::One, Bit::Zero));
    }
}
