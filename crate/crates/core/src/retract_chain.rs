//! The outer retract chain
//! `M ⊲ ∏M_i × 2^(ℕ×F) ≅ 2^(ℕ×F) ⊲ ℕ^(ℕ^ℕ)`.
//!
//! * `∏M_i ≅ 2^ℕ` by concatenating codewords of a complete prefix-free
//!   code per level ([`code_build`], [`mprod_encode`], [`mprod_decode`]).
//! * `2^ℕ × 2^(ℕ×F) ≅ 2^(ℕ×F)` through the index bijection
//!   `ℕ ⊔ (ℕ×F) ≅ ℕ×F` of [`fan_absorb`].
//! * `ℕ×F` is a retract of `ℕ^ℕ` via the gap encoding
//!   `(n, (a,b)) ↦ n 0^a (b+1) 0^ω`, `(n, ∞) ↦ n 0^ω`; lifting along it gives
//!   `2^(ℕ×F) ⊲ ℕ^(ℕ^ℕ)` ([`lift_h`], [`restrict_h`]).

use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::dyadic::{dy_sum, Dyadic};
use crate::funcspace::{twofun_eval, BairePoint, BigFun, Bit, TwoFun};
use crate::retract_core::{e_m, r_m, r_m_point};
use crate::spaces::{grid_check, Coords, FanPoint, GridStream, MPoint, MStream, NxFanPoint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("coordinate {index} = {value} is not in M_{index}")]
    OffGrid { index: usize, value: Dyadic },
    #[error("invalid bit string: {0}")]
    Bits(String),
}

/// Finite bit string, printed as ASCII `0`/`1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ChainError::Bits(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

/// Complete prefix-free code for the `2^i + 1` symbols of `M_i`; symbol `j`
/// (the value `j·2^-i`) gets `words[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixCode {
    pub level: usize,
    pub words: Vec<BitString>,
}

impl PrefixCode {
    pub fn is_prefix_free(&self) -> bool {
        let mut sorted: Vec<&BitString> = self.words.iter().collect();
        sorted.sort();
        // in lexicographic order a prefix sorts immediately before some extension
        sorted.windows(2).all(|w| !w[0].is_prefix_of(w[1]))
    }

    /// `∑ 2^-len(w)`; exactly `1` for a complete code.
    pub fn kraft_sum(&self) -> Dyadic {
        let terms: Vec<Dyadic> = self.words.iter().map(|w| Dyadic::pow2_neg(w.len())).collect();
        dy_sum(&terms)
    }

    /// `level j word` records.
    pub fn to_records(&self) -> Vec<String> {
        self.words.iter().enumerate().map(|(j, w)| format!("level={} j={j} word={w}", self.level)).collect()
    }
}

/// Complete prefix-free code with `n >= 1` words, grown from the empty word
/// by repeatedly splitting the lexicographically last of the shortest
/// words. Words are returned in lexicographic order.
pub fn complete_code(n: usize) -> Vec<BitString> {
    assert!(n >= 1, "a code needs at least one word");
    let mut slots: BTreeSet<(usize, Reverse<Vec<bool>>)> = BTreeSet::new();
    slots.insert((0, Reverse(Vec::new())));
    while slots.len() < n {
        let (len, Reverse(w)) = slots.pop_first().expect("nonempty");
        for bit in [false, true] {
            let mut child = w.clone();
            child.push(bit);
            slots.insert((len + 1, Reverse(child)));
        }
    }
    let mut words: Vec<BitString> = slots.into_iter().map(|(_, Reverse(w))| BitString(w)).collect();
    words.sort();
    words
}

/// The canonical code of level `i` (`2^i + 1` words).
pub fn code_build(i: usize) -> PrefixCode {
    let n = (1usize << i) + 1;
    PrefixCode { level: i, words: complete_code(n) }
}

/// Closed form of `code_build(i).words[j]`: the `i`-bit binary expansion of
/// `j` for `j < 2^i - 1`, then `1^i 0` and `1^(i+1)`.
pub fn codeword(i: usize, j: &BigInt) -> BitString {
    let top = BigInt::one() << i;
    let all_ones = &top - 1;
    if *j < all_ones {
        BitString((0..i).rev().map(|bit| j.bit(bit as u64)).collect())
    } else {
        let mut w = vec![true; i];
        w.push(*j == top);
        BitString(w)
    }
}

/// Reads one codeword of level `i`; `None` when the bits run out.
fn decode_symbol(i: usize, next: &mut impl FnMut() -> Option<bool>) -> Option<BigInt> {
    let mut v = BigInt::zero();
    let mut ones = true;
    for _ in 0..i {
        let b = next()?;
        v = (v << 1) + u8::from(b);
        ones &= b;
    }
    if !ones {
        return Some(v);
    }
    let last = next()?;
    Some(if last { BigInt::one() << i } else { v })
}

/// Concatenated codewords of `x(0), ..., x(depth-1)`.
pub fn mprod_encode(x: &impl Coords, depth: usize) -> Result<BitString, ChainError> {
    let mut bits = Vec::new();
    for i in 0..depth {
        let q = x.coord(i);
        if !grid_check(i, &q) {
            return Err(ChainError::OffGrid { index: i, value: q });
        }
        let j = q.grid_index(i).expect("grid value");
        bits.extend(codeword(i, &j).0);
    }
    Ok(BitString(bits))
}

/// Greedy parse of a bit string into coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub coords: Vec<Dyadic>,
    /// Bits consumed by the complete codewords.
    pub consumed: usize,
    /// The input ended before `depth` coordinates were read.
    pub incomplete: bool,
}

pub fn mprod_decode(bits: &BitString, depth: usize) -> Decoded {
    let mut pos = 0;
    let mut coords = Vec::new();
    for i in 0..depth {
        let start = pos;
        let mut next = || {
            let b = bits.0.get(pos).copied();
            pos += 1;
            b
        };
        match decode_symbol(i, &mut next) {
            Some(j) => coords.push(Dyadic::new(j, i)),
            None => {
                return Decoded { coords, consumed: start, incomplete: true };
            }
        }
    }
    Decoded { coords, consumed: pos, incomplete: false }
}

type BitFn = Arc<dyn Fn(usize) -> Bit + Send + Sync>;

/// Infinite code stream of a finite point: bit `n` of the concatenation of
/// all codewords. Past the support every codeword is all zeros.
fn code_stream(x: &MPoint) -> BitFn {
    let end = x.support_end().max(1);
    let prefix = mprod_encode(x, end).expect("grid values").0;
    Arc::new(move |n| Bit::from(prefix.get(n).copied().unwrap_or(false)))
}

#[derive(Default)]
struct DecodeState {
    coords: Vec<Dyadic>,
    pos: usize,
}

/// Point of `∏M_i` decoded lazily from an infinite bit stream.
fn decode_stream(bits: BitFn) -> GridStream {
    let state = Arc::new(Mutex::new(DecodeState::default()));
    GridStream::new(move |i| {
        let mut st = state.lock().unwrap_or_else(|e| e.into_inner());
        while st.coords.len() <= i {
            let level = st.coords.len();
            let mut pos = st.pos;
            let mut next = || {
                let b = bits(pos) == Bit::One;
                pos += 1;
                Some(b)
            };
            let j = decode_symbol(level, &mut next).expect("infinite stream");
            st.pos = pos;
            st.coords.push(Dyadic::new(j, level));
        }
        st.coords[i].clone()
    })
}

/// Point of `ℕ ⊔ (ℕ × F)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Summand {
    Left(usize),
    Right(NxFanPoint),
}

/// Bijection `ℕ ⊔ (ℕ×F) → ℕ×F`: `inl k ↦ (0,(0,k))`, `(0,(a,b)) ↦ (0,(a+1,b))`,
/// everything else fixed.
pub fn fan_absorb(p: Summand) -> NxFanPoint {
    match p {
        Summand::Left(k) => NxFanPoint::new(0, FanPoint::finite(0, k)),
        Summand::Right(NxFanPoint { n: 0, p: FanPoint::Finite { a, b } }) => {
            NxFanPoint::new(0, FanPoint::finite(a + 1, b))
        }
        Summand::Right(q) => q,
    }
}

pub fn fan_absorb_inv(q: NxFanPoint) -> Summand {
    match q {
        NxFanPoint { n: 0, p: FanPoint::Finite { a: 0, b } } => Summand::Left(b),
        NxFanPoint { n: 0, p: FanPoint::Finite { a, b } } => {
            Summand::Right(NxFanPoint::new(0, FanPoint::finite(a - 1, b)))
        }
        q => Summand::Right(q),
    }
}

/// Gap encoding of `ℕ × F` into the Baire space.
pub fn baire_section(q: NxFanPoint) -> BairePoint {
    let n = q.n as u64;
    match q.p {
        FanPoint::Finite { a, b } => {
            let mark = b as u64 + 1;
            BairePoint::new(move |i| match i {
                0 => n,
                i if i == a + 1 => mark,
                _ => 0,
            })
        }
        FanPoint::Infinity => BairePoint::new(move |i| if i == 0 { n } else { 0 }),
    }
}

/// `h ∘ r` for the Baire retraction `r`, reading `p(0)` and at most
/// `μ_h(p(0))` further entries.
pub fn lift_h(h: &TwoFun) -> BigFun {
    let h_eval = h.clone();
    let h_look = h.clone();
    BigFun::new(
        move |p| {
            let k = p.at(0) as usize;
            let mu = h_eval.constancy_modulus(k);
            for j in 1..=mu {
                let v = p.at(j);
                if v != 0 {
                    return h_eval.at_finite(k, j - 1, (v - 1) as usize).as_u64();
                }
            }
            h_eval.at_limit(k).as_u64()
        },
        move |n| h_look.constancy_modulus(n as usize) + 1,
    )
}

/// `q ↦ min(H(e(q)), 1)` with modulus inherited from the lookahead of `H`.
pub fn restrict_h(big: &BigFun) -> TwoFun {
    let (f1, f2, f3) = (big.clone(), big.clone(), big.clone());
    let clamp = |v: u64| Bit::from(v >= 1);
    TwoFun::new(
        move |k, a, b| clamp(f1.eval(&baire_section(NxFanPoint::new(k, FanPoint::finite(a, b))))),
        move |k| clamp(f2.eval(&baire_section(NxFanPoint::new(k, FanPoint::Infinity)))),
        move |k| f3.lookahead(k as u64).saturating_sub(1),
    )
}

/// Merge a bit stream and `h` into one function on `ℕ × F` along
/// [`fan_absorb`].
fn combine(bits: BitFn, h: TwoFun) -> TwoFun {
    let hf = h.clone();
    let hl = h.clone();
    TwoFun::new(
        move |n, a, b| match fan_absorb_inv(NxFanPoint::new(n, FanPoint::finite(a, b))) {
            Summand::Left(j) => bits(j),
            Summand::Right(q) => twofun_eval(&hf, q.n, &q.p),
        },
        move |n| hl.at_limit(n),
        move |n| if n == 0 { h.constancy_modulus(0) + 1 } else { h.constancy_modulus(n) },
    )
}

/// Inverse of [`combine`].
fn split(joined: &TwoFun) -> (BitFn, TwoFun) {
    let jb = joined.clone();
    let bits: BitFn = Arc::new(move |j| jb.at_finite(0, 0, j));
    let (jf, jl, jm) = (joined.clone(), joined.clone(), joined.clone());
    let h = TwoFun::new(
        move |n, a, b| {
            let q = fan_absorb(Summand::Right(NxFanPoint::new(n, FanPoint::finite(a, b))));
            twofun_eval(&jf, q.n, &q.p)
        },
        move |n| jl.at_limit(n),
        move |n| if n == 0 { jm.constancy_modulus(0).saturating_sub(1) } else { jm.constancy_modulus(n) },
    );
    (bits, h)
}

/// Section `M → ℕ^(ℕ^ℕ)`: `e_M`, Cantor-code the first component, absorb
/// it into the fan, lift to the Baire space.
pub fn section_full(x: &MPoint) -> BigFun {
    let (x, g) = e_m(x);
    lift_h(&combine(code_stream(&x), g))
}

/// Retraction `ℕ^(ℕ^ℕ) → M`, total on every bounded-lookahead functional.
pub fn retract_full(big: &BigFun) -> MStream {
    let (bits, h) = split(&restrict_h(big));
    r_m(decode_stream(bits), h)
}

type SectionFn<A, B> = Arc<dyn Fn(&A) -> B + Send + Sync>;

/// A section `A → B` with retraction `B → R`, where `R` is `A` or a
/// representation of it.
pub struct SectionRetractionPair<A, B, R = A> {
    pub name: String,
    section: SectionFn<A, B>,
    retraction: SectionFn<B, R>,
}

impl<A, B, R> Clone for SectionRetractionPair<A, B, R> {
    fn clone(&self) -> Self {
        SectionRetractionPair {
            name: self.name.clone(),
            section: self.section.clone(),
            retraction: self.retraction.clone(),
        }
    }
}

impl<A, B, R> SectionRetractionPair<A, B, R> {
    pub fn new(
        name: impl Into<String>,
        section: impl Fn(&A) -> B + Send + Sync + 'static,
        retraction: impl Fn(&B) -> R + Send + Sync + 'static,
    ) -> Self {
        SectionRetractionPair { name: name.into(), section: Arc::new(section), retraction: Arc::new(retraction) }
    }

    pub fn section(&self, a: &A) -> B {
        (self.section)(a)
    }

    pub fn retract(&self, b: &B) -> R {
        (self.retraction)(b)
    }

    pub fn round_trip(&self, a: &A) -> R {
        self.retract(&self.section(a))
    }
}

impl<A, B, R> fmt::Debug for SectionRetractionPair<A, B, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SectionRetractionPair({})", self.name)
    }
}

pub fn identity_pair<A: Clone + 'static>() -> SectionRetractionPair<A, A> {
    SectionRetractionPair::new("id", |a: &A| a.clone(), |a: &A| a.clone())
}

/// A point of `∏M_i × 2^(ℕ×F)` with finitely supported first component.
pub type ProdFanPoint = (MPoint, TwoFun);

pub fn em_pair() -> SectionRetractionPair<MPoint, ProdFanPoint> {
    SectionRetractionPair::new("e_M/r_M", |x: &MPoint| e_m(x), |(x, h): &ProdFanPoint| r_m_point(x, h))
}

pub fn lift_pair() -> SectionRetractionPair<TwoFun, BigFun> {
    SectionRetractionPair::new("lift/restrict", lift_h, restrict_h)
}

pub fn absorb_pair() -> SectionRetractionPair<Summand, NxFanPoint> {
    SectionRetractionPair::new("absorb", |p: &Summand| fan_absorb(*p), |q: &NxFanPoint| fan_absorb_inv(*q))
}

pub fn full_pair() -> SectionRetractionPair<MPoint, BigFun, MStream> {
    SectionRetractionPair::new("full", section_full, retract_full)
}

/// Whether a stream agrees with `x` on `0..depth` and its tail certificate
/// survives sampling up to `k_max`.
pub fn stream_matches(z: &MStream, x: &MPoint, depth: usize, k_max: usize) -> bool {
    (0..depth).all(|i| z.coord(i) == x.coord(i)) && z.check_tail(k_max, depth).is_pass()
}

/// Grid index helper for callers that hold a small level.
pub fn symbol_of(i: usize, q: &Dyadic) -> Option<usize> {
    q.grid_index(i).and_then(|j| j.to_usize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::twofun_certify;
    use crate::retract_core::g_apply;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn small_codes() {
        assert_eq!(code_build(0).words, vec![bits("0"), bits("1")]);
        assert_eq!(code_build(1).words, vec![bits("0"), bits("10"), bits("11")]);
        assert_eq!(code_build(2).words, vec![bits("00"), bits("01"), bits("10"), bits("110"), bits("111")]);
        assert_eq!(code_build(1).kraft_sum(), Dyadic::one());
    }

    #[test]
    fn closed_form_matches_splitting() {
        for i in 0..=10 {
            let code = code_build(i);
            assert!(code.is_prefix_free());
            assert_eq!(code.kraft_sum(), Dyadic::one());
            for (j, w) in code.words.iter().enumerate() {
                assert_eq!(&codeword(i, &BigInt::from(j)), w, "level {i} symbol {j}");
            }
        }
    }

    #[test]
    fn prefix_freeness_detects_violations() {
        let bad = PrefixCode { level: 1, words: vec![bits("0"), bits("01"), bits("1")] };
        assert!(!bad.is_prefix_free());
        let incomplete = PrefixCode { level: 1, words: vec![bits("0"), bits("10")] };
        assert_eq!(incomplete.kraft_sum(), Dyadic::new(3, 2));
    }

    #[test]
    fn encode_decode() {
        let x = MPoint::zero();
        assert_eq!(mprod_encode(&x, 3).unwrap(), bits("0000"));
        let x: MPoint = "[0:1, 1:1/2^1, 2:1]".parse().unwrap();
        let enc = mprod_encode(&x, 4).unwrap();
        assert_eq!(enc, bits("110111000"));
        let dec = mprod_decode(&enc, 4);
        assert!(!dec.incomplete);
        assert_eq!(dec.coords, (0..4).map(|i| x.coord(i)).collect::<Vec<_>>());
        let empty = mprod_decode(&BitString::default(), 3);
        assert!(empty.incomplete && empty.coords.is_empty());
        let partial = mprod_decode(&bits("1101"), 3);
        assert_eq!(partial.coords.len(), 2);
        assert!(partial.incomplete);
        assert_eq!(partial.consumed, 3);
    }

    #[test]
    fn encode_rejects_off_grid() {
        let x = GridStream::new(|i| if i == 1 { Dyadic::new(1, 2) } else { Dyadic::zero() });
        assert!(matches!(mprod_encode(&x, 3), Err(ChainError::OffGrid { index: 1, .. })));
    }

    #[test]
    fn encoding_is_prefix_monotone() {
        let x: MPoint = "[1:1/2^1, 3:5/2^3, 4:1]".parse().unwrap();
        for d in 0..10 {
            let short = mprod_encode(&x, d).unwrap();
            let long = mprod_encode(&x, d + 1).unwrap();
            assert!(short.is_prefix_of(&long));
        }
    }

    #[test]
    fn code_stream_matches_encoding() {
        let x: MPoint = "[0:1, 2:3/2^2, 5:1/2^5]".parse().unwrap();
        let enc = mprod_encode(&x, 8).unwrap();
        let s = code_stream(&x);
        for (n, b) in enc.0.iter().enumerate() {
            assert_eq!(s(n), Bit::from(*b));
        }
        let back = decode_stream(s);
        assert!((0..12).all(|i| back.coord(i) == x.coord(i)));
    }

    #[test]
    fn absorb_examples() {
        assert_eq!(fan_absorb(Summand::Left(7)), NxFanPoint::new(0, FanPoint::finite(0, 7)));
        assert_eq!(
            fan_absorb(Summand::Right(NxFanPoint::new(0, FanPoint::finite(2, 5)))),
            NxFanPoint::new(0, FanPoint::finite(3, 5))
        );
        let lim = NxFanPoint::new(0, FanPoint::Infinity);
        assert_eq!(fan_absorb(Summand::Right(lim)), lim);
        let other = NxFanPoint::new(4, FanPoint::finite(0, 1));
        assert_eq!(fan_absorb(Summand::Right(other)), other);
    }

    #[test]
    fn absorb_is_bijective_on_box() {
        let pair = absorb_pair();
        let mut images = BTreeSet::new();
        for n in 0..=50 {
            let p = Summand::Left(n);
            assert_eq!(pair.round_trip(&p), p);
            assert!(images.insert(pair.section(&p)));
        }
        for m in 0..4 {
            for fp in (0..=12).flat_map(|a| (0..=12).map(move |b| FanPoint::finite(a, b))).chain([FanPoint::Infinity]) {
                let p = Summand::Right(NxFanPoint::new(m, fp));
                assert_eq!(pair.round_trip(&p), p);
                assert!(images.insert(pair.section(&p)), "collision at {p:?}");
            }
        }
        for q in images {
            assert_eq!(fan_absorb(fan_absorb_inv(q)), q);
        }
    }

    #[test]
    fn baire_encoding() {
        let p = baire_section(NxFanPoint::new(3, FanPoint::finite(2, 4)));
        assert_eq!(p.prefix(7), vec![3, 0, 0, 5, 0, 0, 0]);
        let p = baire_section(NxFanPoint::new(3, FanPoint::Infinity));
        assert_eq!(p.prefix(5), vec![3, 0, 0, 0, 0]);
        let mut seen = BTreeSet::new();
        for n in 0..=20 {
            for fp in (0..=20).flat_map(|a| (0..=20).map(move |b| FanPoint::finite(a, b))).chain([FanPoint::Infinity]) {
                let pre = baire_section(NxFanPoint::new(n, fp)).prefix(23);
                assert!(pre[1..].iter().filter(|v| **v != 0).count() <= 1);
                assert!(seen.insert(pre));
            }
        }
    }

    #[test]
    fn lift_agrees_with_h() {
        let x: MPoint = "[0:1, 2:3/2^2, 4:1/2^4]".parse().unwrap();
        let h = g_apply(&x);
        let big = lift_h(&h);
        for k in 0..8 {
            for fp in (0..10).flat_map(|a| (0..10).map(move |b| FanPoint::finite(a, b))).chain([FanPoint::Infinity]) {
                let q = NxFanPoint::new(k, fp);
                assert_eq!(big.eval(&baire_section(q)), twofun_eval(&h, k, &fp).as_u64());
            }
        }
        let zero = lift_h(&TwoFun::constant(Bit::Zero));
        assert_eq!(zero.eval(&BairePoint::from_prefix(vec![2, 0, 7, 1])), 0);
    }

    #[test]
    fn lift_past_modulus_reads_limit() {
        let h = TwoFun::new(|k, a, _| Bit::from(a < k), |_| Bit::Zero, |k| k);
        let big = lift_h(&h);
        // first nonzero entry at position 6 > μ(3) = 3
        let p = BairePoint::from_prefix(vec![3, 0, 0, 0, 0, 0, 9]);
        assert_eq!(big.eval(&p), h.at_limit(3).as_u64());
        assert_eq!(h.at_finite(3, 5, 8), h.at_limit(3));
    }

    #[test]
    fn restrict_examples() {
        let seven = restrict_h(&BigFun::constant(7));
        assert!(twofun_certify(&seven, 4, 4).is_pass());
        assert_eq!(seven.at_finite(2, 3, 4), Bit::One);
        assert_eq!(seven.at_limit(0), Bit::One);
        let zero = restrict_h(&BigFun::constant(0));
        assert_eq!(zero.at_finite(5, 1, 1), Bit::Zero);
        assert_eq!(zero.constancy_modulus(3), 0);
    }

    #[test]
    fn combine_split_round_trip() {
        let x: MPoint = "[1:1/2^1, 3:1/2^3]".parse().unwrap();
        let g = g_apply(&x);
        let c = code_stream(&x);
        let joined = combine(c.clone(), g.clone());
        assert!(twofun_certify(&joined, 6, 8).is_pass());
        let (c2, g2) = split(&joined);
        assert!((0..40).all(|j| c(j) == c2(j)));
        for k in 0..6 {
            assert_eq!(g.constancy_modulus(k), g2.constancy_modulus(k));
            assert_eq!(g.at_limit(k), g2.at_limit(k));
            for a in 0..8 {
                for b in 0..8 {
                    assert_eq!(g.at_finite(k, a, b), g2.at_finite(k, a, b));
                }
            }
        }
    }

    #[test]
    fn full_chain_spot_cases() {
        for s in ["[]", "[1:1/2^1, 4:3/2^4]", "[0:1, 2:1/2^2, 7:5/2^7]"] {
            let x: MPoint = s.parse().unwrap();
            let z = retract_full(&section_full(&x));
            assert!(stream_matches(&z, &x, 20, 12), "{s}");
        }
    }

    #[test]
    fn em_pair_round_trip() {
        let pair = em_pair();
        let x: MPoint = "[0:1/2^0, 3:3/2^3, 9:1/2^9]".parse().unwrap();
        assert_eq!(pair.round_trip(&x), x);
        assert_eq!(identity_pair::<MPoint>().round_trip(&x), x);
    }

    #[test]
    fn bit_strings_parse() {
        assert_eq!(bits("0110").to_string(), "0110");
        assert!("01a".parse::<BitString>().is_err());
        assert_eq!(symbol_of(3, &Dyadic::new(5, 3)), Some(5));
        assert_eq!(symbol_of(2, &Dyadic::new(5, 3)), None);
    }
}
