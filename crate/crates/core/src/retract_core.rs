//! The embedding `e_M : M → ∏M_i × 2^(ℕ×F)` and its retraction `r_M`.
//!
//! * `f(x,k,a,b) = 0` iff `∑_{i=a}^{a+b} x(i) <= 2^-k`.
//! * `g(y)(k,a,b) = f(y,k,a,b)` and `g(y)(k,∞,∞) = 0`.
//! * `e_M(x) = (x, g(x))`.
//! * `C_m` holds the pairs `(x,h)` with `h(k,∞,∞) = 0` and
//!   `h(k,a,b) = f(x,k,a,b)` for all `k,a,b <= m`. The sets decrease in `m`.
//! * `r_M(x,h)(m) = x(m)` if `(x,h) ∈ C_m`, else `0`.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::dyadic::{dy_sum, Cutoff, Dyadic};
use crate::funcspace::{Bit, Provenance, TwoFun};
use crate::spaces::{Coords, MPoint, MStream, TailBounded};

/// Reference evaluation of `f` by exact summation of the window.
pub fn f_eval(x: &impl Coords, k: usize, a: usize, b: usize) -> Bit {
    let window: Vec<Dyadic> = (a..=a + b).map(|i| x.coord(i)).collect();
    Bit::from(!dy_sum(&window).le_pow2_neg(k))
}

type WindowFn = Arc<dyn Fn(usize, usize, usize) -> Bit + Send + Sync>;

/// Points that `g` can be applied to.
pub trait Summable: TailBounded + Clone + Send + Sync + 'static {
    /// `(k, a, b) ↦ f(self, k, a, b)` as a shareable closure.
    fn window_fn(&self) -> WindowFn {
        let x = self.clone();
        Arc::new(move |k, a, b| f_eval(&x, k, a, b))
    }
}

impl Summable for MStream {}

impl Summable for MPoint {
    /// Window sums of a finite point only change where a support index
    /// enters or leaves the window, so every cutoff is tabulated up front.
    fn window_fn(&self) -> WindowFn {
        let idx: Vec<usize> = self.support().map(|(i, _)| i).collect();
        let mut prefix = vec![Dyadic::zero()];
        for (_, q) in self.support() {
            let next = prefix.last().expect("nonempty") + q;
            prefix.push(next);
        }
        let s = idx.len();
        let mut cut = vec![Cutoff::All; (s + 1) * (s + 1)];
        for lo in 0..s {
            for hi in lo + 1..=s {
                cut[lo * (s + 1) + hi] = (&prefix[hi] - &prefix[lo]).cutoff();
            }
        }
        Arc::new(move |k, a, b| {
            let lo = idx.partition_point(|&i| i < a);
            let hi = idx.partition_point(|&i| i <= a + b);
            Bit::from(!cut[lo * (s + 1) + hi].admits(k))
        })
    }
}

/// `g(y)`: the window bits of `y`, limit values `0`, and constancy modulus
/// `k ↦ tail_bound(k)` (the support end for a finite point).
pub fn g_apply<Y: Summable>(y: &Y) -> TwoFun {
    let window = y.window_fn();
    let tail = y.clone();
    TwoFun::new(move |k, a, b| window(k, a, b), |_| Bit::Zero, move |k| tail.tail_bound(k))
        .with_provenance(Provenance::Graph)
}

pub fn e_m<Y: Summable>(x: &Y) -> (Y, TwoFun) {
    (x.clone(), g_apply(x))
}

/// Least `m` with `∑_{i>=m} x(i) < 2^(-k-1)`: the point beyond which every
/// window of `x` is certainly `0` at level `k`, even after perturbing `x`
/// by less than `2^(-k-1)` in norm.
pub fn lemma5_modulus(x: &MPoint, k: usize) -> usize {
    let strict = Dyadic::pow2_neg(k + 1);
    let entries: Vec<(usize, Dyadic)> = x.support().map(|(i, q)| (i, q.clone())).collect();
    let mut tail = Dyadic::zero();
    for (i, q) in entries.iter().rev() {
        tail += q;
        if tail >= strict {
            return i + 1;
        }
    }
    0
}

/// The finite set of probes that decides membership in `C_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CmDescriptor {
    pub m: usize,
}

impl CmDescriptor {
    pub fn new(m: usize) -> Self {
        CmDescriptor { m }
    }

    /// Largest coordinate of `x` read: windows `[a, a+b]` with `a, b <= m`.
    pub fn max_x_coord(&self) -> usize {
        2 * self.m
    }

    pub fn reads_x(&self, i: usize) -> bool {
        i <= self.max_x_coord()
    }

    pub fn reads_h(&self, k: usize, a: usize, b: usize) -> bool {
        k <= self.m && a <= self.m && b <= self.m
    }

    pub fn reads_limit(&self, k: usize) -> bool {
        k <= self.m
    }

    pub fn h_probes(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let m = self.m;
        (0..=m).flat_map(move |k| (0..=m).flat_map(move |a| (0..=m).map(move |b| (k, a, b))))
    }

    /// Audit dump: one record per probe.
    pub fn to_records(&self) -> Vec<String> {
        let mut out = vec![format!(
            "m={} x_coords=0..={} h_probes={} limit_probes={}",
            self.m,
            self.max_x_coord(),
            (self.m + 1).pow(3),
            self.m + 1
        )];
        out.extend((0..=self.max_x_coord()).map(|i| format!("probe=x i={i}")));
        out.extend((0..=self.m).map(|k| format!("probe=h_limit k={k}")));
        out.extend(self.h_probes().map(|(k, a, b)| format!("probe=h k={k} a={a} b={b}")));
        out
    }
}

/// Incremental membership scan through `C_0 ⊇ C_1 ⊇ ...`.
///
/// Level `l` adds the probes with `max(k, a, b) = l` and the limit probe
/// `k = l`; window cutoffs are computed once per window.
#[derive(Debug, Default)]
struct FiltrationScan {
    /// `prefix[n] = x(0) + ... + x(n-1)`.
    prefix: Vec<Dyadic>,
    /// `cutoffs[a][b]` for the window `[a, a+b]`.
    cutoffs: Vec<Vec<Cutoff>>,
    /// Levels `0..verified` are known to contain the pair.
    verified: usize,
    failed: Option<usize>,
}

impl FiltrationScan {
    fn new() -> Self {
        FiltrationScan { prefix: vec![Dyadic::zero()], ..Default::default() }
    }

    fn extend_prefix(&mut self, x: &impl Coords, len: usize) {
        while self.prefix.len() <= len {
            let i = self.prefix.len() - 1;
            let next = self.prefix.last().expect("nonempty") + &x.coord(i);
            self.prefix.push(next);
        }
    }

    fn window_cutoff(&self, a: usize, b: usize) -> Cutoff {
        (&self.prefix[a + b + 1] - &self.prefix[a]).cutoff()
    }

    fn grow_level(&mut self, l: usize) {
        for a in 0..l {
            let c = self.window_cutoff(a, l);
            self.cutoffs[a].push(c);
        }
        let row = (0..=l).map(|b| self.window_cutoff(l, b)).collect();
        self.cutoffs.push(row);
    }

    fn expected(&self, k: usize, a: usize, b: usize) -> Bit {
        Bit::from(!self.cutoffs[a][b].admits(k))
    }

    fn level_holds(&self, h: &TwoFun, l: usize) -> bool {
        if h.at_limit(l) != Bit::Zero {
            return false;
        }
        for k in 0..=l {
            for a in 0..=l {
                for b in 0..=l {
                    if (k == l || a == l || b == l) && h.at_finite(k, a, b) != self.expected(k, a, b) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether the pair lies in `C_m`.
    fn member(&mut self, x: &impl Coords, h: &TwoFun, m: usize) -> bool {
        if let Some(f) = self.failed {
            return m < f;
        }
        while self.verified <= m {
            let l = self.verified;
            self.extend_prefix(x, 2 * l + 1);
            self.grow_level(l);
            if !self.level_holds(h, l) {
                self.failed = Some(l);
                return false;
            }
            self.verified += 1;
        }
        true
    }

    /// Least failing level among `0..=upto`, if any.
    fn first_failure(&mut self, x: &impl Coords, h: &TwoFun, upto: usize) -> Option<usize> {
        self.member(x, h, upto);
        self.failed
    }
}

/// Exact decision of `(x, h) ∈ C_m`. Reads exactly the probes listed by
/// [`CmDescriptor::new(m)`](CmDescriptor).
pub fn c_m_member(x: &impl Coords, h: &TwoFun, m: usize) -> bool {
    FiltrationScan::new().member(x, h, m)
}

/// Least `m <= upto` with `(x, h) ∉ C_m`.
pub fn failure_level(x: &impl Coords, h: &TwoFun, upto: usize) -> Option<usize> {
    FiltrationScan::new().first_failure(x, h, upto)
}

pub fn r_m_coord(x: &impl Coords, h: &TwoFun, m: usize) -> Dyadic {
    let xm = x.coord(m);
    // both branches of the definition agree when x(m) = 0
    if xm.is_zero() || !c_m_member(x, h, m) {
        Dyadic::zero()
    } else {
        xm
    }
}

/// `r_M(x, h)` as a stream of `M`.
///
/// Tail bound `k ↦ max(μ_h(k), k)`: if `h(k,∞,∞) = 0` the tail from there is
/// at most `2^-k` by the window argument; otherwise the pair leaves `C_k` and
/// every coordinate from `k` on vanishes.
pub fn r_m<X: Coords + Send + Sync + 'static>(x: X, h: TwoFun) -> MStream {
    let scan = Arc::new(Mutex::new(FiltrationScan::new()));
    let hm = h.clone();
    MStream::new(
        move |m| {
            let xm = x.coord(m);
            if xm.is_zero() {
                return xm;
            }
            let mut scan = scan.lock().unwrap_or_else(|e| e.into_inner());
            if scan.member(&x, &h, m) {
                xm
            } else {
                Dyadic::zero()
            }
        },
        move |k| hm.constancy_modulus(k).max(k),
    )
}

/// `r_M(x, h)` for a finitely supported `x`; the result is again finite.
pub fn r_m_point(x: &MPoint, h: &TwoFun) -> MPoint {
    let end = x.support_end();
    if end == 0 {
        return MPoint::zero();
    }
    let cut = failure_level(x, h, end - 1).unwrap_or(end);
    MPoint::new(x.support().take_while(|(i, _)| *i < cut).map(|(i, q)| (i, q.clone()))).expect("subset of a grid point")
}

/// Outcome of the window check for the tail estimate of `r_M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailCheck {
    /// Hypothesis held on every probe and the window sum is within `2^-k`.
    Holds { sum: Dyadic },
    /// A hypothesis probe failed; nothing is claimed.
    HypothesisFails { reason: String },
    /// Hypothesis held but the window sum exceeds `2^-k`.
    Violated { sum: Dyadic },
}

impl TailCheck {
    pub fn is_violation(&self) -> bool {
        matches!(self, TailCheck::Violated { .. })
    }
}

impl fmt::Display for TailCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailCheck::Holds { sum } => write!(f, "holds (sum {sum})"),
            TailCheck::HypothesisFails { reason } => write!(f, "hypothesis fails: {reason}"),
            TailCheck::Violated { sum } => write!(f, "violated (sum {sum})"),
        }
    }
}

/// If `a >= k` and `h(k, a', b) = 0` for all `a' >= a`, then
/// `∑_{i>=a} r_M(x,h)(i) <= 2^-k`. The hypothesis is sampled on
/// `a' ∈ [a, a + window]`, `b <= window`, except where the provenance of
/// `h` already proves it; the conclusion is checked on `[a, a + window]`.
pub fn lemma61_check<X: Coords + Clone + Send + Sync + 'static>(
    x: &X,
    h: &TwoFun,
    k: usize,
    a: usize,
    window: usize,
) -> TailCheck {
    if a < k {
        return TailCheck::HypothesisFails { reason: format!("a = {a} < k = {k}") };
    }
    let proven_from = match h.provenance() {
        Provenance::Graph => Some(h.constancy_modulus(k)),
        Provenance::Opaque => None,
    };
    for a2 in a..=a + window {
        if proven_from.is_some_and(|m| a2 >= m) {
            break;
        }
        for b in 0..=window {
            if h.at_finite(k, a2, b) != Bit::Zero {
                return TailCheck::HypothesisFails { reason: format!("h({k},{a2},{b}) = 1") };
            }
        }
    }
    let z = r_m(x.clone(), h.clone());
    let coords: Vec<Dyadic> = (a..=a + window).map(|i| z.coord(i)).collect();
    let sum = dy_sum(&coords);
    if sum.le_pow2_neg(k) {
        TailCheck::Holds { sum }
    } else {
        TailCheck::Violated { sum }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::twofun_certify;
    use crate::spaces::GridStream;

    fn d(j: i64, e: usize) -> Dyadic {
        Dyadic::new(j, e)
    }

    fn pt(entries: &[(usize, i64, usize)]) -> MPoint {
        MPoint::new(entries.iter().map(|&(i, j, e)| (i, d(j, e)))).unwrap()
    }

    /// Membership straight from the definition.
    fn c_m_naive(x: &impl Coords, h: &TwoFun, m: usize) -> bool {
        (0..=m).all(|k| h.at_limit(k) == Bit::Zero)
            && CmDescriptor::new(m).h_probes().all(|(k, a, b)| h.at_finite(k, a, b) == f_eval(x, k, a, b))
    }

    #[test]
    fn f_values() {
        assert_eq!(f_eval(&MPoint::zero(), 4, 2, 9), Bit::Zero);
        assert_eq!(f_eval(&pt(&[(0, 1, 0)]), 1, 0, 0), Bit::One);
        assert_eq!(f_eval(&MStream::geometric(), 1, 1, 2), Bit::One);
        // boundary: the sum 1/2 equals 2^-1 exactly
        assert_eq!(f_eval(&pt(&[(1, 1, 1)]), 1, 0, 5), Bit::Zero);
    }

    #[test]
    fn tabulated_windows_match_reference() {
        let x = pt(&[(0, 1, 0), (2, 3, 2), (3, 1, 3), (7, 5, 7), (9, 1, 9)]);
        let g = g_apply(&x);
        for k in 0..12 {
            for a in 0..12 {
                for b in 0..12 {
                    assert_eq!(g.at_finite(k, a, b), f_eval(&x, k, a, b), "({k},{a},{b})");
                }
            }
        }
    }

    #[test]
    fn g_examples() {
        let z = g_apply(&MPoint::zero());
        assert!((0..5).all(|k| z.constancy_modulus(k) == 0 && z.at_finite(k, 1, 2) == Bit::Zero));

        let g = g_apply(&pt(&[(0, 1, 0)]));
        assert_eq!(g.at_finite(1, 0, 0), Bit::One);
        assert!((0..20).all(|b| g.at_finite(1, 1, b) == Bit::Zero));
        assert_eq!(g.constancy_modulus(1), 1);

        let g = g_apply(&pt(&[(0, 1, 0), (3, 1, 3)]));
        assert_eq!(g.constancy_modulus(2), 4);
        assert!((0..20).all(|b| g.at_finite(2, 4, b) == Bit::Zero));
    }

    #[test]
    fn graph_is_certified() {
        let g = g_apply(&pt(&[(1, 1, 1), (4, 3, 4), (6, 1, 6)]));
        assert!(twofun_certify(&g, 10, 10).is_pass());
        assert!(twofun_certify(&g_apply(&MStream::geometric()), 8, 10).is_pass());
        let (x, h) = e_m(&pt(&[(0, 1, 0)]));
        assert_eq!(x, pt(&[(0, 1, 0)]));
        assert!(twofun_certify(&h, 6, 6).is_pass());
    }

    #[test]
    fn lemma5_modulus_is_tight() {
        let x = pt(&[(0, 1, 0), (3, 1, 3), (5, 1, 5)]);
        // tails: from 0: 1+1/8+1/32, from 1..=3: 5/32, from 4..=5: 1/32, from 6: 0
        assert_eq!(lemma5_modulus(&x, 0), 1);
        assert_eq!(lemma5_modulus(&x, 2), 4);
        assert_eq!(lemma5_modulus(&x, 4), 6);
        assert_eq!(lemma5_modulus(&MPoint::zero(), 3), 0);
    }

    #[test]
    fn membership_examples() {
        let x = pt(&[(1, 1, 1), (2, 3, 2)]);
        let g = g_apply(&x);
        assert!((0..8).all(|m| c_m_member(&x, &g, m)));
        assert!(!c_m_member(&pt(&[(0, 1, 0)]), &TwoFun::constant(Bit::Zero), 1));
        let bad_limit = TwoFun::new(|_, _, _| Bit::Zero, |k| Bit::from(k == 0), |_| 0);
        assert!(!c_m_member(&MPoint::zero(), &bad_limit, 0));
    }

    #[test]
    fn scan_matches_naive_definition() {
        let x = pt(&[(0, 1, 0), (1, 1, 1), (4, 3, 4)]);
        let g = g_apply(&x);
        let flips = [(0, 0, 0), (2, 1, 3), (3, 3, 0), (4, 0, 4)];
        for &(fk, fa, fb) in &flips {
            let g2 = g.clone();
            let h = TwoFun::new(
                move |k, a, b| {
                    if (k, a, b) == (fk, fa, fb) {
                        g2.at_finite(k, a, b).flip()
                    } else {
                        g2.at_finite(k, a, b)
                    }
                },
                |_| Bit::Zero,
                |_| 8,
            );
            for m in 0..7 {
                assert_eq!(c_m_member(&x, &h, m), c_m_naive(&x, &h, m), "flip {:?} m {m}", (fk, fa, fb));
            }
            assert_eq!(failure_level(&x, &h, 10), Some(fk.max(fa).max(fb)));
        }
    }

    #[test]
    fn retraction_coordinates() {
        let x = pt(&[(1, 1, 1)]);
        let g = g_apply(&x);
        for m in 0..=10 {
            assert_eq!(r_m_coord(&x, &g, m), x.coord(m));
        }
        let y = pt(&[(0, 1, 0), (2, 1, 2)]);
        let broken = TwoFun::constant(Bit::One);
        assert!((0..6).all(|m| r_m_coord(&y, &broken, m).is_zero()));
        let zero = TwoFun::constant(Bit::Zero);
        assert!((0..6).all(|m| r_m_coord(&MPoint::zero(), &zero, m).is_zero()));
    }

    #[test]
    fn retraction_truncates_at_failure_level() {
        // x agrees with h up to level 2, first disagreement at level 3
        let x = pt(&[(0, 1, 0), (1, 1, 1), (2, 1, 2), (3, 1, 3), (4, 1, 4)]);
        let g = g_apply(&x);
        let h = TwoFun::new(
            move |k, a, b| if (k, a, b) == (3, 0, 0) { g.at_finite(k, a, b).flip() } else { g.at_finite(k, a, b) },
            |_| Bit::Zero,
            |_| 5,
        );
        assert!(c_m_member(&x, &h, 2) && !c_m_member(&x, &h, 3));
        let z = r_m_point(&x, &h);
        assert_eq!(z, pt(&[(0, 1, 0), (1, 1, 1), (2, 1, 2)]));
        let s = r_m(x.clone(), h);
        assert!((0..10).all(|i| s.coord(i) == z.coord(i)));
    }

    #[test]
    fn retraction_tail_bound_holds_off_image() {
        let x = GridStream::new(|i| if i % 3 == 0 { Dyadic::one() } else { Dyadic::zero() });
        let h = TwoFun::new(|k, a, _| Bit::from(a < 2 * k), |_| Bit::Zero, |k| 2 * k);
        let z = r_m(x, h);
        assert!(z.check_tail(6, 20).is_pass());
        assert!(z.check_grid(40).is_ok());
    }

    #[test]
    fn tail_checks() {
        let x = pt(&[(0, 1, 0), (5, 1, 5)]);
        let g = g_apply(&x);
        assert_eq!(lemma61_check(&x, &g, 3, 6, 10), TailCheck::Holds { sum: Dyadic::zero() });
        let zero = TwoFun::constant(Bit::Zero);
        assert_eq!(lemma61_check(&MPoint::zero(), &zero, 0, 0, 5), TailCheck::Holds { sum: Dyadic::zero() });
        assert_eq!(lemma61_check(&x, &g, 4, 4, 10), TailCheck::Holds { sum: d(1, 5) });
        assert_eq!(lemma61_check(&x, &g, 5, 5, 3), TailCheck::Holds { sum: d(1, 5) });
        assert!(matches!(lemma61_check(&x, &g, 3, 2, 4), TailCheck::HypothesisFails { .. }));
        let y = pt(&[(1, 1, 0), (2, 1, 2)]);
        let gy = g_apply(&y);
        assert!(matches!(lemma61_check(&y, &gy, 1, 1, 4), TailCheck::HypothesisFails { .. }));
    }

    #[test]
    fn tail_check_with_zero_row_replays_induction() {
        // h vanishes on row k for a >= k, but x is arbitrary: the retraction
        // must still keep the tail from a = k within 2^-k.
        let x = pt(&[(2, 3, 2), (3, 7, 3), (4, 1, 4), (6, 1, 1)]);
        for k in 0..4 {
            let g = g_apply(&x);
            let h = TwoFun::new(
                move |kk, a, b| if kk == k && a >= k { Bit::Zero } else { g.at_finite(kk, a, b) },
                |_| Bit::Zero,
                move |_| 7,
            );
            let r = lemma61_check(&x, &h, k, k, 12);
            assert!(matches!(r, TailCheck::Holds { .. }), "k = {k}: {r}");
        }
    }

    #[test]
    fn descriptor_dump() {
        let d = CmDescriptor::new(1);
        let recs = d.to_records();
        assert_eq!(recs[0], "m=1 x_coords=0..=2 h_probes=8 limit_probes=2");
        assert_eq!(recs.len(), 1 + 3 + 2 + 8);
        assert!(d.reads_h(1, 0, 1) && !d.reads_h(2, 0, 0) && d.reads_x(2) && !d.reads_x(3));
    }
}
