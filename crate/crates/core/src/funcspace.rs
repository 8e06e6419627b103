//! Certified continuous maps `ℕ × F → 2` and bounded-lookahead functionals
//! `ℕ^ℕ → ℕ`.
//!
//! A [`TwoFun`] is continuous at every limit point `(k, (∞,∞))` exactly when
//! it is eventually constant along `a`; the producer supplies the point
//! where that happens as `constancy_modulus(k)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::spaces::{FanPoint, Modulus};
use crate::verdict::{Condition, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn as_u64(self) -> u64 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u64())
    }
}

/// What is known about where a [`TwoFun`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Modulus is a claim, checkable only by sampling.
    Opaque,
    /// The function is `g(y)` for a summable `y`; its limit values are all
    /// `0` and its modulus is `y`'s tail bound, so `h(k,a,b) = 0` is proven
    /// for every `a >= constancy_modulus(k)`.
    Graph,
}

type FiniteFn = Arc<dyn Fn(usize, usize, usize) -> Bit + Send + Sync>;
type LimitFn = Arc<dyn Fn(usize) -> Bit + Send + Sync>;

/// Continuous `h : ℕ × F → 2` with its constancy modulus.
#[derive(Clone)]
pub struct TwoFun {
    at_finite: FiniteFn,
    at_limit: LimitFn,
    modulus: Modulus,
    provenance: Provenance,
}

impl TwoFun {
    /// All three functions must be pure. `modulus(k) = m` claims
    /// `at_finite(k, a, b) = at_limit(k)` for all `a >= m` and all `b`.
    pub fn new(
        at_finite: impl Fn(usize, usize, usize) -> Bit + Send + Sync + 'static,
        at_limit: impl Fn(usize) -> Bit + Send + Sync + 'static,
        modulus: impl Fn(usize) -> usize + Send + Sync + 'static,
    ) -> Self {
        TwoFun {
            at_finite: Arc::new(at_finite),
            at_limit: Arc::new(at_limit),
            modulus: Arc::new(modulus),
            provenance: Provenance::Opaque,
        }
    }

    pub fn constant(bit: Bit) -> Self {
        TwoFun::new(move |_, _, _| bit, move |_| bit, |_| 0)
    }

    pub(crate) fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn at_finite(&self, k: usize, a: usize, b: usize) -> Bit {
        (self.at_finite)(k, a, b)
    }

    pub fn at_limit(&self, k: usize) -> Bit {
        (self.at_limit)(k)
    }

    pub fn constancy_modulus(&self, k: usize) -> usize {
        (self.modulus)(k)
    }

    pub fn modulus_fn(&self) -> Modulus {
        self.modulus.clone()
    }

    /// Finite restriction for serialization: every `(k, a, b)` with
    /// `k, a, b <= depth`, limit values and moduli for `k <= depth`.
    pub fn restrict(&self, depth: usize) -> TwoFunTable {
        let mut values = BTreeMap::new();
        for k in 0..=depth {
            for a in 0..=depth {
                for b in 0..=depth {
                    values.insert((k, a, b), self.at_finite(k, a, b));
                }
            }
        }
        TwoFunTable {
            depth,
            values,
            limits: (0..=depth).map(|k| self.at_limit(k)).collect(),
            moduli: (0..=depth).map(|k| self.constancy_modulus(k)).collect(),
        }
    }
}

impl fmt::Debug for TwoFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoFun").field("provenance", &self.provenance).finish_non_exhaustive()
    }
}

/// Finite restriction of a [`TwoFun`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoFunTable {
    pub depth: usize,
    pub values: BTreeMap<(usize, usize, usize), Bit>,
    pub limits: Vec<Bit>,
    pub moduli: Vec<usize>,
}

impl TwoFunTable {
    /// One line per limit value (`k=.. limit=.. modulus=..`), then one per
    /// finite probe (`k=.. a=.. b=.. h=..`).
    pub fn to_records(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, (l, m)) in self.limits.iter().zip(&self.moduli).enumerate() {
            out.push(format!("k={k} limit={l} modulus={m}"));
        }
        for ((k, a, b), v) in &self.values {
            out.push(format!("k={k} a={a} b={b} h={v}"));
        }
        out
    }
}

pub fn twofun_eval(h: &TwoFun, k: usize, p: &FanPoint) -> Bit {
    match *p {
        FanPoint::Finite { a, b } => h.at_finite(k, a, b),
        FanPoint::Infinity => h.at_limit(k),
    }
}

/// Samples the constancy certificate: for `k < sample_k`,
/// `a ∈ [μ(k), μ(k) + window]` and `b <= window`, `h(k,a,b) = h(k,∞,∞)`.
/// Reports the first violation in `(k, a, b)` order.
pub fn twofun_certify(h: &TwoFun, sample_k: usize, window: usize) -> Verdict {
    for k in 0..sample_k {
        let m = h.constancy_modulus(k);
        let target = h.at_limit(k);
        for a in m..=m + window {
            for b in 0..=window {
                let v = h.at_finite(k, a, b);
                if v != target {
                    return Verdict::fail(
                        Condition::Constancy,
                        vec![k, a, b],
                        format!("h({k},{a},{b}) = {v} but h({k},∞,∞) = {target}, modulus {m}"),
                    );
                }
            }
        }
    }
    Verdict::pass()
}

/// Continuous-convergence check with a uniform modulus: for sampled
/// `k < sample_k`, `m = uniform(k)`, every `n >= m` (and the limit function
/// itself) satisfies `h_n(k,a,b) = h_∞(k,∞,∞)` for `a ∈ [m, m + window]`,
/// `b <= window`.
pub fn cont_conv_check(hs: &[TwoFun], h_inf: &TwoFun, uniform: &Modulus, sample_k: usize, window: usize) -> Verdict {
    for k in 0..sample_k {
        let m = uniform(k);
        let target = h_inf.at_limit(k);
        let tail = hs.iter().enumerate().skip(m).chain(std::iter::once((hs.len(), h_inf)));
        for (n, h) in tail {
            for a in m..=m + window {
                for b in 0..=window {
                    let v = h.at_finite(k, a, b);
                    if v != target {
                        let who = if n == hs.len() { "h_∞".to_string() } else { format!("h_{n}") };
                        return Verdict::fail(
                            Condition::Constancy,
                            vec![n, k, a, b],
                            format!("{who}({k},{a},{b}) = {v} but h_∞({k},∞,∞) = {target}"),
                        );
                    }
                }
            }
        }
    }
    Verdict::pass()
}

/// Point of the Baire space `ℕ^ℕ`, inspected only through finite prefixes.
#[derive(Clone)]
pub struct BairePoint {
    f: Arc<dyn Fn(usize) -> u64 + Send + Sync>,
}

impl BairePoint {
    pub fn new(f: impl Fn(usize) -> u64 + Send + Sync + 'static) -> Self {
        BairePoint { f: Arc::new(f) }
    }

    /// `prefix` followed by `0^ω`.
    pub fn from_prefix(prefix: Vec<u64>) -> Self {
        BairePoint::new(move |i| prefix.get(i).copied().unwrap_or(0))
    }

    pub fn at(&self, i: usize) -> u64 {
        (self.f)(i)
    }

    pub fn prefix(&self, n: usize) -> Vec<u64> {
        (0..n).map(|i| self.at(i)).collect()
    }

    /// Same first `keep` entries, then `tail(i)` for `i >= keep`.
    pub fn splice(&self, keep: usize, tail: impl Fn(usize) -> u64 + Send + Sync + 'static) -> Self {
        let head = self.prefix(keep);
        BairePoint::new(move |i| if i < keep { head[i] } else { tail(i) })
    }
}

impl fmt::Debug for BairePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BairePoint({:?}..)", self.prefix(6))
    }
}

type EvalFn = Arc<dyn Fn(&BairePoint) -> u64 + Send + Sync>;
type LookaheadFn = Arc<dyn Fn(u64) -> usize + Send + Sync>;

/// Element of `ℕ^(ℕ^ℕ)` given by a procedure whose result on `p` depends
/// only on `p(0), ..., p(L - 1)` with `L = lookahead(p(0))`.
#[derive(Clone)]
pub struct BigFun {
    eval: EvalFn,
    lookahead: LookaheadFn,
}

impl BigFun {
    pub fn new(
        eval: impl Fn(&BairePoint) -> u64 + Send + Sync + 'static,
        lookahead: impl Fn(u64) -> usize + Send + Sync + 'static,
    ) -> Self {
        BigFun { eval: Arc::new(eval), lookahead: Arc::new(lookahead) }
    }

    pub fn constant(v: u64) -> Self {
        BigFun::new(move |_| v, |_| 0)
    }

    pub fn eval(&self, p: &BairePoint) -> u64 {
        (self.eval)(p)
    }

    /// Declared prefix length inspected on inputs starting with `n`.
    pub fn lookahead(&self, n: u64) -> usize {
        (self.lookahead)(n)
    }

    /// `true` when replacing `p` beyond its declared prefix by `tail`
    /// leaves the result unchanged.
    pub fn respects_lookahead(&self, p: &BairePoint, tail: impl Fn(usize) -> u64 + Send + Sync + 'static) -> bool {
        let keep = self.lookahead(p.at(0));
        let q = p.splice(keep, tail);
        self.eval(p) == self.eval(&q)
    }
}

impl fmt::Debug for BigFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BigFun(..)")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::modulus;

    /// `h(k,a,b) = 1` iff `a < k`, limit `0`, modulus `k`.
    fn staircase(m: impl Fn(usize) -> usize + Send + Sync + 'static) -> TwoFun {
        TwoFun::new(|k, a, _| Bit::from(a < k), |_| Bit::Zero, m)
    }

    #[test]
    fn evaluation() {
        let zero = TwoFun::constant(Bit::Zero);
        assert_eq!(twofun_eval(&zero, 9, &FanPoint::finite(4, 4)), Bit::Zero);
        assert_eq!(twofun_eval(&zero, 0, &FanPoint::Infinity), Bit::Zero);
        let h = staircase(|k| k);
        assert_eq!(twofun_eval(&h, 2, &FanPoint::finite(1, 9)), Bit::One);
        assert_eq!(twofun_eval(&h, 2, &FanPoint::Infinity), Bit::Zero);
    }

    #[test]
    fn certification() {
        assert!(twofun_certify(&staircase(|k| k), 5, 8).is_pass());
        let bad = twofun_certify(&staircase(|_| 0), 5, 8);
        let f = bad.failure().expect("modulus 0 is wrong");
        assert_eq!(f.condition, Condition::Constancy);
        assert_eq!(f.at, vec![1, 0, 0]);
        // (2,1,0) is a violating probe as well
        let h = staircase(|_| 0);
        assert_ne!(h.at_finite(2, 1, 0), h.at_limit(2));
        assert!(twofun_certify(&TwoFun::constant(Bit::One), 5, 8).is_pass());
    }

    #[test]
    fn certification_is_monotone_in_depth() {
        let h = TwoFun::new(|k, a, b| Bit::from(a < 3 && k == 4 && b == 6), |_| Bit::Zero, |_| 0);
        assert!(!twofun_certify(&h, 6, 7).is_pass());
        assert!(twofun_certify(&h, 4, 7).is_pass());
        assert!(twofun_certify(&h, 6, 5).is_pass());
    }

    #[test]
    fn continuous_convergence() {
        let hs: Vec<TwoFun> = (0..12)
            .map(|n| TwoFun::new(move |k, a, _| Bit::from(a < n.min(k)), |_| Bit::Zero, move |k| n.min(k)))
            .collect();
        let limit = staircase(|k| k);
        assert!(cont_conv_check(&hs, &limit, &modulus(|k| k), 8, 6).is_pass());

        let ones = vec![TwoFun::constant(Bit::One); 5];
        let v = cont_conv_check(&ones, &TwoFun::constant(Bit::Zero), &modulus(|_| 0), 3, 3);
        assert!(!v.is_pass());

        let zeros = vec![TwoFun::constant(Bit::Zero); 5];
        assert!(cont_conv_check(&zeros, &TwoFun::constant(Bit::Zero), &modulus(|_| 0), 3, 3).is_pass());
    }

    #[test]
    fn table_restriction() {
        let t = staircase(|k| k).restrict(2);
        assert_eq!(t.values.len(), 27);
        assert_eq!(t.values[&(2, 1, 0)], Bit::One);
        assert_eq!(t.moduli, vec![0, 1, 2]);
        let recs = t.to_records();
        assert_eq!(recs[0], "k=0 limit=0 modulus=0");
        assert_eq!(recs.len(), 30);
    }

    #[test]
    fn lookahead_violation_is_detected() {
        let honest = BigFun::new(|p| p.at(0) + p.at(1), |_| 2);
        let liar = BigFun::new(|p| p.at(0) + p.at(3), |_| 2);
        let p = BairePoint::from_prefix(vec![1, 2, 3, 4]);
        assert!(honest.respects_lookahead(&p, |i| i as u64 * 7));
        assert!(!liar.respects_lookahead(&p, |i| i as u64 * 7));
    }
}
