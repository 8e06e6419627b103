//! Executable adversary against clopen neighbourhoods of `0^ω` inside the
//! unit ball of `M`, and transport of its witnesses along sections.
//!
//! Given a membership oracle `V` with `0^ω ∈ V ⊆ B(0^ω; 1)`, the adversary
//! builds `a_0, a_1, ...` with `a_k ∈ M_k` such that
//! `x_k = (a_0..a_k, 0^ω) ∈ V` and `y_k = (a_0..a_{k-1}, a_k + 2^-k, 0^ω) ∉ V`.
//! Both sequences converge to the same point, so `V` has no closed margin at
//! resolution `2^-K`.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::retract_chain::SectionRetractionPair;
use crate::spaces::{dist_m, grid_check, MPoint};

type MemberFn = Arc<dyn Fn(&MPoint) -> bool + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    /// The oracle contradicts `0^ω ∈ V ⊆ B(0^ω; 1)` on a concrete probe.
    #[error("not a separator: {reason} (probe {probe})")]
    NotSeparator { probe: MPoint, reason: String },
}

/// Opaque membership oracle for a claimed open set `V` with
/// `0^ω ∈ V ⊆ B(0^ω; 1)`. The oracle must be pure.
#[derive(Clone)]
pub struct OpenSetOracle {
    pub name: String,
    member: MemberFn,
    probes: Arc<AtomicUsize>,
}

impl OpenSetOracle {
    /// Fails when `0^ω` is not a member.
    pub fn new(
        name: impl Into<String>,
        member: impl Fn(&MPoint) -> bool + Send + Sync + 'static,
    ) -> Result<Self, AdversaryError> {
        Self::from_arc(name, Arc::new(member))
    }

    pub fn from_arc(name: impl Into<String>, member: MemberFn) -> Result<Self, AdversaryError> {
        if !member(&MPoint::zero()) {
            return Err(AdversaryError::NotSeparator { probe: MPoint::zero(), reason: "0^ω is not a member".into() });
        }
        Ok(OpenSetOracle { name: name.into(), member, probes: Arc::new(AtomicUsize::new(0)) })
    }

    /// The unit ball itself: `‖z‖ < 1`.
    pub fn ball() -> Self {
        OpenSetOracle::new("ball", |z| z.norm() < Dyadic::one()).expect("0 is in the ball")
    }

    /// Counted membership query.
    pub fn member(&self, z: &MPoint) -> bool {
        self.probes.fetch_add(1, Ordering::Relaxed);
        (self.member)(z)
    }

    pub fn probe_count(&self) -> usize {
        self.probes.load(Ordering::Relaxed)
    }

    /// Membership with the ball claim enforced.
    fn checked_member(&self, z: &MPoint) -> Result<bool, AdversaryError> {
        let inside = self.member(z);
        if inside && z.norm() >= Dyadic::one() {
            return Err(AdversaryError::NotSeparator {
                probe: z.clone(),
                reason: format!("member with norm {} >= 1", z.norm()),
            });
        }
        Ok(inside)
    }
}

impl fmt::Debug for OpenSetOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OpenSetOracle({})", self.name)
    }
}

/// One level of a [`WitnessChain`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessStep {
    pub k: usize,
    pub a_k: Dyadic,
    pub x: MPoint,
    pub y: MPoint,
    pub member_x: bool,
    pub member_y: bool,
    pub distance: Dyadic,
    /// Oracle queries spent on this level.
    pub probes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessChain {
    pub depth: usize,
    pub steps: Vec<WitnessStep>,
}

impl WitnessChain {
    pub fn a(&self) -> Vec<Dyadic> {
        self.steps.iter().map(|s| s.a_k.clone()).collect()
    }

    pub fn total_probes(&self) -> usize {
        self.steps.iter().map(|s| s.probes).sum()
    }

    /// The chain of depth `depth` contained in this one.
    pub fn truncate(&self, depth: usize) -> WitnessChain {
        WitnessChain { depth, steps: self.steps[..=depth].to_vec() }
    }

    /// One record per level in the dyadic text format.
    pub fn to_records(&self) -> Vec<String> {
        self.steps
            .iter()
            .map(|s| {
                format!(
                    "k={} a_k={} x=\"{}\" y=\"{}\" member_x={} member_y={} distance={}",
                    s.k,
                    s.a_k,
                    s.x,
                    s.y,
                    u8::from(s.member_x),
                    u8::from(s.member_y),
                    s.distance
                )
            })
            .collect()
    }

    pub fn summary(&self) -> String {
        format!("V has no clopen margin at resolution 2^-{}", self.depth)
    }
}

/// Runs the recursion to depth `depth`.
///
/// Level `k` keeps a bracket `lo ∈ V`, `hi ∉ V` on the grid `j·2^-k`,
/// starting from `j = 0` (the previous `x_{k-1}`) and `j = 2^k` (norm
/// at least `1`, so outside `V`), and halves it until the endpoints are
/// adjacent. That costs `k + 1` queries after level 0.
pub fn adversary_run(v: &OpenSetOracle, depth: usize) -> Result<WitnessChain, AdversaryError> {
    let mut prefix: Vec<Dyadic> = Vec::new();
    let mut steps = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let before = v.probe_count();
        let point_at = |j: &BigInt| -> MPoint {
            let mut coords = prefix.clone();
            coords.push(Dyadic::new(j.clone(), k));
            MPoint::from_prefix(&coords).expect("grid values")
        };
        let mut lo = BigInt::from(0);
        let mut hi = BigInt::one() << k;
        if k == 0 && !v.checked_member(&MPoint::zero())? {
            return Err(AdversaryError::NotSeparator { probe: MPoint::zero(), reason: "0^ω is not a member".into() });
        }
        let top = point_at(&hi);
        if v.checked_member(&top)? {
            unreachable!("checked_member rejects members of norm >= 1");
        }
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) >> 1;
            if v.checked_member(&point_at(&mid))? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = point_at(&lo);
        let y = point_at(&hi);
        let a_k = Dyadic::new(lo, k);
        let distance = dist_m(&x, &y);
        steps.push(WitnessStep {
            k,
            a_k: a_k.clone(),
            x,
            y,
            member_x: true,
            member_y: false,
            distance,
            probes: v.probe_count() - before,
        });
        prefix.push(a_k);
    }
    Ok(WitnessChain { depth, steps })
}

/// Result of re-checking a chain against an oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub rows: Vec<String>,
    /// First failing level and what failed.
    pub failure: Option<(usize, String)>,
    pub summary: String,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Re-checks every invariant of the chain and every recorded verdict.
pub fn witness_verify(chain: &WitnessChain, v: &OpenSetOracle) -> VerifyReport {
    let mut rows = Vec::new();
    let mut failure = None;
    let mut prefix: Vec<Dyadic> = Vec::new();
    for (idx, s) in chain.steps.iter().enumerate() {
        let k = s.k;
        let eps = Dyadic::pow2_neg(k);
        let mut expect_x = prefix.clone();
        expect_x.push(s.a_k.clone());
        let mut expect_y = prefix.clone();
        expect_y.push(&s.a_k + &eps);
        let problems: Vec<String> = [
            (k != idx).then(|| format!("level index {k} at position {idx}")),
            (!grid_check(k, &s.a_k)).then(|| format!("a_{k} = {} not in M_{k}", s.a_k)),
            (MPoint::from_prefix(&expect_x).ok().as_ref() != Some(&s.x))
                .then(|| "x_k does not extend the prefix".into()),
            (MPoint::from_prefix(&expect_y).ok().as_ref() != Some(&s.y)).then(|| "y_k is not x_k + 2^-k e_k".into()),
            (s.distance != eps || dist_m(&s.x, &s.y) != eps).then(|| format!("distance {} != 2^-{k}", s.distance)),
            (s.x.norm() >= Dyadic::one()).then(|| format!("‖x_{k}‖ = {} >= 1", s.x.norm())),
            (!s.member_x || !v.member(&s.x)).then(|| format!("x_{k} not in V")),
            (s.member_y || v.member(&s.y)).then(|| format!("y_{k} in V")),
        ]
        .into_iter()
        .flatten()
        .collect();
        rows.push(format!(
            "k={k} distance={} member_x={} member_y={} ok={}",
            s.distance,
            u8::from(s.member_x),
            u8::from(s.member_y),
            u8::from(problems.is_empty())
        ));
        if failure.is_none() && !problems.is_empty() {
            failure = Some((k, problems.join("; ")));
        }
        prefix.push(s.a_k.clone());
    }
    let summary = match &failure {
        None => chain.summary(),
        Some((k, why)) => format!("chain invalid at k={k}: {why}"),
    };
    VerifyReport { rows, failure, summary }
}

/// `x ↦ c(section(x))`: membership transported to the domain of a section.
pub fn pullback_oracle<A: 'static, B: 'static, R: 'static>(
    c: Arc<dyn Fn(&B) -> bool + Send + Sync>,
    s: &SectionRetractionPair<A, B, R>,
) -> Arc<dyn Fn(&A) -> bool + Send + Sync> {
    let s = s.clone();
    Arc::new(move |x| c(&s.section(x)))
}

/// A witness pair carried into the codomain of the section.
pub struct TransportedPair<B> {
    pub k: usize,
    /// Image of `x_k`; lies outside the candidate.
    pub inside: B,
    /// Image of `y_k`; lies inside the candidate.
    pub outside: B,
    pub candidate_at_inside: bool,
    pub candidate_at_outside: bool,
}

pub struct Refutation<B> {
    pub chain: WitnessChain,
    pub transported: Vec<TransportedPair<B>>,
}

/// Refutes a claimed clopen `C` of the codomain that should contain the
/// preimage of `M \ B(0^ω; 1)` under the retraction but not the image of
/// `0^ω`.
///
/// The complement of `C` pulled back along the section is handed to the
/// adversary; its witness pairs are mapped forward and land on opposite
/// sides of `C` while their preimages are `2^-k` apart.
pub fn normann_refute<B: 'static, R: 'static>(
    candidate: Arc<dyn Fn(&B) -> bool + Send + Sync>,
    s: &SectionRetractionPair<MPoint, B, R>,
    depth: usize,
) -> Result<Refutation<B>, AdversaryError> {
    let inside_c = pullback_oracle(candidate.clone(), s);
    let oracle = OpenSetOracle::new(format!("complement of candidate along {}", s.name), move |x| !inside_c(x))?;
    let chain = adversary_run(&oracle, depth)?;
    let transported = chain
        .steps
        .iter()
        .map(|st| {
            let inside = s.section(&st.x);
            let outside = s.section(&st.y);
            TransportedPair {
                k: st.k,
                candidate_at_inside: candidate(&inside),
                candidate_at_outside: candidate(&outside),
                inside,
                outside,
            }
        })
        .collect();
    Ok(Refutation { chain, transported })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::Bit;
    use crate::retract_chain::{em_pair, identity_pair, ProdFanPoint};
    use crate::retract_core::r_m_point;

    fn d(j: i64, e: usize) -> Dyadic {
        Dyadic::new(j, e)
    }

    #[test]
    fn ball_run_depth_four() {
        let chain = adversary_run(&OpenSetOracle::ball(), 4).unwrap();
        assert_eq!(chain.a(), vec![Dyadic::zero(), d(1, 1), d(1, 2), d(1, 3), d(1, 4)]);
        let x4 = &chain.steps[4].x;
        assert_eq!(x4.norm(), d(15, 4));
        assert_eq!(x4, &"[1:1/2^1, 2:1/2^2, 3:1/2^3, 4:1/2^4]".parse::<MPoint>().unwrap());
    }

    #[test]
    fn depth_zero() {
        let chain = adversary_run(&OpenSetOracle::ball(), 0).unwrap();
        assert_eq!(chain.steps.len(), 1);
        assert_eq!(chain.steps[0].x, MPoint::zero());
        assert_eq!(chain.steps[0].y, "[0:1]".parse::<MPoint>().unwrap());
    }

    #[test]
    fn coordinate_constraint_oracle() {
        let v = OpenSetOracle::new("ball∩{z(0)=0}", |z| z.norm() < Dyadic::one() && z.get(0).is_none()).unwrap();
        let chain = adversary_run(&v, 6).unwrap();
        assert_eq!(chain.a()[0], Dyadic::zero());
        assert_eq!(chain.a(), adversary_run(&OpenSetOracle::ball(), 6).unwrap().a());
        assert!(witness_verify(&chain, &v).passed());
    }

    #[test]
    fn whole_space_is_not_a_separator() {
        let v = OpenSetOracle::new("all", |_| true).unwrap();
        let err = adversary_run(&v, 3).unwrap_err();
        let AdversaryError::NotSeparator { probe, .. } = err;
        assert_eq!(probe, "[0:1]".parse::<MPoint>().unwrap());
        assert!(OpenSetOracle::new("empty", |_| false).is_err());
    }

    #[test]
    fn per_step_probe_budget() {
        let v = OpenSetOracle::ball();
        let chain = adversary_run(&v, 12).unwrap();
        for s in &chain.steps {
            assert!(s.probes <= s.k + 2, "k = {} used {}", s.k, s.probes);
        }
        assert_eq!(chain.total_probes(), v.probe_count());
    }

    #[test]
    fn chains_are_prefix_coherent() {
        let full = adversary_run(&OpenSetOracle::ball(), 9).unwrap();
        let short = adversary_run(&OpenSetOracle::ball(), 5).unwrap();
        assert_eq!(full.truncate(5).steps, short.steps);
    }

    #[test]
    fn verification_catches_tampering() {
        let v = OpenSetOracle::ball();
        let chain = adversary_run(&v, 10).unwrap();
        let report = witness_verify(&chain, &v);
        assert!(report.passed(), "{}", report.summary);
        assert_eq!(report.rows.len(), 11);

        let mut flipped = chain.clone();
        flipped.steps[6].member_y = true;
        assert_eq!(witness_verify(&flipped, &v).failure.map(|f| f.0), Some(6));

        let mut moved = chain.clone();
        moved.steps[3].y = moved.steps[3].y.with(3, d(3, 3)).unwrap();
        let f = witness_verify(&moved, &v).failure.unwrap();
        assert_eq!(f.0, 3);
        assert!(f.1.contains("distance"), "{}", f.1);
    }

    #[test]
    fn pullbacks() {
        let everything: Arc<dyn Fn(&ProdFanPoint) -> bool + Send + Sync> = Arc::new(|_| true);
        let pulled = pullback_oracle(everything, &em_pair());
        assert!(pulled(&"[2:3/2^2]".parse().unwrap()));

        let limit_zero: Arc<dyn Fn(&ProdFanPoint) -> bool + Send + Sync> =
            Arc::new(|(_, h)| h.at_limit(0) == Bit::Zero);
        let pulled = pullback_oracle(limit_zero, &em_pair());
        for s in ["[]", "[0:1]", "[1:1/2^1, 5:3/2^5]"] {
            assert!(pulled(&s.parse().unwrap()));
        }
    }

    #[test]
    fn identity_transport_reproduces_ball_run() {
        let outside_ball: Arc<dyn Fn(&MPoint) -> bool + Send + Sync> = Arc::new(|z| z.norm() >= Dyadic::one());
        let r = normann_refute(outside_ball, &identity_pair(), 8).unwrap();
        let direct = adversary_run(&OpenSetOracle::ball(), 8).unwrap();
        assert_eq!(r.chain.to_records(), direct.to_records());
    }

    #[test]
    fn em_transport_lands_on_both_sides() {
        let candidate: Arc<dyn Fn(&ProdFanPoint) -> bool + Send + Sync> =
            Arc::new(|(x, h)| r_m_point(x, h).norm() >= Dyadic::one());
        let r = normann_refute(candidate, &em_pair(), 8).unwrap();
        for t in &r.transported {
            assert!(!t.candidate_at_inside && t.candidate_at_outside, "k = {}", t.k);
            assert_eq!(dist_m(&t.inside.0, &t.outside.0), Dyadic::pow2_neg(t.k));
        }
        let everything: Arc<dyn Fn(&ProdFanPoint) -> bool + Send + Sync> = Arc::new(|_| true);
        assert!(normann_refute(everything, &em_pair(), 3).is_err());
    }
}
