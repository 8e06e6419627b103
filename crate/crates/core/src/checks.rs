//! Randomized property suites over every module.
//!
//! Each property runs a number of seeded cases and stops at the first
//! counterexample. Suites are deterministic in `(seed, depth, count)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::dyadic::{dy_sum, Dyadic};
use crate::funcspace::{cont_conv_check, twofun_certify, BairePoint, BigFun, Bit, TwoFun};
use crate::retract_chain::{
    absorb_pair, baire_section, code_build, codeword, fan_absorb, fan_absorb_inv, full_pair, lift_h, mprod_decode,
    mprod_encode, restrict_h, retract_full, section_full, stream_matches, BitString, Summand,
};
use crate::retract_core::{c_m_member, e_m, f_eval, g_apply, lemma5_modulus, lemma61_check, r_m, CmDescriptor};
use crate::sample::{
    grid_value, random_certified_twofun, random_flip, random_grid_point, rng, standard_mpoint, Flip, SampleRng,
};
use crate::spaces::{
    conv_check_l1, conv_check_m, conv_check_prod, dist_m, fan_conv_check, fan_dist, modulus, norm_enclose, norm_prefix,
    ConvergenceCertificate, Coords, FanPoint, L1Certificate, Limit, MPoint, MStream, NxFanPoint,
};
use crate::verdict::{Condition, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Lemma1,
    Lemma4,
    Lemma5,
    Lemma6,
    Lemma7,
    Cantor,
    Baire,
    Metric,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Lemma1,
        Suite::Lemma4,
        Suite::Lemma5,
        Suite::Lemma6,
        Suite::Lemma7,
        Suite::Cantor,
        Suite::Baire,
        Suite::Metric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Lemma4 => "lemma4",
            Suite::Lemma5 => "lemma5",
            Suite::Lemma6 => "lemma6",
            Suite::Lemma7 => "lemma7",
            Suite::Cantor => "cantor",
            Suite::Baire => "baire",
            Suite::Metric => "metric",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown suite {0:?}")]
pub struct UnknownSuite(pub String);

impl FromStr for Suite {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

/// Result of one property: how many cases ran and the verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub cases: usize,
    pub verdict: Verdict,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }
}

/// Runs `case(n)` for `n < count` until one fails.
fn cases(count: usize, mut case: impl FnMut(usize) -> Verdict) -> Check {
    for n in 0..count {
        if let Verdict::Fail(mut f) = case(n) {
            f.detail = format!("case {n}: {}", f.detail);
            return Check { cases: n + 1, verdict: Verdict::Fail(f) };
        }
    }
    Check { cases: count, verdict: Verdict::pass() }
}

fn expect(ok: bool, at: Vec<usize>, detail: impl FnOnce() -> String) -> Verdict {
    if ok {
        Verdict::pass()
    } else {
        Verdict::fail(Condition::Conclusion, at, detail())
    }
}

fn truncate(x: &MPoint, n: usize) -> MPoint {
    MPoint::new(x.support().filter(|(i, _)| *i < n).map(|(i, q)| (i, q.clone()))).expect("subset of a point")
}

fn tail_from(x: &MPoint, n: usize) -> Dyadic {
    dy_sum(x.support().filter(|(i, _)| *i >= n).map(|(_, q)| q))
}

/// One record of a suite run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub suite: Suite,
    pub property: &'static str,
    pub check: Check,
}

impl Outcome {
    pub fn to_record(&self) -> String {
        let (status, detail) = match &self.check.verdict {
            Verdict::Pass { .. } => ("pass", String::new()),
            Verdict::Fail(f) => ("fail", format!(" condition={} detail={:?}", f.condition, f.detail)),
        };
        format!("suite={} property={} cases={} status={status}{detail}", self.suite, self.property, self.check.cases)
    }
}

/// Runs every property of `suite`. `depth` bounds levels, coordinates and
/// windows; `count` is the number of random cases per property.
pub fn run_suite(suite: Suite, seed: u64, depth: usize, count: usize) -> Vec<Outcome> {
    let mut r = rng(seed);
    let props: Vec<(&'static str, Check)> = match suite {
        Suite::Lemma1 => vec![
            ("truncations_converge", truncations_converge(&mut r, count, depth)),
            ("stream_limit", geometric_truncations(depth)),
            ("escaping_mass_rejected", escaping_mass_rejected(depth)),
        ],
        Suite::Lemma4 => vec![
            ("strictness_example", strictness_example(depth)),
            ("vanishing_bumps_converge", vanishing_bumps(&mut r, count, depth)),
            ("sliding_half_product_only", sliding_half(&mut r, count, depth)),
        ],
        Suite::Lemma5 => vec![
            ("g_certified", g_certified(&mut r, count, depth)),
            ("g_stable_near_x", g_stable_near_x(&mut r, count, depth)),
            ("f_reads_window_only", f_reads_window_only(&mut r, count, depth)),
        ],
        Suite::Lemma6 => vec![
            ("section_retraction", em_roundtrip(&mut r, count, depth.max(50), depth)),
            ("tail_bound", tail_bound(&mut r, count, depth, 30)),
            ("image_agreement", image_agreement(&mut r, count, depth.min(12))),
            ("retraction_valid", retraction_valid(&mut r, count, depth)),
            ("locality", locality(&mut r, count, depth.min(15))),
            ("filtration_monotone", filtration_monotone(&mut r, count, depth.min(15))),
        ],
        Suite::Lemma7 => vec![
            ("vanishing_bumps_continuous", g_of_bumps(&mut r, count, depth)),
            ("moving_row_flip", moving_row_flip(&mut r, count, depth)),
            ("moving_spike_rejected", moving_spike_rejected(&mut r, count, depth)),
        ],
        Suite::Cantor => vec![
            ("code_levels", code_levels(depth.min(12))),
            ("mprod_roundtrip", mprod_roundtrip(&mut r, count, depth)),
            ("prefix_monotone", prefix_monotone(&mut r, count, depth)),
            ("truncated_input_incomplete", truncated_incomplete(&mut r, count, depth)),
        ],
        Suite::Baire => vec![
            ("lift_roundtrip", lift_roundtrip(&mut r, count, depth.min(10))),
            ("lookahead_respected", lookahead_respected(&mut r, count)),
            ("section_image", section_image(&mut r, count)),
            ("absorb_bijective", absorb_bijective(&mut r, count)),
            ("full_chain_roundtrip", full_roundtrip(&mut r, count.min(20), depth)),
            ("retraction_total", retraction_total(&mut r, count.min(50), depth)),
        ],
        Suite::Metric => vec![
            ("dist_axioms", dist_axioms(&mut r, count)),
            ("fan_axioms", fan_axioms(&mut r, count)),
            ("fan_escape_converges", fan_escape(&mut r, depth)),
            ("norm_prefix_monotone", norm_prefix_monotone(&mut r, count, depth)),
            ("enclosures_nested", enclosures_nested(&mut r, count, depth)),
        ],
    };
    props.into_iter().map(|(property, check)| Outcome { suite, property, check }).collect()
}

// lemma1

/// `x_n = x|_{<n}` converges to `x` in `M` and in `ℓ₁`.
pub fn truncations_converge(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let x = standard_mpoint(r);
        let end = x.support_end();
        let xs: Vec<MPoint> = (0..=end + 2).map(|n| truncate(&x, n)).collect();
        let xc = x.clone();
        let cert = ConvergenceCertificate {
            limit: Limit::Point(x.clone()),
            pointwise: modulus(|i| i + 1),
            norm: modulus(move |k| (0..=end).find(|&n| tail_from(&xc, n).le_pow2_neg(k)).unwrap_or(end)),
        };
        let v = conv_check_m(&xs, &cert, depth);
        if !v.is_pass() {
            return v;
        }
        conv_check_l1(&xs, &L1Certificate::from(&cert), depth)
    })
}

/// Truncations of `(2^-i)_i` converge to the stream itself.
pub fn geometric_truncations(depth: usize) -> Check {
    let g = MStream::geometric();
    let xs: Vec<MPoint> = (0..=depth + 1).map(|n| g.truncate(n).expect("grid values")).collect();
    let cert =
        ConvergenceCertificate { limit: Limit::Stream(g), pointwise: modulus(|i| i + 1), norm: modulus(|k| k + 1) };
    Check { cases: 1, verdict: conv_check_m(&xs, &cert, depth) }
}

/// `½ e_{n+1} → 0` is rejected by the `ℓ₁` check on the norm condition.
pub fn escaping_mass_rejected(depth: usize) -> Check {
    let xs = sliding_halves(&MPoint::zero(), 1, depth + 2);
    let cert = L1Certificate {
        limit: Limit::Point(MPoint::zero()),
        pointwise: std::sync::Arc::new(|i, _| i),
        norm: modulus(|k| k),
    };
    let v = conv_check_l1(&xs, &cert, depth.max(2));
    let rejected = v.failure().is_some_and(|f| f.condition == Condition::Norm);
    Check { cases: 1, verdict: expect(rejected, vec![], || format!("expected a norm failure, got {v}")) }
}

// lemma4

/// `x_n = x + ½ e_{n+offset}`.
fn sliding_halves(x: &MPoint, offset: usize, len: usize) -> Vec<MPoint> {
    (0..len).map(|n| x.with(n + offset, Dyadic::pow2_neg(1)).expect("1/2 is on every grid")).collect()
}

/// `(0^{n+1} ½ 0^ω)_n` with claimed limit `0^ω`: fails on the norm and
/// passes the product check.
pub fn strictness_example(depth: usize) -> Check {
    let depth = depth.max(2);
    let xs = sliding_halves(&MPoint::zero(), 1, depth + 2);
    let pointwise = modulus(|i| i);
    let cert = ConvergenceCertificate {
        limit: Limit::Point(MPoint::zero()),
        pointwise: pointwise.clone(),
        norm: modulus(|k| k),
    };
    let in_m = conv_check_m(&xs, &cert, depth);
    let in_prod = conv_check_prod(&xs, &cert.limit, &pointwise, depth);
    let ok = in_m.failure().is_some_and(|f| f.condition == Condition::Norm) && in_prod.is_pass();
    Check { cases: 1, verdict: expect(ok, vec![], || format!("M check: {in_m}; product check: {in_prod}")) }
}

const BUMP: usize = 31;

/// `x + 2^-(n+31) e_{n+31}`, which converges to `x` for points supported
/// below 31.
fn vanishing_bumps_of(x: &MPoint, len: usize) -> Vec<MPoint> {
    (0..len).map(|n| x.with(n + BUMP, Dyadic::pow2_neg(n + BUMP)).expect("grid value")).collect()
}

pub fn vanishing_bumps(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let x = standard_mpoint(r);
        let xs = vanishing_bumps_of(&x, depth + 2);
        let cert =
            ConvergenceCertificate { limit: Limit::Point(x), pointwise: modulus(|i| i + 1), norm: modulus(|k| k) };
        conv_check_m(&xs, &cert, depth)
    })
}

pub fn sliding_half(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let x = standard_mpoint(r);
        let xs = sliding_halves(&x, BUMP, depth + 2);
        let pointwise = modulus(|i| i);
        let cert =
            ConvergenceCertificate { limit: Limit::Point(x), pointwise: pointwise.clone(), norm: modulus(|k| k) };
        let in_m = conv_check_m(&xs, &cert, depth.max(2));
        let in_prod = conv_check_prod(&xs, &cert.limit, &pointwise, depth);
        let ok = in_m.failure().is_some_and(|f| f.condition == Condition::Norm) && in_prod.is_pass();
        expect(ok, vec![], || format!("M check: {in_m}; product check: {in_prod}"))
    })
}

// lemma5

pub fn g_certified(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| twofun_certify(&g_apply(&standard_mpoint(r)), depth, depth))
}

/// Moves `x` by less than `2^-(k+1)` using steps `±2^-i` at distinct
/// indices `i >= k + 2`.
fn nearby(r: &mut SampleRng, x: &MPoint, k: usize) -> MPoint {
    let mut y = x.clone();
    let mut i = k + 2;
    for _ in 0..r.random_range(1..=4) {
        i += r.random_range(0..3);
        let q = y.coord(i);
        let step = Dyadic::pow2_neg(i);
        let moved = if q.is_zero() || (r.random_bool(0.5) && q < Dyadic::one()) { &q + &step } else { &q - &step };
        y = y.with(i, moved).expect("grid value");
        i += 1;
    }
    y
}

/// Every `y` within `2^-(k+1)` of `x` has `g(y)(k,a,b) = 0` for
/// `a >= lemma5_modulus(x, k)`.
pub fn g_stable_near_x(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let x = standard_mpoint(r);
        let k = r.random_range(0..depth.max(1));
        let m = lemma5_modulus(&x, k);
        let y = nearby(r, &x, k);
        let gy = g_apply(&y);
        for a in m..=m + depth {
            for b in 0..=depth {
                if gy.at_finite(k, a, b) != Bit::Zero {
                    return Verdict::fail(
                        Condition::Conclusion,
                        vec![k, a, b],
                        format!("g(y)({k},{a},{b}) = 1 with y = {y}, x = {x}, modulus {m}"),
                    );
                }
            }
        }
        Verdict::pass()
    })
}

pub fn f_reads_window_only(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let x = standard_mpoint(r);
        let (k, a, b) = (r.random_range(0..=depth), r.random_range(0..=30), r.random_range(0..=depth));
        let mut i = r.random_range(0..=a + b + 10);
        if (a..=a + b).contains(&i) {
            i = a + b + 1;
        }
        let y = x.with(i, grid_value(r, i)).expect("grid value");
        expect(f_eval(&x, k, a, b) == f_eval(&y, k, a, b), vec![k, a, b, i], || {
            format!("changing coordinate {i} changed f at ({k},{a},{b})")
        })
    })
}

// lemma6

/// Random `h`: the graph of `x`, a flipped graph, or a random certified
/// function, in rotation.
fn mixed_h(r: &mut SampleRng, x: &MPoint, n: usize, bound: usize) -> TwoFun {
    match n % 3 {
        0 => g_apply(x),
        1 => random_flip(r, bound).apply(&g_apply(x)),
        _ => random_certified_twofun(r, 6),
    }
}

/// `r_M(e_M(x))` agrees with `x` on `0..coords` and its tail certificate
/// survives sampling up to level `k_max`.
pub fn em_roundtrip(r: &mut SampleRng, count: usize, coords: usize, k_max: usize) -> Check {
    cases(count, |_| {
        let x = standard_mpoint(r);
        let (x2, g) = e_m(&x);
        let z = r_m(x2, g);
        if let Some(i) = (0..=coords).find(|&i| z.coord(i) != x.coord(i)) {
            return Verdict::fail(
                Condition::Conclusion,
                vec![i],
                format!("r_M(e_M(x))({i}) = {} for x = {x}", z.coord(i)),
            );
        }
        z.check_tail(k_max, coords)
    })
}

/// The window estimate behind the tail bound of `r_M`, on graphs.
pub fn tail_bound(r: &mut SampleRng, count: usize, depth: usize, window: usize) -> Check {
    cases(count, |_| {
        let x = standard_mpoint(r);
        let g = g_apply(&x);
        let k = r.random_range(0..depth.max(1));
        let a = k + r.random_range(0..=depth);
        let t = lemma61_check(&x, &g, k, a, window);
        expect(!t.is_violation(), vec![k, a], || format!("x = {x}: {t}"))
    })
}

/// Passing every `C_m` for `m <= d` forces agreement with `g(x)` on all
/// probes of level `<= d`.
pub fn image_agreement(r: &mut SampleRng, count: usize, d: usize) -> Check {
    cases(count, |n| {
        let x = standard_mpoint(r);
        let h = if n % 2 == 0 {
            let big = d + 1 + r.random_range(0..4);
            let flip = match r.random_range(0..3) {
                0 => Flip::Probe { k: big, a: r.random_range(0..=d), b: r.random_range(0..=d) },
                1 => Flip::Probe { k: r.random_range(0..=d), a: big, b: r.random_range(0..=d) },
                _ => Flip::Probe { k: r.random_range(0..=d), a: r.random_range(0..=d), b: big },
            };
            flip.apply(&g_apply(&x))
        } else {
            mixed_h(r, &x, n / 2, d + 3)
        };
        if !(0..=d).all(|m| c_m_member(&x, &h, m)) {
            return Verdict::pass();
        }
        let g = g_apply(&x);
        match CmDescriptor::new(d).h_probes().find(|&(k, a, b)| h.at_finite(k, a, b) != g.at_finite(k, a, b)) {
            Some((k, a, b)) => Verdict::fail(
                Condition::Conclusion,
                vec![k, a, b],
                format!("h differs from g(x) at ({k},{a},{b}), x = {x}"),
            ),
            None => expect((0..=d).all(|k| h.at_limit(k) == Bit::Zero), vec![], || "nonzero limit".into()),
        }
    })
}

/// `r_M(x, h)` lies on the grid and its tail certificate holds.
pub fn retraction_valid(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |n| {
        let x = standard_mpoint(r);
        let h = mixed_h(r, &x, n, 12);
        let z = r_m(x, h);
        if let Err(i) = z.check_grid(2 * depth + 8) {
            return Verdict::fail(Condition::Grid, vec![i], format!("coordinate {i} off the grid"));
        }
        z.check_tail(depth, depth)
    })
}

/// Mutations outside the probes of `C_m` never change membership.
pub fn locality(r: &mut SampleRng, count: usize, max_m: usize) -> Check {
    cases(count, |n| {
        let x = standard_mpoint(r);
        let h = mixed_h(r, &x, n, max_m + 3);
        let m = r.random_range(0..=max_m);
        let before = c_m_member(&x, &h, m);
        let desc = CmDescriptor::new(m);
        let outside = m + 1 + r.random_range(0..5);
        let (x2, h2, what) = match r.random_range(0..4) {
            0 => {
                let i = desc.max_x_coord() + 1 + r.random_range(0..10);
                (x.with(i, grid_value(r, i)).expect("grid value"), h.clone(), format!("x({i})"))
            }
            1 => (x.clone(), Flip::Row { k: outside }.apply(&h), format!("row {outside}")),
            _ => {
                let mut idx = [r.random_range(0..=m), r.random_range(0..=m), r.random_range(0..=m)];
                idx[r.random_range(0..3)] = outside;
                let [k, a, b] = idx;
                debug_assert!(!desc.reads_h(k, a, b));
                (x.clone(), Flip::Probe { k, a, b }.apply(&h), format!("h({k},{a},{b})"))
            }
        };
        let after = c_m_member(&x2, &h2, m);
        expect(before == after, vec![m], || format!("mutating {what} changed membership in C_{m}"))
    })
}

/// `C_{m+1} ⊆ C_m` on graphs and perturbed graphs.
pub fn filtration_monotone(r: &mut SampleRng, count: usize, max_m: usize) -> Check {
    cases(count, |n| {
        let x = standard_mpoint(r);
        let g = g_apply(&x);
        let h = if n % 2 == 0 { g } else { random_flip(r, max_m + 1).apply(&g) };
        let member: Vec<bool> = (0..=max_m + 1).map(|m| c_m_member(&x, &h, m)).collect();
        match (0..=max_m).find(|&m| member[m + 1] && !member[m]) {
            Some(m) => Verdict::fail(Condition::Conclusion, vec![m], format!("in C_{} but not in C_{m}", m + 1)),
            None => Verdict::pass(),
        }
    })
}

// lemma7

fn bump_modulus(x: &MPoint) -> crate::spaces::Modulus {
    let x = x.clone();
    modulus(move |k| lemma5_modulus(&x, k).max(k))
}

/// `g(x_n) → g(x)` for vanishing bumps, with the modulus from the
/// continuity of `g`.
pub fn g_of_bumps(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let x = standard_mpoint(r);
        let hs: Vec<TwoFun> = vanishing_bumps_of(&x, depth + 2).iter().map(g_apply).collect();
        cont_conv_check(&hs, &g_apply(&x), &bump_modulus(&x), depth.min(12), depth)
    })
}

/// `h` flipped at `(n, 0, 0)` converges continuously to `h`.
pub fn moving_row_flip(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let h = random_certified_twofun(r, 6);
        let hs: Vec<TwoFun> = (0..depth + 2).map(|n| Flip::Probe { k: n, a: 0, b: 0 }.apply(&h)).collect();
        let hm = h.clone();
        cont_conv_check(&hs, &h, &modulus(move |k| hm.constancy_modulus(k).max(1)), depth.min(12), depth)
    })
}

/// A spike running off to `a → ∞` on a fixed row has no uniform modulus.
pub fn moving_spike_rejected(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let h = random_certified_twofun(r, 6);
        let k0 = r.random_range(0..4);
        let mu0 = h.constancy_modulus(k0);
        let len = depth.max(8) + 8;
        let hs: Vec<TwoFun> = (0..len).map(|n| Flip::Probe { k: k0, a: n + mu0, b: 0 }.apply(&h)).collect();
        let hm = h.clone();
        let v = cont_conv_check(&hs, &h, &modulus(move |k| hm.constancy_modulus(k)), k0 + 1, len);
        expect(v.failure().is_some_and(|f| f.condition == Condition::Constancy), vec![k0], || {
            format!("spike on row {k0} was accepted: {v}")
        })
    })
}

// cantor

/// Prefix-freeness, Kraft sum `1`, size `2^i + 1` and agreement with the
/// closed form, for every level `<= max_level`.
pub fn code_levels(max_level: usize) -> Check {
    cases(max_level + 1, |i| {
        let code = code_build(i);
        if !code.is_prefix_free() {
            return Verdict::fail(Condition::Conclusion, vec![i], format!("level {i} is not prefix-free"));
        }
        if code.kraft_sum() != Dyadic::one() {
            return Verdict::fail(Condition::Conclusion, vec![i], format!("level {i} Kraft sum {}", code.kraft_sum()));
        }
        let closed_form = code.words.len() == (1usize << i) + 1
            && code.words.iter().enumerate().all(|(j, w)| *w == codeword(i, &num_bigint::BigInt::from(j)));
        expect(closed_form, vec![i], || format!("level {i} disagrees with the closed form"))
    })
}

pub fn mprod_roundtrip(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let x = random_grid_point(r, depth);
        let bits = match mprod_encode(&x, depth) {
            Ok(b) => b,
            Err(e) => return Verdict::fail(Condition::Grid, vec![], e.to_string()),
        };
        let d = mprod_decode(&bits, depth);
        let ok = !d.incomplete && d.consumed == bits.len() && (0..depth).all(|i| d.coords[i] == x.coord(i));
        expect(ok, vec![], || format!("round trip failed for {x}"))
    })
}

pub fn prefix_monotone(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let x = random_grid_point(r, depth + 1);
        let d = r.random_range(0..=depth);
        let short = mprod_encode(&x, d).expect("grid point");
        let long = mprod_encode(&x, d + 1).expect("grid point");
        expect(short.is_prefix_of(&long), vec![d], || format!("encoding of {x} at depth {d} is not a prefix"))
    })
}

pub fn truncated_incomplete(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    let depth = depth.max(1);
    cases(count, |_| {
        let x = random_grid_point(r, depth);
        let mut bits = mprod_encode(&x, depth).expect("grid point").0;
        bits.pop();
        let d = mprod_decode(&BitString(bits), depth);
        expect(d.incomplete && d.coords.len() == depth - 1, vec![], || format!("cut input decoded as complete: {d:?}"))
    })
}

// baire

/// `restrict_H(lift_h(h)) = h` on `k <= levels`, `a <= levels + μ(k)`,
/// `b <= levels`, limits and moduli included.
pub fn lift_roundtrip(r: &mut SampleRng, count: usize, levels: usize) -> Check {
    cases(count, |_| {
        let h = random_certified_twofun(r, 6);
        let back = restrict_h(&lift_h(&h));
        for k in 0..=levels {
            if back.at_limit(k) != h.at_limit(k) || back.constancy_modulus(k) != h.constancy_modulus(k) {
                return Verdict::fail(Condition::Conclusion, vec![k], format!("limit or modulus differs on row {k}"));
            }
            for a in 0..=levels + h.constancy_modulus(k) {
                for b in 0..=levels {
                    if back.at_finite(k, a, b) != h.at_finite(k, a, b) {
                        return Verdict::fail(
                            Condition::Conclusion,
                            vec![k, a, b],
                            format!("differs at ({k},{a},{b})"),
                        );
                    }
                }
            }
        }
        Verdict::pass()
    })
}

/// A Baire point that often looks like a gap encoding.
fn random_baire(r: &mut SampleRng) -> BairePoint {
    let n = r.random_range(0..=10u64);
    let len = r.random_range(0..12);
    let mut prefix = vec![n];
    prefix.extend((0..len).map(|_| if r.random_bool(0.7) { 0 } else { r.random_range(1..=12) }));
    BairePoint::from_prefix(prefix)
}

/// Replacing everything past the declared lookahead never changes the
/// value; checked on `lift_h` of random functions and on the full section.
pub fn lookahead_respected(r: &mut SampleRng, count: usize) -> Check {
    let x = standard_mpoint(r);
    let funs: Vec<BigFun> =
        vec![lift_h(&random_certified_twofun(r, 6)), lift_h(&random_certified_twofun(r, 3)), section_full(&x)];
    cases(count, |n| {
        let f = &funs[n % funs.len()];
        let p = random_baire(r);
        let salt: u64 = r.random();
        let tail = move |i: usize| (salt.rotate_left(i as u32 % 64) % 7) ^ (i as u64 % 3);
        expect(f.respects_lookahead(&p, tail), vec![n], || format!("lookahead violated on {p:?}"))
    })
}

fn random_nxfan(r: &mut SampleRng) -> NxFanPoint {
    let p = if r.random_range(0..6) == 0 {
        FanPoint::Infinity
    } else {
        FanPoint::finite(r.random_range(0..40), r.random_range(0..40))
    };
    NxFanPoint::new(r.random_range(0..40), p)
}

pub fn section_image(r: &mut SampleRng, count: usize) -> Check {
    cases(count, |_| {
        let q = random_nxfan(r);
        let pre = baire_section(q).prefix(45);
        let nonzero = pre[1..].iter().filter(|v| **v != 0).count();
        expect(pre[0] == q.n as u64 && nonzero <= 1, vec![], || format!("encoding of {q} is {pre:?}"))
    })
}

pub fn absorb_bijective(r: &mut SampleRng, count: usize) -> Check {
    let pair = absorb_pair();
    cases(count, |_| {
        let s = if r.random_bool(0.3) { Summand::Left(r.random_range(0..40)) } else { Summand::Right(random_nxfan(r)) };
        let q = random_nxfan(r);
        expect(pair.round_trip(&s) == s && fan_absorb(fan_absorb_inv(q)) == q, vec![], || format!("{s:?} / {q}"))
    })
}

/// `retract_full(section_full(x))` agrees with `x` on `0..depth` with a
/// valid tail certificate.
pub fn full_roundtrip(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    let pair = full_pair();
    cases(count, |_| {
        let x = standard_mpoint(r);
        let z = pair.round_trip(&x);
        expect(stream_matches(&z, &x, depth, depth.min(12)), vec![], || format!("full round trip failed for {x}"))
    })
}

/// The full retraction yields a valid point of `M` on functionals outside
/// the image of the section.
pub fn retraction_total(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let big = lift_h(&random_certified_twofun(r, 4));
        let z = retract_full(&big);
        if let Err(i) = z.check_grid(depth) {
            return Verdict::fail(Condition::Grid, vec![i], format!("coordinate {i} off the grid"));
        }
        z.check_tail(depth.min(10), depth)
    })
}

// metric

pub fn dist_axioms(r: &mut SampleRng, count: usize) -> Check {
    cases(count, |_| {
        let (x, y, z) = (standard_mpoint(r), standard_mpoint(r), standard_mpoint(r));
        let (xy, yz, xz) = (dist_m(&x, &y), dist_m(&y, &z), dist_m(&x, &z));
        let ok = xy == dist_m(&y, &x) && dist_m(&x, &x).is_zero() && (xy.is_zero() == (x == y)) && xz <= &xy + &yz;
        expect(ok, vec![], || format!("metric axiom fails on {x}, {y}, {z}"))
    })
}

fn random_fan(r: &mut SampleRng) -> FanPoint {
    if r.random_range(0..5) == 0 {
        FanPoint::Infinity
    } else {
        FanPoint::finite(r.random_range(0..8), r.random_range(0..8))
    }
}

pub fn fan_axioms(r: &mut SampleRng, count: usize) -> Check {
    cases(count, |_| {
        let (p, q, s) = (random_fan(r), random_fan(r), random_fan(r));
        let ok = fan_dist(&p, &q) == fan_dist(&q, &p)
            && (fan_dist(&p, &q).is_zero() == (p == q))
            && fan_dist(&p, &s) <= &fan_dist(&p, &q) + &fan_dist(&q, &s);
        expect(ok, vec![], || format!("fan metric axiom fails on {p}, {q}, {s}"))
    })
}

/// `(n, b_n) → (∞,∞)` with modulus `k ↦ k`, whatever the `b_n`.
pub fn fan_escape(r: &mut SampleRng, depth: usize) -> Check {
    let seq: Vec<FanPoint> = (0..depth + 4).map(|n| FanPoint::finite(n, r.random_range(0..1000))).collect();
    Check { cases: 1, verdict: fan_conv_check(&seq, &FanPoint::Infinity, &modulus(|k| k), depth) }
}

pub fn norm_prefix_monotone(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |_| {
        let x = standard_mpoint(r);
        let sums: Vec<Dyadic> = (0..=depth + 31).map(|n| norm_prefix(&x, n)).collect();
        let ok = sums.windows(2).all(|w| w[0] <= w[1]) && sums.last() == Some(&x.norm());
        expect(ok, vec![], || format!("prefix sums of {x} are not monotone"))
    })
}

/// Enclosures `[lo, lo + 2^-k]` of `‖r_M(x, h)‖` and of the geometric
/// stream are nested as `k` grows.
pub fn enclosures_nested(r: &mut SampleRng, count: usize, depth: usize) -> Check {
    cases(count, |n| {
        let z = if n == 0 {
            MStream::geometric()
        } else {
            let x = standard_mpoint(r);
            let h = mixed_h(r, &x, n, 10);
            r_m(x, h)
        };
        let encl: Vec<(Dyadic, Dyadic)> = (0..=depth).map(|k| norm_enclose(&z, k)).collect();
        match encl.windows(2).position(|w| w[1].0 < w[0].0 || w[1].1 > w[0].1) {
            Some(k) => Verdict::fail(
                Condition::TailBound,
                vec![k + 1],
                format!("enclosure at {} escapes the one at {k}", k + 1),
            ),
            None => z.check_tail(depth, depth),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("lemma9".parse::<Suite>().is_err());
    }

    #[test]
    fn every_suite_passes_small() {
        for s in Suite::ALL {
            for o in run_suite(s, 3, 8, 12) {
                assert!(o.check.passed(), "{}", o.to_record());
            }
        }
    }

    #[test]
    fn failures_carry_the_case() {
        let c = cases(5, |n| if n == 3 { Verdict::fail(Condition::Norm, vec![1], "boom") } else { Verdict::pass() });
        assert_eq!(c.cases, 4);
        assert_eq!(c.verdict.failure().unwrap().detail, "case 3: boom");
    }
}
