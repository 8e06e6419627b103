//! Points, metrics and convergence certificates for the grid space `M`,
//! the product `∏ M_i`, the countable fan `F` and `ℕ × F`.
//!
//! `M` is the set of sequences `x` with `x(i) ∈ M_i = {j·2^-i : 0 <= j <= 2^i}`
//! and finite `ℓ₁` norm. Finitely supported points are [`MPoint`]s; points
//! with infinite support are [`MStream`]s, which carry a certified tail bound
//! in place of an exact norm.
//!
//! Convergence is never decided. The `conv_check_*` functions check supplied
//! moduli against a finite sample and either report a counterexample or a
//! pass at the sampled depth.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::dyadic::{dy_sum, Dyadic, ParseDyadicError};
use crate::verdict::{Condition, Verdict};

pub type Modulus = Arc<dyn Fn(usize) -> usize + Send + Sync>;
pub type Modulus2 = Arc<dyn Fn(usize, usize) -> usize + Send + Sync>;

pub fn modulus(f: impl Fn(usize) -> usize + Send + Sync + 'static) -> Modulus {
    Arc::new(f)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("coordinate {index}: {value} is not in the grid M_{index}")]
    OffGrid { index: usize, value: Dyadic },
    #[error("coordinate {0} given twice")]
    DuplicateIndex(usize),
    #[error("malformed point `{0}`")]
    Syntax(String),
    #[error(transparent)]
    Dyadic(#[from] ParseDyadicError),
}

/// `q ∈ M_i`, i.e. `q = j·2^-i` with `0 <= j <= 2^i`.
pub fn grid_check(i: usize, q: &Dyadic) -> bool {
    !q.is_negative() && q.exponent() <= i && *q <= Dyadic::one()
}

/// Read access to the coordinates of a point of `∏ M_i`.
pub trait Coords {
    fn coord(&self, i: usize) -> Dyadic;
}

/// A point of `M`: coordinates plus a certificate of summability.
///
/// `tail_bound(k) = N` certifies `∑_{i >= N} x(i) <= 2^-k`.
pub trait TailBounded: Coords {
    fn tail_bound(&self, k: usize) -> usize;
}

impl<T: Coords + ?Sized> Coords for &T {
    fn coord(&self, i: usize) -> Dyadic {
        (**self).coord(i)
    }
}

impl<T: TailBounded + ?Sized> TailBounded for &T {
    fn tail_bound(&self, k: usize) -> usize {
        (**self).tail_bound(k)
    }
}

/// Finitely supported point of `M` in sparse canonical form: zero
/// coordinates are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct MPoint {
    support: BTreeMap<usize, Dyadic>,
}

impl MPoint {
    /// The point `0^ω`.
    pub fn zero() -> Self {
        MPoint::default()
    }

    pub fn new(entries: impl IntoIterator<Item = (usize, Dyadic)>) -> Result<Self, SpaceError> {
        let mut support = BTreeMap::new();
        for (i, q) in entries {
            if !grid_check(i, &q) {
                return Err(SpaceError::OffGrid { index: i, value: q });
            }
            if support.contains_key(&i) {
                return Err(SpaceError::DuplicateIndex(i));
            }
            if !q.is_zero() {
                support.insert(i, q);
            }
        }
        Ok(MPoint { support })
    }

    /// `(q_0, ..., q_{n-1}, 0, 0, ...)`.
    pub fn from_prefix(prefix: &[Dyadic]) -> Result<Self, SpaceError> {
        MPoint::new(prefix.iter().cloned().enumerate())
    }

    /// Copy with coordinate `i` replaced by `q`.
    pub fn with(&self, i: usize, q: Dyadic) -> Result<Self, SpaceError> {
        if !grid_check(i, &q) {
            return Err(SpaceError::OffGrid { index: i, value: q });
        }
        let mut support = self.support.clone();
        if q.is_zero() {
            support.remove(&i);
        } else {
            support.insert(i, q);
        }
        Ok(MPoint { support })
    }

    pub fn get(&self, i: usize) -> Option<&Dyadic> {
        self.support.get(&i)
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, &Dyadic)> + '_ {
        self.support.iter().map(|(i, q)| (*i, q))
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// One past the largest nonzero index; `0` for `0^ω`.
    pub fn support_end(&self) -> usize {
        self.support.keys().next_back().map_or(0, |i| i + 1)
    }

    pub fn norm(&self) -> Dyadic {
        dy_sum(self.support.values())
    }
}

impl Coords for MPoint {
    fn coord(&self, i: usize) -> Dyadic {
        self.support.get(&i).cloned().unwrap_or_default()
    }
}

impl TailBounded for MPoint {
    fn tail_bound(&self, _k: usize) -> usize {
        self.support_end()
    }
}

/// Text form `[i:j/2^e, ...]`, e.g. `[0:1/2^0, 2:1/2^2]`.
impl fmt::Display for MPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (n, (i, q)) in self.support.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{i}:{q}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for MPoint {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| SpaceError::Syntax(s.to_string()))?;
        let mut entries = Vec::new();
        for item in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (i, q) = item.split_once(':').ok_or_else(|| SpaceError::Syntax(item.to_string()))?;
            let i = i.trim().parse::<usize>().map_err(|_| SpaceError::Syntax(item.to_string()))?;
            entries.push((i, q.parse::<Dyadic>()?));
        }
        MPoint::new(entries)
    }
}

type CoordFn = Arc<dyn Fn(usize) -> Dyadic + Send + Sync>;

/// Point of `∏ M_i` given by a coordinate function. No summability claim.
#[derive(Clone)]
pub struct GridStream {
    coord: CoordFn,
}

impl GridStream {
    pub fn new(coord: impl Fn(usize) -> Dyadic + Send + Sync + 'static) -> Self {
        GridStream { coord: Arc::new(coord) }
    }

    /// Coordinates `i` with `i < upto` that are off their grid.
    pub fn check_grid(&self, upto: usize) -> Result<(), usize> {
        (0..upto).find(|&i| !grid_check(i, &(self.coord)(i))).map_or(Ok(()), Err)
    }
}

impl Coords for GridStream {
    fn coord(&self, i: usize) -> Dyadic {
        (self.coord)(i)
    }
}

impl fmt::Debug for GridStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GridStream(..)")
    }
}

/// Point of `M` as a coordinate generator plus certified tail bound.
#[derive(Clone)]
pub struct MStream {
    coord: CoordFn,
    tail: Modulus,
}

impl MStream {
    /// Both functions must be pure. `tail(k) = N` must certify
    /// `∑_{i >= N} coord(i) <= 2^-k`; see [`MStream::check_tail`].
    pub fn new(
        coord: impl Fn(usize) -> Dyadic + Send + Sync + 'static,
        tail: impl Fn(usize) -> usize + Send + Sync + 'static,
    ) -> Self {
        MStream { coord: Arc::new(coord), tail: Arc::new(tail) }
    }

    /// `x(i) = 2^-i`, with `∑_{i >= k+1} 2^-i = 2^-k`.
    pub fn geometric() -> Self {
        MStream::new(Dyadic::pow2_neg, |k| k + 1)
    }

    pub fn from_point(x: MPoint) -> Self {
        let end = x.support_end();
        MStream::new(move |i| x.coord(i), move |_| end)
    }

    /// First `n` coordinates collected into a finite point.
    pub fn truncate(&self, n: usize) -> Result<MPoint, SpaceError> {
        MPoint::new((0..n).map(|i| (i, self.coord(i))))
    }

    pub fn check_grid(&self, upto: usize) -> Result<(), usize> {
        (0..upto).find(|&i| !grid_check(i, &self.coord(i))).map_or(Ok(()), Err)
    }

    /// Falsification check of the tail certificate: for every `k < k_max`
    /// the window `[N, N + window]` with `N = tail_bound(k)` sums to at most
    /// `2^-k`. Coordinates are nonnegative, so shorter windows are implied.
    pub fn check_tail(&self, k_max: usize, window: usize) -> Verdict {
        check_tail_bound(self, k_max, window)
    }
}

impl Coords for MStream {
    fn coord(&self, i: usize) -> Dyadic {
        (self.coord)(i)
    }
}

impl TailBounded for MStream {
    fn tail_bound(&self, k: usize) -> usize {
        (self.tail)(k)
    }
}

impl fmt::Debug for MStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MStream(..)")
    }
}

pub fn check_tail_bound(x: &impl TailBounded, k_max: usize, window: usize) -> Verdict {
    for k in 0..k_max {
        let n = x.tail_bound(k);
        let coords: Vec<Dyadic> = (n..=n + window).map(|i| x.coord(i)).collect();
        let s = dy_sum(&coords);
        if !s.le_pow2_neg(k) {
            return Verdict::fail(
                Condition::TailBound,
                vec![k, n],
                format!("window sum {s} beyond {n} exceeds 2^-{k}"),
            );
        }
    }
    Verdict::pass()
}

/// `∑_{i<n} x(i)`.
pub fn norm_prefix(x: &impl Coords, n: usize) -> Dyadic {
    let coords: Vec<Dyadic> = (0..n).map(|i| x.coord(i)).collect();
    dy_sum(&coords)
}

pub fn norm_full(x: &MPoint) -> Dyadic {
    x.norm()
}

/// Interval `[lo, lo + 2^-k]` containing `‖x‖`, with
/// `lo = norm_prefix(x, tail_bound(k))`.
pub fn norm_enclose(x: &impl TailBounded, k: usize) -> (Dyadic, Dyadic) {
    let lo = norm_prefix(x, x.tail_bound(k));
    let hi = &lo + &Dyadic::pow2_neg(k);
    (lo, hi)
}

/// Exact `ℓ₁` distance.
pub fn dist_m(x: &MPoint, y: &MPoint) -> Dyadic {
    let mut diffs = Vec::new();
    let keys: std::collections::BTreeSet<usize> = x.support.keys().chain(y.support.keys()).copied().collect();
    for i in keys {
        diffs.push((&x.coord(i) - &y.coord(i)).abs());
    }
    dy_sum(&diffs)
}

/// Point of the countable fan `ℕ² ∪ {(∞,∞)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FanPoint {
    Finite { a: usize, b: usize },
    Infinity,
}

impl FanPoint {
    pub fn finite(a: usize, b: usize) -> Self {
        FanPoint::Finite { a, b }
    }
}

/// Fan metric: `2^-a` to the limit point, `max{2^-a, 2^-a'}` between
/// distinct finite points.
pub fn fan_dist(p: &FanPoint, q: &FanPoint) -> Dyadic {
    match (p, q) {
        _ if p == q => Dyadic::zero(),
        (FanPoint::Finite { a, .. }, FanPoint::Infinity) | (FanPoint::Infinity, FanPoint::Finite { a, .. }) => {
            Dyadic::pow2_neg(*a)
        }
        (FanPoint::Finite { a, .. }, FanPoint::Finite { a: a2, .. }) => Dyadic::pow2_neg((*a).min(*a2)),
        (FanPoint::Infinity, FanPoint::Infinity) => unreachable!("equal points handled above"),
    }
}

impl fmt::Display for FanPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FanPoint::Finite { a, b } => write!(f, "({a},{b})"),
            FanPoint::Infinity => f.write_str("(inf,inf)"),
        }
    }
}

impl FromStr for FanPoint {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SpaceError::Syntax(s.to_string());
        let inner = s.trim().strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        match (a.trim(), b.trim()) {
            ("inf", "inf") => Ok(FanPoint::Infinity),
            (a, b) => Ok(FanPoint::Finite { a: a.parse().map_err(|_| bad())?, b: b.parse().map_err(|_| bad())? }),
        }
    }
}

/// Point `(n, p)` of `ℕ × F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NxFanPoint {
    pub n: usize,
    pub p: FanPoint,
}

impl NxFanPoint {
    pub fn new(n: usize, p: FanPoint) -> Self {
        NxFanPoint { n, p }
    }
}

impl fmt::Display for NxFanPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.n, self.p)
    }
}

/// Checks `fan_dist(seq[n], limit) <= 2^-k` for all `k < depth` and all
/// sampled `n >= modulus(k)`.
pub fn fan_conv_check(seq: &[FanPoint], limit: &FanPoint, modulus: &Modulus, depth: usize) -> Verdict {
    for k in 0..depth {
        let bound = Dyadic::pow2_neg(k);
        for (n, p) in seq.iter().enumerate().skip(modulus(k)) {
            let d = fan_dist(p, limit);
            if d > bound {
                return Verdict::fail(Condition::FanDistance, vec![n, k], format!("d({p}, {limit}) = {d} > 2^-{k}"));
            }
        }
    }
    Verdict::pass()
}

/// Claimed limit of a sequence in `M`.
#[derive(Debug, Clone)]
pub enum Limit {
    Point(MPoint),
    Stream(MStream),
}

impl Limit {
    fn coord(&self, i: usize) -> Dyadic {
        match self {
            Limit::Point(x) => x.coord(i),
            Limit::Stream(x) => x.coord(i),
        }
    }

    /// Enclosure of the norm of width at most `2^-k`.
    fn norm_enclosure(&self, k: usize) -> (Dyadic, Dyadic) {
        match self {
            Limit::Point(x) => {
                let n = x.norm();
                (n.clone(), n)
            }
            Limit::Stream(x) => norm_enclose(x, k),
        }
    }
}

impl From<MPoint> for Limit {
    fn from(x: MPoint) -> Self {
        Limit::Point(x)
    }
}

/// Certificate for convergence in `M`: `pointwise(i) = n_i` with
/// `x_n(i) = x_∞(i)` for `n >= n_i`, and `norm(k) = n` with
/// `|‖x_n‖ - ‖x_∞‖| <= 2^-k` for `n >= norm(k)`.
#[derive(Clone)]
pub struct ConvergenceCertificate {
    pub limit: Limit,
    pub pointwise: Modulus,
    pub norm: Modulus,
}

/// Certificate for convergence in `ℓ₁`: `pointwise(i, k) = n` with
/// `|x_n(i) - x_∞(i)| <= 2^-k` for `n >= n`.
#[derive(Clone)]
pub struct L1Certificate {
    pub limit: Limit,
    pub pointwise: Modulus2,
    pub norm: Modulus,
}

impl From<&ConvergenceCertificate> for L1Certificate {
    fn from(c: &ConvergenceCertificate) -> Self {
        let p = c.pointwise.clone();
        L1Certificate { limit: c.limit.clone(), pointwise: Arc::new(move |i, _k| p(i)), norm: c.norm.clone() }
    }
}

fn monotonicity_note(name: &str, m: &Modulus, depth: usize) -> Option<String> {
    (1..depth).find(|&i| m(i) < m(i - 1)).map(|i| format!("{name} modulus not monotone at {i}"))
}

/// Condition (b): `|‖x_n‖ - ‖x_∞‖| <= 2^-k` for sampled `n >= norm(k)`.
///
/// For a stream limit only definite violations against the enclosure are
/// reported.
fn check_norms(norms: &[Dyadic], limit: &Limit, norm_mod: &Modulus, depth: usize) -> Option<Verdict> {
    for k in 0..depth {
        let eps = Dyadic::pow2_neg(k);
        let (lo, hi) = limit.norm_enclosure(k + 1);
        for (n, nx) in norms.iter().enumerate().skip(norm_mod(k)) {
            let below = (&lo - nx) > eps;
            let above = (nx - &hi) > eps;
            if below || above {
                return Some(Verdict::fail(
                    Condition::Norm,
                    vec![n, k],
                    format!("‖x_{n}‖ = {nx} differs from the limit norm in [{lo}, {hi}] by more than 2^-{k}"),
                ));
            }
        }
    }
    None
}

/// Certificate check for convergence in `M`.
pub fn conv_check_m(xs: &[MPoint], cert: &ConvergenceCertificate, depth: usize) -> Verdict {
    if let Verdict::Fail(f) = conv_check_prod(xs, &cert.limit, &cert.pointwise, depth) {
        return Verdict::Fail(f);
    }
    let norms: Vec<Dyadic> = xs.iter().map(MPoint::norm).collect();
    if let Some(v) = check_norms(&norms, &cert.limit, &cert.norm, depth) {
        return v;
    }
    let notes = [monotonicity_note("pointwise", &cert.pointwise, depth), monotonicity_note("norm", &cert.norm, depth)];
    Verdict::Pass { notes: notes.into_iter().flatten().collect() }
}

/// Condition (a) alone: convergence in the product `∏ M_i`.
pub fn conv_check_prod(xs: &[MPoint], limit: &Limit, pointwise: &Modulus, depth: usize) -> Verdict {
    for i in 0..depth {
        let target = limit.coord(i);
        for (n, x) in xs.iter().enumerate().skip(pointwise(i)) {
            let v = x.coord(i);
            if v != target {
                return Verdict::fail(
                    Condition::Pointwise,
                    vec![n, i],
                    format!("x_{n}({i}) = {v}, limit has {target}"),
                );
            }
        }
    }
    Verdict::pass()
}

/// Certificate check for convergence in `ℓ₁`.
pub fn conv_check_l1(xs: &[MPoint], cert: &L1Certificate, depth: usize) -> Verdict {
    for i in 0..depth {
        let target = cert.limit.coord(i);
        for k in 0..depth {
            let eps = Dyadic::pow2_neg(k);
            for (n, x) in xs.iter().enumerate().skip((cert.pointwise)(i, k)) {
                let gap = (&x.coord(i) - &target).abs();
                if gap > eps {
                    return Verdict::fail(
                        Condition::Pointwise,
                        vec![n, i, k],
                        format!("|x_{n}({i}) - x_∞({i})| = {gap} > 2^-{k}"),
                    );
                }
            }
        }
    }
    let norms: Vec<Dyadic> = xs.iter().map(MPoint::norm).collect();
    if let Some(v) = check_norms(&norms, &cert.limit, &cert.norm, depth) {
        return v;
    }
    let notes = monotonicity_note("norm", &cert.norm, depth);
    Verdict::Pass { notes: notes.into_iter().collect() }
}
