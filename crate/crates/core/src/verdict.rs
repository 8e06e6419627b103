//! Outcomes of finite-depth certificate checks.

use std::fmt;

/// Which clause of a check was falsified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// Coordinatewise convergence, condition (a) of the convergence lemmas.
    Pointwise,
    /// Convergence of norms, condition (b).
    Norm,
    /// A constancy modulus was contradicted.
    Constancy,
    /// A tail-bound certificate was contradicted.
    TailBound,
    /// A value left its grid `M_i`.
    Grid,
    /// A function read past its declared lookahead.
    Lookahead,
    /// The stated hypothesis of a check did not hold on a probe.
    Hypothesis,
    /// The conclusion of a check failed although its hypothesis held.
    Conclusion,
    /// Convergence in the fan metric.
    FanDistance,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::Pointwise => "pointwise",
            Condition::Norm => "norm",
            Condition::Constancy => "constancy",
            Condition::TailBound => "tail-bound",
            Condition::Grid => "grid",
            Condition::Lookahead => "lookahead",
            Condition::Hypothesis => "hypothesis",
            Condition::Conclusion => "conclusion",
            Condition::FanDistance => "fan-distance",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub condition: Condition,
    /// Indices locating the counterexample, e.g. `[n, i]` or `[k, a, b]`.
    pub at: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// No counterexample within the sampled range. `notes` carries
    /// non-fatal observations such as non-monotone moduli.
    Pass {
        notes: Vec<String>,
    },
    Fail(Failure),
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict::Pass { notes: Vec::new() }
    }

    pub fn fail(condition: Condition, at: Vec<usize>, detail: impl Into<String>) -> Self {
        Verdict::Fail(Failure { condition, at, detail: detail.into() })
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }

    pub fn failure(&self) -> Option<&Failure> {
        match self {
            Verdict::Pass { .. } => None,
            Verdict::Fail(f) => Some(f),
        }
    }

    pub fn notes(&self) -> &[String] {
        match self {
            Verdict::Pass { notes } => notes,
            Verdict::Fail(_) => &[],
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass { notes } if notes.is_empty() => f.write_str("pass"),
            Verdict::Pass { notes } => write!(f, "pass ({})", notes.join("; ")),
            Verdict::Fail(fail) => {
                let at: Vec<String> = fail.at.iter().map(|i| i.to_string()).collect();
                write!(f, "fail {} at [{}]: {}", fail.condition, at.join(","), fail.detail)
            }
        }
    }
}
