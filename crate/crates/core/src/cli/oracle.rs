//! Oracle spec mini-language.
//!
//! An oracle is a conjunction of clauses separated by `&`:
//!
//! ```text
//! ball            ‖z‖ < 1
//! all             the whole space
//! norm<q          also norm<=q
//! x[i]=q          also x[i]!=q
//! pull:FILE       complement of a candidate read from FILE, pulled back
//!                 along a section
//! ```
//!
//! A candidate file starts with `via em` or `via chain` and lists one
//! alternative per line; an alternative is a conjunction of comparisons
//! `TERM OP q` with `OP` one of `< <= > >= = !=`. Terms for `via em` are
//! evaluated at `e_M(z) = (z, g(z))`: `rnorm` (norm of `r_M` of the pair),
//! `xnorm`, `x[i]`, `h(k,a,b)`, `h(k,inf)`. For `via chain` the only term is
//! `H[p0,p1,...]`, the full section applied to the Baire point
//! `p0 p1 ... 0^ω`. Blank lines and `#` comments are ignored.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::adversary::{AdversaryError, OpenSetOracle};
use crate::dyadic::{Dyadic, ParseDyadicError};
use crate::funcspace::{BairePoint, BigFun};
use crate::retract_chain::{em_pair, full_pair, ProdFanPoint};
use crate::retract_core::r_m_point;
use crate::spaces::{Coords, MPoint};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("empty oracle spec")]
    Empty,
    #[error("unknown clause {0:?}")]
    Clause(String),
    #[error("bad value in {clause:?}: {source}")]
    Value { clause: String, source: ParseDyadicError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Rule { path: String, line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Op {
    fn holds(self, o: Ordering) -> bool {
        match self {
            Op::Lt => o.is_lt(),
            Op::Le => o.is_le(),
            Op::Gt => o.is_gt(),
            Op::Ge => o.is_ge(),
            Op::Eq => o.is_eq(),
            Op::Ne => o.is_ne(),
        }
    }

    /// Splits `lhs OP rhs` at the first operator.
    fn split(s: &str) -> Option<(&str, Op, &str)> {
        const OPS: [(&str, Op); 6] =
            [("<=", Op::Le), (">=", Op::Ge), ("!=", Op::Ne), ("<", Op::Lt), (">", Op::Gt), ("=", Op::Eq)];
        let (pos, tok, op) = OPS
            .iter()
            .filter_map(|(tok, op)| s.find(tok).map(|p| (p, *tok, *op)))
            .min_by_key(|(p, tok, _)| (*p, std::cmp::Reverse(tok.len())))?;
        Some((s[..pos].trim(), op, s[pos + tok.len()..].trim()))
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
            Op::Eq => "=",
            Op::Ne => "!=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    RNorm,
    XNorm,
    X(usize),
    H(usize, usize, usize),
    HLimit(usize),
    Big(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub term: Term,
    pub op: Op,
    pub value: Dyadic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Via {
    Em,
    Chain,
}

/// A candidate clopen of a section's codomain, in disjunctive normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub via: Via,
    pub alternatives: Vec<Vec<Atom>>,
}

fn bit_value(b: crate::funcspace::Bit) -> Dyadic {
    Dyadic::from_int(b.as_u64() as i64)
}

impl Candidate {
    fn holds_em(&self, (x, h): &ProdFanPoint) -> bool {
        let eval = |t: &Term| match t {
            Term::RNorm => r_m_point(x, h).norm(),
            Term::XNorm => x.norm(),
            Term::X(i) => x.coord(*i),
            Term::H(k, a, b) => bit_value(h.at_finite(*k, *a, *b)),
            Term::HLimit(k) => bit_value(h.at_limit(*k)),
            Term::Big(_) => unreachable!("rejected by the parser"),
        };
        self.alternatives.iter().any(|alt| alt.iter().all(|a| a.op.holds(eval(&a.term).cmp(&a.value))))
    }

    fn holds_chain(&self, big: &BigFun) -> bool {
        let eval = |t: &Term| match t {
            Term::Big(p) => Dyadic::from_int(big.eval(&BairePoint::from_prefix(p.clone())) as i64),
            _ => unreachable!("rejected by the parser"),
        };
        self.alternatives.iter().any(|alt| alt.iter().all(|a| a.op.holds(eval(&a.term).cmp(&a.value))))
    }

    /// `z ↦ C(section(z))`.
    pub fn pulled_back(&self) -> Arc<dyn Fn(&MPoint) -> bool + Send + Sync> {
        let c = self.clone();
        match self.via {
            Via::Em => {
                let pair = em_pair();
                Arc::new(move |z| c.holds_em(&pair.section(z)))
            }
            Via::Chain => {
                let pair = full_pair();
                Arc::new(move |z| c.holds_chain(&pair.section(z)))
            }
        }
    }

    pub fn parse(text: &str, path: &str) -> Result<Self, OracleError> {
        let err = |line: usize, msg: String| OracleError::Rule { path: path.to_string(), line, msg };
        let mut via = None;
        let mut alternatives = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(v) = line.strip_prefix("via ") {
                via = Some(match v.trim() {
                    "em" => Via::Em,
                    "chain" => Via::Chain,
                    other => return Err(err(n + 1, format!("unknown section {other:?}"))),
                });
                continue;
            }
            let v = via.ok_or_else(|| err(n + 1, "rules before the `via` line".into()))?;
            let alt = line
                .split('&')
                .map(|s| parse_atom(s.trim(), v).map_err(|m| err(n + 1, m)))
                .collect::<Result<Vec<_>, _>>()?;
            alternatives.push(alt);
        }
        let via = via.ok_or_else(|| err(0, "missing `via em` or `via chain`".into()))?;
        Ok(Candidate { via, alternatives })
    }
}

fn parse_index_list(s: &str) -> Option<Vec<usize>> {
    s.split(',').map(|p| p.trim().parse().ok()).collect()
}

fn parse_atom(s: &str, via: Via) -> Result<Atom, String> {
    let (lhs, op, rhs) = Op::split(s).ok_or_else(|| format!("no comparison in {s:?}"))?;
    let value: Dyadic = rhs.parse().map_err(|e| format!("{rhs:?}: {e}"))?;
    let term = match (via, lhs) {
        (Via::Em, "rnorm") => Term::RNorm,
        (Via::Em, "xnorm") => Term::XNorm,
        (Via::Em, l) if l.starts_with("x[") && l.ends_with(']') => {
            Term::X(l[2..l.len() - 1].trim().parse().map_err(|_| format!("bad index in {l:?}"))?)
        }
        (Via::Em, l) if l.starts_with("h(") && l.ends_with(')') => {
            let inner = &l[2..l.len() - 1];
            match inner.split_once(',') {
                Some((k, rest)) if rest.trim() == "inf" => {
                    Term::HLimit(k.trim().parse().map_err(|_| format!("bad level in {l:?}"))?)
                }
                _ => match parse_index_list(inner).as_deref() {
                    Some(&[k, a, b]) => Term::H(k, a, b),
                    _ => return Err(format!("expected h(k,a,b) or h(k,inf), got {l:?}")),
                },
            }
        }
        (Via::Chain, l) if l.starts_with("H[") && l.ends_with(']') => {
            let p: Option<Vec<u64>> = l[2..l.len() - 1].split(',').map(|v| v.trim().parse().ok()).collect();
            Term::Big(p.ok_or_else(|| format!("bad Baire prefix in {l:?}"))?)
        }
        (_, l) => return Err(format!("unknown term {l:?}")),
    };
    Ok(Atom { term, op, value })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Clause {
    All,
    Norm { op: Op, bound: Dyadic },
    Coord { i: usize, op: Op, value: Dyadic },
    Pull { path: String, candidate: Candidate },
}

impl Clause {
    fn member_fn(&self) -> Arc<dyn Fn(&MPoint) -> bool + Send + Sync> {
        match self.clone() {
            Clause::All => Arc::new(|_| true),
            Clause::Norm { op, bound } => Arc::new(move |z| op.holds(z.norm().cmp(&bound))),
            Clause::Coord { i, op, value } => Arc::new(move |z| op.holds(z.coord(i).cmp(&value))),
            Clause::Pull { candidate, .. } => {
                let inside = candidate.pulled_back();
                Arc::new(move |z| !inside(z))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSpec {
    pub text: String,
    pub clauses: Vec<Clause>,
}

impl OracleSpec {
    /// Parses a spec; `pull:` files are resolved relative to the working
    /// directory.
    pub fn parse(spec: &str) -> Result<Self, OracleError> {
        let clauses = spec
            .split('&')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(parse_clause)
            .collect::<Result<Vec<_>, _>>()?;
        if clauses.is_empty() {
            return Err(OracleError::Empty);
        }
        Ok(OracleSpec { text: spec.trim().to_string(), clauses })
    }

    pub fn build(&self) -> Result<OpenSetOracle, AdversaryError> {
        let parts: Vec<_> = self.clauses.iter().map(Clause::member_fn).collect();
        OpenSetOracle::from_arc(self.text.clone(), Arc::new(move |z| parts.iter().all(|p| p(z))))
    }

    /// The candidate when the spec is a single `pull:` clause.
    pub fn sole_candidate(&self) -> Option<&Candidate> {
        match self.clauses.as_slice() {
            [Clause::Pull { candidate, .. }] => Some(candidate),
            _ => None,
        }
    }
}

fn parse_clause(c: &str) -> Result<Clause, OracleError> {
    let value = |v: &str| v.parse::<Dyadic>().map_err(|source| OracleError::Value { clause: c.to_string(), source });
    if c == "ball" {
        return Ok(Clause::Norm { op: Op::Lt, bound: Dyadic::one() });
    }
    if c == "all" {
        return Ok(Clause::All);
    }
    if let Some(path) = c.strip_prefix("pull:") {
        let text = std::fs::read_to_string(Path::new(path))
            .map_err(|source| OracleError::Io { path: path.to_string(), source })?;
        return Ok(Clause::Pull { path: path.to_string(), candidate: Candidate::parse(&text, path)? });
    }
    let (lhs, op, rhs) = Op::split(c).ok_or_else(|| OracleError::Clause(c.to_string()))?;
    if lhs == "norm" && matches!(op, Op::Lt | Op::Le) {
        return Ok(Clause::Norm { op, bound: value(rhs)? });
    }
    if let Some(i) = lhs.strip_prefix("x[").and_then(|l| l.strip_suffix(']')) {
        if matches!(op, Op::Eq | Op::Ne) {
            let i = i.trim().parse().map_err(|_| OracleError::Clause(c.to_string()))?;
            return Ok(Clause::Coord { i, op, value: value(rhs)? });
        }
    }
    Err(OracleError::Clause(c.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn member(spec: &str, z: &str) -> bool {
        OracleSpec::parse(spec).unwrap().build().unwrap().member(&z.parse().unwrap())
    }

    #[test]
    fn builtin_clauses() {
        assert!(member("ball", "[1:1/2^1]"));
        assert!(!member("ball", "[0:1]"));
        assert!(member("norm<=1", "[0:1]"));
        assert!(member("ball & x[0]=0", "[1:1/2^1]"));
        assert!(!member("ball & x[0]=0", "[0:1]"));
        assert!(!member("ball & x[1]=0", "[1:1/2^1]"));
        assert!(member("ball & x[2]!=1/2^2", "[2:1/2^1]"));
        assert!(member("all", "[0:1, 1:1]"));
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(OracleSpec::parse(""), Err(OracleError::Empty)));
        assert!(matches!(OracleSpec::parse("cube"), Err(OracleError::Clause(_))));
        assert!(matches!(OracleSpec::parse("norm>1"), Err(OracleError::Clause(_))));
        assert!(matches!(OracleSpec::parse("norm<1/3"), Err(OracleError::Value { .. })));
        assert!(matches!(OracleSpec::parse("pull:/nonexistent/file"), Err(OracleError::Io { .. })));
        assert!(OracleSpec::parse("x[0]=1/2^1").unwrap().build().is_err());
    }

    #[test]
    fn operator_split_prefers_two_chars() {
        assert_eq!(Op::split("norm<=1"), Some(("norm", Op::Le, "1")));
        assert_eq!(Op::split("x[3] != 1/2^3"), Some(("x[3]", Op::Ne, "1/2^3")));
        assert_eq!(Op::split("h(0,inf)=1"), Some(("h(0,inf)", Op::Eq, "1")));
    }

    #[test]
    fn candidate_files() {
        let c = Candidate::parse("# outside the ball\nvia em\nrnorm >= 1\n", "t").unwrap();
        assert_eq!(c.alternatives.len(), 1);
        let inside = c.pulled_back();
        assert!(inside(&"[0:1]".parse().unwrap()));
        assert!(!inside(&"[1:1/2^1, 2:1/2^2]".parse().unwrap()));

        let c = Candidate::parse("via em\nh(0,inf)=1\nx[0]=1 & h(1,0,0)=1\n", "t").unwrap();
        assert_eq!(c.alternatives.len(), 2);
        let inside = c.pulled_back();
        assert!(inside(&"[0:1]".parse().unwrap()));
        assert!(!inside(&"[1:1]".parse().unwrap()));

        let c = Candidate::parse("via chain\nH[0,1] >= 1\n", "t").unwrap();
        assert_eq!(c.alternatives[0][0].term, Term::Big(vec![0, 1]));
        assert!(Candidate::parse("rnorm >= 1", "t").is_err());
        assert!(Candidate::parse("via chain\nrnorm >= 1", "t").is_err());
        assert!(Candidate::parse("via em\nh(1,2)=1", "t").is_err());
    }
}
