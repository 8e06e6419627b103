//! Command-line surface: flag parsing, run configuration and the commands.
//!
//! Every command produces a list of record lines plus a closing summary.
//! Structured output is one `key=value` record per line with fields in a
//! fixed order; text output is the same body followed by a sentence.

pub mod oracle;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::adversary::{adversary_run, witness_verify, AdversaryError};
use crate::checks::{run_suite, Suite};
use crate::retract_chain::{code_build, full_pair, stream_matches};
use crate::retract_core::{e_m, g_apply, r_m, CmDescriptor};
use crate::sample::{rng, standard_mpoint, Flip};
use crate::spaces::{Coords, MPoint};
use oracle::OracleSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Section/retraction identities on random points.
    Roundtrip,
    /// Witness chain against a claimed clopen neighbourhood of 0.
    Adversary,
    /// A named property suite.
    Checks,
    /// Prefix code table of one level.
    Codes,
    /// Probe list deciding membership in C_m.
    Descriptor,
    /// Finite table of g(x).
    Gtable,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "qcbkit", version, about = "Exact experiments on the dyadic-grid l1 space and its retracts")]
pub struct Args {
    #[arg(long, value_enum)]
    pub command: Command,
    /// Depth, level or resolution; the meaning depends on the command.
    #[arg(long, alias = "K")]
    pub depth: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of random cases.
    #[arg(long)]
    pub count: Option<usize>,
    /// Oracle spec for `adversary`, e.g. `ball & x[0]=0` or `pull:FILE`.
    #[arg(long, default_value = "ball")]
    pub oracle: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the record body here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub max_depth: usize,
    /// Suite name for `checks`.
    #[arg(long)]
    pub suite: Option<String>,
    /// Point for `gtable`, e.g. `[0:1, 2:1/2^2]`.
    #[arg(long)]
    pub point: Option<String>,
    /// Test hook: corrupt one probe of the graph in `roundtrip`.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Error)]
pub enum UsageError {
    #[error("depth {depth} exceeds --max-depth {max}")]
    TooDeep { depth: usize, max: usize },
    #[error("--suite is required for checks")]
    MissingSuite,
    #[error(transparent)]
    Suite(#[from] crate::checks::UnknownSuite),
    #[error("--point is required for gtable")]
    MissingPoint,
    #[error("bad --point: {0}")]
    Point(#[from] crate::spaces::SpaceError),
    #[error("bad --oracle: {0}")]
    Oracle(#[from] oracle::OracleError),
    #[error("--count {count} too large for {command}")]
    TooMany { count: usize, command: Command },
}

/// Validated configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub depth: usize,
    pub seed: u64,
    pub count: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub suite: Option<Suite>,
    pub point: Option<MPoint>,
    pub oracle: Option<OracleSpec>,
    pub inject_fault: bool,
}

impl RunConfig {
    pub fn from_args(args: &Args) -> Result<Self, UsageError> {
        let (depth, count) = match args.command {
            Command::Roundtrip => (40, 100),
            Command::Adversary => (10, 0),
            Command::Checks => (20, 100),
            Command::Codes => (3, 0),
            Command::Descriptor => (2, 0),
            Command::Gtable => (6, 0),
        };
        let depth = args.depth.unwrap_or(depth);
        if depth > args.max_depth {
            return Err(UsageError::TooDeep { depth, max: args.max_depth });
        }
        let count = args.count.unwrap_or(count);
        if args.command == Command::Codes && depth > 20 {
            return Err(UsageError::TooDeep { depth, max: 20 });
        }
        if count > 1_000_000 {
            return Err(UsageError::TooMany { count, command: args.command });
        }
        let suite = match (args.command, &args.suite) {
            (Command::Checks, None) => return Err(UsageError::MissingSuite),
            (_, Some(s)) => Some(s.parse()?),
            _ => None,
        };
        let point = match (args.command, &args.point) {
            (Command::Gtable, None) => return Err(UsageError::MissingPoint),
            (_, Some(p)) => Some(p.parse()?),
            _ => None,
        };
        let oracle = match args.command {
            Command::Adversary => Some(OracleSpec::parse(&args.oracle)?),
            _ => None,
        };
        Ok(RunConfig {
            command: args.command,
            depth,
            seed: args.seed,
            count,
            format: args.format,
            out: args.out.clone(),
            suite,
            point,
            oracle,
            inject_fault: args.inject_fault,
        })
    }
}

/// Output of one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub records: Vec<String>,
    /// Closing `key=value` record.
    pub summary: String,
    /// Closing sentence for text output.
    pub sentence: String,
    pub ok: bool,
}

impl Report {
    pub fn render(&self, format: Format) -> (String, String) {
        let mut body = String::new();
        for r in &self.records {
            body.push_str(r);
            body.push('\n');
        }
        let tail = match format {
            Format::Structured => format!("{}\n", self.summary),
            Format::Text => format!("{}\n", self.sentence),
        };
        (body, tail)
    }
}

fn quoted(v: impl fmt::Display) -> String {
    format!("{:?}", v.to_string())
}

pub fn run(cfg: &RunConfig) -> Report {
    match cfg.command {
        Command::Roundtrip => cmd_roundtrip(cfg),
        Command::Adversary => cmd_adversary(cfg),
        Command::Checks => cmd_checks(cfg),
        Command::Codes => cmd_codes(cfg),
        Command::Descriptor => cmd_descriptor(cfg),
        Command::Gtable => cmd_gtable(cfg),
    }
}

/// Both section/retraction pairs on `count` random points, compared
/// exactly on `0..depth` with the tail certificate sampled.
pub fn cmd_roundtrip(cfg: &RunConfig) -> Report {
    let mut r = rng(cfg.seed);
    let full = full_pair();
    let k_max = cfg.depth.min(12);
    let (mut em_ok, mut full_ok) = (0, 0);
    let mut records = Vec::with_capacity(cfg.count);
    for n in 0..cfg.count {
        let x = standard_mpoint(&mut r);
        let (x2, mut g) = e_m(&x);
        if cfg.inject_fault {
            g = Flip::Probe { k: 0, a: 0, b: 0 }.apply(&g);
        }
        let z = r_m(x2, g);
        let em = (0..cfg.depth).all(|i| z.coord(i) == x.coord(i)) && z.check_tail(k_max, cfg.depth).is_pass();
        let fz = full.round_trip(&x);
        let fu = stream_matches(&fz, &x, cfg.depth, k_max);
        em_ok += usize::from(em);
        full_ok += usize::from(fu);
        let status = |b: bool| if b { "pass" } else { "fail" };
        let mut rec = format!("point={n} x={} em={} full={}", quoted(&x), status(em), status(fu));
        if !em {
            let z_prefix = MPoint::from_prefix(&(0..cfg.depth).map(|i| z.coord(i)).collect::<Vec<_>>())
                .map(|p| p.to_string())
                .unwrap_or_else(|e| e.to_string());
            rec.push_str(&format!(" em_image={}", quoted(z_prefix)));
        }
        records.push(rec);
    }
    let ok = em_ok == cfg.count && full_ok == cfg.count;
    Report {
        summary: format!(
            "summary command=roundtrip seed={} count={} depth={} em_exact={em_ok} full_exact={full_ok} status={}",
            cfg.seed,
            cfg.count,
            cfg.depth,
            if ok { "pass" } else { "fail" }
        ),
        sentence: format!(
            "{em_ok}/{c} exact for r_M∘e_M, {full_ok}/{c} exact for the full chain (depth {d}, seed {s})",
            c = cfg.count,
            d = cfg.depth,
            s = cfg.seed
        ),
        records,
        ok,
    }
}

pub fn cmd_adversary(cfg: &RunConfig) -> Report {
    let spec = cfg.oracle.as_ref().expect("validated");
    let refuse = |e: AdversaryError| {
        let AdversaryError::NotSeparator { probe, reason } = &e;
        Report {
            records: vec![],
            summary: format!(
                "summary command=adversary oracle={} depth={} verdict=not-a-separator probe={} reason={}",
                quoted(&spec.text),
                cfg.depth,
                quoted(probe),
                quoted(reason)
            ),
            sentence: format!("not a separator: {reason} at probe {probe}"),
            ok: false,
        }
    };
    let v = match spec.build() {
        Ok(v) => v,
        Err(e) => return refuse(e),
    };
    let chain = match adversary_run(&v, cfg.depth) {
        Ok(c) => c,
        Err(e) => return refuse(e),
    };
    let report = witness_verify(&chain, &v);
    let mut records = chain.to_records();
    if let Some(c) = spec.sole_candidate() {
        let inside = c.pulled_back();
        records.extend(chain.steps.iter().map(|s| {
            format!(
                "transport k={} candidate_at_x={} candidate_at_y={}",
                s.k,
                u8::from(inside(&s.x)),
                u8::from(inside(&s.y))
            )
        }));
    }
    let last = chain.steps.last().expect("depth >= 0");
    Report {
        summary: format!(
            "summary command=adversary oracle={} depth={} probes={} distance={} verified={} verdict={}",
            quoted(&spec.text),
            cfg.depth,
            chain.total_probes(),
            last.distance,
            u8::from(report.passed()),
            quoted(&report.summary)
        ),
        sentence: format!("{} (final distance {} = 2^-{})", report.summary, last.distance, cfg.depth),
        records,
        ok: report.passed(),
    }
}

pub fn cmd_checks(cfg: &RunConfig) -> Report {
    let suite = cfg.suite.expect("validated");
    let outcomes = run_suite(suite, cfg.seed, cfg.depth, cfg.count);
    let failed = outcomes.iter().filter(|o| !o.check.passed()).count();
    Report {
        records: outcomes.iter().map(|o| o.to_record()).collect(),
        summary: format!(
            "summary command=checks suite={suite} seed={} depth={} count={} properties={} failed={failed} status={}",
            cfg.seed,
            cfg.depth,
            cfg.count,
            outcomes.len(),
            if failed == 0 { "pass" } else { "fail" }
        ),
        sentence: format!("{} of {} properties of {suite} passed", outcomes.len() - failed, outcomes.len()),
        ok: failed == 0,
    }
}

pub fn cmd_codes(cfg: &RunConfig) -> Report {
    let code = code_build(cfg.depth);
    let ok = code.is_prefix_free() && code.kraft_sum() == crate::Dyadic::one();
    Report {
        records: code.to_records(),
        summary: format!(
            "summary command=codes level={} words={} prefix_free={} kraft={}",
            cfg.depth,
            code.words.len(),
            u8::from(code.is_prefix_free()),
            code.kraft_sum()
        ),
        sentence: format!("level {} code: {} words, Kraft sum {}", cfg.depth, code.words.len(), code.kraft_sum()),
        ok,
    }
}

pub fn cmd_descriptor(cfg: &RunConfig) -> Report {
    let d = CmDescriptor::new(cfg.depth);
    let records = d.to_records();
    Report {
        summary: format!("summary command=descriptor m={} records={}", cfg.depth, records.len()),
        sentence: format!(
            "C_{} reads x(0..={}) and {} probes of h",
            cfg.depth,
            d.max_x_coord(),
            (cfg.depth + 1).pow(3) + cfg.depth + 1
        ),
        records,
        ok: true,
    }
}

pub fn cmd_gtable(cfg: &RunConfig) -> Report {
    let x = cfg.point.as_ref().expect("validated");
    let table = g_apply(x).restrict(cfg.depth);
    Report {
        records: table.to_records(),
        summary: format!("summary command=gtable x={} depth={}", quoted(x), cfg.depth),
        sentence: format!("g({x}) on k, a, b <= {}", cfg.depth),
        ok: true,
    }
}

/// Process entry: parses flags, runs, writes output and returns the exit
/// status (0 pass, 1 check failure or claim violation, 2 usage error).
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match RunConfig::from_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let report = run(&cfg);
    let (body, tail) = report.render(cfg.format);
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &body),
        None => std::io::stdout().write_all(body.as_bytes()),
    };
    match written.and_then(|_| std::io::stdout().write_all(tail.as_bytes())) {
        // a closed pipe downstream is the reader's choice
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            eprintln!("error: {e}");
            return 2;
        }
        _ => {}
    }
    if report.ok {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(argv: &[&str]) -> Result<RunConfig, UsageError> {
        let mut full = vec!["qcbkit"];
        full.extend_from_slice(argv);
        RunConfig::from_args(&Args::try_parse_from(full).unwrap())
    }

    #[test]
    fn defaults_and_limits() {
        let c = cfg(&["--command", "roundtrip"]).unwrap();
        assert_eq!((c.depth, c.count, c.seed), (40, 100, 1));
        assert_eq!(cfg(&["--command", "adversary", "--K", "7"]).unwrap().depth, 7);
        assert!(matches!(cfg(&["--command", "adversary", "--depth", "65"]), Err(UsageError::TooDeep { .. })));
        assert!(cfg(&["--command", "adversary", "--depth", "80", "--max-depth", "80"]).is_ok());
        assert!(matches!(cfg(&["--command", "checks"]), Err(UsageError::MissingSuite)));
        assert!(matches!(cfg(&["--command", "checks", "--suite", "lemma2"]), Err(UsageError::Suite(_))));
        assert!(matches!(cfg(&["--command", "gtable"]), Err(UsageError::MissingPoint)));
        assert!(matches!(cfg(&["--command", "adversary", "--oracle", "cube"]), Err(UsageError::Oracle(_))));
    }

    #[test]
    fn roundtrip_reports() {
        let r = run(&cfg(&["--command", "roundtrip", "--count", "5", "--depth", "20"]).unwrap());
        assert!(r.ok);
        assert_eq!(r.records.len(), 5);
        assert!(r.summary.contains("em_exact=5 full_exact=5"));
        let empty = run(&cfg(&["--command", "roundtrip", "--count", "0"]).unwrap());
        assert!(empty.ok && empty.records.is_empty());
        let bad = run(&cfg(&["--command", "roundtrip", "--count", "5", "--depth", "20", "--inject-fault"]).unwrap());
        assert!(!bad.ok);
        assert!(bad.records.iter().any(|l| l.contains("em=fail") && l.contains("em_image=")));
    }

    #[test]
    fn adversary_reports() {
        let r = run(&cfg(&["--command", "adversary", "--K", "3"]).unwrap());
        assert!(r.ok);
        assert_eq!(r.records[3], "k=3 a_k=1/2^3 x=\"[1:1/2^1, 2:1/2^2, 3:1/2^3]\" y=\"[1:1/2^1, 2:1/2^2, 3:1/2^2]\" member_x=1 member_y=0 distance=1/2^3");
        assert!(r.sentence.starts_with("V has no clopen margin at resolution 2^-3"));
        let all = run(&cfg(&["--command", "adversary", "--oracle", "all"]).unwrap());
        assert!(!all.ok && all.summary.contains("verdict=not-a-separator"));
    }

    #[test]
    fn small_commands() {
        let r = run(&cfg(&["--command", "codes", "--depth", "1"]).unwrap());
        assert!(r.ok && r.summary.ends_with("kraft=1/2^0"));
        let r = run(&cfg(&["--command", "descriptor", "--depth", "1"]).unwrap());
        assert_eq!(r.records.len(), 1 + 3 + 2 + 8);
        let r = run(&cfg(&["--command", "gtable", "--point", "[0:1]", "--depth", "1"]).unwrap());
        assert!(r.records.contains(&"k=1 a=0 b=0 h=1".to_string()), "{:?}", r.records);
        let r = run(&cfg(&["--command", "checks", "--suite", "metric", "--count", "10", "--depth", "6"]).unwrap());
        assert!(r.ok, "{:?}", r.records);
    }
}
