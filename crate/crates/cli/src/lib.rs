//! The `hurwitz` command line.
//!
//! Exit codes: 0 success, 1 mathematical negative (not realizable,
//! exceptional, `false`), 2 usage or input error, 3 budget exceeded or a
//! classifier/oracle mismatch.

use std::fs;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hurwitz_core::census::{self, CensusQuery};
use hurwitz_core::classifier::{classify, Verdict, VerdictReport};
use hurwitz_core::datum::{parse_datum, BranchDatum};
use hurwitz_core::dessin::{realizable_via_dessins, Dessin};
use hurwitz_core::moves::{self, Move};
use hurwitz_core::oracle::{self, Answer, MonodromyWitness, Realization, SearchBudget};
use hurwitz_core::perm::Permutation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "hurwitz", version, about = "Realizability of branch data for branched covers of surfaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Search nodes per oracle run, 0 for no limit
    #[arg(long, global = true, env = "HURWITZ_BUDGET_NODES", default_value_t = SearchBudget::DEFAULT_NODES)]
    pub budget_nodes: u64,
    /// Wall-clock seconds per oracle run, 0 for no limit
    #[arg(long, global = true, env = "HURWITZ_BUDGET_SECONDS", default_value_t = SearchBudget::DEFAULT_SECONDS)]
    pub budget_seconds: u64,
    /// Worker threads; never changes the output
    #[arg(long, global = true, env = "HURWITZ_JOBS", default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

impl Global {
    pub fn budget(&self) -> SearchBudget {
        SearchBudget {
            max_nodes: (self.budget_nodes > 0).then_some(self.budget_nodes),
            max_time: (self.budget_seconds > 0).then(|| Duration::from_secs(self.budget_seconds)),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify data, e.g. `check "g1/S d=6 3,3 3,3 4,2"`; reads stdin when no datum is given
    Check {
        data: Vec<String>,
        /// Report undecided data as unknown instead of running the oracle
        #[arg(long)]
        no_oracle: bool,
    },
    /// Search for a monodromy witness
    Realize { data: Vec<String> },
    /// List the exceptional data for one degree and number of branch points
    Census {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: usize,
        /// Only data with a partition of length 2
        #[arg(long)]
        len2: bool,
        /// Only data with this cover genus
        #[arg(long)]
        genus: Option<u32>,
        /// Write the census file here (and a JSON summary next to it) instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the classifier with the oracle on every datum with a length-2 partition
    Crosscheck {
        #[arg(long, default_value_t = 2)]
        dmin: u32,
        #[arg(long)]
        dmax: u32,
        #[arg(long)]
        n: usize,
    },
    /// Apply a reduction move, e.g. `move T2 i=1 j=2 x=6 x1=2 "<datum>"`
    Move {
        /// Move descriptor words followed by the datum line
        #[arg(required = true, num_args = 2..)]
        words: Vec<String>,
        /// Run the oracle on target and source
        #[arg(long)]
        verify: bool,
    },
    /// Build a dessin from a witness file, a datum or `E=.. b=.. w=..` text
    Dessin {
        #[arg(long, conflicts_with_all = ["datum", "text"])]
        from_witness: Option<PathBuf>,
        /// Degree of the witness; taken from the largest point when omitted
        #[arg(long, requires = "from_witness")]
        degree: Option<usize>,
        #[arg(long, conflicts_with = "text")]
        datum: Option<String>,
        text: Option<String>,
    },
    /// Check that every datum of the given degree is realizable
    PrimeCheck {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: usize,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let mut ctx = Ctx { global: cli.global, out, err };
    let result = match cli.command {
        Command::Check { data, no_oracle } => ctx.check(data, no_oracle, stdin),
        Command::Realize { data } => ctx.realize(data, stdin),
        Command::Census { d, n, len2, genus, out } => ctx.census(d, n, len2, genus, out),
        Command::Crosscheck { dmin, dmax, n } => ctx.crosscheck(dmin, dmax, n),
        Command::Move { words, verify } => ctx.apply_move(words, verify),
        Command::Dessin { from_witness, degree, datum, text } => ctx.dessin(from_witness, degree, datum, text),
        Command::PrimeCheck { d, n } => ctx.prime_check(d, n),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(ctx.err, "error: {message}");
            EXIT_USAGE
        }
    }
}

struct Ctx<'a> {
    global: Global,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

type CmdResult = Result<i32, String>;

/// Combines per-datum codes: input errors first, then undecided, then negatives.
fn worst(a: i32, b: i32) -> i32 {
    let rank = |c: i32| match c {
        EXIT_USAGE => 3,
        EXIT_INCONCLUSIVE => 2,
        EXIT_NEGATIVE => 1,
        _ => 0,
    };
    if rank(b) > rank(a) {
        b
    } else {
        a
    }
}

fn input_lines(data: Vec<String>, stdin: &mut dyn BufRead) -> Result<Vec<String>, String> {
    if !data.is_empty() {
        return Ok(data);
    }
    let mut lines = Vec::new();
    for line in stdin.lines() {
        let line = line.map_err(|e| e.to_string())?;
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            lines.push(body.to_string());
        }
    }
    Ok(lines)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

#[derive(Serialize)]
struct RealizeReport {
    datum: String,
    result: &'static str,
    witness: Option<Vec<String>>,
    images: Option<Vec<Vec<usize>>>,
}

#[derive(Serialize)]
struct DessinReport {
    dessin: String,
    edges: usize,
    black: String,
    white: String,
    faces: String,
    genus: u32,
    datum: String,
}

#[derive(Serialize)]
struct MoveOutput {
    #[serde(rename = "move")]
    mv: String,
    source: String,
    target: String,
    fragment: Option<Vec<String>>,
    report: Option<moves::MoveReport>,
}

impl Ctx<'_> {
    fn emit(&mut self, line: &str) -> Result<(), String> {
        writeln!(self.out, "{line}").map_err(|e| e.to_string())
    }

    fn parse(&mut self, line: &str) -> Option<BranchDatum> {
        match parse_datum(line) {
            Ok(d) => Some(d),
            Err(e) => {
                let _ = writeln!(self.err, "error: {line:?}: {e}");
                None
            }
        }
    }

    fn check(&mut self, data: Vec<String>, no_oracle: bool, stdin: &mut dyn BufRead) -> CmdResult {
        let budget = self.global.budget();
        let mut code = EXIT_OK;
        for line in input_lines(data, stdin)? {
            let Some(datum) = self.parse(&line) else {
                code = worst(code, EXIT_USAGE);
                continue;
            };
            let verdict = classify(&datum, (!no_oracle).then_some(&budget));
            let report = VerdictReport::new(&datum, &verdict);
            let text = match self.global.format {
                Format::Text => report.to_text(),
                Format::Json => json(&report),
            };
            self.emit(&text)?;
            code = worst(
                code,
                match verdict {
                    Verdict::Realizable(_) => EXIT_OK,
                    Verdict::Exceptional { .. } => EXIT_NEGATIVE,
                    Verdict::Unknown => EXIT_INCONCLUSIVE,
                },
            );
        }
        Ok(code)
    }

    fn realize(&mut self, data: Vec<String>, stdin: &mut dyn BufRead) -> CmdResult {
        let budget = self.global.budget();
        let mut code = EXIT_OK;
        for line in input_lines(data, stdin)? {
            let Some(datum) = self.parse(&line) else {
                code = worst(code, EXIT_USAGE);
                continue;
            };
            let realization = match oracle::realize_parallel(&datum, &budget, self.global.jobs) {
                Ok(r) => r,
                Err(e) => {
                    writeln!(self.err, "error: {line:?}: {e}").map_err(|e| e.to_string())?;
                    code = worst(code, EXIT_USAGE);
                    continue;
                }
            };
            let (result, this_code) = match &realization {
                Realization::Found(_) => ("realizable", EXIT_OK),
                Realization::NotRealizable => ("not-realizable", EXIT_NEGATIVE),
                Realization::BudgetExceeded => ("budget-exceeded", EXIT_INCONCLUSIVE),
            };
            code = worst(code, this_code);
            let witness = match &realization {
                Realization::Found(w) => Some(w),
                _ => None,
            };
            match self.global.format {
                Format::Text => {
                    self.emit(&format!("{}: {result}", datum.to_line()))?;
                    if let Some(w) = witness {
                        for l in w.to_lines() {
                            self.emit(&format!("  {l}"))?;
                        }
                    }
                }
                Format::Json => {
                    let report = RealizeReport {
                        datum: datum.to_line(),
                        result,
                        witness: witness.map(|w| w.theta.iter().map(|t| t.to_string()).collect()),
                        images: witness.map(MonodromyWitness::image_arrays),
                    };
                    self.emit(&json(&report))?;
                }
            }
        }
        Ok(code)
    }

    fn query(&self, d: u32, n: usize) -> Result<CensusQuery, String> {
        if d < 2 || n < 3 {
            return Err("census needs --d >= 2 and --n >= 3".into());
        }
        if d as usize > hurwitz_core::perm::MAX_DEGREE {
            return Err(format!("--d is limited to {}", hurwitz_core::perm::MAX_DEGREE));
        }
        Ok(CensusQuery::new(d, n).budget(self.global.budget()))
    }

    fn census(
        &mut self,
        d: u32,
        n: usize,
        len2: bool,
        genus: Option<u32>,
        out: Option<PathBuf>,
    ) -> CmdResult {
        let mut q = self.query(d, n)?;
        if len2 {
            q = q.length_two();
        }
        if let Some(g) = genus {
            q = q.genus(g);
        }
        let result = census::exceptional_census(&q, self.global.jobs);
        match (&out, self.global.format) {
            (Some(path), _) => {
                fs::write(path, result.to_file()).map_err(|e| format!("{}: {e}", path.display()))?;
                let summary = path.with_extension("json");
                fs::write(&summary, serde_json::to_string_pretty(&result).expect("serializable"))
                    .map_err(|e| format!("{}: {e}", summary.display()))?;
                self.emit(&result.summary())?;
            }
            (None, Format::Text) => write!(self.out, "{}", result.to_file()).map_err(|e| e.to_string())?,
            (None, Format::Json) => self.emit(&json(&result))?,
        }
        for line in &result.unknown {
            writeln!(self.err, "undecided: {line}").map_err(|e| e.to_string())?;
        }
        for m in &result.mismatches {
            writeln!(self.err, "mismatch: {} classifier={} oracle={:?}", m.datum, m.classifier, m.oracle)
                .map_err(|e| e.to_string())?;
        }
        Ok(if result.is_complete() && result.mismatches.is_empty() {
            EXIT_OK
        } else {
            EXIT_INCONCLUSIVE
        })
    }

    fn crosscheck(&mut self, dmin: u32, dmax: u32, n: usize) -> CmdResult {
        let mut all = Vec::new();
        for d in dmin.max(2)..=dmax {
            let q = self.query(d, n)?;
            all.extend(census::crosscheck(&q, self.global.jobs));
        }
        match self.global.format {
            Format::Text => {
                for m in &all {
                    self.emit(&format!("mismatch: {} classifier={} oracle={:?}", m.datum, m.classifier, m.oracle))?;
                }
                self.emit(&format!("crosscheck n={n} d={dmin}..{dmax}: {} mismatches", all.len()))?;
            }
            Format::Json => self.emit(&json(&all))?,
        }
        Ok(if all.is_empty() { EXIT_OK } else { EXIT_INCONCLUSIVE })
    }

    fn apply_move(&mut self, mut words: Vec<String>, verify: bool) -> CmdResult {
        let line = words.pop().expect("clap requires two words");
        let mv: Move = words.join(" ").parse().map_err(|e: moves::MoveError| e.to_string())?;
        let datum = parse_datum(&line).map_err(|e| format!("{line:?}: {e}"))?;
        let app = moves::apply(&datum, &mv).map_err(|e| e.to_string())?;
        let fragment = app
            .fragment
            .as_ref()
            .map(|(a, b)| vec![format!("theta1={a}"), format!("theta2={b}")]);
        let report = verify.then(|| moves::verify_move(&app, &self.global.budget()));
        let code = match &report {
            Some(r) if r.violation() || r.inconclusive() => EXIT_INCONCLUSIVE,
            _ => EXIT_OK,
        };
        match self.global.format {
            Format::Text => {
                self.emit(&app.target.to_line())?;
                for l in fragment.iter().flatten() {
                    self.emit(&format!("  {l}"))?;
                }
                if let Some(r) = &report {
                    self.emit(&format!(
                        "  target-validates={} target={:?} source={}{}",
                        r.target_validates,
                        r.target_answer,
                        r.source_answer.map_or("-".to_string(), |a| format!("{a:?}")),
                        if r.violation() { " VIOLATION" } else { "" }
                    ))?;
                }
            }
            Format::Json => {
                let output = MoveOutput {
                    mv: mv.to_string(),
                    source: datum.to_line(),
                    target: app.target.to_line(),
                    fragment,
                    report,
                };
                self.emit(&json(&output))?;
            }
        }
        Ok(code)
    }

    fn dessin(
        &mut self,
        from_witness: Option<PathBuf>,
        degree: Option<usize>,
        datum: Option<String>,
        text: Option<String>,
    ) -> CmdResult {
        let dessin = if let Some(path) = from_witness {
            let body = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let d = match degree {
                Some(d) => d,
                None => largest_point(&body).ok_or("witness file has no points; pass --degree")?,
            };
            let w = MonodromyWitness::parse_lines(&body, d).map_err(|e| e.to_string())?;
            let mut theta = w.theta.into_iter();
            let black = theta.next().ok_or("witness file is empty")?;
            let white = theta.next().unwrap_or_else(|| Permutation::identity(d));
            Dessin::from_triple(black, white).map_err(|e| e.to_string())?
        } else if let Some(line) = datum {
            let datum = parse_datum(&line).map_err(|e| format!("{line:?}: {e}"))?;
            match realizable_via_dessins(&datum, &self.global.budget()).map_err(|e| e.to_string())? {
                (Answer::Yes, Some(d)) => d,
                (Answer::No, _) => {
                    self.emit(&format!("{}: no dessin", datum.to_line()))?;
                    return Ok(EXIT_NEGATIVE);
                }
                _ => {
                    self.emit(&format!("{}: budget exceeded", datum.to_line()))?;
                    return Ok(EXIT_INCONCLUSIVE);
                }
            }
        } else if let Some(text) = text {
            text.parse::<Dessin>().map_err(|e| e.to_string())?
        } else {
            return Err("give --from-witness, --datum or a dessin in E=.. b=.. w=.. form".into());
        };
        let report = DessinReport {
            dessin: dessin.to_string(),
            edges: dessin.edge_count(),
            black: dessin.black_valences().to_string(),
            white: dessin.white_valences().to_string(),
            faces: dessin.face_lengths().to_string(),
            genus: dessin.genus(),
            datum: dessin.to_datum().map_err(|e| e.to_string())?.to_line(),
        };
        match self.global.format {
            Format::Text => {
                self.emit(&report.dessin)?;
                self.emit(&format!("black valences {}", report.black))?;
                self.emit(&format!("white valences {}", report.white))?;
                self.emit(&format!("face lengths {}", report.faces))?;
                self.emit(&format!("genus {}", report.genus))?;
                self.emit(&format!("datum {}", report.datum))?;
            }
            Format::Json => self.emit(&json(&report))?,
        }
        Ok(EXIT_OK)
    }

    fn prime_check(&mut self, d: u32, n: usize) -> CmdResult {
        let q = self.query(d, n)?;
        let result = census::exceptional_census(&q, self.global.jobs);
        let verdict = result.exceptional.is_empty() && result.unknown.is_empty();
        match self.global.format {
            Format::Text => {
                self.emit(&verdict.to_string())?;
                for line in &result.exceptional {
                    self.emit(&format!("exceptional: {line}"))?;
                }
                for line in &result.unknown {
                    self.emit(&format!("undecided: {line}"))?;
                }
            }
            Format::Json => {
                #[derive(Serialize)]
                struct PrimeReport<'a> {
                    d: u32,
                    n: usize,
                    all_realizable: bool,
                    exceptional: &'a [String],
                    unknown: &'a [String],
                }
                self.emit(&json(&PrimeReport {
                    d,
                    n,
                    all_realizable: verdict,
                    exceptional: &result.exceptional,
                    unknown: &result.unknown,
                }))?;
            }
        }
        Ok(if !result.unknown.is_empty() {
            EXIT_INCONCLUSIVE
        } else if verdict {
            EXIT_OK
        } else {
            EXIT_NEGATIVE
        })
    }
}

fn largest_point(text: &str) -> Option<usize> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| {
            let body = l.split_once('=').map_or(l, |(_, rhs)| rhs);
            body.split(|c: char| !c.is_ascii_digit())
                .filter_map(|t| t.parse::<usize>().ok())
                .collect::<Vec<_>>()
        })
        .max()
}
