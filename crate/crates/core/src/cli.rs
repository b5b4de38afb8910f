//! Command-line front end.
//!
//! Inputs are positional arguments (a path when the file exists, otherwise
//! the argument itself is parsed as a term) followed by any `-e` expressions.
//! Exit codes: 0 ok or true, 1 false or unequal, 2 parse or usage error,
//! 3 semantic error.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::finance::{implicit_capital, is_pure_in, profits_from, synthesize_pure_credit};
use crate::meadow::Rational;
use crate::model::{eval_model, eval_model_in, TimedTuplix};
use crate::rewrite::{
    check_equal_random_tuplix, normalize, reify, substitute, Assignment, CanonicalTuplix, Verdict,
};
use crate::syntax::{parse_tuplix, Action, ActionUniverse, Tuplix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_SEMANTIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "ttc", version, about = "Timed tuplix calculus toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reprint a term in canonical concrete syntax.
    Fmt(Common),
    /// Normalize a term to guard-plus-slices form.
    Normalize(Common),
    /// Evaluate a closed term to its timeline.
    Eval(Common),
    /// Compare two terms in the model.
    Equal(Common),
    /// Implicit capital of a closed term.
    Icap(Common),
    /// Check the purity equation for a closed term.
    Pure(Common),
    /// Does a behaviour (second input) profit from a product (first input)?
    Profit(Common),
    /// Synthesize a credit product that finances a behaviour.
    Synth(Synth),
}

#[derive(Args, Debug)]
struct Common {
    /// Term files or inline terms.
    inputs: Vec<String>,
    /// Inline term, after any positional inputs.
    #[arg(short = 'e', long = "expr", value_name = "EXPR")]
    exprs: Vec<String>,
    /// `NAME=RAT` binds a variable; a bare `RAT` sets the analysis rate.
    #[arg(long = "rate", value_name = "NAME=RAT|RAT", allow_hyphen_values = true)]
    rates: Vec<String>,
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Extra actions for the action universe.
    #[arg(long, value_delimiter = ',')]
    actions: Vec<String>,
}

#[derive(Args, Debug)]
struct Synth {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "loan")]
    borrow: String,
    #[arg(long, default_value = "repay")]
    repay: String,
}

/// Outcome of a command: exit code plus what goes to stdout and stderr.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn with_code(code: i32, stdout: String) -> Self {
        Output {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(code: i32, msg: impl std::fmt::Display) -> Self {
        Output {
            code,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

struct Config {
    terms: Vec<Tuplix>,
    env: Assignment,
    rate: Option<Rational>,
    json: bool,
    seed: u64,
    trials: usize,
    extra_actions: Vec<Action>,
}

impl Config {
    fn rate(&self) -> Result<&Rational, Output> {
        self.rate
            .as_ref()
            .ok_or_else(|| Output::error(EXIT_SEMANTIC, "this command needs --rate"))
    }

    fn exactly(&self, n: usize) -> Result<Vec<Tuplix>, Output> {
        if self.terms.len() != n {
            return Err(Output::error(
                EXIT_PARSE,
                format!("expected {n} input term(s), got {}", self.terms.len()),
            ));
        }
        Ok(self
            .terms
            .iter()
            .map(|t| substitute(t, &self.env))
            .collect())
    }

    /// The inputs with bindings substituted; they must come out closed.
    fn closed(&self, n: usize) -> Result<Vec<Tuplix>, Output> {
        let terms = self.exactly(n)?;
        for t in &terms {
            if let Some(v) = t.free_vars().into_iter().next() {
                return Err(Output::error(
                    EXIT_SEMANTIC,
                    format!("unbound quantity variable `{v}`"),
                ));
            }
        }
        Ok(terms)
    }
}

fn read_input(arg: &str) -> Result<String, Output> {
    if Path::new(arg).is_file() {
        std::fs::read_to_string(arg)
            .map_err(|e| Output::error(EXIT_SEMANTIC, format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn configure(c: &Common) -> Result<Config, Output> {
    let mut terms = Vec::new();
    for src in c
        .inputs
        .iter()
        .map(|a| read_input(a))
        .collect::<Result<Vec<_>, _>>()?
        .iter()
        .chain(&c.exprs)
    {
        terms.push(parse_tuplix(src).map_err(|e| Output::error(EXIT_PARSE, e))?);
    }
    let mut env = Assignment::new();
    let mut bare = None;
    let mut first_binding = None;
    for spec in &c.rates {
        let (name, value) = match spec.split_once('=') {
            Some((n, v)) => (Some(n.trim()), v.trim()),
            None => (None, spec.trim()),
        };
        let value: Rational = value
            .parse()
            .map_err(|_| Output::error(EXIT_PARSE, format!("bad rate `{spec}`")))?;
        match name {
            Some(n) => {
                if n.is_empty() {
                    return Err(Output::error(EXIT_PARSE, format!("bad rate `{spec}`")));
                }
                first_binding.get_or_insert_with(|| value.clone());
                env.insert(n, value);
            }
            None => bare = Some(value),
        }
    }
    let extra_actions = c
        .actions
        .iter()
        .map(|a| {
            Action::try_new(a.trim())
                .ok_or_else(|| Output::error(EXIT_PARSE, format!("bad action name `{a}`")))
        })
        .collect::<Result<_, _>>()?;
    Ok(Config {
        terms,
        env,
        rate: bare.or(first_binding),
        json: c.json,
        seed: c.seed,
        trials: c.trials,
        extra_actions,
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output {
                    code: EXIT_PARSE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Output::ok(text)
            };
        }
    };
    let result = match &cli.command {
        Command::Fmt(c) => configure(c).and_then(|cfg| cmd_fmt(&cfg)),
        Command::Normalize(c) => configure(c).and_then(|cfg| cmd_normalize(&cfg)),
        Command::Eval(c) => configure(c).and_then(|cfg| cmd_eval(&cfg)),
        Command::Equal(c) => configure(c).and_then(|cfg| cmd_equal(&cfg)),
        Command::Icap(c) => configure(c).and_then(|cfg| cmd_icap(&cfg)),
        Command::Pure(c) => configure(c).and_then(|cfg| cmd_pure(&cfg)),
        Command::Profit(c) => configure(c).and_then(|cfg| cmd_profit(&cfg)),
        Command::Synth(s) => {
            configure(&s.common).and_then(|cfg| cmd_synth(&cfg, &s.borrow, &s.repay))
        }
    };
    result.unwrap_or_else(|e| e)
}

/// Entry point for the binary: runs and writes to the process streams.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let out = run(args);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    out.code
}

fn line(s: impl std::fmt::Display) -> String {
    format!("{s}\n")
}

fn json_line(v: &impl Serialize) -> String {
    line(serde_json::to_string_pretty(v).expect("serializable"))
}

fn cmd_fmt(cfg: &Config) -> Result<Output, Output> {
    let t = cfg.exactly(1)?.remove(0);
    Ok(Output::ok(line(t)))
}

#[derive(Serialize)]
struct CanonicalWire {
    blocked: bool,
    guard: String,
    conjuncts: Vec<String>,
    side_conditions: Vec<String>,
    slices: Vec<std::collections::BTreeMap<String, String>>,
    term: String,
}

impl From<&CanonicalTuplix> for CanonicalWire {
    fn from(c: &CanonicalTuplix) -> Self {
        CanonicalWire {
            blocked: c.is_blocked(),
            guard: c.guard().to_string(),
            conjuncts: c.conjuncts().iter().map(ToString::to_string).collect(),
            side_conditions: c
                .side_conditions()
                .iter()
                .map(ToString::to_string)
                .collect(),
            slices: c
                .slices()
                .iter()
                .map(|s| {
                    s.iter()
                        .map(|(a, q)| (a.to_string(), q.to_string()))
                        .collect()
                })
                .collect(),
            term: reify(c).to_string(),
        }
    }
}

fn cmd_normalize(cfg: &Config) -> Result<Output, Output> {
    let t = cfg.exactly(1)?.remove(0);
    let c = normalize(&t).map_err(|e| Output::error(EXIT_SEMANTIC, e))?;
    if cfg.json {
        return Ok(Output::ok(json_line(&CanonicalWire::from(&c))));
    }
    Ok(Output::ok(line(reify(&c))))
}

/// Rows are slices, columns are the actions in use.
pub fn render_timeline(m: &TimedTuplix) -> String {
    let Some(slices) = m.slices() else {
        return line("BLOCKED");
    };
    if slices.is_empty() {
        return line("eps");
    }
    let actions: Vec<Action> = m.actions().into_iter().collect();
    let mut rows: Vec<Vec<String>> = vec![std::iter::once("slice".to_string())
        .chain(actions.iter().map(ToString::to_string))
        .collect()];
    for (i, f) in slices.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(
            actions
                .iter()
                .map(|a| f.get(a).map(ToString::to_string).unwrap_or_default()),
        );
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

fn cmd_eval(cfg: &Config) -> Result<Output, Output> {
    let t = cfg.exactly(1)?.remove(0);
    let m = eval_model_in(&t, &Assignment::new()).map_err(|e| Output::error(EXIT_SEMANTIC, e))?;
    if cfg.json {
        return Ok(Output::ok(json_line(&m)));
    }
    Ok(Output::ok(render_timeline(&m)))
}

fn cmd_equal(cfg: &Config) -> Result<Output, Output> {
    let terms = cfg.exactly(2)?;
    let (t1, t2) = (&terms[0], &terms[1]);
    let open: BTreeSet<String> = t1.free_vars().into_iter().chain(t2.free_vars()).collect();
    let verdict = if open.is_empty() {
        let eq = eval_model(t1).ok() == eval_model(t2).ok();
        if eq {
            Verdict::ProbablyEqual { trials: 0 }
        } else {
            Verdict::Unequal {
                witness: Assignment::new(),
            }
        }
    } else {
        check_equal_random_tuplix(t1, t2, cfg.trials, cfg.seed)
    };
    let (code, text, value) = match &verdict {
        Verdict::ProbablyEqual { trials: 0 } => {
            (EXIT_OK, "equal".to_string(), json!({"equal": true}))
        }
        Verdict::ProbablyEqual { trials } => (
            EXIT_OK,
            format!("probably equal ({trials} trials)"),
            json!({"equal": true, "trials": trials}),
        ),
        Verdict::Unequal { witness } if witness.is_empty() => {
            (EXIT_FALSE, "unequal".to_string(), json!({"equal": false}))
        }
        Verdict::Unequal { witness } => (
            EXIT_FALSE,
            format!("unequal at {witness}"),
            json!({"equal": false, "witness": witness}),
        ),
    };
    let stdout = if cfg.json {
        json_line(&value)
    } else {
        line(text)
    };
    Ok(Output::with_code(code, stdout))
}

fn cmd_icap(cfg: &Config) -> Result<Output, Output> {
    let t = cfg.closed(1)?.remove(0);
    let rate = cfg.rate()?;
    let c = implicit_capital(&t, rate).map_err(|e| Output::error(EXIT_SEMANTIC, e))?;
    if cfg.json {
        return Ok(Output::ok(json_line(&json!({"rate": rate, "icap": c}))));
    }
    Ok(Output::ok(line(c)))
}

fn cmd_pure(cfg: &Config) -> Result<Output, Output> {
    let t = cfg.closed(1)?.remove(0);
    let rate = cfg.rate()?;
    let universe = ActionUniverse::new(cfg.extra_actions.iter().cloned());
    let report = is_pure_in(&t, rate, &universe).map_err(|e| Output::error(EXIT_SEMANTIC, e))?;
    let code = if report.pure { EXIT_OK } else { EXIT_FALSE };
    let stdout = if cfg.json {
        json_line(&report)
    } else {
        let mut s = format!("pure: {}\nresidual: {}\n", report.pure, report.residual);
        if report.blocked {
            s.push_str("blocked: true\n");
        }
        s
    };
    Ok(Output::with_code(code, stdout))
}

fn cmd_profit(cfg: &Config) -> Result<Output, Output> {
    let terms = cfg.closed(2)?;
    let rate = cfg.rate()?;
    let report =
        profits_from(&terms[0], &terms[1], rate).map_err(|e| Output::error(EXIT_SEMANTIC, e))?;
    let code = if report.profits { EXIT_OK } else { EXIT_FALSE };
    let stdout = if cfg.json {
        json_line(&report)
    } else {
        format!(
            "icap behaviour: {}\nicap combined: {}\nprofits: {}\n",
            report.icap_behaviour, report.icap_combined, report.profits
        )
    };
    Ok(Output::with_code(code, stdout))
}

fn cmd_synth(cfg: &Config, borrow: &str, repay: &str) -> Result<Output, Output> {
    let t = cfg.closed(1)?.remove(0);
    let rate = cfg.rate()?;
    let action = |name: &str| {
        Action::try_new(name)
            .ok_or_else(|| Output::error(EXIT_PARSE, format!("bad action name `{name}`")))
    };
    let product = synthesize_pure_credit(&t, rate, &action(borrow)?, &action(repay)?)
        .map_err(|e| Output::error(EXIT_SEMANTIC, e))?;
    if cfg.json {
        return Ok(Output::ok(json_line(
            &json!({"rate": rate, "product": product.to_string()}),
        )));
    }
    Ok(Output::ok(line(product)))
}
