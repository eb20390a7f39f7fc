//! The `evtforge` command line.
//!
//! Exit codes: 0 success (refinement holds), 1 parse error, 2 semantic error (including a
//! refused enumeration), 3 a refinement fails.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evtforge_core::evt::evt_pushout;
use evtforge_core::refine::check_decl;
use evtforge_core::spec::{parse_spec_expr, print_def, renaming_morphism, PrintOptions, SpecExpr};
use evtforge_core::translate::TranslateOptions;
use evtforge_core::{Bounds, EvtMorphism};
use serde_json::json;

use crate::load::{load, resolve_name, Failure, InputFormat, Stage, Workspace};
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_SEMANTIC: i32 = 2;
pub const EXIT_REFUTED: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    /// Specification notation and plain reports.
    #[default]
    Text,
    /// Machine-readable JSON.
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "evtforge", version, about = "Event-B to structured specifications, model enumeration and refinement checking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t)]
    pub format: OutputFormat,
    /// How to read non-`.spec` inputs.
    #[arg(long, global = true, value_enum, default_value_t)]
    pub input_format: InputFormat,
    /// Integers range over -B..=B.
    #[arg(long, global = true, env = "EVTFORGE_BOUND", default_value_t = 3, value_parser = clap::value_parser!(i64).range(1..))]
    pub bound: i64,
    /// Carrier size of a user sort, `SORT=N` (repeatable).
    #[arg(long = "carrier", global = true, value_parser = parse_kv)]
    pub carriers: Vec<(String, i64)>,
    /// Fix a constant, `NAME=V` (repeatable; booleans 0/1, elements by index).
    #[arg(long = "pin", global = true, value_parser = parse_kv)]
    pub pins: Vec<(String, i64)>,
    /// Largest number of algebras or solutions per event.
    #[arg(long, global = true, default_value_t = 1 << 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub ceiling: u64,
    /// Keep imports of refined events that keep their name.
    #[arg(long, global = true)]
    pub no_elide: bool,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Translate Event-B machines and contexts into specifications.
    Translate {
        /// Event-B files or Rodin project directories.
        inputs: Vec<PathBuf>,
        /// Print imports that are normally shown by their name alone.
        #[arg(long)]
        explicit: bool,
    },
    /// Enumerate the admissible algebras and maximal models of a specification.
    Models {
        /// Specification (or component) name.
        name: String,
        /// Input files (`.spec` files are read after the Event-B ones).
        #[arg(short, long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Restrict the report to one event (or `Init`).
        #[arg(long)]
        event: Option<String>,
        /// List states and pairs, not just their counts.
        #[arg(long)]
        list: bool,
    },
    /// Check refinement declarations.
    Refine {
        /// Declarations to check; all of them when empty.
        names: Vec<String>,
        /// Input files holding the specifications and the declarations.
        #[arg(short, long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
    },
    /// Pushout of two morphisms with a common source, each given as `SPEC with {…}`.
    Pushout {
        /// File holding the left morphism.
        left: PathBuf,
        /// File holding the right morphism.
        right: PathBuf,
        /// Input files defining the specifications the morphisms mention.
        #[arg(short, long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
    },
}

fn parse_kv(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v = match v.trim() {
        "TRUE" | "true" => 1,
        "FALSE" | "false" => 0,
        x => x.parse().map_err(|e| format!("`{x}`: {e}"))?,
    };
    Ok((k.trim().to_string(), v))
}

impl Common {
    pub fn bounds(&self) -> Result<Bounds, Failure> {
        let mut b = Bounds::with_bound(self.bound);
        b.ceiling = self.ceiling;
        for (s, n) in &self.carriers {
            let n = u32::try_from(*n).ok().filter(|n| *n >= 1).ok_or_else(|| Failure::semantic(format!("carrier {s} must have at least one element")))?;
            b.carriers.insert(s.clone(), n);
        }
        for (k, v) in &self.pins {
            b.pins.insert(k.clone(), *v);
        }
        Ok(b)
    }

    fn load(&self, inputs: &[PathBuf]) -> Result<Workspace, Failure> {
        load(inputs, self.input_format, TranslateOptions { no_elide: self.no_elide })
    }
}

/// What a command produced: its output text and exit code.
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn sem<E: std::fmt::Display>(e: E) -> Failure {
    Failure::semantic(e)
}

fn translate(c: &Common, inputs: &[PathBuf], explicit: bool) -> Result<(String, i32), Failure> {
    let ws = c.load(inputs)?;
    if ws.eventb.components.is_empty() {
        return Err(Failure::parse("no machine or context in the input"));
    }
    let opts = PrintOptions { explicit };
    let mut text = String::new();
    let mut items = Vec::new();
    for n in &ws.translated {
        let e = ws.lib.get(n).map_err(sem)?;
        let def = print_def(n, e, opts);
        if !text.is_empty() {
            text.push('\n');
        }
        text.push_str(&def);
        items.push(json!({ "name": n, "text": def, "signature": report::signature_json(ws.lib.sig(n).map_err(sem)?) }));
    }
    let warnings = ws.env.as_ref().map(|e| e.warnings.clone()).unwrap_or_default();
    Ok(match c.format {
        OutputFormat::Text => (text, EXIT_OK),
        OutputFormat::Json => (json!({ "specs": items, "warnings": warnings }).to_string() + "\n", EXIT_OK),
    })
}

fn models(c: &Common, name: &str, inputs: &[PathBuf], event: Option<String>, list: bool) -> Result<(String, i32), Failure> {
    let ws = c.load(inputs)?;
    let name = resolve_name(&ws.lib, name)?;
    let sig = ws.lib.sig(&name).map_err(sem)?;
    if let Some(e) = &event {
        if !sig.events.contains_key(e) {
            return Err(Failure::semantic(format!("{name} has no event `{e}`")));
        }
    }
    let class = ws.lib.mod_of_name(&name, &c.bounds()?).map_err(sem)?;
    let view = report::ModelsView { event, list };
    Ok(match c.format {
        OutputFormat::Text => (report::models_text(&name, &class, &view), EXIT_OK),
        OutputFormat::Json => (report::models_json(&name, &class, &view).to_string() + "\n", EXIT_OK),
    })
}

fn refine(c: &Common, names: &[String], inputs: &[PathBuf]) -> Result<(String, i32), Failure> {
    let ws = c.load(inputs)?;
    let bounds = c.bounds()?;
    let decls: Vec<_> = if names.is_empty() {
        ws.refinements.iter().collect()
    } else {
        names
            .iter()
            .map(|n| ws.refinements.iter().find(|d| &d.name == n).ok_or_else(|| Failure::semantic(format!("no refinement named `{n}`"))))
            .collect::<Result<_, _>>()?
    };
    if decls.is_empty() {
        return Err(Failure::semantic("no refinement declarations in the input"));
    }
    let mut code = EXIT_OK;
    let mut text = String::new();
    let mut items = Vec::new();
    for d in decls {
        let v = check_decl(&ws.lib, d, &bounds).map_err(sem)?;
        if !v.holds {
            code = EXIT_REFUTED;
        }
        text.push_str(&format!("{d}\n"));
        for line in v.to_string().lines() {
            text.push_str(&format!("  {line}\n"));
        }
        items.push(report::verdict_json(&d.name, &v));
    }
    Ok(match c.format {
        OutputFormat::Text => (text, code),
        OutputFormat::Json => (json!(items).to_string() + "\n", code),
    })
}

fn morphism_from(ws: &Workspace, path: &PathBuf) -> Result<EvtMorphism, Failure> {
    let src = fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let e = parse_spec_expr(&src, &ws.lib).map_err(|e| {
        let msg = format!("{}: {e}", path.display());
        if e.is_parse() {
            Failure::parse(msg)
        } else {
            Failure::semantic(msg)
        }
    })?;
    match &e {
        SpecExpr::Translate(child, r) => renaming_morphism(&ws.lib.sig_of(child).map_err(sem)?, r).map_err(sem),
        SpecExpr::Named(_) => Ok(EvtMorphism::identity(&ws.lib.sig_of(&e).map_err(sem)?)),
        _ => Err(Failure::semantic(format!("{}: expected `SPEC` or `SPEC with {{…}}`", path.display()))),
    }
}

fn pushout(c: &Common, left: &PathBuf, right: &PathBuf, inputs: &[PathBuf]) -> Result<(String, i32), Failure> {
    let ws = c.load(inputs)?;
    let (l, r) = (morphism_from(&ws, left)?, morphism_from(&ws, right)?);
    let p = evt_pushout(&l, &r).map_err(sem)?;
    Ok(match c.format {
        OutputFormat::Text => (report::pushout_text(&p), EXIT_OK),
        OutputFormat::Json => (report::pushout_json(&p).to_string() + "\n", EXIT_OK),
    })
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Outcome {
    let c = &cli.common;
    let res = match &cli.command {
        Command::Translate { inputs, explicit } => translate(c, inputs, *explicit),
        Command::Models { name, inputs, event, list } => models(c, name, inputs, event.clone(), *list),
        Command::Refine { names, inputs } => refine(c, names, inputs),
        Command::Pushout { left, right, inputs } => pushout(c, left, right, inputs),
    };
    let (stdout, code, stderr) = match res {
        Ok((s, code)) => (s, code, String::new()),
        Err(f) => {
            let code = if f.stage == Stage::Parse { EXIT_PARSE } else { EXIT_SEMANTIC };
            (String::new(), code, format!("error: {f}\n"))
        }
    };
    if let (Some(path), true) = (&c.out, code == EXIT_OK || code == EXIT_REFUTED) {
        if let Err(e) = fs::write(path, &stdout) {
            return Outcome { code: EXIT_SEMANTIC, stdout: String::new(), stderr: format!("error: {}: {e}\n", path.display()) };
        }
        return Outcome { code, stdout: String::new(), stderr };
    }
    Outcome { code, stdout, stderr }
}

/// Parses `args` (including the program name) and runs them. Usage errors exit with 2.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SEMANTIC } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            }
        }
    }
}

/// Entry point used by the binary.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let o = run(args);
    let _ = std::io::stdout().write_all(o.stdout.as_bytes());
    let _ = std::io::stderr().write_all(o.stderr.as_bytes());
    o.code
}
