//! Reading input files into a specification library.
//!
//! Event-B components (text `.eb`, Rodin `.bum`/`.buc`, or whole Rodin project
//! directories) are joined, ordered so that every component follows what it uses,
//! validated and translated. Files ending in `.spec` are then read in the given order as
//! specification text over the translated library.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use evtforge_core::eventb::{build_env, read_text, Component, EbSpecification, Environment};
use evtforge_core::spec::{parse_library, Library, RefinementDecl, SpecError};
use evtforge_core::translate::{translate_spec, TranslateOptions};

use crate::rodin;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    /// Plain-text machines and contexts (any file that is not `.spec`).
    #[default]
    Text,
    /// Rodin XML, whatever the file extension.
    Rodin,
}

/// Which stage rejected the input; decides the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Parse,
    Semantic,
}

#[derive(Debug)]
pub struct Failure {
    pub stage: Stage,
    pub message: String,
}

impl Failure {
    pub fn parse(m: impl fmt::Display) -> Self {
        Failure { stage: Stage::Parse, message: m.to_string() }
    }

    pub fn semantic(m: impl fmt::Display) -> Self {
        Failure { stage: Stage::Semantic, message: m.to_string() }
    }

    fn from_spec(path: &Path, e: SpecError) -> Self {
        let msg = format!("{}: {e}", path.display());
        if e.is_parse() {
            Failure::parse(msg)
        } else {
            Failure::semantic(msg)
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

/// Everything read from the inputs.
#[derive(Default)]
pub struct Workspace {
    pub eventb: EbSpecification,
    pub env: Option<Environment>,
    /// Specification names translated from Event-B components, in order.
    pub translated: Vec<String>,
    pub lib: Library,
    pub refinements: Vec<RefinementDecl>,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn is_spec(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "spec")
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn read_components(path: &Path, format: InputFormat, out: &mut Vec<Component>) -> Result<(), Failure> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| rodin::is_rodin_file(p))
            .collect();
        files.sort();
        for f in files {
            read_components(&f, InputFormat::Rodin, out)?;
        }
        return Ok(());
    }
    let src = read(path)?;
    if format == InputFormat::Rodin || rodin::is_rodin_file(path) {
        let c = rodin::parse_component(&stem(path), &src).map_err(|e| Failure::parse(format!("{}: {e:#}", path.display())))?;
        out.push(c);
    } else {
        let spec = read_text(&src).map_err(|e| {
            let msg = format!("{}: {e}", path.display());
            if matches!(e, evtforge_core::eventb::EventbError::Syntax(_)) {
                Failure::parse(msg)
            } else {
                Failure::semantic(msg)
            }
        })?;
        out.extend(spec.components);
    }
    Ok(())
}

fn uses(c: &Component) -> Vec<&String> {
    match c {
        Component::Context(x) => x.extends.iter().collect(),
        Component::Machine(m) => m.refines.iter().chain(&m.sees).collect(),
    }
}

/// Stable dependency order: a component is placed once everything it names that is
/// present has been placed. Cycles keep their input order (validation reports them).
fn order(mut pending: Vec<Component>) -> Vec<Component> {
    let mut out: Vec<Component> = Vec::new();
    while !pending.is_empty() {
        let names: Vec<String> = pending.iter().map(|c| c.name().to_string()).collect();
        let pos = pending.iter().position(|c| uses(c).iter().all(|u| !names.contains(u) || out.iter().any(|o| o.name() == u.as_str())));
        let i = pos.unwrap_or(0);
        out.push(pending.remove(i));
    }
    out
}

/// Reads, orders, validates and translates the inputs.
pub fn load(paths: &[PathBuf], format: InputFormat, opts: TranslateOptions) -> Result<Workspace, Failure> {
    let mut comps = Vec::new();
    let mut specs = Vec::new();
    for p in paths {
        if is_spec(p) {
            specs.push(p.clone());
        } else {
            read_components(p, format, &mut comps)?;
        }
    }
    let mut ws = Workspace { eventb: EbSpecification { components: order(comps) }, ..Default::default() };
    if !ws.eventb.components.is_empty() {
        ws.eventb.validate().map_err(Failure::semantic)?;
        let env = build_env(&ws.eventb).map_err(Failure::semantic)?;
        ws.translated = translate_spec(&ws.eventb, &env, &mut ws.lib, opts).map_err(Failure::semantic)?;
        ws.env = Some(env);
    }
    for p in specs {
        let src = read(&p)?;
        let decls = parse_library(&src, &mut ws.lib).map_err(|e| Failure::from_spec(&p, e))?;
        ws.refinements.extend(decls);
    }
    Ok(ws)
}

/// Looks a specification up by name, falling back to the upper-cased component name.
pub fn resolve_name(lib: &Library, name: &str) -> Result<String, Failure> {
    for n in [name.to_string(), name.to_uppercase()] {
        if lib.get(&n).is_ok() {
            return Ok(n);
        }
    }
    Err(Failure::semantic(format!("no specification named `{name}`")))
}
