//! The `reebslice` command line: manifests in, documents and tables out.
//!
//! | command       | exit codes |
//! |---------------|------------|
//! | `check`       | 0 both slice checks pass, 1 a check fails, 2 manifest or IO error |
//! | `chords`      | 0 (also for an empty list), 1 too many Newton failures or failed slice checks, 2 error |
//! | `collar`      | 0 collarable, 3 scheme obstructed, 4 non-exact, 5 not a slice, 6 inconclusive, 2 IO |
//! | `export-plot` | 0, 2 error |
//! | `catalog`     | 0, 2 unknown entry |

pub mod document;
pub mod manifest;
pub mod plot;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::catalog::{catalog_get, catalog_list, Params};
use crate::chords::{chords_projection, chords_shooting, ChordRecord};
use crate::collar::{chord_action, collar_report, Convention};
use crate::contact::ContactModel;
use crate::error::Error;
use crate::slice::{check_closed, check_transverse, max_manifold_defect, periods, primitive, ParamSlice};

pub use document::{chord_table, fmt9, sig9, to_document};
pub use manifest::{Manifest, ManifestError};
pub use plot::{export_plot, PlotKind, PlotOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "reebslice", version, about = "Lagrangian slices and their Reeb chords")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closedness and transversality checks, plus periods.
    Check {
        manifest: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        /// Write the effective manifest (with overrides applied) here.
        #[arg(long)]
        emit_manifest: Option<PathBuf>,
    },
    /// Reeb chord table as CSV.
    Chords {
        manifest: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Full collarability report.
    Collar {
        manifest: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// SVG and CSV plot data; `-o` is the output prefix.
    ExportPlot {
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "front")]
        what: PlotKind,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Built-in slices.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    Show {
        name: String,
        /// Parameter override as key=value, repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        /// Print a manifest for the entry instead of its facts.
        #[arg(long)]
        manifest: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Projection,
    Shooting,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    #[arg(long)]
    pub tol_closed: Option<f64>,
    #[arg(long)]
    pub tol_transverse: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub max_time: Option<f64>,
    /// Proceed even when the slice checks fail.
    #[arg(long)]
    pub force: bool,
    /// Also write the output to this file.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    PaperEq2,
    DerivedFeasibility,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::PaperEq2 => Convention::PaperEq2,
            ConventionArg::DerivedFeasibility => Convention::DerivedFeasibility,
        }
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

impl Overrides {
    fn apply(&self, m: &mut Manifest) -> Result<(), ManifestError> {
        if let Some(c) = self.convention {
            m.convention = c.into();
        }
        if let Some(v) = self.tol_closed {
            m.tolerances.closed = v;
        }
        if let Some(v) = self.tol_transverse {
            m.tolerances.transverse = v;
        }
        if let Some(v) = self.margin {
            m.tolerances.margin = v;
        }
        if let Some(v) = self.grid {
            m.collar.grid = v;
        }
        if let Some(v) = self.max_time {
            m.search.max_time = v;
        }
        m.validate()
    }
}

/// Failure inside a command, mapped to exit code 2.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Toolkit(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Check {
            manifest,
            overrides,
            emit_manifest,
        } => cmd_check(&manifest, &overrides, emit_manifest.as_deref(), out),
        Command::Chords {
            manifest,
            overrides,
            method,
        } => cmd_chords(&manifest, &overrides, method, out, err),
        Command::Collar { manifest, overrides } => cmd_collar(&manifest, &overrides, out),
        Command::ExportPlot {
            manifest,
            what,
            overrides,
        } => cmd_export_plot(&manifest, what, &overrides, out, err),
        Command::Catalog { action } => cmd_catalog(action, out),
    }
}

fn load(path: &Path, overrides: &Overrides) -> Result<(Manifest, ContactModel, ParamSlice), CliError> {
    let mut m = Manifest::load(path)?;
    overrides.apply(&mut m)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let (model, slice) = m.resolve(base)?;
    Ok((m, model, slice))
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    })?;
    if let Some(path) = output {
        write_file(path, text)?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Serialize)]
struct CheckDocument {
    model: String,
    slice: String,
    closed: crate::slice::ClosedCheck,
    transverse: crate::slice::TransverseCheck,
    max_manifold_defect: f64,
    periods: Vec<crate::slice::Period>,
    pass: bool,
}

fn cmd_check(
    path: &Path,
    overrides: &Overrides,
    emit_manifest: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let (m, model, slice) = load(path, overrides)?;
    if let Some(p) = emit_manifest {
        write_file(p, &m.to_toml())?;
    }
    let closed = check_closed(&model, &slice, m.tolerances.closed)?;
    let transverse = check_transverse(&model, &slice, m.tolerances.transverse)?;
    let periods = if closed.pass {
        periods(&model, &slice, &closed)?
    } else {
        Vec::new()
    };
    let pass = closed.pass && transverse.pass;
    let doc = CheckDocument {
        model: model.name(),
        slice: slice.name().to_string(),
        closed,
        transverse,
        max_manifold_defect: max_manifold_defect(&model, &slice),
        periods,
        pass,
    };
    emit(&to_document(&doc), overrides.output.as_deref(), out)?;
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}

fn find_chords(model: &ContactModel, slice: &ParamSlice, m: &Manifest, method: Option<Method>) -> crate::Result<Vec<ChordRecord>> {
    let method = method.unwrap_or(if model.is_standard_r() { Method::Projection } else { Method::Shooting });
    match method {
        Method::Projection => chords_projection(model, slice, &m.search),
        Method::Shooting => chords_shooting(model, slice, &m.search),
    }
}

/// Actions of pure chords when the slice is exact, else `None` per chord.
fn chord_actions(model: &ContactModel, slice: &ParamSlice, m: &Manifest, chords: &[ChordRecord]) -> Vec<Option<f64>> {
    let f = check_closed(model, slice, m.tolerances.closed)
        .ok()
        .filter(|c| c.pass)
        .and_then(|c| periods(model, slice, &c).ok())
        .and_then(|p| primitive(model, slice, &p).ok());
    chords
        .iter()
        .map(|c| f.as_ref().and_then(|f| chord_action(model, slice, f, c).ok()))
        .collect()
}

fn cmd_chords(
    path: &Path,
    overrides: &Overrides,
    method: Option<Method>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let (m, model, slice) = load(path, overrides)?;
    if !overrides.force {
        let closed = check_closed(&model, &slice, m.tolerances.closed)?;
        let transverse = check_transverse(&model, &slice, m.tolerances.transverse)?;
        if !(closed.pass && transverse.pass) {
            let _ = writeln!(err, "slice checks failed; rerun with --force to search anyway");
            return Ok(EXIT_FAIL);
        }
    }
    let chords = match find_chords(&model, &slice, &m, method) {
        Ok(c) => c,
        Err(e @ Error::NewtonFailuresExceeded { .. }) => {
            let _ = writeln!(err, "error: {e}");
            return Ok(EXIT_FAIL);
        }
        Err(e) => return Err(e.into()),
    };
    let actions = chord_actions(&model, &slice, &m, &chords);
    emit(&chord_table(&chords, &actions), overrides.output.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn cmd_collar(path: &Path, overrides: &Overrides, out: &mut dyn Write) -> Result<i32, CliError> {
    let (m, model, slice) = load(path, overrides)?;
    let report = collar_report(&model, &slice, &m.report_options());
    emit(&to_document(&report), overrides.output.as_deref(), out)?;
    Ok(report.verdict.exit_code())
}

fn cmd_export_plot(
    path: &Path,
    what: PlotKind,
    overrides: &Overrides,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let (m, model, slice) = load(path, overrides)?;
    let chords = if what == PlotKind::Chords {
        find_chords(&model, &slice, &m, None)?
    } else {
        Vec::new()
    };
    let plot = export_plot(&model, &slice, &chords, what)?;
    if let Some(w) = &plot.warning {
        let _ = writeln!(err, "{w}");
    }
    match &overrides.output {
        Some(prefix) => {
            write_file(&prefix.with_extension("csv"), &plot.csv)?;
            if let Some(svg) = &plot.svg {
                write_file(&prefix.with_extension("svg"), svg)?;
            }
        }
        None => emit(&plot.csv, None, out)?,
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ShowDocument<'a> {
    name: &'a str,
    model: String,
    params: Params,
    tags: Vec<crate::catalog::Tag>,
    summary: &'a str,
    expected: crate::catalog::Expected,
}

fn cmd_catalog(action: CatalogAction, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = match action {
        CatalogAction::List => {
            let mut s = String::new();
            for e in catalog_list() {
                let params: Vec<String> = e.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                s.push_str(&format!("{:<18} {:<4} {:<12} {}\n", e.name, e.model, params.join(","), e.summary));
            }
            s
        }
        CatalogAction::Show {
            name,
            params,
            manifest,
        } => {
            let params: Params = params.into_iter().collect();
            if manifest {
                Manifest::for_catalog(&name, params)?.to_toml()
            } else {
                let e = catalog_get(&name, &params)?;
                let info = catalog_list().iter().find(|i| i.name == name).expect("found above");
                to_document(&ShowDocument {
                    name: e.name,
                    model: e.model.name(),
                    params: e.params.clone(),
                    tags: e.tags.clone(),
                    summary: info.summary,
                    expected: e.expected,
                })
            }
        }
    };
    emit(&text, None, out)?;
    Ok(EXIT_OK)
}
