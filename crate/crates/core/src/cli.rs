//! Command-line front end. `run` takes the argument list and output sinks so
//! it can be driven from tests; the binary only forwards the exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::kb::KnowledgeBase;
use crate::pointcloud::load_xyz;
use crate::railway::{
    annotate_scene, evaluate, install_schema, write_scene, PipelineParams, SceneSpec,
};
use crate::rules::{detect_into_kb, parse_ruleset, standard_registry, DetectionKind};
use crate::vrml::{export_vrml, ColorMap};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "railsem", version, about = "Semantic annotation of railway point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// TOML file with [detect], [topology], [ransac] and [ranges] tables.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Override one parameter, e.g. `detect.cell_size=0.4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect vertical and horizontal boxes and write them as a KB.
    Detect {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run a rule file over a cloud and write the annotated KB.
    Annotate {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Write the boxes of a KB as a VRML 2.0 scene.
    Export {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Lines of `Class r g b` overriding the default colours.
        #[arg(long)]
        colors: Option<PathBuf>,
    },
    /// Generate a synthetic scene: `<prefix>.xyz` and `<prefix>.truth.kb`.
    Generate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "out-prefix")]
        out_prefix: PathBuf,
    },
    /// Score a predicted KB against a ground-truth KB.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FAILURE
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_kb(path: &Path) -> Result<KnowledgeBase> {
    KnowledgeBase::load(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

/// Defaults, then the params file, then `--set` overrides.
pub fn load_params(file: Option<&Path>, overrides: &[String]) -> Result<PipelineParams> {
    let mut table = match file {
        Some(p) => toml::from_str::<toml::Table>(&read(p)?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => toml::Table::new(),
    };
    for item in overrides {
        let Some((key, raw)) = item.split_once('=') else {
            bail!("--set expects KEY=VALUE, got {item:?}");
        };
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        let path: Vec<&str> = key.trim().split('.').collect();
        let (last, parents) = path.split_last().expect("split yields one part");
        let mut node = &mut table;
        for part in parents {
            node = node
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .with_context(|| format!("--set {key}: {part} is not a table"))?;
        }
        node.insert(last.to_string(), value);
    }
    toml::Value::Table(table)
        .try_into()
        .context("invalid parameters")
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Detect { cloud, out: path, params } => {
            let params = load_params(params.params.as_deref(), &params.set)?.builtins();
            let points = load_xyz(&cloud)?;
            let mut kb = KnowledgeBase::new();
            install_schema(&mut kb)?;
            let mut counts = Vec::new();
            for kind in [DetectionKind::Vertical, DetectionKind::Horizontal] {
                counts.push(detect_into_kb(&mut kb, &points, &params, kind)?.len());
            }
            write(&path, &kb.dump())?;
            writeln!(out, "{} vertical, {} horizontal boxes", counts[0], counts[1])?;
        }
        Command::Annotate { cloud, rules, out: path, params } => {
            let params = load_params(params.params.as_deref(), &params.set)?;
            let rules = parse_ruleset(&read(&rules)?, &standard_registry(&params.builtins()))
                .with_context(|| format!("parsing {}", rules.display()))?;
            let (kb, report) = annotate_scene(&cloud, &params, &rules)?;
            write(&path, &kb.dump())?;
            writeln!(
                out,
                "{} passes, {} facts added, {} conflicts",
                report.iterations,
                report.facts_added,
                report.conflicts.len()
            )?;
            for c in &report.conflicts {
                let labels: Vec<&str> = c.labels.iter().map(|l| l.as_str()).collect();
                writeln!(out, "conflict {}: {}", c.individual, labels.join(", "))?;
            }
        }
        Command::Export { kb, out: path, colors } => {
            let kb = read_kb(&kb)?;
            let mut map = ColorMap::default();
            if let Some(c) = colors {
                map.apply_overrides(&read(&c)?)
                    .with_context(|| format!("in {}", c.display()))?;
            }
            write(&path, &export_vrml(&kb, &map)?)?;
        }
        Command::Generate { spec, out_prefix } => {
            let spec = SceneSpec::parse(&read(&spec)?)
                .with_context(|| format!("in {}", spec.display()))?;
            let (xyz, truth) = write_scene(&spec, &out_prefix)?;
            writeln!(out, "wrote {} and {}", xyz.display(), truth.display())?;
        }
        Command::Eval { pred, truth } => {
            let result = evaluate(&read_kb(&pred)?, &read_kb(&truth)?);
            out.write_all(result.table().as_bytes())?;
        }
    }
    Ok(())
}
