use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use arrowsym::cnf::{parse_dimacs, write_dimacs, CnfFormula, Model};
use arrowsym::coloring::{
    coverage_report, deduplicate, expand_model, parse_colorings, Canonicalizer, ClassSet, Coloring,
    WitnessChecker,
};
use arrowsym::encode::{encode, encode_restricted, ArrowingInstance, EdgeMeta};
use arrowsym::error::{PipelineError, Stage};
use arrowsym::graph::{EdgeIndexer, Graph};
use arrowsym::pipeline::{
    break_symmetries, reproduce_paper, run_pipeline, BreakingOptions, GeneratorSet, GraphSource,
    PipelineConfig,
};
use arrowsym::sbp::SbpMode;
use arrowsym::solver::{enumerate, SolverInstance};
use arrowsym::symmetry::{detect_symmetries, GraphOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_USAGE: u8 = 1;
const EXIT_STAGE: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

/// Symmetry breaking and model enumeration for edge-coloring (arrowing)
/// formulas.
///
/// Graphs are given as `k<N>`, `c<N>`, `path:<N>`, `kex`, or a file in the
/// `n <order>` / `e <u> <v>` text format.
#[derive(Debug, Parser)]
#[command(name = "arrowsym", version)]
struct Cli {
    /// Directory that relative output paths resolve against.
    #[arg(long, global = true, env = "ARROWSYM_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode F ↛ (G, H) as DIMACS CNF.
    Encode {
        #[command(flatten)]
        inst: InstanceArgs,
        /// DIMACS output.
        #[arg(short, long)]
        output: PathBuf,
        /// Variable-to-edge map (JSON).
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Detect formula symmetries and dump them as JSON.
    Symmetries {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        free_var_color_mode: bool,
        /// JSON output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Append symmetry-breaking predicates.
    Sbp {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Aux-variable role map (JSON).
        #[arg(long)]
        aux_map: Option<PathBuf>,
        #[arg(long)]
        free_var_color_mode: bool,
        #[arg(long, default_value = "all")]
        generators: GeneratorSet,
        /// Host graph; needed for `--generators vertex-induced`.
        #[arg(long, requires = "meta")]
        host: Option<GraphSource>,
        /// Variable-to-edge map written by `encode`.
        #[arg(long)]
        meta: Option<PathBuf>,
        /// Do not add flips of free variables.
        #[arg(long)]
        no_free_flips: bool,
    },
    /// Enumerate all (projected) models.
    Allsat {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated projection variables.
        #[arg(long, value_delimiter = ',', conflicts_with = "project_file")]
        project: Option<Vec<u32>>,
        /// Project onto the base variables named in a meta or aux-map JSON.
        #[arg(long)]
        project_file: Option<PathBuf>,
        #[arg(long)]
        max_models: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reduce colorings to one canonical form per isomorphism class.
    Dedup {
        #[arg(long)]
        host: GraphSource,
        #[command(flatten)]
        input: ColoringInput,
        /// Canonical forms, one per line; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that colorings witness F ↛ (G, H).
    Verify {
        #[command(flatten)]
        inst: InstanceArgs,
        #[command(flatten)]
        input: ColoringInput,
    },
    /// Compare candidate classes against a reference set.
    Coverage {
        #[arg(long)]
        host: GraphSource,
        /// Candidate models (with `--meta`) or colorings.
        #[arg(long)]
        candidate: PathBuf,
        /// Reference models (with `--meta`) or colorings.
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        meta: Option<PathBuf>,
        /// JSON output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run encode, symmetry breaking, enumeration and coverage in one go.
    Pipeline {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, value_enum, default_value = "none")]
        sbp: SbpArg,
        /// Enumerate modulo the base variables.
        #[arg(long)]
        project: bool,
        #[arg(long, default_value = "all")]
        generators: GeneratorSet,
        #[arg(long)]
        free_var_color_mode: bool,
        #[arg(long)]
        no_free_flips: bool,
        #[arg(long)]
        max_models: Option<usize>,
        /// Print the JSON report instead of the summary.
        #[arg(long)]
        json: bool,
    },
    /// Run the K8 and K_ex experiments and compare with reference figures.
    ReproducePaper {
        /// Exit with status 3 on any exact-reference mismatch.
        #[arg(long)]
        strict_reference: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Host graph F.
    #[arg(long = "f")]
    host: GraphSource,
    /// Pattern G, forbidden in color ⊥.
    #[arg(long = "g")]
    first: GraphSource,
    /// Pattern H, forbidden in color ⊤.
    #[arg(long = "h")]
    second: GraphSource,
    /// Only encode edges on some pattern copy.
    #[arg(long)]
    restricted: bool,
}

impl InstanceArgs {
    fn load(&self) -> Result<ArrowingInstance, Failure> {
        Ok(
            ArrowingInstance::new(self.host.load()?, self.first.load()?, self.second.load()?)
                .restricted(self.restricted),
        )
    }
}

#[derive(Debug, Args)]
struct ColoringInput {
    /// Model file (with `--meta`) or coloring file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Variable-to-edge map; marks the input as a model file.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Relaxed,
}

impl From<ModeArg> for SbpMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => SbpMode::Exact,
            ModeArg::Relaxed => SbpMode::Relaxed,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SbpArg {
    None,
    Exact,
    Relaxed,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Stage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Stage(e)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e.stage {
            Stage::Config => Failure::Usage(e.to_string()),
            _ => Failure::Stage(e.into()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_STAGE)
        }
    }
}

struct Outputs {
    dir: Option<PathBuf>,
}

impl Outputs {
    fn path(&self, p: &Path) -> PathBuf {
        match &self.dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn write(&self, p: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
        let path = self.path(p);
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes to `p`, or stdout when `p` is absent.
    fn emit(&self, p: Option<&Path>, contents: &str) -> anyhow::Result<()> {
        match p {
            Some(p) => self.write(p, contents),
            None => {
                std::io::stdout().write_all(contents.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_formula(path: &Path) -> anyhow::Result<CnfFormula> {
    parse_dimacs(read(path)?.as_bytes()).with_context(|| format!("parsing {}", path.display()))
}

fn read_meta(path: &Path) -> anyhow::Result<EdgeMeta> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn read_models(path: &Path) -> anyhow::Result<Vec<Model>> {
    read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            Model::parse_line(l).with_context(|| format!("{}: line {}", path.display(), i + 1))
        })
        .collect()
}

/// Colorings from a coloring file, or from a model file expanded through
/// `meta`'s variable-to-edge map.
fn read_colorings(
    host: &Graph,
    input: &Path,
    meta: Option<&Path>,
) -> anyhow::Result<Vec<Coloring>> {
    let Some(meta) = meta else {
        return parse_colorings(host, &read(input)?)
            .with_context(|| format!("parsing {}", input.display()));
    };
    let indexer = EdgeIndexer::new(host);
    let var_edges = read_meta(meta)?
        .var_edges(&indexer)
        .ok_or_else(|| anyhow!("{}: edge missing from the host graph", meta.display()))?;
    let mut out = Vec::new();
    for m in read_models(input)? {
        out.extend(expand_model(&m, &indexer, &var_edges)?);
    }
    Ok(out)
}

fn classes_of(host: &Graph, colorings: &[Coloring]) -> anyhow::Result<ClassSet> {
    let canon = Canonicalizer::new(host)?;
    Ok(deduplicate(&canon, colorings))
}

/// Base variables named in a meta (`edges`) or aux-map (`original_vars`)
/// JSON file.
fn projection_from_file(path: &Path) -> anyhow::Result<Vec<u32>> {
    let value: serde_json::Value = serde_json::from_str(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    let n = if let Some(n) = value.get("original_vars").and_then(|v| v.as_u64()) {
        n
    } else if let Some(edges) = value.get("edges").and_then(|v| v.as_array()) {
        edges.len() as u64
    } else {
        bail!("{}: expected `original_vars` or `edges`", path.display());
    };
    Ok((1..=n as u32).collect())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let out = Outputs { dir: cli.out_dir };
    match cli.command {
        Command::Encode { inst, output, meta } => {
            let inst = inst.load()?;
            let enc = if inst.restricted {
                encode_restricted(&inst)
            } else {
                encode(&inst)
            };
            out.write(&output, write_dimacs(&enc.formula))?;
            if let Some(meta) = meta {
                let json =
                    serde_json::to_string_pretty(&enc.meta()).map_err(anyhow::Error::from)?;
                out.write(&meta, json + "\n")?;
            }
            eprintln!(
                "{} variables, {} clauses",
                enc.formula.num_vars(),
                enc.formula.num_clauses()
            );
        }
        Command::Symmetries {
            input,
            free_var_color_mode,
            out: dest,
        } => {
            let f = read_formula(&input)?;
            let propagated = arrowsym::cnf::propagate_units(&f)
                .ok_or_else(|| anyhow!("unit propagation refutes {}", input.display()))?;
            let opts = GraphOptions {
                free_var_colors: free_var_color_mode,
                fixed_vars: propagated.forced.iter().map(|l| l.var()).collect(),
            };
            let report =
                detect_symmetries(&propagated.formula, &opts).map_err(anyhow::Error::from)?;
            let json =
                serde_json::to_string_pretty(&report.diagnostics()).map_err(anyhow::Error::from)?;
            out.emit(dest.as_deref(), &(json + "\n"))?;
        }
        Command::Sbp {
            mode,
            input,
            out: dest,
            aux_map,
            free_var_color_mode,
            generators,
            host,
            meta,
            no_free_flips,
        } => {
            let base = read_formula(&input)?;
            let host_map = match (&host, &meta) {
                (Some(h), Some(m)) => {
                    let indexer = EdgeIndexer::new(&h.load()?);
                    let var_edges = read_meta(m)?
                        .var_edges(&indexer)
                        .ok_or_else(|| anyhow!("{}: edge missing from the host", m.display()))?;
                    Some((indexer, var_edges))
                }
                _ => None,
            };
            let opts = BreakingOptions {
                generators,
                free_var_colors: free_var_color_mode,
                flip_free_vars: !no_free_flips,
            };
            let broken = break_symmetries(
                &base,
                mode.into(),
                &opts,
                host_map.as_ref().map(|(i, v)| (i, v.as_slice())),
            )?;
            out.write(&dest, write_dimacs(&broken.result.formula))?;
            if let Some(aux) = aux_map {
                let json = serde_json::to_string_pretty(&broken.result.aux_var_map)
                    .map_err(anyhow::Error::from)?;
                out.write(&aux, json + "\n")?;
            }
            eprintln!(
                "{} generators, {} aux variables, {} predicate clauses",
                broken.summary.map_or(0, |s| s.used),
                broken.result.num_aux_vars(),
                broken.result.num_sbp_clauses()
            );
        }
        Command::Allsat {
            input,
            project,
            project_file,
            max_models,
            out: dest,
        } => {
            let f = read_formula(&input)?;
            let projection = match (project, project_file) {
                (Some(p), _) => Some(p),
                (None, Some(path)) => Some(projection_from_file(&path)?),
                (None, None) => None,
            };
            let mut inst = SolverInstance::new(f).with_max_models(max_models);
            if let Some(p) = projection {
                inst = inst.projected(p);
            }
            let stream = enumerate(&inst).map_err(|e| Failure::Usage(e.to_string()))?;
            let lines: Vec<String> = stream.models.iter().map(Model::to_line).collect();
            out.write(&dest, lines.join("\n"))?;
            eprintln!(
                "{} models{}",
                stream.len(),
                if stream.complete {
                    ""
                } else {
                    " (budget reached)"
                }
            );
        }
        Command::Dedup {
            host,
            input,
            out: dest,
        } => {
            let host = host.load()?;
            let colorings = read_colorings(&host, &input.input, input.meta.as_deref())?;
            let classes = classes_of(&host, &colorings)?;
            let text: String = classes
                .representatives()
                .map(|f| format!("{}\n", f.as_str()))
                .collect();
            out.emit(dest.as_deref(), &text)?;
            eprintln!("{} colorings, {} classes", colorings.len(), classes.len());
        }
        Command::Verify { inst, input } => {
            let inst = inst.load()?;
            let colorings = read_colorings(&inst.host, &input.input, input.meta.as_deref())?;
            let checker = WitnessChecker::new(&inst.host, &inst.first, &inst.second);
            let bad: Vec<usize> = colorings
                .iter()
                .enumerate()
                .filter(|(_, c)| !checker.is_witness(c))
                .map(|(i, _)| i + 1)
                .collect();
            if !bad.is_empty() {
                return Err(Failure::Stage(anyhow!(
                    "{} of {} colorings are not witnesses (first at entry {})",
                    bad.len(),
                    colorings.len(),
                    bad[0]
                )));
            }
            println!("{} colorings verified", colorings.len());
        }
        Command::Coverage {
            host,
            candidate,
            reference,
            meta,
            out: dest,
        } => {
            let host = host.load()?;
            let cand = read_colorings(&host, &candidate, meta.as_deref())?;
            let refs = read_colorings(&host, &reference, meta.as_deref())?;
            let total = match &meta {
                Some(_) => read_models(&candidate)?.len(),
                None => cand.len(),
            };
            let report = coverage_report(
                &classes_of(&host, &cand)?,
                &classes_of(&host, &refs)?,
                total,
            );
            let json = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?;
            out.emit(dest.as_deref(), &(json + "\n"))?;
        }
        Command::Pipeline {
            inst,
            sbp,
            project,
            generators,
            free_var_color_mode,
            no_free_flips,
            max_models,
            json,
        } => {
            let mut cfg = PipelineConfig::new(inst.host, inst.first, inst.second)
                .restricted(inst.restricted)
                .projected(project)
                .with_generators(generators)
                .with_out_dir(out.dir.clone());
            cfg.sbp = match sbp {
                SbpArg::None => None,
                SbpArg::Exact => Some(SbpMode::Exact),
                SbpArg::Relaxed => Some(SbpMode::Relaxed),
            };
            cfg.free_var_colors = free_var_color_mode;
            cfg.flip_free_vars = !no_free_flips;
            cfg.max_models = max_models;
            let report = run_pipeline(&cfg)?;
            if json {
                let text = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?;
                println!("{text}");
            } else {
                print!("{}", report.summary());
            }
        }
        Command::ReproducePaper {
            strict_reference,
            json,
        } => {
            let bundle = reproduce_paper(out.dir.as_deref())?;
            if json {
                let text = serde_json::to_string_pretty(&bundle).map_err(anyhow::Error::from)?;
                println!("{text}");
            } else {
                print!("{}", bundle.table());
            }
            let mismatches = bundle.mismatches();
            for (label, c) in &mismatches {
                eprintln!(
                    "reference mismatch: {label} {} measured {} expected {}",
                    c.quantity, c.measured, c.reference
                );
            }
            if strict_reference && !mismatches.is_empty() {
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    Ok(0)
}
