//! Command-line front end: JSON run configs, flag overrides, dispatch to
//! the library, and one output directory per run.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::complexes::{build, filtration, ComplexKind, ComplexPattern};
use crate::error::{Error, Result};
use crate::experiments::{records_csv, run, ExperimentPlan, RadiusRule, Regime, Statistic};
use crate::geograph::{GraphPattern, Mode, PatternCatalog};
use crate::homology::{betti_numbers, persistence};
use crate::limits::{gamma_beta, mu0, mu_beta, nu_k, LimitConstant, LimitPattern};
use crate::morse::critical_points;
use crate::par;
use crate::pointproc::{sample, ModelSpec, PointConfiguration, Window};
use crate::stats::fmt17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Sample,
    Complex,
    Betti,
    Persist,
    Morse,
    Limits,
    Experiment,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Complex => "complex",
            Command::Betti => "betti",
            Command::Persist => "persist",
            Command::Morse => "morse",
            Command::Limits => "limits",
            Command::Experiment => "experiment",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rgc", about = "Random geometric complexes over stationary point processes")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the radius / complex parameter.
    #[arg(long)]
    pub r: Option<f64>,
    /// Override the window volume.
    #[arg(long)]
    pub n: Option<f64>,
}

/// Model by bare name (`"poisson"`, `"ginibre"`, `"gef"`) or as a full spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelField {
    Name(String),
    Spec(ModelSpec),
}

impl ModelField {
    pub fn resolve(&self) -> Result<ModelSpec> {
        match self {
            ModelField::Spec(s) => Ok(s.clone()),
            ModelField::Name(n) => match n.as_str() {
                "poisson" => Ok(ModelSpec::Poisson),
                "ginibre" => Ok(ModelSpec::Ginibre),
                "gef" | "gef_zeros" => Ok(ModelSpec::GefZeros),
                other => Err(Error::Config(format!("key 'model': unknown model '{other}' (use an object for parametrized models)"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Mu0,
    MuBeta,
    GammaBeta,
    NuK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsBlock {
    pub quantity: Quantity,
    /// Graph pattern name from the catalog; ignored for ν_k.
    #[serde(default)]
    pub pattern: Option<String>,
    /// Complex pattern given by its faces instead of a graph pattern.
    #[serde(default)]
    pub complex_pattern: Option<ComplexPattern>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// ε of the joint-ball estimator; defaults to 0.05·β^{1/d}.
    #[serde(default)]
    pub eps: Option<f64>,
}

fn default_samples() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    pub regime: Regime,
    pub radius: RadiusRule,
    /// Defaults to the top-level n.
    #[serde(default)]
    pub n: Option<Vec<f64>>,
    pub statistics: Vec<Statistic>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub per_point: bool,
}

fn default_replicates() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_model")]
    pub model: ModelField,
    #[serde(default = "two")]
    pub dim: usize,
    /// Window volume.
    #[serde(default)]
    pub n: Option<f64>,
    /// Explicit points instead of a sample.
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub margin: f64,
    /// Radius, or the complex parameter ε for complex/betti/persist (the
    /// filtration is cut at ε).
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default = "two")]
    pub max_dim: usize,
    #[serde(default = "default_kind")]
    pub complex: ComplexKind,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Extra named graph patterns.
    #[serde(default)]
    pub patterns: Option<std::collections::BTreeMap<String, GraphPattern>>,
    #[serde(default)]
    pub limits: Option<LimitsBlock>,
    #[serde(default)]
    pub experiment: Option<ExperimentBlock>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_model() -> ModelField {
    ModelField::Name("poisson".into())
}
fn two() -> usize {
    2
}
fn default_kind() -> ComplexKind {
    ComplexKind::Rips
}
fn default_mode() -> Mode {
    Mode::InteriorOnly
}

/// Parse JSON text; serde reports unknown keys with line and column.
pub fn parse_config_text(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Read the config file, apply flag overrides, resolve defaults, validate.
pub fn parse_config(args: &Args) -> Result<RunConfig> {
    let text = fs::read_to_string(&args.config).map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    let mut cfg = parse_config_text(&text)?;
    if let Some(c) = cfg.command {
        if c != args.command {
            return Err(Error::Config(format!("key 'command': config is for '{}', invoked as '{}'", c.name(), args.command.name())));
        }
    }
    cfg.command = Some(args.command);
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.r.is_some() {
        cfg.r = args.r;
    }
    if args.n.is_some() {
        cfg.n = args.n;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    validate(&mut cfg)?;
    Ok(cfg)
}

fn need<T: Copy>(v: Option<T>, key: &str, cmd: Command) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("key '{key}' required for '{}'", cmd.name())))
}

fn validate(cfg: &mut RunConfig) -> Result<()> {
    let cmd = cfg.command.ok_or_else(|| Error::Config("subcommand missing".into()))?;
    let seed = cfg.seed.ok_or_else(|| Error::Config("seed required".into()))?;
    let model = cfg.model.resolve()?;
    model.validate(cfg.dim).map_err(|e| Error::Config(format!("key 'model': {e}")))?;
    cfg.model = ModelField::Spec(model);
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(Error::Config("key 'threads': must be >= 1".into()));
        }
    }
    let catalog = catalog(cfg)?;
    if let Some(pts) = &cfg.points {
        if pts.iter().any(|p| p.len() != cfg.dim) {
            return Err(Error::Config(format!("key 'points': every point needs {} coordinates", cfg.dim)));
        }
    } else if !matches!(cmd, Command::Limits | Command::Experiment) || (cmd == Command::Experiment && cfg.experiment.as_ref().is_some_and(|e| e.n.is_none())) {
        let n = need(cfg.n, "n", cmd)?;
        if !(n >= 0.0) {
            return Err(Error::Config(format!("key 'n': window volume {n}")));
        }
    }
    match cmd {
        Command::Complex | Command::Betti | Command::Persist | Command::Morse => {
            let r = need(cfg.r, "r", cmd)?;
            if !(r > 0.0) {
                return Err(Error::Config(format!("key 'r': must be positive, got {r}")));
            }
            if cfg.max_dim > 7 {
                return Err(Error::Config(format!("key 'max_dim': {} exceeds the cap 7", cfg.max_dim)));
            }
        }
        Command::Limits => {
            let l = cfg.limits.as_ref().ok_or_else(|| Error::Config("key 'limits' required for 'limits'".into()))?;
            if l.samples == 0 {
                return Err(Error::Config("key 'limits.samples': must be >= 1".into()));
            }
            if l.quantity == Quantity::NuK {
                need(l.k, "limits.k", cmd)?;
            } else if l.complex_pattern.is_none() {
                let p = l.pattern.as_deref().ok_or_else(|| Error::Config("key 'limits.pattern' required".into()))?;
                catalog.get(p).map_err(|e| Error::Config(format!("key 'limits.pattern': {e}")))?;
            }
        }
        Command::Experiment => {
            let plan = plan_of(cfg, seed)?;
            plan.validate().map_err(|e| Error::Config(format!("key 'experiment': {e}")))?;
            for s in &plan.statistics {
                if let Statistic::Subgraphs { pattern } | Statistic::Components { pattern } | Statistic::IsolatedComponents { pattern } = s {
                    catalog.get(pattern).map_err(|e| Error::Config(format!("key 'experiment.statistics': {e}")))?;
                }
            }
        }
        Command::Sample => {}
    }
    Ok(())
}

fn catalog(cfg: &RunConfig) -> Result<PatternCatalog> {
    match &cfg.patterns {
        None => Ok(PatternCatalog::default()),
        Some(m) => PatternCatalog::from_json(&serde_json::to_string(m).map_err(|e| Error::Config(e.to_string()))?)
            .map_err(|e| Error::Config(format!("key 'patterns': {e}"))),
    }
}

fn model_of(cfg: &RunConfig) -> Result<ModelSpec> {
    cfg.model.resolve()
}

fn plan_of(cfg: &RunConfig, seed: u64) -> Result<ExperimentPlan> {
    let e = cfg.experiment.as_ref().ok_or_else(|| Error::Config("key 'experiment' required for 'experiment'".into()))?;
    let n = match &e.n {
        Some(v) => v.clone(),
        None => vec![cfg.n.ok_or_else(|| Error::Config("key 'n' required for 'experiment'".into()))?],
    };
    Ok(ExperimentPlan {
        model: model_of(cfg)?,
        dim: cfg.dim,
        regime: e.regime,
        radius: e.radius.clone(),
        n,
        statistics: e.statistics.clone(),
        replicates: e.replicates,
        seed,
        per_point: e.per_point,
    })
}

fn points_of(cfg: &RunConfig, margin: f64) -> Result<PointConfiguration> {
    match &cfg.points {
        Some(p) => Ok(PointConfiguration::fixture(cfg.dim, p)),
        None => sample(&model_of(cfg)?, Window::new(cfg.dim, cfg.n.unwrap_or(0.0))?, margin, cfg.seed.unwrap_or(0)),
    }
}

/// Files produced by a run: (name, contents).
pub type Outputs = Vec<(String, String)>;

/// Run the subcommand; returns the files to write.
pub fn dispatch(cfg: &RunConfig) -> Result<Outputs> {
    let cmd = cfg.command.ok_or_else(|| Error::Config("subcommand missing".into()))?;
    let seed = cfg.seed.ok_or_else(|| Error::Config("seed required".into()))?;
    let mut out = Outputs::new();
    match cmd {
        Command::Sample => {
            let c = points_of(cfg, cfg.margin)?;
            out.push(("points.csv".into(), c.to_csv(cfg.margin > 0.0)));
        }
        Command::Complex => {
            let c = points_of(cfg, cfg.margin)?;
            let r = cfg.r.unwrap_or_default();
            let k = build(cfg.complex, &c, r, cfg.max_dim)?;
            let mut faces = String::from("dim;vertices\n");
            let mut counts = String::from("dim,count\n");
            for (p, layer) in k.faces.iter().enumerate() {
                counts.push_str(&format!("{p},{}\n", layer.len()));
                for f in layer {
                    let v: Vec<String> = f.iter().map(|x| x.to_string()).collect();
                    faces.push_str(&format!("{p};{}\n", v.join(",")));
                }
            }
            out.push(("faces.txt".into(), faces));
            out.push(("face_counts.csv".into(), counts));
        }
        Command::Betti => {
            let c = points_of(cfg, cfg.margin)?;
            let r = cfg.r.unwrap_or_default();
            let b = betti_numbers(&build(cfg.complex, &c, r, cfg.max_dim)?)?;
            let mut s = String::from("kind,eps,k,betti\n");
            for (k, v) in b.betti.iter().enumerate() {
                s.push_str(&format!("{},{},{k},{v}\n", cfg.complex.name(), fmt17(r)));
            }
            out.push(("betti.csv".into(), s));
        }
        Command::Persist => {
            let c = points_of(cfg, cfg.margin)?;
            let r = cfg.r.unwrap_or_default();
            let mut bc = persistence(&filtration(cfg.complex, &c, cfg.max_dim, r)?)?;
            // top-dimensional classes of a truncated filtration never die
            bc.bars.retain(|b| b.dim < cfg.max_dim);
            out.push(("barcode.csv".into(), bc.to_csv()));
            out.push(("barcode.svg".into(), bc.to_svg(&format!("{} barcode", cfg.complex.name()))));
        }
        Command::Morse => {
            let r = cfg.r.unwrap_or_default();
            let margin = if cfg.mode == Mode::Ambient { cfg.margin.max(2.0 * r) } else { cfg.margin };
            let c = points_of(cfg, margin)?;
            let cp = critical_points(&c, r, cfg.max_dim.min(cfg.dim), cfg.mode)?;
            let mut s = String::from("k,count\n");
            for (k, v) in cp.counts.iter().enumerate() {
                s.push_str(&format!("{k},{v}\n"));
            }
            s.push_str(&format!("euler,{}\ndegenerate,{}\nnear_threshold,{}\n", cp.euler(), cp.degenerate, cp.near_threshold));
            out.push(("critical_points.csv".into(), cp.to_csv(cfg.dim)));
            out.push(("morse_counts.csv".into(), s));
        }
        Command::Limits => {
            let l = cfg.limits.as_ref().ok_or_else(|| Error::Config("key 'limits' required".into()))?;
            let model = model_of(cfg)?;
            let c: LimitConstant = match l.quantity {
                Quantity::NuK => nu_k(&model, cfg.dim, l.beta, l.k.unwrap_or(1), l.samples, seed)?,
                q => {
                    let pattern = match &l.complex_pattern {
                        Some(p) => LimitPattern::Complex(p.clone()),
                        None => LimitPattern::Graph(catalog(cfg)?.get(l.pattern.as_deref().unwrap_or("edge"))?),
                    };
                    match q {
                        Quantity::Mu0 => mu0(&pattern, &model, cfg.dim, l.samples, seed)?,
                        Quantity::MuBeta => mu_beta(&pattern, &model, cfg.dim, l.beta, l.samples, seed)?,
                        _ => gamma_beta(&pattern, &model, cfg.dim, l.beta, l.samples, seed, l.eps)?,
                    }
                }
            };
            out.push(("limits.csv".into(), LimitConstant::to_csv(&[c])));
        }
        Command::Experiment => {
            let plan = plan_of(cfg, seed)?;
            out.push(("estimates.csv".into(), records_csv(&run(&plan)?)));
        }
    }
    Ok(out)
}

fn default_out(cfg: &RunConfig) -> PathBuf {
    let cmd = cfg.command.map_or("run", |c| c.name());
    PathBuf::from(format!("runs/{cmd}-seed{}", cfg.seed.unwrap_or(0)))
}

/// Write outputs into `dir`; on failure remove what was written.
fn persist(dir: &Path, files: &[(String, String)]) -> Result<()> {
    let mut written = Vec::new();
    for (name, body) in files {
        let p = dir.join(name);
        if let Err(e) = fs::write(&p, body) {
            for w in &written {
                let _ = fs::remove_file(w);
            }
            return Err(e.into());
        }
        written.push(p);
    }
    Ok(())
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Dimension(_) => "dimension",
        Error::Sizing(_) => "sizing",
        Error::Geometry(_) => "geometry",
        Error::Margin { .. } => "margin",
        Error::IntensityUnavailable(_) => "intensity_unavailable",
        Error::Starvation { .. } => "starvation",
        Error::Pattern(_) => "pattern",
        Error::Malformed(_) => "malformed",
        Error::NonMonotone { .. } => "non_monotone",
        Error::Degenerate(_) => "degenerate",
        Error::Cap(_) => "cap",
        Error::Invalid(_) => "invalid",
        Error::Excluded { .. } => "excluded",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
    }
}

/// Machine-readable error record.
pub fn error_record(e: &Error) -> String {
    serde_json::json!({ "error": error_kind(e), "message": e.to_string() }).to_string()
}

/// Full run: parse, echo the resolved config, dispatch, write. Returns the
/// output directory.
pub fn execute(args: &Args) -> Result<PathBuf> {
    let cfg = parse_config(args)?;
    if let Some(t) = cfg.threads {
        par::set_threads(t);
    }
    let dir = cfg.out.clone().unwrap_or_else(|| default_out(&cfg));
    fs::create_dir_all(&dir)?;
    let resolved = serde_json::to_string_pretty(&cfg).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(dir.join("resolved-config.json"), resolved + "\n")?;
    let started = std::time::Instant::now();
    match dispatch(&cfg) {
        Ok(files) => {
            persist(&dir, &files)?;
            let names: Vec<&str> = files.iter().map(|f| f.0.as_str()).collect();
            let log = format!(
                "command {}\nseed {}\nfiles {}\nelapsed_s {:.3}\n",
                cfg.command.map_or("", |c| c.name()),
                cfg.seed.unwrap_or(0),
                names.join(" "),
                started.elapsed().as_secs_f64()
            );
            fs::write(dir.join("run.log"), log)?;
            Ok(dir)
        }
        Err(e) => {
            let _ = fs::write(dir.join("error.json"), error_record(&e) + "\n");
            Err(e)
        }
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&args) {
        Ok(dir) => {
            println!("{}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            if matches!(e, Error::Config(_)) { 2 } else { 1 }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str, cmd: Command) -> Result<RunConfig> {
        let mut c = parse_config_text(text)?;
        c.command = Some(cmd);
        validate(&mut c)?;
        Ok(c)
    }

    #[test]
    fn minimal_sample_config() {
        let c = resolve(r#"{"model": "poisson", "n": 100, "seed": 7}"#, Command::Sample).unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.model, ModelField::Spec(ModelSpec::Poisson));
    }

    #[test]
    fn seed_required() {
        let e = resolve(r#"{"model": "poisson", "n": 100}"#, Command::Sample).unwrap_err();
        assert!(e.to_string().contains("seed required"));
    }

    #[test]
    fn unknown_key_reports_position() {
        let e = parse_config_text("{\n  \"seed\": 1,\n  \"radius\": 2\n}").unwrap_err();
        let s = e.to_string();
        assert!(s.contains("radius") && s.contains("line 3"), "{s}");
    }

    #[test]
    fn unknown_pattern_rejected() {
        let text = r#"{"seed": 1, "n": 10, "experiment": {"regime": "sparse", "radius": {"rule": "explicit", "values": [0.1]},
            "statistics": [{"stat": "subgraphs", "pattern": "dodecahedron"}]}}"#;
        assert!(resolve(text, Command::Experiment).is_err());
    }
}
