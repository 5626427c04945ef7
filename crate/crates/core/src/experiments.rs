//! Monte Carlo harness: sample replicates across an n grid and a radius
//! rule, evaluate statistics, aggregate into [`EstimateRecord`]s.

use std::fmt::Write as _;

use log::{info, warn};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complexes::{
    build_cech, build_rips, count_subcomplexes, empty_simplex, empty_simplex_edge, empty_simplex_path, rips_filtration,
    ComplexKind, ComplexPattern,
};
use crate::error::{Error, Result};
use crate::geograph::{
    build_graph, connected_components, count_components_in, count_subgraphs_in, Mode, PatternCatalog,
};
use crate::homology::{betti_numbers, persistence, Barcode};
use crate::limits::nu_k;
use crate::morse::{critical_points, planar_components};
use crate::par;
use crate::pointproc::{sample, ModelSpec, PointConfiguration, Window};
use crate::stats::{bootstrap_ci, mean_var, theil_sen, EstimateRecord, Z95};

/// Share of replicates that may be excluded before a run fails.
pub const EXCLUSION_CAP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Sparse,
    Thermodynamic,
    Connectivity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadiusRule {
    /// Every listed radius at every n.
    Explicit { values: Vec<f64> },
    /// r = c·n^{−a}.
    Power { c: f64, a: f64 },
    /// r^d = β.
    Thermodynamic { beta: f64 },
    /// r = c·(ln n)^p.
    Logarithmic { c: f64, p: f64 },
}

impl RadiusRule {
    pub fn radii(&self, n: f64, dim: usize) -> Vec<f64> {
        match self {
            RadiusRule::Explicit { values } => values.clone(),
            RadiusRule::Power { c, a } => vec![c * n.powf(-a)],
            RadiusRule::Thermodynamic { beta } => vec![beta.powf(1.0 / dim as f64)],
            RadiusRule::Logarithmic { c, p } => vec![c * n.ln().powf(*p)],
        }
    }

    fn fits(&self, regime: Regime) -> bool {
        match (self, regime) {
            (RadiusRule::Explicit { .. }, _) => true,
            (RadiusRule::Power { a, .. }, Regime::Sparse) => *a > 0.0,
            (RadiusRule::Thermodynamic { .. }, Regime::Thermodynamic) => true,
            (RadiusRule::Logarithmic { p, .. }, Regime::Connectivity) => *p > 0.0,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stat", rename_all = "snake_case", deny_unknown_fields)]
pub enum Statistic {
    /// G_n: induced Γ-subgraphs.
    Subgraphs { pattern: String },
    /// J_n: Γ-components of Φ_n.
    Components { pattern: String },
    /// J̃_n: Γ-components isolated from the ambient process.
    IsolatedComponents { pattern: String },
    /// C̃_n or C̃*_n at ε = r.
    Subcomplexes {
        pattern: String,
        #[serde(default)]
        isolated: bool,
        #[serde(default = "interior")]
        mode: Mode,
    },
    /// β_k of the complex at ε = r.
    Betti { kind: ComplexKind, k: usize },
    /// N_k(Φ_n, r).
    CriticalPoints { k: usize },
    /// Σ(−1)^k N_k(Φ_n, r), which is χ of the Čech complex at ε = 2r.
    Euler,
    /// Indicator that every grid cube of side r/(4√d) inside the window
    /// holds a point.
    Coverage,
}

fn interior() -> Mode {
    Mode::InteriorOnly
}

fn complex_pattern(name: &str) -> Result<ComplexPattern> {
    let (base, k) = name
        .rsplit_once('_')
        .and_then(|(b, k)| k.parse::<usize>().ok().map(|k| (b, k)))
        .ok_or_else(|| Error::Pattern(format!("unknown complex pattern '{name}'")))?;
    match base {
        "empty_simplex" => empty_simplex(k),
        "empty_simplex_edge" => empty_simplex_edge(k),
        "empty_simplex_path" => empty_simplex_path(k),
        "simplex" => ComplexPattern::simplex(k),
        _ => Err(Error::Pattern(format!("unknown complex pattern '{name}'"))),
    }
}

impl Statistic {
    pub fn id(&self) -> String {
        match self {
            Statistic::Subgraphs { pattern } => format!("G_n[{pattern}]"),
            Statistic::Components { pattern } => format!("J_n[{pattern}]"),
            Statistic::IsolatedComponents { pattern } => format!("J~_n[{pattern}]"),
            Statistic::Subcomplexes { pattern, isolated, mode } => {
                let m = if *mode == Mode::Ambient { "~" } else { "" };
                let s = if *isolated { "*" } else { "" };
                format!("C{m}{s}_n[{pattern}]")
            }
            Statistic::Betti { kind, k } => format!("beta_{k}[{}]", kind.name()),
            Statistic::CriticalPoints { k } => format!("N_{k}"),
            Statistic::Euler => "chi".into(),
            Statistic::Coverage => "coverage".into(),
        }
    }

    /// Largest pattern size involved.
    fn size(&self) -> Result<usize> {
        let cat = PatternCatalog::default();
        Ok(match self {
            Statistic::Subgraphs { pattern } | Statistic::Components { pattern } | Statistic::IsolatedComponents { pattern } => {
                cat.get(pattern)?.k
            }
            Statistic::Subcomplexes { pattern, .. } => complex_pattern(pattern)?.k,
            Statistic::Betti { k, .. } => k + 2,
            Statistic::CriticalPoints { k } => k + 1,
            Statistic::Euler | Statistic::Coverage => 1,
        })
    }

    fn ambient(&self) -> bool {
        matches!(self, Statistic::IsolatedComponents { .. } | Statistic::Subcomplexes { mode: Mode::Ambient, .. })
    }

    fn indicator(&self) -> bool {
        matches!(self, Statistic::Coverage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub model: ModelSpec,
    #[serde(default = "two")]
    pub dim: usize,
    pub regime: Regime,
    pub radius: RadiusRule,
    /// Window volumes (expected point counts at unit intensity).
    pub n: Vec<f64>,
    pub statistics: Vec<Statistic>,
    pub replicates: usize,
    pub seed: u64,
    /// Divide every statistic by n.
    #[serde(default)]
    pub per_point: bool,
}

fn two() -> usize {
    2
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        self.model.validate(self.dim)?;
        if self.replicates == 0 {
            return Err(Error::Invalid("replicates must be >= 1".into()));
        }
        if self.n.is_empty() || self.n.iter().any(|&n| !(n >= 0.0) || !n.is_finite()) {
            return Err(Error::Invalid("n grid must be a nonempty list of finite volumes".into()));
        }
        if self.statistics.is_empty() {
            return Err(Error::Invalid("no statistics requested".into()));
        }
        if !self.radius.fits(self.regime) {
            return Err(Error::Invalid(format!("radius rule {:?} does not match regime {:?}", self.radius, self.regime)));
        }
        for s in &self.statistics {
            s.size()?;
            match s {
                Statistic::CriticalPoints { k } if *k > self.dim => {
                    return Err(Error::Invalid(format!("N_{k} needs k <= d = {}", self.dim)));
                }
                Statistic::Betti { kind: ComplexKind::Cech, k } if k + 1 > 7 => {
                    return Err(Error::Cap(format!("Čech β_{k} beyond the dimension cap")));
                }
                _ => {}
            }
        }
        for &n in &self.n {
            for r in self.radius.radii(n, self.dim) {
                if !(r >= 0.0) || !r.is_finite() {
                    return Err(Error::Invalid(format!("radius {r} at n = {n}")));
                }
            }
        }
        Ok(())
    }

    /// Isolation from the ambient process only looks within r of a window
    /// subset, so a margin of r is enough.
    fn margin(&self, r: f64) -> Result<f64> {
        Ok(if self.statistics.iter().any(|s| s.ambient()) { r } else { 0.0 })
    }
}

/// Raw per-replicate values of one statistic at one (n, r).
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub statistic: String,
    pub n: f64,
    pub r: f64,
    pub values: Vec<f64>,
    pub excluded: usize,
    pub indicator: bool,
}

impl Cell {
    pub fn record(&self, model: &str, seed: u64) -> EstimateRecord {
        let total = self.values.len() + self.excluded;
        let mut rec = if self.indicator {
            let hits = self.values.iter().filter(|&&x| x > 0.5).count();
            EstimateRecord::from_indicators(&self.statistic, model, self.n, self.r, hits, self.values.len(), seed)
        } else {
            EstimateRecord::from_samples(&self.statistic, model, self.n, self.r, &self.values, seed)
        };
        rec.replicates = total;
        rec.accepted = self.values.len();
        rec
    }
}

fn excludable(e: &Error) -> bool {
    matches!(e, Error::Degenerate(_) | Error::Starvation { .. })
}

/// Cube-coverage indicator with cubes of side r/(4√d) anchored at the
/// window corner; only cubes lying inside the window are checked. If none
/// fits, the window itself is the one cube.
pub fn cubes_covered(config: &PointConfiguration, r: f64) -> bool {
    let d = config.dim;
    let side = config.window.side();
    if config.is_empty() {
        return side == 0.0;
    }
    if !(r > 0.0) {
        return false;
    }
    let s = r / (4.0 * (d as f64).sqrt());
    let m = (side / s).floor() as usize;
    if m == 0 {
        return true;
    }
    let cells = m.checked_pow(d as u32).unwrap_or(usize::MAX);
    if cells > 50_000_000 {
        return false;
    }
    let h = config.window.half();
    let mut hit = vec![false; cells];
    for i in 0..config.len() {
        let p = config.point(i);
        let mut idx = 0usize;
        let mut inside = true;
        for &c in p.iter().rev() {
            let j = ((c + h) / s).floor();
            if j < 0.0 || j >= m as f64 {
                inside = false;
                break;
            }
            idx = idx * m + j as usize;
        }
        if inside {
            hit[idx] = true;
        }
    }
    hit.iter().all(|&x| x)
}

fn evaluate(stat: &Statistic, config: &PointConfiguration, r: f64) -> Result<f64> {
    let cat = PatternCatalog::default();
    let v = match stat {
        Statistic::Subgraphs { pattern } => {
            let p = cat.get(pattern)?;
            if p.k == 1 {
                config.len() as u64
            } else if r == 0.0 {
                0
            } else {
                count_subgraphs_in(&build_graph(config, r, false)?, &p, |_| true)
            }
        }
        Statistic::Components { pattern } | Statistic::IsolatedComponents { pattern } => {
            let p = cat.get(pattern)?;
            let ambient = matches!(stat, Statistic::IsolatedComponents { .. });
            if r == 0.0 {
                if p.k == 1 { config.len() as u64 } else { 0 }
            } else {
                count_components_in(&build_graph(config, r, ambient)?, &p)
            }
        }
        Statistic::Subcomplexes { pattern, isolated, mode } => {
            count_subcomplexes(config, r, &complex_pattern(pattern)?, *isolated, *mode)?
        }
        Statistic::Betti { kind, k } => {
            if r == 0.0 {
                if *k == 0 { config.len() as u64 } else { 0 }
            } else if *k == 0 {
                connected_components(&build_graph(config, r, false)?).len() as u64
            } else {
                let c = match kind {
                    ComplexKind::Rips => build_rips(config, r, k + 1)?,
                    ComplexKind::Cech => build_cech(config, r, k + 1)?,
                };
                betti_numbers(&c)?.get(*k) as u64
            }
        }
        Statistic::CriticalPoints { k } => {
            if r == 0.0 {
                if *k == 0 { config.len() as u64 } else { 0 }
            } else {
                let cp = critical_points(config, r, *k, Mode::InteriorOnly)?;
                if cp.degenerate > 0 {
                    return Err(Error::Degenerate(format!("{} degenerate subsets", cp.degenerate)));
                }
                cp.counts[*k]
            }
        }
        Statistic::Euler => {
            if r == 0.0 {
                return Ok(config.len() as f64);
            }
            let cp = critical_points(config, r, config.dim, Mode::InteriorOnly)?;
            if cp.degenerate > 0 {
                return Err(Error::Degenerate(format!("{} degenerate subsets", cp.degenerate)));
            }
            return Ok(cp.euler() as f64);
        }
        Statistic::Coverage => return Ok(cubes_covered(config, r) as u8 as f64),
    };
    Ok(v as f64)
}

/// Per-replicate values for every (n, r, statistic). Replicate i at grid
/// point j uses the sampler seed derive_seed(derive_seed(seed, j), i).
pub fn run_cells(plan: &ExperimentPlan) -> Result<Vec<Cell>> {
    plan.validate()?;
    let mut cells = Vec::new();
    // one sample per replicate and window size, shared by every radius and statistic
    for (j, &n) in plan.n.iter().enumerate() {
        let radii = plan.radius.radii(n, plan.dim);
        let window = Window::new(plan.dim, n)?;
        let mut margin = 0.0f64;
        for &r in &radii {
            margin = margin.max(plan.margin(r)?);
        }
        let grid_seed = par::derive_seed(plan.seed, j as u64);
        let reps: Vec<Result<Vec<Result<f64>>>> = par::map(plan.replicates, |i| {
            let cfg = sample(&plan.model, window, margin, par::derive_seed(grid_seed, i as u64))?;
            let mut out = Vec::with_capacity(radii.len() * plan.statistics.len());
            for &r in &radii {
                out.extend(plan.statistics.iter().map(|s| evaluate(s, &cfg, r)));
            }
            Ok(out)
        });
        let mut block: Vec<Cell> = Vec::new();
        for &r in &radii {
            block.extend(plan.statistics.iter().map(|s| Cell {
                statistic: s.id(),
                n,
                r,
                values: Vec::new(),
                excluded: 0,
                indicator: s.indicator(),
            }));
        }
        for (i, rep) in reps.into_iter().enumerate() {
            for (cell, v) in block.iter_mut().zip(rep?) {
                match v {
                    Ok(x) => cell.values.push(if plan.per_point && n > 0.0 && !cell.indicator { x / n } else { x }),
                    Err(e) if excludable(&e) => {
                        warn!("{} at n = {n}, r = {}: replicate {i} excluded: {e}", cell.statistic, cell.r);
                        cell.excluded += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        for cell in &block {
            if cell.excluded as f64 > EXCLUSION_CAP * plan.replicates as f64 {
                return Err(Error::Excluded { excluded: cell.excluded, total: plan.replicates });
            }
        }
        info!("n = {n}: {} cells over {} replicates", block.len(), plan.replicates);
        cells.extend(block);
    }
    Ok(cells)
}

pub fn run(plan: &ExperimentPlan) -> Result<Vec<EstimateRecord>> {
    let name = plan.model.name();
    Ok(run_cells(plan)?.iter().map(|c| c.record(&name, plan.seed)).collect())
}

pub fn records_csv(records: &[EstimateRecord]) -> String {
    let mut s = String::from(EstimateRecord::CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioPoint {
    pub statistic: String,
    pub n: f64,
    pub r: f64,
    pub mean: f64,
    pub variance: f64,
    /// Var/Mean, None when the mean is 0.
    pub ratio: Option<f64>,
    pub ci: Option<(f64, f64)>,
}

/// Var/Mean per grid point with percentile bootstrap intervals.
pub fn variance_ratio(plan: &ExperimentPlan, resamples: usize) -> Result<(Vec<RatioPoint>, Vec<Cell>)> {
    let cells = run_cells(plan)?;
    let mut rng = par::stream(plan.seed, u64::MAX);
    let pts = cells
        .iter()
        .map(|c| {
            let (mean, variance) = mean_var(&c.values);
            let ratio = (mean > 0.0).then(|| variance / mean);
            let ci = ratio.map(|_| bootstrap_ci(&c.values, dispersion, resamples, &mut rng));
            RatioPoint { statistic: c.statistic.clone(), n: c.n, r: c.r, mean, variance, ratio, ci }
        })
        .collect();
    Ok((pts, cells))
}

fn dispersion(xs: &[f64]) -> f64 {
    let (m, v) = mean_var(xs);
    if m > 0.0 { v / m } else { f64::NAN }
}

/// Theil–Sen slope of the Var/Mean ratio against ln n, with a bootstrap
/// interval that resamples replicates within each cell.
pub fn ratio_trend(cells: &[Cell], resamples: usize, seed: u64) -> (f64, f64, f64) {
    let xs: Vec<f64> = cells.iter().map(|c| c.n.ln()).collect();
    let ys: Vec<f64> = cells.iter().map(|c| dispersion(&c.values)).collect();
    let slope = theil_sen(&xs, &ys);
    let mut rng = par::stream(seed, 0);
    let mut boot = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let ys: Vec<f64> = cells
            .iter()
            .map(|c| {
                let v: Vec<f64> = (0..c.values.len()).map(|_| c.values[rng.gen_range(0..c.values.len())]).collect();
                dispersion(&v)
            })
            .collect();
        let s = theil_sen(&xs, &ys);
        if s.is_finite() {
            boot.push(s);
        }
    }
    boot.sort_by(|a, b| a.total_cmp(b));
    if boot.is_empty() {
        return (slope, f64::NAN, f64::NAN);
    }
    (slope, crate::stats::quantile_sorted(&boot, 0.025), crate::stats::quantile_sorted(&boot, 0.975))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub model: String,
    pub n: f64,
    pub r: f64,
    /// All r/(4√d)-cubes inside the window occupied.
    pub coverage: EstimateRecord,
    /// Čech complex at ε = r has β₀ = 1, β_k = 0 for k ≥ 1, χ = 1.
    pub contractible: EstimateRecord,
    /// Both at once.
    pub joint: EstimateRecord,
}

/// Homology of the Čech complex at ε = r: (β₀, χ, higher Betti all zero).
/// In the plane β₀ comes from the graph and χ from the Morse count at
/// radius r/2; β₁ = β₀ − χ and β_k = 0 for k ≥ 2 (nerve of planar disks).
fn cech_summary(config: &PointConfiguration, r: f64) -> Result<(i64, i64, bool)> {
    if config.is_empty() {
        return Ok((0, 0, true));
    }
    if r == 0.0 {
        let n = config.len() as i64;
        return Ok((n, n, true));
    }
    if config.dim == 2 {
        let b0 = planar_components(config, r)? as i64;
        let cp = critical_points(config, r / 2.0, 2, Mode::InteriorOnly)?;
        if cp.degenerate > 0 {
            return Err(Error::Degenerate(format!("{} degenerate subsets", cp.degenerate)));
        }
        let chi = cp.euler();
        return Ok((b0, chi, b0 - chi == 0));
    }
    let b0 = connected_components(&build_graph(config, r, false)?).len() as i64;
    let c = build_cech(config, r, config.dim)?;
    let b = betti_numbers(&c)?;
    let chi: i64 = (0..config.dim).map(|k| if k % 2 == 0 { b.get(k) as i64 } else { -(b.get(k) as i64) }).sum();
    Ok((b0, chi, (1..config.dim).all(|k| b.get(k) == 0)))
}

pub fn coverage_experiment(model: &ModelSpec, dim: usize, n: f64, r: f64, replicates: usize, seed: u64) -> Result<CoverageReport> {
    model.validate(dim)?;
    if replicates == 0 {
        return Err(Error::Invalid("replicates must be >= 1".into()));
    }
    let window = Window::new(dim, n)?;
    let outcomes: Vec<Result<(bool, bool)>> = par::map(replicates, |i| {
        let cfg = sample(model, window, 0.0, par::derive_seed(seed, i as u64))?;
        let cov = cubes_covered(&cfg, r);
        let (b0, chi, higher_zero) = cech_summary(&cfg, r)?;
        Ok((cov, b0 == 1 && chi == 1 && higher_zero))
    });
    let mut cov = 0;
    let mut con = 0;
    let mut both = 0;
    let mut total = 0;
    let mut excluded = 0;
    for o in outcomes {
        match o {
            Ok((a, b)) => {
                total += 1;
                cov += a as usize;
                con += b as usize;
                both += (a && b) as usize;
            }
            Err(e) if excludable(&e) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    if excluded as f64 > EXCLUSION_CAP * replicates as f64 {
        return Err(Error::Excluded { excluded, total: replicates });
    }
    let name = model.name();
    let rec = |s: &str, h| {
        let mut e = EstimateRecord::from_indicators(s, &name, n, r, h, total, seed);
        e.replicates = replicates;
        e
    };
    Ok(CoverageReport {
        model: name.clone(),
        n,
        r,
        coverage: rec("coverage", cov),
        contractible: rec("contractible", con),
        joint: rec("coverage_and_contractible", both),
    })
}

/// Smallest c with the union bound m·exp(−s^d) ≤ 1 − target, where
/// s = r/(4√d), r = c (ln n)^{1/d} and m = ⌈n^{1/d}/s⌉^d cubes.
pub fn calibrate_coverage_constant(dim: usize, n: f64, target: f64) -> f64 {
    let bound = |c: f64| {
        let r = c * n.ln().powf(1.0 / dim as f64);
        let s = r / (4.0 * (dim as f64).sqrt());
        let m = (n.powf(1.0 / dim as f64) / s).ceil().powi(dim as i32);
        m * (-s.powi(dim as i32)).exp()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while bound(hi) > 1.0 - target {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) > 1.0 - target { lo = mid } else { hi = mid }
    }
    hi
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarSummary {
    pub model: String,
    pub replicates: usize,
    pub mean_count: f64,
    /// Replicate-level mean H₁ birth, averaged, with a 95% half-width.
    pub mean_birth: f64,
    pub birth_half_width: f64,
    pub mean_death: f64,
    pub death_half_width: f64,
    #[serde(skip)]
    pub svg: String,
}

/// Rips filtrations up to `eps_max` per replicate; H₁ bars summarized per
/// model. Replicates without H₁ bars do not enter the birth/death means.
pub fn barcode_comparison(
    models: &[ModelSpec],
    n: f64,
    max_dim: usize,
    eps_max: f64,
    replicates: usize,
    seed: u64,
) -> Result<Vec<BarSummary>> {
    if replicates == 0 {
        return Err(Error::Invalid("replicates must be >= 1".into()));
    }
    let window = Window::new(2, n)?;
    let mut out = Vec::new();
    for (mi, model) in models.iter().enumerate() {
        model.validate(2)?;
        let ms = par::derive_seed(seed, mi as u64);
        let codes: Vec<Result<Barcode>> = par::map(replicates, |i| {
            let cfg = sample(model, window, 0.0, par::derive_seed(ms, i as u64))?;
            persistence(&rips_filtration(&cfg, max_dim.max(2), eps_max)?)
        });
        let codes = codes.into_iter().collect::<Result<Vec<_>>>()?;
        let mut counts = Vec::new();
        let mut births = Vec::new();
        let mut deaths = Vec::new();
        for c in &codes {
            let h1: Vec<_> = c.in_dim(1).collect();
            counts.push(h1.len() as f64);
            if !h1.is_empty() {
                births.push(h1.iter().map(|b| b.birth).sum::<f64>() / h1.len() as f64);
            }
            let fin: Vec<f64> = h1.iter().filter(|b| b.death.is_finite()).map(|b| b.death).collect();
            if !fin.is_empty() {
                deaths.push(fin.iter().sum::<f64>() / fin.len() as f64);
            }
        }
        let hw = |xs: &[f64]| {
            let (m, v) = mean_var(xs);
            (m, if xs.len() >= 2 { Z95 * (v / xs.len() as f64).sqrt() } else { 0.0 })
        };
        let (mb, hb) = hw(&births);
        let (md, hd) = hw(&deaths);
        let title = format!("{} H1, n = {n}", model.name());
        out.push(BarSummary {
            model: model.name(),
            replicates,
            mean_count: mean_var(&counts).0,
            mean_birth: mb,
            birth_half_width: hb,
            mean_death: md,
            death_half_width: hd,
            svg: codes[0].to_svg(&title),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerSeries {
    pub records: Vec<EstimateRecord>,
    /// 1 + Σ (−1)^k ν_k with its standard error, in the thermodynamic regime.
    pub limit: Option<(f64, f64)>,
}

/// χ/n along the n grid of `plan` (statistic and normalization are set
/// here); in the thermodynamic regime also the integral limit.
pub fn euler_convergence(plan: &ExperimentPlan, limit_samples: usize) -> Result<EulerSeries> {
    let mut p = plan.clone();
    p.statistics = vec![Statistic::Euler];
    p.per_point = true;
    let records = run(&p)?;
    let limit = match (&p.radius, p.regime) {
        (RadiusRule::Thermodynamic { beta }, Regime::Thermodynamic) => Some(euler_limit(&p.model, p.dim, *beta, limit_samples, p.seed)?),
        _ => None,
    };
    Ok(EulerSeries { records, limit })
}

/// 1 + Σ_{k=1}^d (−1)^k ν_k(β).
pub fn euler_limit(model: &ModelSpec, dim: usize, beta: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let mut v = 1.0;
    let mut var = 0.0;
    for k in 1..=dim {
        let c = nu_k(model, dim, beta, k, samples, par::derive_seed(seed, k as u64))?;
        v += if k % 2 == 0 { c.estimate } else { -c.estimate };
        var += c.se * c.se;
    }
    Ok((v, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(stat: Statistic) -> ExperimentPlan {
        ExperimentPlan {
            model: ModelSpec::Poisson,
            dim: 2,
            regime: Regime::Sparse,
            radius: RadiusRule::Explicit { values: vec![0.3] },
            n: vec![100.0],
            statistics: vec![stat],
            replicates: 4,
            seed: 9,
            per_point: false,
        }
    }

    #[test]
    fn zero_replicates_rejected() {
        let mut p = plan(Statistic::Euler);
        p.replicates = 0;
        assert!(run(&p).is_err());
    }

    #[test]
    fn rule_must_match_regime() {
        let mut p = plan(Statistic::Euler);
        p.radius = RadiusRule::Thermodynamic { beta: 1.0 };
        assert!(p.validate().is_err());
        p.regime = Regime::Thermodynamic;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn deterministic() {
        let p = plan(Statistic::Subgraphs { pattern: "edge".into() });
        assert_eq!(records_csv(&run(&p).unwrap()), records_csv(&run(&p).unwrap()));
    }

    #[test]
    fn coverage_edge_cases() {
        let huge = 2f64.sqrt() * 10.0;
        let rep = coverage_experiment(&ModelSpec::Poisson, 2, 100.0, huge, 10, 1).unwrap();
        assert_eq!(rep.coverage.mean, 1.0);
        let rep = coverage_experiment(&ModelSpec::Poisson, 2, 100.0, 0.0, 10, 1).unwrap();
        assert_eq!(rep.coverage.mean, 0.0);
    }

    #[test]
    fn complex_pattern_names() {
        assert_eq!(complex_pattern("empty_simplex_3").unwrap().k, 3);
        assert_eq!(complex_pattern("empty_simplex_path_3").unwrap().k, 4);
        assert!(complex_pattern("nonsense").is_err());
    }

    #[test]
    fn calibration_is_monotone_in_target() {
        let a = calibrate_coverage_constant(2, 1e4, 0.9);
        let b = calibrate_coverage_constant(2, 1e4, 0.99);
        assert!(a < b && b < 16.0 * 2f64.sqrt());
    }
}
