//! Monte Carlo evaluation of the limit constants μ₀, μ_β, γ_β and ν_k, and
//! log–log fits of scaling exponents.
//!
//! All integrals are over y = (0, y₂, …, y_k) with y_i drawn uniformly from a
//! ball that contains the support of the indicator; the ball volume is put
//! back exactly. Patterns are evaluated at unit radius.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::complexes::{faces_isomorphic, induced_cech_faces, ComplexPattern};
use crate::error::{Error, Result};
use crate::geograph::{masks_isomorphic, point_masks, GraphPattern};
use crate::geometry::circumsphere;
use crate::grid::dist2;
use crate::par;
use crate::pointproc::{joint_intensity, sample, uniform_ball, unit_ball_volume, ModelSpec, Window};
use crate::stats::fmt17;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitConstant {
    pub id: String,
    pub pattern: String,
    pub model: String,
    pub beta: f64,
    pub estimate: f64,
    pub se: f64,
    pub samples: usize,
    pub seed: u64,
}

impl LimitConstant {
    pub const CSV_HEADER: &'static str = "id,pattern,model,beta,estimate,se,samples,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.id,
            self.pattern,
            self.model,
            fmt17(self.beta),
            fmt17(self.estimate),
            fmt17(self.se),
            self.samples,
            self.seed
        )
    }

    pub fn to_csv(rows: &[LimitConstant]) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in rows {
            let _ = writeln!(out, "{}", r.csv_row());
        }
        out
    }
}

/// Graph pattern (h_Γ) or complex pattern (Čech at unit parameter).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LimitPattern {
    Graph(GraphPattern),
    Complex(ComplexPattern),
}

impl LimitPattern {
    pub fn k(&self) -> usize {
        match self {
            LimitPattern::Graph(g) => g.k,
            LimitPattern::Complex(c) => c.k,
        }
    }

    pub fn label(&self) -> String {
        match self {
            LimitPattern::Graph(g) => format!("graph{}e{}", g.k, g.edges.len()),
            LimitPattern::Complex(c) => format!("complex{}f{}", c.k, c.faces.len()),
        }
    }

    /// Indicator at unit radius.
    pub fn indicator(&self, pts: &[&[f64]]) -> Result<bool> {
        Ok(match self {
            LimitPattern::Graph(g) => pts.len() == g.k && masks_isomorphic(&point_masks(pts, 1.0), &g.masks()),
            LimitPattern::Complex(c) => pts.len() == c.k && faces_isomorphic(&induced_cech_faces(pts, 1.0), &c.face_set()?, c.k),
        })
    }
}

/// Mean and standard error over `samples` draws of `f`, run in batches with
/// independent streams; batch sums are merged in index order.
pub fn monte_carlo<F>(samples: usize, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync + Send,
{
    if samples == 0 {
        return (f64::NAN, f64::NAN);
    }
    let batches = samples.clamp(1, 64);
    let parts = par::map(batches, |b| {
        let m = samples / batches + usize::from(b < samples % batches);
        let mut rng = par::stream(seed, b as u64);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..m {
            let v = f(&mut rng);
            s += v;
            s2 += v * v;
        }
        (s, s2)
    });
    let (s, s2) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let n = samples as f64;
    let mean = s / n;
    let var = if samples > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Limit of ρ^{(k)}(r y)/r^{k(k−1)} as r → 0 for the Ginibre process:
/// π^{k(k−1)/2} / Π_{n<k} n! · Π_{i<j} |y_i − y_j|².
pub fn ginibre_g(pts: &[&[f64]]) -> f64 {
    let k = pts.len();
    let mut v = PI.powi((k * (k - 1) / 2) as i32);
    for n in 0..k {
        v /= factorial(n);
    }
    for i in 0..k {
        for j in i + 1..k {
            v *= dist2(pts[i], pts[j]);
        }
    }
    v
}

/// Rescaled correlation g^k of the sparse limit.
fn g_rho(model: &ModelSpec, pts: &[&[f64]]) -> Result<f64> {
    match model {
        ModelSpec::Poisson => Ok(1.0),
        ModelSpec::Ginibre => Ok(ginibre_g(pts)),
        other => Err(Error::IntensityUnavailable(other.name())),
    }
}

/// Draw y₂..y_k uniformly in B₀(rad); the first point is the origin.
fn draw_tuple(rng: &mut ChaCha8Rng, d: usize, k: usize, rad: f64) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; d]];
    for _ in 1..k {
        pts.push(uniform_ball(d, rng).into_iter().map(|x| x * rad).collect());
    }
    pts
}

fn slices(p: &[Vec<f64>]) -> Vec<&[f64]> {
    p.iter().map(|x| x.as_slice()).collect()
}

fn check_model(model: &ModelSpec, dim: usize) -> Result<()> {
    model.validate(dim)
}

/// μ₀ = (1/k!) ∫ h_Γ(y) g^k(y) dy over (B₀(k−1))^{k−1}.
pub fn mu0(pattern: &LimitPattern, model: &ModelSpec, dim: usize, samples: usize, seed: u64) -> Result<LimitConstant> {
    check_model(model, dim)?;
    let k = pattern.k();
    let out = |estimate, se| LimitConstant {
        id: "mu0".into(),
        pattern: pattern.label(),
        model: model.name(),
        beta: 0.0,
        estimate,
        se,
        samples,
        seed,
    };
    g_rho(model, &[&vec![0.0; dim]])?;
    if k == 1 {
        return Ok(out(1.0, 0.0));
    }
    let rad = (k - 1) as f64;
    let vol = (unit_ball_volume(dim) * rad.powi(dim as i32)).powi(k as i32 - 1);
    let scale = vol / factorial(k);
    let (m, se) = monte_carlo(samples, seed, |rng| {
        let pts = draw_tuple(rng, dim, k, rad);
        let s = slices(&pts);
        if pattern.indicator(&s).unwrap_or(false) {
            g_rho(model, &s).unwrap_or(0.0)
        } else {
            0.0
        }
    });
    Ok(out(m * scale, se * scale))
}

/// ρ^{(k)} where available, else an ε-ball estimate
/// P{every B(x_i, ε) occupied} / (ω_d ε^d)^k from one sample.
fn intensity_or_estimate(model: &ModelSpec, pts: &[Vec<f64>], eps: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    match joint_intensity(model, pts) {
        Ok(v) => Ok(v),
        Err(Error::IntensityUnavailable(_)) => {
            let hits = joint_ball_sample(model, pts, eps, None, rng)?;
            let norm = (unit_ball_volume(pts[0].len()) * eps.powi(pts[0].len() as i32)).powi(pts.len() as i32);
            Ok(if hits.occupied { 1.0 / norm } else { 0.0 })
        }
        Err(e) => Err(e),
    }
}

struct JointOutcome {
    /// Every ε-ball holds at least one point.
    occupied: bool,
    /// Every ε-ball holds exactly one point and the void region holds no
    /// other point.
    palm_void: bool,
}

/// The region whose emptiness is tested: a union of balls.
struct VoidRegion {
    centers: Vec<Vec<f64>>,
    radius: f64,
}

impl VoidRegion {
    fn contains(&self, p: &[f64]) -> bool {
        self.centers.iter().any(|c| dist2(c, p) < self.radius * self.radius)
    }

    fn extent(&self) -> f64 {
        self.centers.iter().flat_map(|c| c.iter().map(|x| x.abs())).fold(0.0, f64::max) + self.radius
    }
}

/// One sample of `model` around the anchors: ε-ball occupation and, if a
/// void region is given, the joint Palm-void event.
fn joint_ball_sample(
    model: &ModelSpec,
    anchors: &[Vec<f64>],
    eps: f64,
    void: Option<&VoidRegion>,
    rng: &mut ChaCha8Rng,
) -> Result<JointOutcome> {
    let d = anchors[0].len();
    let ext = anchors.iter().flat_map(|a| a.iter().map(|x| x.abs())).fold(0.0, f64::max) + eps;
    let ext = ext.max(void.map_or(0.0, |v| v.extent()));
    let side = 2.0 * (ext + 0.5);
    let cfg = sample(model, Window::new(d, side.powi(d as i32))?, 0.0, rng.gen())?;
    let mut counts = vec![0usize; anchors.len()];
    let mut stray = false;
    for i in 0..cfg.len() {
        let p = cfg.point(i);
        let mut inside = false;
        for (j, a) in anchors.iter().enumerate() {
            if dist2(a, p) <= eps * eps {
                counts[j] += 1;
                inside = true;
            }
        }
        if !inside && void.is_some_and(|v| v.contains(p)) {
            stray = true;
        }
    }
    Ok(JointOutcome {
        occupied: counts.iter().all(|&c| c >= 1),
        palm_void: !stray && counts.iter().all(|&c| c == 1),
    })
}

/// Indicator that a unit-intensity Poisson sample misses the region, an
/// unbiased estimate of exp(−|region|).
fn poisson_void_indicator(region: &VoidRegion, rng: &mut ChaCha8Rng) -> f64 {
    let d = region.centers[0].len();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for c in &region.centers {
        for i in 0..d {
            lo[i] = lo[i].min(c[i] - region.radius);
            hi[i] = hi[i].max(c[i] + region.radius);
        }
    }
    let vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    if vol <= 0.0 {
        return 1.0;
    }
    let n = Poisson::new(vol).map(|p| p.sample(rng) as usize).unwrap_or(0);
    let mut p = vec![0.0; d];
    for _ in 0..n {
        for i in 0..d {
            p[i] = rng.gen_range(lo[i]..hi[i]);
        }
        if region.contains(&p) {
            return 0.0;
        }
    }
    1.0
}

/// μ_β = β^{k−1}/k! ∫ h_Γ(y) ρ^{(k)}(β^{1/d} y) dy.
pub fn mu_beta(pattern: &LimitPattern, model: &ModelSpec, dim: usize, beta: f64, samples: usize, seed: u64) -> Result<LimitConstant> {
    thermo(pattern, model, dim, beta, samples, seed, false, None)
}

/// γ_β = β^{k−1}/k! ∫ h_Γ(y) ρ^{(k)}(x) P^!_x{Φ(∪ B_{x_i}(β^{1/d})) = 0} dy with
/// x = β^{1/d} y. Poisson uses the exact void indicator; other models the
/// joint ε-ball estimator with ε = 0.05 β^{1/d} unless given.
pub fn gamma_beta(
    pattern: &LimitPattern,
    model: &ModelSpec,
    dim: usize,
    beta: f64,
    samples: usize,
    seed: u64,
    eps: Option<f64>,
) -> Result<LimitConstant> {
    thermo(pattern, model, dim, beta, samples, seed, true, eps)
}

#[allow(clippy::too_many_arguments)]
fn thermo(
    pattern: &LimitPattern,
    model: &ModelSpec,
    dim: usize,
    beta: f64,
    samples: usize,
    seed: u64,
    with_void: bool,
    eps: Option<f64>,
) -> Result<LimitConstant> {
    check_model(model, dim)?;
    if !(beta > 0.0) {
        return Err(Error::Invalid(format!("β must be positive, got {beta}")));
    }
    let k = pattern.k();
    let s = beta.powf(1.0 / dim as f64);
    let eps = eps.unwrap_or(0.05 * s);
    let id = if with_void { "gamma_beta" } else { "mu_beta" };
    let rad = (k.max(2) - 1) as f64;
    let vol = (unit_ball_volume(dim) * rad.powi(dim as i32)).powi(k as i32 - 1);
    let scale = beta.powi(k as i32 - 1) * vol / factorial(k);
    let poisson = *model == ModelSpec::Poisson;
    let err = std::sync::Mutex::new(None);
    let (m, se) = monte_carlo(samples, seed, |rng| {
        let y = draw_tuple(rng, dim, k, rad);
        if k > 1 && !pattern.indicator(&slices(&y)).unwrap_or(false) {
            return 0.0;
        }
        let x: Vec<Vec<f64>> = y.iter().map(|p| p.iter().map(|c| c * s).collect()).collect();
        let res = (|| -> Result<f64> {
            if !with_void {
                return if k == 1 { Ok(1.0) } else { intensity_or_estimate(model, &x, eps, rng) };
            }
            let region = VoidRegion { centers: x.clone(), radius: s };
            if poisson {
                return Ok(poisson_void_indicator(&region, rng));
            }
            let o = joint_ball_sample(model, &x, eps, Some(&region), rng)?;
            let norm = (unit_ball_volume(dim) * eps.powi(dim as i32)).powi(k as i32);
            Ok(if o.palm_void { 1.0 / norm } else { 0.0 })
        })();
        res.unwrap_or_else(|e| {
            *err.lock().unwrap() = Some(e);
            0.0
        })
    });
    if let Some(e) = err.into_inner().unwrap() {
        return Err(e);
    }
    Ok(LimitConstant { id: id.into(), pattern: pattern.label(), model: model.name(), beta, estimate: m * scale, se: se * scale, samples, seed })
}

/// h₁: circumcenter inside the open hull and circumradius ≤ 1.
fn h1(pts: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let s = circumsphere(pts)?;
    (s.radius <= 1.0 && s.bary.iter().all(|&b| b > 1e-9)).then_some((s.center, s.radius))
}

/// ν_k. Sparse (β = 0): 1/(k+1)! ∫ h₁(y) g^{k+1}(y) dy. Thermodynamic:
/// β^k/(k+1)! ∫ h₁(y) ρ^{(k+1)}(x) P^!_x{Φ(B_{C(x)}(β^{1/d} R(y))) = 0} dy.
/// y ranges over (B₀(2))^k since R ≤ 1 keeps every point within 2 of 0.
pub fn nu_k(model: &ModelSpec, dim: usize, beta: f64, k: usize, samples: usize, seed: u64) -> Result<LimitConstant> {
    check_model(model, dim)?;
    if k == 0 || k > dim {
        return Err(Error::Invalid(format!("ν_k needs 1 <= k <= d = {dim}, got {k}")));
    }
    if beta < 0.0 {
        return Err(Error::Invalid(format!("β must be nonnegative, got {beta}")));
    }
    let rad = 2.0f64;
    let vol = (unit_ball_volume(dim) * rad.powi(dim as i32)).powi(k as i32);
    let scale = if beta == 0.0 { 1.0 } else { beta.powi(k as i32) } * vol / factorial(k + 1);
    let s = beta.powf(1.0 / dim as f64);
    let eps = 0.05 * s;
    let ball = unit_ball_volume(dim);
    let poisson = *model == ModelSpec::Poisson;
    if beta == 0.0 {
        g_rho(model, &[&vec![0.0; dim]])?;
    }
    let err = std::sync::Mutex::new(None);
    let (m, se) = monte_carlo(samples, seed, |rng| {
        let y = draw_tuple(rng, dim, k + 1, rad);
        let Some((center, r)) = h1(&slices(&y)) else { return 0.0 };
        if beta == 0.0 {
            return g_rho(model, &slices(&y)).unwrap_or(0.0);
        }
        let x: Vec<Vec<f64>> = y.iter().map(|p| p.iter().map(|c| c * s).collect()).collect();
        let c: Vec<f64> = center.iter().map(|v| v * s).collect();
        if poisson {
            return (-ball * (s * r).powi(dim as i32)).exp();
        }
        let region = VoidRegion { centers: vec![c], radius: s * r };
        match joint_ball_sample(model, &x, eps, Some(&region), rng) {
            Ok(o) => {
                let norm = (ball * eps.powi(dim as i32)).powi(k as i32 + 1);
                if o.palm_void { 1.0 / norm } else { 0.0 }
            }
            Err(e) => {
                *err.lock().unwrap() = Some(e);
                0.0
            }
        }
    });
    if let Some(e) = err.into_inner().unwrap() {
        return Err(e);
    }
    Ok(LimitConstant {
        id: format!("nu_{k}"),
        pattern: format!("index{k}"),
        model: model.name(),
        beta,
        estimate: m * scale,
        se: se * scale,
        samples,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Weighted least squares of ln(estimate) on ln(r), weights (estimate/se)²
/// (delta method). With all SE zero the fit is unweighted and the slope SE
/// comes from the residuals.
pub fn fit_scaling_exponent(series: &[(f64, f64, f64)]) -> Result<ExponentFit> {
    if series.len() < 4 {
        return Err(Error::Invalid(format!("need at least 4 points, got {}", series.len())));
    }
    if let Some(p) = series.iter().find(|p| !(p.1 > 0.0) || !(p.0 > 0.0)) {
        return Err(Error::Invalid(format!("nonpositive value in series: {p:?}")));
    }
    let weighted = series.iter().all(|p| p.2 > 0.0);
    let xs: Vec<f64> = series.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let ws: Vec<f64> = series.iter().map(|p| if weighted { (p.1 / p.2).powi(2) } else { 1.0 }).collect();
    let sw: f64 = ws.iter().sum();
    let xm = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = ws.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = ws.iter().zip(xs.iter().zip(&ys)).map(|(w, (x, y))| w * (x - xm) * (y - ym)).sum();
    if sxx <= 0.0 {
        return Err(Error::Invalid("radii must not all coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let slope_se = if weighted {
        (1.0 / sxx).sqrt()
    } else {
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (rss / (series.len() as f64 - 2.0) / sxx).sqrt()
    };
    Ok(ExponentFit { slope, intercept, slope_se })
}

/// Poisson log-linear fit of total counts: counts_i ~ Poisson(m_i e^{a + b ln r_i})
/// where m_i is the number of replicates. Handles zero totals, which the
/// log–log fit cannot. Newton iterations on the log-likelihood.
pub fn fit_count_exponent(points: &[(f64, f64, f64)]) -> Result<ExponentFit> {
    // (r, total count, replicates)
    if points.len() < 2 {
        return Err(Error::Invalid("need at least 2 radii".into()));
    }
    if points.iter().all(|p| p.1 == 0.0) {
        return Err(Error::Invalid("all counts are zero".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let total: f64 = points.iter().map(|p| p.1).sum();
    let expo: f64 = points.iter().map(|p| p.2).sum();
    let (mut a, mut b) = ((total / expo).ln(), 0.0);
    let mut info = [0.0; 3];
    for _ in 0..100 {
        let (mut ga, mut gb) = (0.0, 0.0);
        info = [0.0; 3];
        for (p, &x) in points.iter().zip(&xs) {
            let mu = p.2 * (a + b * x).exp();
            ga += p.1 - mu;
            gb += (p.1 - mu) * x;
            info[0] += mu;
            info[1] += mu * x;
            info[2] += mu * x * x;
        }
        let det = info[0] * info[2] - info[1] * info[1];
        if det <= 0.0 {
            return Err(Error::Invalid("singular Poisson fit".into()));
        }
        let da = (info[2] * ga - info[1] * gb) / det;
        let db = (info[0] * gb - info[1] * ga) / det;
        a += da;
        b += db;
        if da.abs() + db.abs() < 1e-12 {
            break;
        }
    }
    let det = info[0] * info[2] - info[1] * info[1];
    Ok(ExponentFit { slope: b, intercept: a, slope_se: (info[0] / det).sqrt() })
}
