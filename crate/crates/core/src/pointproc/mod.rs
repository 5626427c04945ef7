//! Point-process samplers, joint intensities, and void/Palm estimators.
//!
//! All models are normalized to unit Lebesgue intensity. Configurations keep
//! the window points first and the ambient margin points after them, so the
//! restriction to the window is a prefix slice.

mod gef;
mod ginibre;
mod lattice;

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::stats::EstimateRecord;

pub use ginibre::{ginibre_matrix_size, kostlan_void_probability};
pub use lattice::Replication;

/// Cube [−L/2, L/2]^d of volume n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub dim: usize,
    pub volume: f64,
}

impl Window {
    pub fn new(dim: usize, volume: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("window dimension must be positive".into()));
        }
        if !(volume >= 0.0) || !volume.is_finite() {
            return Err(Error::Invalid(format!("window volume {volume}")));
        }
        Ok(Window { dim, volume })
    }

    pub fn side(&self) -> f64 {
        if self.volume == 0.0 {
            0.0
        } else {
            self.volume.powf(1.0 / self.dim as f64)
        }
    }

    pub fn half(&self) -> f64 {
        0.5 * self.side()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let h = self.half();
        x.iter().all(|&c| c >= -h && c <= h)
    }

    /// Membership in the window inflated by `margin` on every side.
    pub fn contains_inflated(&self, x: &[f64], margin: f64) -> bool {
        let h = self.half() + margin;
        x.iter().all(|&c| c >= -h && c <= h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Poisson,
    PerturbedLattice {
        replication: Replication,
        /// Uniform shift of the lattice origin in [0,1)^d per sample, which
        /// makes the process stationary rather than only Z^d-stationary.
        #[serde(default = "default_true")]
        origin_shift: bool,
    },
    Ginibre,
    GefZeros,
    CoxCluster {
        beta: f64,
    },
}

fn default_true() -> bool {
    true
}

impl ModelSpec {
    pub fn lattice(replication: Replication) -> Self {
        ModelSpec::PerturbedLattice { replication, origin_shift: true }
    }

    pub fn name(&self) -> String {
        match self {
            ModelSpec::Poisson => "poisson".into(),
            ModelSpec::PerturbedLattice { replication, origin_shift } => {
                let s = if *origin_shift { "" } else { "-fixed" };
                format!("lattice-{}{}", replication.name(), s)
            }
            ModelSpec::Ginibre => "ginibre".into(),
            ModelSpec::GefZeros => "gef".into(),
            ModelSpec::CoxCluster { beta } => format!("cox(beta={beta})"),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ModelSpec::Ginibre | ModelSpec::GefZeros if dim != 2 => Err(Error::Dimension(
                format!("{} requires d = 2, got d = {dim}", self.name()),
            )),
            ModelSpec::PerturbedLattice { replication, .. } => replication.validate(),
            ModelSpec::CoxCluster { beta } if !(*beta > 0.0) => {
                Err(Error::Invalid(format!("cox beta must be positive, got {beta}")))
            }
            _ => Ok(()),
        }
    }
}

/// A sampled finite configuration Φ_n plus ambient points within the margin.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    pub dim: usize,
    coords: Vec<f64>,
    interior: usize,
    pub window: Window,
    pub margin: f64,
    pub model: ModelSpec,
    pub seed: u64,
}

impl PointConfiguration {
    /// Build from flat coordinates. Points must lie in the inflated window;
    /// coincident points are separated by 1e−12 with a warning.
    pub fn new(
        window: Window,
        margin: f64,
        model: ModelSpec,
        seed: u64,
        coords: Vec<f64>,
    ) -> Result<Self> {
        let dim = window.dim;
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::Dimension(format!(
                "{} coordinates is not a multiple of d = {dim}",
                coords.len()
            )));
        }
        if !(margin >= 0.0) {
            return Err(Error::Invalid(format!("negative margin {margin}")));
        }
        for p in coords.chunks(dim) {
            if !window.contains_inflated(p, margin) {
                return Err(Error::Geometry(format!("point {p:?} outside the inflated window")));
            }
        }
        let mut coords = coords;
        separate_duplicates(dim, &mut coords);
        let mut inner = Vec::with_capacity(coords.len());
        let mut outer = Vec::new();
        for p in coords.chunks(dim) {
            if window.contains(p) {
                inner.extend_from_slice(p);
            } else {
                outer.extend_from_slice(p);
            }
        }
        let interior = inner.len() / dim;
        inner.extend_from_slice(&outer);
        Ok(PointConfiguration { dim, coords: inner, interior, window, margin, model, seed })
    }

    /// Keep only the points inside the inflated window, then build.
    fn from_sampled(
        window: Window,
        margin: f64,
        model: ModelSpec,
        seed: u64,
        coords: Vec<f64>,
    ) -> Result<Self> {
        let dim = window.dim;
        let kept: Vec<f64> = coords
            .chunks(dim)
            .filter(|p| window.contains_inflated(p, margin))
            .flatten()
            .copied()
            .collect();
        Self::new(window, margin, model, seed, kept)
    }

    /// Hand-made configuration: every point lies in a window just large
    /// enough to hold all of them; no margin.
    pub fn fixture(dim: usize, points: &[Vec<f64>]) -> Self {
        let ext = points
            .iter()
            .flatten()
            .fold(0.0f64, |m, c| m.max(c.abs()));
        let side = 2.0 * ext + 2.0;
        let window = Window { dim, volume: side.powi(dim as i32) };
        let coords = points.iter().flatten().copied().collect();
        Self::new(window, 0.0, ModelSpec::Poisson, 0, coords).expect("fixture points fit")
    }

    pub fn len(&self) -> usize {
        self.interior
    }

    pub fn is_empty(&self) -> bool {
        self.interior == 0
    }

    pub fn total_len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Window points only (Φ_n).
    pub fn interior_coords(&self) -> &[f64] {
        &self.coords[..self.interior * self.dim]
    }

    /// Window and margin points.
    pub fn all_coords(&self) -> &[f64] {
        &self.coords
    }

    /// Number of points visible under the chosen mode.
    pub fn visible(&self, ambient: bool) -> usize {
        if ambient { self.total_len() } else { self.interior }
    }

    pub fn require_margin(&self, needed: f64) -> Result<()> {
        if self.margin + 1e-12 < needed {
            Err(Error::Margin { needed, have: self.margin })
        } else {
            Ok(())
        }
    }

    /// Centered sub-window restriction: points of this configuration in the
    /// window of volume `volume` inflated by `margin`.
    pub fn restrict(&self, volume: f64, margin: f64) -> Result<Self> {
        let window = Window::new(self.dim, volume)?;
        if window.half() + margin > self.window.half() + self.margin + 1e-12 {
            return Err(Error::Geometry("restriction exceeds the sampled domain".into()));
        }
        let kept = self
            .coords
            .chunks(self.dim)
            .filter(|p| window.contains_inflated(p, margin))
            .flatten()
            .copied()
            .collect();
        Self::new(window, margin, self.model.clone(), self.seed, kept)
    }

    pub fn to_csv(&self, include_margin: bool) -> String {
        let mut s = (0..self.dim).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",");
        s.push('\n');
        let n = if include_margin { self.total_len() } else { self.interior };
        for i in 0..n {
            let row: Vec<String> = self.point(i).iter().map(|&c| crate::stats::fmt17(c)).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

fn separate_duplicates(dim: usize, coords: &mut [f64]) {
    let n = coords.len() / dim;
    loop {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            let pa = &coords[a * dim..(a + 1) * dim];
            let pb = &coords[b * dim..(b + 1) * dim];
            pa.iter().zip(pb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut moved = false;
        for w in idx.windows(2) {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            if coords[a * dim..(a + 1) * dim] == coords[b * dim..(b + 1) * dim] {
                warn!("duplicate point {b} perturbed by 1e-12");
                coords[b * dim] += 1e-12;
                moved = true;
            }
        }
        if !moved {
            return;
        }
    }
}

/// Sample `model` on `window` inflated by `margin`.
pub fn sample(model: &ModelSpec, window: Window, margin: f64, seed: u64) -> Result<PointConfiguration> {
    model.validate(window.dim)?;
    if !(margin >= 0.0) {
        return Err(Error::Invalid(format!("negative margin {margin}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = window.dim;
    let h = window.half() + margin;
    let coords = match model {
        ModelSpec::Poisson => poisson_box(d, h, 1.0, &mut rng),
        ModelSpec::PerturbedLattice { replication, origin_shift } => {
            lattice::sample(d, h, replication, *origin_shift, &mut rng)
        }
        ModelSpec::Ginibre => ginibre::sample(h, &mut rng)?,
        ModelSpec::GefZeros => gef::sample(h, &mut rng)?,
        ModelSpec::CoxCluster { beta } => cox(d, h, *beta, &mut rng),
    };
    PointConfiguration::from_sampled(window, margin, model.clone(), seed, coords)
}

/// Homogeneous Poisson points of the given intensity in [−h, h]^d.
fn poisson_box<R: Rng>(d: usize, h: f64, intensity: f64, rng: &mut R) -> Vec<f64> {
    let mean = intensity * (2.0 * h).powi(d as i32);
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("positive mean").sample(rng) as usize;
    (0..count * d).map(|_| rng.gen_range(-h..h)).collect()
}

/// Parents at intensity 1/4, each replaced by 4 uniform points in the ball
/// of radius β^{1/d}/2 around it, so the cluster process has unit intensity.
fn cox<R: Rng>(d: usize, h: f64, beta: f64, rng: &mut R) -> Vec<f64> {
    let rad = 0.5 * beta.powf(1.0 / d as f64);
    let parents = poisson_box(d, h + rad, 0.25, rng);
    let mut out = Vec::with_capacity(parents.len() * 4);
    for p in parents.chunks(d) {
        for _ in 0..4 {
            let u = uniform_ball(d, rng);
            out.extend(p.iter().zip(&u).map(|(c, x)| c + rad * x));
        }
    }
    out
}

/// Uniform point in the unit ball by rejection from the cube.
pub(crate) fn uniform_ball<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return v;
        }
    }
}

/// Volume of the unit ball in R^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Ginibre kernel in unit-intensity coordinates:
/// K(x, y) = exp(π x ȳ − π(|x|² + |y|²)/2).
pub fn ginibre_kernel(x: Complex64, y: Complex64) -> Complex64 {
    (PI * x * y.conj() - 0.5 * PI * (x.norm_sqr() + y.norm_sqr())).exp()
}

/// k-th joint intensity ρ^{(k)}(x₁,…,x_k).
pub fn joint_intensity(model: &ModelSpec, points: &[Vec<f64>]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Invalid("joint intensity needs k >= 1 points".into()));
    }
    match model {
        ModelSpec::Poisson => Ok(1.0),
        ModelSpec::Ginibre => {
            if points.iter().any(|p| p.len() != 2) {
                return Err(Error::Dimension("Ginibre points are planar".into()));
            }
            let zs: Vec<Complex64> = points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
            for i in 0..zs.len() {
                for j in i + 1..zs.len() {
                    if zs[i] == zs[j] {
                        return Ok(0.0);
                    }
                }
            }
            let k = zs.len();
            let mut m: Vec<Complex64> = Vec::with_capacity(k * k);
            for i in 0..k {
                for j in 0..k {
                    m.push(ginibre_kernel(zs[i], zs[j]));
                }
            }
            Ok(complex_det(k, &mut m).re.max(0.0))
        }
        other => Err(Error::IntensityUnavailable(other.name())),
    }
}

/// Determinant by Gaussian elimination with partial pivoting; destroys `m`.
pub(crate) fn complex_det(k: usize, m: &mut [Complex64]) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for c in 0..k {
        let p = (c..k)
            .max_by(|&a, &b| m[a * k + c].norm().total_cmp(&m[b * k + c].norm()))
            .unwrap();
        if m[p * k + c].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != c {
            for j in 0..k {
                m.swap(p * k + j, c * k + j);
            }
            det = -det;
        }
        let piv = m[c * k + c];
        det *= piv;
        for r in c + 1..k {
            let f = m[r * k + c] / piv;
            for j in c..k {
                let t = m[c * k + j];
                m[r * k + j] -= f * t;
            }
        }
    }
    det
}

/// Closed ball region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    fn inside(&self, window: &Window, margin: f64) -> bool {
        let h = window.half() + margin;
        self.center.iter().all(|&c| c - self.radius >= -h && c + self.radius <= h)
    }

    fn count(&self, cfg: &PointConfiguration) -> usize {
        let r2 = self.radius * self.radius;
        cfg.all_coords()
            .chunks(cfg.dim)
            .filter(|p| dist2(p, &self.center) <= r2)
            .count()
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Void probability of a ball, with a Wilson interval.
pub fn estimate_void(
    model: &ModelSpec,
    window: Window,
    region: &Ball,
    replicates: usize,
    seed: u64,
) -> Result<EstimateRecord> {
    if replicates == 0 {
        return Err(Error::Invalid("replicates must be >= 1".into()));
    }
    if region.center.len() != window.dim {
        return Err(Error::Dimension("region center dimension".into()));
    }
    if !region.inside(&window, 0.0) {
        return Err(Error::Geometry("void region escapes the sampled window".into()));
    }
    let stat = format!("void(r={})", region.radius);
    if region.radius == 0.0 {
        return Ok(EstimateRecord::from_indicators(&stat, &model.name(), window.volume, 0.0, replicates, replicates, seed));
    }
    let hits: Vec<Result<bool>> = par::map(replicates, |i| {
        let cfg = sample(model, window, 0.0, par::derive_seed(seed, i as u64))?;
        Ok(region.count(&cfg) == 0)
    });
    let mut h = 0;
    for x in hits {
        if x? {
            h += 1;
        }
    }
    Ok(EstimateRecord::from_indicators(&stat, &model.name(), window.volume, region.radius, h, replicates, seed))
}

/// Monotone statistics over regions disjoint from the anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionFunctional {
    /// Points in the annulus r_in < |x − c| ≤ r_out. Increasing.
    CountAnnulus { center: Vec<f64>, r_in: f64, r_out: f64 },
    /// Points in a closed ball. Increasing.
    CountBall { center: Vec<f64>, radius: f64 },
    /// Indicator of at least `threshold` points in a closed ball. Increasing.
    AtLeast { center: Vec<f64>, radius: f64, threshold: usize },
    /// Indicator that a closed ball is empty. Decreasing.
    Void { center: Vec<f64>, radius: f64 },
}

impl RegionFunctional {
    pub fn evaluate(&self, cfg: &PointConfiguration) -> f64 {
        let count_ball = |c: &[f64], r: f64| {
            let r2 = r * r;
            cfg.all_coords().chunks(cfg.dim).filter(|p| dist2(p, c) <= r2).count()
        };
        match self {
            RegionFunctional::CountAnnulus { center, r_in, r_out } => {
                let (a, b) = (r_in * r_in, r_out * r_out);
                cfg.all_coords()
                    .chunks(cfg.dim)
                    .filter(|p| {
                        let q = dist2(p, center);
                        q > a && q <= b
                    })
                    .count() as f64
            }
            RegionFunctional::CountBall { center, radius } => count_ball(center, *radius) as f64,
            RegionFunctional::AtLeast { center, radius, threshold } => {
                (count_ball(center, *radius) >= *threshold) as u8 as f64
            }
            RegionFunctional::Void { center, radius } => (count_ball(center, *radius) == 0) as u8 as f64,
        }
    }

    /// Outer extent (center, radius) of the region.
    fn extent(&self) -> (&[f64], f64) {
        match self {
            RegionFunctional::CountAnnulus { center, r_out, .. } => (center, *r_out),
            RegionFunctional::CountBall { center, radius }
            | RegionFunctional::AtLeast { center, radius, .. }
            | RegionFunctional::Void { center, radius } => (center, *radius),
        }
    }

    fn disjoint_from_ball(&self, x: &[f64], eps: f64) -> bool {
        let (c, r) = self.extent();
        let d = dist2(c, x).sqrt();
        match self {
            RegionFunctional::CountAnnulus { r_in, .. } => d + eps < *r_in || d - eps > r,
            _ => d - eps > r,
        }
    }
}

/// Rejection estimate of a reduced Palm expectation: the functional is
/// averaged over replicates in which every ε-ball around an anchor holds at
/// least one point. `accepted` on the record is the acceptance count.
pub fn estimate_palm_functional(
    model: &ModelSpec,
    window: Window,
    anchors: &[Vec<f64>],
    eps: f64,
    functional: &RegionFunctional,
    replicates: usize,
    seed: u64,
) -> Result<EstimateRecord> {
    if !(eps > 0.0) {
        return Err(Error::Invalid("eps must be positive".into()));
    }
    for (i, a) in anchors.iter().enumerate() {
        if a.len() != window.dim {
            return Err(Error::Dimension("anchor dimension".into()));
        }
        if anchors[..i].iter().any(|b| b == a) {
            return Err(Error::Invalid("anchors must be distinct".into()));
        }
        if !functional.disjoint_from_ball(a, eps) {
            return Err(Error::Geometry(format!("functional region meets the eps-ball of anchor {a:?}")));
        }
    }
    let (c, r) = functional.extent();
    let region = Ball { center: c.to_vec(), radius: r };
    if !region.inside(&window, 0.0) {
        return Err(Error::Geometry("functional region escapes the sampled window".into()));
    }
    let vals: Vec<Result<Option<f64>>> = par::map(replicates, |i| {
        let cfg = sample(model, window, 0.0, par::derive_seed(seed, i as u64))?;
        let ok = anchors.iter().all(|a| Ball { center: a.clone(), radius: eps }.count(&cfg) >= 1);
        Ok(ok.then(|| functional.evaluate(&cfg)))
    });
    let mut xs = Vec::new();
    for v in vals {
        if let Some(x) = v? {
            xs.push(x);
        }
    }
    if xs.is_empty() {
        return Err(Error::Starvation { accepted: 0, replicates });
    }
    let mut rec = EstimateRecord::from_samples("palm", &model.name(), window.volume, eps, &xs, seed);
    if let RegionFunctional::Void { .. } | RegionFunctional::AtLeast { .. } = functional {
        let hits = xs.iter().filter(|&&x| x > 0.5).count();
        let (lo, hi) = crate::stats::wilson(hits, xs.len());
        rec.ci_low = lo;
        rec.ci_high = hi;
    }
    rec.accepted = xs.len();
    rec.replicates = replicates;
    Ok(rec)
}

/// Unconditional mean of a functional, from the same sampler.
pub fn estimate_functional(
    model: &ModelSpec,
    window: Window,
    functional: &RegionFunctional,
    replicates: usize,
    seed: u64,
) -> Result<EstimateRecord> {
    let vals: Vec<Result<f64>> = par::map(replicates, |i| {
        let cfg = sample(model, window, 0.0, par::derive_seed(seed, i as u64))?;
        Ok(functional.evaluate(&cfg))
    });
    let xs = vals.into_iter().collect::<Result<Vec<f64>>>()?;
    let mut rec = EstimateRecord::from_samples("functional", &model.name(), window.volume, 0.0, &xs, seed);
    if let RegionFunctional::Void { .. } | RegionFunctional::AtLeast { .. } = functional {
        let hits = xs.iter().filter(|&&x| x > 0.5).count();
        let (lo, hi) = crate::stats::wilson(hits, xs.len());
        rec.ci_low = lo;
        rec.ci_high = hi;
    }
    Ok(rec)
}
