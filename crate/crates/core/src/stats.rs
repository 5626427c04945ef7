use rand::Rng;
use serde::{Deserialize, Serialize};

pub const Z95: f64 = 1.959_963_984_540_054;

/// One Monte Carlo statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub statistic: String,
    pub model: String,
    pub n: f64,
    pub r: f64,
    pub replicates: usize,
    pub mean: f64,
    pub variance: f64,
    /// Normal-approximation 95% half-width of the mean.
    pub ci_half_width: f64,
    /// Interval actually used for comparisons: the normal interval, or the
    /// Wilson score interval for indicator means.
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    /// Replicates that passed conditioning (Palm estimators) or were not
    /// excluded (experiments).
    pub accepted: usize,
}

impl EstimateRecord {
    pub fn from_samples(
        statistic: &str,
        model: &str,
        n: f64,
        r: f64,
        xs: &[f64],
        seed: u64,
    ) -> Self {
        let (mean, variance) = mean_var(xs);
        let h = if xs.len() >= 2 {
            Z95 * (variance / xs.len() as f64).sqrt()
        } else {
            0.0
        };
        EstimateRecord {
            statistic: statistic.to_string(),
            model: model.to_string(),
            n,
            r,
            replicates: xs.len(),
            mean,
            variance,
            ci_half_width: h,
            ci_low: mean - h,
            ci_high: mean + h,
            seed,
            accepted: xs.len(),
        }
    }

    /// Mean of 0/1 outcomes with a Wilson score interval.
    pub fn from_indicators(
        statistic: &str,
        model: &str,
        n: f64,
        r: f64,
        hits: usize,
        trials: usize,
        seed: u64,
    ) -> Self {
        let xs: Vec<f64> = (0..trials)
            .map(|i| if i < hits { 1.0 } else { 0.0 })
            .collect();
        let mut rec = Self::from_samples(statistic, model, n, r, &xs, seed);
        let (lo, hi) = wilson(hits, trials);
        rec.ci_low = lo;
        rec.ci_high = hi;
        rec
    }

    pub const CSV_HEADER: &'static str =
        "statistic,model,n,r,replicates,mean,variance,ci_half_width,ci_low,ci_high,seed,accepted";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.statistic,
            self.model,
            fmt17(self.n),
            fmt17(self.r),
            self.replicates,
            fmt17(self.mean),
            fmt17(self.variance),
            fmt17(self.ci_half_width),
            fmt17(self.ci_low),
            fmt17(self.ci_high),
            self.seed,
            self.accepted
        )
    }
}

/// Float formatting with 17 significant digits; `inf` for +∞.
pub fn fmt17(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 || x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x)
    } else {
        format!("{:.16e}", x)
    }
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

pub fn wilson(hits: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if hits == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Percentile bootstrap interval for a statistic of one sample.
pub fn bootstrap_ci<R: Rng, F: Fn(&[f64]) -> f64>(
    xs: &[f64],
    stat: F,
    resamples: usize,
    rng: &mut R,
) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mut buf = vec![0.0; xs.len()];
    let mut vals: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.gen_range(0..xs.len())];
            }
            stat(&buf)
        })
        .filter(|v| v.is_finite())
        .collect();
    if vals.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    vals.sort_by(|a, b| a.total_cmp(b));
    (quantile_sorted(&vals, 0.025), quantile_sorted(&vals, 0.975))
}

pub fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Theil–Sen slope: median of pairwise slopes.
pub fn theil_sen(xs: &[f64], ys: &[f64]) -> f64 {
    let mut slopes = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if xs[j] != xs[i] {
                slopes.push((ys[j] - ys[i]) / (xs[j] - xs[i]));
            }
        }
    }
    if slopes.is_empty() {
        return f64::NAN;
    }
    slopes.sort_by(|a, b| a.total_cmp(b));
    quantile_sorted(&slopes, 0.5)
}

pub fn variance_of(xs: &[f64]) -> f64 {
    mean_var(xs).1
}
