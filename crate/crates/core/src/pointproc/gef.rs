//! Zeros of the planar Gaussian entire function f(z) = Σ ξ_k z^k / √(k!).
//!
//! f is truncated where the tail is below 1e−10 of the typical size
//! e^{|z|²/2} on the sampled disk. The truncated polynomial spans hundreds of
//! orders of magnitude in its coefficients, so companion-matrix eigenvalues
//! lose the inner roots; instead all roots are found by Aberth–Ehrlich
//! iteration with Horner evaluation in an extended exponent range, which is
//! accurate root by root.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Complex number times 2^exp, for values far outside the f64 range.
#[derive(Debug, Clone, Copy)]
struct Wide {
    m: Complex64,
    e: i64,
}

impl Wide {
    const ZERO: Wide = Wide { m: Complex64 { re: 0.0, im: 0.0 }, e: i64::MIN / 2 };

    fn norm(self) -> Wide {
        let a = self.m.re.abs().max(self.m.im.abs());
        if a == 0.0 {
            return Wide::ZERO;
        }
        let k = a.log2().floor() as i64;
        Wide { m: self.m * 2f64.powi(-k as i32), e: self.e + k }
    }

    fn mul(self, z: Complex64) -> Wide {
        Wide { m: self.m * z, e: self.e }.norm()
    }

    fn add(self, o: Wide) -> Wide {
        if o.m == Complex64::new(0.0, 0.0) {
            return self;
        }
        if self.m == Complex64::new(0.0, 0.0) {
            return o;
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let gap = lo.e - hi.e;
        if gap < -1100 {
            return hi;
        }
        Wide { m: hi.m + lo.m * 2f64.powi(gap as i32), e: hi.e }.norm()
    }

    /// self / o as an ordinary complex number (saturating).
    fn ratio(self, o: Wide) -> Complex64 {
        let gap = (self.e - o.e).clamp(-2000, 2000);
        let q = self.m / o.m;
        q * 2f64.powf(gap as f64)
    }
}

/// Truncation degree for the disk of radius `rad` (standard coordinates).
fn degree_for(rad: f64) -> usize {
    let x = rad * rad;
    let target = (1e-10f64).ln();
    let mut lf = 0.0; // ln k!
    let mut k = 0usize;
    loop {
        k += 1;
        lf += (k as f64).ln();
        let lt = k as f64 * rad.ln() - 0.5 * lf - 0.5 * x;
        if k as f64 > x && lt < target {
            return k.max(2);
        }
    }
}

/// Coefficients ξ_k / √(k!) in extended range.
fn coefficients<R: Rng>(deg: usize, rng: &mut R) -> Vec<Wide> {
    let mut out = Vec::with_capacity(deg + 1);
    let mut lf = 0.0;
    for k in 0..=deg {
        if k > 0 {
            lf += (k as f64).ln();
        }
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let xi = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
        // 1/√k! = 2^{-lf/(2 ln 2)}
        let l2 = -0.5 * lf / std::f64::consts::LN_2;
        let e = l2.floor();
        out.push(Wide { m: xi * 2f64.powf(l2 - e), e: e as i64 }.norm());
    }
    out
}

/// p(z) and p'(z) by Horner in extended range.
fn eval(c: &[Wide], z: Complex64) -> (Wide, Wide) {
    let mut p = Wide::ZERO;
    let mut dp = Wide::ZERO;
    for &ck in c.iter().rev() {
        dp = dp.mul(z).add(p);
        p = p.mul(z).add(ck);
    }
    (p, dp)
}

/// All roots of Σ c_k z^k by Aberth–Ehrlich iteration.
fn aberth(c: &[Wide], max_sweeps: usize) -> Result<Vec<Complex64>> {
    let deg = c.len() - 1;
    let golden = PI * (3.0 - 5f64.sqrt());
    let rad = (deg as f64).sqrt();
    let mut z: Vec<Complex64> = (0..deg)
        .map(|i| {
            let r = rad * ((i as f64 + 0.5) / deg as f64).sqrt();
            Complex64::from_polar(r, golden * i as f64 + 0.3)
        })
        .collect();
    let mut done = vec![false; deg];
    for _ in 0..max_sweeps {
        let mut all = true;
        for i in 0..deg {
            if done[i] {
                continue;
            }
            let (p, dp) = eval(c, z[i]);
            if p.m == Complex64::new(0.0, 0.0) {
                done[i] = true;
                continue;
            }
            let w = p.ratio(dp);
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    s += 1.0 / (z[i] - z[j]);
                }
            }
            let corr = w / (1.0 - w * s);
            if corr.is_finite() {
                z[i] -= corr;
            }
            if corr.norm() <= 1e-13 * (1.0 + z[i].norm()) {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            return Ok(z);
        }
    }
    Err(Error::Sizing(format!("GEF root finder did not converge at degree {deg}")))
}

pub(super) fn sample<R: Rng>(h: f64, rng: &mut R) -> Result<Vec<f64>> {
    let hs = h * PI.sqrt();
    if !(hs > 0.0) {
        return Err(Error::Sizing("GEF window is empty".into()));
    }
    let deg = degree_for(hs * std::f64::consts::SQRT_2 + 1.0);
    let c = coefficients(deg, rng);
    let roots = aberth(&c, 500)?;
    let s = 1.0 / PI.sqrt();
    let mut out = Vec::new();
    for z in roots {
        if z.re.abs() <= hs && z.im.abs() <= hs {
            out.push(z.re * s);
            out.push(z.im * s);
        }
    }
    Ok(out)
}
