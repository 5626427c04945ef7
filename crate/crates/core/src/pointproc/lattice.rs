use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Replication law N of a perturbed lattice. Every variant has mean 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Replication {
    Constant,
    /// Binomial(m, 1/m).
    Binomial { m: u32 },
    /// Number of marked items among `draws` taken without replacement from
    /// `population` items of which `marked` are marked.
    Hypergeometric { population: u32, marked: u32, draws: u32 },
    /// Gamma–Poisson mixture with shape `r` and mean 1 (variance 1 + 1/r).
    NegativeBinomial { r: f64 },
    /// Failures before the first success with p = 1/2 (variance 2).
    Geometric,
}

impl Replication {
    /// Hypergeometric preset: 2 draws from 4 items with 2 marked,
    /// mean 1, variance 1/3.
    pub fn hypergeometric() -> Self {
        Replication::Hypergeometric { population: 4, marked: 2, draws: 2 }
    }

    pub fn name(&self) -> String {
        match self {
            Replication::Constant => "const".into(),
            Replication::Binomial { m } => format!("binom({m})"),
            Replication::Hypergeometric { population, marked, draws } => {
                format!("hypergeom({population},{marked},{draws})")
            }
            Replication::NegativeBinomial { r } => format!("negbin({r})"),
            Replication::Geometric => "geom".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Replication::Binomial { m } if m == 0 => Err(Error::Invalid("binomial m must be >= 1".into())),
            Replication::Hypergeometric { population, marked, draws } => {
                if marked > population || draws > population {
                    return Err(Error::Invalid("hypergeometric counts exceed population".into()));
                }
                if draws as u64 * marked as u64 != population as u64 {
                    return Err(Error::Invalid(format!(
                        "hypergeometric mean draws*marked/population must be 1, got {draws}*{marked}/{population}"
                    )));
                }
                Ok(())
            }
            Replication::NegativeBinomial { r } if !(r > 0.0) => {
                Err(Error::Invalid("negative binomial shape must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Replication::Constant => 0.0,
            Replication::Binomial { m } => 1.0 - 1.0 / m as f64,
            Replication::Hypergeometric { population, marked, draws } => {
                let (n, k, t) = (population as f64, marked as f64, draws as f64);
                if n <= 1.0 {
                    0.0
                } else {
                    t * (k / n) * (1.0 - k / n) * (n - t) / (n - 1.0)
                }
            }
            Replication::NegativeBinomial { r } => 1.0 + 1.0 / r,
            Replication::Geometric => 2.0,
        }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        match *self {
            Replication::Constant => 1,
            Replication::Binomial { m } => Binomial::new(m as u64, 1.0 / m as f64).unwrap().sample(rng) as usize,
            Replication::Hypergeometric { population, marked, draws } => {
                let (mut left, mut good, mut hits) = (population, marked, 0usize);
                for _ in 0..draws {
                    if rng.gen_range(0..left) < good {
                        good -= 1;
                        hits += 1;
                    }
                    left -= 1;
                }
                hits
            }
            Replication::NegativeBinomial { r } => {
                let lam: f64 = Gamma::new(r, 1.0 / r).unwrap().sample(rng);
                if lam <= 0.0 {
                    0
                } else {
                    Poisson::new(lam).unwrap().sample(rng) as usize
                }
            }
            Replication::Geometric => {
                let mut k = 0;
                while rng.gen::<bool>() {
                    k += 1;
                }
                k
            }
        }
    }
}

/// Lattice Z^d (optionally shifted by U ~ Unif[0,1)^d), each site replicated
/// N times, each copy displaced uniformly in the unit cube. Returns every
/// point whose cell meets [−h, h]^d; the caller clips to the box.
pub(super) fn sample<R: Rng>(d: usize, h: f64, law: &Replication, shift: bool, rng: &mut R) -> Vec<f64> {
    let u: Vec<f64> = (0..d).map(|_| if shift { rng.gen::<f64>() } else { 0.0 }).collect();
    let lo: Vec<i64> = u.iter().map(|&ui| (-h - ui).floor() as i64).collect();
    let hi: Vec<i64> = u.iter().map(|&ui| (h - ui).ceil() as i64).collect();
    let mut out = Vec::new();
    let mut z = lo.clone();
    if lo.iter().zip(&hi).any(|(a, b)| a > b) {
        return out;
    }
    loop {
        let copies = law.draw(rng);
        for _ in 0..copies {
            for i in 0..d {
                out.push(u[i] + z[i] as f64 + rng.gen::<f64>());
            }
        }
        // odometer over the cell box
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            if z[i] < hi[i] {
                z[i] += 1;
                break;
            }
            z[i] = lo[i];
            i += 1;
        }
    }
}
