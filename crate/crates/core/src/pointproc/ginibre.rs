use std::f64::consts::{FRAC_1_SQRT_2, PI};

use faer::{c64, Mat};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Matrix size m for a box of half-side `h` (unit-intensity coordinates).
///
/// The eigenvalues fill a disk of radius √(m/π). That disk must cover the
/// circumscribed disk of the box with a radial safety of 20%, capped at 3
/// unit lengths: the edge layer of the finite ensemble has width O(1), and
/// 3 units past the box the density deficit is below 1e−20.
pub fn ginibre_matrix_size(h: f64) -> Result<usize> {
    let r = h * std::f64::consts::SQRT_2;
    if !(r > 0.0) {
        return Err(Error::Sizing(format!("Ginibre window half-side {h} gives no matrix")));
    }
    let safety = (0.2 * r).min(3.0);
    let m = (PI * (r + safety).powi(2)).ceil() as usize;
    if m == 0 {
        return Err(Error::Sizing("Ginibre matrix size 0".into()));
    }
    Ok(m)
}

pub(super) fn sample<R: Rng>(h: f64, rng: &mut R) -> Result<Vec<f64>> {
    let m = ginibre_matrix_size(h)?;
    let a = Mat::<c64>::from_fn(m, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    });
    let ev = a
        .eigenvalues()
        .map_err(|e| Error::Sizing(format!("eigenvalue solver failed: {e:?}")))?;
    let s = 1.0 / PI.sqrt();
    let mut out = Vec::with_capacity(2 * m);
    for z in ev {
        let (x, y) = (z.re * s, z.im * s);
        if x.abs() <= h && y.abs() <= h {
            out.push(x);
            out.push(y);
        }
    }
    Ok(out)
}

/// Regularized upper incomplete gamma Q(k+1, x) for integer k ≥ 0.
fn q_int(k: usize, x: f64) -> f64 {
    // e^{-x} Σ_{j≤k} x^j / j!, summed in log space for large x
    let mut term = (-x).exp();
    if term == 0.0 {
        let mut lt = -x;
        let mut acc = f64::NEG_INFINITY;
        for j in 0..=k {
            if j > 0 {
                lt += x.ln() - (j as f64).ln();
            }
            let hi = acc.max(lt);
            acc = hi + ((acc - hi).exp() + (lt - hi).exp()).ln();
        }
        return acc.exp().min(1.0);
    }
    let mut sum = term;
    for j in 1..=k {
        term *= x / j as f64;
        sum += term;
    }
    sum.min(1.0)
}

/// Probability that the disk of radius `r` centered at the origin holds no
/// eigenvalue, in unit-intensity coordinates. With `m = None` the infinite
/// process is used. The moduli of Ginibre eigenvalues are independent with
/// |z_k|² ~ Gamma(k+1) (standard scaling), which gives a product formula.
pub fn kostlan_void_probability(m: Option<usize>, r: f64) -> f64 {
    let x = PI * r * r;
    let mut p = 1.0;
    let mut k = 0;
    loop {
        if let Some(m) = m {
            if k >= m {
                break;
            }
        }
        let q = q_int(k, x);
        p *= q;
        if m.is_none() && 1.0 - q < 1e-17 && k as f64 > x {
            break;
        }
        k += 1;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_covers_window() {
        let h = 5.0;
        let m = ginibre_matrix_size(h).unwrap();
        let radius = (m as f64 / PI).sqrt();
        assert!(radius >= 1.2 * h * 2f64.sqrt() - 1e-9);
    }

    #[test]
    fn q_matches_direct_sum() {
        assert!((q_int(0, 2.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((q_int(1, 2.0) - 3.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert!((q_int(3, 800.0)) < 1e-300);
    }

    #[test]
    fn kostlan_first_factor() {
        // a single eigenvalue: |z|² ~ Exp(1) in standard scaling
        let r: f64 = 0.7;
        let p = kostlan_void_probability(Some(1), r);
        assert!((p - (-PI * r * r).exp()).abs() < 1e-15);
    }
}
