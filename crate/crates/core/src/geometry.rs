//! Circumspheres within affine hulls, barycentric coordinates, and the
//! smallest enclosing ball.

use crate::grid::dist2;

/// Affinely dependent points, measured by the normalized Gram determinant.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Sphere {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Barycentric coordinates of the center w.r.t. the defining points.
    pub bary: Vec<f64>,
}

/// Solve the m×m system `a x = b` in place by partial pivoting. Returns
/// None if a pivot vanishes.
fn solve(m: usize, a: &mut [f64], b: &mut [f64]) -> Option<Vec<f64>> {
    for c in 0..m {
        let p = (c..m).max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs()))?;
        if a[p * m + c] == 0.0 {
            return None;
        }
        if p != c {
            for j in 0..m {
                a.swap(p * m + j, c * m + j);
            }
            b.swap(p, c);
        }
        for r in c + 1..m {
            let f = a[r * m + c] / a[c * m + c];
            for j in c..m {
                a[r * m + j] -= f * a[c * m + j];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let mut s = b[r];
        for j in r + 1..m {
            s -= a[r * m + j] * x[j];
        }
        x[r] = s / a[r * m + r];
    }
    Some(x)
}

/// Determinant of a symmetric positive semidefinite matrix divided by the
/// product of its diagonal (Hadamard ratio, in [0, 1]).
fn hadamard_ratio(m: usize, g: &[f64]) -> f64 {
    let mut a = g.to_vec();
    let mut det = 1.0;
    for c in 0..m {
        let p = (c..m).max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs())).unwrap();
        if a[p * m + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for j in 0..m {
                a.swap(p * m + j, c * m + j);
            }
            det = -det;
        }
        det *= a[c * m + c];
        for r in c + 1..m {
            let f = a[r * m + c] / a[c * m + c];
            for j in c..m {
                a[r * m + j] -= f * a[c * m + j];
            }
        }
    }
    let diag: f64 = (0..m).map(|i| g[i * m + i]).product();
    if diag <= 0.0 {
        0.0
    } else {
        (det / diag).abs()
    }
}

/// Circumsphere of `pts` inside their affine hull, or None when the points
/// are affinely dependent within `tol` (normalized Gram determinant).
pub fn circumsphere_tol(pts: &[&[f64]], tol: f64) -> Option<Sphere> {
    let k = pts.len();
    if k == 0 {
        return None;
    }
    let d = pts[0].len();
    if k == 1 {
        return Some(Sphere { center: pts[0].to_vec(), radius: 0.0, bary: vec![1.0] });
    }
    if k > d + 1 {
        return None;
    }
    let m = k - 1;
    let v: Vec<Vec<f64>> = (1..k).map(|i| pts[i].iter().zip(pts[0]).map(|(a, b)| a - b).collect()).collect();
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            g[i * m + j] = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    if hadamard_ratio(m, &g) < tol {
        return None;
    }
    let mut a: Vec<f64> = g.iter().map(|x| 2.0 * x).collect();
    let mut b: Vec<f64> = (0..m).map(|i| g[i * m + i]).collect();
    let alpha = solve(m, &mut a, &mut b)?;
    let mut center = pts[0].to_vec();
    for i in 0..m {
        for c in 0..d {
            center[c] += alpha[i] * v[i][c];
        }
    }
    let radius = dist2(&center, pts[0]).sqrt();
    let mut bary = Vec::with_capacity(k);
    bary.push(1.0 - alpha.iter().sum::<f64>());
    bary.extend_from_slice(&alpha);
    Some(Sphere { center, radius, bary })
}

pub fn circumsphere(pts: &[&[f64]]) -> Option<Sphere> {
    circumsphere_tol(pts, DEGENERACY_TOL)
}

/// Barycentric coordinates of `x` (assumed in the affine hull) w.r.t.
/// affinely independent `pts`, by least squares on the edge vectors.
pub fn barycentric(x: &[f64], pts: &[&[f64]]) -> Option<Vec<f64>> {
    let k = pts.len();
    if k == 0 {
        return None;
    }
    if k == 1 {
        return Some(vec![1.0]);
    }
    let m = k - 1;
    let v: Vec<Vec<f64>> = (1..k).map(|i| pts[i].iter().zip(pts[0]).map(|(a, b)| a - b).collect()).collect();
    let w: Vec<f64> = x.iter().zip(pts[0]).map(|(a, b)| a - b).collect();
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            g[i * m + j] = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    if hadamard_ratio(m, &g) < DEGENERACY_TOL {
        return None;
    }
    let mut b: Vec<f64> = v.iter().map(|vi| vi.iter().zip(&w).map(|(a, b)| a * b).sum()).collect();
    let alpha = solve(m, &mut g, &mut b)?;
    let mut out = vec![1.0 - alpha.iter().sum::<f64>()];
    out.extend(alpha);
    Some(out)
}

/// Smallest enclosing ball: (center, radius).
pub fn miniball(pts: &[&[f64]]) -> (Vec<f64>, f64) {
    if pts.is_empty() {
        return (Vec::new(), 0.0);
    }
    let d = pts[0].len();
    let mut support: Vec<&[f64]> = Vec::with_capacity(d + 1);
    match welzl(pts, &mut support, d) {
        Some(b) => b,
        None => miniball_exhaustive(pts),
    }
}

fn contains(c: &[f64], r: f64, p: &[f64]) -> bool {
    dist2(c, p).sqrt() <= r * (1.0 + 1e-12) + 1e-12
}

/// Welzl recursion on the prefix `pts`, with `support` on the boundary.
/// None if a support set turns out numerically degenerate.
fn welzl<'a>(pts: &[&'a [f64]], support: &mut Vec<&'a [f64]>, d: usize) -> Option<(Vec<f64>, f64)> {
    if pts.is_empty() || support.len() == d + 1 {
        return ball_of(support, d);
    }
    let (last, rest) = pts.split_last().unwrap();
    let (c, r) = welzl(rest, support, d)?;
    if !c.is_empty() && contains(&c, r, last) {
        return Some((c, r));
    }
    support.push(last);
    let out = welzl(rest, support, d);
    support.pop();
    out
}

fn ball_of(support: &[&[f64]], d: usize) -> Option<(Vec<f64>, f64)> {
    match support.len() {
        0 => Some((Vec::new(), -1.0)),
        _ => {
            let s = circumsphere_tol(support, 1e-14)?;
            let _ = d;
            Some((s.center, s.radius))
        }
    }
}

/// Minimum over all affinely independent subsets of size ≤ d+1 whose
/// circumball (in their hull) contains every point.
pub fn miniball_exhaustive(pts: &[&[f64]]) -> (Vec<f64>, f64) {
    let n = pts.len();
    let d = pts[0].len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut idx = Vec::new();
    fn rec(
        start: usize,
        pts: &[&[f64]],
        d: usize,
        idx: &mut Vec<usize>,
        best: &mut Option<(Vec<f64>, f64)>,
    ) {
        if !idx.is_empty() {
            let sub: Vec<&[f64]> = idx.iter().map(|&i| pts[i]).collect();
            if let Some(s) = circumsphere_tol(&sub, 1e-14) {
                if best.as_ref().is_none_or(|b| s.radius < b.1) && pts.iter().all(|p| contains(&s.center, s.radius, p)) {
                    *best = Some((s.center, s.radius));
                }
            }
        }
        if idx.len() == d + 1 {
            return;
        }
        for i in start..pts.len() {
            idx.push(i);
            rec(i + 1, pts, d, idx, best);
            idx.pop();
        }
    }
    rec(0, pts, d, &mut idx, &mut best);
    let _ = n;
    best.unwrap_or_else(|| (pts[0].to_vec(), 0.0))
}
