// Brute-force reference implementations. Nothing here calls into the
// library's geometry, graph or homology code; they evaluate the defining
// sums directly over all subsets.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub const TOL: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, side: f64, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-side / 2.0..side / 2.0)).collect())
        .collect()
}

pub fn d2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Solve a small dense system by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Center and radius of the smallest sphere through all of `pts` lying in
/// their affine hull.
pub fn circumball(pts: &[&[f64]]) -> Option<(Vec<f64>, f64)> {
    let p0 = pts[0];
    let m = pts.len() - 1;
    if m == 0 {
        return Some((p0.to_vec(), 0.0));
    }
    let v: Vec<Vec<f64>> = pts[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let g: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| 2.0 * dot(&v[i], &v[j])).collect()).collect();
    let rhs: Vec<f64> = (0..m).map(|i| dot(&v[i], &v[i])).collect();
    let lam = solve(g, rhs)?;
    let mut c = p0.to_vec();
    for i in 0..m {
        for (cj, vj) in c.iter_mut().zip(&v[i]) {
            *cj += lam[i] * vj;
        }
    }
    let r = d2(&c, p0).sqrt();
    Some((c, r))
}

/// Smallest enclosing ball radius: the best circumball of a subset of at
/// most d + 1 points that contains every point.
pub fn enclosing_radius(pts: &[&[f64]]) -> f64 {
    let n = pts.len();
    let d = pts[0].len();
    let mut best = f64::INFINITY;
    for m in 1u32..(1 << n) {
        if m.count_ones() as usize > d + 1 {
            continue;
        }
        let sub: Vec<&[f64]> = (0..n).filter(|&i| m >> i & 1 == 1).map(|i| pts[i]).collect();
        if let Some((c, r)) = circumball(&sub) {
            if r < best && pts.iter().all(|p| d2(p, &c).sqrt() <= r + 1e-10) {
                best = r;
            }
        }
    }
    best
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Adjacency matrix of the induced graph at radius r (distance ≤ r).
pub fn adjacency(pts: &[&[f64]], r: f64) -> Vec<Vec<bool>> {
    let k = pts.len();
    (0..k)
        .map(|i| (0..k).map(|j| i != j && d2(pts[i], pts[j]) <= r * r).collect())
        .collect()
}

pub fn graph_iso(a: &[Vec<bool>], edges: &[(usize, usize)]) -> bool {
    let k = a.len();
    let mut b = vec![vec![false; k]; k];
    for &(i, j) in edges {
        b[i][j] = true;
        b[j][i] = true;
    }
    permutations(k).iter().any(|p| (0..k).all(|i| (0..k).all(|j| a[p[i]][p[j]] == b[i][j])))
}

/// G_n: induced copies of the pattern among all points.
pub fn brute_g(points: &[Vec<f64>], r: f64, k: usize, edges: &[(usize, usize)]) -> u64 {
    subsets(points.len(), k)
        .iter()
        .filter(|s| {
            let pts: Vec<&[f64]> = s.iter().map(|&i| points[i].as_slice()).collect();
            graph_iso(&adjacency(&pts, r), edges)
        })
        .count() as u64
}

fn isolated(points: &[Vec<f64>], s: &[usize], r: f64) -> bool {
    (0..points.len())
        .filter(|i| !s.contains(i))
        .all(|i| s.iter().all(|&j| d2(&points[i], &points[j]) > r * r))
}

/// J_n: induced copies that form a whole connected component.
pub fn brute_j(points: &[Vec<f64>], r: f64, k: usize, edges: &[(usize, usize)]) -> u64 {
    subsets(points.len(), k)
        .iter()
        .filter(|s| {
            let pts: Vec<&[f64]> = s.iter().map(|&i| points[i].as_slice()).collect();
            graph_iso(&adjacency(&pts, r), edges) && isolated(points, s, r)
        })
        .count() as u64
}

/// Every Čech face (as sorted index lists, dimension ≥ 1) on the points.
pub fn cech_faces(pts: &[&[f64]], eps: f64) -> Vec<Vec<usize>> {
    let n = pts.len();
    let mut out = Vec::new();
    for m in 1u32..(1 << n) {
        if m.count_ones() < 2 {
            continue;
        }
        let s: Vec<usize> = (0..n).filter(|&i| m >> i & 1 == 1).collect();
        let sub: Vec<&[f64]> = s.iter().map(|&i| pts[i]).collect();
        if enclosing_radius(&sub) <= eps / 2.0 + TOL {
            out.push(s);
        }
    }
    out
}

pub fn faces_iso(a: &[Vec<usize>], b: &[Vec<usize>], k: usize) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let key = |f: &[usize], p: &[usize]| {
        let mut g: Vec<usize> = f.iter().map(|&v| p[v]).collect();
        g.sort();
        g
    };
    let mut bs: Vec<Vec<usize>> = b.iter().map(|f| {
        let mut g = f.clone();
        g.sort();
        g
    }).collect();
    bs.sort();
    permutations(k).iter().any(|p| {
        let mut im: Vec<Vec<usize>> = a.iter().map(|f| key(f, p)).collect();
        im.sort();
        im == bs
    })
}

/// C̃_n (isolated = false) or C̃*_n: subsets whose induced Čech complex at ε
/// matches the pattern faces (dimension ≥ 1).
pub fn brute_c(points: &[Vec<f64>], eps: f64, k: usize, faces: &[Vec<usize>], isolated_only: bool) -> u64 {
    subsets(points.len(), k)
        .iter()
        .filter(|s| {
            let pts: Vec<&[f64]> = s.iter().map(|&i| points[i].as_slice()).collect();
            faces_iso(&cech_faces(&pts, eps), faces, k) && (!isolated_only || isolated(points, s, eps))
        })
        .count() as u64
}

/// N_k: circumcenters of k + 1 points lying strictly inside their convex
/// hull, with an empty open circumball and radius ≤ r. Works in any
/// dimension via barycentric coordinates from the affine solve.
pub fn brute_nk(points: &[Vec<f64>], r: f64, k: usize) -> u64 {
    if k == 0 {
        return points.len() as u64;
    }
    let mut count = 0;
    for s in subsets(points.len(), k + 1) {
        let pts: Vec<&[f64]> = s.iter().map(|&i| points[i].as_slice()).collect();
        let Some((c, rad)) = circumball(&pts) else { continue };
        if rad > r {
            continue;
        }
        // barycentric coordinates of c in the simplex
        let Some(w) = barycentric(&c, &pts) else { continue };
        if w.iter().any(|&x| x <= 1e-12) {
            continue;
        }
        let empty = (0..points.len())
            .filter(|i| !s.contains(i))
            .all(|i| d2(&points[i], &c).sqrt() >= rad);
        if empty {
            count += 1;
        }
    }
    count
}

fn barycentric(x: &[f64], pts: &[&[f64]]) -> Option<Vec<f64>> {
    let m = pts.len() - 1;
    let p0 = pts[0];
    let v: Vec<Vec<f64>> = pts[1..].iter().map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let xr: Vec<f64> = x.iter().zip(p0).map(|(a, b)| a - b).collect();
    let g: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| dot(&v[i], &v[j])).collect()).collect();
    let rhs: Vec<f64> = (0..m).map(|i| dot(&v[i], &xr)).collect();
    let lam = solve(g, rhs)?;
    let mut w = vec![1.0 - lam.iter().sum::<f64>()];
    w.extend(lam);
    Some(w)
}

/// Rank over Z/2 of a dense 0/1 matrix.
pub fn rank_z2(mut rows: Vec<Vec<bool>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][c]) else { continue };
        rows.swap(rank, p);
        for i in 0..rows.len() {
            if i != rank && rows[i][c] {
                let pivot = rows[rank].clone();
                for (x, y) in rows[i].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Betti numbers over Z/2 of the complex with the given faces (all
/// dimensions, vertices included) from dense boundary ranks.
pub fn betti(faces: &[Vec<u32>]) -> Vec<usize> {
    let top = faces.iter().map(|f| f.len()).max().unwrap_or(0);
    let by_dim: Vec<Vec<Vec<u32>>> = (0..top)
        .map(|p| {
            let mut v: Vec<Vec<u32>> = faces.iter().filter(|f| f.len() == p + 1).cloned().collect();
            v.sort();
            v
        })
        .collect();
    // rank of ∂_p : C_p → C_{p−1}
    let rank: Vec<usize> = (0..top)
        .map(|p| {
            if p == 0 {
                return 0;
            }
            let rows: Vec<Vec<bool>> = by_dim[p]
                .iter()
                .map(|f| {
                    by_dim[p - 1]
                        .iter()
                        .map(|g| g.iter().all(|v| f.contains(v)))
                        .collect()
                })
                .collect();
            rank_z2(rows)
        })
        .collect();
    (0..top)
        .map(|p| by_dim[p].len() - rank[p] - if p + 1 < top { rank[p + 1] } else { 0 })
        .collect()
}

/// All cliques (vertex sets of size ≤ max_dim + 1) of the graph at ε.
pub fn rips_faces(points: &[Vec<f64>], eps: f64, max_dim: usize) -> Vec<Vec<u32>> {
    let n = points.len();
    let mut out = Vec::new();
    for k in 1..=max_dim + 1 {
        for s in subsets(n, k) {
            if s.iter().enumerate().all(|(a, &i)| s[a + 1..].iter().all(|&j| d2(&points[i], &points[j]) <= eps * eps)) {
                out.push(s.iter().map(|&i| i as u32).collect());
            }
        }
    }
    out
}

/// All Čech faces of dimension ≤ max_dim, vertices included.
pub fn cech_complex(points: &[Vec<f64>], eps: f64, max_dim: usize) -> Vec<Vec<u32>> {
    let n = points.len();
    let mut out = Vec::new();
    for k in 1..=max_dim + 1 {
        for s in subsets(n, k) {
            let pts: Vec<&[f64]> = s.iter().map(|&i| points[i].as_slice()).collect();
            if k == 1 || enclosing_radius(&pts) <= eps / 2.0 + TOL {
                out.push(s.iter().map(|&i| i as u32).collect());
            }
        }
    }
    out
}
