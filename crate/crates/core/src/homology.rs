//! Z₂ homology: Betti numbers, Euler characteristic, persistence barcodes,
//! and the pattern-count bounds on β_k.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::complexes::{
    build_cech, build_rips, cross_polytope_skeleton, empty_simplex, faces_isomorphic, induced_cech_faces, ComplexKind,
    Filtration, SimplicialComplex,
};
use crate::error::{Error, Result};
use crate::geograph::{build_graph, connected_components, count_components_in, for_each_connected_subset, GeometricGraph, MAX_PATTERN};
use crate::pointproc::PointConfiguration;
use crate::stats::fmt17;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettiVector {
    pub betti: Vec<usize>,
    pub eps: f64,
    pub kind: Option<ComplexKind>,
}

impl BettiVector {
    pub fn get(&self, k: usize) -> usize {
        self.betti.get(k).copied().unwrap_or(0)
    }
}

/// Symmetric difference of sorted index lists.
fn add_columns(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Left-to-right column reduction. `rows` bounds the row indices; skipped
/// columns are known to reduce to zero. Returns (low row, column) pairs.
fn reduce(cols: Vec<Vec<u32>>, rows: usize, skip: &[bool]) -> Vec<(u32, usize)> {
    let mut owner = vec![usize::MAX; rows];
    let mut reduced: Vec<Vec<u32>> = Vec::with_capacity(cols.len());
    let mut pairs = Vec::new();
    for (j, mut c) in cols.into_iter().enumerate() {
        if skip.get(j).copied().unwrap_or(false) {
            reduced.push(Vec::new());
            continue;
        }
        while let Some(&low) = c.last() {
            let o = owner[low as usize];
            if o == usize::MAX {
                break;
            }
            c = add_columns(&c, &reduced[o]);
        }
        if let Some(&low) = c.last() {
            owner[low as usize] = j;
            pairs.push((low, j));
        }
        reduced.push(c);
    }
    pairs
}

fn facet_rows(face: &[u32], lower: &[Vec<u32>]) -> Vec<u32> {
    let mut rows = Vec::with_capacity(face.len());
    let mut facet = Vec::with_capacity(face.len() - 1);
    for skip in 0..face.len() {
        facet.clear();
        facet.extend(face.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
        let r = lower.binary_search_by(|f| f.as_slice().cmp(&facet)).expect("closure validated");
        rows.push(r as u32);
    }
    rows.sort_unstable();
    rows
}

/// β_k = dim ker ∂_k − rank ∂_{k+1} over Z₂, reducing from the top
/// dimension down and clearing columns already known to be cycles.
pub fn betti_numbers(complex: &SimplicialComplex) -> Result<BettiVector> {
    complex.validate()?;
    let top = match complex.max_dim() {
        Some(t) => t,
        None => return Ok(BettiVector { betti: vec![0], eps: f64::NAN, kind: None }),
    };
    let mut rank = vec![0usize; top + 2];
    let mut cleared: Vec<bool> = Vec::new();
    for p in (1..=top).rev() {
        let cols: Vec<Vec<u32>> = complex.faces[p].iter().map(|f| facet_rows(f, &complex.faces[p - 1])).collect();
        let pairs = reduce(cols, complex.count(p - 1), &cleared);
        rank[p] = pairs.len();
        cleared = vec![false; complex.count(p - 1)];
        for (low, _) in pairs {
            cleared[low as usize] = true;
        }
    }
    let betti = (0..=top).map(|p| complex.count(p) - rank[p] - rank[p + 1]).collect();
    Ok(BettiVector { betti, eps: f64::NAN, kind: None })
}

/// Alternating face count.
pub fn euler_characteristic(complex: &SimplicialComplex) -> i64 {
    complex
        .faces
        .iter()
        .enumerate()
        .map(|(p, l)| if p % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Barcode {
    pub bars: Vec<Bar>,
    pub kind: ComplexKind,
    pub eps_max: f64,
    /// Largest simplex dimension in the filtration.
    pub max_dim: usize,
}

/// Persistence by column reduction in filtration order, high dimensions
/// first so that paired columns are cleared before they are visited.
pub fn persistence(filtration: &Filtration) -> Result<Barcode> {
    filtration.validate()?;
    let s = &filtration.simplices;
    let n = s.len();
    let max_dim = s.iter().map(|x| x.dim()).max().unwrap_or(0);
    let index: HashMap<&[u32], u32> = s.iter().enumerate().map(|(i, x)| (x.vertices.as_slice(), i as u32)).collect();
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); max_dim + 1];
    for (i, x) in s.iter().enumerate() {
        by_dim[x.dim()].push(i);
    }
    let mut paired = vec![false; n];
    let mut bars = Vec::new();
    let mut facet = Vec::new();
    for p in (1..=max_dim).rev() {
        let cols: Vec<Vec<u32>> = by_dim[p]
            .iter()
            .map(|&i| {
                let f = &s[i].vertices;
                let mut rows: Vec<u32> = (0..f.len())
                    .map(|skip| {
                        facet.clear();
                        facet.extend(f.iter().enumerate().filter(|&(a, _)| a != skip).map(|(_, &v)| v));
                        index[facet.as_slice()]
                    })
                    .collect();
                rows.sort_unstable();
                rows
            })
            .collect();
        let skip: Vec<bool> = by_dim[p].iter().map(|&i| paired[i]).collect();
        for (low, j) in reduce(cols, n, &skip) {
            let death_idx = by_dim[p][j];
            paired[low as usize] = true;
            paired[death_idx] = true;
            let (b, d) = (s[low as usize].birth, s[death_idx].birth);
            if d > b {
                bars.push(Bar { dim: p - 1, birth: b, death: d });
            }
        }
    }
    // unpaired simplices are positive and never killed
    for (i, x) in s.iter().enumerate() {
        if !paired[i] {
            bars.push(Bar { dim: x.dim(), birth: x.birth, death: f64::INFINITY });
        }
    }
    bars.sort_by(|a, b| a.dim.cmp(&b.dim).then(a.birth.total_cmp(&b.birth)).then(a.death.total_cmp(&b.death)));
    Ok(Barcode { bars, kind: filtration.kind, eps_max: filtration.eps_max, max_dim })
}

/// Bars active at ε: birth ≤ ε < death.
pub fn betti_from_barcode(barcode: &Barcode, eps: f64) -> BettiVector {
    let mut betti = vec![0usize; barcode.max_dim + 1];
    for b in &barcode.bars {
        if b.birth <= eps && eps < b.death {
            betti[b.dim] += 1;
        }
    }
    BettiVector { betti, eps, kind: Some(barcode.kind) }
}

impl Barcode {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for b in &self.bars {
            let _ = writeln!(out, "{},{},{}", b.dim, fmt17(b.birth), fmt17(b.death));
        }
        out
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &Bar> {
        self.bars.iter().filter(move |b| b.dim == dim)
    }

    /// Horizontal bars grouped by dimension, birth-sorted; essential bars
    /// run to the right edge and end in an arrowhead.
    pub fn to_svg(&self, title: &str) -> String {
        let width = 640.0;
        let left = 50.0;
        let right = 20.0;
        let row = 4.0;
        let gap = 24.0;
        let span = if self.eps_max > 0.0 { self.eps_max } else { 1.0 };
        let x = |t: f64| left + (width - left - right) * (t.min(span) / span);
        let dims: Vec<usize> = {
            let mut d: Vec<usize> = self.bars.iter().map(|b| b.dim).collect();
            d.dedup();
            d
        };
        let mut body = String::new();
        let mut y = 30.0;
        let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
        for &dim in &dims {
            let _ = writeln!(body, r#"<text x="4" y="{:.1}" font-size="12">H{}</text>"#, y + 10.0, dim);
            let mut bars: Vec<&Bar> = self.in_dim(dim).collect();
            bars.sort_by(|a, b| a.birth.total_cmp(&b.birth));
            let c = colors[dim % colors.len()];
            for b in bars {
                let x1 = x(b.birth);
                let x2 = if b.death.is_finite() { x(b.death) } else { width - right };
                let _ = writeln!(
                    body,
                    r#"<line x1="{x1:.2}" y1="{y:.1}" x2="{x2:.2}" y2="{y:.1}" stroke="{c}" stroke-width="2.5"/>"#
                );
                if !b.death.is_finite() {
                    let _ = writeln!(
                        body,
                        r#"<polygon points="{:.2},{:.1} {:.2},{:.1} {:.2},{:.1}" fill="{c}"/>"#,
                        x2,
                        y - 3.0,
                        x2 + 6.0,
                        y,
                        x2,
                        y + 3.0
                    );
                }
                y += row;
            }
            y += gap;
        }
        let height = y + 30.0;
        let mut out = String::new();
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height:.0}" font-family="sans-serif">"#);
        let _ = writeln!(out, r#"<text x="{left}" y="16" font-size="13">{}</text>"#, escape(title));
        out.push_str(&body);
        let axis_y = height - 20.0;
        let _ = writeln!(out, r#"<line x1="{left}" y1="{axis_y:.1}" x2="{:.1}" y2="{axis_y:.1}" stroke="black"/>"#, width - right);
        for i in 0..=4 {
            let t = span * i as f64 / 4.0;
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{:.3}</text>"#, x(t), axis_y + 14.0, t);
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Lower and upper pattern-count bounds on β_k and the Betti number itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub kind: ComplexKind,
    pub k: usize,
    pub eps: f64,
    pub lower: u64,
    pub betti: usize,
    /// Named terms of the upper bound; the first is the lower-bound count.
    pub upper_terms: Vec<(String, u64)>,
    pub upper: u64,
    pub holds: bool,
}

/// Number of spanning trees of the induced subgraph on `vs` (Kirchhoff).
pub fn spanning_trees(g: &GeometricGraph, vs: &[usize]) -> u64 {
    let m = vs.len();
    if m <= 1 {
        return 1;
    }
    let n = m - 1;
    let mut a = vec![0.0f64; n * n];
    for i in 1..m {
        for j in 0..m {
            if i != j && g.adjacent(vs[i], vs[j]) {
                a[(i - 1) * n + (i - 1)] += 1.0;
                if j > 0 {
                    a[(i - 1) * n + (j - 1)] -= 1.0;
                }
            }
        }
    }
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x * n + c].abs().total_cmp(&a[y * n + c].abs())).unwrap();
        if a[p * n + c].abs() < 1e-12 {
            return 0;
        }
        if p != c {
            for j in 0..n {
                a.swap(p * n + j, c * n + j);
            }
            det = -det;
        }
        det *= a[c * n + c];
        for r in c + 1..n {
            let f = a[r * n + c] / a[c * n + c];
            for j in c..n {
                a[r * n + j] -= f * a[c * n + j];
            }
        }
    }
    det.round().max(0.0) as u64
}

/// Trees on `size` vertices contained in g (not necessarily induced).
pub fn count_subtrees(g: &GeometricGraph, size: usize) -> u64 {
    let mut total = 0u64;
    for_each_connected_subset(g, size, |s| total += spanning_trees(g, s));
    total
}

/// Evaluate the bounds J(O₁) ≤ β₁(Rips) ≤ J(O₁) + #(5-vertex trees) and
/// C̃*(Γ̃_{k+2}) ≤ β_k(Čech) ≤ C̃*(Γ̃_{k+2}) + attachments of k-faces.
///
/// The upper terms count trees and attachments as subcomplexes, not as
/// induced ones: induced counts are not an upper bound (a 4-cycle in the
/// Čech complex contains no induced 4-vertex tree).
pub fn check_sandwich(config: &PointConfiguration, eps: f64, kind: ComplexKind, k: usize) -> Result<SandwichReport> {
    let g = build_graph(config, eps, false)?;
    let (lower, betti, upper_terms) = match kind {
        ComplexKind::Rips => {
            if k != 1 {
                return Err(Error::Cap(format!("Rips bounds are evaluated for k = 1 only, got {k}")));
            }
            let lower = count_components_in(&g, &cross_polytope_skeleton(1)?);
            let cx = build_rips(config, eps, 2)?;
            let betti = betti_numbers(&cx)?.get(1);
            let trees = count_subtrees(&g, 5);
            (lower, betti, vec![("J(O_1)".to_string(), lower), ("trees_5".to_string(), trees)])
        }
        ComplexKind::Cech => {
            if k == 0 || k + 3 > MAX_PATTERN {
                return Err(Error::Cap(format!("Čech bounds need 1 <= k <= {}, got {k}", MAX_PATTERN - 3)));
            }
            if k >= config.dim {
                return Err(Error::Cap(format!("β_{k} vanishes for the Čech complex in dimension {}", config.dim)));
            }
            let target = empty_simplex(k + 2)?.face_set()?;
            let lower = connected_components(&g)
                .iter()
                .filter(|c| c.len() == k + 2)
                .filter(|c| {
                    let pts: Vec<&[f64]> = c.iter().map(|&v| config.point(v)).collect();
                    faces_isomorphic(&induced_cech_faces(&pts, eps), &target, k + 2)
                })
                .count() as u64;
            let cx = build_cech(config, eps, k + 1)?;
            let betti = betti_numbers(&cx)?.get(k);
            let mut terms = vec![("C*(empty_simplex)".to_string(), lower)];
            if k == 1 {
                let (stars, paths) = star_and_path_counts(&g);
                terms.push(("stars_4".to_string(), stars));
                terms.push(("paths_4".to_string(), paths));
            } else {
                let (pendant, path) = attachment_counts(&g, &cx.faces[k]);
                terms.push(("pendant_pairs".to_string(), pendant));
                terms.push(("path_attachments".to_string(), path));
            }
            (lower, betti, terms)
        }
    };
    let upper: u64 = upper_terms.iter().map(|t| t.1).sum();
    let holds = lower as usize <= betti && betti as u64 <= upper;
    Ok(SandwichReport { kind, k, eps, lower, betti, upper_terms, upper, holds })
}

/// Subgraphs isomorphic to the 3-leaf star and to the 4-vertex path.
pub fn star_and_path_counts(g: &GeometricGraph) -> (u64, u64) {
    let deg: Vec<u64> = g.adj.iter().map(|a| a.len() as u64).collect();
    let stars: u64 = deg.iter().map(|&d| if d >= 3 { d * (d - 1) * (d - 2) / 6 } else { 0 }).sum();
    let mut paths = 0i64;
    let mut triangles = 0i64;
    for u in 0..g.len() {
        for &v in &g.adj[u] {
            let v = v as usize;
            if v <= u {
                continue;
            }
            paths += (deg[u] as i64 - 1) * (deg[v] as i64 - 1);
            for &w in &g.adj[v] {
                if w as usize > v && g.adjacent(u, w as usize) {
                    triangles += 1;
                }
            }
        }
    }
    (stars, (paths - 3 * triangles).max(0) as u64)
}

/// For each face σ: pairs of outside vertices both adjacent to σ (weighted
/// by their attachment choices), and outside paths σ – u – w.
fn attachment_counts(g: &GeometricGraph, faces: &[Vec<u32>]) -> (u64, u64) {
    let mut pendant = 0u64;
    let mut path = 0u64;
    for f in faces {
        let mut d: HashMap<usize, u64> = HashMap::new();
        for &v in f {
            for &u in &g.adj[v as usize] {
                if !f.contains(&u) {
                    *d.entry(u as usize).or_default() += 1;
                }
            }
        }
        let total: u64 = d.values().sum();
        let sq: u64 = d.values().map(|x| x * x).sum();
        pendant += (total * total - sq) / 2;
        for (&u, &du) in &d {
            let out = g.adj[u].iter().filter(|&&w| !f.contains(&w)).count() as u64;
            path += du * out;
        }
    }
    (pendant, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::rips_filtration;

    fn square() -> PointConfiguration {
        PointConfiguration::fixture(2, &[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]])
    }

    #[test]
    fn circle_and_sphere() {
        let c = build_rips(&square(), 1.5, 2).unwrap();
        assert_eq!(betti_numbers(&c).unwrap().betti, vec![1, 1]);
        assert_eq!(euler_characteristic(&c), 0);
        let tet = SimplicialComplex::from_faces(vec![
            vec![0], vec![1], vec![2], vec![3],
            vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3],
            vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3],
        ])
        .unwrap();
        assert_eq!(betti_numbers(&tet).unwrap().betti, vec![1, 0, 1]);
    }

    #[test]
    fn single_vertex() {
        let c = SimplicialComplex::from_faces(vec![vec![0]]).unwrap();
        assert_eq!(euler_characteristic(&c), 1);
        assert_eq!(betti_numbers(&c).unwrap().betti, vec![1]);
    }

    #[test]
    fn closure_violation_rejected() {
        let c = SimplicialComplex { faces: vec![vec![vec![0], vec![1]], vec![vec![0, 2]]] };
        assert!(matches!(betti_numbers(&c), Err(Error::Malformed(_))));
    }

    #[test]
    fn two_point_bars() {
        let c = PointConfiguration::fixture(2, &[vec![0.0, 0.0], vec![0.7, 0.0]]);
        let b = persistence(&rips_filtration(&c, 1, 1.0).unwrap()).unwrap();
        let h0: Vec<(f64, f64)> = b.in_dim(0).map(|x| (x.birth, x.death)).collect();
        assert_eq!(h0.len(), 2);
        assert!(h0.contains(&(0.0, f64::INFINITY)));
        assert!(h0.iter().any(|&(s, d)| s == 0.0 && (d - 0.7).abs() < 1e-15));
        assert_eq!(betti_from_barcode(&b, 0.7).get(0), 1);
        assert_eq!(betti_from_barcode(&b, -0.1).get(0), 0);
    }

    #[test]
    fn square_h1_bar() {
        let b = persistence(&rips_filtration(&square(), 2, 2.5).unwrap()).unwrap();
        let h1: Vec<&Bar> = b.in_dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - 2f64.sqrt()).abs() < 1e-12);
        assert!((h1[0].death - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_monotone_rejected() {
        use crate::complexes::FilteredSimplex;
        let f = Filtration::new(
            ComplexKind::Rips,
            1.0,
            vec![
                FilteredSimplex { vertices: vec![0], birth: 0.0 },
                FilteredSimplex { vertices: vec![1], birth: 0.9 },
                FilteredSimplex { vertices: vec![0, 1], birth: 0.5 },
            ],
        );
        assert!(matches!(persistence(&f), Err(Error::NonMonotone { .. })));
    }

    #[test]
    fn sandwich_examples() {
        let r = check_sandwich(&square(), 1.5, ComplexKind::Rips, 1).unwrap();
        assert_eq!((r.lower, r.betti, r.upper), (1, 1, 1));
        let s = 0.9;
        let tri = PointConfiguration::fixture(2, &[vec![0.0, 0.0], vec![s, 0.0], vec![s / 2.0, s * 3f64.sqrt() / 2.0]]);
        let c = check_sandwich(&tri, 1.0, ComplexKind::Cech, 1).unwrap();
        assert_eq!((c.lower, c.betti, c.upper), (1, 1, 1));
        assert!(check_sandwich(&tri, 1.0, ComplexKind::Cech, 2).is_err());
    }

    #[test]
    fn tree_counts() {
        // K4: 16 spanning trees, 4 stars, 12 paths
        let g = GeometricGraph { r: 1.0, ambient: false, interior: 4, adj: vec![vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]] };
        assert_eq!(spanning_trees(&g, &[0, 1, 2, 3]), 16);
        assert_eq!(star_and_path_counts(&g), (4, 12));
    }
}
