//! Critical points of the distance function to a finite point set, and the
//! lexicographic discrete Morse matching on the Rips complex.
//!
//! Radius bridge: the sublevel set {dist ≤ r} is the union of radius-r
//! balls, whose nerve is the Čech complex at ε = 2r. Every comparison with
//! Betti numbers in this crate uses that factor.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::geograph::{graph_from_coords, Mode};
pub use crate::geometry::{circumsphere, Sphere};
use crate::geometry::{barycentric, circumsphere_tol};
use crate::grid::{dist2, Grid};
use crate::pointproc::PointConfiguration;
use crate::stats::fmt17;

/// Barycentric coordinates must exceed this for the open hull.
pub const HULL_TOL: f64 = 1e-9;
/// Slack toward emptiness in the open-ball test.
pub const EMPTY_SLACK: f64 = 1e-12;
/// Critical values this close to r are flagged.
pub const NEAR_BAND: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointRecord {
    pub index: usize,
    pub vertices: Vec<u32>,
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CriticalPoints {
    pub records: Vec<CriticalPointRecord>,
    /// N_0..N_max.
    pub counts: Vec<u64>,
    /// Candidate subsets skipped as affinely dependent.
    pub degenerate: u64,
    /// Critical points with |R − r| < 1e−6.
    pub near_threshold: u64,
}

impl CriticalPoints {
    pub fn euler(&self) -> i64 {
        self.counts.iter().enumerate().map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) }).sum()
    }

    /// `index,radius,center_coords...,vertex_ids...`
    pub fn to_csv(&self, dim: usize) -> String {
        let mut out = String::from("index,radius");
        for i in 0..dim {
            let _ = write!(out, ",c{i}");
        }
        out.push_str(",vertices\n");
        for r in &self.records {
            let _ = write!(out, "{},{}", r.index, fmt17(r.radius));
            for c in &r.center {
                let _ = write!(out, ",{}", fmt17(*c));
            }
            for v in &r.vertices {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// True iff the barycentric coordinates of `center` w.r.t. `points` all
/// exceed 1e−9. Affinely dependent points are rejected.
pub fn in_open_convex_hull(center: &[f64], points: &[&[f64]]) -> Result<bool> {
    match barycentric(center, points) {
        Some(b) => Ok(b.iter().all(|&x| x > HULL_TOL)),
        None => Err(Error::Degenerate("points are affinely dependent".into())),
    }
}

/// Generating-set test shared by every enumeration path: returns the record
/// when `subset` generates a critical point with value ≤ r. `empty` decides
/// whether the open ball holds no other point.
fn test_subset<E: Fn(&[f64], f64, &[usize]) -> bool>(
    pts: &[&[f64]],
    subset: &[usize],
    r: f64,
    empty: E,
    out: &mut CriticalPoints,
) {
    let gen: Vec<&[f64]> = subset.iter().map(|&i| pts[i]).collect();
    let s = match circumsphere(&gen) {
        Some(s) => s,
        None => {
            // nearly dependent subsets (boundary slivers of a triangulation)
            // have huge circumballs; they only matter if the ball could be
            // within r
            match circumsphere_tol(&gen, 0.0) {
                Some(s) if s.radius.is_finite() && s.radius > r => {}
                _ => out.degenerate += 1,
            }
            return;
        }
    };
    if s.radius > r || !s.bary.iter().all(|&x| x > HULL_TOL) {
        return;
    }
    if !empty(&s.center, s.radius - EMPTY_SLACK, subset) {
        return;
    }
    if (s.radius - r).abs() < NEAR_BAND {
        out.near_threshold += 1;
    }
    let k = subset.len() - 1;
    out.counts[k] += 1;
    let mut vertices: Vec<u32> = subset.iter().map(|&i| i as u32).collect();
    vertices.sort_unstable();
    out.records.push(CriticalPointRecord { index: k, vertices, center: s.center, radius: s.radius });
}

fn finish(out: &mut CriticalPoints) {
    out.records.sort_by(|a, b| a.index.cmp(&b.index).then_with(|| a.vertices.cmp(&b.vertices)));
}

fn setup(config: &PointConfiguration, r: f64, max_index: usize, mode: Mode) -> Result<usize> {
    if !(r > 0.0) {
        return Err(Error::Invalid(format!("r must be positive, got {r}")));
    }
    if max_index > config.dim {
        return Err(Error::Invalid(format!("max_index {max_index} exceeds dimension {}", config.dim)));
    }
    let ambient = mode == Mode::Ambient;
    if ambient {
        config.require_margin(2.0 * r)?;
    }
    Ok(config.visible(ambient))
}

/// N_k(Φ_n, r) for k ≤ max_index. In the plane the candidates come from the
/// Delaunay triangulation; elsewhere from cliques of the graph at 2r.
pub fn critical_points(config: &PointConfiguration, r: f64, max_index: usize, mode: Mode) -> Result<CriticalPoints> {
    if config.dim == 2 {
        critical_points_planar(config, r, max_index, mode)
    } else {
        critical_points_enumerated(config, r, max_index, mode)
    }
}

/// Candidates: (k+1)-cliques of the geometric graph at 2r, any dimension.
pub fn critical_points_enumerated(config: &PointConfiguration, r: f64, max_index: usize, mode: Mode) -> Result<CriticalPoints> {
    let n = setup(config, r, max_index, mode)?;
    let interior = config.len();
    let coords = &config.all_coords()[..n * config.dim];
    let pts: Vec<&[f64]> = coords.chunks(config.dim).collect();
    let g = graph_from_coords(coords, config.dim, 2.0 * r, interior, n > interior)?;
    let grid = Grid::new(coords, config.dim, 2.0 * r)?;
    let mut out = CriticalPoints { counts: vec![0; max_index + 1], ..Default::default() };
    out.counts[0] = interior as u64;
    for i in 0..interior {
        out.records.push(CriticalPointRecord { index: 0, vertices: vec![i as u32], center: pts[i].to_vec(), radius: 0.0 });
    }
    if max_index == 0 {
        return Ok(out);
    }
    let empty = |c: &[f64], rad: f64, skip: &[usize]| !grid.any_strictly_within(c, rad, skip);
    let mut subset = Vec::with_capacity(max_index + 1);
    fn rec<E: Fn(&[f64], f64, &[usize]) -> bool>(
        g: &crate::geograph::GeometricGraph,
        pts: &[&[f64]],
        interior: usize,
        r: f64,
        max_index: usize,
        subset: &mut Vec<usize>,
        cands: &[usize],
        empty: &E,
        out: &mut CriticalPoints,
    ) {
        for (i, &u) in cands.iter().enumerate() {
            subset.push(u);
            test_subset(pts, subset, r, empty, out);
            if subset.len() <= max_index {
                let next: Vec<usize> = cands[i + 1..].iter().copied().filter(|&w| g.adjacent(u, w)).collect();
                rec(g, pts, interior, r, max_index, subset, &next, empty, out);
            }
            subset.pop();
        }
    }
    for v in 0..interior {
        subset.clear();
        subset.push(v);
        let upper: Vec<usize> = g.adj[v].iter().map(|&u| u as usize).filter(|&u| u > v && u < interior).collect();
        rec(&g, &pts, interior, r, max_index, &mut subset, &upper, &empty, &mut out);
    }
    finish(&mut out);
    Ok(out)
}

struct Site {
    pos: Point2<f64>,
    id: u32,
}

impl HasPosition for Site {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

/// Planar path: index-1 critical points are Gabriel edges and index-2 ones
/// are Delaunay triangles containing their circumcenter. Assumes general
/// position (no four cocircular points).
pub fn critical_points_planar(config: &PointConfiguration, r: f64, max_index: usize, mode: Mode) -> Result<CriticalPoints> {
    if config.dim != 2 {
        return Err(Error::Dimension("planar critical points need d = 2".into()));
    }
    let n = setup(config, r, max_index, mode)?;
    let interior = config.len();
    let coords = &config.all_coords()[..n * 2];
    let pts: Vec<&[f64]> = coords.chunks(2).collect();
    let mut out = CriticalPoints { counts: vec![0; max_index + 1], ..Default::default() };
    out.counts[0] = interior as u64;
    for i in 0..interior {
        out.records.push(CriticalPointRecord { index: 0, vertices: vec![i as u32], center: pts[i].to_vec(), radius: 0.0 });
    }
    if max_index == 0 || n < 2 {
        return Ok(out);
    }
    let sites: Vec<Site> = pts.iter().enumerate().map(|(i, p)| Site { pos: Point2::new(p[0], p[1]), id: i as u32 }).collect();
    let dt: DelaunayTriangulation<Site> =
        DelaunayTriangulation::bulk_load(sites).map_err(|e| Error::Geometry(format!("Delaunay triangulation failed: {e:?}")))?;
    for e in dt.undirected_edges() {
        let [a, b] = e.vertices();
        let (a, b) = (a.data().id as usize, b.data().id as usize);
        if a >= interior || b >= interior {
            continue;
        }
        let d = e.as_directed();
        let opposite: Vec<usize> = [d.opposite_vertex(), d.rev().opposite_vertex()]
            .into_iter()
            .flatten()
            .map(|v| v.data().id as usize)
            .collect();
        // a Delaunay edge's diametral disk is empty iff it misses both
        // opposite vertices
        let empty = |c: &[f64], rad: f64, _: &[usize]| opposite.iter().all(|&o| dist2(pts[o], c) >= rad * rad);
        test_subset(&pts, &[a, b], r, empty, &mut out);
    }
    if max_index >= 2 {
        for f in dt.inner_faces() {
            let ids: Vec<usize> = f.vertices().iter().map(|v| v.data().id as usize).collect();
            if ids.iter().any(|&i| i >= interior) {
                continue;
            }
            test_subset(&pts, &ids, r, |_, _, _| true, &mut out);
        }
    }
    finish(&mut out);
    Ok(out)
}

/// Number of connected components of the geometric graph at r among the
/// window points of a planar configuration. The Euclidean minimum spanning
/// forest lives on Delaunay edges, so only those are merged; this stays
/// cheap when the graph itself is dense.
pub fn planar_components(config: &PointConfiguration, r: f64) -> Result<usize> {
    if config.dim != 2 {
        return Err(Error::Dimension("planar components need d = 2".into()));
    }
    let n = config.len();
    if n < 2 {
        return Ok(n);
    }
    let pts: Vec<&[f64]> = config.interior_coords().chunks(2).collect();
    let sites: Vec<Site> = pts.iter().enumerate().map(|(i, p)| Site { pos: Point2::new(p[0], p[1]), id: i as u32 }).collect();
    let dt: DelaunayTriangulation<Site> =
        DelaunayTriangulation::bulk_load(sites).map_err(|e| Error::Geometry(format!("Delaunay triangulation failed: {e:?}")))?;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = n;
    for e in dt.undirected_edges() {
        let [a, b] = e.vertices();
        let (a, b) = (a.data().id as usize, b.data().id as usize);
        if dist2(pts[a], pts[b]) <= r * r {
            let (x, y) = (find(&mut parent, a), find(&mut parent, b));
            if x != y {
                parent[x] = y;
                comps -= 1;
            }
        }
    }
    Ok(comps)
}

/// Σ (−1)^k N_k(r); compare with χ of the Čech complex at 2r.
pub fn morse_euler(config: &PointConfiguration, r: f64) -> Result<i64> {
    Ok(critical_points(config, r, config.dim, Mode::InteriorOnly)?.euler())
}

/// Critical simplices of the Rips complex at ε under the matching that adds
/// the closest-to-origin admissible vertex. With vertices ranked by norm, a
/// simplex τ with minimal vertex m is critical iff no common neighbor of τ
/// ranks below m, and (for |τ| ≥ 2) m is not the lowest common neighbor of
/// τ ∖ {m}, i.e. some other common neighbor of τ ∖ {m} ranks below m.
pub fn discrete_morse_critical_simplices(config: &PointConfiguration, eps: f64, max_dim: usize) -> Result<Vec<u64>> {
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("ε must be positive, got {eps}")));
    }
    let n = config.len();
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|i| config.point(i).iter().map(|c| c * c).sum::<f64>()).collect();
    order.sort_by(|&a, &b| norms[a].total_cmp(&norms[b]));
    for w in order.windows(2) {
        if norms[w[0]] == norms[w[1]] {
            return Err(Error::Degenerate(format!("points {} and {} have equal norms", w[0], w[1])));
        }
    }
    // relabel so that vertex index = norm rank
    let mut coords = Vec::with_capacity(n * config.dim);
    for &i in &order {
        coords.extend_from_slice(config.point(i));
    }
    let g = graph_from_coords(&coords, config.dim.max(1), eps, n, false)?;
    let mut counts = vec![0u64; max_dim + 1];
    let mut face = Vec::with_capacity(max_dim + 1);
    // common neighborhood of the face, maintained along the expansion
    fn common(adj: &[Vec<u32>], face: &[u32]) -> Vec<u32> {
        let mut c = adj[face[0] as usize].clone();
        for &v in &face[1..] {
            let a = &adj[v as usize];
            c.retain(|x| a.binary_search(x).is_ok());
        }
        c
    }
    fn rec(adj: &[Vec<u32>], max_dim: usize, face: &mut Vec<u32>, cands: &[u32], counts: &mut [u64]) {
        for (i, &u) in cands.iter().enumerate() {
            face.push(u);
            let m = face[0];
            let cn = common(adj, face);
            let up = cn.first().is_some_and(|&w| w < m);
            let down_blocked = common(adj, &face[1..]).iter().any(|&w| w < m && w != m);
            if !up && down_blocked {
                counts[face.len() - 1] += 1;
            }
            if face.len() <= max_dim {
                let next: Vec<u32> = cands[i + 1..].iter().copied().filter(|w| adj[u as usize].binary_search(w).is_ok()).collect();
                rec(adj, max_dim, face, &next, counts);
            }
            face.pop();
        }
    }
    for v in 0..n as u32 {
        // vertex: critical iff no lower-ranked neighbor
        if g.adj[v as usize].first().is_none_or(|&w| w > v) {
            counts[0] += 1;
        }
        if max_dim == 0 {
            continue;
        }
        face.clear();
        face.push(v);
        let upper: Vec<u32> = g.adj[v as usize].iter().copied().filter(|&u| u > v).collect();
        rec(&g.adj, max_dim, &mut face, &upper, &mut counts);
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fix(pts: &[[f64; 2]]) -> PointConfiguration {
        PointConfiguration::fixture(2, &pts.iter().map(|p| p.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn hull_tests() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        assert!(in_open_convex_hull(&[0.5, 0.0], &[&a, &b]).unwrap());
        let obtuse = [[0.0, 0.0], [2.0, 0.0], [1.0, 0.2]];
        let p: Vec<&[f64]> = obtuse.iter().map(|x| x.as_slice()).collect();
        let s = circumsphere(&p).unwrap();
        assert!(!in_open_convex_hull(&s.center, &p).unwrap());
        let acute = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]];
        let p: Vec<&[f64]> = acute.iter().map(|x| x.as_slice()).collect();
        let s = circumsphere(&p).unwrap();
        assert!(in_open_convex_hull(&s.center, &p).unwrap());
        let line = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let p: Vec<&[f64]> = line.iter().map(|x| x.as_slice()).collect();
        assert!(in_open_convex_hull(&[1.0, 0.0], &p).is_err());
    }

    #[test]
    fn two_points() {
        let c = fix(&[[0.0, 0.0], [1.0, 0.0]]);
        for cp in [
            critical_points(&c, 0.6, 2, Mode::InteriorOnly).unwrap(),
            critical_points_enumerated(&c, 0.6, 2, Mode::InteriorOnly).unwrap(),
        ] {
            assert_eq!(cp.counts, vec![2, 1, 0]);
            assert!((cp.records[2].radius - 0.5).abs() < 1e-15);
        }
        assert_eq!(morse_euler(&c, 0.6).unwrap(), 1);
        assert_eq!(morse_euler(&fix(&[[0.0, 0.0]]), 3.0).unwrap(), 1);
    }

    #[test]
    fn triangles() {
        let acute = fix(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]]);
        assert_eq!(critical_points(&acute, 1.0, 2, Mode::InteriorOnly).unwrap().counts[2], 1);
        let obtuse = fix(&[[0.0, 0.0], [2.0, 0.0], [1.0, 0.2]]);
        assert_eq!(critical_points(&obtuse, 5.0, 2, Mode::InteriorOnly).unwrap().counts[2], 0);
        assert_eq!(critical_points_enumerated(&obtuse, 5.0, 2, Mode::InteriorOnly).unwrap().counts[2], 0);
    }

    #[test]
    fn collinear_tally() {
        let c = fix(&[[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]);
        let cp = critical_points_enumerated(&c, 2.0, 2, Mode::InteriorOnly).unwrap();
        assert_eq!(cp.degenerate, 1);
        assert_eq!(cp.counts, vec![3, 2, 0]);
    }

    #[test]
    fn discrete_morse_small() {
        let one = fix(&[[0.3, 0.1]]);
        assert_eq!(discrete_morse_critical_simplices(&one, 1.0, 2).unwrap(), vec![1, 0, 0]);
        let two = fix(&[[0.1, 0.0], [0.5, 0.2]]);
        assert_eq!(discrete_morse_critical_simplices(&two, 1.0, 1).unwrap(), vec![1, 0]);
        let tie = fix(&[[1.0, 0.0], [0.0, 1.0]]);
        assert!(discrete_morse_critical_simplices(&tie, 2.0, 1).is_err());
    }

    #[test]
    fn square_cycle_is_critical() {
        let sq = fix(&[[1.0, 0.01], [0.02, 1.0], [-1.0, 0.03], [0.04, -1.0]]);
        let c = discrete_morse_critical_simplices(&sq, 1.5, 2).unwrap();
        assert_eq!(c[0] as i64 - c[1] as i64 + c[2] as i64, 0);
        assert!(c[1] >= 1);
    }
}
