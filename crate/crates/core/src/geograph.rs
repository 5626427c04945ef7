//! Geometric graphs and the counts G_n (induced Γ-subgraphs), J_n
//! (Γ-components of Φ_n) and J̃_n (Γ-components isolated in the ambient
//! process).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dist2, Grid};
use crate::pointproc::PointConfiguration;

pub const MAX_PATTERN: usize = 8;

/// Connected graph on k ≤ 8 vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphPattern {
    pub k: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphPattern {
    pub fn new(k: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if k == 0 || k > MAX_PATTERN {
            return Err(Error::Pattern(format!("pattern size {k} outside 1..={MAX_PATTERN}")));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b {
                return Err(Error::Pattern(format!("self-loop at {a}")));
            }
            if a >= k || b >= k {
                return Err(Error::Pattern(format!("edge ({a},{b}) outside {k} vertices")));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(Error::Pattern(format!("duplicate edge {e:?}")));
            }
            norm.push(e);
        }
        let p = GraphPattern { k, edges: norm };
        if !mask_connected(&p.masks()) {
            return Err(Error::Pattern("pattern graph is not connected".into()));
        }
        Ok(p)
    }

    pub fn single() -> Self {
        GraphPattern { k: 1, edges: vec![] }
    }

    pub fn edge() -> Self {
        GraphPattern { k: 2, edges: vec![(0, 1)] }
    }

    pub fn path(k: usize) -> Result<Self> {
        Self::new(k, (1..k).map(|i| (i - 1, i)).collect())
    }

    pub fn cycle(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::Pattern("cycle needs k >= 3".into()));
        }
        Self::new(k, (0..k).map(|i| (i, (i + 1) % k)).collect())
    }

    pub fn clique(k: usize) -> Result<Self> {
        let mut e = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                e.push((i, j));
            }
        }
        Self::new(k, e)
    }

    pub fn triangle() -> Self {
        Self::clique(3).unwrap()
    }

    pub fn star(k: usize) -> Result<Self> {
        Self::new(k, (1..k).map(|i| (0, i)).collect())
    }

    /// Adjacency bitmasks, one byte per vertex.
    pub fn masks(&self) -> Vec<u8> {
        let mut m = vec![0u8; self.k];
        for &(a, b) in &self.edges {
            m[a] |= 1 << b;
            m[b] |= 1 << a;
        }
        m
    }
}

fn mask_connected(m: &[u8]) -> bool {
    if m.is_empty() {
        return false;
    }
    let full: u16 = (1u16 << m.len()) - 1;
    let mut seen: u16 = 1;
    let mut frontier: u16 = 1;
    while frontier != 0 {
        let mut next = 0u16;
        for (i, &mi) in m.iter().enumerate() {
            if frontier & (1 << i) != 0 {
                next |= mi as u16;
            }
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen & full == full
}

/// Graph isomorphism of two graphs given as adjacency masks on the same
/// number of vertices: degree-sequence pruning, then backtracking.
pub fn masks_isomorphic(a: &[u8], b: &[u8]) -> bool {
    let k = a.len();
    if b.len() != k {
        return false;
    }
    let da: Vec<u32> = a.iter().map(|m| m.count_ones()).collect();
    let db: Vec<u32> = b.iter().map(|m| m.count_ones()).collect();
    let (mut sa, mut sb) = (da.clone(), db.clone());
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return false;
    }
    let mut map = [usize::MAX; MAX_PATTERN];
    let mut used = 0u16;
    fn go(i: usize, a: &[u8], b: &[u8], da: &[u32], db: &[u32], map: &mut [usize; MAX_PATTERN], used: &mut u16) -> bool {
        if i == a.len() {
            return true;
        }
        for t in 0..b.len() {
            if *used & (1 << t) != 0 || da[i] != db[t] {
                continue;
            }
            let ok = (0..i).all(|j| ((a[i] >> j) & 1) == ((b[t] >> map[j]) & 1));
            if ok {
                map[i] = t;
                *used |= 1 << t;
                if go(i + 1, a, b, da, db, map, used) {
                    return true;
                }
                *used &= !(1 << t);
            }
        }
        false
    }
    go(0, a, b, &da, &db, &mut map, &mut used)
}

/// Induced adjacency masks of `pts` at radius r (closed).
pub fn point_masks(pts: &[&[f64]], r: f64) -> Vec<u8> {
    let r2 = r * r;
    let mut m = vec![0u8; pts.len()];
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if dist2(pts[i], pts[j]) <= r2 {
                m[i] |= 1 << j;
                m[j] |= 1 << i;
            }
        }
    }
    m
}

/// h_Γ: 1 iff the geometric graph on `points` at radius r is isomorphic to Γ.
pub fn pattern_indicator(points: &[Vec<f64>], r: f64, pattern: &GraphPattern) -> u8 {
    if points.len() != pattern.k {
        return 0;
    }
    let pts: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
    masks_isomorphic(&point_masks(&pts, r), &pattern.masks()) as u8
}

/// G(Φ, r) over the window points, or over all sampled points.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    pub r: f64,
    pub ambient: bool,
    /// Number of window points; vertices at or above it are margin points.
    pub interior: usize,
    pub adj: Vec<Vec<u32>>,
}

impl GeometricGraph {
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&(j as u32)).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|v| v.len()).sum::<usize>() / 2
    }

    /// Adjacency masks of the induced subgraph on `vs` (|vs| ≤ 8).
    pub fn induced_masks(&self, vs: &[usize]) -> Vec<u8> {
        let mut m = vec![0u8; vs.len()];
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                if self.adjacent(vs[i], vs[j]) {
                    m[i] |= 1 << j;
                    m[j] |= 1 << i;
                }
            }
        }
        m
    }
}

pub fn build_graph(config: &PointConfiguration, r: f64, use_ambient: bool) -> Result<GeometricGraph> {
    if !(r > 0.0) {
        return Err(Error::Invalid(format!("radius must be positive, got {r}")));
    }
    if use_ambient {
        config.require_margin(r)?;
    }
    let n = config.visible(use_ambient);
    let coords = &config.all_coords()[..n * config.dim];
    graph_from_coords(coords, config.dim, r, config.len(), use_ambient)
}

pub(crate) fn graph_from_coords(coords: &[f64], dim: usize, r: f64, interior: usize, ambient: bool) -> Result<GeometricGraph> {
    let n = coords.len() / dim;
    let grid = Grid::new(coords, dim, r)?;
    let adj = (0..n)
        .map(|i| {
            let mut v = Vec::new();
            grid.for_each_within(grid.point(i), r, |j| {
                if j != i {
                    v.push(j as u32);
                }
            });
            v.sort_unstable();
            v
        })
        .collect();
    Ok(GeometricGraph { r, ambient, interior: interior.min(n), adj })
}

/// Enumerate every connected induced k-vertex subgraph exactly once
/// (Wernicke's ESU). `f` receives the vertex set, not sorted.
pub fn for_each_connected_subset<F: FnMut(&[usize])>(g: &GeometricGraph, k: usize, mut f: F) {
    if k == 0 {
        return;
    }
    let mut sub = Vec::with_capacity(k);
    for v in 0..g.len() {
        sub.clear();
        sub.push(v);
        let ext: Vec<usize> = g.adj[v].iter().map(|&u| u as usize).filter(|&u| u > v).collect();
        esu(g, k, v, &mut sub, ext, &mut f);
    }
}

fn esu<F: FnMut(&[usize])>(g: &GeometricGraph, k: usize, root: usize, sub: &mut Vec<usize>, mut ext: Vec<usize>, f: &mut F) {
    if sub.len() == k {
        f(sub);
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in &g.adj[w] {
            let u = u as usize;
            if u <= root || sub.contains(&u) || u == w || next.contains(&u) {
                continue;
            }
            // exclusive neighborhood: not adjacent to the current subset
            if sub.iter().any(|&s| g.adjacent(s, u)) {
                continue;
            }
            next.push(u);
        }
        sub.push(w);
        esu(g, k, root, sub, next, f);
        sub.pop();
    }
}

/// G_n: induced Γ-subgraphs among the window points.
pub fn count_subgraphs(config: &PointConfiguration, r: f64, pattern: &GraphPattern) -> Result<u64> {
    let g = build_graph(config, r, false)?;
    Ok(count_subgraphs_in(&g, pattern, |_| true))
}

/// Induced Γ-subgraphs of `g` whose vertex set satisfies `keep`.
pub fn count_subgraphs_in<P: Fn(&[usize]) -> bool>(g: &GeometricGraph, pattern: &GraphPattern, keep: P) -> u64 {
    if pattern.k == 1 {
        return (0..g.len()).filter(|&v| keep(&[v])).count() as u64;
    }
    let pm = pattern.masks();
    let ne = pattern.edges.len() as u32;
    let mut count = 0u64;
    for_each_connected_subset(g, pattern.k, |s| {
        let m = g.induced_masks(s);
        if m.iter().map(|x| x.count_ones()).sum::<u32>() == 2 * ne && masks_isomorphic(&m, &pm) && keep(s) {
            count += 1;
        }
    });
    count
}

/// Induced Γ-subgraphs with at least one vertex within `width` of the
/// window boundary.
pub fn count_subgraphs_in_band(config: &PointConfiguration, r: f64, pattern: &GraphPattern, width: f64) -> Result<u64> {
    let g = build_graph(config, r, false)?;
    let inner = config.window.half() - width;
    Ok(count_subgraphs_in(&g, pattern, |s| {
        s.iter().any(|&v| config.point(v).iter().any(|c| c.abs() > inner))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    InteriorOnly,
    Ambient,
}

/// Union-find partition of the vertices; components listed by smallest
/// vertex, members sorted.
pub fn connected_components(g: &GeometricGraph) -> Vec<Vec<usize>> {
    let n = g.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for &j in &g.adj[i] {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j as usize));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        comps.entry(root).or_default().push(i);
    }
    comps.into_values().collect()
}

/// J_n (interior-only) or J̃_n (ambient): Γ-components of window points.
pub fn count_components(config: &PointConfiguration, r: f64, pattern: &GraphPattern, mode: Mode) -> Result<u64> {
    let ambient = mode == Mode::Ambient;
    let g = build_graph(config, r, ambient)?;
    Ok(count_components_in(&g, pattern))
}

pub fn count_components_in(g: &GeometricGraph, pattern: &GraphPattern) -> u64 {
    let pm = pattern.masks();
    connected_components(g)
        .iter()
        .filter(|c| c.len() == pattern.k && c.iter().all(|&v| v < g.interior))
        .filter(|c| masks_isomorphic(&g.induced_masks(c), &pm))
        .count() as u64
}

/// Named patterns. Built-in names: `single`, `edge`, `triangle`, `path_k`,
/// `cycle_k`, `star_k`, `clique_k`, `cross_polytope_k`; extra entries can be
/// loaded from a JSON catalog `{"name": {"k": 4, "edges": [[0,1], ...]}}`.
#[derive(Debug, Clone, Default)]
pub struct PatternCatalog {
    extra: BTreeMap<String, GraphPattern>,
}

impl PatternCatalog {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, GraphPattern> =
            serde_json::from_str(text).map_err(|e| Error::Pattern(format!("catalog: {e}")))?;
        let mut extra = BTreeMap::new();
        for (name, p) in raw {
            extra.insert(name, GraphPattern::new(p.k, p.edges)?);
        }
        Ok(PatternCatalog { extra })
    }

    pub fn get(&self, name: &str) -> Result<GraphPattern> {
        if let Some(p) = self.extra.get(name) {
            return Ok(p.clone());
        }
        let (base, num) = match name.rsplit_once('_') {
            Some((b, n)) => match n.parse::<usize>() {
                Ok(k) => (b, Some(k)),
                Err(_) => (name, None),
            },
            None => (name, None),
        };
        match (base, num) {
            ("single", None) => Ok(GraphPattern::single()),
            ("edge", None) => Ok(GraphPattern::edge()),
            ("triangle", None) => Ok(GraphPattern::triangle()),
            ("path", Some(k)) => GraphPattern::path(k),
            ("cycle", Some(k)) => GraphPattern::cycle(k),
            ("star", Some(k)) => GraphPattern::star(k),
            ("clique", Some(k)) => GraphPattern::clique(k),
            ("cross_polytope", Some(k)) => crate::complexes::cross_polytope_skeleton(k),
            _ => Err(Error::Pattern(format!("unknown pattern '{name}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collinear() -> PointConfiguration {
        PointConfiguration::fixture(2, &[vec![0.0, 0.0], vec![0.6, 0.0], vec![1.2, 0.0]])
    }

    #[test]
    fn collinear_graph() {
        let g = build_graph(&collinear(), 1.0, false).unwrap();
        assert_eq!(g.adj, vec![vec![1], vec![0, 2], vec![1]]);
    }

    #[test]
    fn single_point_graph() {
        let c = PointConfiguration::fixture(2, &[vec![0.3, 0.3]]);
        let g = build_graph(&c, 1.0, false).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn closed_adjacency() {
        let c = PointConfiguration::fixture(2, &[vec![0.0, 0.0], vec![0.0, 0.5]]);
        assert_eq!(build_graph(&c, 0.5, false).unwrap().edge_count(), 1);
    }

    #[test]
    fn indicators() {
        let pair = vec![vec![0.0, 0.0], vec![0.0, 0.5]];
        assert_eq!(pattern_indicator(&pair, 1.0, &GraphPattern::edge()), 1);
        let three = vec![vec![0.0, 0.0], vec![0.6, 0.0], vec![1.2, 0.0]];
        assert_eq!(pattern_indicator(&three, 1.0, &GraphPattern::triangle()), 0);
        assert_eq!(pattern_indicator(&three, 1.0, &GraphPattern::path(3).unwrap()), 1);
    }

    #[test]
    fn collinear_counts() {
        let c = collinear();
        assert_eq!(count_subgraphs(&c, 1.0, &GraphPattern::edge()).unwrap(), 2);
        assert_eq!(count_subgraphs(&c, 1.0, &GraphPattern::path(3).unwrap()).unwrap(), 1);
        let p3 = GraphPattern::path(3).unwrap();
        assert_eq!(count_components(&c, 1.0, &p3, Mode::InteriorOnly).unwrap(), 1);
        assert_eq!(count_components(&c, 1.0, &GraphPattern::edge(), Mode::InteriorOnly).unwrap(), 0);
    }

    #[test]
    fn isolated_points() {
        let c = PointConfiguration::fixture(2, &[vec![0.0, 0.0], vec![3.0, 0.0]]);
        assert_eq!(count_components(&c, 1.0, &GraphPattern::single(), Mode::InteriorOnly).unwrap(), 2);
    }

    #[test]
    fn component_shapes() {
        let c = PointConfiguration::fixture(1, &[vec![0.0], vec![5.0]]);
        let g = build_graph(&c, 1.0, false).unwrap();
        assert_eq!(connected_components(&g).len(), 2);
        let empty = GeometricGraph { r: 1.0, ambient: false, interior: 5, adj: vec![vec![]; 5] };
        assert_eq!(connected_components(&empty).len(), 5);
        let path = GeometricGraph { r: 1.0, ambient: false, interior: 4, adj: vec![vec![1], vec![0, 2], vec![1, 3], vec![2]] };
        assert_eq!(connected_components(&path).len(), 1);
    }

    #[test]
    fn ambient_requires_margin() {
        let c = collinear();
        assert!(matches!(build_graph(&c, 1.0, true), Err(Error::Margin { .. })));
    }

    #[test]
    fn pattern_validation() {
        assert!(GraphPattern::new(3, vec![(0, 1)]).is_err());
        assert!(GraphPattern::new(2, vec![(0, 0)]).is_err());
        assert!(GraphPattern::new(2, vec![(0, 1), (1, 0)]).is_err());
        assert!(GraphPattern::new(9, vec![]).is_err());
    }

    #[test]
    fn isomorphism_distinguishes_star_and_path() {
        let s = GraphPattern::star(4).unwrap().masks();
        let p = GraphPattern::path(4).unwrap().masks();
        assert!(!masks_isomorphic(&s, &p));
        let relabeled = GraphPattern::new(4, vec![(2, 0), (2, 1), (2, 3)]).unwrap().masks();
        assert!(masks_isomorphic(&s, &relabeled));
    }

    #[test]
    fn catalog_names() {
        let cat = PatternCatalog::default();
        assert_eq!(cat.get("path_4").unwrap().edges.len(), 3);
        assert_eq!(cat.get("cross_polytope_1").unwrap().edges.len(), 4);
        assert!(cat.get("nonesuch").is_err());
        let extra = PatternCatalog::from_json(r#"{"paw": {"k": 4, "edges": [[0,1],[1,2],[2,0],[2,3]]}}"#).unwrap();
        assert_eq!(extra.get("paw").unwrap().k, 4);
    }
}
