//! Čech and Vietoris–Rips complexes and filtrations, and the subcomplex
//! counts C̃_n (induced) and C̃*_n (isolated).
//!
//! Radius convention: the Čech parameter ε is a ball diameter, so a face is
//! present iff the smallest enclosing ball of its vertices has radius ≤ ε/2.
//! Rips uses the geometric graph at radius ε, so both share their 1-skeleton.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geograph::{for_each_connected_subset, graph_from_coords, GeometricGraph, GraphPattern, Mode, MAX_PATTERN};
use crate::geometry::miniball;
use crate::pointproc::PointConfiguration;
use crate::stats::fmt17;

/// Absolute tolerance on the miniball radius comparison.
pub const MINIBALL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexKind {
    Rips,
    Cech,
}

impl ComplexKind {
    pub fn name(self) -> &'static str {
        match self {
            ComplexKind::Rips => "rips",
            ComplexKind::Cech => "cech",
        }
    }
}

/// Faces grouped by dimension; each list sorted lexicographically, each face
/// strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SimplicialComplex {
    pub faces: Vec<Vec<Vec<u32>>>,
}

impl SimplicialComplex {
    /// Sort and group arbitrary faces, then check closure.
    pub fn from_faces(faces: Vec<Vec<u32>>) -> Result<Self> {
        let mut by_dim: Vec<Vec<Vec<u32>>> = Vec::new();
        for mut f in faces {
            if f.is_empty() {
                return Err(Error::Malformed("empty face".into()));
            }
            f.sort_unstable();
            if f.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Malformed(format!("repeated vertex in {f:?}")));
            }
            let p = f.len() - 1;
            if by_dim.len() <= p {
                by_dim.resize(p + 1, Vec::new());
            }
            by_dim[p].push(f);
        }
        for l in by_dim.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        let c = SimplicialComplex { faces: by_dim };
        c.validate()?;
        Ok(c)
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.faces.iter().rposition(|l| !l.is_empty())
    }

    pub fn count(&self, p: usize) -> usize {
        self.faces.get(p).map_or(0, |l| l.len())
    }

    pub fn contains(&self, face: &[u32]) -> bool {
        match face.len().checked_sub(1).and_then(|p| self.faces.get(p)) {
            Some(l) => l.binary_search_by(|f| f.as_slice().cmp(face)).is_ok(),
            None => false,
        }
    }

    /// Downward closure, sortedness and no duplicates.
    pub fn validate(&self) -> Result<()> {
        for (p, list) in self.faces.iter().enumerate() {
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Malformed(format!("faces of dim {p} unsorted or duplicated at {:?}", w[1])));
                }
            }
            for f in list {
                if f.len() != p + 1 || f.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Malformed(format!("bad face {f:?} in dimension {p}")));
                }
                if p == 0 {
                    continue;
                }
                let mut facet = Vec::with_capacity(p);
                for skip in 0..=p {
                    facet.clear();
                    facet.extend(f.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                    if !self.contains(&facet) {
                        return Err(Error::Malformed(format!("face {f:?} lacks facet {facet:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_subcomplex_of(&self, other: &SimplicialComplex) -> bool {
        self.faces.iter().flatten().all(|f| other.contains(f))
    }

    pub fn all_faces(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.faces.iter().flatten()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSimplex {
    pub vertices: Vec<u32>,
    pub birth: f64,
}

impl FilteredSimplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Simplices with birth values, kept sorted by (birth, dim, lex).
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    pub kind: ComplexKind,
    pub eps_max: f64,
    pub simplices: Vec<FilteredSimplex>,
}

impl Filtration {
    pub fn new(kind: ComplexKind, eps_max: f64, mut simplices: Vec<FilteredSimplex>) -> Self {
        sort_filtration(&mut simplices);
        Filtration { kind, eps_max, simplices }
    }

    /// Check monotonicity and closure; reports the first offending pair.
    pub fn validate(&self) -> Result<()> {
        let mut birth: HashMap<&[u32], f64> = HashMap::with_capacity(self.simplices.len());
        for s in &self.simplices {
            birth.insert(&s.vertices, s.birth);
        }
        for s in &self.simplices {
            if s.vertices.len() < 2 {
                continue;
            }
            for skip in 0..s.vertices.len() {
                let facet: Vec<u32> = s.vertices.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                match birth.get(facet.as_slice()) {
                    None => return Err(Error::Malformed(format!("simplex {:?} lacks facet {facet:?}", s.vertices))),
                    Some(&b) if b > s.birth => {
                        return Err(Error::NonMonotone {
                            face: facet.clone(),
                            face_birth: b,
                            facet: s.vertices.clone(),
                            facet_birth: s.birth,
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Complex of all simplices born at or before ε.
    pub fn slice(&self, eps: f64) -> SimplicialComplex {
        let mut faces: Vec<Vec<Vec<u32>>> = Vec::new();
        for s in self.simplices.iter().filter(|s| s.birth <= eps) {
            let p = s.dim();
            if faces.len() <= p {
                faces.resize(p + 1, Vec::new());
            }
            faces[p].push(s.vertices.clone());
        }
        for l in faces.iter_mut() {
            l.sort_unstable();
        }
        SimplicialComplex { faces }
    }

    /// `dim;v0,v1,...;birth`, one simplex per line.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for s in &self.simplices {
            let vs: Vec<String> = s.vertices.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{};{};{}", s.dim(), vs.join(","), fmt17(s.birth));
        }
        out
    }

    pub fn parse(kind: ComplexKind, text: &str) -> Result<Self> {
        let mut simplices = Vec::new();
        let mut eps_max: f64 = 0.0;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(';').collect();
            let bad = || Error::Malformed(format!("line {}: '{line}'", ln + 1));
            if parts.len() != 3 {
                return Err(bad());
            }
            let dim: usize = parts[0].parse().map_err(|_| bad())?;
            let vertices: Vec<u32> = parts[1].split(',').map(|v| v.parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
            let birth: f64 = parts[2].parse().map_err(|_| bad())?;
            if vertices.len() != dim + 1 {
                return Err(bad());
            }
            eps_max = eps_max.max(birth);
            simplices.push(FilteredSimplex { vertices, birth });
        }
        Ok(Filtration::new(kind, eps_max, simplices))
    }
}

pub(crate) fn sort_filtration(s: &mut [FilteredSimplex]) {
    s.sort_by(|a, b| {
        a.birth
            .total_cmp(&b.birth)
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
}

fn point_slices(config: &PointConfiguration, n: usize) -> Vec<&[f64]> {
    (0..n).map(|i| config.point(i)).collect()
}

/// Sorted intersection of two sorted lists.
fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Clique expansion over sorted upper neighbor lists. `accept` may veto a
/// clique; vetoed cliques are not expanded (valid for monotone criteria).
fn expand_cliques<F: FnMut(&[u32]) -> Option<f64>>(
    adj: &[Vec<u32>],
    max_dim: usize,
    mut accept: F,
) -> Vec<FilteredSimplex> {
    let mut out = Vec::new();
    let mut face = Vec::with_capacity(max_dim + 1);
    fn rec<F: FnMut(&[u32]) -> Option<f64>>(
        adj: &[Vec<u32>],
        max_dim: usize,
        face: &mut Vec<u32>,
        cands: &[u32],
        accept: &mut F,
        out: &mut Vec<FilteredSimplex>,
    ) {
        for (idx, &u) in cands.iter().enumerate() {
            face.push(u);
            if let Some(b) = accept(face) {
                out.push(FilteredSimplex { vertices: face.clone(), birth: b });
                if face.len() <= max_dim {
                    let next = intersect(&cands[idx + 1..], &adj[u as usize]);
                    if !next.is_empty() {
                        rec(adj, max_dim, face, &next, accept, out);
                    }
                }
            }
            face.pop();
        }
    }
    for v in 0..adj.len() {
        face.clear();
        face.push(v as u32);
        out.push(FilteredSimplex { vertices: face.clone(), birth: 0.0 });
        if max_dim == 0 {
            continue;
        }
        let upper: Vec<u32> = adj[v].iter().copied().filter(|&u| u as usize > v).collect();
        rec(adj, max_dim, &mut face, &upper, &mut accept, &mut out);
    }
    out
}

fn graph_on(config: &PointConfiguration, n: usize, eps: f64) -> Result<GeometricGraph> {
    graph_from_coords(&config.all_coords()[..n * config.dim], config.dim, eps, config.len(), n > config.len())
}

fn to_complex(simplices: Vec<FilteredSimplex>) -> SimplicialComplex {
    let mut faces: Vec<Vec<Vec<u32>>> = Vec::new();
    for s in simplices {
        let p = s.dim();
        if faces.len() <= p {
            faces.resize(p + 1, Vec::new());
        }
        faces[p].push(s.vertices);
    }
    for l in faces.iter_mut() {
        l.sort_unstable();
    }
    SimplicialComplex { faces }
}

fn max_pairwise(pts: &[&[f64]], face: &[u32]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..face.len() {
        for j in i + 1..face.len() {
            m = m.max(crate::grid::dist(pts[face[i] as usize], pts[face[j] as usize]));
        }
    }
    m
}

pub fn miniball_radius(pts: &[&[f64]], face: &[u32]) -> f64 {
    let sub: Vec<&[f64]> = face.iter().map(|&v| pts[v as usize]).collect();
    miniball(&sub).1
}

/// Vietoris–Rips complex of the window points at ε.
pub fn build_rips(config: &PointConfiguration, eps: f64, max_dim: usize) -> Result<SimplicialComplex> {
    rips_on(config, config.len(), eps, max_dim)
}

fn rips_on(config: &PointConfiguration, n: usize, eps: f64, max_dim: usize) -> Result<SimplicialComplex> {
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("ε must be positive, got {eps}")));
    }
    let g = graph_on(config, n, eps)?;
    Ok(to_complex(expand_cliques(&g.adj, max_dim, |_| Some(0.0))))
}

/// Čech complex of the window points at ε (balls of radius ε/2).
pub fn build_cech(config: &PointConfiguration, eps: f64, max_dim: usize) -> Result<SimplicialComplex> {
    cech_on(config, config.len(), eps, max_dim)
}

fn cech_on(config: &PointConfiguration, n: usize, eps: f64, max_dim: usize) -> Result<SimplicialComplex> {
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("ε must be positive, got {eps}")));
    }
    let g = graph_on(config, n, eps)?;
    let pts = point_slices(config, n);
    let simplices = expand_cliques(&g.adj, max_dim, |f| {
        if f.len() == 2 || miniball_radius(&pts, f) <= eps / 2.0 + MINIBALL_TOL {
            Some(0.0)
        } else {
            None
        }
    });
    Ok(to_complex(simplices))
}

pub fn build(kind: ComplexKind, config: &PointConfiguration, eps: f64, max_dim: usize) -> Result<SimplicialComplex> {
    match kind {
        ComplexKind::Rips => build_rips(config, eps, max_dim),
        ComplexKind::Cech => build_cech(config, eps, max_dim),
    }
}

/// Rips filtration up to ε_max; births are maximal pairwise distances.
pub fn rips_filtration(config: &PointConfiguration, max_dim: usize, eps_max: f64) -> Result<Filtration> {
    if !(eps_max > 0.0) {
        return Err(Error::Invalid(format!("ε_max must be positive, got {eps_max}")));
    }
    let n = config.len();
    let g = graph_on(config, n, eps_max)?;
    let pts = point_slices(config, n);
    let simplices = expand_cliques(&g.adj, max_dim, |f| Some(max_pairwise(&pts, f)));
    Ok(Filtration::new(ComplexKind::Rips, eps_max, simplices))
}

/// Čech filtration up to ε_max; births are miniball diameters, raised to the
/// largest facet birth where rounding would break monotonicity.
pub fn cech_filtration(config: &PointConfiguration, max_dim: usize, eps_max: f64) -> Result<Filtration> {
    if !(eps_max > 0.0) {
        return Err(Error::Invalid(format!("ε_max must be positive, got {eps_max}")));
    }
    let n = config.len();
    let g = graph_on(config, n, eps_max)?;
    let pts = point_slices(config, n);
    let mut simplices = expand_cliques(&g.adj, max_dim, |f| {
        let b = if f.len() == 2 {
            crate::grid::dist(pts[f[0] as usize], pts[f[1] as usize])
        } else {
            2.0 * miniball_radius(&pts, f)
        };
        (b <= eps_max + 2.0 * MINIBALL_TOL).then_some(b)
    });
    simplices.sort_by_key(|s| s.vertices.len());
    let mut birth: HashMap<Vec<u32>, f64> = HashMap::with_capacity(simplices.len());
    for s in simplices.iter_mut() {
        if s.vertices.len() > 2 {
            for skip in 0..s.vertices.len() {
                let facet: Vec<u32> = s.vertices.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                if let Some(&b) = birth.get(&facet) {
                    s.birth = s.birth.max(b);
                }
            }
        }
        birth.insert(s.vertices.clone(), s.birth);
    }
    Ok(Filtration::new(ComplexKind::Cech, eps_max, simplices))
}

pub fn filtration(kind: ComplexKind, config: &PointConfiguration, max_dim: usize, eps_max: f64) -> Result<Filtration> {
    match kind {
        ComplexKind::Rips => rips_filtration(config, max_dim, eps_max),
        ComplexKind::Cech => cech_filtration(config, max_dim, eps_max),
    }
}

/// Face set of a complex on k ≤ 8 labelled vertices: bit `m` is set iff the
/// vertex subset with bitmask m is a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FaceSet([u64; 4]);

impl FaceSet {
    pub fn has(&self, m: u8) -> bool {
        self.0[(m >> 6) as usize] >> (m & 63) & 1 == 1
    }

    pub fn set(&mut self, m: u8) {
        self.0[(m >> 6) as usize] |= 1 << (m & 63);
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (1..=255u8).filter(move |&m| self.has(m))
    }

    pub fn len(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Face counts by dimension.
    pub fn profile(&self) -> [u16; MAX_PATTERN] {
        let mut p = [0u16; MAX_PATTERN];
        for m in self.iter() {
            p[m.count_ones() as usize - 1] += 1;
        }
        p
    }

    fn edge_masks(&self, k: usize) -> Vec<u8> {
        let mut adj = vec![0u8; k];
        for i in 0..k {
            for j in i + 1..k {
                if self.has((1 << i) | (1 << j)) {
                    adj[i] |= 1 << j;
                    adj[j] |= 1 << i;
                }
            }
        }
        adj
    }
}

fn permute_mask(m: u8, map: &[usize]) -> u8 {
    let mut out = 0u8;
    for (i, &t) in map.iter().enumerate() {
        if m >> i & 1 == 1 {
            out |= 1 << t;
        }
    }
    out
}

/// Simplicial isomorphism of two face sets on k vertices: backtracking over
/// 1-skeleton isomorphisms, each checked on all faces.
pub fn faces_isomorphic(a: &FaceSet, b: &FaceSet, k: usize) -> bool {
    if a.profile() != b.profile() {
        return false;
    }
    let ea = a.edge_masks(k);
    let eb = b.edge_masks(k);
    let da: Vec<u32> = ea.iter().map(|m| m.count_ones()).collect();
    let db: Vec<u32> = eb.iter().map(|m| m.count_ones()).collect();
    let mut map = vec![usize::MAX; k];
    let mut used = 0u16;
    #[allow(clippy::too_many_arguments)]
    fn go(i: usize, k: usize, ea: &[u8], eb: &[u8], da: &[u32], db: &[u32], map: &mut Vec<usize>, used: &mut u16, a: &FaceSet, b: &FaceSet) -> bool {
        if i == k {
            return a.iter().all(|m| b.has(permute_mask(m, map)));
        }
        for t in 0..k {
            if *used >> t & 1 == 1 || da[i] != db[t] {
                continue;
            }
            if (0..i).all(|j| (ea[i] >> j & 1) == (eb[t] >> map[j] & 1)) {
                map[i] = t;
                *used |= 1 << t;
                if go(i + 1, k, ea, eb, da, db, map, used, a, b) {
                    return true;
                }
                *used &= !(1 << t);
            }
        }
        false
    }
    go(0, k, &ea, &eb, &da, &db, &mut map, &mut used, a, b)
}

/// Finite complex on k ≤ 8 vertices with a connected 1-skeleton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexPattern {
    pub k: usize,
    /// Faces of dimension ≥ 1; vertices are implicit.
    pub faces: Vec<Vec<usize>>,
}

impl ComplexPattern {
    pub fn new(k: usize, faces: Vec<Vec<usize>>) -> Result<Self> {
        let p = ComplexPattern { k, faces };
        p.face_set()?;
        Ok(p)
    }

    pub fn face_set(&self) -> Result<FaceSet> {
        let k = self.k;
        if k == 0 || k > MAX_PATTERN {
            return Err(Error::Pattern(format!("pattern size {k} outside 1..={MAX_PATTERN}")));
        }
        let mut fs = FaceSet::default();
        for v in 0..k {
            fs.set(1 << v);
        }
        for f in &self.faces {
            let mut m = 0u8;
            for &v in f {
                if v >= k {
                    return Err(Error::Pattern(format!("face {f:?} outside {k} vertices")));
                }
                if m >> v & 1 == 1 {
                    return Err(Error::Pattern(format!("repeated vertex in {f:?}")));
                }
                m |= 1 << v;
            }
            if m == 0 {
                return Err(Error::Pattern("empty face".into()));
            }
            fs.set(m);
        }
        for m in fs.iter() {
            for v in 0..k {
                let sub = m & !(1 << v);
                if m >> v & 1 == 1 && sub != 0 && !fs.has(sub) {
                    return Err(Error::Pattern(format!("pattern not downward closed at mask {m:#b}")));
                }
            }
        }
        let adj = fs.edge_masks(k);
        let mut seen = 1u16;
        let mut frontier = 1u16;
        while frontier != 0 {
            let mut next = 0u16;
            for (i, &a) in adj.iter().enumerate() {
                if frontier >> i & 1 == 1 {
                    next |= a as u16;
                }
            }
            frontier = next & !seen;
            seen |= next;
        }
        if seen != (1u16 << k) - 1 {
            return Err(Error::Pattern("pattern 1-skeleton is not connected".into()));
        }
        Ok(fs)
    }

    /// Full simplex on k vertices.
    pub fn simplex(k: usize) -> Result<Self> {
        let full = if k >= 8 { 255u8 } else { ((1u16 << k) - 1) as u8 };
        Self::from_masks(k, (1..=full).filter(|m| m & !full == 0 && m.count_ones() >= 2))
    }

    fn from_masks<I: IntoIterator<Item = u8>>(k: usize, masks: I) -> Result<Self> {
        let faces = masks.into_iter().map(|m| (0..k).filter(|&v| m >> v & 1 == 1).collect()).collect();
        Self::new(k, faces)
    }
}

/// O_k: 1-skeleton of the (k+1)-dimensional cross-polytope, the complete
/// graph on 2k+2 vertices minus the antipodal matching i ↔ i+k+1.
pub fn cross_polytope_skeleton(k: usize) -> Result<GraphPattern> {
    if k == 0 || 2 * k + 2 > MAX_PATTERN {
        return Err(Error::Pattern(format!("cross-polytope index {k} outside 1..=3")));
    }
    let n = 2 * k + 2;
    let mut e = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if j != i + k + 1 {
                e.push((i, j));
            }
        }
    }
    GraphPattern::new(n, e)
}

/// Γ̃_k: every (k−1)-subset of k vertices is a face, the full set is not.
pub fn empty_simplex(k: usize) -> Result<ComplexPattern> {
    if !(3..=MAX_PATTERN).contains(&k) {
        return Err(Error::Pattern(format!("empty simplex needs 3 <= k <= {MAX_PATTERN}, got {k}")));
    }
    let full = ((1u16 << k) - 1) as u8;
    ComplexPattern::from_masks(k, (1..=full).filter(|&m| m.count_ones() >= 2 && m != full))
}

fn simplex_faces(verts: &[usize]) -> Vec<Vec<usize>> {
    let n = verts.len();
    (1u16..(1 << n))
        .filter(|m| m.count_ones() >= 2)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).map(|i| verts[i]).collect())
        .collect()
}

/// Γ̃′_k: a (k−2)-simplex with two pendant edges at one vertex (k+1 vertices).
/// For k = 3 this is the star with three leaves.
pub fn empty_simplex_edge(k: usize) -> Result<ComplexPattern> {
    if k < 2 || k + 1 > MAX_PATTERN {
        return Err(Error::Pattern(format!("attachment index {k} outside 2..={}", MAX_PATTERN - 1)));
    }
    let base: Vec<usize> = (0..k - 1).collect();
    let mut faces = simplex_faces(&base);
    faces.push(vec![0, k - 1]);
    faces.push(vec![0, k]);
    ComplexPattern::new(k + 1, faces)
}

/// Γ̃″_k: a (k−2)-simplex with a path of length 2 leaving one vertex
/// (k+1 vertices). For k = 3 this is the path on four vertices.
pub fn empty_simplex_path(k: usize) -> Result<ComplexPattern> {
    if k < 2 || k + 1 > MAX_PATTERN {
        return Err(Error::Pattern(format!("attachment index {k} outside 2..={}", MAX_PATTERN - 1)));
    }
    let base: Vec<usize> = (0..k - 1).collect();
    let mut faces = simplex_faces(&base);
    faces.push(vec![0, k - 1]);
    faces.push(vec![k - 1, k]);
    ComplexPattern::new(k + 1, faces)
}

/// Čech face set induced on the points `pts` (k ≤ 8) at ε.
pub fn induced_cech_faces(pts: &[&[f64]], eps: f64) -> FaceSet {
    let k = pts.len();
    let mut fs = FaceSet::default();
    let mut masks: Vec<u8> = (1..=(((1u16 << k) - 1) as u8)).collect();
    masks.sort_by_key(|m| m.count_ones());
    for m in masks {
        if m.count_ones() == 1 {
            fs.set(m);
            continue;
        }
        let closed = (0..k).filter(|&v| m >> v & 1 == 1).all(|v| fs.has(m & !(1 << v)));
        if !closed {
            continue;
        }
        let sub: Vec<&[f64]> = (0..k).filter(|&v| m >> v & 1 == 1).map(|v| pts[v]).collect();
        if miniball(&sub).1 <= eps / 2.0 + MINIBALL_TOL {
            fs.set(m);
        }
    }
    fs
}

/// C̃_n (isolated = false) or C̃*_n (isolated = true): k-subsets of window
/// points whose induced Čech complex at ε is isomorphic to the pattern.
/// Isolation means no other point within ε of the subset; in ambient mode
/// margin points count as other points.
pub fn count_subcomplexes(
    config: &PointConfiguration,
    eps: f64,
    pattern: &ComplexPattern,
    isolated: bool,
    mode: Mode,
) -> Result<u64> {
    let target = pattern.face_set()?;
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("ε must be positive, got {eps}")));
    }
    let ambient = mode == Mode::Ambient;
    if ambient {
        config.require_margin(eps)?;
    }
    let n = config.visible(ambient);
    let g = graph_on(config, n, eps)?;
    let k = pattern.k;
    let n_edges = target.profile()[1] as usize;
    let interior = config.len();
    let mut count = 0u64;
    let mut check = |s: &[usize]| {
        if s.iter().any(|&v| v >= interior) {
            return;
        }
        let m = g.induced_masks(s);
        let inner: usize = m.iter().map(|x| x.count_ones() as usize).sum::<usize>() / 2;
        if inner != n_edges {
            return;
        }
        if isolated && s.iter().map(|&v| g.adj[v].len()).sum::<usize>() != 2 * inner {
            return;
        }
        let pts: Vec<&[f64]> = s.iter().map(|&v| config.point(v)).collect();
        if faces_isomorphic(&induced_cech_faces(&pts, eps), &target, k) {
            count += 1;
        }
    };
    if k == 1 {
        for v in 0..n {
            check(&[v]);
        }
    } else {
        for_each_connected_subset(&g, k, |s| check(s));
    }
    Ok(count)
}
