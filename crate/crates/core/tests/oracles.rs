mod common;

use std::f64::consts::PI;

use rand::Rng;
use rgc::complexes::{build_cech, build_rips, cech_filtration, count_subcomplexes, empty_simplex, rips_filtration, ComplexPattern};
use rgc::geograph::{build_graph, connected_components, count_components, count_subgraphs, GraphPattern, Mode};
use rgc::geometry::miniball;
use rgc::homology::{betti_numbers, persistence};
use rgc::limits::{mu0, LimitPattern};
use rgc::morse::{critical_points, critical_points_enumerated, planar_components};
use rgc::pointproc::{ModelSpec, PointConfiguration};

fn faces(c: &rgc::complexes::SimplicialComplex) -> Vec<Vec<u32>> {
    let mut v: Vec<Vec<u32>> = c.all_faces().cloned().collect();
    v.sort();
    v
}

#[test]
fn miniball_matches_exhaustive_circumballs() {
    let mut rng = common::rng(1);
    for trial in 0..300 {
        let dim = 2 + trial % 2;
        let m = rng.gen_range(1..=7);
        let pts = common::uniform_points(&mut rng, m, 2.0, dim);
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let (_, r) = miniball(&refs);
        let want = common::enclosing_radius(&refs);
        assert!((r - want).abs() < 1e-9, "trial {trial}: {r} vs {want}");
    }
}

#[test]
fn complexes_match_subset_enumeration() {
    let mut rng = common::rng(2);
    for trial in 0..40 {
        let m = rng.gen_range(3..=10);
        let dim = 2 + trial % 2;
        let pts = common::uniform_points(&mut rng, m, 2.0, dim);
        let cfg = PointConfiguration::fixture(dim, &pts);
        let eps = rng.gen_range(0.3..1.5);
        assert_eq!(faces(&build_rips(&cfg, eps, 3).unwrap()), sorted(common::rips_faces(&pts, eps, 3)));
        assert_eq!(faces(&build_cech(&cfg, eps, 3).unwrap()), sorted(common::cech_complex(&pts, eps, 3)));
    }
}

fn sorted(mut v: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    v.sort();
    v
}

#[test]
fn betti_matches_dense_rank() {
    let mut rng = common::rng(3);
    for _ in 0..40 {
        let m = rng.gen_range(4..=11);
        let pts = common::uniform_points(&mut rng, m, 2.5, 2);
        let cfg = PointConfiguration::fixture(2, &pts);
        let eps = rng.gen_range(0.5..1.8);
        for c in [build_rips(&cfg, eps, 3).unwrap(), build_cech(&cfg, eps, 3).unwrap()] {
            let b = betti_numbers(&c).unwrap();
            let want = common::betti(&faces(&c));
            for (k, &w) in want.iter().enumerate() {
                assert_eq!(b.get(k), w, "dim {k}");
            }
        }
    }
}

#[test]
fn counts_match_brute_force_in_three_dimensions() {
    let mut rng = common::rng(4);
    let pats = [GraphPattern::edge(), GraphPattern::path(3).unwrap(), GraphPattern::triangle(), GraphPattern::clique(4).unwrap()];
    for _ in 0..30 {
        let m = rng.gen_range(3..=11);
        let pts = common::uniform_points(&mut rng, m, 2.0, 3);
        let cfg = PointConfiguration::fixture(3, &pts);
        let r = rng.gen_range(0.4..1.4);
        for p in &pats {
            assert_eq!(count_subgraphs(&cfg, r, p).unwrap(), common::brute_g(&pts, r, p.k, &p.edges));
            assert_eq!(count_components(&cfg, r, p, Mode::InteriorOnly).unwrap(), common::brute_j(&pts, r, p.k, &p.edges));
        }
        let hollow = empty_simplex(4).unwrap();
        assert_eq!(
            count_subcomplexes(&cfg, r, &hollow, false, Mode::InteriorOnly).unwrap(),
            common::brute_c(&pts, r, 4, &hollow.faces, false)
        );
    }
}

#[test]
fn critical_points_match_brute_force() {
    let mut rng = common::rng(5);
    for trial in 0..60 {
        let dim = if trial % 3 == 2 { 3 } else { 2 };
        let m = rng.gen_range(2..=12);
        let pts = common::uniform_points(&mut rng, m, 2.0, dim);
        let cfg = PointConfiguration::fixture(dim, &pts);
        let r = rng.gen_range(0.2..1.2);
        let fast = critical_points(&cfg, r, dim, Mode::InteriorOnly).unwrap();
        let slow = critical_points_enumerated(&cfg, r, dim, Mode::InteriorOnly).unwrap();
        assert_eq!(fast.counts, slow.counts);
        for k in 0..=dim {
            assert_eq!(fast.counts[k], common::brute_nk(&pts, r, k), "trial {trial} N_{k}");
        }
    }
}

#[test]
fn planar_components_match_graph() {
    let mut rng = common::rng(6);
    for _ in 0..30 {
        let m = rng.gen_range(1..=60);
        let pts = common::uniform_points(&mut rng, m, 6.0, 2);
        let cfg = PointConfiguration::fixture(2, &pts);
        let r = rng.gen_range(0.2..2.0);
        let g = build_graph(&cfg, r, false).unwrap();
        assert_eq!(planar_components(&cfg, r).unwrap(), connected_components(&g).len());
    }
}

#[test]
fn four_cycle_barcode() {
    let sq = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]];
    let cfg = PointConfiguration::fixture(2, &sq);
    for f in [rips_filtration(&cfg, 2, 3.0).unwrap(), cech_filtration(&cfg, 2, 3.0).unwrap()] {
        let bc = persistence(&f).unwrap();
        let h1: Vec<_> = bc.in_dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - 2f64.sqrt()).abs() < 1e-12);
        assert!((h1[0].death - 2.0).abs() < 1e-9);
        assert_eq!(bc.in_dim(0).filter(|b| b.death.is_infinite()).count(), 1);
    }
}

// μ₀ of the Poisson triangle: (1/3!) ∫∫ 1{pairwise within 1}, and the inner
// integral is the lens area |B(0,1) ∩ B(y,1)| averaged over y in B(0,1),
// giving π² − 3√3π/4.
#[test]
fn poisson_triangle_constant() {
    let exact = (PI * PI - 3.0 * 3f64.sqrt() * PI / 4.0) / 6.0;
    let c = mu0(&LimitPattern::Graph(GraphPattern::triangle()), &ModelSpec::Poisson, 2, 200_000, 7).unwrap();
    assert!((c.estimate - exact).abs() < 4.0 * c.se, "{} ± {} vs {exact}", c.estimate, c.se);
}

// Čech triangle in the plane at unit diameter is a proper subset of the
// Rips triangle, so its constant must be smaller.
#[test]
fn cech_triangle_below_rips_triangle() {
    let full = ComplexPattern::simplex(3).unwrap();
    let c = mu0(&LimitPattern::Complex(full), &ModelSpec::Poisson, 2, 100_000, 8).unwrap();
    let exact = (PI * PI - 3.0 * 3f64.sqrt() * PI / 4.0) / 6.0;
    assert!(c.estimate < exact);
    assert!(c.estimate > 0.5 * exact);
}
