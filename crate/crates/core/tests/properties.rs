use proptest::prelude::*;
use rgc::complexes::{build, build_cech, build_rips, filtration, ComplexKind};
use rgc::geograph::{build_graph, connected_components, count_components, count_subgraphs, GraphPattern, Mode};
use rgc::homology::{betti_from_barcode, betti_numbers, euler_characteristic, persistence};
use rgc::limits::{mu0, LimitPattern};
use rgc::morse::critical_points;
use rgc::pointproc::{ModelSpec, PointConfiguration};

fn cloud(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 1..max)
}

fn cfg(pts: &[Vec<f64>]) -> PointConfiguration {
    PointConfiguration::fixture(2, pts)
}

fn patterns() -> Vec<GraphPattern> {
    vec![GraphPattern::edge(), GraphPattern::path(3).unwrap(), GraphPattern::triangle(), GraphPattern::star(4).unwrap()]
}

fn alternating(b: &rgc::homology::BettiVector, top: usize) -> i64 {
    (0..=top).map(|k| if k % 2 == 0 { b.get(k) as i64 } else { -(b.get(k) as i64) }).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn components_never_exceed_copies(pts in cloud(30), r in 0.1f64..2.0) {
        let c = cfg(&pts);
        for p in patterns() {
            prop_assert!(count_components(&c, r, &p, Mode::InteriorOnly).unwrap() <= count_subgraphs(&c, r, &p).unwrap());
        }
    }

    #[test]
    fn edge_count_monotone_in_radius(pts in cloud(30), r in 0.1f64..2.0, dr in 0.0f64..1.0) {
        let c = cfg(&pts);
        let e = GraphPattern::edge();
        prop_assert!(count_subgraphs(&c, r, &e).unwrap() <= count_subgraphs(&c, r + dr, &e).unwrap());
    }

    #[test]
    fn counts_scale_invariant(pts in cloud(25), r in 0.1f64..2.0) {
        // scaling by 2 is exact in floating point
        let big: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|x| 2.0 * x).collect()).collect();
        let (a, b) = (cfg(&pts), cfg(&big));
        for p in patterns() {
            prop_assert_eq!(count_subgraphs(&a, r, &p).unwrap(), count_subgraphs(&b, 2.0 * r, &p).unwrap());
        }
        prop_assert_eq!(
            critical_points(&a, r, 2, Mode::InteriorOnly).unwrap().counts,
            critical_points(&b, 2.0 * r, 2, Mode::InteriorOnly).unwrap().counts
        );
    }

    #[test]
    fn interleaving(pts in cloud(18), eps in 0.2f64..2.0) {
        let c = cfg(&pts);
        let cech = build_cech(&c, eps, 3).unwrap();
        let rips = build_rips(&c, eps, 3).unwrap();
        let cech2 = build_cech(&c, 2.0 * eps, 3).unwrap();
        prop_assert!(cech.is_subcomplex_of(&rips));
        prop_assert!(rips.is_subcomplex_of(&cech2));
        prop_assert_eq!(cech.count(1), rips.count(1));
    }

    #[test]
    fn euler_and_components(pts in cloud(20), eps in 0.2f64..2.0, kind in prop_oneof![Just(ComplexKind::Rips), Just(ComplexKind::Cech)]) {
        let c = cfg(&pts);
        let k = build(kind, &c, eps, 3).unwrap();
        let b = betti_numbers(&k).unwrap();
        prop_assert_eq!(euler_characteristic(&k), alternating(&b, k.max_dim().unwrap_or(0)));
        prop_assert_eq!(b.get(0), connected_components(&build_graph(&c, eps, false).unwrap()).len());
        for p in 0..=3 {
            prop_assert!(b.get(p) <= k.count(p));
        }
    }

    #[test]
    fn morse_counts(pts in cloud(25), r in 0.1f64..1.5) {
        let c = cfg(&pts);
        let cp = critical_points(&c, r, 2, Mode::InteriorOnly).unwrap();
        prop_assert_eq!(cp.counts[0] as usize, pts.len());
        prop_assume!(cp.degenerate == 0 && cp.near_threshold == 0);
        let b = betti_numbers(&build_cech(&c, 2.0 * r, 3).unwrap()).unwrap();
        for k in 0..=2 {
            prop_assert!(b.get(k) as u64 <= cp.counts[k]);
        }
        prop_assert_eq!(cp.euler(), alternating(&b, 2));
    }

    #[test]
    fn slices_equal_direct(pts in cloud(16), eps in 0.05f64..2.5, kind in prop_oneof![Just(ComplexKind::Rips), Just(ComplexKind::Cech)]) {
        let c = cfg(&pts);
        let f = filtration(kind, &c, 2, 2.5).unwrap();
        prop_assert_eq!(f.slice(eps), build(kind, &c, eps, 2).unwrap());
        let bc = persistence(&f).unwrap();
        let direct = betti_numbers(&build(kind, &c, eps, 2).unwrap()).unwrap();
        let sliced = betti_from_barcode(&bc, eps);
        for k in 0..=2 {
            prop_assert_eq!(direct.get(k), sliced.get(k));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn limit_constant_ignores_vertex_labels(perm in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle(), seed in 0u64..1000) {
        let path = GraphPattern::path(4).unwrap();
        let relabelled = GraphPattern::new(4, path.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect()).unwrap();
        let a = mu0(&LimitPattern::Graph(path), &ModelSpec::Poisson, 2, 4000, seed).unwrap();
        let b = mu0(&LimitPattern::Graph(relabelled), &ModelSpec::Poisson, 2, 4000, seed).unwrap();
        prop_assert_eq!(a.estimate, b.estimate);
    }
}
