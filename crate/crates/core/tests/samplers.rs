// Distributional checks of the samplers against closed forms. Tolerances
// are 4 standard errors unless stated.

use std::f64::consts::PI;

use rgc::geograph::{count_subgraphs, GraphPattern};
use rgc::par;
use rgc::pointproc::{
    estimate_functional, estimate_palm_functional, estimate_void, kostlan_void_probability, sample, Ball, ModelSpec, RegionFunctional,
    Replication, Window,
};
use rgc::stats::mean_var;

fn counts(model: &ModelSpec, n: f64, reps: usize, seed: u64) -> (f64, f64) {
    let w = Window::new(2, n).unwrap();
    let xs: Vec<f64> = par::map(reps, |i| sample(model, w, 0.0, par::derive_seed(seed, i as u64)).unwrap().len() as f64);
    mean_var(&xs)
}

fn near(est: f64, var: f64, reps: usize, want: f64, slack: f64) -> bool {
    (est - want).abs() <= 4.0 * (var / reps as f64).sqrt() + slack
}

#[test]
fn poisson_counts_are_poisson() {
    let (m, v) = counts(&ModelSpec::Poisson, 100.0, 3000, 1);
    assert!(near(m, v, 3000, 100.0, 0.0), "mean {m}");
    assert!((v / m - 1.0).abs() < 0.1, "dispersion {}", v / m);
}

#[test]
fn unit_intensity_for_every_model() {
    let models = [
        (ModelSpec::lattice(Replication::Constant), 400),
        (ModelSpec::lattice(Replication::Binomial { m: 3 }), 400),
        (ModelSpec::lattice(Replication::hypergeometric()), 400),
        (ModelSpec::lattice(Replication::NegativeBinomial { r: 1.0 }), 400),
        (ModelSpec::lattice(Replication::Geometric), 400),
        (ModelSpec::CoxCluster { beta: 0.25 }, 400),
        (ModelSpec::Ginibre, 200),
        (ModelSpec::GefZeros, 60),
    ];
    for (i, (model, reps)) in models.iter().enumerate() {
        let (m, v) = counts(model, 64.0, *reps, 10 + i as u64);
        // the GEF zero set is only approximately uniform near the window edge
        let slack = if matches!(model, ModelSpec::GefZeros) { 2.0 } else { 0.3 };
        assert!(near(m, v, *reps, 64.0, slack), "{}: mean {m}, var {v}", model.name());
    }
}

#[test]
fn count_variance_follows_clustering() {
    let hg = counts(&ModelSpec::lattice(Replication::hypergeometric()), 100.0, 600, 20).1;
    let poi = counts(&ModelSpec::Poisson, 100.0, 600, 21).1;
    let nb = counts(&ModelSpec::lattice(Replication::NegativeBinomial { r: 1.0 }), 100.0, 600, 22).1;
    let gin = counts(&ModelSpec::Ginibre, 100.0, 200, 23).1;
    assert!(gin < hg && hg < poi && poi < nb, "{gin} {hg} {poi} {nb}");
}

// E[pairs within r] in a square of side L: (1/2)∫ ρ₂(s) s (2πL² − 8Ls + 2s²) ds
// over s in [0, r], the angular integral of the set covariogram.
fn expected_pairs(rho2: impl Fn(f64) -> f64, side: f64, r: f64) -> f64 {
    let steps = 2000;
    let h = r / steps as f64;
    let f = |s: f64| rho2(s) * s * (2.0 * PI * side * side - 8.0 * side * s + 2.0 * s * s);
    let mut acc = f(0.0) + f(r);
    for i in 1..steps {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 * acc * h / 3.0
}

fn edge_counts(model: &ModelSpec, n: f64, r: f64, reps: usize, seed: u64) -> (f64, f64) {
    let w = Window::new(2, n).unwrap();
    let xs: Vec<f64> = par::map(reps, |i| {
        let c = sample(model, w, 0.0, par::derive_seed(seed, i as u64)).unwrap();
        count_subgraphs(&c, r, &GraphPattern::edge()).unwrap() as f64
    });
    mean_var(&xs)
}

#[test]
fn pair_counts_match_second_moment() {
    let (n, r) = (100.0, 0.6);
    let (m, v) = edge_counts(&ModelSpec::Poisson, n, r, 1000, 30);
    let want = expected_pairs(|_| 1.0, 10.0, r);
    assert!(near(m, v, 1000, want, 0.0), "Poisson {m} vs {want}");
    let (m, v) = edge_counts(&ModelSpec::Ginibre, n, r, 300, 31);
    let want = expected_pairs(|s| 1.0 - (-PI * s * s).exp(), 10.0, r);
    assert!(near(m, v, 300, want, 0.0), "Ginibre {m} vs {want}");
}

#[test]
fn void_probabilities() {
    let w = Window::new(2, 16.0).unwrap();
    let rho = (1.0 / PI).sqrt();
    let ball = Ball { center: vec![0.0, 0.0], radius: rho };
    let p = estimate_void(&ModelSpec::Poisson, w, &ball, 4000, 40).unwrap();
    assert!(near(p.mean, p.variance, 4000, (-1.0f64).exp(), 0.0), "Poisson void {}", p.mean);
    let g = estimate_void(&ModelSpec::Ginibre, w, &ball, 4000, 41).unwrap();
    let kostlan = kostlan_void_probability(None, rho);
    assert!(near(g.mean, g.variance, 4000, kostlan, 0.0), "Ginibre void {} vs {kostlan}", g.mean);
    // sub-Poisson and super-Poisson void ordering
    let hg = estimate_void(&ModelSpec::lattice(Replication::hypergeometric()), w, &ball, 4000, 42).unwrap();
    let nb = estimate_void(&ModelSpec::lattice(Replication::NegativeBinomial { r: 1.0 }), w, &ball, 4000, 43).unwrap();
    assert!(g.ci_high < p.ci_low && hg.ci_high < p.ci_low && p.ci_high < nb.ci_low);
}

#[test]
fn stationarity_of_counts() {
    let w = Window::new(2, 36.0).unwrap();
    for (i, model) in [ModelSpec::Ginibre, ModelSpec::lattice(Replication::Binomial { m: 2 })].iter().enumerate() {
        let a = RegionFunctional::CountBall { center: vec![-1.5, -1.0], radius: 1.2 };
        let b = RegionFunctional::CountBall { center: vec![1.4, 1.3], radius: 1.2 };
        let ea = estimate_functional(model, w, &a, 600, 50 + i as u64).unwrap();
        let eb = estimate_functional(model, w, &b, 600, 60 + i as u64).unwrap();
        let area = PI * 1.44;
        for e in [&ea, &eb] {
            assert!(near(e.mean, e.variance, 600, area, 0.0), "{}: {} vs {area}", model.name(), e.mean);
        }
    }
}

#[test]
fn poisson_palm_equals_unconditional() {
    let w = Window::new(2, 25.0).unwrap();
    let f = RegionFunctional::CountAnnulus { center: vec![0.0, 0.0], r_in: 0.5, r_out: 1.5 };
    let palm = estimate_palm_functional(&ModelSpec::Poisson, w, &[vec![0.0, 0.0]], 0.3, &f, 8000, 70).unwrap();
    let area = PI * (1.5f64.powi(2) - 0.25);
    assert!(near(palm.mean, palm.variance, palm.accepted, area, 0.0), "{} vs {area}", palm.mean);
    assert!(palm.accepted > 1500);
}
