mod common;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use robsub::equator::*;
use robsub::greedy::greedy_maximize;
use robsub::matroid::Constraint;
use robsub::objective::*;
use robsub::Error;

fn arc<F: SetObjective + 'static>(f: F) -> Arc<dyn SetObjective> {
    Arc::new(f)
}

fn two_sided() -> ObjectiveFamily {
    ObjectiveFamily::new(vec![
        arc(CoverageObjective::new(vec![vec![0], vec![]], vec![1.0])),
        arc(CoverageObjective::new(vec![vec![], vec![0]], vec![1.0])),
    ])
    .unwrap()
}

fn random_family(n: usize, m: usize, seed: u64) -> ObjectiveFamily {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let members = (0..m)
        .map(|_| {
            let covers = (0..n).map(|_| (0..8).filter(|_| rng.gen::<f64>() < 0.25).collect()).collect();
            arc(CoverageObjective::new(covers, (0..8).map(|_| rng.gen_range(0.1..1.0)).collect()))
        })
        .collect();
    ObjectiveFamily::new(members).unwrap()
}

#[test]
fn bri_examples() {
    let fam = ObjectiveFamily::new(vec![arc(ModularObjective::new(vec![1.0, 0.0])), arc(ModularObjective::new(vec![0.0, 1.0]))]).unwrap();
    assert_eq!(bri_enumerative(&fam, &[1.0, 0.0], 10, 0).unwrap(), 1);
    assert_eq!(bri_enumerative(&fam, &[0.5, 0.5], 10, 0).unwrap(), 0);
    let single = ObjectiveFamily::new(vec![arc(ModularObjective::new(vec![1.0, 2.0]))]).unwrap();
    assert_eq!(bri_enumerative(&single, &[0.3, 0.1], 10, 0).unwrap(), 0);
}

#[test]
fn bri_matches_exact_argmin() {
    let fam = random_family(6, 4, 2);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let x: Vec<f64> = (0..6).map(|_| rng.gen()).collect();
        let exact: Vec<f64> = fam.members().iter().map(|f| common::brute_multilinear(&**f, &x)).collect();
        let mut best = 0;
        for i in 1..exact.len() {
            if exact[i] < exact[best] {
                best = i;
            }
        }
        assert_eq!(bri_enumerative(&fam, &x, 100, 0).unwrap(), best);
    }
}

#[test]
fn family_bound_checks() {
    let f = arc(ModularObjective::new(vec![2.0, 1.0]));
    assert_eq!(ObjectiveFamily::new(vec![f.clone()]).unwrap().bound(), 2.0);
    assert!(ObjectiveFamily::with_bound(vec![f], 1.0).is_err());
    assert!(ObjectiveFamily::new(vec![]).is_err());
}

#[test]
fn single_modular_member() {
    let fam = ObjectiveFamily::new(vec![arc(ModularObjective::new(vec![3.0, 1.0, 2.0]))]).unwrap();
    let c = Constraint::Cardinality(2);
    let r = equator_solve(&fam, &c, &EquatorConfig::default(), 1).unwrap();
    assert!((r.x[0] - 1.0).abs() < 1e-9 && r.x[1].abs() < 1e-9 && (r.x[2] - 1.0).abs() < 1e-9);
    assert_eq!(r.strategy.support(), &[(vec![0, 2], 1.0)]);
    assert_eq!(worst_case_value(&r.strategy, &fam), 5.0);
    for s in 0..10 {
        assert_eq!(sample_pure_strategy(&r.x, &c, s).unwrap(), vec![0, 2]);
    }
}

#[test]
fn symmetric_game_all_solvers() {
    let fam = two_sided();
    let c = Constraint::Cardinality(1);
    let lp = exact_minimax_lp(&fam, &c).unwrap();
    assert!((lp.value - 0.5).abs() < 1e-9);
    assert!((worst_case_value(&lp.strategy, &fam) - lp.value).abs() < 1e-6);
    for s in [vec![0], vec![1]] {
        assert_eq!(worst_case_value(&MixedStrategy::pure(s), &fam), 0.0);
    }
    let r = equator_solve(&fam, &c, &EquatorConfig::default(), 3).unwrap();
    assert!((r.x[0] - 0.5).abs() < 0.05 && (r.x[1] - 0.5).abs() < 0.05);
    assert!(worst_case_value(&r.strategy, &fam) > 0.4);
    let d = double_oracle_solve(&fam, &c, 1e-6, 20).unwrap();
    assert!(d.converged);
    assert!((d.value - 0.5).abs() < 1e-6);
}

#[test]
fn double_oracle_single_member_is_greedy() {
    let f = CoverageObjective::new(vec![vec![0, 1], vec![1, 2], vec![3]], vec![1.0, 1.0, 1.0, 1.0]);
    let c = Constraint::Cardinality(2);
    let g = greedy_maximize(&f, &c).unwrap();
    let fam = ObjectiveFamily::new(vec![arc(f)]).unwrap();
    let d = double_oracle_solve(&fam, &c, 1e-9, 10).unwrap();
    assert_eq!(d.history.len(), 1);
    assert_eq!(d.strategy.support(), &[(g.set, 1.0)]);
    assert_eq!(d.value, g.value);
}

#[test]
fn double_oracle_lower_bounds_nondecreasing_and_certified() {
    for seed in 0..10 {
        let fam = random_family(8, 4, seed);
        let c = Constraint::Cardinality(2);
        let d = double_oracle_solve(&fam, &c, 1e-6, 100).unwrap();
        let lb = d.lower_bounds();
        assert!(lb.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*lb.last().unwrap(), d.value);
        assert!((worst_case_value(&d.strategy, &fam) - d.value).abs() < 1e-9);
        let lp = exact_minimax_lp(&fam, &c).unwrap();
        assert!(d.value <= lp.value + 1e-7);
        let mean = fam.mixture(&vec![0.25; 4]);
        let greedy = worst_case_value(&MixedStrategy::pure(greedy_maximize(&mean, &c).unwrap().set), &fam);
        assert!(greedy <= lp.value + 1e-7);
        if d.converged {
            let last = d.history.last().unwrap();
            let scale = fam.bound().max(1.0);
            assert!(last.response_value - last.restricted_value <= 1e-6 * scale);
        }
    }
}

#[test]
fn worst_case_of_uniform_split() {
    let fam = ObjectiveFamily::new(vec![arc(ModularObjective::new(vec![2.0, 0.0])), arc(ModularObjective::new(vec![0.0, 2.0]))]).unwrap();
    let c = Constraint::Cardinality(1);
    let s = MixedStrategy::new(vec![(vec![0], 0.5), (vec![1], 0.5)], &c).unwrap();
    assert_eq!(worst_case_value(&s, &fam), 1.0);
    assert_eq!(worst_case_value(&MixedStrategy::pure(vec![0]), &ObjectiveFamily::new(vec![fam.members()[0].clone()]).unwrap()), 2.0);
}

#[test]
fn mixed_strategy_validation() {
    let c = Constraint::Cardinality(1);
    assert!(MixedStrategy::new(vec![(vec![0, 1], 1.0)], &c).is_err());
    assert!(MixedStrategy::new(vec![(vec![0], 0.7)], &c).is_err());
    assert!(MixedStrategy::new(vec![(vec![0], -0.5), (vec![1], 1.5)], &c).is_err());
}

#[test]
fn sparse_strategy_and_marginals() {
    let fam = random_family(6, 3, 8);
    let c = Constraint::Cardinality(2);
    let cfg = EquatorConfig {
        strategy_samples: 40,
        ..EquatorConfig::default()
    };
    let r = equator_solve(&fam, &c, &cfg, 4).unwrap();
    assert!(r.strategy.support().len() <= 40);
    assert!(r.x.iter().sum::<f64>() <= 2.0 + 1e-9);
    let draws = 4000;
    let mut freq = vec![0.0; 6];
    for s in 0..draws {
        for i in r.sampler.sample(s).unwrap() {
            freq[i] += 1.0 / draws as f64;
        }
    }
    for (f, x) in freq.iter().zip(&r.x) {
        assert!((f - x).abs() <= 3.0 * (x * (1.0 - x) / draws as f64).sqrt() + 1e-9, "{freq:?} vs {:?}", r.x);
    }
}

#[test]
fn equator_is_reproducible() {
    let fam = random_family(7, 3, 1);
    let c = Constraint::Cardinality(2);
    let a = equator_solve(&fam, &c, &EquatorConfig::default(), 9).unwrap();
    let b = equator_solve(&fam, &c, &EquatorConfig::default(), 9).unwrap();
    assert_eq!(a.x, b.x);
    assert_eq!(a.strategy, b.strategy);
}

#[test]
fn lp_cap() {
    let fam = ObjectiveFamily::new(vec![arc(ModularObjective::new(vec![1.0; 30]))]).unwrap();
    assert!(matches!(exact_minimax_lp(&fam, &Constraint::Cardinality(5)), Err(Error::SizeCap { .. })));
}

#[test]
fn config_checks() {
    let fam = two_sided();
    let bad = EquatorConfig {
        epsilon: 5.0,
        ..EquatorConfig::default()
    };
    assert!(equator_solve(&fam, &Constraint::Cardinality(1), &bad, 0).is_err());
    let zero = EquatorConfig {
        iterations: 0,
        ..EquatorConfig::default()
    };
    assert!(zero.validate().is_err());
}
