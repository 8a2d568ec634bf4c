mod common;

use common::quadrature;
use nsto_dfo::sto::{
    build_integral_tables, coulomb_repulsion, kinetic, normalization, nuclear_attraction, overlap, BasisSet, StoFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sto(n: f64, z: f64) -> StoFunction {
    StoFunction::new(n, z).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn normalization_by_quadrature() {
    for (n, z) in [(1.0, 1.0), (2.0, 1.0), (0.95505735, 1.61172489), (2.7, 8.0)] {
        let f = sto(n, z);
        assert!(rel(quadrature::overlap(&f, &f), 1.0) < 1e-11, "n={n} ζ={z}");
    }
    let n2 = normalization(&sto(2.0, 1.0));
    assert!((n2 - 2f64.powf(2.5) / 24f64.sqrt()).abs() < 1e-14);
}

#[test]
fn one_electron_examples() {
    let (a, b) = (sto(0.9, 1.5), sto(1.7, 0.8));
    assert!(rel(overlap(&a, &b), quadrature::overlap(&a, &b)) < 1e-10);
    let he = sto(0.95505735, 1.61172489);
    assert!(rel(kinetic(&he, &he).unwrap(), quadrature::kinetic(&he, &he)) < 1e-10);
    let two = sto(2.0, 1.0);
    assert!(rel(kinetic(&two, &two).unwrap(), quadrature::kinetic(&two, &two)) < 1e-10);
    let (s1, s2) = (sto(1.0, 1.0), sto(2.0, 1.0));
    assert!(rel(nuclear_attraction(&s1, &s2, 1.0), quadrature::nuclear(&s1, &s2, 1.0)) < 1e-10);
}

#[test]
fn repulsion_examples() {
    let a = sto(1.0, 1.6875);
    assert!(rel(quadrature::coulomb(&a, &a, &a, &a), 1.0546875) < 1e-10);
    let he = sto(0.95505735, 1.61172489);
    assert!(rel(coulomb_repulsion(&he, &he, &he, &he).unwrap(), quadrature::coulomb(&he, &he, &he, &he)) < 1e-10);
    let (p, q, r, s) = (sto(1.0, 3.0), sto(2.0, 1.0), sto(1.4, 5.0), sto(2.6, 0.6));
    assert!(rel(coulomb_repulsion(&p, &q, &r, &s).unwrap(), quadrature::coulomb(&p, &q, &r, &s)) < 1e-10);
}

#[test]
fn two_function_tables_match_quadrature() {
    let f = [sto(1.0, 3.0), sto(2.0, 1.0)];
    let z = 4.0;
    let t = build_integral_tables(&BasisSet::new(f.to_vec(), "1s2s").unwrap(), z).unwrap();
    for p in 0..2 {
        for q in 0..2 {
            assert!(rel(t.overlap[(p, q)], quadrature::overlap(&f[p], &f[q])) < 1e-10);
            let h = quadrature::kinetic(&f[p], &f[q]) + quadrature::nuclear(&f[p], &f[q], z);
            assert!(rel(t.core[(p, q)], h) < 1e-10);
            for r in 0..2 {
                for s in 0..2 {
                    let v = quadrature::coulomb(&f[p], &f[q], &f[r], &f[s]);
                    assert!(rel(t.eri.get(p, q, r, s), v) < 1e-10);
                }
            }
        }
    }
}

#[test]
fn randomized_sweep_against_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut draw = || sto(rng.random_range(0.6..3.0), rng.random_range(0.3..12.0));
    for _ in 0..25 {
        let (p, q) = (draw(), draw());
        assert!(rel(overlap(&p, &q), quadrature::overlap(&p, &q)) < 1e-10, "{p:?} {q:?}");
        assert!(rel(kinetic(&p, &q).unwrap(), quadrature::kinetic(&p, &q)) < 1e-10, "{p:?} {q:?}");
        assert!(
            rel(nuclear_attraction(&p, &q, 3.0), quadrature::nuclear(&p, &q, 3.0)) < 1e-10,
            "{p:?} {q:?}"
        );
    }
    for _ in 0..6 {
        let (p, q, r, s) = (draw(), draw(), draw(), draw());
        let closed = coulomb_repulsion(&p, &q, &r, &s).unwrap();
        let oracle = quadrature::coulomb(&p, &q, &r, &s);
        assert!(rel(closed, oracle) < 1e-10, "{p:?} {q:?} {r:?} {s:?}: {closed} vs {oracle}");
    }
}
