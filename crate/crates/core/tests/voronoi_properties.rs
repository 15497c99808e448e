use num_complex::Complex64;

use cubic_voronoi::poly::{cardano_oracle, critical_points, Polynomial};
use cubic_voronoi::sampling::{
    canonical_parameters, instance_rng, random_roots, random_scaled_cubic,
};
use cubic_voronoi::voronoi::{
    audit, classify_roots, distance_gap_margin, gauss_lucas_check, nearest_root,
    theorem2_distance_gap, CanonicalCubic, Cell, Theorem2Case,
};

fn same_set(x: [Complex64; 2], y: [Complex64; 2], tol: f64) -> bool {
    let direct = (x[0] - y[0]).norm().max((x[1] - y[1]).norm());
    let swapped = (x[0] - y[1]).norm().max((x[1] - y[0]).norm());
    direct.min(swapped) < tol
}

#[test]
fn canonicalization_maps_roots_and_critical_points() {
    for i in 0..5_000 {
        let roots = random_roots(&mut instance_rng(61, i), 3.0, 0.05);
        let canon = CanonicalCubic::from_roots(&roots).unwrap();
        let t = canon.transform;
        for (k, target) in canon.roots().iter().enumerate() {
            let mapped = t.apply(roots[canon.labels[k]]);
            assert!(
                (mapped - target).norm() < 1e-10 * (1.0 + target.norm()),
                "sample {i}, root {k}"
            );
            assert!(
                (t.invert(*target) - roots[canon.labels[k]]).norm()
                    < 1e-10 * (1.0 + roots[canon.labels[k]].norm())
            );
        }
        let cp = critical_points(&Polynomial::from_roots(&roots)).unwrap();
        let mapped = [t.apply(cp.r1), t.apply(cp.r2)];
        assert!(
            same_set(mapped, canon.critical_points(), 1e-9),
            "sample {i}"
        );
        assert!(canon.a >= 0.0 && canon.b > 0.0);
    }
}

#[test]
fn every_canonical_pairing_is_equivalent() {
    for i in 0..1_000 {
        let roots = random_roots(&mut instance_rng(62, i), 1.0, 0.05);
        for pairing in [(0, 1), (1, 0), (0, 2), (2, 1)] {
            let canon = CanonicalCubic::canonicalize(&roots, pairing).unwrap();
            let cp = critical_points(&Polynomial::from_roots(&roots)).unwrap();
            let back = [
                canon.transform.invert(canon.c1),
                canon.transform.invert(canon.c2),
            ];
            assert!(
                same_set(back, [cp.r1, cp.r2], 1e-8),
                "sample {i}, pairing {pairing:?}"
            );
        }
    }
}

#[test]
fn critical_point_product_is_minus_one_third() {
    let mut rng = instance_rng(63, 0);
    for _ in 0..20_000 {
        let (a, b) = canonical_parameters(&mut rng, 10.0, 10.0);
        let canon = CanonicalCubic::from_parameters(a, b).unwrap();
        assert!(
            (3.0 * canon.c1 * canon.c2 + 1.0).norm() < 1e-12,
            "a={a} b={b}"
        );
        let sum = canon.c1 + canon.c2;
        assert!((sum - canon.w * 2.0 / 3.0).norm() < 1e-12, "a={a} b={b}");
    }
}

#[test]
fn margin_matches_the_distance_gap() {
    let mut rng = instance_rng(64, 0);
    for _ in 0..20_000 {
        let (a, b) = canonical_parameters(&mut rng, 10.0, 10.0);
        let canon = CanonicalCubic::from_parameters(a, b).unwrap();
        let (d1, d2) = theorem2_distance_gap(&canon).unwrap();
        assert!((d1 - (canon.c2 - canon.w).norm()).abs() < 1e-12 * (1.0 + d1));
        assert!((d2 - (canon.c2 + 1.0).norm()).abs() < 1e-12 * (1.0 + d2));
        let margin = distance_gap_margin(&canon).unwrap();
        let scale = 1.0 + a * a + b * b;
        assert!(
            (9.0 * (d1 * d1 - d2 * d2) - 3.0 * margin).abs() < 1e-10 * scale,
            "a={a} b={b}"
        );
    }
}

#[test]
fn audits_find_no_violations() {
    let mut rng = instance_rng(65, 0);
    for _ in 0..20_000 {
        let (a, b) = canonical_parameters(&mut rng, 10.0, 10.0);
        let report = audit(&CanonicalCubic::from_parameters(a, b).unwrap()).unwrap();
        assert_eq!(report.violations(), 0, "a={a} b={b}: {report:?}");
    }
}

#[test]
fn gauss_lucas_holds_for_random_cubics() {
    for i in 0..10_000 {
        let p = random_scaled_cubic(&mut instance_rng(66, i));
        assert!(gauss_lucas_check(&p).unwrap(), "sample {i}: {p}");
    }
}

#[test]
fn classification_agrees_with_direct_nearest_root() {
    for i in 0..5_000 {
        let roots = random_roots(&mut instance_rng(67, i), 2.0, 0.05);
        let verdict = classify_roots(&roots).unwrap();
        let cp = critical_points(&Polynomial::from_roots(&roots)).unwrap();
        let direct = [nearest_root(cp.r1, &roots), nearest_root(cp.r2, &roots)];
        let mut got = [verdict.c1, verdict.c2];
        let mut want = direct;
        got.sort_by_key(|c| c.root());
        want.sort_by_key(|c| c.root());
        assert_eq!(got, want, "sample {i}");
    }
}

#[test]
fn conjugate_and_permuted_roots_give_the_same_verdict() {
    for i in 0..2_000 {
        let roots = random_roots(&mut instance_rng(68, i), 1.0, 0.05);
        let base = classify_roots(&roots).unwrap();
        let conj = classify_roots(&roots.map(|z| z.conj())).unwrap();
        assert_eq!(base, conj, "sample {i}");
        let perm = [2, 0, 1];
        let permuted = classify_roots(&perm.map(|k| roots[k])).unwrap();
        let relabel = |c: Cell| match c {
            Cell::Root(k) => Cell::Root(perm[k]),
            Cell::Boundary => Cell::Boundary,
        };
        assert_eq!(
            (relabel(permuted.c1), relabel(permuted.c2)),
            (base.c1, base.c2),
            "sample {i}"
        );
        assert_eq!(permuted.case, base.case);
    }
}

#[test]
fn collinear_roots_are_excluded() {
    let roots = [
        Complex64::new(-2.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(3.0, 0.0),
    ];
    let verdict = classify_roots(&roots).unwrap();
    assert_eq!(verdict.case, Theorem2Case::ExcludedCollinear);
    assert!(verdict.c1.root().is_some() || verdict.c2.root().is_some());
    let p = Polynomial::from_roots(&roots);
    assert_eq!(cardano_oracle(&p).unwrap().len(), 3);
    assert!(gauss_lucas_check(&p).unwrap());
}
