use epsdyadic::bank::{generate_bank, BankKind};
use epsdyadic::epsilon::EpsilonCollection;
use epsdyadic::exponent::*;
use epsdyadic::grid::{GridFunction, Layout};
use epsdyadic::operators::{opnorm_estimate, Operator};
use epsdyadic::DyadicCube;

const TOL: f64 = 1e-10;

fn bank500(layout: &Layout) -> Vec<GridFunction> {
    let mut bank = generate_bank(layout, BankKind::RandomCells, 300, 1).unwrap();
    bank.extend(generate_bank(layout, BankKind::Indicators, 100, 2).unwrap());
    bank.extend(generate_bank(layout, BankKind::HaarLike, 100, 3).unwrap());
    bank
}

fn origin_cubes(max_n: i32) -> Vec<DyadicCube> {
    (0..=max_n)
        .flat_map(|n| [DyadicCube::new(n, vec![0]), DyadicCube::new(n + 1, vec![1])])
        .collect()
}

#[test]
fn constant_exponent_norms_match_closed_forms() {
    let layout = Layout::unit(1, 6).unwrap();
    for p in [1.3, 2.0, 3.5, 7.0] {
        let e = ExponentFunction::constant(p, DyadicCube::unit(1)).unwrap();
        for f in bank500(&layout).iter().step_by(10) {
            let closed = f.map(|v| v.abs().powf(p)).unwrap().integral().powf(1.0 / p);
            let n = e.norm(f, TOL).unwrap();
            assert!((n - closed).abs() <= 1e-8 * closed, "p = {p}: {n} vs {closed}");
        }
    }
}

#[test]
fn modular_below_norm_and_homogeneity() {
    let layout = Layout::unit(1, 6).unwrap();
    let p = ExponentFunction::section5(0.5).unwrap();
    let field = p.field(&layout).unwrap();
    for f in bank500(&layout) {
        let n = field.norm(&f, TOL).unwrap();
        let g = f.scale(0.9 / n).unwrap();
        let ng = field.norm(&g, TOL).unwrap();
        assert!(ng <= 1.0);
        assert!(field.modular(&g).unwrap() <= ng + DEFAULT_SLACK);
        let h = field.norm(&f.scale(-2.5).unwrap(), TOL).unwrap();
        assert!((h - 2.5 * n).abs() <= 3.0 * TOL * h);
    }
}

#[test]
fn holder_inequality_on_pairs() {
    let layout = Layout::unit(1, 6).unwrap();
    let p = ExponentFunction::section5(0.5).unwrap();
    let bank = bank500(&layout);
    for i in 0..500 {
        let (f, g) = (&bank[i], &bank[(7 * i + 3) % 500]);
        let (pairing, bound) = holder_pairing(f, g, &p, TOL).unwrap();
        assert!(pairing <= bound + DEFAULT_SLACK);
    }
}

#[test]
fn origin_example_closed_forms() {
    let a = 0.5;
    let c = 1.2;
    let p = ExponentFunction::section5(a).unwrap();
    let eps = EpsilonCollection::section5(c, a).unwrap();
    let cubes = origin_cubes(40);
    let r = check_eps_diening(&p, &eps, &cubes).unwrap();
    let plain = check_diening(&p, &cubes).unwrap();
    let mut previous = f64::INFINITY;
    for n in 0..=40 {
        let q = DyadicCube::new(n, vec![0]);
        assert!((r.record(&q).unwrap().value - c).abs() <= 1e-9);

        let qp = DyadicCube::new(n + 1, vec![1]);
        let eps_n = eps.value(&q);
        let nf = n as f64;
        let closed = (2f64.powf(nf + 1.0) * eps_n).powf((nf + 1.0).powf(-a) - (nf + 2.0).powf(-a));
        let v = r.record(&qp).unwrap().value;
        assert!((v - closed).abs() <= 1e-9 * closed, "n = {n}: {v} vs {closed}");
        assert!(v <= previous);
        previous = v;

        let d = plain.record(&q).unwrap().value;
        let expected = 2f64.powf(nf * (nf + 1.0).powf(-a));
        assert!((d - expected).abs() <= 1e-9 * expected);
    }
    let top = (2.0 * c).powf(1.0 - 2f64.powf(-a));
    assert!((r.record(&DyadicCube::new(1, vec![1])).unwrap().value - top).abs() <= 1e-12);
    assert!(plain.record(&DyadicCube::new(40, vec![0])).unwrap().value > 75.0);
    assert!(plain.record(&DyadicCube::new(12, vec![0])).unwrap().value > 10.0);
    assert!(plain.record(&DyadicCube::new(11, vec![0])).unwrap().value < 10.0);
}

#[test]
fn conjugate_transfer_is_finite_and_bounded() {
    let p = ExponentFunction::section5(0.5).unwrap();
    let eps = EpsilonCollection::section5(1.2, 0.5).unwrap();
    let cubes = origin_cubes(40);
    let sup = check_eps_diening(&p, &eps, &cubes).unwrap().supremum;
    let conj = check_eps_diening(&p.conjugate(), &eps, &cubes).unwrap();
    assert!(conj.supremum.is_finite());
    let kappa = conjugate_transfer_kappa(&p);
    assert_eq!(kappa, 1.0);
    assert!(conj.supremum <= sup.max(1.0).powf(kappa) + 1e-12);
}

#[test]
fn maximal_operator_bound_at_p2() {
    let layout = Layout::unit(1, 8).unwrap();
    let p = ExponentFunction::constant(2.0, DyadicCube::unit(1)).unwrap();
    let bank = generate_bank(&layout, BankKind::Indicators, 100, 42).unwrap();
    let est = opnorm_estimate(&Operator::DyadicMaximal, &p, &bank, TOL).unwrap();
    assert!(est.max <= 2.0 + 1e-9);
    assert!(est.max >= 1.0);
}

#[test]
fn associate_norm_is_bounded_by_twice_the_norm() {
    let layout = Layout::unit(1, 5).unwrap();
    let p = ExponentFunction::section5(0.5).unwrap();
    let bank = generate_bank(&layout, BankKind::RandomCells, 50, 7).unwrap();
    for f in bank.iter().take(10) {
        let lower = associate_norm_lower_bound(f, &p, &bank, TOL).unwrap();
        assert!(lower <= 2.0 * p.norm(f, TOL).unwrap() + DEFAULT_SLACK);
    }
}
