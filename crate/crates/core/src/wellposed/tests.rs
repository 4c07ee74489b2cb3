use super::catalog::*;
use super::*;
use crate::cones::DirectionSet;
use crate::maps::{BasePoint, SetValuedMap};

fn two_x() -> SetValuedMap {
    SetValuedMap::linear(vec![vec![2.0]]).unwrap()
}

fn full1() -> DirectionSet {
    DirectionSet::full_sphere(1)
}

fn up() -> DirectionSet {
    DirectionSet::ray(&[1.0]).unwrap()
}

fn down() -> DirectionSet {
    DirectionSet::ray(&[-1.0]).unwrap()
}

fn spec() -> NeighborhoodSpec {
    NeighborhoodSpec::new(0.25, 0.25, 0.5).unwrap()
}

fn power(c: f64, r: f64) -> RateFunction {
    RateFunction::power(c, r).unwrap()
}

#[test]
fn openness_of_linear_map() {
    let f = two_x();
    let base = BasePoint::origin(&f);
    let v = check_openness(&f, &base, &full1(), &full1(), &power(1.5, 1.0), &spec()).unwrap();
    assert_eq!(v.status, Status::Holds);
    assert!(v.witness.is_none());
    let v = check_openness(&f, &base, &full1(), &full1(), &power(2.5, 1.0), &spec()).unwrap();
    assert_eq!(v.status, Status::Fails);
    let w = v.witness.unwrap();
    let t = w.t.unwrap();
    let radius = (w.probe[0] - w.y[0]).abs();
    assert!((radius - 2.5 * t * (1.0 - 1e-6)).abs() < 1e-12);
    assert!(w.violation > 0.0);
}

#[test]
fn identity_is_open_with_rate_t() {
    let f = SetValuedMap::identity(1);
    let base = BasePoint::origin(&f);
    for l in [full1(), up(), down()] {
        let v = check_openness(&f, &base, &l, &l, &power(1.0, 1.0), &spec()).unwrap();
        assert_eq!(v.status, Status::Holds, "{l:?}");
    }
}

#[test]
fn square_is_open_upwards_only() {
    let f = SetValuedMap::square();
    let base = BasePoint::origin(&f);
    let v = check_openness(&f, &base, &full1(), &up(), &power(1.0, 2.0), &spec()).unwrap();
    assert_eq!(v.status, Status::Holds);
    for c in [0.1, 1.0, 10.0] {
        let v = check_openness(&f, &base, &full1(), &down(), &power(c, 2.0), &spec()).unwrap();
        assert_eq!(v.status, Status::Fails);
        let w = v.witness.unwrap();
        assert!(w.probe[0] < w.y[0]);
    }
}

#[test]
fn regularity_examples() {
    let f = two_x();
    let base = BasePoint::origin(&f);
    let psi = power(0.5 * (1.0 + 1e-6), 1.0);
    let v = check_regularity(&f, &base, &full1(), &full1(), &psi, &spec()).unwrap();
    assert_eq!(v.status, Status::Holds);
    let v = check_regularity(&f, &base, &full1(), &full1(), &power(0.45, 1.0), &spec()).unwrap();
    assert_eq!(v.status, Status::Fails);

    let sq = SetValuedMap::square();
    let v = check_regularity(&sq, &base, &full1(), &down(), &power(1.0, 0.5), &spec()).unwrap();
    assert_eq!(v.status, Status::Holds);
}

#[test]
fn regularity_never_fails_on_graph_points() {
    // ψ tiny: only points with y ∉ F(x) can violate
    let f = two_x();
    let base = BasePoint::origin(&f);
    let v = check_regularity(&f, &base, &full1(), &full1(), &power(1e-3, 1.0), &spec()).unwrap();
    let w = v.witness.unwrap();
    assert!((w.y[0] - 2.0 * w.x[0]).abs() > 1e-12);
}

#[test]
fn continuity_examples() {
    let f = two_x();
    let base = BasePoint::origin(&f);
    let psi = power(2.0 * (1.0 + 1e-6), 1.0);
    let v = check_continuity(&f, &base, &full1(), &full1(), &psi, &spec()).unwrap();
    assert_eq!(v.status, Status::Holds);
    let v = check_continuity(&f, &base, &full1(), &full1(), &power(1.9, 1.0), &spec()).unwrap();
    assert_eq!(v.status, Status::Fails);

    // inverse of the square around (0,0) w.r.t. (−M, L) with M = {+1}
    let g = SetValuedMap::square().inverse();
    let v = check_continuity(&g, &base, &down(), &full1(), &power(1.0, 0.5), &spec()).unwrap();
    assert_eq!(v.status, Status::Holds);
}

#[test]
fn modulus_of_diag() {
    let inst = diag_2_1();
    let est = estimate_modulus(Property::Open, &inst.map, &inst.base, &inst.l, &inst.m, 1.0, &inst.spec).unwrap();
    assert!(est.c_lo <= 1.0 + 1e-12 && est.c_hi > 1.0);
    assert!(est.c_lo >= 0.9);
    assert!(est.c_hi / est.c_lo <= BISECTION_RATIO);
}

#[test]
fn modulus_of_square() {
    let inst = square_up();
    let est = estimate_modulus(Property::Open, &inst.map, &inst.base, &inst.l, &inst.m, 2.0, &inst.spec).unwrap();
    assert!(est.c_lo >= 0.9 && est.c_lo <= 1.0 && est.c_hi > 1.0, "{est:?}");
    let coarse = estimate_modulus(Property::Open, &inst.map, &inst.base, &inst.l, &inst.m, 1.0, &inst.spec).unwrap();
    let fine =
        estimate_modulus(Property::Open, &inst.map, &inst.base, &inst.l, &inst.m, 1.0, &inst.spec.refined(2)).unwrap();
    assert!(coarse.c_lo >= 4.0 * fine.c_lo, "{} vs {}", coarse.c_lo, fine.c_lo);
}

#[test]
fn regularity_modulus_is_reciprocal() {
    let inst = linear_2x();
    let open = estimate_modulus(Property::Open, &inst.map, &inst.base, &inst.l, &inst.m, 1.0, &inst.spec).unwrap();
    let reg = estimate_modulus(Property::Regular, &inst.map, &inst.base, &inst.l, &inst.m, 1.0, &inst.spec).unwrap();
    assert!(!reg.passes_below);
    let lo = open.c_lo * reg.c_lo;
    let hi = open.c_hi * reg.c_hi;
    assert!(lo <= 1.0 + 1e-9 && hi >= 1.0 - 1e-9, "[{lo}, {hi}]");
}

#[test]
fn equivalence_examples() {
    let f = two_x();
    let base = BasePoint::origin(&f);
    let r = equivalence_harness(&f, &base, &full1(), &full1(), &power(1.9, 1.0), &spec()).unwrap();
    assert_eq!(r.agreement, Agreement::Agree);
    assert!(r.verdicts().iter().all(|v| v.status == Status::Holds));
    assert!(r.rate_note.is_none());
    let r = equivalence_harness(&f, &base, &full1(), &full1(), &power(2.1, 1.0), &spec()).unwrap();
    assert_eq!(r.agreement, Agreement::Agree);
    assert!(r.verdicts().iter().all(|v| v.status == Status::Fails));

    let sq = SetValuedMap::square();
    let r = equivalence_harness(&sq, &base, &full1(), &up(), &power(0.9, 2.0), &spec()).unwrap();
    assert_eq!(r.agreement, Agreement::Agree);
    assert!(r.verdicts().iter().all(|v| v.status == Status::Holds));
    assert!(r.rate_note.is_some());
}
