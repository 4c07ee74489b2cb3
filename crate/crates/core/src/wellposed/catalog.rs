//! Reference instances with known moduli, used by the acceptance suites and
//! the CLI examples.

use super::NeighborhoodSpec;
use crate::cones::DirectionSet;
use crate::maps::{abs_graph, BasePoint, SetValuedMap};

#[derive(Debug, Clone)]
pub struct CatalogInstance {
    pub name: &'static str,
    pub map: SetValuedMap,
    pub base: BasePoint,
    pub l: DirectionSet,
    pub m: DirectionSet,
    pub spec: NeighborhoodSpec,
    /// Openness modulus at rate 1 where it is known in closed form.
    pub linear_modulus: Option<f64>,
}

fn spec_1d() -> NeighborhoodSpec {
    NeighborhoodSpec::new(0.25, 0.25, 0.5).expect("valid")
}

fn spec_2d() -> NeighborhoodSpec {
    let mut s = NeighborhoodSpec::new(0.25, 0.25, 0.5).expect("valid");
    s.grid_density = 7;
    s.target_dirs = 32;
    s.radial_steps = 2;
    s
}

fn instance(
    name: &'static str,
    map: SetValuedMap,
    l: DirectionSet,
    m: DirectionSet,
    spec: NeighborhoodSpec,
    linear_modulus: Option<f64>,
) -> CatalogInstance {
    let base = BasePoint::origin(&map);
    CatalogInstance { name, map, base, l, m, spec, linear_modulus }
}

pub fn linear_2x() -> CatalogInstance {
    instance(
        "linear_2x",
        SetValuedMap::linear(vec![vec![2.0]]).expect("valid"),
        DirectionSet::full_sphere(1),
        DirectionSet::full_sphere(1),
        spec_1d(),
        Some(2.0),
    )
}

pub fn identity_1d() -> CatalogInstance {
    instance(
        "identity",
        SetValuedMap::identity(1),
        DirectionSet::full_sphere(1),
        DirectionSet::full_sphere(1),
        spec_1d(),
        Some(1.0),
    )
}

pub fn square_up() -> CatalogInstance {
    instance(
        "square_up",
        SetValuedMap::square(),
        DirectionSet::full_sphere(1),
        DirectionSet::ray(&[1.0]).expect("unit"),
        spec_1d(),
        None,
    )
}

pub fn square_down() -> CatalogInstance {
    instance(
        "square_down",
        SetValuedMap::square(),
        DirectionSet::full_sphere(1),
        DirectionSet::ray(&[-1.0]).expect("unit"),
        spec_1d(),
        None,
    )
}

pub fn epigraph() -> CatalogInstance {
    instance(
        "epigraph",
        SetValuedMap::epigraph(vec![1.0]),
        DirectionSet::full_sphere(1),
        DirectionSet::full_sphere(1),
        spec_1d(),
        Some(1.0),
    )
}

pub fn diag_2_1() -> CatalogInstance {
    instance(
        "diag_2_1",
        SetValuedMap::linear(vec![vec![2.0, 0.0], vec![0.0, 1.0]]).expect("valid"),
        DirectionSet::full_sphere(2),
        DirectionSet::full_sphere(2),
        spec_2d(),
        Some(1.0),
    )
}

pub fn staircase() -> CatalogInstance {
    instance(
        "staircase",
        SetValuedMap::staircase(0.05, 12).expect("valid"),
        DirectionSet::full_sphere(1),
        DirectionSet::full_sphere(1),
        spec_1d(),
        Some(0.0),
    )
}

pub fn abs_up() -> CatalogInstance {
    instance(
        "abs_up",
        abs_graph(),
        DirectionSet::full_sphere(1),
        DirectionSet::ray(&[1.0]).expect("unit"),
        spec_1d(),
        Some(1.0),
    )
}

pub fn product_id_epigraph() -> CatalogInstance {
    instance(
        "product_id_epigraph",
        SetValuedMap::product(SetValuedMap::identity(1), SetValuedMap::epigraph(vec![1.0])),
        DirectionSet::full_sphere(2),
        DirectionSet::full_sphere(2),
        spec_2d(),
        Some(1.0),
    )
}

/// Every catalog instance.
pub fn catalog_instances() -> Vec<CatalogInstance> {
    vec![linear_2x(), square_up(), square_down(), epigraph(), diag_2_1(), staircase(), product_id_epigraph()]
}
