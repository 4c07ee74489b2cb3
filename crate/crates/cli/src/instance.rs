//! Instance files: a strict TOML schema and its conversion to core types.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dirreg::cones::{DirectionSet, PolyhedralCone};
use dirreg::maps::{abs_graph, linearize_square, BasePoint, SetValuedMap};
use dirreg::polyhedron::Polyhedron;
use dirreg::wellposed::{geometric_scales, NeighborhoodSpec, RateFunction};

pub const SCHEMA_VERSION: u32 = 1;
const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema: u32,
    pub dimensions: Dimensions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<DirSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<DirSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighborhood: Option<NeighborhoodSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<ModulusSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variation: Option<VariationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ekeland: Option<EkelandSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<RefineSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dimensions {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogName {
    Identity,
    Square,
    SquareRoot,
    Epigraph,
    Staircase,
    Abs,
    LinearizedSquare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Linear {
        matrix: Vec<Vec<f64>>,
    },
    Catalog {
        name: CatalogName,
        /// Epigraph slope vector.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<Vec<f64>>,
        /// Staircase step and number of steps per side.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steps: Option<usize>,
        /// Linearization spacing and number of tangents per side.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
    },
    PolyhedralGraph {
        pieces: Vec<PieceSpec>,
    },
    SampledGraph {
        points: Vec<Vec<f64>>,
        h: f64,
    },
}

/// A convex piece of the graph in `Rⁿ⁺ᵐ`, either by vertices and rays or by
/// rows `[a..., b]` meaning `a·z ≤ b` (and `a·z = b` for `eq`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vertices: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rays: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ineq: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eq: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DirSpec {
    Full,
    Finite { directions: Vec<Vec<f64>> },
    Cap { generators: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// `(t, φ(t))` knots of a piecewise linear rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knots: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeighborhoodSection {
    pub rho_x: f64,
    pub rho_y: f64,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_values: Option<Vec<f64>>,
    /// Geometric t-grid `t_first, t_first/2, ...` (`t_count` values).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_first: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_density: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_dirs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_band: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retries: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub membership: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyName {
    Open,
    Regular,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusSection {
    pub property: PropertyName,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_density: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ystar_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_count: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_dirs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_dirs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EkelandSection {
    /// Stacked `(x, y)` points of the finite set.
    pub points: Vec<Vec<f64>>,
    /// `f` at each point; `inf` allowed.
    pub values: Vec<f64>,
    pub start: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineSection {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_target: Vec<f64>,
    /// Generators of the cone `C`; omitted means the whole space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<Vec<Vec<f64>>>,
    /// Box `K = [k_lo, k_hi]`.
    pub k_lo: Vec<f64>,
    pub k_hi: Vec<f64>,
    pub alpha: f64,
    pub t: f64,
    /// Defaults to `rate.r`, then 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Fraction of the exact step taken per iteration; omitted means exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

/// A parsed and validated instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub file: InstanceFile,
    /// Hex SHA-256 of the file bytes.
    pub digest: String,
    pub map: Option<SetValuedMap>,
    pub base: Option<BasePoint>,
    pub l: DirectionSet,
    pub m: DirectionSet,
    pub rate: Option<RateFunction>,
    pub spec: Option<NeighborhoodSpec>,
}

pub fn parse_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance_str(&text).with_context(|| format!("in {}", path.display()))
}

pub fn parse_instance_str(text: &str) -> Result<Instance> {
    let file: InstanceFile = toml::from_str(text).map_err(|e| anyhow!("{e}"))?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    build(file, digest)
}

pub fn to_toml(file: &InstanceFile) -> Result<String> {
    Ok(toml::to_string(file)?)
}

fn check_len(field: &str, v: &[f64], want: usize) -> Result<()> {
    if v.len() != want {
        bail!("{field}: expected {want} entries, got {}", v.len());
    }
    Ok(())
}

fn direction_set(field: &str, spec: Option<&DirSpec>, dim: usize) -> Result<DirectionSet> {
    let check_units = |name: &str, dirs: &[Vec<f64>]| -> Result<()> {
        for (i, d) in dirs.iter().enumerate() {
            check_len(&format!("{field}.{name}[{i}]"), d, dim)?;
            let n = dirreg::linalg::norm(d);
            if (n - 1.0).abs() > UNIT_TOL {
                bail!("{field}.{name}[{i}]: norm {n} is not 1");
            }
        }
        Ok(())
    };
    Ok(match spec {
        None | Some(DirSpec::Full) => DirectionSet::full_sphere(dim),
        Some(DirSpec::Finite { directions }) => {
            check_units("directions", directions)?;
            DirectionSet::finite(dim, directions.clone()).with_context(|| field.to_string())?
        }
        Some(DirSpec::Cap { generators }) => {
            check_units("generators", generators)?;
            let cone = PolyhedralCone::from_generators(dim, generators.clone()).with_context(|| field.to_string())?;
            DirectionSet::cap(cone).with_context(|| field.to_string())?
        }
    })
}

fn piece(i: usize, p: &PieceSpec, dim: usize) -> Result<Polyhedron> {
    let field = format!("map.pieces[{i}]");
    if !p.vertices.is_empty() {
        if !p.ineq.is_empty() || !p.eq.is_empty() {
            bail!("{field}: give either vertices/rays or ineq/eq, not both");
        }
        for (j, v) in p.vertices.iter().chain(&p.rays).enumerate() {
            check_len(&format!("{field} point {j}"), v, dim)?;
        }
        return Ok(Polyhedron::from_vrep(dim, &p.vertices, &p.rays));
    }
    if !p.rays.is_empty() {
        bail!("{field}: rays need at least one vertex");
    }
    let mut poly = Polyhedron::universe(dim);
    for (j, row) in p.ineq.iter().enumerate() {
        check_len(&format!("{field}.ineq[{j}]"), row, dim + 1)?;
        poly = poly.le(row[..dim].to_vec(), row[dim]);
    }
    for (j, row) in p.eq.iter().enumerate() {
        check_len(&format!("{field}.eq[{j}]"), row, dim + 1)?;
        poly = poly.eq(row[..dim].to_vec(), row[dim]);
    }
    Ok(poly)
}

fn map(spec: &MapSpec, n: usize, m: usize) -> Result<SetValuedMap> {
    let want_dims = |f: SetValuedMap| -> Result<SetValuedMap> {
        if (f.n, f.m) != (n, m) {
            bail!("map: dimensions ({}, {}) do not match dimensions ({n}, {m})", f.n, f.m);
        }
        Ok(f)
    };
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| anyhow!("map: catalog entry needs `{name}`"));
    match spec {
        MapSpec::Linear { matrix } => {
            for (i, row) in matrix.iter().enumerate() {
                check_len(&format!("map.matrix[{i}]"), row, n)?;
            }
            want_dims(SetValuedMap::linear(matrix.clone()).context("map")?)
        }
        MapSpec::Catalog { name, a, step, steps, h, k } => want_dims(match name {
            CatalogName::Identity => SetValuedMap::identity(n),
            CatalogName::Square => SetValuedMap::square(),
            CatalogName::SquareRoot => SetValuedMap::square_root(),
            CatalogName::Epigraph => {
                let a = a.clone().ok_or_else(|| anyhow!("map: epigraph needs `a`"))?;
                SetValuedMap::epigraph(a)
            }
            CatalogName::Staircase => SetValuedMap::staircase(
                need(*step, "step")?,
                steps.ok_or_else(|| anyhow!("map: staircase needs `steps`"))?,
            )
            .context("map")?,
            CatalogName::Abs => abs_graph(),
            CatalogName::LinearizedSquare => {
                linearize_square(need(*h, "h")?, k.ok_or_else(|| anyhow!("map: linearized_square needs `k`"))?)
            }
        }),
        MapSpec::PolyhedralGraph { pieces } => {
            let ps = pieces.iter().enumerate().map(|(i, p)| piece(i, p, n + m)).collect::<Result<Vec<_>>>()?;
            Ok(SetValuedMap::polyhedral(n, m, ps).context("map")?)
        }
        MapSpec::SampledGraph { points, h } => {
            for (i, p) in points.iter().enumerate() {
                check_len(&format!("map.points[{i}]"), p, n + m)?;
            }
            Ok(SetValuedMap::sampled(n, m, points.clone(), *h).context("map")?)
        }
    }
}

fn rate(spec: &RateSpec) -> Result<RateFunction> {
    match (spec.c, spec.r, &spec.knots) {
        (Some(c), r, None) => Ok(RateFunction::power(c, r.unwrap_or(1.0)).context("rate")?),
        (None, None, Some(k)) => {
            Ok(RateFunction::piecewise_linear(k.iter().map(|p| (p[0], p[1])).collect()).context("rate")?)
        }
        _ => bail!("rate: give either `c` (and optionally `r`) or `knots`"),
    }
}

fn neighborhood(s: &NeighborhoodSection) -> Result<NeighborhoodSpec> {
    let mut spec = NeighborhoodSpec::new(s.rho_x, s.rho_y, s.epsilon).context("neighborhood")?;
    match (&s.t_values, s.t_first, s.t_count) {
        (Some(t), None, None) => spec = spec.with_t_values(t.clone()).context("neighborhood.t_values")?,
        (None, Some(first), count) => {
            spec = spec.with_t_values(geometric_scales(first, count.unwrap_or(6))).context("neighborhood.t_first")?
        }
        (None, None, None) => {}
        _ => bail!("neighborhood: give either `t_values` or `t_first`/`t_count`"),
    }
    if let Some(d) = s.grid_density {
        spec.grid_density = d;
    }
    if let Some(d) = s.target_dirs {
        spec.target_dirs = d;
    }
    if let Some(d) = s.radial_steps {
        spec.radial_steps = d;
    }
    if let Some(v) = s.slack {
        spec.slack = v;
    }
    if let Some(v) = s.boundary_band {
        spec.boundary_band = v;
    }
    if let Some(v) = s.retries {
        spec.retries = v;
    }
    spec.validate().context("neighborhood")?;
    Ok(spec)
}

pub fn build(file: InstanceFile, digest: String) -> Result<Instance> {
    if file.schema != SCHEMA_VERSION {
        bail!("schema: unsupported version {} (expected {SCHEMA_VERSION})", file.schema);
    }
    let Dimensions { n, m } = file.dimensions;
    if n == 0 || m == 0 {
        bail!("dimensions: n and m must be positive");
    }
    let l = direction_set("l", file.l.as_ref(), n)?;
    let md = direction_set("m", file.m.as_ref(), m)?;
    let f = file.map.as_ref().map(|s| map(s, n, m)).transpose()?;
    let base = match (&file.base, &f) {
        (Some(b), Some(f)) => {
            check_len("base.x", &b.x, n)?;
            check_len("base.y", &b.y, m)?;
            Some(BasePoint::new(f, b.x.clone(), b.y.clone()).context("base")?)
        }
        (Some(_), None) => bail!("base: given without a map"),
        (None, _) => None,
    };
    let rate = file.rate.as_ref().map(rate).transpose()?;
    let spec = file.neighborhood.as_ref().map(neighborhood).transpose()?;
    Ok(Instance { file, digest, map: f, base, l, m: md, rate, spec })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINEAR: &str = r#"
schema = 1
[dimensions]
n = 1
m = 1
[map]
kind = "linear"
matrix = [[2.0]]
[base]
x = [0.0]
y = [0.0]
"#;

    #[test]
    fn minimal_linear_instance() {
        let inst = parse_instance_str(LINEAR).unwrap();
        assert_eq!(inst.map.unwrap().n, 1);
        assert_eq!(inst.digest.len(), 64);
    }

    #[test]
    fn non_unit_generator_is_named() {
        let text = format!("{LINEAR}[l]\nkind = \"cap\"\ngenerators = [[1.0], [-2.0]]\n");
        let err = format!("{:#}", parse_instance_str(&text).unwrap_err());
        assert!(err.contains("l.generators[1]"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = LINEAR.replace("matrix", "matrx");
        assert!(parse_instance_str(&text).is_err());
        let text = format!("{LINEAR}[extra]\nfoo = 1\n");
        assert!(parse_instance_str(&text).is_err());
        let text = LINEAR.replace("matrix = [[2.0]]", "matrix = [[2.0]]\nscale = 3");
        assert!(parse_instance_str(&text).is_err());
        let text = LINEAR.replace("x = [0.0]", "x = [0.0]\nz = 1");
        assert!(parse_instance_str(&text).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let text = LINEAR.replace("x = [0.0]", "x = [0.0, 1.0]");
        let err = format!("{:#}", parse_instance_str(&text).unwrap_err());
        assert!(err.contains("base.x"), "{err}");
    }

    #[test]
    fn base_off_graph_rejected() {
        let text = LINEAR.replace("y = [0.0]", "y = [1.0]");
        assert!(parse_instance_str(&text).is_err());
    }

    #[test]
    fn square_instance_round_trips() {
        let text = r#"
schema = 1
[dimensions]
n = 1
m = 1
[map]
kind = "catalog"
name = "square"
[base]
x = [0.0]
y = [0.0]
[m]
kind = "finite"
directions = [[1.0]]
[rate]
c = 0.9
r = 2.0
[neighborhood]
rho_x = 0.25
rho_y = 0.25
epsilon = 0.5
t_first = 0.25
t_count = 8
"#;
        let inst = parse_instance_str(text).unwrap();
        let again = to_toml(&inst.file).unwrap();
        let back = parse_instance_str(&again).unwrap();
        assert_eq!(back.file, inst.file);
        assert_eq!(back.m, inst.m);
        assert_eq!(back.spec, inst.spec);
    }

    #[test]
    fn infinite_values_parse() {
        let text = r#"
schema = 1
[dimensions]
n = 1
m = 1
[ekeland]
points = [[0.0, 0.0], [1.0, 0.0]]
values = [1.0, inf]
start = 0
epsilon = 1.0
"#;
        let inst = parse_instance_str(text).unwrap();
        assert!(inst.file.ekeland.unwrap().values[1].is_infinite());
    }

    #[test]
    fn wrong_schema_version() {
        assert!(parse_instance_str(&LINEAR.replace("schema = 1", "schema = 2")).is_err());
    }
}
