//! Command dispatch: one analysis per command, one tidy table per report.

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;

use dirreg::coderiv::{check_criterion, CriterionSampling};
use dirreg::cones::{PolyhedralCone, Region};
use dirreg::ekeland::{
    directional_ekeland, refine_preimage, CoveringStep, DampedCovering, EkelandInstance, ExactCovering, RefineSpec,
};
use dirreg::linalg;
use dirreg::maps::{BasePoint, SetValuedMap};
use dirreg::polyhedron::Polyhedron;
use dirreg::variation::{variation_membership, variation_modulus, ProbeSpec, VariationGrid};
use dirreg::wellposed::{
    check_property, equivalence_harness, estimate_modulus, Agreement, NeighborhoodSpec, Property, RateFunction, Status,
    Verdict,
};

use crate::instance::{Instance, PropertyName};
use crate::report::{num, opt_num, opt_vec, vec, Outcome, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    CheckOpen,
    CheckReg,
    CheckCont,
    Equivalence,
    EstimateModulus,
    Criterion,
    Variation,
    VariationModulus,
    Ekeland,
    Refine,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckOpen => "check-open",
            Command::CheckReg => "check-reg",
            Command::CheckCont => "check-cont",
            Command::Equivalence => "equivalence",
            Command::EstimateModulus => "estimate-modulus",
            Command::Criterion => "criterion",
            Command::Variation => "variation",
            Command::VariationModulus => "variation-modulus",
            Command::Ekeland => "ekeland",
            Command::Refine => "refine",
        }
    }

    pub const ALL: [Command; 10] = [
        Command::CheckOpen,
        Command::CheckReg,
        Command::CheckCont,
        Command::Equivalence,
        Command::EstimateModulus,
        Command::Criterion,
        Command::Variation,
        Command::VariationModulus,
        Command::Ekeland,
        Command::Refine,
    ];
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Options {
    /// Overrides the tolerance the command uses.
    pub tol: Option<f64>,
    /// Multiplies grid densities and direction counts.
    pub grid_scale: Option<usize>,
    pub seed_override: Option<u64>,
}

impl Options {
    fn scale(&self) -> usize {
        self.grid_scale.unwrap_or(1).max(1)
    }
}

const PREFIX: [&str; 3] = ["command", "digest", "seed"];

struct Ctx<'a> {
    inst: &'a Instance,
    opts: &'a Options,
    prefix: [String; 3],
}

impl Ctx<'_> {
    fn map(&self) -> Result<&SetValuedMap> {
        self.inst.map.as_ref().ok_or_else(|| anyhow!("instance has no [map]"))
    }

    fn base(&self) -> Result<&BasePoint> {
        self.inst.base.as_ref().ok_or_else(|| anyhow!("instance has no [base]"))
    }

    fn rate(&self) -> Result<&RateFunction> {
        self.inst.rate.as_ref().ok_or_else(|| anyhow!("instance has no [rate]"))
    }

    fn power(&self) -> Result<(f64, f64)> {
        match self.rate()? {
            RateFunction::Power { c, r } => Ok((*c, *r)),
            _ => bail!("this command needs a power rate `c`, `r`"),
        }
    }

    fn spec(&self) -> Result<NeighborhoodSpec> {
        let mut spec = self.inst.spec.clone().ok_or_else(|| anyhow!("instance has no [neighborhood]"))?;
        let k = self.opts.scale();
        spec.grid_density *= k;
        spec.target_dirs *= k;
        if let Some(t) = self.opts.tol {
            spec.slack = t;
        }
        Ok(spec)
    }

    fn row(&self, rest: impl IntoIterator<Item = String>) -> Vec<String> {
        self.prefix.iter().cloned().chain(rest).collect()
    }

    fn tolerances(&self) -> crate::instance::Tolerances {
        self.inst.file.tolerances.clone().unwrap_or_default()
    }
}

fn header(rest: &[&'static str]) -> Vec<&'static str> {
    PREFIX.iter().chain(rest).copied().collect()
}

fn status_outcome(s: Status) -> Outcome {
    match s {
        Status::Holds => Outcome::Pass,
        Status::Fails => Outcome::Fail,
        Status::Inconclusive => Outcome::Inconclusive,
    }
}

const VERDICT_COLUMNS: [&str; 21] = [
    "property",
    "rate",
    "status",
    "x",
    "y",
    "t",
    "probe",
    "lhs",
    "rhs",
    "violation",
    "rho_x",
    "rho_y",
    "epsilon",
    "t_count",
    "t_min",
    "grid_density",
    "graph_points",
    "evaluations",
    "retries_used",
    "agreement",
    "rate_note",
];

fn verdict_row(ctx: &Ctx, v: &Verdict, agreement: &str, note: &str) -> Vec<String> {
    let w = v.witness.as_ref();
    let m = &v.meta;
    ctx.row([
        v.property.name().to_string(),
        v.rate.clone(),
        v.status.name().to_string(),
        opt_vec(w.map(|w| w.x.as_slice())),
        opt_vec(w.map(|w| w.y.as_slice())),
        opt_num(w.and_then(|w| w.t)),
        opt_vec(w.map(|w| w.probe.as_slice())),
        opt_num(w.map(|w| w.lhs)),
        opt_num(w.map(|w| w.rhs)),
        opt_num(w.map(|w| w.violation)),
        num(m.rho_x),
        num(m.rho_y),
        num(m.epsilon),
        m.t_count.to_string(),
        num(m.t_min),
        m.grid_density.to_string(),
        m.graph_points.to_string(),
        m.evaluations.to_string(),
        m.retries_used.to_string(),
        agreement.to_string(),
        note.to_string(),
    ])
}

fn check(ctx: &Ctx, property: Property) -> Result<Report> {
    let v = check_property(property, ctx.map()?, ctx.base()?, &ctx.inst.l, &ctx.inst.m, ctx.rate()?, &ctx.spec()?)?;
    Ok(Report {
        header: header(&VERDICT_COLUMNS),
        outcome: status_outcome(v.status),
        rows: vec![verdict_row(ctx, &v, "", "")],
    })
}

fn equivalence(ctx: &Ctx) -> Result<Report> {
    let rep = equivalence_harness(ctx.map()?, ctx.base()?, &ctx.inst.l, &ctx.inst.m, ctx.rate()?, &ctx.spec()?)?;
    let note = rep.rate_note.clone().unwrap_or_default();
    let rows = rep.verdicts().iter().map(|v| verdict_row(ctx, v, rep.agreement.name(), &note)).collect();
    let outcome = match rep.agreement {
        Agreement::Agree => Outcome::Pass,
        Agreement::Inconclusive => Outcome::Inconclusive,
        Agreement::Disagree => Outcome::Fail,
    };
    Ok(Report { header: header(&VERDICT_COLUMNS), rows, outcome })
}

fn estimate(ctx: &Ctx) -> Result<Report> {
    let property = match ctx.inst.file.modulus.as_ref().map(|m| m.property) {
        None | Some(PropertyName::Open) => Property::Open,
        Some(PropertyName::Regular) => Property::Regular,
        Some(PropertyName::Continuous) => Property::Continuous,
    };
    let r = ctx.inst.file.rate.as_ref().and_then(|r| r.r).unwrap_or(1.0);
    let est = estimate_modulus(property, ctx.map()?, ctx.base()?, &ctx.inst.l, &ctx.inst.m, r, &ctx.spec()?)?;
    let rows = est
        .trace
        .iter()
        .map(|(c, s)| {
            ctx.row([
                property.name().to_string(),
                num(r),
                num(*c),
                s.name().to_string(),
                num(est.c_lo),
                num(est.c_hi),
                est.passes_below.to_string(),
            ])
        })
        .collect();
    Ok(Report {
        header: header(&["property", "r", "c", "status", "c_lo", "c_hi", "passes_below"]),
        rows,
        outcome: Outcome::Pass,
    })
}

fn criterion(ctx: &Ctx) -> Result<Report> {
    if !ctx.map()?.is_polyhedral() {
        return Err(dirreg::Error::NotPolyhedral.into());
    }
    let (c, r) = ctx.power()?;
    if r != 1.0 {
        bail!("the coderivative criterion is for linear rates (r = 1), got r = {r}");
    }
    let sec = ctx.inst.file.criterion.clone().unwrap_or_default();
    let d = CriterionSampling::default();
    let k = ctx.opts.scale();
    let sampling = CriterionSampling {
        rho: sec.rho.unwrap_or(d.rho),
        grid_density: sec.grid_density.unwrap_or(d.grid_density) * k,
        ystar_count: sec.ystar_count.unwrap_or(d.ystar_count) * k,
        v_count: sec.v_count.unwrap_or(d.v_count),
        tol: ctx.opts.tol.or(ctx.tolerances().criterion).unwrap_or(d.tol),
    };
    let rep = check_criterion(ctx.map()?, ctx.base()?, &ctx.inst.l, &ctx.inst.m, c, &sampling)?;
    let rows = rep
        .records
        .iter()
        .map(|rec| {
            ctx.row([
                num(c),
                vec(&rec.x),
                vec(&rec.y),
                vec(&rec.y_star),
                opt_vec(rec.x_star.as_deref()),
                vec(&rec.v),
                opt_vec(rec.u.as_deref()),
                num(rec.slack),
                num(rep.min_slack),
                rep.passed.to_string(),
            ])
        })
        .collect();
    Ok(Report {
        header: header(&["c", "x", "y", "y_star", "x_star", "v", "u", "slack", "min_slack", "passed"]),
        rows,
        outcome: if rep.passed { Outcome::Pass } else { Outcome::Fail },
    })
}

fn variation_grid(ctx: &Ctx) -> VariationGrid {
    let sec = ctx.inst.file.variation.clone().unwrap_or_default();
    let d = VariationGrid::default();
    let k = ctx.opts.scale();
    VariationGrid {
        probe: ProbeSpec {
            scales: sec.scales.unwrap_or(d.probe.scales),
            base_dirs: sec.base_dirs.unwrap_or(d.probe.base_dirs) * k,
            m_dirs: sec.m_dirs.unwrap_or(d.probe.m_dirs),
            tol: ctx.opts.tol.or(ctx.tolerances().membership).unwrap_or(d.probe.tol),
        },
        directions: sec.directions.unwrap_or(d.directions) * k,
    }
}

fn variation(ctx: &Ctx) -> Result<Report> {
    let (c, r) = ctx.power()?;
    let grid = variation_grid(ctx);
    let (f, base) = (ctx.map()?, ctx.base()?);
    let mut outcome = Outcome::Pass;
    let mut rows = Vec::new();
    for u in ctx.inst.m.sample(grid.directions) {
        let v = linalg::scale(&u, c);
        let p = variation_membership(f, base, &ctx.inst.l, &ctx.inst.m, r, &v, &grid.probe)?;
        let bound = grid.probe.tol * (1.0 + c);
        let this = if p.member {
            Outcome::Pass
        } else if p.max_residual <= 10.0 * bound {
            Outcome::Inconclusive
        } else {
            Outcome::Fail
        };
        outcome = outcome.and(this);
        rows.push(ctx.row([
            vec(&v),
            num(r),
            num(c),
            num(p.max_residual),
            p.member.to_string(),
            p.scales.len().to_string(),
            num(*p.scales.last().expect("nonempty")),
        ]));
    }
    Ok(Report { header: header(&["v", "r", "c", "max_residual", "member", "scale_count", "t_min"]), rows, outcome })
}

fn variation_mod(ctx: &Ctx) -> Result<Report> {
    let r = ctx.inst.file.rate.as_ref().and_then(|r| r.r).unwrap_or(1.0);
    let grid = variation_grid(ctx);
    let m = variation_modulus(ctx.map()?, ctx.base()?, &ctx.inst.l, &ctx.inst.m, r, &grid)?;
    Ok(Report {
        header: header(&["r", "c_bar_lo", "c_bar_hi", "directions", "scale_count", "t_min"]),
        rows: vec![ctx.row([
            num(r),
            num(m.c_bar_lo),
            num(m.c_bar_hi),
            m.directions.len().to_string(),
            grid.probe.scales.len().to_string(),
            num(*grid.probe.scales.last().expect("nonempty")),
        ])],
        outcome: Outcome::Pass,
    })
}

fn ekeland(ctx: &Ctx) -> Result<Report> {
    let sec = ctx.inst.file.ekeland.clone().ok_or_else(|| anyhow!("instance has no [ekeland]"))?;
    let inst = EkelandInstance {
        points: sec.points,
        n: ctx.inst.file.dimensions.n,
        values: sec.values,
        start: sec.start,
        epsilon: sec.epsilon,
        l: ctx.inst.l.clone(),
        m: ctx.inst.m.clone(),
    };
    let out = directional_ekeland(&inst)?;
    let check = inst.verify(out.index);
    Ok(Report {
        header: header(&["index", "point", "value", "moves", "descent_margin", "strict_margin"]),
        rows: vec![ctx.row([
            out.index.to_string(),
            vec(&out.point),
            num(out.value),
            out.moves.to_string(),
            num(check.descent_margin),
            num(check.strict_margin),
        ])],
        outcome: Outcome::Pass,
    })
}

fn refine(ctx: &Ctx) -> Result<Report> {
    let sec = ctx.inst.file.refine.clone().ok_or_else(|| anyhow!("instance has no [refine]"))?;
    let f = ctx.map()?;
    let cone = match &sec.cone {
        None => PolyhedralCone::full(f.n),
        Some(g) => PolyhedralCone::from_generators(f.n, g.clone()).context("refine.cone")?,
    };
    if sec.k_lo.len() != f.m || sec.k_hi.len() != f.m {
        bail!("refine.k_lo/k_hi: expected {} entries", f.m);
    }
    let k = Region::from_polytopes(f.m, vec![Polyhedron::boxed(&sec.k_lo, &sec.k_hi)]);
    let r = sec.r.or(ctx.inst.file.rate.as_ref().and_then(|r| r.r)).unwrap_or(1.0);
    let mut spec = RefineSpec::new(r, sec.alpha, sec.t);
    if let Some(t) = ctx.opts.tol.or(ctx.tolerances().refine) {
        spec.tol = t;
    }
    if let Some(n) = sec.max_iter {
        spec.max_iter = n;
    }
    let damped;
    let step: &dyn CoveringStep = match sec.damping {
        None => &ExactCovering,
        Some(factor) => {
            if !(factor > 0.0 && factor <= 1.0) {
                bail!("refine.damping must lie in (0, 1], got {factor}");
            }
            damped = DampedCovering { factor };
            &damped
        }
    };
    let tr = refine_preimage(f, &sec.x, &sec.y, &sec.y_target, &cone, &k, &spec, step)?;
    let rows = (1..tr.iterates.len())
        .map(|i| {
            let (x, y) = &tr.iterates[i];
            ctx.row([
                i.to_string(),
                vec(x),
                vec(y),
                num(tr.steps[i - 1]),
                num(tr.step_bounds[i - 1]),
                num(tr.residuals[i]),
                num(tr.residual_bounds[i]),
            ])
        })
        .collect();
    Ok(Report {
        header: header(&["iterate", "x", "y", "step", "step_bound", "residual", "residual_bound"]),
        rows,
        outcome: if tr.converged { Outcome::Pass } else { Outcome::Inconclusive },
    })
}

/// First 16 hex digits of the instance digest as a `u64`.
pub fn default_seed(digest: &str) -> u64 {
    u64::from_str_radix(&digest[..16.min(digest.len())], 16).unwrap_or(0)
}

pub fn run(command: Command, inst: &Instance, opts: &Options) -> Result<Report> {
    let seed = opts.seed_override.unwrap_or_else(|| default_seed(&inst.digest));
    let ctx = Ctx { inst, opts, prefix: [command.name().to_string(), inst.digest[..16].to_string(), seed.to_string()] };
    match command {
        Command::CheckOpen => check(&ctx, Property::Open),
        Command::CheckReg => check(&ctx, Property::Regular),
        Command::CheckCont => check(&ctx, Property::Continuous),
        Command::Equivalence => equivalence(&ctx),
        Command::EstimateModulus => estimate(&ctx),
        Command::Criterion => criterion(&ctx),
        Command::Variation => variation(&ctx),
        Command::VariationModulus => variation_mod(&ctx),
        Command::Ekeland => ekeland(&ctx),
        Command::Refine => refine(&ctx),
    }
    .with_context(|| command.name().to_string())
}
