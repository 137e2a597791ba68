//! Dispatch from a validated configuration to the library operations.

use std::collections::BTreeMap;

use pseudospec::ads3::{self, GroupPresentation, WordBall};
use pseudospec::cartan::{self, AmbientGroup, ConeSubset, GroupElement, Sl2Pair};
use pseudospec::flat_spectra::{self, DeformationParameter, DensityOptions, EnumerationOptions, SpectrumWindow};
use pseudospec::quadform::{self, Signature};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::Csv;
use crate::params::{matrix2_from, Params};

pub const BUDGET_ENV: &str = "PSEUDOSPEC_BUDGET";

/// Result of one command before it is written to disk.
pub struct Outcome {
    pub csv: Csv,
    pub json: Value,
    pub tolerances: BTreeMap<String, Value>,
}

struct Ctx<'a> {
    command: Command,
    params: Params<'a>,
    seed: u64,
    budget: Option<u64>,
}

impl Ctx<'_> {
    fn op<T>(&self, r: pseudospec::Result<T>) -> CliResult<T> {
        r.map_err(|source| CliError::Op {
            command: self.command.name(),
            source,
        })
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn point_budget(&self) -> u64 {
        self.budget.unwrap_or(flat_spectra::DEFAULT_POINT_BUDGET)
    }

    fn word_budget(&self) -> u64 {
        self.budget.unwrap_or(ads3::DEFAULT_WORD_BUDGET)
    }

    fn deformation(&self) -> CliResult<DeformationParameter> {
        let g = self.params.matrix("g")?;
        let sig = Signature::new(self.params.usize("p")?, self.params.usize("q")?);
        self.op(DeformationParameter::new(g, sig))
    }

    fn window(&self, box_radius: u32) -> CliResult<SpectrumWindow> {
        self.op(SpectrumWindow::new(
            self.params.f64("lambda_min")?,
            self.params.f64("lambda_max")?,
            box_radius,
        ))
    }

    fn presentation(&self) -> CliResult<GroupPresentation> {
        let kind = self.params.str("presentation")?;
        let explicit = self.params.is_set("generators");
        match (kind, explicit) {
            ("explicit", true) => {
                let list = self.params.raw_value("generators");
                let items = list.as_array().ok_or_else(|| {
                    self.params
                        .error("generators", "expected a list of {left, right} pairs")
                })?;
                let mut gens = Vec::with_capacity(items.len());
                for item in items {
                    let side = |name: &str| {
                        matrix2_from(item.get(name).unwrap_or(&Value::Null))
                            .map_err(|reason| self.params.error("generators", format!("`{name}`: {reason}")))
                    };
                    gens.push(self.op(Sl2Pair::new(
                        side("left")?,
                        side("right")?,
                        ads3::GENERATOR_DET_TOLERANCE,
                    ))?);
                }
                self.op(GroupPresentation::new(gens))
            }
            ("explicit", false) => Err(self
                .params
                .error("generators", "required when presentation is `explicit`")),
            (_, true) => Err(self
                .params
                .error("generators", "only allowed when presentation is `explicit`")),
            (kind, false) => {
                let t = self.params.f64("translation")?;
                if t <= 0.0 {
                    return Err(self.params.error("translation", "must be positive"));
                }
                match kind {
                    "standard" | "ping_pong" => Ok(GroupPresentation::ping_pong(t)),
                    "rank_one" => Ok(GroupPresentation::rank_one(t)),
                    other => Err(self.params.error(
                        "presentation",
                        format!("unknown presentation `{other}`; expected standard, ping_pong, rank_one or explicit"),
                    )),
                }
            }
        }
    }

    fn ball(&self, p: &GroupPresentation, radius: u32) -> CliResult<WordBall> {
        self.op(ads3::enumerate_ball_with(
            p,
            radius,
            ads3::DEFAULT_DEDUPE_TOL,
            self.word_budget(),
        ))
    }

    fn group(&self, n: Option<usize>) -> CliResult<AmbientGroup> {
        match self.params.str("group")? {
            "sl2xsl2" => Ok(AmbientGroup::Sl2xSl2),
            "sl_n" => match n {
                Some(n) if n >= 2 => Ok(AmbientGroup::SlN { n }),
                _ => Err(self.params.error("group", "`sl_n` needs a dimension of at least 2")),
            },
            other => Err(self
                .params
                .error("group", format!("unknown group `{other}`; expected sl_n or sl2xsl2"))),
        }
    }

    fn cone(&self, key: &str, group: AmbientGroup) -> CliResult<ConeSubset> {
        let value = self.params.raw_value(key);
        if let Some(name) = value.as_str() {
            let planar = |c: ConeSubset| {
                if group == AmbientGroup::Sl2xSl2 {
                    Ok(c)
                } else {
                    Err(self.params.error(key, format!("`{name}` is only defined for sl2xsl2")))
                }
            };
            return match name {
                "first_axis" => planar(ConeSubset::first_axis_ray()),
                "diagonal" => planar(ConeSubset::diagonal_ray()),
                "full_chamber" => Ok(ConeSubset::full_chamber(group)),
                "zero" => Ok(ConeSubset::zero(group)),
                other => Err(self.params.error(
                    key,
                    format!(
                        "unknown cone `{other}`; expected first_axis, diagonal, full_chamber, zero or a generator list"
                    ),
                )),
            };
        }
        let gens = self.params.vectors(key)?;
        if gens.iter().any(|g| g.len() != group.coord_len()) {
            return Err(self
                .params
                .error(key, format!("generators must have {} coordinates", group.coord_len())));
        }
        self.op(ConeSubset::new(group, gens))
    }
}

fn to_json<T: Serialize>(v: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(v)?)
}

fn tolerances<const N: usize>(pairs: [(&str, Value); N]) -> BTreeMap<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn budget_from_env() -> CliResult<Option<u64>> {
    match std::env::var(BUDGET_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{BUDGET_ENV} must be a nonnegative integer, got `{raw}`"))),
        Err(_) => Ok(None),
    }
}

pub fn execute(config: &RunConfig, budget: Option<u64>) -> CliResult<Outcome> {
    let ctx = Ctx {
        command: config.command,
        params: Params::new(config.command, &config.parameters),
        seed: config.seed,
        budget,
    };
    match config.command {
        Command::FlatSpectrum => flat_spectrum(&ctx),
        Command::StabilityScan => stability_scan(&ctx),
        Command::OppenheimScan => oppenheim_scan(&ctx),
        Command::Cartan => cartan_cmd(&ctx),
        Command::Properness => properness(&ctx),
        Command::Sharpness => sharpness(&ctx),
        Command::Ads3Stable => ads3_stable(&ctx),
        Command::OrbitCount => orbit_count(&ctx),
        Command::Poincare => poincare(&ctx),
        Command::StabilityExperiment => stability_experiment(&ctx),
    }
}

fn flat_spectrum(ctx: &Ctx) -> CliResult<Outcome> {
    let g = ctx.deformation()?;
    let window = ctx.window(ctx.params.u32("box_radius")?)?;
    let opts = EnumerationOptions {
        budget: ctx.point_budget(),
    };
    let sample = ctx.op(flat_spectra::enumerate_spectrum_with(&g, &window, opts))?;
    let values = sample.distinct();

    let n = g.dim();
    let mut header = vec!["eigenvalue".to_string(), "multiplicity".to_string()];
    header.extend((1..=n).map(|i| format!("witness_{i}")));
    let mut csv = Csv::new(&header);
    for v in &values {
        let rep = v
            .witnesses
            .iter()
            .min_by_key(|w| (w.sup_norm(), (*w).clone()))
            .expect("clusters are nonempty");
        let mut row = vec![Csv::float(v.eigenvalue), v.multiplicity.to_string()];
        row.extend(rep.coords().iter().map(i64::to_string));
        csv.row(row);
    }
    Ok(Outcome {
        csv,
        json: json!({
            "window": to_json(&window)?,
            "complete_below_box": sample.complete_below_box,
            "condition_number": g.condition_number(),
            "values": to_json(&values)?,
        }),
        tolerances: tolerances([
            ("eigenvalue_dedup", json!(flat_spectra::EIGENVALUE_DEDUP_TOL)),
            ("singularity_threshold", json!(quadform::SINGULARITY_THRESHOLD)),
            ("point_budget", json!(opts.budget)),
        ]),
    })
}

fn stability_scan(ctx: &Ctx) -> CliResult<Outcome> {
    let g = ctx.deformation()?;
    let window = ctx.window(ctx.params.u32("box_radius")?)?;
    let match_tol = ctx.params.f64("match_tol")?;
    let opts = EnumerationOptions {
        budget: ctx.point_budget(),
    };
    let scan = ctx.op(flat_spectra::stability_scan(
        &g,
        ctx.params.f64("radius")?,
        ctx.params.usize("samples")?,
        &window,
        match_tol,
        opts,
        &mut ctx.rng(),
    ))?;
    let mut csv = Csv::new(&["eigenvalue"]);
    for v in &scan.common {
        csv.row(vec![Csv::float(*v)]);
    }
    Ok(Outcome {
        csv,
        json: to_json(&scan)?,
        tolerances: tolerances([
            ("match_tol", json!(match_tol)),
            ("perturbation_det_floor", json!(flat_spectra::PERTURBATION_DET_FLOOR)),
            ("point_budget", json!(opts.budget)),
        ]),
    })
}

fn oppenheim_scan(ctx: &Ctx) -> CliResult<Outcome> {
    let g = ctx.deformation()?;
    let radii = ctx.params.u32_list("box_radii")?;
    let windows = radii.iter().map(|&m| ctx.window(m)).collect::<CliResult<Vec<_>>>()?;
    let rational_bound = i64::try_from(ctx.params.u64("rational_bound")?)
        .ok()
        .filter(|&b| b >= 1)
        .ok_or_else(|| ctx.params.error("rational_bound", "must be a positive integer"))?;
    let opts = DensityOptions {
        rational_bound,
        rational_tol: ctx.params.f64("rational_tol")?,
        shrink_factor: ctx.params.f64("shrink_factor")?,
        budget: ctx.point_budget(),
    };
    let report = ctx.op(flat_spectra::density_diagnostics(&g, &windows, opts))?;
    let mut csv = Csv::new(&["box_radius", "min_gap", "distinct_values"]);
    for r in &report.gaps {
        csv.row(vec![
            r.box_radius.to_string(),
            Csv::float(r.min_gap),
            r.distinct_values.to_string(),
        ]);
    }
    Ok(Outcome {
        csv,
        json: to_json(&report)?,
        tolerances: tolerances([
            ("rational_tol", json!(opts.rational_tol)),
            ("rational_bound", json!(opts.rational_bound)),
            ("shrink_factor", json!(opts.shrink_factor)),
            ("eigenvalue_dedup", json!(flat_spectra::EIGENVALUE_DEDUP_TOL)),
            ("point_budget", json!(opts.budget)),
        ]),
    })
}

fn cartan_cmd(ctx: &Ctx) -> CliResult<Outcome> {
    let matrix = if ctx.params.is_set("matrix") {
        Some(ctx.params.matrix("matrix")?)
    } else {
        None
    };
    let group = ctx.group(matrix.as_ref().map(|m| m.nrows()))?;
    let element = match group {
        AmbientGroup::SlN { .. } => GroupElement::Matrix(matrix.expect("sl_n requires a matrix")),
        AmbientGroup::Sl2xSl2 => {
            if matrix.is_some() {
                return Err(ctx
                    .params
                    .error("matrix", "not used for sl2xsl2; set `left` and `right`"));
            }
            GroupElement::Pair(Sl2Pair {
                left: ctx.params.matrix2("left")?,
                right: ctx.params.matrix2("right")?,
            })
        }
    };
    let mu = ctx.op(cartan::cartan_projection(group, &element))?;
    let mut csv = Csv::new(&["index", "coordinate"]);
    for (i, c) in mu.coords().iter().enumerate() {
        csv.row(vec![i.to_string(), Csv::float(*c)]);
    }
    Ok(Outcome {
        csv,
        json: json!({ "group": to_json(&group)?, "coords": mu.coords(), "norm": mu.norm() }),
        tolerances: tolerances([
            ("det_tolerance", json!(cartan::DET_TOLERANCE)),
            ("chamber_tolerance", json!(cartan::CHAMBER_TOLERANCE)),
        ]),
    })
}

fn properness(ctx: &Ctx) -> CliResult<Outcome> {
    let group = ctx.group(ctx.params.opt_usize("n")?)?;
    let mu_l = ctx.cone("mu_l", group)?;
    let mu_h = ctx.cone("mu_h", group)?;
    let verdict = ctx.op(cartan::properness_check(&mu_l, &mu_h, ctx.params.usize("probe_count")?))?;
    let len = group.coord_len();
    let mut header = vec![
        "verdict".to_string(),
        "min_separation".to_string(),
        "probes".to_string(),
    ];
    header.extend((1..=len).map(|i| format!("witness_{i}")));
    let mut csv = Csv::new(&header);
    let mut row = vec![
        to_json(&verdict.verdict)?.as_str().unwrap_or_default().to_string(),
        Csv::float(verdict.min_separation),
        verdict.probes.to_string(),
    ];
    match &verdict.witness {
        Some(w) => row.extend(w.iter().map(|x| Csv::float(*x))),
        None => row.extend(std::iter::repeat_n(String::new(), len)),
    }
    csv.row(row);
    Ok(Outcome {
        csv,
        json: json!({ "mu_l": to_json(&mu_l)?, "mu_h": to_json(&mu_h)?, "result": to_json(&verdict)? }),
        tolerances: tolerances([("boundary_tolerance", json!(cartan::BOUNDARY_TOLERANCE))]),
    })
}

fn sharpness(ctx: &Ctx) -> CliResult<Outcome> {
    let p = ctx.presentation()?;
    let ball = ctx.ball(&p, ctx.params.u32("word_radius")?)?;
    let mu_h = ctx.cone("mu_h", AmbientGroup::Sl2xSl2)?;
    let est = ctx.op(ads3::ball_sharpness(&ball, &mu_h, ctx.params.f64("c_prime")?))?;
    let mut csv = Csv::new(&["c_prime", "c"]);
    for pt in &est.pareto {
        csv.row(vec![Csv::float(pt.c_prime), Csv::float(pt.c)]);
    }
    Ok(Outcome {
        csv,
        json: json!({ "estimate": to_json(&est)?, "words": ball.words.len(), "warnings": ball.warnings }),
        tolerances: word_tolerances(ctx),
    })
}

fn word_tolerances(ctx: &Ctx) -> BTreeMap<String, Value> {
    tolerances([
        ("dedupe_tol", json!(ads3::DEFAULT_DEDUPE_TOL)),
        ("elliptic_norm", json!(cartan::ELLIPTIC_NORM)),
        ("generator_det_tolerance", json!(ads3::GENERATOR_DET_TOLERANCE)),
        ("word_budget", json!(ctx.word_budget())),
    ])
}

fn ads3_stable(ctx: &Ctx) -> CliResult<Outcome> {
    let spec = ctx.op(ads3::stable_spectrum(ctx.params.f64("c")?, ctx.params.u64("l_max")?))?;
    let mut csv = Csv::new(&["l", "eigenvalue"]);
    for (l, v) in spec.pairs() {
        csv.row(vec![l.to_string(), v.to_string()]);
    }
    Ok(Outcome {
        csv,
        json: to_json(&spec)?,
        tolerances: BTreeMap::new(),
    })
}

fn orbit_count(ctx: &Ctx) -> CliResult<Outcome> {
    let p = ctx.presentation()?;
    let ball = ctx.ball(&p, ctx.params.u32("word_radius")?)?;
    let counts = ctx.op(ads3::orbit_count_in_ball(&ball, &ctx.params.f64_list("radii")?))?;
    let mut csv = Csv::new(&["radius", "count"]);
    for (r, c) in counts.radii.iter().zip(&counts.counts) {
        csv.row(vec![Csv::float(*r), c.to_string()]);
    }
    Ok(Outcome {
        csv,
        json: to_json(&counts)?,
        tolerances: word_tolerances(ctx),
    })
}

fn poincare(ctx: &Ctx) -> CliResult<Outcome> {
    let p = ctx.presentation()?;
    let schedule = ctx.params.u32_list("schedule")?;
    let max_radius = schedule
        .iter()
        .copied()
        .max()
        .ok_or_else(|| ctx.params.error("schedule", "must be nonempty"))?;
    let ball = ctx.ball(&p, max_radius)?;
    let (decay_rate, c_est) = match ctx.params.opt_f64("decay_rate")? {
        Some(rate) => (rate, None),
        None => {
            let c = ctx.op(ads3::ball_sharpness(&ball, &ConeSubset::diagonal_ray(), 0.0))?.c;
            (ctx.params.f64("decay_multiple")? / c, Some(c))
        }
    };
    let series = ctx.op(ads3::poincare_in_ball(&ball, decay_rate, &schedule))?;
    let mut csv = Csv::new(&["radius", "partial_sum", "increment", "words"]);
    for r in &series.rows {
        csv.row(vec![
            r.radius.to_string(),
            Csv::float(r.partial_sum),
            Csv::float(r.increment),
            r.words.to_string(),
        ]);
    }
    Ok(Outcome {
        csv,
        json: json!({ "c_est": c_est, "series": to_json(&series)? }),
        tolerances: word_tolerances(ctx),
    })
}

fn stability_experiment(ctx: &Ctx) -> CliResult<Outcome> {
    let p = ctx.presentation()?;
    let radius = ctx.params.u32("word_radius")?;
    let required: u128 = (1..=radius).map(|l| ads3::reduced_word_count(p.free_rank(), l)).sum();
    if required > ctx.word_budget() as u128 {
        return ctx.op(Err(pseudospec::Error::Budget {
            required,
            budget: ctx.word_budget(),
        }));
    }
    let exp = ctx.op(ads3::stability_experiment(
        &p,
        ctx.params.f64("perturbation_scale")?,
        ctx.params.usize("samples")?,
        radius,
        ctx.params.u64("l_max")?,
        &mut ctx.rng(),
    ))?;
    let mut csv = Csv::new(&["sample", "c"]);
    for (i, c) in exp.sample_cs.iter().enumerate() {
        csv.row(vec![i.to_string(), Csv::float(*c)]);
    }
    let mut tol = word_tolerances(ctx);
    tol.insert("properness_threshold".into(), json!(ads3::PROPERNESS_THRESHOLD));
    Ok(Outcome {
        csv,
        json: to_json(&exp)?,
        tolerances: tol,
    })
}
