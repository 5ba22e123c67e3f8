//! Command implementations behind the `coldseq` binary.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use coldseq::analysis::{self, SCHEMA_VERSION};
use coldseq::{
    capacity_distribution, moving_average, online_shift, optimal_shift, optimal_static, synth,
    waterfill, CapacityShare, Dispatch, Error, Fleet, LoadProfile, ProfileSpec, SequencingOrder,
    ShiftOptions, ShiftPlan,
};

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// Cell budget used when `--surplus-step` is not given.
pub const AUTO_STEP_CELLS: f64 = 2e7;

#[derive(Debug, Parser)]
#[command(
    name = "coldseq",
    version,
    about = "Compressor sequencing and load shifting analyses"
)]
pub struct Cli {
    /// Fleet JSON; defaults to the bundled four-machine fleet.
    #[arg(long, global = true)]
    pub fleet: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare fixed orders, static sequencing, online and optimal shifting.
    Compare(ShiftArgs),
    /// Dispatch one demand level.
    Sequence(SequenceArgs),
    /// Optimal load-shifting plan.
    Shift(ShiftArgs),
    /// Online shifting heuristic plan.
    Online(ProfileArgs),
    /// Savings bound and per-machine cost ratios.
    Bounds,
    /// Intervals of demand sharing the same best fixed order.
    Partition(RangeArgs),
    /// Best and worst fixed-order cost across a demand range.
    Gap(RangeArgs),
    /// Synthesize a load profile.
    Gen(GenArgs),
    /// Capacity distribution of a plan CSV.
    Cdf(CdfArgs),
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Load profile CSV (stage index or timestamp in the first column).
    #[arg(long, conflicts_with = "spec")]
    pub profile: Option<PathBuf>,
    /// Profile spec JSON to synthesize from; the bundled demo spec by default.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Override the spec's noise seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Minutes per stage for stage-indexed CSV files.
    #[arg(long, default_value_t = 1.0)]
    pub stage_minutes: f64,
    /// Centered moving-average window applied to the profile, in minutes.
    #[arg(long)]
    pub filter_minutes: Option<f64>,
    /// Mean used by the online heuristic instead of the profile mean.
    #[arg(long)]
    pub mean: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ShiftArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    /// Surplus grid in kW; chosen from the problem size when omitted.
    #[arg(long)]
    pub surplus_step: Option<f64>,
    /// Largest carried surplus in kW; one day of full output by default.
    #[arg(long)]
    pub surplus_cap: Option<f64>,
    #[arg(long, value_enum, default_value_t = DispatchArg::Optimal)]
    pub dispatch: DispatchArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DispatchArg {
    Optimal,
    ShiftOrder,
}

impl From<DispatchArg> for Dispatch {
    fn from(d: DispatchArg) -> Self {
        match d {
            DispatchArg::Optimal => Dispatch::Optimal,
            DispatchArg::ShiftOrder => Dispatch::ShiftOrder,
        }
    }
}

#[derive(Debug, Args)]
pub struct SequenceArgs {
    /// Cooling demand in kW.
    pub q_in: f64,
    /// Comma-separated compressor ids for water filling.
    #[arg(long, value_delimiter = ',', conflicts_with = "optimal")]
    pub order: Option<Vec<String>>,
    /// Use the exact static optimum (the default when no order is given).
    #[arg(long)]
    pub optimal: bool,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CdfArgs {
    /// Plan CSV as written by `shift` or `online` with `--format csv`.
    pub plan: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub stage_minutes: f64,
}

/// Maps an error to the documented exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if let Some(e) = err.downcast_ref::<Error>() {
        if e.is_infeasibility() {
            return EXIT_INFEASIBLE;
        }
        if e.is_input() {
            return EXIT_INPUT;
        }
        return EXIT_USAGE;
    }
    if err.downcast_ref::<Infeasible>().is_some() {
        return EXIT_INFEASIBLE;
    }
    if err.downcast_ref::<io::Error>().is_some() {
        return EXIT_INPUT;
    }
    EXIT_USAGE
}

/// Stages whose demand exceeds the fleet capacity.
#[derive(Debug, thiserror::Error)]
#[error("{} stage(s) exceed the fleet capacity of {capacity} kW: {stages:?}", stages.len())]
pub struct Infeasible {
    pub stages: Vec<usize>,
    pub capacity: f64,
}

/// Rendered command output.
pub struct Output {
    pub text: String,
}

pub fn run(cli: &Cli) -> anyhow::Result<Output> {
    let fleet = match &cli.fleet {
        Some(p) => Fleet::load(p)?,
        None => Fleet::butterball(),
    };
    let text = match &cli.command {
        Command::Compare(a) => cmd_compare(&fleet, a, cli.format)?,
        Command::Sequence(a) => cmd_sequence(&fleet, a, cli.format)?,
        Command::Shift(a) => {
            let profile = load_profile(&a.profile)?;
            let options = shift_options(&fleet, &profile, a)?;
            render_plan(
                &fleet,
                &optimal_shift(&fleet, &profile, &options)?,
                cli.format,
            )?
        }
        Command::Online(a) => {
            let profile = load_profile(a)?;
            render_plan(&fleet, &online_shift(&fleet, &profile, a.mean)?, cli.format)?
        }
        Command::Bounds => cmd_bounds(&fleet, cli.format)?,
        Command::Partition(r) => {
            let (lo, hi) = range(&fleet, r);
            let rep = analysis::partition_report(&fleet, lo, hi, r.step)?;
            match cli.format {
                Format::Json => json(&rep)?,
                Format::Csv => csv_rows(
                    &["lo_kw", "hi_kw", "order"],
                    rep.intervals
                        .iter()
                        .map(|i| vec![i.lo_kw.to_string(), i.hi_kw.to_string(), i.order.join(" ")]),
                )?,
            }
        }
        Command::Gap(r) => {
            let (lo, hi) = range(&fleet, r);
            let sweep = analysis::gap_sweep(&fleet, lo, hi, r.step)?;
            log::info!("max ratio {:.4} at {} kW", sweep.max_ratio, sweep.argmax_kw);
            match cli.format {
                Format::Json => json(&sweep)?,
                Format::Csv => csv_rows(
                    &["q_in_kw", "best_kw", "worst_kw", "ratio"],
                    sweep.points.iter().map(|p| {
                        vec![
                            p.q_in_kw.to_string(),
                            p.best_kw.to_string(),
                            p.worst_kw.to_string(),
                            p.ratio.to_string(),
                        ]
                    }),
                )?,
            }
        }
        Command::Gen(a) => {
            let mut spec = match &a.spec {
                Some(p) => ProfileSpec::load(p)?,
                None => ProfileSpec::demo(),
            };
            if let Some(seed) = a.seed {
                spec.seed = seed;
            }
            let profile = synth(&spec)?;
            match cli.format {
                Format::Json => json(&profile)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    coldseq::profile::write_csv(&profile, &mut buf)?;
                    String::from_utf8(buf)?
                }
            }
        }
        Command::Cdf(a) => cmd_cdf(&fleet, &a.plan, a.stage_minutes, cli.format)?,
    };
    Ok(Output { text })
}

/// Writes `output` to `--out` or stdout.
pub fn emit(cli: &Cli, output: &Output) -> anyhow::Result<()> {
    match &cli.out {
        Some(p) => {
            std::fs::write(p, &output.text).with_context(|| format!("writing {}", p.display()))?
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(output.text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn range(fleet: &Fleet, r: &RangeArgs) -> (f64, f64) {
    (
        r.from.unwrap_or_else(|| fleet.min_turn_on()),
        r.to.unwrap_or_else(|| fleet.total_capacity()),
    )
}

pub fn load_profile(a: &ProfileArgs) -> anyhow::Result<LoadProfile> {
    let profile = match &a.profile {
        Some(p) => coldseq::profile::load_csv_with_step(p, a.stage_minutes)?,
        None => {
            let mut spec = match &a.spec {
                Some(p) => ProfileSpec::load(p)?,
                None => ProfileSpec::demo(),
            };
            if let Some(seed) = a.seed {
                spec.seed = seed;
            }
            synth(&spec)?
        }
    };
    let profile = match a.filter_minutes {
        Some(w) => moving_average(&profile, w)?,
        None => profile,
    };
    log::info!(
        "profile: {} stages of {} min, mean {:.1} kW, peak {:.1} kW",
        profile.len(),
        profile.step_minutes,
        profile.mean(),
        profile.peak()
    );
    Ok(profile)
}

/// Smallest whole-kW surplus step, at least 1 kW, keeping the estimated
/// number of dynamic-programming cells within `budget`.
pub fn auto_step(profile: &LoadProfile, cap: f64, budget: f64) -> f64 {
    let mut remaining = profile.total();
    let mut states = 0.0;
    for &q in &profile.loads {
        remaining -= q;
        states += cap.min(remaining.max(0.0));
    }
    (states / budget).ceil().max(1.0)
}

pub fn shift_options(
    fleet: &Fleet,
    profile: &LoadProfile,
    a: &ShiftArgs,
) -> anyhow::Result<ShiftOptions> {
    let mut options = ShiftOptions {
        surplus_step: 1.0,
        surplus_cap: a.surplus_cap,
        dispatch: a.dispatch.into(),
    };
    options.surplus_step = match a.surplus_step {
        Some(g) => g,
        None => {
            let g = auto_step(profile, options.cap(fleet, profile), AUTO_STEP_CELLS);
            log::info!("surplus step {g} kW chosen from the problem size");
            g
        }
    };
    Ok(options)
}

fn check_stages(fleet: &Fleet, profile: &LoadProfile) -> anyhow::Result<()> {
    let capacity = fleet.total_capacity();
    let stages: Vec<usize> = profile
        .loads
        .iter()
        .enumerate()
        .filter(|(_, &q)| q > capacity + coldseq::TOLERANCE_KW)
        .map(|(k, _)| k)
        .collect();
    if !stages.is_empty() {
        return Err(Infeasible { stages, capacity }.into());
    }
    Ok(())
}

pub fn cmd_compare(fleet: &Fleet, a: &ShiftArgs, format: Format) -> anyhow::Result<String> {
    let profile = load_profile(&a.profile)?;
    check_stages(fleet, &profile)?;
    let options = shift_options(fleet, &profile, a)?;
    let cmp = analysis::compare(fleet, &profile, &options, a.profile.mean)?;
    let r = &cmp.report;
    Ok(match format {
        Format::Json => json(r)?,
        Format::Csv => {
            let savings = r.savings_vs_static_pct.rows();
            csv_rows(
                &["method", "avg_power_kw", "savings_vs_static_pct"],
                r.avg_power_kw
                    .rows()
                    .iter()
                    .zip(savings.iter())
                    .map(|((m, c), (_, s))| vec![m.to_string(), c.to_string(), s.to_string()]),
            )?
        }
    })
}

#[derive(Debug, Serialize)]
pub struct MachineDispatch {
    pub id: String,
    pub load_kw: f64,
    pub power_kw: f64,
}

#[derive(Debug, Serialize)]
pub struct SequenceReport {
    pub schema_version: u32,
    pub q_in_kw: f64,
    pub mode: &'static str,
    pub order: Vec<String>,
    pub machines: Vec<MachineDispatch>,
    pub delivered_kw: f64,
    pub total_power_kw: f64,
}

pub fn sequence(fleet: &Fleet, a: &SequenceArgs) -> anyhow::Result<SequenceReport> {
    let (mode, assignment, order) = match &a.order {
        Some(ids) if !a.optimal => {
            let order = SequencingOrder::from_ids(fleet, ids)?;
            ("order", waterfill(fleet, &order, a.q_in)?, order)
        }
        _ => {
            let sol = optimal_static(fleet, a.q_in)?;
            ("optimal", sol.assignment, sol.realizing_order)
        }
    };
    let machines = fleet
        .compressors()
        .iter()
        .zip(assignment.loads())
        .map(|(c, &q)| {
            Ok(MachineDispatch {
                id: c.id.clone(),
                load_kw: q,
                power_kw: c.power_at(q)?,
            })
        })
        .collect::<coldseq::Result<Vec<_>>>()?;
    Ok(SequenceReport {
        schema_version: SCHEMA_VERSION,
        q_in_kw: a.q_in,
        mode,
        order: order.ids(fleet).into_iter().map(str::to_owned).collect(),
        delivered_kw: assignment.total(),
        total_power_kw: assignment.cost(fleet)?,
        machines,
    })
}

pub fn cmd_sequence(fleet: &Fleet, a: &SequenceArgs, format: Format) -> anyhow::Result<String> {
    let rep = sequence(fleet, a)?;
    Ok(match format {
        Format::Json => json(&rep)?,
        Format::Csv => csv_rows(
            &["id", "load_kw", "power_kw"],
            rep.machines
                .iter()
                .map(|m| vec![m.id.clone(), m.load_kw.to_string(), m.power_kw.to_string()])
                .chain(std::iter::once(vec![
                    "total".to_string(),
                    rep.delivered_kw.to_string(),
                    rep.total_power_kw.to_string(),
                ])),
        )?,
    })
}

pub fn cmd_bounds(fleet: &Fleet, format: Format) -> anyhow::Result<String> {
    let b = analysis::bounds_report(fleet);
    Ok(match format {
        Format::Json => json(&b)?,
        Format::Csv => {
            let mut rows = vec![
                vec!["r_max".to_string(), b.r_max.to_string()],
                vec!["r_min".to_string(), b.r_min.to_string()],
                vec!["bound".to_string(), b.bound.to_string()],
            ];
            for m in &b.machines {
                rows.push(vec![
                    format!("{}.min_capacity_cost_ratio", m.id),
                    m.min_capacity_cost_ratio.to_string(),
                ]);
                rows.push(vec![
                    format!("{}.full_capacity_cost_ratio", m.id),
                    m.full_capacity_cost_ratio.to_string(),
                ]);
            }
            csv_rows(&["metric", "value"], rows)?
        }
    })
}

#[derive(Debug, Serialize)]
pub struct PlanReport<'a> {
    pub schema_version: u32,
    pub avg_power_kw: f64,
    pub capacity: Vec<CapacityShare>,
    pub plan: &'a ShiftPlan,
}

fn render_plan(fleet: &Fleet, plan: &ShiftPlan, format: Format) -> anyhow::Result<String> {
    log::info!(
        "average power {:.3} kW over {} stages",
        plan.avg_power,
        plan.len()
    );
    Ok(match format {
        Format::Json => json(&PlanReport {
            schema_version: SCHEMA_VERSION,
            avg_power_kw: plan.avg_power,
            capacity: capacity_distribution(plan, fleet),
            plan,
        })?,
        Format::Csv => {
            let mut buf = Vec::new();
            plan.write_csv(fleet, &mut buf)?;
            String::from_utf8(buf)?
        }
    })
}

/// Empirical distribution of one machine's load as a fraction of its
/// maximum: `(fraction, share of stages at or below it)`.
#[derive(Debug, Serialize)]
pub struct MachineCdf {
    pub id: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize)]
pub struct CdfReport {
    pub schema_version: u32,
    pub capacity: Vec<CapacityShare>,
    pub cdf: Vec<MachineCdf>,
}

pub fn cdf(fleet: &Fleet, plan: &ShiftPlan) -> CdfReport {
    let n = plan.len() as f64;
    let cdf = fleet
        .compressors()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut xs: Vec<f64> = plan
                .assignments
                .iter()
                .map(|a| a.load(i) / c.q_max)
                .collect();
            xs.sort_by(f64::total_cmp);
            let mut points: Vec<(f64, f64)> = Vec::new();
            for (k, &x) in xs.iter().enumerate() {
                let f = (k + 1) as f64 / n;
                match points.last_mut() {
                    Some(last) if last.0 == x => last.1 = f,
                    _ => points.push((x, f)),
                }
            }
            MachineCdf {
                id: c.id.clone(),
                points,
            }
        })
        .collect();
    CdfReport {
        schema_version: SCHEMA_VERSION,
        capacity: capacity_distribution(plan, fleet),
        cdf,
    }
}

pub fn cmd_cdf(
    fleet: &Fleet,
    path: &Path,
    stage_minutes: f64,
    format: Format,
) -> anyhow::Result<String> {
    let file = File::open(path)
        .map_err(Error::from)
        .with_context(|| format!("opening {}", path.display()))?;
    let plan = ShiftPlan::read_csv(fleet, file, stage_minutes)?;
    let rep = cdf(fleet, &plan);
    Ok(match format {
        Format::Json => json(&rep)?,
        Format::Csv => csv_rows(
            &["id", "load_fraction", "cdf"],
            rep.cdf.iter().flat_map(|m| {
                m.points
                    .iter()
                    .map(|(x, f)| vec![m.id.clone(), x.to_string(), f.to_string()])
                    .collect::<Vec<_>>()
            }),
        )?,
    })
}

fn json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn csv_rows(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(Error::from)?;
    for row in rows {
        w.write_record(&row).map_err(Error::from)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| anyhow::anyhow!("flushing csv: {e}"))?;
    if bytes.is_empty() {
        bail!("empty csv output");
    }
    Ok(String::from_utf8(bytes)?)
}
