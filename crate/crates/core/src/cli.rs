//! Command-line front end. Every numeric output is a pure function of the
//! flags, so repeated runs produce byte-identical files.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::criteria::{Criterion, CriterionReport, FamilyEvaluator};
use crate::diagnosis::{
    diagnose, run_chain_checks, sweep_criterion, threshold, ChainScales, DiagnosisReport, ResolvedConfig, SweepConfig,
    SweepOutcome, Verdict, SCHEMA,
};
use crate::error::{PegoError, Result};
use crate::families::{catalog_family, random_family, FamilySpec, KindMix};
use crate::halfline::{verify_pego, HalfLineFunction, Label, Order, PegoFamily, PegoNorms, TimeGrid};
use crate::transform::{plancherel_check, FrequencyGrid, PlancherelCheck};

const SWEPT: [Criterion; 4] =
    [Criterion::LaplaceEquicont, Criterion::LaplaceEquivanish, Criterion::ExpEquicont, Criterion::ExpEquivanish];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Truncated weighted L1 / L2 norms of each member.
    Verify,
    /// Laplace transform on the line Re z = x, with a Plancherel check.
    Transform,
    /// Raw criterion values at each scale.
    Criteria,
    /// Compactness verdict from both routes and the net oracle.
    Diagnose,
    /// Numerical checks of the implications between criteria.
    Chains,
    /// Sweep outcomes (threshold, floor, status) per criterion.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "pego-lab", version, about = "Compactness diagnostics for families of Laplace-Pego functions")]
pub struct Cli {
    pub command: Command,
    /// Catalog family name, or `random` (with --seed / --size).
    #[arg(long)]
    pub family: Option<String>,
    /// Family, function or function array in the JSON DSL.
    #[arg(long)]
    pub dsl: Option<PathBuf>,
    /// Exponential order; overrides the family's own.
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dy: Option<f64>,
    #[arg(long = "y-max")]
    pub y_max: Option<f64>,
    /// Comma-separated ladder replacing the default for --criterion.
    #[arg(long)]
    pub scales: Option<String>,
    /// One of exp-equivanish, laplace-equicont, exp-equicont, laplace-equivanish.
    #[arg(long)]
    pub criterion: Option<String>,
    #[arg(long, env = "PEGO_LAB_THREADS")]
    pub threads: Option<usize>,
    /// Seed for the random family; implies `--family random`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub size: usize,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Exit 2 unless the verdict is compact.
    #[arg(long)]
    pub assert_compact: bool,
    /// Chains: raise eps to each premise before checking.
    #[arg(long)]
    pub tight: bool,
}

/// Parses `argv` (including the program name) and runs it. Returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(None) => 0,
        Ok(Some(v)) => {
            eprintln!("verdict is {}, not compact", serde_json::to_value(v).unwrap().as_str().unwrap_or("?"));
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Runs a parsed command. `Ok(Some(v))` means `--assert-compact` failed.
pub fn execute(cli: &Cli) -> Result<Option<Verdict>> {
    match cli.threads {
        Some(0) => Err(PegoError::Parameter("--threads must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PegoError::Parameter(format!("thread pool: {e}")))?
            .install(|| execute_inner(cli)),
        None => execute_inner(cli),
    }
}

fn resolve_spec(cli: &Cli) -> Result<FamilySpec> {
    let spec = match (cli.family.as_deref(), &cli.dsl) {
        (Some(_), Some(_)) => return Err(PegoError::Parameter("--family and --dsl are mutually exclusive".into())),
        (None, Some(path)) => load_dsl(path)?,
        (Some("random"), None) => random_family(cli.seed.unwrap_or(0), cli.size, KindMix::default())?,
        (None, None) => match cli.seed {
            Some(seed) => random_family(seed, cli.size, KindMix::default())?,
            None => return Err(PegoError::Parameter("one of --family, --dsl or --seed is required".into())),
        },
        (Some(name), None) => catalog_family(name)?,
    };
    match cli.x {
        Some(x) => Ok(spec.with_order(Order::new(x)?)),
        None => Ok(spec),
    }
}

/// A DSL file holds a family spec (an object with `name`), a single
/// function, or an array of functions.
pub fn load_dsl(path: &Path) -> Result<FamilySpec> {
    let text = fs::read_to_string(path).map_err(|e| PegoError::Io(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| PegoError::Dsl(format!("{} is not valid JSON: {e}", path.display())))?;
    let name = path.file_stem().map_or("dsl".into(), |s| s.to_string_lossy().into_owned());
    let members: Vec<HalfLineFunction> = match &v {
        Value::Object(m) if m.contains_key("name") => return FamilySpec::from_json(&text),
        Value::Array(_) => serde_json::from_value(v).map_err(|e| PegoError::Dsl(e.to_string()))?,
        _ => vec![serde_json::from_value(v).map_err(|e| PegoError::Dsl(e.to_string()))?],
    };
    let spec = FamilySpec {
        name,
        template: None,
        parameters: Vec::new(),
        members,
        order: Order::ZERO,
        label: Label::Unknown,
        rationale: None,
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_scales(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| PegoError::Scale(format!("bad --scales entry `{s}`: need a positive number")))
        })
        .collect()
}

fn resolve_grids(cli: &Cli) -> Result<(TimeGrid, FrequencyGrid)> {
    let d = TimeGrid::default();
    let grid = TimeGrid::new(cli.dt.unwrap_or(d.dt()), cli.t_max.unwrap_or(d.t_max()))?;
    let native = FrequencyGrid::for_time_grid(&grid);
    let ygrid = match (cli.dy, cli.y_max) {
        (None, None) => native,
        (dy, y_max) => FrequencyGrid::new(dy.unwrap_or(native.dy()), y_max.unwrap_or(native.y_max()))?,
    };
    Ok((grid, ygrid))
}

/// The criteria a command should report, and the sweep they use.
fn resolve_sweep(cli: &Cli) -> Result<(Vec<Criterion>, SweepConfig)> {
    let mut sweep = SweepConfig::default();
    let selected = match cli.criterion.as_deref() {
        None => {
            if cli.scales.is_some() {
                return Err(PegoError::Scale("--scales needs --criterion to name the ladder it replaces".into()));
            }
            SWEPT.to_vec()
        }
        Some(name) => {
            let c = Criterion::parse(name)?;
            if c == Criterion::L2Bound {
                return Err(PegoError::Parameter("l2-bound has no scale to sweep".into()));
            }
            if let Some(text) = &cli.scales {
                let ladder = parse_scales(text)?;
                match c {
                    Criterion::ExpEquivanish => sweep.time_tails = ladder,
                    Criterion::LaplaceEquicont => sweep.real_shifts = ladder,
                    Criterion::ExpEquicont => sweep.time_shifts = ladder,
                    Criterion::LaplaceEquivanish => sweep.freq_cutoffs = ladder,
                    Criterion::L2Bound => unreachable!(),
                }
            }
            vec![c]
        }
    };
    sweep.validate()?;
    Ok((selected, sweep))
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    schema: &'static str,
    command: Command,
    config: &'a ResolvedConfig,
    label: Label,
    result: T,
}

impl Serialize for Command {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(name_of(*self))
    }
}

#[derive(Serialize)]
struct MemberNorms {
    member: usize,
    #[serde(flatten)]
    norms: PegoNorms,
}

#[derive(Serialize)]
struct MemberPlancherel {
    member: usize,
    #[serde(flatten)]
    check: PlancherelCheck,
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn execute_inner(cli: &Cli) -> Result<Option<Verdict>> {
    if !(cli.eps.is_finite() && cli.eps > 0.0) {
        return Err(PegoError::Parameter(format!("--eps must be > 0, got {}", cli.eps)));
    }
    let spec = resolve_spec(cli)?;
    let (grid, ygrid) = resolve_grids(cli)?;
    let (selected, sweep) = resolve_sweep(cli)?;
    if cli.scales.is_some() && matches!(cli.command, Command::Verify | Command::Transform | Command::Chains) {
        return Err(PegoError::Scale(format!("--scales is not used by `{}`", name_of(cli.command))));
    }
    let family = spec.instantiate(grid)?;
    let chains = cli.command == Command::Chains;
    let config = ResolvedConfig {
        family: spec.name.clone(),
        order: family.x(),
        eps: cli.eps,
        grid,
        frequency_grid: ygrid,
        sweep: sweep.clone(),
        chain_scales: chains.then(ChainScales::default),
        seed: if spec.template.is_none() && spec.name.starts_with("random-") { cli.seed.or(Some(0)) } else { None },
        members: family.len(),
    };
    let mut verdict = None;
    let text = match cli.command {
        Command::Verify => verify(cli, &family, &config)?,
        Command::Transform => transform(cli, &family, &config)?,
        Command::Criteria => criteria(cli, &family, &config, &selected)?,
        Command::Sweep => {
            let ev = FamilyEvaluator::new(&family, ygrid, sweep.n_shifts)?;
            let outcomes =
                selected.iter().map(|&c| sweep_criterion(&ev, c, cli.eps, &sweep)).collect::<Result<Vec<_>>>()?;
            match cli.format {
                Format::Json => json(&Report {
                    schema: SCHEMA,
                    command: cli.command,
                    config: &config,
                    label: spec.label,
                    result: &outcomes,
                }),
                Format::Csv => PlotData::new(&ev, outcomes).to_csv(),
            }
        }
        Command::Diagnose => {
            let d = diagnose(&family, cli.eps, &ygrid, &sweep)?;
            verdict = Some(d.verdict);
            match cli.format {
                Format::Json => {
                    let mut r = DiagnosisReport::new(config.clone());
                    r.label = Some(spec.label);
                    r.diagnosis = Some(d);
                    let mut s = r.to_json();
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let ev = FamilyEvaluator::new(&family, ygrid, sweep.n_shifts)?;
                    let outcomes = d.laplace_route.criteria.into_iter().chain(d.rk_route.criteria).collect();
                    PlotData::new(&ev, outcomes).to_csv()
                }
            }
        }
        Command::Chains => {
            let checks = run_chain_checks(&family, cli.eps, &ygrid, &ChainScales::default(), cli.tight)?;
            match cli.format {
                Format::Json => {
                    let mut r = DiagnosisReport::new(config.clone());
                    r.label = Some(spec.label);
                    r.chains = checks;
                    let mut s = r.to_json();
                    s.push('\n');
                    s
                }
                Format::Csv => {
                    let mut s = String::from(
                        "# columns: theorem, premise_value (eps used), premise_measured, conclusion_value, bound, slack, holds, vacuous\n",
                    );
                    s.push_str("theorem,premise_value,premise_measured,conclusion_value,bound,slack,holds,vacuous\n");
                    for c in &checks {
                        let theorem = serde_json::to_value(c.theorem).expect("theorem serializes");
                        let _ = writeln!(
                            s,
                            "{},{},{},{},{},{},{},{}",
                            theorem.as_str().unwrap_or("?"),
                            c.premise_value,
                            c.premise_measured,
                            c.conclusion_value,
                            c.bound,
                            c.slack,
                            c.holds,
                            c.vacuous
                        );
                    }
                    s
                }
            }
        }
    };
    write_output(cli.out.as_deref(), &text)?;
    Ok(match verdict {
        Some(v) if cli.assert_compact && v != Verdict::Compact => Some(v),
        _ => None,
    })
}

fn name_of(c: Command) -> &'static str {
    match c {
        Command::Verify => "verify",
        Command::Transform => "transform",
        Command::Criteria => "criteria",
        Command::Diagnose => "diagnose",
        Command::Chains => "chains",
        Command::Sweep => "sweep",
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| PegoError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(cli: &Cli, family: &PegoFamily, config: &ResolvedConfig) -> Result<String> {
    let norms = family
        .members
        .iter()
        .enumerate()
        .map(|(member, f)| Ok(MemberNorms { member, norms: verify_pego(f, family.order, &family.grid)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(match cli.format {
        Format::Json => {
            json(&Report { schema: SCHEMA, command: cli.command, config, label: family.label, result: &norms })
        }
        Format::Csv => {
            let mut s = String::from(
                "# columns: member, truncated weighted L1 norm, truncated weighted L2 norm\nmember,l1,l2\n",
            );
            for n in &norms {
                let _ = writeln!(s, "{},{},{}", n.member, n.norms.l1, n.norms.l2);
            }
            s
        }
    })
}

fn transform(cli: &Cli, family: &PegoFamily, config: &ResolvedConfig) -> Result<String> {
    Ok(match cli.format {
        Format::Json => {
            let checks = family
                .members
                .iter()
                .enumerate()
                .map(|(member, f)| {
                    Ok(MemberPlancherel {
                        member,
                        check: plancherel_check(f, family.order, &family.grid, &config.frequency_grid)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            json(&Report { schema: SCHEMA, command: cli.command, config, label: family.label, result: &checks })
        }
        Format::Csv => {
            let ev = FamilyEvaluator::new(family, config.frequency_grid, config.sweep.n_shifts)?;
            let mut s =
                String::from("# columns: member, y, Re L{f}(x+iy), Im L{f}(x+iy), |L{f}(x+iy)|\nmember,y,re,im,abs\n");
            for (m, slice) in ev.slices().iter().enumerate() {
                for (y, v) in slice.ys().zip(&slice.values) {
                    let _ = writeln!(s, "{m},{y},{},{},{}", v.re, v.im, v.norm());
                }
            }
            s
        }
    })
}

fn criteria(cli: &Cli, family: &PegoFamily, config: &ResolvedConfig, selected: &[Criterion]) -> Result<String> {
    let ev = FamilyEvaluator::new(family, config.frequency_grid, config.sweep.n_shifts)?;
    let mut reports: Vec<CriterionReport> = vec![ev.l2_bound()];
    for &c in selected {
        reports.extend(ev.sweep(c, config.sweep.ladder(c), threshold(c, cli.eps))?);
    }
    Ok(match cli.format {
        Format::Json => {
            json(&Report { schema: SCHEMA, command: cli.command, config, label: family.label, result: &reports })
        }
        Format::Csv => {
            let mut s = String::from(
                "# columns: criterion, scale (delta or T; 0 for l2-bound), supremum over members, pass at the criterion threshold\ncriterion,scale,supremum,pass\n",
            );
            for r in &reports {
                let _ = writeln!(s, "{},{},{},{}", r.criterion.name(), r.scale(), r.supremum, r.pass);
            }
            s
        }
    })
}

/// Sweep curves plus the spectral envelope `max_m |L{f_m}(x + iy)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub sweeps: Vec<SweepOutcome>,
    pub spectrum: Vec<(f64, f64)>,
}

impl PlotData {
    pub fn new(ev: &FamilyEvaluator<'_>, sweeps: Vec<SweepOutcome>) -> Self {
        let slices = ev.slices();
        let spectrum = ev
            .ygrid
            .nodes()
            .enumerate()
            .map(|(i, y)| (y, slices.iter().map(|s| s.values[i].norm()).fold(0.0, f64::max)))
            .collect();
        PlotData { sweeps, spectrum }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "# columns: series (sweep|spectrum), key (criterion name|envelope), x (swept scale|y), value (supremum over members|max over members of |L{f}(x+iy)|)\n",
        );
        s.push_str("series,key,x,value\n");
        for o in &self.sweeps {
            for (scale, sup) in o.scales.iter().zip(&o.suprema) {
                let _ = writeln!(s, "sweep,{},{scale},{sup}", o.criterion.name());
            }
        }
        for (y, a) in &self.spectrum {
            let _ = writeln!(s, "spectrum,envelope,{y},{a}");
        }
        s
    }
}

pub fn emit_plot_data(data: &PlotData, path: &Path) -> Result<()> {
    write_output(Some(path), &data.to_csv())
}
