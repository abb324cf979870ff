use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lorentz2d::builtin::{self, CoefficientRule};
use lorentz2d::classes::{
    b1inf_constant, b21_staircase_sup, b2_product_formula, b2p_membership, bp_constant,
    SearchOptions,
};
use lorentz2d::embed::{
    covering_functionals_jl1, covering_functionals_jl2, embed_const, embedding_inequality_check,
    level_integral_jl, level_integral_search, CoveringFamily, Direction,
};
use lorentz2d::hardy::{corners, midpoints, sample, superlevel_measure, Operator};
use lorentz2d::norms::{
    lambda2_norm, lambda_norm, mixed_norm, norm2_starstar, star_norm, weak_lp_norm, MixedOrder,
};
use lorentz2d::rearrange::{
    rearrange_1d, rearrange_global, rearrange_x, rearrange_xy, rearrange_y, rearrange_yx,
};
use lorentz2d::verify::{run_suite, Scale, VerifyOptions};
use lorentz2d::{GridFunction1D, GridFunction2D, Weight1D, Weight2D};

#[derive(Parser)]
#[command(
    name = "lorentz2d",
    version,
    about = "Rearrangements, Hardy averages and Lorentz norms on grid functions"
)]
struct Cli {
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Accepted for compatibility; all computations run on one thread.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print JSON instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decreasing rearrangements of a grid function.
    Rearrange {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Yx)]
        mode: Mode,
        /// Output file (stdout when absent).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Lorentz, mixed and Hardy-type norms.
    Norm {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum)]
        norm: NormId,
        #[command(flatten)]
        weights: Weights,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Outer exponent for mixed norms (defaults to p).
        #[arg(long)]
        q: Option<f64>,
    },
    /// Pointwise Hardy averages and superlevel measures as CSV.
    Hardy {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "s2")]
        op: Operator,
        /// Points as `s,t;s,t;...`.
        #[arg(long, conflicts_with = "superlevel")]
        points: Option<String>,
        /// Sample on cell midpoints or upper corners of the input grid.
        #[arg(long, value_enum, default_value_t = Sampling::Midpoints)]
        sampling: Sampling,
        /// Comma-separated levels; prints `lambda,measure,lambda_measure`.
        #[arg(long)]
        superlevel: Option<String>,
        /// Truncation box `a,b` for superlevel counting (default: 4x the support).
        #[arg(long = "box")]
        bbox: Option<String>,
    },
    /// Weight-class constants.
    WeightCheck {
        #[arg(long, value_enum)]
        class: ClassId,
        /// One-dimensional weight for `bp` and `b1inf`.
        #[arg(long)]
        weight: Option<String>,
        #[command(flatten)]
        weights: Weights,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long = "box", default_value = "4,4")]
        bbox: String,
        #[arg(long, default_value = "8,8")]
        cells: String,
        /// Square cell counts `k,k,...` for a refinement table (CSV `cells,sup`).
        #[arg(long)]
        refine: Option<String>,
    },
    /// Best embedding constants over staircases.
    Embed {
        #[arg(long, value_enum, default_value_t = DirArg::Forward)]
        dir: DirArg,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value = "const:1")]
        u: String,
        #[arg(long, default_value = "const:1")]
        w: String,
        #[arg(long = "box", default_value = "4,4")]
        bbox: String,
        #[arg(long, default_value = "4,4")]
        cells: String,
        /// Random doubly decreasing functions tested against the constant.
        #[arg(long, default_value_t = 0)]
        trials: usize,
    },
    /// Covering-family functionals (p > q).
    Covering {
        /// JSON `{"heights": [[..], ..]}` with optional `hx`, `hy`.
        #[arg(long, required_unless_present_any = ["levels", "search"])]
        family: Option<PathBuf>,
        /// Doubly decreasing grid JSON whose level sets give the chain.
        #[arg(long)]
        levels: Option<PathBuf>,
        /// Random level functions for a stochastic lower bound.
        #[arg(long)]
        search: Option<usize>,
        #[arg(long, default_value = "const:1")]
        u: String,
        #[arg(long, default_value = "const:1")]
        w: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long = "box", default_value = "4,4")]
        bbox: String,
        #[arg(long, default_value = "4,4")]
        cells: String,
    },
    /// Runs the reproduction suite; exit 0 iff every check passes.
    PaperVerify {
        #[arg(long, value_enum, default_value_t = ScaleArg::Small)]
        scale: ScaleArg,
        /// Also write the JSON report here.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Mutation hook: perturbs the product formula by 1%.
        #[arg(long, hide = true)]
        perturb_product_formula: bool,
    },
}

#[derive(Args)]
struct Source {
    /// Grid JSON `{"hx", "hy", "values": [[..], ..]}`.
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    input: Option<PathBuf>,
    /// Builtin example: r25i, r25ii, prop21-witness, separating, unit-square.
    #[arg(long)]
    example: Option<String>,
    /// Number of blocks for the builtin examples.
    #[arg(long = "N", alias = "blocks", default_value_t = 4)]
    blocks: usize,
    /// Exponent for the builtin coefficient rules (defaults to `--p`, else 1).
    #[arg(long = "example-p")]
    example_p: Option<f64>,
    #[arg(long, value_enum, default_value_t = RuleArg::Geometric)]
    rule: RuleArg,
}

#[derive(Args)]
struct Weights {
    /// Weight in x (1D spec).
    #[arg(long)]
    u: Option<String>,
    /// Weight in y (1D spec).
    #[arg(long)]
    v: Option<String>,
    /// Two-dimensional weight; defaults to u*v.
    #[arg(long)]
    w: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Yx,
    Xy,
    Y,
    X,
    #[value(name = "1d")]
    OneD,
    Global,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormId {
    Lambda,
    Lambda2,
    Mixed,
    MixedXy,
    Star,
    Norm2,
    Weak,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampling {
    Midpoints,
    Corners,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassId {
    Bp,
    B1inf,
    B2Formula,
    B21,
    B2p,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirArg {
    Forward,
    Reverse,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Small,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Geometric,
    Harmonic,
}

fn parse_pair<T: std::str::FromStr>(s: &str, what: &str) -> Result<(T, T)>
where
    T::Err: std::fmt::Display,
{
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("{what} must be `a,b`, got `{s}`"))?;
    let p = |x: &str| {
        x.trim()
            .parse::<T>()
            .map_err(|e| anyhow!("bad {what} `{s}`: {e}"))
    };
    Ok((p(a)?, p(b)?))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("bad number `{x}`: {e}"))
        })
        .collect()
}

fn read_grid(path: &PathBuf) -> Result<GridFunction2D> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing grid {}", path.display()))
}

impl Source {
    fn load(&self, p: Option<f64>) -> Result<GridFunction2D> {
        match (&self.input, &self.example) {
            (Some(path), _) => read_grid(path),
            (None, Some(name)) => {
                let rule = match self.rule {
                    RuleArg::Geometric => CoefficientRule::Geometric,
                    RuleArg::Harmonic => CoefficientRule::Harmonic,
                };
                let p = self.example_p.or(p).unwrap_or(1.0);
                Ok(builtin::by_name(name, self.blocks, p, rule)?)
            }
            (None, None) => bail!("give --input or --example"),
        }
    }

    /// The examples built on unit blocks are measured with `u = χ_[0,1]`.
    fn default_u(&self) -> &'static str {
        match self.example.as_deref() {
            Some("r25i" | "r25ii") => "indicator:1",
            _ => "const:1",
        }
    }
}

impl Weights {
    fn resolve(&self, default_u: &str) -> Result<(Weight1D, Weight1D, Weight2D)> {
        let u = Weight1D::parse(self.u.as_deref().unwrap_or(default_u))?;
        let v = Weight1D::parse(self.v.as_deref().unwrap_or("const:1"))?;
        let w = match &self.w {
            Some(spec) => Weight2D::parse(spec)?,
            None => Weight2D::product(u.clone(), v.clone()),
        };
        Ok((u, v, w))
    }
}

fn emit(json: bool, value: serde_json::Value, plain: impl FnOnce() -> String) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(&value)?);
    } else {
        print!("{}", plain());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let search = SearchOptions::with_seed(cli.seed);
    match cli.command {
        Command::Rearrange {
            input,
            mode,
            output,
        } => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let out = if let Mode::OneD = mode {
                let g: GridFunction1D = serde_json::from_str(&text).context("parsing 1D grid")?;
                serde_json::to_string(&rearrange_1d(&g))?
            } else {
                let f: GridFunction2D = serde_json::from_str(&text).context("parsing grid")?;
                match mode {
                    Mode::Yx => serde_json::to_string(&rearrange_yx(&f))?,
                    Mode::Xy => serde_json::to_string(&rearrange_xy(&f))?,
                    Mode::Y => serde_json::to_string(&rearrange_y(&f))?,
                    Mode::X => serde_json::to_string(&rearrange_x(&f))?,
                    Mode::Global => serde_json::to_string(&rearrange_global(&f))?,
                    Mode::OneD => unreachable!(),
                }
            };
            match output {
                Some(path) => fs::write(&path, out + "\n")
                    .with_context(|| format!("writing {}", path.display()))?,
                None => println!("{out}"),
            }
        }
        Command::Norm {
            source,
            norm,
            weights,
            p,
            q,
        } => {
            let f = source.load(Some(p))?;
            let (u, v, w) = weights.resolve(source.default_u())?;
            let q = q.unwrap_or(p);
            let mut extra = serde_json::Value::Null;
            let value = match norm {
                NormId::Lambda => lambda_norm(&f, &u, p)?,
                NormId::Lambda2 => lambda2_norm(&f, &w, p)?,
                NormId::Mixed => mixed_norm(&f, &u, &v, p, q, MixedOrder::YThenX)?,
                NormId::MixedXy => mixed_norm(&f, &u, &v, p, q, MixedOrder::XThenY)?,
                NormId::Star | NormId::Norm2 => {
                    let r = if let NormId::Star = norm {
                        star_norm(&f, &u, &v, p)?
                    } else {
                        norm2_starstar(&f, &u, &v, p)?
                    };
                    extra = json!({ "rel_change": r.rel_change, "subdivisions": r.subdivisions });
                    r.value
                }
                NormId::Weak => weak_lp_norm(&f, p)?,
            };
            let name = norm
                .to_possible_value()
                .expect("named variant")
                .get_name()
                .to_owned();
            emit(
                cli.json,
                json!({ "norm": name, "p": p, "value": value, "quadrature": extra }),
                || format!("{value}\n"),
            )?;
        }
        Command::Hardy {
            source,
            op,
            points,
            sampling,
            superlevel,
            bbox,
        } => {
            let f = source.load(None)?;
            if let Some(levels) = superlevel {
                let (a, b) = f.extent();
                let bbox = match bbox {
                    Some(s) => parse_pair::<f64>(&s, "box")?,
                    None => (4.0 * a, 4.0 * b),
                };
                let mut csv = String::from("lambda,measure,lambda_measure\n");
                let mut rows = Vec::new();
                for l in parse_list(&levels)? {
                    let m = superlevel_measure(op, &f, l, bbox)?;
                    let _ = writeln!(csv, "{l},{},{}", m.measure, l * m.measure);
                    rows.push(m);
                }
                emit(cli.json, serde_json::to_value(&rows)?, || csv)?;
            } else {
                let (a, b) = f.extent();
                let (m, n) = f.shape();
                let pts = match points {
                    Some(s) => s
                        .split(';')
                        .map(|p| parse_pair::<f64>(p, "point"))
                        .collect::<Result<Vec<_>>>()?,
                    None => match sampling {
                        Sampling::Midpoints => midpoints(a, b, m, n),
                        Sampling::Corners => corners(a, b, m, n),
                    },
                };
                let label = source.example.clone().unwrap_or_else(|| "input".into());
                let s = sample(op, &f, &pts, &label)?;
                emit(cli.json, serde_json::to_value(&s)?, || s.to_csv())?;
            }
        }
        Command::WeightCheck {
            class,
            weight,
            weights,
            p,
            bbox,
            cells,
            refine,
        } => {
            let one_d = || -> Result<Weight1D> {
                Ok(Weight1D::parse(weight.as_deref().ok_or_else(|| {
                    anyhow!("--weight is required for this class")
                })?)?)
            };
            let bbox = parse_pair::<f64>(&bbox, "box")?;
            let cells = parse_pair::<usize>(&cells, "cells")?;
            match class {
                ClassId::Bp => {
                    let v = bp_constant(&one_d()?, p)?;
                    emit(cli.json, serde_json::to_value(&v)?, || {
                        format!("{}\n", v.value())
                    })?;
                }
                ClassId::B1inf => {
                    let v = b1inf_constant(&one_d()?)?;
                    emit(cli.json, serde_json::to_value(&v)?, || {
                        format!("{}\n", v.value())
                    })?;
                }
                ClassId::B2Formula => {
                    let (u, v, _) = weights.resolve("const:1")?;
                    let c = b2_product_formula(&u, &v);
                    let value = c.unwrap_or(f64::INFINITY);
                    emit(
                        cli.json,
                        json!({ "constant": c, "member": c.is_some() }),
                        || format!("{value}\n"),
                    )?;
                }
                ClassId::B21 => {
                    let (_, _, w) = weights.resolve("const:1")?;
                    if let Some(ks) = refine {
                        let mut csv = String::from("cells,sup\n");
                        let mut rows = Vec::new();
                        for k in ks.split(',') {
                            let k: usize = k
                                .trim()
                                .parse()
                                .map_err(|e| anyhow!("bad cell count `{k}`: {e}"))?;
                            let v = b21_staircase_sup(&w, bbox, (k, k), &search)?;
                            let _ = writeln!(csv, "{k},{}", v.value());
                            rows.push(v);
                        }
                        emit(cli.json, serde_json::to_value(&rows)?, || csv)?;
                    } else {
                        let v = b21_staircase_sup(&w, bbox, cells, &search)?;
                        emit(cli.json, serde_json::to_value(&v)?, || {
                            format!("{}\n", v.value())
                        })?;
                    }
                }
                ClassId::B2p => {
                    let (_, _, w) = weights.resolve("const:1")?;
                    let v = b2p_membership(&w, p, &search)?;
                    emit(cli.json, serde_json::to_value(&v)?, || {
                        format!("{}\n", v.value())
                    })?;
                }
            }
        }
        Command::Embed {
            dir,
            p,
            q,
            u,
            w,
            bbox,
            cells,
            trials,
        } => {
            let dir = match dir {
                DirArg::Forward => Direction::Forward,
                DirArg::Reverse => Direction::Reverse,
            };
            let (u, w) = (Weight1D::parse(&u)?, Weight2D::parse(&w)?);
            let bbox = parse_pair::<f64>(&bbox, "box")?;
            let cells = parse_pair::<usize>(&cells, "cells")?;
            let report = embed_const(dir, &u, &w, p, q, bbox, cells, &search)?;
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            let check = if trials > 0 {
                Some(embedding_inequality_check(
                    &report, &u, &w, trials, cli.seed,
                )?)
            } else {
                None
            };
            // the report is JSON by contract
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({ "report": report, "check": check }))?
            );
            if check.is_some_and(|c| !c.pass) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Covering {
            family,
            levels,
            search: budget,
            u,
            w,
            p,
            q,
            bbox,
            cells,
        } => {
            let (u, w) = (Weight1D::parse(&u)?, Weight2D::parse(&w)?);
            let mut out = serde_json::Map::new();
            if let Some(path) = family {
                let text = fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let fam = CoveringFamily::from_json(&text)?;
                let (i, j) = (
                    covering_functionals_jl1(&fam, &u, &w, p, q)?,
                    covering_functionals_jl2(&fam, &u, &w, p, q)?,
                );
                for warning in i.warnings.iter().chain(&j.warnings) {
                    eprintln!("warning: {warning}");
                }
                out.insert("forward".into(), serde_json::to_value(&i)?);
                out.insert("reverse".into(), serde_json::to_value(&j)?);
            }
            if let Some(path) = levels {
                let f = read_grid(&path)?;
                let fwd = level_integral_jl(&f, &u, &w, p, q, Direction::Forward)?;
                let rev = level_integral_jl(&f, &u, &w, p, q, Direction::Reverse)?;
                out.insert("levels".into(), json!({ "forward": fwd, "reverse": rev }));
            }
            if let Some(trials) = budget {
                let bbox = parse_pair::<f64>(&bbox, "box")?;
                let cells = parse_pair::<usize>(&cells, "cells")?;
                let fwd = level_integral_search(
                    &u,
                    &w,
                    p,
                    q,
                    Direction::Forward,
                    bbox,
                    cells,
                    trials,
                    cli.seed,
                )?;
                let rev = level_integral_search(
                    &u,
                    &w,
                    p,
                    q,
                    Direction::Reverse,
                    bbox,
                    cells,
                    trials,
                    cli.seed,
                )?;
                out.insert("search".into(), json!({ "forward": fwd, "reverse": rev }));
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::PaperVerify {
            scale,
            output,
            perturb_product_formula,
        } => {
            let scale = match scale {
                ScaleArg::Small => Scale::Small,
                ScaleArg::Full => Scale::Full,
            };
            let report = run_suite(&VerifyOptions {
                scale,
                seed: cli.seed,
                perturb_product_formula,
            });
            let text = serde_json::to_string_pretty(&report)?;
            if let Some(path) = output {
                fs::write(&path, text.clone() + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if cli.json {
                println!("{text}");
            } else {
                print!("{}", report.table());
            }
            if !report.all_pass() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
