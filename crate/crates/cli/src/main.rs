//! `riemannium`: command-line front end for the cantor-riemannium library.
//!
//! Exit codes: 0 on success, 1 when a computation fails or a check does not
//! pass, 2 on bad arguments or unreadable input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use cantor_riemannium::cauchy::{eval_cauchy, profile_csv, residue_check, vertical_profile, CauchyEvaluator};
use cantor_riemannium::geometry::{certify_good_rational, sample_good_points, GoodPointConfig};
use cantor_riemannium::green::{trace_green_line, TraceOptions};
use cantor_riemannium::measures::{check_lambda, parse_lambda, Base, LambdaRule, MeasureSpec};
use cantor_riemannium::monodromy::{borel_extension, borel_monodromy, weierstrass_monodromy, BorelOptions};
use cantor_riemannium::path::PathJson;
use cantor_riemannium::rational::{fmt_ratio, parse_ratio, to_f64, Rational};
use cantor_riemannium::render::{render_field, RenderMode, RenderSpec};
use cantor_riemannium::riemannium::{Quotient, SheetModel};
use cantor_riemannium::Complex64;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde::Serialize;

/// Default directory for written files.
const OUT_DIR_ENV: &str = "RIEMANNIUM_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "riemannium", version, about = "Cauchy transforms and monodromy over the triadic Cantor set")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Measure spec file (`key=value` lines: base, depth, lambda, kappa, scheme).
    #[arg(long, global = true)]
    measure: Option<PathBuf>,
    /// Overrides the truncation depth of the measure spec.
    #[arg(long, global = true)]
    depth: Option<u32>,
    /// Overrides the base measure of the measure spec.
    #[arg(long, global = true)]
    base: Option<BaseArg>,
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory relative output paths are resolved against.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    /// Write the report to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BaseArg {
    Mu,
    Nu,
}

impl From<BaseArg> for Base {
    fn from(b: BaseArg) -> Base {
        match b {
            BaseArg::Mu => Base::Mu,
            BaseArg::Nu => Base::Nu,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the Cauchy transform at points `re,im`.
    Eval {
        #[arg(long = "at", required = true, value_parser = parse_point, allow_hyphen_values = true)]
        at: Vec<Complex64>,
    },
    /// `F(x0 + iy)` on log-spaced heights, as CSV.
    Profile {
        /// Rational abscissa.
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long, default_value_t = 1e-6)]
        ymin: f64,
        #[arg(long, default_value_t = 1.0)]
        ymax: f64,
        #[arg(long, default_value_t = 25)]
        count: usize,
        /// JSON rows instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Loop integral of the transform against the exact enclosed mass.
    ResidueCheck {
        #[arg(long = "loop")]
        loop_file: PathBuf,
    },
    /// Exact monodromy of a closed loop through 0.
    Monodromy {
        #[arg(long = "loop")]
        loop_file: PathBuf,
    },
    /// Continuation of the `ν` primitive along a path that may cross at good points.
    Borel {
        #[arg(long)]
        path: PathBuf,
    },
    /// Sheet graph reached from the principal sheet.
    Sheets {
        /// JSON array of rational points; sampled from `--seed` when absent.
        #[arg(long)]
        pool: Option<PathBuf>,
        /// Pool size when sampling.
        #[arg(long, default_value_t = 4)]
        sample: usize,
        #[arg(long, default_value_t = 2)]
        budget: usize,
        #[arg(long, default_value = "H0")]
        quotient: String,
        /// Graphviz output instead of JSON.
        #[arg(long)]
        dot: bool,
    },
    /// Render an image of the principal sheet.
    Render {
        /// `re_min,re_max,im_min,im_max`.
        #[arg(long, default_value = "-1,1,-1,1", value_parser = parse_window, allow_hyphen_values = true)]
        window: [f64; 4],
        /// `WIDTHxHEIGHT`.
        #[arg(long, default_value = "400x400", value_parser = parse_size)]
        size: (u32, u32),
        #[arg(long, default_value = "domain_color")]
        mode: String,
        #[arg(long, default_value_t = 24)]
        lines: u32,
        #[arg(long, default_value_t = 8)]
        address_len: usize,
    },
    /// Trace the Green line of angle `theta`.
    GreenLine {
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long, default_value_t = 20_000)]
        max_steps: usize,
    },
    /// Validate a λ rule.
    CheckLambda {
        /// Geometric ratio `r`; the coefficient is chosen so the masses sum to 1.
        #[arg(long, conflicts_with = "lambda")]
        ratio: Option<String>,
        /// Full rule: `geometric:<coeff>:<ratio>` or `custom:<l0>,<l1>,...`.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        kappa: Option<String>,
    },
}

fn parse_point(s: &str) -> Result<Complex64, String> {
    let (a, b) = s.split_once(',').ok_or("expected re,im")?;
    Ok(Complex64::new(a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn parse_window(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| format!("{e}"))?;
    v.try_into().map_err(|_| "expected four comma-separated numbers".to_string())
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    Ok((w.parse().map_err(|e| format!("{e}"))?, h.parse().map_err(|e| format!("{e}"))?))
}

/// Bad input (exit 2) versus failed computation (exit 1).
enum Failure {
    Usage(anyhow::Error),
    Compute(anyhow::Error),
}

trait Usage<T> {
    fn usage(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Usage<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Compute(e.into())
    }
}

struct Ctx {
    global: Global,
    spec: MeasureSpec,
}

impl Ctx {
    fn new(global: Global) -> Result<Self, Failure> {
        let mut spec = match &global.measure {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).usage()?;
                MeasureSpec::parse(&text).usage()?
            }
            None => MeasureSpec::default(),
        };
        if let Some(d) = global.depth {
            spec.depth = d;
        }
        if let Some(b) = global.base {
            spec.base = b.into();
        }
        if !(global.tol > 0.0) {
            return Err(Failure::Usage(anyhow!("--tol must be positive")));
        }
        Ok(Ctx { global, spec })
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.global.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn emit_text(&self, text: &str) -> Result<(), Failure> {
        match &self.global.output {
            Some(p) => {
                let p = self.resolve(p);
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    fn emit<T: Serialize>(&self, v: &T) -> Result<(), Failure> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.emit_text(&s)
    }

    fn good_cfg(&self) -> GoodPointConfig {
        GoodPointConfig { scheme: self.spec.scheme, ..GoodPointConfig::new(self.spec.rule.kappa.clone(), 30) }
    }
}

fn read_path(p: &Path) -> Result<PathJson, Failure> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).usage()?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display())).usage()
}

fn read_pool(p: &Path) -> Result<Vec<Rational>, Failure> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).usage()?;
    let raw: Vec<String> = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display())).usage()?;
    raw.iter().map(|s| parse_ratio(s)).collect::<Result<_, _>>().usage()
}

#[derive(Serialize)]
struct EvalRow {
    z: [f64; 2],
    value: [f64; 2],
    tail_bound: f64,
    flags: Vec<String>,
}

#[derive(Serialize)]
struct MonodromyOut {
    base: Base,
    value: String,
    radius: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<cantor_riemannium::monodromy::WeierstrassReport>,
}

#[derive(Serialize)]
struct LambdaOut {
    rule: String,
    kappa: String,
    mass_sum: String,
    line_ratio: Option<String>,
    line_bound: String,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = Ctx::new(cli.global)?;
    let tol = ctx.global.tol;
    match cli.command {
        Command::Eval { at } => {
            let t = ctx.spec.build()?;
            let rows = at
                .iter()
                .map(|&z| {
                    let r = eval_cauchy(&t, z)?;
                    Ok(EvalRow { z: [z.re, z.im], value: [r.value.re, r.value.im], tail_bound: r.tail_bound, flags: r.flags })
                })
                .collect::<Result<Vec<_>, cantor_riemannium::Error>>()?;
            ctx.emit(&rows)
        }
        Command::Profile { x0, ymin, ymax, count, json } => {
            let x = parse_ratio(&x0).usage()?;
            if !(ymin > 0.0 && ymax >= ymin && count >= 1) {
                return Err(Failure::Usage(anyhow!("need 0 < ymin <= ymax and count >= 1")));
            }
            let ys: Vec<f64> = (0..count)
                .map(|i| if count == 1 { ymax } else { ymax * (ymin / ymax).powf(i as f64 / (count - 1) as f64) })
                .collect();
            let t = ctx.spec.build()?;
            let ev = CauchyEvaluator::new(&t);
            let good = match ctx.spec.base {
                Base::Nu => certify_good_rational(&x, &ctx.good_cfg()).ok(),
                Base::Mu => None,
            };
            let rows = vertical_profile(&ev, to_f64(&x), &ys, good.as_ref())?;
            if json {
                ctx.emit(&rows)
            } else {
                ctx.emit_text(&profile_csv(&rows))
            }
        }
        Command::ResidueCheck { loop_file } => {
            let lp = read_path(&loop_file)?.to_crossing_path().usage()?.path;
            let t = ctx.spec.build()?;
            let rep = residue_check(&lp, &t.measure, tol)?;
            ctx.emit(&rep)?;
            if !rep.pass {
                return Err(Failure::Compute(anyhow!("residue check failed: diff {:e} > tol {:e}", rep.diff, tol)));
            }
            Ok(())
        }
        Command::Monodromy { loop_file } => {
            let cp = read_path(&loop_file)?.to_crossing_path().usage()?;
            if cp.crossings.is_empty() {
                let (v, rep) = weierstrass_monodromy(&cp.path, ctx.spec.base, &ctx.spec.rule, ctx.spec.depth, tol)?;
                ctx.emit(&MonodromyOut { base: ctx.spec.base, value: fmt_ratio(&v.center), radius: fmt_ratio(&v.radius), report: Some(rep) })
            } else {
                let v = borel_monodromy(&cp, &ctx.spec.rule, &ctx.good_cfg())?;
                ctx.emit(&MonodromyOut { base: Base::Nu, value: fmt_ratio(&v.center), radius: fmt_ratio(&v.radius), report: None })
            }
        }
        Command::Borel { path } => {
            let cp = read_path(&path)?.to_crossing_path().usage()?;
            let mut opts = BorelOptions::new(&ctx.spec.rule, tol.max(1e-13));
            opts.good = ctx.good_cfg();
            let rep = borel_extension(&ctx.spec.rule, &cp, &opts)?;
            ctx.emit(&rep)
        }
        Command::Sheets { pool, sample, budget, quotient, dot } => {
            let q: Quotient = quotient.parse().usage()?;
            let model = SheetModel::new(ctx.spec.rule.clone(), ctx.good_cfg(), 10)?;
            let points = match pool {
                Some(p) => read_pool(&p)?,
                None => {
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ctx.global.seed);
                    sample_good_points(&mut rng, sample, &model.cfg, 16, 8)?.into_iter().map(|g| g.x).collect()
                }
            };
            let g = model.build_sheet_graph(&points, budget, q)?;
            if dot {
                ctx.emit_text(&g.to_dot())
            } else {
                ctx.emit(&g.to_json())
            }
        }
        Command::Render { window, size, mode, lines, address_len } => {
            let mode: RenderMode = mode.parse().usage()?;
            let mut spec = RenderSpec::new(window, size.0, size.1, ctx.spec.base, ctx.spec.depth, mode);
            spec.lines = lines;
            spec.address_len = address_len;
            spec.validate().usage()?;
            let img = render_field(&spec)?;
            let out = ctx.resolve(ctx.global.output.as_deref().unwrap_or(Path::new("render.png")));
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            img.save(&out)?;
            if !img.tips.is_empty() {
                println!("{}", serde_json::to_string_pretty(&img.tips)?);
            }
            eprintln!("wrote {}", out.display());
            Ok(())
        }
        Command::GreenLine { theta, step, max_steps } => {
            let th = parse_ratio(&theta).usage()?;
            let opts = TraceOptions { depth: ctx.spec.depth, step, tol: tol.max(1e-14), max_steps, ..TraceOptions::default() };
            let tr = trace_green_line(&th, &opts)?;
            ctx.emit(&tr)
        }
        Command::CheckLambda { ratio, lambda, kappa } => {
            let kappa = match kappa {
                Some(k) => parse_ratio(&k).usage()?,
                None => ctx.spec.rule.kappa.clone(),
            };
            let rule = match (ratio, lambda) {
                (Some(r), _) => LambdaRule::geometric(parse_ratio(&r).usage()?, kappa),
                (None, Some(l)) => parse_lambda(&l, kappa).usage()?,
                (None, None) => LambdaRule { kappa, ..ctx.spec.rule.clone() },
            };
            let cert = check_lambda(&rule)?;
            ctx.emit(&LambdaOut {
                rule: rule.to_string(),
                kappa: fmt_ratio(&rule.kappa),
                mass_sum: fmt_ratio(&cert.mass_sum),
                line_ratio: cert.line_ratio.as_ref().map(fmt_ratio),
                line_bound: fmt_ratio(&cert.line_bound),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
