//! `hlk`: run verification suites, evaluate kernels, build ratio tables and
//! derivation transcripts. Exit codes: 0 pass, 1 check failure, 2 usage or
//! configuration error.

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use hlkernels::kernels::{self, Step};
use hlkernels::verify::{self, SuiteConfig};
use hlkernels::zalg::{self, IntKind, MainPart};
use hlkernels::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hlk", version, about = "Henkin-Leiterer kernel verification tools")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run verification suites and write JSON reports plus a CSV mirror.
    Suite {
        #[command(flatten)]
        common: Common,
        /// Comma-separated suite names; all applicable suites when absent.
        #[arg(long, value_delimiter = ',')]
        suites: Option<Vec<String>>,
        /// Print the suite registry and exit.
        #[arg(long)]
        list_suites: bool,
    },
    /// Evaluate a kernel at the pairs listed in a points file.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Kernel id: alpha, beta, Cq, Lq, LqMain, Kq, Gamma0q (or Gamma00, ...), Tq, Nq, Gq, Hq, E1.
        #[arg(long)]
        kernel: String,
        /// CSV without header: 4n reals per row, re/im of zeta_1..zeta_n then z_1..z_n.
        #[arg(long)]
        points: PathBuf,
    },
    /// Derive a weighted representation or asymptotic development and compare with the expected table.
    Derive {
        /// `mainint` (part i, ii, iii) or `intmain` (N, dbarN, dbarstarN).
        kind: String,
        variant: String,
        j: u32,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate-ratio table of a kernel on seeded random fields.
    Ratio {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "E1")]
        kernel: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 3.5)]
        s: f64,
        /// Output weight exponent `a` on `gamma`.
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        /// Input weight exponent `b` on `gamma`.
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        /// Grid cells per real axis, one table block each.
        #[arg(long, value_delimiter = ',', default_value = "8,10,12")]
        resolutions: Vec<usize>,
        #[arg(long, default_value_t = 32)]
        targets: usize,
        /// Width of the Gaussian test fields.
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
    },
    /// Print the suite registry.
    ListSuites,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative finite-difference step.
    #[arg(long)]
    h: Option<f64>,
    /// Exhaustion parameter of quadrature grids.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    t_min_exp: Option<i32>,
    #[arg(long)]
    t_max_exp: Option<i32>,
    /// Output directory (file for `eval`).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, String> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.domain {
            c.domain = v.clone();
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(n, q, seed, h, eps, t_min_exp, t_max_exp);
        if self.delta.is_some() {
            c.delta = self.delta;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

/// Failure modes mapped onto exit codes.
enum Fail {
    Checks,
    Usage(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Usage(e.to_string())
    }
}

impl From<String> for Fail {
    fn from(e: String) -> Self {
        Fail::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Suite { common, suites, list_suites } => {
            if list_suites {
                list();
                Ok(())
            } else {
                cmd_suite(&common, suites)
            }
        }
        Cmd::Eval { common, kernel, points } => cmd_eval(&common, &kernel, &points),
        Cmd::Derive { kind, variant, j, out } => cmd_derive(&kind, &variant, j, out.as_deref()),
        Cmd::Ratio { common, kernel, p, s, a, b, trials, resolutions, targets, sigma } => {
            cmd_ratio(&common, &kernel, RatioArgs { p, s, a, b, trials, resolutions, targets, sigma })
        }
        Cmd::ListSuites => {
            list();
            Ok(())
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Checks) => ExitCode::from(1),
        Err(Fail::Usage(msg)) => {
            eprintln!("hlk: {msg}");
            ExitCode::from(2)
        }
    }
}

fn list() {
    for (name, what) in verify::SUITES {
        println!("{name:<16}{what}");
    }
}

fn suite_config(c: &RunConfig) -> SuiteConfig {
    let mut s = SuiteConfig::new(&c.domain, c.n, c.q);
    s.seed = c.seed;
    s.ts = c.ts();
    s.delta = c.delta;
    s.step = Step::Relative(c.h);
    s
}

fn cmd_suite(common: &Common, suites: Option<Vec<String>>) -> Result<(), Fail> {
    let mut c = common.resolve()?;
    if let Some(s) = suites {
        c.suites = s;
    }
    let explicit = !c.suites.is_empty();
    let names: Vec<String> = if explicit { c.suites.clone() } else { verify::suite_names().iter().map(|s| s.to_string()).collect() };
    for name in &names {
        if !verify::suite_names().contains(&name.as_str()) {
            return Err(Fail::Usage(format!("unknown suite: {name}")));
        }
    }
    let cfg = suite_config(&c);
    cfg.model()?;
    let mut reports = Vec::new();
    for name in &names {
        match verify::run_suite(name, &cfg) {
            Ok(r) => reports.push(r),
            // Suites outside their (n, q, domain) range are skipped unless requested by name.
            Err(Error::OutOfRange(msg)) if !explicit => println!("SKIP {name}: {msg}"),
            Err(e) => return Err(Fail::Usage(format!("suite {name}: {e}"))),
        }
    }
    std::fs::create_dir_all(&c.out)?;
    for r in &reports {
        output::write_json(&c.out.join(format!("{}.json", r.suite)), r)?;
        for check in &r.checks {
            println!("{}", output::check_line(check));
        }
    }
    output::write_checks_csv(&c.out.join("checks.csv"), &reports)?;
    output::write_json(&c.out.join("config.json"), &c)?;
    if reports.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        Err(Fail::Checks)
    }
}

fn cmd_eval(common: &Common, kernel: &str, points: &std::path::Path) -> Result<(), Fail> {
    let c = common.resolve()?;
    let dom = suite_config(&c).model()?;
    let k = kernels::by_name(&dom, kernel, c.q, Step::Relative(c.h))?;
    let rows = output::read_points(points, c.n)?;
    let out = if common.out.is_some() { Some(c.out.as_path()) } else { None };
    output::write_eval_csv(out, &k, &rows)?;
    Ok(())
}

fn cmd_derive(kind: &str, variant: &str, j: u32, out: Option<&std::path::Path>) -> Result<(), Fail> {
    let t = match kind {
        "mainint" => {
            let part: MainPart = variant.parse()?;
            let d = zalg::derive_mainint(j, part)?;
            let expected = zalg::expected_mainint(j, part);
            output::Transcript::new(kind, variant, j, d.rhs == expected, expected.to_string(), d)
        }
        "intmain" => {
            let k: IntKind = variant.parse()?;
            let d = zalg::derive_intmain(k, j)?;
            let matched = zalg::matches_intmain(&d.rhs, k, j);
            // The table lists the explicit terms; the ledger C_j^(j) is appended.
            let expected = format!("{} + C_{j}^({j}) f", zalg::expected_intmain(k, j));
            output::Transcript::new(kind, variant, j, matched, expected, d)
        }
        other => return Err(Fail::Usage(format!("unknown derivation kind '{other}'"))),
    };
    let text = serde_json::to_string_pretty(&t).map_err(|e| e.to_string())? + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    if t.matched {
        Ok(())
    } else {
        Err(Fail::Checks)
    }
}

struct RatioArgs {
    p: f64,
    s: f64,
    a: f64,
    b: f64,
    trials: usize,
    resolutions: Vec<usize>,
    targets: usize,
    sigma: f64,
}

fn cmd_ratio(common: &Common, kernel: &str, r: RatioArgs) -> Result<(), Fail> {
    let c = common.resolve()?;
    let dom = suite_config(&c).model()?;
    let k = kernels::by_name(&dom, kernel, c.q, Step::Relative(c.h))?;
    let threshold = if k.id.name == "E1" {
        let t = zalg::e1_threshold(zalg::Lebesgue::from_f64(r.p)?, c.n)?;
        Some(*t.numer() as f64 / *t.denom() as f64)
    } else {
        None
    };
    let spec = hlkernels::quad::RatioSpec {
        weight_out: r.a,
        weight_in: r.b,
        p: r.p,
        s: r.s,
        q: k.id.q.unwrap_or(0),
        trials: r.trials,
        resolutions: r.resolutions,
        eps: c.eps,
        targets: r.targets,
        seed: c.seed,
        threshold,
        sigma: r.sigma,
    };
    let table = hlkernels::quad::ratio_table(&k, &dom, &spec)?;
    std::fs::create_dir_all(&c.out)?;
    output::write_ratio_csv(&c.out.join("ratio.csv"), &table)?;
    output::write_json(&c.out.join("ratio.json"), &table.meta)?;
    for (res, m) in &table.max_by_resolution {
        println!("resolution {res}: max ratio {m:.6e}");
    }
    if table.max_by_resolution.len() > 1 {
        println!("max growth {:.4}", table.max_growth());
    }
    Ok(())
}
