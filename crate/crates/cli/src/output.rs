//! CSV and JSON writers. Column schemas are documented in `crates/cli/SCHEMAS.md`.

use hlkernels::forms::MultiIndex;
use hlkernels::kernels::KernelEvaluator;
use hlkernels::quad::RatioTable;
use hlkernels::verify::{CheckResult, SuiteReport};
use hlkernels::zalg::{Derivation, Step, ZExpr};
use hlkernels::{Complex64 as C, Error};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())? + "\n";
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn csv_err(e: csv::Error) -> String {
    e.to_string()
}

/// Measured slope for display; exact agreements carry `f64::MAX`.
fn measured(c: &CheckResult) -> String {
    if c.slope_measured == f64::MAX {
        "exact".into()
    } else {
        num(c.slope_measured)
    }
}

fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.3e}")
    } else {
        format!("{x:.4}")
    }
}

pub fn check_line(c: &CheckResult) -> String {
    let rel = match c.relation {
        hlkernels::verify::Relation::Ge => ">=",
        hlkernels::verify::Relation::Le => "<=",
    };
    format!(
        "{} {}/{}: measured {} {rel} required {} [{}]",
        if c.pass { "PASS" } else { "FAIL" },
        c.suite,
        c.check,
        measured(c),
        num(c.slope_required),
        c.note
    )
}

pub fn write_checks_csv(path: &Path, reports: &[SuiteReport]) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["suite", "domain", "n", "q", "seed", "check", "slope_measured", "slope_required", "relation", "pass", "note"])
        .map_err(csv_err)?;
    for r in reports {
        for c in &r.checks {
            let rel = match c.relation {
                hlkernels::verify::Relation::Ge => "ge",
                hlkernels::verify::Relation::Le => "le",
            };
            w.write_record([
                r.suite.as_str(),
                r.domain.as_str(),
                &r.n.to_string(),
                &r.q.to_string(),
                &r.seed.to_string(),
                &c.check,
                &format!("{:e}", c.slope_measured),
                &format!("{:e}", c.slope_required),
                rel,
                &c.pass.to_string(),
                &c.note,
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| e.to_string())
}

/// One line of a points file: a pair, or the reason it could not be parsed.
pub type PointRow = Result<(Vec<C>, Vec<C>), String>;

/// Headerless CSV, `#` comments, `4n` reals per row.
pub fn read_points(path: &Path, n: usize) -> Result<Vec<PointRow>, String> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let vals: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        out.push(match vals {
            Ok(v) if v.len() == 4 * n => {
                let cs: Vec<C> = v.chunks(2).map(|p| C::new(p[0], p[1])).collect();
                Ok((cs[..n].to_vec(), cs[n..].to_vec()))
            }
            Ok(v) => Err(format!("expected {} values, got {}", 4 * n, v.len())),
            Err(e) => Err(format!("bad number: {e}")),
        });
    }
    Ok(out)
}

fn point_text(p: &[C]) -> String {
    p.iter().map(|c| format!("{:e}:{:e}", c.re, c.im)).collect::<Vec<_>>().join(";")
}

fn index_text(m: &MultiIndex) -> String {
    m.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
}

/// Variant name of an error, used as the row-level error code.
fn error_code(e: &Error) -> String {
    let s = format!("{e:?}");
    s.split('(').next().unwrap_or(&s).to_string()
}

const EVAL_HEADER: [&str; 10] = ["row", "zeta", "z", "holo_zeta", "anti_zeta", "holo_z", "anti_z", "re", "im", "error"];

/// Every nonzero coefficient of the kernel at every pair; failures become error rows.
pub fn write_eval_csv(out: Option<&Path>, k: &KernelEvaluator, rows: &[PointRow]) -> Result<(), String> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| format!("{}: {e}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(EVAL_HEADER).map_err(csv_err)?;
    let n = k.n();
    for (i, row) in rows.iter().enumerate() {
        let idx = i.to_string();
        let (zeta, z) = match row {
            Ok(p) => p,
            Err(msg) => {
                w.write_record([idx.as_str(), "", "", "", "", "", "", "", "", &format!("Parse: {msg}")]).map_err(csv_err)?;
                continue;
            }
        };
        let (zt, xt) = (point_text(zeta), point_text(z));
        match k.eval(zeta, z) {
            Ok(f) => {
                for (b, c) in f.terms() {
                    let comp = b.component(n);
                    w.write_record([
                        idx.as_str(),
                        &zt,
                        &xt,
                        &index_text(&comp.holo_zeta),
                        &index_text(&comp.anti_zeta),
                        &index_text(&comp.holo_z),
                        &index_text(&comp.anti_z),
                        &format!("{:e}", c.re),
                        &format!("{:e}", c.im),
                        "",
                    ])
                    .map_err(csv_err)?;
                }
            }
            Err(e) => {
                w.write_record([idx.as_str(), &zt, &xt, "", "", "", "", "", "", &error_code(&e)]).map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(|e| e.to_string())
}

pub fn write_ratio_csv(path: &Path, t: &RatioTable) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["resolution", "p", "s", "a", "b", "trial", "ratio"]).map_err(csv_err)?;
    for r in &t.rows {
        w.write_record([
            r.resolution.to_string(),
            format!("{:e}", r.p),
            format!("{:e}", r.s),
            format!("{:e}", r.a),
            format!("{:e}", r.b),
            r.trial.to_string(),
            r.ratio.map(|x| format!("{x:e}")).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| e.to_string())
}

/// JSON transcript of a derivation.
#[derive(Serialize)]
pub struct Transcript {
    pub kind: String,
    pub variant: String,
    pub j: u32,
    pub lhs: String,
    pub rhs: String,
    pub expected: String,
    #[serde(rename = "match")]
    pub matched: bool,
    pub normal_form: ZExpr,
    pub steps: Vec<Step>,
}

impl Transcript {
    pub fn new(kind: &str, variant: &str, j: u32, matched: bool, expected: String, d: Derivation) -> Self {
        Self {
            kind: kind.into(),
            variant: variant.into(),
            j,
            lhs: d.lhs,
            rhs: d.rhs_text,
            expected,
            matched,
            normal_form: d.rhs,
            steps: d.steps,
        }
    }
}
