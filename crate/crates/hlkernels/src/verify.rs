//! Approach paths toward boundary points, log-log slope fitting, and the
//! registry of identity and rate suites with machine-readable reports.

use crate::domain::{DomainModel, Dv, ModelKind};
use crate::error::{Error, Result};
use crate::forms::{MultiIndex, Var};
use crate::kernels::{
    frame_rho2, g_l_kernel, gamma0q, h_l_kernel, kernel_dbar_zeta, kernel_vartheta_zeta, lambda, lq, lq_main, nq,
    tq, KernelEvaluator, Step,
};
use crate::typecalc::{exponent_along_path, KernelFamily, PathExponents};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// How the pair `(zeta_t, z_t)` approaches the base point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathMode {
    /// Both points on the boundary, separated by `t` along a complex-tangential direction.
    Tangential,
    /// Both points on the inner normal: `zeta = b - t nu`, `z = b - 2t nu`.
    Transversal,
    /// Tangential separation `t`, with `r(z) = -t^2` and `r(zeta) = -2t^2`.
    Parabolic,
}

impl PathMode {
    pub fn exponents(self) -> PathExponents {
        match self {
            PathMode::Parabolic => PathExponents::parabolic(),
            PathMode::Transversal => PathExponents::transversal(),
            PathMode::Tangential => PathExponents::parabolic(),
        }
    }
}

/// `2^{-k0}, ..., 2^{-k1}`.
pub fn t_grid(k0: i32, k1: i32) -> Vec<f64> {
    (k0..=k1).map(|k| 2f64.powi(-k)).collect()
}

/// Default grid `2^{-3} .. 2^{-10}`.
pub fn default_t_grid() -> Vec<f64> {
    t_grid(3, 10)
}

/// A family of pairs approaching a non-singular boundary point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub base: Vec<C>,
    pub mode: PathMode,
    pub ts: Vec<f64>,
    /// Unit complex-tangential direction at the base point.
    pub tangent: Vec<C>,
    /// Unit inner normal at the base point.
    pub normal: Vec<C>,
}

impl PathSpec {
    pub fn new(dom: &DomainModel, base: Vec<C>, mode: PathMode, ts: Vec<f64>) -> Result<Self> {
        if base.len() != dom.n {
            return Err(Error::DimensionMismatch(base.len(), dom.n));
        }
        let gamma = dom.frame(&base)?.gamma;
        if dom.r(&base).abs() > 1e-12 {
            return Err(Error::OutOfRange(format!("base point has r = {:e}", dom.r(&base))));
        }
        let grad = dom.grad(&base);
        let g2: f64 = grad.iter().map(|c| c.norm_sqr()).sum();
        if !(gamma > 0.0) || g2 == 0.0 {
            return Err(Error::SingularFramePoint(gamma));
        }
        let gn = g2.sqrt();
        let normal: Vec<C> = grad.iter().map(|c| -c.conj() / gn).collect();
        // Smallest gradient component gives the best-conditioned tangent.
        let k = (0..dom.n).min_by(|&a, &b| grad[a].norm().total_cmp(&grad[b].norm())).expect("n >= 1");
        let mut tangent: Vec<C> = grad.iter().map(|c| -grad[k] * c.conj() / g2).collect();
        tangent[k] += 1.0;
        let tn = tangent.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        tangent.iter_mut().for_each(|c| *c /= tn);
        Ok(Self { base, mode, ts, tangent, normal })
    }

    /// `(zeta_t, z_t)` for every `t` in the grid.
    pub fn pairs(&self, dom: &DomainModel) -> Result<Vec<(Vec<C>, Vec<C>)>> {
        self.ts.iter().map(|&t| self.pair(dom, t)).collect()
    }

    pub fn pair(&self, dom: &DomainModel, t: f64) -> Result<(Vec<C>, Vec<C>)> {
        let offset = |s: f64, dir: &[C]| -> Vec<C> { self.base.iter().zip(dir).map(|(b, d)| b + d * s).collect() };
        let pair = match self.mode {
            PathMode::Tangential => (
                project(dom, &offset(-0.5 * t, &self.tangent), 0.0)?,
                project(dom, &offset(0.5 * t, &self.tangent), 0.0)?,
            ),
            PathMode::Parabolic => (
                project(dom, &offset(-0.5 * t, &self.tangent), -2.0 * t * t)?,
                project(dom, &offset(0.5 * t, &self.tangent), -t * t)?,
            ),
            PathMode::Transversal => (offset(t, &self.normal), offset(2.0 * t, &self.normal)),
        };
        Ok(pair)
    }
}

/// Newton projection along the real normal onto the level set `r = target`.
pub fn project(dom: &DomainModel, p: &[C], target: f64) -> Result<Vec<C>> {
    let mut x = p.to_vec();
    for _ in 0..60 {
        let err = dom.r(&x) - target;
        if err.abs() <= 1e-15 * (1.0 + target.abs()) {
            return Ok(x);
        }
        let grad = dom.grad(&x);
        let g2: f64 = grad.iter().map(|c| c.norm_sqr()).sum();
        if g2 < 1e-24 {
            return Err(Error::SingularFramePoint(g2.sqrt()));
        }
        let s = -err / (2.0 * g2);
        x.iter_mut().zip(&grad).for_each(|(xi, g)| *xi += g.conj() * s);
    }
    if (dom.r(&x) - target).abs() < 1e-12 {
        Ok(x)
    } else {
        Err(Error::OutOfRange("projection did not converge".into()))
    }
}

/// Seeded non-singular boundary points: random unit vectors on BALL,
/// `(0.3, 0.3 u)` with `u` a random unit vector on PINCHED.
pub fn base_points(dom: &DomainModel, count: usize, seed: u64) -> Vec<Vec<C>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = |k: usize| -> Vec<C> {
        let v: Vec<C> = (0..k).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let nv = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|c| c / nv).collect()
    };
    (0..count)
        .map(|_| match dom.kind {
            ModelKind::Ball => unit(dom.n),
            ModelKind::Pinched => {
                let mut p = vec![C::new(0.3, 0.0)];
                p.extend(unit(dom.n - 1).into_iter().map(|c| c * 0.3));
                p
            }
        })
        .collect()
}

/// Least-squares line through `(log t, log value)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub used: usize,
    /// Samples dropped for being zero, negative or not finite.
    pub dropped: usize,
}

pub const MIN_SAMPLES: usize = 5;

pub fn slope_fit(ts: &[f64], values: &[f64]) -> Result<SlopeFit> {
    if ts.len() != values.len() {
        return Err(Error::DimensionMismatch(ts.len(), values.len()));
    }
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(values)
        .filter(|(t, v)| **t > 0.0 && **v > 0.0 && v.is_finite())
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples(pts.len()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / m).sqrt();
    Ok(SlopeFit { slope, intercept, residual, used: pts.len(), dropped: values.len() - pts.len() })
}

/// Versioned pass thresholds shared by all suites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub version: u32,
    /// Slope margin for clean `sigma`-order claims.
    pub sigma_margin: f64,
    /// Slope margin for claims on finite-difference derivatives of kernels.
    pub fd_margin: f64,
    /// Absolute tolerance for `dbar_z Phi = 0`.
    pub dbar_z_tol: f64,
    /// Absolute level under which an O(1)-normalized geometric residual
    /// counts as identically zero.
    pub exact_tol: f64,
    /// Relative tolerance for the finite-difference Laplacian of `Gamma_00`.
    pub harmonic_tol: f64,
    pub morse_tol: f64,
    /// Allowed relative drift of the fitted lower-bound constant.
    pub lower_bound_drift: f64,
    /// A difference at most this multiple of the step-doubling error
    /// estimate is unresolved by finite differences.
    pub fd_noise_factor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            version: 1,
            sigma_margin: 0.1,
            fd_margin: 0.2,
            dbar_z_tol: 1e-10,
            exact_tol: 1e-12,
            harmonic_tol: 1e-5,
            morse_tol: 1e-10,
            lower_bound_drift: 0.2,
            fd_noise_factor: 4.0,
        }
    }
}

/// Direction of a pass condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `measured >= required`.
    Ge,
    /// `measured <= required`.
    Le,
}

/// Outcome of one check. For tolerance checks the `slope_*` fields carry
/// the measured value and the tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub suite: String,
    pub check: String,
    pub slope_measured: f64,
    pub slope_required: f64,
    pub relation: Relation,
    pub pass: bool,
    pub note: String,
}

impl CheckResult {
    fn new(suite: &str, check: &str, measured: f64, required: f64, relation: Relation, note: String) -> Self {
        let pass = match relation {
            Relation::Ge => measured >= required,
            Relation::Le => measured <= required,
        };
        Self { suite: suite.into(), check: check.into(), slope_measured: measured, slope_required: required, relation, pass, note }
    }

    fn failed(suite: &str, check: &str, err: &Error) -> Self {
        Self {
            suite: suite.into(),
            check: check.into(),
            slope_measured: f64::NAN,
            slope_required: f64::NAN,
            relation: Relation::Ge,
            pass: false,
            note: format!("error: {err}"),
        }
    }
}

/// Inputs shared by every suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub domain: String,
    pub n: usize,
    pub q: usize,
    pub seed: u64,
    pub ts: Vec<f64>,
    pub delta: Option<f64>,
    pub step: Step,
    pub thresholds: Thresholds,
}

impl SuiteConfig {
    pub fn new(domain: &str, n: usize, q: usize) -> Self {
        Self {
            domain: domain.into(),
            n,
            q,
            seed: 0,
            ts: default_t_grid(),
            delta: None,
            step: Step::default(),
            thresholds: Thresholds::default(),
        }
    }

    pub fn model(&self) -> Result<Arc<DomainModel>> {
        let dom = DomainModel::by_name(&self.domain, self.n)?;
        Ok(Arc::new(match self.delta {
            Some(d) => dom.with_delta(d),
            None => dom,
        }))
    }
}

/// Machine-readable result of one suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub domain: String,
    pub n: usize,
    pub q: usize,
    pub seed: u64,
    pub ts: Vec<f64>,
    pub thresholds: Thresholds,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == name)
    }
}

/// Registered suites with a one-line description.
pub const SUITES: &[(&str, &str)] = &[
    ("phisymm", "|Phi - Phi*| is third order along tangential paths; |Phi| is second order"),
    ("lphi", "Lambda_n Phi + gamma and Lambda_j Phi (j<n) are first order; Re Phi > 0; lower bound for |Phi|"),
    ("lphi-ii-z", "Phi is holomorphic in z: finite-difference dbar_z Phi vanishes"),
    ("lp", "L_j conj(Phi) - L_j rho^2 / 2 is second order; gamma gamma*(2P - sum |L_j rho^2|^2) - 4|Phi|^2 is third order"),
    ("lemmalq", "L_q minus its explicit main term gains one order"),
    ("dgh", "dbar_zeta G_L - H_L gains one order for every |L| = q"),
    ("nkern", "dbar N_q - T_q, vartheta N_q - T*_{q-1} and N_q - N_q* gain one order; boundary condition"),
    ("gamma-harmonic", "finite-difference Laplacian of Gamma_00 vanishes off the diagonal"),
    ("boundary", "tangential part of *N_q decays at the boundary along normal and parabolic approach"),
    ("morse", "real Hessian of r at the pinched point has eigenvalues (-2, 6, 2, 2, ...)"),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    if !SUITES.iter().any(|(n, _)| *n == name) {
        return Err(Error::UnknownSuite(name.into()));
    }
    let dom = cfg.model()?;
    let ctx = Ctx { suite: name, cfg, dom: &dom };
    let checks = match name {
        "phisymm" => ctx.phisymm()?,
        "lphi" => ctx.lphi()?,
        "lphi-ii-z" => ctx.lphi_ii_z()?,
        "lp" => ctx.lp()?,
        "lemmalq" => ctx.lemmalq()?,
        "dgh" => ctx.dgh()?,
        "nkern" => ctx.nkern()?,
        "gamma-harmonic" => ctx.gamma_harmonic()?,
        "boundary" => ctx.boundary_checks()?,
        "morse" => ctx.morse()?,
        _ => unreachable!("registry checked above"),
    };
    Ok(SuiteReport {
        suite: name.into(),
        domain: dom.name().into(),
        n: cfg.n,
        q: cfg.q,
        seed: cfg.seed,
        ts: cfg.ts.clone(),
        thresholds: cfg.thresholds,
        checks,
    })
}

/// Sample a scalar along a path, in parallel over `t`.
fn sample<F>(dom: &DomainModel, path: &PathSpec, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[C], &[C]) -> Result<f64> + Sync,
{
    path.ts
        .par_iter()
        .map(|&t| {
            let (zeta, z) = path.pair(dom, t)?;
            f(&zeta, &z)
        })
        .collect()
}

fn fmt_fit(f: &SlopeFit) -> String {
    let mut s = format!("rms {:.2e}", f.residual);
    if f.dropped > 0 {
        s.push_str(&format!(", {} nonpositive samples dropped", f.dropped));
    }
    s
}

struct Ctx<'a> {
    suite: &'a str,
    cfg: &'a SuiteConfig,
    dom: &'a Arc<DomainModel>,
}

impl Ctx<'_> {
    fn th(&self) -> &Thresholds {
        &self.cfg.thresholds
    }

    fn base(&self) -> Vec<C> {
        base_points(self.dom, 1, self.cfg.seed).remove(0)
    }

    fn path(&self, mode: PathMode) -> Result<PathSpec> {
        PathSpec::new(self.dom, self.base(), mode, self.cfg.ts.clone())
    }

    fn need_kernel_range(&self, min_q: usize) -> Result<()> {
        let (n, q) = (self.cfg.n, self.cfg.q);
        if n < 3 || q < min_q || q + 2 > n {
            return Err(Error::OutOfRange(format!("suite {} needs n >= 3 and {min_q} <= q <= n-2, got n={n}, q={q}", self.suite)));
        }
        Ok(())
    }

    /// `slope(values) >= required` (or `<=`).
    fn slope_check(&self, check: &str, ts: &[f64], values: &[f64], required: f64, rel: Relation) -> CheckResult {
        match slope_fit(ts, values) {
            Ok(f) => CheckResult::new(self.suite, check, f.slope, required, rel, fmt_fit(&f)),
            Err(e) => CheckResult::failed(self.suite, check, &e),
        }
    }

    /// Rate claim on a quantity that may vanish identically on quadratic
    /// models: exact zero to `exact_tol` passes, otherwise the slope is fitted.
    fn rate_check(&self, check: &str, ts: &[f64], values: &[f64], required: f64) -> CheckResult {
        let tol = self.th().exact_tol;
        let worst = values.iter().cloned().fold(0.0, f64::max);
        if worst <= tol {
            return CheckResult::new(self.suite, check, worst, tol, Relation::Le, "vanishes identically".into());
        }
        self.slope_check(check, ts, values, required, Relation::Ge)
    }

    /// `slope(diff) >= slope(main) + 1 - margin`.
    fn gain_check(&self, check: &str, ts: &[f64], main: &[f64], diff: &[f64], margin: f64) -> CheckResult {
        let fm = match slope_fit(ts, main) {
            Ok(f) => f,
            Err(e) => return CheckResult::failed(self.suite, check, &e),
        };
        let required = fm.slope + 1.0 - margin;
        if diff.iter().zip(main).all(|(d, m)| *d <= self.th().exact_tol * m.abs().max(1.0)) {
            return CheckResult::new(self.suite, check, f64::MAX, required, Relation::Ge, "difference vanishes identically".into());
        }
        match slope_fit(ts, diff) {
            Ok(fd) => CheckResult::new(
                self.suite,
                check,
                fd.slope,
                required,
                Relation::Ge,
                format!("main slope {:.3}; {}", fm.slope, fmt_fit(&fd)),
            ),
            Err(e) => CheckResult::failed(self.suite, check, &e),
        }
    }

    /// `gain_check` for a difference built from finite-difference derivatives;
    /// `noise` is the step-doubling error estimate at each sample.
    fn gain_check_fd(&self, check: &str, ts: &[f64], main: &[f64], diff: &[f64], noise: &[f64], margin: f64) -> CheckResult {
        let k = self.th().fd_noise_factor;
        if diff.iter().zip(noise).all(|(d, e)| *d <= k * e) {
            let required = slope_fit(ts, main).map(|f| f.slope + 1.0 - margin).unwrap_or(f64::NAN);
            return CheckResult::new(self.suite, check, f64::MAX, required, Relation::Ge, "difference within finite-difference resolution".into());
        }
        self.gain_check(check, ts, main, diff, margin)
    }

    fn guarded(&self, check: &str, r: Result<CheckResult>) -> CheckResult {
        r.unwrap_or_else(|e| CheckResult::failed(self.suite, check, &e))
    }

    fn phisymm(&self) -> Result<Vec<CheckResult>> {
        let dom = self.dom;
        let path = self.path(PathMode::Tangential)?;
        let diff = sample(dom, &path, |a, b| Ok((dom.phi(a, b)? - dom.phi_star(a, b)?).norm()))?;
        let phi = sample(dom, &path, |a, b| Ok(dom.phi(a, b)?.norm()))?;
        let th = self.th();
        Ok(vec![
            self.rate_check("|Phi - Phi*| slope", &path.ts, &diff, 3.0 - th.sigma_margin),
            self.slope_check("|Phi| slope", &path.ts, &phi, 2.0 + th.sigma_margin, Relation::Le),
        ])
    }

    fn lphi(&self) -> Result<Vec<CheckResult>> {
        let dom = self.dom;
        let n = self.cfg.n;
        let th = self.th();
        let path = self.path(PathMode::Transversal)?;
        let lambda_phi = |zeta: &[C], z: &[C], j: usize| -> Result<C> {
            let fs = dom.frame(z)?;
            let d: Vec<C> = (0..n).map(|k| dom.phi_deriv(zeta, z, &[Dv::Z(k)])).collect();
            Ok(lambda(&fs, j, &d))
        };
        let ln = sample(dom, &path, |a, b| Ok((lambda_phi(a, b, n - 1)? + dom.frame(a)?.gamma).norm()))?;
        let lj = sample(dom, &path, |a, b| {
            let mut s = 0.0;
            for j in 0..n - 1 {
                s += lambda_phi(a, b, j)?.norm_sqr();
            }
            Ok(s.sqrt())
        })?;
        let mut out = vec![
            self.rate_check("|Lambda_n Phi + gamma| slope", &path.ts, &ln, 1.0 - th.sigma_margin),
            self.rate_check("|Lambda_j Phi| (j<n) slope", &path.ts, &lj, 1.0 - th.sigma_margin),
        ];
        out.push(self.guarded("min Re Phi (zeta on boundary)", self.re_phi_positive()));
        out.push(self.guarded("lower-bound constant drift", self.lower_bound()));
        Ok(out)
    }

    fn re_phi_positive(&self) -> Result<CheckResult> {
        let dom = self.dom;
        let mut worst = f64::INFINITY;
        for b in base_points(dom, 4, self.cfg.seed) {
            for mode in [PathMode::Parabolic, PathMode::Transversal] {
                let path = PathSpec::new(dom, b.clone(), mode, self.cfg.ts.clone())?;
                for (_, z) in path.pairs(dom)? {
                    worst = worst.min(dom.phi(&b, &z)?.re);
                }
            }
        }
        let mut c = CheckResult::new(self.suite, "min Re Phi (zeta on boundary)", worst, 0.0, Relation::Ge, "strict".into());
        c.pass = worst > 0.0;
        Ok(c)
    }

    /// Smallest `|Phi| / (rho^2 + |r| + |r*| + |Im Phi|)` over all paths, on the
    /// grid and on its refinement by `sqrt 2` steps.
    fn lower_bound(&self) -> Result<CheckResult> {
        let dom = self.dom;
        let coarse = self.cfg.ts.clone();
        let mut fine = Vec::new();
        for w in coarse.windows(2) {
            fine.push(w[0]);
            fine.push((w[0] * w[1]).sqrt());
        }
        fine.extend(coarse.last());
        let c_min = |ts: &[f64]| -> Result<f64> {
            let mut c = f64::INFINITY;
            for b in base_points(dom, 4, self.cfg.seed) {
                for mode in [PathMode::Tangential, PathMode::Parabolic, PathMode::Transversal] {
                    let path = PathSpec::new(dom, b.clone(), mode, ts.to_vec())?;
                    for (zeta, z) in path.pairs(dom)? {
                        let phi = dom.phi(&zeta, &z)?;
                        let denom = dom.rho2(&zeta, &z)? + dom.r(&zeta).abs() + dom.r(&z).abs() + phi.im.abs();
                        c = c.min(phi.norm() / denom);
                    }
                }
            }
            Ok(c)
        };
        let (c0, c1) = (c_min(&coarse)?, c_min(&fine)?);
        let drift = (c1 - c0).abs() / c0;
        let mut res = CheckResult::new(
            self.suite,
            "lower-bound constant drift",
            drift,
            self.th().lower_bound_drift,
            Relation::Le,
            format!("c = {c0:.4} on the grid, {c1:.4} refined"),
        );
        res.pass &= c0 > 0.0 && c1 > 0.0;
        Ok(res)
    }

    fn lphi_ii_z(&self) -> Result<Vec<CheckResult>> {
        let dom = self.dom;
        let n = self.cfg.n;
        let h = 1e-4;
        let mut worst: f64 = 0.0;
        for mode in [PathMode::Tangential, PathMode::Parabolic, PathMode::Transversal] {
            let path = self.path(mode)?;
            for (zeta, z) in path.pairs(dom)? {
                for k in 0..n {
                    let at = |d: C| -> Result<C> {
                        let mut w = z.clone();
                        w[k] += d;
                        dom.phi(&zeta, &w)
                    };
                    let dx = (at(C::new(h, 0.0))? - at(C::new(-h, 0.0))?) / (2.0 * h);
                    let dy = (at(C::new(0.0, h))? - at(C::new(0.0, -h))?) / (2.0 * h);
                    worst = worst.max(((dx + C::i() * dy) * 0.5).norm());
                }
            }
        }
        Ok(vec![CheckResult::new(self.suite, "max |dbar_z Phi|", worst, self.th().dbar_z_tol, Relation::Le, format!("central differences, h = {h:e}"))])
    }

    fn lp(&self) -> Result<Vec<CheckResult>> {
        let dom = self.dom;
        let n = self.cfg.n;
        let th = self.th();
        let par = self.path(PathMode::Parabolic)?;
        let ii = sample(dom, &par, |zeta, z| {
            let g = dom.geo_pair(zeta, z)?;
            let (_, l_rho) = frame_rho2(dom, &g);
            let d_phibar: Vec<C> = (0..n).map(|k| dom.phi_deriv(zeta, z, &[Dv::ZetaBar(k)]).conj()).collect();
            let mut s = 0.0;
            for j in 0..n - 1 {
                s += (g.frame.l(j, &d_phibar) - 0.5 * l_rho[j]).norm_sqr();
            }
            Ok(s.sqrt())
        })?;
        let iii = sample(dom, &par, |zeta, z| {
            let g = dom.geo_pair(zeta, z)?;
            let (_, l_rho) = frame_rho2(dom, &g);
            let s: f64 = l_rho[..n - 1].iter().map(|c| c.norm_sqr()).sum();
            Ok((g.gamma * g.gamma_star * (2.0 * g.big_p - s) - 4.0 * g.phi.norm_sqr()).abs())
        })?;
        Ok(vec![
            self.rate_check("|L_j conj(Phi) - L_j rho^2 / 2| slope", &par.ts, &ii, 2.0 - th.sigma_margin),
            self.rate_check("gamma gamma*(2P - sum|L_j rho^2|^2) - 4|Phi|^2 slope", &par.ts, &iii, 3.0 - th.sigma_margin),
        ])
    }

    fn lemmalq(&self) -> Result<Vec<CheckResult>> {
        let dom = self.dom;
        self.need_kernel_range(1)?;
        let q = self.cfg.q;
        let path = self.path(PathMode::Parabolic)?;
        let (full, main) = (lq(dom, q), lq_main(dom, q));
        let m = sample(dom, &path, |a, b| Ok(main.eval(a, b)?.norm()))?;
        let d = sample(dom, &path, |a, b| Ok(full.eval(a, b)?.dist(&main.eval(a, b)?)))?;
        Ok(vec![self.gain_check("|L_q - main| vs |main|", &path.ts, &m, &d, self.th().fd_margin)])
    }

    fn dgh(&self) -> Result<Vec<CheckResult>> {
        self.need_kernel_range(1)?;
        let dom = self.dom;
        let (n, q) = (self.cfg.n, self.cfg.q);
        let path = self.path(PathMode::Parabolic)?;
        let step = self.cfg.step;
        let margin = self.th().fd_margin;
        let mut out = Vec::new();
        for l in MultiIndex::all(n, q) {
            let dg = kernel_dbar_zeta(&g_l_kernel(dom, q, l.clone()), step);
            let dg_coarse = kernel_dbar_zeta(&g_l_kernel(dom, q, l.clone()), step.scaled(4.0));
            let h = h_l_kernel(dom, q, l.clone());
            // Split into the part without conj(omega^n) and the rest.
            let parts = |zeta: &[C], z: &[C]| -> Result<([(f64, f64); 2], f64)> {
                let a = dg.eval(zeta, z)?;
                let b = h.eval(zeta, z)?;
                let noise = a.dist(&dg_coarse.eval(zeta, z)?);
                let fr = dom.frame(zeta)?;
                let (bt, dt) = (b.restrict_tangential(&fr.a)?, a.sub(&b)?.restrict_tangential(&fr.a)?);
                let (bn, dn) = (b.sub(&bt)?, a.sub(&b)?.sub(&dt)?);
                Ok(([(bt.norm(), dt.norm()), (bn.norm(), dn.norm())], noise))
            };
            let samples: Vec<([(f64, f64); 2], f64)> =
                path.ts.par_iter().map(|&t| path.pair(dom, t).and_then(|(a, b)| parts(&a, &b))).collect::<Result<_>>()?;
            let (rows, noise): (Vec<[(f64, f64); 2]>, Vec<f64>) = samples.into_iter().unzip();
            let label = format!("{:?}", l.indices());
            if l.contains(n) {
                let main: Vec<f64> = rows.iter().map(|r| (r[0].0.powi(2) + r[1].0.powi(2)).sqrt()).collect();
                let diff: Vec<f64> = rows.iter().map(|r| (r[0].1.powi(2) + r[1].1.powi(2)).sqrt()).collect();
                out.push(self.gain_check_fd(&format!("case a, L = {label}"), &path.ts, &main, &diff, &noise, margin));
            } else {
                for (case, idx, what) in [("b", 0, "j<n"), ("c", 1, "j=n")] {
                    let main: Vec<f64> = rows.iter().map(|r| r[idx].0).collect();
                    let diff: Vec<f64> = rows.iter().map(|r| r[idx].1).collect();
                    out.push(self.gain_check_fd(&format!("case {case} ({what}), L = {label}"), &path.ts, &main, &diff, &noise, margin));
                }
            }
            let main: Vec<f64> = rows.iter().map(|r| (r[0].0.powi(2) + r[1].0.powi(2)).sqrt()).collect();
            out.push(self.envelope_check(&format!("|H_L| envelope, L = {label}"), KernelFamily::Hq, &path, &main));
        }
        Ok(out)
    }

    /// Measured slope of a kernel term is no steeper than the smallest
    /// predicted exponent of its descriptors, minus the FD margin.
    fn envelope_check(&self, check: &str, family: KernelFamily, path: &PathSpec, values: &[f64]) -> CheckResult {
        let exps = path.mode.exponents();
        let predicted = crate::typecalc::descriptor_table(self.cfg.n)
            .into_iter()
            .filter(|e| e.family == family && e.q == self.cfg.q)
            .map(|e| exponent_along_path(&e.descriptor, &exps))
            .min();
        match predicted {
            Some(p) => {
                let p = *p.numer() as f64 / *p.denom() as f64;
                let mut c = self.slope_check(check, &path.ts, values, p - self.th().fd_margin, Relation::Ge);
                c.note = format!("predicted {p}; {}", c.note);
                c
            }
            None => CheckResult::failed(self.suite, check, &Error::OutOfRange("no descriptors".into())),
        }
    }

    fn nkern(&self) -> Result<Vec<CheckResult>> {
        self.need_kernel_range(1)?;
        let dom = self.dom;
        let q = self.cfg.q;
        let step = self.cfg.step;
        let margin = self.th().fd_margin;
        let path = self.path(PathMode::Parabolic)?;
        let nk = nq(dom, q);
        let t = tq(dom, q, step)?;
        let dn = kernel_dbar_zeta(&nk, step);
        let vn = kernel_vartheta_zeta(&nk, dom, step);
        let ts = tq(dom, q - 1, step)?.adjoint();
        let ns = nk.adjoint();
        let weighted = |k: &KernelEvaluator, other: Option<&KernelEvaluator>| -> Result<Vec<f64>> {
            sample(dom, &path, |a, b| {
                let w = dom.frame(a)?.gamma * dom.frame(b)?.gamma;
                let v = k.eval(a, b)?;
                Ok(w * match other {
                    Some(o) => v.dist(&o.eval(a, b)?),
                    None => v.norm(),
                })
            })
        };
        let mut out = Vec::new();
        let main_t = weighted(&t, None)?;
        out.push(self.gain_check("gamma gamma* |dbar N_q - T_q|", &path.ts, &main_t, &weighted(&dn, Some(&t))?, margin));
        let main_ts = weighted(&ts, None)?;
        out.push(self.gain_check("gamma gamma* |vartheta N_q - T*_{q-1}|", &path.ts, &main_ts, &weighted(&vn, Some(&ts))?, margin));
        let plain = |k: &KernelEvaluator, o: Option<&KernelEvaluator>| -> Result<Vec<f64>> {
            sample(dom, &path, |a, b| {
                let v = k.eval(a, b)?;
                Ok(match o {
                    Some(o) => v.dist(&o.eval(a, b)?),
                    None => v.norm(),
                })
            })
        };
        let main_n = plain(&nk, None)?;
        out.push(self.gain_check("|N_q - N_q*|", &path.ts, &main_n, &plain(&nk, Some(&ns))?, margin));
        out.push(self.envelope_check("|N_q| envelope", KernelFamily::Nq, &path, &main_n));
        out.extend(self.boundary_checks()?);
        Ok(out)
    }

    /// Boundary pullback of `*_zeta N_q` relative to `|*_zeta N_q|`, which
    /// must decay in two geometries: `zeta` moving to the boundary along the
    /// inner normal with `z` fixed, and `zeta` on the boundary with `z`
    /// approaching it parabolically.
    fn boundary_checks(&self) -> Result<Vec<CheckResult>> {
        self.need_kernel_range(1)?;
        let dom = self.dom;
        let nk = nq(dom, self.cfg.q);
        let ratio = |zeta: &[C], z: &[C]| -> Result<f64> {
            let star = nk.eval(zeta, z)?.hodge_star(&dom.levi(zeta)?, Var::Zeta)?;
            let pb = star.pullback_boundary(&dom.frame(zeta)?.a)?;
            Ok(pb.norm() / star.norm())
        };
        let decay = |check: &str, path: &PathSpec, vals: Result<Vec<f64>>| match vals {
            Ok(v) => {
                let mut c = self.slope_check(check, &path.ts, &v, 0.0, Relation::Ge);
                c.pass = c.slope_measured > 0.0;
                c
            }
            Err(e) => CheckResult::failed(self.suite, check, &e),
        };
        let normal = self.path(PathMode::Transversal)?;
        let z: Vec<C> = normal.base.iter().zip(&normal.normal).zip(&normal.tangent).map(|((b, nu), t)| b + nu * 0.1 + t * 0.05).collect();
        let along_normal = sample(dom, &normal, |zeta, _| ratio(zeta, &z));
        let parabolic = self.path(PathMode::Parabolic)?;
        let zeta = parabolic.base.clone();
        let along_parabola = sample(dom, &parabolic, |_, z| ratio(&zeta, z));
        Ok(vec![
            decay("tangential *N_q relative decay, normal approach", &normal, along_normal),
            decay("tangential *N_q relative decay, parabolic approach", &parabolic, along_parabola),
        ])
    }

    fn gamma_harmonic(&self) -> Result<Vec<CheckResult>> {
        let dom = self.dom;
        let n = self.cfg.n;
        let g = gamma0q(dom, 0);
        let path = self.path(PathMode::Parabolic)?;
        let mut worst: f64 = 0.0;
        for (zeta, z) in path.pairs(dom)? {
            let d = zeta.iter().zip(&z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let h = 1e-2 * d;
            let v = |p: &[C]| -> Result<C> { Ok(g.eval(p, &z)?.get(crate::forms::Blade(0))) };
            let centre = v(&zeta)?;
            let mut lap = C::new(0.0, 0.0);
            for k in 0..n {
                for dir in [C::new(1.0, 0.0), C::i()] {
                    let mut p = zeta.clone();
                    let mut m = zeta.clone();
                    let mut p2 = zeta.clone();
                    let mut m2 = zeta.clone();
                    p[k] += dir * h;
                    m[k] -= dir * h;
                    p2[k] += dir * 2.0 * h;
                    m2[k] -= dir * 2.0 * h;
                    // Fourth-order five-point second derivative.
                    lap += (-v(&p2)? + 16.0 * v(&p)? - 30.0 * centre + 16.0 * v(&m)? - v(&m2)?) / (12.0 * h * h);
                }
            }
            worst = worst.max(lap.norm() * d * d / centre.norm());
        }
        Ok(vec![CheckResult::new(self.suite, "relative Laplacian of Gamma_00", worst, self.th().harmonic_tol, Relation::Le, "|Delta Gamma| |zeta - z|^2 / |Gamma|".into())])
    }

    fn morse(&self) -> Result<Vec<CheckResult>> {
        if self.dom.kind != ModelKind::Pinched {
            return Err(Error::OutOfRange("the morse suite needs the pinched model".into()));
        }
        let n = self.cfg.n;
        let origin = vec![C::new(0.0, 0.0); n];
        let mut ev = self.dom.hessian_eigenvalues(&origin);
        ev.sort_by(f64::total_cmp);
        let mut expected = vec![-2.0];
        expected.extend(std::iter::repeat(2.0).take(2 * n - 2));
        expected.push(6.0);
        let err = ev.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let negative = ev.iter().filter(|e| **e < 0.0).count();
        let mut c = CheckResult::new(
            self.suite,
            "Hessian eigenvalues at the origin",
            err,
            self.th().morse_tol,
            Relation::Le,
            format!("eigenvalues {ev:?}, signature ({negative}, {})", ev.len() - negative),
        );
        c.pass &= ev.len() == expected.len();
        Ok(vec![c])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_slope() {
        let ts = default_t_grid();
        let v: Vec<f64> = ts.iter().map(|t| t.powi(3)).collect();
        let f = slope_fit(&ts, &v).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-10);
        assert!(f.residual < 1e-10);
    }

    #[test]
    fn oscillating_slope() {
        let ts = default_t_grid();
        let v: Vec<f64> = ts.iter().map(|t| t * (1.0 + 0.1 * t.ln().sin())).collect();
        assert!((slope_fit(&ts, &v).unwrap().slope - 1.0).abs() < 0.05);
    }

    #[test]
    fn zeros_are_dropped() {
        let ts = default_t_grid();
        assert_eq!(slope_fit(&ts, &vec![0.0; ts.len()]).unwrap_err(), Error::TooFewSamples(0));
        let mut v: Vec<f64> = ts.iter().map(|t| t * t).collect();
        v[0] = 0.0;
        v[1] = -1.0;
        let f = slope_fit(&ts, &v).unwrap();
        assert_eq!(f.dropped, 2);
        assert!((f.slope - 2.0).abs() < 1e-12);
        v[2] = 0.0;
        v[3] = f64::NAN;
        assert_eq!(slope_fit(&ts, &v).unwrap_err(), Error::TooFewSamples(4));
    }

    #[test]
    fn paths_hit_their_level_sets() {
        for (name, n) in [("ball", 3), ("pinched", 2)] {
            let dom = DomainModel::by_name(name, n).unwrap();
            let b = base_points(&dom, 1, 3).remove(0);
            assert!(dom.r(&b).abs() < 1e-14);
            for mode in [PathMode::Tangential, PathMode::Parabolic] {
                let p = PathSpec::new(&dom, b.clone(), mode, default_t_grid()).unwrap();
                let tg: C = p.tangent.iter().zip(dom.grad(&b)).map(|(t, g)| t * g).sum();
                assert!(tg.norm() < 1e-14);
                for (&t, (zeta, z)) in p.ts.iter().zip(p.pairs(&dom).unwrap()) {
                    let (rz, rw) = match mode {
                        PathMode::Tangential => (0.0, 0.0),
                        _ => (-2.0 * t * t, -t * t),
                    };
                    assert!((dom.r(&zeta) - rz).abs() < 1e-14);
                    assert!((dom.r(&z) - rw).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn unknown_suite() {
        let cfg = SuiteConfig::new("ball", 2, 0);
        assert_eq!(run_suite("nope", &cfg).unwrap_err(), Error::UnknownSuite("nope".into()));
    }

    #[test]
    fn singular_base_rejected() {
        let dom = DomainModel::pinched(2).unwrap();
        let o = vec![C::new(0.0, 0.0); 2];
        assert!(matches!(PathSpec::new(&dom, o, PathMode::Parabolic, default_t_grid()), Err(Error::SingularFramePoint(_))));
    }
}
