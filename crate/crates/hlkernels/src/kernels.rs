//! Pointwise evaluation of the explicit kernels: the Cauchy-Fantappie
//! ingredients `alpha`, `beta`, `C_q`, `L_q`, `K_q`, the isotropic
//! `Gamma_{0q}`, the homotopy kernels `T_q`, the frame-adapted terms `H_L`,
//! `G_L` and the principal Neumann kernel `N_q`, plus finite-difference
//! differential operators acting on kernels.

use crate::domain::{Coframe, DomainModel, Dv, GeoPair};
use crate::error::{Error, Result};
use crate::forms::{DoubleForm, Metric, MultiIndex, Slot, Var};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

type EvalFn = dyn Fn(&[C], &[C]) -> Result<DoubleForm> + Send + Sync;

/// Name and parameters of a kernel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelId {
    pub name: String,
    pub n: usize,
    pub q: Option<usize>,
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.q {
            Some(q) => write!(f, "{}(n={},q={})", self.name, self.n, q),
            None => write!(f, "{}(n={})", self.name, self.n),
        }
    }
}

/// A pure function `(zeta, z) -> DoubleForm` with an identity and claimed admissible type.
#[derive(Clone)]
pub struct KernelEvaluator {
    pub id: KernelId,
    pub claimed_type: Option<i32>,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for KernelEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelEvaluator({})", self.id)
    }
}

impl KernelEvaluator {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        q: Option<usize>,
        claimed_type: Option<i32>,
        f: impl Fn(&[C], &[C]) -> Result<DoubleForm> + Send + Sync + 'static,
    ) -> Self {
        Self { id: KernelId { name: name.into(), n, q }, claimed_type, eval: Arc::new(f) }
    }

    pub fn n(&self) -> usize {
        self.id.n
    }

    pub fn eval(&self, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
        (self.eval)(zeta, z)
    }

    fn derived(&self, name: String, claimed_type: Option<i32>, f: impl Fn(&[C], &[C]) -> Result<DoubleForm> + Send + Sync + 'static) -> Self {
        Self { id: KernelId { name, n: self.id.n, q: self.id.q }, claimed_type, eval: Arc::new(f) }
    }

    /// `(zeta, z) -> conj(K(z, zeta))`, transposed coefficientwise.
    pub fn adjoint(&self) -> Self {
        let k = self.clone();
        let name = match self.id.name.strip_suffix('*') {
            Some(base) => base.to_string(),
            None => format!("{}*", self.id.name),
        };
        self.derived(name, self.claimed_type, move |zeta, z| Ok(k.eval(z, zeta)?.conj().transpose_vars()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        self.derived(format!("({} + {})", self.id.name, other.id.name), None, move |zeta, z| {
            a.eval(zeta, z)?.add(&b.eval(zeta, z)?)
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        self.derived(format!("({} - {})", self.id.name, other.id.name), None, move |zeta, z| {
            a.eval(zeta, z)?.sub(&b.eval(zeta, z)?)
        })
    }

    pub fn scale(&self, s: C) -> Self {
        let a = self.clone();
        self.derived(format!("{s}*{}", self.id.name), self.claimed_type, move |zeta, z| Ok(a.eval(zeta, z)?.scale(s)))
    }

    /// Pointwise Hodge star in `zeta` for the Levi metric at `zeta`.
    pub fn star_zeta(&self, dom: &Arc<DomainModel>) -> Self {
        let (a, d) = (self.clone(), dom.clone());
        self.derived(format!("*{}", self.id.name), None, move |zeta, z| {
            a.eval(zeta, z)?.hodge_star(&d.levi(zeta)?, Var::Zeta)
        })
    }
}

/// `binom(n, k)` as a float, zero outside `0 <= k <= n`.
pub fn binom(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `a_{q mu nu} = (2 pi i)^{-n} binom(mu+nu, mu) binom(n-2-mu-nu, q-mu)`.
pub fn coefficient_a(n: usize, q: usize, mu: usize, nu: usize) -> Result<C> {
    if n < 2 || q > n - 2 || mu > n - q - 2 || nu > q {
        return Err(Error::OutOfRange(format!("a(n={n}, q={q}, mu={mu}, nu={nu})")));
    }
    let b = binom((mu + nu) as i64, mu as i64) * binom(n as i64 - 2 - (mu + nu) as i64, q as i64 - mu as i64);
    Ok(C::new(0.0, 2.0 * PI).powi(-(n as i32)) * b)
}

/// `c_{nq} = 2^{n-2} (2 pi)^{-n} q! (n-q-2)!`.
pub fn coefficient_c(n: usize, q: usize) -> Result<f64> {
    if n < 2 || q > n - 2 {
        return Err(Error::OutOfRange(format!("c(n={n}, q={q})")));
    }
    Ok(2f64.powi(n as i32 - 2) * (2.0 * PI).powi(-(n as i32)) * factorial(q) * factorial(n - q - 2))
}

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// Sum of `c_{pk} gen_a(p) ^ gen_b(k)` over all index pairs.
fn two_form(n: usize, sa: Slot, sb: Slot, coef: impl Fn(usize, usize) -> C) -> DoubleForm {
    let mut out = DoubleForm::zero(n);
    for p in 0..n {
        let gp = DoubleForm::gen(n, sa, p, re(1.0));
        for k in 0..n {
            let c = coef(p, k);
            if c != C::new(0.0, 0.0) {
                let gk = DoubleForm::gen(n, sb, k, c);
                out = out.add(&gp.wedge(&gk).expect("coordinate frame")).expect("coordinate frame");
            }
        }
    }
    out
}

fn nonzero_phi(phi: C) -> Result<C> {
    if phi.norm() == 0.0 || !phi.is_finite() {
        Err(Error::PoleOnDiagonal)
    } else {
        Ok(phi)
    }
}

fn nonzero_rho2(dom: &DomainModel, zeta: &[C], z: &[C]) -> Result<f64> {
    let r2 = dom.rho2(zeta, z)?;
    if r2 <= 0.0 {
        Err(Error::PoleOnDiagonal)
    } else {
        Ok(r2)
    }
}

/// `alpha = xi(zeta) dr(zeta) / Phi(zeta, z)`.
pub fn alpha(dom: &DomainModel, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let phi = nonzero_phi(dom.phi(zeta, z)?)?;
    let xi = dom.xi(zeta);
    let g: Vec<C> = dom.grad(zeta).iter().map(|c| c * xi / phi).collect();
    Ok(DoubleForm::one_form(dom.n, Slot::HoloZeta, &g))
}

/// `beta = d_zeta rho^2 / rho^2`.
pub fn beta(dom: &DomainModel, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let r2 = nonzero_rho2(dom, zeta, z)?;
    let g: Vec<C> = (0..dom.n).map(|k| dom.rho2_deriv(zeta, z, &[Dv::Zeta(k)]) / r2).collect();
    Ok(DoubleForm::one_form(dom.n, Slot::HoloZeta, &g))
}

/// `dbar_zeta alpha`.
pub fn dbar_zeta_alpha(dom: &DomainModel, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let n = dom.n;
    let phi = nonzero_phi(dom.phi(zeta, z)?)?;
    let (xi, dxi) = crate::domain::xi_of(dom.r(zeta), dom.delta);
    let g = dom.grad(zeta);
    Ok(two_form(n, Slot::AntiZeta, Slot::HoloZeta, |p, k| {
        let r_pbar = g[p].conj();
        let r_kpbar = dom.d(zeta, &[k], &[p]);
        let phi_pbar = dom.phi_deriv(zeta, z, &[Dv::ZetaBar(p)]);
        dxi * r_pbar * g[k] / phi + xi * r_kpbar / phi - xi * g[k] * phi_pbar / (phi * phi)
    }))
}

/// `dbar_z alpha` (zero for the Levi polynomial, which is holomorphic in `z`).
pub fn dbar_z_alpha(dom: &DomainModel, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let n = dom.n;
    let phi = nonzero_phi(dom.phi(zeta, z)?)?;
    let xi = dom.xi(zeta);
    let g = dom.grad(zeta);
    Ok(two_form(n, Slot::AntiZ, Slot::HoloZeta, |p, k| {
        -xi * g[k] * dom.phi_deriv(zeta, z, &[Dv::ZBar(p)]) / (phi * phi)
    }))
}

fn dbar_beta(dom: &DomainModel, zeta: &[C], z: &[C], on_z: bool) -> Result<DoubleForm> {
    let n = dom.n;
    let r2 = nonzero_rho2(dom, zeta, z)?;
    let dk: Vec<C> = (0..n).map(|k| dom.rho2_deriv(zeta, z, &[Dv::Zeta(k)])).collect();
    let slot = if on_z { Slot::AntiZ } else { Slot::AntiZeta };
    Ok(two_form(n, slot, Slot::HoloZeta, |p, k| {
        let dp = if on_z { Dv::ZBar(p) } else { Dv::ZetaBar(p) };
        let mixed = dom.rho2_deriv(zeta, z, &[Dv::Zeta(k), dp]);
        let single = dom.rho2_deriv(zeta, z, &[dp]);
        mixed / r2 - dk[k] * single / (r2 * r2)
    }))
}

/// `dbar_zeta beta`.
pub fn dbar_zeta_beta(dom: &DomainModel, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    dbar_beta(dom, zeta, z, false)
}

/// `dbar_z beta`.
pub fn dbar_z_beta(dom: &DomainModel, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    dbar_beta(dom, zeta, z, true)
}

/// `dbar_zeta d_z rho^2 = sum rho^2_{zetabar_p z_k} dzetabar_p ^ dz_k`.
pub fn dbar_del_rho2(dom: &DomainModel, zeta: &[C], z: &[C]) -> DoubleForm {
    two_form(dom.n, Slot::AntiZeta, Slot::HoloZ, |p, k| dom.rho2_deriv(zeta, z, &[Dv::Z(k), Dv::ZetaBar(p)]))
}

fn check_q(n: usize, q: usize, max: usize) -> Result<()> {
    if n < 2 || q > max {
        Err(Error::OutOfRange(format!("q = {q} for n = {n}")))
    } else {
        Ok(())
    }
}

/// `C_q = sum_{mu, nu} a_{q mu nu} C_{q mu nu}`.
pub fn cq(dom: &DomainModel, q: usize, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let n = dom.n;
    check_q(n, q, n.saturating_sub(2))?;
    let a = alpha(dom, zeta, z)?;
    let b = beta(dom, zeta, z)?;
    let da = dbar_zeta_alpha(dom, zeta, z)?;
    let db = dbar_zeta_beta(dom, zeta, z)?;
    let dza = dbar_z_alpha(dom, zeta, z)?;
    let dzb = dbar_z_beta(dom, zeta, z)?;
    let ab = a.wedge(&b)?;
    let mut total = DoubleForm::zero(n);
    for mu in 0..=n - q - 2 {
        for nu in 0..=q {
            let coef = coefficient_a(n, q, mu, nu)?;
            if coef == C::new(0.0, 0.0) {
                continue;
            }
            let term = ab
                .wedge(&da.pow(mu)?)?
                .wedge(&db.pow(n - q - mu - 2)?)?
                .wedge(&dza.pow(nu)?)?
                .wedge(&dzb.pow(q - nu)?)?;
            total = total.add(&term.scale(coef))?;
        }
    }
    Ok(total)
}

/// `L_q = (-1)^{q+1} *_zeta conj(C_q)`.
pub fn lq_value(dom: &DomainModel, q: usize, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let s = if q % 2 == 0 { -1.0 } else { 1.0 };
    Ok(cq(dom, q, zeta, z)?.conj().hodge_star(&dom.levi(zeta)?, Var::Zeta)?.scale_re(s))
}

/// `K_q = (-1)^{q(q-1)/2} binom(n-1, q) (2 pi i)^{-n} alpha ^ (dbar_zeta alpha)^{n-q-1} ^ (dbar_z alpha)^q`.
pub fn kq_value(dom: &DomainModel, q: usize, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let n = dom.n;
    check_q(n, q, n - 1)?;
    let sign = if (q * q.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let coef = C::new(0.0, 2.0 * PI).powi(-(n as i32)) * sign * binom(n as i64 - 1, q as i64);
    let a = alpha(dom, zeta, z)?;
    let da = dbar_zeta_alpha(dom, zeta, z)?;
    let dza = dbar_z_alpha(dom, zeta, z)?;
    Ok(a.wedge(&da.pow(n - q - 1)?)?.wedge(&dza.pow(q)?)?.scale(coef))
}

/// `Gamma_{0q} = ((n-2)! / (2 pi^n)) rho^{-(2n-2)} (dbar_zeta d_z rho^2)^q`.
pub fn gamma0q_value(dom: &DomainModel, q: usize, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let n = dom.n;
    check_q(n, q, n - 1)?;
    let r2 = nonzero_rho2(dom, zeta, z)?;
    let c = factorial(n - 2) / (2.0 * PI.powi(n as i32)) * r2.powi(1 - n as i32);
    Ok(dbar_del_rho2(dom, zeta, z).pow(q)?.scale_re(c))
}

/// Finite-difference step: absolute, or relative to `|zeta - z|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Step {
    Absolute(f64),
    Relative(f64),
}

impl Default for Step {
    fn default() -> Self {
        Step::Relative(1e-4)
    }
}

impl Step {
    /// Same kind of step, multiplied by `f`.
    pub fn scaled(self, f: f64) -> Step {
        match self {
            Step::Absolute(h) => Step::Absolute(h * f),
            Step::Relative(h) => Step::Relative(h * f),
        }
    }

    fn resolve(self, zeta: &[C], z: &[C]) -> Result<f64> {
        let dist = zeta.iter().zip(z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let h = match self {
            Step::Absolute(h) => h,
            Step::Relative(f) => f * dist,
        };
        if !(h > 0.0) || dist <= 2.0 * h {
            return Err(Error::StepTooLarge);
        }
        Ok(h)
    }
}

/// Wirtinger partial of every coefficient: central differences with one Richardson level.
fn partial(k: &KernelEvaluator, zeta: &[C], z: &[C], var: Var, j: usize, hol: bool, h: f64) -> Result<DoubleForm> {
    let shifted = |dir: C, step: f64| -> Result<DoubleForm> {
        let mut a = zeta.to_vec();
        let mut b = z.to_vec();
        let mut am = zeta.to_vec();
        let mut bm = z.to_vec();
        match var {
            Var::Zeta => {
                a[j] += dir * step;
                am[j] -= dir * step;
            }
            Var::Z => {
                b[j] += dir * step;
                bm[j] -= dir * step;
            }
        }
        Ok(k.eval(&a, &b)?.sub(&k.eval(&am, &bm)?)?.scale_re(1.0 / (2.0 * step)))
    };
    let rich = |dir: C| -> Result<DoubleForm> {
        let coarse = shifted(dir, h)?;
        let fine = shifted(dir, 0.5 * h)?;
        Ok(fine.scale_re(4.0 / 3.0).sub(&coarse.scale_re(1.0 / 3.0))?)
    };
    let dx = rich(re(1.0))?;
    let dy = rich(C::new(0.0, 1.0))?;
    // d/dzeta = (d/dx - i d/dy)/2, d/dzetabar = (d/dx + i d/dy)/2.
    let s = if hol { C::new(0.0, -1.0) } else { C::new(0.0, 1.0) };
    Ok(dx.add(&dy.scale(s))?.scale_re(0.5))
}

fn fd_operator(k: &KernelEvaluator, step: Step, var: Var, hol: bool) -> impl Fn(&[C], &[C]) -> Result<DoubleForm> + Send + Sync + 'static {
    let k = k.clone();
    let n = k.n();
    let slot = match (var, hol) {
        (Var::Zeta, true) => Slot::HoloZeta,
        (Var::Zeta, false) => Slot::AntiZeta,
        (Var::Z, true) => Slot::HoloZ,
        (Var::Z, false) => Slot::AntiZ,
    };
    move |zeta: &[C], z: &[C]| {
        let h = step.resolve(zeta, z)?;
        let mut out = DoubleForm::zero(n);
        for j in 0..n {
            let d = partial(&k, zeta, z, var, j, hol, h)?;
            out = out.add(&DoubleForm::gen(n, slot, j, re(1.0)).wedge(&d)?)?;
        }
        Ok(out)
    }
}

/// `dbar_zeta K` by finite differences.
pub fn kernel_dbar_zeta(k: &KernelEvaluator, step: Step) -> KernelEvaluator {
    let t = k.claimed_type.map(|t| t - 1);
    k.derived(format!("dbar_zeta {}", k.id.name), t, fd_operator(k, step, Var::Zeta, false))
}

/// `d_zeta K` by finite differences.
pub fn kernel_del_zeta(k: &KernelEvaluator, step: Step) -> KernelEvaluator {
    let t = k.claimed_type.map(|t| t - 1);
    k.derived(format!("d_zeta {}", k.id.name), t, fd_operator(k, step, Var::Zeta, true))
}

/// `d_z K` by finite differences.
pub fn kernel_del_z(k: &KernelEvaluator, step: Step) -> KernelEvaluator {
    let t = k.claimed_type.map(|t| t - 1);
    k.derived(format!("d_z {}", k.id.name), t, fd_operator(k, step, Var::Z, true))
}

/// `dbar_z K` by finite differences.
pub fn kernel_dbar_z(k: &KernelEvaluator, step: Step) -> KernelEvaluator {
    let t = k.claimed_type.map(|t| t - 1);
    k.derived(format!("dbar_z {}", k.id.name), t, fd_operator(k, step, Var::Z, false))
}

/// `vartheta_zeta K = -* d_zeta * K` for the Levi metric at `zeta`.
pub fn kernel_vartheta_zeta(k: &KernelEvaluator, dom: &Arc<DomainModel>, step: Step) -> KernelEvaluator {
    let inner = kernel_del_zeta(&k.star_zeta(dom), step);
    let outer = inner.star_zeta(dom).scale(re(-1.0));
    let t = k.claimed_type.map(|t| t - 1);
    k.derived(format!("vartheta_zeta {}", k.id.name), t, move |zeta, z| outer.eval(zeta, z))
}

/// Kernel `L_q`.
pub fn lq(dom: &Arc<DomainModel>, q: usize) -> KernelEvaluator {
    let d = dom.clone();
    KernelEvaluator::new("Lq", dom.n, Some(q), Some(2), move |zeta, z| lq_value(&d, q, zeta, z))
}

/// Kernel `K_q`.
pub fn kq(dom: &Arc<DomainModel>, q: usize) -> KernelEvaluator {
    let d = dom.clone();
    KernelEvaluator::new("Kq", dom.n, Some(q), None, move |zeta, z| kq_value(&d, q, zeta, z))
}

/// Kernel `Gamma_{0q}`.
pub fn gamma0q(dom: &Arc<DomainModel>, q: usize) -> KernelEvaluator {
    let d = dom.clone();
    KernelEvaluator::new("Gamma0q", dom.n, Some(q), Some(2), move |zeta, z| gamma0q_value(&d, q, zeta, z))
}

/// Kernel `C_q`.
pub fn cq_kernel(dom: &Arc<DomainModel>, q: usize) -> KernelEvaluator {
    let d = dom.clone();
    KernelEvaluator::new("Cq", dom.n, Some(q), None, move |zeta, z| cq(&d, q, zeta, z))
}

/// `T_q = vartheta_zeta L_q - d_z L_{q-1} + dbar_zeta Gamma_{0q}` for `q >= 1`, and
/// `T_0 = vartheta_zeta L_0 - *conj(K_0) + dbar_zeta Gamma_{00}`.
pub fn tq(dom: &Arc<DomainModel>, q: usize, step: Step) -> Result<KernelEvaluator> {
    let n = dom.n;
    check_q(n, q, n - 2)?;
    let first = kernel_vartheta_zeta(&lq(dom, q), dom, step);
    let last = kernel_dbar_zeta(&gamma0q(dom, q), step);
    let middle = if q >= 1 {
        kernel_del_z(&lq(dom, q - 1), step)
    } else {
        let d = dom.clone();
        KernelEvaluator::new("*conj(K0)", n, Some(0), None, move |zeta, z| {
            kq_value(&d, 0, zeta, z)?.conj().hodge_star(&d.levi(zeta)?, Var::Zeta)
        })
    };
    let sum = first.sub(&middle).add(&last);
    Ok(KernelEvaluator { id: KernelId { name: "Tq".into(), n, q: Some(q) }, claimed_type: Some(1), eval: sum.eval })
}

/// Frame 1-forms `conj(omega^a)` at `zeta` and `Theta^b` at `z`, in coordinates.
pub struct AdaptedForms {
    pub omega_bar: Vec<DoubleForm>,
    pub theta: Vec<DoubleForm>,
}

impl AdaptedForms {
    pub fn new(g: &GeoPair) -> Self {
        let n = g.zeta.len();
        let ob = (0..n)
            .map(|a| {
                let row: Vec<C> = g.frame.row(a).iter().map(|c| c.conj()).collect();
                DoubleForm::one_form(n, Slot::AntiZeta, &row)
            })
            .collect();
        let th = (0..n).map(|b| DoubleForm::one_form(n, Slot::HoloZ, &g.frame_star.row(b))).collect();
        Self { omega_bar: ob, theta: th }
    }

    /// `conj(omega)^{i_1} ^ ... ` in the given label order (0-based).
    pub fn omega_bar_word(&self, labels: &[usize]) -> DoubleForm {
        let n = self.omega_bar.len();
        labels.iter().fold(DoubleForm::scalar(n, re(1.0)), |acc, &a| acc.wedge(&self.omega_bar[a]).expect("frame"))
    }

    pub fn theta_word(&self, labels: &[usize]) -> DoubleForm {
        let n = self.theta.len();
        labels.iter().fold(DoubleForm::scalar(n, re(1.0)), |acc, &a| acc.wedge(&self.theta[a]).expect("frame"))
    }
}

/// `conj(L_j) rho^2` and `L_j rho^2` for every frame label `j`.
pub fn frame_rho2(dom: &DomainModel, g: &GeoPair) -> (Vec<C>, Vec<C>) {
    let n = dom.n;
    let anti: Vec<C> = (0..n).map(|k| dom.rho2_deriv(&g.zeta, &g.z, &[Dv::ZetaBar(k)])).collect();
    let hol: Vec<C> = (0..n).map(|k| dom.rho2_deriv(&g.zeta, &g.z, &[Dv::Zeta(k)])).collect();
    ((0..n).map(|j| g.frame.lbar(j, &anti)).collect(), (0..n).map(|j| g.frame.l(j, &hol)).collect())
}

/// `Lambda_j f` at `z` from the `z`-holomorphic partials of `f`.
pub fn lambda(frame_star: &Coframe, j: usize, d_hol_z: &[C]) -> C {
    frame_star.l(j, d_hol_z)
}

fn labels(l: &MultiIndex) -> Vec<usize> {
    l.indices().iter().map(|i| i - 1).collect()
}

/// Printed main term of `L_q`:
/// `c_{nq} sum binom(n-2-mu, q) conj(L_j) rho^2 / (conj(Phi)^{mu+1} P^{n-mu-1}) gamma conj(omega)^{njL} ^ Theta^L`.
pub fn lq_main_value(dom: &DomainModel, q: usize, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let n = dom.n;
    check_q(n, q, n - 2)?;
    let g = dom.geo_pair(zeta, z)?;
    let fr = AdaptedForms::new(&g);
    let (lbar_rho, _) = frame_rho2(dom, &g);
    let c = coefficient_c(n, q)?;
    let phib = g.phi.conj();
    let mut total = DoubleForm::zero(n);
    for l in MultiIndex::all(n, q) {
        let ll = labels(&l);
        let th = fr.theta_word(&ll);
        for j in 0..n - 1 {
            let mut word = vec![n - 1, j];
            word.extend_from_slice(&ll);
            let w = fr.omega_bar_word(&word);
            if w.is_zero() {
                continue;
            }
            let mut s = C::new(0.0, 0.0);
            for mu in 0..=n - q - 2 {
                s += binom((n - 2 - mu) as i64, q as i64) * lbar_rho[j]
                    / (phib.powi(mu as i32 + 1) * g.big_p.powi((n - mu - 1) as i32));
            }
            total = total.add(&w.wedge(&th)?.scale(s * c * g.gamma))?;
        }
    }
    Ok(total)
}

/// `H_L` from the explicit formulas, for one multi-index `L` with `|L| = q`.
pub fn h_l(dom: &DomainModel, q: usize, l: &MultiIndex, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let n = dom.n;
    check_q(n, q, n - 2)?;
    if l.len() != q {
        return Err(Error::OutOfRange(format!("|L| = {} but q = {q}", l.len())));
    }
    let g = dom.geo_pair(zeta, z)?;
    let fr = AdaptedForms::new(&g);
    let (lbar_rho, _) = frame_rho2(dom, &g);
    let ll = labels(l);
    let p = g.big_p;
    let nn = n as i32;
    let mut total = DoubleForm::zero(n);
    if l.contains(n) {
        let qq: Vec<usize> = ll.iter().copied().filter(|&a| a != n - 1).collect();
        let coef = -2f64.powi(nn - 1) * (2.0 * PI).powi(-nn) * factorial(n - 1) / p.powi(nn);
        for j in (0..n - 1).filter(|j| !qq.contains(j)) {
            let mut word = vec![n - 1, j];
            word.extend_from_slice(&qq);
            total = total.add(&fr.omega_bar_word(&word).scale(lbar_rho[j] * coef))?;
        }
        return Ok(total);
    }
    let c = coefficient_c(n, q)?;
    let phib = g.phi.conj();
    let (gam, gs) = (g.gamma, g.gamma_star);
    for j in (0..n - 1).filter(|j| !ll.contains(j)) {
        let mut s = C::new(0.0, 0.0);
        for mu in 0..=n - q - 2 {
            s += binom((n - mu - 2) as i64, q as i64) * gam * gam * (mu as f64 + 1.0) * lbar_rho[j]
                / (phib.powi(mu as i32 + 2) * p.powi((n - mu - 1) as i32));
        }
        s += 2.0 * binom(n as i64 - 2, q as i64) * (n as f64 - 1.0) * (gam / gs) * g.phi * lbar_rho[j]
            / (phib * p.powi(nn));
        let mut word = vec![j];
        word.extend_from_slice(&ll);
        total = total.add(&fr.omega_bar_word(&word).scale(-c * s))?;
    }
    let mut word = vec![n - 1];
    word.extend_from_slice(&ll);
    let last = 2f64.powi(nn - 2) * (2.0 * PI).powi(-nn) * factorial(n - 1) * 4.0 * g.phi / (gam * p.powi(nn));
    total = total.add(&fr.omega_bar_word(&word).scale(last))?;
    Ok(total)
}

/// `G_L` from the explicit formulas, for one multi-index `L` with `|L| = q`.
pub fn g_l(dom: &DomainModel, q: usize, l: &MultiIndex, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let n = dom.n;
    check_q(n, q, n - 2)?;
    if l.len() != q {
        return Err(Error::OutOfRange(format!("|L| = {} but q = {q}", l.len())));
    }
    let g = dom.geo_pair(zeta, z)?;
    let fr = AdaptedForms::new(&g);
    let ll = labels(l);
    let p = g.big_p;
    let nn = n as i32;
    if l.contains(n) {
        let qq: Vec<usize> = ll.iter().copied().filter(|&a| a != n - 1).collect();
        let mut word = vec![n - 1];
        word.extend_from_slice(&qq);
        let coef = -2f64.powi(nn - 1) * factorial(n - 2) * (2.0 * PI).powi(-nn) / p.powi(nn - 1);
        return Ok(fr.omega_bar_word(&word).scale_re(coef));
    }
    Ok(fr.omega_bar_word(&ll).scale(coefficient_c(n, q)? * g_scalar(n, q, &g)))
}

/// Scalar factor of `G_L`, `n` not in `L`, without `c_{nq}`.
fn g_scalar(n: usize, q: usize, g: &GeoPair) -> C {
    let phib = g.phi.conj();
    let p = g.big_p;
    let mut s = C::new(0.0, 0.0);
    for mu in 0..=n - q - 2 {
        s += binom((n - mu - 2) as i64, q as i64) * g.gamma * g.gamma * (mu as f64 + 1.0) / (n - mu - 2) as f64
            / (phib.powi(mu as i32 + 2) * p.powi((n - mu - 2) as i32));
    }
    s + binom(n as i64 - 2, q as i64) * (g.gamma / g.gamma_star) * 2.0 * g.phi / (phib * p.powi(n as i32 - 1))
}

/// `sum_L G_L ^ Theta^L` or `sum_L H_L ^ Theta^L`.
fn sum_over_l(
    dom: &DomainModel,
    q: usize,
    zeta: &[C],
    z: &[C],
    part: fn(&DomainModel, usize, &MultiIndex, &[C], &[C]) -> Result<DoubleForm>,
) -> Result<DoubleForm> {
    let n = dom.n;
    let g = dom.geo_pair(zeta, z)?;
    let fr = AdaptedForms::new(&g);
    let mut total = DoubleForm::zero(n);
    for l in MultiIndex::all(n, q) {
        let ll = labels(&l);
        // Labels of L as written: n first when n is in L.
        let word: Vec<usize> = if l.contains(n) {
            std::iter::once(n - 1).chain(ll.iter().copied().filter(|&a| a != n - 1)).collect()
        } else {
            ll
        };
        total = total.add(&part(dom, q, &l, zeta, z)?.wedge(&fr.theta_word(&word))?)?;
    }
    Ok(total)
}

/// Split of `-1/2 dbar_zeta d_z rho^2` into `tau` (no `conj(omega^n)`, no `Theta^n`) and `nu`.
pub fn tau_nu(dom: &DomainModel, g: &GeoPair) -> (DoubleForm, DoubleForm) {
    let n = dom.n;
    let omega = dbar_del_rho2(dom, &g.zeta, &g.z).scale_re(-0.5);
    let fr = AdaptedForms::new(g);
    let mut tau = DoubleForm::zero(n);
    for a in 0..n - 1 {
        for b in 0..n - 1 {
            let mut m = C::new(0.0, 0.0);
            for p in 0..n {
                for k in 0..n {
                    let cpk = two_form_coef(&omega, n, p, k);
                    m += cpk * g.frame.dual[(p, a)].conj() * g.frame_star.dual[(k, b)];
                }
            }
            tau = tau.add(&fr.omega_bar[a].wedge(&fr.theta[b]).expect("frame").scale(m)).expect("frame");
        }
    }
    let nu = omega.sub(&tau).expect("frame");
    (tau, nu)
}

fn two_form_coef(f: &DoubleForm, n: usize, p: usize, k: usize) -> C {
    let b = crate::forms::Blade(crate::forms::Blade::gen(n, Slot::AntiZeta, p).0 | crate::forms::Blade::gen(n, Slot::HoloZ, k).0);
    f.get(b)
}

/// Non-isotropic part `G_q` of the Neumann kernel, assembled from `tau` and `nu`.
pub fn gq_value(dom: &DomainModel, q: usize, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    let n = dom.n;
    if n < 3 || q < 1 || q > n - 2 {
        return Err(Error::OutOfRange(format!("N_q needs n >= 3 and 1 <= q <= n-2, got n={n}, q={q}")));
    }
    let g = dom.geo_pair(zeta, z)?;
    let (tau, nu) = tau_nu(dom, &g);
    let nn = n as i32;
    let a = 2f64.powi(nn - 2) * (2.0 * PI).powi(-nn) * factorial(n - q - 2) * g_scalar(n, q, &g);
    let b = 2f64.powi(nn - 1) * factorial(n - 2) / (factorial(q - 1) * (2.0 * PI).powi(nn)) / g.big_p.powi(nn - 1);
    let first = tau.pow(q)?.scale(a);
    let second = tau.pow(q - 1)?.wedge(&nu)?.scale_re(b);
    first.sub(&second)
}

/// Principal Neumann kernel `N_q = G_q + Gamma_{0q}`.
pub fn nq_value(dom: &DomainModel, q: usize, zeta: &[C], z: &[C]) -> Result<DoubleForm> {
    gq_value(dom, q, zeta, z)?.add(&gamma0q_value(dom, q, zeta, z)?)
}

/// Kernel `N_q`.
pub fn nq(dom: &Arc<DomainModel>, q: usize) -> KernelEvaluator {
    let d = dom.clone();
    KernelEvaluator::new("Nq", dom.n, Some(q), Some(2), move |zeta, z| nq_value(&d, q, zeta, z))
}

/// Kernel `G_q` (the non-isotropic part of `N_q`).
pub fn gq(dom: &Arc<DomainModel>, q: usize) -> KernelEvaluator {
    let d = dom.clone();
    KernelEvaluator::new("Gq", dom.n, Some(q), Some(2), move |zeta, z| gq_value(&d, q, zeta, z))
}

/// Kernel `G_L` for one multi-index.
pub fn g_l_kernel(dom: &Arc<DomainModel>, q: usize, l: MultiIndex) -> KernelEvaluator {
    let d = dom.clone();
    KernelEvaluator::new(format!("G{:?}", l.indices()), dom.n, Some(q), Some(2), move |zeta, z| g_l(&d, q, &l, zeta, z))
}

/// Kernel `H_L` for one multi-index.
pub fn h_l_kernel(dom: &Arc<DomainModel>, q: usize, l: MultiIndex) -> KernelEvaluator {
    let d = dom.clone();
    KernelEvaluator::new(format!("H{:?}", l.indices()), dom.n, Some(q), Some(1), move |zeta, z| h_l(&d, q, &l, zeta, z))
}

/// `H_q = sum_L H_L ^ Theta^L`.
pub fn hq(dom: &Arc<DomainModel>, q: usize) -> KernelEvaluator {
    let d = dom.clone();
    KernelEvaluator::new("Hq", dom.n, Some(q), Some(1), move |zeta, z| sum_over_l(&d, q, zeta, z, h_l))
}

/// `G_q` as `sum_L G_L ^ Theta^L`.
pub fn gq_from_parts(dom: &Arc<DomainModel>, q: usize) -> KernelEvaluator {
    let d = dom.clone();
    KernelEvaluator::new("GqParts", dom.n, Some(q), Some(2), move |zeta, z| sum_over_l(&d, q, zeta, z, g_l))
}

/// Printed main term of `L_q`.
pub fn lq_main(dom: &Arc<DomainModel>, q: usize) -> KernelEvaluator {
    let d = dom.clone();
    KernelEvaluator::new("LqMain", dom.n, Some(q), Some(2), move |zeta, z| lq_main_value(&d, q, zeta, z))
}

/// Scalar isotropic model kernel of class `E_{1-2n}`: `conj(zeta_1 - z_1) / |zeta - z|^{2n}`.
pub fn e1_model(n: usize) -> KernelEvaluator {
    KernelEvaluator::new("E1", n, None, Some(1), move |zeta, z| {
        let d2: f64 = zeta.iter().zip(z).map(|(a, b)| (a - b).norm_sqr()).sum();
        if d2 == 0.0 {
            return Err(Error::PoleOnDiagonal);
        }
        Ok(DoubleForm::scalar(n, (zeta[0] - z[0]).conj() / d2.powi(n as i32)))
    })
}

/// Constant scalar kernel.
pub fn constant(n: usize, c: C) -> KernelEvaluator {
    KernelEvaluator::new("const", n, None, None, move |_, _| Ok(DoubleForm::scalar(n, c)))
}

/// Build a kernel from its textual id (`alpha`, `beta`, `Cq`, `Lq`, `LqMain`, `Kq`,
/// `Gamma0q`, `Tq`, `Nq`, `Gq`, `Hq`, `E1`; `Gamma00` style suffixes set `q`).
pub fn by_name(dom: &Arc<DomainModel>, name: &str, q: usize, step: Step) -> Result<KernelEvaluator> {
    let n = dom.n;
    let d = dom.clone();
    let (base, q) = match name.strip_prefix("Gamma0") {
        Some(rest) if rest != "q" => ("Gamma0q", rest.parse().map_err(|_| Error::UnknownKernel(name.into()))?),
        _ => (name, q),
    };
    Ok(match base {
        "alpha" => KernelEvaluator::new("alpha", n, None, None, move |a, b| alpha(&d, a, b)),
        "beta" => KernelEvaluator::new("beta", n, None, None, move |a, b| beta(&d, a, b)),
        "Cq" => cq_kernel(dom, q),
        "Lq" => lq(dom, q),
        "LqMain" => lq_main(dom, q),
        "Kq" => kq(dom, q),
        "Gamma0q" => gamma0q(dom, q),
        "Tq" => tq(dom, q, step)?,
        "Nq" => nq(dom, q),
        "Gq" => gq(dom, q),
        "Hq" => hq(dom, q),
        "E1" => e1_model(n),
        _ => return Err(Error::UnknownKernel(name.into())),
    })
}

/// Metric used by the kernels at a point.
pub fn metric_at(dom: &DomainModel, zeta: &[C]) -> Result<Metric> {
    dom.levi(zeta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn coefficients() {
        let a = coefficient_a(3, 1, 0, 0).unwrap();
        assert!((a - C::new(0.0, 2.0 * PI).powi(-3)).norm() < 1e-15);
        assert_eq!(coefficient_a(3, 1, 0, 1).unwrap(), c(0.0, 0.0));
        assert!((coefficient_c(3, 1).unwrap() - 2.0 / (2.0 * PI).powi(3)).abs() < 1e-15);
        assert!(coefficient_a(3, 2, 0, 0).is_err());
    }

    #[test]
    fn alpha_on_ball() {
        let dom = DomainModel::ball(2);
        let a = alpha(&dom, &[c(1.0, 0.0), c(0.0, 0.0)], &[c(0.9, 0.0), c(0.0, 0.0)]).unwrap();
        let expect = DoubleForm::one_form(2, Slot::HoloZeta, &[c(10.0, 0.0), c(0.0, 0.0)]);
        assert!(a.dist(&expect) < 1e-12);
    }

    #[test]
    fn alpha_vanishes_off_patch() {
        let dom = DomainModel::ball(2);
        let a = alpha(&dom, &[c(0.1, 0.0), c(0.0, 0.0)], &[c(0.9, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(a.is_zero());
    }

    #[test]
    fn c0_in_dimension_two_is_alpha_beta() {
        let dom = DomainModel::ball(2);
        let (zeta, z) = ([c(0.95, 0.1), c(0.1, 0.0)], [c(0.7, 0.0), c(0.2, 0.1)]);
        let c0 = cq(&dom, 0, &zeta, &z).unwrap();
        let ab = alpha(&dom, &zeta, &z).unwrap().wedge(&beta(&dom, &zeta, &z).unwrap()).unwrap();
        assert!(c0.dist(&ab.scale(coefficient_a(2, 0, 0, 0).unwrap())) < 1e-12);
    }

    #[test]
    fn step_too_large_near_diagonal() {
        let dom = Arc::new(DomainModel::ball(2));
        let k = kernel_dbar_zeta(&gamma0q(&dom, 0), Step::Absolute(0.1));
        let r = k.eval(&[c(0.5, 0.0), c(0.0, 0.0)], &[c(0.45, 0.0), c(0.0, 0.0)]);
        assert_eq!(r.unwrap_err(), Error::StepTooLarge);
    }
}
