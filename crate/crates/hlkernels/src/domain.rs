//! Model domains `{r < 0}` with polynomial defining functions, the Levi
//! metric, `gamma = |dr|`, boundary-adapted coframes, and the pair functions
//! `rho^2`, `F`, `Phi` and `P` together with their exact derivatives.

use crate::error::{Error, Result};
use crate::forms::{hermitian_eigenvalues, Metric};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Smallest `gamma` at which an adapted frame is built.
pub const TOL_FRAME: f64 = 1e-8;
/// Default patching radius for `xi`.
pub const DEFAULT_DELTA: f64 = 0.15;

/// Monomial `coef * zeta^hol * conj(zeta)^anti`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coef: C,
    pub hol: Vec<u32>,
    pub anti: Vec<u32>,
}

/// Polynomial in `zeta` and `conj(zeta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    n: usize,
    terms: Vec<Monomial>,
}

fn falling(e: u32, k: u32) -> f64 {
    (0..k).map(|i| (e - i) as f64).product()
}

impl Poly {
    pub fn new(n: usize, terms: Vec<Monomial>) -> Self {
        Self { n, terms }
    }

    /// `d^|dh| / dzeta_dh  d^|da| / dzetabar_da` evaluated at `p` (indices 0-based, repeats allowed).
    pub fn deriv(&self, p: &[C], dh: &[usize], da: &[usize]) -> C {
        let mut ch = [0u32; crate::forms::MAX_N];
        let mut ca = [0u32; crate::forms::MAX_N];
        for &j in dh {
            ch[j] += 1;
        }
        for &j in da {
            ca[j] += 1;
        }
        let mut total = C::new(0.0, 0.0);
        'terms: for t in &self.terms {
            let mut v = t.coef;
            for j in 0..self.n {
                if t.hol[j] < ch[j] || t.anti[j] < ca[j] {
                    continue 'terms;
                }
                v *= falling(t.hol[j], ch[j]) * falling(t.anti[j], ca[j]);
                v *= p[j].powu(t.hol[j] - ch[j]) * p[j].conj().powu(t.anti[j] - ca[j]);
            }
            total += v;
        }
        total
    }
}

/// Built-in defining functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    /// `r = |zeta|^2 - 1`.
    Ball,
    /// `r = sum |zeta_j|^2 - 2 Re(zeta_1^2)`, a Morse boundary point at the origin.
    Pinched,
}

/// Derivatives of `r` at a point, keyed by sorted (holomorphic, antiholomorphic) index lists.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub order: usize,
    pub entries: BTreeMap<(Vec<usize>, Vec<usize>), C>,
}

impl Jet {
    pub fn get(&self, hol: &[usize], anti: &[usize]) -> C {
        let mut h = hol.to_vec();
        let mut a = anti.to_vec();
        h.sort_unstable();
        a.sort_unstable();
        self.entries.get(&(h, a)).copied().unwrap_or_default()
    }
}

/// A model domain near its boundary.
#[derive(Clone, Debug)]
pub struct DomainModel {
    pub kind: ModelKind,
    pub n: usize,
    poly: Poly,
    /// `U` is the box `|Re zeta_j|, |Im zeta_j| <= half_width`.
    pub half_width: f64,
    pub delta: f64,
    /// Largest `|zeta - z|` at which pair functions are evaluated.
    pub diag_radius: f64,
    pub critical_points: Vec<Vec<C>>,
}

fn sq_terms(n: usize) -> Vec<Monomial> {
    (0..n)
        .map(|j| {
            let mut e = vec![0; n];
            e[j] = 1;
            Monomial { coef: C::new(1.0, 0.0), hol: e.clone(), anti: e }
        })
        .collect()
}

impl DomainModel {
    pub fn ball(n: usize) -> Self {
        let mut terms = sq_terms(n);
        terms.push(Monomial { coef: C::new(-1.0, 0.0), hol: vec![0; n], anti: vec![0; n] });
        Self {
            kind: ModelKind::Ball,
            n,
            poly: Poly::new(n, terms),
            half_width: 2.0,
            delta: DEFAULT_DELTA,
            diag_radius: f64::INFINITY,
            critical_points: Vec::new(),
        }
    }

    pub fn pinched(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::OutOfRange(format!("pinched model needs n >= 2, got {n}")));
        }
        let mut terms = sq_terms(n);
        let mut e = vec![0; n];
        e[0] = 2;
        terms.push(Monomial { coef: C::new(-1.0, 0.0), hol: e.clone(), anti: vec![0; n] });
        terms.push(Monomial { coef: C::new(-1.0, 0.0), hol: vec![0; n], anti: e });
        Ok(Self {
            kind: ModelKind::Pinched,
            n,
            poly: Poly::new(n, terms),
            half_width: 1.0,
            delta: DEFAULT_DELTA,
            diag_radius: 0.5,
            critical_points: vec![vec![C::new(0.0, 0.0); n]],
        })
    }

    pub fn by_name(name: &str, n: usize) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ball" => Ok(Self::ball(n)),
            "pinched" => Self::pinched(n),
            other => Err(Error::Parse(format!("unknown domain {other}"))),
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Ball => "ball",
            ModelKind::Pinched => "pinched",
        }
    }

    pub fn in_u(&self, p: &[C]) -> bool {
        p.len() == self.n && p.iter().all(|c| c.re.abs() <= self.half_width && c.im.abs() <= self.half_width)
    }

    fn check_u(&self, p: &[C]) -> Result<()> {
        if p.len() != self.n {
            return Err(Error::DimensionMismatch(p.len(), self.n));
        }
        if self.in_u(p) {
            Ok(())
        } else {
            Err(Error::OutsideNeighborhood)
        }
    }

    /// Wirtinger derivative of `r`; no neighborhood check.
    pub fn d(&self, p: &[C], hol: &[usize], anti: &[usize]) -> C {
        self.poly.deriv(p, hol, anti)
    }

    pub fn r(&self, p: &[C]) -> f64 {
        self.d(p, &[], &[]).re
    }

    /// `(dr/dzeta_j)_j`.
    pub fn grad(&self, p: &[C]) -> Vec<C> {
        (0..self.n).map(|j| self.d(p, &[j], &[])).collect()
    }

    /// Matrix `r_{j kbar}`.
    pub fn levi_matrix(&self, p: &[C]) -> DMatrix<C> {
        DMatrix::from_fn(self.n, self.n, |j, k| self.d(p, &[j], &[k]))
    }

    pub fn levi(&self, p: &[C]) -> Result<Metric> {
        Metric::new(self.levi_matrix(p))
    }

    /// All derivatives of `r` up to total order `order <= 4`.
    pub fn jet(&self, p: &[C], order: usize) -> Result<Jet> {
        self.check_u(p)?;
        if order > 4 {
            return Err(Error::OutOfRange(format!("jet order {order} > 4")));
        }
        let mut entries = BTreeMap::new();
        for total in 0..=order {
            for nh in 0..=total {
                for hol in multisets(self.n, nh) {
                    for anti in multisets(self.n, total - nh) {
                        let v = self.d(p, &hol, &anti);
                        entries.insert((hol.clone(), anti), v);
                    }
                }
            }
        }
        Ok(Jet { order, entries })
    }

    /// Levi-metric length of `dr`.
    pub fn gamma(&self, p: &[C]) -> f64 {
        let g = self.grad(p);
        match self.levi(p) {
            Ok(m) => m.covector_inner(&g, &g).re.max(0.0).sqrt(),
            Err(_) => f64::NAN,
        }
    }

    /// Orthonormal coframe with `omega^n = dr / gamma`.
    pub fn frame(&self, p: &[C]) -> Result<Coframe> {
        self.check_u(p)?;
        let metric = self.levi(p)?;
        let g = self.grad(p);
        let gamma = metric.covector_inner(&g, &g).re.max(0.0).sqrt();
        if gamma <= TOL_FRAME {
            return Err(Error::SingularFramePoint(gamma));
        }
        let n = self.n;
        let normal: Vec<C> = g.iter().map(|c| c / gamma).collect();
        // Drop the coordinate covector most aligned with dr, then Gram-Schmidt the rest.
        let drop = (0..n)
            .max_by(|&a, &b| g[a].norm().partial_cmp(&g[b].norm()).unwrap().then(b.cmp(&a)))
            .unwrap_or(0);
        let mut rows: Vec<Vec<C>> = Vec::with_capacity(n);
        for k in (0..n).filter(|&k| k != drop) {
            let mut v = vec![C::new(0.0, 0.0); n];
            v[k] = C::new(1.0, 0.0);
            for u in rows.iter().chain(std::iter::once(&normal)) {
                let c = metric.covector_inner(&v, u);
                for j in 0..n {
                    v[j] -= c * u[j];
                }
            }
            let len = metric.covector_inner(&v, &v).re.sqrt();
            rows.push(v.iter().map(|c| c / len).collect());
        }
        rows.push(normal);
        let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let dual = a.clone().try_inverse().ok_or(Error::SingularFramePoint(gamma))?;
        Ok(Coframe { a, dual, gamma })
    }

    /// Patching function: 1 for `|r| < delta`, 0 for `|r| > 3 delta / 2`, C^2 in between.
    pub fn xi(&self, p: &[C]) -> f64 {
        xi_of(self.r(p), self.delta).0
    }

    /// Real Hessian of `r` in `(x_1, y_1, ..., x_n, y_n)`.
    pub fn real_hessian(&self, p: &[C]) -> DMatrix<f64> {
        let n = self.n;
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                let hh = self.d(p, &[j, k], &[]);
                let ha = self.d(p, &[j], &[k]);
                // d/dx = d + dbar, d/dy = i(d - dbar); r real.
                h[(2 * j, 2 * k)] = 2.0 * (hh.re + ha.re);
                h[(2 * j + 1, 2 * k + 1)] = 2.0 * (ha.re - hh.re);
                h[(2 * j, 2 * k + 1)] = 2.0 * (-hh.im + ha.im);
                h[(2 * j + 1, 2 * k)] = 2.0 * (-hh.im - ha.im);
            }
        }
        h
    }

    /// Eigenvalues of the real Hessian, ascending.
    pub fn hessian_eigenvalues(&self, p: &[C]) -> Vec<f64> {
        let mut ev: Vec<f64> = self.real_hessian(p).symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// Checks the model invariants on the listed critical points and a sample set.
    pub fn validate(&self, samples: &[Vec<C>]) -> Result<()> {
        for p in &self.critical_points {
            let g = self.grad(p);
            if self.r(p).abs() > 1e-12 || g.iter().any(|c| c.norm() > 1e-12) {
                return Err(Error::Constraint("listed critical point is not a boundary critical point".into()));
            }
            if self.hessian_eigenvalues(p).iter().any(|e| e.abs() < 1e-10) {
                return Err(Error::Constraint("degenerate critical point".into()));
            }
        }
        for s in samples {
            if !self.in_u(s) {
                continue;
            }
            if hermitian_eigenvalues(&self.levi_matrix(s))[0] <= 0.0 {
                return Err(Error::Constraint("Levi matrix not positive definite".into()));
            }
            if self.r(s).abs() > 1e-12 && self.gamma(s) <= TOL_FRAME {
                return Err(Error::Constraint("critical point off the boundary".into()));
            }
        }
        Ok(())
    }
}

/// `xi(r)` and `d xi / d r` for the C^2 quintic step.
pub fn xi_of(r: f64, delta: f64) -> (f64, f64) {
    let a = r.abs();
    if a <= delta {
        return (1.0, 0.0);
    }
    if a >= 1.5 * delta {
        return (0.0, 0.0);
    }
    let s = (a - delta) / (0.5 * delta);
    let step = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    let dstep = 30.0 * s * s * (1.0 - s) * (1.0 - s);
    (1.0 - step, -dstep / (0.5 * delta) * r.signum())
}

fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Orthonormal (1,0)-coframe: row `a` of `a` holds `omega^a` in `dzeta` coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Coframe {
    pub a: DMatrix<C>,
    /// Inverse matrix; column `a` holds the dual vector field `L_a`.
    pub dual: DMatrix<C>,
    pub gamma: f64,
}

impl Coframe {
    /// `L_a f` from the holomorphic partials of `f`.
    pub fn l(&self, a: usize, d_hol: &[C]) -> C {
        (0..d_hol.len()).map(|j| self.dual[(j, a)] * d_hol[j]).sum()
    }

    /// `conj(L_a) f` from the antiholomorphic partials of `f`.
    pub fn lbar(&self, a: usize, d_anti: &[C]) -> C {
        (0..d_anti.len()).map(|j| self.dual[(j, a)].conj() * d_anti[j]).sum()
    }

    /// Coefficients of `omega^a`.
    pub fn row(&self, a: usize) -> Vec<C> {
        self.a.row(a).iter().copied().collect()
    }
}

/// A single Wirtinger derivative in one of the pair variables (0-based index).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dv {
    Zeta(usize),
    ZetaBar(usize),
    Z(usize),
    ZBar(usize),
}

impl Dv {
    fn is_hol(self) -> bool {
        matches!(self, Dv::Zeta(_) | Dv::Z(_))
    }

    fn index(self) -> usize {
        match self {
            Dv::Zeta(j) | Dv::ZetaBar(j) | Dv::Z(j) | Dv::ZBar(j) => j,
        }
    }

    fn on_zeta(self) -> bool {
        matches!(self, Dv::Zeta(_) | Dv::ZetaBar(_))
    }
}

/// Every way to hand each derivative to one of `k` factors.
fn assignments(vars: &[Dv], k: usize) -> Vec<Vec<Vec<Dv>>> {
    let d = vars.len();
    let total = k.pow(d as u32);
    (0..total)
        .map(|mut code| {
            let mut parts = vec![Vec::new(); k];
            for v in vars {
                parts[code % k].push(*v);
                code /= k;
            }
            parts
        })
        .collect()
}

/// Derivative of the difference factor `w_j = zeta_j - z_j` (or its conjugate).
fn w_factor(w: &[C], j: usize, conj: bool, vars: &[Dv]) -> C {
    match vars {
        [] => {
            if conj {
                w[j].conj()
            } else {
                w[j]
            }
        }
        [v] => {
            let hit = v.index() == j && v.is_hol() != conj;
            if !hit {
                C::new(0.0, 0.0)
            } else if v.on_zeta() {
                C::new(1.0, 0.0)
            } else {
                C::new(-1.0, 0.0)
            }
        }
        _ => C::new(0.0, 0.0),
    }
}

fn diff(zeta: &[C], z: &[C]) -> Vec<C> {
    zeta.iter().zip(z).map(|(a, b)| a - b).collect()
}

impl DomainModel {
    fn check_pair(&self, zeta: &[C], z: &[C]) -> Result<()> {
        self.check_u(zeta)?;
        self.check_u(z)?;
        let dist = diff(zeta, z).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if dist > self.diag_radius {
            return Err(Error::OutsideDiagonalRadius);
        }
        Ok(())
    }

    /// Midpoint quadratic form `2 sum r_{j kbar}(m) w_j conj(w_k)`.
    pub fn rho2(&self, zeta: &[C], z: &[C]) -> Result<f64> {
        self.check_pair(zeta, z)?;
        Ok(self.rho2_deriv(zeta, z, &[]).re)
    }

    /// Any mixed Wirtinger derivative of `rho^2` in `(zeta, z)`.
    pub fn rho2_deriv(&self, zeta: &[C], z: &[C], vars: &[Dv]) -> C {
        let n = self.n;
        let w = diff(zeta, z);
        let m: Vec<C> = zeta.iter().zip(z).map(|(a, b)| (a + b) * 0.5).collect();
        let mut total = C::new(0.0, 0.0);
        for parts in assignments(vars, 3) {
            let (hv, wv, wbv) = (&parts[0], &parts[1], &parts[2]);
            if wv.len() > 1 || wbv.len() > 1 {
                continue;
            }
            let mut hol_extra = Vec::new();
            let mut anti_extra = Vec::new();
            for v in hv {
                if v.is_hol() {
                    hol_extra.push(v.index());
                } else {
                    anti_extra.push(v.index());
                }
            }
            let scale = 0.5f64.powi(hv.len() as i32);
            let js: Vec<usize> = match wv.first() {
                Some(v) => vec![v.index()],
                None => (0..n).collect(),
            };
            let ks: Vec<usize> = match wbv.first() {
                Some(v) => vec![v.index()],
                None => (0..n).collect(),
            };
            for &j in &js {
                let wf = w_factor(&w, j, false, wv);
                if wf == C::new(0.0, 0.0) {
                    continue;
                }
                for &k in &ks {
                    let wbf = w_factor(&w, k, true, wbv);
                    if wbf == C::new(0.0, 0.0) {
                        continue;
                    }
                    let mut hol = vec![j];
                    hol.extend_from_slice(&hol_extra);
                    let mut anti = vec![k];
                    anti.extend_from_slice(&anti_extra);
                    total += 2.0 * scale * wf * wbf * self.d(&m, &hol, &anti);
                }
            }
        }
        total
    }

    /// Levi polynomial `F`.
    pub fn levi_f(&self, zeta: &[C], z: &[C]) -> Result<C> {
        self.check_pair(zeta, z)?;
        Ok(self.f_deriv(zeta, z, &[]))
    }

    /// Any mixed Wirtinger derivative of `F`.
    pub fn f_deriv(&self, zeta: &[C], z: &[C], vars: &[Dv]) -> C {
        let n = self.n;
        let w = diff(zeta, z);
        let r_factor = |base: &[usize], vs: &[Dv]| -> C {
            if vs.iter().any(|v| !v.on_zeta()) {
                return C::new(0.0, 0.0);
            }
            let mut hol = base.to_vec();
            let mut anti = Vec::new();
            for v in vs {
                if v.is_hol() {
                    hol.push(v.index());
                } else {
                    anti.push(v.index());
                }
            }
            self.d(zeta, &hol, &anti)
        };
        let mut total = C::new(0.0, 0.0);
        for parts in assignments(vars, 2) {
            for j in 0..n {
                let wf = w_factor(&w, j, false, &parts[1]);
                if wf != C::new(0.0, 0.0) {
                    total += r_factor(&[j], &parts[0]) * wf;
                }
            }
        }
        for parts in assignments(vars, 3) {
            for j in 0..n {
                let wj = w_factor(&w, j, false, &parts[1]);
                if wj == C::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..n {
                    let wk = w_factor(&w, k, false, &parts[2]);
                    if wk != C::new(0.0, 0.0) {
                        total -= 0.5 * r_factor(&[j, k], &parts[0]) * wj * wk;
                    }
                }
            }
        }
        total
    }

    /// `Phi = F - r(zeta)`.
    pub fn phi(&self, zeta: &[C], z: &[C]) -> Result<C> {
        self.check_pair(zeta, z)?;
        Ok(self.phi_deriv(zeta, z, &[]))
    }

    /// Any mixed Wirtinger derivative of `Phi`.
    pub fn phi_deriv(&self, zeta: &[C], z: &[C], vars: &[Dv]) -> C {
        let mut v = self.f_deriv(zeta, z, vars);
        if vars.iter().all(|d| d.on_zeta()) {
            let hol: Vec<usize> = vars.iter().filter(|d| d.is_hol()).map(|d| d.index()).collect();
            let anti: Vec<usize> = vars.iter().filter(|d| !d.is_hol()).map(|d| d.index()).collect();
            v -= self.d(zeta, &hol, &anti);
        }
        v
    }

    /// `Phi*(zeta, z) = conj(Phi(z, zeta))`.
    pub fn phi_star(&self, zeta: &[C], z: &[C]) -> Result<C> {
        Ok(self.phi(z, zeta)?.conj())
    }

    /// Extended squared distance `rho^2 + 2 (r / gamma)(r* / gamma*)`.
    pub fn big_p(&self, zeta: &[C], z: &[C]) -> Result<f64> {
        let g = self.gamma(zeta);
        let gs = self.gamma(z);
        if !(g > TOL_FRAME) {
            return Err(Error::SingularFramePoint(g));
        }
        if !(gs > TOL_FRAME) {
            return Err(Error::SingularFramePoint(gs));
        }
        Ok(self.rho2(zeta, z)? + 2.0 * (self.r(zeta) / g) * (self.r(z) / gs))
    }

    /// All scalar geometry of a pair.
    pub fn geo_pair(&self, zeta: &[C], z: &[C]) -> Result<GeoPair> {
        self.check_pair(zeta, z)?;
        let frame = self.frame(zeta)?;
        let frame_star = self.frame(z)?;
        let r = self.r(zeta);
        let r_star = self.r(z);
        let rho2 = self.rho2_deriv(zeta, z, &[]).re;
        let f = self.f_deriv(zeta, z, &[]);
        let phi = f - r;
        let phi_star = self.phi_deriv(z, zeta, &[]).conj();
        let (gamma, gamma_star) = (frame.gamma, frame_star.gamma);
        let big_p = rho2 + 2.0 * (r / gamma) * (r_star / gamma_star);
        Ok(GeoPair {
            zeta: zeta.to_vec(),
            z: z.to_vec(),
            r,
            r_star,
            grad: self.grad(zeta),
            gamma,
            gamma_star,
            frame,
            frame_star,
            rho2,
            f,
            phi,
            phi_star,
            big_p,
        })
    }
}

/// Geometric data at a pair `(zeta, z)` with non-singular frames at both points.
#[derive(Clone, Debug)]
pub struct GeoPair {
    pub zeta: Vec<C>,
    pub z: Vec<C>,
    pub r: f64,
    pub r_star: f64,
    pub grad: Vec<C>,
    pub gamma: f64,
    pub gamma_star: f64,
    /// Adapted coframe `omega` at `zeta`.
    pub frame: Coframe,
    /// Adapted coframe `Theta` at `z`.
    pub frame_star: Coframe,
    pub rho2: f64,
    pub f: C,
    pub phi: C,
    pub phi_star: C,
    pub big_p: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn ball_jet_values() {
        let m = DomainModel::ball(2);
        let p = [c(0.8, 0.0), c(0.0, 0.0)];
        assert!((m.r(&p) + 0.36).abs() < 1e-15);
        let g = m.grad(&p);
        assert!((g[0] - c(0.8, 0.0)).norm() < 1e-15 && g[1].norm() < 1e-15);
        assert!(m.levi(&p).unwrap().is_identity());
        assert!((m.gamma(&p) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn pinched_jet_values() {
        let m = DomainModel::pinched(2).unwrap();
        let p = [c(0.1, 0.0), c(0.0, 0.0)];
        assert!((m.r(&p) + 0.01).abs() < 1e-15);
        assert!((m.grad(&p)[0] - c(-0.1, 0.0)).norm() < 1e-15);
        assert!((m.gamma(&p) - 0.1).abs() < 1e-15);
        assert!((m.gamma(&[c(0.0, 0.1), c(0.0, 0.0)]) - 0.3).abs() < 1e-15);
        let o = [c(0.0, 0.0), c(0.0, 0.0)];
        let ev = m.hessian_eigenvalues(&o);
        for (a, b) in ev.iter().zip([-2.0, 2.0, 2.0, 6.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(m.frame(&o), Err(Error::SingularFramePoint(_))));
    }

    #[test]
    fn ball_pair_functions() {
        let m = DomainModel::ball(2);
        let zeta = [c(1.0, 0.0), c(0.0, 0.0)];
        let z = [c(0.9, 0.0), c(0.0, 0.0)];
        assert!((m.rho2(&zeta, &z).unwrap() - 0.02).abs() < 1e-14);
        assert!((m.levi_f(&zeta, &z).unwrap() - c(0.1, 0.0)).norm() < 1e-14);
        assert!((m.phi(&zeta, &z).unwrap() - c(0.1, 0.0)).norm() < 1e-14);
        let p = [c(0.8, 0.0), c(0.0, 0.0)];
        assert!((m.big_p(&p, &p).unwrap() - 0.405).abs() < 1e-14);
    }

    #[test]
    fn ball_frame_at_pole() {
        let m = DomainModel::ball(3);
        let p = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let f = m.frame(&p).unwrap();
        assert_eq!(f.row(2), vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn xi_profile() {
        assert_eq!(xi_of(0.1, 0.15).0, 1.0);
        assert_eq!(xi_of(-0.3, 0.15).0, 0.0);
        let (v, _) = xi_of(0.1875, 0.15);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn jet_has_all_orders() {
        let m = DomainModel::pinched(2).unwrap();
        let j = m.jet(&[c(0.1, 0.2), c(0.0, 0.1)], 4).unwrap();
        assert!((j.get(&[0, 0], &[]) - c(-2.0, 0.0)).norm() < 1e-15);
        assert!((j.get(&[1], &[1]) - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(j.get(&[0, 0, 1], &[1]), c(0.0, 0.0));
        assert!(m.jet(&[c(5.0, 0.0), c(0.0, 0.0)], 2).is_err());
    }
}
