//! Midpoint quadrature on the smooth subdomains `D_eps = {r < -eps}`:
//! grids, form fields, weighted `L^p` norms, kernel application with
//! diagonal exclusion and local refinement, estimate-ratio tables, and the
//! discrete adjointness check for `vartheta`.

use crate::domain::{DomainModel, ModelKind};
use crate::error::{Error, Result};
use crate::forms::{Blade, DoubleForm, Metric, MultiIndex, Slot, Var};
use crate::kernels::KernelEvaluator;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Cell-centred grid over `D_eps`.
#[derive(Clone, Debug)]
pub struct Grid {
    pub n: usize,
    pub per_axis: usize,
    pub h: f64,
    pub eps: f64,
    pub half_width: f64,
    /// Volume of one cell for the metric in which `dzeta_j` has unit length.
    pub cell_volume: f64,
    pub cells: Vec<Vec<C>>,
    index: Vec<Vec<i32>>,
}

fn box_half_width(dom: &DomainModel) -> f64 {
    match dom.kind {
        ModelKind::Ball => 1.0,
        _ => dom.half_width,
    }
}

impl Grid {
    /// `per_axis` cells along each real axis of the box around `D`; cells whose
    /// centre has `r < -eps` are kept. `eps` defaults to `2h`.
    pub fn new(dom: &DomainModel, per_axis: usize, eps: Option<f64>) -> Result<Self> {
        if per_axis == 0 {
            return Err(Error::EmptyGrid);
        }
        let n = dom.n;
        let b = box_half_width(dom);
        let h = 2.0 * b / per_axis as f64;
        let eps = eps.unwrap_or(2.0 * h);
        let dim = 2 * n;
        let total = per_axis.checked_pow(dim as u32).ok_or(Error::OutOfRange("grid too large".into()))?;
        let mut cells = Vec::new();
        let mut index = Vec::new();
        let mut ix = vec![0i32; dim];
        for lin in 0..total {
            let mut rem = lin;
            for d in (0..dim).rev() {
                ix[d] = (rem % per_axis) as i32;
                rem /= per_axis;
            }
            let p = Self::center_of(&ix, b, h);
            if dom.r(&p) < -eps {
                cells.push(p);
                index.push(ix.clone());
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let cell_volume = 2f64.powi(n as i32) * h.powi(dim as i32);
        Ok(Self { n, per_axis, h, eps, half_width: b, cell_volume, cells, index })
    }

    fn center_of(ix: &[i32], b: f64, h: f64) -> Vec<C> {
        ix.chunks(2).map(|c| C::new(-b + (c[0] as f64 + 0.5) * h, -b + (c[1] as f64 + 0.5) * h)).collect()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_volume(&self) -> f64 {
        self.cell_volume * self.len() as f64
    }

    /// Integer index of the box cell containing `p`.
    fn locate(&self, p: &[C]) -> Vec<i32> {
        let f = |x: f64| ((x + self.half_width) / self.h).floor() as i32;
        p.iter().flat_map(|c| [f(c.re), f(c.im)]).collect()
    }
}

/// One form per grid cell, all of the same bidegree.
#[derive(Clone, Debug)]
pub struct FormField {
    pub values: Vec<DoubleForm>,
}

impl FormField {
    pub fn from_fn(grid: &Grid, f: impl Fn(&[C]) -> DoubleForm + Sync) -> Result<Self> {
        let values: Vec<DoubleForm> = grid.cells.par_iter().map(|p| f(p)).collect();
        let mut degree: Option<Vec<[usize; 4]>> = None;
        for v in values.iter().filter(|v| !v.is_zero()) {
            let b = v.bidegrees();
            if b.len() != 1 {
                return Err(Error::NotHomogeneous);
            }
            match &degree {
                None => degree = Some(b),
                Some(d) if *d != b => return Err(Error::Constraint("field bidegree varies across cells".into())),
                _ => {}
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `<a, b>` for forms in one variable, with `a ^ *conj(b) = <a, b> dV`.
pub fn pointwise_inner(g: &Metric, a: &DoubleForm, b: &DoubleForm, var: Var) -> Result<C> {
    if g.is_identity() {
        return Ok(a.terms().map(|(bl, c)| c * b.get(*bl).conj()).sum());
    }
    if a.is_zero() || b.is_zero() {
        return Ok(C::new(0.0, 0.0));
    }
    let w = a.wedge(&b.conj().hodge_star(g, var)?)?;
    Ok(w.top_coefficient(var).get(Blade(0)))
}

fn metric_at(dom: &DomainModel, p: &[C]) -> Result<Metric> {
    dom.levi(p)
}

/// `(sum_cells |gamma^a f|^p vol)^{1/p}`; `p = f64::INFINITY` gives the maximum.
pub fn weighted_lp_norm(grid: &Grid, dom: &DomainModel, f: &FormField, a: f64, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::OutOfRange(format!("p = {p} < 1")));
    }
    if grid.is_empty() || f.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if f.len() != grid.len() {
        return Err(Error::DimensionMismatch(f.len(), grid.len()));
    }
    let pointwise: Vec<f64> = grid
        .cells
        .par_iter()
        .zip(&f.values)
        .map(|(z, v)| -> Result<f64> {
            let g = metric_at(dom, z)?;
            let m = pointwise_inner(&g, v, v, Var::Zeta)?.re.max(0.0).sqrt();
            Ok(dom.gamma(z).powf(a) * m)
        })
        .collect::<Result<_>>()?;
    Ok(lp_of(&pointwise, grid.cell_volume, p))
}

fn lp_of(values: &[f64], weight: f64, p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(*v))
    } else {
        (values.iter().map(|v| v.powf(p)).sum::<f64>() * weight).powf(1.0 / p)
    }
}

/// Discrete `L^2` inner product `sum_cells <a, b> vol`.
pub fn inner(grid: &Grid, dom: &DomainModel, a: &FormField, b: &FormField) -> Result<C> {
    if a.len() != grid.len() || b.len() != grid.len() {
        return Err(Error::DimensionMismatch(a.len(), grid.len()));
    }
    let parts: Vec<C> = grid
        .cells
        .par_iter()
        .zip(a.values.par_iter().zip(&b.values))
        .map(|(z, (x, y))| pointwise_inner(&metric_at(dom, z)?, x, y, Var::Zeta))
        .collect::<Result<_>>()?;
    Ok(parts.iter().sum::<C>() * grid.cell_volume)
}

fn zeta_mask(n: usize) -> u32 {
    (1u32 << (2 * n)) - 1
}

/// Kernel prepared for pairing at one point `zeta`: for every `z`-blade `J`, the
/// form `*conj(K_J)` with `K = sum_J K_J ^ dz^J`.
struct Prepared {
    parts: Vec<(u32, DoubleForm)>,
    identity: bool,
}

impl Prepared {
    fn new(k: &DoubleForm, g: &Metric) -> Result<Self> {
        let n = k.n();
        let zm = zeta_mask(n);
        let mut by_j: HashMap<u32, DoubleForm> = HashMap::new();
        for (b, c) in k.terms() {
            by_j.entry(b.0 & !zm).or_insert_with(|| DoubleForm::zero(n)).add_term(Blade(b.0 & zm), *c);
        }
        let identity = g.is_identity();
        let mut parts: Vec<(u32, DoubleForm)> = by_j
            .into_iter()
            .map(|(j, kj)| -> Result<(u32, DoubleForm)> {
                Ok((j, if identity { kj } else { kj.conj().hodge_star(g, Var::Zeta)? }))
            })
            .collect::<Result<_>>()?;
        parts.sort_by_key(|(j, _)| *j);
        Ok(Self { parts, identity })
    }

    /// `sum_J <f, K_J> dz^J`.
    fn pair(&self, f: &DoubleForm) -> Result<DoubleForm> {
        let n = f.n();
        let mut out = DoubleForm::zero(n);
        for (j, s) in &self.parts {
            let v = if self.identity {
                f.terms().map(|(b, c)| c * s.get(*b).conj()).sum()
            } else {
                f.wedge(s)?.top_coefficient(Var::Zeta).get(Blade(0))
            };
            if v != C::new(0.0, 0.0) {
                out.add_term(Blade(*j), v);
            }
        }
        Ok(out)
    }
}

/// Result of applying a kernel to several fields at several targets.
#[derive(Clone, Debug)]
pub struct Applied {
    /// `values[field][target]`, forms in `z`.
    pub values: Vec<Vec<DoubleForm>>,
    /// Quadrature nodes at which the kernel could not be evaluated.
    pub skipped: usize,
}

/// Quadrature nodes for one target: `(cell, point, weight)`.
fn nodes_for(grid: &Grid, z: &[C]) -> Vec<(usize, Vec<C>, f64)> {
    let home = grid.locate(z);
    let dim = 2 * grid.n;
    let sub = 1usize << dim;
    let sub_w = grid.cell_volume / sub as f64;
    let mut out = Vec::with_capacity(grid.len());
    for (c, ix) in grid.index.iter().enumerate() {
        let near = ix.iter().zip(&home).all(|(a, b)| (a - b).abs() <= 1);
        if !near {
            out.push((c, grid.cells[c].clone(), grid.cell_volume));
            continue;
        }
        if *ix == home {
            continue;
        }
        for s in 0..sub {
            let p: Vec<C> = grid.cells[c]
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    let off = |bit: usize| if s >> bit & 1 == 1 { 0.25 * grid.h } else { -0.25 * grid.h };
                    x + C::new(off(2 * k), off(2 * k + 1))
                })
                .collect();
            out.push((c, p, sub_w));
        }
    }
    out
}

/// `(K f)(z) = int <f(zeta), K(zeta, z)>_zeta dV(zeta)` at every target: the cell
/// containing the target is dropped and its `3^{2n} - 1` neighbours are refined
/// once by halving, with `f` held at the parent cell value. Nodes where the
/// kernel is undefined contribute nothing and are counted.
pub fn apply(k: &KernelEvaluator, grid: &Grid, dom: &DomainModel, fields: &[&FormField], targets: &[Vec<C>]) -> Result<Applied> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for f in fields {
        if f.len() != grid.len() {
            return Err(Error::DimensionMismatch(f.len(), grid.len()));
        }
    }
    for z in targets {
        if z.len() != grid.n {
            return Err(Error::DimensionMismatch(z.len(), grid.n));
        }
        if !dom.in_u(z) || dom.r(z) >= 0.0 {
            return Err(Error::OutsideDomain);
        }
    }
    let per_target: Vec<(Vec<DoubleForm>, usize)> = targets
        .par_iter()
        .map(|z| -> Result<(Vec<DoubleForm>, usize)> {
            let mut acc = vec![DoubleForm::zero(grid.n); fields.len()];
            let mut skipped = 0;
            for (c, p, w) in nodes_for(grid, z) {
                let kv = match k.eval(&p, z) {
                    Ok(v) => v,
                    Err(_) => {
                        skipped += 1;
                        continue;
                    }
                };
                let prep = Prepared::new(&kv, &metric_at(dom, &p)?)?;
                for (a, f) in acc.iter_mut().zip(fields) {
                    let v = prep.pair(&f.values[c])?;
                    if !v.is_zero() {
                        *a = a.add(&v.scale_re(w))?;
                    }
                }
            }
            Ok((acc, skipped))
        })
        .collect::<Result<_>>()?;
    let skipped = per_target.iter().map(|(_, s)| s).sum();
    let values = (0..fields.len()).map(|i| per_target.iter().map(|(v, _)| v[i].clone()).collect()).collect();
    Ok(Applied { values, skipped })
}

/// Pairing of a kernel with one field at one point.
pub fn pair_operator(k: &KernelEvaluator, grid: &Grid, dom: &DomainModel, f: &FormField, z: &[C]) -> Result<DoubleForm> {
    let a = apply(k, grid, dom, &[f], &[z.to_vec()])?;
    Ok(a.values[0][0].clone())
}

/// Seeded smooth `(0,q)`-form in `zeta`: a Gaussian bump of width `sigma`
/// times affine polynomial coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RandomField {
    pub n: usize,
    pub q: usize,
    pub center: Vec<(f64, f64)>,
    pub sigma: f64,
    /// Per component: constant, `zeta_j` and `conj(zeta_j)` coefficients.
    pub coeffs: Vec<(Vec<usize>, (f64, f64), Vec<(f64, f64)>, Vec<(f64, f64)>)>,
}

fn anti_blade(n: usize, idx: &[usize]) -> Blade {
    let m = idx.iter().fold(0u32, |m, i| m | 1 << (i - 1));
    Blade::from_slots(n, [0, m, 0, 0])
}

impl RandomField {
    pub fn new(n: usize, q: usize, center: Vec<C>, sigma: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = || (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let coeffs = MultiIndex::all(n, q)
            .into_iter()
            .map(|i| {
                let k0 = c();
                let a: Vec<_> = (0..n).map(|_| c()).collect();
                let b: Vec<_> = (0..n).map(|_| c()).collect();
                (i.indices().to_vec(), k0, a, b)
            })
            .collect();
        Self { n, q, center: center.iter().map(|c| (c.re, c.im)).collect(), sigma, coeffs }
    }

    pub fn eval(&self, p: &[C]) -> DoubleForm {
        let d2: f64 = p.iter().zip(&self.center).map(|(x, c)| (x - C::new(c.0, c.1)).norm_sqr()).sum();
        let bump = (-d2 / (2.0 * self.sigma * self.sigma)).exp();
        let mut out = DoubleForm::zero(self.n);
        for (idx, k0, a, b) in &self.coeffs {
            let mut v = C::new(k0.0, k0.1);
            for j in 0..self.n {
                v += C::new(a[j].0, a[j].1) * p[j] + C::new(b[j].0, b[j].1) * p[j].conj();
            }
            out.add_term(anti_blade(self.n, idx), v * bump);
        }
        out
    }
}

/// Parameters of an estimate-ratio table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioSpec {
    pub weight_out: f64,
    pub weight_in: f64,
    pub p: f64,
    pub s: f64,
    /// Degree `q` of the `(0,q)` test fields.
    pub q: usize,
    pub trials: usize,
    pub resolutions: Vec<usize>,
    /// Fixed exhaustion parameter for all resolutions.
    pub eps: f64,
    pub targets: usize,
    pub seed: u64,
    /// Infimal admissible `1/s`; the table records whether `1/s` exceeds it.
    pub threshold: Option<f64>,
    pub sigma: f64,
}

/// One row of a ratio table; `ratio` is `None` when the denominator vanishes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioRow {
    pub resolution: usize,
    pub p: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub trial: usize,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioMeta {
    pub seed: u64,
    pub domain: String,
    pub n: usize,
    pub kernel: String,
    pub admissible: Option<bool>,
    pub spec: RatioSpec,
    pub skipped_nodes: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioTable {
    pub rows: Vec<RatioRow>,
    /// `(resolution, max ratio)`.
    pub max_by_resolution: Vec<(usize, f64)>,
    pub meta: RatioMeta,
}

impl RatioTable {
    /// Largest relative increase of the max ratio between consecutive resolutions.
    pub fn max_growth(&self) -> f64 {
        self.max_by_resolution.windows(2).map(|w| w[1].1 / w[0].1 - 1.0).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Seeded points with `r < -margin`, shared by all resolutions.
pub fn sample_targets(dom: &DomainModel, count: usize, margin: f64, seed: u64) -> Vec<Vec<C>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7461_7267);
    let b = box_half_width(dom);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p: Vec<C> = (0..dom.n).map(|_| C::new(rng.gen_range(-b..b), rng.gen_range(-b..b))).collect();
        if dom.r(&p) < -margin && dom.gamma(&p) > 1e-3 {
            out.push(p);
        }
    }
    out
}

/// `||gamma^a K f||_{L^s} / (||gamma^b f||_{L^p} + ||f||_{L^2})` for seeded fields at each resolution.
/// The output norm is a Monte Carlo estimate over fixed seeded targets.
pub fn ratio_table(k: &KernelEvaluator, dom: &DomainModel, spec: &RatioSpec) -> Result<RatioTable> {
    let n = dom.n;
    let targets = sample_targets(dom, spec.targets, spec.eps, spec.seed);
    let fields: Vec<RandomField> = (0..spec.trials)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(1000 + t as u64));
            let center = targets[rng.gen_range(0..targets.len())].clone();
            RandomField::new(n, spec.q, center, spec.sigma, spec.seed.wrapping_add(t as u64))
        })
        .collect();
    let mut rows = Vec::new();
    let mut maxes = Vec::new();
    let mut skipped = Vec::new();
    for &res in &spec.resolutions {
        let grid = Grid::new(dom, res, Some(spec.eps))?;
        let ffs: Vec<FormField> = fields.iter().map(|f| FormField::from_fn(&grid, |p| f.eval(p))).collect::<Result<_>>()?;
        let refs: Vec<&FormField> = ffs.iter().collect();
        let applied = apply(k, &grid, dom, &refs, &targets)?;
        skipped.push(applied.skipped);
        let mut best = 0.0f64;
        for (t, (ff, out)) in ffs.iter().zip(&applied.values).enumerate() {
            let pw: Vec<f64> = targets
                .iter()
                .zip(out)
                .map(|(z, v)| -> Result<f64> {
                    let m = pointwise_inner(&metric_at(dom, z)?, v, v, Var::Z)?.re.max(0.0).sqrt();
                    Ok(dom.gamma(z).powf(spec.weight_out) * m)
                })
                .collect::<Result<_>>()?;
            let num = lp_of(&pw, grid.total_volume() / targets.len() as f64, spec.s);
            let den = weighted_lp_norm(&grid, dom, ff, spec.weight_in, spec.p)? + weighted_lp_norm(&grid, dom, ff, 0.0, 2.0)?;
            let ratio = if den > 1e-300 { Some(num / den) } else { None };
            if let Some(r) = ratio {
                best = best.max(r);
            }
            rows.push(RatioRow { resolution: res, p: spec.p, s: spec.s, a: spec.weight_out, b: spec.weight_in, trial: t, ratio });
        }
        maxes.push((res, best));
    }
    let meta = RatioMeta {
        seed: spec.seed,
        domain: dom.name().into(),
        n,
        kernel: k.id.to_string(),
        admissible: spec.threshold.map(|t| 1.0 / spec.s > t),
        spec: spec.clone(),
        skipped_nodes: skipped,
    };
    Ok(RatioTable { rows, max_by_resolution: maxes, meta })
}

/// `sum_j dzeta_j ^ df/dzeta_j` (`hol`) or `sum_j dzetabar_j ^ df/dzetabar_j`
/// by central differences with step `h`.
pub fn field_derivative(f: &dyn Fn(&[C]) -> Result<DoubleForm>, p: &[C], hol: bool, h: f64) -> Result<DoubleForm> {
    let n = p.len();
    let mut out = DoubleForm::zero(n);
    for j in 0..n {
        let diff = |dir: C| -> Result<DoubleForm> {
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[j] += dir * h;
            b[j] -= dir * h;
            Ok(f(&a)?.sub(&f(&b)?)?.scale_re(0.5 / h))
        };
        let dx = diff(C::new(1.0, 0.0))?;
        let dy = diff(C::new(0.0, 1.0))?;
        let s = if hol { C::new(0.0, -1.0) } else { C::new(0.0, 1.0) };
        let d = dx.add(&dy.scale(s))?.scale_re(0.5);
        let slot = if hol { Slot::HoloZeta } else { Slot::AntiZeta };
        out = out.add(&DoubleForm::gen(n, slot, j, C::new(1.0, 0.0)).wedge(&d)?)?;
    }
    Ok(out)
}

/// `vartheta v = -* d * v` pointwise, with the Levi metric at each point.
pub fn field_vartheta(dom: &DomainModel, v: &dyn Fn(&[C]) -> Result<DoubleForm>, p: &[C], h: f64) -> Result<DoubleForm> {
    let star_v = |x: &[C]| -> Result<DoubleForm> { v(x)?.hodge_star(&dom.levi(x)?, Var::Zeta) };
    let d = field_derivative(&star_v, p, true, h)?;
    Ok(d.hodge_star(&dom.levi(p)?, Var::Zeta)?.scale_re(-1.0))
}

/// Smooth bump with compact support in the ball of radius `radius` about `center`.
pub fn compact_bump(p: &[C], center: &[C], radius: f64) -> f64 {
    let d2: f64 = p.iter().zip(center).map(|(x, c)| (x - c).norm_sqr()).sum::<f64>() / (radius * radius);
    if d2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - d2)).exp()
    }
}

/// One resolution of the discrete adjointness check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdjointnessSample {
    pub per_axis: usize,
    pub h: f64,
    /// `<dbar u, v>`.
    pub lhs: (f64, f64),
    /// `<u, vartheta v>`.
    pub rhs: (f64, f64),
    /// `|lhs - rhs| / (||u|| ||v||)`.
    pub residual: f64,
}

/// Compactly supported `(0,q)` and `(0,q+1)` fields `u`, `v`, with `dbar u` and
/// `vartheta v` by central differences with step `h/2`. With the full grid step
/// central differences are exactly skew on grid sums, which hides the rate.
pub fn adjointness_sample(dom: &DomainModel, per_axis: usize, q: usize, seed: u64) -> Result<AdjointnessSample> {
    let n = dom.n;
    if q + 1 > n {
        return Err(Error::OutOfRange(format!("q = {q} for n = {n}")));
    }
    let grid = Grid::new(dom, per_axis, None)?;
    let center = vec![C::new(0.0, 0.0); n];
    let radius = 0.6;
    let ru = RandomField::new(n, q, center.clone(), 1.0, seed);
    let rv = RandomField::new(n, q + 1, center.clone(), 1.0, seed.wrapping_add(1));
    let u = |p: &[C]| -> Result<DoubleForm> { Ok(ru.eval(p).scale_re(compact_bump(p, &center, radius))) };
    let v = |p: &[C]| -> Result<DoubleForm> { Ok(rv.eval(p).scale_re(compact_bump(p, &center, radius))) };
    let h = 0.5 * grid.h;
    let collect = |f: &(dyn Fn(&[C]) -> Result<DoubleForm> + Sync)| -> Result<FormField> {
        let values: Vec<DoubleForm> = grid.cells.par_iter().map(|p| f(p)).collect::<Result<_>>()?;
        Ok(FormField { values })
    };
    let uf = collect(&u)?;
    let vf = collect(&v)?;
    let du = collect(&|p: &[C]| field_derivative(&u, p, false, h))?;
    let tv = collect(&|p: &[C]| field_vartheta(dom, &v, p, h))?;
    let lhs = inner(&grid, dom, &du, &vf)?;
    let rhs = inner(&grid, dom, &uf, &tv)?;
    let nu = inner(&grid, dom, &uf, &uf)?.re.sqrt();
    let nv = inner(&grid, dom, &vf, &vf)?.re.sqrt();
    Ok(AdjointnessSample { per_axis, h: grid.h, lhs: (lhs.re, lhs.im), rhs: (rhs.re, rhs.im), residual: (lhs - rhs).norm() / (nu * nv) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels;
    use std::f64::consts::PI;

    #[test]
    fn constant_field_volume() {
        let dom = DomainModel::ball(2);
        let g = Grid::new(&dom, 16, Some(0.0)).unwrap();
        let one = FormField::from_fn(&g, |_| DoubleForm::scalar(2, C::new(1.0, 0.0))).unwrap();
        let vol = 4.0 * PI * PI / 2.0;
        let norm = weighted_lp_norm(&g, &dom, &one, 0.0, 2.0).unwrap();
        assert!((norm - vol.sqrt()).abs() / vol.sqrt() < 0.05, "{norm} vs {}", vol.sqrt());
    }

    #[test]
    fn empty_grid() {
        let dom = DomainModel::ball(2);
        assert_eq!(Grid::new(&dom, 4, Some(2.0)).unwrap_err(), Error::EmptyGrid);
    }

    #[test]
    fn identity_fast_path_matches_star() {
        let p = vec![C::new(0.3, 0.2), C::new(-0.1, 0.4)];
        let m = nalgebra::DMatrix::from_row_slice(2, 2, &[C::new(2.0, 0.0), C::new(0.3, 0.4), C::new(0.3, -0.4), C::new(1.5, 0.0)]);
        let g = Metric::new(m).unwrap();
        let a = RandomField::new(2, 1, p.clone(), 1.0, 3).eval(&p);
        let aa = pointwise_inner(&g, &a, &a, Var::Zeta).unwrap();
        assert!(aa.re > 0.0 && aa.im.abs() < 1e-12);
        let id = Metric::identity(2);
        let b = RandomField::new(2, 1, p.clone(), 1.0, 4).eval(&p);
        let fast = pointwise_inner(&id, &a, &b, Var::Zeta).unwrap();
        let slow = a.wedge(&b.conj().hodge_star(&id, Var::Zeta).unwrap()).unwrap().top_coefficient(Var::Zeta).get(Blade(0));
        assert!((fast - slow).norm() < 1e-12);
    }

    #[test]
    fn mismatched_degree_pairs_to_zero() {
        let dom = DomainModel::ball(2);
        let g = Grid::new(&dom, 6, Some(0.1)).unwrap();
        let f = FormField::from_fn(&g, |p| RandomField::new(2, 1, vec![C::new(0.0, 0.0); 2], 0.5, 1).eval(p)).unwrap();
        let k = kernels::constant(2, C::new(1.0, 0.0));
        let out = pair_operator(&k, &g, &dom, &f, &[C::new(0.1, 0.05), C::new(0.0, 0.1)]).unwrap();
        assert!(out.is_zero());
    }
}
