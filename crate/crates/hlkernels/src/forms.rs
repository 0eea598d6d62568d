//! Exterior algebra of double differential forms on C^n x C^n.
//!
//! A basis element is a wedge of generators drawn from four slots, in the
//! canonical order `dzeta^I ^ dzetabar^J ^ dz^K ^ dzbar^L` with each index set
//! increasing. Generators are packed into a bit mask: slot `s`, index `j`
//! (0-based) sits at bit `s * n + j`, so the canonical order is the bit order.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest supported dimension (4n generators must fit in a u32).
pub const MAX_N: usize = 8;

/// Strictly increasing tuple of frame labels in `1..=n`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let ok = indices.iter().all(|&i| i >= 1 && i <= n)
            && indices.windows(2).all(|w| w[0] < w[1])
            && indices.len() <= n;
        if ok {
            Ok(Self(indices))
        } else {
            Err(Error::InvalidIndex(indices, n))
        }
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    /// All increasing multi-indices of length `k` over `1..=n`.
    pub fn all(n: usize, k: usize) -> Vec<MultiIndex> {
        subsets(n, k)
            .into_iter()
            .map(|s| MultiIndex(s.into_iter().map(|i| i + 1).collect()))
            .collect()
    }

    fn mask(&self) -> u32 {
        self.0.iter().fold(0, |m, &i| m | 1 << (i - 1))
    }

    fn from_mask(m: u32) -> Self {
        Self((0..32).filter(|b| m >> b & 1 == 1).map(|b| b as usize + 1).collect())
    }
}

/// Increasing 0-based subsets of `0..n` of size `k`, lexicographic.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Sign of the permutation taking `sup` to `sub`; 0 if `sub` is not a permutation of `sup`.
pub fn perm_sign(sub: &[usize], sup: &[usize]) -> i32 {
    if sub.len() != sup.len() {
        return 0;
    }
    let mut pos = Vec::with_capacity(sub.len());
    for s in sub {
        match sup.iter().position(|x| x == s) {
            Some(p) if !pos.contains(&p) => pos.push(p),
            _ => return 0,
        }
    }
    let mut inv = 0;
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            if pos[i] > pos[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign and canonical mask of a generator list; `None` if a generator repeats.
pub fn sort_sign(gens: &[u32]) -> Option<(f64, u32)> {
    let mut mask = 0u32;
    let mut inv = 0usize;
    for (i, &g) in gens.iter().enumerate() {
        if mask >> g & 1 == 1 {
            return None;
        }
        mask |= 1 << g;
        inv += gens[..i].iter().filter(|&&h| h > g).count();
    }
    Some((if inv % 2 == 0 { 1.0 } else { -1.0 }, mask))
}

/// Sign of `a ^ b` relative to the canonical order of `a | b` (masks must be disjoint).
fn wedge_sign(a: u32, b: u32) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> j).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// One of the four generator families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slot {
    HoloZeta = 0,
    AntiZeta = 1,
    HoloZ = 2,
    AntiZ = 3,
}

/// Which point of the pair an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Var {
    Zeta,
    Z,
}

impl Var {
    fn slots(self) -> (Slot, Slot) {
        match self {
            Var::Zeta => (Slot::HoloZeta, Slot::AntiZeta),
            Var::Z => (Slot::HoloZ, Slot::AntiZ),
        }
    }
}

/// A canonical basis element, stored as a generator mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Blade(pub u32);

impl Blade {
    pub fn gen(n: usize, slot: Slot, j: usize) -> Blade {
        Blade(1 << (slot as usize * n + j))
    }

    pub fn slot_mask(self, n: usize, slot: Slot) -> u32 {
        (self.0 >> (slot as usize * n)) & ((1u32 << n) - 1)
    }

    pub fn degree(self, n: usize, slot: Slot) -> usize {
        self.slot_mask(n, slot).count_ones() as usize
    }

    pub fn var_mask(self, n: usize, var: Var) -> u32 {
        let (h, a) = var.slots();
        self.0 & ((((1u32 << n) - 1) << (h as usize * n)) | (((1u32 << n) - 1) << (a as usize * n)))
    }

    pub fn component(self, n: usize) -> Component {
        Component {
            holo_zeta: MultiIndex::from_mask(self.slot_mask(n, Slot::HoloZeta)),
            anti_zeta: MultiIndex::from_mask(self.slot_mask(n, Slot::AntiZeta)),
            holo_z: MultiIndex::from_mask(self.slot_mask(n, Slot::HoloZ)),
            anti_z: MultiIndex::from_mask(self.slot_mask(n, Slot::AntiZ)),
        }
    }

    pub fn from_component(c: &Component, n: usize) -> Blade {
        Blade(
            c.holo_zeta.mask()
                | c.anti_zeta.mask() << n
                | c.holo_z.mask() << (2 * n)
                | c.anti_z.mask() << (3 * n),
        )
    }

    pub fn from_slots(n: usize, m: [u32; 4]) -> Blade {
        Blade(m[0] | m[1] << n | m[2] << (2 * n) | m[3] << (3 * n))
    }
}

/// The four index sets of a coefficient.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Component {
    pub holo_zeta: MultiIndex,
    pub anti_zeta: MultiIndex,
    pub holo_z: MultiIndex,
    pub anti_z: MultiIndex,
}

/// Coframe the coefficients refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameId {
    /// dzeta_j, dz_j.
    Coordinate,
    /// Boundary-adapted omega^j at zeta and Theta^j at z.
    Adapted,
}

/// Value of a double form at a point pair.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleForm {
    n: usize,
    frame: FrameId,
    coeffs: BTreeMap<Blade, C>,
}

impl DoubleForm {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_N, "dimension out of range");
        Self { n, frame: FrameId::Coordinate, coeffs: BTreeMap::new() }
    }

    pub fn scalar(n: usize, c: C) -> Self {
        let mut f = Self::zero(n);
        f.add_term(Blade(0), c);
        f
    }

    /// The 1-form `c * gen` for generator `j` (0-based) of `slot`.
    pub fn gen(n: usize, slot: Slot, j: usize, c: C) -> Self {
        let mut f = Self::zero(n);
        f.add_term(Blade::gen(n, slot, j), c);
        f
    }

    /// The 1-form `sum_j coeffs[j] * gen_j` in `slot`.
    pub fn one_form(n: usize, slot: Slot, coeffs: &[C]) -> Self {
        let mut f = Self::zero(n);
        for (j, &c) in coeffs.iter().enumerate() {
            f.add_term(Blade::gen(n, slot, j), c);
        }
        f
    }

    pub fn with_frame(mut self, frame: FrameId) -> Self {
        self.frame = frame;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frame(&self) -> FrameId {
        self.frame
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Blade, &C)> {
        self.coeffs.iter()
    }

    pub fn get(&self, b: Blade) -> C {
        self.coeffs.get(&b).copied().unwrap_or_default()
    }

    pub fn coeff(&self, c: &Component) -> C {
        self.get(Blade::from_component(c, self.n))
    }

    pub fn add_term(&mut self, b: Blade, c: C) {
        *self.coeffs.entry(b).or_default() += c;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| *c == C::new(0.0, 0.0))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        if self.frame != other.frame {
            return Err(Error::FrameMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (b, c) in &other.coeffs {
            out.add_term(*b, *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= s;
        }
        out
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C::new(s, 0.0))
    }

    /// Exterior product, graded-anticommutative in every slot.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self { n: self.n, frame: self.frame, coeffs: BTreeMap::new() };
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                if a.0 & b.0 != 0 {
                    continue;
                }
                let s = wedge_sign(a.0, b.0);
                out.add_term(Blade(a.0 | b.0), ca * cb * s);
            }
        }
        Ok(out)
    }

    /// `k`-fold wedge power; the 0th power is 1.
    pub fn pow(&self, k: usize) -> Result<Self> {
        let mut out = Self::scalar(self.n, C::new(1.0, 0.0)).with_frame(self.frame);
        for _ in 0..k {
            out = out.wedge(self)?;
        }
        Ok(out)
    }

    /// Apply a permutation of slots to every generator and re-sort.
    fn permute_slots(&self, map: [Slot; 4], conj: bool) -> Self {
        let n = self.n as u32;
        let mut out = Self { n: self.n, frame: self.frame, coeffs: BTreeMap::new() };
        for (b, c) in &self.coeffs {
            let gens: Vec<u32> = (0..32)
                .filter(|g| b.0 >> g & 1 == 1)
                .map(|g| map[(g / n) as usize] as u32 * n + g % n)
                .collect();
            let (s, m) = sort_sign(&gens).expect("slot permutation is injective");
            let c = if conj { c.conj() } else { *c };
            out.add_term(Blade(m), c * s);
        }
        out
    }

    /// Complex conjugate: coefficients conjugated, holomorphic and antiholomorphic generators exchanged.
    pub fn conj(&self) -> Self {
        self.permute_slots([Slot::AntiZeta, Slot::HoloZeta, Slot::AntiZ, Slot::HoloZ], true)
    }

    /// Exchange the roles of zeta and z.
    pub fn swap_vars(&self) -> Self {
        self.permute_slots([Slot::HoloZ, Slot::AntiZ, Slot::HoloZeta, Slot::AntiZeta], false)
    }

    /// Exchange the roles of zeta and z coefficientwise: the component
    /// `dzeta^I ^ dz^J` goes to `dzeta^J ^ dz^I` with the same coefficient.
    pub fn transpose_vars(&self) -> Self {
        let n = self.n;
        let mut out = self.swap_vars();
        for (b, c) in out.coeffs.iter_mut() {
            if (b.var_mask(n, Var::Zeta).count_ones() * b.var_mask(n, Var::Z).count_ones()) % 2 == 1 {
                *c = -*c;
            }
        }
        out
    }

    /// Set of degree quadruples (holo zeta, anti zeta, holo z, anti z) present.
    pub fn bidegrees(&self) -> Vec<[usize; 4]> {
        let mut v: Vec<[usize; 4]> = self
            .coeffs
            .keys()
            .map(|b| {
                [
                    b.degree(self.n, Slot::HoloZeta),
                    b.degree(self.n, Slot::AntiZeta),
                    b.degree(self.n, Slot::HoloZ),
                    b.degree(self.n, Slot::AntiZ),
                ]
            })
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn is_homogeneous(&self, var: Var) -> bool {
        let (h, a) = var.slots();
        let mut degs = self.coeffs.keys().map(|b| (b.degree(self.n, h), b.degree(self.n, a)));
        match degs.next() {
            None => true,
            Some(d0) => degs.all(|d| d == d0),
        }
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn dist(&self, other: &Self) -> f64 {
        self.sub(other).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Keep only the blades accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(Blade) -> bool) -> Self {
        Self {
            n: self.n,
            frame: self.frame,
            coeffs: self.coeffs.iter().filter(|(b, _)| keep(**b)).map(|(b, c)| (*b, *c)).collect(),
        }
    }

    /// Drop coefficients with modulus at most `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        self.filter(|b| self.get(b).norm() > tol)
    }

    /// Linear change of coframe in one variable: generator `j` of the
    /// holomorphic slot becomes `sum_a m[(j, a)] gen_a`, the antiholomorphic
    /// slot uses the conjugate matrix.
    pub fn map_generators(&self, var: Var, m: &DMatrix<C>, frame: FrameId) -> Self {
        let n = self.n;
        let (hs, as_) = var.slots();
        let images = |slot: Slot, conj: bool| -> Vec<DoubleForm> {
            (0..n)
                .map(|j| {
                    let row: Vec<C> =
                        (0..n).map(|a| if conj { m[(j, a)].conj() } else { m[(j, a)] }).collect();
                    DoubleForm::one_form(n, slot, &row)
                })
                .collect()
        };
        let hol = images(hs, false);
        let anti = images(as_, true);
        let mut out = Self::zero(n);
        for (b, c) in &self.coeffs {
            let mut part = Self::scalar(n, *c);
            for j in 0..n {
                if b.slot_mask(n, hs) >> j & 1 == 1 {
                    part = part.wedge(&hol[j]).expect("same frame");
                }
            }
            for j in 0..n {
                if b.slot_mask(n, as_) >> j & 1 == 1 {
                    part = part.wedge(&anti[j]).expect("same frame");
                }
            }
            let rest = Blade(b.0 & !b.var_mask(n, var));
            let mut r = Self::zero(n);
            r.add_term(rest, C::new(1.0, 0.0));
            let piece = match var {
                Var::Zeta => part.wedge(&r),
                Var::Z => r.wedge(&part),
            }
            .expect("same frame");
            out = out.add(&piece).expect("same frame");
        }
        out.frame = frame;
        out.filter(|b| out.get(b) != C::new(0.0, 0.0))
    }

    /// Hodge star in one variable for the given metric, fixed by `*1 = dV`
    /// and `f ^ *conj(g) = <f, g> dV`.
    pub fn hodge_star(&self, g: &Metric, var: Var) -> Result<Self> {
        if g.n() != self.n {
            return Err(Error::DimensionMismatch(g.n(), self.n));
        }
        if !self.is_homogeneous(var) {
            return Err(Error::NotHomogeneous);
        }
        if g.is_identity() {
            return Ok(self.star_orthonormal(var));
        }
        let a = g.orthonormal_coframe();
        let a_inv = a.clone().try_inverse().ok_or(Error::NotHomogeneous)?;
        let in_frame = self.map_generators(var, &a_inv, self.frame);
        Ok(in_frame.star_orthonormal(var).map_generators(var, &a, self.frame))
    }

    fn star_orthonormal(&self, var: Var) -> Self {
        let n = self.n;
        let full = (1u32 << n) - 1;
        let (hs, as_) = var.slots();
        let dv = volume_coefficient(n);
        let mut out = Self { n, frame: self.frame, coeffs: BTreeMap::new() };
        for (b, c) in &self.coeffs {
            let ia = b.slot_mask(n, hs);
            let ib = b.slot_mask(n, as_);
            // sigma: sign of e^B ^ ebar^A ^ e^{B^c} ^ ebar^{A^c} against the full blade.
            let mut gens: Vec<u32> = Vec::with_capacity(2 * n);
            let bits = |m: u32, off: u32| (0..n as u32).filter(move |j| m >> j & 1 == 1).map(move |j| j + off);
            gens.extend(bits(ib, 0));
            gens.extend(bits(ia, n as u32));
            gens.extend(bits(full & !ib, 0));
            gens.extend(bits(full & !ia, n as u32));
            let (sigma, _) = sort_sign(&gens).expect("complementary sets");
            let parity = if (ia.count_ones() * ib.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
            let s = dv * sigma * parity;
            let mut m = [
                b.slot_mask(n, Slot::HoloZeta),
                b.slot_mask(n, Slot::AntiZeta),
                b.slot_mask(n, Slot::HoloZ),
                b.slot_mask(n, Slot::AntiZ),
            ];
            m[hs as usize] = full & !ib;
            m[as_ as usize] = full & !ia;
            out.add_term(Blade::from_slots(n, m), c * s);
        }
        out
    }

    /// Coefficient of `dV` in the given variable, as a form in the other one.
    /// Blades that are not of top degree in `var` are discarded.
    pub fn top_coefficient(&self, var: Var) -> Self {
        let n = self.n;
        let dv = volume_coefficient(n);
        let full = DoubleForm::volume(n, var);
        let full_mask = full.coeffs.keys().next().expect("volume blade").0;
        let mut out = Self { n, frame: self.frame, coeffs: BTreeMap::new() };
        for (b, c) in &self.coeffs {
            if b.var_mask(n, var) == full_mask {
                out.add_term(Blade(b.0 & !full_mask), c / dv);
            }
        }
        out
    }

    /// Volume form `prod_j (i e^j ^ ebar^j)` of an orthonormal coframe in `var`.
    pub fn volume(n: usize, var: Var) -> Self {
        let (hs, as_) = var.slots();
        let mut m = [0u32; 4];
        m[hs as usize] = (1 << n) - 1;
        m[as_ as usize] = (1 << n) - 1;
        let mut f = Self::zero(n);
        f.add_term(Blade::from_slots(n, m), volume_coefficient(n));
        f
    }

    /// Complex-tangential part at a boundary point: components containing
    /// `omega^n` or its conjugate are dropped. `coframe` has rows `omega^a`
    /// in coordinates with `omega^n` the normalized `dr`.
    pub fn restrict_tangential(&self, coframe: &DMatrix<C>) -> Result<Self> {
        let n = self.n;
        let inv = coframe.clone().try_inverse().ok_or(Error::SingularFramePoint(0.0))?;
        let adapted = self.map_generators(Var::Zeta, &inv, FrameId::Adapted);
        let last = 1u32 << (n - 1);
        let kept = adapted.filter(|b| {
            b.slot_mask(n, Slot::HoloZeta) & last == 0 && b.slot_mask(n, Slot::AntiZeta) & last == 0
        });
        Ok(kept.map_generators(Var::Zeta, coframe, FrameId::Coordinate))
    }

    /// Real pullback to the boundary hypersurface at a non-singular point:
    /// there `dr = gamma (omega^n + conj omega^n)` vanishes, so `conj omega^n`
    /// is replaced by `-omega^n`. Returned in the adapted frame.
    pub fn pullback_boundary(&self, coframe: &DMatrix<C>) -> Result<Self> {
        let n = self.n;
        let inv = coframe.clone().try_inverse().ok_or(Error::SingularFramePoint(0.0))?;
        let adapted = self.map_generators(Var::Zeta, &inv, FrameId::Adapted);
        let conj_last = (n + n - 1) as u32;
        let last = (n - 1) as u32;
        let mut out = Self::zero(n).with_frame(FrameId::Adapted);
        for (b, c) in adapted.terms() {
            if b.0 >> conj_last & 1 == 0 {
                out.add_term(*b, *c);
                continue;
            }
            let gens: Vec<u32> =
                (0..32).filter(|g| b.0 >> g & 1 == 1).map(|g| if g == conj_last { last } else { g }).collect();
            if let Some((s, m)) = sort_sign(&gens) {
                out.add_term(Blade(m), -*c * s);
            }
        }
        Ok(out)
    }
}

/// Coefficient of the canonical full blade in `dV = prod_j (i e^j ^ ebar^j)`.
fn volume_coefficient(n: usize) -> C {
    let gens: Vec<u32> = (0..n as u32).flat_map(|j| [j, j + n as u32]).collect();
    let (s, _) = sort_sign(&gens).expect("distinct generators");
    C::new(0.0, 1.0).powu(n as u32) * s
}

/// Hermitian positive-definite matrix of Levi coefficients `r_{j kbar}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    h: DMatrix<C>,
}

impl Metric {
    pub fn new(h: DMatrix<C>) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n {
            return Err(Error::DimensionMismatch(n, h.ncols()));
        }
        let herm = (&h - h.adjoint()).iter().all(|c| c.norm() < 1e-12 * (1.0 + h.norm()));
        if !herm || h.clone().cholesky().is_none() {
            return Err(Error::Constraint("metric must be Hermitian positive definite".into()));
        }
        Ok(Self { h })
    }

    pub fn identity(n: usize) -> Self {
        Self { h: DMatrix::identity(n, n) }
    }

    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C> {
        &self.h
    }

    pub fn is_identity(&self) -> bool {
        (&self.h - DMatrix::<C>::identity(self.n(), self.n())).iter().all(|c| c.norm() < 1e-14)
    }

    /// Inner product of (1,0)-covectors `<a, b> = b^* H^{-1} a`.
    pub fn covector_inner(&self, a: &[C], b: &[C]) -> C {
        let n = self.n();
        if self.is_identity() {
            return (0..n).map(|j| a[j] * b[j].conj()).sum();
        }
        let hinv = self.h.clone().try_inverse().expect("positive definite");
        let mut s = C::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                s += b[j].conj() * hinv[(j, k)] * a[k];
            }
        }
        s
    }

    /// Rows of the returned matrix are an orthonormal coframe `e^a = sum_j A[a][j] dzeta_j`.
    pub fn orthonormal_coframe(&self) -> DMatrix<C> {
        let l = self.h.clone().cholesky().expect("positive definite").l();
        l.transpose()
    }

    /// Smallest eigenvalue of the Hermitian matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.h).into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues of a Hermitian matrix via its real symmetric 2n x 2n embedding (each appears twice).
pub fn hermitian_eigenvalues(h: &DMatrix<C>) -> Vec<f64> {
    let n = h.nrows();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let c = h[(i, j)];
            m[(i, j)] = c.re;
            m[(i + n, j + n)] = c.re;
            m[(i, j + n)] = -c.im;
            m[(i + n, j)] = c.im;
        }
    }
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev.into_iter().step_by(2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> C {
        C::new(1.0, 0.0)
    }

    #[test]
    fn wedge_unit_and_repeat() {
        let w1 = DoubleForm::gen(2, Slot::AntiZeta, 0, one());
        let unit = DoubleForm::scalar(2, one());
        assert_eq!(unit.wedge(&w1).unwrap(), w1);
        assert!(w1.wedge(&w1).unwrap().is_zero());
    }

    #[test]
    fn wedge_anticommutes_on_one_forms() {
        let a = DoubleForm::gen(2, Slot::AntiZeta, 0, one());
        let b = DoubleForm::gen(2, Slot::AntiZeta, 1, one());
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        assert_eq!(ab, ba.scale_re(-1.0));
    }

    #[test]
    fn perm_sign_cases() {
        assert_eq!(perm_sign(&[1, 2], &[1, 2]), 1);
        assert_eq!(perm_sign(&[2, 1], &[1, 2]), -1);
        assert_eq!(perm_sign(&[1, 1], &[1, 2]), 0);
    }

    #[test]
    fn star_of_one_is_volume_and_back() {
        for n in 1..=4 {
            let g = Metric::identity(n);
            let one_f = DoubleForm::scalar(n, one());
            let dv = DoubleForm::volume(n, Var::Zeta);
            assert_eq!(one_f.hodge_star(&g, Var::Zeta).unwrap(), dv);
            let back = dv.hodge_star(&g, Var::Zeta).unwrap();
            assert!((back.get(Blade(0)) - one()).norm() < 1e-14);
        }
    }

    #[test]
    fn multi_index_validation() {
        assert!(MultiIndex::new(vec![1, 3], 3).is_ok());
        assert!(MultiIndex::new(vec![3, 1], 3).is_err());
        assert!(MultiIndex::new(vec![4], 3).is_err());
        assert_eq!(MultiIndex::all(4, 2).len(), 6);
    }

    #[test]
    fn component_round_trip() {
        let n = 3;
        let b = Blade(0b101_011_110_001);
        assert_eq!(Blade::from_component(&b.component(n), n), b);
    }

    #[test]
    fn restrict_drops_conormal_and_keeps_tangential() {
        let n = 2;
        let frame = DMatrix::<C>::identity(n, n);
        let dr = DoubleForm::gen(n, Slot::HoloZeta, 1, one());
        assert!(dr.restrict_tangential(&frame).unwrap().is_zero());
        let t = DoubleForm::gen(n, Slot::AntiZeta, 0, one());
        assert_eq!(t.restrict_tangential(&frame).unwrap(), t);
        let mixed = dr.wedge(&t).unwrap();
        assert!(mixed.restrict_tangential(&frame).unwrap().is_zero());
    }
}
