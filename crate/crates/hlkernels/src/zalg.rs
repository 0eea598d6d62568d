//! Formal Z-operator algebra: operator chains applied to argument symbols,
//! the rewrite rules that commute and absorb weights, and mechanical
//! derivation of the weighted representation identities.

use crate::error::{Error, Result};
use crate::typecalc::Rational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Kernel of an explicit head pairing `gamma*(., K)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairKernel {
    /// `N_q`; `gamma* N_q` is a `Z_2`.
    N,
    /// `T_{q-1}`; `gamma* T_{q-1}` is a `Z_1`.
    T,
    /// `T_q^*`; `gamma* T_q^*` is a `Z_1`.
    TStar,
}

impl PairKernel {
    pub fn z_type(self) -> u32 {
        match self {
            PairKernel::N => 2,
            PairKernel::T | PairKernel::TStar => 1,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            PairKernel::N => "N_q",
            PairKernel::T => "T_{q-1}",
            PairKernel::TStar => "T_q^*",
        }
    }
}

/// One factor of an operator chain, read left to right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Op {
    /// Multiplication by `gamma^m`.
    Gamma(u32),
    /// A generic Z-operator of type `>= k`.
    Z(u32),
    /// The explicit pairing `gamma*(., K)`.
    Pair(PairKernel),
}

/// What the chain is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArgKind {
    F,
    BoxF,
    DbarF,
    DbarStarF,
    NF,
    BoxNF,
    DbarNF,
    DbarStarNF,
    HF,
}

impl ArgKind {
    fn render(self, base: &str) -> String {
        match self {
            ArgKind::F => base.to_string(),
            ArgKind::BoxF => format!("□{base}"),
            ArgKind::DbarF => format!("∂̄{base}"),
            ArgKind::DbarStarF => format!("∂̄*{base}"),
            ArgKind::NF => format!("N_q {base}"),
            ArgKind::BoxNF => format!("□N_q {base}"),
            ArgKind::DbarNF => format!("∂̄N_q {base}"),
            ArgKind::DbarStarNF => format!("∂̄*N_q {base}"),
            ArgKind::HF => format!("H_q {base}"),
        }
    }

    /// `f -> N_q f`.
    fn substitute_n(self) -> Self {
        match self {
            ArgKind::F => ArgKind::NF,
            ArgKind::BoxF => ArgKind::BoxNF,
            ArgKind::DbarF => ArgKind::DbarNF,
            ArgKind::DbarStarF => ArgKind::DbarStarNF,
            other => other,
        }
    }

    /// L2-bounded operator the argument is obtained with, if it belongs in a ledger tail.
    fn bounded(self) -> Option<BoundedOp> {
        match self {
            ArgKind::NF => Some(BoundedOp::N),
            ArgKind::DbarNF => Some(BoundedOp::DbarN),
            ArgKind::DbarStarNF => Some(BoundedOp::DbarStarN),
            ArgKind::HF => Some(BoundedOp::H),
            _ => None,
        }
    }
}

/// Argument symbol: a base name and what has been applied to it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Arg {
    pub base: String,
    pub kind: ArgKind,
}

impl Arg {
    pub fn new(base: &str, kind: ArgKind) -> Self {
        Self { base: base.into(), kind }
    }
}

/// `coef * op_1 o ... o op_k (arg)`. Z-headed terms always carry coefficient 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub arg: Arg,
    pub ops: Vec<Op>,
    pub coef: i32,
}

impl Term {
    pub fn new(ops: Vec<Op>, arg: Arg) -> Self {
        let mut t = Self { arg, ops, coef: 1 };
        t.normalize_coef();
        t
    }

    fn with_coef(mut self, coef: i32) -> Self {
        self.coef = coef;
        self.normalize_coef();
        self
    }

    fn normalize_coef(&mut self) {
        if matches!(self.ops.first(), Some(Op::Z(_))) {
            self.coef = 1;
        }
    }

    /// Lower bound for the Z-type of the term as an operator on its argument.
    pub fn z_type(&self) -> u32 {
        self.ops
            .iter()
            .map(|o| match o {
                Op::Gamma(_) => 0,
                Op::Z(k) => *k,
                Op::Pair(k) => k.z_type(),
            })
            .sum()
    }

    fn is_z_headed(&self) -> bool {
        matches!(self.ops.first(), Some(Op::Z(_)))
    }
}

fn sup(n: u32) -> String {
    if n == 1 {
        String::new()
    } else {
        format!("^{n}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coef == -1 {
            write!(f, "-")?;
        } else if self.coef != 1 {
            write!(f, "{} ", self.coef)?;
        }
        let arg = self.arg.kind.render(&self.arg.base);
        // Render right to left so that a pairing wraps everything after it.
        let mut inner = arg;
        for op in self.ops.iter().rev() {
            inner = match op {
                Op::Gamma(m) => format!("γ{} {inner}", sup(*m)),
                Op::Z(k) => format!("Z_{k} {inner}"),
                Op::Pair(k) => format!("γ*({inner}, {})", k.symbol()),
            };
        }
        write!(f, "{inner}")
    }
}

/// L2-bounded operator at the end of a ledger tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundedOp {
    N,
    DbarN,
    DbarStarN,
    H,
}

/// `C_m^{(k)} = Z_m + sum_alpha Z_k^alpha K_alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsymptoticLedger {
    pub m: u32,
    pub k: u32,
    pub tail: Vec<(u32, BoundedOp)>,
}

/// Formal sum of terms, optionally with an asymptotic ledger.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ZExpr {
    pub terms: Vec<Term>,
    pub ledger: Option<AsymptoticLedger>,
}

impl fmt::Display for ZExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        if let Some(l) = &self.ledger {
            parts.push(format!("C_{}^({}) f", l.m, l.k));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl ZExpr {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms, ledger: None }
    }

    pub fn single(ops: Vec<Op>, arg: Arg) -> Self {
        Self::new(vec![Term::new(ops, arg)])
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Compose every term with `ops` on the left.
    pub fn left_compose(&self, ops: &[Op]) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term::new(ops.iter().copied().chain(t.ops.iter().copied()).collect(), t.arg.clone()).with_coef(t.coef))
            .collect();
        Self { terms, ledger: self.ledger.clone() }
    }

    pub fn bases(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.terms.iter().map(|t| t.arg.base.as_str()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Replace `gamma` by 1: drop every gamma factor and merge.
    pub fn collapse_gamma(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term::new(t.ops.iter().copied().filter(|o| !matches!(o, Op::Gamma(_))).collect(), t.arg.clone()).with_coef(t.coef))
            .collect();
        merge(Self { terms, ledger: self.ledger.clone() })
    }
}

/// Names of the rewrite rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    /// `gamma^a gamma^b -> gamma^{a+b}`, `gamma^0 -> 1`.
    GammaFuse,
    /// R1: `Z_i Z_j -> Z_{i+j}` (pairings count with their Z-type).
    Compose,
    /// R2: `gamma^m Z_k -> Z_k gamma^m + Z_{k+1}`.
    GammaCommute,
    /// R3: `Box N_q f -> f - H_q f`.
    BoxN,
    /// R4: the three weighted representations of `gamma^3 f`, `gamma^3 dbar f`, `gamma^3 dbar* f`.
    Gamma3,
    /// R5: `gamma^{2j} H_q f -> Z_j H_q f`.
    Harmonic,
    /// `Z_1 gamma^a Box f -> gamma*(gamma^a Box f, T) + Z_2 gamma^a Box f`.
    Principal,
}

/// One rule application.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub rule: Rule,
    pub before: String,
    pub after: Vec<String>,
}

/// Right-hand side of R4 for `gamma^3 X`.
pub fn gamma3_expansion(x: ArgKind, base: &str) -> Option<Vec<Term>> {
    let a = |k| Arg::new(base, k);
    Some(match x {
        ArgKind::F => vec![
            Term::new(vec![Op::Pair(PairKernel::N), Op::Gamma(2)], a(ArgKind::BoxF)),
            Term::new(vec![Op::Z(2)], a(ArgKind::DbarF)),
            Term::new(vec![Op::Z(2)], a(ArgKind::DbarStarF)),
            Term::new(vec![Op::Z(1)], a(ArgKind::F)),
        ],
        ArgKind::DbarF | ArgKind::DbarStarF => vec![
            Term::new(vec![Op::Z(1), Op::Gamma(2)], a(ArgKind::BoxF)),
            Term::new(vec![Op::Z(1)], a(ArgKind::DbarF)),
            Term::new(vec![Op::Z(1)], a(ArgKind::DbarStarF)),
        ],
        _ => return None,
    })
}

/// A redex: term index, rule, and position in the chain.
#[derive(Clone, Copy, Debug)]
struct Redex {
    term: usize,
    rule: Rule,
    pos: usize,
}

fn op_type(o: Op) -> Option<u32> {
    match o {
        Op::Z(k) => Some(k),
        Op::Pair(k) => Some(k.z_type()),
        Op::Gamma(_) => None,
    }
}

fn redexes_of(t: &Term, idx: usize, out: &mut Vec<Redex>) {
    let ops = &t.ops;
    for (i, o) in ops.iter().enumerate() {
        if *o == Op::Gamma(0) {
            out.push(Redex { term: idx, rule: Rule::GammaFuse, pos: i });
        }
    }
    for i in 0..ops.len().saturating_sub(1) {
        if let (Op::Gamma(_), Op::Gamma(_)) = (ops[i], ops[i + 1]) {
            out.push(Redex { term: idx, rule: Rule::GammaFuse, pos: i });
        }
    }
    // Weights fuse before any other rule sees them.
    if out.last().is_some_and(|r| r.term == idx) {
        return;
    }
    for i in 0..ops.len().saturating_sub(1) {
        match (ops[i], ops[i + 1]) {
            (Op::Gamma(_), Op::Z(_) | Op::Pair(_)) => out.push(Redex { term: idx, rule: Rule::GammaCommute, pos: i }),
            (a, b) if op_type(a).is_some() && op_type(b).is_some() => {
                out.push(Redex { term: idx, rule: Rule::Compose, pos: i })
            }
            _ => {}
        }
    }
    // Weights reach the argument before it absorbs them.
    if out.last().is_some_and(|r| r.term == idx) {
        return;
    }
    let last = ops.len().wrapping_sub(1);
    match (ops.last(), t.arg.kind) {
        (Some(Op::Gamma(a)), ArgKind::F | ArgKind::DbarF | ArgKind::DbarStarF) if *a >= 3 => {
            out.push(Redex { term: idx, rule: Rule::Gamma3, pos: last })
        }
        (Some(Op::Gamma(a)), ArgKind::HF) if *a >= 2 => out.push(Redex { term: idx, rule: Rule::Harmonic, pos: last }),
        _ => {}
    }
    if t.arg.kind == ArgKind::BoxNF {
        out.push(Redex { term: idx, rule: Rule::BoxN, pos: ops.len() });
    }
}

fn redexes(e: &ZExpr) -> Vec<Redex> {
    let mut out = Vec::new();
    for (i, t) in e.terms.iter().enumerate() {
        redexes_of(t, i, &mut out);
    }
    out
}

/// Apply one redex and return the replacement terms.
fn apply(t: &Term, r: Redex) -> Vec<Term> {
    let ops = &t.ops;
    let pre = &ops[..r.pos.min(ops.len())];
    let mk = |v: Vec<Op>, arg: &Arg, coef: i32| Term::new(v, arg.clone()).with_coef(coef);
    match r.rule {
        Rule::GammaFuse => {
            let mut v = pre.to_vec();
            if ops[r.pos] == Op::Gamma(0) {
                v.extend_from_slice(&ops[r.pos + 1..]);
            } else if let (Op::Gamma(a), Op::Gamma(b)) = (ops[r.pos], ops[r.pos + 1]) {
                v.push(Op::Gamma(a + b));
                v.extend_from_slice(&ops[r.pos + 2..]);
            }
            vec![mk(v, &t.arg, t.coef)]
        }
        Rule::Compose => {
            let k = op_type(ops[r.pos]).unwrap() + op_type(ops[r.pos + 1]).unwrap();
            let mut v = pre.to_vec();
            v.push(Op::Z(k));
            v.extend_from_slice(&ops[r.pos + 2..]);
            vec![mk(v, &t.arg, t.coef)]
        }
        Rule::GammaCommute => {
            let m = ops[r.pos];
            let z = ops[r.pos + 1];
            let mut a = pre.to_vec();
            a.push(z);
            a.push(m);
            a.extend_from_slice(&ops[r.pos + 2..]);
            let mut b = pre.to_vec();
            b.push(Op::Z(op_type(z).unwrap() + 1));
            b.extend_from_slice(&ops[r.pos + 2..]);
            vec![mk(a, &t.arg, t.coef), mk(b, &t.arg, t.coef)]
        }
        Rule::Gamma3 => {
            let Op::Gamma(a) = ops[r.pos] else { unreachable!() };
            let mut head = pre.to_vec();
            if a > 3 {
                head.push(Op::Gamma(a - 3));
            }
            gamma3_expansion(t.arg.kind, &t.arg.base)
                .expect("redex checked")
                .into_iter()
                .map(|e| mk(head.iter().copied().chain(e.ops).collect(), &e.arg, t.coef * e.coef))
                .collect()
        }
        Rule::Harmonic => {
            let Op::Gamma(a) = ops[r.pos] else { unreachable!() };
            let mut v = pre.to_vec();
            v.push(Op::Z(a / 2));
            vec![mk(v, &t.arg, t.coef)]
        }
        Rule::BoxN => {
            let f = Arg::new(&t.arg.base, ArgKind::F);
            let h = Arg::new(&t.arg.base, ArgKind::HF);
            vec![mk(ops.clone(), &f, t.coef), mk(ops.clone(), &h, -t.coef)]
        }
        Rule::Principal => unreachable!("applied explicitly"),
    }
}

/// Canonical merge: Z-headed terms with equal tail and argument keep the
/// minimum type; all other terms add their coefficients.
pub fn merge(e: ZExpr) -> ZExpr {
    let mut zmin: BTreeMap<(Vec<Op>, Arg), u32> = BTreeMap::new();
    let mut other: BTreeMap<(Vec<Op>, Arg), i32> = BTreeMap::new();
    for t in e.terms {
        if let Some(Op::Z(k)) = t.ops.first() {
            let key = (t.ops[1..].to_vec(), t.arg.clone());
            let v = zmin.entry(key).or_insert(*k);
            *v = (*v).min(*k);
        } else {
            *other.entry((t.ops.clone(), t.arg.clone())).or_insert(0) += t.coef;
        }
    }
    let mut terms: Vec<Term> = zmin
        .into_iter()
        .map(|((rest, arg), k)| Term::new(std::iter::once(Op::Z(k)).chain(rest).collect(), arg))
        .chain(other.into_iter().filter(|(_, c)| *c != 0).map(|((ops, arg), c)| Term::new(ops, arg).with_coef(c)))
        .collect();
    terms.sort();
    ZExpr { terms, ledger: e.ledger }
}

fn run(
    mut e: ZExpr,
    allowed: &[Rule],
    mut pick: impl FnMut(&[Redex]) -> Redex,
    mut log: Option<&mut Vec<Step>>,
) -> ZExpr {
    loop {
        let rs: Vec<Redex> = redexes(&e).into_iter().filter(|r| allowed.contains(&r.rule)).collect();
        if rs.is_empty() {
            return merge(e);
        }
        let r = pick(&rs);
        let t = e.terms.remove(r.term);
        let repl = apply(&t, r);
        if let Some(l) = log.as_deref_mut() {
            l.push(Step { rule: r.rule, before: t.to_string(), after: repl.iter().map(|x| x.to_string()).collect() });
        }
        e.terms.extend(repl);
    }
}

const ALL_RULES: [Rule; 6] =
    [Rule::GammaFuse, Rule::Compose, Rule::GammaCommute, Rule::BoxN, Rule::Gamma3, Rule::Harmonic];

/// Rules used once `f -> N_q f` has been substituted; the weighted `f` terms stay as they are.
const SUBSTITUTED_RULES: [Rule; 5] = [Rule::GammaFuse, Rule::Compose, Rule::GammaCommute, Rule::BoxN, Rule::Harmonic];

/// Normal form under exhaustive application of the rewrite rules.
pub fn simplify(e: &ZExpr) -> ZExpr {
    run(e.clone(), &ALL_RULES, |rs| rs[0], None)
}

/// Normal form together with the rule applications that produced it.
pub fn simplify_logged(e: &ZExpr) -> (ZExpr, Vec<Step>) {
    simplify_logged_with(e, &ALL_RULES)
}

fn simplify_logged_with(e: &ZExpr, allowed: &[Rule]) -> (ZExpr, Vec<Step>) {
    let mut log = Vec::new();
    let out = run(e.clone(), allowed, |rs| rs[0], Some(&mut log));
    (out, log)
}

/// Normal form with the redex chosen uniformly at random at every step.
pub fn simplify_randomized(e: &ZExpr, seed: u64) -> ZExpr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = e.clone();
    shuffled.terms.shuffle(&mut rng);
    run(shuffled, &ALL_RULES, |rs| rs[rng.gen_range(0..rs.len())], None)
}

/// Part of the weighted representation theorem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MainPart {
    /// `gamma^{3j} f`.
    I,
    /// `gamma^{3j} dbar f`.
    II,
    /// `gamma^{3j} dbar* f`.
    III,
}

impl MainPart {
    pub fn arg(self) -> ArgKind {
        match self {
            MainPart::I => ArgKind::F,
            MainPart::II => ArgKind::DbarF,
            MainPart::III => ArgKind::DbarStarF,
        }
    }
}

impl std::str::FromStr for MainPart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" | "I" => Ok(MainPart::I),
            "ii" | "II" => Ok(MainPart::II),
            "iii" | "III" => Ok(MainPart::III),
            _ => Err(Error::Parse(format!("unknown part '{s}'"))),
        }
    }
}

/// Which Neumann-type operator the asymptotic development is for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntKind {
    N,
    DbarN,
    DbarStarN,
}

impl std::str::FromStr for IntKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "N" => Ok(IntKind::N),
            "dbarN" => Ok(IntKind::DbarN),
            "dbarstarN" => Ok(IntKind::DbarStarN),
            _ => Err(Error::Parse(format!("unknown kind '{s}'"))),
        }
    }
}

/// A derived identity with its transcript.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Derivation {
    pub lhs: String,
    pub rhs: ZExpr,
    pub rhs_text: String,
    pub steps: Vec<Step>,
}

const BASE: &str = "f";

/// `gamma^{3j} X` in normal form, built by multiplying the `j-1` form by `gamma^3`.
pub fn derive_mainint(j: u32, part: MainPart) -> Result<Derivation> {
    if j == 0 {
        return Err(Error::OutOfRange("j must be at least 1".into()));
    }
    let mut steps = Vec::new();
    let mut cur = ZExpr::single(vec![Op::Gamma(3)], Arg::new(BASE, part.arg()));
    let (mut nf, log) = simplify_logged(&cur);
    steps.extend(log);
    for _ in 1..j {
        cur = nf.left_compose(&[Op::Gamma(3)]);
        let (next, log) = simplify_logged(&cur);
        steps.extend(log);
        nf = next;
    }
    let lhs = format!("γ^{} {}", 3 * j, part.arg().render(BASE));
    Ok(Derivation { lhs, rhs_text: nf.to_string(), rhs: nf, steps })
}

/// Displayed normal forms of the weighted representation theorem.
pub fn expected_mainint(j: u32, part: MainPart) -> ZExpr {
    let a = |k| Arg::new(BASE, k);
    let mut t = Vec::new();
    match part {
        MainPart::I => {
            t.push(Term::new(vec![Op::Pair(PairKernel::N), Op::Gamma(3 * j - 1)], a(ArgKind::BoxF)));
            for k in 3..=j + 1 {
                t.push(Term::new(vec![Op::Z(k), Op::Gamma(3 * (j + 2 - k) - 1)], a(ArgKind::BoxF)));
            }
            t.push(Term::new(vec![Op::Z(j + 1)], a(ArgKind::DbarF)));
            t.push(Term::new(vec![Op::Z(j + 1)], a(ArgKind::DbarStarF)));
            t.push(Term::new(vec![Op::Z(j)], a(ArgKind::F)));
        }
        MainPart::II | MainPart::III => {
            for k in 1..=j {
                t.push(Term::new(vec![Op::Z(k), Op::Gamma(3 * (j - k) + 2)], a(ArgKind::BoxF)));
            }
            t.push(Term::new(vec![Op::Z(j)], a(ArgKind::DbarF)));
            t.push(Term::new(vec![Op::Z(j)], a(ArgKind::DbarStarF)));
        }
    }
    merge(ZExpr::new(t))
}

/// Replace the leading `Z_1 gamma^a Box f` by the explicit pairing with `kernel`
/// plus a `Z_2` remainder.
fn principalize(e: &ZExpr, a: u32, kernel: PairKernel, steps: &mut Vec<Step>) -> ZExpr {
    let target = Term::new(vec![Op::Z(1), Op::Gamma(a)], Arg::new(BASE, ArgKind::BoxF));
    let mut out = ZExpr { terms: Vec::new(), ledger: e.ledger.clone() };
    for t in &e.terms {
        if *t == target {
            let repl = vec![
                Term::new(vec![Op::Pair(kernel), Op::Gamma(a)], t.arg.clone()),
                Term::new(vec![Op::Z(2), Op::Gamma(a)], t.arg.clone()),
            ];
            steps.push(Step { rule: Rule::Principal, before: t.to_string(), after: repl.iter().map(|x| x.to_string()).collect() });
            out.terms.extend(repl);
        } else {
            out.terms.push(t.clone());
        }
    }
    merge(out)
}

/// Substitute `f -> N_q f` in every argument.
pub fn substitute_n(e: &ZExpr) -> ZExpr {
    let terms = e
        .terms
        .iter()
        .map(|t| Term::new(t.ops.clone(), Arg::new(&t.arg.base, t.arg.kind.substitute_n())).with_coef(t.coef))
        .collect();
    ZExpr { terms, ledger: e.ledger.clone() }
}

/// Fold tails `Z_k K_alpha f` into a ledger `C_j^{(j)}` (requires every tail type `>= j`),
/// and weaken `Z_k gamma^a f` with `k >= k0`, `a >= a0` to `Z_{k0} gamma^{a0} f`.
pub fn fold_ledger(e: &ZExpr, j: u32, k0: u32, a0: u32) -> ZExpr {
    let mut tail = Vec::new();
    let mut rest = Vec::new();
    for t in &e.terms {
        match (t.arg.kind.bounded(), t.ops.first()) {
            (Some(b), Some(Op::Z(_))) => tail.push((t.z_type(), b)),
            _ => {
                let weak = match t.ops.as_slice() {
                    [Op::Z(k), Op::Gamma(a)] if t.arg.kind == ArgKind::F && *k >= k0 && *a >= a0 => {
                        Some(Term::new(vec![Op::Z(k0), Op::Gamma(a0)], t.arg.clone()))
                    }
                    _ => None,
                };
                rest.push(weak.unwrap_or_else(|| t.clone()));
            }
        }
    }
    tail.sort();
    tail.dedup();
    let kmin = tail.iter().map(|(k, _)| *k).min().unwrap_or(j);
    let mut out = merge(ZExpr::new(rest));
    out.ledger = Some(AsymptoticLedger { m: j.min(kmin), k: j.min(kmin), tail });
    out
}

/// `gamma^{3j} A f` for `A` in `N_q`, `dbar N_q`, `dbar* N_q`, as a head pairing,
/// one weighted Z-term and an asymptotic ledger.
pub fn derive_intmain(kind: IntKind, j: u32) -> Result<Derivation> {
    let (part, kernel, k0) = match kind {
        IntKind::N => (MainPart::I, None, 3),
        IntKind::DbarN => (MainPart::II, Some(PairKernel::TStar), 2),
        IntKind::DbarStarN => (MainPart::III, Some(PairKernel::T), 2),
    };
    let mut d = derive_mainint(j, part)?;
    let mut e = d.rhs.clone();
    if let Some(k) = kernel {
        e = principalize(&e, 3 * j - 1, k, &mut d.steps);
    }
    let (e, log) = simplify_logged_with(&substitute_n(&e), &SUBSTITUTED_RULES);
    d.steps.extend(log);
    let out = fold_ledger(&e, j, k0, 2);
    let lhs = match kind {
        IntKind::N => format!("γ^{} N_q f", 3 * j),
        IntKind::DbarN => format!("γ^{} ∂̄N_q f", 3 * j),
        IntKind::DbarStarN => format!("γ^{} ∂̄*N_q f", 3 * j),
    };
    Ok(Derivation { lhs, rhs_text: out.to_string(), rhs: out, steps: d.steps })
}

/// Displayed normal forms of the asymptotic development.
pub fn expected_intmain(kind: IntKind, j: u32) -> ZExpr {
    let f = Arg::new(BASE, ArgKind::F);
    let (kernel, k0) = match kind {
        IntKind::N => (PairKernel::N, 3),
        IntKind::DbarN => (PairKernel::TStar, 2),
        IntKind::DbarStarN => (PairKernel::T, 2),
    };
    let mut t = vec![Term::new(vec![Op::Pair(kernel), Op::Gamma(3 * j - 1)], f.clone())];
    // For N_q the weighted Z_3 term comes from an empty sum when j = 1.
    if kind != IntKind::N || j >= 2 {
        t.push(Term::new(vec![Op::Z(k0), Op::Gamma(2)], f));
    }
    merge(ZExpr::new(t))
}

/// Term-multiset equality of the non-ledger part, plus `C_j^{(j)}` for the ledger.
pub fn matches_intmain(d: &ZExpr, kind: IntKind, j: u32) -> bool {
    let exp = expected_intmain(kind, j);
    let ledger_ok = d.ledger.as_ref().is_some_and(|l| l.m == j && l.k == j && l.tail.iter().all(|(k, _)| *k >= j));
    d.terms == exp.terms && ledger_ok
}

/// Minimum Z-type in `a - b`, ignoring ledgers; `None` when the difference is empty.
pub fn principal_part_type(a: &ZExpr, b: &ZExpr) -> Result<Option<u32>> {
    if a.bases() != b.bases() {
        return Err(Error::NotComparable);
    }
    let neg = ZExpr::new(b.terms.iter().map(|t| t.clone().with_coef(-t.coef)).collect());
    let mut all = a.terms.clone();
    for t in neg.terms {
        // Z-terms do not cancel: a generic Z_k minus a generic Z_k is a Z_k.
        if t.is_z_headed() && a.terms.contains(&t) {
            continue;
        }
        all.push(t);
    }
    let diff = merge(ZExpr::new(all));
    Ok(diff.terms.iter().map(|t| t.z_type()).min())
}

/// Principal-part certification for one operator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrincipalCert {
    pub kind: IntKind,
    pub j: u32,
    pub head_type: u32,
    pub difference_type: Option<u32>,
}

impl PrincipalCert {
    /// The difference has type at least one more than the head.
    pub fn certified(&self) -> bool {
        self.difference_type.map_or(true, |d| d > self.head_type)
    }
}

/// Compare `gamma^{3j} A f` with `gamma^{3j}` applied to the explicit principal part.
pub fn certify_principal_part(kind: IntKind, j: u32) -> Result<PrincipalCert> {
    let kernel = match kind {
        IntKind::N => PairKernel::N,
        IntKind::DbarN => PairKernel::TStar,
        IntKind::DbarStarN => PairKernel::T,
    };
    let a = derive_intmain(kind, j)?.rhs;
    let start = ZExpr::single(vec![Op::Gamma(3 * j - 1), Op::Pair(kernel)], Arg::new(BASE, ArgKind::F));
    let b = simplify_logged_with(&start, &SUBSTITUTED_RULES).0;
    Ok(PrincipalCert { kind, j, head_type: kernel.z_type(), difference_type: principal_part_type(&a, &b)? })
}

/// Lebesgue exponent `p` in `[1, infinity]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Lebesgue {
    Finite(Rational),
    Infinite,
}

impl Lebesgue {
    pub fn int(p: i64) -> Self {
        Lebesgue::Finite(Rational::from_integer(p))
    }

    /// Nearest small rational to a finite `p`; `Infinite` for `p = inf`.
    pub fn from_f64(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            return Ok(Lebesgue::Infinite);
        }
        Rational::approximate_float(p).map(Lebesgue::Finite).ok_or_else(|| Error::Parse(format!("p = {p}")))
    }

    pub fn inv(self) -> Rational {
        match self {
            Lebesgue::Finite(p) => p.recip(),
            Lebesgue::Infinite => Rational::from_integer(0),
        }
    }
}

/// Infimal admissible `1/s` for a `Z_j` operator on `L^p`, `p >= 2`:
/// `1/s > 1/p - j/(2n+2)`.
pub fn map_exponent(j: u32, p: Lebesgue, n: usize) -> Result<Rational> {
    if let Lebesgue::Finite(x) = p {
        if x < Rational::from_integer(2) {
            return Err(Error::OutOfRange(format!("p = {x} < 2")));
        }
    }
    Ok(p.inv() - Rational::new(j as i64, 2 * n as i64 + 2))
}

/// Infimal admissible `1/s` for `E_{1-2n}`: `1/s > 1/p - 1/(2n)`.
pub fn e1_threshold(p: Lebesgue, n: usize) -> Result<Rational> {
    if let Lebesgue::Finite(x) = p {
        if x < Rational::from_integer(1) {
            return Err(Error::OutOfRange(format!("p = {x} < 1")));
        }
    }
    Ok(p.inv() - Rational::new(1, 2 * n as i64))
}

/// Weight exponent `3(n+2)` on the left of the Neumann operator estimate.
pub fn neumann_weight_exponent(n: usize) -> u32 {
    3 * (n as u32 + 2)
}

/// Is `s` admissible for threshold `1/s > t`?
pub fn admissible_s(s: Rational, threshold: Rational) -> bool {
    s.recip() > threshold
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(k: ArgKind) -> Arg {
        Arg::new("f", k)
    }

    #[test]
    fn compose() {
        let e = simplify(&ZExpr::single(vec![Op::Z(1), Op::Z(2)], f(ArgKind::F)));
        assert_eq!(e, ZExpr::single(vec![Op::Z(3)], f(ArgKind::F)));
    }

    #[test]
    fn gamma_commute() {
        let e = simplify(&ZExpr::single(vec![Op::Gamma(3), Op::Z(2)], f(ArgKind::BoxF)));
        let exp = merge(ZExpr::new(vec![
            Term::new(vec![Op::Z(2), Op::Gamma(3)], f(ArgKind::BoxF)),
            Term::new(vec![Op::Z(3)], f(ArgKind::BoxF)),
        ]));
        assert_eq!(e, exp);
    }

    #[test]
    fn harmonic() {
        let e = simplify(&ZExpr::single(vec![Op::Gamma(4)], f(ArgKind::HF)));
        assert_eq!(e, ZExpr::single(vec![Op::Z(2)], f(ArgKind::HF)));
    }

    #[test]
    fn lemma_base_case() {
        let d = derive_mainint(1, MainPart::I).unwrap();
        assert_eq!(d.rhs, expected_mainint(1, MainPart::I));
        assert_eq!(d.rhs_text, "Z_1 f + γ*(γ^2 □f, N_q) + Z_2 ∂̄f + Z_2 ∂̄*f");
    }

    #[test]
    fn second_step() {
        let d = derive_mainint(2, MainPart::I).unwrap();
        assert_eq!(d.rhs, expected_mainint(2, MainPart::I));
    }

    #[test]
    fn exponents() {
        assert_eq!(map_exponent(2, Lebesgue::int(2), 3).unwrap(), Rational::new(1, 4));
        assert_eq!(e1_threshold(Lebesgue::int(2), 2).unwrap(), Rational::new(1, 4));
        let t = map_exponent(2, Lebesgue::int(2), 4).unwrap();
        assert_eq!(t, Rational::new(3, 10));
        assert!(admissible_s(Rational::new(33, 10), t));
        assert!(!admissible_s(Rational::new(10, 3), t));
        assert_eq!(neumann_weight_exponent(4), 18);
        assert!(map_exponent(1, Lebesgue::int(1), 3).is_err());
    }

    #[test]
    fn not_comparable() {
        let a = ZExpr::single(vec![Op::Z(1)], Arg::new("f", ArgKind::F));
        let b = ZExpr::single(vec![Op::Z(1)], Arg::new("g", ArgKind::F));
        assert_eq!(principal_part_type(&a, &b).unwrap_err(), Error::NotComparable);
        let c = ZExpr::single(vec![Op::Z(2)], Arg::new("f", ArgKind::F));
        assert_eq!(principal_part_type(&a, &c).unwrap(), Some(1));
        let p = ZExpr::single(vec![Op::Pair(PairKernel::N)], Arg::new("f", ArgKind::F));
        assert_eq!(principal_part_type(&p, &p).unwrap(), None);
    }
}
