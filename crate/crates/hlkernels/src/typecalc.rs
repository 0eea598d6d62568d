//! Admissible kernel types: term descriptors, the type formula, isotropic
//! types and predicted decay exponents along approach paths.

use crate::error::{Error, Result};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub type Rational = Ratio<i64>;

/// One monomial `xi_N xi*_M sigma_j P^{-t0} Phi^{t1} conj(Phi)^{t2} Phi*^{t3} conj(Phi*)^{t4} r^l r*^m`,
/// with `gamma^{-inv_gamma} gamma*^{-inv_gamma_star}` tracked outside the type.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdmissibleDescriptor {
    pub big_n: i64,
    pub big_m: i64,
    pub j: i64,
    pub t0: i64,
    pub t1: i64,
    pub t2: i64,
    pub t3: i64,
    pub t4: i64,
    pub l: i64,
    pub m: i64,
    pub inv_gamma: i64,
    pub inv_gamma_star: i64,
}

impl AdmissibleDescriptor {
    /// `t = -(t1 + t2 + t3 + t4)`.
    pub fn t(&self) -> i64 {
        -(self.t1 + self.t2 + self.t3 + self.t4)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |s: &str| Err(Error::Constraint(format!("{s} in {self}")));
        if self.j < 0 || self.t0 < 0 || self.l < 0 || self.m < 0 {
            return fail("j, t0, l, m must be nonnegative");
        }
        if self.big_n < 0 || self.big_m < 0 || self.big_n + self.big_m < 0 {
            return fail("N, M must be nonnegative");
        }
        if [self.t1, self.t2, self.t3, self.t4].iter().any(|&x| x > 0) {
            return fail("t1..t4 must be nonpositive");
        }
        if self.l + self.m > self.t() + 1 {
            return fail("l + m must not exceed t + 1");
        }
        if self.inv_gamma < 0 || self.inv_gamma_star < 0 {
            return fail("gamma prefactor exponents must be nonnegative");
        }
        Ok(())
    }
}

impl fmt::Display for AdmissibleDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N{} M{} j{} t0={}", self.big_n, self.big_m, self.j, self.t0)?;
        for (k, v) in [("t1", self.t1), ("t2", self.t2), ("t3", self.t3), ("t4", self.t4), ("l", self.l), ("m", self.m)] {
            if v != 0 {
                write!(f, " {k}={v}")?;
            }
        }
        if self.inv_gamma != 0 {
            write!(f, " ig={}", self.inv_gamma)?;
        }
        if self.inv_gamma_star != 0 {
            write!(f, " igs={}", self.inv_gamma_star)?;
        }
        Ok(())
    }
}

impl FromStr for AdmissibleDescriptor {
    type Err = Error;

    /// Whitespace-separated `key=value` tokens; the single-letter keys
    /// `N`, `M`, `j`, `l`, `m` also accept the value glued on (`N2`).
    fn from_str(s: &str) -> Result<Self> {
        let mut d = Self::default();
        for tok in s.split_whitespace() {
            let (key, val) = match tok.split_once('=') {
                Some(kv) => kv,
                None => tok.split_at(tok.char_indices().nth(1).map_or(tok.len(), |(i, _)| i)),
            };
            let v: i64 = val.parse().map_err(|_| Error::Parse(format!("bad value in '{tok}'")))?;
            let slot = match key {
                "N" => &mut d.big_n,
                "M" => &mut d.big_m,
                "j" => &mut d.j,
                "t0" => &mut d.t0,
                "t1" => &mut d.t1,
                "t2" => &mut d.t2,
                "t3" => &mut d.t3,
                "t4" => &mut d.t4,
                "l" => &mut d.l,
                "m" => &mut d.m,
                "ig" => &mut d.inv_gamma,
                "igs" => &mut d.inv_gamma_star,
                _ => return Err(Error::Parse(format!("unknown key '{key}'"))),
            };
            *slot = v;
        }
        Ok(d)
    }
}

/// `2n + j + min{2, t - l - m, N + M} - 2 (t0 + t - l - m)`.
pub fn admissible_type(d: &AdmissibleDescriptor, n: usize) -> Result<i64> {
    d.validate()?;
    let tlm = d.t() - d.l - d.m;
    Ok(2 * n as i64 + d.j + 2.min(tlm).min(d.big_n + d.big_m) - 2 * (d.t0 + tlm))
}

/// Minimum type over a sum of terms.
pub fn sum_type(terms: &[AdmissibleDescriptor], n: usize) -> Result<Option<i64>> {
    terms.iter().map(|d| admissible_type(d, n)).try_fold(None, |acc: Option<i64>, t| {
        let t = t?;
        Ok(Some(acc.map_or(t, |a| a.min(t))))
    })
}

/// Isotropic kernel `sigma_m / rho^{2k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropicDescriptor {
    pub m: i64,
    pub k: i64,
}

/// Largest `j` with `m - 2k >= j - 2n`.
pub fn isotropic_type(d: &IsotropicDescriptor, n: usize) -> i64 {
    d.m - 2 * d.k + 2 * n as i64
}

/// Growth exponents along a path: `rho ~ t^a`, `|r| ~ t^b`, `|r*| ~ t^c`, `P ~ t^p`, `|Phi| ~ t^f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathExponents {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub p: Rational,
    pub f: Rational,
}

impl PathExponents {
    fn from_ints(a: i64, b: i64, c: i64, p: i64, f: i64) -> Self {
        let r = Rational::from_integer;
        Self { a: r(a), b: r(b), c: r(c), p: r(p), f: r(f) }
    }

    /// `rho ~ t`, `|r|, |r*| ~ t^2`, `P, |Phi| ~ t^2`.
    pub fn parabolic() -> Self {
        Self::from_ints(1, 2, 2, 2, 2)
    }

    /// `rho, |r|, |r*|, P^{1/2}... ~ t`: `P ~ t^2`, `|Phi| ~ t`.
    pub fn transversal() -> Self {
        Self::from_ints(1, 1, 1, 2, 1)
    }
}

/// Predicted log-log exponent of the modulus envelope of a descriptor:
/// `j a + l b + m c - t0 p - t f - inv_gamma b/2 - inv_gamma_star c/2`.
pub fn exponent_along_path(d: &AdmissibleDescriptor, path: &PathExponents) -> Rational {
    let r = Rational::from_integer;
    r(d.j) * path.a + r(d.l) * path.b + r(d.m) * path.c - r(d.t0) * path.p - r(d.t()) * path.f
        - r(d.inv_gamma) * path.b / 2
        - r(d.inv_gamma_star) * path.c / 2
}

/// Kernel family a descriptor belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    /// Main terms of `N_q` (without `Gamma_{0q}`).
    Nq,
    /// Main terms of `L_q`.
    Lq,
    /// Main terms of `H_L`, equivalently of `T_q` minus its isotropic part.
    Hq,
}

impl KernelFamily {
    /// Type the descriptor table is expected to certify.
    pub fn expected_type(self) -> i64 {
        match self {
            KernelFamily::Nq | KernelFamily::Lq => 2,
            KernelFamily::Hq => 1,
        }
    }
}

/// One curated row of the descriptor table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub family: KernelFamily,
    pub term: String,
    pub n: usize,
    pub q: usize,
    pub mu: Option<usize>,
    pub descriptor: AdmissibleDescriptor,
}

fn desc(s: &str) -> AdmissibleDescriptor {
    s.parse().expect("shipped descriptor literal")
}

/// Hand-curated descriptors of the explicit kernel terms, for `3 <= n`.
pub fn descriptor_table(n: usize) -> Vec<TableEntry> {
    let mut out = Vec::new();
    let ni = n as i64;
    let mut push = |family, term: &str, q, mu, d| out.push(TableEntry { family, term: term.into(), n, q, mu, descriptor: d });
    for q in 0..=n.saturating_sub(2) {
        for mu in 0..=n - q - 2 {
            let m = mu as i64;
            push(KernelFamily::Lq, "Lbar_j rho^2 gamma / (Phibar^{mu+1} P^{n-mu-1})", q, Some(mu), desc(&format!("N1 j1 t0={} t2={}", ni - m - 1, -(m + 1))));
        }
    }
    for q in 1..=n.saturating_sub(2) {
        for mu in 0..=n - q - 2 {
            let m = mu as i64;
            push(KernelFamily::Nq, "gamma^2 / (Phibar^{mu+2} P^{n-mu-2}) tau^q", q, Some(mu), desc(&format!("N2 j0 t0={} t2={}", ni - m - 2, -(m + 2))));
            push(KernelFamily::Hq, "gamma^2 Lbar_j rho^2 / (Phibar^{mu+2} P^{n-mu-1})", q, Some(mu), desc(&format!("N2 j1 t0={} t2={}", ni - m - 1, -(m + 2))));
        }
        push(KernelFamily::Nq, "(gamma/gamma*) Phi / (Phibar P^{n-1}) tau^q", q, None, desc(&format!("N2 j0 t0={} igs=1", ni - 1)));
        push(KernelFamily::Nq, "P^{1-n} tau^{q-1} ^ nu", q, None, desc(&format!("N2 j0 t0={}", ni - 1)));
        push(KernelFamily::Hq, "P^{-n} Lbar_j rho^2 omegabar^{njQ}", q, None, desc(&format!("N2 j1 t0={ni}")));
        push(KernelFamily::Hq, "(gamma/gamma*) Phi Lbar_j rho^2 / (Phibar P^n)", q, None, desc(&format!("N2 j1 t0={ni} igs=1")));
        push(KernelFamily::Hq, "(1/gamma) Phi / P^n, sigma_1 part", q, None, desc(&format!("N2 j1 t0={ni} ig=1")));
        push(KernelFamily::Hq, "(1/gamma) Phi / P^n, r part", q, None, desc(&format!("N2 j0 t0={ni} l=1 t2=0 ig=1")));
    }
    out
}

/// `Gamma_{0q} = c / rho^{2n-2}`.
pub fn gamma0q_descriptor(n: usize) -> IsotropicDescriptor {
    IsotropicDescriptor { m: 0, k: n as i64 - 1 }
}

/// First derivatives of `Gamma_{0q}`: `sigma_1 / rho^{2n}`.
pub fn dgamma0q_descriptor(n: usize) -> IsotropicDescriptor {
    IsotropicDescriptor { m: 1, k: n as i64 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn main_term_types() {
        for n in 3..=6usize {
            let ni = n as i64;
            for mu in 0..=n as i64 - 3 {
                let d = desc(&format!("N2 j0 t0={} t2={}", ni - mu - 2, -(mu + 2)));
                assert_eq!(admissible_type(&d, n).unwrap(), 2);
                let h = desc(&format!("N2 j1 t0={} t2={}", ni - mu - 1, -(mu + 2)));
                assert_eq!(admissible_type(&h, n).unwrap(), 1);
            }
        }
    }

    #[test]
    fn isotropic() {
        assert_eq!(isotropic_type(&gamma0q_descriptor(3), 3), 2);
        assert_eq!(isotropic_type(&dgamma0q_descriptor(5), 5), 1);
        assert_eq!(isotropic_type(&IsotropicDescriptor { m: 1, k: 2 }, 2), 1);
    }

    #[test]
    fn path_exponents() {
        let p = PathExponents::parabolic();
        let d = desc("N2 j0 t0=1 t2=-2");
        assert_eq!(exponent_along_path(&d, &p), Rational::from_integer(-6));
        let h = desc("N2 j1 t0=2 t2=-2");
        assert_eq!(exponent_along_path(&h, &p), Rational::from_integer(-7));
        assert_eq!(exponent_along_path(&AdmissibleDescriptor::default(), &p), Rational::from_integer(0));
    }

    #[test]
    fn parse_roundtrip() {
        let d = desc("N2 M0 j0 t0=1 t2=-2");
        assert_eq!(d.big_n, 2);
        assert_eq!(d.t2, -2);
        assert_eq!(d.to_string().parse::<AdmissibleDescriptor>().unwrap(), d);
        assert!("N2 q=3".parse::<AdmissibleDescriptor>().is_err());
        assert!("Nx".parse::<AdmissibleDescriptor>().is_err());
    }

    #[test]
    fn constraint_violation() {
        assert!(admissible_type(&desc("t1=1"), 3).is_err());
        assert!(admissible_type(&desc("l=2 t2=-0"), 3).is_err());
        assert!(admissible_type(&desc("j=-1"), 3).is_err());
    }
}
