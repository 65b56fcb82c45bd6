//! The commutative coefficient algebra: polynomials over the time-dependent
//! symbols `{e, B, B', ..., D, D', ..., f, f', f*, f*'}` and the invertible
//! phase generator `E1 = e^{i Omega}`, with exact scalars.
//!
//! The algebra is closed under the formal time derivative with the rewrite
//! rules `Omega' = eB`, `f'' = -((eB)^2 + eD') f` (and its conjugate); `B`
//! and `D` derivatives of any order stay opaque symbols. `E1` carries a
//! signed exponent, so `E1 E1* = 1` holds structurally.

use super::scalar::Scalar;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// A generator of the coefficient algebra.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Sym {
    /// Charge `e`.
    E,
    /// `d^k B / dt^k`.
    B(u8),
    /// `d^k D / dt^k`.
    D(u8),
    /// `f` or `f*`, optionally differentiated once.
    F { conj: bool, dot: bool },
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::E => write!(f, "e"),
            Sym::B(k) => write!(f, "B{}", "'".repeat(*k as usize)),
            Sym::D(k) => write!(f, "D{}", "'".repeat(*k as usize)),
            Sym::F { conj, dot } => {
                write!(f, "f{}{}", if *conj { "*" } else { "" }, if *dot { "'" } else { "" })
            }
        }
    }
}

/// Product of symbol powers times an integer power of `E1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Monomial {
    pows: BTreeMap<Sym, u32>,
    phase: i32,
}

impl Monomial {
    fn mul(&self, other: &Self) -> Self {
        let mut pows = self.pows.clone();
        for (&s, &k) in &other.pows {
            *pows.entry(s).or_insert(0) += k;
        }
        Self {
            pows,
            phase: self.phase + other.phase,
        }
    }

    fn conj(&self) -> Self {
        let pows = self
            .pows
            .iter()
            .map(|(&s, &k)| {
                let s = match s {
                    Sym::F { conj, dot } => Sym::F { conj: !conj, dot },
                    other => other,
                };
                (s, k)
            })
            .collect();
        Self {
            pows,
            phase: -self.phase,
        }
    }

    fn pow(&self, sym: Sym) -> u32 {
        self.pows.get(&sym).copied().unwrap_or(0)
    }

    fn without_one(&self, sym: Sym) -> Self {
        let mut pows = self.pows.clone();
        match pows.get_mut(&sym) {
            Some(k) if *k > 1 => *k -= 1,
            Some(_) => {
                pows.remove(&sym);
            }
            None => panic!("symbol {sym} not present"),
        }
        Self {
            pows,
            phase: self.phase,
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pows.is_empty() && self.phase == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (s, k) in &self.pows {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if *k == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{k}")?;
            }
        }
        if self.phase != 0 {
            if !first {
                write!(f, " ")?;
            }
            if self.phase == 1 {
                write!(f, "E1")?;
            } else {
                write!(f, "E1^{}", self.phase)?;
            }
        }
        Ok(())
    }
}

/// A polynomial coefficient: sum of monomials with exact scalars.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CoeffExpr(BTreeMap<Monomial, Scalar>);

impl CoeffExpr {
    pub fn zero() -> Self {
        Self(BTreeMap::new())
    }

    pub fn one() -> Self {
        Self::scalar(Scalar::one())
    }

    pub fn scalar(s: Scalar) -> Self {
        let mut out = Self::zero();
        out.insert(Monomial::default(), s);
        out
    }

    pub fn sym(s: Sym) -> Self {
        let mut mono = Monomial::default();
        mono.pows.insert(s, 1);
        let mut out = Self::zero();
        out.insert(mono, Scalar::one());
        out
    }

    /// `E1^power`.
    pub fn e1(power: i32) -> Self {
        let mono = Monomial {
            pows: BTreeMap::new(),
            phase: power,
        };
        let mut out = Self::zero();
        out.insert(mono, Scalar::one());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn monomial_count(&self) -> usize {
        self.0.len()
    }

    fn insert(&mut self, mono: Monomial, s: Scalar) {
        if s.is_zero() {
            return;
        }
        match self.0.get_mut(&mono) {
            Some(existing) => {
                let sum = &*existing + &s;
                if sum.is_zero() {
                    self.0.remove(&mono);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.0.insert(mono, s);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, s) in &other.0 {
            out.insert(m.clone(), s.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|(m, s)| (m.clone(), -s)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, s1) in &self.0 {
            for (m2, s2) in &other.0 {
                out.insert(m1.mul(m2), s1 * s2);
            }
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.0 {
            out.insert(m.clone(), v * s);
        }
        out
    }

    /// Complex conjugation: `i -> -i`, `f <-> f*`, `E1 -> E1*`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (m, s) in &self.0 {
            out.insert(m.conj(), s.conj());
        }
        out
    }

    /// Formal time derivative with the closure rules.
    pub fn ddt(&self) -> Self {
        let mut out = Self::zero();
        for (mono, s) in &self.0 {
            // Product rule over the symbol powers.
            let syms: Vec<(Sym, u32)> = mono.pows.iter().map(|(&a, &b)| (a, b)).collect();
            for (sym, k) in syms {
                let rest = mono.without_one(sym);
                let mut rest_expr = Self::zero();
                rest_expr.insert(rest, s * &Scalar::from_int(k as i64));
                for (m, v) in rest_expr.mul(&sym_derivative(sym)).0 {
                    out.insert(m, v);
                }
            }
            // d/dt E1^p = i p (e B) E1^p.
            if mono.phase != 0 {
                let mut m = mono.clone();
                *m.pows.entry(Sym::E).or_insert(0) += 1;
                *m.pows.entry(Sym::B(0)).or_insert(0) += 1;
                out.insert(m, &(&Scalar::i() * &Scalar::from_int(mono.phase as i64)) * s);
            }
        }
        out
    }

    /// Eliminates `f f*'` pairs through `f f*' = f* f' - 2i` (the Wronskian
    /// scaled to `-2i`), repeating until no monomial holds both factors.
    pub fn substitute_wronskian(&self) -> Self {
        let f = Sym::F { conj: false, dot: false };
        let fsp = Sym::F { conj: true, dot: true };
        let fs = Sym::F { conj: true, dot: false };
        let fp = Sym::F { conj: false, dot: true };
        let mut current = self.clone();
        for _ in 0..10_000 {
            let target = current
                .0
                .keys()
                .find(|m| m.pow(f) >= 1 && m.pow(fsp) >= 1)
                .cloned();
            let Some(mono) = target else {
                return current;
            };
            let s = current.0.remove(&mono).expect("monomial present");
            let rest = mono.without_one(f).without_one(fsp);
            let mut swapped = rest.clone();
            *swapped.pows.entry(fs).or_insert(0) += 1;
            *swapped.pows.entry(fp).or_insert(0) += 1;
            current.insert(swapped, s.clone());
            current.insert(rest, &s * &(-&(&Scalar::from_int(2) * &Scalar::i())));
        }
        panic!("wronskian substitution did not terminate");
    }

    /// Numeric evaluation against concrete symbol values.
    pub fn eval(&self, vals: &SymValues) -> Result<Complex64, EvalError> {
        let mut total = Complex64::default();
        for (mono, s) in &self.0 {
            let mut prod = s.eval();
            for (&sym, &k) in &mono.pows {
                prod *= vals.lookup(sym)?.powu(k);
            }
            prod *= Complex64::from_polar(1.0, mono.phase as f64 * vals.omega);
            total += prod;
        }
        Ok(total)
    }
}

impl fmt::Display for CoeffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, s)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({s}) {m}")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("no numeric value supplied for symbol {0}")]
    MissingSymbol(String),
}

/// Concrete values for numeric evaluation of coefficients.
#[derive(Clone, Copy, Debug)]
pub struct SymValues {
    pub e: f64,
    pub b: f64,
    pub b_dot: Option<f64>,
    pub d: f64,
    pub d_dot: Option<f64>,
    pub d_ddot: Option<f64>,
    pub f: Complex64,
    pub f_dot: Complex64,
    pub omega: f64,
}

impl SymValues {
    fn lookup(&self, sym: Sym) -> Result<Complex64, EvalError> {
        let missing = || EvalError::MissingSymbol(sym.to_string());
        Ok(match sym {
            Sym::E => self.e.into(),
            Sym::B(0) => self.b.into(),
            Sym::B(1) => self.b_dot.ok_or_else(missing)?.into(),
            Sym::D(0) => self.d.into(),
            Sym::D(1) => self.d_dot.ok_or_else(missing)?.into(),
            Sym::D(2) => self.d_ddot.ok_or_else(missing)?.into(),
            Sym::F { conj, dot } => {
                let v = if dot { self.f_dot } else { self.f };
                if conj {
                    v.conj()
                } else {
                    v
                }
            }
            _ => return Err(missing()),
        })
    }
}

fn sym_derivative(sym: Sym) -> CoeffExpr {
    match sym {
        Sym::E => CoeffExpr::zero(),
        Sym::B(k) => CoeffExpr::sym(Sym::B(k + 1)),
        Sym::D(k) => CoeffExpr::sym(Sym::D(k + 1)),
        Sym::F { conj, dot: false } => CoeffExpr::sym(Sym::F { conj, dot: true }),
        Sym::F { conj, dot: true } => {
            // f'' = -((eB)^2 + eD') f, and identically for f*.
            let f0 = CoeffExpr::sym(Sym::F { conj, dot: false });
            let eb2 = CoeffExpr::sym(Sym::E)
                .mul(&CoeffExpr::sym(Sym::E))
                .mul(&CoeffExpr::sym(Sym::B(0)))
                .mul(&CoeffExpr::sym(Sym::B(0)));
            let edp = CoeffExpr::sym(Sym::E).mul(&CoeffExpr::sym(Sym::D(1)));
            eb2.add(&edp).mul(&f0).neg()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f() -> CoeffExpr {
        CoeffExpr::sym(Sym::F { conj: false, dot: false })
    }

    fn fp() -> CoeffExpr {
        CoeffExpr::sym(Sym::F { conj: false, dot: true })
    }

    fn fs() -> CoeffExpr {
        CoeffExpr::sym(Sym::F { conj: true, dot: false })
    }

    fn fsp() -> CoeffExpr {
        CoeffExpr::sym(Sym::F { conj: true, dot: true })
    }

    #[test]
    fn phase_derivative() {
        // d/dt E1 = i e B E1.
        let expected = CoeffExpr::e1(1)
            .mul(&CoeffExpr::sym(Sym::E))
            .mul(&CoeffExpr::sym(Sym::B(0)))
            .scale(&Scalar::i());
        assert_eq!(CoeffExpr::e1(1).ddt(), expected);
    }

    #[test]
    fn oscillator_rewrite() {
        // d/dt f' = -((eB)^2 + eD') f.
        let d = fp().ddt();
        let eb2 = CoeffExpr::sym(Sym::E)
            .mul(&CoeffExpr::sym(Sym::E))
            .mul(&CoeffExpr::sym(Sym::B(0)))
            .mul(&CoeffExpr::sym(Sym::B(0)));
        let edp = CoeffExpr::sym(Sym::E).mul(&CoeffExpr::sym(Sym::D(1)));
        assert_eq!(d, eb2.add(&edp).mul(&f()).neg());
    }

    #[test]
    fn derivation_product_rule() {
        let x = f().mul(&CoeffExpr::e1(2)).add(&CoeffExpr::sym(Sym::B(0)));
        let y = fsp().mul(&CoeffExpr::sym(Sym::D(0))).add(&CoeffExpr::e1(-1));
        let lhs = x.mul(&y).ddt();
        let rhs = x.ddt().mul(&y).add(&x.mul(&y.ddt()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn conjugation_involution() {
        let x = f()
            .mul(&fsp())
            .scale(&Scalar::ratio_i(3, 2))
            .add(&CoeffExpr::e1(2).scale(&Scalar::inv_sqrt2()));
        assert_eq!(x.conj().conj(), x);
        // E1 E1* = 1 structurally.
        assert_eq!(CoeffExpr::e1(1).mul(&CoeffExpr::e1(-1)), CoeffExpr::one());
    }

    #[test]
    fn wronskian_substitution() {
        // (i/2)(f f*' - f* f') -> 1 when W = -2i.
        let w = f().mul(&fsp()).sub(&fs().mul(&fp()));
        let x = w.scale(&Scalar::ratio_i(1, 2));
        assert_eq!(x.substitute_wronskian(), CoeffExpr::one());
    }

    #[test]
    fn numeric_eval() {
        let vals = SymValues {
            e: 1.0,
            b: 0.7,
            b_dot: None,
            d: -0.2,
            d_dot: None,
            d_ddot: None,
            f: Complex64::new(0.3, 0.9),
            f_dot: Complex64::new(-0.1, 0.4),
            omega: 0.5,
        };
        // e B f* E1^2 evaluated directly.
        let expr = CoeffExpr::sym(Sym::E)
            .mul(&CoeffExpr::sym(Sym::B(0)))
            .mul(&CoeffExpr::sym(Sym::F { conj: true, dot: false }))
            .mul(&CoeffExpr::e1(2));
        let got = expr.eval(&vals).unwrap();
        let want = 0.7 * Complex64::new(0.3, -0.9) * Complex64::from_polar(1.0, 1.0);
        assert!((got - want).norm() < 1e-15);
        // B' has no value supplied.
        assert!(CoeffExpr::sym(Sym::B(1)).eval(&vals).is_err());
    }
}
