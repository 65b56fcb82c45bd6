//! Normal-ordered noncommutative operator expressions.
//!
//! A term is `coeff * z^a z*^b dz^p dz*^q (x) spin` with the derivatives to
//! the right; products are reordered through `[dz, z] = 1`, `[dz*, z*] = 1`
//! (all cross-commutators vanish) via
//! `dz^p z^a = sum_k k! C(p,k) C(a,k) z^{a-k} dz^{p-k}`. Spin factors live in
//! the basis `{P_up, P_dn, s_+, s_-}`; the identity is `P_up + P_dn` and
//! `sigma_z = P_up - P_dn`, so canonical forms are unique.

use super::coeff::{CoeffExpr, EvalError, SymValues};
use super::scalar::Scalar;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

/// Basis spin factor.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum SpinFactor {
    /// `sigma_+ sigma_- = diag(1, 0)`.
    UpProj,
    /// `sigma_- sigma_+ = diag(0, 1)`.
    DownProj,
    /// `sigma_+` (maps the down component to up).
    Raise,
    /// `sigma_-`.
    Lower,
}

impl SpinFactor {
    fn mul(self, rhs: Self) -> Option<Self> {
        use SpinFactor::*;
        match (self, rhs) {
            (UpProj, UpProj) => Some(UpProj),
            (UpProj, Raise) => Some(Raise),
            (DownProj, DownProj) => Some(DownProj),
            (DownProj, Lower) => Some(Lower),
            (Raise, DownProj) => Some(Raise),
            (Raise, Lower) => Some(UpProj),
            (Lower, UpProj) => Some(Lower),
            (Lower, Raise) => Some(DownProj),
            _ => None,
        }
    }

    pub fn adjoint(self) -> Self {
        match self {
            SpinFactor::Raise => SpinFactor::Lower,
            SpinFactor::Lower => SpinFactor::Raise,
            proj => proj,
        }
    }
}

impl fmt::Display for SpinFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpinFactor::UpProj => write!(f, "[P+]"),
            SpinFactor::DownProj => write!(f, "[P-]"),
            SpinFactor::Raise => write!(f, "[s+]"),
            SpinFactor::Lower => write!(f, "[s-]"),
        }
    }
}

/// One normal-ordered operator monomial.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct OpMonomial {
    pub za: u32,
    pub zb: u32,
    pub dz: u32,
    pub dzb: u32,
    pub spin: SpinFactor,
}

impl fmt::Display for OpMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pow = |name: &str, k: u32| -> fmt::Result {
            match k {
                0 => Ok(()),
                1 => write!(f, " {name}"),
                _ => write!(f, " {name}^{k}"),
            }
        };
        pow("z", self.za)?;
        pow("z*", self.zb)?;
        pow("dz", self.dz)?;
        pow("dz*", self.dzb)?;
        write!(f, " {}", self.spin)
    }
}

/// A finite sum of normal-ordered terms with polynomial coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct OperatorExpr(BTreeMap<OpMonomial, CoeffExpr>);

fn factorial_i128(k: u32) -> i128 {
    (1..=k as i128).product::<i128>().max(1)
}

fn binomial(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    factorial_i128(n) / (factorial_i128(k) * factorial_i128(n - k))
}

impl OperatorExpr {
    pub fn zero() -> Self {
        Self(BTreeMap::new())
    }

    /// The identity operator `P_up + P_dn`.
    pub fn identity() -> Self {
        Self::orbital(0, 0, 0, 0)
    }

    /// `z^za z*^zb dz^dz dz*^dzb (x) 1`.
    pub fn orbital(za: u32, zb: u32, dz: u32, dzb: u32) -> Self {
        let mut out = Self::zero();
        for spin in [SpinFactor::UpProj, SpinFactor::DownProj] {
            out.insert(OpMonomial { za, zb, dz, dzb, spin }, CoeffExpr::one());
        }
        out
    }

    /// A bare spin factor.
    pub fn spin(spin: SpinFactor) -> Self {
        let mut out = Self::zero();
        out.insert(
            OpMonomial { za: 0, zb: 0, dz: 0, dzb: 0, spin },
            CoeffExpr::one(),
        );
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of surviving `(operator monomial, coefficient monomial)` pairs.
    pub fn term_count(&self) -> usize {
        self.0.values().map(|c| c.monomial_count()).sum()
    }

    fn insert(&mut self, mono: OpMonomial, coeff: CoeffExpr) {
        if coeff.is_zero() {
            return;
        }
        match self.0.get_mut(&mono) {
            Some(existing) => {
                let sum = existing.add(&coeff);
                if sum.is_zero() {
                    self.0.remove(&mono);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.0.insert(mono, coeff);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.insert(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|(m, c)| (*m, c.neg())).collect())
    }

    /// Multiplies by a time-dependent coefficient (commutes with everything).
    pub fn scale(&self, c: &CoeffExpr) -> Self {
        let mut out = Self::zero();
        for (m, v) in &self.0 {
            out.insert(*m, v.mul(c));
        }
        out
    }

    pub fn scale_scalar(&self, s: &Scalar) -> Self {
        self.scale(&CoeffExpr::scalar(s.clone()))
    }

    /// Normal-ordered product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let Some(spin) = m1.spin.mul(m2.spin) else {
                    continue;
                };
                let coeff = c1.mul(c2);
                for k in 0..=m1.dz.min(m2.za) {
                    let ck = binomial(m1.dz, k) * binomial(m2.za, k) * factorial_i128(k);
                    for l in 0..=m1.dzb.min(m2.zb) {
                        let cl = binomial(m1.dzb, l) * binomial(m2.zb, l) * factorial_i128(l);
                        let mono = OpMonomial {
                            za: m1.za + m2.za - k,
                            zb: m1.zb + m2.zb - l,
                            dz: m1.dz - k + m2.dz,
                            dzb: m1.dzb - l + m2.dzb,
                            spin,
                        };
                        let n = (ck * cl) as i64;
                        out.insert(mono, coeff.scale(&Scalar::from_int(n)));
                    }
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    /// Formal time derivative: coefficients only, operator parts untouched.
    pub fn ddt(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.0 {
            out.insert(*m, c.ddt());
        }
        out
    }

    /// Formal adjoint: coefficients conjugated, `z <-> z*`,
    /// `dz -> -dz*`, `sigma_+ <-> sigma_-`, product order reversed.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.0 {
            let sign = if (m.dz + m.dzb) % 2 == 0 { 1 } else { -1 };
            // (z^za z*^zb dz^p dz*^q)^+ = (-1)^{p+q} dz^q dz*^p z^zb z*^za,
            // then reorder to normal form.
            let deriv_part = Self(BTreeMap::from([(
                OpMonomial {
                    za: 0,
                    zb: 0,
                    dz: m.dzb,
                    dzb: m.dz,
                    spin: m.spin.adjoint(),
                },
                c.conj().scale(&Scalar::from_int(sign)),
            )]));
            let coord_part = Self::orbital(m.zb, m.za, 0, 0);
            out = out.add(&deriv_part.mul(&coord_part));
        }
        out
    }

    /// Applies the Wronskian elimination to every coefficient.
    pub fn substitute_wronskian(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.0 {
            out.insert(*m, c.substitute_wronskian());
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OpMonomial, &CoeffExpr)> {
        self.0.iter()
    }

    /// Evaluates every coefficient numerically; the operator structure stays
    /// symbolic. Used by cross-checks against the grid operators.
    pub fn eval_coeffs(
        &self,
        vals: &SymValues,
    ) -> Result<Vec<(OpMonomial, Complex64)>, EvalError> {
        self.0
            .iter()
            .map(|(m, c)| Ok((*m, c.eval(vals)?)))
            .collect()
    }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "  +  ")?;
            }
            write!(f, "[{c}]{m}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn z() -> OperatorExpr {
        OperatorExpr::orbital(1, 0, 0, 0)
    }

    fn dz() -> OperatorExpr {
        OperatorExpr::orbital(0, 0, 1, 0)
    }

    fn zbar() -> OperatorExpr {
        OperatorExpr::orbital(0, 1, 0, 0)
    }

    fn dzbar() -> OperatorExpr {
        OperatorExpr::orbital(0, 0, 0, 1)
    }

    #[test]
    fn canonical_commutators() {
        let one = OperatorExpr::identity();
        assert_eq!(dz().commutator(&z()), one);
        assert_eq!(dzbar().commutator(&zbar()), one);
        assert!(dz().commutator(&zbar()).is_zero());
        assert!(dzbar().commutator(&z()).is_zero());
        assert!(z().commutator(&zbar()).is_zero());
    }

    #[test]
    fn higher_order_reordering() {
        // dz^2 z^2 = z^2 dz^2 + 4 z dz + 2.
        let lhs = dz().mul(&dz()).mul(&z().mul(&z()));
        let expected = OperatorExpr::orbital(2, 0, 2, 0)
            .add(&OperatorExpr::orbital(1, 0, 1, 0).scale_scalar(&Scalar::from_int(4)))
            .add(&OperatorExpr::identity().scale_scalar(&Scalar::from_int(2)));
        assert_eq!(lhs, expected);
    }

    #[test]
    fn spin_multiplication_table() {
        use SpinFactor::*;
        // sigma_+ sigma_- + sigma_- sigma_+ = 1.
        let s = OperatorExpr::spin(Raise)
            .mul(&OperatorExpr::spin(Lower))
            .add(&OperatorExpr::spin(Lower).mul(&OperatorExpr::spin(Raise)));
        assert_eq!(s, OperatorExpr::identity());
        // sigma_+^2 = 0.
        assert!(OperatorExpr::spin(Raise).mul(&OperatorExpr::spin(Raise)).is_zero());
        // sigma_z = P+ - P-; sigma_z sigma_+ = sigma_+.
        let sz = OperatorExpr::spin(UpProj).sub(&OperatorExpr::spin(DownProj));
        assert_eq!(sz.mul(&OperatorExpr::spin(Raise)), OperatorExpr::spin(Raise));
    }

    fn random_expr(rng: &mut impl Rng) -> OperatorExpr {
        use super::super::coeff::Sym;
        let spins = [
            SpinFactor::UpProj,
            SpinFactor::DownProj,
            SpinFactor::Raise,
            SpinFactor::Lower,
        ];
        let mut out = OperatorExpr::zero();
        for _ in 0..3 {
            let mono = OpMonomial {
                za: rng.gen_range(0..3),
                zb: rng.gen_range(0..3),
                dz: rng.gen_range(0..3),
                dzb: rng.gen_range(0..3),
                spin: spins[rng.gen_range(0..4)],
            };
            let syms = [
                Sym::E,
                Sym::B(0),
                Sym::D(0),
                Sym::F { conj: false, dot: false },
                Sym::F { conj: true, dot: true },
            ];
            let mut coeff = CoeffExpr::scalar(Scalar::from_int(rng.gen_range(-3..=3)));
            if coeff.is_zero() {
                coeff = CoeffExpr::one();
            }
            for _ in 0..rng.gen_range(0..3) {
                coeff = coeff.mul(&CoeffExpr::sym(syms[rng.gen_range(0..syms.len())]));
            }
            if rng.gen_bool(0.5) {
                coeff = coeff.mul(&CoeffExpr::e1(rng.gen_range(-2..=2)));
            }
            out = out.add(&OperatorExpr(BTreeMap::from([(mono, coeff)])));
        }
        out
    }

    #[test]
    fn multiplication_is_associative() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let a = random_expr(&mut rng);
            let b = random_expr(&mut rng);
            let c = random_expr(&mut rng);
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }
    }

    #[test]
    fn derivative_product_rule_on_operators() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_expr(&mut rng);
            let b = random_expr(&mut rng);
            let lhs = a.mul(&b).ddt();
            let rhs = a.ddt().mul(&b).add(&a.mul(&b.ddt()));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn adjoint_is_antiautomorphism() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_expr(&mut rng);
            let b = random_expr(&mut rng);
            assert_eq!(a.mul(&b).adjoint(), b.adjoint().mul(&a.adjoint()));
            assert_eq!(a.adjoint().adjoint(), a);
        }
    }
}
