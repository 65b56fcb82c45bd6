//! Symbolic constructors for every operator of the algebra, in canonical
//! normal form. Conventions match the grid module: `a = D + iB` is eliminated
//! into real symbols at build time, the dressed operators carry `f`, `f'` and
//! the phase `E1 = e^{i Omega}`, and `H` is the no-1/2 block Hamiltonian.

use super::coeff::{CoeffExpr, Sym};
use super::op::{OperatorExpr, SpinFactor};
use super::scalar::Scalar;
use crate::operators::OperatorKind;

fn e() -> CoeffExpr {
    CoeffExpr::sym(Sym::E)
}

fn b() -> CoeffExpr {
    CoeffExpr::sym(Sym::B(0))
}

fn d() -> CoeffExpr {
    CoeffExpr::sym(Sym::D(0))
}

fn f_sym(conj: bool, dot: bool) -> CoeffExpr {
    CoeffExpr::sym(Sym::F { conj, dot })
}

/// `a = D + iB`.
pub(crate) fn a_coeff() -> CoeffExpr {
    d().add(&b().scale(&Scalar::i()))
}

/// `a* = D - iB`.
pub(crate) fn a_star_coeff() -> CoeffExpr {
    d().sub(&b().scale(&Scalar::i()))
}

fn minus_2i() -> Scalar {
    &Scalar::from_int(-2) * &Scalar::i()
}

fn minus_half() -> Scalar {
    Scalar::ratio(-1, 2)
}

fn dz_op() -> OperatorExpr {
    OperatorExpr::orbital(0, 0, 1, 0)
}

fn dzbar_op() -> OperatorExpr {
    OperatorExpr::orbital(0, 0, 0, 1)
}

fn z_op() -> OperatorExpr {
    OperatorExpr::orbital(1, 0, 0, 0)
}

fn zbar_op() -> OperatorExpr {
    OperatorExpr::orbital(0, 1, 0, 0)
}

/// `f' + e D f` (conjugated variant for the adjoint operator).
fn dressed_mult(conj: bool) -> CoeffExpr {
    f_sym(conj, true).add(&e().mul(&d()).mul(&f_sym(conj, false)))
}

/// Builds the canonical normal-form expression for `kind`.
pub fn build(kind: OperatorKind) -> OperatorExpr {
    use OperatorKind::*;
    match kind {
        PiMinus => dz_op()
            .scale_scalar(&minus_2i())
            .add(&zbar_op().scale(&a_star_coeff().mul(&e()).scale(&minus_half()))),
        PiPlus => dzbar_op()
            .scale_scalar(&minus_2i())
            .add(&z_op().scale(&a_coeff().mul(&e()).scale(&minus_half()))),
        PiTildeMinus => {
            let phase = CoeffExpr::e1(1);
            dz_op()
                .scale(&f_sym(false, false).scale(&minus_2i()).mul(&phase))
                .add(&zbar_op().scale(&dressed_mult(false).scale(&minus_half()).mul(&phase)))
        }
        PiTildePlus => {
            let phase = CoeffExpr::e1(-1);
            dzbar_op()
                .scale(&f_sym(true, false).scale(&minus_2i()).mul(&phase))
                .add(&z_op().scale(&dressed_mult(true).scale(&minus_half()).mul(&phase)))
        }
        QPlus => build(PiMinus)
            .mul(&OperatorExpr::spin(SpinFactor::Raise))
            .scale_scalar(&Scalar::inv_sqrt2()),
        QMinus => build(PiPlus)
            .mul(&OperatorExpr::spin(SpinFactor::Lower))
            .scale_scalar(&Scalar::inv_sqrt2()),
        QTildePlus => build(PiTildeMinus)
            .mul(&OperatorExpr::spin(SpinFactor::Raise))
            .scale_scalar(&Scalar::inv_sqrt2()),
        QTildeMinus => build(PiTildePlus)
            .mul(&OperatorExpr::spin(SpinFactor::Lower))
            .scale_scalar(&Scalar::inv_sqrt2()),
        H => {
            let up = build(PiMinus).mul(&build(PiPlus)).mul(&OperatorExpr::spin(SpinFactor::UpProj));
            let dn = build(PiPlus).mul(&build(PiMinus)).mul(&OperatorExpr::spin(SpinFactor::DownProj));
            up.add(&dn)
        }
        HTilde => {
            let up = build(PiTildeMinus)
                .mul(&build(PiTildePlus))
                .mul(&OperatorExpr::spin(SpinFactor::UpProj));
            let dn = build(PiTildePlus)
                .mul(&build(PiTildeMinus))
                .mul(&OperatorExpr::spin(SpinFactor::DownProj));
            up.add(&dn).scale_scalar(&Scalar::ratio(1, 2))
        }
        Lz => OperatorExpr::orbital(1, 0, 1, 0).sub(&OperatorExpr::orbital(0, 1, 0, 1)),
        Sz => OperatorExpr::spin(SpinFactor::UpProj)
            .scale_scalar(&Scalar::ratio(1, 2))
            .add(&OperatorExpr::spin(SpinFactor::DownProj).scale_scalar(&Scalar::ratio(-1, 2))),
        Jz => build(Lz).add(&build(Sz)),
        BTildeMinus => build(PiTildeMinus).scale_scalar(&Scalar::inv_sqrt2()),
        BTildePlus => build(PiTildePlus).scale_scalar(&Scalar::inv_sqrt2()),
        BMinus => build(BTildeMinus).scale(&CoeffExpr::e1(-2)),
        BPlus => build(BTildePlus).scale(&CoeffExpr::e1(2)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_minus_structure() {
        // -2i dz - (e/2)(D - iB) z*
        let expected = dz_op()
            .scale_scalar(&minus_2i())
            .add(&zbar_op().scale(
                &d().sub(&b().scale(&Scalar::i()))
                    .mul(&e())
                    .scale(&Scalar::ratio(-1, 2)),
            ));
        assert_eq!(build(OperatorKind::PiMinus), expected);
    }

    #[test]
    fn angular_momentum_structure() {
        // z dz - z* dz*
        let expected =
            OperatorExpr::orbital(1, 0, 1, 0).sub(&OperatorExpr::orbital(0, 1, 0, 1));
        assert_eq!(build(OperatorKind::Lz), expected);
    }

    #[test]
    fn dressed_supercharge_structure() {
        // (1/sqrt2) E1 (-2i f dz - (1/2)(f' + eDf) z*) (x) sigma_+
        let phase = CoeffExpr::e1(1);
        let orbital = dz_op()
            .scale(&f_sym(false, false).scale(&minus_2i()).mul(&phase))
            .add(&zbar_op().scale(&dressed_mult(false).scale(&minus_half()).mul(&phase)));
        let expected = orbital
            .mul(&OperatorExpr::spin(SpinFactor::Raise))
            .scale_scalar(&Scalar::inv_sqrt2());
        assert_eq!(build(OperatorKind::QTildePlus), expected);
    }

    #[test]
    fn dressed_momenta_are_adjoint_pair() {
        assert_eq!(
            build(OperatorKind::PiTildeMinus).adjoint(),
            build(OperatorKind::PiTildePlus)
        );
        assert_eq!(
            build(OperatorKind::QTildePlus).adjoint(),
            build(OperatorKind::QTildeMinus)
        );
    }

    #[test]
    fn time_derivative_of_kinetic_momentum() {
        // d/dt pi_- = -(e/2)(D' - iB') z*
        let expected = zbar_op().scale(
            &CoeffExpr::sym(Sym::D(1))
                .sub(&CoeffExpr::sym(Sym::B(1)).scale(&Scalar::i()))
                .mul(&e())
                .scale(&minus_half()),
        );
        assert_eq!(build(OperatorKind::PiMinus).ddt(), expected);
    }
}
