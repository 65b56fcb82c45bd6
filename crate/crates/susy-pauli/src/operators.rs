//! Matrix-free application of the algebra's operators to grid wavefunctions.
//!
//! Spin structure: `sigma_+` maps the down component into the up component,
//! `sigma_-` the reverse. Second-order operators are compositions of
//! first-order applications (`H` up-block applies `pi_+` then `pi_-`), never
//! expanded Laplacians, so operator ordering on the grid matches the algebra
//! by construction. The dynamics convention is
//! `H = diag(pi_- pi_+, pi_+ pi_-)` (no 1/2 prefactor) and
//! `H~ = diag(pi~_- pi~_+, pi~_+ pi~_-)/2 = {Q~_+, Q~_-}`.

use crate::aux_ode::{AuxError, AuxSolution, TimeContext};
use crate::fields::FieldProfile;
use crate::grid::{d_dz, d_dzbar, GridError, GridSpec, SpinorField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);
const SQRT2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Aux(#[from] AuxError),
    #[error("field timestamp {field_t} does not match context time {ctx_t}")]
    TimestampMismatch { field_t: f64, ctx_t: f64 },
    #[error("{kind:?} needs auxiliary-solution data but the context carries none")]
    MissingAuxSolution { kind: OperatorKind },
    #[error("branch check requires a constant profile with D = 0, got {0}")]
    BranchCheckPrecondition(String),
}

/// Labels for every grid operator of the algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    PiPlus,
    PiMinus,
    PiTildePlus,
    PiTildeMinus,
    QPlus,
    QMinus,
    QTildePlus,
    QTildeMinus,
    H,
    HTilde,
    Lz,
    Sz,
    Jz,
    BTildePlus,
    BTildeMinus,
    BPlus,
    BMinus,
}

enum Deriv {
    Dz,
    Dzbar,
}

enum Coord {
    Z,
    Zbar,
}

/// `c_d * (d psi) + c_m * (coord * psi)` for one component.
fn first_order(
    spec: &GridSpec,
    comp: &[Complex64],
    c_d: Complex64,
    deriv: Deriv,
    c_m: Complex64,
    coord: Coord,
) -> Vec<Complex64> {
    let mut out = match deriv {
        Deriv::Dz => d_dz(spec, comp),
        Deriv::Dzbar => d_dzbar(spec, comp),
    };
    let n = spec.n();
    crate::exec::for_each_row(&mut out, n, |iy, row| {
        for (ix, v) in row.iter_mut().enumerate() {
            let z = spec.z_at(ix, iy);
            let c = match coord {
                Coord::Z => z,
                Coord::Zbar => z.conj(),
            };
            *v = c_d * *v + c_m * c * comp[iy * n + ix];
        }
    });
    out
}

fn pi_minus(spec: &GridSpec, comp: &[Complex64], ctx: &TimeContext) -> Vec<Complex64> {
    first_order(
        spec,
        comp,
        -2.0 * I,
        Deriv::Dz,
        -0.5 * ctx.e * ctx.a.conj(),
        Coord::Zbar,
    )
}

fn pi_plus(spec: &GridSpec, comp: &[Complex64], ctx: &TimeContext) -> Vec<Complex64> {
    first_order(
        spec,
        comp,
        -2.0 * I,
        Deriv::Dzbar,
        -0.5 * ctx.e * ctx.a,
        Coord::Z,
    )
}

fn aux_pair(ctx: &TimeContext, kind: OperatorKind) -> Result<(Complex64, Complex64), OperatorError> {
    match (ctx.f(), ctx.f_dot()) {
        (Some(f), Some(fd)) => Ok((f, fd)),
        _ => Err(OperatorError::MissingAuxSolution { kind }),
    }
}

fn pi_tilde_minus(
    spec: &GridSpec,
    comp: &[Complex64],
    ctx: &TimeContext,
) -> Result<Vec<Complex64>, OperatorError> {
    let (f, fd) = aux_pair(ctx, OperatorKind::PiTildeMinus)?;
    let phase = ctx.phase();
    Ok(first_order(
        spec,
        comp,
        -2.0 * I * f * phase,
        Deriv::Dz,
        -0.5 * (fd + ctx.e * ctx.d * f) * phase,
        Coord::Zbar,
    ))
}

fn pi_tilde_plus(
    spec: &GridSpec,
    comp: &[Complex64],
    ctx: &TimeContext,
) -> Result<Vec<Complex64>, OperatorError> {
    let (f, fd) = aux_pair(ctx, OperatorKind::PiTildePlus)?;
    let phase = ctx.phase().conj();
    Ok(first_order(
        spec,
        comp,
        -2.0 * I * f.conj() * phase,
        Deriv::Dzbar,
        -0.5 * (fd.conj() + ctx.e * ctx.d * f.conj()) * phase,
        Coord::Z,
    ))
}

fn lz_component(spec: &GridSpec, comp: &[Complex64]) -> Vec<Complex64> {
    let mut out = d_dz(spec, comp);
    let dzb = d_dzbar(spec, comp);
    let n = spec.n();
    crate::exec::for_each_row(&mut out, n, |iy, row| {
        for (ix, v) in row.iter_mut().enumerate() {
            let z = spec.z_at(ix, iy);
            *v = z * *v - z.conj() * dzb[iy * n + ix];
        }
    });
    out
}

fn scaled(comp: &[Complex64], c: Complex64) -> Vec<Complex64> {
    comp.iter().map(|v| c * v).collect()
}

/// Applies the operator named by `kind` at the instant described by `ctx`.
pub fn apply(
    kind: OperatorKind,
    field: &SpinorField,
    ctx: &TimeContext,
) -> Result<SpinorField, OperatorError> {
    if (field.t() - ctx.t).abs() > 1e-9 * (1.0 + ctx.t.abs()) {
        return Err(OperatorError::TimestampMismatch {
            field_t: field.t(),
            ctx_t: ctx.t,
        });
    }
    let spec = *field.spec();
    let t = field.t();
    let zeros = || vec![Complex64::default(); spec.n() * spec.n()];
    let (up, dn) = match kind {
        OperatorKind::PiMinus => (
            pi_minus(&spec, field.up(), ctx),
            pi_minus(&spec, field.dn(), ctx),
        ),
        OperatorKind::PiPlus => (
            pi_plus(&spec, field.up(), ctx),
            pi_plus(&spec, field.dn(), ctx),
        ),
        OperatorKind::PiTildeMinus => (
            pi_tilde_minus(&spec, field.up(), ctx)?,
            pi_tilde_minus(&spec, field.dn(), ctx)?,
        ),
        OperatorKind::PiTildePlus => (
            pi_tilde_plus(&spec, field.up(), ctx)?,
            pi_tilde_plus(&spec, field.dn(), ctx)?,
        ),
        OperatorKind::QPlus => (
            scaled(&pi_minus(&spec, field.dn(), ctx), SQRT2_INV.into()),
            zeros(),
        ),
        OperatorKind::QMinus => (
            zeros(),
            scaled(&pi_plus(&spec, field.up(), ctx), SQRT2_INV.into()),
        ),
        OperatorKind::QTildePlus => (
            scaled(&pi_tilde_minus(&spec, field.dn(), ctx)?, SQRT2_INV.into()),
            zeros(),
        ),
        OperatorKind::QTildeMinus => (
            zeros(),
            scaled(&pi_tilde_plus(&spec, field.up(), ctx)?, SQRT2_INV.into()),
        ),
        OperatorKind::H => (
            pi_minus(&spec, &pi_plus(&spec, field.up(), ctx), ctx),
            pi_plus(&spec, &pi_minus(&spec, field.dn(), ctx), ctx),
        ),
        OperatorKind::HTilde => (
            scaled(
                &pi_tilde_minus(&spec, &pi_tilde_plus(&spec, field.up(), ctx)?, ctx)?,
                0.5.into(),
            ),
            scaled(
                &pi_tilde_plus(&spec, &pi_tilde_minus(&spec, field.dn(), ctx)?, ctx)?,
                0.5.into(),
            ),
        ),
        OperatorKind::Lz => (
            lz_component(&spec, field.up()),
            lz_component(&spec, field.dn()),
        ),
        OperatorKind::Sz => (
            scaled(field.up(), 0.5.into()),
            scaled(field.dn(), (-0.5).into()),
        ),
        OperatorKind::Jz => {
            let mut up = lz_component(&spec, field.up());
            let mut dn = lz_component(&spec, field.dn());
            for (v, u) in up.iter_mut().zip(field.up()) {
                *v += 0.5 * u;
            }
            for (v, d) in dn.iter_mut().zip(field.dn()) {
                *v -= 0.5 * d;
            }
            (up, dn)
        }
        OperatorKind::BTildeMinus => (
            scaled(&pi_tilde_minus(&spec, field.up(), ctx)?, SQRT2_INV.into()),
            scaled(&pi_tilde_minus(&spec, field.dn(), ctx)?, SQRT2_INV.into()),
        ),
        OperatorKind::BTildePlus => (
            scaled(&pi_tilde_plus(&spec, field.up(), ctx)?, SQRT2_INV.into()),
            scaled(&pi_tilde_plus(&spec, field.dn(), ctx)?, SQRT2_INV.into()),
        ),
        OperatorKind::BMinus => {
            let c = SQRT2_INV * ctx.phase().conj().powu(2);
            (
                scaled(&pi_tilde_minus(&spec, field.up(), ctx)?, c),
                scaled(&pi_tilde_minus(&spec, field.dn(), ctx)?, c),
            )
        }
        OperatorKind::BPlus => {
            let c = SQRT2_INV * ctx.phase().powu(2);
            (
                scaled(&pi_tilde_plus(&spec, field.up(), ctx)?, c),
                scaled(&pi_tilde_plus(&spec, field.dn(), ctx)?, c),
            )
        }
    };
    Ok(SpinorField::from_components(spec, t, up, dn)?)
}

/// One summand of the expected right-hand side of a bracket identity.
#[derive(Clone, Copy, Debug)]
pub struct ExpectedTerm {
    pub coeff: Complex64,
    /// `None` means the identity operator.
    pub kind: Option<OperatorKind>,
}

impl ExpectedTerm {
    pub fn identity(coeff: Complex64) -> Self {
        Self { coeff, kind: None }
    }

    pub fn operator(coeff: Complex64, kind: OperatorKind) -> Self {
        Self {
            coeff,
            kind: Some(kind),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bracket {
    Commutator,
    AntiCommutator,
}

/// `|| ([A, B] - expected) psi || / || psi ||` (or the anticommutator).
pub fn bracket_residual(
    bracket: Bracket,
    kind_a: OperatorKind,
    kind_b: OperatorKind,
    expected: &[ExpectedTerm],
    field: &SpinorField,
    ctx: &TimeContext,
) -> Result<f64, OperatorError> {
    let ab = apply(kind_a, &apply(kind_b, field, ctx)?, ctx)?;
    let ba = apply(kind_b, &apply(kind_a, field, ctx)?, ctx)?;
    let mut r = ab;
    let sign = match bracket {
        Bracket::Commutator => -1.0,
        Bracket::AntiCommutator => 1.0,
    };
    r.scaled_add(sign.into(), &ba)?;
    for term in expected {
        let image = match term.kind {
            Some(kind) => apply(kind, field, ctx)?,
            None => field.clone(),
        };
        r.scaled_add(-term.coeff, &image)?;
    }
    Ok(r.norm() / field.norm())
}

/// Shorthand for [`bracket_residual`] with [`Bracket::Commutator`].
pub fn commutator_residual(
    kind_a: OperatorKind,
    kind_b: OperatorKind,
    expected: &[ExpectedTerm],
    field: &SpinorField,
    ctx: &TimeContext,
) -> Result<f64, OperatorError> {
    bracket_residual(Bracket::Commutator, kind_a, kind_b, expected, field, ctx)
}

/// A named bracket identity with its expected right-hand side and tolerance.
pub struct GridIdentity {
    pub name: &'static str,
    pub bracket: Bracket,
    pub a: OperatorKind,
    pub b: OperatorKind,
    pub expected: Vec<ExpectedTerm>,
    pub tol: f64,
}

impl GridIdentity {
    pub fn residual(
        &self,
        field: &SpinorField,
        ctx: &TimeContext,
    ) -> Result<f64, OperatorError> {
        bracket_residual(self.bracket, self.a, self.b, &self.expected, field, ctx)
    }
}

/// The bracket identities of the algebra, with expected values built from the
/// exact context quantities (`B(t)`, `f`, `f'`, Wronskian).
pub fn algebra_identities(ctx: &TimeContext) -> Result<Vec<GridIdentity>, OperatorError> {
    use Bracket::*;
    use OperatorKind::*;
    let (f, fd) = aux_pair(ctx, HTilde)?;
    let w = crate::aux_ode::wronskian(f, fd);
    let eb: Complex64 = (ctx.e * ctx.b).into();
    let phase = ctx.phase();
    let one = Complex64::new(1.0, 0.0);
    let id = ExpectedTerm::identity;
    let op = ExpectedTerm::operator;
    let mk = |name, bracket, a, b, expected, tol| GridIdentity {
        name,
        bracket,
        a,
        b,
        expected,
        tol,
    };
    Ok(vec![
        mk("pi_commutator", Commutator, PiMinus, PiPlus, vec![id(-2.0 * eb)], 1e-9),
        mk(
            "pi_tilde_commutator_wronskian",
            Commutator,
            PiTildeMinus,
            PiTildePlus,
            vec![id(I * w)],
            1e-9,
        ),
        mk(
            "pi_mixed_commutator_plus",
            Commutator,
            PiTildeMinus,
            PiPlus,
            vec![id(-(eb * f + I * fd) * phase)],
            1e-9,
        ),
        mk(
            "pi_mixed_commutator_minus",
            Commutator,
            PiMinus,
            PiTildePlus,
            vec![id(-(eb * f.conj() - I * fd.conj()) * phase.conj())],
            1e-9,
        ),
        mk("pi_minus_pair_commutes", Commutator, PiMinus, PiTildeMinus, vec![], 1e-9),
        mk("pi_plus_pair_commutes", Commutator, PiPlus, PiTildePlus, vec![], 1e-9),
        mk(
            "pi_tilde_minus_angular",
            Commutator,
            PiTildeMinus,
            Lz,
            vec![op(one, PiTildeMinus)],
            1e-9,
        ),
        mk(
            "pi_tilde_plus_angular",
            Commutator,
            PiTildePlus,
            Lz,
            vec![op(-one, PiTildePlus)],
            1e-9,
        ),
        mk(
            "supercharge_plus_angular",
            Commutator,
            QTildePlus,
            Lz,
            vec![op(one, QTildePlus)],
            1e-9,
        ),
        mk(
            "supercharge_minus_angular",
            Commutator,
            QTildeMinus,
            Lz,
            vec![op(-one, QTildeMinus)],
            1e-9,
        ),
        mk(
            "supercharge_plus_spin",
            Commutator,
            QTildePlus,
            Sz,
            vec![op(-one, QTildePlus)],
            1e-9,
        ),
        mk(
            "supercharge_minus_spin",
            Commutator,
            QTildeMinus,
            Sz,
            vec![op(one, QTildeMinus)],
            1e-9,
        ),
        mk("angular_conserved", Commutator, Lz, HTilde, vec![], 1e-8),
        mk("spin_conserved", Commutator, Sz, HTilde, vec![], 1e-8),
        mk("spin_angular_commute", Commutator, Sz, Lz, vec![], 1e-9),
        mk("total_moment_supercharge_plus", Commutator, QTildePlus, Jz, vec![], 1e-9),
        mk("total_moment_supercharge_minus", Commutator, QTildeMinus, Jz, vec![], 1e-9),
        mk("total_moment_conserved", Commutator, Jz, HTilde, vec![], 1e-8),
        mk("ladder_canonical", Commutator, BMinus, BPlus, vec![id(one)], 1e-9),
        mk("ladder_plus_angular", Commutator, BPlus, Lz, vec![op(-one, BPlus)], 1e-9),
        mk("ladder_minus_angular", Commutator, BMinus, Lz, vec![op(one, BMinus)], 1e-9),
        mk(
            "superalgebra_closure",
            AntiCommutator,
            QTildePlus,
            QTildeMinus,
            vec![op(one, HTilde)],
            1e-8,
        ),
        mk("nilpotency_plus", AntiCommutator, QTildePlus, QTildePlus, vec![], 1e-10),
        mk("nilpotency_minus", AntiCommutator, QTildeMinus, QTildeMinus, vec![], 1e-10),
    ])
}

/// Residual of the constant-field branch relation
/// `Q~_+ = e^{2 i w0 t} Q_+(-B)` with `w0 = eB`, for the `c1 = 0, c2 = 1`
/// solution branch.
pub fn q_of_minus_b_residual(
    field: &SpinorField,
    sol: &AuxSolution,
) -> Result<f64, OperatorError> {
    let (b, d_ok) = match sol.profile() {
        FieldProfile::Constant { b0, d0 } => (*b0, *d0 == 0.0),
        FieldProfile::LinearD { b0, d_rate } => (*b0, *d_rate == 0.0),
        other => {
            return Err(OperatorError::BranchCheckPrecondition(format!(
                "{other:?}"
            )))
        }
    };
    if !d_ok {
        return Err(OperatorError::BranchCheckPrecondition(
            "profile has nonzero D".into(),
        ));
    }
    let t = field.t();
    let ctx = sol.context_at(t)?;
    let omega0 = ctx.e * b;
    let lhs = apply(OperatorKind::QTildePlus, field, &ctx)?;
    let flipped = ctx.with_opposite_b();
    let rhs = apply(OperatorKind::QPlus, field, &flipped)?;
    let mut r = lhs;
    r.scaled_add(-Complex64::from_polar(1.0, 2.0 * omega0 * t), &rhs)?;
    Ok(r.norm() / field.norm())
}

/// A reproducible smooth decaying probe: a displaced Gaussian times a random
/// polynomial of degree at most two in `z`, `z*`, independently per spin
/// component.
pub fn probe_field(spec: &GridSpec, t: f64, seed: u64) -> SpinorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut component = |_: &str| {
        // Width and displacement keep the boundary amplitude below ~1e-14 on
        // the reference 20x20 box, preserving spectral accuracy.
        let z0 = Complex64::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8));
        let w = rng.gen_range(0.55..0.7);
        let mut coeffs = [[Complex64::default(); 3]; 3];
        for (j, row) in coeffs.iter_mut().enumerate() {
            for (k, c) in row.iter_mut().enumerate() {
                if j + k <= 2 {
                    *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
        }
        (z0, w, coeffs)
    };
    let up_params = component("up");
    let dn_params = component("dn");
    let eval = move |z: Complex64, p: &ProbeParams| -> Complex64 {
        let (z0, w, coeffs) = p;
        let mut poly = Complex64::default();
        for (j, row) in coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if j + k <= 2 {
                    poly += c * z.powu(j as u32) * z.conj().powu(k as u32);
                }
            }
        }
        poly * (-(z - z0).norm_sqr() / (4.0 * w * w)).exp()
    };
    SpinorField::from_fn(*spec, t, move |z| {
        (eval(z, &up_params), eval(z, &dn_params))
    })
}

type ProbeParams = (Complex64, f64, [[Complex64; 3]; 3]);
