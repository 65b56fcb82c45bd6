//! Exact rewriting engine for the noncommutative operator algebra.
//!
//! Terms are `coeff * z^a (z*)^b dz^p (dz*)^q (x) spin-factor` with
//! coefficients in a commutative polynomial algebra over
//! `{e, B, B', ..., D, D', ..., f, f', f*, f*'}` and the invertible phase
//! `E1 = e^{i Omega}`, all over exact scalars in `Q(i, sqrt 2)`. The algebra
//! is closed under a formal time derivative with `Omega' = eB` and
//! `f'' = -((eB)^2 + eD') f`; products are normal-ordered through
//! `[dz, z] = 1`. [`verify_suite`] reduces every identity of the operator
//! algebra to the zero expression, exactly.

mod build;
mod coeff;
mod op;
mod scalar;
mod suite;

pub use build::build;
pub use coeff::{CoeffExpr, EvalError, Sym, SymValues};
pub use op::{OpMonomial, OperatorExpr, SpinFactor};
pub use scalar::Scalar;
pub use suite::{verify_suite, IdentityReport};
