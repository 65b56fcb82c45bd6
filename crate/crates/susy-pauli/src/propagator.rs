//! Independent explicit time integration of the nonstationary Pauli equation
//! `i d psi/dt = H(t) psi` with matrix-free spectral application of `H`.
//!
//! The stepper is classical RK4 (local error `O(dt^5)`), deliberately built
//! only from the field profile so propagated states cross-validate the
//! ladder-generated solutions without sharing the auxiliary-equation path.
//! The scheme is not exactly unitary; norm drift is monitored and budgeted in
//! the tolerances instead. A spectral stability estimate refuses steps beyond
//! half the RK4 imaginary-axis limit.

use crate::aux_ode::{AuxError, AuxSolution, TimeContext};
use crate::fields::{FieldError, FieldProfile, PhysicalConfig};
use crate::grid::{GridError, SpinorField};
use crate::operators::{apply, OperatorError, OperatorKind};
use num_complex::Complex64;
use std::io::Write;
use thiserror::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error)]
pub enum PropagatorError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Aux(#[from] AuxError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid propagation setup: {0}")]
    InvalidSetup(&'static str),
    #[error("dt = {dt} exceeds half the estimated stability limit {limit:.3e}")]
    DtTooLarge { dt: f64, limit: f64 },
    #[error("instability detected at t = {t}: non-finite amplitudes")]
    Unstable { t: f64 },
    #[error("observable {0:?} needs an auxiliary solution but none was supplied")]
    ObservableNeedsAux(Observable),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Conserved quantities tracked along a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    Norm,
    HTilde,
    Lz,
    Sz,
    QTildePlus,
    QTildeMinus,
    /// `<b_+ b_->`, the ladder number operator.
    Number,
}

impl Observable {
    fn needs_aux(self) -> bool {
        !matches!(self, Observable::Norm | Observable::Lz | Observable::Sz)
    }
}

/// The observable set of the trajectory CSV format.
pub fn standard_observables() -> Vec<Observable> {
    vec![
        Observable::Norm,
        Observable::HTilde,
        Observable::Lz,
        Observable::Sz,
        Observable::QTildePlus,
        Observable::QTildeMinus,
    ]
}

/// Configuration of one propagation run.
pub struct PropagationSetup<'a> {
    pub profile: &'a FieldProfile,
    pub cfg: PhysicalConfig,
    /// Needed only for the dressed observables.
    pub sol: Option<&'a AuxSolution>,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Observables are recorded every `stride` steps.
    pub stride: usize,
    pub observables: Vec<Observable>,
}

/// Observable values along the run; `Norm` is stored in the real part.
pub struct Trajectory {
    pub observables: Vec<Observable>,
    pub points: Vec<(f64, Vec<Complex64>)>,
}

impl Trajectory {
    /// Largest deviation of one observable from its initial value.
    pub fn max_drift(&self, obs: Observable) -> Option<f64> {
        let idx = self.observables.iter().position(|&o| o == obs)?;
        let first = self.points.first()?.1[idx];
        Some(
            self.points
                .iter()
                .map(|(_, vals)| (vals[idx] - first).norm())
                .fold(0.0, f64::max),
        )
    }

    /// Writes `t,norm,Re_Htilde,Re_Lz,Re_Sz,Re_Qp,Im_Qp,Re_Qm,Im_Qm` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), PropagatorError> {
        let col = |obs: Observable| -> Result<usize, PropagatorError> {
            self.observables
                .iter()
                .position(|&o| o == obs)
                .ok_or(PropagatorError::InvalidSetup(
                    "trajectory lacks a standard observable",
                ))
        };
        let (n, h, lz, sz, qp, qm) = (
            col(Observable::Norm)?,
            col(Observable::HTilde)?,
            col(Observable::Lz)?,
            col(Observable::Sz)?,
            col(Observable::QTildePlus)?,
            col(Observable::QTildeMinus)?,
        );
        writeln!(w, "t,norm,Re_Htilde,Re_Lz,Re_Sz,Re_Qp,Im_Qp,Re_Qm,Im_Qm")?;
        for (t, v) in &self.points {
            writeln!(
                w,
                "{t},{},{},{},{},{},{},{},{}",
                v[n].re, v[h].re, v[lz].re, v[sz].re, v[qp].re, v[qp].im, v[qm].re, v[qm].im
            )?;
        }
        Ok(())
    }
}

/// Advances `psi` by one RK4 step of `i d psi/dt = H(t) psi`.
///
/// No stability guard is applied here; [`run`] enforces one for whole spans.
pub fn step(
    field: &SpinorField,
    profile: &FieldProfile,
    cfg: &PhysicalConfig,
    t: f64,
    dt: f64,
) -> Result<SpinorField, PropagatorError> {
    let h_apply = |psi: &SpinorField, at: f64| -> Result<SpinorField, PropagatorError> {
        let ctx = TimeContext::from_fields(profile, cfg, at)?;
        Ok(apply(OperatorKind::H, psi, &ctx)?)
    };
    let stage = |base: &SpinorField, coeff: Complex64, hpsi: &SpinorField, at: f64| {
        let mut y = base.clone();
        y.scaled_add(coeff, hpsi).expect("same grid");
        y.set_t(at);
        y
    };
    let half = 0.5 * dt;
    let h1 = h_apply(field, t)?;
    let y2 = stage(field, -I * half, &h1, t + half);
    let h2 = h_apply(&y2, t + half)?;
    let y3 = stage(field, -I * half, &h2, t + half);
    let h3 = h_apply(&y3, t + half)?;
    let y4 = stage(field, -I * dt, &h3, t + dt);
    let h4 = h_apply(&y4, t + dt)?;

    let mut out = field.clone();
    out.scaled_add(-I * (dt / 6.0), &h1)?;
    out.scaled_add(-I * (dt / 3.0), &h2)?;
    out.scaled_add(-I * (dt / 3.0), &h3)?;
    out.scaled_add(-I * (dt / 6.0), &h4)?;
    out.set_t(t + dt);
    if !out.norm_sqr().is_finite() {
        return Err(PropagatorError::Unstable { t });
    }
    Ok(out)
}

/// Largest stable RK4 step estimated from the kinetic Fourier symbol plus the
/// potential scale of `H` over `[t0, t1]`.
pub fn stability_dt_limit(
    profile: &FieldProfile,
    cfg: &PhysicalConfig,
    spec: &crate::grid::GridSpec,
    t0: f64,
    t1: f64,
) -> Result<f64, PropagatorError> {
    let mut a_max = 0.0f64;
    let mut b_max = 0.0f64;
    for i in 0..=256 {
        let t = t0 + (t1 - t0) * i as f64 / 256.0;
        let s = profile.sample(cfg, t)?;
        a_max = a_max.max(s.a.norm());
        b_max = b_max.max(s.b.abs());
    }
    let e = cfg.charge().abs();
    let kinetic = crate::grid::max_laplacian_symbol(spec);
    let radius = spec.length() / std::f64::consts::SQRT_2;
    let potential = e * e * a_max * a_max * radius * radius / 4.0
        + e * a_max * radius * kinetic.sqrt()
        + e * b_max;
    Ok(2.828 / (kinetic + potential))
}

/// Integrates over `[t0, t1]`, recording observables every `stride` steps.
///
/// Returns the final state and the recorded trajectory.
pub fn run(
    setup: &PropagationSetup,
    initial: &SpinorField,
) -> Result<(SpinorField, Trajectory), PropagatorError> {
    let span_ok = setup.t0.is_finite() && setup.t1 > setup.t0 && setup.dt > 0.0;
    if !span_ok {
        return Err(PropagatorError::InvalidSetup("need t1 > t0 and dt > 0"));
    }
    if setup.stride == 0 {
        return Err(PropagatorError::InvalidSetup("stride must be positive"));
    }
    for &obs in &setup.observables {
        if obs.needs_aux() && setup.sol.is_none() {
            return Err(PropagatorError::ObservableNeedsAux(obs));
        }
    }
    let span = setup.t1 - setup.t0;
    let n_steps = (span / setup.dt).round().max(1.0) as usize;
    let dt = span / n_steps as f64;
    let limit = stability_dt_limit(setup.profile, &setup.cfg, initial.spec(), setup.t0, setup.t1)?;
    if dt > 0.5 * limit {
        return Err(PropagatorError::DtTooLarge { dt, limit });
    }

    let mut field = initial.clone();
    field.set_t(setup.t0);
    let mut trajectory = Trajectory {
        observables: setup.observables.clone(),
        points: Vec::new(),
    };
    record(&mut trajectory, &field, setup)?;
    for k in 0..n_steps {
        let t = setup.t0 + k as f64 * dt;
        field = step(&field, setup.profile, &setup.cfg, t, dt)?;
        // Track the exact grid time to keep context lookups in sync.
        field.set_t(setup.t0 + (k + 1) as f64 * dt);
        if (k + 1) % setup.stride == 0 || k + 1 == n_steps {
            record(&mut trajectory, &field, setup)?;
        }
    }
    Ok((field, trajectory))
}

fn record(
    trajectory: &mut Trajectory,
    field: &SpinorField,
    setup: &PropagationSetup,
) -> Result<(), PropagatorError> {
    let t = field.t();
    let mut values = Vec::with_capacity(setup.observables.len());
    let ctx = match setup.sol {
        Some(sol) => sol.context_at(t)?,
        None => TimeContext::from_fields(setup.profile, &setup.cfg, t)?,
    };
    for &obs in &setup.observables {
        let value = match obs {
            Observable::Norm => Complex64::new(field.norm(), 0.0),
            Observable::HTilde => expectation(field, OperatorKind::HTilde, &ctx)?,
            Observable::Lz => expectation(field, OperatorKind::Lz, &ctx)?,
            Observable::Sz => expectation(field, OperatorKind::Sz, &ctx)?,
            Observable::QTildePlus => expectation(field, OperatorKind::QTildePlus, &ctx)?,
            Observable::QTildeMinus => expectation(field, OperatorKind::QTildeMinus, &ctx)?,
            Observable::Number => {
                let lowered = apply(OperatorKind::BMinus, field, &ctx)?;
                let image = apply(OperatorKind::BPlus, &lowered, &ctx)?;
                field.inner(&image)?
            }
        };
        values.push(value);
    }
    trajectory.points.push((t, values));
    Ok(())
}

fn expectation(
    field: &SpinorField,
    kind: OperatorKind,
    ctx: &TimeContext,
) -> Result<Complex64, PropagatorError> {
    let image = apply(kind, field, ctx)?;
    Ok(field.inner(&image)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::solutions::{EigenState, QuantumNumbers, Spin};
    use std::sync::Arc;

    fn grid() -> GridSpec {
        GridSpec::new(64, 20.0).unwrap()
    }

    fn constant_solution() -> Arc<AuxSolution> {
        Arc::new(
            AuxSolution::analytic_constant(
                &PhysicalConfig::default(),
                1.0,
                0.0,
                Complex64::default(),
                Complex64::new(1.0, 0.0),
            )
            .unwrap(),
        )
    }

    #[test]
    fn static_zero_mode_stays_put() {
        let profile = FieldProfile::Constant { b0: 1.0, d0: 0.0 };
        let cfg = PhysicalConfig::default();
        let sol = constant_solution();
        let state = EigenState::new(QuantumNumbers::new(0, 0, Spin::Up).unwrap(), sol).unwrap();
        let spec = grid();
        let initial = state.generate(&spec, 0.0).unwrap();
        let mut field = initial.clone();
        for k in 0..1000 {
            field = step(&field, &profile, &cfg, k as f64 * 1e-3, 1e-3).unwrap();
        }
        let dev = field.difference(&initial).unwrap().norm();
        assert!(dev <= 1e-9, "zero-mode deviation {dev:.3e}");
        assert!((field.norm() - 1.0).abs() <= 1e-8, "norm drift {:.3e}", field.norm() - 1.0);
    }

    #[test]
    fn free_gaussian_matches_dispersion() {
        // For B = D = 0 the up component obeys i dpsi/dt = -lap psi, whose
        // Gaussian solution is (2 pi)^{-1/2} (a0/a) e^{-|z|^2/(4a)}, a = a0 + it.
        let profile = FieldProfile::Constant { b0: 0.0, d0: 0.0 };
        let cfg = PhysicalConfig::default();
        let spec = grid();
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let initial = SpinorField::from_fn(spec, 0.0, |z| {
            (
                Complex64::new(norm * (-z.norm_sqr() / 4.0).exp(), 0.0),
                Complex64::default(),
            )
        });
        let mut field = initial.clone();
        let dt = 1e-3;
        for k in 0..500 {
            field = step(&field, &profile, &cfg, k as f64 * dt, dt).unwrap();
        }
        let a = Complex64::new(1.0, 0.5);
        let exact = SpinorField::from_fn(spec, 0.5, move |z| {
            (norm / a * (-z.norm_sqr() / (4.0 * a)).exp(), Complex64::default())
        });
        let err = field.difference(&exact).unwrap().norm();
        assert!(err <= 1e-6, "free-particle error {err:.3e}");
    }

    #[test]
    fn dressed_observables_are_conserved() {
        // Short version of the conservation criterion: superposition of
        // eigenstates under a sinusoidal drive.
        let profile = FieldProfile::Sinusoidal {
            b_mean: 1.0,
            b_amp: 0.5,
            omega: 1.0,
            d_mean: 0.0,
            d_amp: 0.0,
        };
        let cfg = PhysicalConfig::default();
        let sol = Arc::new(
            crate::aux_ode::normalize_wronskian(
                AuxSolution::solve_canonical(&profile, &cfg, 0.0, 0.6, 1e-12).unwrap(),
            )
            .unwrap(),
        );
        let spec = grid();
        let mut initial = crate::solutions::eigenstate(
            QuantumNumbers::new(0, 0, Spin::Up).unwrap(),
            &sol,
            &spec,
            0.0,
        )
        .unwrap();
        let second = crate::solutions::eigenstate(
            QuantumNumbers::new(1, -1, Spin::Down).unwrap(),
            &sol,
            &spec,
            0.0,
        )
        .unwrap();
        initial.scale(0.8.into());
        initial.scaled_add(Complex64::new(0.36, 0.48), &second).unwrap();
        let setup = PropagationSetup {
            profile: &profile,
            cfg,
            sol: Some(&sol),
            t0: 0.0,
            t1: 0.5,
            dt: 1e-3,
            stride: 100,
            observables: standard_observables(),
        };
        let (_, trajectory) = run(&setup, &initial).unwrap();
        for obs in [
            Observable::QTildePlus,
            Observable::QTildeMinus,
            Observable::HTilde,
            Observable::Lz,
        ] {
            let drift = trajectory.max_drift(obs).unwrap();
            assert!(drift <= 1e-6, "{obs:?} drift {drift:.3e}");
        }
        assert!(trajectory.max_drift(Observable::Norm).unwrap() <= 1e-8);

        let mut csv = Vec::new();
        trajectory.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("t,norm,Re_Htilde,Re_Lz,Re_Sz,Re_Qp,Im_Qp,Re_Qm,Im_Qm\n"));
    }

    #[test]
    fn conservation_holds_with_nonzero_d_on_every_profile_kind() {
        let cfg = PhysicalConfig::default();
        let profiles = [
            FieldProfile::Constant { b0: 1.0, d0: 0.3 },
            FieldProfile::LinearD { b0: 1.0, d_rate: 0.5 },
            FieldProfile::Sinusoidal {
                b_mean: 1.0,
                b_amp: 0.4,
                omega: 1.3,
                d_mean: 0.1,
                d_amp: 0.3,
            },
        ];
        let spec = grid();
        for profile in profiles {
            let sol = Arc::new(
                crate::aux_ode::normalize_wronskian(
                    AuxSolution::solve_canonical(&profile, &cfg, 0.0, 0.4, 1e-12).unwrap(),
                )
                .unwrap(),
            );
            let mut initial = crate::solutions::eigenstate(
                QuantumNumbers::new(0, 0, Spin::Up).unwrap(),
                &sol,
                &spec,
                0.0,
            )
            .unwrap();
            let second = crate::solutions::eigenstate(
                QuantumNumbers::new(1, -1, Spin::Down).unwrap(),
                &sol,
                &spec,
                0.0,
            )
            .unwrap();
            initial.scale(0.6.into());
            initial.scaled_add(Complex64::new(0.0, 0.8), &second).unwrap();
            let setup = PropagationSetup {
                profile: &profile,
                cfg,
                sol: Some(&sol),
                t0: 0.0,
                t1: 0.3,
                dt: 1e-3,
                stride: 75,
                observables: standard_observables(),
            };
            let (_, trajectory) = run(&setup, &initial).unwrap();
            for obs in [
                Observable::QTildePlus,
                Observable::QTildeMinus,
                Observable::HTilde,
                Observable::Lz,
            ] {
                let drift = trajectory.max_drift(obs).unwrap();
                assert!(drift <= 1e-6, "{profile:?}: {obs:?} drift {drift:.3e}");
            }
            assert!(trajectory.max_drift(Observable::Norm).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn oversized_dt_is_refused() {
        let profile = FieldProfile::Constant { b0: 1.0, d0: 0.0 };
        let cfg = PhysicalConfig::default();
        let spec = grid();
        let initial = SpinorField::zeros(spec, 0.0);
        let setup = PropagationSetup {
            profile: &profile,
            cfg,
            sol: None,
            t0: 0.0,
            t1: 1.0,
            dt: 0.05,
            stride: 10,
            observables: vec![Observable::Norm],
        };
        assert!(matches!(
            run(&setup, &initial),
            Err(PropagatorError::DtTooLarge { .. })
        ));
    }

    #[test]
    fn instability_is_reported() {
        let profile = FieldProfile::Constant { b0: 1.0, d0: 0.0 };
        let cfg = PhysicalConfig::default();
        let spec = grid();
        let mut field = crate::operators::probe_field(&spec, 0.0, 9);
        let mut failed = false;
        for k in 0..80 {
            match step(&field, &profile, &cfg, k as f64 * 5.0, 5.0) {
                Ok(next) => field = next,
                Err(PropagatorError::Unstable { .. }) => {
                    failed = true;
                    break;
                }
                Err(other) => panic!("unexpected error {other}"),
            }
        }
        assert!(failed, "wildly oversized steps must trip the NaN guard");
    }

    #[test]
    fn aux_observable_without_solution_is_rejected() {
        let profile = FieldProfile::Constant { b0: 1.0, d0: 0.0 };
        let cfg = PhysicalConfig::default();
        let initial = SpinorField::zeros(grid(), 0.0);
        let setup = PropagationSetup {
            profile: &profile,
            cfg,
            sol: None,
            t0: 0.0,
            t1: 0.1,
            dt: 1e-3,
            stride: 10,
            observables: vec![Observable::QTildePlus],
        };
        assert!(matches!(
            run(&setup, &initial),
            Err(PropagatorError::ObservableNeedsAux(_))
        ));
    }
}
