//! Subcommand implementations.

use crate::config::{GridChoice, OdeInit, RunConfig};
use anyhow::{Context, Result};
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use susy_pauli::aux_ode::{normalize_wronskian, AuxSolution};
use susy_pauli::grid::GridSpec;
use susy_pauli::operators::{algebra_identities, probe_field};
use susy_pauli::propagator::{run as propagate_run, standard_observables, Observable, PropagationSetup};
use susy_pauli::solutions::{
    pauli_residual, recommended_grid, EigenState, QuantumNumbers, Spin,
};
use susy_pauli::symbolic::verify_suite;

pub struct Env {
    pub config: RunConfig,
    pub seed: u64,
    pub tol_scale: f64,
}

pub enum Outcome {
    Pass,
    VerificationFailed(String),
}

impl Env {
    fn out_path(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.config.out_dir).with_context(|| {
            format!("creating output directory {}", self.config.out_dir.display())
        })?;
        Ok(self.config.out_dir.join(name))
    }

    fn solve(&self) -> Result<Arc<AuxSolution>> {
        let cfg = &self.config;
        // Pad the span so residual stencils near the endpoints stay inside.
        let margin = 4.0 * cfg.time.dt.max(1e-3);
        let sol = match cfg.ode.init {
            OdeInit::Canonical => AuxSolution::solve_canonical(
                &cfg.profile,
                &cfg.physical,
                cfg.time.t0 - margin,
                cfg.time.t1 + margin,
                cfg.ode.tol,
            )?,
            OdeInit::Explicit { f0, f0_dot } => AuxSolution::solve(
                &cfg.profile,
                &cfg.physical,
                cfg.time.t0 - margin,
                cfg.time.t1 + margin,
                f0,
                f0_dot,
                cfg.ode.tol,
            )?,
        };
        let sol = if cfg.ode.normalize {
            normalize_wronskian(sol)?
        } else {
            sol
        };
        Ok(Arc::new(sol))
    }

    fn grid(&self, sol: &AuxSolution) -> Result<GridSpec> {
        match self.config.grid {
            GridChoice::Manual { n, l } => Ok(GridSpec::new(n, l)?),
            GridChoice::Auto => {
                let t = &self.config.time;
                let times: Vec<f64> = (0..=32)
                    .map(|i| t.t0 + (t.t1 - t.t0) * i as f64 / 32.0)
                    .collect();
                let state = self.config.state;
                Ok(recommended_grid(sol, state.n, state.m, &times)?)
            }
        }
    }

    fn quantum_numbers(&self) -> Result<QuantumNumbers> {
        let s = self.config.state;
        Ok(QuantumNumbers::new(s.n, s.m, s.s)?)
    }

    fn sample_times(&self) -> Vec<f64> {
        let t = &self.config.time;
        let n = self.config.time.samples.max(2);
        (0..n)
            .map(|i| t.t0 + (t.t1 - t.t0) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// `verify-algebra`: run the exact identity suite, write text + JSON reports.
pub fn verify_algebra(env: &Env) -> Result<Outcome> {
    let reports = verify_suite();
    let mut text = String::new();
    let mut json = Vec::new();
    let mut failures = 0usize;
    for r in &reports {
        let status = if r.passed() { "pass" } else { "fail" };
        text.push_str(&format!(
            "{:40} {:4}  {}\n",
            r.name, status, r.statement
        ));
        if let Some(residual) = &r.residual {
            text.push_str(&format!("    surviving: {residual}\n"));
            failures += 1;
        }
        json.push(serde_json::json!({
            "name": r.name,
            "status": status,
            "surviving_terms": r.surviving_terms,
        }));
    }
    fs::write(env.out_path("algebra_report.txt")?, &text)?;
    fs::write(
        env.out_path("algebra_report.json")?,
        serde_json::to_string_pretty(&json)?,
    )?;
    print!("{text}");
    println!("{} identities, {failures} failing", reports.len());
    if failures == 0 {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::VerificationFailed(format!(
            "{failures} identities left nonzero residuals"
        )))
    }
}

/// `solve-ode`: integrate the auxiliary equation, dump the trajectory CSV.
pub fn solve_ode(env: &Env) -> Result<Outcome> {
    let sol = env.solve()?;
    let times = env.sample_times();
    let path = env.out_path("aux_trajectory.csv")?;
    let mut file = fs::File::create(&path)?;
    sol.write_trajectory_csv(&mut file, times.iter().copied())?;
    let w = sol.wronskian_at(env.config.time.t0)?;
    println!(
        "wrote {} ({} samples); W(t0) = {:.3e}{:+.3e}i",
        path.display(),
        times.len(),
        w.re,
        w.im
    );
    Ok(Outcome::Pass)
}

/// `check-operators`: bracket identities on seeded probes, CSV report.
pub fn check_operators(env: &Env) -> Result<Outcome> {
    let sol = env.solve()?;
    let spec = env.grid(&sol)?;
    let t = &env.config.time;
    let times = [t.t0, 0.5 * (t.t0 + t.t1), t.t1];
    let path = env.out_path("operator_residuals.csv")?;
    let mut file = fs::File::create(&path)?;
    writeln!(file, "identity_name,t,residual,tolerance,pass")?;
    let mut failures = 0usize;
    let mut checks = 0usize;
    for &t in &times {
        let ctx = sol.context_at(t)?;
        for probe in 0..5u64 {
            let psi = probe_field(&spec, t, env.seed.wrapping_add(probe));
            for identity in algebra_identities(&ctx)? {
                let r = identity.residual(&psi, &ctx)?;
                let tol = identity.tol * env.tol_scale;
                let pass = r <= tol;
                writeln!(file, "{},{t},{r:e},{tol:e},{pass}", identity.name)?;
                checks += 1;
                if !pass {
                    failures += 1;
                }
            }
        }
    }
    println!(
        "wrote {} ({} checks on grid N={}, L={}), {failures} failures",
        path.display(),
        checks,
        spec.n(),
        spec.length()
    );
    if failures == 0 {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::VerificationFailed(format!(
            "{failures} of {checks} operator residuals above tolerance"
        )))
    }
}

/// `gen-state`: snapshot one eigenstate plus a metadata row.
pub fn gen_state(env: &Env) -> Result<Outcome> {
    let sol = env.solve()?;
    let spec = env.grid(&sol)?;
    let qn = env.quantum_numbers()?;
    let state = EigenState::new(qn, sol)?;
    let t = env.config.state.t;
    let field = state.generate(&spec, t)?;
    let residual = pauli_residual(&state, &spec, t, env.config.time.dt.min(1e-3))?;

    let bin_path = env.out_path("state.bin")?;
    field.write_snapshot(fs::File::create(&bin_path)?)?;
    let csv_path = env.out_path("state.csv")?;
    field.write_csv(fs::File::create(&csv_path)?)?;
    let meta_path = env.out_path("state_meta.csv")?;
    let mut meta = fs::File::create(&meta_path)?;
    writeln!(meta, "n,m,s,t,energy,norm,pauli_residual")?;
    writeln!(
        meta,
        "{},{},{},{t},{},{},{residual:e}",
        qn.n(),
        qn.m(),
        qn.s(),
        qn.energy(),
        field.norm()
    )?;
    println!(
        "state {qn} at t = {t}: energy {}, norm {:.12}, Pauli residual {residual:.3e}",
        qn.energy(),
        field.norm()
    );
    println!(
        "wrote {}, {}, {}",
        bin_path.display(),
        csv_path.display(),
        meta_path.display()
    );
    let tol = 1e-5 * env.tol_scale;
    if residual <= tol {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::VerificationFailed(format!(
            "Pauli residual {residual:.3e} above {tol:.1e}"
        )))
    }
}

/// `residual`: Pauli-residual sweep of the configured state over time.
pub fn residual(env: &Env) -> Result<Outcome> {
    let sol = env.solve()?;
    let spec = env.grid(&sol)?;
    let state = EigenState::new(env.quantum_numbers()?, sol)?;
    let dt = env.config.time.dt.min(1e-3);
    let path = env.out_path("residual_sweep.csv")?;
    let mut file = fs::File::create(&path)?;
    writeln!(file, "t,residual")?;
    let tol = 1e-5 * env.tol_scale;
    let mut worst: f64 = 0.0;
    for &t in &env.sample_times() {
        let r = pauli_residual(&state, &spec, t, dt)?;
        writeln!(file, "{t},{r:e}")?;
        worst = worst.max(r);
    }
    println!("wrote {}; max residual {worst:.3e} (tol {tol:.1e})", path.display());
    if worst <= tol {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::VerificationFailed(format!(
            "max Pauli residual {worst:.3e} above {tol:.1e}"
        )))
    }
}

/// `propagate`: integrate the configured state, write the trajectory and the
/// conservation report.
pub fn propagate(env: &Env) -> Result<Outcome> {
    let cfg = &env.config;
    let sol = env.solve()?;
    let spec = env.grid(&sol)?;
    let state = EigenState::new(env.quantum_numbers()?, sol.clone())?;
    let initial = state.generate(&spec, cfg.time.t0)?;
    let stride = ((cfg.time.t1 - cfg.time.t0) / cfg.time.dt / 100.0).ceil() as usize;
    let setup = PropagationSetup {
        profile: &cfg.profile,
        cfg: cfg.physical,
        sol: Some(&sol),
        t0: cfg.time.t0,
        t1: cfg.time.t1,
        dt: cfg.time.dt,
        stride: stride.max(1),
        observables: standard_observables(),
    };
    let (final_field, trajectory) = propagate_run(&setup, &initial)?;

    let traj_path = env.out_path("trajectory.csv")?;
    trajectory.write_csv(fs::File::create(&traj_path)?)?;

    let exact = state.generate(&spec, cfg.time.t1)?;
    let cross_check = final_field.difference(&exact)?.norm();

    let drift_tol = 1e-6 * env.tol_scale;
    let norm_tol = 1e-8 * env.tol_scale;
    let mut lines = Vec::new();
    let mut breaches = Vec::new();
    for (obs, tol) in [
        (Observable::QTildePlus, drift_tol),
        (Observable::QTildeMinus, drift_tol),
        (Observable::HTilde, drift_tol),
        (Observable::Lz, drift_tol),
        (Observable::Norm, norm_tol),
    ] {
        let drift = trajectory.max_drift(obs).unwrap_or(f64::NAN);
        let pass = drift <= tol;
        lines.push(format!("{obs:?}: max drift {drift:e} (tol {tol:e}) {}", if pass { "pass" } else { "FAIL" }));
        if !pass {
            breaches.push(format!("{obs:?} drift {drift:.3e}"));
        }
    }
    lines.push(format!(
        "analytic cross-check at t1: L2 error {cross_check:e}"
    ));
    let report_path = env.out_path("conservation_report.txt")?;
    fs::write(&report_path, lines.join("\n") + "\n")?;
    for line in &lines {
        println!("{line}");
    }
    println!("wrote {}, {}", traj_path.display(), report_path.display());
    if breaches.is_empty() {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::VerificationFailed(breaches.join("; ")))
    }
}

/// `spectrum`: eigenvalue table `n + s + 1/2` with degeneracy annotations.
pub fn spectrum(env: &Env, n_max: u32) -> Result<Outcome> {
    let path = env.out_path("spectrum.csv")?;
    let mut file = fs::File::create(&path)?;
    writeln!(file, "n,s,energy,degenerate_with")?;
    println!("{:>3} {:>5} {:>7}  degenerate with", "n", "s", "energy");
    for n in 0..=n_max {
        for s in [Spin::Down, Spin::Up] {
            let qn = QuantumNumbers::new(n, 0, s).expect("m = 0 is always valid");
            let energy = qn.energy();
            let partner = match s {
                // (n, -1/2) pairs with (n-1, +1/2); n = 0 is the unique zero mode.
                Spin::Down if n > 0 => format!("({}, +1/2)", n - 1),
                Spin::Down => "unique zero mode".to_string(),
                Spin::Up => format!("({}, -1/2)", n + 1),
            };
            writeln!(file, "{n},{s},{energy},{partner}")?;
            println!("{n:>3} {s:>5} {energy:>7}  {partner}");
        }
    }
    println!("wrote {}", path.display());
    Ok(Outcome::Pass)
}
