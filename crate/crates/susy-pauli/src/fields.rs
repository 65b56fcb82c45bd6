//! Electromagnetic field profiles and direct field quantities.
//!
//! A profile specifies the uniform magnetic field `B(t)` and the oscillator
//! coefficient `D(t)` entering the symmetric-gauge vector potential
//! `A(z, t) = a(t) z / 2` with `a = D + iB`. In Cartesian components
//! `A_x = (D x - B y)/2`, `A_y = (B x + D y)/2`; the electric field is purely
//! induced, `E = -dA/dt`.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("charge must be finite and nonzero, got {0}")]
    InvalidCharge(f64),
    #[error("t = {t} outside the tabulated range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("tabulated profile needs at least 5 samples, got {0}")]
    TableTooShort(usize),
    #[error("tabulated times must be strictly increasing and finite (row {0})")]
    TableNotMonotone(usize),
    #[error("bad table row {line}: {reason}")]
    TableParse { line: usize, reason: String },
}

/// Global physical parameters (`hbar = m = 1`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConfig {
    charge: f64,
}

impl PhysicalConfig {
    /// A configuration with charge `e`; `e` must be finite and nonzero.
    pub fn new(charge: f64) -> Result<Self, FieldError> {
        if !charge.is_finite() || charge == 0.0 {
            return Err(FieldError::InvalidCharge(charge));
        }
        Ok(Self { charge })
    }

    pub fn charge(&self) -> f64 {
        self.charge
    }
}

impl Default for PhysicalConfig {
    /// `e = 1`. The sign of the physical electron charge is a modelling
    /// choice left to the caller.
    fn default() -> Self {
        Self { charge: 1.0 }
    }
}

/// All direct field quantities at one instant.
#[derive(Clone, Copy, Debug)]
pub struct FieldSample {
    pub t: f64,
    pub b: f64,
    pub b_dot: f64,
    pub d: f64,
    pub d_dot: f64,
    /// `a(t) = D(t) + i B(t)`.
    pub a: Complex64,
}

impl FieldSample {
    /// Induced electric field `(E_x, E_y)` at the probe point `(x, y)`:
    /// `E_x = (B' y - D' x)/2`, `E_y = -(B' x + D' y)/2`.
    pub fn electric_at(&self, x: f64, y: f64) -> (f64, f64) {
        (
            0.5 * self.b_dot * y - 0.5 * self.d_dot * x,
            -0.5 * self.b_dot * x - 0.5 * self.d_dot * y,
        )
    }
}

/// Time dependence of the field pair `(B, D)`.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldProfile {
    /// `B = B0`, `D = D0`.
    Constant { b0: f64, d0: f64 },
    /// `B = B0`, `D = D_rate * t`.
    LinearD { b0: f64, d_rate: f64 },
    /// `B = B_mean + B_amp sin(w t)`, `D = D_mean + D_amp sin(w t)`.
    Sinusoidal {
        b_mean: f64,
        b_amp: f64,
        omega: f64,
        d_mean: f64,
        d_amp: f64,
    },
    /// Sampled `(t, B, D)` nodes with cubic interpolation in between.
    Tabulated(TabulatedProfile),
}

impl FieldProfile {
    /// Evaluates `B`, `D`, their time derivatives and `a = D + iB` at `t`.
    pub fn sample(&self, _cfg: &PhysicalConfig, t: f64) -> Result<FieldSample, FieldError> {
        let (b, b_dot, d, d_dot) = match self {
            FieldProfile::Constant { b0, d0 } => (*b0, 0.0, *d0, 0.0),
            FieldProfile::LinearD { b0, d_rate } => (*b0, 0.0, d_rate * t, *d_rate),
            FieldProfile::Sinusoidal {
                b_mean,
                b_amp,
                omega,
                d_mean,
                d_amp,
            } => {
                let (s, c) = (omega * t).sin_cos();
                (
                    b_mean + b_amp * s,
                    b_amp * omega * c,
                    d_mean + d_amp * s,
                    d_amp * omega * c,
                )
            }
            FieldProfile::Tabulated(table) => table.eval(t)?,
        };
        Ok(FieldSample {
            t,
            b,
            b_dot,
            d,
            d_dot,
            a: Complex64::new(d, b),
        })
    }

    /// The complex vector potential `A(z, t) = a(t) z / 2`.
    ///
    /// Cartesian components are recovered as `A_x = Re A`, `A_y = Im A`.
    pub fn vector_potential(
        &self,
        cfg: &PhysicalConfig,
        t: f64,
        z: Complex64,
    ) -> Result<Complex64, FieldError> {
        Ok(0.5 * self.sample(cfg, t)?.a * z)
    }

    /// Induced electric field at the probe point `(x, y)`.
    pub fn electric_field(
        &self,
        cfg: &PhysicalConfig,
        t: f64,
        x: f64,
        y: f64,
    ) -> Result<(f64, f64), FieldError> {
        Ok(self.sample(cfg, t)?.electric_at(x, y))
    }

    /// Time span on which the profile is defined; `None` means all of `R`.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            FieldProfile::Tabulated(table) => {
                Some((table.t[0], *table.t.last().expect("nonempty table")))
            }
            _ => None,
        }
    }
}

/// `(t, B, D)` samples with strictly increasing `t`.
///
/// Node derivatives are 4th-order finite differences (centered in the
/// interior, one-sided at the ends); between nodes both the values and the
/// derivatives come from the cubic Hermite interpolant, so the tabulated kind
/// matches the dense-output order of the auxiliary ODE solver.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedProfile {
    t: Vec<f64>,
    b: Vec<f64>,
    d: Vec<f64>,
    b_dot: Vec<f64>,
    d_dot: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(t: Vec<f64>, b: Vec<f64>, d: Vec<f64>) -> Result<Self, FieldError> {
        let n = t.len();
        if n < 5 {
            return Err(FieldError::TableTooShort(n));
        }
        assert_eq!(b.len(), n, "B column length mismatch");
        assert_eq!(d.len(), n, "D column length mismatch");
        for i in 0..n {
            let ok = t[i].is_finite() && b[i].is_finite() && d[i].is_finite();
            if !ok || (i > 0 && t[i] <= t[i - 1]) {
                return Err(FieldError::TableNotMonotone(i));
            }
        }
        let b_dot = node_derivatives(&t, &b);
        let d_dot = node_derivatives(&t, &d);
        Ok(Self { t, b, d, b_dot, d_dot })
    }

    /// Parses the CSV table format: header `t,B,D`, one row per node.
    pub fn from_csv(text: &str) -> Result<Self, FieldError> {
        let mut lines = text.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((i, line)) => {
                    let line = line.trim();
                    if line.is_empty() || line.starts_with('#') {
                        continue;
                    }
                    break (i, line);
                }
                None => {
                    return Err(FieldError::TableParse {
                        line: 0,
                        reason: "empty table".into(),
                    })
                }
            }
        };
        let cols: Vec<&str> = header.1.split(',').map(str::trim).collect();
        if cols != ["t", "B", "D"] {
            return Err(FieldError::TableParse {
                line: header.0 + 1,
                reason: format!("expected header `t,B,D`, got `{}`", header.1),
            });
        }
        let (mut ts, mut bs, mut ds) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(FieldError::TableParse {
                    line: i + 1,
                    reason: format!("expected 3 columns, got {}", fields.len()),
                });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| FieldError::TableParse {
                    line: i + 1,
                    reason: format!("`{s}`: {e}"),
                })
            };
            ts.push(parse(fields[0])?);
            bs.push(parse(fields[1])?);
            ds.push(parse(fields[2])?);
        }
        Self::new(ts, bs, ds)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.t.len()).map(|i| (self.t[i], self.b[i], self.d[i]))
    }

    fn eval(&self, t: f64) -> Result<(f64, f64, f64, f64), FieldError> {
        let n = self.t.len();
        let (lo, hi) = (self.t[0], self.t[n - 1]);
        if !(lo..=hi).contains(&t) {
            return Err(FieldError::OutOfRange { t, lo, hi });
        }
        // partition_point gives the first node > t; interval index is one less.
        let k = self.t.partition_point(|&x| x <= t).clamp(1, n - 1) - 1;
        if t == self.t[k] {
            return Ok((self.b[k], self.b_dot[k], self.d[k], self.d_dot[k]));
        }
        let h = self.t[k + 1] - self.t[k];
        let s = (t - self.t[k]) / h;
        let hermite = |y0: f64, m0: f64, y1: f64, m1: f64| {
            let s2 = s * s;
            let s3 = s2 * s;
            let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                + (s3 - 2.0 * s2 + s) * h * m0
                + (-2.0 * s3 + 3.0 * s2) * y1
                + (s3 - s2) * h * m1;
            let dv = ((6.0 * s2 - 6.0 * s) * (y0 - y1)
                + (3.0 * s2 - 4.0 * s + 1.0) * h * m0
                + (3.0 * s2 - 2.0 * s) * h * m1)
                / h;
            (v, dv)
        };
        let (b, b_dot) = hermite(self.b[k], self.b_dot[k], self.b[k + 1], self.b_dot[k + 1]);
        let (d, d_dot) = hermite(self.d[k], self.d_dot[k], self.d[k + 1], self.d_dot[k + 1]);
        Ok((b, b_dot, d, d_dot))
    }
}

/// First-derivative estimates at every node from 5-point stencils.
fn node_derivatives(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(2).min(n - 5);
            let w = fd_weights(t[i], &t[start..start + 5]);
            (0..5).map(|j| w[j] * y[start + j]).sum()
        })
        .collect()
}

/// Fornberg weights for the first derivative at `x0` on arbitrary nodes.
fn fd_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let m = 1; // derivative order
    let mut c = vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg() -> PhysicalConfig {
        PhysicalConfig::default()
    }

    #[test]
    fn constant_sample() {
        let p = FieldProfile::Constant { b0: 1.0, d0: 0.0 };
        let s = p.sample(&cfg(), 7.0).unwrap();
        assert_eq!(s.b, 1.0);
        assert_eq!(s.d, 0.0);
        assert_eq!(s.a, Complex64::new(0.0, 1.0));
    }

    #[test]
    fn linear_d_sample() {
        let p = FieldProfile::LinearD { b0: 1.0, d_rate: 1.0 };
        let s = p.sample(&cfg(), 2.0).unwrap();
        assert_eq!(s.b, 1.0);
        assert_eq!(s.d, 2.0);
        assert_eq!(s.d_dot, 1.0);
        assert_eq!(s.a, Complex64::new(2.0, 1.0));
    }

    #[test]
    fn sinusoidal_electric_probe() {
        // E_x = B'(0) y / 2 = (0.5 * 1 * cos 0) * 1 / 2 = 0.25 at (0, 1).
        let p = FieldProfile::Sinusoidal {
            b_mean: 1.0,
            b_amp: 0.5,
            omega: 1.0,
            d_mean: 0.0,
            d_amp: 0.0,
        };
        let (ex, ey) = p.electric_field(&cfg(), 0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(ex, 0.25, max_relative = 1e-15);
        assert_eq!(ey, 0.0);
    }

    #[test]
    fn vector_potential_values() {
        let p = FieldProfile::Constant { b0: 2.0, d0: 0.0 };
        let a = p.vector_potential(&cfg(), 0.0, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(a, Complex64::new(0.0, 1.0));

        let p = FieldProfile::Constant { b0: 0.0, d0: 2.0 };
        let a = p.vector_potential(&cfg(), 3.0, Complex64::new(0.0, 1.0)).unwrap();
        assert_eq!(a, Complex64::new(0.0, 1.0));

        // (1/2)(3 + i)(1 + i) = 1 + 2i
        let p = FieldProfile::LinearD { b0: 1.0, d_rate: 3.0 };
        let a = p.vector_potential(&cfg(), 1.0, Complex64::new(1.0, 1.0)).unwrap();
        assert_relative_eq!(a.re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(a.im, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn electric_matches_potential_rate() {
        // E from the closed formula equals -d(Re A)/dt, -d(Im A)/dt built from
        // the analytic a'(t) = D' + iB'.
        let p = FieldProfile::Sinusoidal {
            b_mean: 0.7,
            b_amp: 0.3,
            omega: 1.9,
            d_mean: -0.2,
            d_amp: 0.4,
        };
        for (t, x, y) in [(0.0, 0.3, -1.2), (0.8, -0.5, 0.9), (2.4, 1.1, 0.2)] {
            let s = p.sample(&cfg(), t).unwrap();
            let a_dot = Complex64::new(s.d_dot, s.b_dot);
            let da_dt = 0.5 * a_dot * Complex64::new(x, y);
            let (ex, ey) = s.electric_at(x, y);
            assert_relative_eq!(ex, -da_dt.re, epsilon = 1e-15);
            assert_relative_eq!(ey, -da_dt.im, epsilon = 1e-15);
        }
    }

    fn sin_table(n: usize, t_max: f64) -> TabulatedProfile {
        let ts: Vec<f64> = (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect();
        let bs: Vec<f64> = ts.iter().map(|t| t.sin()).collect();
        let ds: Vec<f64> = ts.iter().map(|t| 0.5 * (0.7 * t).cos()).collect();
        TabulatedProfile::new(ts, bs, ds).unwrap()
    }

    #[test]
    fn tabulated_reproduces_nodes_exactly() {
        let table = sin_table(64, 3.0);
        let p = FieldProfile::Tabulated(table.clone());
        for (t, b, d) in table.nodes() {
            let s = p.sample(&cfg(), t).unwrap();
            assert_eq!(s.b, b);
            assert_eq!(s.d, d);
        }
    }

    #[test]
    fn tabulated_interpolation_accuracy() {
        let p = FieldProfile::Tabulated(sin_table(301, 3.0));
        for i in 0..200 {
            let t = 0.007 + 2.98 * i as f64 / 199.0;
            let s = p.sample(&cfg(), t).unwrap();
            assert_relative_eq!(s.b, t.sin(), epsilon = 1e-8);
            assert_relative_eq!(s.b_dot, t.cos(), epsilon = 1e-6);
            assert_relative_eq!(s.d, 0.5 * (0.7 * t).cos(), epsilon = 1e-8);
            assert_relative_eq!(s.d_dot, -0.35 * (0.7 * t).sin(), epsilon = 1e-6);
        }
    }

    #[test]
    fn tabulated_out_of_range() {
        let p = FieldProfile::Tabulated(sin_table(16, 3.0));
        assert!(matches!(
            p.sample(&cfg(), 3.5),
            Err(FieldError::OutOfRange { .. })
        ));
        assert!(matches!(
            p.sample(&cfg(), -0.1),
            Err(FieldError::OutOfRange { .. })
        ));
    }

    #[test]
    fn csv_parse_and_errors() {
        let table = TabulatedProfile::from_csv("t,B,D\n0,1,0\n1,1.5,0.1\n2,1,0\n3,0.5,-0.1\n4,1,0\n").unwrap();
        assert_eq!(table.nodes().count(), 5);
        assert!(TabulatedProfile::from_csv("time,B,D\n0,1,0\n").is_err());
        assert!(TabulatedProfile::from_csv("t,B,D\n0,1\n").is_err());
        assert!(matches!(
            TabulatedProfile::from_csv("t,B,D\n0,1,0\n0,1,0\n1,1,0\n2,1,0\n3,1,0\n"),
            Err(FieldError::TableNotMonotone(1))
        ));
    }

    #[test]
    fn rejects_zero_charge() {
        assert!(PhysicalConfig::new(0.0).is_err());
        assert!(PhysicalConfig::new(f64::NAN).is_err());
        assert_eq!(PhysicalConfig::new(-1.0).unwrap().charge(), -1.0);
    }

    proptest! {
        #[test]
        fn sample_a_decomposition_exact(
            b0 in -3.0f64..3.0,
            d0 in -3.0f64..3.0,
            amp in 0.0f64..1.0,
            omega in 0.1f64..4.0,
            t in -5.0f64..5.0,
        ) {
            let profiles = [
                FieldProfile::Constant { b0, d0 },
                FieldProfile::LinearD { b0, d_rate: d0 },
                FieldProfile::Sinusoidal { b_mean: b0, b_amp: amp, omega, d_mean: d0, d_amp: amp },
            ];
            for p in profiles {
                let s = p.sample(&PhysicalConfig::default(), t).unwrap();
                prop_assert_eq!(s.a.im, s.b);
                prop_assert_eq!(s.a.re, s.d);
            }
        }

        #[test]
        fn tabulated_a_decomposition_exact(seed in 0u64..50, t01 in 0.0f64..1.0) {
            let n = 32 + (seed as usize % 32);
            let table = sin_table(n, 2.0);
            let p = FieldProfile::Tabulated(table);
            let s = p.sample(&PhysicalConfig::default(), 2.0 * t01).unwrap();
            prop_assert_eq!(s.a.im, s.b);
            prop_assert_eq!(s.a.re, s.d);
        }
    }
}
