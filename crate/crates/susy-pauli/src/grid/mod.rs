//! Periodic square grid, spinor wavefunctions and spectral derivatives.
//!
//! Fields live on an `N x N` origin-centered grid with coordinates
//! `x, y in [-L/2, L/2)` and are assumed to decay to negligible amplitude at
//! the boundary, so periodic spectral differentiation is exact up to the
//! decay level. Convention: `z = x + iy`, `d/dz = (d_x - i d_y)/2`,
//! `d/dz* = (d_x + i d_y)/2`.

mod fft;

use num_complex::Complex64;
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("grid size {0} is below the minimum of 16 points per side")]
    TooSmall(usize),
    #[error("grid length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("operands live on different grids")]
    SpecMismatch,
    #[error("component buffer has wrong length {got}, expected {expected}")]
    BadBuffer { got: usize, expected: usize },
    #[error("bad snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Geometry of the discretization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    n: usize,
    length: f64,
}

impl GridSpec {
    /// `n` points per side (power of two, at least 16), physical side `length`.
    pub fn new(n: usize, length: f64) -> Result<Self, GridError> {
        if !n.is_power_of_two() {
            return Err(GridError::NotPowerOfTwo(n));
        }
        if n < 16 {
            return Err(GridError::TooSmall(n));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(GridError::BadLength(length));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Quadrature weight of one grid cell.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn coord(&self, idx: usize) -> f64 {
        idx as f64 * self.spacing() - 0.5 * self.length
    }

    /// `z = x + iy` at grid point `(ix, iy)`.
    pub fn z_at(&self, ix: usize, iy: usize) -> Complex64 {
        Complex64::new(self.coord(ix), self.coord(iy))
    }

    fn points(&self) -> usize {
        self.n * self.n
    }
}

/// Two-component complex wavefunction sampled on a grid, with a timestamp.
#[derive(Clone, Debug)]
pub struct SpinorField {
    spec: GridSpec,
    t: f64,
    up: Vec<Complex64>,
    dn: Vec<Complex64>,
}

impl SpinorField {
    pub fn zeros(spec: GridSpec, t: f64) -> Self {
        let len = spec.points();
        Self {
            spec,
            t,
            up: vec![Complex64::default(); len],
            dn: vec![Complex64::default(); len],
        }
    }

    /// Builds a field by evaluating `f(z) -> (up, dn)` at every grid point.
    pub fn from_fn(
        spec: GridSpec,
        t: f64,
        f: impl Fn(Complex64) -> (Complex64, Complex64) + Sync,
    ) -> Self {
        let n = spec.n;
        let mut pairs = vec![[Complex64::default(); 2]; spec.points()];
        crate::exec::for_each_row(&mut pairs, n, |iy, row| {
            for (ix, slot) in row.iter_mut().enumerate() {
                let (u, d) = f(spec.z_at(ix, iy));
                *slot = [u, d];
            }
        });
        let up = pairs.iter().map(|p| p[0]).collect();
        let dn = pairs.iter().map(|p| p[1]).collect();
        Self { spec, t, up, dn }
    }

    pub fn from_components(
        spec: GridSpec,
        t: f64,
        up: Vec<Complex64>,
        dn: Vec<Complex64>,
    ) -> Result<Self, GridError> {
        for buf in [&up, &dn] {
            if buf.len() != spec.points() {
                return Err(GridError::BadBuffer {
                    got: buf.len(),
                    expected: spec.points(),
                });
            }
        }
        Ok(Self { spec, t, up, dn })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn set_t(&mut self, t: f64) {
        self.t = t;
    }

    pub fn up(&self) -> &[Complex64] {
        &self.up
    }

    pub fn dn(&self) -> &[Complex64] {
        &self.dn
    }

    pub fn into_components(self) -> (Vec<Complex64>, Vec<Complex64>) {
        (self.up, self.dn)
    }

    /// `<self|other> = sum (conj(up) up' + conj(dn) dn') h^2`.
    pub fn inner(&self, other: &Self) -> Result<Complex64, GridError> {
        if self.spec != other.spec {
            return Err(GridError::SpecMismatch);
        }
        let n = self.spec.n;
        let sum: Complex64 = crate::exec::sum_rows(n, |iy| {
            let r = iy * n..(iy + 1) * n;
            let mut acc = Complex64::default();
            for i in r {
                acc += self.up[i].conj() * other.up[i] + self.dn[i].conj() * other.dn[i];
            }
            acc
        });
        Ok(sum * self.spec.cell_area())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).expect("same spec").re
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `self += c * other`.
    pub fn scaled_add(&mut self, c: Complex64, other: &Self) -> Result<(), GridError> {
        if self.spec != other.spec {
            return Err(GridError::SpecMismatch);
        }
        let n = self.spec.n;
        crate::exec::for_each_row(&mut self.up, n, |iy, row| {
            for (ix, v) in row.iter_mut().enumerate() {
                *v += c * other.up[iy * n + ix];
            }
        });
        crate::exec::for_each_row(&mut self.dn, n, |iy, row| {
            for (ix, v) in row.iter_mut().enumerate() {
                *v += c * other.dn[iy * n + ix];
            }
        });
        Ok(())
    }

    pub fn scale(&mut self, c: Complex64) {
        let n = self.spec.n;
        for buf in [&mut self.up, &mut self.dn] {
            crate::exec::for_each_row(buf, n, |_iy, row| {
                for v in row.iter_mut() {
                    *v *= c;
                }
            });
        }
    }

    /// `self - other`, keeping this field's timestamp.
    pub fn difference(&self, other: &Self) -> Result<Self, GridError> {
        let mut out = self.clone();
        out.scaled_add(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    /// Largest amplitude on the outermost grid ring; a decay diagnostic for
    /// the spectral-accuracy precondition.
    pub fn boundary_max(&self) -> f64 {
        let n = self.spec.n;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for idx in [i, (n - 1) * n + i, i * n, i * n + n - 1] {
                m = m.max(self.up[idx].norm()).max(self.dn[idx].norm());
            }
        }
        m
    }

    /// Writes the documented binary layout: `u64 N`, `f64 L`, `f64 t`, then
    /// row-major `(Re, Im)` little-endian pairs for the up component followed
    /// by the down component.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<(), GridError> {
        w.write_all(&(self.spec.n as u64).to_le_bytes())?;
        w.write_all(&self.spec.length.to_le_bytes())?;
        w.write_all(&self.t.to_le_bytes())?;
        for buf in [&self.up, &self.dn] {
            for v in buf {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Self, GridError> {
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let n = u64::from_le_bytes(u64buf) as usize;
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut f64buf)?;
        let length = f64::from_le_bytes(f64buf);
        r.read_exact(&mut f64buf)?;
        let t = f64::from_le_bytes(f64buf);
        let spec = GridSpec::new(n, length)
            .map_err(|e| GridError::Snapshot(format!("bad header: {e}")))?;
        let mut read_component = |label: &str| -> Result<Vec<Complex64>, GridError> {
            let mut buf = vec![Complex64::default(); spec.points()];
            for v in buf.iter_mut() {
                let mut re = [0u8; 8];
                let mut im = [0u8; 8];
                r.read_exact(&mut re).map_err(|_| {
                    GridError::Snapshot(format!("truncated {label} component"))
                })?;
                r.read_exact(&mut im).map_err(|_| {
                    GridError::Snapshot(format!("truncated {label} component"))
                })?;
                *v = Complex64::new(f64::from_le_bytes(re), f64::from_le_bytes(im));
            }
            Ok(buf)
        };
        let up = read_component("up")?;
        let dn = read_component("down")?;
        Ok(Self { spec, t, up, dn })
    }

    /// Writes `x,y,Re_up,Im_up,Re_dn,Im_dn` rows for plotting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), GridError> {
        writeln!(w, "x,y,Re_up,Im_up,Re_dn,Im_dn")?;
        let n = self.spec.n;
        for iy in 0..n {
            for ix in 0..n {
                let z = self.spec.z_at(ix, iy);
                let u = self.up[iy * n + ix];
                let d = self.dn[iy * n + ix];
                writeln!(w, "{},{},{},{},{},{}", z.re, z.im, u.re, u.im, d.re, d.im)?;
            }
        }
        Ok(())
    }
}

/// Spectral `d/dz` of one grid component.
pub fn d_dz(spec: &GridSpec, comp: &[Complex64]) -> Vec<Complex64> {
    spectral_multiply(spec, comp, |kx, ky| Complex64::new(ky, kx) * 0.5)
}

/// Spectral `d/dz*` of one grid component.
pub fn d_dzbar(spec: &GridSpec, comp: &[Complex64]) -> Vec<Complex64> {
    spectral_multiply(spec, comp, |kx, ky| Complex64::new(-ky, kx) * 0.5)
}

/// Inverse-transforms `mult(kx, ky)` times the forward transform of `comp`.
pub(crate) fn spectral_multiply(
    spec: &GridSpec,
    comp: &[Complex64],
    mult: impl Fn(f64, f64) -> Complex64 + Sync,
) -> Vec<Complex64> {
    assert_eq!(comp.len(), spec.points(), "component length mismatch");
    let mut data = comp.to_vec();
    fft::apply_multiplier(&mut data, spec.n, spec.length, mult);
    data
}

/// Largest value of `kx^2 + ky^2` representable on the grid.
pub(crate) fn max_laplacian_symbol(spec: &GridSpec) -> f64 {
    let kmax = std::f64::consts::PI * spec.n as f64 / spec.length;
    2.0 * kmax * kmax
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec() -> GridSpec {
        GridSpec::new(64, 20.0).unwrap()
    }

    fn gaussian(z: Complex64) -> Complex64 {
        (-z.norm_sqr() / 4.0).exp().into()
    }

    /// max |a_i - b_i| / max |b_i|
    fn rel_linf(a: &[Complex64], b: &[Complex64]) -> f64 {
        let err = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let scale = b.iter().map(|x| x.norm()).fold(0.0, f64::max);
        err / scale
    }

    /// Derivative-identity error on the unit-amplitude fields of these tests:
    /// pointwise against the exact image, scaled by the input amplitude (1).
    fn pointwise_err(num: &[Complex64], exact: &[Complex64]) -> f64 {
        num.iter()
            .zip(exact)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(GridSpec::new(48, 10.0), Err(GridError::NotPowerOfTwo(48))));
        assert!(matches!(GridSpec::new(8, 10.0), Err(GridError::TooSmall(8))));
        assert!(matches!(GridSpec::new(32, 0.0), Err(GridError::BadLength(_))));
    }

    #[test]
    fn gaussian_dz_identity() {
        let s = spec();
        let f = SpinorField::from_fn(s, 0.0, |z| (gaussian(z), Complex64::default()));
        let num = d_dz(&s, f.up());
        let exact: Vec<Complex64> = SpinorField::from_fn(s, 0.0, |z| {
            (-z.conj() / 4.0 * gaussian(z), Complex64::default())
        })
        .into_components()
        .0;
        assert!(pointwise_err(&num, &exact) <= 1e-10);

        // On a box large enough that the boundary tail is below roundoff the
        // identity holds at full spectral accuracy.
        let s = GridSpec::new(64, 24.0).unwrap();
        let f = SpinorField::from_fn(s, 0.0, |z| (gaussian(z), Complex64::default()));
        let num = d_dz(&s, f.up());
        let exact: Vec<Complex64> = SpinorField::from_fn(s, 0.0, |z| {
            (-z.conj() / 4.0 * gaussian(z), Complex64::default())
        })
        .into_components()
        .0;
        assert!(rel_linf(&num, &exact) <= 1e-12);
    }

    #[test]
    fn polynomial_gaussian_dz_identity() {
        // d/dz (z* e^{-|z|^2/4}) = -(z*^2/4) e^{-|z|^2/4}. The polynomial
        // factor raises the boundary tail, so the identity needs the slightly
        // larger box before it drops below 1e-10.
        let s = GridSpec::new(64, 24.0).unwrap();
        let f = SpinorField::from_fn(s, 0.0, |z| (z.conj() * gaussian(z), Complex64::default()));
        let num = d_dz(&s, f.up());
        let exact: Vec<Complex64> = SpinorField::from_fn(s, 0.0, |z| {
            (-z.conj() * z.conj() / 4.0 * gaussian(z), Complex64::default())
        })
        .into_components()
        .0;
        assert!(pointwise_err(&num, &exact) <= 1e-10);
        assert!(rel_linf(&num, &exact) <= 1e-10);
    }

    #[test]
    fn dzbar_on_gaussian() {
        let s = spec();
        let f = SpinorField::from_fn(s, 0.0, |z| (gaussian(z), Complex64::default()));
        let num = d_dzbar(&s, f.up());
        let exact: Vec<Complex64> = SpinorField::from_fn(s, 0.0, |z| {
            (-z / 4.0 * gaussian(z), Complex64::default())
        })
        .into_components()
        .0;
        assert!(pointwise_err(&num, &exact) <= 1e-10);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let s = spec();
        let comp = vec![Complex64::new(0.7, -0.2); s.points()];
        for deriv in [d_dz(&s, &comp), d_dzbar(&s, &comp)] {
            let max = deriv.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(max <= 1e-13);
        }
    }

    #[test]
    fn derivatives_commute() {
        let s = spec();
        let f = SpinorField::from_fn(s, 0.0, |z| {
            ((z + z.conj() * z.conj() * 0.3) * gaussian(z), Complex64::default())
        });
        let ab = d_dz(&s, &d_dzbar(&s, f.up()));
        let ba = d_dzbar(&s, &d_dz(&s, f.up()));
        assert!(rel_linf(&ab, &ba) <= 1e-10);
    }

    #[test]
    fn ground_state_norm_and_orthogonality() {
        let s = spec();
        let c0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let psi00 = SpinorField::from_fn(s, 0.0, |z| (c0 * gaussian(z), Complex64::default()));
        assert_relative_eq!(psi00.norm(), 1.0, epsilon = 1e-10);

        // m = -1 partner: angular integral of e^{i theta} makes them orthogonal.
        let c1 = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        let psi0m1 =
            PolyState { k: 1, c: c1 }.field(s);
        assert!(psi00.inner(&psi0m1).unwrap().norm() <= 1e-10);
        assert_relative_eq!(psi0m1.norm(), 1.0, epsilon = 1e-10);
    }

    struct PolyState {
        k: u32,
        c: f64,
    }

    impl PolyState {
        fn field(&self, s: GridSpec) -> SpinorField {
            let k = self.k;
            let c = self.c;
            SpinorField::from_fn(s, 0.0, move |z| {
                (c * z.conj().powu(k) * gaussian(z), Complex64::default())
            })
        }
    }

    #[test]
    fn inner_conjugate_symmetry() {
        let s = spec();
        let a = SpinorField::from_fn(s, 0.0, |z| {
            (
                (z * 0.3 + 0.1) * gaussian(z),
                Complex64::new(0.0, 0.4) * gaussian(z),
            )
        });
        let b = SpinorField::from_fn(s, 0.0, |z| {
            (z.conj() * gaussian(z), (z - 0.5) * gaussian(z))
        });
        let ab = a.inner(&b).unwrap();
        let ba = b.inner(&a).unwrap();
        assert!((ab - ba.conj()).norm() <= 1e-14 * (1.0 + ab.norm()));
    }

    #[test]
    fn parseval_norm() {
        let s = spec();
        let f = SpinorField::from_fn(s, 0.0, |z| {
            ((z - 0.3) * gaussian(z), z.conj() * gaussian(z) * 0.5)
        });
        let direct = f.norm_sqr();
        let mut spectral = 0.0;
        for comp in [f.up(), f.dn()] {
            let mut data = comp.to_vec();
            super::fft::forward(&mut data, s.n());
            let sum: f64 = data.iter().map(|v| v.norm_sqr()).sum();
            spectral += sum * s.cell_area() / (s.n() * s.n()) as f64;
        }
        assert_relative_eq!(direct, spectral, max_relative = 1e-12);
    }

    #[test]
    fn spec_mismatch_rejected() {
        let a = SpinorField::zeros(GridSpec::new(32, 10.0).unwrap(), 0.0);
        let b = SpinorField::zeros(GridSpec::new(64, 10.0).unwrap(), 0.0);
        assert!(matches!(a.inner(&b), Err(GridError::SpecMismatch)));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_sequential_bitwise() {
        use crate::exec::{with_mode, ExecMode};
        let s = spec();
        let f = SpinorField::from_fn(s, 0.0, |z| {
            ((z * z.conj() * 0.1 + z) * gaussian(z), z * gaussian(z))
        });
        let par_d = d_dz(&s, f.up());
        let par_inner = f.inner(&f).unwrap();
        let (seq_d, seq_inner) = with_mode(ExecMode::Sequential, || {
            (d_dz(&s, f.up()), f.inner(&f).unwrap())
        });
        assert_eq!(par_inner.re.to_bits(), seq_inner.re.to_bits());
        assert_eq!(par_inner.im.to_bits(), seq_inner.im.to_bits());
        for (a, b) in par_d.iter().zip(&seq_d) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn snapshot_roundtrip(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let s = GridSpec::new(16, 5.0).unwrap();
            let up: Vec<Complex64> = (0..s.points())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let dn: Vec<Complex64> = (0..s.points())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let field = SpinorField::from_components(s, 0.125, up, dn).unwrap();
            let mut buf = Vec::new();
            field.write_snapshot(&mut buf).unwrap();
            let back = SpinorField::read_snapshot(buf.as_slice()).unwrap();
            prop_assert_eq!(back.t(), field.t());
            prop_assert_eq!(back.spec(), field.spec());
            prop_assert_eq!(back.up(), field.up());
            prop_assert_eq!(back.dn(), field.dn());
        }
    }

    #[test]
    fn snapshot_rejects_truncation() {
        let s = GridSpec::new(16, 5.0).unwrap();
        let field = SpinorField::zeros(s, 0.0);
        let mut buf = Vec::new();
        field.write_snapshot(&mut buf).unwrap();
        buf.truncate(buf.len() - 9);
        assert!(SpinorField::read_snapshot(buf.as_slice()).is_err());
    }
}
