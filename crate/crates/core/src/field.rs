//! Complex vector-field primitives.
//!
//! Helicity bases, Riemann-Silberstein assembly of plane-wave superpositions,
//! analytic-signal and free-space evolution validators, transverse projection
//! and the dipole pattern factor. Everything here is a pure function of its
//! inputs; values are immutable after construction.

use crate::error::{Error, Result};
use crate::{fl, t64, tol_strict, Scalar};
use num_complex::Complex;
use rustfft::FftPlanner;
use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};

/// Real 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        Vec3::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit_x() -> Self {
        Vec3::new(T::one(), T::zero(), T::zero())
    }

    pub fn unit_y() -> Self {
        Vec3::new(T::zero(), T::one(), T::zero())
    }

    pub fn unit_z() -> Self {
        Vec3::new(T::zero(), T::zero(), T::one())
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> Self {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    /// Unit vector along `self`; errors on (near-)zero length.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n < tol_strict::<T>() {
            return Err(Error::InvalidDirection { norm: t64(n) });
        }
        Ok(self.scale(T::one() / n))
    }

    /// Checks that the vector is unit length within the strict tolerance.
    pub fn check_unit(&self) -> Result<()> {
        let n = self.norm();
        if (n - T::one()).abs() > tol_strict::<T>() {
            return Err(Error::InvalidDirection { norm: t64(n) });
        }
        Ok(())
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Vec3<T>;
    fn add(self, rhs: Self) -> Self {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Vec3<T>;
    fn sub(self, rhs: Self) -> Self {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Vec3<T>;
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Complex 3-component field amplitude; carrier for the photon wave function,
/// polarization vectors and their transverse projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexVec3<T> {
    pub x: Complex<T>,
    pub y: Complex<T>,
    pub z: Complex<T>,
}

impl<T: Scalar> ComplexVec3<T> {
    pub fn new(x: Complex<T>, y: Complex<T>, z: Complex<T>) -> Self {
        ComplexVec3 { x, y, z }
    }

    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        ComplexVec3::new(z, z, z)
    }

    pub fn from_real(v: Vec3<T>) -> Self {
        ComplexVec3::new(
            Complex::new(v.x, T::zero()),
            Complex::new(v.y, T::zero()),
            Complex::new(v.z, T::zero()),
        )
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        ComplexVec3::new(self.x * s, self.y * s, self.z * s)
    }

    /// Bilinear dot product with a real vector (no conjugation).
    pub fn dot_real(&self, v: &Vec3<T>) -> Complex<T> {
        self.x * v.x + self.y * v.y + self.z * v.z
    }

    /// Hermitian inner product; `self` is conjugated.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.x.conj() * other.x + self.y.conj() * other.y + self.z.conj() * other.z
    }

    pub fn norm_sq(&self) -> T {
        self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// k̂ × e for a real direction and a complex field vector.
    pub fn cross_from_real(k: &Vec3<T>, e: &Self) -> Self {
        ComplexVec3::new(
            e.z * k.y - e.y * k.z,
            e.x * k.z - e.z * k.x,
            e.y * k.x - e.x * k.y,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.x.re.is_finite()
            && self.x.im.is_finite()
            && self.y.re.is_finite()
            && self.y.im.is_finite()
            && self.z.re.is_finite()
            && self.z.im.is_finite()
    }
}

impl<T: Scalar> Add for ComplexVec3<T> {
    type Output = ComplexVec3<T>;
    fn add(self, rhs: Self) -> Self {
        ComplexVec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<T: Scalar> Sub for ComplexVec3<T> {
    type Output = ComplexVec3<T>;
    fn sub(self, rhs: Self) -> Self {
        ComplexVec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Scalar> Mul<Complex<T>> for ComplexVec3<T> {
    type Output = ComplexVec3<T>;
    fn mul(self, rhs: Complex<T>) -> Self {
        self.scale(rhs)
    }
}

/// Photon helicity label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Helicity {
    Plus,
    Minus,
}

impl Helicity {
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Helicity::Plus => T::one(),
            Helicity::Minus => -T::one(),
        }
    }
}

/// Polarization state of a plane-wave mode: a helicity eigenstate or a Jones
/// pair (alpha, beta) in the mode's deterministic linear basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Polarization<T> {
    Helicity(Helicity),
    Jones { alpha: Complex<T>, beta: Complex<T> },
}

impl<T: Scalar> Polarization<T> {
    pub fn validate(&self) -> Result<()> {
        if let Polarization::Jones { alpha, beta } = self {
            let n = alpha.norm_sqr() + beta.norm_sqr();
            if (n - T::one()).abs() > tol_strict::<T>() {
                return Err(Error::UnnormalizedPolarization { norm_sq: t64(n) });
            }
        }
        Ok(())
    }

    /// Transverse unit polarization vector for propagation direction `k_hat`.
    pub fn unit_vector(&self, k_hat: &Vec3<T>) -> Result<ComplexVec3<T>> {
        match self {
            Polarization::Helicity(h) => {
                let (e_plus, e_minus) = helicity_basis(k_hat)?;
                Ok(match h {
                    Helicity::Plus => e_plus,
                    Helicity::Minus => e_minus,
                })
            }
            Polarization::Jones { alpha, beta } => {
                self.validate()?;
                let (e1, e2) = linear_basis(k_hat)?;
                Ok(ComplexVec3::from_real(e1).scale(*alpha) + ComplexVec3::from_real(e2).scale(*beta))
            }
        }
    }
}

/// Deterministic right-handed transverse linear basis (e1, e2) with
/// e2 = k̂ × e1. e1 is the Gram-Schmidt projection of the coordinate axis
/// with the smallest |k̂| component (ties resolved in x, y, z order).
pub fn linear_basis<T: Scalar>(k_hat: &Vec3<T>) -> Result<(Vec3<T>, Vec3<T>)> {
    k_hat.check_unit()?;
    let comps = [k_hat.x.abs(), k_hat.y.abs(), k_hat.z.abs()];
    let axis_idx = (0..3).min_by(|&a, &b| comps[a].partial_cmp(&comps[b]).unwrap()).unwrap();
    let axis = match axis_idx {
        0 => Vec3::unit_x(),
        1 => Vec3::unit_y(),
        _ => Vec3::unit_z(),
    };
    let e1 = (axis - k_hat.scale(axis.dot(k_hat))).normalize()?;
    let e2 = k_hat.cross(&e1);
    Ok((e1, e2))
}

/// Helicity eigenvectors ê± for propagation direction `k_hat`, satisfying
/// k̂ × ê± = ∓i ê± with ê±·ê±* = 1 and ê±·k̂ = 0.
pub fn helicity_basis<T: Scalar>(k_hat: &Vec3<T>) -> Result<(ComplexVec3<T>, ComplexVec3<T>)> {
    let (e1, e2) = linear_basis(k_hat)?;
    let inv_sqrt2 = T::one() / fl::<T>(2.0).sqrt();
    let i = Complex::new(T::zero(), T::one());
    let c1 = ComplexVec3::from_real(e1);
    let c2 = ComplexVec3::from_real(e2);
    let e_plus = (c1 + c2.scale(i)).scale(Complex::new(inv_sqrt2, T::zero()));
    let e_minus = (c1 - c2.scale(i)).scale(Complex::new(inv_sqrt2, T::zero()));
    Ok((e_plus, e_minus))
}

/// One plane-wave photon mode: wavevector (rad/µm), polarization, complex
/// amplitude and angular frequency (rad/ps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveMode<T> {
    pub k: Vec3<T>,
    pub omega: T,
    pub polarization: Polarization<T>,
    pub amplitude: Complex<T>,
}

impl<T: Scalar> PlaneWaveMode<T> {
    pub fn new(k: Vec3<T>, omega: T, polarization: Polarization<T>, amplitude: Complex<T>) -> Result<Self> {
        polarization.validate()?;
        Ok(PlaneWaveMode { k, omega, polarization, amplitude })
    }

    /// Builds a mode from a propagation direction and frequency, with the
    /// wavevector magnitude fixed by the dispersion relation omega = u|k|.
    pub fn from_direction(
        k_hat: &Vec3<T>,
        omega: T,
        u: T,
        polarization: Polarization<T>,
        amplitude: Complex<T>,
    ) -> Result<Self> {
        k_hat.check_unit()?;
        PlaneWaveMode::new(k_hat.scale(omega / u), omega, polarization, amplitude)
    }

    pub fn k_hat(&self) -> Result<Vec3<T>> {
        self.k.normalize()
    }

    pub fn polarization_vector(&self) -> Result<ComplexVec3<T>> {
        self.polarization.unit_vector(&self.k_hat()?)
    }

    pub fn helicity(&self) -> Option<Helicity> {
        match self.polarization {
            Polarization::Helicity(h) => Some(h),
            Polarization::Jones { .. } => None,
        }
    }

    fn check_dispersion(&self, u: T) -> Result<()> {
        let u_k = u * self.k.norm();
        let scale = Float::max(self.omega.abs(), T::one());
        if (self.omega - u_k).abs() > tol_strict::<T>() * scale {
            return Err(Error::DispersionViolation { omega: t64(self.omega), u_k: t64(u_k) });
        }
        Ok(())
    }
}

use num_traits::Float;

/// Positive-frequency Riemann-Silberstein vector of a plane-wave
/// superposition at position `r` and time `t`.
///
/// Each mode contributes i√2 · amplitude · ê · exp(i(k·r − ωt)): the electric
/// and magnetic halves add coherently once the c𝓑 = k̂ × 𝓔 constraint is
/// folded in, so the result has no negative-frequency content by
/// construction.
pub fn rs_vector<T: Scalar>(
    modes: &[PlaneWaveMode<T>],
    u: T,
    r: &Vec3<T>,
    t: T,
) -> Result<ComplexVec3<T>> {
    for m in modes {
        m.check_dispersion(u)?;
    }
    rs_vector_unchecked(modes, r, t)
}

fn rs_vector_unchecked<T: Scalar>(
    modes: &[PlaneWaveMode<T>],
    r: &Vec3<T>,
    t: T,
) -> Result<ComplexVec3<T>> {
    let mut psi = ComplexVec3::zero();
    let sqrt2 = fl::<T>(2.0).sqrt();
    for m in modes {
        let e = m.polarization_vector()?;
        let phase = m.k.dot(r) - m.omega * t;
        // i * sqrt(2) * e^{i phase}
        let factor = Complex::new(T::zero(), sqrt2) * Complex::from_polar(T::one(), phase);
        psi = psi + e.scale(m.amplitude * factor);
    }
    Ok(psi)
}

/// Fraction of spectral energy in the negative-frequency half of a uniformly
/// sampled complex time series.
///
/// Convention: the physics positive-frequency factor e^{−iωt} (ω > 0) lands
/// in the upper bins of the forward DFT, so bins 1..=n/2 hold the
/// negative-frequency content (the Nyquist bin counts as negative); the DC
/// bin belongs to neither half but is included in the total energy.
pub fn analytic_signal_residual<T: Scalar>(series: &[Complex<T>]) -> Result<T> {
    let n = series.len();
    if n < 64 {
        return Err(Error::Sampling(format!("series too short: {n} < 64 samples")));
    }
    let mut buf: Vec<Complex<T>> = series.to_vec();
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let total: T = buf.iter().map(|c| c.norm_sqr()).sum();
    if total == T::zero() {
        return Ok(T::zero());
    }
    let negative: T = buf[1..=n / 2].iter().map(|c| c.norm_sqr()).sum();
    Ok(negative / total)
}

/// Uniform space-time lattice of field values, periodic in every axis.
#[derive(Debug, Clone)]
pub struct FieldGrid<T> {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub nt: usize,
    pub lx: T,
    pub ly: T,
    pub lz: T,
    pub t_span: T,
    pub u: T,
    helicity: Option<Helicity>,
    values: Vec<ComplexVec3<T>>,
}

/// Lattice dimensions for [`FieldGrid::from_modes`].
#[derive(Debug, Clone, Copy)]
pub struct GridDims<T> {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub nt: usize,
    pub lx: T,
    pub ly: T,
    pub lz: T,
    pub t_span: T,
}

impl<T: Scalar> FieldGrid<T> {
    /// Samples a plane-wave superposition on a periodic lattice.
    ///
    /// Requires at least 4 samples per wavelength along each axis and per
    /// oscillation period in time, for every mode.
    pub fn from_modes(modes: &[PlaneWaveMode<T>], u: T, dims: GridDims<T>) -> Result<Self> {
        for &n in &[dims.nx, dims.ny, dims.nz, dims.nt] {
            if n < 2 {
                return Err(Error::Sampling(format!("grid axis too small: {n} < 2")));
            }
        }
        let two_pi = fl::<T>(2.0) * T::PI();
        let min_samples = fl::<T>(4.0) - fl::<T>(1e-9);
        for m in modes {
            m.check_dispersion(u)?;
            let checks = [
                (m.k.x.abs(), dims.lx, dims.nx, "x"),
                (m.k.y.abs(), dims.ly, dims.ny, "y"),
                (m.k.z.abs(), dims.lz, dims.nz, "z"),
                (m.omega.abs(), dims.t_span, dims.nt, "t"),
            ];
            for (freq, len, n, name) in checks {
                if freq > T::zero() {
                    let samples_per_period = (two_pi / freq) / (len / fl(n as f64));
                    if samples_per_period < min_samples {
                        return Err(Error::Sampling(format!(
                            "fewer than 4 samples per period along {name}: {}",
                            t64(samples_per_period)
                        )));
                    }
                }
            }
        }
        let helicity = match modes {
            [] => None,
            [first, rest @ ..] => first
                .helicity()
                .filter(|h| rest.iter().all(|m| m.helicity() == Some(*h))),
        };
        let total = dims.nx * dims.ny * dims.nz * dims.nt;
        let mut values = Vec::with_capacity(total);
        for it in 0..dims.nt {
            let t = dims.t_span * fl(it as f64) / fl(dims.nt as f64);
            for iz in 0..dims.nz {
                for iy in 0..dims.ny {
                    for ix in 0..dims.nx {
                        let r = Vec3::new(
                            dims.lx * fl(ix as f64) / fl(dims.nx as f64),
                            dims.ly * fl(iy as f64) / fl(dims.ny as f64),
                            dims.lz * fl(iz as f64) / fl(dims.nz as f64),
                        );
                        values.push(rs_vector_unchecked(modes, &r, t)?);
                    }
                }
            }
        }
        Ok(FieldGrid {
            nx: dims.nx,
            ny: dims.ny,
            nz: dims.nz,
            nt: dims.nt,
            lx: dims.lx,
            ly: dims.ly,
            lz: dims.lz,
            t_span: dims.t_span,
            u,
            helicity,
            values,
        })
    }

    pub fn helicity(&self) -> Option<Helicity> {
        self.helicity
    }

    pub fn values(&self) -> &[ComplexVec3<T>] {
        &self.values
    }

    fn sizes(&self) -> [usize; 4] {
        [self.nx, self.ny, self.nz, self.nt]
    }

    fn lengths(&self) -> [T; 4] {
        [self.lx, self.ly, self.lz, self.t_span]
    }

    /// Debug export: one row per node with position, time and the six real
    /// field components.
    pub fn export_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "x,y,z,t,re_x,im_x,re_y,im_y,re_z,im_z")?;
        let mut idx = 0;
        for it in 0..self.nt {
            let t = t64(self.t_span) * it as f64 / self.nt as f64;
            for iz in 0..self.nz {
                let z = t64(self.lz) * iz as f64 / self.nz as f64;
                for iy in 0..self.ny {
                    let y = t64(self.ly) * iy as f64 / self.ny as f64;
                    for ix in 0..self.nx {
                        let x = t64(self.lx) * ix as f64 / self.nx as f64;
                        let v = &self.values[idx];
                        writeln!(
                            w,
                            "{x:.9e},{y:.9e},{z:.9e},{t:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                            t64(v.x.re),
                            t64(v.x.im),
                            t64(v.y.re),
                            t64(v.y.im),
                            t64(v.z.re),
                            t64(v.z.im)
                        )?;
                        idx += 1;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Differentiation scheme used by [`free_space_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivScheme {
    /// FFT differentiation; exact for commensurate plane waves.
    Spectral,
    /// Second-order central differences with periodic wrap-around.
    CentralDifference,
}

/// Residual of the free-space photon-wave-function evolution on a
/// helicity-pure grid: max-norm of i ∂Ψ/∂t − u σ ∇×Ψ plus max-norm of ∇·Ψ.
pub fn free_space_residual<T: Scalar>(
    grid: &FieldGrid<T>,
    helicity: Helicity,
    scheme: DerivScheme,
) -> Result<T> {
    if grid.helicity() != Some(helicity) {
        return Err(Error::MixedHelicity);
    }
    let sizes = grid.sizes();
    let lengths = grid.lengths();
    let dx = derive_axis(&grid.values, sizes, 0, lengths[0], scheme);
    let dy = derive_axis(&grid.values, sizes, 1, lengths[1], scheme);
    let dz = derive_axis(&grid.values, sizes, 2, lengths[2], scheme);
    let dt = derive_axis(&grid.values, sizes, 3, lengths[3], scheme);

    let i = Complex::new(T::zero(), T::one());
    let sigma_u = Complex::new(helicity.sign::<T>() * grid.u, T::zero());
    let mut evo_max = T::zero();
    let mut div_max = T::zero();
    for n in 0..grid.values.len() {
        let curl = ComplexVec3::new(
            dy[n].z - dz[n].y,
            dz[n].x - dx[n].z,
            dx[n].y - dy[n].x,
        );
        let residual = dt[n].scale(i) - curl.scale(sigma_u);
        evo_max = Float::max(evo_max, residual.norm());
        let div = dx[n].x + dy[n].y + dz[n].z;
        div_max = Float::max(div_max, div.norm());
    }
    Ok(evo_max + div_max)
}

fn derive_axis<T: Scalar>(
    values: &[ComplexVec3<T>],
    sizes: [usize; 4],
    axis: usize,
    domain_len: T,
    scheme: DerivScheme,
) -> Vec<ComplexVec3<T>> {
    let n = sizes[axis];
    let stride: usize = sizes[..axis].iter().product();
    let total = values.len();
    let mut out = vec![ComplexVec3::zero(); total];

    let mut planner = FftPlanner::<T>::new();
    let (fwd, inv) = (planner.plan_fft_forward(n), planner.plan_fft_inverse(n));
    let two_pi = fl::<T>(2.0) * T::PI();
    let inv_n = T::one() / fl::<T>(n as f64);
    let h = domain_len / fl::<T>(n as f64);

    let mut line = vec![Complex::new(T::zero(), T::zero()); n];
    for base in 0..total {
        // `base` enumerates line starts: nodes whose coordinate along `axis` is 0.
        if (base / stride) % n != 0 {
            continue;
        }
        for comp in 0..3 {
            for (j, slot) in line.iter_mut().enumerate() {
                let v = &values[base + j * stride];
                *slot = match comp {
                    0 => v.x,
                    1 => v.y,
                    _ => v.z,
                };
            }
            match scheme {
                DerivScheme::Spectral => {
                    fwd.process(&mut line);
                    for (m, slot) in line.iter_mut().enumerate() {
                        let signed = if m < n / 2 {
                            m as isize
                        } else if m == n / 2 {
                            0 // Nyquist bin: derivative defined as zero
                        } else {
                            m as isize - n as isize
                        };
                        let k = two_pi * fl::<T>(signed as f64) / domain_len;
                        *slot = *slot * Complex::new(T::zero(), k);
                    }
                    inv.process(&mut line);
                    for slot in line.iter_mut() {
                        *slot = slot.scale(inv_n);
                    }
                }
                DerivScheme::CentralDifference => {
                    let snapshot: Vec<Complex<T>> = line.clone();
                    for j in 0..n {
                        let fwd_v = snapshot[(j + 1) % n];
                        let bwd_v = snapshot[(j + n - 1) % n];
                        line[j] = (fwd_v - bwd_v).scale(T::one() / (fl::<T>(2.0) * h));
                    }
                }
            }
            for (j, slot) in line.iter().enumerate() {
                let v = &mut out[base + j * stride];
                match comp {
                    0 => v.x = *slot,
                    1 => v.y = *slot,
                    _ => v.z = *slot,
                }
            }
        }
    }
    out
}

/// Projection of `e` on the plane normal to `r_hat`: e − (e·r̂)r̂.
/// The output is not normalized.
pub fn project_transverse<T: Scalar>(e: &ComplexVec3<T>, r_hat: &Vec3<T>) -> Result<ComplexVec3<T>> {
    r_hat.check_unit()?;
    let along = e.dot_real(r_hat);
    Ok(*e - ComplexVec3::from_real(*r_hat).scale(along))
}

/// Dipole pattern factor A(θ) = √(|α|² + |β|² cos²θ) for a normalized Jones
/// pair; independent of helicity. A(0) = 1.
pub fn pattern_factor<T: Scalar>(alpha: Complex<T>, beta: Complex<T>, theta: T) -> Result<T> {
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if (n - T::one()).abs() > tol_strict::<T>() {
        return Err(Error::UnnormalizedPolarization { norm_sq: t64(n) });
    }
    let c = theta.cos();
    Ok((alpha.norm_sqr() + beta.norm_sqr() * c * c).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    type V = Vec3<f64>;
    type C = Complex<f64>;

    fn random_unit(rng: &mut ChaCha12Rng) -> V {
        loop {
            let v = V::new(
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            );
            if v.norm() > 0.1 {
                return v.normalize().unwrap();
            }
        }
    }

    fn eigen_residual(k_hat: &V, e: &ComplexVec3<f64>, sign: f64) -> f64 {
        // k̂ × ê± should equal ∓i ê±
        let lhs = ComplexVec3::cross_from_real(k_hat, e);
        let rhs = e.scale(C::new(0.0, -sign));
        (lhs - rhs).norm()
    }

    #[test]
    fn helicity_basis_z_axis() {
        let (ep, em) = helicity_basis(&V::unit_z()).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(ep.x.re, s, epsilon = 1e-15);
        assert_relative_eq!(ep.y.im, s, epsilon = 1e-15);
        assert_relative_eq!(em.x.re, s, epsilon = 1e-15);
        assert_relative_eq!(em.y.im, -s, epsilon = 1e-15);
        assert!(eigen_residual(&V::unit_z(), &ep, 1.0) < 1e-14);
        assert!(eigen_residual(&V::unit_z(), &em, -1.0) < 1e-14);
    }

    #[test]
    fn helicity_basis_x_axis() {
        let (ep, _) = helicity_basis(&V::unit_x()).unwrap();
        // (ŷ + i ẑ)/√2 up to a global phase
        let s = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(ep.y.re, s, epsilon = 1e-15);
        assert_relative_eq!(ep.z.im, s, epsilon = 1e-15);
        assert!(eigen_residual(&V::unit_x(), &ep, 1.0) < 1e-14);
    }

    #[test]
    fn helicity_basis_random_directions() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let k = random_unit(&mut rng);
            let (ep, em) = helicity_basis(&k).unwrap();
            assert!(eigen_residual(&k, &ep, 1.0) < 1e-12);
            assert!(eigen_residual(&k, &em, -1.0) < 1e-12);
            assert!(ep.dot_real(&k).norm() < 1e-12);
            assert!(em.dot_real(&k).norm() < 1e-12);
            assert_relative_eq!(ep.inner(&ep).re, 1.0, epsilon = 1e-12);
            assert_relative_eq!(em.inner(&em).re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn helicity_basis_rejects_zero_direction() {
        assert!(matches!(
            helicity_basis(&V::zero()),
            Err(Error::InvalidDirection { .. })
        ));
    }

    #[test]
    fn rs_vector_empty_is_zero() {
        let psi = rs_vector::<f64>(&[], 1.0, &V::zero(), 0.0).unwrap();
        assert_eq!(psi.norm(), 0.0);
    }

    #[test]
    fn rs_vector_single_mode_origin() {
        // ẑ-propagating ê₊ mode, amplitude 1 at r=0, t=0 → i √2 ê₊
        let mode = PlaneWaveMode::from_direction(
            &V::unit_z(),
            1.0,
            1.0,
            Polarization::Helicity(Helicity::Plus),
            C::new(1.0, 0.0),
        )
        .unwrap();
        let psi = rs_vector(&[mode], 1.0, &V::zero(), 0.0).unwrap();
        let (ep, _) = helicity_basis(&V::unit_z()).unwrap();
        let expected = ep.scale(C::new(0.0, 2.0_f64.sqrt()));
        assert!((psi - expected).norm() < 1e-14);
    }

    #[test]
    fn rs_vector_is_linear() {
        let m1 = PlaneWaveMode::from_direction(
            &V::unit_z(),
            2.0,
            1.0,
            Polarization::Helicity(Helicity::Plus),
            C::new(0.3, 0.4),
        )
        .unwrap();
        let m2 = PlaneWaveMode::from_direction(
            &(-V::unit_z()),
            3.0,
            1.0,
            Polarization::Helicity(Helicity::Minus),
            C::new(-1.0, 0.2),
        )
        .unwrap();
        let r = V::new(0.3, -0.7, 1.1);
        let t = 0.45;
        let both = rs_vector(&[m1, m2], 1.0, &r, t).unwrap();
        let sum = rs_vector(&[m1], 1.0, &r, t).unwrap() + rs_vector(&[m2], 1.0, &r, t).unwrap();
        assert!((both - sum).norm() < 1e-14);
    }

    #[test]
    fn rs_vector_rejects_dispersion_violation() {
        let mode = PlaneWaveMode::new(
            V::unit_z(),
            2.0, // but |k| = 1 and u = 1
            Polarization::Helicity(Helicity::Plus),
            C::new(1.0, 0.0),
        )
        .unwrap();
        assert!(matches!(
            rs_vector(&[mode], 1.0, &V::zero(), 0.0),
            Err(Error::DispersionViolation { .. })
        ));
    }

    #[test]
    fn analytic_residual_pure_tone() {
        let n = 256;
        let omega = 2.0 * std::f64::consts::PI * 10.0; // 10 cycles in unit window
        let series: Vec<C> = (0..n)
            .map(|i| C::from_polar(1.0, -omega * i as f64 / n as f64))
            .collect();
        assert!(analytic_signal_residual(&series).unwrap() < 1e-12);
    }

    #[test]
    fn analytic_residual_real_cosine() {
        let n = 256;
        let omega = 2.0 * std::f64::consts::PI * 10.0;
        let series: Vec<C> = (0..n)
            .map(|i| C::new((omega * i as f64 / n as f64).cos(), 0.0))
            .collect();
        assert_relative_eq!(analytic_signal_residual(&series).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn analytic_residual_rs_superposition() {
        // 5 random modes with window-commensurate frequencies, 1024 samples.
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let window = 4.0; // ps
        let modes: Vec<PlaneWaveMode<f64>> = (0..5)
            .map(|_| {
                let m: u32 = rng.gen_range(1..=150);
                let omega = 2.0 * std::f64::consts::PI * m as f64 / window;
                PlaneWaveMode::from_direction(
                    &random_unit(&mut rng),
                    omega,
                    1.0,
                    Polarization::Helicity(if rng.gen::<bool>() { Helicity::Plus } else { Helicity::Minus }),
                    C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                )
                .unwrap()
            })
            .collect();
        let r0 = random_unit(&mut rng).scale(0.37);
        let n = 1024;
        let series: Vec<C> = (0..n)
            .map(|i| {
                rs_vector(&modes, 1.0, &r0, window * i as f64 / n as f64)
                    .unwrap()
                    .x
            })
            .collect();
        assert!(analytic_signal_residual(&series).unwrap() < 1e-10);
    }

    #[test]
    fn analytic_residual_short_series_errors() {
        let series = vec![C::new(1.0, 0.0); 32];
        assert!(matches!(
            analytic_signal_residual(&series),
            Err(Error::Sampling(_))
        ));
    }

    fn commensurate_mode(kvec: [f64; 3], h: Helicity, amp: C) -> PlaneWaveMode<f64> {
        let k = V::new(kvec[0], kvec[1], kvec[2]);
        let omega = k.norm(); // u = c = 1
        PlaneWaveMode::new(k, omega, Polarization::Helicity(h), amp).unwrap()
    }

    fn cube_dims(n: usize, nt: usize) -> GridDims<f64> {
        let l = 2.0 * std::f64::consts::PI;
        GridDims { nx: n, ny: n, nz: n, nt, lx: l, ly: l, lz: l, t_span: l }
    }

    #[test]
    fn free_space_spectral_single_wave() {
        let mode = commensurate_mode([1.0, 0.0, 0.0], Helicity::Plus, C::new(1.0, 0.0));
        let grid = FieldGrid::from_modes(&[mode], 1.0, cube_dims(8, 8)).unwrap();
        let res = free_space_residual(&grid, Helicity::Plus, DerivScheme::Spectral).unwrap();
        assert!(res < 1e-10, "spectral residual {res}");
    }

    #[test]
    fn free_space_spectral_three_mode_superposition() {
        // Pythagorean wavevectors keep both space and time commensurate.
        let modes = vec![
            commensurate_mode([1.0, 2.0, 2.0], Helicity::Plus, C::new(0.7, -0.1)),
            commensurate_mode([2.0, 1.0, 2.0], Helicity::Plus, C::new(-0.4, 0.9)),
            commensurate_mode([2.0, 2.0, 1.0], Helicity::Plus, C::new(0.2, 0.3)),
        ];
        let grid = FieldGrid::from_modes(&modes, 1.0, cube_dims(8, 16)).unwrap();
        let res = free_space_residual(&grid, Helicity::Plus, DerivScheme::Spectral).unwrap();
        assert!(res < 1e-10, "spectral residual {res}");
    }

    #[test]
    fn free_space_fd_second_order_convergence() {
        let mode = commensurate_mode([1.0, 0.0, 0.0], Helicity::Plus, C::new(1.0, 0.0));
        let l = 2.0 * std::f64::consts::PI;
        // unequal space and time steps so the second-order errors of the two
        // sides of the evolution equation do not cancel
        let coarse = GridDims { nx: 16, ny: 4, nz: 4, nt: 16, lx: l, ly: l, lz: l, t_span: 2.0 * l };
        let fine = GridDims { nx: 32, ny: 4, nz: 4, nt: 32, lx: l, ly: l, lz: l, t_span: 2.0 * l };
        let r_coarse = free_space_residual(
            &FieldGrid::from_modes(&[mode], 1.0, coarse).unwrap(),
            Helicity::Plus,
            DerivScheme::CentralDifference,
        )
        .unwrap();
        let r_fine = free_space_residual(
            &FieldGrid::from_modes(&[mode], 1.0, fine).unwrap(),
            Helicity::Plus,
            DerivScheme::CentralDifference,
        )
        .unwrap();
        let ratio = r_coarse / r_fine;
        assert!((ratio - 4.0).abs() < 0.8, "convergence ratio {ratio}");
    }

    #[test]
    fn free_space_rejects_mixed_helicity() {
        let modes = vec![
            commensurate_mode([1.0, 0.0, 0.0], Helicity::Plus, C::new(1.0, 0.0)),
            commensurate_mode([0.0, 1.0, 0.0], Helicity::Minus, C::new(1.0, 0.0)),
        ];
        let grid = FieldGrid::from_modes(&modes, 1.0, cube_dims(8, 8)).unwrap();
        assert!(matches!(
            free_space_residual(&grid, Helicity::Plus, DerivScheme::Spectral),
            Err(Error::MixedHelicity)
        ));
    }

    #[test]
    fn projection_examples() {
        let x = ComplexVec3::from_real(V::unit_x());
        // e = x̂, r̂ = ẑ → x̂
        let p = project_transverse(&x, &V::unit_z()).unwrap();
        assert!((p - x).norm() < 1e-15);
        // e = x̂, r̂ = x̂ → 0
        let p = project_transverse(&x, &V::unit_x()).unwrap();
        assert!(p.norm() < 1e-15);
        // e = x̂, r̂ = (x̂+ẑ)/√2 → (x̂−ẑ)/2, norm 1/√2
        let diag = (V::unit_x() + V::unit_z()).normalize().unwrap();
        let p = project_transverse(&x, &diag).unwrap();
        assert_relative_eq!(p.x.re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(p.z.re, -0.5, epsilon = 1e-15);
        assert_relative_eq!(p.norm(), 1.0 / 2.0_f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..20 {
            let r = random_unit(&mut rng);
            let e = ComplexVec3::new(
                C::new(rng.gen(), rng.gen()),
                C::new(rng.gen(), rng.gen()),
                C::new(rng.gen(), rng.gen()),
            );
            let once = project_transverse(&e, &r).unwrap();
            let twice = project_transverse(&once, &r).unwrap();
            assert!((once - twice).norm() < 1e-14);
            assert!(once.dot_real(&r).norm() < 1e-12);
        }
    }

    #[test]
    fn pattern_factor_examples() {
        let one = C::new(1.0, 0.0);
        let zero = C::new(0.0, 0.0);
        assert_relative_eq!(pattern_factor(one, zero, 1.234).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            pattern_factor(zero, one, std::f64::consts::FRAC_PI_3).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        let s = C::new(1.0 / 2.0_f64.sqrt(), 0.0);
        assert_relative_eq!(
            pattern_factor(s, s, std::f64::consts::FRAC_PI_2).unwrap(),
            1.0 / 2.0_f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn pattern_factor_helicity_independent() {
        // Jones pairs of the two helicity decompositions of the same state
        // differ only in phases; A agrees.
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..20 {
            let phi: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            let chi: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
            let theta: f64 = rng.gen::<f64>() * std::f64::consts::PI;
            let alpha = C::new(phi.cos(), 0.0);
            let beta = C::from_polar(phi.sin(), chi);
            let a_plus = pattern_factor(alpha, beta, theta).unwrap();
            let a_minus = pattern_factor(alpha.conj(), beta.conj(), theta).unwrap();
            assert!((a_plus - a_minus).abs() < 1e-14);
        }
    }

    #[test]
    fn pattern_factor_rejects_unnormalized() {
        assert!(matches!(
            pattern_factor(C::new(1.0, 0.0), C::new(0.5, 0.0), 0.3),
            Err(Error::UnnormalizedPolarization { .. })
        ));
    }

    #[test]
    fn grid_csv_export_has_header_and_rows() {
        let mode = commensurate_mode([1.0, 0.0, 0.0], Helicity::Plus, C::new(1.0, 0.0));
        let l = 2.0 * std::f64::consts::PI;
        let dims = GridDims { nx: 8, ny: 2, nz: 2, nt: 8, lx: l, ly: l, lz: l, t_span: l };
        let grid = FieldGrid::from_modes(&[mode], 1.0, dims).unwrap();
        let mut buf = Vec::new();
        grid.export_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,y,z,t,re_x,im_x,re_y,im_y,re_z,im_z");
        assert_eq!(lines.count(), 8 * 2 * 2 * 8);
    }
}
