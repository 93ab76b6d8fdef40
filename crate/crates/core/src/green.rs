//! Far-field scattering geometry.
//!
//! Retarded dyadic Green function in the far-field limit, scattered
//! single-mode amplitudes with their retarded phases, and the Gaussian
//! momentum-conservation acceptance that stands in for the idealized
//! direction Kronecker delta.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{project_transverse, ComplexVec3, PlaneWaveMode, Vec3};
use crate::{fl, t64, Scalar};

/// Observation geometry of one detection arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorDirection<T> {
    r_hat: Vec3<T>,
    r: T,
}

impl<T: Scalar> DetectorDirection<T> {
    /// A detector at distance `r` (µm) along `r_hat`, observing a source of
    /// linear size `source_size` (µm). The far-field reduction requires
    /// r ≥ 100 × source size.
    pub fn new(r_hat: Vec3<T>, r: T, source_size: T) -> Result<Self> {
        r_hat.check_unit()?;
        let min = fl::<T>(100.0) * source_size;
        if !(r > T::zero()) || r < min {
            return Err(Error::FarFieldViolation { r: t64(r), min: t64(min) });
        }
        Ok(DetectorDirection { r_hat, r })
    }

    pub fn r_hat(&self) -> Vec3<T> {
        self.r_hat
    }

    pub fn r(&self) -> T {
        self.r
    }

    /// Angle between the observation direction and a reference propagation
    /// direction (radians in [0, π]).
    pub fn theta_to(&self, k_hat: &Vec3<T>) -> Result<T> {
        k_hat.check_unit()?;
        let c = self.r_hat.dot(k_hat).min(T::one()).max(-T::one());
        Ok(c.acos())
    }
}

/// Far-field dyadic Green function applied to a source direction:
/// the transverse projection (I − r̂r̂)·source scaled by 1/(4πr).
pub fn green_apply<T: Scalar>(
    source: &ComplexVec3<T>,
    det: &DetectorDirection<T>,
) -> Result<ComplexVec3<T>> {
    let projected = project_transverse(source, &det.r_hat())?;
    let scale = T::one() / (fl::<T>(4.0) * T::PI() * det.r());
    Ok(projected.scale(Complex::new(scale, T::zero())))
}

/// One scattered far-field mode: transverse vector amplitude with its
/// (possibly complex) frequency and retarded time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteredAmplitude<T> {
    pub value: ComplexVec3<T>,
    pub omega: Complex<T>,
    pub retarded_time: T,
}

/// Scattered amplitude of a single incident mode observed at `det`:
/// A(θ)·(Ω²/r)·e^{−iΩ t_r}·ê⊥, with t_r = t − r/u, θ the angle between the
/// observation direction and the mode wavevector, and ê⊥ the normalized
/// transverse projection of the mode polarization (A(θ) is its norm, so the
/// two factors are carried as one unnormalized projection).
///
/// Complex frequencies with negative imaginary part are accepted; their decay
/// enters only through the e^{−iΩ t_r} factor.
pub fn scattered_mode_amplitude<T: Scalar>(
    mode: &PlaneWaveMode<T>,
    omega: Complex<T>,
    det: &DetectorDirection<T>,
    t: T,
    u: T,
) -> Result<ScatteredAmplitude<T>> {
    if omega.im > T::zero() {
        return Err(Error::GrowingMode { im: t64(omega.im) });
    }
    let retarded_time = t - det.r() / u;
    let e = mode.polarization_vector()?;
    let projected = project_transverse(&e, &det.r_hat())?;
    let minus_i = Complex::new(T::zero(), -T::one());
    let phase = (minus_i * omega.scale(retarded_time)).exp();
    let factor = omega * omega * phase.scale(T::one() / det.r());
    Ok(ScatteredAmplitude { value: projected * factor, omega, retarded_time })
}

/// Gaussian momentum-conservation acceptance
/// exp(−|r̂₁ + r̂₂ − k̂₁ − k̂₂|²/(2σ²)); 1 exactly when the directions
/// balance, and the indicator function of exact conservation as σ → 0.
pub fn momentum_weight<T: Scalar>(
    k1_hat: &Vec3<T>,
    k2_hat: &Vec3<T>,
    r1_hat: &Vec3<T>,
    r2_hat: &Vec3<T>,
    sigma_acc: T,
) -> Result<T> {
    for v in [k1_hat, k2_hat, r1_hat, r2_hat] {
        v.check_unit()?;
    }
    if !(sigma_acc > T::zero()) {
        return Err(Error::Validation(format!(
            "sigma_acc must be positive, got {}",
            t64(sigma_acc)
        )));
    }
    let mismatch = (*r1_hat + *r2_hat - *k1_hat - *k2_hat).norm_sq();
    Ok((-mismatch / (fl::<T>(2.0) * sigma_acc * sigma_acc)).exp())
}
