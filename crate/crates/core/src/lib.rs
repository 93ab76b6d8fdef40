//! Simulation of correlated Stokes/anti-Stokes (SaS) Raman photon pairs in the
//! photon-wave-function picture.
//!
//! The crate is organised along the physics of the problem:
//!
//! * [`field`] — complex vector-field primitives: helicity bases,
//!   Riemann-Silberstein assembly of plane-wave superpositions, analytic-signal
//!   and free-space evolution validators, transverse projection and the dipole
//!   pattern factor.
//! * [`bath`] — the damped molecular oscillator: reservoir discretisation,
//!   Weisskopf-Wigner amplitude, Langevin kernel and an exact single-excitation
//!   Fock-space oracle.
//! * [`green`] — far-field scattering geometry: retarded dyadic Green function,
//!   scattered single-mode amplitudes and momentum-conservation weighting.
//! * [`pair`] — assembly of the two-photon SaS wave function and its constants,
//!   with the Lorentzian exchange integral and its quadrature oracle.
//! * [`observables`] — experiment-facing scans: delay decay, polarization
//!   analysis, angular coincidence maps, pair spectrum and event sampling.
//! * [`scenario`] — scenario files, deterministic scan orchestration and the
//!   bundled self-check suite (concrete `f64`).
//!
//! All core math is generic over the floating-point scalar through [`Scalar`];
//! concrete `f64` aliases live at the crate root.

pub mod bath;
pub mod error;
pub mod field;
pub mod green;
pub mod linalg;
pub mod observables;
pub mod pair;
pub mod quad;
pub mod scenario;

pub use error::{Error, Result};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the core math is generic over.
///
/// Implemented by `f32` and `f64`; everything numeric in [`field`], [`bath`],
/// [`green`], [`pair`] and [`observables`] is written against this trait.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Signed
    + Sum
    + rustfft::FftNum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Signed
        + Sum
        + rustfft::FftNum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for lifting an `f64` literal into the generic scalar.
#[inline]
pub(crate) fn fl<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal not representable in scalar type")
}

/// Lossy view of a generic scalar as `f64`, for error payloads and output
/// formatting.
#[inline]
pub(crate) fn t64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Strict comparison tolerance: 1e-12 for f64, widened to 100 eps for
/// narrower scalars.
#[inline]
pub(crate) fn tol_strict<T: Scalar>() -> T {
    Float::max(fl(1e-12), T::epsilon() * fl(100.0))
}

/// ħ/k_B in ps·K; converts a frequency in rad/ps and a temperature in K
/// into the dimensionless Bose exponent ħω/k_BT.
pub const HBAR_OVER_KB_PS_K: f64 = 1.054_571_817e-34 / 1.380_649e-23 * 1e12;

/// Vacuum speed of light in µm/ps.
pub const SPEED_OF_LIGHT_UM_PS: f64 = 299.792_458;

pub type C64 = Complex<f64>;

// Concrete f64 aliases for the generic core types.
pub type Vec3F64 = field::Vec3<f64>;
pub type ComplexVec3F64 = field::ComplexVec3<f64>;
pub type PlaneWaveModeF64 = field::PlaneWaveMode<f64>;
pub type FieldGridF64 = field::FieldGrid<f64>;
pub type MediumSpecF64 = bath::MediumSpec<f64>;
pub type ReservoirGridF64 = bath::ReservoirGrid<f64>;
pub type FockOracleF64 = bath::FockOracle<f64>;
pub type DetectorDirectionF64 = green::DetectorDirection<f64>;
pub type ScatteredAmplitudeF64 = green::ScatteredAmplitude<f64>;
pub type LaserPairF64 = pair::LaserPair<f64>;
pub type PairConstantsF64 = pair::PairConstants<f64>;
pub type PairAmplitudeF64 = pair::PairAmplitude<f64>;
