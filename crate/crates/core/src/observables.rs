//! Experiment-facing scans over the two-photon amplitude.
//!
//! Delay-line decay, polarization analysis, Monte Carlo angular coincidence
//! maps with focused-beam averaging, the pair spectrum with its
//! delay-transform cross-check, and reproducible coincidence-event sampling.

use num_complex::Complex;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::bath::MediumSpec;
use crate::error::{Error, Result};
use crate::field::{project_transverse, ComplexVec3, PlaneWaveMode, Vec3};
use crate::green::DetectorDirection;
use crate::pair::{
    tensor_norm, two_photon_amplitude, EvalMode, LaserPair, PairAmplitude, PairConstants,
};
use crate::{fl, t64, Scalar};

/// Deterministic per-scan RNG stream: the seed is hashed together with a
/// scan label and stream index, so parallel scans reproduce regardless of
/// execution order.
pub fn derived_rng(seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest[..32]);
    ChaCha12Rng::from_seed(key)
}

/// Delay-line coincidence scan.
#[derive(Debug, Clone)]
pub struct DelayScan<T> {
    pub delays: Vec<T>,
    pub raw: Vec<T>,
    /// Rates normalized to the scan maximum.
    pub normalized: Vec<T>,
    /// Least-squares slope of log rate versus delay (expected −γ).
    pub slope: T,
}

/// Coincidence rate versus an inserted delay δt on one arm.
///
/// The delay line shifts the arrival time only; the transverse geometry is
/// unchanged, so the rate follows the amplitude's e^{−γδt} delay factor on
/// top of a fixed geometric amplitude. Detection is frequency-filtered
/// (arm 1 carries the anti-Stokes photon), which removes the 2ω̃ assignment
/// beat from the delay dependence.
pub fn delay_scan<T: Scalar>(
    laser: &LaserPair<T>,
    consts: &PairConstants<T>,
    r_hat1: Vec3<T>,
    r_hat2: Vec3<T>,
    r0: T,
    source_size: T,
    t: T,
    sigma_acc: T,
    delays: &[T],
) -> Result<DelayScan<T>> {
    if delays.is_empty() {
        return Err(Error::ScanConfig("empty delay grid".into()));
    }
    let max_gamma_dt = delays
        .iter()
        .map(|&d| consts.gamma * d)
        .fold(T::zero(), Float::max);
    if max_gamma_dt > fl(600.0) {
        return Err(Error::DelayUnderflow { gamma_dt: t64(max_gamma_dt) });
    }
    let d1 = DetectorDirection::new(r_hat1, r0, source_size)?;
    let d2 = DetectorDirection::new(r_hat2, r0, source_size)?;
    let base = two_photon_amplitude(laser, &d1, &d2, t, consts, sigma_acc, EvalMode::Stationary)?;
    let base_rate = tensor_norm(&base.tensor_a_first);
    let base_rate = base_rate * base_rate;
    let raw: Vec<T> = delays.iter().map(|&d| base_rate * (-consts.gamma * d).exp()).collect();
    let max = raw.iter().copied().fold(T::zero(), Float::max);
    if !(max > T::zero()) {
        return Err(Error::DegenerateDistribution);
    }
    let normalized: Vec<T> = raw.iter().map(|&r| r / max).collect();
    let slope = log_slope(delays, &raw)?;
    Ok(DelayScan { delays: delays.to_vec(), raw, normalized, slope })
}

fn log_slope<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() < 2 {
        return Err(Error::ScanConfig("slope fit needs at least 2 points".into()));
    }
    let n = fl::<T>(xs.len() as f64);
    let ly: Vec<T> = ys.iter().map(|&y| y.ln()).collect();
    let sx: T = xs.iter().copied().sum();
    let sy: T = ly.iter().copied().sum();
    let sxx: T = xs.iter().map(|&x| x * x).sum();
    let sxy: T = xs.iter().zip(&ly).map(|(&x, &y)| x * y).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Analyzer Jones vector for one arm: the normalized transverse projection
/// of the pump polarization defines angle 0; the in-plane orthogonal partner
/// r̂ × ref defines angle π/2.
pub fn analyzer_vector<T: Scalar>(
    pump_polarization: &ComplexVec3<T>,
    det: &DetectorDirection<T>,
    angle: T,
) -> Result<ComplexVec3<T>> {
    let r_hat = det.r_hat();
    let projected = project_transverse(pump_polarization, &r_hat)?;
    let norm = projected.norm();
    if norm < crate::tol_strict::<T>() {
        return Err(Error::AnalyzerGeometry { dot: t64(norm) });
    }
    let reference = projected.scale(Complex::new(T::one() / norm, T::zero()));
    let perp = ComplexVec3::cross_from_real(&r_hat, &reference);
    Ok(reference.scale(Complex::new(angle.cos(), T::zero()))
        + perp.scale(Complex::new(angle.sin(), T::zero())))
}

/// Coincidence rate after projecting each amplitude leg on its arm's
/// analyzer: |⟨a₁ ⊗ a₂, T⟩|² on the full symmetrized tensor.
pub fn project_rate<T: Scalar>(
    amp: &PairAmplitude<T>,
    analyzer1: &ComplexVec3<T>,
    analyzer2: &ComplexVec3<T>,
) -> Result<T> {
    for (a, det) in [(analyzer1, &amp.r1), (analyzer2, &amp.r2)] {
        let along = a.dot_real(&det.r_hat()).norm();
        if along > fl::<T>(1e-9) * a.norm() {
            return Err(Error::AnalyzerGeometry { dot: t64(along) });
        }
    }
    let tensor = amp.tensor();
    let a1 = [analyzer1.x.conj(), analyzer1.y.conj(), analyzer1.z.conj()];
    let a2 = [analyzer2.x.conj(), analyzer2.y.conj(), analyzer2.z.conj()];
    let mut val = Complex::new(T::zero(), T::zero());
    for i in 0..3 {
        for j in 0..3 {
            val += a1[i] * tensor[i][j] * a2[j];
        }
    }
    Ok(val.norm_sqr())
}

/// Polarization-analyzer scan.
#[derive(Debug, Clone)]
pub struct PolarizationScan<T> {
    pub angles: Vec<T>,
    /// Both analyzers at the scan angle, normalized to the parallel maximum.
    pub parallel: Vec<T>,
    /// Arm 2 rotated by +π/2, same normalization.
    pub crossed: Vec<T>,
    pub parallel_raw: Vec<T>,
    pub crossed_raw: Vec<T>,
}

/// Scans both analyzers over `angles` (measured per arm from the projected
/// pump polarization) and reports the parallel and crossed configurations.
pub fn polarization_scan<T: Scalar>(
    laser: &LaserPair<T>,
    consts: &PairConstants<T>,
    d1: &DetectorDirection<T>,
    d2: &DetectorDirection<T>,
    t: T,
    sigma_acc: T,
    angles: &[T],
) -> Result<PolarizationScan<T>> {
    if angles.is_empty() {
        return Err(Error::ScanConfig("empty analyzer-angle grid".into()));
    }
    let pump = laser.mode1.polarization_vector()?;
    let amp = two_photon_amplitude(laser, d1, d2, t, consts, sigma_acc, EvalMode::Stationary)?;
    let half_pi = T::PI() / fl(2.0);
    let mut parallel_raw = Vec::with_capacity(angles.len());
    let mut crossed_raw = Vec::with_capacity(angles.len());
    for &chi in angles {
        let a1 = analyzer_vector(&pump, d1, chi)?;
        let a2p = analyzer_vector(&pump, d2, chi)?;
        let a2c = analyzer_vector(&pump, d2, chi + half_pi)?;
        parallel_raw.push(project_rate(&amp, &a1, &a2p)?);
        crossed_raw.push(project_rate(&amp, &a1, &a2c)?);
    }
    let max = parallel_raw.iter().copied().fold(T::zero(), Float::max);
    if !(max > T::zero()) {
        return Err(Error::DegenerateDistribution);
    }
    let parallel = parallel_raw.iter().map(|&r| r / max).collect();
    let crossed = crossed_raw.iter().map(|&r| r / max).collect();
    Ok(PolarizationScan { angles: angles.to_vec(), parallel, crossed, parallel_raw, crossed_raw })
}

/// Monte Carlo angular coincidence map over detector polar angles in the
/// x–z plane (row index: arm 1, column index: arm 2).
#[derive(Debug, Clone)]
pub struct AngularMap<T> {
    pub angles1: Vec<T>,
    pub angles2: Vec<T>,
    /// Row-major raw rates, `raw[i * angles2.len() + j]`.
    pub raw: Vec<T>,
    pub normalized: Vec<T>,
}

impl<T: Scalar> AngularMap<T> {
    pub fn row(&self, i: usize) -> &[T] {
        let w = self.angles2.len();
        &self.raw[i * w..(i + 1) * w]
    }

    /// RMS angular width of the arm-2 marginal at fixed arm-1 cell: the
    /// square root of the rate-weighted second moment about the weighted
    /// mean.
    pub fn row_width(&self, i: usize) -> T {
        let row = self.row(i);
        let total: T = row.iter().copied().sum();
        let mean: T = row.iter().zip(&self.angles2).map(|(&r, &a)| r * a).sum::<T>() / total;
        let var: T = row
            .iter()
            .zip(&self.angles2)
            .map(|(&r, &a)| r * (a - mean) * (a - mean))
            .sum::<T>()
            / total;
        var.sqrt()
    }
}

fn sample_tilted_direction<T: Scalar>(rng: &mut ChaCha12Rng, spread: T) -> Vec3<T> {
    if spread == T::zero() {
        return Vec3::unit_z();
    }
    // Box-Muller pair for the two transverse components.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen::<f64>();
    let radius = (-2.0 * u1.ln()).sqrt();
    let gx = fl::<T>(radius * (2.0 * std::f64::consts::PI * u2).cos()) * spread;
    let gy = fl::<T>(radius * (2.0 * std::f64::consts::PI * u2).sin()) * spread;
    Vec3::new(gx, gy, T::one()).normalize().expect("tilted direction is never zero")
}

/// Re-expresses a mode along a new propagation direction, carrying the
/// polarization over by transverse projection (continuous in the tilt,
/// unlike re-deriving Jones components in the new deterministic basis).
fn tilt_mode<T: Scalar>(base: &PlaneWaveMode<T>, new_khat: &Vec3<T>, u: T) -> Result<PlaneWaveMode<T>> {
    let e0 = base.polarization_vector()?;
    let projected = project_transverse(&e0, new_khat)?;
    let norm = projected.norm();
    if norm < crate::tol_strict::<T>() {
        return Err(Error::InvalidDirection { norm: t64(norm) });
    }
    let e = projected.scale(Complex::new(T::one() / norm, T::zero()));
    let (e1, e2) = crate::field::linear_basis(new_khat)?;
    let alpha = e.dot_real(&e1);
    let beta = e.dot_real(&e2);
    PlaneWaveMode::from_direction(
        new_khat,
        base.omega,
        u,
        crate::field::Polarization::Jones { alpha, beta },
        base.amplitude,
    )
}

/// Builds the angular coincidence map by averaging |amplitude|² over
/// `n_samples` laser-direction pairs drawn independently from a Gaussian
/// focused-beam distribution of width `laser.beam_spread` around +ẑ.
///
/// Deterministic for a fixed seed independently of the rayon thread count:
/// samples are split into fixed chunks, each chunk accumulates in sample
/// order, and chunk sums are merged in chunk order.
#[allow(clippy::too_many_arguments)]
pub fn angular_map<T: Scalar>(
    laser: &LaserPair<T>,
    consts: &PairConstants<T>,
    r0: T,
    source_size: T,
    angles1: &[T],
    angles2: &[T],
    t: T,
    sigma_acc: T,
    n_samples: usize,
    seed: u64,
) -> Result<AngularMap<T>> {
    if n_samples == 0 {
        return Err(Error::ScanConfig("empty sample budget".into()));
    }
    if angles1.is_empty() || angles2.is_empty() {
        return Err(Error::ScanConfig("empty detector-angle grid".into()));
    }
    let dets1: Vec<DetectorDirection<T>> = angles1
        .iter()
        .map(|&a| DetectorDirection::new(Vec3::new(a.sin(), T::zero(), a.cos()), r0, source_size))
        .collect::<Result<_>>()?;
    let dets2: Vec<DetectorDirection<T>> = angles2
        .iter()
        .map(|&a| DetectorDirection::new(Vec3::new(a.sin(), T::zero(), a.cos()), r0, source_size))
        .collect::<Result<_>>()?;

    let cells = dets1.len() * dets2.len();
    let n_chunks = 64.min(n_samples);
    let chunk_sums: Vec<Result<Vec<T>>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = n_samples * chunk / n_chunks;
            let hi = n_samples * (chunk + 1) / n_chunks;
            let mut acc = vec![T::zero(); cells];
            for s in lo..hi {
                let mut rng = derived_rng(seed, "angular", s as u64);
                let k1 = sample_tilted_direction(&mut rng, laser.beam_spread);
                let k2 = sample_tilted_direction(&mut rng, laser.beam_spread);
                let m1 = tilt_mode(&laser.mode1, &k1, consts.u)?;
                let m2 = tilt_mode(&laser.mode2, &k2, consts.u)?;
                let tilted = LaserPair::new(m1, m2, laser.beam_spread)?;
                for (i, d1) in dets1.iter().enumerate() {
                    for (j, d2) in dets2.iter().enumerate() {
                        let amp = two_photon_amplitude(
                            &tilted,
                            d1,
                            d2,
                            t,
                            consts,
                            sigma_acc,
                            EvalMode::Stationary,
                        )?;
                        let norm = tensor_norm(&amp.tensor());
                        acc[i * dets2.len() + j] += norm * norm;
                    }
                }
            }
            Ok(acc)
        })
        .collect();

    let mut raw = vec![T::zero(); cells];
    for chunk in chunk_sums {
        for (r, c) in raw.iter_mut().zip(chunk?) {
            *r += c;
        }
    }
    let max = raw.iter().copied().fold(T::zero(), Float::max);
    if !(max > T::zero()) {
        return Err(Error::DegenerateDistribution);
    }
    let normalized = raw.iter().map(|&r| r / max).collect();
    Ok(AngularMap {
        angles1: angles1.to_vec(),
        angles2: angles2.to_vec(),
        raw,
        normalized,
    })
}

/// Pair spectral density on a frequency grid.
#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    pub omegas: Vec<T>,
    /// Lorentzian density 1/((ω−ω̃)² + γ²/4).
    pub values: Vec<T>,
    /// Full width at half maximum read off the grid (linear interpolation).
    pub fwhm: T,
    /// Trapezoid integral over the grid.
    pub integral: T,
}

/// Evaluates the Lorentzian pair spectrum over `[omega_lo, omega_hi]` with
/// `n_points` samples.
pub fn pair_spectrum<T: Scalar>(
    medium: &MediumSpec<T>,
    omega_lo: T,
    omega_hi: T,
    n_points: usize,
) -> Result<Spectrum<T>> {
    if n_points < 2 || !(omega_hi > omega_lo) {
        return Err(Error::ScanConfig("spectrum grid needs an increasing range and >= 2 points".into()));
    }
    let span = omega_hi - omega_lo;
    if span < fl::<T>(10.0) * medium.gamma {
        return Err(Error::ScanConfig(format!(
            "spectrum span {} < 10 gamma = {}",
            t64(span),
            t64(fl::<T>(10.0) * medium.gamma)
        )));
    }
    let step = span / fl((n_points - 1) as f64);
    let max_step = medium.gamma / fl(4.0);
    if step > max_step {
        return Err(Error::SpectrumResolution { step: t64(step), max: t64(max_step) });
    }
    let quarter = medium.gamma * medium.gamma / fl(4.0);
    let omegas: Vec<T> = (0..n_points)
        .map(|i| omega_lo + step * fl(i as f64))
        .collect();
    let values: Vec<T> = omegas
        .iter()
        .map(|&w| {
            let d = w - medium.omega_tilde;
            T::one() / (d * d + quarter)
        })
        .collect();

    // FWHM by linear interpolation of the half-max crossings around the peak.
    let peak_idx = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    let half = values[peak_idx] / fl(2.0);
    let cross = |i_from: usize, dir: isize| -> T {
        let mut i = i_from as isize;
        loop {
            let next = i + dir;
            if next < 0 || next as usize >= values.len() {
                return omegas[i as usize];
            }
            if values[next as usize] < half {
                let (v0, v1) = (values[i as usize], values[next as usize]);
                let frac = (v0 - half) / (v0 - v1);
                return omegas[i as usize] + (omegas[next as usize] - omegas[i as usize]) * frac;
            }
            i = next;
        }
    };
    let fwhm = cross(peak_idx, 1) - cross(peak_idx, -1);

    let mut integral = T::zero();
    for i in 1..n_points {
        integral += (values[i] + values[i - 1]) * step / fl(2.0);
    }
    Ok(Spectrum { omegas, values, fwhm, integral })
}

/// Modulus of the spectrum's Fourier transform at delay `delta`, normalized
/// to its value at zero delay; the Lorentzian line predicts e^{−γ|Δ|/2}.
///
/// Evaluated on a wide internal grid (half-width 10⁶γ around ω̃, step γ/8)
/// rather than the display grid, so truncation of the Lorentzian tails stays
/// below the 1e-6 comparison level. The sine part cancels by symmetry of the
/// grid about ω̃.
pub fn spectrum_delay_modulus<T: Scalar>(medium: &MediumSpec<T>, delta: T) -> T {
    let gamma = medium.gamma;
    let quarter = gamma * gamma / fl(4.0);
    let step = gamma / fl(8.0);
    let half_points: i64 = 8_000_000;
    let mut cos_sum = T::zero();
    let mut norm_sum = T::zero();
    // x = 0 term
    cos_sum += T::one() / quarter;
    norm_sum += T::one() / quarter;
    for i in 1..=half_points {
        let x = step * fl(i as f64);
        let l = T::one() / (x * x + quarter);
        cos_sum += fl::<T>(2.0) * l * (x * delta).cos();
        norm_sum += fl::<T>(2.0) * l;
    }
    (cos_sum / norm_sum).abs()
}

/// One sampled coincidence event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<T> {
    /// Index into the rate map the event was drawn from.
    pub cell: usize,
    /// Arrival timestamp (ps, model clock): cumulative exponential
    /// inter-arrival times with unit mean rate.
    pub time: T,
}

/// Inverse-transform sampling of `n_events` coincidences from a discrete
/// rate map. Deterministic for a fixed seed.
pub fn sample_events<T: Scalar>(rates: &[T], seed: u64, n_events: usize) -> Result<Vec<Event<T>>> {
    if n_events == 0 {
        return Err(Error::ScanConfig("n_events must be >= 1".into()));
    }
    let mut cdf = Vec::with_capacity(rates.len());
    let mut total = T::zero();
    for &r in rates {
        if r < T::zero() {
            return Err(Error::Validation(format!("negative rate {} in map", t64(r))));
        }
        total += r;
        cdf.push(total);
    }
    if !(total > T::zero()) {
        return Err(Error::DegenerateDistribution);
    }
    let mut rng = derived_rng(seed, "events", 0);
    let mut events = Vec::with_capacity(n_events);
    let mut clock = T::zero();
    for _ in 0..n_events {
        let u: T = fl::<T>(rng.gen::<f64>()) * total;
        let cell = match cdf.iter().position(|&c| u < c) {
            Some(i) => i,
            None => cdf.len() - 1,
        };
        let v: f64 = rng.gen::<f64>();
        clock += fl(-(1.0 - v).max(1e-300).ln());
        events.push(Event { cell, time: clock });
    }
    Ok(events)
}
