//! Damped molecular oscillator and its discretized reservoir.
//!
//! The phonon mode decays by coupling to a broadband reservoir. The module
//! provides the closed-form decayed amplitude and Langevin kernel, a
//! flat-coupling reservoir discretization, and an exact single-excitation
//! Fock-space oracle used to validate the exponential-decay approximation
//! against the full unitary model.

use num_complex::Complex;
use num_traits::Float;
use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;
use crate::{fl, t64, Scalar, HBAR_OVER_KB_PS_K};

/// Physical description of the scattering medium and its damped vibration.
///
/// Frequencies in rad/ps, volumes in µm³, temperature in K; the
/// polarizability derivative and oscillator mass are model units that only
/// enter overall amplitude constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSpec<T> {
    /// Refractive index (≥ 1).
    pub n: T,
    /// Molecular number density (µm⁻³).
    pub number_density: T,
    /// Polarizability derivative.
    pub alpha_prime: T,
    /// Total oscillator mass.
    pub mass: T,
    /// Bare vibrational resonance ω₀ (rad/ps).
    pub omega0: T,
    /// Observed (shifted) resonance ω̃ (rad/ps); the operative value everywhere.
    pub omega_tilde: T,
    /// Amplitude decay constant γ (rad/ps).
    pub gamma: T,
    /// Scattering volume (µm³).
    pub v_s: T,
    /// Temperature (K).
    pub temperature: T,
}

impl<T: Scalar> MediumSpec<T> {
    /// Validates hard invariants. Soft constraints are reported by
    /// [`MediumSpec::warnings`] instead of failing.
    pub fn validate(&self) -> Result<()> {
        if self.n < T::one() {
            return Err(Error::Validation(format!("refractive index n = {} < 1", self.n)));
        }
        if !(self.gamma > T::zero()) {
            return Err(Error::Validation(format!("gamma = {} must be positive", self.gamma)));
        }
        for (name, v) in [
            ("number_density", self.number_density),
            ("mass", self.mass),
            ("omega0", self.omega0),
            ("omega_tilde", self.omega_tilde),
            ("V_S", self.v_s),
        ] {
            if !(v > T::zero()) {
                return Err(Error::Validation(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    /// Soft-constraint diagnostics: underdamping (γ ≪ ω̃) and the
    /// near-resonance assumption ω̃ ≈ ω₀.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.gamma / self.omega_tilde >= fl(0.1) {
            w.push(format!(
                "gamma/omega_tilde = {} >= 0.1; the underdamped approximation is strained",
                t64(self.gamma / self.omega_tilde)
            ));
        }
        if ((self.omega_tilde - self.omega0) / self.omega0).abs() > fl(0.1) {
            w.push(format!(
                "omega_tilde deviates from omega0 by more than 10% ({} vs {})",
                t64(self.omega_tilde),
                t64(self.omega0)
            ));
        }
        w
    }
}

/// Uniform flat-coupling discretization of the vibrational reservoir,
/// centered on ω̃.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirGrid<T> {
    omegas: Vec<T>,
    zeta: T,
    nu: T,
    bandwidth: T,
}

impl<T: Scalar> ReservoirGrid<T> {
    /// Mode frequencies ω_j, ascending.
    pub fn omegas(&self) -> &[T] {
        &self.omegas
    }

    /// Constant coupling ζ (real by construction).
    pub fn zeta(&self) -> T {
        self.zeta
    }

    /// Mode density ν = J/bandwidth (modes per rad/ps).
    pub fn nu(&self) -> T {
        self.nu
    }

    pub fn count(&self) -> usize {
        self.omegas.len()
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    /// Index of the mode sitting exactly at ω̃.
    pub fn center_index(&self) -> usize {
        (self.count() - 1) / 2
    }

    /// Discrete-bath recurrence time 2π/Δω = 2π·J/bandwidth (ps).
    pub fn recurrence_time(&self) -> T {
        fl::<T>(2.0) * T::PI() * fl::<T>(self.count() as f64) / self.bandwidth
    }

    /// Upper end of the honest-comparison window: half the recurrence time.
    pub fn validity_window(&self) -> T {
        self.recurrence_time() / fl(2.0)
    }

    /// One row per mode: omega, Re zeta, Im zeta.
    pub fn export_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "omega,re_zeta,im_zeta")?;
        for &omega in &self.omegas {
            writeln!(w, "{:.12e},{:.12e},{:.12e}", t64(omega), t64(self.zeta), 0.0)?;
        }
        Ok(())
    }
}

/// Builds a uniform reservoir grid of `j` modes (odd, ≥ 101) over
/// `bandwidth` rad/ps centered on ω̃, with the constant coupling fixed by
/// the damping constraint |ζ|²ν = γ/(2π).
pub fn discretize_reservoir<T: Scalar>(
    spec: &MediumSpec<T>,
    j: usize,
    bandwidth: T,
) -> Result<ReservoirGrid<T>> {
    spec.validate()?;
    if j < 101 || j % 2 == 0 {
        return Err(Error::BadReservoirCount { j });
    }
    let min = fl::<T>(10.0) * spec.gamma;
    if bandwidth < min {
        return Err(Error::UnderResolvedBath { bandwidth: t64(bandwidth), min: t64(min) });
    }
    let delta = bandwidth / fl(j as f64);
    let half = (j - 1) / 2;
    let omegas = (0..j)
        .map(|i| spec.omega_tilde + delta * fl(i as f64 - half as f64))
        .collect();
    let nu = fl::<T>(j as f64) / bandwidth;
    let zeta = (spec.gamma / (fl::<T>(2.0) * T::PI() * nu)).sqrt();
    Ok(ReservoirGrid { omegas, zeta, nu, bandwidth })
}

fn check_time<T: Scalar>(t: T) -> Result<()> {
    if t < T::zero() {
        return Err(Error::NegativeTime { t: t64(t) });
    }
    Ok(())
}

/// Decayed vibrational amplitude e^{−i(ω̃ − iγ/2)t} of the
/// Weisskopf-Wigner solution.
pub fn ww_amplitude<T: Scalar>(t: T, spec: &MediumSpec<T>) -> Result<Complex<T>> {
    check_time(t)?;
    Ok(Complex::from_polar((-spec.gamma * t / fl(2.0)).exp(), -spec.omega_tilde * t))
}

/// Langevin noise kernel: the coefficient multiplying the j-th reservoir
/// operator in the damped-mode solution,
/// ζ·(e^{−iω_j t} − e^{−i(ω̃−iγ/2)t})/(ω_j − ω̃ + iγ/2).
pub fn langevin_kernel<T: Scalar>(
    j: usize,
    t: T,
    grid: &ReservoirGrid<T>,
    spec: &MediumSpec<T>,
) -> Result<Complex<T>> {
    check_time(t)?;
    let omega_j = grid.omegas[j];
    let bath = Complex::from_polar(T::one(), -omega_j * t);
    let decayed = ww_amplitude(t, spec)?;
    let denom = Complex::new(omega_j - spec.omega_tilde, spec.gamma / fl(2.0));
    Ok((bath - decayed).scale(grid.zeta) / denom)
}

/// Deviation of the discrete commutator sum rule from unity:
/// |e^{−γt} + Σ_j |L_j(t)|² − 1|.
pub fn commutator_defect<T: Scalar>(
    t: T,
    grid: &ReservoirGrid<T>,
    spec: &MediumSpec<T>,
) -> Result<T> {
    check_time(t)?;
    let window = grid.validity_window();
    if t > window {
        return Err(Error::RecurrenceContamination { t: t64(t), window: t64(window) });
    }
    let sum: T = (0..grid.count())
        .map(|j| langevin_kernel(j, t, grid, spec).map(|c| c.norm_sqr()))
        .sum::<Result<T>>()?;
    Ok(((-spec.gamma * t).exp() + sum - T::one()).abs())
}

/// Exact single-excitation model: the mode plus J reservoir oscillators
/// restricted to the one-quantum sector, diagonalized once at construction.
///
/// Worked in the frame rotating at ω̃, which shifts every eigenvalue by a
/// global constant and leaves all populations unchanged; the matrix is the
/// real symmetric arrowhead diag(0, ω_j − ω̃) with first-row couplings ζ.
pub struct FockOracle<T> {
    /// Eigenvalues of the shifted Hamiltonian.
    eigvals: Vec<T>,
    /// Eigenvectors, `eigvecs[m][i]` = component i of eigenvector m.
    eigvecs: Vec<Vec<T>>,
    dim: usize,
}

impl<T: Scalar> FockOracle<T> {
    pub fn new(grid: &ReservoirGrid<T>, spec: &MediumSpec<T>) -> Result<Self> {
        let dim = grid.count() + 1;
        if dim > 100_000 {
            return Err(Error::ResourceLimit { dim });
        }
        let mut h = vec![T::zero(); dim * dim];
        for (j, &omega) in grid.omegas().iter().enumerate() {
            let row = j + 1;
            h[row * dim + row] = omega - spec.omega_tilde;
            h[row] = grid.zeta();
            h[row * dim] = grid.zeta();
        }
        let eig = sym_eigen(&h, dim);
        Ok(FockOracle { eigvals: eig.values, eigvecs: eig.vectors, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Full state at time t starting from basis state `source` at t = 0.
    pub fn state_from(&self, source: usize, t: T) -> Vec<Complex<T>> {
        assert!(source < self.dim, "source index out of range");
        let mut state = vec![Complex::new(T::zero(), T::zero()); self.dim];
        for (lambda, vector) in self.eigvals.iter().zip(&self.eigvecs) {
            let phase = Complex::from_polar(T::one(), -*lambda * t);
            let weight = phase.scale(vector[source]);
            for (s, &v) in state.iter_mut().zip(vector) {
                *s += weight.scale(v);
            }
        }
        state
    }

    /// Transition amplitude ⟨target| e^{−iHt} |source⟩.
    pub fn amplitude(&self, source: usize, target: usize, t: T) -> Complex<T> {
        assert!(source < self.dim && target < self.dim, "index out of range");
        let mut a = Complex::new(T::zero(), T::zero());
        for (lambda, vector) in self.eigvals.iter().zip(&self.eigvecs) {
            a += Complex::from_polar(T::one(), -*lambda * t).scale(vector[source] * vector[target]);
        }
        a
    }
}

/// Survival-probability time series produced by [`oracle_decay`].
#[derive(Debug, Clone)]
pub struct DecaySeries<T> {
    pub times: Vec<T>,
    pub survival: Vec<T>,
    /// Largest deviation of the state norm from 1 over the series.
    pub norm_defect: T,
}

impl<T: Scalar> DecaySeries<T> {
    /// One row per sample: t, survival, reference e^{−γt}.
    pub fn export_csv<W: Write>(&self, w: &mut W, gamma: T) -> std::io::Result<()> {
        writeln!(w, "t,survival,model")?;
        for (&t, &s) in self.times.iter().zip(&self.survival) {
            writeln!(w, "{:.12e},{:.12e},{:.12e}", t64(t), t64(s), t64((-gamma * t).exp()))?;
        }
        Ok(())
    }
}

/// Evolves the one-quantum state (mode excited, reservoir empty) under the
/// exact Hamiltonian and returns the mode survival probability on a uniform
/// time grid over `[0, t_max]` with `steps` intervals.
pub fn oracle_decay<T: Scalar>(
    grid: &ReservoirGrid<T>,
    spec: &MediumSpec<T>,
    t_max: T,
    steps: usize,
) -> Result<DecaySeries<T>> {
    if steps == 0 {
        return Err(Error::FitWindow("oracle_decay needs at least one step".into()));
    }
    let window = grid.validity_window();
    if t_max > window {
        return Err(Error::RecurrenceContamination { t: t64(t_max), window: t64(window) });
    }
    let oracle = FockOracle::new(grid, spec)?;
    let mut times = Vec::with_capacity(steps + 1);
    let mut survival = Vec::with_capacity(steps + 1);
    let mut norm_defect = T::zero();
    for i in 0..=steps {
        let t = t_max * fl(i as f64) / fl(steps as f64);
        let state = oracle.state_from(0, t);
        let norm: T = state.iter().map(|c| c.norm_sqr()).sum();
        norm_defect = Float::max(norm_defect, (norm - T::one()).abs());
        times.push(t);
        survival.push(state[0].norm_sqr());
    }
    Ok(DecaySeries { times, survival, norm_defect })
}

/// Least-squares decay-rate fit over a time window.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit<T> {
    /// Fitted rate: minus the slope of log(survival).
    pub gamma_fit: T,
    /// Root-mean-square residual of the linear fit in log space.
    pub residual: T,
}

/// Fits −log(survival) = γ_fit·t + const by least squares over
/// `[t_lo, t_hi]`.
pub fn fit_decay_rate<T: Scalar>(
    series: &DecaySeries<T>,
    t_lo: T,
    t_hi: T,
) -> Result<DecayFit<T>> {
    let span_lo = *series.times.first().ok_or_else(|| Error::FitWindow("empty series".into()))?;
    let span_hi = *series.times.last().unwrap();
    if t_lo < span_lo || t_hi > span_hi || !(t_lo < t_hi) {
        return Err(Error::FitWindow(format!(
            "window [{}, {}] outside series span [{}, {}]",
            t64(t_lo),
            t64(t_hi),
            t64(span_lo),
            t64(span_hi)
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &s) in series.times.iter().zip(&series.survival) {
        if t < t_lo || t > t_hi {
            continue;
        }
        if s <= fl(1e-12) {
            return Err(Error::FitWindow(format!(
                "non-positive survival {} at t = {} inside the fit window",
                t64(s),
                t64(t)
            )));
        }
        xs.push(t);
        ys.push(-s.ln());
    }
    let n = fl::<T>(xs.len() as f64);
    if xs.len() < 2 {
        return Err(Error::FitWindow(format!("window contains {} point(s), need >= 2", xs.len())));
    }
    let sx: T = xs.iter().copied().sum();
    let sy: T = ys.iter().copied().sum();
    let sxx: T = xs.iter().map(|&x| x * x).sum();
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss: T = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(DecayFit { gamma_fit: slope, residual: (ss / n).sqrt() })
}

/// Bose-Einstein occupation 1/(e^{ħω̃/k_BT} − 1) of the vibration at
/// temperature `temperature` (K); ω̃ in rad/ps.
pub fn thermal_phonon_number<T: Scalar>(omega_tilde: T, temperature: T) -> Result<T> {
    if !(temperature > T::zero()) {
        return Err(Error::NonPositiveTemperature { t: t64(temperature) });
    }
    let eta = fl::<T>(HBAR_OVER_KB_PS_K) * omega_tilde / temperature;
    Ok(T::one() / (eta.exp() - T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(gamma: f64, omega_tilde: f64) -> MediumSpec<f64> {
        MediumSpec {
            n: 1.0,
            number_density: 1.0,
            alpha_prime: 1.0,
            mass: 1.0,
            omega0: omega_tilde,
            omega_tilde,
            gamma,
            v_s: 1.0,
            temperature: 300.0,
        }
    }

    #[test]
    fn discretize_matches_damping_constraint() {
        let s = spec(1.0, 100.0);
        let g = discretize_reservoir(&s, 201, 40.0).unwrap();
        assert_relative_eq!(g.nu(), 5.025, epsilon = 1e-12);
        assert_relative_eq!(g.zeta(), (1.0 / (2.0 * std::f64::consts::PI * 5.025)).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(g.zeta(), 0.17797, epsilon = 1e-5);
        assert!((g.zeta() * g.zeta() * g.nu() - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-10);
        assert_relative_eq!(g.recurrence_time(), 2.0 * std::f64::consts::PI * 201.0 / 40.0, epsilon = 1e-12);
        assert_relative_eq!(g.recurrence_time(), 31.57, epsilon = 1e-2);
        // grid centered on omega_tilde
        assert_relative_eq!(g.omegas()[g.center_index()], 100.0, epsilon = 1e-12);
        // zeta shrinks by sqrt(2) when J doubles at fixed bandwidth
        let g2 = discretize_reservoir(&s, 401, 40.0).unwrap();
        assert_relative_eq!(g.zeta() / g2.zeta(), (401.0f64 / 201.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn discretize_rejects_bad_inputs() {
        let s = spec(1.0, 100.0);
        assert!(matches!(discretize_reservoir(&s, 99, 40.0), Err(Error::BadReservoirCount { .. })));
        assert!(matches!(discretize_reservoir(&s, 200, 40.0), Err(Error::BadReservoirCount { .. })));
        assert!(matches!(discretize_reservoir(&s, 201, 5.0), Err(Error::UnderResolvedBath { .. })));
    }

    #[test]
    fn ww_amplitude_examples() {
        let s = spec(1.0, 100.0);
        let a0 = ww_amplitude(0.0, &s).unwrap();
        assert_relative_eq!(a0.re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(a0.im, 0.0, epsilon = 1e-15);
        // gamma t = 2 → modulus e^{-1}
        assert_relative_eq!(ww_amplitude(2.0, &s).unwrap().norm(), (-1.0f64).exp(), epsilon = 1e-14);
        // phase is exactly −omega_tilde t (mod 2π)
        let t = 1.0 / 100.0;
        let phase = ww_amplitude(t, &s).unwrap().arg();
        assert_relative_eq!(phase, -1.0, epsilon = 1e-12);
        assert!(matches!(ww_amplitude(-0.1, &s), Err(Error::NegativeTime { .. })));
    }

    #[test]
    fn langevin_kernel_limits() {
        let s = spec(1.0, 100.0);
        let g = discretize_reservoir(&s, 401, 40.0).unwrap();
        // t = 0 → 0 for every mode
        for j in [0, 100, g.center_index(), 400] {
            assert!(langevin_kernel(j, 0.0, &g, &s).unwrap().norm() < 1e-15);
        }
        // resonant mode, gamma t = 20 → 2|zeta|/gamma
        let resonant = langevin_kernel(g.center_index(), 20.0, &g, &s).unwrap();
        assert_relative_eq!(resonant.norm(), 2.0 * g.zeta(), epsilon = 1e-4);
        // far-detuned mode bounded by the triangle inequality
        let j_detuned = g.center_index() + (10.0 / (40.0 / 401.0)).round() as usize;
        let detuning: f64 = g.omegas()[j_detuned] - 100.0;
        assert!((detuning - 10.0).abs() < 0.1);
        let bound = 2.0 * g.zeta() / (detuning * detuning + 0.25).sqrt();
        for &t in &[0.3, 1.0, 5.0, 20.0] {
            assert!(langevin_kernel(j_detuned, t, &g, &s).unwrap().norm() <= bound + 1e-12);
        }
    }

    #[test]
    fn commutator_defect_values() {
        let s = spec(1.0, 100.0);
        let g401 = discretize_reservoir(&s, 401, 40.0).unwrap();
        assert_eq!(commutator_defect(0.0, &g401, &s).unwrap(), 0.0);
        // frozen reference value at gamma t = 1 for the J=401, bw=40γ grid
        let d401 = commutator_defect(1.0, &g401, &s).unwrap();
        assert_relative_eq!(d401, 0.02259618, epsilon = 1e-6);
        // defect decreases with J at fixed bandwidth
        let d201 = commutator_defect(1.0, &discretize_reservoir(&s, 201, 40.0).unwrap(), &s).unwrap();
        let d101 = commutator_defect(1.0, &discretize_reservoir(&s, 101, 40.0).unwrap(), &s).unwrap();
        assert!(d101 > d201 && d201 > d401, "{d101} {d201} {d401}");
        // beyond the validity window
        let late = g401.validity_window() + 1.0;
        assert!(matches!(
            commutator_defect(late, &g401, &s),
            Err(Error::RecurrenceContamination { .. })
        ));
    }

    #[test]
    fn oracle_decay_matches_exponential() {
        let s = spec(1.0, 100.0);
        let g = discretize_reservoir(&s, 401, 40.0).unwrap();
        let series = oracle_decay(&g, &s, 3.0, 120).unwrap();
        assert!((series.survival[0] - 1.0).abs() < 1e-9);
        assert!(series.norm_defect < 1e-9, "norm defect {}", series.norm_defect);
        let fit = fit_decay_rate(&series, 0.5, 3.0).unwrap();
        assert!((fit.gamma_fit - 1.0).abs() < 0.02, "gamma_fit {}", fit.gamma_fit);
    }

    #[test]
    fn oracle_transient_rabi_bound() {
        // Start from a detuned reservoir mode; the mode population stays
        // below the two-level Rabi scale 4ζ²/(Δω² + γ²/4).
        let s = spec(1.0, 100.0);
        let g = discretize_reservoir(&s, 101, 40.0).unwrap();
        let oracle = FockOracle::new(&g, &s).unwrap();
        let j = g.center_index() + 10; // detuned by 10·Δω ≈ 4 rad/ps
        let detuning: f64 = g.omegas()[j] - 100.0;
        let bound = 4.0 * g.zeta() * g.zeta() / (detuning * detuning + 0.25);
        for i in 1..=40 {
            let t = g.validity_window() * i as f64 / 40.0;
            let p = oracle.amplitude(j + 1, 0, t).norm_sqr();
            assert!(p <= 4.0 * bound, "population {p} exceeds Rabi scale {bound} at t={t}");
        }
    }

    #[test]
    fn oracle_rejects_out_of_window_and_overflow() {
        let s = spec(1.0, 100.0);
        let g = discretize_reservoir(&s, 101, 40.0).unwrap();
        assert!(matches!(
            oracle_decay(&g, &s, g.validity_window() * 2.0, 10),
            Err(Error::RecurrenceContamination { .. })
        ));
    }

    #[test]
    fn fit_decay_rate_exact_series() {
        let gamma = 0.7;
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let survival: Vec<f64> = times.iter().map(|&t| (-gamma * t).exp()).collect();
        let series = DecaySeries { times, survival, norm_defect: 0.0 };
        let fit = fit_decay_rate(&series, 0.0, 5.0).unwrap();
        assert_relative_eq!(fit.gamma_fit, gamma, epsilon = 1e-10);
        assert!(fit.residual < 1e-12);
        // two-point window is still defined with zero residual
        let fit2 = fit_decay_rate(&series, 0.0, 0.05 + 1e-12).unwrap();
        assert_relative_eq!(fit2.gamma_fit, gamma, epsilon = 1e-9);
        assert!(fit2.residual < 1e-12);
    }

    #[test]
    fn fit_decay_rate_rejects_bad_windows() {
        let series = DecaySeries {
            times: vec![0.0, 1.0, 2.0],
            survival: vec![1.0, 0.5, 0.0],
            norm_defect: 0.0,
        };
        assert!(matches!(fit_decay_rate(&series, 0.0, 3.0), Err(Error::FitWindow(_))));
        assert!(matches!(fit_decay_rate(&series, 0.0, 2.0), Err(Error::FitWindow(_))));
    }

    #[test]
    fn thermal_phonon_number_examples() {
        // diamond optical phonon: 1332 cm⁻¹ → ω̃ = 2πc·1332e-4 µm⁻¹ rad/ps
        let omega = 2.0 * std::f64::consts::PI * crate::SPEED_OF_LIGHT_UM_PS * 1332.0e-4;
        assert_relative_eq!(omega, 250.9, epsilon = 0.1);
        let n = thermal_phonon_number(omega, 300.0).unwrap();
        assert!(n > 1.0e-3 && n < 2.5e-3, "N = {n}");
        // exact point: ħω/k_BT = ln 2 → N = 1
        let t_ln2 = HBAR_OVER_KB_PS_K * omega / std::f64::consts::LN_2;
        assert_relative_eq!(thermal_phonon_number(omega, t_ln2).unwrap(), 1.0, epsilon = 1e-12);
        // classical limit at ratio 100
        let t_hot = 100.0 * HBAR_OVER_KB_PS_K * omega;
        let classical = t_hot / (HBAR_OVER_KB_PS_K * omega);
        assert_relative_eq!(thermal_phonon_number(omega, t_hot).unwrap(), classical, max_relative = 0.01);
        assert!(matches!(thermal_phonon_number(omega, 0.0), Err(Error::NonPositiveTemperature { .. })));
    }

    #[test]
    fn thermal_phonon_number_monotone() {
        let n1 = thermal_phonon_number(250.0, 300.0).unwrap();
        assert!(thermal_phonon_number(250.0, 400.0).unwrap() > n1);
        assert!(thermal_phonon_number(300.0, 300.0).unwrap() < n1);
    }

    #[test]
    fn medium_warnings() {
        let mut s = spec(1.0, 5.0);
        assert_eq!(s.warnings().len(), 1); // gamma/omega_tilde = 0.2
        s.gamma = 0.01;
        assert!(s.warnings().is_empty());
        s.n = 0.5;
        assert!(s.validate().is_err());
    }

    #[test]
    fn grid_csv_export() {
        let s = spec(1.0, 100.0);
        let g = discretize_reservoir(&s, 101, 40.0).unwrap();
        let mut buf = Vec::new();
        g.export_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 102);
        assert!(text.starts_with("omega,re_zeta,im_zeta\n"));
    }
}
