//! Scenario files, deterministic scan orchestration, and the bundled
//! self-check suite.
//!
//! The scenario layer is concrete `f64`: one JSON document describes the
//! medium, the pump pair, the reservoir discretization and the requested
//! scans; `run_scenario` executes everything and emits byte-identical CSV
//! and JSON artifacts for identical inputs.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fs;
use std::path::Path;

use crate::bath::{
    commutator_defect, discretize_reservoir, fit_decay_rate, oracle_decay, thermal_phonon_number,
    MediumSpec,
};
use crate::error::{Error, Result};
use crate::field::{
    analytic_signal_residual, free_space_residual, rs_vector, DerivScheme, FieldGrid, GridDims,
    Helicity, PlaneWaveMode, Polarization, Vec3,
};
use crate::green::DetectorDirection;
use crate::observables::{
    analyzer_vector, angular_map, delay_scan, derived_rng, pair_spectrum, polarization_scan,
    project_rate, spectrum_delay_modulus,
};
use crate::pair::{
    check_vacuum_approximation, derive_constants, tensor_add, tensor_norm, tensor_scale,
    tensor_transpose, two_photon_amplitude, EvalMode, LaserPair, PairConstants,
};
use crate::SPEED_OF_LIGHT_UM_PS;

/// Embedded reference scenario, also shipped at `scenarios/reference.json`.
pub const REFERENCE_SCENARIO: &str = include_str!("../../../scenarios/reference.json");

fn default_omega0() -> Option<f64> {
    None
}

/// Medium block of a scenario file. Mirrors [`MediumSpec`]; `omega0`
/// defaults to `omega_tilde`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub n: f64,
    pub number_density: f64,
    pub alpha_prime: f64,
    pub mass: f64,
    #[serde(default = "default_omega0")]
    pub omega0: Option<f64>,
    pub omega_tilde: f64,
    pub gamma: f64,
    pub v_s: f64,
    pub temperature: f64,
}

impl MediumConfig {
    pub fn to_spec(&self) -> MediumSpec<f64> {
        MediumSpec {
            n: self.n,
            number_density: self.number_density,
            alpha_prime: self.alpha_prime,
            mass: self.mass,
            omega0: self.omega0.unwrap_or(self.omega_tilde),
            omega_tilde: self.omega_tilde,
            gamma: self.gamma,
            v_s: self.v_s,
            temperature: self.temperature,
        }
    }
}

fn default_jones_alpha() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_direction() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

/// Pump block: one shared frequency, a Jones pair in the deterministic
/// transverse basis of each beam direction, and the focused-beam angular
/// spread.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserConfig {
    pub omega_l: f64,
    #[serde(default = "default_jones_alpha")]
    pub alpha: [f64; 2],
    #[serde(default)]
    pub beta: [f64; 2],
    #[serde(default)]
    pub beam_spread: f64,
    #[serde(default = "default_direction")]
    pub direction1: [f64; 3],
    #[serde(default = "default_direction")]
    pub direction2: [f64; 3],
}

fn default_bath_modes() -> usize {
    401
}

fn default_bath_bandwidth() -> f64 {
    40.0
}

/// Reservoir discretization parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    #[serde(default = "default_bath_modes")]
    pub modes: usize,
    /// Bandwidth in units of γ.
    #[serde(default = "default_bath_bandwidth")]
    pub bandwidth_gammas: f64,
}

impl Default for BathConfig {
    fn default() -> Self {
        BathConfig { modes: default_bath_modes(), bandwidth_gammas: default_bath_bandwidth() }
    }
}

fn default_detector_distance() -> f64 {
    500.0
}

/// Detection geometry shared by all scans.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Distance of both detectors from the source (µm).
    #[serde(default = "default_detector_distance")]
    pub detector_distance: f64,
    /// Evaluation time (ps); defaults to 6/γ + distance/u, safely inside the
    /// stationary regime.
    #[serde(default)]
    pub evaluation_time: Option<f64>,
    /// Propagation speed in the embedding (µm/ps); defaults to c/n.
    #[serde(default)]
    pub propagation_speed: Option<f64>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            detector_distance: default_detector_distance(),
            evaluation_time: None,
            propagation_speed: None,
        }
    }
}

fn default_delay_theta() -> f64 {
    0.03
}

fn default_delay_points() -> usize {
    50
}

fn default_max_delay_gammas() -> f64 {
    5.0
}

fn default_pol_theta() -> f64 {
    0.1
}

fn default_pol_points() -> usize {
    37
}

fn default_angular_half_width() -> f64 {
    0.15
}

fn default_angular_points() -> usize {
    41
}

fn default_angular_samples() -> usize {
    20_000
}

fn default_spectrum_span() -> f64 {
    200.0
}

fn default_spectrum_points() -> usize {
    2001
}

/// One requested scan. Detector polar angles are measured in the x–z plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScanConfig {
    Delay {
        #[serde(default = "default_delay_theta")]
        theta1: f64,
        #[serde(default = "default_delay_theta")]
        theta2: f64,
        #[serde(default = "default_max_delay_gammas")]
        max_delay_gammas: f64,
        #[serde(default = "default_delay_points")]
        points: usize,
    },
    Polarization {
        #[serde(default = "default_pol_theta")]
        theta1: f64,
        #[serde(default = "default_pol_theta")]
        theta2: f64,
        #[serde(default = "default_pol_points")]
        points: usize,
    },
    Angular {
        #[serde(default = "default_angular_half_width")]
        half_width: f64,
        #[serde(default = "default_angular_points")]
        points: usize,
        #[serde(default = "default_angular_samples")]
        samples: usize,
    },
    Spectrum {
        /// Grid span in units of γ, centered on ω̃.
        #[serde(default = "default_spectrum_span")]
        span_gammas: f64,
        #[serde(default = "default_spectrum_points")]
        points: usize,
    },
}

impl ScanConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ScanConfig::Delay { .. } => "delay",
            ScanConfig::Polarization { .. } => "polarization",
            ScanConfig::Angular { .. } => "angular",
            ScanConfig::Spectrum { .. } => "spectrum",
        }
    }
}

fn default_vq_ratio() -> f64 {
    1000.0
}

fn default_sigma_acc() -> f64 {
    0.01
}

/// One scenario file: medium, pump, reservoir, acceptance width, scans.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub medium: MediumConfig,
    pub laser: LaserConfig,
    #[serde(default)]
    pub bath: BathConfig,
    /// Quantization volume as a multiple of V_S.
    #[serde(default = "default_vq_ratio")]
    pub v_q_ratio: f64,
    /// Width (radians) of the Gaussian momentum-conservation acceptance.
    #[serde(default = "default_sigma_acc")]
    pub sigma_acc: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub scans: Vec<ScanConfig>,
}

impl Scenario {
    /// Hard validation; soft constraints go to [`Scenario::warnings`].
    pub fn validate(&self) -> Result<()> {
        let spec = self.medium.to_spec();
        spec.validate()?;
        if !(self.sigma_acc > 0.0) {
            return Err(Error::Config(format!(
                "sigma_acc must be positive, got {}",
                self.sigma_acc
            )));
        }
        if self.v_q_ratio < 1.0 {
            return Err(Error::Config(format!(
                "v_q_ratio must be >= 1 (V_Q >= V_S), got {}",
                self.v_q_ratio
            )));
        }
        if self.laser.omega_l <= 0.0 {
            return Err(Error::Config("laser omega_l must be positive".into()));
        }
        let jones = self.laser.alpha[0].powi(2)
            + self.laser.alpha[1].powi(2)
            + self.laser.beta[0].powi(2)
            + self.laser.beta[1].powi(2);
        if (jones - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "laser Jones pair not normalized: |alpha|^2 + |beta|^2 = {jones}"
            )));
        }
        for d in [&self.laser.direction1, &self.laser.direction2] {
            let v = Vec3::new(d[0], d[1], d[2]);
            if v.normalize().is_err() {
                return Err(Error::Config(format!("laser direction {d:?} has zero length")));
            }
        }
        if self.bath.modes < 101 || self.bath.modes % 2 == 0 {
            return Err(Error::Config(format!(
                "bath.modes must be odd and >= 101, got {}",
                self.bath.modes
            )));
        }
        if self.bath.bandwidth_gammas < 10.0 {
            return Err(Error::Config(format!(
                "bath.bandwidth_gammas must be >= 10, got {}",
                self.bath.bandwidth_gammas
            )));
        }
        Ok(())
    }

    /// Soft-constraint diagnostics, including the frequency hierarchy
    /// γ ≪ ω̃ ≪ ω_ℓ.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = self.medium.to_spec().warnings();
        if self.medium.omega_tilde / self.laser.omega_l >= 0.1 {
            w.push(format!(
                "omega_tilde/omega_l = {} >= 0.1; the frequency hierarchy is strained",
                self.medium.omega_tilde / self.laser.omega_l
            ));
        }
        w
    }

    pub fn propagation_speed(&self) -> f64 {
        self.geometry
            .propagation_speed
            .unwrap_or(SPEED_OF_LIGHT_UM_PS / self.medium.n)
    }

    pub fn evaluation_time(&self) -> f64 {
        self.geometry.evaluation_time.unwrap_or(
            6.0 / self.medium.gamma + self.geometry.detector_distance / self.propagation_speed(),
        )
    }

    /// Linear source size used for the far-field guard: V_S^(1/3).
    pub fn source_size(&self) -> f64 {
        self.medium.v_s.cbrt()
    }

    pub fn laser_pair(&self) -> Result<LaserPair<f64>> {
        let u = self.propagation_speed();
        let pol = Polarization::Jones {
            alpha: Complex::new(self.laser.alpha[0], self.laser.alpha[1]),
            beta: Complex::new(self.laser.beta[0], self.laser.beta[1]),
        };
        let d1 = Vec3::new(
            self.laser.direction1[0],
            self.laser.direction1[1],
            self.laser.direction1[2],
        )
        .normalize()?;
        let d2 = Vec3::new(
            self.laser.direction2[0],
            self.laser.direction2[1],
            self.laser.direction2[2],
        )
        .normalize()?;
        let amp = Complex::new(1.0, 0.0);
        let m1 = PlaneWaveMode::from_direction(&d1, self.laser.omega_l, u, pol, amp)?;
        let m2 = PlaneWaveMode::from_direction(&d2, self.laser.omega_l, u, pol, amp)?;
        LaserPair::new(m1, m2, self.laser.beam_spread)
    }

    pub fn constants(&self) -> Result<PairConstants<f64>> {
        derive_constants(
            &self.medium.to_spec(),
            &self.laser_pair()?,
            self.v_q_ratio * self.medium.v_s,
            self.propagation_speed(),
        )
    }
}

/// Parses and hard-validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let scenario: Scenario = serde_json::from_str(&text)?;
    scenario.validate()?;
    Ok(scenario)
}

/// Human- and machine-readable description of the scenario schema.
pub fn schema_text() -> &'static str {
    include_str!("../docs/scenario-schema.md")
}

/// One validation entry of a run report.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationItem {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub detail: String,
}

/// Result of executing a scenario.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub validations: Vec<ValidationItem>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
    pub failed: bool,
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Executes every requested scan and validation, writing one CSV per scan
/// plus `summary.json` into `out_dir`. Outputs are byte-identical for
/// identical (scenario, seed) regardless of thread count.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunReport> {
    scenario.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;

    let spec = scenario.medium.to_spec();
    let warnings = scenario.warnings();
    let mut validations = Vec::new();
    let mut failed = false;

    // Vacuum-approximation gate: a hot or soft vibration invalidates the
    // zero-phonon treatment, so the run fails before any scan executes.
    match check_vacuum_approximation(&spec) {
        Ok(n_bar) => validations.push(ValidationItem {
            name: "thermal_occupation".into(),
            passed: true,
            measured: n_bar,
            detail: "Bose occupation below the 1e-2 vacuum-approximation gate".into(),
        }),
        Err(Error::ThermalOccupation { n_bar }) => {
            validations.push(ValidationItem {
                name: "thermal_occupation".into(),
                passed: false,
                measured: n_bar,
                detail: "thermal occupation exceeds 1e-2; vacuum approximation invalid".into(),
            });
            failed = true;
        }
        Err(e) => return Err(e),
    }

    // Reservoir damping constraint |ζ|²ν = γ/2π.
    let grid = discretize_reservoir(
        &spec,
        scenario.bath.modes,
        scenario.bath.bandwidth_gammas * spec.gamma,
    )?;
    let constraint = (grid.zeta() * grid.zeta() * grid.nu()
        - spec.gamma / (2.0 * std::f64::consts::PI))
        .abs();
    validations.push(ValidationItem {
        name: "reservoir_constraint".into(),
        passed: constraint < 1e-10,
        measured: constraint,
        detail: "flat-coupling damping constraint".into(),
    });

    let mut files = Vec::new();
    let mut scan_summaries = Vec::new();

    if !failed {
        let laser = scenario.laser_pair()?;
        let consts = scenario.constants()?;
        let r0 = scenario.geometry.detector_distance;
        let size = scenario.source_size();
        let t = scenario.evaluation_time();
        let mut used_names: Vec<String> = Vec::new();

        for scan in &scenario.scans {
            let base = scan.kind().to_string();
            let mut name = format!("{base}.csv");
            let mut suffix = 1;
            while used_names.contains(&name) {
                suffix += 1;
                name = format!("{base}_{suffix}.csv");
            }
            used_names.push(name.clone());

            let summary = match scan {
                ScanConfig::Delay { theta1, theta2, max_delay_gammas, points } => {
                    let delays: Vec<f64> = (0..*points)
                        .map(|i| {
                            max_delay_gammas / spec.gamma * i as f64 / (*points as f64 - 1.0)
                        })
                        .collect();
                    let result = delay_scan(
                        &laser,
                        &consts,
                        Vec3::new(theta1.sin(), 0.0, theta1.cos()),
                        Vec3::new(-theta2.sin(), 0.0, theta2.cos()),
                        r0,
                        size,
                        t,
                        scenario.sigma_acc,
                        &delays,
                    )?;
                    let mut csv = String::from("delta_t,raw,normalized\n");
                    for i in 0..delays.len() {
                        csv.push_str(&format!(
                            "{:.12e},{:.12e},{:.12e}\n",
                            result.delays[i], result.raw[i], result.normalized[i]
                        ));
                    }
                    write_file(out_dir, &name, csv.as_bytes())?;
                    json!({
                        "kind": "delay",
                        "file": name,
                        "points": points,
                        "log_slope": result.slope,
                        "expected_slope": -spec.gamma,
                    })
                }
                ScanConfig::Polarization { theta1, theta2, points } => {
                    let d1 = DetectorDirection::new(
                        Vec3::new(theta1.sin(), 0.0, theta1.cos()),
                        r0,
                        size,
                    )?;
                    let d2 = DetectorDirection::new(
                        Vec3::new(-theta2.sin(), 0.0, theta2.cos()),
                        r0,
                        size,
                    )?;
                    let angles: Vec<f64> = (0..*points)
                        .map(|i| std::f64::consts::PI * i as f64 / (*points as f64 - 1.0))
                        .collect();
                    let result = polarization_scan(
                        &laser,
                        &consts,
                        &d1,
                        &d2,
                        t,
                        scenario.sigma_acc,
                        &angles,
                    )?;
                    let mut csv = String::from("angle,parallel,crossed\n");
                    for i in 0..angles.len() {
                        csv.push_str(&format!(
                            "{:.12e},{:.12e},{:.12e}\n",
                            result.angles[i], result.parallel[i], result.crossed[i]
                        ));
                    }
                    write_file(out_dir, &name, csv.as_bytes())?;
                    let crossed_at_zero = result.crossed[0];
                    json!({
                        "kind": "polarization",
                        "file": name,
                        "points": points,
                        "crossed_rate_at_aligned_analyzers": crossed_at_zero,
                    })
                }
                ScanConfig::Angular { half_width, points, samples } => {
                    let angles: Vec<f64> = (0..*points)
                        .map(|i| {
                            -half_width + 2.0 * half_width * i as f64 / (*points as f64 - 1.0)
                        })
                        .collect();
                    let map = angular_map(
                        &laser,
                        &consts,
                        r0,
                        size,
                        &angles,
                        &angles,
                        t,
                        scenario.sigma_acc,
                        *samples,
                        scenario.seed,
                    )?;
                    let mut csv = String::from("angle1,angle2,raw,normalized\n");
                    for (i, &a1) in angles.iter().enumerate() {
                        for (j, &a2) in angles.iter().enumerate() {
                            let idx = i * angles.len() + j;
                            csv.push_str(&format!(
                                "{:.12e},{:.12e},{:.12e},{:.12e}\n",
                                a1, a2, map.raw[idx], map.normalized[idx]
                            ));
                        }
                    }
                    write_file(out_dir, &name, csv.as_bytes())?;
                    let mid = angles.len() / 2;
                    json!({
                        "kind": "angular",
                        "file": name,
                        "points": points,
                        "samples": samples,
                        "marginal_width_at_center": map.row_width(mid),
                    })
                }
                ScanConfig::Spectrum { span_gammas, points } => {
                    let half = span_gammas * spec.gamma / 2.0;
                    let result = pair_spectrum(
                        &spec,
                        spec.omega_tilde - half,
                        spec.omega_tilde + half,
                        *points,
                    )?;
                    let mut csv = String::from("omega,density\n");
                    for i in 0..result.omegas.len() {
                        csv.push_str(&format!(
                            "{:.12e},{:.12e}\n",
                            result.omegas[i], result.values[i]
                        ));
                    }
                    write_file(out_dir, &name, csv.as_bytes())?;
                    json!({
                        "kind": "spectrum",
                        "file": name,
                        "points": points,
                        "fwhm": result.fwhm,
                        "integral": result.integral,
                    })
                }
            };
            files.push(name);
            scan_summaries.push(summary);
        }
    }

    failed |= validations.iter().any(|v| !v.passed);
    let summary = json!({
        "failed": failed,
        "files": files,
        "scans": scan_summaries,
        "seed": scenario.seed,
        "validations": validations.iter().map(|v| json!({
            "detail": v.detail,
            "measured": v.measured,
            "name": v.name,
            "passed": v.passed,
        })).collect::<Vec<_>>(),
        "warnings": warnings,
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    write_file(out_dir, "summary.json", text.as_bytes())?;
    let mut files = files;
    files.push("summary.json".into());

    Ok(RunReport { validations, warnings, files, failed })
}

/// One acceptance check of the self-check suite.
#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub detail: String,
}

/// Self-check report: the full acceptance suite at desk scale.
#[derive(Debug, Clone, Serialize)]
pub struct SelfCheckReport {
    pub items: Vec<CheckItem>,
}

impl SelfCheckReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn to_json(&self) -> String {
        let items: Vec<_> = self
            .items
            .iter()
            .map(|i| {
                json!({
                    "detail": i.detail,
                    "measured": i.measured,
                    "name": i.name,
                    "passed": i.passed,
                })
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&json!({
            "all_passed": self.all_passed(),
            "items": items,
        }))
        .expect("report serializes");
        text.push('\n');
        text
    }
}

fn random_unit(rng: &mut rand_chacha::ChaCha12Rng) -> Vec3<f64> {
    use rand::Rng;
    loop {
        let v = Vec3::new(
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        );
        if v.norm() > 0.1 {
            return v.normalize().unwrap();
        }
    }
}

fn check_medium(gamma: f64, omega_tilde: f64) -> MediumSpec<f64> {
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

fn check_laser(alpha: Complex<f64>, beta: Complex<f64>) -> LaserPair<f64> {
    let pol = Polarization::Jones { alpha, beta };
    let mode = PlaneWaveMode::from_direction(
        &Vec3::unit_z(),
        10.0,
        1.0,
        pol,
        Complex::new(1.0, 0.0),
    )
    .unwrap();
    LaserPair::new(mode, mode, 0.0).unwrap()
}

fn check_analytic_signal() -> CheckItem {
    use rand::Rng;
    let mut worst = 0.0f64;
    let window = 4.0;
    for seed in 0..20u64 {
        let mut rng = derived_rng(seed, "self-check-analytic", 0);
        let modes: Vec<PlaneWaveMode<f64>> = (0..5)
            .map(|_| {
                let m: u32 = rng.gen_range(1..=150);
                let omega = 2.0 * std::f64::consts::PI * m as f64 / window;
                let h = if rng.gen::<bool>() { Helicity::Plus } else { Helicity::Minus };
                PlaneWaveMode::from_direction(
                    &random_unit(&mut rng),
                    omega,
                    1.0,
                    Polarization::Helicity(h),
                    Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                )
                .unwrap()
            })
            .collect();
        let r0 = random_unit(&mut rng).scale(0.37);
        let n = 1024;
        let series: Vec<Complex<f64>> = (0..n)
            .map(|i| rs_vector(&modes, 1.0, &r0, window * i as f64 / n as f64).unwrap().x)
            .collect();
        worst = worst.max(analytic_signal_residual(&series).unwrap());
    }
    CheckItem {
        name: "analytic_signal",
        passed: worst < 1e-10,
        measured: worst,
        detail: "max negative-frequency energy fraction over 20 seeded superpositions (< 1e-10)"
            .into(),
    }
}

fn check_free_space() -> CheckItem {
    let l = 2.0 * std::f64::consts::PI;
    let mode = |k: [f64; 3], amp: Complex<f64>| {
        let kv = Vec3::new(k[0], k[1], k[2]);
        PlaneWaveMode::new(kv, kv.norm(), Polarization::Helicity(Helicity::Plus), amp).unwrap()
    };
    let modes = vec![
        mode([1.0, 2.0, 2.0], Complex::new(0.7, -0.1)),
        mode([2.0, 1.0, 2.0], Complex::new(-0.4, 0.9)),
        mode([2.0, 2.0, 1.0], Complex::new(0.2, 0.3)),
    ];
    let dims = GridDims { nx: 8, ny: 8, nz: 8, nt: 16, lx: l, ly: l, lz: l, t_span: l };
    let grid = FieldGrid::from_modes(&modes, 1.0, dims).unwrap();
    let spectral = free_space_residual(&grid, Helicity::Plus, DerivScheme::Spectral).unwrap();

    let single = mode([1.0, 0.0, 0.0], Complex::new(1.0, 0.0));
    let coarse = GridDims { nx: 16, ny: 4, nz: 4, nt: 16, lx: l, ly: l, lz: l, t_span: 2.0 * l };
    let fine = GridDims { nx: 32, ny: 4, nz: 4, nt: 32, lx: l, ly: l, lz: l, t_span: 2.0 * l };
    let rc = free_space_residual(
        &FieldGrid::from_modes(&[single], 1.0, coarse).unwrap(),
        Helicity::Plus,
        DerivScheme::CentralDifference,
    )
    .unwrap();
    let rf = free_space_residual(
        &FieldGrid::from_modes(&[single], 1.0, fine).unwrap(),
        Helicity::Plus,
        DerivScheme::CentralDifference,
    )
    .unwrap();
    let ratio = rc / rf;
    let passed = spectral < 1e-10 && (3.2..=4.8).contains(&ratio);
    CheckItem {
        name: "free_space_evolution",
        passed,
        measured: spectral,
        detail: format!(
            "spectral residual (< 1e-10) with finite-difference refinement ratio {ratio:.3} (4 ± 20%)"
        ),
    }
}

fn check_ww_decay() -> CheckItem {
    let spec = check_medium(1.0, 100.0);
    let grid = discretize_reservoir(&spec, 401, 40.0).unwrap();
    let series = oracle_decay(&grid, &spec, 3.0, 120).unwrap();
    let fit = fit_decay_rate(&series, 0.5, 3.0).unwrap();
    let err = (fit.gamma_fit - 1.0).abs();
    CheckItem {
        name: "ww_decay_fit",
        passed: err < 0.02,
        measured: fit.gamma_fit,
        detail: "exact-oracle decay rate vs gamma, J=401, bw=40*gamma (within 2%)".into(),
    }
}

fn check_commutator() -> CheckItem {
    let spec = check_medium(1.0, 100.0);
    // maxima over each grid's own validity window set the bound; the
    // J-ordering is checked at a fixed representative time (gamma*t = 1,
    // inside every window), where it is resolvable above sampling noise
    let mut maxes = Vec::new();
    let mut at_unit = Vec::new();
    for j in [101usize, 201, 401] {
        let grid = discretize_reservoir(&spec, j, 40.0).unwrap();
        let window = grid.validity_window();
        let mut worst = 0.0f64;
        for i in 0..=160 {
            let t = window * i as f64 / 160.0;
            worst = worst.max(commutator_defect(t, &grid, &spec).unwrap());
        }
        maxes.push(worst);
        at_unit.push(commutator_defect(1.0, &grid, &spec).unwrap());
    }
    let monotone = at_unit[0] > at_unit[1] && at_unit[1] > at_unit[2];
    let bounded = maxes.iter().all(|&m| m < 1e-2);
    CheckItem {
        name: "commutator_sum_rule",
        passed: bounded && monotone,
        measured: maxes[2],
        detail: format!(
            "max defect over validity window, J=101/201/401: {:.4e}/{:.4e}/{:.4e} (< 1e-2); \
             at gamma*t = 1: {:.6e}/{:.6e}/{:.6e} (decreasing in J); \
             the flat 40*gamma band carries only (2/pi)*atan(40) of the Lorentzian weight, \
             a 1.6e-2 truncation floor, so the bound is not attainable at this bandwidth",
            maxes[0], maxes[1], maxes[2], at_unit[0], at_unit[1], at_unit[2]
        ),
    }
}

fn check_lorentzian_quadrature() -> CheckItem {
    let spec = check_medium(1.0, 100.0);
    let mut worst = 0.0f64;
    for delta in [0.25, 1.0, 2.0, 5.0] {
        let q = crate::pair::lorentzian_exchange_quadrature(delta, &spec, 1.0, 300.0);
        let c = crate::pair::lorentzian_exchange(delta, &spec, 1.0);
        worst = worst.max((q - c).norm() / c.norm());
    }
    CheckItem {
        name: "lorentzian_quadrature",
        passed: worst < 1e-4,
        measured: worst,
        detail: "closed form vs finite-interval quadrature, omega_tilde=100*gamma, gamma*|delta| in [0.25, 5] (< 1e-4)".into(),
    }
}

fn check_delay_slope() -> CheckItem {
    let laser = check_laser(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
    let consts =
        derive_constants(&check_medium(0.1, 1.0), &laser, 1000.0, 1.0).unwrap();
    let delays: Vec<f64> = (0..50).map(|i| i as f64 * 0.6).collect();
    let scan = delay_scan(
        &laser,
        &consts,
        Vec3::new(0.03f64.sin(), 0.0, 0.03f64.cos()),
        Vec3::new(-0.03f64.sin(), 0.0, 0.03f64.cos()),
        500.0,
        1.0,
        600.0,
        0.1,
        &delays,
    )
    .unwrap();
    let rel = (scan.slope + 0.1).abs() / 0.1;
    CheckItem {
        name: "delay_scan_slope",
        passed: rel < 1e-10,
        measured: rel,
        detail: "relative deviation of the 50-point log-rate slope from -gamma (< 1e-10)".into(),
    }
}

fn check_cross_polarization() -> CheckItem {
    use rand::Rng;
    let laser = check_laser(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
    let consts = derive_constants(&check_medium(0.1, 1.0), &laser, 1000.0, 1.0).unwrap();
    let pump = laser.mode1.polarization_vector().unwrap();
    let mut rng = derived_rng(7, "self-check-crossed", 0);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 100 {
        let r1 = random_unit(&mut rng);
        let r2 = random_unit(&mut rng);
        // skip directions nearly parallel to the pump polarization, where
        // the analyzer reference is undefined
        if r1.x.abs() > 0.999 || r2.x.abs() > 0.999 {
            continue;
        }
        count += 1;
        let d1 = DetectorDirection::new(r1, 450.0 + rng.gen::<f64>() * 100.0, 1.0).unwrap();
        let d2 = DetectorDirection::new(r2, 450.0 + rng.gen::<f64>() * 100.0, 1.0).unwrap();
        // wide acceptance: the null is polarization algebra, not geometry
        let amp =
            two_photon_amplitude(&laser, &d1, &d2, 700.0, &consts, 10.0, EvalMode::Stationary)
                .unwrap();
        let a1 = analyzer_vector(&pump, &d1, 0.0).unwrap();
        let a2p = analyzer_vector(&pump, &d2, 0.0).unwrap();
        let a2c = analyzer_vector(&pump, &d2, std::f64::consts::FRAC_PI_2).unwrap();
        let parallel = project_rate(&amp, &a1, &a2p).unwrap();
        let crossed = project_rate(&amp, &a1, &a2c).unwrap();
        worst = worst.max(crossed / parallel);
    }
    CheckItem {
        name: "cross_polarization_null",
        passed: worst <= 1e-24,
        measured: worst,
        detail: "max crossed/parallel analyzer rate for linear pump over 100 random geometries (<= 1e-24)".into(),
    }
}

fn check_angular_width() -> CheckItem {
    let base = check_laser(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0));
    let laser = LaserPair::new(base.mode1, base.mode2, 0.05).unwrap();
    let consts = derive_constants(&check_medium(0.1, 1.0), &laser, 1000.0, 1.0).unwrap();
    let angles: Vec<f64> = (0..81).map(|i| -0.25 + 0.5 * i as f64 / 80.0).collect();
    let map = angular_map(
        &laser, &consts, 500.0, 1.0, &[0.0], &angles, 600.0, 0.01, 100_000, 2024,
    )
    .unwrap();
    let width = map.row_width(0);
    let expected = 0.05 * 2.0f64.sqrt();
    let rel = (width - expected).abs() / expected;
    CheckItem {
        name: "angular_correlation_width",
        passed: rel < 0.15,
        measured: width,
        detail: format!(
            "coincidence marginal width vs beam_spread*sqrt(2) = {expected:.4} (within 15%, 1e5 samples)"
        ),
    }
}

fn check_spectrum_duality() -> CheckItem {
    let spec = check_medium(1.0, 100.0);
    let result = pair_spectrum(&spec, 0.0, 200.0, 2001).unwrap();
    let step = result.omegas[1] - result.omegas[0];
    let fwhm_ok = (result.fwhm - 1.0).abs() < step;
    let mut worst = 0.0f64;
    for delta in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let ft = spectrum_delay_modulus(&spec, delta);
        worst = worst.max((ft - (-delta / 2.0f64).exp()).abs());
    }
    CheckItem {
        name: "spectrum_decay_duality",
        passed: fwhm_ok && worst < 1e-6,
        measured: worst,
        detail: format!(
            "FWHM {:.4} (= gamma within one step {step:.2}) and max |FT modulus - exp(-gamma|delta|/2)| (< 1e-6)",
            result.fwhm
        ),
    }
}

fn check_thermal() -> CheckItem {
    let omega = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_UM_PS * 1332.0e-4;
    let n = thermal_phonon_number(omega, 300.0).unwrap();
    CheckItem {
        name: "thermal_occupation",
        passed: (1.0e-3..=2.5e-3).contains(&n),
        measured: n,
        detail: "Bose occupation of a 1332 cm^-1 vibration at 300 K (in [1.0e-3, 2.5e-3])".into(),
    }
}

fn check_exchange_symmetry() -> CheckItem {
    use rand::Rng;
    let laser = check_laser(Complex::new(0.8, 0.0), Complex::new(0.0, 0.6));
    let consts = derive_constants(&check_medium(0.1, 1.0), &laser, 1000.0, 1.0).unwrap();
    let mut rng = derived_rng(11, "self-check-exchange", 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut arm = || {
            let v = Vec3::new(
                rng.gen::<f64>() * 0.3 - 0.15,
                rng.gen::<f64>() * 0.3 - 0.15,
                1.0,
            )
            .normalize()
            .unwrap();
            DetectorDirection::new(v, 450.0 + rng.gen::<f64>() * 100.0, 1.0).unwrap()
        };
        let d1 = arm();
        let d2 = arm();
        let fwd =
            two_photon_amplitude(&laser, &d1, &d2, 700.0, &consts, 0.1, EvalMode::Stationary)
                .unwrap();
        let rev =
            two_photon_amplitude(&laser, &d2, &d1, 700.0, &consts, 0.1, EvalMode::Stationary)
                .unwrap();
        let diff = tensor_norm(&tensor_add(
            &fwd.tensor(),
            &tensor_scale(&tensor_transpose(&rev.tensor()), Complex::new(-1.0, 0.0)),
        ));
        worst = worst.max(diff / tensor_norm(&fwd.tensor()));
    }
    CheckItem {
        name: "exchange_symmetry",
        passed: worst < 1e-12,
        measured: worst,
        detail: "max relative tensor change under the simultaneous arm/assignment swap, 100 random configurations (< 1e-12)".into(),
    }
}

fn check_determinism() -> CheckItem {
    let run_once = || -> Result<Vec<(String, Vec<u8>)>> {
        let scenario: Scenario = serde_json::from_str(REFERENCE_SCENARIO)?;
        let dir = tempfile::tempdir().map_err(|e| Error::io("tempdir", e))?;
        let report = run_scenario(&scenario, dir.path())?;
        let mut out = Vec::new();
        for f in &report.files {
            let path = dir.path().join(f);
            let bytes = fs::read(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
            out.push((f.clone(), bytes));
        }
        Ok(out)
    };
    match (run_once(), run_once()) {
        (Ok(a), Ok(b)) => {
            let identical = a == b && !a.is_empty();
            CheckItem {
                name: "determinism",
                passed: identical,
                measured: if identical { 0.0 } else { 1.0 },
                detail: format!(
                    "reference scenario run twice: {} artifact files byte-compared",
                    a.len()
                ),
            }
        }
        (Err(e), _) | (_, Err(e)) => CheckItem {
            name: "determinism",
            passed: false,
            measured: f64::NAN,
            detail: format!("reference scenario failed to run: {e}"),
        },
    }
}

/// Runs the full acceptance suite at desk scale.
pub fn self_check() -> SelfCheckReport {
    SelfCheckReport {
        items: vec![
            check_analytic_signal(),
            check_free_space(),
            check_ww_decay(),
            check_commutator(),
            check_lorentzian_quadrature(),
            check_delay_slope(),
            check_cross_polarization(),
            check_angular_width(),
            check_spectrum_duality(),
            check_thermal(),
            check_exchange_symmetry(),
            check_determinism(),
        ],
    }
}
