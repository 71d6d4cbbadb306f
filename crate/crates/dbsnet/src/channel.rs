//! Radio models for both network layers.
//!
//! Access layer (ground node ↔ drone): free-space path loss plus a
//! probabilistic LOS/NLOS excess, with the coverage-disk radius derived
//! by inverting the expected path loss at the maximum tolerable loss.
//!
//! Backhaul layer (station ↔ station): FSO link spectral efficiency
//! from atmospheric attenuation, beam spreading with turbulence, lens
//! capture fraction, and pointing-jitter statistics, gated at `d_max`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::{Error, Result};

/// Speed of light used throughout, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Access-layer path-loss parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessParams {
    /// Drone altitude in meters.
    pub h: f64,
    /// Environment constant of the LOS-probability sigmoid.
    pub alpha: f64,
    /// Environment constant of the LOS-probability sigmoid (per degree).
    pub beta: f64,
    /// Mean excess loss of LOS links, dB.
    pub eta_los: f64,
    /// Mean excess loss of NLOS links, dB.
    pub eta_nlos: f64,
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// Maximum tolerable path loss, dB.
    pub pl_max: f64,
}

impl Default for AccessParams {
    fn default() -> Self {
        // Urban environment constants; see the parameter table in the README.
        AccessParams {
            h: 60.0,
            alpha: 9.61,
            beta: 0.16,
            eta_los: 1.0,
            eta_nlos: 20.0,
            f_c: 2.0e9,
            pl_max: 110.0,
        }
    }
}

impl AccessParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) {
            return Err(Error::Config("access: h must be positive".into()));
        }
        if !(self.f_c > 0.0) {
            return Err(Error::Config("access: f_c must be positive".into()));
        }
        if self.eta_los < 0.0 || self.eta_nlos < self.eta_los {
            return Err(Error::Config(
                "access: require eta_nlos >= eta_los >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// FSO backhaul link parameters.
///
/// All quantities are stored in SI units (meters, watts, radians); file
/// loaders convert from the table units (cm, mW, dBm) on ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsoParams {
    /// Beam waist radius, meters.
    pub beam_waist: f64,
    /// Weather attenuation coefficient, 1/m.
    pub kappa: f64,
    /// Transmit power, watts.
    pub tx_power: f64,
    /// Optical wavelength, meters.
    pub wavelength: f64,
    /// Receiver lens radius, meters.
    pub lens_radius: f64,
    /// Photo-detector responsivity.
    pub responsivity: f64,
    /// Receiver noise power, watts.
    pub noise_power: f64,
    /// Ground refractive-index structure constant, m^(-2/3).
    pub c0_sq: f64,
    /// Lower bound of the geometric-loss shape parameter.
    pub zeta_low: f64,
    /// Upper bound of the geometric-loss shape parameter.
    pub zeta_high: f64,
    /// Position jitter std perpendicular to the beam, meters.
    pub sigma_y: f64,
    /// Position jitter std along the height axis, meters.
    pub sigma_z: f64,
    /// Orientation jitter std around the vertical axis, radians.
    pub sigma_theta: f64,
    /// Orientation jitter std around the horizontal axis, radians.
    pub sigma_phi: f64,
    /// Static misalignment between beam center and lens center, meters.
    pub misalignment: f64,
    /// Maximum usable link distance, meters.
    pub d_max: f64,
    /// Bandwidth scale turning spectral efficiency into a rate, Hz.
    pub bandwidth: f64,
    /// Transceiver altitude used for the turbulence profile, meters.
    pub altitude: f64,
}

impl Default for FsoParams {
    fn default() -> Self {
        FsoParams {
            beam_waist: 0.25e-2,
            kappa: 4.3e-4,
            tx_power: 50e-3,
            wavelength: 1550e-9,
            lens_radius: 0.1,
            responsivity: 0.5,
            noise_power: 10f64.powf((-60.1 - 30.0) / 10.0),
            c0_sq: 1.7e-14,
            zeta_low: 1.0,
            zeta_high: 2.0,
            sigma_y: 0.1,
            sigma_z: 0.1,
            sigma_theta: 1e-3,
            sigma_phi: 1e-3,
            misalignment: 0.05,
            d_max: 3000.0,
            bandwidth: 1e9,
            altitude: 60.0,
        }
    }
}

impl FsoParams {
    /// Jitter figures of a stabilized transceiver (gimbal plus fine
    /// pointing). The default jitter values describe an unstabilized
    /// platform whose pointing loss exceeds the link budget at every
    /// distance, which zeroes all rates; experiment presets use this
    /// profile so that backhaul feasibility is a nontrivial question.
    pub fn stabilized() -> Self {
        FsoParams {
            sigma_y: 0.01,
            sigma_z: 0.01,
            sigma_theta: 1e-5,
            sigma_phi: 1e-5,
            misalignment: 0.01,
            ..FsoParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positives = [
            ("beam_waist", self.beam_waist),
            ("kappa", self.kappa),
            ("tx_power", self.tx_power),
            ("wavelength", self.wavelength),
            ("lens_radius", self.lens_radius),
            ("responsivity", self.responsivity),
            ("noise_power", self.noise_power),
            ("c0_sq", self.c0_sq),
            ("zeta_low", self.zeta_low),
            ("d_max", self.d_max),
            ("bandwidth", self.bandwidth),
            ("altitude", self.altitude),
        ];
        for (name, v) in positives {
            if !(v > 0.0) {
                return Err(Error::Config(format!("fso: {name} must be positive")));
            }
        }
        let nonneg = [
            ("sigma_y", self.sigma_y),
            ("sigma_z", self.sigma_z),
            ("sigma_theta", self.sigma_theta),
            ("sigma_phi", self.sigma_phi),
            ("misalignment", self.misalignment),
        ];
        for (name, v) in nonneg {
            if v < 0.0 {
                return Err(Error::Config(format!("fso: {name} must be nonnegative")));
            }
        }
        if self.zeta_high < self.zeta_low {
            return Err(Error::Config("fso: require zeta_low <= zeta_high".into()));
        }
        Ok(())
    }

    fn zeta(&self) -> f64 {
        0.5 * (self.zeta_low + self.zeta_high)
    }
}

/// Euclidean distance on the ground plane.
pub fn distance_2d(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Euclidean distance in 3D.
pub fn distance_3d(p: [f64; 3], q: [f64; 3]) -> f64 {
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
}

/// LOS probability of the air-to-ground channel.
///
/// The elevation angle is evaluated in degrees (the sigmoid constants
/// are degree-calibrated); an overhead node (`d_2d = 0`) sees 90°.
pub fn p_los(params: &AccessParams, d_2d: f64) -> f64 {
    let omega_deg = if d_2d == 0.0 {
        90.0
    } else {
        (params.h / d_2d).atan().to_degrees()
    };
    1.0 / (1.0 + params.alpha * (-params.beta * (omega_deg - params.alpha)).exp())
}

/// Free-space path loss in dB at distance `d` meters.
pub fn fspl_db(f_c: f64, d: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * f_c * d / SPEED_OF_LIGHT).log10()
}

fn expected_path_loss_unchecked(params: &AccessParams, d_3d: f64, d_2d: f64) -> f64 {
    let p = p_los(params, d_2d);
    fspl_db(params.f_c, d_3d) + p * params.eta_los + (1.0 - p) * params.eta_nlos
}

/// Expected air-to-ground path loss in dB, mixing the LOS and NLOS
/// excess losses by the LOS probability.
pub fn expected_path_loss(params: &AccessParams, d_3d: f64, d_2d: f64) -> Result<f64> {
    if !(d_3d > 0.0) {
        return Err(Error::Validation("expected_path_loss: d_3d must be > 0".into()));
    }
    Ok(expected_path_loss_unchecked(params, d_3d, d_2d))
}

/// Expected path loss at ground distance `d_2d` for a drone at the
/// configured altitude.
pub fn path_loss_at_ground_distance(params: &AccessParams, d_2d: f64) -> f64 {
    let d_3d = (d_2d * d_2d + params.h * params.h).sqrt();
    expected_path_loss_unchecked(params, d_3d, d_2d)
}

/// Coverage-disk radius solved from `pl_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageRadius {
    /// Ground-plane radius in meters.
    pub radius: f64,
    /// Set when `pl_max` is not reached even at `max_radius` and the
    /// radius was clamped there.
    pub clamped: bool,
}

/// Inverts the expected path loss at `pl_max` by bisection.
///
/// The loss is strictly increasing in ground distance at fixed height,
/// so the root is unique. `max_radius` bounds the search (typically the
/// area diagonal); if even that distance stays under `pl_max` the result
/// is clamped and flagged.
pub fn coverage_radius(params: &AccessParams, max_radius: f64) -> Result<CoverageRadius> {
    params.validate()?;
    if !(max_radius > 0.0) {
        return Err(Error::Config("max_radius must be positive".into()));
    }
    let overhead = path_loss_at_ground_distance(params, 0.0);
    if params.pl_max <= overhead {
        return Err(Error::Infeasible(format!(
            "pl_max {} dB is not above the overhead loss {overhead:.3} dB",
            params.pl_max
        )));
    }
    if path_loss_at_ground_distance(params, max_radius) < params.pl_max {
        return Ok(CoverageRadius {
            radius: max_radius,
            clamped: true,
        });
    }
    let (mut lo, mut hi) = (0.0, max_radius);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if path_loss_at_ground_distance(params, mid) < params.pl_max {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    Ok(CoverageRadius {
        radius: 0.5 * (lo + hi),
        clamped: false,
    })
}

/// Strict-inequality coverage test: a node at ground distance `d_2d`
/// is covered iff `d_2d < r_a`.
pub fn coverage_indicator(d_2d: f64, r_a: f64) -> bool {
    d_2d < r_a
}

/// Atmospheric attenuation factor over distance `d`.
pub fn atmospheric_loss(kappa: f64, d: f64) -> f64 {
    10f64.powf(-kappa * d / 10.0)
}

/// Beam radius in meters at distance `d`, including turbulence-driven
/// spreading through the coherence length.
pub fn beam_width(params: &FsoParams, d: f64) -> f64 {
    let k = 2.0 * std::f64::consts::PI / params.wavelength;
    let cn_sq = params.c0_sq * (-params.altitude / 100.0).exp();
    let rho = (0.55 * cn_sq * k * k * d).powf(-3.0 / 5.0);
    let w0 = params.beam_waist;
    let diff = params.wavelength * d / (std::f64::consts::PI * w0 * w0);
    w0 * (1.0 + (1.0 + 2.0 * w0 * w0 / (rho * rho)) * diff * diff).sqrt()
}

/// Fraction of optical power captured by the lens for a perfectly
/// aligned beam of width `omega_d`.
pub fn capture_fraction(lens_radius: f64, omega_d: f64) -> f64 {
    let v1 = lens_radius / omega_d * (std::f64::consts::PI / 2.0).sqrt();
    erf(v1).powi(2)
}

/// Geometric and misalignment loss at distance `d` for the static
/// misalignment configured in `params`.
pub fn geometric_misalignment_loss(params: &FsoParams, d: f64) -> f64 {
    let omega_d = beam_width(params, d);
    let a0 = capture_fraction(params.lens_radius, omega_d);
    let u = params.misalignment;
    a0 * (-2.0 * u * u / (params.zeta() * omega_d * omega_d)).exp()
}

/// Achievable FSO rate in Mbps over a link of length `d` meters.
///
/// Spectral efficiency from the ergodic-capacity bound under pointing
/// jitter, scaled by the configured bandwidth; zero at or beyond
/// `d_max` and clamped at zero when jitter losses exceed the budget.
pub fn fso_rate(params: &FsoParams, d: f64) -> f64 {
    assert!(d > 0.0, "fso_rate requires d > 0");
    if d >= params.d_max {
        return 0.0;
    }
    let h_p = atmospheric_loss(params.kappa, d);
    let omega_d = beam_width(params, d);
    let a0 = capture_fraction(params.lens_radius, omega_d);
    let zeta = params.zeta();
    let lambda1 = params.sigma_y.powi(2) + d * d * params.sigma_theta.powi(2);
    let lambda2 = params.sigma_z.powi(2) + d * d * params.sigma_phi.powi(2);
    let snr = params.tx_power.powi(2) / params.noise_power;
    let log_arg =
        std::f64::consts::E / (2.0 * std::f64::consts::PI)
            * params.responsivity.powi(2)
            * h_p
            * h_p
            * snr
            * a0
            * a0;
    let spectral = 0.5 * log_arg.log2()
        - 2.0 / (zeta * omega_d * omega_d * std::f64::consts::LN_2) * (lambda1 + lambda2);
    (spectral.max(0.0) * params.bandwidth) / 1e6
}
