//! Closed-form results in the undepleted-pump approximation.
//!
//! With constant pumps of equal amplitude the signal modes obey a linear
//! Bogoliubov transformation whose period is twice the beat length
//! L_ab = π / (2√(C² − 4η²)), η = g·|α_p|. Everything here is in whatever
//! length unit `coupling` and `eta` share: mm⁻¹ for physical parameters, or
//! the normalized ζ units via [`UndepletedParams::normalized`].
//!
//! In ζ units C becomes κ and a pump amplitude u_p gives η̃ = u_p / 2; for
//! the vacuum-seeded launch u_p = 1/√2, so η̃ = 1/(2√2) and the normalized
//! beat length is L̃_ab = π / (2√(κ² − 1/2)). For example κ = 1.13 gives
//! L̃_ab ≈ 1.7821, i.e. ≈ 25.17 mm at 14.125 mm per unit ζ.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::model::SystemParams;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UndepletedParams {
    coupling: f64,
    eta: f64,
    beat_length: f64,
}

impl UndepletedParams {
    pub fn new(coupling: f64, eta: f64) -> Result<Self> {
        if !(coupling.is_finite() && coupling > 0.0) || !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::Domain(format!(
                "need coupling > 0 and eta >= 0, got C = {coupling}, eta = {eta}"
            )));
        }
        if coupling <= 2.0 * eta {
            return Err(Error::UnsupportedRegime { coupling, eta });
        }
        let beat_length = PI / (2.0 * (coupling * coupling - 4.0 * eta * eta).sqrt());
        Ok(UndepletedParams {
            coupling,
            eta,
            beat_length,
        })
    }

    /// Normalized units for a vacuum-seeded launch: C → κ, η → 1/(2√2).
    pub fn normalized(kappa: f64) -> Result<Self> {
        Self::new(kappa, normalized_eta(std::f64::consts::FRAC_1_SQRT_2))
    }

    /// Physical units (mm) from the system parameters: η = g·√(P/2)·u_p(0).
    pub fn from_system(params: &SystemParams) -> Result<Self> {
        let r = params.power_ratio();
        let u_p = (1.0 / (1.0 + r)).sqrt() / std::f64::consts::SQRT_2;
        let pump_amplitude = (params.total_power() / 2.0).sqrt() * u_p;
        Self::new(params.coupling(), params.nonlinearity() * pump_amplitude)
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn beat_length(&self) -> f64 {
        self.beat_length
    }

    fn angle(&self, z: f64) -> f64 {
        PI * z / (2.0 * self.beat_length)
    }

    /// (2L_ab/π)·sin(πz/2L_ab), the amplitude of the coupled terms.
    fn reach(&self, z: f64) -> f64 {
        2.0 * self.beat_length / PI * self.angle(z).sin()
    }
}

/// Nonlinear rate in ζ units for a pump of normalized amplitude `u_p`.
pub fn normalized_eta(u_p: f64) -> f64 {
    u_p / 2.0
}

/// L̃_ab = π / (2√(κ² − 1/2)).
pub fn normalized_beat_length(kappa: f64) -> f64 {
    PI / (2.0 * (kappa * kappa - 0.5).sqrt())
}

/// Quadrature form of the undepleted signal solution, acting on
/// (X_sA, Y_sA, X_sB, Y_sB) at the input and returning them at `z`.
pub fn signal_transform(z: f64, p: &UndepletedParams) -> Result<Matrix4<f64>> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("z must be non-negative, got {z}")));
    }
    let c = p.angle(z).cos();
    let s = p.reach(z);
    let squeeze = 2.0 * p.eta * s;
    let link = p.coupling * s;
    #[rustfmt::skip]
    let t = Matrix4::new(
        c,       squeeze, 0.0,     -link,
        squeeze, c,       link,    0.0,
        0.0,     -link,   c,       squeeze,
        link,    0.0,     squeeze, c,
    );
    Ok(t)
}

/// Mean signal photon number per waveguide, (4ηL_ab/π)²·sin²(πz/2L_ab).
pub fn photon_number(z: f64, p: &UndepletedParams) -> f64 {
    let amp = 4.0 * p.eta * p.beat_length / PI;
    let s = p.angle(z).sin();
    amp * amp * s * s
}

/// Photon number of an isolated waveguide (C = 0): sinh²(2ηz).
pub fn uncoupled_photon_number(z: f64, eta: f64) -> f64 {
    (2.0 * eta * z).sinh().powi(2)
}

/// σ(z) = √(1 + ((C/η)·N_s(z))²) / 2.
pub fn sigma(z: f64, p: &UndepletedParams) -> f64 {
    if p.eta == 0.0 {
        return 0.5;
    }
    let x = p.coupling / p.eta * photon_number(z, p);
    (1.0 + x * x).sqrt() / 2.0
}

/// Logarithmic negativity of the signal pair,
/// E_N = −2·log₂(√(σ + 1/2) − √(σ − 1/2)).
pub fn analytic_logneg(z: f64, p: &UndepletedParams) -> f64 {
    let sg = sigma(z, p);
    let nu = (sg + 0.5).sqrt() - (sg - 0.5).max(0.0).sqrt();
    (-2.0 * nu.log2()).max(0.0)
}

fn tan_stretch(p: &UndepletedParams) -> f64 {
    ((p.coupling + 2.0 * p.eta) / (p.coupling - 2.0 * p.eta)).sqrt()
}

/// Principal-value cascaded phase mismatch
/// −2·arctan(√((C+2η)/(C−2η))·tan(πz/2L_ab)).
pub fn cascaded_phase_principal(z: f64, p: &UndepletedParams) -> f64 {
    -2.0 * (tan_stretch(p) * p.angle(z).tan()).atan()
}

/// Continuous branch of the cascaded phase mismatch; decreases through
/// −π at z = L_ab and −2π at z = 2L_ab.
pub fn cascaded_phase(z: f64, p: &UndepletedParams) -> f64 {
    let x = p.angle(z);
    let w = (tan_stretch(p) * x.sin()).atan2(x.cos());
    // arctan(k·tan x) stays within π/2 of x, which selects the branch
    let unwrapped = w + 2.0 * PI * ((x - w) / (2.0 * PI)).round();
    -2.0 * unwrapped
}

/// Signal cross-covariances (V(X_sA, X_sB), V(Y_sA, Y_sB)) in the undepleted
/// approximation, ∓(2^{3/2}·κ·L̃²/π²)·sin²(πζ/2L̃).
pub fn undepleted_covariance_elements(zeta: f64, kappa: f64) -> (f64, f64) {
    let l = normalized_beat_length(kappa);
    let s = (FRAC_PI_2 * zeta / l).sin();
    let v = -(2.0f64.powf(1.5) * kappa * l * l / (PI * PI)) * s * s;
    (v, -v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{omega8, InputPhases};
    use approx::assert_relative_eq;
    use nalgebra::Matrix4;

    fn omega4() -> Matrix4<f64> {
        omega8().fixed_view::<4, 4>(0, 0).into_owned()
    }

    fn physical() -> UndepletedParams {
        let sp = SystemParams::new(0.08, 0.0025, 1.13, 1e-20, InputPhases::default()).unwrap();
        UndepletedParams::from_system(&sp).unwrap()
    }

    #[test]
    fn regime_checks() {
        assert!(matches!(
            UndepletedParams::new(0.1, 0.05),
            Err(Error::UnsupportedRegime { .. })
        ));
        assert!(UndepletedParams::new(0.0, 0.0).is_err());
        assert!(UndepletedParams::new(0.1, -0.01).is_err());
    }

    #[test]
    fn normalized_and_physical_beat_lengths_agree() {
        let sp = SystemParams::new(0.08, 0.0025, 1.13, 1e-20, InputPhases::default()).unwrap();
        let phys = UndepletedParams::from_system(&sp).unwrap();
        let norm = UndepletedParams::normalized(1.13).unwrap();
        assert_relative_eq!(
            norm.beat_length(),
            normalized_beat_length(1.13),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            sp.z_of_zeta(norm.beat_length()),
            phys.beat_length(),
            max_relative = 1e-9
        );
        assert!((phys.beat_length() - 25.17).abs() < 0.01);
    }

    #[test]
    fn transform_at_origin_is_identity() {
        assert_eq!(
            signal_transform(0.0, &physical()).unwrap(),
            Matrix4::identity()
        );
        assert!(signal_transform(-1.0, &physical()).is_err());
    }

    #[test]
    fn linear_coupler_swaps_at_beat_length() {
        let p = UndepletedParams::new(0.08, 0.0).unwrap();
        assert_relative_eq!(p.beat_length(), PI / (2.0 * 0.08), max_relative = 1e-15);
        let t = signal_transform(p.beat_length(), &p).unwrap();
        #[rustfmt::skip]
        let swap = Matrix4::new(
            0.0, 0.0, 0.0, -1.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, -1.0, 0.0, 0.0,
            1.0, 0.0, 0.0, 0.0,
        );
        assert!((t - swap).amax() < 1e-14);
    }

    #[test]
    fn vacuum_restored_at_twice_beat_length() {
        let p = physical();
        let t = signal_transform(2.0 * p.beat_length(), &p).unwrap();
        let v = t * t.transpose() * 0.5;
        assert!((v - Matrix4::identity() * 0.5).amax() < 1e-13);
    }

    #[test]
    fn transform_is_symplectic() {
        let p = physical();
        let om = omega4();
        for k in 0..50 {
            let z = k as f64 * 1.3;
            let t = signal_transform(z, &p).unwrap();
            assert!((t * om * t.transpose() - om).amax() < 1e-12);
        }
    }

    #[test]
    fn photon_number_period_and_peaks() {
        let p = physical();
        let l = p.beat_length();
        let peak = (4.0 * p.eta() * l / PI).powi(2);
        for n in 0..4 {
            assert!(photon_number(2.0 * n as f64 * l, &p) < 1e-20);
            assert_relative_eq!(
                photon_number((2 * n + 1) as f64 * l, &p),
                peak,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn photon_number_matches_transformed_vacuum() {
        let p = physical();
        for z in [3.0, 10.0, 17.0, 25.0] {
            let t = signal_transform(z, &p).unwrap();
            let v = t * t.transpose() * 0.5;
            let n = (v[(0, 0)] + v[(1, 1)] - 1.0) / 2.0;
            assert_relative_eq!(n, photon_number(z, &p), max_relative = 1e-12);
        }
    }

    #[test]
    fn uncoupled_branch() {
        assert_eq!(uncoupled_photon_number(0.0, 0.3), 0.0);
        assert_relative_eq!(uncoupled_photon_number(2.0, 0.25), 1.0f64.sinh().powi(2));
    }

    #[test]
    fn logneg_zeros_and_peak() {
        let p = physical();
        assert_eq!(analytic_logneg(0.0, &p), 0.0);
        assert!(analytic_logneg(2.0 * p.beat_length(), &p) < 1e-8);
        let peak = (0..2000)
            .map(|k| analytic_logneg(k as f64 * 0.05, &p))
            .fold(0.0, f64::max);
        assert!((1.8..=2.6).contains(&peak), "peak {peak}");
    }

    #[test]
    fn cascaded_phase_at_beat_lengths() {
        let p = physical();
        let l = p.beat_length();
        let two_pi = 2.0 * PI;
        assert_eq!(cascaded_phase(0.0, &p), 0.0);
        assert_relative_eq!(cascaded_phase(l, &p).rem_euclid(two_pi), PI, epsilon = 1e-9);
        let at_two = cascaded_phase(2.0 * l, &p).rem_euclid(two_pi);
        assert!(at_two.min(two_pi - at_two) < 1e-9);
        assert_relative_eq!(cascaded_phase(2.0 * l, &p), -two_pi, epsilon = 1e-9);
    }

    #[test]
    fn cascaded_phase_monotone_and_matches_principal() {
        let p = UndepletedParams::normalized(1.13).unwrap();
        let l = p.beat_length();
        let mut prev = cascaded_phase(0.0, &p);
        for k in 1..2000 {
            let z = 2.0 * l * k as f64 / 2000.0;
            let v = cascaded_phase(z, &p);
            assert!(v < prev);
            let diff = (v - cascaded_phase_principal(z, &p)) / (2.0 * PI);
            assert!((diff - diff.round()).abs() < 1e-9);
            prev = v;
        }
    }

    #[test]
    fn covariance_elements_antisymmetric() {
        assert_eq!(undepleted_covariance_elements(0.0, 1.13), (0.0, -0.0));
        let l = normalized_beat_length(1.13);
        let (x, y) = undepleted_covariance_elements(l, 1.13);
        let expect = 2.0f64.powf(1.5) * 1.13 * l * l / (PI * PI);
        assert_relative_eq!(x, -expect, max_relative = 1e-14);
        assert_relative_eq!(y, expect, max_relative = 1e-14);
    }

    #[test]
    fn covariance_elements_match_transform() {
        let p = UndepletedParams::normalized(1.13).unwrap();
        for zeta in [0.4, 1.0, 1.78, 3.1] {
            let t = signal_transform(zeta, &p).unwrap();
            let v = t * t.transpose() * 0.5;
            let (x, y) = undepleted_covariance_elements(zeta, 1.13);
            assert_relative_eq!(v[(0, 2)], x, epsilon = 1e-13);
            assert_relative_eq!(v[(1, 3)], y, epsilon = 1e-13);
        }
    }
}
