//! Mean-field propagation of the four classical amplitudes over ζ.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ClassicalState, Interaction, Mode, SystemParams};
use crate::ode::rk4_step;

/// Allowed drift of u_s² + v_s² + u_p² + v_p² away from one.
pub const CONSERVATION_TOL: f64 = 1e-9;

/// Default integration step in ζ (2⁻¹²).
pub const DEFAULT_STEP: f64 = 1.0 / 4096.0;

/// Continuously accumulated phases (θ_s, θ_p, φ_s, φ_p). NaN marks a phase
/// that is undefined because its amplitude vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnwrappedPhases {
    pub theta_s: f64,
    pub theta_p: f64,
    pub phi_s: f64,
    pub phi_p: f64,
}

impl UnwrappedPhases {
    /// Δθ = θ_p − 2θ_s.
    pub fn delta_theta(&self) -> f64 {
        self.theta_p - 2.0 * self.theta_s
    }

    /// Δφ = φ_p − 2φ_s.
    pub fn delta_phi(&self) -> f64 {
        self.phi_p - 2.0 * self.phi_s
    }
}

/// Tracks the unwrapped phase of each amplitude step by step.
///
/// The increment arg(a_new · conj(a_old)) is exact as long as the phase moves
/// by less than π per step, which holds by a wide margin on any usable grid.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PhaseTracker {
    prev: [Complex64; 4],
    phase: [f64; 4],
}

impl PhaseTracker {
    pub(crate) fn new(state: &ClassicalState) -> Self {
        let prev = Mode::ALL.map(|m| state.amplitude(m));
        let phase = prev.map(|a| {
            if a.norm_sqr() > 0.0 {
                a.arg()
            } else {
                f64::NAN
            }
        });
        PhaseTracker { prev, phase }
    }

    pub(crate) fn advance(&mut self, state: &ClassicalState) {
        for (k, m) in Mode::ALL.into_iter().enumerate() {
            let a = state.amplitude(m);
            if a.norm_sqr() == 0.0 {
                self.phase[k] = f64::NAN;
            } else if self.phase[k].is_nan() {
                self.phase[k] = a.arg();
            } else {
                self.phase[k] += (a * self.prev[k].conj()).arg();
            }
            self.prev[k] = a;
        }
    }

    pub(crate) fn phases(&self) -> UnwrappedPhases {
        UnwrappedPhases {
            theta_s: self.phase[Mode::SignalA.slot()],
            theta_p: self.phase[Mode::PumpA.slot()],
            phi_s: self.phase[Mode::SignalB.slot()],
            phi_p: self.phase[Mode::PumpB.slot()],
        }
    }
}

/// The classical trajectory on a uniform ζ grid, one point per step.
#[derive(Clone, Debug)]
pub struct ClassicalTrajectory {
    step: f64,
    zetas: Vec<f64>,
    states: Vec<ClassicalState>,
    phases: Vec<UnwrappedPhases>,
    max_conservation_drift: f64,
}

impl ClassicalTrajectory {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn zetas(&self) -> &[f64] {
        &self.zetas
    }

    pub fn states(&self) -> &[ClassicalState] {
        &self.states
    }

    pub fn phases(&self) -> &[UnwrappedPhases] {
        &self.phases
    }

    pub fn last(&self) -> &ClassicalState {
        self.states
            .last()
            .expect("trajectory has at least two points")
    }

    pub fn max_conservation_drift(&self) -> f64 {
        self.max_conservation_drift
    }

    /// Normalized power series of one mode (u_s², u_p², v_s² or v_p²).
    pub fn power_series(&self, mode: Mode) -> Vec<f64> {
        self.states.iter().map(|s| s.power(mode)).collect()
    }

    /// Largest difference between waveguide A and B observables, amplitudes
    /// and (where defined) unwrapped phases.
    pub fn mirror_defect(&self) -> f64 {
        let amp = self
            .states
            .iter()
            .flat_map(|s| {
                [
                    (s.signal_a.norm() - s.signal_b.norm()).abs(),
                    (s.pump_a.norm() - s.pump_b.norm()).abs(),
                ]
            })
            .fold(0.0, f64::max);
        let phase = self
            .phases
            .iter()
            .flat_map(|p| [(p.theta_s - p.phi_s).abs(), (p.theta_p - p.phi_p).abs()])
            .filter(|d| !d.is_nan())
            .fold(0.0, f64::max);
        amp.max(phase)
    }
}

/// Integrates the classical equations from the launch conditions of `params`
/// up to `zeta_max` in `steps` uniform RK4 steps.
pub fn integrate_classical(
    params: &SystemParams,
    zeta_max: f64,
    steps: usize,
) -> Result<ClassicalTrajectory> {
    integrate_classical_with(params, zeta_max, steps, Interaction::Full)
}

pub fn integrate_classical_with(
    params: &SystemParams,
    zeta_max: f64,
    steps: usize,
    interaction: Interaction,
) -> Result<ClassicalTrajectory> {
    check_grid(zeta_max, steps)?;
    let kappa = params.kappa();
    let h = zeta_max / steps as f64;

    let mut state = ClassicalState::initial(params);
    let mut tracker = PhaseTracker::new(&state);
    let mut zetas = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut phases = Vec::with_capacity(steps + 1);
    let mut max_drift = (state.conserved_sum() - 1.0).abs();

    zetas.push(0.0);
    states.push(state);
    phases.push(tracker.phases());

    for n in 1..=steps {
        state = rk4_step(&state, h, |s| s.derivative(kappa, interaction));
        let zeta = n as f64 * h;
        let drift = (state.conserved_sum() - 1.0).abs();
        if !(drift <= CONSERVATION_TOL) {
            return Err(Error::IntegrationFailure {
                zeta,
                what: "power conservation violated",
                defect: drift,
            });
        }
        max_drift = max_drift.max(drift);
        tracker.advance(&state);
        zetas.push(zeta);
        states.push(state);
        phases.push(tracker.phases());
    }

    Ok(ClassicalTrajectory {
        step: h,
        zetas,
        states,
        phases,
        max_conservation_drift: max_drift,
    })
}

pub(crate) fn check_grid(zeta_max: f64, steps: usize) -> Result<()> {
    if !(zeta_max.is_finite() && zeta_max > 0.0) {
        return Err(Error::Domain(format!(
            "zeta_max must be positive, got {zeta_max}"
        )));
    }
    if steps < 2 {
        return Err(Error::Domain(format!("need at least 2 steps, got {steps}")));
    }
    Ok(())
}

/// One sample of the classical phase mismatch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseMismatch {
    pub zeta: f64,
    /// θ_p − 2θ_s, NaN where a waveguide-A amplitude vanishes.
    pub delta_theta: f64,
    /// φ_p − 2φ_s, NaN where a waveguide-B amplitude vanishes.
    pub delta_phi: f64,
}

pub fn phase_mismatch_series(traj: &ClassicalTrajectory) -> Vec<PhaseMismatch> {
    traj.zetas
        .iter()
        .zip(&traj.phases)
        .map(|(&zeta, p)| PhaseMismatch {
            zeta,
            delta_theta: p.delta_theta(),
            delta_phi: p.delta_phi(),
        })
        .collect()
}

/// ζ positions where Δθ passes through a multiple of π, linearly
/// interpolated between grid points. Gaps (NaN) are skipped.
pub fn pi_crossings(series: &[PhaseMismatch]) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let mut out = Vec::new();
    for w in series.windows(2) {
        let (a, b) = (w[0].delta_theta / pi, w[1].delta_theta / pi);
        if a.is_nan() || b.is_nan() {
            continue;
        }
        // integers strictly past a and up to (and including) b
        let (first, last) = if a < b {
            (a.floor() + 1.0, b.floor())
        } else {
            (b.ceil(), a.ceil() - 1.0)
        };
        let mut n = first;
        while n <= last {
            let t = (n - a) / (b - a);
            out.push(w[0].zeta + t * (w[1].zeta - w[0].zeta));
            n += 1.0;
        }
    }
    out
}
