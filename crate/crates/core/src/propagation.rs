//! Propagator S(ζ) of the linearized quadrature dynamics and transport of the
//! covariance matrix V(ζ) = S V(0) Sᵀ.

use std::ops::{Add, Mul};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::classical::{check_grid, PhaseTracker, UnwrappedPhases, CONSERVATION_TOL};
use crate::error::{Error, Result};
use crate::model::{
    drift_matrix_with, omega8, symplectic_form, ClassicalState, Interaction, Matrix8, SystemParams,
};
use crate::ode::rk4_step;

/// Allowed ‖S Ω Sᵀ − Ω‖_max.
pub const SYMPLECTIC_TOL: f64 = 1e-8;

/// Stored samples per unit ζ when the stride is chosen automatically.
pub const DEFAULT_SAMPLES_PER_UNIT: f64 = 256.0;

/// Integration grid and storage stride.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationConfig {
    pub zeta_max: f64,
    pub steps: usize,
    /// Keep every `store_every`-th step (the last step is always kept).
    pub store_every: usize,
    pub interaction: Interaction,
}

impl PropagationConfig {
    /// `steps` uniform steps over `[0, zeta_max]`, storing about 256 samples
    /// per unit ζ.
    pub fn new(zeta_max: f64, steps: usize) -> Self {
        let per_unit = steps as f64 / zeta_max;
        let store_every = (per_unit / DEFAULT_SAMPLES_PER_UNIT).round().max(1.0) as usize;
        PropagationConfig {
            zeta_max,
            steps,
            store_every,
            interaction: Interaction::Full,
        }
    }

    pub fn store_every(mut self, stride: usize) -> Self {
        self.store_every = stride.max(1);
        self
    }

    pub fn interaction(mut self, interaction: Interaction) -> Self {
        self.interaction = interaction;
        self
    }
}

/// State of the system at one stored grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub zeta: f64,
    pub classical: ClassicalState,
    pub phases: UnwrappedPhases,
    pub propagator: Matrix8,
    pub covariance: Matrix8,
}

impl Sample {
    pub fn symplectic_defect(&self) -> f64 {
        symplectic_defect(&self.propagator)
    }
}

#[derive(Clone, Debug)]
pub struct PropagatedState {
    step: f64,
    zeta_max: f64,
    samples: Vec<Sample>,
    max_conservation_drift: f64,
    max_symplectic_defect: f64,
}

impl PropagatedState {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn zeta_max(&self) -> f64 {
        self.zeta_max
    }

    pub fn max_conservation_drift(&self) -> f64 {
        self.max_conservation_drift
    }

    pub fn max_symplectic_defect(&self) -> f64 {
        self.max_symplectic_defect
    }

    /// The initial covariance, shot noise I/2.
    pub fn initial_covariance() -> Matrix8 {
        Matrix8::identity() * 0.5
    }

    pub fn sample_at(&self, zeta: f64) -> Result<&Sample> {
        let tol = 1e-9 * self.zeta_max.max(1.0);
        if !(zeta >= -tol && zeta <= self.zeta_max + tol) {
            return Err(Error::Domain(format!(
                "zeta = {zeta} outside the propagated range [0, {}]",
                self.zeta_max
            )));
        }
        let pos = self.samples.partition_point(|s| s.zeta < zeta);
        let best = [pos.saturating_sub(1), pos.min(self.samples.len() - 1)]
            .into_iter()
            .min_by(|&a, &b| {
                (self.samples[a].zeta - zeta)
                    .abs()
                    .total_cmp(&(self.samples[b].zeta - zeta).abs())
            })
            .expect("at least one sample");
        Ok(&self.samples[best])
    }
}

/// Covariance at the stored grid point nearest to `zeta`.
pub fn covariance_at(state: &PropagatedState, zeta: f64) -> Result<Matrix8> {
    state.sample_at(zeta).map(|s| s.covariance)
}

pub fn symplectic_defect(s: &Matrix8) -> f64 {
    let omega = omega8();
    (s * omega * s.transpose() - omega).amax()
}

#[derive(Clone, Copy)]
struct Joint {
    classical: ClassicalState,
    propagator: Matrix8,
}

impl Add for Joint {
    type Output = Joint;

    fn add(self, rhs: Joint) -> Joint {
        Joint {
            classical: self.classical + rhs.classical,
            propagator: self.propagator + rhs.propagator,
        }
    }
}

impl Mul<f64> for Joint {
    type Output = Joint;

    fn mul(self, h: f64) -> Joint {
        Joint {
            classical: self.classical * h,
            propagator: self.propagator * h,
        }
    }
}

/// Integrates dS/dζ = Δ(ζ)·S jointly with the classical fields, from S(0) = I,
/// with the default storage stride.
pub fn integrate_propagator(
    params: &SystemParams,
    zeta_max: f64,
    steps: usize,
) -> Result<PropagatedState> {
    integrate_propagator_with(params, &PropagationConfig::new(zeta_max, steps))
}

pub fn integrate_propagator_with(
    params: &SystemParams,
    config: &PropagationConfig,
) -> Result<PropagatedState> {
    check_grid(config.zeta_max, config.steps)?;
    let kappa = params.kappa();
    let interaction = config.interaction;
    let h = config.zeta_max / config.steps as f64;
    let stride = config.store_every.max(1);
    let v0 = PropagatedState::initial_covariance();

    let mut y = Joint {
        classical: ClassicalState::initial(params),
        propagator: Matrix8::identity(),
    };
    let mut tracker = PhaseTracker::new(&y.classical);
    let mut samples = Vec::with_capacity(config.steps / stride + 2);
    let mut max_drift = (y.classical.conserved_sum() - 1.0).abs();
    let mut max_defect = 0.0f64;

    samples.push(Sample {
        zeta: 0.0,
        classical: y.classical,
        phases: tracker.phases(),
        propagator: y.propagator,
        covariance: v0,
    });

    let rhs = |j: &Joint| Joint {
        classical: j.classical.derivative(kappa, interaction),
        propagator: drift_matrix_with(&j.classical, kappa, interaction).0 * j.propagator,
    };

    for n in 1..=config.steps {
        y = rk4_step(&y, h, rhs);
        let zeta = n as f64 * h;
        let drift = (y.classical.conserved_sum() - 1.0).abs();
        if !(drift <= CONSERVATION_TOL) {
            return Err(Error::IntegrationFailure {
                zeta,
                what: "power conservation violated",
                defect: drift,
            });
        }
        max_drift = max_drift.max(drift);
        tracker.advance(&y.classical);

        if n % stride == 0 || n == config.steps {
            let defect = symplectic_defect(&y.propagator);
            if !(defect <= SYMPLECTIC_TOL) {
                return Err(Error::IntegrationFailure {
                    zeta,
                    what: "propagator lost symplecticity",
                    defect,
                });
            }
            max_defect = max_defect.max(defect);
            let s = y.propagator;
            let mut v = s * v0 * s.transpose();
            // congruence is symmetric in exact arithmetic
            v = (v + v.transpose()) * 0.5;
            samples.push(Sample {
                zeta,
                classical: y.classical,
                phases: tracker.phases(),
                propagator: s,
                covariance: v,
            });
        }
    }

    Ok(PropagatedState {
        step: h,
        zeta_max: config.zeta_max,
        samples,
        max_conservation_drift: max_drift,
        max_symplectic_defect: max_defect,
    })
}

/// Bona fide checks on a covariance matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Physicality {
    /// Smallest eigenvalue of the Hermitian matrix V + iΩ/2; ≥ 0 for a
    /// physical state.
    pub min_heisenberg_eigenvalue: f64,
    /// Gaussian purity 1/√det(2V).
    pub purity: f64,
    /// det(2V), one for a pure state.
    pub det_2v: f64,
    /// max |V − Vᵀ|.
    pub symmetry_defect: f64,
}

pub fn physicality_report(v: &DMatrix<f64>) -> Physicality {
    let n = v.nrows();
    let omega = symplectic_form(n / 2);
    let h = DMatrix::from_fn(n, n, |i, j| Complex64::new(v[(i, j)], 0.5 * omega[(i, j)]));
    let min_eig = SymmetricEigen::new(h).eigenvalues.min();
    let det_2v = (v * 2.0).determinant();
    Physicality {
        min_heisenberg_eigenvalue: min_eig,
        purity: 1.0 / det_2v.sqrt(),
        det_2v,
        symmetry_defect: (v - v.transpose()).amax(),
    }
}

pub fn physicality_report8(v: &Matrix8) -> Physicality {
    physicality_report(&DMatrix::from_column_slice(8, 8, v.as_slice()))
}
