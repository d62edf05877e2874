//! Domain types shared by every stage: mode ordering, the symplectic form,
//! physical parameters and the classical mean fields, plus assembly of the
//! linearized drift matrix.

use std::fmt;
use std::ops::{Add, Mul};

use nalgebra::{DMatrix, SMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real 8×8 matrix over the quadrature vector of the four modes.
pub type Matrix8 = SMatrix<f64, 8, 8>;

/// One of the four optical modes of the coupler.
///
/// The quadrature vector is ξ = (X_sA, Y_sA, X_pA, Y_pA, X_sB, Y_sB, X_pB, Y_pB);
/// every 8×8 matrix in the crate is indexed through [`Mode::x`] / [`Mode::y`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    SignalA,
    PumpA,
    SignalB,
    PumpB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quadrature {
    X,
    Y,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::SignalA, Mode::PumpA, Mode::SignalB, Mode::PumpB];

    /// Position of the mode in the canonical ordering.
    pub const fn slot(self) -> usize {
        match self {
            Mode::SignalA => 0,
            Mode::PumpA => 1,
            Mode::SignalB => 2,
            Mode::PumpB => 3,
        }
    }

    pub const fn x(self) -> usize {
        2 * self.slot()
    }

    pub const fn y(self) -> usize {
        2 * self.slot() + 1
    }

    pub const fn quadrature(self, q: Quadrature) -> usize {
        match q {
            Quadrature::X => self.x(),
            Quadrature::Y => self.y(),
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Mode::SignalA => "sA",
            Mode::PumpA => "pA",
            Mode::SignalB => "sB",
            Mode::PumpB => "pB",
        }
    }

    pub fn from_name(name: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == name)
    }

    /// The same field in the other waveguide.
    pub const fn mirror(self) -> Mode {
        match self {
            Mode::SignalA => Mode::SignalB,
            Mode::PumpA => Mode::PumpB,
            Mode::SignalB => Mode::SignalA,
            Mode::PumpB => Mode::PumpA,
        }
    }

    const fn bit(self) -> u8 {
        1 << self.slot()
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of modes, always iterated in canonical order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct ModeSet(u8);

impl ModeSet {
    pub const EMPTY: ModeSet = ModeSet(0);
    pub const ALL: ModeSet = ModeSet(0b1111);
    pub const SIGNALS: ModeSet = ModeSet(Mode::SignalA.bit() | Mode::SignalB.bit());
    pub const PUMPS: ModeSet = ModeSet(Mode::PumpA.bit() | Mode::PumpB.bit());

    pub fn of(modes: &[Mode]) -> ModeSet {
        ModeSet(modes.iter().fold(0, |acc, m| acc | m.bit()))
    }

    pub fn contains(self, mode: Mode) -> bool {
        self.0 & mode.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn intersection(self, other: ModeSet) -> ModeSet {
        ModeSet(self.0 & other.0)
    }

    pub fn union(self, other: ModeSet) -> ModeSet {
        ModeSet(self.0 | other.0)
    }

    pub fn complement(self) -> ModeSet {
        ModeSet(!self.0 & ModeSet::ALL.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Mode> {
        Mode::ALL.into_iter().filter(move |m| self.contains(*m))
    }

    /// Parses a comma-separated list of mode names, e.g. `"sA,sB"`.
    pub fn parse(list: &str) -> Result<ModeSet> {
        let mut set = ModeSet::EMPTY;
        for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let mode = Mode::from_name(tok)
                .ok_or_else(|| Error::Domain(format!("unknown mode name `{tok}`")))?;
            set = set.union(ModeSet::of(&[mode]));
        }
        Ok(set)
    }
}

impl FromIterator<Mode> for ModeSet {
    fn from_iter<I: IntoIterator<Item = Mode>>(iter: I) -> Self {
        ModeSet(iter.into_iter().fold(0, |acc, m| acc | m.bit()))
    }
}

/// Symplectic form Ω = ⊕ [[0, 1], [−1, 0]] over `n_modes` modes.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// The 8×8 symplectic form of the four-mode system.
pub fn omega8() -> Matrix8 {
    let mut omega = Matrix8::zeros();
    for k in 0..4 {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Input phases (θ_s(0), θ_p(0), φ_s(0), φ_p(0)) in radians.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct InputPhases {
    pub theta_s: f64,
    pub theta_p: f64,
    pub phi_s: f64,
    pub phi_p: f64,
}

impl InputPhases {
    pub fn equal(phase: f64) -> Self {
        InputPhases {
            theta_s: phase,
            theta_p: phase,
            phi_s: phase,
            phi_p: phase,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.theta_s, self.theta_p, self.phi_s, self.phi_p]
    }

    pub fn from_array(p: [f64; 4]) -> Self {
        InputPhases {
            theta_s: p[0],
            theta_p: p[1],
            phi_s: p[2],
            phi_p: p[3],
        }
    }
}

/// Physical constants and the derived normalization.
///
/// Lengths are in mm and powers in mW. The conversion between the physical
/// coordinate z and the normalized coordinate ζ = √(2P)·g·z lives here and
/// nowhere else.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    coupling: f64,
    nonlinearity: f64,
    kappa: f64,
    total_power: f64,
    power_ratio: f64,
    delta0: f64,
    phases: InputPhases,
}

impl SystemParams {
    /// Builds the parameter set from the linear coupling `C` (mm⁻¹), the
    /// nonlinear constant `g` (mm⁻¹·mW^−½), the effective coupling κ and the
    /// per-waveguide signal-to-pump power ratio.
    pub fn new(
        coupling: f64,
        nonlinearity: f64,
        kappa: f64,
        power_ratio: f64,
        phases: InputPhases,
    ) -> Result<Self> {
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::Domain(format!(
                "coupling constant must be positive and finite, got {coupling}"
            )));
        }
        if !(nonlinearity.is_finite() && nonlinearity > 0.0) {
            return Err(Error::Domain(format!(
                "nonlinear constant must be positive and finite, got {nonlinearity}"
            )));
        }
        if kappa.is_nan() || kappa <= 1.0 {
            return Err(Error::LinearizationInvalid { kappa });
        }
        if !kappa.is_finite() {
            return Err(Error::Domain("kappa must be finite".into()));
        }
        if !(power_ratio.is_finite() && power_ratio >= 0.0) {
            return Err(Error::Domain(format!(
                "power ratio must be finite and non-negative, got {power_ratio}"
            )));
        }
        if phases.as_array().iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("input phases must be finite".into()));
        }
        let total_power = coupling * coupling / (2.0 * nonlinearity * nonlinearity * kappa * kappa);
        let delta0 = if power_ratio == 0.0 {
            f64::INFINITY
        } else {
            (1.0 / power_ratio).sqrt().asinh()
        };
        Ok(SystemParams {
            coupling,
            nonlinearity,
            kappa,
            total_power,
            power_ratio,
            delta0,
            phases,
        })
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn nonlinearity(&self) -> f64 {
        self.nonlinearity
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Conserved power constant P in mW.
    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn power_ratio(&self) -> f64 {
        self.power_ratio
    }

    /// δ₀ = arcsinh(√(P_p/P_s)); infinite for a vacuum signal.
    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn phases(&self) -> InputPhases {
        self.phases
    }

    /// κ recomputed from the stored power: C / (√(2P)·g).
    pub fn kappa_from_power(&self) -> f64 {
        self.coupling / ((2.0 * self.total_power).sqrt() * self.nonlinearity)
    }

    /// Physical length per unit ζ, in mm.
    pub fn mm_per_zeta(&self) -> f64 {
        self.kappa / self.coupling
    }

    pub fn z_of_zeta(&self, zeta: f64) -> f64 {
        zeta * self.mm_per_zeta()
    }

    pub fn zeta_of_z(&self, z_mm: f64) -> f64 {
        z_mm * (2.0 * self.total_power).sqrt() * self.nonlinearity
    }
}

/// The four normalized complex mean fields.
///
/// Stored in Cartesian form; amplitudes and phases are derived views. Signal
/// amplitudes are a_s = u_s·e^{iθ_s}, pump amplitudes a_p = u_p·e^{iθ_p}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalState {
    pub signal_a: Complex64,
    pub pump_a: Complex64,
    pub signal_b: Complex64,
    pub pump_b: Complex64,
}

/// Which terms of the coupled-mode dynamics are active.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interaction {
    /// Linear evanescent coupling plus the χ⁽²⁾ terms.
    #[default]
    Full,
    /// Only the linear signal coupling (the g → 0 limit).
    LinearOnly,
}

impl ClassicalState {
    pub const ZERO: ClassicalState = ClassicalState {
        signal_a: Complex64::new(0.0, 0.0),
        pump_a: Complex64::new(0.0, 0.0),
        signal_b: Complex64::new(0.0, 0.0),
        pump_b: Complex64::new(0.0, 0.0),
    };

    /// Equal-power launch conditions u_s(0) = v_s(0) = sech(δ₀)/√2 and
    /// u_p(0) = v_p(0) = tanh(δ₀)/√2.
    pub fn initial(params: &SystemParams) -> ClassicalState {
        // sech(asinh x) = 1/√(1+x²), tanh(asinh x) = x/√(1+x²) with x² = P_p/P_s,
        // written in terms of the ratio so that ratio = 0 needs no special case.
        let r = params.power_ratio();
        let u_s = (r / (1.0 + r)).sqrt() / std::f64::consts::SQRT_2;
        let u_p = (1.0 / (1.0 + r)).sqrt() / std::f64::consts::SQRT_2;
        let ph = params.phases();
        ClassicalState {
            signal_a: Complex64::from_polar(u_s, ph.theta_s),
            pump_a: Complex64::from_polar(u_p, ph.theta_p),
            signal_b: Complex64::from_polar(u_s, ph.phi_s),
            pump_b: Complex64::from_polar(u_p, ph.phi_p),
        }
    }

    pub fn amplitude(&self, mode: Mode) -> Complex64 {
        match mode {
            Mode::SignalA => self.signal_a,
            Mode::PumpA => self.pump_a,
            Mode::SignalB => self.signal_b,
            Mode::PumpB => self.pump_b,
        }
    }

    /// Normalized power u² (or v²) carried by a mode.
    pub fn power(&self, mode: Mode) -> f64 {
        self.amplitude(mode).norm_sqr()
    }

    /// u_s² + v_s² + u_p² + v_p², equal to one along any exact trajectory.
    pub fn conserved_sum(&self) -> f64 {
        Mode::ALL.iter().map(|m| self.power(*m)).sum()
    }

    /// Right-hand side of the normalized classical equations:
    /// a_s' = iκ b_s + i a_p a_s*, a_p' = i a_s², and the A↔B mirror.
    pub fn derivative(&self, kappa: f64, interaction: Interaction) -> ClassicalState {
        let i = Complex64::i();
        let link_a = i * kappa * self.signal_b;
        let link_b = i * kappa * self.signal_a;
        match interaction {
            Interaction::Full => ClassicalState {
                signal_a: link_a + i * self.pump_a * self.signal_a.conj(),
                pump_a: i * self.signal_a * self.signal_a,
                signal_b: link_b + i * self.pump_b * self.signal_b.conj(),
                pump_b: i * self.signal_b * self.signal_b,
            },
            Interaction::LinearOnly => ClassicalState {
                signal_a: link_a,
                pump_a: Complex64::new(0.0, 0.0),
                signal_b: link_b,
                pump_b: Complex64::new(0.0, 0.0),
            },
        }
    }

    /// Exchanges the waveguides (A↔B together with u↔v, θ↔φ).
    pub fn mirrored(&self) -> ClassicalState {
        ClassicalState {
            signal_a: self.signal_b,
            pump_a: self.pump_b,
            signal_b: self.signal_a,
            pump_b: self.pump_a,
        }
    }

    pub fn is_finite(&self) -> bool {
        Mode::ALL.iter().all(|m| {
            let a = self.amplitude(*m);
            a.re.is_finite() && a.im.is_finite()
        })
    }
}

impl Add for ClassicalState {
    type Output = ClassicalState;

    fn add(self, rhs: ClassicalState) -> ClassicalState {
        ClassicalState {
            signal_a: self.signal_a + rhs.signal_a,
            pump_a: self.pump_a + rhs.pump_a,
            signal_b: self.signal_b + rhs.signal_b,
            pump_b: self.pump_b + rhs.pump_b,
        }
    }
}

impl Mul<f64> for ClassicalState {
    type Output = ClassicalState;

    fn mul(self, h: f64) -> ClassicalState {
        ClassicalState {
            signal_a: self.signal_a * h,
            pump_a: self.pump_a * h,
            signal_b: self.signal_b * h,
            pump_b: self.pump_b * h,
        }
    }
}

/// Coefficient matrix Δ(ζ) of the linearized quadrature dynamics dξ/dζ = Δ ξ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftMatrix(pub Matrix8);

impl DriftMatrix {
    pub fn matrix(&self) -> &Matrix8 {
        &self.0
    }

    /// ‖ΔΩ + ΩΔᵀ‖_max; zero for a member of the symplectic Lie algebra.
    pub fn hamiltonian_defect(&self) -> f64 {
        let omega = omega8();
        (self.0 * omega + omega * self.0.transpose()).amax()
    }
}

/// Assembles Δ(ζ) from the classical fields.
///
/// Every nonlinear entry is a product u·sin θ or u·cos θ and is read straight
/// from the imaginary / real part of the Cartesian amplitude.
pub fn drift_matrix(state: &ClassicalState, kappa: f64) -> DriftMatrix {
    drift_matrix_with(state, kappa, Interaction::Full)
}

pub fn drift_matrix_with(
    state: &ClassicalState,
    kappa: f64,
    interaction: Interaction,
) -> DriftMatrix {
    let mut d = Matrix8::zeros();
    let r2 = std::f64::consts::SQRT_2;
    for (signal, pump) in [(Mode::SignalA, Mode::PumpA), (Mode::SignalB, Mode::PumpB)] {
        let (xs, ys) = (signal.x(), signal.y());
        let other = signal.mirror();

        // evanescent coupling: X_s' ∋ −κ Y_s(other), Y_s' ∋ +κ X_s(other)
        d[(xs, other.y())] = -kappa;
        d[(ys, other.x())] = kappa;

        if interaction == Interaction::LinearOnly {
            continue;
        }

        let (xp, yp) = (pump.x(), pump.y());
        let a_s = state.amplitude(signal);
        let a_p = state.amplitude(pump);
        let (p_cos, p_sin) = (a_p.re, a_p.im);
        let (s_cos, s_sin) = (r2 * a_s.re, r2 * a_s.im);

        d[(xs, xs)] = -p_sin;
        d[(xs, ys)] = p_cos;
        d[(xs, xp)] = s_sin;
        d[(xs, yp)] = -s_cos;

        d[(ys, xs)] = p_cos;
        d[(ys, ys)] = p_sin;
        d[(ys, xp)] = s_cos;
        d[(ys, yp)] = s_sin;

        d[(xp, xs)] = -s_sin;
        d[(xp, ys)] = -s_cos;

        d[(yp, xs)] = s_cos;
        d[(yp, ys)] = -s_sin;
    }
    DriftMatrix(d)
}

/// Permutation exchanging the quadratures of waveguides A and B.
pub fn waveguide_swap() -> Matrix8 {
    let mut p = Matrix8::zeros();
    for m in Mode::ALL {
        p[(m.x(), m.mirror().x())] = 1.0;
        p[(m.y(), m.mirror().y())] = 1.0;
    }
    p
}
