//! Gaussian entanglement measures on mode-labelled covariance matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{symplectic_form, Matrix8, Mode, ModeSet};

/// Tolerance on the pairing of the squared symplectic eigenvalues, relative
/// to the largest one (floored at one).
pub const PAIRING_TOL: f64 = 1e-9;

/// A covariance matrix together with the modes it describes, in canonical
/// order. Quadratures of mode k sit at rows 2k, 2k+1.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeCovariance {
    modes: ModeSet,
    matrix: DMatrix<f64>,
}

impl ModeCovariance {
    pub fn new(modes: ModeSet, matrix: DMatrix<f64>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Domain("covariance needs at least one mode".into()));
        }
        let n = 2 * modes.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Domain(format!(
                "{} modes need a {n}x{n} matrix, got {}x{}",
                modes.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(ModeCovariance { modes, matrix })
    }

    pub fn full(v: &Matrix8) -> Self {
        ModeCovariance {
            modes: ModeSet::ALL,
            matrix: DMatrix::from_column_slice(8, 8, v.as_slice()),
        }
    }

    /// The vacuum (shot-noise) covariance I/2 on `modes`.
    pub fn vacuum(modes: ModeSet) -> Self {
        let n = 2 * modes.len();
        ModeCovariance {
            modes,
            matrix: DMatrix::identity(n, n) * 0.5,
        }
    }

    pub fn modes(&self) -> ModeSet {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Row of the X quadrature of `mode`, if present.
    pub fn x_index(&self, mode: Mode) -> Option<usize> {
        self.modes.iter().position(|m| m == mode).map(|k| 2 * k)
    }
}

/// The transposed side of a bipartition: a non-empty proper subset of the
/// four modes. The complement is implied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bipartition(ModeSet);

impl Bipartition {
    pub fn new(part: ModeSet) -> Result<Self> {
        if part.is_empty() || part == ModeSet::ALL {
            return Err(Error::Domain(
                "bipartition must be a non-empty proper subset of the modes".into(),
            ));
        }
        Ok(Bipartition(part))
    }

    pub fn of(modes: &[Mode]) -> Result<Self> {
        Self::new(ModeSet::of(modes))
    }

    pub fn part(&self) -> ModeSet {
        self.0
    }

    pub fn complement(&self) -> Bipartition {
        Bipartition(self.0.complement())
    }
}

/// Restricts a covariance matrix to `modes` (rows and columns of the kept
/// quadrature pairs, canonical order).
pub fn reduce(cov: &ModeCovariance, modes: ModeSet) -> Result<ModeCovariance> {
    let keep = cov.modes.intersection(modes);
    if modes.is_empty() || keep.is_empty() {
        return Err(Error::Domain("reduction to an empty set of modes".into()));
    }
    let idx: Vec<usize> = keep
        .iter()
        .flat_map(|m| {
            let x = cov.x_index(m).expect("mode present");
            [x, x + 1]
        })
        .collect();
    let n = idx.len();
    let matrix = DMatrix::from_fn(n, n, |i, j| cov.matrix[(idx[i], idx[j])]);
    Ok(ModeCovariance {
        modes: keep,
        matrix,
    })
}

/// Partial transpose: flips the sign of every Y quadrature of the modes in
/// `part`, Ṽ = P·V·P with P = diag(±1).
pub fn partial_transpose(cov: &ModeCovariance, part: &Bipartition) -> ModeCovariance {
    let signs: Vec<f64> = cov
        .modes
        .iter()
        .flat_map(|m| [1.0, if part.0.contains(m) { -1.0 } else { 1.0 }])
        .collect();
    let matrix = DMatrix::from_fn(cov.matrix.nrows(), cov.matrix.ncols(), |i, j| {
        signs[i] * signs[j] * cov.matrix[(i, j)]
    });
    ModeCovariance {
        modes: cov.modes,
        matrix,
    }
}

/// Symplectic eigenvalues of a 2k×2k positive-definite covariance, ascending.
///
/// With M = V^½ Ω V^½ (real antisymmetric, spectrum ±iν_k) the symmetric
/// matrix MᵀM has each ν_k² as a doubly degenerate eigenvalue.
pub fn symplectic_spectrum(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = v.nrows();
    if n == 0 || !n.is_multiple_of(2) || v.ncols() != n {
        return Err(Error::Domain(format!(
            "symplectic spectrum needs an even square matrix, got {}x{}",
            v.nrows(),
            v.ncols()
        )));
    }
    let sym = (v + v.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if !(eig.eigenvalues.min() > 0.0) {
        return Err(Error::NumericalDegeneracy(format!(
            "covariance is not positive definite (min eigenvalue {:e})",
            eig.eigenvalues.min()
        )));
    }
    let sqrt_v = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let m = &sqrt_v * symplectic_form(n / 2) * &sqrt_v;
    let mut sq: Vec<f64> = SymmetricEigen::new(m.transpose() * &m)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    sq.sort_by(f64::total_cmp);
    let tol = PAIRING_TOL * sq[n - 1].max(1.0);
    let mut nus = Vec::with_capacity(n / 2);
    for pair in sq.chunks(2) {
        if (pair[1] - pair[0]).abs() > tol {
            return Err(Error::NumericalDegeneracy(format!(
                "squared symplectic eigenvalues {} and {} do not pair",
                pair[0], pair[1]
            )));
        }
        nus.push((0.5 * (pair[0] + pair[1])).max(0.0).sqrt());
    }
    Ok(nus)
}

/// F(ν) = −log₂(2ν) below the shot-noise value 1/2, zero otherwise.
pub fn negativity_term(nu: f64) -> f64 {
    if nu < 0.5 {
        -(2.0 * nu).log2()
    } else {
        0.0
    }
}

/// Logarithmic negativity of `cov` across the given bipartition.
pub fn log_negativity(cov: &ModeCovariance, part: &Bipartition) -> Result<f64> {
    let pt = partial_transpose(cov, part);
    Ok(symplectic_spectrum(&pt.matrix)?
        .into_iter()
        .map(negativity_term)
        .sum())
}

/// E_N of the reduced signal pair (sA, sB), transposed on sB.
pub fn signal_logneg(v: &Matrix8) -> Result<f64> {
    let pair = reduce(&ModeCovariance::full(v), ModeSet::SIGNALS)?;
    log_negativity(&pair, &Bipartition::of(&[Mode::SignalB])?)
}

/// E_N of the reduced pump pair (pA, pB), transposed on pB.
pub fn pump_logneg(v: &Matrix8) -> Result<f64> {
    let pair = reduce(&ModeCovariance::full(v), ModeSet::PUMPS)?;
    log_negativity(&pair, &Bipartition::of(&[Mode::PumpB])?)
}

/// The bound each VLF combination must respect for separable states.
pub const VLF_BOUND: f64 = 2.0;

/// Gain slots r₁…r₄ multiply Y_sA, Y_pA, Y_sB, Y_pB respectively.
const GAIN_MODES: [Mode; 4] = [Mode::SignalA, Mode::PumpA, Mode::SignalB, Mode::PumpB];

struct VlfInequality {
    x_plus: Mode,
    x_minus: Mode,
    y_fixed: [Mode; 2],
    /// Gain slots (0-based r index) that are free in this inequality.
    y_free: [usize; 2],
}

const INEQUALITIES: [VlfInequality; 3] = [
    // ⟨Δ(X_sA − X_pA)²⟩ + ⟨Δ(Y_sA + Y_pA + r₃Y_sB + r₄Y_pB)²⟩
    VlfInequality {
        x_plus: Mode::SignalA,
        x_minus: Mode::PumpA,
        y_fixed: [Mode::SignalA, Mode::PumpA],
        y_free: [2, 3],
    },
    // ⟨Δ(X_pA − X_sB)²⟩ + ⟨Δ(r₁Y_sA + Y_pA + Y_sB + r₄Y_pB)²⟩
    VlfInequality {
        x_plus: Mode::PumpA,
        x_minus: Mode::SignalB,
        y_fixed: [Mode::PumpA, Mode::SignalB],
        y_free: [0, 3],
    },
    // ⟨Δ(X_sB − X_pB)²⟩ + ⟨Δ(r₁Y_sA + r₂Y_pA + Y_sB + Y_pB)²⟩
    VlfInequality {
        x_plus: Mode::SignalB,
        x_minus: Mode::PumpB,
        y_fixed: [Mode::SignalB, Mode::PumpB],
        y_free: [0, 1],
    },
];

impl VlfInequality {
    fn x_variance(&self, v: &Matrix8) -> f64 {
        let (a, b) = (self.x_plus.x(), self.x_minus.x());
        v[(a, a)] + v[(b, b)] - 2.0 * v[(a, b)]
    }

    fn y_coefficients(&self, gains: &[f64; 4]) -> [f64; 8] {
        let mut d = [0.0; 8];
        for m in self.y_fixed {
            d[m.y()] = 1.0;
        }
        for slot in self.y_free {
            d[GAIN_MODES[slot].y()] = gains[slot];
        }
        d
    }

    fn evaluate(&self, v: &Matrix8, gains: &[f64; 4]) -> f64 {
        self.x_variance(v) + quadratic_form(v, &self.y_coefficients(gains))
    }

    /// Minimizes the Y-part variance over the two free gains.
    fn optimal_gains(&self, v: &Matrix8) -> [f64; 4] {
        let free = self.y_free.map(|s| GAIN_MODES[s].y());
        let fixed = self.y_fixed.map(|m| m.y());
        // variance = dᵀVd with d = d₀ + Σ r_j e_j: gradient A r + b = 0
        let a = [
            [v[(free[0], free[0])], v[(free[0], free[1])]],
            [v[(free[1], free[0])], v[(free[1], free[1])]],
        ];
        let b = [
            fixed.iter().map(|&f| v[(free[0], f)]).sum::<f64>(),
            fixed.iter().map(|&f| v[(free[1], f)]).sum::<f64>(),
        ];
        let r = solve_or_descend(a, b);
        let mut gains = [0.0; 4];
        gains[self.y_free[0]] = r[0];
        gains[self.y_free[1]] = r[1];
        gains
    }
}

fn quadratic_form(v: &Matrix8, c: &[f64; 8]) -> f64 {
    let mut acc = 0.0;
    for i in 0..8 {
        if c[i] == 0.0 {
            continue;
        }
        for j in 0..8 {
            acc += c[i] * v[(i, j)] * c[j];
        }
    }
    acc
}

/// Solves A r = −b for symmetric positive semidefinite 2×2 A; falls back to
/// coordinate descent when A is numerically singular.
fn solve_or_descend(a: [[f64; 2]; 2], b: [f64; 2]) -> [f64; 2] {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a[0][0].abs().max(a[1][1].abs()).max(f64::MIN_POSITIVE);
    if det.abs() > 1e-12 * scale * scale {
        return [
            (-b[0] * a[1][1] + b[1] * a[0][1]) / det,
            (-b[1] * a[0][0] + b[0] * a[1][0]) / det,
        ];
    }
    let mut r = [0.0f64; 2];
    for _ in 0..10_000 {
        let mut change = 0.0f64;
        for i in 0..2 {
            let j = 1 - i;
            let next = if a[i][i] > 0.0 {
                -(b[i] + a[i][j] * r[j]) / a[i][i]
            } else {
                0.0
            };
            change = change.max((next - r[i]).abs());
            r[i] = next;
        }
        if change < 1e-10 {
            break;
        }
    }
    r
}

/// The three VLF combinations at a common gain vector r = (r₁, r₂, r₃, r₄).
pub fn vlf_evaluate(v: &Matrix8, gains: &[f64; 4]) -> [f64; 3] {
    INEQUALITIES.each_ref().map(|ineq| ineq.evaluate(v, gains))
}

/// Optimized VLF combinations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VlfResult {
    pub values: [f64; 3],
    /// Gains used for each inequality; only the entries free in that
    /// inequality are nonzero.
    pub gains: [[f64; 4]; 3],
    /// All three combinations below the bound.
    pub violated: bool,
}

/// Minimizes each inequality independently over the gains appearing in it.
pub fn vlf_optimize(v: &Matrix8) -> VlfResult {
    let gains = INEQUALITIES.each_ref().map(|ineq| ineq.optimal_gains(v));
    let mut values = [0.0; 3];
    for (k, ineq) in INEQUALITIES.iter().enumerate() {
        values[k] = ineq.evaluate(v, &gains[k]);
    }
    VlfResult {
        values,
        gains,
        violated: values.iter().all(|&x| x < VLF_BOUND),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    /// Two-mode squeezed vacuum on (sA, sB) with squeezing r.
    fn tmsv(r: f64) -> ModeCovariance {
        let (c, s) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            c,   0.0, s,   0.0,
            0.0, c,   0.0, -s,
            s,   0.0, c,   0.0,
            0.0, -s,  0.0, c,
        ]);
        ModeCovariance::new(ModeSet::SIGNALS, m).unwrap()
    }

    fn sb() -> Bipartition {
        Bipartition::of(&[Mode::SignalB]).unwrap()
    }

    #[test]
    fn bipartition_must_be_proper() {
        assert!(Bipartition::new(ModeSet::EMPTY).is_err());
        assert!(Bipartition::new(ModeSet::ALL).is_err());
        assert_eq!(sb().complement().part().len(), 3);
    }

    #[test]
    fn reduce_vacuum_and_errors() {
        let vac = ModeCovariance::vacuum(ModeSet::ALL);
        let r = reduce(&vac, ModeSet::SIGNALS).unwrap();
        assert_eq!(r.matrix(), &(DMatrix::identity(4, 4) * 0.5));
        assert!(reduce(&vac, ModeSet::EMPTY).is_err());
        let pumps = reduce(&vac, ModeSet::PUMPS).unwrap();
        assert!(reduce(&pumps, ModeSet::SIGNALS).is_err());
        assert!(ModeCovariance::new(ModeSet::SIGNALS, DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn reduce_composes_as_intersection() {
        let m = DMatrix::from_fn(8, 8, |i, j| (i * 8 + j) as f64);
        let full = ModeCovariance::new(ModeSet::ALL, m).unwrap();
        let a = ModeSet::of(&[Mode::SignalA, Mode::PumpA, Mode::PumpB]);
        let b = ModeSet::of(&[Mode::PumpA, Mode::PumpB, Mode::SignalB]);
        let twice = reduce(&reduce(&full, a).unwrap(), b).unwrap();
        let once = reduce(&full, a.intersection(b)).unwrap();
        assert_eq!(twice, once);
        // rows of pA then pB
        assert_eq!(once.matrix()[(0, 0)], (2 * 8 + 2) as f64);
        assert_eq!(once.matrix()[(2, 3)], (6 * 8 + 7) as f64);
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let m = DMatrix::from_fn(8, 8, |i, j| ((i + 1) * (j + 1)) as f64 * 0.01);
        let cov = ModeCovariance::new(ModeSet::ALL, m).unwrap();
        for part in [ModeSet::SIGNALS, ModeSet::of(&[Mode::PumpB])] {
            let p = Bipartition::new(part).unwrap();
            assert_eq!(partial_transpose(&partial_transpose(&cov, &p), &p), cov);
        }
        let vac = ModeCovariance::vacuum(ModeSet::ALL);
        assert_eq!(
            partial_transpose(&vac, &Bipartition::new(ModeSet::PUMPS).unwrap()),
            vac
        );
        // only Y of the transposed modes changes sign
        let pt = partial_transpose(&cov, &Bipartition::of(&[Mode::PumpA]).unwrap());
        assert_eq!(pt.matrix()[(3, 0)], -cov.matrix()[(3, 0)]);
        assert_eq!(pt.matrix()[(3, 3)], cov.matrix()[(3, 3)]);
        assert_eq!(pt.matrix()[(2, 0)], cov.matrix()[(2, 0)]);
    }

    #[test]
    fn spectrum_of_vacuum_and_normal_form() {
        for k in 1..=4 {
            let nus = symplectic_spectrum(&(DMatrix::identity(2 * k, 2 * k) * 0.5)).unwrap();
            assert_eq!(nus.len(), k);
            for nu in nus {
                assert_relative_eq!(nu, 0.5, epsilon = 1e-14);
            }
        }
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.7, 1.7, 0.6, 0.6]));
        let nus = symplectic_spectrum(&d).unwrap();
        assert_relative_eq!(nus[0], 0.6, epsilon = 1e-13);
        assert_relative_eq!(nus[1], 1.7, epsilon = 1e-13);
        assert!(symplectic_spectrum(&DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn spectrum_of_two_mode_squeezed_state() {
        let r = 0.37;
        let cov = tmsv(r);
        for nu in symplectic_spectrum(cov.matrix()).unwrap() {
            assert_relative_eq!(nu, 0.5, epsilon = 1e-12);
        }
        let pt = partial_transpose(&cov, &sb());
        let nus = symplectic_spectrum(pt.matrix()).unwrap();
        assert_relative_eq!(nus[0], (-2.0 * r).exp() / 2.0, epsilon = 1e-12);
        assert_relative_eq!(nus[1], (2.0 * r).exp() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn log_negativity_closed_forms() {
        let vac = ModeCovariance::vacuum(ModeSet::ALL);
        assert_eq!(
            log_negativity(&vac, &Bipartition::new(ModeSet::PUMPS).unwrap()).unwrap(),
            0.0
        );
        let r = LN_2 / 2.0;
        let en = log_negativity(&tmsv(r), &sb()).unwrap();
        assert!((en - 1.0).abs() <= 1e-9, "E_N = {en}");
        assert!((en - 2.0 * r / LN_2).abs() <= 1e-9);
    }

    #[test]
    fn negativity_term_shape() {
        assert_eq!(negativity_term(0.5), 0.0);
        assert_eq!(negativity_term(3.0), 0.0);
        assert_relative_eq!(negativity_term(0.25), 1.0);
        let mut prev = f64::INFINITY;
        for k in 1..50 {
            let v = negativity_term(k as f64 * 0.01);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn vlf_vacuum_is_on_the_boundary() {
        let vac = Matrix8::identity() * 0.5;
        assert_eq!(vlf_evaluate(&vac, &[0.0; 4]), [2.0, 2.0, 2.0]);
        let res = vlf_optimize(&vac);
        assert_eq!(res.values, [2.0, 2.0, 2.0]);
        assert!(res.gains.iter().flatten().all(|g| *g == 0.0));
        assert!(!res.violated);
    }

    #[test]
    fn vlf_optimum_is_self_consistent_and_never_worse() {
        // a generic positive definite matrix
        let a = Matrix8::from_fn(|i, j| ((i * 3 + j * 5) % 7) as f64 * 0.1 - 0.3);
        let v = a * a.transpose() + Matrix8::identity() * 0.5;
        let res = vlf_optimize(&v);
        let zero = vlf_evaluate(&v, &[0.0; 4]);
        for (k, z) in zero.iter().enumerate() {
            assert!((vlf_evaluate(&v, &res.gains[k])[k] - res.values[k]).abs() <= 1e-12);
            assert!(res.values[k] <= z + 1e-12);
        }
        // perturbing the optimal gains can only increase each combination
        for k in 0..3 {
            for slot in 0..4 {
                if res.gains[k][slot] == 0.0 {
                    continue;
                }
                for delta in [-1e-3, 1e-3] {
                    let mut g = res.gains[k];
                    g[slot] += delta;
                    assert!(vlf_evaluate(&v, &g)[k] >= res.values[k] - 1e-14);
                }
            }
        }
    }

    #[test]
    fn singular_quadratic_falls_back_to_descent() {
        let r = solve_or_descend([[1.0, 1.0], [1.0, 1.0]], [2.0, 2.0]);
        // any point on r0 + r1 = -2 minimizes
        assert!((r[0] + r[1] + 2.0).abs() < 1e-9);
        assert_eq!(
            solve_or_descend([[0.0, 0.0], [0.0, 0.0]], [0.0, 0.0]),
            [0.0, 0.0]
        );
    }
}
