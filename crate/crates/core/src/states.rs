//! One- and two-qubit polarization states.
//!
//! Basis convention, used by every module: one qubit is `(H, V)` with H the
//! first basis vector; two qubits are ordered `(HH, HV, VH, VV)`, the first
//! letter belonging to the photon that passes through the filter.

// Float supplies libm-backed math where core lacks it.
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels;
use crate::error::{check_unit_interval, Error, Result};
use crate::matcore::{herm_eig, kron, pauli, CMatrix, C64, HERMITIAN_TOL, PSD_TOL, ZERO};

pub const ONE_QUBIT_BASIS: [&str; 2] = ["H", "V"];
pub const TWO_QUBIT_BASIS: [&str; 4] = ["HH", "HV", "VH", "VV"];

pub const HH: usize = 0;
pub const HV: usize = 1;
pub const VH: usize = 2;
pub const VV: usize = 3;

/// Which of the two parallel state families a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// `ε|HH⟩ + |VV⟩`
    Phi,
    /// `ε|HV⟩ + |VH⟩`
    Psi,
}

impl Family {
    /// Indices `(small, large)` of the populated basis states: the one
    /// carrying amplitude ε and the one carrying amplitude 1.
    pub fn populated(self) -> (usize, usize) {
        match self {
            Family::Phi => (HH, VV),
            Family::Psi => (HV, VH),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Phi => "phi",
            Family::Psi => "psi",
        }
    }
}

/// Normalized state vector of dimension 2 or 4.
#[derive(Debug, Clone, PartialEq)]
pub struct PureKet {
    amplitudes: Vec<C64>,
}

impl PureKet {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != 2 && amplitudes.len() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("ket norm² = {norm}")));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    label: Option<String>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), unit trace (1e-10) and positivity
    /// (min eigenvalue ≥ -1e-9).
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.dim();
        if dim != 2 && dim != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: dim });
        }
        let asym = matrix.max_asymmetry();
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "trace {}{:+}i differs from 1",
                tr.re, tr.im
            )));
        }
        let min = herm_eig(&matrix)?.min_value();
        if min < -PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        Ok(Self {
            matrix: matrix.hermitize(),
            label: None,
        })
    }

    /// Divides by the trace before validating.
    pub fn normalized(matrix: CMatrix) -> Result<Self> {
        let tr = matrix.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidState(format!("non-positive trace {tr}")));
        }
        Self::new(matrix.scale_real(1.0 / tr))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim).scale_real(1.0 / dim as f64),
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `⟨i|ρ|j⟩`.
    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.matrix[(i, j)]
    }

    pub fn population(&self, i: usize) -> f64 {
        self.matrix[(i, i)].re
    }

    /// `(1 - w)·ρ + w·I/d`.
    pub fn depolarize(&self, weight: f64) -> Result<Self> {
        check_unit_interval("depolarizing weight", weight)?;
        let d = self.dim();
        let mixed = CMatrix::identity(d).scale_real(weight / d as f64);
        let m = &self.matrix.scale_real(1.0 - weight) + &mixed;
        Ok(Self {
            matrix: m,
            label: self.label.clone(),
        })
    }
}

/// Preparation parameters for the phase-damped family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedPrepParams {
    pub epsilon: f64,
    pub lambda: f64,
    /// Half-wave-plate angle in radians.
    pub theta: f64,
    pub family: Family,
}

impl MixedPrepParams {
    pub fn validate(&self) -> Result<()> {
        check_unit_interval("epsilon", self.epsilon)?;
        check_unit_interval("lambda", self.lambda)?;
        if !self.theta.is_finite() {
            return Err(Error::OutOfRange {
                name: "theta",
                value: self.theta,
                allowed: "finite",
            });
        }
        Ok(())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon >= 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            allowed: "[0, ∞)",
        })
    }
}

fn two_level_ket(epsilon: f64, family: Family) -> Result<PureKet> {
    check_epsilon(epsilon)?;
    let norm = (1.0 + epsilon * epsilon).sqrt();
    let mut amps = [0.0; 4];
    let (small, large) = family.populated();
    amps[small] = epsilon / norm;
    amps[large] = 1.0 / norm;
    PureKet::from_real(&amps)
}

/// `(ε|HH⟩ + |VV⟩)/√(1+ε²)`.
pub fn make_phi(epsilon: f64) -> Result<PureKet> {
    two_level_ket(epsilon, Family::Phi)
}

/// `(ε|HV⟩ + |VH⟩)/√(1+ε²)`.
pub fn make_psi(epsilon: f64) -> Result<PureKet> {
    two_level_ket(epsilon, Family::Psi)
}

pub fn make_ket(epsilon: f64, family: Family) -> Result<PureKet> {
    two_level_ket(epsilon, family)
}

pub fn bell(family: Family) -> PureKet {
    two_level_ket(1.0, family).expect("ε = 1 is valid")
}

pub fn density_from_ket(k: &PureKet) -> DensityMatrix {
    let a = k.amplitudes();
    DensityMatrix {
        matrix: CMatrix::outer(a, a),
        label: None,
    }
}

/// Exact output of the half-wave-plate / quartz / half-wave-plate dephasing
/// stage acting on `|Φ_ε⟩` (or `|Ψ_ε⟩`), written out element by element.
///
/// The Ψ form is the Φ form with the second photon's labels flipped
/// (`HH↔HV`, `VH↔VV`), which commutes with the stage acting on photon one.
pub fn make_mixed_exact(p: &MixedPrepParams) -> Result<DensityMatrix> {
    p.validate()?;
    let (e, th) = (p.epsilon, p.theta);
    let q = 1.0 - (1.0 - p.lambda).sqrt();
    let cs = 2.0 * th.cos().powi(2) * th.sin().powi(2);
    let s4 = (4.0 * th).sin();

    let a1 = e * e * (1.0 - cs * q);
    let a2 = e / 4.0 * s4 * q;
    let a3 = cs * q;
    let a4 = e * e / 4.0 * s4 * q;
    let a5 = e * cs * q;
    let a6 = e * e / 2.0 * (2.0 * th).sin().powi(2) * q;
    let a7 = e / 4.0 * (1.0 + 3.0 * (1.0 - p.lambda).sqrt() - q * (4.0 * th).cos());
    let a8 = -s4 * q / 4.0;
    let a9 = -e / 4.0 * s4 * q;
    let a10 = 1.0 - cs * q;

    #[rustfmt::skip]
    let layout = [
        a1, a2, a4, a7,
        a2, a3, a5, a8,
        a4, a5, a6, a9,
        a7, a8, a9, a10,
    ];
    let m = CMatrix::from_real(4, &layout).scale_real(1.0 / (1.0 + e * e));
    let m = match p.family {
        Family::Phi => m,
        Family::Psi => m.conjugate_by(&flip_second()),
    };
    Ok(DensityMatrix::new(m)?.with_label(format!(
        "exact {} eps={} lambda={} theta={}",
        p.family.name(),
        p.epsilon,
        p.lambda,
        p.theta
    )))
}

/// Same preparation computed by applying the dephasing Kraus operators.
pub fn make_mixed_via_kraus(p: &MixedPrepParams) -> Result<DensityMatrix> {
    p.validate()?;
    let ch = channels::phase_damping(p.theta, p.lambda)?;
    let rho = density_from_ket(&make_ket(p.epsilon, p.family)?);
    Ok(channels::apply_local(&ch, &rho, channels::Arm::First)?.0)
}

fn flip_second() -> CMatrix {
    kron(&CMatrix::identity(2), &pauli(1))
}

/// Leading-order dephased family: populations `ε², 1` and coherence
/// `ε(1 - λ/2)` between the two populated basis states, all over `1+ε²`.
pub fn make_mixed_approx(epsilon: f64, lambda: f64, family: Family) -> Result<DensityMatrix> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            allowed: "(0, 1]",
        });
    }
    check_unit_interval("lambda", lambda)?;
    let m = x_state(epsilon, lambda, family);
    let rho = DensityMatrix::new(m)?;
    Ok(rho.with_label(format!("approx {} eps={} lambda={}", family.name(), epsilon, lambda)))
}

/// Unvalidated matrix of the leading-order family, valid for any `λ`.
pub(crate) fn x_state(epsilon: f64, lambda: f64, family: Family) -> CMatrix {
    let n = 1.0 + epsilon * epsilon;
    let (small, large) = family.populated();
    let mut m = CMatrix::zeros(4);
    let coh = C64::new(epsilon * (1.0 - lambda / 2.0) / n, 0.0);
    m[(small, small)] = C64::new(epsilon * epsilon / n, 0.0);
    m[(large, large)] = C64::new(1.0 / n, 0.0);
    m[(small, large)] = coh;
    m[(large, small)] = coh;
    m
}

/// Single-qubit projector ket for a label in `{H, V, D, A, R, L}`.
pub fn single_qubit_ket(label: char) -> Option<[C64; 2]> {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    Some(match label {
        'H' => [C64::new(1.0, 0.0), ZERO],
        'V' => [ZERO, C64::new(1.0, 0.0)],
        'D' => [C64::new(h, 0.0), C64::new(h, 0.0)],
        'A' => [C64::new(h, 0.0), C64::new(-h, 0.0)],
        'R' => [C64::new(h, 0.0), C64::new(0.0, h)],
        'L' => [C64::new(h, 0.0), C64::new(0.0, -h)],
        _ => return None,
    })
}
