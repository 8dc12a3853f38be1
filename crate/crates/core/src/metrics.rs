//! Figures of merit for states and processes.

// Float supplies libm-backed math where core lacks it.
use crate::channels::ChiMatrix;
use crate::error::{Error, Result};
use crate::matcore::{floored_sqrt, herm_eig, kron, pauli, psd_sqrt};
use crate::states::{bell, DensityMatrix, Family, PureKet};
#[allow(unused_imports)]
use num_traits::Float;

const MIN_POPULATION: f64 = 1e-12;

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    // Tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ
    m.entries().iter().map(|z| z.norm_sqr()).sum()
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(rho: &DensityMatrix, target: &PureKet) -> Result<f64> {
    if rho.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: target.dim(),
        });
    }
    Ok(rho.matrix().expectation(target.amplitudes()).re)
}

/// Process fidelity `(Tr √(√χ χ_ref √χ))² / (Tr χ · Tr χ_ref)`.
///
/// Both arguments must be PSD to within the clipping tolerance.
pub fn process_fidelity(chi: &ChiMatrix, chi_ref: &ChiMatrix) -> Result<f64> {
    let root = psd_sqrt(chi.matrix())?;
    let inner = (&(&root * chi_ref.matrix()) * &root).hermitize();
    let eig = herm_eig(&inner)?;
    if eig.min_value() < -1e-9 {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min_value(),
        });
    }
    let scale = eig.values[0];
    let tr_sqrt: f64 = eig.values.iter().map(|&w| floored_sqrt(w, scale)).sum();
    let den = chi.trace() * chi_ref.trace();
    Ok(tr_sqrt * tr_sqrt / den)
}

/// Wootters concurrence `max(0, w₁ - w₂ - w₃ - w₄)`, the `w_i` being the
/// descending square roots of the eigenvalues of `ρ ρ̃` with
/// `ρ̃ = (Y⊗Y) ρ* (Y⊗Y)`. Evaluated through the Hermitian form `√ρ ρ̃ √ρ`,
/// which has the same spectrum.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let yy = kron(&pauli(2), &pauli(2));
    let flipped = (&(&yy * &rho.matrix().conj()) * &yy).hermitize();
    let root = psd_sqrt(rho.matrix())?;
    let r = (&(&root * &flipped) * &root).hermitize();
    let eig = herm_eig(&r)?;
    let scale = eig.values[0];
    let w: alloc::vec::Vec<f64> = eig.values.iter().map(|&x| floored_sqrt(x, scale)).collect();
    Ok((w[0] - w[1] - w[2] - w[3]).max(0.0))
}

fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Entanglement of formation from the concurrence,
/// `h((1 + √(1 - C²)) / 2)` with `h` the base-2 binary entropy.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

pub fn eof(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence(rho)?))
}

/// `√(⟨small|ρ|small⟩ / ⟨large|ρ|large⟩)`: `√(ρ_HH/ρ_VV)` for the Φ family,
/// `√(ρ_HV/ρ_VH)` for Ψ.
pub fn estimate_epsilon(rho: &DensityMatrix, family: Family) -> Result<f64> {
    check_two_qubit(rho)?;
    let (small, large) = family.populated();
    let den = rho.population(large);
    if den <= MIN_POPULATION {
        return Err(Error::VanishingDenominator("epsilon estimator population"));
    }
    Ok((rho.population(small).max(0.0) / den).sqrt())
}

/// `2(1 - Re⟨small|ρ|large⟩ · ε_exp / ⟨small|ρ|small⟩)`.
pub fn estimate_lambda(rho: &DensityMatrix, family: Family) -> Result<f64> {
    check_two_qubit(rho)?;
    let (small, large) = family.populated();
    let pop = rho.population(small);
    if pop <= MIN_POPULATION {
        return Err(Error::VanishingDenominator("lambda estimator population"));
    }
    let eps = estimate_epsilon(rho, family)?;
    Ok(2.0 * (1.0 - rho.element(small, large).re * eps / pop))
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() == 4 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        })
    }
}

/// All state metrics at once; the target Bell state is `Φ⁺` or `Ψ⁺`
/// according to `family`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub purity: f64,
    pub fidelity_bell: f64,
    pub eof: f64,
    pub concurrence: f64,
    /// `None` when the estimator's denominator vanishes.
    pub epsilon_exp: Option<f64>,
    pub lambda_exp: Option<f64>,
}

impl MetricsReport {
    pub fn of(rho: &DensityMatrix, family: Family) -> Result<Self> {
        let c = concurrence(rho)?;
        Ok(Self {
            purity: purity(rho),
            fidelity_bell: fidelity_pure(rho, &bell(family))?,
            eof: eof_from_concurrence(c),
            concurrence: c,
            epsilon_exp: estimate_epsilon(rho, family).ok(),
            lambda_exp: estimate_lambda(rho, family).ok(),
        })
    }
}
