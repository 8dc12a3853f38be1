//! Kraus channels: the partial-polarizer filter, the dephasing preparation
//! stage, local application with heralded success probability, and the Pauli
//! process-matrix (χ) representation.

// Float supplies libm-backed math where core lacks it.
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_unit_interval, Error, Result};
use crate::matcore::{herm_eig, kron, pauli, CMatrix, C64, HERMITIAN_TOL, ZERO};
use crate::states::{DensityMatrix, Family};

const COMPLETENESS_TOL: f64 = 1e-10;
const MIN_TRANSMISSION: f64 = 1e-12;

/// Ordered Kraus operators with `Σ K†K ≤ I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
    trace_preserving: bool,
}

impl KrausChannel {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        };
        let dim = first.dim();
        if let Some(bad) = operators.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        let sum = completeness(&operators);
        let max = herm_eig(&sum)?.values[0];
        if max > 1.0 + COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "Σ K†K exceeds identity: max eigenvalue {max}"
            )));
        }
        let trace_preserving = sum.distance(&CMatrix::identity(dim)) <= COMPLETENESS_TOL;
        Ok(Self {
            operators,
            trace_preserving,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            operators: vec![CMatrix::identity(dim)],
            trace_preserving: true,
        }
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `Σ K ρ K†` without renormalization.
    pub fn apply_unnormalized(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.dim());
        for k in &self.operators {
            out = &out + &m.conjugate_by(k);
        }
        out
    }
}

fn completeness(ops: &[CMatrix]) -> CMatrix {
    let dim = ops[0].dim();
    ops.iter()
        .fold(CMatrix::zeros(dim), |acc, k| &acc + &(&k.adjoint() * k))
}

/// Intensity transmissions of the partial polarizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialPolarizerParams {
    pub t_v: f64,
    pub t_h: f64,
}

impl PartialPolarizerParams {
    pub fn new(t_v: f64) -> Self {
        Self { t_v, t_h: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_interval("t_v", self.t_v)?;
        check_unit_interval("t_h", self.t_h)
    }
}

impl Default for PartialPolarizerParams {
    fn default() -> Self {
        Self { t_v: 1.0, t_h: 1.0 }
    }
}

/// Single Kraus operator `diag(√T_H, √T_V)`.
pub fn partial_polarizer(p: &PartialPolarizerParams) -> Result<KrausChannel> {
    p.validate()?;
    KrausChannel::new(vec![CMatrix::from_real_diag(&[p.t_h.sqrt(), p.t_v.sqrt()])])
}

/// Half-wave plate at angle `theta` in the H/V basis; it is its own inverse.
pub fn half_wave_plate(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::from_real(2, &[c, s, s, -c])
}

/// Dephasing stage `E₁ = U diag(1, √(1-λ)) U`, `E₂ = U diag(0, √λ) U` with
/// `U` the half-wave plate at `theta`. Single-qubit operators; lift with
/// [`apply_local`].
pub fn phase_damping(theta: f64, lambda: f64) -> Result<KrausChannel> {
    check_unit_interval("lambda", lambda)?;
    let u = half_wave_plate(theta);
    let e1 = &(&u * &CMatrix::from_real_diag(&[1.0, (1.0 - lambda).sqrt()])) * &u;
    let e2 = &(&u * &CMatrix::from_real_diag(&[0.0, lambda.sqrt()])) * &u;
    KrausChannel::new(vec![e1, e2])
}

/// Which photon of a pair a local channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    First,
    Second,
}

fn lift(k: &CMatrix, arm: Arm) -> CMatrix {
    match arm {
        Arm::First => kron(k, &CMatrix::identity(2)),
        Arm::Second => kron(&CMatrix::identity(2), k),
    }
}

/// Apply a single-qubit channel to one photon of a two-photon state.
///
/// Returns the renormalized output and the heralded success probability
/// (the trace before renormalization).
pub fn apply_local(ch: &KrausChannel, rho: &DensityMatrix, arm: Arm) -> Result<(DensityMatrix, f64)> {
    if ch.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: ch.dim(),
        });
    }
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let mut out = CMatrix::zeros(4);
    for k in ch.operators() {
        out = &out + &rho.matrix().conjugate_by(&lift(k, arm));
    }
    let p = out.trace().re;
    if p <= MIN_TRANSMISSION {
        return Err(Error::FullyFiltered(p));
    }
    let out = DensityMatrix::new(out.scale_real(1.0 / p))?;
    Ok((out, p.min(1.0)))
}

/// Closed-form filtered state for the leading-order dephased family:
/// populations `ε²T_H`, `T_V` and coherence `ε√(T_H T_V)(1-λ/2)`, all over
/// `T_V + T_H ε²`.
pub fn distilled_analytic(
    epsilon: f64,
    lambda: f64,
    p: &PartialPolarizerParams,
    family: Family,
) -> Result<DensityMatrix> {
    p.validate()?;
    check_unit_interval("lambda", lambda)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            allowed: "[0, ∞)",
        });
    }
    let den = p.t_v + p.t_h * epsilon * epsilon;
    if den <= MIN_TRANSMISSION {
        return Err(Error::VanishingDenominator("T_V + T_H ε²"));
    }
    let (small, large) = family.populated();
    let mut m = CMatrix::zeros(4);
    let coh = C64::new(epsilon * (p.t_h * p.t_v).sqrt() * (1.0 - lambda / 2.0) / den, 0.0);
    m[(small, small)] = C64::new(epsilon * epsilon * p.t_h / den, 0.0);
    m[(large, large)] = C64::new(p.t_v / den, 0.0);
    m[(small, large)] = coh;
    m[(large, small)] = coh;
    DensityMatrix::new(m)
}

/// Heralded success probability of the filter on the leading-order family.
pub fn distilled_success_probability(epsilon: f64, p: &PartialPolarizerParams) -> f64 {
    (p.t_v + p.t_h * epsilon * epsilon) / (1.0 + epsilon * epsilon)
}

/// Process matrix in the Pauli basis `(I, X, Y, Z)`:
/// `ρ → Σ_ij χ_ij E_i ρ E_j†`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiMatrix {
    matrix: CMatrix,
}

impl ChiMatrix {
    /// Hermitian within 1e-10 with trace in `(0, 1 + 1e-10]`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let chi = Self::from_reconstruction(matrix)?;
        let tr = chi.trace();
        if tr > 1.0 + 1e-10 {
            return Err(Error::InvalidChannel(format!("Tr(χ) = {tr} exceeds 1")));
        }
        Ok(chi)
    }

    /// Looser check for χ assembled from noisy counts, whose trace can
    /// fluctuate above 1: Hermitian within 1e-10 and positive trace.
    pub fn from_reconstruction(matrix: CMatrix) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: matrix.dim(),
            });
        }
        let asym = matrix.max_asymmetry();
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let tr = matrix.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidChannel(format!("Tr(χ) = {tr} is not positive")));
        }
        Ok(Self {
            matrix: matrix.hermitize(),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Σ_ij χ_ij E_i ρ E_j†` on a single-qubit operator.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let paulis: Vec<CMatrix> = (0..4).map(pauli).collect();
        let mut out = CMatrix::zeros(2);
        for (i, ei) in paulis.iter().enumerate() {
            let left = ei * rho;
            for (j, ej) in paulis.iter().enumerate() {
                let c = self.matrix[(i, j)];
                if c == ZERO {
                    continue;
                }
                out = &out + &(&left * &ej.adjoint()).scale(c);
            }
        }
        out
    }
}

/// χ of the ideal partial polarizer with `T_H = 1`.
pub fn chi_ideal(t_v: f64) -> Result<ChiMatrix> {
    check_unit_interval("t_v", t_v)?;
    let s = t_v.sqrt();
    let mut m = CMatrix::zeros(4);
    m[(0, 0)] = C64::new((1.0 + 2.0 * s + t_v) / 4.0, 0.0);
    m[(0, 3)] = C64::new((1.0 - t_v) / 4.0, 0.0);
    m[(3, 0)] = C64::new((1.0 - t_v) / 4.0, 0.0);
    m[(3, 3)] = C64::new((1.0 - 2.0 * s + t_v) / 4.0, 0.0);
    ChiMatrix::new(m)
}

/// χ of a single-qubit Kraus channel, by expanding each `K_k = Σ_i e_ki E_i`
/// with `e_ki = Tr(E_i K_k)/2` and summing `χ_ij = Σ_k e_ki conj(e_kj)`.
pub fn channel_to_chi(ch: &KrausChannel) -> Result<ChiMatrix> {
    if ch.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: ch.dim(),
        });
    }
    let paulis: Vec<CMatrix> = (0..4).map(pauli).collect();
    let mut m = CMatrix::zeros(4);
    for k in ch.operators() {
        let coeffs: Vec<C64> = paulis.iter().map(|e| (e * k).trace() * 0.5).collect();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += coeffs[i] * coeffs[j].conj();
            }
        }
    }
    ChiMatrix::new(m)
}

/// χ from the channel's action on the four operators `|m⟩⟨n|`, given as
/// `action[m][n] = ε(|m⟩⟨n|)`.
///
/// Builds the Choi matrix `C = Σ_mn |m⟩⟨n| ⊗ ε(|m⟩⟨n|)` and projects it on
/// the vectorized Paulis `|v_i⟩ = (I ⊗ E_i)|Ω⟩`: `χ_ij = ⟨v_i|C|v_j⟩ / 4`.
pub fn chi_from_action(action: &[[CMatrix; 2]; 2]) -> CMatrix {
    let mut choi = CMatrix::zeros(4);
    for (m, row) in action.iter().enumerate() {
        for (n, out) in row.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    choi[(2 * m + a, 2 * n + b)] += out[(a, b)];
                }
            }
        }
    }
    let vecs: Vec<Vec<C64>> = (0..4)
        .map(|i| {
            let e = pauli(i);
            let mut v = vec![ZERO; 4];
            for m in 0..2 {
                for a in 0..2 {
                    v[2 * m + a] = e[(a, m)];
                }
            }
            v
        })
        .collect();
    let mut chi = CMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = ZERO;
            for r in 0..4 {
                for c in 0..4 {
                    acc += vecs[i][r].conj() * choi[(r, c)] * vecs[j][c];
                }
            }
            chi[(i, j)] = acc * 0.25;
        }
    }
    chi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::purity;
    use crate::states::{density_from_ket, make_mixed_approx, make_mixed_exact, make_phi, MixedPrepParams};

    #[test]
    fn partial_polarizer_examples() {
        let id = partial_polarizer(&PartialPolarizerParams::new(1.0)).unwrap();
        assert!(id.is_trace_preserving());
        assert_eq!(id.operators()[0], CMatrix::identity(2));

        let pol = partial_polarizer(&PartialPolarizerParams::new(0.0)).unwrap();
        assert_eq!(pol.operators()[0], CMatrix::from_real_diag(&[1.0, 0.0]));
        assert!(!pol.is_trace_preserving());

        let k = partial_polarizer(&PartialPolarizerParams::new(0.41)).unwrap();
        assert!((k.operators()[0][(1, 1)].re - 0.6403).abs() < 5e-5);
        assert!(partial_polarizer(&PartialPolarizerParams::new(1.2)).is_err());
    }

    #[test]
    fn phase_damping_examples() {
        let ch = phase_damping(0.3, 0.0).unwrap();
        assert!(ch.operators()[0].distance(&CMatrix::identity(2)) < 1e-15);
        assert!(ch.operators()[1].frobenius_norm() < 1e-15);

        let ch = phase_damping(0.0, 0.36).unwrap();
        assert!(ch.operators()[0].distance(&CMatrix::from_real_diag(&[1.0, 0.8])) < 1e-15);
        assert!(ch.operators()[1].distance(&CMatrix::from_real_diag(&[0.0, 0.6])) < 1e-15);

        let ch = phase_damping(core::f64::consts::FRAC_PI_4, 1.0).unwrap();
        assert!(ch.is_trace_preserving());
        assert!(completeness(ch.operators()).distance(&CMatrix::identity(2)) < 1e-12);
        // Full dephasing in the D/A basis: |D⟩⟨D| is a fixed point, and its
        // H/V coherence survives while |H⟩⟨H| becomes maximally mixed.
        let h = CMatrix::from_real_diag(&[1.0, 0.0]);
        let out = ch.apply_unnormalized(&h);
        assert!(out.distance(&CMatrix::from_real_diag(&[0.5, 0.5])) < 1e-12);

        assert!(phase_damping(0.0, 1.5).is_err());
    }

    #[test]
    fn apply_identity_is_noop() {
        let rho = make_mixed_approx(0.59, 0.54, Family::Phi).unwrap();
        let (out, p) = apply_local(&KrausChannel::identity(2), &rho, Arm::First).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(out.matrix().distance(rho.matrix()) < 1e-15);
    }

    #[test]
    fn optimal_filter_gives_bell() {
        let eps: f64 = 0.49;
        let rho = density_from_ket(&make_phi(eps).unwrap());
        let ch = partial_polarizer(&PartialPolarizerParams::new(eps * eps)).unwrap();
        let (out, p) = apply_local(&ch, &rho, Arm::First).unwrap();
        let bell = density_from_ket(&make_phi(1.0).unwrap());
        assert!(out.matrix().distance(bell.matrix()) < 1e-12);
        let expected = 2.0 * eps * eps / (1.0 + eps * eps);
        assert!((p - expected).abs() < 1e-12);
        assert!((p - 0.3872).abs() < 5e-5);
    }

    #[test]
    fn filter_on_second_arm_is_symmetric() {
        let rho = density_from_ket(&make_phi(0.3).unwrap());
        let ch = partial_polarizer(&PartialPolarizerParams::new(0.09)).unwrap();
        let (a, pa) = apply_local(&ch, &rho, Arm::First).unwrap();
        let (b, pb) = apply_local(&ch, &rho, Arm::Second).unwrap();
        assert!((pa - pb).abs() < 1e-15);
        assert!(a.matrix().distance(b.matrix()) < 1e-12);
    }

    #[test]
    fn fully_filtered_is_rejected() {
        let vv = density_from_ket(&make_phi(0.0).unwrap());
        let ch = partial_polarizer(&PartialPolarizerParams::new(0.0)).unwrap();
        assert!(matches!(
            apply_local(&ch, &vv, Arm::First),
            Err(Error::FullyFiltered(_))
        ));
    }

    #[test]
    fn phase_damping_reproduces_exact_preparation() {
        let p = MixedPrepParams {
            epsilon: 0.45,
            lambda: 0.7,
            theta: 0.37,
            family: Family::Phi,
        };
        let ch = phase_damping(p.theta, p.lambda).unwrap();
        let rho = density_from_ket(&make_phi(p.epsilon).unwrap());
        let (out, prob) = apply_local(&ch, &rho, Arm::First).unwrap();
        assert!((prob - 1.0).abs() < 1e-12);
        let exact = make_mixed_exact(&p).unwrap();
        assert!(out.matrix().distance(exact.matrix()) < 1e-12);
    }

    #[test]
    fn single_kraus_keeps_pure_states_pure() {
        let rho = density_from_ket(&make_phi(0.2).unwrap());
        for &tv in &[0.05, 0.3, 0.9] {
            let ch = partial_polarizer(&PartialPolarizerParams { t_v: tv, t_h: 0.95 }).unwrap();
            let (out, _) = apply_local(&ch, &rho, Arm::First).unwrap();
            assert!((purity(&out) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn distilled_analytic_examples() {
        let eps: f64 = 0.49;
        let bell = distilled_analytic(eps, 0.0, &PartialPolarizerParams::new(eps * eps), Family::Phi).unwrap();
        let target = density_from_ket(&make_phi(1.0).unwrap());
        assert!(bell.matrix().distance(target.matrix()) < 1e-12);

        let same = distilled_analytic(0.59, 0.54, &PartialPolarizerParams { t_v: 0.5, t_h: 0.5 }, Family::Phi).unwrap();
        let input = make_mixed_approx(0.59, 0.54, Family::Phi).unwrap();
        assert!(same.matrix().distance(input.matrix()) < 1e-12);

        let zero = PartialPolarizerParams { t_v: 0.0, t_h: 0.0 };
        assert!(matches!(
            distilled_analytic(0.5, 0.1, &zero, Family::Phi),
            Err(Error::VanishingDenominator(_))
        ));
    }

    #[test]
    fn chi_ideal_examples() {
        let id = chi_ideal(1.0).unwrap();
        assert!(id.matrix().distance(&CMatrix::from_real_diag(&[1.0, 0.0, 0.0, 0.0])) < 1e-15);

        let pol = chi_ideal(0.0).unwrap();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((pol.matrix()[(i, j)].re - 0.25).abs() < 1e-15);
        }
        assert!((pol.trace() - 0.5).abs() < 1e-15);

        let c = chi_ideal(0.11).unwrap();
        assert!((c.matrix()[(0, 0)].re - 0.4433).abs() < 5e-5);
        assert!((c.matrix()[(0, 3)].re - 0.2225).abs() < 5e-5);
        assert!((c.matrix()[(3, 3)].re - 0.1117).abs() < 5e-5);
        assert!((c.trace() - 0.555).abs() < 1e-15);
    }

    #[test]
    fn chi_of_simple_channels() {
        let id = channel_to_chi(&KrausChannel::identity(2)).unwrap();
        assert!(id.matrix().distance(&CMatrix::from_real_diag(&[1.0, 0.0, 0.0, 0.0])) < 1e-15);
        let z = channel_to_chi(&KrausChannel::new(vec![pauli(3)]).unwrap()).unwrap();
        assert!(z.matrix().distance(&CMatrix::from_real_diag(&[0.0, 0.0, 0.0, 1.0])) < 1e-15);
        for &tv in &[0.0, 0.11, 0.41, 0.69, 1.0] {
            let a = channel_to_chi(&partial_polarizer(&PartialPolarizerParams::new(tv)).unwrap()).unwrap();
            let b = chi_ideal(tv).unwrap();
            assert!(a.matrix().distance(b.matrix()) < 1e-15);
        }
    }

    #[test]
    fn chi_reproduces_channel_on_probes() {
        let ch = phase_damping(0.4, 0.6).unwrap();
        let chi = channel_to_chi(&ch).unwrap();
        for label in ['H', 'V', 'D', 'R'] {
            let k = crate::states::single_qubit_ket(label).unwrap();
            let rho = CMatrix::outer(&k, &k);
            let direct = ch.apply_unnormalized(&rho);
            assert!(chi.apply(&rho).distance(&direct) < 1e-12);
        }
    }

    #[test]
    fn choi_route_matches_kraus_route() {
        let ch = KrausChannel::new(vec![CMatrix::from_entries(
            2,
            vec![C64::new(0.8, 0.1), C64::new(0.1, 0.0), ZERO, C64::new(0.3, -0.2)],
        )])
        .unwrap();
        let action: [[CMatrix; 2]; 2] = core::array::from_fn(|m| {
            core::array::from_fn(|n| {
                let mut e = CMatrix::zeros(2);
                e[(m, n)] = C64::new(1.0, 0.0);
                ch.apply_unnormalized(&e)
            })
        });
        let a = chi_from_action(&action);
        let b = channel_to_chi(&ch).unwrap();
        assert!(a.distance(b.matrix()) < 1e-14);
    }

    #[test]
    fn rejects_expanding_operators() {
        let r = KrausChannel::new(vec![CMatrix::from_real_diag(&[1.1, 1.0])]);
        assert!(matches!(r, Err(Error::InvalidChannel(_))));
    }
}
