//! Coincidence-count simulation, state tomography (linear inversion and
//! maximum likelihood) and single-qubit process tomography for
//! non-trace-preserving channels.
//!
//! Each arm is analyzed in one of `|H⟩, |V⟩, |D⟩ = (|H⟩+|V⟩)/√2,
//! |R⟩ = (|H⟩+i|V⟩)/√2`; two-photon tomography uses all 16 products.

// Float supplies libm-backed math where core lacks it.
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channels::{chi_from_action, chi_ideal, ChiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::matcore::{kron_vec, psd_clip, psd_sqrt, solve_real, CMatrix, C64, ONE};
use crate::metrics::process_fidelity;
use crate::optim;
use crate::rng;
use crate::states::{single_qubit_ket, DensityMatrix};

/// Default expected counts for a unit-probability setting.
pub const DEFAULT_ACQUISITION_SCALE: f64 = 10_000.0;

const MLE_TOL: f64 = 1e-10;
const MLE_MAX_ITER: usize = 5000;
/// Weight of the maximally mixed state blended into the MLE starting point;
/// the factorized ascent cannot raise the rank of its iterate.
const MLE_START_MIXING: f64 = 1e-3;

/// Polarization analyzer setting for one arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Analyzer {
    H,
    V,
    D,
    R,
}

impl Analyzer {
    pub const ALL: [Analyzer; 4] = [Analyzer::H, Analyzer::V, Analyzer::D, Analyzer::R];

    pub fn label(self) -> char {
        match self {
            Analyzer::H => 'H',
            Analyzer::V => 'V',
            Analyzer::D => 'D',
            Analyzer::R => 'R',
        }
    }

    pub fn from_label(c: char) -> Option<Self> {
        match c {
            'H' => Some(Analyzer::H),
            'V' => Some(Analyzer::V),
            'D' => Some(Analyzer::D),
            'R' => Some(Analyzer::R),
            _ => None,
        }
    }

    pub fn ket(self) -> [C64; 2] {
        single_qubit_ket(self.label()).expect("analyzer labels are valid")
    }

    fn is_hv(self) -> bool {
        matches!(self, Analyzer::H | Analyzer::V)
    }
}

/// A single-photon or two-photon (coincidence) measurement setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Setting {
    One(Analyzer),
    Two(Analyzer, Analyzer),
}

impl Setting {
    pub fn qubits(self) -> usize {
        match self {
            Setting::One(_) => 1,
            Setting::Two(..) => 2,
        }
    }

    /// Ket whose projector this setting measures.
    pub fn ket(self) -> Vec<C64> {
        match self {
            Setting::One(a) => a.ket().to_vec(),
            Setting::Two(a, b) => kron_vec(&a.ket(), &b.ket()),
        }
    }

    pub fn projector(self) -> CMatrix {
        let k = self.ket();
        CMatrix::outer(&k, &k)
    }

    /// True for settings whose projectors sum to the identity
    /// (the H/V measurement basis on every arm).
    pub fn is_hv_basis(self) -> bool {
        match self {
            Setting::One(a) => a.is_hv(),
            Setting::Two(a, b) => a.is_hv() && b.is_hv(),
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::One(a) => write!(f, "{}", a.label()),
            Setting::Two(a, b) => write!(f, "{}{}", a.label(), b.label()),
        }
    }
}

/// The 4 single-arm settings in canonical order.
pub fn one_qubit_settings() -> Vec<Setting> {
    Analyzer::ALL.iter().map(|&a| Setting::One(a)).collect()
}

/// The 16 product settings `{H,V,D,R}⊗{H,V,D,R}`, first arm slowest.
pub fn two_qubit_settings() -> Vec<Setting> {
    let mut out = Vec::with_capacity(16);
    for a in Analyzer::ALL {
        for b in Analyzer::ALL {
            out.push(Setting::Two(a, b));
        }
    }
    out
}

pub fn canonical_settings(qubits: usize) -> Vec<Setting> {
    if qubits == 1 {
        one_qubit_settings()
    } else {
        two_qubit_settings()
    }
}

/// Coincidence counts per setting.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    entries: BTreeMap<Setting, u64>,
    acquisition_scale: f64,
}

impl CountTable {
    pub fn new(acquisition_scale: f64) -> Result<Self> {
        if !(acquisition_scale > 0.0 && acquisition_scale.is_finite()) {
            return Err(Error::OutOfRange {
                name: "acquisition_scale",
                value: acquisition_scale,
                allowed: "(0, ∞)",
            });
        }
        Ok(Self {
            entries: BTreeMap::new(),
            acquisition_scale,
        })
    }

    pub fn from_entries(acquisition_scale: f64, entries: impl IntoIterator<Item = (Setting, u64)>) -> Result<Self> {
        let mut t = Self::new(acquisition_scale)?;
        for (s, n) in entries {
            t.insert(s, n);
        }
        Ok(t)
    }

    pub fn insert(&mut self, setting: Setting, count: u64) {
        self.entries.insert(setting, count);
    }

    pub fn get(&self, setting: Setting) -> Option<u64> {
        self.entries.get(&setting).copied()
    }

    pub fn acquisition_scale(&self) -> f64 {
        self.acquisition_scale
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in canonical setting order.
    pub fn iter(&self) -> impl Iterator<Item = (Setting, u64)> + '_ {
        self.entries.iter().map(|(&s, &n)| (s, n))
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Counts summed over the H/V measurement basis.
    pub fn hv_total(&self) -> u64 {
        self.iter().filter(|(s, _)| s.is_hv_basis()).map(|(_, n)| n).sum()
    }

    /// Number of qubits, if every setting agrees.
    pub fn qubits(&self) -> Result<usize> {
        let mut it = self.entries.keys().map(|s| s.qubits());
        let Some(q) = it.next() else {
            return Err(Error::Counts("empty table".into()));
        };
        if it.any(|x| x != q) {
            return Err(Error::Counts("mixed one- and two-photon settings".into()));
        }
        Ok(q)
    }

    pub fn same_settings(&self, other: &Self) -> bool {
        self.entries.keys().eq(other.entries.keys())
    }

    /// Same settings with every count replaced by `f(setting_index, count)`.
    pub fn map_counts(&self, mut f: impl FnMut(usize, u64) -> u64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .enumerate()
                .map(|(i, (&s, &n))| (s, f(i, n)))
                .collect(),
            acquisition_scale: self.acquisition_scale,
        }
    }

    fn require_complete(&self) -> Result<usize> {
        let q = self.qubits()?;
        let missing: Vec<String> = canonical_settings(q)
            .into_iter()
            .filter(|s| !self.entries.contains_key(s))
            .map(|s| format!("{s}"))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Counts(format!("missing settings {}", missing.join(","))));
        }
        Ok(q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    /// Expected counts rounded to the nearest integer.
    None,
    /// Independent Poisson draws around the expected counts.
    Poisson,
}

/// `Tr(ρ P)` clipped to `[0, 1]`.
pub fn born_probability(rho: &DensityMatrix, setting: Setting) -> Result<f64> {
    let k = setting.ket();
    if k.len() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: k.len(),
        });
    }
    Ok(rho.matrix().expectation(&k).re.clamp(0.0, 1.0))
}

/// Counts for each setting with mean `acquisition_scale · Tr(ρ P)`.
///
/// Poisson draws for the `i`-th setting use stream `i` of `seed`, so the
/// table depends only on `(state, settings order, scale, seed)`.
pub fn simulate_counts(
    rho: &DensityMatrix,
    settings: &[Setting],
    acquisition_scale: f64,
    noise: Noise,
    seed: u64,
) -> Result<CountTable> {
    let mut table = CountTable::new(acquisition_scale)?;
    for (i, &s) in settings.iter().enumerate() {
        let mean = acquisition_scale * born_probability(rho, s)?;
        let n = match noise {
            Noise::None => mean.round() as u64,
            Noise::Poisson => rng::poisson(mean, &mut rng::stream(seed, i as u64)),
        };
        table.insert(s, n);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QstMethod {
    Linear,
    Mle,
}

impl QstMethod {
    pub fn name(self) -> &'static str {
        match self {
            QstMethod::Linear => "linear",
            QstMethod::Mle => "mle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomoResult {
    pub rho: DensityMatrix,
    pub method: QstMethod,
    /// Poisson log-likelihood of `rho` (MLE only).
    pub log_likelihood: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Negative eigenvalue mass removed (linear inversion only).
    pub clipped_mass: f64,
}

/// Pauli-product operator basis `σ_k` for `qubits` qubits (4 or 16 matrices).
fn pauli_basis(qubits: usize) -> Vec<CMatrix> {
    let single: Vec<CMatrix> = (0..4).map(crate::matcore::pauli).collect();
    if qubits == 1 {
        return single;
    }
    let mut out = Vec::with_capacity(16);
    for a in &single {
        for b in &single {
            out.push(crate::matcore::kron(a, b));
        }
    }
    out
}

/// Unconstrained linear inversion of the Born rule on frequencies normalized
/// by the H/V-basis total. The result is Hermitian with unit trace but may
/// have negative eigenvalues.
pub fn linear_inversion(counts: &CountTable) -> Result<CMatrix> {
    let q = counts.require_complete()?;
    let norm = counts.hv_total();
    if norm == 0 {
        return Err(Error::Counts("no counts in the H/V basis".into()));
    }
    let settings = canonical_settings(q);
    let basis = pauli_basis(q);
    let d = 1usize << q;
    let n = basis.len();

    // Tr(ρ P_s) = Σ_k r_k Tr(σ_k P_s) / d with ρ = Σ_k r_k σ_k / d.
    let mut a = Vec::with_capacity(n * n);
    let mut b = Vec::with_capacity(n);
    for &s in &settings {
        let ket = s.ket();
        for sigma in &basis {
            a.push(sigma.expectation(&ket).re / d as f64);
        }
        b.push(counts.get(s).unwrap_or(0) as f64 / norm as f64);
    }
    let r = solve_real(a, b)?;
    let mut rho = CMatrix::zeros(d);
    for (coef, sigma) in r.iter().zip(&basis) {
        rho = &rho + &sigma.scale_real(coef / d as f64);
    }
    Ok(rho.hermitize())
}

/// Linear inversion followed by projection onto the PSD cone (negative
/// eigenvalues zeroed, trace renormalized).
pub fn qst_linear(counts: &CountTable) -> Result<TomoResult> {
    let raw = linear_inversion(counts)?;
    let (clipped, removed) = psd_clip(&raw)?;
    let rho = DensityMatrix::normalized(clipped)?;
    Ok(TomoResult {
        rho,
        method: QstMethod::Linear,
        log_likelihood: None,
        iterations: 0,
        converged: true,
        clipped_mass: removed,
    })
}

struct Likelihood {
    kets: Vec<Vec<C64>>,
    counts: Vec<f64>,
    scale: f64,
    dim: usize,
}

impl Likelihood {
    fn new(counts: &CountTable) -> Result<Self> {
        let q = counts.require_complete()?;
        let settings = canonical_settings(q);
        Ok(Self {
            kets: settings.iter().map(|s| s.ket()).collect(),
            counts: settings.iter().map(|&s| counts.get(s).unwrap_or(0) as f64).collect(),
            scale: counts.acquisition_scale(),
            dim: 1 << q,
        })
    }

    fn value(&self, rho: &CMatrix) -> f64 {
        let mut ll = 0.0;
        for (k, &n) in self.kets.iter().zip(&self.counts) {
            let mu = self.scale * rho.expectation(k).re;
            if n > 0.0 {
                if mu <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                ll += n * mu.ln();
            }
            ll -= mu;
        }
        ll
    }

    fn unpack(&self, x: &[f64]) -> CMatrix {
        CMatrix::from_entries(self.dim, x.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect())
    }

    /// Log-likelihood of `ρ = T†T / Tr(T†T)` and its gradient with respect to
    /// the real and imaginary parts of `T`, which is `2 T G'` with
    /// `G' = (G - Tr(Gρ) I) / Tr(T†T)` and `G = Σ_s (n_s/p_s - scale) P_s`.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let t = self.unpack(x);
        let a = &t.adjoint() * &t;
        let tr = a.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let rho = a.scale_real(1.0 / tr);
        let mut ll = 0.0;
        let mut g = CMatrix::zeros(self.dim);
        for (k, &n) in self.kets.iter().zip(&self.counts) {
            let p = rho.expectation(k).re;
            let mu = self.scale * p;
            let mut w = -self.scale;
            if n > 0.0 {
                if p <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                ll += n * mu.ln();
                w += n / p;
            }
            ll -= mu;
            for i in 0..self.dim {
                let ki = k[i] * w;
                for j in 0..self.dim {
                    g[(i, j)] += ki * k[j].conj();
                }
            }
        }
        let g_rho: f64 = (&g * &rho).trace().re;
        let mut gp = g;
        for i in 0..self.dim {
            gp[(i, i)] -= C64::new(g_rho, 0.0);
        }
        let grad_m = (&t * &gp).scale_real(2.0 / tr);
        for (slot, z) in grad.chunks_exact_mut(2).zip(grad_m.entries()) {
            slot[0] = z.re;
            slot[1] = z.im;
        }
        ll
    }
}

/// Poisson log-likelihood `Σ_s [n_s ln μ_s - μ_s]`, `μ_s = scale · Tr(ρ P_s)`,
/// over the canonical settings of the table.
pub fn log_likelihood(rho: &DensityMatrix, counts: &CountTable) -> Result<f64> {
    let lik = Likelihood::new(counts)?;
    if lik.dim != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: lik.dim,
            got: rho.dim(),
        });
    }
    Ok(lik.value(rho.matrix()))
}

/// Maximum-likelihood state over the PSD unit-trace cone, parametrized as
/// `ρ = T†T / Tr(T†T)` and climbed with L-BFGS from the (slightly mixed)
/// linear-inversion estimate. Positivity holds by construction.
pub fn qst_mle(counts: &CountTable) -> Result<TomoResult> {
    let lik = Likelihood::new(counts)?;
    let start = qst_linear(counts)?;
    let d = lik.dim;
    let mixed = &start.rho.matrix().scale_real(1.0 - MLE_START_MIXING)
        + &CMatrix::identity(d).scale_real(MLE_START_MIXING / d as f64);
    let t0 = psd_sqrt(&mixed)?;
    let x0: Vec<f64> = t0.entries().iter().flat_map(|z| [z.re, z.im]).collect();

    let out = optim::maximize(|x, g| lik.value_and_gradient(x, g), x0, MLE_TOL, MLE_MAX_ITER);
    let t = lik.unpack(&out.x);
    let a = (&t.adjoint() * &t).hermitize();
    let rho = DensityMatrix::normalized(a)?;
    Ok(TomoResult {
        rho,
        method: QstMethod::Mle,
        log_likelihood: Some(out.value),
        iterations: out.iterations,
        converged: out.converged,
        clipped_mass: 0.0,
    })
}

pub fn qst(counts: &CountTable, method: QstMethod) -> Result<TomoResult> {
    match method {
        QstMethod::Linear => qst_linear(counts),
        QstMethod::Mle => qst_mle(counts),
    }
}

/// Process-tomography data: one single-photon table per probe state
/// `(H, V, D, R)` through the channel, and the same probes through the
/// identity (substrate-only) reference.
#[derive(Debug, Clone, PartialEq)]
pub struct QptInput {
    pub probe_tables: [CountTable; 4],
    pub reference_tables: [CountTable; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct QptResult {
    /// Hermitized χ straight from the probe outputs; may have small negative
    /// eigenvalues under noise.
    pub chi_raw: ChiMatrix,
    /// PSD projection of `chi_raw`; what fidelity calculations consume.
    pub chi: ChiMatrix,
    /// Relative transmission `p_i = N_i / N_i^r` per probe `(H, V, D, R)`.
    pub probe_weights: [f64; 4],
    pub clipped_mass: f64,
}

/// Single-qubit process tomography with non-trace-preserving weighting.
///
/// Each probe output is reconstructed by linear inversion and weighted by
/// its H/V-basis count total relative to the reference. The action on
/// `|H⟩⟨V|` and `|V⟩⟨H|` follows from
/// `ε(|H⟩⟨V|) = ε(D) + iε(R) - ½(1+i)[ε(H) + ε(V)]` and its conjugate
/// partner, after which χ is read off the Choi matrix.
pub fn qpt_single_qubit(input: &QptInput) -> Result<QptResult> {
    let mut outputs: [CMatrix; 4] = core::array::from_fn(|_| CMatrix::zeros(2));
    let mut weights = [0.0; 4];
    for i in 0..4 {
        let probe = &input.probe_tables[i];
        let reference = &input.reference_tables[i];
        if !probe.same_settings(reference) {
            return Err(Error::Counts(format!(
                "probe {} and its reference cover different settings",
                Analyzer::ALL[i].label()
            )));
        }
        let n_ref = reference.hv_total();
        if n_ref == 0 {
            return Err(Error::Counts(format!(
                "zero reference counts for probe {}",
                Analyzer::ALL[i].label()
            )));
        }
        let n = probe.hv_total();
        weights[i] = n as f64 / n_ref as f64;
        if n > 0 {
            outputs[i] = qst_linear(probe)?.rho.into_matrix().scale_real(weights[i]);
        }
    }
    let [eh, ev, ed, er] = outputs;
    let hv_sum = &eh + &ev;
    let half = C64::new(0.5, 0.0);
    let e_hv = &(&ed + &er.scale(crate::matcore::I)) - &hv_sum.scale(half * (ONE + crate::matcore::I));
    let e_vh = &(&ed - &er.scale(crate::matcore::I)) - &hv_sum.scale(half * (ONE - crate::matcore::I));
    let action = [[eh, e_hv], [e_vh, ev]];

    let raw = chi_from_action(&action).hermitize();
    let (clipped, removed) = psd_clip(&raw)?;
    Ok(QptResult {
        chi_raw: ChiMatrix::from_reconstruction(raw)?,
        chi: ChiMatrix::from_reconstruction(clipped)?,
        probe_weights: weights,
        clipped_mass: removed,
    })
}

/// Simulated probe and reference tables for a single-qubit channel.
///
/// Probe `i` is measured with expected counts `scale · Tr(ε(|i⟩⟨i|) P)`;
/// the reference uses the identity channel. Streams are derived from `seed`
/// per (table, probe) so every table is independent.
pub fn simulate_qpt(channel: &KrausChannel, acquisition_scale: f64, noise: Noise, seed: u64) -> Result<QptInput> {
    if channel.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: channel.dim(),
        });
    }
    let settings = one_qubit_settings();
    let make = |ch: &KrausChannel, tag: u64| -> Result<[CountTable; 4]> {
        let mut tables: [Option<CountTable>; 4] = Default::default();
        for (i, probe) in Analyzer::ALL.iter().enumerate() {
            let k = probe.ket();
            let out = ch.apply_unnormalized(&CMatrix::outer(&k, &k));
            let p = out.trace().re;
            let sub_seed = rng::derive_seed(seed, tag * 4 + i as u64);
            let table = if p <= 1e-15 {
                CountTable::from_entries(acquisition_scale, settings.iter().map(|&s| (s, 0)))?
            } else {
                let rho = DensityMatrix::normalized(out)?;
                let mut t = simulate_counts(&rho, &settings, acquisition_scale * p, noise, sub_seed)?;
                t.acquisition_scale = acquisition_scale;
                t
            };
            tables[i] = Some(table);
        }
        Ok(tables.map(|t| t.expect("filled above")))
    };
    Ok(QptInput {
        probe_tables: make(channel, 0)?,
        reference_tables: make(&KrausChannel::identity(2), 1)?,
    })
}

const GOLDEN_TOL: f64 = 1e-4;

/// `T_V ∈ [0, 1]` maximizing `process_fidelity(χ, chi_ideal(T_V))`, by
/// golden-section search to a bracket narrower than 1e-4. Returns the
/// maximizer and the fidelity there.
pub fn fit_tv(chi: &ChiMatrix) -> Result<(f64, f64)> {
    let f = |t: f64| -> Result<f64> { process_fidelity(chi, &chi_ideal(t)?) };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > GOLDEN_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
    }
    let mut best = ((lo + hi) / 2.0, f((lo + hi) / 2.0)?);
    // the bracket can only close on an endpoint from the inside
    for edge in [0.0, 1.0] {
        let fe = f(edge)?;
        if fe > best.1 {
            best = (edge, fe);
        }
    }
    Ok(best)
}
