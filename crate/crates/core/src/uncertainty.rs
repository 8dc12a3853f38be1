//! Monte Carlo error bars by Poisson resampling of count tables.
//!
//! Each trial redraws every count as `n' ~ Poisson(n)` and reruns an
//! estimator on the redrawn table. The draw for setting `s` in trial `t`
//! comes from its own stream `(t << 32) | s`, so results do not depend on
//! the order in which trials are evaluated.

// Float supplies libm-backed math where core lacks it.
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::rng;
use crate::states::Family;
use crate::tomography::{qst, CountTable, QstMethod};

pub const DEFAULT_TRIALS: usize = 1000;
/// Largest tolerated fraction of trials whose estimator failed.
pub const MAX_SKIP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McReport {
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator) over successful trials.
    pub std: f64,
    pub n_trials: usize,
    pub skipped: usize,
    pub seed: u64,
}

/// Produces the redrawn table for one trial.
pub trait CountSampler {
    fn resample(&self, counts: &CountTable, trial: u64, seed: u64) -> CountTable;
}

/// Parametric bootstrap around the observed counts.
#[derive(Debug, Clone, Copy, Default)]
pub struct PoissonSampler;

impl CountSampler for PoissonSampler {
    fn resample(&self, counts: &CountTable, trial: u64, seed: u64) -> CountTable {
        counts.map_counts(|i, n| {
            let mut r = rng::stream(seed, (trial << 32) | i as u64);
            rng::poisson(n as f64, &mut r)
        })
    }
}

/// Returns the table unchanged; every trial sees identical data.
#[derive(Debug, Clone, Copy, Default)]
pub struct FixedSampler;

impl CountSampler for FixedSampler {
    fn resample(&self, counts: &CountTable, _trial: u64, _seed: u64) -> CountTable {
        counts.clone()
    }
}

/// Scalar figure of merit extracted from a reconstructed state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Purity,
    FidelityBell,
    Eof,
    Concurrence,
    Epsilon,
    Lambda,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Purity,
        Metric::FidelityBell,
        Metric::Eof,
        Metric::Concurrence,
        Metric::Epsilon,
        Metric::Lambda,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Purity => "purity",
            Metric::FidelityBell => "fidelity_bell",
            Metric::Eof => "eof",
            Metric::Concurrence => "concurrence",
            Metric::Epsilon => "epsilon",
            Metric::Lambda => "lambda",
        }
    }

    /// Value from a report; `None` when the estimator was undefined.
    pub fn read(self, r: &MetricsReport) -> Option<f64> {
        match self {
            Metric::Purity => Some(r.purity),
            Metric::FidelityBell => Some(r.fidelity_bell),
            Metric::Eof => Some(r.eof),
            Metric::Concurrence => Some(r.concurrence),
            Metric::Epsilon => r.epsilon_exp,
            Metric::Lambda => r.lambda_exp,
        }
    }
}

/// State reconstruction followed by a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateEstimator {
    pub method: QstMethod,
    pub metric: Metric,
    pub family: Family,
}

impl StateEstimator {
    pub fn evaluate(&self, counts: &CountTable) -> Result<f64> {
        let report = report_of(counts, self.method, self.family)?;
        self.metric
            .read(&report)
            .ok_or(Error::VanishingDenominator(self.metric.name()))
    }
}

fn report_of(counts: &CountTable, method: QstMethod, family: Family) -> Result<MetricsReport> {
    MetricsReport::of(&qst(counts, method)?.rho, family)
}

/// Mean and sample standard deviation of a scalar estimator under Poisson
/// resampling.
pub fn mc_resample<F>(counts: &CountTable, estimator: F, n_trials: usize, seed: u64) -> Result<McReport>
where
    F: FnMut(&CountTable) -> Result<f64>,
{
    mc_resample_with(&PoissonSampler, counts, estimator, n_trials, seed)
}

pub fn mc_resample_with<S, F>(
    sampler: &S,
    counts: &CountTable,
    mut estimator: F,
    n_trials: usize,
    seed: u64,
) -> Result<McReport>
where
    S: CountSampler + ?Sized,
    F: FnMut(&CountTable) -> Result<f64>,
{
    let reports = mc_resample_vec(sampler, counts, |t| Ok([estimator(t)?]), n_trials, seed)?;
    Ok(reports[0])
}

/// Vector-valued variant: one estimator call per trial yields `N` values,
/// each summarized separately. A trial is skipped if the call fails or any
/// value is non-finite.
pub fn mc_resample_vec<S, F, const N: usize>(
    sampler: &S,
    counts: &CountTable,
    mut estimator: F,
    n_trials: usize,
    seed: u64,
) -> Result<[McReport; N]>
where
    S: CountSampler + ?Sized,
    F: FnMut(&CountTable) -> Result<[f64; N]>,
{
    if n_trials < 2 {
        return Err(Error::OutOfRange {
            name: "n_trials",
            value: n_trials as f64,
            allowed: "≥ 2",
        });
    }
    let mut samples: Vec<[f64; N]> = Vec::with_capacity(n_trials);
    for trial in 0..n_trials as u64 {
        let table = sampler.resample(counts, trial, seed);
        if let Ok(v) = estimator(&table) {
            if v.iter().all(|x| x.is_finite()) {
                samples.push(v);
            }
        }
    }
    let skipped = n_trials - samples.len();
    if skipped as f64 > MAX_SKIP_FRACTION * n_trials as f64 || samples.len() < 2 {
        return Err(Error::TooManySkips {
            skipped,
            total: n_trials,
        });
    }
    Ok(core::array::from_fn(|k| {
        let (mean, std) = mean_std(samples.iter().map(|s| s[k]));
        McReport {
            mean,
            std,
            n_trials,
            skipped,
            seed,
        }
    }))
}

/// All six metrics of a reconstruction, with error bars.
pub fn mc_metrics<S: CountSampler + ?Sized>(
    sampler: &S,
    counts: &CountTable,
    method: QstMethod,
    family: Family,
    n_trials: usize,
    seed: u64,
) -> Result<[McReport; 6]> {
    mc_resample_vec(
        sampler,
        counts,
        |t| {
            let r = report_of(t, method, family)?;
            Ok(Metric::ALL.map(|m| m.read(&r).unwrap_or(f64::NAN)))
        },
        n_trials,
        seed,
    )
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bell, density_from_ket, make_mixed_approx};
    use crate::tomography::{simulate_counts, two_qubit_settings, Noise};

    fn bell_counts(scale: f64) -> CountTable {
        simulate_counts(
            &density_from_ket(&bell(Family::Phi)),
            &two_qubit_settings(),
            scale,
            Noise::None,
            0,
        )
        .unwrap()
    }

    fn est(metric: Metric) -> StateEstimator {
        StateEstimator {
            method: QstMethod::Linear,
            metric,
            family: Family::Phi,
        }
    }

    #[test]
    fn purity_concentrates_at_high_counts() {
        let e = StateEstimator {
            method: QstMethod::Mle,
            ..est(Metric::Purity)
        };
        let r = mc_resample(&bell_counts(1e6), |t| e.evaluate(t), 100, 5).unwrap();
        assert!((r.mean - 1.0).abs() < 5e-4, "{r:?}");
        assert!(r.std <= 1e-3, "{r:?}");
        assert_eq!(r.skipped, 0);
    }

    #[test]
    fn fixed_sampler_has_zero_spread() {
        let e = est(Metric::Eof);
        let r = mc_resample_with(&FixedSampler, &bell_counts(1e4), |t| e.evaluate(t), 2, 0).unwrap();
        assert_eq!(r.std, 0.0);
        assert_eq!(r.n_trials, 2);
    }

    #[test]
    fn deterministic_given_seed() {
        let e = est(Metric::Concurrence);
        let c = bell_counts(3000.0);
        let a = mc_resample(&c, |t| e.evaluate(t), 20, 42).unwrap();
        let b = mc_resample(&c, |t| e.evaluate(t), 20, 42).unwrap();
        assert_eq!(a, b);
        let other = mc_resample(&c, |t| e.evaluate(t), 20, 43).unwrap();
        assert_ne!(a.mean, other.mean);
    }

    #[test]
    fn trial_streams_are_independent_of_order() {
        let c = bell_counts(1000.0);
        let t5 = PoissonSampler.resample(&c, 5, 9);
        assert_eq!(t5, PoissonSampler.resample(&c, 5, 9));
        assert_ne!(t5, PoissonSampler.resample(&c, 6, 9));
    }

    #[test]
    fn rejects_too_many_failures() {
        let c = bell_counts(1000.0);
        let mut calls = 0;
        let r = mc_resample(
            &c,
            |_| {
                calls += 1;
                if calls % 5 == 0 {
                    Err(Error::Counts("boom".into()))
                } else {
                    Ok(1.0)
                }
            },
            100,
            0,
        );
        assert!(matches!(
            r,
            Err(Error::TooManySkips {
                skipped: 20,
                total: 100
            })
        ));
        assert!(mc_resample(&c, |_| Ok(1.0), 1, 0).is_err());
    }

    #[test]
    fn std_shrinks_like_inverse_root_scale() {
        let rho = make_mixed_approx(0.59, 0.54, Family::Phi).unwrap();
        let e = est(Metric::Purity);
        let std_at = |scale: f64| {
            let c = simulate_counts(&rho, &two_qubit_settings(), scale, Noise::None, 0).unwrap();
            mc_resample(&c, |t| e.evaluate(t), 200, 1).unwrap().std
        };
        let ratio = std_at(2500.0) / std_at(10_000.0);
        assert!(ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5, "{ratio}");
    }
}
