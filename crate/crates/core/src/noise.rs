//! Per-switching-event error injection and failure-rate estimation.
//!
//! With a per-switch error rate `epsilon`, a bucket-brigade call exposes
//! only its `n` active switches, for an overall failure rate of
//! `1 - (1 - eps)^n` (first order `n*eps`). A fanout call fires all
//! `2^n - 1` routing gates, so its failure rate is `1 - (1 - eps)^(2^n - 1)`
//! — tolerable per-gate error must shrink like `2^-n`.
//!
//! Monte Carlo estimation runs the full protocol per trial with sampled
//! faults and compares the final state against the ideal memory call; any
//! deviation counts as a failed call. Trials are independent: each derives
//! its random stream from (seed, trial index), so parallel and serial runs
//! agree bit for bit.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bucket::bb_call_with_faults;
use crate::error::{Result, SimError};
use crate::event::{FaultAction, FaultInjector, SwitchSite};
use crate::fanout::fanout_call_with_faults;
use crate::oracle::{ideal_qram_oracle, AccessMode, MemoryArray};
use crate::qstate::{fidelity, make_address_state, MemoryMode, QuantumState, Trit};

/// Fidelity below which a noisy call counts as failed: any deviation from
/// the ideal output fails the call.
pub const FAILURE_FIDELITY: f64 = 1.0 - 1e-9;

/// Quantum architecture under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QramArchitecture {
    Fanout,
    BucketBrigade,
}

impl std::fmt::Display for QramArchitecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QramArchitecture::Fanout => f.write_str("fanout"),
            QramArchitecture::BucketBrigade => f.write_str("bucket-brigade"),
        }
    }
}

/// What a sampled error does to the switching element it strikes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorChannel {
    /// The switch routes (or stores) the signal down the wrong branch.
    RouteFlip,
    /// The element's three-level state is replaced by a uniformly random one.
    QutritDepolarize,
    /// The transiting carrier's value flips.
    PayloadFlip,
}

/// Which events draw an error sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingMode {
    /// Once per activated switching element per call (the headline
    /// accounting: `n` for the bucket brigade, `2^n - 1` for fanout).
    PerActiveSwitch,
    /// At every logged switching event (`n^2 + 3n` for the bucket brigade;
    /// identical to per-active-switch for fanout, whose gates fire once).
    PerGateEvent,
}

/// Error model for one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    pub epsilon: f64,
    pub channel: ErrorChannel,
    pub counting: CountingMode,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(
        epsilon: f64,
        channel: ErrorChannel,
        counting: CountingMode,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) || !epsilon.is_finite() {
            return Err(SimError::InvalidEpsilon(epsilon));
        }
        Ok(NoiseModel {
            epsilon,
            channel,
            counting,
            seed,
        })
    }

    /// Route-flip channel, per-active-switch counting.
    pub fn route_flip(epsilon: f64, seed: u64) -> Result<Self> {
        Self::new(
            epsilon,
            ErrorChannel::RouteFlip,
            CountingMode::PerActiveSwitch,
            seed,
        )
    }
}

/// How each trial picks its input address state.
#[derive(Debug, Clone)]
pub enum AddressDistribution {
    Fixed(u64),
    Superposition(Vec<(u64, Complex64)>),
    /// A uniformly random basis address per trial.
    UniformRandom,
}

/// One line of a noise sweep: estimated and analytic failure rates for an
/// (architecture, n, epsilon) point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub architecture: QramArchitecture,
    pub n: usize,
    pub epsilon: f64,
    pub trials: u64,
    pub failures: Option<u64>,
    pub fail_rate: Option<f64>,
    /// Wilson 95% half-width of the estimate.
    pub ci_half: Option<f64>,
    pub analytic: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseSweepResult {
    pub rows: Vec<SweepRow>,
}

impl NoiseSweepResult {
    pub fn csv_header() -> &'static str {
        "architecture,n,epsilon,trials,fail_rate,ci_half,analytic"
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::csv_header());
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.architecture,
                row.n,
                row.epsilon,
                row.trials,
                row.fail_rate.map(|v| v.to_string()).unwrap_or_default(),
                row.ci_half.map(|v| v.to_string()).unwrap_or_default(),
                row.analytic
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("sweep serialization cannot fail")
    }
}

/// Closed-form failure rate per memory call.
pub fn analytic_error(epsilon: f64, n: usize, architecture: QramArchitecture) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) || !epsilon.is_finite() {
        return Err(SimError::InvalidEpsilon(epsilon));
    }
    if n < 1 {
        return Err(SimError::InvalidWidth(n));
    }
    let switches = match architecture {
        QramArchitecture::BucketBrigade => n as f64,
        QramArchitecture::Fanout => 2f64.powi(n as i32) - 1.0,
    };
    Ok(1.0 - (1.0 - epsilon).powf(switches))
}

/// Wilson score half-width for a binomial estimate at `z` standard normal
/// quantiles.
pub fn wilson_half_width(failures: u64, trials: u64, z: f64) -> f64 {
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n)
}

struct TrialInjector {
    epsilon: f64,
    channel: ErrorChannel,
    counting: CountingMode,
    rng: ChaCha8Rng,
    fanout_seen: std::collections::HashSet<u32>,
}

impl TrialInjector {
    fn new(model: &NoiseModel, rng: ChaCha8Rng) -> Self {
        TrialInjector {
            epsilon: model.epsilon,
            channel: model.channel,
            counting: model.counting,
            rng,
            fanout_seen: std::collections::HashSet::new(),
        }
    }
}

impl FaultInjector for TrialInjector {
    fn sample(&mut self, site: &SwitchSite) -> Option<FaultAction> {
        let eligible = match self.counting {
            CountingMode::PerActiveSwitch => match site {
                // Each fanout gate is one activation per call, however many
                // passes fire it.
                SwitchSite::FanoutGate { node, .. } => self.fanout_seen.insert(*node),
                SwitchSite::BucketStore { .. } => true,
                _ => false,
            },
            CountingMode::PerGateEvent => true,
        };
        if !eligible || !self.rng.random_bool(self.epsilon) {
            return None;
        }
        Some(match self.channel {
            ErrorChannel::RouteFlip => FaultAction::RouteFlip,
            ErrorChannel::PayloadFlip => FaultAction::PayloadFlip,
            ErrorChannel::QutritDepolarize => {
                FaultAction::SetTrit(match self.rng.random_range(0..3u8) {
                    0 => Trit::Wait,
                    1 => Trit::Zero,
                    _ => Trit::One,
                })
            }
        })
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_add(1));
    rng
}

fn build_input(dist: &AddressDistribution, n: usize, rng: &mut ChaCha8Rng) -> QuantumState {
    match dist {
        AddressDistribution::Fixed(k) => {
            make_address_state(n, &[(*k, Complex64::ONE)]).expect("validated upfront")
        }
        AddressDistribution::Superposition(terms) => {
            make_address_state(n, terms).expect("validated upfront")
        }
        AddressDistribution::UniformRandom => {
            let k = rng.random_range(0..(1u64 << n));
            make_address_state(n, &[(k, Complex64::ONE)]).expect("in-range address")
        }
    }
}

fn validate_distribution(dist: &AddressDistribution, n: usize) -> Result<()> {
    match dist {
        AddressDistribution::Fixed(k) => make_address_state(n, &[(*k, Complex64::ONE)]).map(|_| ()),
        AddressDistribution::Superposition(terms) => make_address_state(n, terms).map(|_| ()),
        AddressDistribution::UniformRandom => Ok(()),
    }
}

/// Estimates the per-call failure rate by running the full protocol with
/// sampled faults. A call fails when its final state deviates from the
/// ideal memory call at all (fidelity below `1 - 1e-9`).
pub fn monte_carlo_failure(
    architecture: QramArchitecture,
    n: usize,
    model: &NoiseModel,
    trials: u64,
    memory: &MemoryArray,
    address_distribution: &AddressDistribution,
) -> Result<SweepRow> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    NoiseModel::new(model.epsilon, model.channel, model.counting, model.seed)?;
    if memory.mode() != MemoryMode::Classical {
        return Err(SimError::InvalidInput(
            "failure-rate estimation runs on classical memory".into(),
        ));
    }
    if memory.n() != n {
        return Err(SimError::MemorySizeMismatch {
            expected: 1 << n,
            actual: 1 << memory.n(),
        });
    }
    validate_distribution(address_distribution, n)?;

    let failures: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(model.seed, trial);
            let input = build_input(address_distribution, n, &mut rng);
            let ideal = ideal_qram_oracle(&input, memory, AccessMode::Copy)
                .expect("input validated upfront");
            let mut injector = TrialInjector::new(model, rng);
            let mut noisy = match architecture {
                QramArchitecture::Fanout => {
                    fanout_call_with_faults(&input, memory, AccessMode::Copy, &mut injector, false)
                        .expect("lenient run cannot fail on validated input")
                        .final_state
                }
                QramArchitecture::BucketBrigade => {
                    bb_call_with_faults(&input, memory, AccessMode::Copy, &mut injector, false)
                        .expect("lenient run cannot fail on validated input")
                        .final_state
                }
            };
            // Depolarizing trajectories can merge configurations; rescale
            // before comparing.
            noisy.renormalize();
            let f = fidelity(&ideal, &noisy).expect("same register shapes");
            u64::from(f < FAILURE_FIDELITY)
        })
        .sum();

    let fail_rate = failures as f64 / trials as f64;
    Ok(SweepRow {
        architecture,
        n,
        epsilon: model.epsilon,
        trials,
        failures: Some(failures),
        fail_rate: Some(fail_rate),
        ci_half: Some(wilson_half_width(failures, trials, 1.96)),
        analytic: analytic_error(model.epsilon, n, architecture)?,
    })
}

/// Analytic failure rates for both architectures over a grid, for direct
/// comparison of their scaling.
pub fn error_scaling_table(epsilons: &[f64], ns: &[usize]) -> Result<NoiseSweepResult> {
    if epsilons.is_empty() || ns.is_empty() {
        return Err(SimError::InvalidInput(
            "error-scaling table needs at least one epsilon and one n".into(),
        ));
    }
    let mut rows = Vec::new();
    for &architecture in &[QramArchitecture::BucketBrigade, QramArchitecture::Fanout] {
        for &epsilon in epsilons {
            for &n in ns {
                rows.push(SweepRow {
                    architecture,
                    n,
                    epsilon,
                    trials: 0,
                    failures: None,
                    fail_rate: None,
                    ci_half: None,
                    analytic: analytic_error(epsilon, n, architecture)?,
                });
            }
        }
    }
    Ok(NoiseSweepResult { rows })
}
