//! Exact and sampled readout of Pauli-string expectations.
//!
//! The exact path rotates the registers into the string's eigenbasis with
//! integer arithmetic only: the Hadamard is applied unnormalized as
//! `(a + b, a - b)` and its `1/sqrt 2` is carried as a power of two, and
//! `S^dagger` is a re/im swap. Squared magnitudes are accumulated from the
//! place-value bits of each register, so the readout is exact up to the
//! final conversion to `f64`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Pauli, PauliString, PauliSum};
use crate::error::{Error, Result};
use crate::fixed::PlaceValueDecomposition;
use crate::state::DigitalState;
use crate::wide::I256;

/// `(p_plus, p_minus)` at `2 f + h` fraction bits, `h` = number of Hadamards.
fn parity_weights(s: &DigitalState, sigma: &PauliString) -> Result<(I256, I256, u32)> {
    if sigma.n_sites() > s.n() as usize {
        return Err(Error::DimensionMismatch {
            expected: s.n() as usize,
            found: sigma.n_sites(),
        });
    }
    let mut regs: Vec<(i128, i128)> = s.registers().iter().map(|a| (a.re, a.im)).collect();
    let overflow = |index: usize| Error::Overflow {
        index,
        value: f64::NAN,
        limit: 2f64.powi(127),
    };

    let mut hadamards = 0;
    for (site, &p) in sigma.factors().iter().enumerate() {
        let bit = 1usize << site;
        if p == Pauli::Y {
            for (j, r) in regs.iter_mut().enumerate() {
                if j & bit != 0 {
                    *r = (r.1, -r.0);
                }
            }
        }
        if matches!(p, Pauli::X | Pauli::Y) {
            hadamards += 1;
            for j in (0..regs.len()).filter(|j| j & bit == 0) {
                let (a, b) = (regs[j], regs[j | bit]);
                regs[j] = (
                    a.0.checked_add(b.0).ok_or_else(|| overflow(j))?,
                    a.1.checked_add(b.1).ok_or_else(|| overflow(j))?,
                );
                regs[j | bit] = (
                    a.0.checked_sub(b.0).ok_or_else(|| overflow(j | bit))?,
                    a.1.checked_sub(b.1).ok_or_else(|| overflow(j | bit))?,
                );
            }
        }
    }

    let place = PlaceValueDecomposition::new(s.format());
    let support = sigma.support_mask();
    let (mut plus, mut minus) = (I256::ZERO, I256::ZERO);
    for (j, &(re, im)) in regs.iter().enumerate() {
        let w = place.square(re) + place.square(im);
        if (j & support).count_ones() % 2 == 0 {
            plus = plus + w;
        } else {
            minus = minus + w;
        }
    }
    Ok((plus, minus, hadamards))
}

/// `<x| sigma |x>` for any state, normalized or not.
pub fn pauli_quadratic_form(s: &DigitalState, sigma: &PauliString) -> Result<f64> {
    let (plus, minus, h) = parity_weights(s, sigma)?;
    let scale = 2 * s.format().frac_bits() as i32 + h as i32;
    Ok((plus - minus).to_f64() * 2f64.powi(-scale))
}

/// `<x| O |x>`, terms reduced in ascending order.
pub fn sum_quadratic_form(s: &DigitalState, o: &PauliSum) -> Result<f64> {
    o.terms.iter().try_fold(0.0, |acc, t| {
        Ok(acc + t.beta * pauli_quadratic_form(s, &t.string)?)
    })
}

/// Tolerance on `|x|^2 - 1` accepted as normalized.
pub fn norm_tolerance(s: &DigitalState) -> f64 {
    (8.0 * (s.dim() as f64).sqrt() * s.format().resolution()).max(1e-9)
}

fn require_normalized(s: &DigitalState) -> Result<()> {
    let norm_sq = s.norm_squared();
    if (norm_sq - 1.0).abs() > norm_tolerance(s) {
        return Err(Error::UnnormalizedState { norm_sq });
    }
    Ok(())
}

/// Deterministic `<sigma>` of a normalized state, returned as `p_+ - p_-`.
pub fn sigma_expectation_exact(s: &DigitalState, sigma: &PauliString) -> Result<f64> {
    require_normalized(s)?;
    pauli_quadratic_form(s, sigma)
}

/// `ceil(ln(2/eps_m) (8 p + 2 delta) / delta^2)`.
pub fn chernoff_trials(delta: f64, p_bound: f64, epsilon_m: f64) -> Result<u64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta = {delta} outside (0, 1]")));
    }
    if !(epsilon_m > 0.0 && epsilon_m < 1.0) {
        return Err(Error::Domain(format!("epsilon_m = {epsilon_m} outside (0, 1)")));
    }
    if !(p_bound > 0.0 && p_bound <= 1.0) {
        return Err(Error::Domain(format!("p_bound = {p_bound} outside (0, 1]")));
    }
    let m = (2.0 / epsilon_m).ln() * (8.0 * p_bound + 2.0 * delta) / (delta * delta);
    Ok(m.ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffPlan {
    pub delta: f64,
    pub epsilon_m: f64,
    pub p_bound: f64,
    pub trials: u64,
}

impl ChernoffPlan {
    pub fn new(delta: f64, p_bound: f64, epsilon_m: f64) -> Result<Self> {
        Ok(ChernoffPlan {
            delta,
            epsilon_m,
            p_bound,
            trials: chernoff_trials(delta, p_bound, epsilon_m)?,
        })
    }
}

impl Default for ChernoffPlan {
    /// Half-window 1/2, worst-case p = 1, failure probability 1%.
    fn default() -> Self {
        ChernoffPlan::new(0.5, 1.0, 0.01).expect("default plan is in range")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub estimate: f64,
    pub trials: u64,
    pub plus_count: u64,
}

/// `plan.trials` binary outcomes with `P(+1) = (1 + expectation) / 2`.
/// The generator is keyed by `seed`, its stream by `term`, and trial `i`
/// reads the `i`-th draw of that stream.
pub fn sample_from_expectation(expectation: f64, plan: &ChernoffPlan, seed: u64, term: u64) -> SampleOutcome {
    let p = ((1.0 + expectation) / 2.0).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(term);
    let plus_count = (0..plan.trials).filter(|_| rng.gen::<f64>() < p).count() as u64;
    let trials = plan.trials;
    let estimate = if trials == 0 {
        0.0
    } else {
        (2.0 * plus_count as f64 - trials as f64) / trials as f64
    };
    SampleOutcome {
        estimate,
        trials,
        plus_count,
    }
}

pub fn sample_sigma(s: &DigitalState, sigma: &PauliString, plan: &ChernoffPlan, seed: u64) -> Result<SampleOutcome> {
    let mu = sigma_expectation_exact(s, sigma)?;
    Ok(sample_from_expectation(mu, plan, seed, 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MeasureMode {
    Exact,
    Sampled { plan: ChernoffPlan, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermReport {
    pub string: PauliString,
    pub beta: f64,
    pub expectation: f64,
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub value: f64,
    /// Per-term accuracy times `sum |beta_j|`.
    pub error_bound: f64,
    pub per_term_accuracy: f64,
    pub mode: MeasureMode,
    pub terms: Vec<TermReport>,
}

/// `sum_j beta_j <sigma_j>` term by term. Exact mode has per-term accuracy
/// `k 2^(-f+2)`; sampled mode has `delta`, each term failing with
/// probability at most `epsilon_m`.
pub fn operator_expectation(s: &DigitalState, o: &PauliSum, mode: MeasureMode) -> Result<ExpectationReport> {
    require_normalized(s)?;
    let mut terms = Vec::with_capacity(o.terms.len());
    for (idx, t) in o.terms.iter().enumerate() {
        let mu = pauli_quadratic_form(s, &t.string)?;
        let (expectation, trials) = match mode {
            MeasureMode::Exact => (mu, None),
            MeasureMode::Sampled { plan, seed } => {
                let out = sample_from_expectation(mu, &plan, seed, idx as u64);
                (out.estimate, Some(out.trials))
            }
        };
        terms.push(TermReport {
            string: t.string.clone(),
            beta: t.beta,
            expectation,
            trials,
        });
    }
    let value = terms.iter().fold(0.0, |acc, t| acc + t.beta * t.expectation);
    let per_term_accuracy = match mode {
        MeasureMode::Exact => o.max_locality().max(1) as f64 * 4.0 * s.format().resolution(),
        MeasureMode::Sampled { plan, .. } => plan.delta,
    };
    Ok(ExpectationReport {
        value,
        error_bound: per_term_accuracy * o.l1_norm(),
        per_term_accuracy,
        mode,
        terms,
    })
}
