//! Per-configuration aggregate of simulated trials.

use std::fmt;

use crate::stats::{wilson_interval, Z95};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Cognizant,
    Feedback,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Cognizant => "cognizant",
            SchemeKind::Feedback => "feedback",
        })
    }
}

/// Aggregated result of one simulated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub scheme: SchemeKind,
    pub blocklength: usize,
    pub message_bits: u32,
    pub helper_bits: u32,
    /// Effective rate `message_bits / blocklength`.
    pub rate_bits: f64,
    pub helper_rate_bits: f64,
    pub snr: f64,
    pub eps: f64,
    pub seed: u64,
    pub trials: u64,
    pub errors: u64,
    pub covering_misses: u64,
    pub err_rate: f64,
    /// `None` when every trial was a covering miss.
    pub err_rate_given_covered: Option<f64>,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_helper_angle: f64,
    pub mean_decode_angle: f64,
    /// Sum of squared per-index input/noise correlations, when diagnostics ran.
    pub corr_sum: Option<f64>,
    pub corr_budget: f64,
    pub capacity_bits: f64,
    /// `None` without help (no slack is defined).
    pub threshold_bits: Option<f64>,
    /// Trials satisfying the preconditions of the angle-chain bound.
    pub angle_chain_checked: u64,
    pub angle_chain_violations: u64,
    pub wall_time_s: f64,
}

/// Sequential fold of per-trial outcomes; feeding trials in index order makes
/// the result independent of how they were scheduled.
#[derive(Debug, Default, Clone)]
pub(crate) struct Tally {
    pub trials: u64,
    pub errors: u64,
    pub covering_misses: u64,
    pub errors_covered: u64,
    pub helper_angle_sum: f64,
    pub decode_angle_sum: f64,
    pub chain_checked: u64,
    pub chain_violations: u64,
}

impl Tally {
    pub fn push(&mut self, error: bool, covering_miss: bool, helper_angle: f64, decode_angle: f64) {
        self.trials += 1;
        self.errors += error as u64;
        self.covering_misses += covering_miss as u64;
        self.errors_covered += (error && !covering_miss) as u64;
        self.helper_angle_sum += helper_angle;
        self.decode_angle_sum += decode_angle;
    }

    pub fn err_rate(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }

    pub fn err_rate_given_covered(&self) -> Option<f64> {
        let covered = self.trials - self.covering_misses;
        (covered > 0).then(|| self.errors_covered as f64 / covered as f64)
    }

    pub fn wilson(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.trials, Z95)
    }
}
