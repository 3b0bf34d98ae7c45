//! Converse-side quantities: the input/noise correlation budget, the rate
//! upper bound, and audits of simulated schemes against them.

use std::io::Write;

use crate::capacity::{capacity_cognizant, ChannelParams, HelperRate};
use crate::error::{Error, Result};

/// Sample variances below this are treated as zero and give correlation 0.
pub const DEGENERATE_VARIANCE: f64 = 1e-15;

/// Upper bound `n (1 - 2^{-2 R_h})` on `sum_k rho_k^2` for any scheme whose
/// helper sends `n R_h` bits.
pub fn correlation_budget(n: usize, rh: HelperRate) -> f64 {
    n as f64 * -(-2.0 * rh.bits() * std::f64::consts::LN_2).exp_m1()
}

/// Converse bound on achievable rates. It meets the direct part, so this is
/// the same expression as [`capacity_cognizant`].
pub fn converse_rate_bound(ch: &ChannelParams, rh: HelperRate) -> f64 {
    capacity_cognizant(ch, rh)
}

/// Per-index empirical correlation between the transmitted symbol `X_k` and
/// the noise `Z_k` across trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationProfile {
    pub per_index_rho: Vec<f64>,
    pub trials: u64,
}

impl CorrelationProfile {
    pub fn blocklength(&self) -> usize {
        self.per_index_rho.len()
    }

    pub fn sum_sq(&self) -> f64 {
        self.per_index_rho.iter().map(|r| r * r).sum()
    }

    pub fn mean_abs(&self) -> f64 {
        self.per_index_rho.iter().map(|r| r.abs()).sum::<f64>() / self.blocklength() as f64
    }

    /// Estimator noise allowance for [`CorrelationProfile::sum_sq`]: `sigmas`
    /// delta-method standard deviations plus the `(1 - rho^2)^2 / N` upward bias
    /// of each squared sample correlation.
    pub fn estimator_slack(&self, sigmas: f64) -> f64 {
        let n = self.trials as f64;
        let (var, bias) = self.per_index_rho.iter().fold((0.0, 0.0), |(v, b), &r| {
            let q = (1.0 - r * r).powi(2);
            (v + 4.0 * r * r * q / n, b + q / n)
        });
        sigmas * var.sqrt() + bias
    }
}

/// Streaming per-index co-moment accumulator (Welford updates).
#[derive(Debug, Clone)]
pub struct CorrelationAccumulator {
    count: u64,
    mean_x: Vec<f64>,
    mean_z: Vec<f64>,
    m2_x: Vec<f64>,
    m2_z: Vec<f64>,
    co: Vec<f64>,
}

impl CorrelationAccumulator {
    pub fn new(n: usize) -> Self {
        Self {
            count: 0,
            mean_x: vec![0.0; n],
            mean_z: vec![0.0; n],
            m2_x: vec![0.0; n],
            m2_z: vec![0.0; n],
            co: vec![0.0; n],
        }
    }

    pub fn push(&mut self, x: &[f64], z: &[f64]) -> Result<()> {
        let n = self.mean_x.len();
        if x.len() != n || z.len() != n {
            return Err(Error::usage(format!(
                "record dimensions ({}, {}) differ from blocklength {n}",
                x.len(),
                z.len()
            )));
        }
        self.count += 1;
        let c = self.count as f64;
        for k in 0..n {
            let dx = x[k] - self.mean_x[k];
            let dz = z[k] - self.mean_z[k];
            self.mean_x[k] += dx / c;
            self.mean_z[k] += dz / c;
            self.m2_x[k] += dx * (x[k] - self.mean_x[k]);
            self.m2_z[k] += dz * (z[k] - self.mean_z[k]);
            self.co[k] += dx * (z[k] - self.mean_z[k]);
        }
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn finish(&self) -> Result<CorrelationProfile> {
        if self.count < 2 {
            return Err(Error::usage("need at least two records to estimate correlations"));
        }
        let denom = (self.count - 1) as f64;
        let per_index_rho = (0..self.mean_x.len())
            .map(|k| {
                let (vx, vz) = (self.m2_x[k] / denom, self.m2_z[k] / denom);
                if vx < DEGENERATE_VARIANCE || vz < DEGENERATE_VARIANCE {
                    0.0
                } else {
                    (self.co[k] / denom / (vx * vz).sqrt()).clamp(-1.0, 1.0)
                }
            })
            .collect();
        Ok(CorrelationProfile {
            per_index_rho,
            trials: self.count,
        })
    }
}

/// Per-index sample correlations of `(x, z)` pairs.
pub fn empirical_correlations<'a, I>(records: I) -> Result<CorrelationProfile>
where
    I: IntoIterator<Item = (&'a [f64], &'a [f64])>,
{
    let mut iter = records.into_iter().peekable();
    let n = match iter.peek() {
        Some((x, _)) => x.len(),
        None => return Err(Error::usage("no records")),
    };
    let mut acc = CorrelationAccumulator::new(n);
    for (x, z) in iter {
        acc.push(x, z)?;
    }
    acc.finish()
}

/// Outcome of auditing a correlation profile against the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub blocklength: usize,
    pub helper_rate_bits: f64,
    pub trials: u64,
    pub corr_sum: f64,
    pub budget: f64,
    pub slack: f64,
    pub within_budget: bool,
    pub mean_abs_rho: f64,
    /// `1/2 log2(2 pi e (P + sigma^2 + 2 sigma sqrt(P) mean|rho|))`, the
    /// per-symbol output entropy ceiling implied by the measured correlations.
    pub entropy_proxy_bits: f64,
}

impl BudgetReport {
    pub const CSV_HEADER: &'static str =
        "n,helper_rate_bits,trials,corr_sum,corr_budget,slack,within_budget,mean_abs_rho,entropy_proxy_bits";

    /// Header plus one data row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        use crate::harness::csv::fmt_sig9 as f;
        writeln!(w, "{}", Self::CSV_HEADER)?;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            self.blocklength,
            f(self.helper_rate_bits),
            self.trials,
            f(self.corr_sum),
            f(self.budget),
            f(self.slack),
            self.within_budget,
            f(self.mean_abs_rho),
            f(self.entropy_proxy_bits),
        )?;
        Ok(())
    }
}

pub fn check_budget(
    profile: &CorrelationProfile,
    ch: &ChannelParams,
    rh: HelperRate,
    slack: f64,
) -> BudgetReport {
    let corr_sum = profile.sum_sq();
    let budget = correlation_budget(profile.blocklength(), rh);
    let mean_abs_rho = profile.mean_abs();
    let var_bound = ch.power() + ch.noise_var() + 2.0 * ch.noise_std() * ch.power().sqrt() * mean_abs_rho;
    BudgetReport {
        blocklength: profile.blocklength(),
        helper_rate_bits: rh.bits(),
        trials: profile.trials,
        corr_sum,
        budget,
        slack,
        within_budget: corr_sum <= budget + slack,
        mean_abs_rho,
        entropy_proxy_bits: 0.5
            * (2.0 * std::f64::consts::PI * std::f64::consts::E * var_bound).log2(),
    }
}
