//! One-shot feedback scheme with a message-oblivious helper.
//!
//! A block has `n + 1` channel uses. At time 0 the encoder sends
//! `X_0 = m sqrt(P) / 2^b`. After time 0 the feedback link reveals `Y_0`, so
//! the encoder learns `Z_0`; the helper knows `Z_0` from the start. Both
//! compute `M' = floor(Z_0 2^b / sqrt(P)) mod 2^b`, which is sent over times
//! `1..=n` with the cognizant scheme. The receiver decodes `M'` and returns
//! `floor(Y_0 2^b / sqrt(P) - M') mod 2^b`, which equals `m` whenever `M'` was
//! decoded correctly.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::codebook::check_message;
use crate::cognizant::{build_summary, CognizantScheme, SchemeConfig, TrialRecord};
use crate::converse::CorrelationAccumulator;
use crate::error::{Error, Result};
use crate::seeds::rng_from_seed;
use crate::summary::{SchemeKind, SimSummary, Tally};

/// Largest message length for which the time-0 quantization is resolved
/// reliably in double precision.
pub const MAX_FEEDBACK_MESSAGE_BITS: u32 = 32;

/// Scaled values within this distance of an integer (or the round-off scale,
/// if larger) count as quantization boundary events.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Feedback scheme configuration: `inner` drives times `1..=n` and shares its
/// message set with the outer message.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackConfig {
    pub inner: SchemeConfig,
}

impl FeedbackConfig {
    pub fn new(inner: SchemeConfig) -> Result<Self> {
        if inner.message_bits > MAX_FEEDBACK_MESSAGE_BITS {
            return Err(Error::Capacity(format!(
                "feedback scheme supports at most {MAX_FEEDBACK_MESSAGE_BITS} message bits, got {}",
                inner.message_bits
            )));
        }
        inner.validate()?;
        Ok(Self { inner })
    }

    pub fn message_bits(&self) -> u32 {
        self.inner.message_bits
    }
}

fn scale(message_bits: u32, power: f64) -> f64 {
    (message_bits as f64).exp2() / power.sqrt()
}

/// Time-0 symbol `m sqrt(P) / 2^b`, in `[0, sqrt(P))`.
pub fn encode_time_zero(m: u128, message_bits: u32, power: f64) -> Result<f64> {
    check_message(m, message_bits)?;
    Ok(m as f64 * power.sqrt() / (message_bits as f64).exp2())
}

fn floor_mod(v: f64, message_bits: u32) -> u128 {
    let modulus = 1i128 << message_bits;
    (v.floor() as i128).rem_euclid(modulus) as u128
}

/// `floor(z0 2^b / sqrt(P)) mod 2^b`; a function of the noise sample alone.
pub fn inner_message(z0: f64, message_bits: u32, power: f64) -> u128 {
    floor_mod(z0 * scale(message_bits, power), message_bits)
}

/// `floor(y0 2^b / sqrt(P) - m'_hat) mod 2^b`.
pub fn reconstruct(y0: f64, m_prime_hat: u128, message_bits: u32, power: f64) -> Result<u128> {
    check_message(m_prime_hat, message_bits)?;
    Ok(floor_mod(y0 * scale(message_bits, power) - m_prime_hat as f64, message_bits))
}

/// Whether `v` sits so close to an integer that floor could flip under
/// round-off of operands of magnitude up to `magnitude`.
fn near_integer(v: f64, magnitude: f64) -> bool {
    let tol = BOUNDARY_TOLERANCE.max(64.0 * f64::EPSILON * magnitude.abs().max(1.0));
    (v - v.round()).abs() < tol
}

/// One block of the feedback scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackRecord {
    pub message: u128,
    pub x0: f64,
    pub y0: f64,
    /// `M'` as computed by the helper from `Z_0`.
    pub inner_message: u128,
    /// Inner cognizant transmission of `M'` over times `1..=n`.
    pub inner: TrialRecord,
    pub decoded: u128,
    pub error: bool,
    /// A scaled quantity fell within round-off of a quantization boundary, or
    /// the encoder's feedback-derived `M'` differed from the helper's.
    pub boundary_event: bool,
    /// `X_0^2 + |x|^2` over the block.
    pub block_energy: f64,
}

/// Aggregate of a feedback-scheme simulation.
#[derive(Debug, Clone)]
pub struct FeedbackRun {
    pub summary: SimSummary,
    pub records: Vec<FeedbackRecord>,
    pub inner_errors: u64,
    /// Trials where `(M_hat != m)` and `(M'_hat != M')` disagreed.
    pub identity_violations: u64,
    pub boundary_events: u64,
    /// Largest `block_energy / ((n + 1) P)` over the trials.
    pub max_energy_ratio: f64,
}

type InputAndNoise = (Vec<f64>, Vec<f64>);

/// The feedback scheme: an inner cognizant scheme plus time-0 modulation.
#[derive(Debug, Clone)]
pub struct FeedbackScheme {
    cfg: FeedbackConfig,
    inner: CognizantScheme,
}

impl FeedbackScheme {
    pub fn new(cfg: FeedbackConfig) -> Result<Self> {
        let inner = CognizantScheme::new(cfg.inner.clone())?;
        Ok(Self { cfg, inner })
    }

    pub fn inner(&self) -> &CognizantScheme {
        &self.inner
    }

    /// The helper's description: `M'` and the help index, computed from the
    /// noise `(z0, z)` only.
    pub fn helper(&self, z0: f64, z: &[f64]) -> Result<(u128, usize)> {
        let c = &self.cfg.inner;
        let m_prime = inner_message(z0, c.message_bits, c.channel.power());
        let (t, _) = crate::cognizant::helper_select(self.inner.codebook(), m_prime, z)?;
        Ok((m_prime, t))
    }

    /// Transmits `m` over the noise `(z0, z)`. With `genie_inner` the receiver
    /// is handed the correct `M'`.
    pub fn run_trial_with_noise<R: Rng>(
        &self,
        m: u128,
        z0: f64,
        z: &[f64],
        rng: &mut R,
        genie_inner: bool,
    ) -> Result<FeedbackRecord> {
        let c = &self.cfg.inner;
        let (bits, power) = (c.message_bits, c.channel.power());
        let s = scale(bits, power);
        let x0 = encode_time_zero(m, bits, power)?;
        let y0 = x0 + z0;

        let m_prime = inner_message(z0, bits, power);
        // the encoder recovers Z_0 from the fed-back Y_0
        let m_prime_encoder = inner_message(y0 - x0, bits, power);
        let mut boundary_event = m_prime != m_prime_encoder || near_integer(z0 * s, z0 * s);

        let out = self.inner.run_trial_with_noise(m_prime, z, rng)?;
        let m_prime_hat = if genie_inner { m_prime } else { out.record.decoded };
        let decoded = reconstruct(y0, m_prime_hat, bits, power)?;
        let raw = y0 * s - m_prime_hat as f64;
        boundary_event |= near_integer(raw, y0 * s);

        Ok(FeedbackRecord {
            message: m,
            x0,
            y0,
            inner_message: m_prime,
            block_energy: x0 * x0 + out.x.iter().map(|v| v * v).sum::<f64>(),
            inner: out.record,
            decoded,
            error: decoded != m,
            boundary_event,
        })
    }

    fn trial_at(&self, i: u64, genie_inner: bool) -> (FeedbackRecord, Option<InputAndNoise>) {
        let c = &self.cfg.inner;
        let m = c.trial_message(i);
        let mut rng = rng_from_seed(c.trial_seed(i));
        let sd = c.channel.noise_std();
        let z0 = sd * rng.sample::<f64, _>(StandardNormal);
        let z: Vec<f64> = (0..c.blocklength).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
        let rec = self
            .run_trial_with_noise(m, z0, &z, &mut rng, genie_inner)
            .expect("message and noise drawn within range");
        let diag = c.diagnostics.then(|| {
            let x = self
                .inner
                .codebook()
                .codeword(rec.inner_message, rec.inner.help_index, c.message_bits)
                .expect("in range");
            (x, z)
        });
        (rec, diag)
    }

    pub fn simulate(&self) -> Result<FeedbackRun> {
        self.simulate_inner(false)
    }

    /// Simulation in which the receiver always learns `M'` correctly.
    pub fn simulate_with_genie(&self) -> Result<FeedbackRun> {
        self.simulate_inner(true)
    }

    fn simulate_inner(&self, genie_inner: bool) -> Result<FeedbackRun> {
        let start = Instant::now();
        let c = &self.cfg.inner;
        let outcomes: Vec<_> = (0..c.trials)
            .into_par_iter()
            .map(|i| self.trial_at(i, genie_inner))
            .collect();
        let mut tally = Tally::default();
        let mut acc = c.diagnostics.then(|| CorrelationAccumulator::new(c.blocklength));
        let (mut inner_errors, mut identity_violations, mut boundary_events) = (0, 0, 0);
        let mut max_energy_ratio: f64 = 0.0;
        let block_budget = (c.blocklength + 1) as f64 * c.channel.power();
        let mut records = Vec::with_capacity(outcomes.len());
        for (rec, diag) in outcomes {
            tally.push(
                rec.error,
                rec.inner.covering_miss,
                rec.inner.helper_angle.radians(),
                rec.inner.decode_angle.radians(),
            );
            if let Some(ok) = self.inner.angle_chain_check(&rec.inner) {
                tally.chain_checked += 1;
                tally.chain_violations += (!ok) as u64;
            }
            let inner_error = if genie_inner { false } else { rec.inner.error };
            inner_errors += inner_error as u64;
            identity_violations += (inner_error != rec.error) as u64;
            boundary_events += rec.boundary_event as u64;
            max_energy_ratio = max_energy_ratio.max(rec.block_energy / block_budget);
            if let (Some(acc), Some((x, z))) = (acc.as_mut(), diag.as_ref()) {
                acc.push(x, z)?;
            }
            records.push(rec);
        }
        let corr_sum = match acc {
            Some(acc) if acc.count() >= 2 => Some(acc.finish()?.sum_sq()),
            _ => None,
        };
        let summary = build_summary(SchemeKind::Feedback, c, &tally, corr_sum, start.elapsed().as_secs_f64());
        Ok(FeedbackRun {
            summary,
            records,
            inner_errors,
            identity_violations,
            boundary_events,
            max_energy_ratio,
        })
    }
}

pub fn simulate_feedback(cfg: &FeedbackConfig) -> Result<SimSummary> {
    Ok(FeedbackScheme::new(cfg.clone())?.simulate()?.summary)
}
