//! The geometric coding scheme with a message-cognizant helper.
//!
//! The helper sees the message `m` and the noise `z`, and reveals the index
//! `t` of the codeword in `C(m)` closest in angle to `z`. The encoder sends
//! `x(m, t)`; the decoder, knowing `t`, picks the message whose `t`-th
//! codeword is nearest to `y = x + z`.

use std::borrow::Cow;
use std::ops::Range;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::capacity::{capacity_cognizant, ChannelParams, HelperRate};
use crate::codebook::{bits_for_rate, build_base_codebook, check_message, HelperCodebook, Rotation};
use crate::converse::{correlation_budget, CorrelationAccumulator, CorrelationProfile};
use crate::error::{Error, Result};
use crate::geometry::{
    achievable_rate_threshold, alpha0, cap_ratio_exact, dot, norm_sq, theta0, Angle, CapSpec,
};
use crate::seeds::{derive_seed, rng_from_seed, stream};
use crate::summary::{SchemeKind, SimSummary, Tally};

/// `auto` decodes exhaustively up to this many message bits.
pub const AUTO_EXHAUSTIVE_MAX_BITS: u32 = 16;
/// Default cap on exhaustive decoding; raise through `max_message_bits`.
pub const DEFAULT_MAX_MESSAGE_BITS: u32 = 24;
/// Message indices are `u128`; ensemble decoding never enumerates them.
pub const MAX_ENSEMBLE_MESSAGE_BITS: u32 = 120;
/// Precompute every message's rotation when `2^bits * n^2` stays below this.
const ROTATION_TABLE_ENTRIES: usize = 1 << 24;
/// Slack allowed on `sin(alpha) <= sin(alpha0)` in the angle-chain audit.
pub const ANGLE_CHAIN_TOLERANCE: f64 = 1e-9;

/// How the decoder's search over competing messages is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderMode {
    /// Exhaustive when the message space is small, ensemble otherwise.
    Auto,
    /// Scan every `x(m', t)` and return the maximum inner product with `y`.
    Exhaustive,
    /// Draw the decoding outcome from its exact law over the random-rotation
    /// ensemble: the competitors `x(m', t)`, `m' != m`, are iid uniform on the
    /// sphere and independent of `y`, so each beats the true codeword with
    /// probability `cap_ratio(n, angle(x, y))`.
    Ensemble,
}

impl DecoderMode {
    pub fn resolve(self, message_bits: u32) -> DecoderMode {
        match self {
            DecoderMode::Auto if message_bits <= AUTO_EXHAUSTIVE_MAX_BITS => DecoderMode::Exhaustive,
            DecoderMode::Auto => DecoderMode::Ensemble,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DecoderMode::Auto => "auto",
            DecoderMode::Exhaustive => "exhaustive",
            DecoderMode::Ensemble => "ensemble",
        }
    }
}

/// Full specification of one cognizant-scheme experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub blocklength: usize,
    /// `ceil(n R)`; the message set is `0..2^message_bits`.
    pub message_bits: u32,
    pub helper_rate: HelperRate,
    /// `ceil(n R_h)`; the helper sends one of `2^helper_bits` indices.
    pub helper_bits: u32,
    /// Slack in `sin(theta0) = 2^{-(R_h - eps)}` and in the noise-energy
    /// bound `n (sigma^2 + eps)`. Zero when `R_h = 0`.
    pub eps: f64,
    pub channel: ChannelParams,
    /// Root seed; the three streams below are derived from it.
    pub seed: u64,
    pub codebook_seed: u64,
    pub noise_seed: u64,
    pub message_seed: u64,
    pub trials: u64,
    pub decoder: DecoderMode,
    pub max_message_bits: u32,
    /// Accumulate per-index input/noise correlations.
    pub diagnostics: bool,
}

impl SchemeConfig {
    pub fn new(
        blocklength: usize,
        rate_bits: f64,
        helper_rate: HelperRate,
        eps: f64,
        channel: ChannelParams,
        seed: u64,
        trials: u64,
    ) -> Result<Self> {
        if !(rate_bits.is_finite() && rate_bits > 0.0) {
            return Err(Error::domain(format!("rate must be > 0, got {rate_bits}")));
        }
        let cfg = Self {
            blocklength,
            message_bits: bits_for_rate(blocklength, rate_bits),
            helper_rate,
            helper_bits: bits_for_rate(blocklength, helper_rate.bits()),
            eps,
            channel,
            seed,
            codebook_seed: derive_seed(seed, stream::CODEBOOK),
            noise_seed: derive_seed(seed, stream::NOISE),
            message_seed: derive_seed(seed, stream::MESSAGE),
            trials,
            decoder: DecoderMode::Auto,
            max_message_bits: DEFAULT_MAX_MESSAGE_BITS,
            diagnostics: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_decoder(mut self, decoder: DecoderMode) -> Result<Self> {
        self.decoder = decoder;
        self.validate()?;
        Ok(self)
    }

    pub fn with_diagnostics(mut self, on: bool) -> Self {
        self.diagnostics = on;
        self
    }

    pub fn with_max_message_bits(mut self, bits: u32) -> Result<Self> {
        self.max_message_bits = bits;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocklength < 2 {
            return Err(Error::domain(format!("blocklength must be >= 2, got {}", self.blocklength)));
        }
        if self.message_bits < 1 {
            return Err(Error::domain("need at least one message bit"));
        }
        if self.trials < 1 {
            return Err(Error::domain("need at least one trial"));
        }
        let rh = self.helper_rate.bits();
        if rh > 0.0 {
            if !(self.eps > 0.0 && self.eps < rh) {
                return Err(Error::domain(format!(
                    "slack must satisfy 0 < eps < R_h, got eps = {}, R_h = {rh}",
                    self.eps
                )));
            }
        } else if self.eps != 0.0 {
            return Err(Error::domain("without help the slack eps must be 0"));
        }
        match self.decoder.resolve(self.message_bits) {
            DecoderMode::Exhaustive if self.message_bits > self.max_message_bits => {
                Err(Error::Capacity(format!(
                    "exhaustive decoding over 2^{} messages exceeds max_message_bits = {}",
                    self.message_bits, self.max_message_bits
                )))
            }
            _ if self.message_bits > MAX_ENSEMBLE_MESSAGE_BITS => Err(Error::Capacity(format!(
                "{} message bits exceed the supported {MAX_ENSEMBLE_MESSAGE_BITS}",
                self.message_bits
            ))),
            _ => Ok(()),
        }
    }

    pub fn message_count(&self) -> u128 {
        1u128 << self.message_bits
    }

    pub fn rate_bits(&self) -> f64 {
        self.message_bits as f64 / self.blocklength as f64
    }

    /// Helper alignment angle; `None` without help.
    pub fn theta0(&self) -> Option<Angle> {
        theta0(self.helper_rate, self.eps).ok()
    }

    pub fn alpha0(&self) -> Option<Angle> {
        self.theta0().and_then(|t| alpha0(&self.channel, self.eps, t).ok())
    }

    pub fn resolved_decoder(&self) -> DecoderMode {
        self.decoder.resolve(self.message_bits)
    }

    pub fn capacity_bits(&self) -> f64 {
        capacity_cognizant(&self.channel, self.helper_rate)
    }

    pub fn threshold_bits(&self) -> Option<f64> {
        achievable_rate_threshold(&self.channel, self.helper_rate, self.eps).ok()
    }

    /// Message sent in trial `i`, uniform over the message set.
    pub fn trial_message(&self, i: u64) -> u128 {
        rng_from_seed(derive_seed(self.message_seed, i as u128)).random_range(0..self.message_count())
    }

    pub fn trial_seed(&self, i: u64) -> u64 {
        derive_seed(self.noise_seed, i as u128)
    }
}

/// Raw evidence from one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub message: u128,
    pub help_index: usize,
    /// Angle between the transmitted codeword and the noise.
    pub helper_angle: Angle,
    /// Angle between the transmitted codeword and the channel output.
    pub decode_angle: Angle,
    pub noise_energy: f64,
    pub covering_miss: bool,
    pub decoded: u128,
    pub error: bool,
}

/// A trial record together with the transmitted codeword.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub x: Vec<f64>,
}

fn sample_noise<R: Rng>(n: usize, ch: &ChannelParams, rng: &mut R) -> Vec<f64> {
    let s = ch.noise_std();
    (0..n).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn select_with_rotation(cb: &HelperCodebook, rot: &Rotation, z: &[f64]) -> (usize, Angle) {
    let z_norm = norm_sq(z).sqrt();
    if z_norm == 0.0 {
        return (0, Angle::ZERO);
    }
    // angle(R b, z) = angle(b, R^T z)
    let w = rot.apply_transpose(z);
    let mut best = (0, f64::NEG_INFINITY);
    for (t, b) in cb.base_points().enumerate() {
        let ip = dot(b, &w);
        if ip > best.1 {
            best = (t, ip);
        }
    }
    let radius = (cb.blocklength() as f64 * cb.power()).sqrt();
    (best.0, Angle::from_cos(best.1 / (radius * z_norm)))
}

/// Index of the codeword of `C(m)` with the smallest angle to `z`, ties to the
/// smallest index. A zero noise vector selects index 0 at angle 0.
pub fn helper_select(cb: &HelperCodebook, m: u128, z: &[f64]) -> Result<(usize, Angle)> {
    if z.len() != cb.blocklength() {
        return Err(Error::usage(format!(
            "noise has dimension {}, codebook {}",
            z.len(),
            cb.blocklength()
        )));
    }
    Ok(select_with_rotation(cb, &cb.rotation(m), z))
}

/// The codeword `x(m, t)` sent by the encoder.
pub fn transmit(cb: &HelperCodebook, m: u128, t: usize, message_bits: u32) -> Result<Vec<f64>> {
    cb.codeword(m, t, message_bits)
}

fn exhaustive_search<'a, F>(cb: &HelperCodebook, y: &[f64], t: usize, messages: Range<u128>, rotation: F) -> u128
where
    F: Fn(u128) -> Cow<'a, Rotation>,
{
    let b = cb.base_point(t);
    let mut best = (messages.start, f64::NEG_INFINITY);
    for m in messages {
        let score = rotation(m).bilinear(y, b);
        if score > best.1 {
            best = (m, score);
        }
    }
    best.0
}

/// Minimum-distance decoding over `{x(m', t) : m' in messages}`.
///
/// All candidates have norm `sqrt(nP)`, so the nearest one is the one with
/// the largest inner product with `y`; ties go to the smallest `m'`.
pub fn decode(cb: &HelperCodebook, y: &[f64], t: usize, messages: Range<u128>) -> Result<u128> {
    if messages.is_empty() {
        return Err(Error::usage("empty message space"));
    }
    if y.len() != cb.blocklength() {
        return Err(Error::usage("output dimension differs from blocklength"));
    }
    if t >= cb.help_size() {
        return Err(Error::usage(format!("help index {t} out of range")));
    }
    Ok(exhaustive_search(cb, y, t, messages, |m| Cow::Owned(cb.rotation(m))))
}

/// Probability that at least one of `competitors` independent uniform points
/// on the sphere in `R^n` falls within `angle` of a fixed direction.
pub fn ensemble_error_probability(n: usize, competitors: f64, angle: Angle) -> f64 {
    if competitors <= 0.0 {
        return 0.0;
    }
    let p = cap_ratio_exact(CapSpec::new(n, angle).expect("n >= 2"));
    if p >= 1.0 {
        return 1.0;
    }
    -(competitors * (-p).ln_1p()).exp_m1()
}

/// Draws the ensemble decoder's output for true message `m` given the
/// realized input/output angle. On error the winner is uniform over the
/// other messages, since competitors are exchangeable.
pub fn ensemble_decode<R: Rng>(n: usize, message_bits: u32, m: u128, decode_angle: Angle, rng: &mut R) -> u128 {
    let count = 1u128 << message_bits;
    let q = ensemble_error_probability(n, (count - 1) as f64, decode_angle);
    if rng.random::<f64>() < q {
        let u = rng.random_range(0..count - 1);
        if u >= m {
            u + 1
        } else {
            u
        }
    } else {
        m
    }
}

/// Result of [`CognizantScheme::simulate`].
#[derive(Debug, Clone)]
pub struct SimRun {
    pub summary: SimSummary,
    pub records: Vec<TrialRecord>,
    pub correlations: Option<CorrelationProfile>,
}

/// A configured scheme with its codebook.
#[derive(Debug, Clone)]
pub struct CognizantScheme {
    cfg: SchemeConfig,
    codebook: HelperCodebook,
    rotations: Option<Vec<Rotation>>,
    decoder: DecoderMode,
    theta0: Option<Angle>,
    alpha0: Option<Angle>,
}

impl CognizantScheme {
    pub fn new(cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let cb = build_base_codebook(
            cfg.blocklength,
            &cfg.channel,
            cfg.helper_rate,
            cfg.eps,
            cfg.codebook_seed,
        )?;
        Self::with_codebook(cfg, cb)
    }

    pub fn with_codebook(cfg: SchemeConfig, codebook: HelperCodebook) -> Result<Self> {
        cfg.validate()?;
        if codebook.blocklength() != cfg.blocklength || codebook.helper_bits() != cfg.helper_bits {
            return Err(Error::usage("codebook does not match the scheme configuration"));
        }
        let decoder = cfg.resolved_decoder();
        let n = cfg.blocklength;
        let rotations = (decoder == DecoderMode::Exhaustive
            && (cfg.message_count() as usize).saturating_mul(n * n) <= ROTATION_TABLE_ENTRIES)
            .then(|| {
                (0..cfg.message_count())
                    .into_par_iter()
                    .map(|m| codebook.rotation(m))
                    .collect()
            });
        Ok(Self {
            theta0: cfg.theta0(),
            alpha0: cfg.alpha0(),
            cfg,
            codebook,
            rotations,
            decoder,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn codebook(&self) -> &HelperCodebook {
        &self.codebook
    }

    pub fn decoder(&self) -> DecoderMode {
        self.decoder
    }

    fn rotation(&self, m: u128) -> Cow<'_, Rotation> {
        match &self.rotations {
            Some(table) => Cow::Borrowed(&table[m as usize]),
            None => Cow::Owned(self.codebook.rotation(m)),
        }
    }

    /// Runs one transmission of `m` over the given noise realization. `rng`
    /// is only consumed by the ensemble decoder.
    pub fn run_trial_with_noise<R: Rng>(&self, m: u128, z: &[f64], rng: &mut R) -> Result<TrialOutcome> {
        check_message(m, self.cfg.message_bits)?;
        if z.len() != self.cfg.blocklength {
            return Err(Error::usage("noise dimension differs from blocklength"));
        }
        let rot = self.rotation(m);
        let (t, helper_angle) = select_with_rotation(&self.codebook, &rot, z);
        let x = rot.apply(self.codebook.base_point(t));
        let y: Vec<f64> = x.iter().zip(z).map(|(a, b)| a + b).collect();
        let decode_angle = Angle::from_cos(dot(&x, &y) / (norm_sq(&x) * norm_sq(&y)).sqrt());
        let decoded = match self.decoder {
            DecoderMode::Ensemble => {
                ensemble_decode(self.cfg.blocklength, self.cfg.message_bits, m, decode_angle, rng)
            }
            _ => exhaustive_search(&self.codebook, &y, t, 0..self.cfg.message_count(), |c| {
                self.rotation(c)
            }),
        };
        let covering_miss = self.theta0.is_some_and(|t0| helper_angle > t0);
        Ok(TrialOutcome {
            record: TrialRecord {
                message: m,
                help_index: t,
                helper_angle,
                decode_angle,
                noise_energy: norm_sq(z),
                covering_miss,
                decoded,
                error: decoded != m,
            },
            x,
        })
    }

    /// Samples iid `N(0, sigma^2)` noise from `trial_seed` and transmits `m`.
    pub fn run_trial(&self, m: u128, trial_seed: u64) -> Result<TrialRecord> {
        let mut rng = rng_from_seed(trial_seed);
        let z = sample_noise(self.cfg.blocklength, &self.cfg.channel, &mut rng);
        Ok(self.run_trial_with_noise(m, &z, &mut rng)?.record)
    }

    fn trial_at(&self, i: u64) -> (TrialOutcome, Option<Vec<f64>>) {
        let m = self.cfg.trial_message(i);
        let mut rng = rng_from_seed(self.cfg.trial_seed(i));
        let z = sample_noise(self.cfg.blocklength, &self.cfg.channel, &mut rng);
        let out = self
            .run_trial_with_noise(m, &z, &mut rng)
            .expect("message and noise drawn within range");
        (out, self.cfg.diagnostics.then_some(z))
    }

    /// Whether the trial meets the angle-chain preconditions, and if so
    /// whether `sin(alpha) <= sin(alpha0)` held.
    pub fn angle_chain_check(&self, rec: &TrialRecord) -> Option<bool> {
        let (t0, a0) = (self.theta0?, self.alpha0?);
        let energy_cap = self.cfg.blocklength as f64 * (self.cfg.channel.noise_var() + self.cfg.eps);
        (rec.noise_energy <= energy_cap && rec.helper_angle <= t0)
            .then(|| rec.decode_angle.sin() <= a0.sin() + ANGLE_CHAIN_TOLERANCE)
    }

    pub(crate) fn tally_record(&self, tally: &mut Tally, rec: &TrialRecord) {
        tally.push(rec.error, rec.covering_miss, rec.helper_angle.radians(), rec.decode_angle.radians());
        if let Some(ok) = self.angle_chain_check(rec) {
            tally.chain_checked += 1;
            tally.chain_violations += (!ok) as u64;
        }
    }

    /// Runs `cfg.trials` independent trials with equiprobable messages.
    pub fn simulate(&self) -> Result<SimRun> {
        let start = Instant::now();
        let outcomes: Vec<_> = (0..self.cfg.trials)
            .into_par_iter()
            .map(|i| self.trial_at(i))
            .collect();
        let mut tally = Tally::default();
        let mut acc = self
            .cfg
            .diagnostics
            .then(|| CorrelationAccumulator::new(self.cfg.blocklength));
        let mut records = Vec::with_capacity(outcomes.len());
        for (out, z) in outcomes {
            self.tally_record(&mut tally, &out.record);
            if let (Some(acc), Some(z)) = (acc.as_mut(), z.as_ref()) {
                acc.push(&out.x, z)?;
            }
            records.push(out.record);
        }
        let correlations = match acc {
            Some(acc) if acc.count() >= 2 => Some(acc.finish()?),
            _ => None,
        };
        let summary = build_summary(
            SchemeKind::Cognizant,
            &self.cfg,
            &tally,
            correlations.as_ref().map(|p| p.sum_sq()),
            start.elapsed().as_secs_f64(),
        );
        Ok(SimRun {
            summary,
            records,
            correlations,
        })
    }
}

pub(crate) fn build_summary(
    scheme: SchemeKind,
    cfg: &SchemeConfig,
    tally: &Tally,
    corr_sum: Option<f64>,
    wall_time_s: f64,
) -> SimSummary {
    let (ci_low, ci_high) = tally.wilson();
    let trials = tally.trials as f64;
    SimSummary {
        scheme,
        blocklength: cfg.blocklength,
        message_bits: cfg.message_bits,
        helper_bits: cfg.helper_bits,
        rate_bits: cfg.rate_bits(),
        helper_rate_bits: cfg.helper_rate.bits(),
        snr: cfg.channel.snr(),
        eps: cfg.eps,
        seed: cfg.seed,
        trials: tally.trials,
        errors: tally.errors,
        covering_misses: tally.covering_misses,
        err_rate: tally.err_rate(),
        err_rate_given_covered: tally.err_rate_given_covered(),
        ci_low,
        ci_high,
        mean_helper_angle: tally.helper_angle_sum / trials,
        mean_decode_angle: tally.decode_angle_sum / trials,
        corr_sum,
        corr_budget: correlation_budget(cfg.blocklength, cfg.helper_rate),
        capacity_bits: cfg.capacity_bits(),
        threshold_bits: cfg.threshold_bits(),
        angle_chain_checked: tally.chain_checked,
        angle_chain_violations: tally.chain_violations,
        wall_time_s,
    }
}

/// One transmission of `m` with noise drawn from `trial_seed`.
pub fn run_trial(cfg: &SchemeConfig, cb: &HelperCodebook, m: u128, trial_seed: u64) -> Result<TrialRecord> {
    CognizantScheme::with_codebook(cfg.clone(), cb.clone())?.run_trial(m, trial_seed)
}

/// Builds the codebook from `cfg` and simulates it.
pub fn simulate(cfg: &SchemeConfig) -> Result<SimSummary> {
    Ok(CognizantScheme::new(cfg.clone())?.simulate()?.summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::RotationMode;
    use std::f64::consts::PI;

    fn rh(x: f64) -> HelperRate {
        HelperRate::new(x).unwrap()
    }

    fn cfg(n: usize, rate: f64, r_h: f64, eps: f64, snr: f64, seed: u64, trials: u64) -> SchemeConfig {
        SchemeConfig::new(n, rate, rh(r_h), eps, ChannelParams::from_snr(snr).unwrap(), seed, trials).unwrap()
    }

    #[test]
    fn config_validation() {
        let ch = ChannelParams::from_snr(3.0).unwrap();
        assert!(SchemeConfig::new(16, 0.5, rh(0.5), 0.5, ch, 0, 10).is_err());
        assert!(SchemeConfig::new(16, 0.5, rh(0.5), 0.0, ch, 0, 10).is_err());
        assert!(SchemeConfig::new(16, 0.5, rh(0.5), 0.1, ch, 0, 0).is_err());
        assert!(SchemeConfig::new(16, 0.0, rh(0.5), 0.1, ch, 0, 10).is_err());
        assert!(SchemeConfig::new(16, 0.5, rh(0.0), 0.1, ch, 0, 10).is_err());
        let c = SchemeConfig::new(16, 0.5, rh(0.0), 0.0, ch, 0, 10).unwrap();
        assert!(c.theta0().is_none() && c.threshold_bits().is_none());
        let c = cfg(16, 2.0, 0.5, 0.1, 3.0, 0, 10);
        assert_eq!(c.message_bits, 32);
        assert_eq!(c.resolved_decoder(), DecoderMode::Ensemble);
        assert!(matches!(c.clone().with_decoder(DecoderMode::Exhaustive), Err(Error::Capacity(_))));
        assert!(c.with_max_message_bits(40).unwrap().with_decoder(DecoderMode::Exhaustive).is_ok());
        assert!(matches!(
            SchemeConfig::new(2, 70.0, rh(0.5), 0.1, ch, 0, 1),
            Err(Error::Capacity(_))
        ));
    }

    fn square_codebook() -> HelperCodebook {
        let pts: Vec<Vec<f64>> = (0..4)
            .map(|k| {
                let a = k as f64 * PI / 2.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        HelperCodebook::from_points(2, 1.0, &pts, 0)
            .unwrap()
            .with_rotation_mode(RotationMode::Identity)
    }

    #[test]
    fn helper_select_examples() {
        let cb = square_codebook();
        let ten = 10f64.to_radians();
        let (t, a) = helper_select(&cb, 0, &[ten.cos(), ten.sin()]).unwrap();
        assert_eq!(t, 0);
        assert!((a.radians() - ten).abs() < 1e-12);

        // brute force over the four candidates for a spread of directions
        for k in 0..72 {
            let phi = k as f64 * 5.0_f64.to_radians() + 0.01;
            let z = [2.0 * phi.cos(), 2.0 * phi.sin()];
            let (t, a) = helper_select(&cb, 0, &z).unwrap();
            let brute = (0..4)
                .map(|i| crate::geometry::angle_between(cb.base_point(i), &z).unwrap().radians())
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert_eq!(t, brute.0);
            assert!((a.radians() - brute.1).abs() < 1e-12);
        }

        // exact alignment with codeword 3 of a rotated codebook
        let cb = build_base_codebook(8, &ChannelParams::from_snr(1.0).unwrap(), rh(0.5), 0.1, 4).unwrap();
        let x3 = cb.codeword(9, 3, 4).unwrap();
        let (t, a) = helper_select(&cb, 9, &x3).unwrap();
        assert_eq!(t, 3);
        assert!(a.radians() < 1e-7);

        let one = HelperCodebook::from_points(3, 1.0, &[vec![1.0, 0.0, 0.0]], 0)
            .unwrap()
            .with_rotation_mode(RotationMode::Identity);
        let (t, a) = helper_select(&one, 0, &[-2.0, 0.0, 0.0]).unwrap();
        assert_eq!(t, 0);
        assert!((a.radians() - PI).abs() < 1e-12);
        assert!(helper_select(&one, 0, &[1.0]).is_err());
        assert_eq!(helper_select(&one, 0, &[0.0; 3]).unwrap(), (0, Angle::ZERO));
    }

    #[test]
    fn transmit_examples() {
        let cb = build_base_codebook(8, &ChannelParams::from_snr(2.0).unwrap(), rh(0.5), 0.1, 4).unwrap();
        let x = transmit(&cb, 5, 2, 6).unwrap();
        assert!((norm_sq(&x) / 16.0 - 1.0).abs() < 1e-10);
        assert_eq!(x, transmit(&cb, 5, 2, 6).unwrap());
        assert!(transmit(&cb, 64, 2, 6).is_err());
        assert!(transmit(&cb, 5, 16, 6).is_err());
        let ident = cb.clone().with_rotation_mode(RotationMode::Identity);
        assert_eq!(transmit(&ident, 7, 0, 6).unwrap().as_slice(), ident.base_point(0));
    }

    // Independent scan: explicit codewords and squared Euclidean distances.
    fn brute_force_decode(cb: &HelperCodebook, y: &[f64], t: usize, bits: u32) -> u128 {
        let mut best = (0u128, f64::INFINITY);
        for m in 0..(1u128 << bits) {
            let x = cb.message_codebook(m, bits).unwrap().swap_remove(t);
            let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.1 {
                best = (m, d);
            }
        }
        best.0
    }

    #[test]
    fn decode_examples() {
        let ch = ChannelParams::from_snr(3.0).unwrap();
        let cb = build_base_codebook(16, &ch, rh(0.25), 0.1, 21).unwrap();
        let bits = 10;
        let x = cb.codeword(77, 2, bits).unwrap();
        assert_eq!(decode(&cb, &x, 2, 0..1 << bits).unwrap(), 77);
        let scale = 1e-6 * (16.0 * 3.0f64).sqrt() / 4.0;
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + if i % 2 == 0 { scale } else { -scale }).collect();
        assert_eq!(decode(&cb, &y, 2, 0..1 << bits).unwrap(), 77);
        assert!(decode(&cb, &y, 2, 5..5).is_err());
        assert!(decode(&cb, &y[..3], 2, 0..4).is_err());

        let mut rng = rng_from_seed(8);
        for _ in 0..4 {
            let y: Vec<f64> = (0..16).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
            let t = rng.random_range(0..cb.help_size());
            assert_eq!(decode(&cb, &y, t, 0..1 << bits).unwrap(), brute_force_decode(&cb, &y, t, bits));
        }
    }

    #[test]
    fn zero_noise_trials_never_err() {
        let c = cfg(8, 1.0, 0.5, 0.1, 3.0, 5, 10);
        let scheme = CognizantScheme::new(c).unwrap();
        let mut rng = rng_from_seed(0);
        for m in [0u128, 17, 255] {
            let out = scheme.run_trial_with_noise(m, &[0.0; 8], &mut rng).unwrap();
            assert!(!out.record.error);
            assert_eq!(out.record.help_index, 0);
            assert_eq!(out.record.helper_angle, Angle::ZERO);
            assert_eq!(out.record.decode_angle, Angle::ZERO);
        }
    }

    #[test]
    fn run_trial_is_deterministic() {
        let c = cfg(8, 1.0, 0.5, 0.1, 3.0, 5, 10);
        let cb = build_base_codebook(8, &c.channel, c.helper_rate, c.eps, c.codebook_seed).unwrap();
        let a = run_trial(&c, &cb, 42, 1001).unwrap();
        assert_eq!(a, run_trial(&c, &cb, 42, 1001).unwrap());
        assert_eq!(a.error, a.decoded != a.message);
        assert_eq!(a.covering_miss, a.helper_angle > c.theta0().unwrap());
    }

    #[test]
    fn per_trial_geometry_identities() {
        let c = cfg(12, 1.0, 0.5, 0.1, 3.0, 9, 300);
        let scheme = CognizantScheme::new(c.clone()).unwrap();
        let mut rng = rng_from_seed(3);
        for i in 0..300 {
            let m = c.trial_message(i);
            let z = sample_noise(12, &c.channel, &mut rng);
            let out = scheme.run_trial_with_noise(m, &z, &mut rng).unwrap();
            let x = &out.x;
            let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
            let theta = out.record.helper_angle.radians();
            let (nx, nz) = (norm_sq(x).sqrt(), norm_sq(&z).sqrt());
            let rhs = nx * nx + nz * nz + 2.0 * nx * nz * theta.cos();
            assert!((norm_sq(&y) / rhs - 1.0).abs() < 1e-10);
            assert!((norm_sq(x) / (12.0 * 3.0) - 1.0).abs() < 1e-10);
            // argmin distance and argmax inner product coincide
            let by_distance = brute_force_decode(scheme.codebook(), &y, out.record.help_index, c.message_bits);
            assert_eq!(by_distance, out.record.decoded);
        }
    }

    #[test]
    fn simulate_single_trial_matches_record() {
        let c = cfg(8, 1.0, 0.5, 0.1, 3.0, 13, 1);
        let scheme = CognizantScheme::new(c.clone()).unwrap();
        let run = scheme.simulate().unwrap();
        let rec = &run.records[0];
        assert_eq!(run.summary.trials, 1);
        assert_eq!(run.summary.errors, rec.error as u64);
        assert_eq!(run.summary.covering_misses, rec.covering_miss as u64);
        assert_eq!(run.summary.mean_helper_angle, rec.helper_angle.radians());
        assert_eq!(run.summary.mean_decode_angle, rec.decode_angle.radians());
        assert_eq!(*rec, scheme.run_trial(c.trial_message(0), c.trial_seed(0)).unwrap());
    }

    #[test]
    fn two_messages_with_strong_help_are_error_free() {
        let c = cfg(16, 1.0 / 16.0, 0.5, 0.1, 100.0, 1, 10_000);
        assert_eq!(c.message_bits, 1);
        let s = simulate(&c).unwrap();
        assert!(s.ci_high < 0.01, "{s:?}");
    }

    #[test]
    fn ensemble_probability_limits() {
        assert_eq!(ensemble_error_probability(8, 0.0, Angle::RIGHT), 0.0);
        assert!((ensemble_error_probability(8, 1.0, Angle::RIGHT) - 0.5).abs() < 1e-14);
        assert!((ensemble_error_probability(8, 2.0, Angle::RIGHT) - 0.75).abs() < 1e-14);
        assert_eq!(ensemble_error_probability(8, 5.0, Angle::STRAIGHT), 1.0);
        let tiny = ensemble_error_probability(32, 1e6, Angle::new(0.2).unwrap());
        assert!(tiny > 0.0 && tiny < 1e-15);
    }

    #[test]
    fn ensemble_decode_picks_other_message_on_error() {
        let mut rng = rng_from_seed(4);
        for _ in 0..200 {
            let d = ensemble_decode(4, 3, 5, Angle::STRAIGHT, &mut rng);
            assert!(d != 5 && d < 8);
        }
        assert_eq!(ensemble_decode(4, 3, 5, Angle::ZERO, &mut rng), 5);
    }

    // The two decoders estimate the same ensemble error probability.
    #[test]
    fn ensemble_and_exhaustive_agree_statistically() {
        let trials = 6_000;
        let mut rates = Vec::new();
        for mode in [DecoderMode::Exhaustive, DecoderMode::Ensemble] {
            let mut errors = 0;
            let mut total = 0;
            for book in 0..6 {
                let c = cfg(8, 1.25, 0.5, 0.1, 3.0, 500 + book, trials / 6)
                    .with_decoder(mode)
                    .unwrap();
                let s = simulate(&c).unwrap();
                errors += s.errors;
                total += s.trials;
            }
            rates.push((errors, total));
        }
        let p: Vec<f64> = rates.iter().map(|&(e, t)| e as f64 / t as f64).collect();
        let pooled = (p[0] + p[1]) / 2.0;
        let se = (2.0 * pooled * (1.0 - pooled) / trials as f64).sqrt();
        assert!(pooled > 0.05, "{p:?}");
        assert!((p[0] - p[1]).abs() < 4.0 * se, "{p:?} se={se}");
    }
}
