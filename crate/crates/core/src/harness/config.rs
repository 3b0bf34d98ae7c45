//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! snr = 3
//! helper_rate_bits = 0.5
//! blocklength = 16, 24, 32      # comma-separated lists make a sweep
//! rate_fraction = 0.7           # or rate_bits = 1.2
//! ```
//!
//! Keys: `snr`, `helper_rate_bits`, `blocklength`, `rate_bits` or
//! `rate_fraction` (fraction of the cognizant capacity), `eps`, `trials`,
//! `seed`, `scheme` (`cognizant` | `feedback`), `diagnostics` (`on` | `off`),
//! `decoder` (`auto` | `exhaustive` | `ensemble`), `max_message_bits`.
//!
//! Defaults: `eps = 0.1 * helper_rate_bits`, `trials = 10000`, `seed = 0`,
//! `scheme = cognizant`, `diagnostics = off`, `decoder = auto`,
//! `max_message_bits = 24`.

use std::collections::HashMap;

use crate::capacity::{capacity_cognizant, ChannelParams, HelperRate};
use crate::cognizant::{DecoderMode, SchemeConfig, DEFAULT_MAX_MESSAGE_BITS};
use crate::error::{Error, Result};
use crate::feedback::FeedbackConfig;
use crate::summary::SchemeKind;

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_EPS_FRACTION: f64 = 0.1;

const KEYS: &[&str] = &[
    "snr",
    "helper_rate_bits",
    "blocklength",
    "rate_bits",
    "rate_fraction",
    "eps",
    "trials",
    "seed",
    "scheme",
    "diagnostics",
    "decoder",
    "max_message_bits",
];

#[derive(Debug, Clone, PartialEq)]
pub enum RateAxis {
    /// Absolute rates in bits per channel use.
    Bits(Vec<f64>),
    /// Fractions of `capacity_cognizant(snr, helper_rate_bits)`.
    Fraction(Vec<f64>),
}

impl RateAxis {
    pub fn len(&self) -> usize {
        match self {
            RateAxis::Bits(v) | RateAxis::Fraction(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn values(&self) -> &[f64] {
        match self {
            RateAxis::Bits(v) | RateAxis::Fraction(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRule {
    /// `eps = fraction * R_h`.
    Relative(f64),
    Fixed(f64),
}

impl EpsRule {
    pub fn resolve(self, rh: f64) -> f64 {
        match self {
            EpsRule::Relative(f) => f * rh,
            EpsRule::Fixed(e) => e,
        }
    }
}

/// A grid of experiments over `snr x helper_rate x blocklength x rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub snr: Vec<f64>,
    pub helper_rate: Vec<f64>,
    pub blocklength: Vec<usize>,
    pub rate: RateAxis,
    pub eps: EpsRule,
    pub trials: u64,
    pub seed: u64,
    pub scheme: SchemeKind,
    pub diagnostics: bool,
    pub decoder: DecoderMode,
    pub max_message_bits: u32,
}

/// Coordinates of one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    /// Indices into the snr, helper-rate, blocklength and rate lists.
    pub index: [usize; 4],
    pub snr: f64,
    pub helper_rate: f64,
    pub blocklength: usize,
    pub rate: f64,
}

/// One fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub scheme: SchemeKind,
    pub config: SchemeConfig,
}

impl Experiment {
    pub fn feedback_config(&self) -> Result<FeedbackConfig> {
        FeedbackConfig::new(self.config.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedConfig {
    Single(Experiment),
    Sweep(SweepSpec),
}

impl SweepSpec {
    pub fn cell_count(&self) -> usize {
        self.snr.len() * self.helper_rate.len() * self.blocklength.len() * self.rate.len()
    }

    /// Cells in row-major order (snr outermost, rate innermost).
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::with_capacity(self.cell_count());
        for (i, &snr) in self.snr.iter().enumerate() {
            for (j, &rh) in self.helper_rate.iter().enumerate() {
                for (k, &n) in self.blocklength.iter().enumerate() {
                    for (l, &rate) in self.rate.values().iter().enumerate() {
                        out.push(SweepCell {
                            index: [i, j, k, l],
                            snr,
                            helper_rate: rh,
                            blocklength: n,
                            rate,
                        });
                    }
                }
            }
        }
        out
    }

    /// Resolves a cell into an experiment rooted at `seed`.
    pub fn experiment(&self, cell: &SweepCell, seed: u64) -> Result<Experiment> {
        let channel = ChannelParams::from_snr(cell.snr)?;
        let rh = HelperRate::new(cell.helper_rate)?;
        let rate_bits = match self.rate {
            RateAxis::Bits(_) => cell.rate,
            RateAxis::Fraction(_) => cell.rate * capacity_cognizant(&channel, rh),
        };
        let config = SchemeConfig::new(
            cell.blocklength,
            rate_bits,
            rh,
            self.eps.resolve(cell.helper_rate),
            channel,
            seed,
            self.trials,
        )?
        .with_diagnostics(self.diagnostics)
        .with_max_message_bits(self.max_message_bits)?
        .with_decoder(self.decoder)?;
        let exp = Experiment {
            scheme: self.scheme,
            config,
        };
        if self.scheme == SchemeKind::Feedback {
            exp.feedback_config()?;
        }
        Ok(exp)
    }
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn parse_list<T: std::str::FromStr>(key: &str, e: &Entry<'_>) -> Result<Vec<T>> {
    e.value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| Error::config(e.line, format!("invalid value '{}' for {key}", s.trim())))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, e: &Entry<'_>) -> Result<T> {
    let mut v = parse_list::<T>(key, e)?;
    if v.len() != 1 {
        return Err(Error::config(e.line, format!("{key} takes a single value")));
    }
    Ok(v.remove(0))
}

/// Parses a configuration into a sweep specification (a single experiment
/// becomes a one-cell sweep).
pub fn parse_sweep(text: &str) -> Result<SweepSpec> {
    let mut entries: HashMap<&str, Entry<'_>> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::config(line, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::config(line, format!("unknown key '{key}'")));
        }
        if value.is_empty() {
            return Err(Error::config(line, format!("missing value for {key}")));
        }
        if let Some(prev) = entries.get(key) {
            return Err(Error::config(
                line,
                format!("duplicate key '{key}' (lines {} and {line})", prev.line),
            ));
        }
        entries.insert(key, Entry { line, value });
    }

    let required = |key: &str| {
        entries
            .get(key)
            .ok_or_else(|| Error::config(0, format!("missing required key '{key}'")))
    };
    let line_of = |key: &str| entries.get(key).map_or(0, |e| e.line);

    let snr: Vec<f64> = parse_list("snr", required("snr")?)?;
    if let Some(bad) = snr.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::config(line_of("snr"), format!("snr must be > 0, got {bad}")));
    }
    let helper_rate: Vec<f64> = parse_list("helper_rate_bits", required("helper_rate_bits")?)?;
    if let Some(bad) = helper_rate.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::config(
            line_of("helper_rate_bits"),
            format!("helper_rate_bits must be >= 0, got {bad}"),
        ));
    }
    let blocklength: Vec<usize> = parse_list("blocklength", required("blocklength")?)?;
    if let Some(bad) = blocklength.iter().find(|n| **n < 2) {
        return Err(Error::config(line_of("blocklength"), format!("blocklength must be >= 2, got {bad}")));
    }
    let rate = match (entries.get("rate_bits"), entries.get("rate_fraction")) {
        (Some(a), Some(b)) => {
            return Err(Error::config(
                a.line.max(b.line),
                "rate_bits and rate_fraction are mutually exclusive",
            ))
        }
        (Some(e), None) => RateAxis::Bits(parse_list("rate_bits", e)?),
        (None, Some(e)) => RateAxis::Fraction(parse_list("rate_fraction", e)?),
        (None, None) => return Err(Error::config(0, "one of rate_bits or rate_fraction is required")),
    };
    if let Some(bad) = rate.values().iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        let line = line_of("rate_bits").max(line_of("rate_fraction"));
        return Err(Error::config(line, format!("rate must be > 0, got {bad}")));
    }

    let eps = match entries.get("eps") {
        None => EpsRule::Relative(DEFAULT_EPS_FRACTION),
        Some(e) => {
            let eps: f64 = parse_one("eps", e)?;
            for &rh in &helper_rate {
                if rh == 0.0 && eps != 0.0 {
                    return Err(Error::config(e.line, "eps must be omitted or 0 when helper_rate_bits = 0"));
                }
                if rh > 0.0 && !(eps > 0.0 && eps < rh) {
                    return Err(Error::config(
                        e.line,
                        format!("eps = {eps} violates 0 < eps < R_h for R_h = {rh}"),
                    ));
                }
            }
            EpsRule::Fixed(eps)
        }
    };

    let trials = match entries.get("trials") {
        Some(e) => parse_one::<u64>("trials", e)?,
        None => DEFAULT_TRIALS,
    };
    if trials == 0 {
        return Err(Error::config(line_of("trials"), "trials must be >= 1"));
    }
    let seed = entries.get("seed").map(|e| parse_one::<u64>("seed", e)).transpose()?.unwrap_or(0);
    let max_message_bits = entries
        .get("max_message_bits")
        .map(|e| parse_one::<u32>("max_message_bits", e))
        .transpose()?
        .unwrap_or(DEFAULT_MAX_MESSAGE_BITS);

    let scheme = match entries.get("scheme").map(|e| (e.line, e.value)) {
        None | Some((_, "cognizant")) => SchemeKind::Cognizant,
        Some((_, "feedback")) => SchemeKind::Feedback,
        Some((line, v)) => {
            return Err(Error::config(line, format!("scheme must be cognizant or feedback, got '{v}'")))
        }
    };
    let diagnostics = match entries.get("diagnostics").map(|e| (e.line, e.value)) {
        None | Some((_, "off")) => false,
        Some((_, "on")) => true,
        Some((line, v)) => return Err(Error::config(line, format!("diagnostics must be on or off, got '{v}'"))),
    };
    let decoder = match entries.get("decoder").map(|e| (e.line, e.value)) {
        None | Some((_, "auto")) => DecoderMode::Auto,
        Some((_, "exhaustive")) => DecoderMode::Exhaustive,
        Some((_, "ensemble")) => DecoderMode::Ensemble,
        Some((line, v)) => {
            return Err(Error::config(
                line,
                format!("decoder must be auto, exhaustive or ensemble, got '{v}'"),
            ))
        }
    };

    Ok(SweepSpec {
        snr,
        helper_rate,
        blocklength,
        rate,
        eps,
        trials,
        seed,
        scheme,
        diagnostics,
        decoder,
        max_message_bits,
    })
}

/// Parses a configuration. Files whose list-valued keys all hold one value
/// describe a single experiment rooted directly at `seed`.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let spec = parse_sweep(text)?;
    if spec.cell_count() != 1 {
        return Ok(ParsedConfig::Sweep(spec));
    }
    let cell = spec.cells()[0];
    let exp = spec.experiment(&cell, spec.seed).map_err(|e| match e {
        Error::Domain(msg) | Error::Capacity(msg) | Error::Usage(msg) => Error::config(0, msg),
        other => other,
    })?;
    Ok(ParsedConfig::Single(exp))
}
