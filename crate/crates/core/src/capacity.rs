//! Closed-form rate expressions for the Gaussian channel with a rate-limited
//! helper that describes the noise to both encoder and decoder.
//!
//! All rates are in bits per channel use.

use crate::error::{Error, Result};

/// Physical description of the channel `Y = x + Z`, `Z ~ N(0, noise_var)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    power: f64,
    noise_var: f64,
    snr: f64,
}

impl ChannelParams {
    pub fn new(power: f64, noise_var: f64) -> Result<Self> {
        if !(power.is_finite() && power > 0.0) {
            return Err(Error::domain(format!("power must be > 0, got {power}")));
        }
        if !(noise_var.is_finite() && noise_var > 0.0) {
            return Err(Error::domain(format!(
                "noise variance must be > 0, got {noise_var}"
            )));
        }
        Ok(Self {
            power,
            noise_var,
            snr: power / noise_var,
        })
    }

    /// Unit noise variance with `power = snr`.
    pub fn from_snr(snr: f64) -> Result<Self> {
        Self::new(snr, 1.0)
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_var.sqrt()
    }

    /// `P / sigma^2`.
    pub fn snr(&self) -> f64 {
        self.snr
    }
}

/// Helper description rate in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HelperRate(pub(crate) f64);

impl HelperRate {
    pub fn new(bits_per_symbol: f64) -> Result<Self> {
        if !(bits_per_symbol.is_finite() && bits_per_symbol >= 0.0) {
            return Err(Error::domain(format!(
                "helper rate must be >= 0, got {bits_per_symbol}"
            )));
        }
        Ok(Self(bits_per_symbol))
    }

    pub fn bits(&self) -> f64 {
        self.0
    }
}

/// Input/noise correlation coefficient `sqrt(1 - 2^{-2 R_h})` that a helper of
/// rate `R_h` can induce.
pub fn rho_of_helper_rate(rh: HelperRate) -> f64 {
    // 1 - 2^{-2x} = -expm1(-2x ln 2), accurate for small rates
    (-(-2.0 * rh.bits() * std::f64::consts::LN_2).exp_m1()).sqrt()
}

fn gaussian_entropy_bits(var: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * var).log2()
}

/// `I(X;Z) = h(Z) - h(Z|X)` under the jointly Gaussian law with correlation
/// `rho_of_helper_rate(rh)`, evaluated through the two differential entropies.
pub fn mutual_info_xz(rh: HelperRate) -> f64 {
    let rho = rho_of_helper_rate(rh);
    let one_minus_rho2 = (-2.0 * rh.bits() * std::f64::consts::LN_2).exp();
    // Unit noise variance; the variance cancels between the two terms.
    debug_assert!((1.0 - rho * rho - one_minus_rho2).abs() < 1e-12);
    gaussian_entropy_bits(1.0) - gaussian_entropy_bits(one_minus_rho2)
}

/// Capacity with a message-cognizant helper assisting encoder and decoder:
/// `1/2 log(1 + A + 2 sqrt(A (1 - 2^{-2 R_h}))) + R_h`.
pub fn capacity_cognizant(ch: &ChannelParams, rh: HelperRate) -> f64 {
    let a = ch.snr();
    let rho = rho_of_helper_rate(rh);
    0.5 * (1.0 + a + 2.0 * a.sqrt() * rho).log2() + rh.bits()
}

/// Capacity with a message-oblivious helper and no feedback: `1/2 log(1 + A) + R_h`.
pub fn capacity_oblivious_nofeedback(ch: &ChannelParams, rh: HelperRate) -> f64 {
    0.5 * (1.0 + ch.snr()).log2() + rh.bits()
}

/// Capacity with a message-oblivious helper and a feedback link. Identical to
/// [`capacity_cognizant`].
pub fn capacity_oblivious_feedback(ch: &ChannelParams, rh: HelperRate) -> f64 {
    capacity_cognizant(ch, rh)
}

/// `I(X;Y)` for jointly Gaussian `(X, Z)` with `Var X = P`, `Var Z = sigma^2`
/// and correlation `rho`, where `Y = X + Z`.
pub fn mutual_info_xy(ch: &ChannelParams, rho: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::domain(format!("correlation must lie in [-1, 1], got {rho}")));
    }
    if rho.abs() == 1.0 {
        return Err(Error::Divergent(format!(
            "I(X;Y) is infinite at rho = {rho}: h(Y|X) = -inf"
        )));
    }
    let (p, s2) = (ch.power(), ch.noise_var());
    let var_y = p + s2 + 2.0 * p.sqrt() * s2.sqrt() * rho;
    let cond_var = s2 * (1.0 - rho * rho);
    Ok(gaussian_entropy_bits(var_y) - gaussian_entropy_bits(cond_var))
}
