//! Angles on the sphere, spherical cap areas and the helper/decoder angle
//! algebra of the geometric coding scheme.

use std::f64::consts::{FRAC_PI_2, PI};

use statrs::function::beta::beta_reg;

use crate::capacity::{rho_of_helper_rate, ChannelParams, HelperRate};
use crate::error::{Error, Result};

/// Cosines further than this outside `[-1, 1]` are reported as a numerical
/// health problem before being clamped.
pub const COSINE_CLAMP_TOLERANCE: f64 = 1e-9;

/// An angle in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);
    pub const RIGHT: Angle = Angle(FRAC_PI_2);
    pub const STRAIGHT: Angle = Angle(PI);

    pub fn new(radians: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&radians) {
            return Err(Error::domain(format!("angle must lie in [0, pi], got {radians}")));
        }
        Ok(Self(radians))
    }

    /// `arccos(cos)` after clamping `cos` into `[-1, 1]`.
    pub fn from_cos(cos: f64) -> Self {
        if cos.abs() > 1.0 + COSINE_CLAMP_TOLERANCE {
            log::warn!("cosine {cos} outside [-1, 1] beyond round-off tolerance");
        }
        Angle(cos.clamp(-1.0, 1.0).acos())
    }

    pub fn radians(&self) -> f64 {
        self.0
    }

    pub fn sin(&self) -> f64 {
        self.0.sin()
    }

    pub fn cos(&self) -> f64 {
        self.0.cos()
    }
}

/// A cap of the unit sphere in `R^dim` with the given half-angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapSpec {
    dim: usize,
    half_angle: Angle,
}

impl CapSpec {
    pub fn new(dim: usize, half_angle: Angle) -> Result<Self> {
        if dim < 2 {
            return Err(Error::domain(format!("sphere dimension must be >= 2, got {dim}")));
        }
        Ok(Self { dim, half_angle })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_angle(&self) -> Angle {
        self.half_angle
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

/// Angle between two nonzero vectors of equal dimension.
pub fn angle_between(x: &[f64], y: &[f64]) -> Result<Angle> {
    if x.len() != y.len() {
        return Err(Error::usage(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let (nx, ny) = (norm_sq(x).sqrt(), norm_sq(y).sqrt());
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::domain("angle with a zero vector is undefined"));
    }
    Ok(Angle::from_cos(dot(x, y) / (nx * ny)))
}

/// Fraction of the unit sphere in `R^n` covered by a cap of half-angle `phi`,
/// i.e. `C_n(phi) / C_n(pi)`.
///
/// For `phi <= pi/2` this is `I_{sin^2 phi}((n-1)/2, 1/2) / 2`; larger angles
/// use the complement.
pub fn cap_ratio_exact(spec: CapSpec) -> f64 {
    let phi = spec.half_angle.radians();
    let a = (spec.dim as f64 - 1.0) / 2.0;
    let half_cap = |angle: f64| {
        let s = angle.sin();
        0.5 * beta_reg(a, 0.5, (s * s).min(1.0))
    };
    if phi <= FRAC_PI_2 {
        half_cap(phi)
    } else {
        1.0 - half_cap(PI - phi)
    }
}

/// Per-dimension exponent `-log2 sin(phi)` of the cap ratio.
pub fn cap_rate_exponent(phi: Angle) -> Result<f64> {
    let r = phi.radians();
    if r == 0.0 {
        return Err(Error::Divergent("cap exponent is infinite at phi = 0".into()));
    }
    if r > FRAC_PI_2 {
        return Err(Error::domain(format!("cap exponent needs phi <= pi/2, got {r}")));
    }
    Ok(-r.sin().log2())
}

fn check_slack(rh: HelperRate, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < rh.bits()) {
        return Err(Error::domain(format!(
            "slack must satisfy 0 < eps < R_h, got eps = {eps}, R_h = {}",
            rh.bits()
        )));
    }
    Ok(())
}

/// Helper alignment half-angle: `sin(theta0) = 2^{-(R_h - eps)}`.
pub fn theta0(rh: HelperRate, eps: f64) -> Result<Angle> {
    check_slack(rh, eps)?;
    Ok(Angle((-(rh.bits() - eps)).exp2().asin()))
}

/// Bound on the input/output angle when the helper angle is at most `theta0`
/// and `|z|^2 <= n (sigma^2 + eps)`.
pub fn alpha0(ch: &ChannelParams, eps: f64, theta0: Angle) -> Result<Angle> {
    let t = theta0.radians();
    if !(t > 0.0 && t <= FRAC_PI_2) {
        return Err(Error::domain(format!("theta0 must lie in (0, pi/2], got {t}")));
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::domain(format!("eps must be >= 0, got {eps}")));
    }
    let snr_eff = ch.power() / (ch.noise_var() + eps);
    let radicand = snr_eff + 1.0 + 2.0 * snr_eff.sqrt() * theta0.cos();
    Ok(Angle((theta0.sin() / radicand.sqrt()).asin()))
}

/// Rate below which the geometric scheme's error bound vanishes,
/// `-log2 sin(alpha0)`:
/// `1/2 log(P/(sigma^2+eps) + 1 + 2 sqrt(P/(sigma^2+eps)) cos(theta0)) + R_h - eps`
/// with `cos(theta0) = sqrt(1 - 2^{-2(R_h - eps)})`.
pub fn achievable_rate_threshold(ch: &ChannelParams, rh: HelperRate, eps: f64) -> Result<f64> {
    check_slack(rh, eps)?;
    let snr_eff = ch.power() / (ch.noise_var() + eps);
    let cos_theta0 = rho_of_helper_rate(HelperRate(rh.bits() - eps));
    Ok(0.5 * (snr_eff + 1.0 + 2.0 * snr_eff.sqrt() * cos_theta0).log2() + rh.bits() - eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::capacity_cognizant;

    fn rh(x: f64) -> HelperRate {
        HelperRate::new(x).unwrap()
    }

    #[test]
    fn angle_examples() {
        let e1 = [1.0, 0.0];
        let e2 = [0.0, 1.0];
        assert_eq!(angle_between(&e1, &e1).unwrap().radians(), 0.0);
        assert!((angle_between(&e1, &e2).unwrap().radians() - FRAC_PI_2).abs() < 1e-15);
        let d = angle_between(&[1.0, 1.0], &[1.0, 0.0]).unwrap().radians();
        assert!((d - PI / 4.0).abs() < 1e-15);
        assert!(matches!(angle_between(&[0.0, 0.0], &e1), Err(Error::Domain(_))));
        assert!(matches!(angle_between(&[1.0], &e1), Err(Error::Usage(_))));
        // round-off pushing the cosine past 1 is clamped
        let v = [0.1; 50];
        assert_eq!(angle_between(&v, &v).unwrap().radians(), 0.0);
    }

    #[test]
    fn angle_and_cap_validation() {
        assert!(Angle::new(-0.1).is_err());
        assert!(Angle::new(3.2).is_err());
        assert!(CapSpec::new(1, Angle::RIGHT).is_err());
    }

    #[test]
    fn cap_ratio_examples() {
        for n in [2, 3, 5, 17, 200] {
            let c = cap_ratio_exact(CapSpec::new(n, Angle::RIGHT).unwrap());
            assert!((c - 0.5).abs() < 1e-14, "n={n}");
            assert_eq!(cap_ratio_exact(CapSpec::new(n, Angle::STRAIGHT).unwrap()), 1.0);
            assert_eq!(cap_ratio_exact(CapSpec::new(n, Angle::ZERO).unwrap()), 0.0);
        }
        let c = cap_ratio_exact(CapSpec::new(3, Angle::new(PI / 3.0).unwrap()).unwrap());
        assert!((c - 0.25).abs() < 1e-12);
        // circle: arc fraction phi / pi
        let c = cap_ratio_exact(CapSpec::new(2, Angle::new(0.7).unwrap()).unwrap());
        assert!((c - 0.7 / PI).abs() < 1e-12);
    }

    #[test]
    fn cap_ratio_symmetry_and_monotonicity() {
        for n in [2, 4, 8, 33] {
            let mut prev = -1.0;
            for i in 0..=200 {
                let phi = PI * i as f64 / 200.0;
                let c = cap_ratio_exact(CapSpec::new(n, Angle::new(phi).unwrap()).unwrap());
                let d = cap_ratio_exact(CapSpec::new(n, Angle::new(PI - phi).unwrap()).unwrap());
                assert!((c + d - 1.0).abs() < 1e-12);
                assert!(c >= prev);
                prev = c;
            }
        }
    }

    #[test]
    fn cap_exponent_examples() {
        assert_eq!(cap_rate_exponent(Angle::RIGHT).unwrap(), 0.0);
        assert!((cap_rate_exponent(Angle::new(PI / 6.0).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        let phi = Angle::new((-0.4f64).exp2().asin()).unwrap();
        assert!((cap_rate_exponent(phi).unwrap() - 0.4).abs() < 1e-15);
        assert!(matches!(cap_rate_exponent(Angle::ZERO), Err(Error::Divergent(_))));
    }

    #[test]
    fn theta0_examples() {
        let t = theta0(rh(1.0), 1e-15).unwrap().radians();
        assert!((t - PI / 6.0).abs() < 1e-12);
        let t = theta0(rh(0.5), 0.1).unwrap().radians();
        assert!((t - 0.860_024_095_151_924).abs() < 1e-14);
        let t = theta0(rh(2.0), 1.0).unwrap().radians();
        assert!((t - PI / 6.0).abs() < 1e-15);
        assert!(theta0(rh(0.5), 0.5).is_err());
        assert!(theta0(rh(0.5), 0.0).is_err());
        assert!(theta0(rh(0.0), 0.0).is_err());
    }

    #[test]
    fn alpha0_examples() {
        let ch = ChannelParams::from_snr(3.0).unwrap();
        let t0 = Angle::new((-0.5f64).exp2().asin()).unwrap();
        let a = alpha0(&ch, 0.0, t0).unwrap();
        assert!((a.sin() - 0.278_434_036_821_723_9).abs() < 1e-12);

        let tiny = Angle::new(1e-12).unwrap();
        assert!(alpha0(&ch, 0.0, tiny).unwrap().radians() < 1e-12);

        let weak = ChannelParams::new(1e-300, 1.0).unwrap();
        let t = Angle::new(0.9).unwrap();
        assert!((alpha0(&weak, 0.0, t).unwrap().radians() - 0.9).abs() < 1e-12);

        assert!(alpha0(&ch, 0.0, Angle::ZERO).is_err());
        assert!(alpha0(&ch, -1.0, t0).is_err());
    }

    #[test]
    fn threshold_examples() {
        let ch = ChannelParams::from_snr(3.0).unwrap();
        let cap = capacity_cognizant(&ch, rh(0.5));
        let near = achievable_rate_threshold(&ch, rh(0.5), 1e-9).unwrap();
        assert!((near - cap).abs() < 1e-6);
        assert!(achievable_rate_threshold(&ch, rh(0.5), 0.1).unwrap() < cap);
        assert!(achievable_rate_threshold(&ch, rh(0.5), 0.6).is_err());

        for &(a, r, eps) in &[(3.0, 0.5, 0.1), (1.0, 2.0, 0.3), (10.0, 0.8, 0.01)] {
            let ch = ChannelParams::from_snr(a).unwrap();
            let t0 = theta0(rh(r), eps).unwrap();
            let a0 = alpha0(&ch, eps, t0).unwrap();
            let chain = cap_rate_exponent(a0).unwrap();
            let direct = achievable_rate_threshold(&ch, rh(r), eps).unwrap();
            assert!((chain - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn threshold_increases_as_slack_shrinks() {
        let ch = ChannelParams::from_snr(3.0).unwrap();
        let cap = capacity_cognizant(&ch, rh(0.5));
        let mut prev = f64::NEG_INFINITY;
        for k in 1..12 {
            let eps = 0.4 * 0.3f64.powi(k);
            let v = achievable_rate_threshold(&ch, rh(0.5), eps).unwrap();
            assert!(v > prev && v < cap);
            prev = v;
        }
        assert!(cap - prev < 1e-5);
    }
}
