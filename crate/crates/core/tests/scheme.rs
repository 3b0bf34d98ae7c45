use gaussian_helper::capacity::{capacity_cognizant, rho_of_helper_rate, ChannelParams, HelperRate};
use gaussian_helper::cognizant::{CognizantScheme, SchemeConfig};
use gaussian_helper::feedback::{FeedbackConfig, FeedbackScheme};
use gaussian_helper::geometry::achievable_rate_threshold;

fn ch() -> ChannelParams {
    ChannelParams::from_snr(3.0).unwrap()
}

fn rh() -> HelperRate {
    HelperRate::new(0.5).unwrap()
}

fn config(n: usize, rate: f64, trials: u64) -> SchemeConfig {
    SchemeConfig::new(n, rate, rh(), 0.1, ch(), 31, trials).unwrap()
}

// Mean and standard error of cos(helper angle).
fn helper_alignment(n: usize) -> (f64, f64) {
    let t = achievable_rate_threshold(&ch(), rh(), 0.1).unwrap();
    let run = CognizantScheme::new(config(n, 0.7 * t, 2000)).unwrap().simulate().unwrap();
    let c: Vec<f64> = run.records.iter().map(|r| r.helper_angle.cos()).collect();
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (c.len() - 1) as f64;
    (mean, (var / c.len() as f64).sqrt())
}

#[test]
fn helper_alignment_improves_with_blocklength() {
    let rho = rho_of_helper_rate(rh());
    let (m16, s16) = helper_alignment(16);
    let (m32, s32) = helper_alignment(32);
    assert!(m32 - m16 > 3.0 * (s16 * s16 + s32 * s32).sqrt(), "{m16} -> {m32}");
    assert!(m32 < rho, "{m32} vs {rho}");
}

#[test]
fn correlation_is_spread_evenly_over_time_indices() {
    let cfg = config(12, 1.0, 10_000).with_diagnostics(true);
    let profile = CognizantScheme::new(cfg).unwrap().simulate().unwrap().correlations.unwrap();
    let rho = &profile.per_index_rho;
    let mean = rho.iter().sum::<f64>() / rho.len() as f64;
    let se = (1.0 - mean * mean) / (profile.trials as f64).sqrt();
    let (lo, hi) = rho.iter().fold((f64::MAX, f64::MIN), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(mean > 0.3, "{mean}");
    assert!(hi - lo < 8.0 * se, "spread {} vs se {se}", hi - lo);
}

#[test]
fn feedback_block_stays_within_the_power_budget() {
    let c = capacity_cognizant(&ch(), rh());
    let cfg = FeedbackConfig::new(config(8, 0.7 * c, 3000)).unwrap();
    let run = FeedbackScheme::new(cfg).unwrap().simulate().unwrap();
    assert!(run.max_energy_ratio < 1.0);
    assert!(run.records.iter().all(|r| r.x0 * r.x0 < 3.0));
    assert_eq!(run.identity_violations, 0);
}
