//! CSV output for simulation summaries.
//!
//! UTF-8, LF line endings, `.` decimal separator. Reals are rendered like C's
//! `%.9g`; missing values are written as `NA`.

use std::io::Write;

use crate::error::Result;
use crate::summary::SimSummary;

pub const CSV_HEADER: &str = "scheme,n,rate_bits,helper_rate_bits,snr,eps,trials,errors,covering_misses,err_rate,err_rate_given_covered,ci_low,ci_high,mean_helper_angle,mean_decode_angle,corr_sum,corr_budget,capacity_bits,threshold_bits,seed,wall_time_s";

pub const MISSING: &str = "NA";

/// Formats `v` with nine significant digits, trailing zeros removed.
pub fn fmt_sig9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig9).unwrap_or_else(|| MISSING.into())
}

/// Output switches for [`emit_csv_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Write measured wall time. Off by default so that output is a pure
    /// function of the configuration.
    pub timing: bool,
}

pub fn format_row(s: &SimSummary, opts: CsvOptions) -> String {
    let f = fmt_sig9;
    [
        s.scheme.to_string(),
        s.blocklength.to_string(),
        f(s.rate_bits),
        f(s.helper_rate_bits),
        f(s.snr),
        f(s.eps),
        s.trials.to_string(),
        s.errors.to_string(),
        s.covering_misses.to_string(),
        f(s.err_rate),
        opt(s.err_rate_given_covered),
        f(s.ci_low),
        f(s.ci_high),
        f(s.mean_helper_angle),
        f(s.mean_decode_angle),
        opt(s.corr_sum),
        f(s.corr_budget),
        f(s.capacity_bits),
        opt(s.threshold_bits),
        s.seed.to_string(),
        if opts.timing { f(s.wall_time_s) } else { MISSING.into() },
    ]
    .join(",")
}

/// Header, then one row per summary in the given order.
pub fn emit_csv<W: Write>(summaries: &[SimSummary], sink: W) -> Result<()> {
    emit_csv_with(summaries, sink, CsvOptions::default())
}

pub fn emit_csv_with<W: Write>(summaries: &[SimSummary], mut sink: W, opts: CsvOptions) -> Result<()> {
    writeln!(sink, "{CSV_HEADER}")?;
    for s in summaries {
        writeln!(sink, "{}", format_row(s, opts))?;
    }
    sink.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(1.0), "1");
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(-0.0), "0");
        assert_eq!(fmt_sig9(1.5), "1.5");
        assert_eq!(fmt_sig9(1.844_592_512_463_610_2), "1.84459251");
        assert_eq!(fmt_sig9(0.000_123_456_789_12), "0.000123456789");
        assert_eq!(fmt_sig9(1.234_567_891_2e-7), "1.23456789e-07");
        assert_eq!(fmt_sig9(123_456_789.0), "123456789");
        assert_eq!(fmt_sig9(1_234_567_890.0), "1.23456789e+09");
        assert_eq!(fmt_sig9(9.999_999_999_9), "10");
        assert_eq!(fmt_sig9(-2.5e-3), "-0.0025");
        assert_eq!(fmt_sig9(12.0), "12");
        assert_eq!(fmt_sig9(f64::INFINITY), "inf");
    }

    #[test]
    fn empty_list_is_header_only() {
        let mut out = Vec::new();
        emit_csv(&[], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{CSV_HEADER}\n"));
        assert_eq!(CSV_HEADER.split(',').count(), 21);
    }
}
