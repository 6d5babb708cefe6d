//! Parsing of value lists and inclusive ranges.

use crate::error::{AppError, AppResult};

/// Parses `v`, `a,b,c` or the inclusive range `start:stop:step`.
pub fn parse_snr_list(text: &str) -> AppResult<Vec<f64>> {
    let text = text.trim();
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, s] = parts[..] else {
            return Err(usage(format!(
                "SNR range must be start:stop:step, got `{text}`"
            )));
        };
        let (a, b, s) = (number(a)?, number(b)?, number(s)?);
        return float_range(a, b, s);
    }
    let values = text.split(',').map(number).collect::<AppResult<Vec<_>>>()?;
    if values.is_empty() {
        return Err(usage("empty SNR list".into()));
    }
    Ok(values)
}

/// `start, start + step, …` up to and including `stop`.
pub fn float_range(start: f64, stop: f64, step: f64) -> AppResult<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(usage(format!("range step must be positive, got {step}")));
    }
    if !(start.is_finite() && stop.is_finite()) || stop < start {
        return Err(usage(format!("empty range {start}:{stop}:{step}")));
    }
    // Tolerate rounding in (stop - start) / step.
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

/// Parses `n`, `a,b,c` or the inclusive integer range `a:b`.
pub fn parse_usize_list(text: &str) -> AppResult<Vec<usize>> {
    let text = text.trim();
    let values: Vec<usize> = match text.split_once(':') {
        Some((a, b)) => {
            let (a, b) = (integer(a)?, integer(b)?);
            if b < a {
                return Err(usage(format!("empty range `{text}`")));
            }
            (a..=b).collect()
        }
        None => text.split(',').map(integer).collect::<AppResult<_>>()?,
    };
    Ok(values)
}

fn number(s: &str) -> AppResult<f64> {
    let s = s.trim();
    s.parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| usage(format!("not a number: `{s}`")))
}

fn integer(s: &str) -> AppResult<usize> {
    let s = s.trim();
    s.parse()
        .map_err(|_| usage(format!("not a non-negative integer: `{s}`")))
}

fn usage(message: String) -> AppError {
    AppError::Usage(message)
}
