//! Log-space accumulation helpers.

/// `log(sum(exp(x)))` with the max-shift trick. Empty input or all `-inf`
/// gives `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Log-sum-exp over an iterator in a single pass, rescaling the running sum
/// whenever a new maximum appears.
pub fn log_sum_exp_iter<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut max = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for v in values {
        if v == f64::NEG_INFINITY {
            continue;
        }
        if v <= max {
            acc += (v - max).exp();
        } else {
            acc = acc * (max - v).exp() + 1.0;
            max = v;
        }
    }
    if max == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        max + acc.ln()
    }
}

/// Normalizes log-weights in place so that their exponentials sum to one.
/// Returns the log normalizer.
pub fn normalize_log_weights(log_weights: &mut [f64]) -> f64 {
    let z = log_sum_exp(log_weights);
    if z.is_finite() {
        for w in log_weights.iter_mut() {
            *w -= z;
        }
    }
    z
}

/// Mean and standard error of the mean. The standard error uses the
/// unbiased sample variance and is zero for fewer than two values.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
