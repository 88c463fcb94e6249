//! Autocorrelation summaries of a scalar chain trace.

fn centered(xs: &[f64]) -> (Vec<f64>, f64) {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let d: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let var = d.iter().map(|x| x * x).sum();
    (d, var)
}

fn lag(d: &[f64], var: f64, k: usize) -> f64 {
    if var == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (0..d.len() - k).map(|t| d[t] * d[t + k]).sum::<f64>() / var
}

/// Sample autocorrelation at lags `0..=max_lag`.
pub fn autocorrelation(xs: &[f64], max_lag: usize) -> Vec<f64> {
    let (d, var) = centered(xs);
    (0..=max_lag.min(xs.len().saturating_sub(1))).map(|k| lag(&d, var, k)).collect()
}

/// Integrated autocorrelation time, summing lags until the first
/// non-positive autocorrelation.
pub fn integrated_time(xs: &[f64]) -> f64 {
    let (d, var) = centered(xs);
    let mut tau = 1.0;
    for k in 1..xs.len() / 2 {
        let r = lag(&d, var, k);
        if r <= 0.0 {
            break;
        }
        tau += 2.0 * r;
    }
    tau
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_trace_has_unit_time() {
        let xs: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let rho = autocorrelation(&xs, 2);
        assert!((rho[0] - 1.0).abs() < 1e-12 && rho[1] < -0.9);
        assert_eq!(integrated_time(&xs), 1.0);
    }

    #[test]
    fn ar1_time_matches_theory() {
        // x_t = a x_{t-1} + e_t has tau = (1 + a) / (1 - a).
        let a: f64 = 0.5;
        let mut state: u64 = 12345;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = a * x + next();
                x
            })
            .collect();
        let tau = integrated_time(&xs);
        assert!((tau - 3.0).abs() < 0.3, "tau {tau}");
    }

    #[test]
    fn constant_trace() {
        assert_eq!(integrated_time(&[2.0; 10]), 1.0);
    }
}
