//! Least-squares line fits used by the asymptotic probes.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation of the samples; `1.0` when `y` is exactly constant
    /// and the slope is zero.
    pub correlation: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

/// Ordinary least squares of `ys` against `xs`. Returns `None` with fewer
/// than two points or a degenerate abscissa.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let scale = ys.iter().fold(0.0_f64, |m, y| m.max(y.abs())).max(1.0);
    let correlation = if syy <= (1e-14 * scale).powi(2) * nf {
        1.0
    } else {
        sxy / (sxx * syy).sqrt()
    };
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Some(LinearFit {
        slope,
        intercept,
        correlation,
        rms_residual: (rss / nf).sqrt(),
    })
}

/// Slope of `log(values)` against `log(1/eps)`.
pub fn log_log_rate(eps: &[f64], values: &[f64]) -> Option<LinearFit> {
    let xs: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    linear_fit(&xs, &ys)
}
