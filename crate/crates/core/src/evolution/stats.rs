//! Population statistics used by the sorting and correlation axioms.

use serde::Serialize;

/// Mean and the unnormalized sum of squared deviations,
/// `Σ x² − n·μ²`.
pub fn mean_and_sigma_sq(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let sq: f64 = values.iter().map(|v| v * v).sum();
    Some((mu, sq - n * mu * mu))
}

/// Running mean and population variance, updated one value at a time:
/// `μ_{t+1} = t/(t+1)·μ_t + d/(t+1)` and
/// `σ²_{t+1} = t/(t+1)·σ²_t + (d − μ_{t+1})²/t`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Streaming {
    pub count: u64,
    pub mean: f64,
    pub variance: f64,
}

impl Streaming {
    pub fn push(&mut self, d: f64) {
        if self.count == 0 {
            self.count = 1;
            self.mean = d;
            self.variance = 0.0;
            return;
        }
        let t = self.count as f64;
        self.mean = t / (t + 1.0) * self.mean + d / (t + 1.0);
        self.variance = t / (t + 1.0) * self.variance + (d - self.mean).powi(2) / t;
        self.count += 1;
    }

    pub fn of(values: &[f64]) -> Self {
        let mut s = Self::default();
        for &v in values {
            s.push(v);
        }
        s
    }
}

/// Pearson's product moment correlation; `None` when either side has
/// zero spread.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len(), "pearson needs paired samples");
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let denom = (sxx * syy).sqrt();
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    Some((sxy / denom).clamp(-1.0, 1.0))
}
