//! Least-squares decay fits on `log |C(t)|`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{ObservableError, TimeSeries};

/// Minimum number of above-floor samples a fit needs.
pub const MIN_FIT_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DecayModel {
    /// `A e^{-ϑ t}`
    Exponential,
    /// `A (1 + t)^{-n}`
    Algebraic,
    /// `A e^{-ϑ t} (1 + t)^{-n}`
    ExpAlgebraic,
}

impl DecayModel {
    pub fn name(self) -> &'static str {
        match self {
            DecayModel::Exponential => "exponential",
            DecayModel::Algebraic => "algebraic",
            DecayModel::ExpAlgebraic => "exp-algebraic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exponential" | "exp" => Some(DecayModel::Exponential),
            "algebraic" | "alg" => Some(DecayModel::Algebraic),
            "exp-algebraic" | "exp-times-algebraic" => Some(DecayModel::ExpAlgebraic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayFit {
    pub model: DecayModel,
    /// `ϑ`; zero for the purely algebraic model.
    pub rate: f64,
    /// `n`; zero for the purely exponential model.
    pub exponent: f64,
    /// `log A`.
    pub log_prefactor: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub noise_floor: f64,
    /// Samples used by the fit.
    pub samples: usize,
}

impl DecayFit {
    /// Model value at time `t`.
    pub fn predict(&self, t: f64) -> f64 {
        (self.log_prefactor - self.rate * t - self.exponent * (1.0 + t).ln()).exp()
    }
}

/// Fits `model` to the samples of `series` inside `window` whose magnitude
/// exceeds `noise_floor`.
pub fn fit_decay(
    series: &TimeSeries,
    model: DecayModel,
    window: (f64, f64),
    noise_floor: f64,
) -> Result<DecayFit, ObservableError> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(ObservableError::Window { lo, hi });
    }
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, v)| **t >= lo && **t <= hi && v.abs() > noise_floor && v.is_finite())
        .map(|(t, v)| (*t, v.abs().ln()))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(ObservableError::InsufficientData {
            found: pts.len(),
            needed: MIN_FIT_SAMPLES,
        });
    }
    let cols: Vec<[f64; 2]> = pts
        .iter()
        .map(|(t, _)| match model {
            DecayModel::Exponential => [*t, 0.0],
            DecayModel::Algebraic => [(1.0 + t).ln(), 0.0],
            DecayModel::ExpAlgebraic => [*t, (1.0 + t).ln()],
        })
        .collect();
    let k = if model == DecayModel::ExpAlgebraic {
        2
    } else {
        1
    };
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (intercept, slopes) = least_squares(&cols, &ys, k)?;
    let (rate, exponent) = match model {
        DecayModel::Exponential => (-slopes[0], 0.0),
        DecayModel::Algebraic => (0.0, -slopes[0]),
        DecayModel::ExpAlgebraic => (-slopes[0], -slopes[1]),
    };
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
    let ss_res: f64 = cols
        .iter()
        .zip(&ys)
        .map(|(c, y)| {
            let f = intercept + slopes[0] * c[0] + slopes[1] * c[1];
            (y - f) * (y - f)
        })
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayFit {
        model,
        rate,
        exponent,
        log_prefactor: intercept,
        window,
        r_squared,
        noise_floor,
        samples: pts.len(),
    })
}

/// Ordinary least squares `y ≈ b0 + Σ_j b_j x_j` over the first `k` columns,
/// solved on centred data.
fn least_squares(x: &[[f64; 2]], y: &[f64], k: usize) -> Result<(f64, [f64; 2]), ObservableError> {
    let n = y.len() as f64;
    let mut mx = [0.0; 2];
    for row in x {
        for j in 0..k {
            mx[j] += row[j] / n;
        }
    }
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = [[0.0; 2]; 2];
    let mut sxy = [0.0; 2];
    for (row, yi) in x.iter().zip(y) {
        for i in 0..k {
            let di = row[i] - mx[i];
            sxy[i] += di * (yi - my);
            for j in 0..k {
                sxx[i][j] += di * (row[j] - mx[j]);
            }
        }
    }
    let b = if k == 1 {
        if sxx[0][0] <= 0.0 {
            return Err(ObservableError::Degenerate);
        }
        [sxy[0] / sxx[0][0], 0.0]
    } else {
        let det = sxx[0][0] * sxx[1][1] - sxx[0][1] * sxx[1][0];
        let scale = sxx[0][0] * sxx[1][1];
        if !(det > 1e-14 * scale) {
            return Err(ObservableError::Degenerate);
        }
        [
            (sxy[0] * sxx[1][1] - sxy[1] * sxx[0][1]) / det,
            (sxx[0][0] * sxy[1] - sxx[1][0] * sxy[0]) / det,
        ]
    };
    let b0 = my - b[0] * mx[0] - b[1] * mx[1];
    Ok((b0, b))
}

/// Slope of `y` against `x` with its standard error.
pub fn linear_trend(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n < 3 {
        return (0.0, f64::INFINITY);
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return (0.0, f64::INFINITY);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - my - slope * (a - mx);
            e * e
        })
        .sum();
    let se = (res / (nf - 2.0) / sxx).sqrt();
    (slope, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, t: impl Iterator<Item = f64>) -> TimeSeries {
        let times: Vec<f64> = t.collect();
        let values = times.iter().map(|t| f(*t)).collect();
        TimeSeries::new(times, values).unwrap()
    }

    #[test]
    fn recovers_exponential() {
        let s = series(|t| 3.0 * (-0.7 * t).exp(), (0..50).map(|i| i as f64 * 0.2));
        let f = fit_decay(&s, DecayModel::Exponential, (0.0, 10.0), 0.0).unwrap();
        assert!((f.rate - 0.7).abs() < 1e-9);
        assert!(f.r_squared > 0.999999);
        assert!((f.predict(1.0) - 3.0 * (-0.7f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn recovers_joint_model() {
        let s = series(
            |t| (-0.3 * t).exp() * (1.0 + t).powf(-1.5),
            (0..80).map(|i| i as f64 * 0.5),
        );
        let f = fit_decay(&s, DecayModel::ExpAlgebraic, (0.0, 40.0), 0.0).unwrap();
        assert!((f.rate - 0.3).abs() < 1e-8);
        assert!((f.exponent - 1.5).abs() < 1e-7);
    }

    #[test]
    fn too_few_samples() {
        let s = series(|t| (-t).exp(), (0..20).map(|i| i as f64));
        let err = fit_decay(&s, DecayModel::Exponential, (0.0, 19.0), (-6.5f64).exp()).unwrap_err();
        assert_eq!(
            err,
            ObservableError::InsufficientData {
                found: 7,
                needed: 8
            }
        );
        assert!(fit_decay(&s, DecayModel::Exponential, (3.0, 3.0), 0.0).is_err());
    }

    #[test]
    fn trend() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let (s, se) = linear_trend(&x, &y);
        assert!((s - 2.0).abs() < 1e-12 && se < 1e-12);
    }
}
