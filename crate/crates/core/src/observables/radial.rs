//! Radial profiles: binned speed distributions, `h_lin` and late-time plateaus.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::fit::linear_trend;
use super::{ObservableError, RadialWindow};
use crate::kinetics::{Ensemble, InitialData, SpeedProfile};
use crate::quadrature::GaussLegendre;

/// Speed histogram. `masses[b]` is the Liouville mass in bin `b`,
/// `values[b]` the density `h` averaged over the bin against `r dr`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialProfile {
    pub edges: Vec<f64>,
    pub values: Vec<f64>,
    pub masses: Vec<f64>,
    pub counts: Vec<usize>,
}

/// `n` equal bins on `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

fn check_edges(edges: &[f64]) -> Result<(), ObservableError> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) || !(edges[0] >= 0.0) {
        return Err(ObservableError::Edges);
    }
    Ok(())
}

fn ring_measure(a: f64, b: f64) -> f64 {
    0.5 * (b * b - a * a)
}

impl RadialProfile {
    fn from_masses(edges: Vec<f64>, masses: Vec<f64>, counts: Vec<usize>) -> Self {
        let values = edges
            .windows(2)
            .zip(&masses)
            .map(|(e, m)| m / ring_measure(e[0], e[1]))
            .collect();
        Self {
            edges,
            values,
            masses,
            counts,
        }
    }

    /// Hard-binned speeds of an ensemble; every speed must fall inside the edges.
    pub fn from_ensemble(e: &Ensemble, edges: &[f64]) -> Result<Self, ObservableError> {
        check_edges(edges)?;
        let nb = edges.len() - 1;
        let mut masses = alloc::vec![0.0; nb];
        let mut counts = alloc::vec![0usize; nb];
        for p in e.particles() {
            let r = p.r();
            if !(r >= edges[0] && r <= edges[nb]) {
                return Err(ObservableError::Uncovered { r });
            }
            let b = edges.partition_point(|x| *x <= r).clamp(1, nb) - 1;
            masses[b] += p.w();
            counts[b] += 1;
        }
        Ok(Self::from_masses(edges.to_vec(), masses, counts))
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// `h_lin(r) = ∫_{M₁} u0(r, ·) dL₁` integrated over each bin.
pub fn h_lin_profile(init: &InitialData, edges: &[f64]) -> Result<RadialProfile, ObservableError> {
    check_edges(edges)?;
    let spec = init.spec();
    let factor = init.mean_angular() * init.mass_scale();
    let nb = edges.len() - 1;
    let mut masses = alloc::vec![0.0; nb];
    match spec.speed {
        SpeedProfile::Fixed { r } => {
            if !(r >= edges[0] && r <= edges[nb]) {
                return Err(ObservableError::Uncovered { r });
            }
            let b = edges.partition_point(|x| *x <= r).clamp(1, nb) - 1;
            masses[b] = spec.level * factor;
        }
        SpeedProfile::Flat | SpeedProfile::Smooth => {
            let gl = GaussLegendre::new(24);
            let (lo, hi) = spec.r_band;
            for (b, m) in masses.iter_mut().enumerate() {
                let a = edges[b].max(lo);
                let c = edges[b + 1].min(hi);
                if c > a {
                    *m = factor * gl.integrate_composite(a, c, 4, |r| r * spec.radial_density(r));
                }
            }
        }
    }
    Ok(RadialProfile::from_masses(
        edges.to_vec(),
        masses,
        alloc::vec![0; nb],
    ))
}

/// Smooth partition of unity in `r`: bin `b` covers `[edges[b], edges[b+1]]`
/// with ramps of width `ramp` at interior edges; the outermost bins extend to
/// zero and to infinity so the windows sum to one everywhere.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialBins {
    pub edges: Vec<f64>,
    pub ramp: f64,
}

impl RadialBins {
    pub fn new(edges: Vec<f64>, ramp: f64) -> Result<Self, ObservableError> {
        check_edges(&edges)?;
        let min_width = edges
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if !(ramp >= 0.0 && ramp <= min_width) {
            return Err(ObservableError::Ramp { ramp });
        }
        Ok(Self { edges, ramp })
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn window(&self, b: usize) -> RadialWindow {
        let n = self.len();
        RadialWindow {
            lo: if b == 0 {
                f64::NEG_INFINITY
            } else {
                self.edges[b]
            },
            hi: if b + 1 == n {
                f64::INFINITY
            } else {
                self.edges[b + 1]
            },
            ramp: self.ramp,
        }
    }

    /// `⟨u, χ_b⟩` for every bin.
    pub fn pairings(&self, e: &Ensemble) -> Vec<f64> {
        let windows: Vec<RadialWindow> = (0..self.len()).map(|b| self.window(b)).collect();
        let mut out = alloc::vec![0.0; self.len()];
        for p in e.particles() {
            for (o, w) in out.iter_mut().zip(&windows) {
                let v = w.value(p.r());
                if v != 0.0 {
                    *o += p.w() * v;
                }
            }
        }
        out
    }
}

/// Recorded radial pairings of a run; `masses[k][b]` is bin `b` at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialHistory {
    pub bins: RadialBins,
    pub times: Vec<f64>,
    pub masses: Vec<Vec<f64>>,
}

/// Per-bin late-time statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlateauEstimate {
    /// Plateau masses as a profile over the bin edges.
    pub profile: RadialProfile,
    /// `plateau - initial` per bin.
    pub corrections: Vec<f64>,
    /// Linear-trend change across the last quartile.
    pub drift: Vec<f64>,
    pub drift_stderr: Vec<f64>,
}

/// Relative size, against the total mass, below which drift counts as rounding.
pub const DRIFT_ROUNDING: f64 = 1e-12;

/// The last quartile of a record of times, over which plateaus are judged.
pub fn last_quartile(times: &[f64]) -> &[f64] {
    &times[times.len() - times.len() / 4..]
}

/// Per-particle contributions to the trend of each bin over fixed times.
///
/// A bin mass is a sum over particles, so its least-squares slope is the sum
/// of per-particle slopes. Their spread gives the standard error of the drift
/// under resampling of the ensemble, which stays valid when the recorded
/// masses are serially correlated in time.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftAccumulator {
    windows: Vec<RadialWindow>,
    times: Vec<f64>,
    weights: Vec<f64>,
    next: usize,
    slopes: Vec<f64>,
}

impl DriftAccumulator {
    /// Accumulates over `times` (at least three, increasing) for an ensemble
    /// of `particles`.
    pub fn new(
        bins: &RadialBins,
        times: &[f64],
        particles: usize,
    ) -> Result<Self, ObservableError> {
        if times.len() < 3 {
            return Err(ObservableError::InsufficientData {
                found: times.len(),
                needed: 3,
            });
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ObservableError::Series);
        }
        let m = times.iter().sum::<f64>() / times.len() as f64;
        let sxx: f64 = times.iter().map(|t| (t - m) * (t - m)).sum();
        let span = times[times.len() - 1] - times[0];
        Ok(Self {
            windows: (0..bins.len()).map(|b| bins.window(b)).collect(),
            times: times.to_vec(),
            weights: times.iter().map(|t| (t - m) / sxx * span).collect(),
            next: 0,
            slopes: alloc::vec![0.0; particles * bins.len()],
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Records the ensemble when `t` is the next accumulation time; returns
    /// whether it was used.
    pub fn record(&mut self, t: f64, e: &Ensemble) -> Result<bool, ObservableError> {
        let nb = self.windows.len();
        if self.next >= self.times.len() || t != self.times[self.next] {
            return Ok(false);
        }
        if e.len() * nb != self.slopes.len() {
            return Err(ObservableError::Series);
        }
        let k = self.weights[self.next];
        for (p, row) in e.particles().iter().zip(self.slopes.chunks_exact_mut(nb)) {
            for (s, w) in row.iter_mut().zip(&self.windows) {
                let v = w.value(p.r());
                if v != 0.0 {
                    *s += k * p.w() * v;
                }
            }
        }
        self.next += 1;
        Ok(true)
    }

    pub fn is_complete(&self) -> bool {
        self.next == self.times.len()
    }

    /// Drift of each bin across the accumulation times.
    pub fn drift(&self) -> Vec<f64> {
        let nb = self.windows.len();
        let mut out = alloc::vec![0.0; nb];
        for row in self.slopes.chunks_exact(nb) {
            for (o, s) in out.iter_mut().zip(row) {
                *o += s;
            }
        }
        out
    }

    /// `sqrt(Σ (s_i - s̄)²)` per bin, the resampling standard error of the drift.
    pub fn stderr(&self) -> Vec<f64> {
        let nb = self.windows.len();
        let n = (self.slopes.len() / nb.max(1)).max(1) as f64;
        let mean: Vec<f64> = self.drift().iter().map(|d| d / n).collect();
        let mut ss = alloc::vec![0.0; nb];
        for row in self.slopes.chunks_exact(nb) {
            for ((o, s), m) in ss.iter_mut().zip(row).zip(&mean) {
                *o += (s - m) * (s - m);
            }
        }
        ss.into_iter().map(|v| v.sqrt()).collect()
    }
}

/// Averages each bin over the last quartile of the recorded times.
///
/// Fails when the drift of a bin over that quartile, estimated by a linear
/// trend, exceeds three standard errors. The standard error comes from
/// `resampled` when given, which must have accumulated over exactly the last
/// quartile; otherwise from the trend residuals.
pub fn h_infinity_estimate(
    history: &RadialHistory,
    resampled: Option<&DriftAccumulator>,
) -> Result<PlateauEstimate, ObservableError> {
    let nt = history.times.len();
    if nt < 8 || history.masses.len() != nt {
        return Err(ObservableError::InsufficientData {
            found: nt,
            needed: 8,
        });
    }
    let nb = history.bins.len();
    let start = nt - nt / 4;
    let ts = &history.times[start..];
    let span = ts[ts.len() - 1] - ts[0];
    let external = match resampled {
        Some(acc) if acc.times() != ts || !acc.is_complete() || acc.windows.len() != nb => {
            return Err(ObservableError::Series)
        }
        Some(acc) => Some(acc.stderr()),
        None => None,
    };
    let total: f64 = history.masses[0].iter().sum();
    let mut plateau = alloc::vec![0.0; nb];
    let mut drift = alloc::vec![0.0; nb];
    let mut drift_stderr = alloc::vec![0.0; nb];
    for b in 0..nb {
        let ys: Vec<f64> = history.masses[start..].iter().map(|m| m[b]).collect();
        plateau[b] = ys.iter().sum::<f64>() / ys.len() as f64;
        let (slope, se) = linear_trend(ts, &ys);
        drift[b] = slope * span;
        drift_stderr[b] = match &external {
            Some(se) => se[b],
            None => se * span,
        };
        let tol = 3.0 * drift_stderr[b] + DRIFT_ROUNDING * total.abs();
        if drift[b].abs() > tol {
            return Err(ObservableError::NoPlateau {
                bin: b,
                drift: drift[b],
                stderr: drift_stderr[b],
            });
        }
    }
    let corrections = plateau
        .iter()
        .zip(&history.masses[0])
        .map(|(p, m)| p - m)
        .collect();
    let edges = history.bins.edges.clone();
    let profile = RadialProfile::from_masses(edges, plateau, alloc::vec![0; nb]);
    Ok(PlateauEstimate {
        profile,
        corrections,
        drift,
        drift_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MoebiusElement;
    use crate::kinetics::Particle;

    fn ensemble(speeds: &[f64]) -> Ensemble {
        let ps = speeds
            .iter()
            .map(|r| Particle::new(MoebiusElement::IDENTITY, *r, 0.25).unwrap())
            .collect();
        Ensemble::new(ps, 0)
    }

    #[test]
    fn accumulated_drift_matches_trend() {
        let bins = RadialBins::new(alloc::vec![0.5, 1.0, 1.5, 2.0], 0.1).unwrap();
        let times = [0.0, 1.0, 2.0, 3.0, 4.0];
        let mut acc = DriftAccumulator::new(&bins, &times, 4).unwrap();
        let mut masses = Vec::new();
        for (k, t) in times.iter().enumerate() {
            let e = ensemble(&[0.7, 1.2 + 0.05 * k as f64, 1.7, 0.9 + 0.01 * (k % 2) as f64]);
            assert!(acc.record(*t, &e).unwrap());
            masses.push(bins.pairings(&e));
        }
        assert!(!acc.record(5.0, &ensemble(&[1.0; 4])).unwrap());
        let drift = acc.drift();
        for b in 0..bins.len() {
            let ys: Vec<f64> = masses.iter().map(|m| m[b]).collect();
            let (slope, _) = linear_trend(&times, &ys);
            assert!((drift[b] - 4.0 * slope).abs() < 1e-14, "bin {b}");
        }
        assert!(drift.iter().sum::<f64>().abs() < 1e-14);
        // nothing recorded, nothing spread
        let still = DriftAccumulator::new(&bins, &times, 4).unwrap();
        assert_eq!(still.stderr(), alloc::vec![0.0; 3]);
    }

    #[test]
    fn frozen_history_has_a_plateau() {
        let bins = RadialBins::new(alloc::vec![0.5, 1.0, 2.0], 0.0).unwrap();
        let e = ensemble(&[0.7, 1.2, 1.7, 0.9]);
        let times: Vec<f64> = (0..12).map(|k| k as f64).collect();
        let mut acc = DriftAccumulator::new(&bins, last_quartile(&times), 4).unwrap();
        let mut h = RadialHistory {
            bins: bins.clone(),
            times: times.clone(),
            masses: Vec::new(),
        };
        for t in &times {
            acc.record(*t, &e).unwrap();
            h.masses.push(bins.pairings(&e));
        }
        let est = h_infinity_estimate(&h, Some(&acc)).unwrap();
        assert_eq!(est.corrections, alloc::vec![0.0; 2]);
        assert_eq!(est.profile.masses, alloc::vec![0.5, 0.5]);
        let short = DriftAccumulator::new(&bins, &times[..3], 4).unwrap();
        assert_eq!(
            h_infinity_estimate(&h, Some(&short)),
            Err(ObservableError::Series)
        );
    }
}
