//! Paris-law fitting: from per-cycle (stress, crack length) samples to the
//! growth-rate power law da/dN = C (ΔK)^m.
//!
//! The stress intensity factor uses the Griffith form K = σ √(π a) with no
//! finite-width correction. All quantities carry an explicit unit
//! convention; the macroscopic pipeline works in MPa·√mm and mm/cycle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Unit convention for stress intensity and growth rate.
///
/// The slope `m` is dimensionless and identical in every convention; the
/// intercept `C` transforms by a known factor (see
/// [`ParisConstants::convert_to`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    /// K in MPa·√m, da/dN in m/cycle.
    MpaSqrtM,
    /// K in MPa·√mm, da/dN in mm/cycle.
    MpaSqrtMm,
}

impl UnitSystem {
    pub fn tag(&self) -> &'static str {
        match self {
            UnitSystem::MpaSqrtM => "mpa_sqrt_m",
            UnitSystem::MpaSqrtMm => "mpa_sqrt_mm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mpa_sqrt_m" => Some(UnitSystem::MpaSqrtM),
            "mpa_sqrt_mm" => Some(UnitSystem::MpaSqrtMm),
            _ => None,
        }
    }
}

/// One per-cycle observation from the micro model (or an external data set).
///
/// Lengths and stresses are interpreted in the unit system declared by the
/// series owner; the fitting math never mixes conventions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CycleSample {
    /// Cycle count N. Strictly increasing across a series.
    pub cycle: f64,
    /// Crack length a.
    pub crack_length: f64,
    /// Peak tip-region stress over the cycle.
    pub sigma_max: f64,
    /// Minimum tip-region stress over the cycle.
    pub sigma_min: f64,
}

/// A single (ΔK, da/dN) point on the growth-rate curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub delta_k: f64,
    pub dadn: f64,
}

/// ΔK window for Region II selection. Bounds are inclusive.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DeltaKWindow {
    pub min: f64,
    pub max: f64,
}

impl DeltaKWindow {
    pub fn unbounded() -> Self {
        DeltaKWindow {
            min: 0.0,
            max: f64::INFINITY,
        }
    }

    pub fn contains(&self, dk: f64) -> bool {
        dk >= self.min && dk <= self.max
    }
}

/// Fit diagnostics attached to a set of Paris constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub r_squared: f64,
    pub point_count: usize,
    pub delta_k_min: f64,
    pub delta_k_max: f64,
}

/// Paris-law constants with their unit convention.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ParisConstants {
    /// Growth-rate intercept, units length/cycle ÷ (stress·√length)^m.
    pub c: f64,
    /// Log-log slope, dimensionless.
    pub m: f64,
    pub units: UnitSystem,
    pub diagnostics: Option<FitDiagnostics>,
}

impl ParisConstants {
    pub fn new(c: f64, m: f64, units: UnitSystem) -> Self {
        ParisConstants {
            c,
            m,
            units,
            diagnostics: None,
        }
    }

    /// Growth rate da/dN at the given ΔK (same convention as `self`).
    pub fn rate(&self, delta_k: f64) -> f64 {
        self.c * delta_k.powf(self.m)
    }

    /// Convert the constants to another unit convention.
    ///
    /// With lengths scaled by `s` (mm→m: s = 1e-3), K scales by √s and
    /// da/dN by s, so C' = C · s^(1 − m/2). `m` is invariant.
    pub fn convert_to(&self, target: UnitSystem) -> ParisConstants {
        if self.units == target {
            return *self;
        }
        let s: f64 = match (self.units, target) {
            (UnitSystem::MpaSqrtMm, UnitSystem::MpaSqrtM) => 1e-3,
            (UnitSystem::MpaSqrtM, UnitSystem::MpaSqrtMm) => 1e3,
            _ => unreachable!(),
        };
        ParisConstants {
            c: self.c * s.powf(1.0 - self.m / 2.0),
            m: self.m,
            units: target,
            diagnostics: self.diagnostics,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParisError {
    #[error("crack length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("sigma_min {min} exceeds sigma_max {max}")]
    InvertedStressRange { min: f64, max: f64 },
    #[error("need at least {need} samples with strictly increasing cycle counts, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("cycle counts must be strictly increasing (sample {0})")]
    NonMonotonicCycles(usize),
    #[error("fewer than 2 growth points survive windowing ({0} left)")]
    TooFewPoints(usize),
    #[error("growth points must have positive ΔK and da/dN")]
    NonPositivePoint,
    #[error("degenerate fit input: all points share a single ΔK value")]
    DegenerateFit,
}

/// Mode-I stress intensity factor K_I = σ √(π a).
pub fn stress_intensity(sigma: f64, a: f64) -> Result<f64, ParisError> {
    if a < 0.0 {
        return Err(ParisError::NonPositiveLength(a));
    }
    Ok(sigma * (PI * a).sqrt())
}

/// Stress intensity range ΔK = K(σ_max, a) − K(σ_min, a).
pub fn delta_k(sample: &CycleSample) -> Result<f64, ParisError> {
    if sample.sigma_min > sample.sigma_max {
        return Err(ParisError::InvertedStressRange {
            min: sample.sigma_min,
            max: sample.sigma_max,
        });
    }
    let kmax = stress_intensity(sample.sigma_max, sample.crack_length)?;
    let kmin = stress_intensity(sample.sigma_min, sample.crack_length)?;
    Ok(kmax - kmin)
}

/// Differentiate a sample series into (ΔK, da/dN) growth points.
///
/// Each consecutive pair yields one point centered on the interval: da/dN is
/// the secant slope, ΔK is evaluated at the midpoint crack length with the
/// stress range averaged over the two samples. Points with non-positive
/// growth or ΔK outside the window are discarded (Region I/III exclusion).
pub fn growth_points(
    samples: &[CycleSample],
    window: DeltaKWindow,
) -> Result<Vec<GrowthPoint>, ParisError> {
    if samples.len() < 3 {
        return Err(ParisError::TooFewSamples {
            need: 3,
            got: samples.len(),
        });
    }
    for (i, pair) in samples.windows(2).enumerate() {
        if pair[1].cycle <= pair[0].cycle {
            return Err(ParisError::NonMonotonicCycles(i + 1));
        }
    }
    let mut points = Vec::new();
    for pair in samples.windows(2) {
        let (s0, s1) = (&pair[0], &pair[1]);
        let dadn = (s1.crack_length - s0.crack_length) / (s1.cycle - s0.cycle);
        if dadn <= 0.0 {
            continue;
        }
        let a_mid = 0.5 * (s0.crack_length + s1.crack_length);
        let dsigma = 0.5 * ((s0.sigma_max - s0.sigma_min) + (s1.sigma_max - s1.sigma_min));
        let dk = stress_intensity(dsigma, a_mid)?;
        if dk > 0.0 && window.contains(dk) {
            points.push(GrowthPoint { delta_k: dk, dadn });
        }
    }
    if points.len() < 2 {
        return Err(ParisError::TooFewPoints(points.len()));
    }
    Ok(points)
}

/// A ΔK window that drops the lowest and highest `frac` quantiles of the
/// observed ΔK values. The default Region II selection (frac = 0.1).
pub fn quantile_window(samples: &[CycleSample], frac: f64) -> DeltaKWindow {
    let mut dks: Vec<f64> = samples
        .iter()
        .filter_map(|s| delta_k(s).ok())
        .filter(|dk| *dk > 0.0)
        .collect();
    if dks.is_empty() {
        return DeltaKWindow::unbounded();
    }
    dks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = ((dks.len() as f64 * frac).floor() as usize).min(dks.len() - 1);
    let hi = ((dks.len() as f64 * (1.0 - frac)).ceil() as usize)
        .clamp(lo + 1, dks.len())
        - 1;
    DeltaKWindow {
        min: dks[lo],
        max: dks[hi],
    }
}

/// Ordinary least squares on (log₁₀ ΔK, log₁₀ da/dN): m is the slope and
/// C = 10^intercept.
pub fn fit_paris(points: &[GrowthPoint], units: UnitSystem) -> Result<ParisConstants, ParisError> {
    if points.len() < 2 {
        return Err(ParisError::TooFewPoints(points.len()));
    }
    if points.iter().any(|p| p.delta_k <= 0.0 || p.dadn <= 0.0) {
        return Err(ParisError::NonPositivePoint);
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.delta_k.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.dadn.log10()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ParisError::DegenerateFit);
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    let (dk_min, dk_max) = points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
        (lo.min(p.delta_k), hi.max(p.delta_k))
    });
    Ok(ParisConstants {
        c: 10f64.powf(intercept),
        m: slope,
        units,
        diagnostics: Some(FitDiagnostics {
            r_squared,
            point_count: points.len(),
            delta_k_min: dk_min,
            delta_k_max: dk_max,
        }),
    })
}
