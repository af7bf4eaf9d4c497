//! Two-sample Kolmogorov-Smirnov test, Gaussian KDE and summary statistics.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty sample")]
    Empty,
    #[error("non-finite value {0} in sample")]
    NonFinite(f64),
    #[error("sample has zero spread; automatic bandwidth undefined")]
    Degenerate,
    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("kolmogorov_sf argument must be finite and non-negative, got {0}")]
    InvalidLambda(f64),
    #[error("grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d_statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
}

fn sorted_finite(xs: &[f64]) -> Result<Vec<f64>, StatsError> {
    if xs.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(&bad) = xs.iter().find(|x| !x.is_finite()) {
        return Err(StatsError::NonFinite(bad));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sided two-sample KS test with the asymptotic p-value.
///
/// The statistic is the exact supremum ECDF gap: at each distinct value of the
/// merged sample, all tied observations from both sides are consumed before
/// the gap is measured. The p-value is `Q(lambda)` with
/// `lambda = (sqrt(N) + 0.12 + 0.11 / sqrt(N)) * d` and `N = n m / (n + m)`.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<KsResult, StatsError> {
    let xs = sorted_finite(xs)?;
    let ys = sorted_finite(ys)?;
    let (n, m) = (xs.len(), ys.len());
    let (nf, mf) = (n as f64, m as f64);

    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n && j < m {
        let t = if xs[i] <= ys[j] { xs[i] } else { ys[j] };
        while i < n && xs[i] == t {
            i += 1;
        }
        while j < m && ys[j] == t {
            j += 1;
        }
        d = d.max((i as f64 / nf - j as f64 / mf).abs());
    }

    let en = libm::sqrt(nf * mf / (nf + mf));
    let lambda = (en + 0.12 + 0.11 / en) * d;
    let p_value = kolmogorov_sf(lambda)?;
    Ok(KsResult { d_statistic: d, p_value, n, m })
}

const SF_TOL: f64 = 1e-16;
const SF_MAX_TERMS: usize = 100;
/// Below this the alternating series converges too slowly; the theta-dual form is used.
const SF_SWITCH: f64 = 1.18;

/// Kolmogorov survival function `Q(l) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 l^2)`.
///
/// For `l < 1.18` the equivalent form
/// `1 - sqrt(2 pi)/l * sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 l^2))` is summed
/// instead; both converge within a handful of terms on their side of the switch.
pub fn kolmogorov_sf(lambda: f64) -> Result<f64, StatsError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(StatsError::InvalidLambda(lambda));
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let q = if lambda < SF_SWITCH {
        let c = PI * PI / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for k in 1..=SF_MAX_TERMS {
            let odd = (2 * k - 1) as f64;
            let term = libm::exp(-odd * odd * c);
            sum += term;
            if term < SF_TOL * sum.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        1.0 - libm::sqrt(2.0 * PI) / lambda * sum
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for j in 1..=SF_MAX_TERMS {
            let jf = j as f64;
            let term = libm::exp(-2.0 * jf * jf * lambda * lambda);
            sum += sign * term;
            if term < SF_TOL {
                break;
            }
            sign = -sign;
        }
        2.0 * sum
    };
    Ok(q.clamp(0.0, 1.0))
}

/// Bandwidth selection rule for [`kde`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    /// `1.06 * sigma * n^(-1/5)`
    Scott,
    /// `0.9 * min(sigma, IQR / 1.34) * n^(-1/5)`; falls back to sigma when IQR is zero.
    #[default]
    Silverman,
    Fixed(f64),
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bandwidth::Scott => f.write_str("scott"),
            Bandwidth::Silverman => f.write_str("silverman"),
            Bandwidth::Fixed(h) => write!(f, "fixed:{h}"),
        }
    }
}

impl FromStr for Bandwidth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scott" => Ok(Bandwidth::Scott),
            "silverman" => Ok(Bandwidth::Silverman),
            _ => {
                let h = s
                    .strip_prefix("fixed:")
                    .and_then(|h| h.parse::<f64>().ok())
                    .ok_or_else(|| format!("bandwidth must be scott, silverman or fixed:<h>, got {s:?}"))?;
                if h.is_finite() && h > 0.0 {
                    Ok(Bandwidth::Fixed(h))
                } else {
                    Err(format!("fixed bandwidth must be positive, got {h}"))
                }
            }
        }
    }
}

impl Serialize for Bandwidth {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Bandwidth {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

pub const DEFAULT_GRID_SIZE: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl KdeCurve {
    pub fn trapezoid_mass(&self) -> f64 {
        self.grid.windows(2).zip(self.density.windows(2)).map(|(g, d)| (g[1] - g[0]) * (d[0] + d[1]) / 2.0).sum()
    }
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    libm::sqrt(m2 / (xs.len() - 1) as f64)
}

/// Resolves the bandwidth `rule` for a sorted sample.
pub fn select_bandwidth(sorted: &[f64], rule: Bandwidth) -> Result<f64, StatsError> {
    let h = match rule {
        Bandwidth::Fixed(h) => {
            if !(h.is_finite() && h > 0.0) {
                return Err(StatsError::InvalidBandwidth(h));
            }
            return Ok(h);
        }
        Bandwidth::Scott | Bandwidth::Silverman => {
            let sigma = sample_std(sorted);
            if sorted.len() < 2 || sigma <= 0.0 {
                return Err(StatsError::Degenerate);
            }
            let shrink = libm::pow(sorted.len() as f64, -0.2);
            if rule == Bandwidth::Scott {
                1.06 * sigma * shrink
            } else {
                let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
                let spread = if iqr > 0.0 { sigma.min(iqr / 1.34) } else { sigma };
                0.9 * spread * shrink
            }
        }
    };
    Ok(h)
}

/// Gaussian KDE on `grid_size` uniform points spanning `[min - 4h, max + 4h]`.
pub fn kde(xs: &[f64], grid_size: usize, rule: Bandwidth) -> Result<KdeCurve, StatsError> {
    if grid_size < 2 {
        return Err(StatsError::GridTooSmall(grid_size));
    }
    let sorted = sorted_finite(xs)?;
    let h = select_bandwidth(&sorted, rule)?;
    let lo = sorted[0] - 4.0 * h;
    let hi = sorted[sorted.len() - 1] + 4.0 * h;
    let step = (hi - lo) / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|i| if i + 1 == grid_size { hi } else { lo + i as f64 * step }).collect();

    let norm = 1.0 / (sorted.len() as f64 * h * libm::sqrt(2.0 * PI));
    let density = grid
        .iter()
        .map(|&g| {
            let s: f64 = sorted
                .iter()
                .map(|&x| {
                    let u = (g - x) / h;
                    libm::exp(-0.5 * u * u)
                })
                .sum();
            s * norm
        })
        .collect();
    Ok(KdeCurve { grid, density, bandwidth: h })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistSummary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Quantile by linear interpolation between closest ranks; `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

pub fn summarize(xs: &[f64]) -> Result<DistSummary, StatsError> {
    let sorted = sorted_finite(xs)?;
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    Ok(DistSummary {
        count: n,
        mean,
        std_dev: sample_std(xs),
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[n - 1],
    })
}
