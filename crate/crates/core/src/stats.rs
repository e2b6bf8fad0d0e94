//! Statistics for extinction-time samples: censored observations, the
//! `1 - 1/e` quantile, Kolmogorov–Smirnov tests, Wilson intervals, and the
//! least-squares growth fit.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
/// One-sided 95% standard normal quantile.
pub const Z95_ONE_SIDED: f64 = 1.644_853_626_951_472_2;

/// A time observation, right-censored at `value` when `censored` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSample {
    pub value: f64,
    pub censored: bool,
}

impl TimeSample {
    pub fn observed(value: f64) -> Self {
        Self {
            value,
            censored: false,
        }
    }

    pub fn censored(at: f64) -> Self {
        Self {
            value: at,
            censored: true,
        }
    }
}

pub fn uncensored_values(samples: &[TimeSample]) -> Vec<f64> {
    samples.iter().filter(|s| !s.censored).map(|s| s.value).collect()
}

pub fn censored_fraction(samples: &[TimeSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|s| s.censored).count() as f64 / samples.len() as f64
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Interpolated empirical quantile at level `p` of a sample in which censored
/// observations rank above every observed value.
///
/// Uses the `h = (n - 1) p` rule with linear interpolation between the order
/// statistics `x_(floor h)` and `x_(ceil h)` (0-based). Fails when `x_(ceil h)`
/// would be a censored observation.
pub fn censored_quantile(samples: &[TimeSample], p: f64) -> Result<f64> {
    let n = samples.len();
    let values = sorted(uncensored_values(samples));
    let k = values.len();
    if n == 0 {
        return Err(Error::QuantileUndefined { uncensored: 0, total: 0 });
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if hi >= k {
        return Err(Error::QuantileUndefined {
            uncensored: k,
            total: n,
        });
    }
    Ok(values[lo] + (h - lo as f64) * (values[hi] - values[lo]))
}

/// `β_N`: the empirical `1 - e^{-1}` quantile, so that a fraction `e^{-1}` of
/// the samples lies at or above it.
pub fn estimate_beta(samples: &[TimeSample]) -> Result<f64> {
    censored_quantile(samples, 1.0 - (-1.0f64).exp())
}

/// Kolmogorov distribution tail `Q(x) = P(K > x) = 2 Σ_{j>=1} (-1)^{j-1} e^{-2 j² x²}`.
///
/// For `x < 1.18` the alternating series converges slowly, so the equivalent
/// theta-function form `P(K <= x) = sqrt(2π)/x Σ_{j>=1} e^{-(2j-1)² π² / (8 x²)}`
/// is used instead. At least ten terms are always summed.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let q = if x < 1.18 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut cdf = 0.0;
        for j in 1..=30 {
            let k = (2 * j - 1) as f64;
            let term = (-k * k * pi2 / (8.0 * x * x)).exp();
            cdf += term;
            if j >= 10 && term < 1e-300 {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * cdf
    } else {
        let mut sum = 0.0;
        for j in 1..=100 {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * x * x).exp();
            sum += if j % 2 == 1 { term } else { -term };
            if j >= 10 && term < 1e-300 {
                break;
            }
        }
        2.0 * sum
    };
    q.clamp(0.0, 1.0)
}

/// Scaling of the KS statistic before the asymptotic tail: `sqrt(n) D` for
/// `n >= 1000`, and Stephens' correction `(sqrt(n) + 0.12 + 0.11/sqrt(n)) D`
/// for smaller (effective) sample sizes.
fn ks_argument(n_eff: f64, d: f64) -> f64 {
    let s = n_eff.sqrt();
    if n_eff < 1000.0 {
        (s + 0.12 + 0.11 / s) * d
    } else {
        s * d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Minimum number of uncensored samples for [`ks_exponential`].
pub const KS_MIN_SAMPLES: usize = 100;

/// One-sample KS test of `τ / β` against the rate-1 exponential law.
///
/// Censored samples are excluded. The p-value is the asymptotic Kolmogorov tail.
pub fn ks_exponential(samples: &[TimeSample], beta: f64) -> Result<KsResult> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let x = sorted(uncensored_values(samples).into_iter().map(|v| v / beta).collect());
    let n = x.len();
    if n < KS_MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: KS_MIN_SAMPLES,
            have: n,
        });
    }
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let f = 1.0 - (-v.max(0.0)).exp();
        d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q(ks_argument(nf, d)),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleKs {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Two-sample KS test on plain values.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TwoSampleKs> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: 1,
            have: a.len().min(b.len()),
        });
    }
    let a = sorted(a.to_vec());
    let b = sorted(b.to_vec());
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    let n_eff = n1 * n2 / (n1 + n2);
    Ok(TwoSampleKs {
        statistic: d,
        p_value: kolmogorov_q(ks_argument(n_eff, d)),
        n1: a.len(),
        n2: b.len(),
    })
}

/// A frequency with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Frequency {
    /// Wilson 95% interval.
    pub fn wilson(hits: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self {
                hits,
                trials,
                estimate: 0.0,
                lo: 0.0,
                hi: 1.0,
            };
        }
        let n = trials as f64;
        let p = hits as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            hits,
            trials,
            estimate: p,
            lo: if hits == 0 { 0.0 } else { (centre - half).max(0.0) },
            hi: if hits >= trials { 1.0 } else { (centre + half).min(1.0) },
        }
    }
}

/// Normal-approximation estimate of a proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub estimate: f64,
    pub ci_half_width: f64,
    pub trials: u64,
}

impl ProportionEstimate {
    pub fn normal(hits: u64, trials: u64) -> Self {
        let n = trials.max(1) as f64;
        let p = hits as f64 / n;
        Self {
            estimate: p,
            ci_half_width: Z95 * (p * (1.0 - p) / n).sqrt(),
            trials,
        }
    }

    pub fn lower(&self) -> f64 {
        self.estimate - self.ci_half_width
    }
}

/// Adjacent-pair check that a sequence of frequencies does not increase
/// beyond its Wilson intervals: fails at the first `i` where the lower bound
/// of entry `i + 1` exceeds the upper bound of entry `i`.
pub fn nonincreasing_within_wilson(freqs: &[Frequency]) -> bool {
    freqs.windows(2).all(|w| w[1].lo <= w[0].hi)
}

/// Sample median with a distribution-free 95% interval from order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianEstimate {
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
    /// `(hi - lo) / (2 z)`, a normal-equivalent standard error.
    pub stderr: f64,
}

/// Median of `values` where `None` entries are right-censored (rank above every value).
/// Returns `None` when the median or its interval reaches a censored observation.
pub fn censored_median(values: &[Option<f64>]) -> Option<MedianEstimate> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let obs = sorted(values.iter().flatten().copied().collect());
    let nf = n as f64;
    let half = Z95 * nf.sqrt() / 2.0;
    let j = ((nf / 2.0 - half).floor() as isize).max(1) as usize; // 1-based
    let k = ((nf / 2.0 + half).ceil() as usize).min(n);
    let mid_hi = n / 2; // 0-based upper middle
    let need = k.max(mid_hi + 1);
    if need > obs.len() {
        return None;
    }
    let median = if n % 2 == 1 {
        obs[n / 2]
    } else {
        0.5 * (obs[n / 2 - 1] + obs[n / 2])
    };
    let lo = obs[j - 1];
    let hi = obs[k - 1];
    Some(MedianEstimate {
        median,
        lo,
        hi,
        stderr: (hi - lo) / (2.0 * Z95),
    })
}

/// Ordinary least squares fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    pub points: usize,
    /// Half-width of the two-sided 95% t interval for the slope.
    pub slope_ci_half_width: f64,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Domain("x and y lengths differ".into()));
    }
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, have: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Domain("x values are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let s2 = ssr / (nf - 2.0);
    let slope_stderr = (s2 / sxx).sqrt();
    let intercept_stderr = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0)
        .expect("n >= 3 gives positive degrees of freedom")
        .inverse_cdf(0.975);
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        intercept_stderr,
        points: n,
        slope_ci_half_width: t * slope_stderr,
    })
}
