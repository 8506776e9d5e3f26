//! Gaussian state observation models and frame x state score matrices.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid_arg, Error, Result};
use crate::linalg::Cholesky;
use crate::math::{self, LN_2PI};

/// Added to every diagonal covariance entry after fitting.
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceMode {
    #[default]
    Full,
    Diagonal,
}

impl CovarianceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CovarianceMode::Full => "full",
            CovarianceMode::Diagonal => "diag",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(CovarianceMode::Full),
            "diag" | "diagonal" => Some(CovarianceMode::Diagonal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Precision {
    Full(Cholesky),
    Diagonal(Vec<f64>),
}

/// Single-component multivariate normal with a cached factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModel {
    mean: Vec<f64>,
    /// Row-major `dim x dim` in full mode, the diagonal otherwise.
    covariance: Vec<f64>,
    mode: CovarianceMode,
    precision: Precision,
    /// `-(dim ln 2pi + ln|Sigma|) / 2`
    log_norm: f64,
}

impl GaussianModel {
    pub fn new(mean: Vec<f64>, covariance: Vec<f64>, mode: CovarianceMode) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(invalid_arg("gaussian needs dimension >= 1"));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite mean".into()));
        }
        let expected = match mode {
            CovarianceMode::Full => dim * dim,
            CovarianceMode::Diagonal => dim,
        };
        if covariance.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: covariance.len(),
            });
        }
        if covariance.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite covariance".into()));
        }
        let (covariance, precision, log_det) = match mode {
            CovarianceMode::Full => {
                let mut cov = covariance;
                for i in 0..dim {
                    for j in i + 1..dim {
                        let avg = 0.5 * (cov[i * dim + j] + cov[j * dim + i]);
                        cov[i * dim + j] = avg;
                        cov[j * dim + i] = avg;
                    }
                }
                let chol = Cholesky::factor(&cov, dim)?;
                let log_det = chol.log_det();
                (cov, Precision::Full(chol), log_det)
            }
            CovarianceMode::Diagonal => {
                if covariance.iter().any(|&v| !(v > 0.0)) {
                    return Err(Error::NotPositiveDefinite);
                }
                let log_det = covariance.iter().map(|&v| math::ln(v)).sum();
                let inv = covariance.iter().map(|&v| 1.0 / v).collect();
                (covariance, Precision::Diagonal(inv), log_det)
            }
        };
        Ok(GaussianModel {
            log_norm: -0.5 * (dim as f64 * LN_2PI + log_det),
            mean,
            covariance,
            mode,
            precision,
        })
    }

    /// Isotropic Gaussian, mostly for tests and synthetic data.
    pub fn isotropic(mean: Vec<f64>, variance: f64, mode: CovarianceMode) -> Result<Self> {
        let dim = mean.len();
        let cov = match mode {
            CovarianceMode::Full => {
                let mut c = vec![0.0; dim * dim];
                for i in 0..dim {
                    c[i * dim + i] = variance;
                }
                c
            }
            CovarianceMode::Diagonal => vec![variance; dim],
        };
        Self::new(mean, cov, mode)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &[f64] {
        &self.covariance
    }

    pub fn mode(&self) -> CovarianceMode {
        self.mode
    }

    /// Variance of coordinate `i`.
    pub fn variance(&self, i: usize) -> f64 {
        match self.mode {
            CovarianceMode::Full => self.covariance[i * self.dim() + i],
            CovarianceMode::Diagonal => self.covariance[i],
        }
    }

    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let mut scratch = Vec::new();
        Ok(self.log_density_with(x, &mut scratch))
    }

    pub(crate) fn log_density_with(&self, x: &[f64], scratch: &mut Vec<f64>) -> f64 {
        let quad = match &self.precision {
            Precision::Full(chol) => chol.mahalanobis(x, &self.mean, scratch),
            Precision::Diagonal(inv) => x
                .iter()
                .zip(&self.mean)
                .zip(inv)
                .map(|((a, m), p)| {
                    let d = a - m;
                    d * d * p
                })
                .sum(),
        };
        self.log_norm - 0.5 * quad
    }
}

/// Weighted first and second moments, mergeable in a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    mode: CovarianceMode,
    dim: usize,
    weight: f64,
    sum: Vec<f64>,
    /// Upper triangle of `sum w x x^T` (full) or `sum w x_i^2` (diagonal).
    second: Vec<f64>,
}

impl SufficientStats {
    pub fn new(dim: usize, mode: CovarianceMode) -> Self {
        let second = match mode {
            CovarianceMode::Full => dim * dim,
            CovarianceMode::Diagonal => dim,
        };
        SufficientStats {
            mode,
            dim,
            weight: 0.0,
            sum: vec![0.0; dim],
            second: vec![0.0; second],
        }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn add(&mut self, x: &[f64], w: f64) {
        debug_assert_eq!(x.len(), self.dim);
        if w == 0.0 {
            return;
        }
        self.weight += w;
        for (s, v) in self.sum.iter_mut().zip(x) {
            *s += w * v;
        }
        match self.mode {
            CovarianceMode::Full => {
                let n = self.dim;
                for i in 0..n {
                    let wx = w * x[i];
                    for j in i..n {
                        self.second[i * n + j] += wx * x[j];
                    }
                }
            }
            CovarianceMode::Diagonal => {
                for (s, v) in self.second.iter_mut().zip(x) {
                    *s += w * v * v;
                }
            }
        }
    }

    pub fn merge(&mut self, other: &SufficientStats) {
        debug_assert_eq!(self.dim, other.dim);
        self.weight += other.weight;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.second.iter_mut().zip(&other.second) {
            *a += b;
        }
    }

    /// Closed-form weighted maximum-likelihood fit (divisor `W`), centred on
    /// the new mean, with `floor` added to each variance.
    pub fn fit(&self, floor: f64) -> Result<GaussianModel> {
        if !(self.weight > 0.0) || !self.weight.is_finite() {
            return Err(Error::DegenerateStatistics(format!(
                "total weight {} is not positive",
                self.weight
            )));
        }
        let n = self.dim;
        let w = self.weight;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / w).collect();
        let cov = match self.mode {
            CovarianceMode::Full => {
                let mut cov = vec![0.0; n * n];
                for i in 0..n {
                    for j in i..n {
                        let mut c = self.second[i * n + j] / w - mean[i] * mean[j];
                        if i == j {
                            c = c.max(0.0) + floor;
                        }
                        cov[i * n + j] = c;
                        cov[j * n + i] = c;
                    }
                }
                cov
            }
            CovarianceMode::Diagonal => self
                .second
                .iter()
                .zip(&mean)
                .map(|(s, m)| (s / w - m * m).max(0.0) + floor)
                .collect(),
        };
        GaussianModel::new(mean, cov, self.mode)
    }
}

/// Fits a Gaussian to weighted samples.
pub fn fit_weighted<'a, I>(
    samples: I,
    weights: &[f64],
    mode: CovarianceMode,
    floor: f64,
) -> Result<GaussianModel>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut stats: Option<SufficientStats> = None;
    let mut count = 0;
    for (x, &w) in samples.into_iter().zip(weights) {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(invalid_arg(format!("weight {w} is not a nonnegative real")));
        }
        let s = stats.get_or_insert_with(|| SufficientStats::new(x.len(), mode));
        if x.len() != s.dim {
            return Err(Error::DimensionMismatch {
                expected: s.dim,
                actual: x.len(),
            });
        }
        s.add(x, w);
        count += 1;
    }
    if count != weights.len() {
        return Err(invalid_arg("sample and weight counts differ"));
    }
    stats
        .ok_or_else(|| Error::DegenerateStatistics("no samples".into()))?
        .fit(floor)
}

/// `T x S` matrix of log observation scores; `-inf` marks impossible cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    frames: usize,
    states: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(frames: usize, states: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != frames * states {
            return Err(Error::DimensionMismatch {
                expected: frames * states,
                actual: data.len(),
            });
        }
        if data.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::InvalidData("score matrix has NaN or +inf".into()));
        }
        Ok(ScoreMatrix {
            frames,
            states,
            data,
        })
    }

    /// Scores every frame under every model.
    pub fn from_gaussians(frames: &[f64], dim: usize, models: &[GaussianModel]) -> Result<Self> {
        if let Some(m) = models.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: m.dim(),
                actual: dim,
            });
        }
        let t = frames.len() / dim;
        let mut data = Vec::with_capacity(t * models.len());
        let mut scratch = Vec::new();
        for x in frames.chunks_exact(dim) {
            for m in models {
                data.push(m.log_density_with(x, &mut scratch));
            }
        }
        Self::new(t, models.len(), data)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn states(&self) -> usize {
        self.states
    }

    #[inline]
    pub fn get(&self, t: usize, s: usize) -> f64 {
        self.data[t * self.states + s]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.states..(t + 1) * self.states]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Adds `shift[t]` to every entry of row `t`.
    pub fn shift_rows(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.frames {
            return Err(Error::DimensionMismatch {
                expected: self.frames,
                actual: shift.len(),
            });
        }
        let data = self
            .data
            .chunks_exact(self.states.max(1))
            .zip(shift)
            .flat_map(|(row, &c)| row.iter().map(move |v| v + c))
            .collect();
        Self::new(self.frames, self.states, data)
    }
}

/// Per-frame distributions over states, e.g. classifier softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    frames: usize,
    states: usize,
    data: Vec<f64>,
}

impl PosteriorMatrix {
    pub const ROW_TOLERANCE: f64 = 1e-6;

    pub fn new(frames: usize, states: usize, data: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(frames, states, data, Self::ROW_TOLERANCE)
    }

    /// Validates each row sums to 1 within `tolerance`.
    pub fn with_tolerance(
        frames: usize,
        states: usize,
        data: Vec<f64>,
        tolerance: f64,
    ) -> Result<Self> {
        if frames == 0 || states == 0 {
            return Err(invalid_arg("posterior matrix must be non-empty"));
        }
        if data.len() != frames * states {
            return Err(Error::DimensionMismatch {
                expected: frames * states,
                actual: data.len(),
            });
        }
        for (t, row) in data.chunks_exact(states).enumerate() {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidData(format!(
                    "posterior row {t} has entries outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tolerance {
                return Err(Error::InvalidData(format!(
                    "posterior row {t} sums to {sum}"
                )));
            }
        }
        Ok(PosteriorMatrix {
            frames,
            states,
            data,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.states..(t + 1) * self.states]
    }
}

/// State priors `p(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorTable {
    priors: Vec<f64>,
}

impl PriorTable {
    pub fn new(priors: Vec<f64>) -> Result<Self> {
        if priors.is_empty() {
            return Err(invalid_arg("prior table must be non-empty"));
        }
        if priors.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidData("negative or non-finite prior".into()));
        }
        let sum: f64 = priors.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidData(format!("priors sum to {sum}")));
        }
        Ok(PriorTable { priors })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.priors
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }
}

/// Turns posteriors into scaled log-likelihoods `log p(s|x) - log p(s)`.
///
/// The evidence term `p(x)` is a per-frame constant and is dropped.
pub fn posterior_to_loglikelihood(post: &PosteriorMatrix, priors: &PriorTable) -> Result<ScoreMatrix> {
    if post.states != priors.len() {
        return Err(Error::DimensionMismatch {
            expected: priors.len(),
            actual: post.states,
        });
    }
    let mut data = Vec::with_capacity(post.data.len());
    for row in post.data.chunks_exact(post.states) {
        for (s, (&p, &prior)) in row.iter().zip(&priors.priors).enumerate() {
            let v = if prior == 0.0 {
                if p > 0.0 {
                    return Err(Error::InconsistentPrior {
                        state: s,
                        posterior: p,
                    });
                }
                f64::NEG_INFINITY
            } else if p == 0.0 {
                f64::NEG_INFINITY
            } else {
                math::ln(p) - math::ln(prior)
            };
            data.push(v);
        }
    }
    ScoreMatrix::new(post.frames, post.states, data)
}

/// Relative frequency of each state over all aligned frames.
///
/// `paths` holds one sequence of model-state ids per video.
pub fn estimate_priors<'a, I>(paths: I, states: usize) -> Result<PriorTable>
where
    I: IntoIterator<Item = &'a [usize]>,
{
    let mut counts = vec![0u64; states];
    let mut total = 0u64;
    for path in paths {
        for &s in path {
            let c = counts
                .get_mut(s)
                .ok_or_else(|| invalid_arg(format!("state {s} out of range")))?;
            *c += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(invalid_arg("no aligned frames"));
    }
    PriorTable::new(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Entrywise log of the arithmetic mean of two probability-scale scores.
pub fn combine_scores(a: &ScoreMatrix, b: &ScoreMatrix) -> Result<ScoreMatrix> {
    if a.frames != b.frames || a.states != b.states {
        return Err(invalid_arg(format!(
            "score shapes differ: {}x{} vs {}x{}",
            a.frames, a.states, b.frames, b.states
        )));
    }
    let data = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| {
            if x == y {
                x
            } else {
                math::log_add(x, y) - core::f64::consts::LN_2
            }
        })
        .collect();
    ScoreMatrix::new(a.frames, a.states, data)
}
