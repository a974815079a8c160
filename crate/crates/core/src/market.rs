//! Price ingestion, arithmetic returns, moment estimation and portfolio-level
//! aggregation of the asset moments.

use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cholesky, dot, SymMatrix};

/// Validated price table: `prices[t][i]` is the price of asset `i` on `dates[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceHistory {
    labels: Vec<String>,
    dates: Vec<NaiveDate>,
    prices: Vec<Vec<f64>>,
}

impl PriceHistory {
    pub fn new(labels: Vec<String>, dates: Vec<NaiveDate>, prices: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Validation("no assets".into()));
        }
        if dates.len() != prices.len() {
            return Err(Error::Validation(format!(
                "{} dates but {} price rows",
                dates.len(),
                prices.len()
            )));
        }
        if prices.len() < 3 {
            return Err(Error::Validation(format!(
                "need at least 3 price dates, got {}",
                prices.len()
            )));
        }
        for (t, row) in prices.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "row {t} has {} prices, expected {n}",
                    row.len()
                )));
            }
            for (i, &p) in row.iter().enumerate() {
                if !(p > 0.0) || !p.is_finite() {
                    return Err(Error::Validation(format!(
                        "non-positive price {p} at row {t}, column {} ({})",
                        i, labels[i]
                    )));
                }
            }
        }
        if let Some(t) = dates.windows(2).position(|d| d[1] <= d[0]) {
            return Err(Error::Validation(format!(
                "dates not strictly increasing at row {}: {} then {}",
                t + 1,
                dates[t],
                dates[t + 1]
            )));
        }
        Ok(Self { labels, dates, prices })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    pub fn n_assets(&self) -> usize {
        self.labels.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }
}

/// Reads a price CSV: header `date,<label1>,...`, rows `YYYY-MM-DD,<price>,...`.
///
/// Row numbers in errors are 1-based file lines (the header is line 1).
pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceHistory> {
    let text = std::fs::read_to_string(path)?;
    parse_prices(&text)
}

pub fn parse_prices(text: &str) -> Result<PriceHistory> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
        .clone();
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("date") {
        return Err(Error::Parse {
            line: 1,
            msg: "header must be `date,<label1>,...`".into(),
        });
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if let Some(bad) = labels.iter().position(String::is_empty) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("empty label in column {}", bad + 1),
        });
    }

    let mut dates = Vec::new();
    let mut prices = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        if record.len() != labels.len() + 1 {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", labels.len() + 1, record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            msg: format!("bad date `{}`: {e}", &record[0]),
        })?;
        let row = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(i, cell)| {
                if cell.is_empty() {
                    return Err(Error::Parse {
                        line,
                        msg: format!("missing price for `{}`", labels[i]),
                    });
                }
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("cannot parse `{cell}` as a price for `{}`", labels[i]),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        dates.push(date);
        prices.push(row);
    }
    PriceHistory::new(labels, dates, prices)
}

/// Per-period fractional returns, `(T-1) × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsMatrix {
    labels: Vec<String>,
    returns: Vec<Vec<f64>>,
}

impl ReturnsMatrix {
    pub fn new(labels: Vec<String>, returns: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        for (t, row) in returns.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!("return row {t} has wrong length")));
            }
            if let Some(i) = row.iter().position(|&r| !(r > -1.0) || !r.is_finite()) {
                return Err(Error::Validation(format!(
                    "return {} at row {t}, column {i} is not above -1",
                    row[i]
                )));
            }
        }
        Ok(Self { labels, returns })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn n_periods(&self) -> usize {
        self.returns.len()
    }
}

/// `(S(t+1) - S(t)) / S(t)` for every consecutive pair of dates.
pub fn arithmetic_returns(p: &PriceHistory) -> ReturnsMatrix {
    let returns = p
        .prices
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(s0, s1)| (s1 - s0) / s0).collect())
        .collect();
    ReturnsMatrix {
        labels: p.labels.clone(),
        returns,
    }
}

/// Mean vector and covariance of asset returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub labels: Vec<String>,
    pub mu: Vec<f64>,
    pub sigma: SymMatrix,
}

impl MomentEstimate {
    /// Validates dimensions and that `sigma` factors.
    pub fn new(labels: Vec<String>, mu: Vec<f64>, sigma: SymMatrix) -> Result<Self> {
        if mu.len() != sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: sigma.dim(),
                got: mu.len(),
            });
        }
        if labels.len() != mu.len() {
            return Err(Error::DimensionMismatch {
                expected: mu.len(),
                got: labels.len(),
            });
        }
        cholesky(&sigma)?;
        Ok(Self { labels, mu, sigma })
    }

    /// Labels `A1..An`.
    pub fn unlabeled(mu: Vec<f64>, sigma: SymMatrix) -> Result<Self> {
        Self::new(default_labels(mu.len()), mu, sigma)
    }

    pub fn n_assets(&self) -> usize {
        self.mu.len()
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("A{i}")).collect()
}

/// Column means and unbiased sample covariance (divisor `T-2` for `T` prices).
pub fn estimate_moments(r: &ReturnsMatrix) -> Result<MomentEstimate> {
    let m = r.n_periods();
    let n = r.labels.len();
    if m < 2 {
        return Err(Error::Validation(format!(
            "need at least 2 return observations, got {m}"
        )));
    }
    let mut mu = vec![0.0; n];
    for row in &r.returns {
        for (acc, x) in mu.iter_mut().zip(row) {
            *acc += x;
        }
    }
    mu.iter_mut().for_each(|x| *x /= m as f64);

    let mut cov = vec![0.0; n * n];
    for row in &r.returns {
        let dev: Vec<f64> = row.iter().zip(&mu).map(|(x, m)| x - m).collect();
        for i in 0..n {
            for j in 0..=i {
                cov[i * n + j] += dev[i] * dev[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = cov[i * n + j] / (m - 1) as f64;
            cov[i * n + j] = v;
            cov[j * n + i] = v;
        }
    }
    let sigma = SymMatrix::from_symmetric_unchecked(n, cov);
    match cholesky(&sigma) {
        Ok(_) => Ok(MomentEstimate {
            labels: r.labels.clone(),
            mu,
            sigma,
        }),
        Err(Error::NotPositiveDefinite { pivot }) => Err(Error::SingularCovariance(format!(
            "covariance is rank deficient at asset {} ({})",
            pivot, r.labels[pivot]
        ))),
        Err(e) => Err(e),
    }
}

/// Excess returns `e = mu - L` over a benchmark `L`, with the covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcessModel {
    pub labels: Vec<String>,
    pub e: Vec<f64>,
    pub sigma: SymMatrix,
    pub benchmark: f64,
}

impl ExcessModel {
    /// Builds a model directly from excess returns (benchmark recorded as 0).
    pub fn from_excess(e: Vec<f64>, sigma: SymMatrix) -> Result<Self> {
        let m = MomentEstimate::unlabeled(e, sigma)?;
        Ok(excess_model(&m, 0.0))
    }

    pub fn n_assets(&self) -> usize {
        self.e.len()
    }

    /// Whether any asset beats the benchmark.
    pub fn has_positive_excess(&self) -> bool {
        self.e.iter().any(|&x| x > 0.0)
    }
}

pub fn excess_model(m: &MomentEstimate, benchmark: f64) -> ExcessModel {
    ExcessModel {
        labels: m.labels.clone(),
        e: m.mu.iter().map(|mu| mu - benchmark).collect(),
        sigma: m.sigma.clone(),
        benchmark,
    }
}

/// Portfolio weights; `normalized` means they sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioWeights {
    pub labels: Vec<String>,
    pub w: Vec<f64>,
    pub normalized: bool,
}

impl PortfolioWeights {
    /// Scales `w` to unit sum. Fails if the sum is zero to 1e-12.
    pub fn normalize(labels: Vec<String>, w: &[f64]) -> Result<Self> {
        let sum: f64 = w.iter().sum();
        let scale = w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if !(sum.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::DegenerateNormalization { sum });
        }
        Ok(Self {
            labels,
            w: w.iter().map(|x| x / sum).collect(),
            normalized: true,
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Wealth fractions `Δᵢ Sᵢ(0) / Σⱼ Δⱼ Sⱼ(0)` of a holdings vector.
pub fn holdings_to_weights(deltas: &[f64], prices0: &[f64]) -> Result<PortfolioWeights> {
    if deltas.len() != prices0.len() {
        return Err(Error::DimensionMismatch {
            expected: prices0.len(),
            got: deltas.len(),
        });
    }
    let wealth: Vec<f64> = deltas.iter().zip(prices0).map(|(d, s)| d * s).collect();
    let total: f64 = wealth.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroWealth);
    }
    Ok(PortfolioWeights {
        labels: default_labels(deltas.len()),
        w: wealth.iter().map(|x| x / total).collect(),
        normalized: true,
    })
}

/// Mean `w·μ` and standard deviation `sqrt(wᵀΣw)` of the portfolio return.
pub fn portfolio_moments(w: &[f64], m: &MomentEstimate) -> Result<(f64, f64)> {
    if w.len() != m.n_assets() {
        return Err(Error::DimensionMismatch {
            expected: m.n_assets(),
            got: w.len(),
        });
    }
    let var = m.sigma.quad_form(w);
    let max_var = m.sigma.diag().into_iter().fold(0.0, f64::max);
    let scale = w.iter().map(|x| x * x).sum::<f64>() * max_var;
    if !(var > 1e-14 * scale) {
        return Err(Error::DegeneratePortfolio);
    }
    Ok((dot(w, &m.mu), var.sqrt()))
}
