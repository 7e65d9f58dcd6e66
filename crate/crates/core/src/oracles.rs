//! Independent routes to the autocovariances, used to check the Yule-Walker solve.
//!
//! * MA(infinity) truncation: expanding both observations in the causal
//!   representation gives
//!   `gamma_h^(v) = sum_{k>=0} psi_{k+h}^(v) psi_k^(v-h) sigma2_{v-h-k}`.
//! * Monte Carlo: simulate the recursion directly and average lagged products
//!   per season.
//! * Residuals: plug a table back into the difference equation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ParmaError, Result};
use crate::model::{require_causal, ParmaModel};
use crate::psi::{compute_psi, PsiTable};
use crate::yule_walker::AutocovTable;

/// Initial truncation point of the MA(infinity) sum.
pub const MA_INITIAL_TERMS: usize = 128;
/// Largest truncation point tried before giving up.
pub const MA_MAX_TERMS: usize = 1 << 20;
/// Full cycles discarded before recording a simulated path.
pub const DEFAULT_BURN_IN_PERIODS: usize = 500;
/// Identifier of the generator behind [`simulate`]: ChaCha8 keyed by
/// `seed_from_u64(seed)` with stream id `stream`, ziggurat normals.
pub const RNG_ID: &str = "chacha8-stream/ziggurat-normal";

/// Sums the MA(infinity) series for a fixed model, growing its psi table on demand.
///
/// Reusing one oracle across many `(v, h)` pairs avoids recomputing the weights.
#[derive(Debug, Clone)]
pub struct MaInfinityOracle<'a> {
    model: &'a ParmaModel,
    psi: PsiTable,
}

impl<'a> MaInfinityOracle<'a> {
    pub fn new(model: &'a ParmaModel) -> Result<Self> {
        require_causal(model)?;
        Ok(Self {
            model,
            psi: compute_psi(model, MA_INITIAL_TERMS),
        })
    }

    fn ensure_psi(&mut self, max_k: usize) {
        if self.psi.max_k() < max_k {
            let target = max_k.max(2 * self.psi.max_k());
            self.psi = compute_psi(self.model, target);
        }
    }

    fn partial_sum(&self, v: usize, h: usize, from: usize, to: usize) -> f64 {
        let m = self.model;
        let u = m.season_back(v, h);
        let lead = self.psi.season(v);
        let lagged = self.psi.season(u);
        (from..to)
            .map(|k| lead[k + h] * lagged[k] * m.sigma2(m.season_back(u, k)))
            .sum()
    }

    /// `gamma_h^(v)` by truncated summation.
    ///
    /// Starts with [`MA_INITIAL_TERMS`] terms and doubles until two successive
    /// truncations differ by less than `tol * max(1, |estimate|)`.
    pub fn autocovariance(&mut self, v: usize, h: usize, tol: f64) -> Result<f64> {
        self.model.check_season(v)?;
        if tol.is_nan() || tol <= 0.0 {
            return Err(ParmaError::InvalidInput(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let mut terms = MA_INITIAL_TERMS;
        self.ensure_psi(terms + h);
        let mut estimate = self.partial_sum(v, h, 0, terms);
        while terms < MA_MAX_TERMS {
            let next_terms = 2 * terms;
            self.ensure_psi(next_terms + h);
            let next = estimate + self.partial_sum(v, h, terms, next_terms);
            let converged = (next - estimate).abs() < tol * next.abs().max(1.0);
            estimate = next;
            terms = next_terms;
            if converged {
                return Ok(estimate);
            }
        }
        Err(ParmaError::TruncationDidNotConverge { cap: MA_MAX_TERMS })
    }
}

/// One-shot form of [`MaInfinityOracle::autocovariance`].
pub fn acf_ma_infinity(model: &ParmaModel, v: usize, h: usize, tol: f64) -> Result<f64> {
    MaInfinityOracle::new(model)?.autocovariance(v, h, tol)
}

/// Innovation law used by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnovationLaw {
    #[default]
    Gaussian,
    /// `+-sigma_v` with equal probability.
    Rademacher,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub n_periods: usize,
    pub burn_in_periods: usize,
    pub seed: u64,
    /// Independent substream; replicate `i` of a batch uses stream `i`.
    pub stream: u64,
    pub innovations: InnovationLaw,
}

impl SimulationOptions {
    pub fn new(n_periods: usize, seed: u64) -> Self {
        Self {
            n_periods,
            burn_in_periods: DEFAULT_BURN_IN_PERIODS,
            seed,
            stream: 0,
            innovations: InnovationLaw::Gaussian,
        }
    }
}

/// A simulated path, `data[(n - 1) S + v - 1]` being season `v` of retained cycle `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSeries {
    pub period: usize,
    pub n_periods: usize,
    pub data: Vec<f64>,
    pub seed: u64,
    pub rng_id: &'static str,
}

impl SimulatedSeries {
    /// Observation at season `v` of retained cycle `n` (both 1-based).
    pub fn value(&self, n: usize, v: usize) -> f64 {
        self.data[(n - 1) * self.period + v - 1]
    }
}

/// Simulates with Gaussian innovations on stream 0.
pub fn simulate(
    model: &ParmaModel,
    n_periods: usize,
    burn_in_periods: usize,
    seed: u64,
) -> Result<SimulatedSeries> {
    simulate_with(
        model,
        &SimulationOptions {
            burn_in_periods,
            ..SimulationOptions::new(n_periods, seed)
        },
    )
}

/// Runs the model recursion from zero initial conditions, starting at season 1.
pub fn simulate_with(model: &ParmaModel, opts: &SimulationOptions) -> Result<SimulatedSeries> {
    if opts.n_periods == 0 {
        return Err(ParmaError::InvalidInput(
            "number of retained periods must be at least 1".into(),
        ));
    }
    require_causal(model)?;
    let s = model.period();
    let p = model.ar_order();
    let q = model.ma_order();
    let total = (opts.burn_in_periods + opts.n_periods) * s;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(opts.stream);
    let sd: Vec<f64> = model.variances().iter().map(|s2| s2.sqrt()).collect();

    let mut y = vec![0.0; total];
    let mut eps = vec![0.0; total];
    for t in 0..total {
        let v = t % s + 1;
        let z: f64 = match opts.innovations {
            InnovationLaw::Gaussian => rng.sample(StandardNormal),
            InnovationLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        let e = sd[v - 1] * z;
        eps[t] = e;
        let mut acc = e;
        for j in 1..=p.min(t) {
            acc += model.phi(v, j) * y[t - j];
        }
        for j in 1..=q.min(t) {
            acc -= model.theta(v, j) * eps[t - j];
        }
        y[t] = acc;
    }
    let data = y.split_off(opts.burn_in_periods * s);
    Ok(SimulatedSeries {
        period: s,
        n_periods: opts.n_periods,
        data,
        seed: opts.seed,
        rng_id: RNG_ID,
    })
}

fn season_means(series: &SimulatedSeries) -> Vec<f64> {
    let s = series.period;
    let mut sums = vec![0.0; s];
    for (i, y) in series.data.iter().enumerate() {
        sums[i % s] += y;
    }
    sums.iter().map(|x| x / series.n_periods as f64).collect()
}

fn check_lag(series: &SimulatedSeries, v: usize, h: usize) -> Result<()> {
    if v == 0 || v > series.period {
        return Err(ParmaError::SeasonOutOfRange {
            season: v,
            period: series.period,
        });
    }
    if h >= series.data.len() {
        return Err(ParmaError::InsufficientData(format!(
            "lag {h} not below series length {}",
            series.data.len()
        )));
    }
    Ok(())
}

// Mean of lagged products whose leading cycle lies in `cycles`.
fn mean_product(
    series: &SimulatedSeries,
    means: Option<&[f64]>,
    v: usize,
    h: usize,
    cycles: std::ops::Range<usize>,
) -> (f64, usize) {
    let s = series.period;
    let centered = |i: usize| match means {
        Some(m) => series.data[i] - m[i % s],
        None => series.data[i],
    };
    let mut sum = 0.0;
    let mut count = 0;
    for n in cycles {
        let i = n * s + v - 1;
        if i >= h {
            sum += centered(i) * centered(i - h);
            count += 1;
        }
    }
    (sum, count)
}

/// Sample counterpart of `gamma_h^(v)`: average of `y_{v+nS} y_{v+nS-h}` over
/// every retained cycle whose lagged index is still inside the window.
pub fn sample_periodic_acov(
    series: &SimulatedSeries,
    v: usize,
    h: usize,
    center: bool,
) -> Result<f64> {
    check_lag(series, v, h)?;
    let means = center.then(|| season_means(series));
    let (sum, count) = mean_product(series, means.as_deref(), v, h, 0..series.n_periods);
    if count < 2 {
        return Err(ParmaError::InsufficientData(format!(
            "only {count} aligned pair(s) for season {v}, lag {h}"
        )));
    }
    Ok(sum / count as f64)
}

/// Sample autocovariance with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_batches: usize,
}

impl BatchEstimate {
    /// `|estimate - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.estimate - target).abs() / self.std_error
    }
}

/// Uncentred estimate over all pairs, with standard error from `n_batches`
/// equal batches of cycles (trailing cycles that do not fill a batch are left
/// out of the error estimate only).
pub fn batch_acov(
    series: &SimulatedSeries,
    v: usize,
    h: usize,
    n_batches: usize,
) -> Result<BatchEstimate> {
    if n_batches < 2 {
        return Err(ParmaError::InvalidInput("need at least 2 batches".into()));
    }
    let estimate = sample_periodic_acov(series, v, h, false)?;
    let size = series.n_periods / n_batches;
    let mut batch_means = Vec::with_capacity(n_batches);
    for b in 0..n_batches {
        let (sum, count) = mean_product(series, None, v, h, b * size..(b + 1) * size);
        if count == 0 {
            return Err(ParmaError::InsufficientData(format!(
                "batch {} has no aligned pairs for lag {h}",
                b + 1
            )));
        }
        batch_means.push(sum / count as f64);
    }
    let mean = batch_means.iter().sum::<f64>() / n_batches as f64;
    let var = batch_means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n_batches - 1) as f64;
    Ok(BatchEstimate {
        estimate,
        std_error: (var / n_batches as f64).sqrt(),
        n_batches,
    })
}

/// Largest violation of the difference equation by `table`, over every season
/// and lag `0..=max_lag`, each scaled by `max(1, |gamma_0^(v)|)`.
///
/// Negative-lag reads go through [`AutocovTable::at`].
pub fn verify_residuals(model: &ParmaModel, table: &AutocovTable, psi: &PsiTable) -> Result<f64> {
    let p = model.ar_order();
    let q = model.ma_order();
    if table.max_lag() < p {
        return Err(ParmaError::TableTooShort {
            required: p,
            available: table.max_lag(),
        });
    }
    if table.period() != model.period() {
        return Err(ParmaError::InvalidInput(format!(
            "table period {} does not match model period {}",
            table.period(),
            model.period()
        )));
    }
    if psi.max_k() < q {
        return Err(ParmaError::PsiTableTooShort {
            required: q,
            available: psi.max_k(),
        });
    }
    let mut worst = 0.0f64;
    for v in 1..=model.period() {
        for h in 0..=table.max_lag() {
            let mut lhs = table.get(v, h);
            for j in 1..=p {
                lhs -= model.phi(v, j) * table.at(model.season_back(v, j), h as i64 - j as i64)?;
            }
            let mut rhs = 0.0;
            if h <= q {
                let u = model.season_back(v, h);
                for j in h..=q {
                    rhs -= model.theta(v, j)
                        * psi.get(u, j - h)
                        * model.sigma2(model.season_back(v, j));
                }
            }
            let scale = table.get(v, 0).abs().max(1.0);
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    Ok(worst)
}
