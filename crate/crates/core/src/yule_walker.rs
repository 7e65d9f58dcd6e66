//! Periodic Yule-Walker system for the start-up autocovariances.
//!
//! The unknowns are `gamma_h^(v)` for `0 <= h <= p` and every season, ordered
//! season-major: entry `(v - 1)(p + 1) + h` (0-based) holds `gamma_h^(v)`.
//! Row block `v` of the `S(p+1)`-square matrix collects the difference
//! equations of season `v` for `h = 0..=p`; the block in column block `w` is
//! the folded block `Phi_k^(v)` with `k = (v - w) mod S`.
//!
//! Each folded block is the sum of the elementary blocks `phi_{nS+k}^(v)`,
//! `n >= 0`, and only depends on the AR coefficients of its row season. The
//! assembly therefore builds one symbolic template per offset and substitutes
//! each season's coefficients into it.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{ParmaError, Result};
use crate::linalg::{relative_residual, LuFactors};
use crate::model::{require_causal, season_wrap, ParmaModel};
use crate::psi::{compute_psi, PsiTable};

/// Pivots below this fraction of the largest entry of the system are singular.
pub const SINGULAR_PIVOT_THRESHOLD: f64 = 1e-12;

/// Elementary block `phi_h^(v)` of size `(p+1) x (p+1)`.
///
/// Zero for `h > p`. Otherwise row `h` (0-based) holds
/// `-phi_h^(v), ..., -phi_p^(v)` in its first `p + 1 - h` columns, and each
/// row `h + i` below it holds `-phi_h^(v)` in column `i`. With `phi_0 = -1`,
/// `phi_0^(v)` is the identity plus the first row `(1, -phi_1, ..., -phi_p)`.
pub fn phi_block(model: &ParmaModel, v: usize, h: usize) -> Result<DMatrix<f64>> {
    model.check_season(v)?;
    let p = model.ar_order();
    let mut block = DMatrix::zeros(p + 1, p + 1);
    if h > p {
        return Ok(block);
    }
    for c in 0..=p - h {
        block[(h, c)] = -model.phi(v, h + c);
    }
    for i in 1..=p - h {
        block[(h + i, i)] = -model.phi(v, h);
    }
    Ok(block)
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct TemplateEntry {
    row: usize,
    col: usize,
    // AR orders j whose -phi_j^(v) add up here, in increasing n
    orders: Vec<usize>,
}

/// Symbolic layout of the folded blocks `Phi_k`, `k = 0..S-1`, for a given
/// period and AR order. Instantiating it with a season's coefficients gives
/// that season's blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockTemplate {
    period: usize,
    ar_order: usize,
    blocks: Vec<Vec<TemplateEntry>>,
}

impl BlockTemplate {
    pub fn new(period: usize, ar_order: usize) -> Self {
        let p = ar_order;
        let blocks = (0..period)
            .map(|k| {
                let mut cells: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
                let mut h = k;
                while h <= p {
                    for c in 0..=p - h {
                        cells.entry((h, c)).or_default().push(h + c);
                    }
                    for i in 1..=p - h {
                        cells.entry((h + i, i)).or_default().push(h);
                    }
                    h += period;
                }
                cells
                    .into_iter()
                    .map(|((row, col), orders)| TemplateEntry { row, col, orders })
                    .collect()
            })
            .collect();
        Self {
            period,
            ar_order,
            blocks,
        }
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn ar_order(&self) -> usize {
        self.ar_order
    }

    /// Number of structurally non-zero cells of `Phi_k`.
    pub fn nonzero_cells(&self, k: usize) -> usize {
        self.blocks[k].len()
    }

    /// `Phi_k^(v)` for the coefficients of season `v`.
    pub fn instantiate(&self, model: &ParmaModel, v: usize, k: usize) -> DMatrix<f64> {
        let n = self.ar_order + 1;
        let mut block = DMatrix::zeros(n, n);
        self.fill(model, v, k, &mut block, 0, 0);
        block
    }

    fn fill(
        &self,
        model: &ParmaModel,
        v: usize,
        k: usize,
        target: &mut DMatrix<f64>,
        row0: usize,
        col0: usize,
    ) {
        for e in &self.blocks[k] {
            let mut acc = 0.0;
            for &j in &e.orders {
                acc += -model.phi(v, j);
            }
            target[(row0 + e.row, col0 + e.col)] = acc;
        }
    }
}

/// Folded block `Phi_k^(v) = sum_{n >= 0} phi_{nS+k}^(v)` for `k` in `0..S`.
pub fn capital_phi_block(model: &ParmaModel, v: usize, k: usize) -> Result<DMatrix<f64>> {
    model.check_season(v)?;
    if k >= model.period() {
        return Err(ParmaError::OffsetOutOfRange {
            offset: k,
            period: model.period(),
        });
    }
    Ok(BlockTemplate::new(model.period(), model.ar_order()).instantiate(model, v, k))
}

/// Right-hand side of the season-`v`, lag-`h` difference equation:
/// `-sum_{j=h..q} theta_j^(v) psi_{j-h}^(v-h) sigma2_{v-j}`, zero for `h > q`.
///
/// `psi` must cover lags `0..=q`.
pub fn innovation_term(model: &ParmaModel, psi: &PsiTable, v: usize, h: usize) -> f64 {
    let q = model.ma_order();
    if h > q {
        return 0.0;
    }
    let u = model.season_back(v, h);
    let mut acc = 0.0;
    for j in h..=q {
        acc += model.theta(v, j) * psi.get(u, j - h) * model.sigma2(model.season_back(v, j));
    }
    -acc
}

fn check_psi(model: &ParmaModel, psi: &PsiTable) -> Result<()> {
    if psi.period() != model.period() {
        return Err(ParmaError::InvalidInput(format!(
            "psi table period {} does not match model period {}",
            psi.period(),
            model.period()
        )));
    }
    if psi.max_k() < model.ma_order() {
        return Err(ParmaError::PsiTableTooShort {
            required: model.ma_order(),
            available: psi.max_k(),
        });
    }
    Ok(())
}

/// The assembled system `Phi gamma = zeta`.
#[derive(Debug, Clone, PartialEq)]
pub struct YuleWalkerSystem {
    pub period: usize,
    pub ar_order: usize,
    /// `S (p + 1)`.
    pub dimension: usize,
    pub phi_matrix: DMatrix<f64>,
    pub zeta: Vec<f64>,
}

impl YuleWalkerSystem {
    /// Solves by LU with partial pivoting.
    pub fn solve(&self) -> Result<Vec<f64>> {
        Ok(LuFactors::factor(&self.phi_matrix, SINGULAR_PIVOT_THRESHOLD)?.solve(&self.zeta))
    }

    /// `||Phi gamma - zeta||_inf / max(1, ||zeta||_inf)`.
    pub fn residual(&self, gamma: &[f64]) -> f64 {
        relative_residual(&self.phi_matrix, gamma, &self.zeta)
    }

    /// Block `(v, w)` of the matrix, 1-based block indices.
    pub fn block(&self, v: usize, w: usize) -> DMatrix<f64> {
        let b = self.ar_order + 1;
        self.phi_matrix
            .view(((v - 1) * b, (w - 1) * b), (b, b))
            .into_owned()
    }
}

/// Builds `Phi` and `zeta`. `psi` must cover lags `0..=q`.
pub fn assemble_system(model: &ParmaModel, psi: &PsiTable) -> Result<YuleWalkerSystem> {
    check_psi(model, psi)?;
    let s = model.period();
    let p = model.ar_order();
    let b = p + 1;
    let n = s * b;
    let template = BlockTemplate::new(s, p);
    let mut phi_matrix = DMatrix::zeros(n, n);
    for v in 1..=s {
        for w in 1..=s {
            let k = (v + s - w) % s;
            template.fill(model, v, k, &mut phi_matrix, (v - 1) * b, (w - 1) * b);
        }
    }
    let mut zeta = Vec::with_capacity(n);
    for v in 1..=s {
        for h in 0..=p {
            zeta.push(innovation_term(model, psi, v, h));
        }
    }
    Ok(YuleWalkerSystem {
        period: s,
        ar_order: p,
        dimension: n,
        phi_matrix,
        zeta,
    })
}

/// Start-up autocovariances `gamma_h^(v)`, `0 <= h <= p`, season-major.
pub fn solve_startup(model: &ParmaModel) -> Result<Vec<f64>> {
    require_causal(model)?;
    let psi = compute_psi(model, model.ma_order());
    assemble_system(model, &psi)?.solve()
}

/// `gamma_h^(v)` for every season and `h = 0..=max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovTable {
    period: usize,
    max_lag: usize,
    // season-major, lag contiguous
    values: Vec<f64>,
}

impl AutocovTable {
    /// Wraps season-major values, `period` rows of `max_lag + 1` lags.
    pub fn from_values(period: usize, max_lag: usize, values: Vec<f64>) -> Result<Self> {
        if period == 0 || values.len() != period * (max_lag + 1) {
            return Err(ParmaError::InvalidInput(format!(
                "{} values do not form {} seasons of {} lags",
                values.len(),
                period,
                max_lag + 1
            )));
        }
        Ok(Self {
            period,
            max_lag,
            values,
        })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    /// `gamma_h^(v)` for a non-negative lag.
    #[inline]
    pub fn get(&self, v: usize, h: usize) -> f64 {
        self.values[(v - 1) * (self.max_lag + 1) + h]
    }

    pub fn season(&self, v: usize) -> &[f64] {
        let w = self.max_lag + 1;
        &self.values[(v - 1) * w..v * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `gamma_h^(v)` for any lag, using `gamma_{-h}^(v) = gamma_h^(v+h)`.
    pub fn at(&self, v: usize, h: i64) -> Result<f64> {
        if v == 0 || v > self.period {
            return Err(ParmaError::SeasonOutOfRange {
                season: v,
                period: self.period,
            });
        }
        let lag = h.unsigned_abs() as usize;
        if lag > self.max_lag {
            return Err(ParmaError::LagOutOfRange {
                lag: h,
                max_lag: self.max_lag,
            });
        }
        if h >= 0 {
            Ok(self.get(v, lag))
        } else {
            Ok(self.get(season_wrap(v as i64 + lag as i64, self.period), lag))
        }
    }

    /// Keeps lags `0..=max_lag` only.
    pub fn truncated(&self, max_lag: usize) -> Self {
        let max_lag = max_lag.min(self.max_lag);
        let values = (1..=self.period)
            .flat_map(|v| self.season(v)[..=max_lag].iter().copied())
            .collect();
        Self {
            period: self.period,
            max_lag,
            values,
        }
    }
}

/// Free-function form of [`AutocovTable::at`].
pub fn autocov_at(table: &AutocovTable, v: usize, h: i64) -> Result<f64> {
    table.at(v, h)
}

/// Extends the start-up values to lags `p < h <= max_lag` with the difference
/// equation
///
/// ```text
/// gamma_h^(v) = sum_{j=1..p} phi_j^(v) gamma_{h-j}^(v-j)
///             - sum_{j=h..q} theta_j^(v) psi_{j-h}^(v-h) sigma2_{v-j}
/// ```
pub fn extend_autocovariances(
    model: &ParmaModel,
    startup: &[f64],
    psi: &PsiTable,
    max_lag: usize,
) -> Result<AutocovTable> {
    let s = model.period();
    let p = model.ar_order();
    if max_lag < p {
        return Err(ParmaError::InsufficientStartup(format!(
            "max lag {max_lag} is below the AR order {p}"
        )));
    }
    if startup.len() != s * (p + 1) {
        return Err(ParmaError::InsufficientStartup(format!(
            "expected {} start-up values, got {}",
            s * (p + 1),
            startup.len()
        )));
    }
    check_psi(model, psi)?;
    let w = max_lag + 1;
    let mut values = vec![0.0; s * w];
    for v in 1..=s {
        values[(v - 1) * w..(v - 1) * w + p + 1]
            .copy_from_slice(&startup[(v - 1) * (p + 1)..v * (p + 1)]);
    }
    for h in p + 1..=max_lag {
        for v in 1..=s {
            let mut acc = innovation_term(model, psi, v, h);
            for j in 1..=p {
                let u = model.season_back(v, j);
                acc += model.phi(v, j) * values[(u - 1) * w + h - j];
            }
            values[(v - 1) * w + h] = acc;
        }
    }
    Ok(AutocovTable {
        period: s,
        max_lag,
        values,
    })
}

/// Full pipeline: causality gate, start-up solve, extension to `max_lag`.
///
/// Works for any `max_lag`, including ones below the AR order.
pub fn autocovariances(model: &ParmaModel, max_lag: usize) -> Result<AutocovTable> {
    let startup = solve_startup(model)?;
    let psi = compute_psi(model, model.ma_order());
    let table = extend_autocovariances(model, &startup, &psi, max_lag.max(model.ar_order()))?;
    Ok(table.truncated(max_lag))
}
