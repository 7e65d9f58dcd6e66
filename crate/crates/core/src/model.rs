//! Periodic ARMA model representation and causality check.
//!
//! A PARMA(p, q) model with period `S` is written, for season `v` in `1..=S`,
//!
//! ```text
//! y_t = sum_{j=1..p} phi_j^(v) y_{t-j} + e_t - sum_{j=1..q} theta_j^(v) e_{t-j}
//! ```
//!
//! where `e_t` is periodic white noise with variance `sigma2[v]`. Only the
//! `j >= 1` coefficients are stored; the lag-zero coefficients
//! `phi_0 = theta_0 = -1` are implicit and returned by [`ParmaModel::phi`] and
//! [`ParmaModel::theta`] when asked for `j = 0`.
//!
//! Seasons are 1-based everywhere in the public API.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ParmaError, Result};

/// Spectral radius above which a model is flagged as close to the causality boundary.
pub const NEAR_BOUNDARY_RADIUS: f64 = 0.999;

const RADIUS_TOLERANCE: f64 = 1e-12;
const RADIUS_MAX_ITERATIONS: usize = 200;

/// Maps any integer season label onto `1..=period`.
///
/// # Panics
///
/// Panics if `period` is zero.
pub fn season_wrap(v: i64, period: usize) -> usize {
    assert!(period >= 1, "period must be at least 1");
    ((v - 1).rem_euclid(period as i64) + 1) as usize
}

/// Unvalidated model description, as read from a model file.
///
/// `phi` and `theta` hold one row per season (row `v - 1` is season `v`), with
/// column `j - 1` holding the order-`j` coefficient. Both may be omitted when
/// the corresponding order is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub period: usize,
    pub p: usize,
    pub q: usize,
    #[serde(default)]
    pub phi: Vec<Vec<f64>>,
    #[serde(default)]
    pub theta: Vec<Vec<f64>>,
    pub sigma2: Vec<f64>,
}

/// A validated periodic ARMA model. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct ParmaModel {
    period: usize,
    ar_order: usize,
    ma_order: usize,
    // row-major S x p and S x q
    phi: Vec<f64>,
    theta: Vec<f64>,
    sigma2: Vec<f64>,
}

/// Outcome of the monodromy spectral-radius test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalityReport {
    pub spectral_radius: f64,
    pub is_causal: bool,
    pub near_boundary: bool,
}

fn check_coefficients(
    field: &'static str,
    rows: &[Vec<f64>],
    period: usize,
    order: usize,
) -> Result<Vec<f64>> {
    if order == 0 && rows.is_empty() {
        return Ok(Vec::new());
    }
    if rows.len() != period {
        return Err(ParmaError::DimensionMismatch {
            field,
            expected: format!("{period} rows"),
            found: format!("{} rows", rows.len()),
        });
    }
    let mut flat = Vec::with_capacity(period * order);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != order {
            return Err(ParmaError::DimensionMismatch {
                field,
                expected: format!("{order} coefficients for season {}", i + 1),
                found: format!("{}", row.len()),
            });
        }
        for (j, &c) in row.iter().enumerate() {
            if !c.is_finite() {
                return Err(ParmaError::NonFiniteCoefficient {
                    field,
                    season: i + 1,
                    index: j + 1,
                });
            }
        }
        flat.extend_from_slice(row);
    }
    Ok(flat)
}

/// Checks a raw description and turns it into a [`ParmaModel`].
pub fn validate_model(raw: &ModelSpec) -> Result<ParmaModel> {
    if raw.period == 0 {
        return Err(ParmaError::DimensionMismatch {
            field: "period",
            expected: "at least 1".into(),
            found: "0".into(),
        });
    }
    let phi = check_coefficients("phi", &raw.phi, raw.period, raw.p)?;
    let theta = check_coefficients("theta", &raw.theta, raw.period, raw.q)?;
    if raw.sigma2.len() != raw.period {
        return Err(ParmaError::DimensionMismatch {
            field: "sigma2",
            expected: format!("{} entries", raw.period),
            found: format!("{} entries", raw.sigma2.len()),
        });
    }
    for (i, &s) in raw.sigma2.iter().enumerate() {
        if !s.is_finite() {
            return Err(ParmaError::NonFiniteCoefficient {
                field: "sigma2",
                season: i + 1,
                index: 0,
            });
        }
        if s <= 0.0 {
            return Err(ParmaError::NonPositiveVariance {
                season: i + 1,
                value: s,
            });
        }
    }
    Ok(ParmaModel {
        period: raw.period,
        ar_order: raw.p,
        ma_order: raw.q,
        phi,
        theta,
        sigma2: raw.sigma2.clone(),
    })
}

impl ParmaModel {
    /// Builds and validates a model from per-season coefficient rows.
    pub fn new(
        period: usize,
        phi: Vec<Vec<f64>>,
        theta: Vec<Vec<f64>>,
        sigma2: Vec<f64>,
    ) -> Result<Self> {
        let p = phi.first().map_or(0, Vec::len);
        let q = theta.first().map_or(0, Vec::len);
        validate_model(&ModelSpec {
            period,
            p,
            q,
            phi,
            theta,
            sigma2,
        })
    }

    /// Periodic white noise with the given per-season variances.
    pub fn white_noise(sigma2: Vec<f64>) -> Result<Self> {
        Self::new(sigma2.len(), Vec::new(), Vec::new(), sigma2)
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn ar_order(&self) -> usize {
        self.ar_order
    }

    pub fn ma_order(&self) -> usize {
        self.ma_order
    }

    /// `phi_j^(v)` for season `v` in `1..=S` and `j` in `0..=p`; `phi_0 = -1`.
    #[inline]
    pub fn phi(&self, v: usize, j: usize) -> f64 {
        if j == 0 {
            -1.0
        } else {
            self.phi[(v - 1) * self.ar_order + j - 1]
        }
    }

    /// `theta_j^(v)` for `j` in `0..=q`; `theta_0 = -1`.
    #[inline]
    pub fn theta(&self, v: usize, j: usize) -> f64 {
        if j == 0 {
            -1.0
        } else {
            self.theta[(v - 1) * self.ma_order + j - 1]
        }
    }

    #[inline]
    pub fn sigma2(&self, v: usize) -> f64 {
        self.sigma2[v - 1]
    }

    /// AR coefficients `phi_1..phi_p` of season `v`.
    pub fn ar_coefficients(&self, v: usize) -> &[f64] {
        &self.phi[(v - 1) * self.ar_order..v * self.ar_order]
    }

    /// MA coefficients `theta_1..theta_q` of season `v`.
    pub fn ma_coefficients(&self, v: usize) -> &[f64] {
        &self.theta[(v - 1) * self.ma_order..v * self.ma_order]
    }

    pub fn variances(&self) -> &[f64] {
        &self.sigma2
    }

    /// Same model with every innovation variance multiplied by `factor`.
    pub fn with_scaled_variances(&self, factor: f64) -> Result<Self> {
        let mut spec = self.to_spec();
        spec.sigma2.iter_mut().for_each(|s| *s *= factor);
        validate_model(&spec)
    }

    /// Same model with season `target`'s AR coefficients replaced by `phi`.
    pub fn with_ar_coefficients(&self, target: usize, phi: &[f64]) -> Result<Self> {
        self.check_season(target)?;
        let mut spec = self.to_spec();
        if self.ar_order == 0 {
            spec.phi = vec![Vec::new(); self.period];
        }
        spec.phi[target - 1] = phi.to_vec();
        validate_model(&spec)
    }

    /// Round-trips back to the raw description.
    pub fn to_spec(&self) -> ModelSpec {
        let rows = |flat: &[f64], order: usize| -> Vec<Vec<f64>> {
            if order == 0 {
                Vec::new()
            } else {
                flat.chunks(order).map(<[f64]>::to_vec).collect()
            }
        };
        ModelSpec {
            period: self.period,
            p: self.ar_order,
            q: self.ma_order,
            phi: rows(&self.phi, self.ar_order),
            theta: rows(&self.theta, self.ma_order),
            sigma2: self.sigma2.clone(),
        }
    }

    pub(crate) fn check_season(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.period {
            Err(ParmaError::SeasonOutOfRange {
                season: v,
                period: self.period,
            })
        } else {
            Ok(())
        }
    }

    /// Season reached by stepping `offset` back from season `v`.
    #[inline]
    pub(crate) fn season_back(&self, v: usize, offset: usize) -> usize {
        season_wrap(v as i64 - offset as i64, self.period)
    }
}

/// Companion matrix of season `v`: first row `(phi_1^(v), ..., phi_p^(v))`,
/// ones on the subdiagonal.
pub fn companion_matrix(model: &ParmaModel, v: usize) -> Result<DMatrix<f64>> {
    let p = model.ar_order();
    if p == 0 {
        return Err(ParmaError::ArOrderZero);
    }
    model.check_season(v)?;
    let mut c = DMatrix::zeros(p, p);
    for j in 0..p {
        c[(0, j)] = model.phi(v, j + 1);
    }
    for i in 1..p {
        c[(i, i - 1)] = 1.0;
    }
    Ok(c)
}

/// One-period state transition `C_S * ... * C_1` of the AR part.
pub fn monodromy_matrix(model: &ParmaModel) -> Result<DMatrix<f64>> {
    let mut m = companion_matrix(model, 1)?;
    for v in 2..=model.period() {
        m = companion_matrix(model, v)? * m;
    }
    Ok(m)
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectral radius by repeated squaring with renormalisation.
///
/// After `k` squarings the estimate is `||M^(2^k)||^(1/2^k)`, tracked in log
/// space so that neither overflow nor underflow occurs. Step `k` moves the log
/// estimate by `ln ||A^2|| / 2^k` with `A` the normalised power. Iteration stops
/// once that step and the largest step size seen so far, scaled by `2^-k`, are
/// both below `1e-12` (relative once the radius is below one). The second
/// condition matters for complex eigenvalue pairs, whose rotating phase can
/// make a few consecutive steps vanish by coincidence.
///
/// Returns the estimate and whether it settled.
pub fn spectral_radius(m: &DMatrix<f64>) -> (f64, bool) {
    let norm = inf_norm(m);
    if norm == 0.0 {
        return (0.0, true);
    }
    let mut a = m / norm;
    let mut log_radius = norm.ln();
    let mut estimate = norm;
    let mut largest_log_step = 1.0f64;
    for it in 1..=RADIUS_MAX_ITERATIONS {
        let sq = &a * &a;
        let sq_norm = inf_norm(&sq);
        if sq_norm == 0.0 {
            // nilpotent
            return (0.0, true);
        }
        let weight = 0.5f64.powi(it as i32);
        largest_log_step = largest_log_step.max(sq_norm.ln().abs());
        log_radius += sq_norm.ln() * weight;
        let next = log_radius.exp();
        let tol = RADIUS_TOLERANCE * next.min(1.0);
        if (next - estimate).abs() < tol && next * largest_log_step * weight < tol {
            return (next, true);
        }
        estimate = next;
        a = sq / sq_norm;
    }
    (estimate, false)
}

/// Monodromy spectral-radius causality test. `p = 0` is always causal.
pub fn check_causality(model: &ParmaModel) -> CausalityReport {
    if model.ar_order() == 0 {
        return CausalityReport {
            spectral_radius: 0.0,
            is_causal: true,
            near_boundary: false,
        };
    }
    let m = monodromy_matrix(model).expect("p >= 1 checked above");
    let (rho, converged) = spectral_radius(&m);
    CausalityReport {
        spectral_radius: rho,
        is_causal: rho < 1.0,
        near_boundary: rho > NEAR_BOUNDARY_RADIUS || !converged,
    }
}

pub(crate) fn require_causal(model: &ParmaModel) -> Result<CausalityReport> {
    let report = check_causality(model);
    if report.is_causal {
        Ok(report)
    } else {
        Err(ParmaError::NotCausal {
            spectral_radius: report.spectral_radius,
        })
    }
}
