//! Weights of the causal MA(infinity) representation.

use crate::model::ParmaModel;

/// `psi_k^(v)` for every season and `k = 0..=max_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiTable {
    period: usize,
    max_k: usize,
    // row-major: season-major, k contiguous
    values: Vec<f64>,
}

impl PsiTable {
    pub fn period(&self) -> usize {
        self.period
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    /// `psi_k^(v)`, 1-based season.
    #[inline]
    pub fn get(&self, v: usize, k: usize) -> f64 {
        self.values[(v - 1) * (self.max_k + 1) + k]
    }

    /// All weights of season `v`, `k = 0..=max_k`.
    pub fn season(&self, v: usize) -> &[f64] {
        let w = self.max_k + 1;
        &self.values[(v - 1) * w..v * w]
    }
}

/// Runs the psi recursion up to lag `max_k`:
///
/// ```text
/// psi_0^(v) = 1
/// psi_k^(v) = -theta_k^(v) 1[k <= q] + sum_{j=1..min(k,p)} phi_j^(v) psi_{k-j}^(v-j)
/// ```
///
/// Lags are filled in increasing `k` across all seasons, so every dependency is
/// available when needed.
pub fn compute_psi(model: &ParmaModel, max_k: usize) -> PsiTable {
    let s = model.period();
    let p = model.ar_order();
    let q = model.ma_order();
    let w = max_k + 1;
    let mut values = vec![0.0; s * w];
    for v in 1..=s {
        values[(v - 1) * w] = 1.0;
    }
    for k in 1..=max_k {
        for v in 1..=s {
            let mut acc = if k <= q { -model.theta(v, k) } else { 0.0 };
            for j in 1..=k.min(p) {
                let u = model.season_back(v, j);
                acc += model.phi(v, j) * values[(u - 1) * w + k - j];
            }
            values[(v - 1) * w + k] = acc;
        }
    }
    PsiTable {
        period: s,
        max_k,
        values,
    }
}
