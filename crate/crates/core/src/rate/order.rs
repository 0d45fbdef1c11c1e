use crate::error::{Error, Result};
use crate::lqr::Feedback;
use crate::split::IterationTrace;

/// Error band treated as asymptotic: above it the iteration is still
/// pre-asymptotic, below it solver noise dominates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderWindow {
    pub lower: f64,
    pub upper: f64,
}

impl Default for OrderWindow {
    fn default() -> Self {
        Self {
            lower: 1e-10,
            upper: 1e-2,
        }
    }
}

impl OrderWindow {
    pub fn contains(&self, e: f64) -> bool {
        e >= self.lower && e <= self.upper
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderFit {
    /// Slope `p` of `log e_{k+1} = p·log e_k + log c`.
    pub order: f64,
    /// Intercept `c` of the same fit.
    pub rate: f64,
    /// Geometric mean of `e_{k+1}/e_k`, i.e. the fit with `p` pinned to 1.
    pub contraction: f64,
    pub pairs: usize,
}

/// `‖F^{(k)} − F_opt‖_F` at the end of every sweep, starting with the initial feedback.
pub fn sweep_errors(trace: &IterationTrace, f_opt: &Feedback) -> Vec<f64> {
    trace
        .sweep_ends
        .iter()
        .map(|f| (f.as_matrix() - f_opt.as_matrix()).norm())
        .collect()
}

/// Least-squares order fit over consecutive error pairs that both lie in `window`.
pub fn fit_order(errors: &[f64], window: OrderWindow) -> Result<OrderFit> {
    let pairs: Vec<(f64, f64)> = errors
        .windows(2)
        .filter(|w| window.contains(w[0]) && window.contains(w[1]))
        .map(|w| (w[0].ln(), w[1].ln()))
        .collect();
    let n = pairs.len();
    if n < 3 {
        return Err(Error::InsufficientData { pairs: n });
    }
    let nf = n as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx <= f64::EPSILON * nf * mean_x.abs().max(1.0) {
        return Err(Error::InsufficientData { pairs: n });
    }
    let order = sxy / sxx;
    Ok(OrderFit {
        order,
        rate: (mean_y - order * mean_x).exp(),
        contraction: (mean_y - mean_x).exp(),
        pairs: n,
    })
}

pub fn empirical_order(
    trace: &IterationTrace,
    f_opt: &Feedback,
    window: OrderWindow,
) -> Result<OrderFit> {
    fit_order(&sweep_errors(trace, f_opt), window)
}
