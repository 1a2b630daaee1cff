//! Analytic load-balancing models: closed-form speedup estimates for the
//! two stealing mechanisms, given observed skew. These are reporting
//! tools only; the scheduler never consults them.

use thiserror::Error;

/// Hardware warp width the intra-warp model is stated against.
pub const WARP_WIDTH: f64 = 32.0;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{0}")]
    BadParam(&'static str),
}

fn check(cond: bool, msg: &'static str) -> Result<(), ModelError> {
    if cond {
        Ok(())
    } else {
        Err(ModelError::BadParam(msg))
    }
}

/// Warp-level speedup of fine-grained stealing:
/// `32 / (t_imb * (1 + k*eps / i_opt))`.
///
/// `t_imb`: active threads in the imbalanced baseline; `k`: times the
/// mechanism triggered; `eps`: per-trigger overhead relative to one
/// search iteration; `i_opt`: optimized iteration count.
pub fn intra_warp_speedup(t_imb: f64, k: f64, eps: f64, i_opt: f64) -> Result<f64, ModelError> {
    check((1.0..=WARP_WIDTH).contains(&t_imb), "t_imb must be in [1, 32]")?;
    check(k >= 0.0, "k must be non-negative")?;
    check((0.0..=1.0).contains(&eps), "eps must be in [0, 1]")?;
    check(i_opt > 0.0, "i_opt must be positive")?;
    Ok(WARP_WIDTH / (t_imb * (1.0 + k * eps / i_opt)))
}

/// Speedup from aborting and redistributing tail work:
/// `o / ((1 - Phi * l_imb) + kc_over_t)` with `Phi = (phi - 1) / phi`.
/// With `kc_over_t = 0` this is the usual approximation, bounded above by
/// `o * phi`.
///
/// `o`: signal-monitoring overhead factor (slightly below 1); `phi`:
/// core groups (cores / warp width); `l_imb`: fraction of wall time spent
/// in the tail; `kc_over_t`: optional relative redistribution cost.
pub fn tail_speedup(o: f64, phi: f64, l_imb: f64, kc_over_t: f64) -> Result<f64, ModelError> {
    check(o > 0.0 && o <= 1.0, "o must be in (0, 1]")?;
    check(phi >= 1.0, "phi must be at least 1")?;
    check((0.0..1.0).contains(&l_imb), "l_imb must be in [0, 1)")?;
    check(kc_over_t >= 0.0, "kc_over_t must be non-negative")?;
    let big_phi = (phi - 1.0) / phi;
    Ok(o / ((1.0 - big_phi * l_imb) + kc_over_t))
}

/// Tail fraction left after fine-grained stealing shrinks the tail by
/// `theta`: `(l/theta) / (1 - l + l/theta)`. Strictly below `l_imb` for
/// `theta > 1`.
pub fn residual_tail_fraction(l_imb: f64, theta: f64) -> Result<f64, ModelError> {
    check((0.0..1.0).contains(&l_imb), "l_imb must be in [0, 1)")?;
    check(theta >= 1.0, "theta must be at least 1")?;
    let shrunk = l_imb / theta;
    Ok(shrunk / (1.0 - l_imb + shrunk))
}

/// Tail time fraction implied by a tail warp holding `work_fraction` of
/// the work while `phi` core groups share the rest:
/// `1 / (((1 - f) / f) / phi + 1)`.
pub fn tail_fraction_from_work(work_fraction: f64, phi: f64) -> Result<f64, ModelError> {
    check(work_fraction > 0.0 && work_fraction < 1.0, "work_fraction must be in (0, 1)")?;
    check(phi >= 1.0, "phi must be at least 1")?;
    Ok(1.0 / (((1.0 - work_fraction) / work_fraction) / phi + 1.0))
}
