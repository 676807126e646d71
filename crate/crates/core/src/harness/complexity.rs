//! Decoder complexity per information bit for the two-stage decoder and for
//! BICM.

use super::HarnessError;

/// Normalised complexity together with the quantities it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complexity {
    pub value: f64,
    /// Fraction of information bits carried by the soft stage.
    pub x: f64,
    /// Overall code rate `(m1 R1 + m2 R2) / m`.
    pub rc: f64,
}

/// Overall code rate of the two-stage scheme.
pub fn overall_rate(m: u32, m1: u32, r1: f64, r2: f64) -> f64 {
    let m2 = m.saturating_sub(m1);
    (m1 as f64 * r1 + m2 as f64 * r2) / m as f64
}

fn check_inputs(costs: &[f64], rates: &[f64], m: u32) -> Result<(), HarnessError> {
    if m == 0 {
        return Err(HarnessError::Config("m must be at least 1".into()));
    }
    if costs.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
        return Err(HarnessError::Config("complexities must be finite and non-negative".into()));
    }
    if rates.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(HarnessError::Config("rates must lie in (0, 1]".into()));
    }
    Ok(())
}

/// `x C_soft + (1 - x) C_hard + 2^m / (m Rc) (C_llr + C_hd)` with
/// `x = m1 R1 / (m Rc)`.
#[allow(clippy::too_many_arguments)]
pub fn complexity_msd(
    c_soft: f64,
    c_hard: f64,
    c_llr: f64,
    c_hd: f64,
    m: u32,
    m1: u32,
    r1: f64,
    r2: f64,
) -> Result<Complexity, HarnessError> {
    check_inputs(&[c_soft, c_hard, c_llr, c_hd], &[r1, r2], m)?;
    if m1 == 0 || m1 > m {
        return Err(HarnessError::Config(format!("need 1 <= m1 <= m (m = {m}, m1 = {m1})")));
    }
    let rc = overall_rate(m, m1, r1, r2);
    let x = m1 as f64 * r1 / (m as f64 * rc);
    let per_symbol = (m as f64).exp2() / (m as f64 * rc);
    Ok(Complexity {
        value: x * c_soft + (1.0 - x) * c_hard + per_symbol * (c_llr + c_hd),
        x,
        rc,
    })
}

/// `C_soft + 2^m / (m Rc) C_llr`.
pub fn complexity_bicm(c_soft: f64, c_llr: f64, m: u32, rc: f64) -> Result<Complexity, HarnessError> {
    check_inputs(&[c_soft, c_llr], &[rc], m)?;
    Ok(Complexity {
        value: c_soft + (m as f64).exp2() / (m as f64 * rc) * c_llr,
        x: 1.0,
        rc,
    })
}
