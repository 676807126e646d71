//! Deterministic sweeps behind the `mi-curve` and `llr-check` subcommands.

use super::config::SimConfig;
use super::HarnessError;
use crate::channel::ChannelModel;
use crate::constellation::TwoStageConstellation;
use crate::detection::{exact_stage1_llr, kv_from_kw, vonmises_llr};
use crate::infotheory::{loss_curve, MiCurvePoint, MiOptions, Scheme};

pub fn mi_options(cfg: &SimConfig) -> MiOptions {
    MiOptions {
        method: cfg.mi_method,
        gh_nodes: cfg.gh_nodes,
        fading_samples: cfg.fading_samples,
        fading: cfg.fading_method,
        stage2: cfg.stage2_method,
        seed: cfg.seed,
    }
}

/// Loss curves for every scheme and constellation size in the configuration.
/// The two-stage split uses `min(m1, m)` soft bits.
pub fn run_mi_curve(cfg: &SimConfig) -> Result<Vec<MiCurvePoint>, HarnessError> {
    cfg.validate()?;
    if cfg.mi_m.is_empty() || cfg.mi_schemes.is_empty() {
        return Err(HarnessError::Config("mi_m and mi_schemes must be non-empty".into()));
    }
    let opts = mi_options(cfg);
    let mut out = Vec::new();
    for &scheme in &cfg.mi_schemes {
        for &m in &cfg.mi_m {
            let m1 = match scheme {
                Scheme::Bicm => m,
                Scheme::TwoStage => cfg.m1.min(m),
            };
            let c = TwoStageConstellation::build_pam(m, m1, true)?;
            out.extend(loss_curve(scheme, &c, cfg.channel, cfg.convention, &cfg.snr_db, &opts)?);
        }
    }
    Ok(out)
}

/// Exact and Von Mises stage-1 log-likelihoods at one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrRow {
    pub snr_db: f64,
    pub y: f64,
    pub exact: Vec<f64>,
    pub vonmises: Vec<f64>,
    /// Largest absolute difference after normalising both to `lambda(0) = 0`.
    pub sup_err: f64,
}

/// Sweeps `llr_points` observations evenly over the constellation span
/// (one spacing beyond each end) at every SNR.
pub fn run_llr_check(cfg: &SimConfig) -> Result<Vec<LlrRow>, HarnessError> {
    cfg.validate()?;
    if cfg.llr_points < 2 {
        return Err(HarnessError::Config("llr_points must be at least 2".into()));
    }
    let c = TwoStageConstellation::build_pam(cfg.m, cfg.m1, true)?;
    let lo = c.points()[0] - c.spacing();
    let hi = c.points()[c.order() - 1] + c.spacing();
    let mut rows = Vec::with_capacity(cfg.snr_db.len() * cfg.llr_points);
    for &db in &cfg.snr_db {
        let ch = ChannelModel::with_energy(cfg.channel, db, cfg.convention, c.energy());
        let kw = ch.kw();
        let kv = kv_from_kw(kw, c.m1_card(), c.spacing());
        for i in 0..cfg.llr_points {
            let y = lo + (hi - lo) * i as f64 / (cfg.llr_points - 1) as f64;
            let exact = exact_stage1_llr(y, kw, &c).lambda;
            let vonmises = vonmises_llr(y, kv, &c).lambda;
            let sup_err = exact
                .iter()
                .zip(&vonmises)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            rows.push(LlrRow {
                snr_db: db,
                y,
                exact,
                vonmises,
                sup_err,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mi_curve_covers_grid() {
        let cfg = SimConfig {
            mi_m: vec![1, 2],
            m1: 1,
            snr_db: vec![0.0, 30.0],
            ..SimConfig::default()
        };
        let pts = run_mi_curve(&cfg).unwrap();
        assert_eq!(pts.len(), 2 * 2 * 2);
        let bicm2 = pts
            .iter()
            .find(|p| p.scheme == Scheme::Bicm && p.m == 2 && p.snr_db == 30.0)
            .unwrap();
        assert!((bicm2.mi_per_dim - 2.0).abs() < 1e-6);
    }

    #[test]
    fn llr_rows_are_normalised() {
        let cfg = SimConfig {
            m: 4,
            m1: 2,
            snr_db: vec![15.0],
            llr_points: 11,
            ..SimConfig::default()
        };
        let rows = run_llr_check(&cfg).unwrap();
        assert_eq!(rows.len(), 11);
        for r in rows {
            assert_eq!(r.exact[0], 0.0);
            assert_eq!(r.vonmises[0], 0.0);
            assert!(r.sup_err.is_finite());
        }
    }
}
