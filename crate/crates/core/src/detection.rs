//! Front-end detection for the two stages.
//!
//! Stage-1 likelihoods marginalise the unknown hard-stage index; the Von
//! Mises form replaces the finite replica sum by a single cosine over the
//! wrapped observation. Stage 2 is a nearest-point decision inside the coset
//! selected by the stage-1 decision. All likelihoods are natural-log values
//! normalised so that `lambda[0] == 0`.

use std::f64::consts::TAU;

use crate::adbp::DMessage;
use crate::constellation::TwoStageConstellation;
use crate::special::{kappa_from_circular_variance, log_sum_exp};

/// Log-likelihoods of the stage-1 index, one per `b1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOneLikelihoods {
    pub lambda: Vec<f64>,
}

impl StageOneLikelihoods {
    fn normalised(mut lambda: Vec<f64>) -> Self {
        let base = lambda[0];
        for l in &mut lambda {
            *l -= base;
        }
        StageOneLikelihoods { lambda }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Most likely stage-1 index (lowest index on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &l) in self.lambda.iter().enumerate() {
            if l > self.lambda[best] {
                best = i;
            }
        }
        best
    }

    /// Posterior probabilities under a uniform prior.
    pub fn posteriors(&self) -> Vec<f64> {
        let z = log_sum_exp(&self.lambda);
        self.lambda.iter().map(|l| (l - z).exp()).collect()
    }
}

/// Exact stage-1 log-likelihoods for AWGN with concentration `kw = 1/sigma2`.
pub fn exact_stage1_llr(y: f64, kw: f64, c: &TwoStageConstellation) -> StageOneLikelihoods {
    let d = c.spacing();
    let period = c.coset_period();
    let yc = y - c.offset();
    let m2 = c.m2_card();
    let mut terms = vec![0.0; m2];
    let lambda = (0..c.m1_card())
        .map(|b1| {
            let base = yc - b1 as f64 * d;
            for (b2, t) in terms.iter_mut().enumerate() {
                let e = base - b2 as f64 * period;
                *t = -0.5 * kw * e * e;
            }
            log_sum_exp(&terms)
        })
        .collect();
    StageOneLikelihoods::normalised(lambda)
}

/// Exact stage-1 log-likelihoods under a known fading gain `h`.
pub fn exact_stage1_llr_faded(
    y: f64,
    h: f64,
    kw: f64,
    c: &TwoStageConstellation,
) -> StageOneLikelihoods {
    exact_stage1_llr(y / h, kw * h * h, c)
}

/// Von Mises approximation `lambda(b1) = kv cos(2 pi (Y - b1 d) / (M1 d))`
/// on the recentred observation `Y`.
pub fn vonmises_llr(y: f64, kv: f64, c: &TwoStageConstellation) -> StageOneLikelihoods {
    vonmises_llr_recentred(y - c.offset(), kv, c)
}

/// [`vonmises_llr`] for an observation already recentred (and possibly
/// wrapped) so that point 0 sits at the origin.
pub fn vonmises_llr_recentred(yc: f64, kv: f64, c: &TwoStageConstellation) -> StageOneLikelihoods {
    let d = c.spacing();
    let w = TAU / c.coset_period();
    let lambda = (0..c.m1_card())
        .map(|b1| kv * (w * (yc - b1 as f64 * d)).cos())
        .collect();
    StageOneLikelihoods::normalised(lambda)
}

/// Von Mises concentration matching the first circular moment of the
/// wrapped Gaussian with concentration `kw` and period `m1_card * d`.
pub fn kv_from_kw(kw: f64, m1_card: usize, d: f64) -> f64 {
    assert!(kw > 0.0, "kw must be positive");
    let sigma_theta = TAU / (m1_card as f64 * d) / kw.sqrt();
    kappa_from_circular_variance(sigma_theta * sigma_theta)
}

/// Canonical representative of `y` modulo `period`, in `[0, period)`.
pub fn wrap_observation(y: f64, period: f64) -> f64 {
    assert!(period > 0.0);
    let r = y.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Bit log-likelihood ratios `ln P(bit = 0) / P(bit = 1)` of the Gray
/// labelled stage-1 bits (MSB first).
pub fn symbol_to_bit_llr(lh: &StageOneLikelihoods, gray1: &[usize]) -> Vec<f64> {
    let m1_card = lh.len();
    assert_eq!(gray1.len(), m1_card);
    let nbits = m1_card.trailing_zeros() as usize;
    let mut zeros = Vec::with_capacity(m1_card / 2);
    let mut ones = Vec::with_capacity(m1_card / 2);
    (0..nbits)
        .map(|j| {
            zeros.clear();
            ones.clear();
            let shift = nbits - 1 - j;
            for (s, &l) in lh.lambda.iter().enumerate() {
                if (gray1[s] >> shift) & 1 == 0 {
                    zeros.push(l);
                } else {
                    ones.push(l);
                }
            }
            log_sum_exp(&zeros) - log_sum_exp(&ones)
        })
        .collect()
}

/// Nearest coset point given the stage-1 decision, after equalising by `h`.
/// Ties go to the lower index.
pub fn hard_stage2_detect(y: f64, h: f64, b1_hat: usize, c: &TwoStageConstellation) -> usize {
    let m2 = c.m2_card();
    if m2 == 1 {
        return 0;
    }
    let ye = y / h;
    let base = c.points()[b1_hat];
    let period = c.coset_period();
    let k = ((ye - base) / period).floor();
    if k < 0.0 {
        return 0;
    }
    let j0 = k as usize;
    if j0 >= m2 - 1 {
        return m2 - 1;
    }
    let p0 = c.points()[j0 * c.m1_card() + b1_hat];
    let p1 = c.points()[(j0 + 1) * c.m1_card() + b1_hat];
    if (ye - p0).abs() <= (p1 - ye).abs() {
        j0
    } else {
        j0 + 1
    }
}

/// Gray bits (MSB first) of the stage-2 decision.
pub fn hard_stage2_bits(y: f64, h: f64, b1_hat: usize, c: &TwoStageConstellation) -> Vec<u8> {
    let b2 = hard_stage2_detect(y, h, b1_hat, c);
    (0..c.m2() as usize).map(|j| c.stage2_bit(b2, j)).collect()
}

/// Channel D-message over `Z_{M1}` in symbol units.
pub fn dmessage_from_channel(y: f64, h: f64, kw: f64, c: &TwoStageConstellation) -> DMessage {
    let d = c.spacing();
    let m1 = c.m1_card();
    let mu = wrap_observation((y / h - c.offset()) / d, m1 as f64);
    let kappa = kv_from_kw(kw * h * h * d * d, m1, 1.0);
    DMessage::new(mu, kappa, m1 as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_ratio;

    fn brute_lambda(yc: f64, kw: f64, d: f64, m1: usize, m2: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..m1)
            .map(|b1| {
                (0..m2)
                    .map(|b2| {
                        let e = yc - b1 as f64 * d - (b2 * m1) as f64 * d;
                        (-0.5 * kw * e * e).exp()
                    })
                    .sum::<f64>()
                    .ln()
            })
            .collect();
        raw.iter().map(|v| v - raw[0]).collect()
    }

    #[test]
    fn exact_matches_direct_two_term_sum() {
        let c = TwoStageConstellation::with_spacing(2, 1, 1.0).unwrap();
        let yc = 0.2;
        let lh = exact_stage1_llr(yc + c.offset(), 4.0, &c);
        // lambda(1) - lambda(0) = ln(e^{-2(0.8)^2} + e^{-2(2.8)^2}) - ln(e^{-2(0.2)^2} + e^{-2(1.8)^2})
        let expected = ((-1.28f64).exp() + (-15.68f64).exp()).ln()
            - ((-0.08f64).exp() + (-6.48f64).exp()).ln();
        assert_eq!(lh.lambda[0], 0.0);
        assert!((lh.lambda[1] - expected).abs() < 1e-13);
        let brute = brute_lambda(yc, 4.0, 1.0, 2, 2);
        assert!((lh.lambda[1] - brute[1]).abs() < 1e-13);
    }

    #[test]
    fn exact_limits() {
        let c = TwoStageConstellation::build_pam(4, 2, true).unwrap();
        let y = c.map_symbol(0, 2).unwrap();
        assert_eq!(exact_stage1_llr(y, 1e8, &c).argmax(), 0);
        let single = TwoStageConstellation::build_pam(2, 2, true).unwrap();
        let lh = exact_stage1_llr(0.1, 3.0, &single);
        let d = single.spacing();
        let yc = 0.1 - single.offset();
        for b1 in 0..4 {
            let expect = -1.5 * ((yc - b1 as f64 * d).powi(2) - yc.powi(2));
            assert!((lh.lambda[b1] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn vonmises_basics() {
        let c = TwoStageConstellation::build_pam(6, 2, true).unwrap();
        let flat = vonmises_llr(0.37, 0.0, &c);
        assert!(flat.lambda.iter().all(|&l| l == 0.0));
        let y = c.map_symbol(2, 5).unwrap();
        let lh = vonmises_llr(y, 3.0, &c);
        assert_eq!(lh.argmax(), 2);
    }

    #[test]
    fn kv_moment_match_and_limits() {
        let kv = kv_from_kw(4.0, 4, 1.0);
        let sigma_theta = TAU / 4.0 / 2.0;
        assert!((bessel_ratio(kv) - (-0.5 * sigma_theta * sigma_theta).exp()).abs() < 1e-12);
        assert!(kv_from_kw(1e12, 4, 1.0) > 1e9);
        assert!(kv_from_kw(1e-6, 4, 1.0) < 1e-6);
        let mut prev = 0.0;
        for i in 0..200 {
            let kw = 10f64.powf(-4.0 + 0.08 * i as f64);
            let kv = kv_from_kw(kw, 4, 1.0);
            // kv underflows to zero for very weak channels
            assert!(kv > prev || kv == 0.0, "kw={kw}");
            prev = kv;
        }
    }

    #[test]
    fn wrapping() {
        assert!((wrap_observation(5.3, 4.0) - 1.3).abs() < 1e-12);
        assert!((wrap_observation(-0.7, 4.0) - 3.3).abs() < 1e-12);
        assert_eq!(wrap_observation(-1e-18, 4.0), 0.0);
        let c = TwoStageConstellation::build_pam(5, 2, true).unwrap();
        let kv = 2.5;
        for i in 0..200 {
            let y = -3.0 + 0.031 * i as f64;
            let a = vonmises_llr(y, kv, &c);
            let yw = wrap_observation(y - c.offset(), c.coset_period());
            let b = vonmises_llr_recentred(yw, kv, &c);
            for (x, z) in a.lambda.iter().zip(&b.lambda) {
                assert!((x - z).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn bit_llrs() {
        let gray1 = [0usize, 1];
        let lh = StageOneLikelihoods {
            lambda: vec![0.7, -0.4],
        };
        assert!((symbol_to_bit_llr(&lh, &gray1)[0] - 1.1).abs() < 1e-15);
        let flat = StageOneLikelihoods {
            lambda: vec![0.0; 8],
        };
        let g8: Vec<usize> = (0..8).map(|k| k ^ (k >> 1)).collect();
        assert!(symbol_to_bit_llr(&flat, &g8).iter().all(|&l| l.abs() < 1e-15));
        // m1 = 2: gray labels 00, 01, 11, 10
        let g4 = [0usize, 1, 3, 2];
        let l = [0.3, -1.2, 2.0, 0.4];
        let lh = StageOneLikelihoods { lambda: l.to_vec() };
        let bits = symbol_to_bit_llr(&lh, &g4);
        let e = |v: f64| v.exp();
        let msb = ((e(l[0]) + e(l[1])) / (e(l[2]) + e(l[3]))).ln();
        let lsb = ((e(l[0]) + e(l[3])) / (e(l[1]) + e(l[2]))).ln();
        assert!((bits[0] - msb).abs() < 1e-13);
        assert!((bits[1] - lsb).abs() < 1e-13);
    }

    #[test]
    fn bit_posteriors_are_preserved() {
        for m1 in 1..=3u32 {
            let c = TwoStageConstellation::build_pam(m1 + 2, m1, true).unwrap();
            let lh = exact_stage1_llr(0.123, 7.0, &c);
            let post = lh.posteriors();
            let bits = symbol_to_bit_llr(&lh, c.gray1());
            for (j, llr) in bits.iter().enumerate() {
                let p0: f64 = (0..c.m1_card())
                    .filter(|&s| c.stage1_bit(s, j) == 0)
                    .map(|s| post[s])
                    .sum();
                let from_llr = 1.0 / (1.0 + (-llr).exp());
                assert!((p0 - from_llr).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hard_detection() {
        let c = TwoStageConstellation::with_spacing(4, 2, 1.0).unwrap();
        for b1 in 0..4 {
            for b2 in 0..4 {
                let x = c.map_symbol(b1, b2).unwrap();
                assert_eq!(hard_stage2_detect(0.8 * x, 0.8, b1, &c), b2);
            }
        }
        // coset 1: points -6.5, -2.5, 1.5, 5.5; midpoint of the first two is -4.5
        assert_eq!(hard_stage2_detect(-4.5, 1.0, 1, &c), 0);
        assert_eq!(hard_stage2_detect(-4.49, 1.0, 1, &c), 1);
        assert_eq!(hard_stage2_detect(-100.0, 1.0, 1, &c), 0);
        assert_eq!(hard_stage2_detect(100.0, 1.0, 1, &c), 3);
        assert_eq!(hard_stage2_bits(5.5, 1.0, 1, &c), vec![1, 0]);
    }

    #[test]
    fn dmessage_alignment() {
        let c = TwoStageConstellation::build_pam(5, 2, true).unwrap();
        let kw = 40.0;
        let y = c.map_symbol(3, 6).unwrap();
        let msg = dmessage_from_channel(1.7 * y, 1.7, kw, &c);
        assert!((msg.mu - 3.0).abs() < 1e-9);
        let a = dmessage_from_channel(0.3, 1.0, kw, &c);
        let b = dmessage_from_channel(0.6, 2.0, kw, &c);
        let direct = kv_from_kw(4.0 * kw * c.spacing().powi(2), 4, 1.0);
        assert!((b.kappa - direct).abs() < 1e-12 * direct);
        assert!(b.kappa > a.kappa);
        // evaluated on the ring the message reproduces the Von Mises likelihoods
        let kv = kv_from_kw(kw, 4, c.spacing());
        for i in 0..50 {
            let y = -1.2 + 0.05 * i as f64;
            let msg = dmessage_from_channel(y, 1.0, kw, &c);
            let vm = vonmises_llr(y, kv, &c);
            let from_msg: Vec<f64> = (0..4).map(|s| msg.log_pmf_unnormalised(s)).collect();
            for s in 0..4 {
                let lhs = from_msg[s] - from_msg[0];
                assert!((lhs - vm.lambda[s]).abs() < 1e-9 * (1.0 + kv));
            }
        }
    }

    #[test]
    fn shift_invariance() {
        let c = TwoStageConstellation::with_spacing(4, 2, 0.5).unwrap();
        let kw = 9.0;
        for &shift in &[0.37, -2.1, 11.0] {
            for i in 0..20 {
                let y = -1.5 + 0.17 * i as f64;
                let lh = exact_stage1_llr(y, kw, &c);
                // same observation and every point translated by `shift`
                let raw: Vec<f64> = (0..4)
                    .map(|b1| {
                        let terms: Vec<f64> = (0..4)
                            .map(|b2| {
                                let p = c.map_symbol(b1, b2).unwrap() + shift;
                                -0.5 * kw * (y + shift - p).powi(2)
                            })
                            .collect();
                        log_sum_exp(&terms)
                    })
                    .collect();
                for b1 in 0..4 {
                    assert!((lh.lambda[b1] - (raw[b1] - raw[0])).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn truncation_gap_shrinks_with_m2() {
        let m1 = 4usize;
        let d = 1.0;
        let kw = 0.8;
        let unbounded = |yc: f64| -> Vec<f64> {
            let raw: Vec<f64> = (0..m1)
                .map(|b1| {
                    (-200i64..200)
                        .map(|k| {
                            let e = yc - b1 as f64 * d - (k * m1 as i64) as f64 * d;
                            (-0.5 * kw * e * e).exp()
                        })
                        .sum::<f64>()
                        .ln()
                })
                .collect();
            raw.iter().map(|v| v - raw[0]).collect()
        };
        let mut prev = f64::INFINITY;
        for m in 3..=7u32 {
            let c = TwoStageConstellation::with_spacing(m, 2, d).unwrap();
            let mut gap: f64 = 0.0;
            // observations around the middle of the constellation
            for i in 0..40 {
                let y = -2.0 + 0.1 * i as f64;
                let lh = exact_stage1_llr(y, kw, &c);
                let reference = unbounded(y - c.offset());
                for (a, b) in lh.lambda.iter().zip(&reference) {
                    gap = gap.max((a - b).abs());
                }
            }
            assert!(gap < prev || gap < 1e-13, "m={m}: gap {gap} !< {prev}");
            prev = gap;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn finite_across_concentrations() {
        let c = TwoStageConstellation::build_pam(6, 2, true).unwrap();
        for e in -6..=12 {
            let kw = 10f64.powi(e);
            for &y in &[-1.9, -0.3, 0.0, 0.77, 2.5] {
                let exact = exact_stage1_llr(y, kw, &c);
                let vm = vonmises_llr(y, kv_from_kw(kw, 4, c.spacing()), &c);
                for lh in [&exact, &vm] {
                    assert!(lh.lambda.iter().all(|l| l.is_finite()));
                    assert!(symbol_to_bit_llr(lh, c.gray1()).iter().all(|l| l.is_finite()));
                }
                let msg = dmessage_from_channel(y, 1.0, kw, &c);
                assert!(msg.mu.is_finite() && msg.kappa.is_finite());
            }
        }
    }
}
