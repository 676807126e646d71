use proptest::prelude::*;

use twostage::adbp::{cn_update, cn_update_with, vn_update, DMessage, MomentMap};
use twostage::constellation::TwoStageConstellation;
use twostage::detection::{exact_stage1_llr, symbol_to_bit_llr, vonmises_llr};
use twostage::fec::RsCode;

fn split() -> impl Strategy<Value = (u32, u32)> {
    (1u32..=10).prop_flat_map(|m| (Just(m), 1..=m))
}

fn dmessage(m: u32) -> impl Strategy<Value = DMessage> {
    (0.0..m as f64, 0.0f64..50.0).prop_map(move |(mu, k)| DMessage::new(mu, k, m))
}

fn modulus() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![2u32, 4, 8, 16, 64, 256])
}

fn circ_dist(a: f64, b: f64, m: f64) -> f64 {
    let d = (a - b).rem_euclid(m);
    d.min(m - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constellation_is_centred_with_closed_form_energy((m, m1) in split(), d in 0.01f64..10.0) {
        let c = TwoStageConstellation::with_spacing(m, m1, d).unwrap();
        let pts = c.points();
        let sum: f64 = pts.iter().sum();
        let scale: f64 = pts.iter().map(|x| x.abs()).sum();
        prop_assert!(sum.abs() <= 1e-12 * scale);
        let card = pts.len() as f64;
        let direct = pts.iter().map(|x| x * x).sum::<f64>() / card;
        let closed = d * d * (card * card - 1.0) / 12.0;
        prop_assert!((direct - closed).abs() <= 1e-12 * closed);
        prop_assert!((c.energy() - closed).abs() <= 1e-12 * closed);
    }

    #[test]
    fn composition_is_a_bijection((m, m1) in split()) {
        let c = TwoStageConstellation::build_pam(m, m1, true).unwrap();
        let mut hit = vec![0u8; c.order()];
        for b1 in 0..c.m1_card() {
            for b2 in 0..c.m2_card() {
                let i = c.index(b1, b2).unwrap();
                hit[i] += 1;
                prop_assert_eq!(c.split(i), (b1, b2));
            }
        }
        prop_assert!(hit.iter().all(|&h| h == 1));
    }

    #[test]
    fn stage_labels_are_gray((m, m1) in split()) {
        let c = TwoStageConstellation::build_pam(m, m1, false).unwrap();
        for g in [c.gray1(), c.gray2()] {
            for w in g.windows(2) {
                prop_assert_eq!((w[0] ^ w[1]).count_ones(), 1);
            }
        }
    }

    #[test]
    fn bit_labels_round_trip((m, m1) in split(), seed in any::<u64>()) {
        let c = TwoStageConstellation::build_pam(m, m1, true).unwrap();
        let b1 = (seed as usize) % c.m1_card();
        let b2 = (seed as usize >> 20) % c.m2_card();
        let (g1, g2) = c.stage_indices_to_bits(b1, b2).unwrap();
        prop_assert_eq!(c.bits_to_stage_indices(&g1, &g2).unwrap(), (b1, b2));
    }

    #[test]
    fn detection_outputs_are_finite(y in -20.0f64..20.0, lkw in -6.0f64..12.0, (m, m1) in (2u32..=8).prop_flat_map(|m| (Just(m), 1..=m.min(3)))) {
        let c = TwoStageConstellation::build_pam(m, m1, true).unwrap();
        let kw = 10f64.powf(lkw);
        let exact = exact_stage1_llr(y, kw, &c);
        let vm = vonmises_llr(y, kw.min(1e9), &c);
        prop_assert!(exact.lambda.iter().chain(&vm.lambda).all(|v| v.is_finite()));
        prop_assert!(symbol_to_bit_llr(&exact, c.gray1()).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn vn_update_ignores_input_order(m in modulus(), seed in any::<u64>(), msgs in prop::collection::vec(dmessage(256), 1..6)) {
        let msgs: Vec<DMessage> = msgs.iter().map(|d| DMessage::new(d.mu % m as f64, d.kappa, m)).collect();
        let ch = msgs[0];
        let rest = &msgs[1..];
        let a = vn_update(&ch, rest);
        let mut shuffled = rest.to_vec();
        shuffled.rotate_left(seed as usize % rest.len().max(1));
        shuffled.reverse();
        let b = vn_update(&ch, &shuffled);
        // associativity: fold one incoming message into the channel first
        let c = if rest.len() >= 2 {
            vn_update(&vn_update(&ch, &rest[..1]), &rest[1..])
        } else {
            a
        };
        for o in [b, c] {
            prop_assert!((a.kappa - o.kappa).abs() <= 1e-9 * a.kappa.max(1.0));
            if a.kappa > 1e-6 {
                prop_assert!(circ_dist(a.mu, o.mu, m as f64) < 1e-8);
            }
        }
    }

    #[test]
    fn updates_return_canonical_messages(m in modulus(), msgs in prop::collection::vec(dmessage(256), 2..8), signs in prop::collection::vec(any::<bool>(), 8)) {
        let msgs: Vec<DMessage> = msgs.iter().map(|d| DMessage::new(d.mu % m as f64, d.kappa, m)).collect();
        let w: Vec<i8> = signs[..msgs.len()].iter().map(|&s| if s { 1 } else { -1 }).collect();
        let outs = [
            vn_update(&msgs[0], &msgs[1..]),
            cn_update(&msgs, &w, 1),
            cn_update_with(&msgs, &w, -1, &MomentMap::sampled(m)),
        ];
        for o in outs {
            prop_assert!(o.mu >= 0.0 && o.mu < m as f64);
            prop_assert!(o.kappa.is_finite() && o.kappa >= 0.0);
            prop_assert!(o.kappa > 0.0 || o.mu == 0.0);
        }
    }

    #[test]
    fn cn_update_negation_symmetry(m in modulus(), msgs in prop::collection::vec(dmessage(256), 2..7), flip in 0usize..7, w_out in prop::sample::select(vec![1i8, -1])) {
        let msgs: Vec<DMessage> = msgs.iter().map(|d| DMessage::new(d.mu % m as f64, d.kappa, m)).collect();
        let flip = flip % msgs.len();
        let w = vec![1i8; msgs.len()];
        let base = cn_update(&msgs, &w, w_out);
        let mut w2 = w.clone();
        w2[flip] = -1;
        let mut msgs2 = msgs.clone();
        msgs2[flip] = DMessage::new(-msgs[flip].mu, msgs[flip].kappa, m);
        let other = cn_update(&msgs2, &w2, w_out);
        prop_assert!((base.kappa - other.kappa).abs() <= 1e-9 * base.kappa.max(1.0));
        if base.kappa > 0.0 {
            prop_assert!(circ_dist(base.mu, other.mu, m as f64) < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rs_round_trip(info in prop::collection::vec(any::<u8>(), 251), errs in prop::collection::vec((0usize..255, 1u8..=255), 0..=2)) {
        let rs = RsCode::new(2).unwrap();
        let cw = rs.encode(&info).unwrap();
        let mut rx = cw.clone();
        for &(pos, e) in &errs {
            rx[pos] ^= e;
        }
        let (dec, _) = rs.decode(&rx).unwrap();
        prop_assert_eq!(rs.info(&dec), &info[..]);
    }
}
