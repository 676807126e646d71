use twostage_wasm_demo::{llr_rows, loss_rows, node_rows};

#[test]
fn loss_rows_layout_and_saturation() {
    let rows = loss_rows(3, 2, 0.0, 60.0, 10.0, false).unwrap();
    assert_eq!(rows.len(), 7 * 3);
    for r in rows.chunks(3) {
        assert!(r[1] >= -1e-9 && r[2] >= -1e-9, "{r:?}");
    }
    // both schemes saturate at 3 bits, so the losses coincide at 60 dB
    let last = &rows[18..];
    assert!((last[1] - last[2]).abs() < 1e-6);
    assert!(loss_rows(3, 2, 10.0, 0.0, 1.0, false).is_err());
    assert!(loss_rows(3, 4, 0.0, 10.0, 1.0, false).is_err());
}

#[test]
fn rayleigh_loss_exceeds_awgn() {
    let awgn = loss_rows(2, 1, 10.0, 10.0, 1.0, false).unwrap();
    let ray = loss_rows(2, 1, 10.0, 10.0, 1.0, true).unwrap();
    assert!(ray[2] > awgn[2]);
}

#[test]
fn llr_rows_layout_and_normalisation() {
    let m1_card = 4;
    let rows = llr_rows(4, 2, 30.0, 41).unwrap();
    let width = 1 + 2 * m1_card;
    assert_eq!(rows.len(), 41 * width);
    for r in rows.chunks(width) {
        assert_eq!(r[1], 0.0);
        assert_eq!(r[1 + m1_card], 0.0);
    }
    assert!(llr_rows(4, 2, 30.0, 1).is_err());
}

#[test]
fn node_rows_combine_messages() {
    let out = node_rows(&[1.0, 2.0], &[3.0, 3.0], 8).unwrap();
    assert_eq!(out.len(), 4 + 16);
    // check output completes the zero sum: -(1 + 2) mod 8
    assert!((out[0] - 5.0).abs() < 1e-9);
    assert!(out[1] < 3.0);
    // equal concentrations: the product sits halfway
    assert!((out[2] - 1.5).abs() < 1e-9);
    assert!(out[3] > 3.0);
    let pmf_sum: f64 = out[4..12].iter().sum();
    assert!((pmf_sum - 1.0).abs() < 1e-12);
    assert!(node_rows(&[1.0], &[1.0, 2.0], 8).is_err());
    assert!(node_rows(&[1.0], &[1.0], 1).is_err());
}
