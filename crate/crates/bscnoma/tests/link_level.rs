use bscnoma::codec::build_code_from;
use bscnoma::designs::design_for;
use bscnoma::mcsim::*;
use bscnoma::qcldpc::*;

fn demo_code() -> bscnoma::codec::CodeSpec {
    let (_, d) = design_for(5, 1).unwrap();
    let h = expand(&base_matrix(&d, field_size_for(d.omega)).unwrap()).unwrap();
    build_code_from(&joint_components(&h, &JointLayout::default()).unwrap()).unwrap()
}

#[test]
fn alist_round_trip_of_demo_matrices() {
    let code = demo_code();
    for h in [&code.h_source, &code.joint] {
        let back = ParityCheckMatrix::from_alist(&h.to_alist()).unwrap();
        assert_eq!((back.rows(), back.cols()), (h.rows(), h.cols()));
        assert!(back.positions().eq(h.positions()));
    }
}

#[test]
fn ber_is_reproducible_and_paired() {
    let code = demo_code();
    let setup = BerSetup { snr_db: vec![2.0], iteration_budgets: vec![1, 10], min_bits: 20_000, ..BerSetup::default() };
    let a = simulate_far_user_ber(&code, &setup).unwrap();
    let b = simulate_far_user_ber(&code, &setup).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 3);
    assert!(a.iter().all(|p| p.bits_simulated == a[0].bits_simulated));
    // Joint decoding with ten iterations beats slot 1 alone on the same frames.
    assert!(a[1].bit_errors < a[2].bit_errors);
}

#[test]
fn frame_error_limit_stops_early() {
    let code = demo_code();
    let setup = BerSetup {
        snr_db: vec![0.0],
        iteration_budgets: vec![5],
        min_bits: 50_000,
        max_frame_errors: Some(3),
        ..BerSetup::default()
    };
    let p = &simulate_far_user_ber(&code, &setup).unwrap()[0];
    assert!(p.bits_simulated < 50_000);
}
