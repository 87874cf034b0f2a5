//! Exercises the C ABI from Rust: handle lifecycles, status codes, and
//! the certificate pipeline end to end.

use std::ffi::{CStr, CString};
use std::ptr;

use bellwork_ffi::*;

#[test]
fn game_values_through_the_abi() {
    unsafe {
        let mut game = ptr::null_mut();
        assert_eq!(bw_game_chsh(&mut game), BwStatus::Ok);

        let mut name = ptr::null_mut();
        assert_eq!(bw_game_name(game, &mut name), BwStatus::Ok);
        assert_eq!(CStr::from_ptr(name).to_str().unwrap(), "chsh");
        bw_string_free(name);

        let mut local = 0.0;
        assert_eq!(bw_game_local_value(game, &mut local), BwStatus::Ok);
        assert_eq!(local, 0.75);

        let mut ns = 0.0;
        assert_eq!(bw_game_ns_value(game, &mut ns), BwStatus::Ok);
        assert_eq!(ns, 1.0);

        let mut quantum = 0.0;
        assert_eq!(bw_game_quantum_closed(game, &mut quantum), BwStatus::Ok);
        assert!((quantum - 0.8535533905932737).abs() < 1e-15);

        let mut lower = 0.0;
        let mut converged = false;
        assert_eq!(
            bw_game_quantum_lower(game, 8, 1e-10, &mut lower, &mut converged),
            BwStatus::Ok
        );
        assert!(lower >= quantum - 1e-6);

        bw_game_free(game);
    }
}

#[test]
fn chained_constructor_validates() {
    unsafe {
        let mut game = ptr::null_mut();
        assert_eq!(bw_game_chained(1, &mut game), BwStatus::InvalidArgument);
        assert_eq!(bw_game_chained(3, &mut game), BwStatus::Ok);
        let mut quantum = 0.0;
        assert_eq!(bw_game_quantum_closed(game, &mut quantum), BwStatus::Ok);
        assert!((quantum - (std::f64::consts::PI / 12.0).cos().powi(2)).abs() < 1e-15);
        bw_game_free(game);
    }
}

#[test]
fn untagged_game_has_no_closed_form() {
    unsafe {
        let json = CString::new(
            r#"{
                "name": "custom",
                "alice_questions": [0],
                "bob_questions": [0],
                "weights": [{"u":0,"v":0,"p":1.0}],
                "predicate": [{"u":0,"v":0,"f":0}]
            }"#,
        )
        .unwrap();
        let mut game = ptr::null_mut();
        assert_eq!(bw_game_from_json(json.as_ptr(), &mut game), BwStatus::Ok);
        let mut quantum = 0.0;
        assert_eq!(
            bw_game_quantum_closed(game, &mut quantum),
            BwStatus::NotAvailable
        );
        bw_game_free(game);
    }
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        let mut out = 0.0;
        assert_eq!(
            bw_game_local_value(ptr::null(), &mut out),
            BwStatus::NullPointer
        );
        let mut game = ptr::null_mut();
        assert_eq!(bw_game_chsh(&mut game), BwStatus::Ok);
        assert_eq!(
            bw_game_local_value(game, ptr::null_mut()),
            BwStatus::NullPointer
        );
        assert_eq!(
            bw_game_from_json(ptr::null(), &mut game),
            BwStatus::NullPointer
        );
        bw_game_free(game);
        bw_game_free(ptr::null_mut());
        bw_string_free(ptr::null_mut());
    }
}

#[test]
fn simulate_and_certify_pipeline() {
    unsafe {
        let mut game = ptr::null_mut();
        bw_game_chsh(&mut game);
        let mut behavior = ptr::null_mut();
        assert_eq!(bw_behavior_pr(&mut behavior), BwStatus::Ok);

        let mut p = 0.0;
        assert_eq!(bw_success_probability(game, behavior, &mut p), BwStatus::Ok);
        assert_eq!(p, 1.0);
        let mut s = 0.0;
        assert_eq!(bw_chsh_value(behavior, &mut s), BwStatus::Ok);
        assert_eq!(s, 4.0);
        let mut work = 0.0;
        assert_eq!(
            bw_exact_work_mean(game, behavior, 1.0, &mut work),
            BwStatus::Ok
        );
        assert_eq!(work, 1.0);

        let mut record = ptr::null_mut();
        assert_eq!(
            bw_simulate(game, behavior, 10_000, 7, false, 1.0, &mut record),
            BwStatus::Ok
        );
        let mut rounds = 0u64;
        let mut ones = 0u64;
        bw_record_rounds(record, &mut rounds);
        bw_record_ones(record, &mut ones);
        assert_eq!((rounds, ones), (10_000, 10_000));

        let mut bit = 0u8;
        assert_eq!(bw_record_bit(record, 0, &mut bit), BwStatus::Ok);
        assert_eq!(bit, 1);
        assert_eq!(
            bw_record_bit(record, 10_000, &mut bit),
            BwStatus::InvalidArgument
        );

        // Reversible routing produces an identical record.
        let mut record_rev = ptr::null_mut();
        assert_eq!(
            bw_simulate(game, behavior, 10_000, 7, true, 1.0, &mut record_rev),
            BwStatus::Ok
        );
        let mut ones_rev = 0u64;
        bw_record_ones(record_rev, &mut ones_rev);
        assert_eq!(ones_rev, ones);

        let mut report = ptr::null_mut();
        assert_eq!(
            bw_certify_json(
                record,
                game,
                BwMethod::Hoeffding,
                0.01,
                -1.0,
                -1.0,
                &mut report
            ),
            BwStatus::Ok
        );
        let text = CStr::from_ptr(report).to_str().unwrap();
        assert!(text.contains("\"verdict\": \"post-quantum\""));
        bw_string_free(report);

        bw_record_free(record_rev);
        bw_record_free(record);
        bw_behavior_free(behavior);
        bw_game_free(game);
    }
}

#[test]
fn record_ndjson_round_trip() {
    unsafe {
        let mut game = ptr::null_mut();
        bw_game_chsh(&mut game);
        let mut behavior = ptr::null_mut();
        bw_behavior_noisy_pr(0.25, &mut behavior);

        let mut record = ptr::null_mut();
        assert_eq!(
            bw_simulate(game, behavior, 5000, 42, false, 1.0, &mut record),
            BwStatus::Ok
        );
        let mut text = ptr::null_mut();
        assert_eq!(bw_record_to_ndjson(record, &mut text), BwStatus::Ok);

        let mut parsed = ptr::null_mut();
        assert_eq!(bw_record_from_ndjson(text, &mut parsed), BwStatus::Ok);
        let (mut a, mut b) = (0u64, 0u64);
        bw_record_ones(record, &mut a);
        bw_record_ones(parsed, &mut b);
        assert_eq!(a, b);

        let corrupt = CString::new("not a record").unwrap();
        let mut bad = ptr::null_mut();
        assert_eq!(
            bw_record_from_ndjson(corrupt.as_ptr(), &mut bad),
            BwStatus::ParseError
        );

        bw_string_free(text);
        bw_record_free(parsed);
        bw_record_free(record);
        bw_behavior_free(behavior);
        bw_game_free(game);
    }
}

#[test]
fn scalar_helpers() {
    unsafe {
        let mut h = 0.0;
        assert_eq!(bw_binary_entropy(0.5, &mut h), BwStatus::Ok);
        assert_eq!(h, 1.0);
        assert_eq!(bw_binary_entropy(1.5, &mut h), BwStatus::InvalidArgument);

        let mut eps = 0.0;
        assert_eq!(bw_hoeffding_epsilon(5000, 0.01, &mut eps), BwStatus::Ok);
        assert!((eps - 0.021459).abs() < 1e-6);

        assert!((bw_symmetric_flip_threshold() - 0.146447).abs() < 1e-6);

        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(
            bw_clopper_pearson(85, 100, 0.05, false, &mut lo, &mut hi),
            BwStatus::Ok
        );
        assert!(lo > 0.7 && lo < 0.85);
        assert_eq!(hi, 1.0);

        assert_eq!(bw_wilson(50, 100, 0.05, &mut lo, &mut hi), BwStatus::Ok);
        assert!(((lo + hi) / 2.0 - 0.5).abs() < 1e-12);
    }
}

#[test]
fn generated_header_exists_and_declares_the_api() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/bellwork.h");
    let text = std::fs::read_to_string(header).expect("header generated by build.rs");
    for symbol in [
        "BELLWORK_H",
        "typedef struct BwGame BwGame;",
        "BwStatus bw_game_chsh(struct BwGame **out);",
        "bw_simulate",
        "bw_certify_json",
        "BW_STATUS_DEGENERATE_CALIBRATION",
    ] {
        assert!(text.contains(symbol), "header missing: {symbol}");
    }
}
