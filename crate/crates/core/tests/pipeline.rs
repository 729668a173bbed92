//! End-to-end flows across modules: build, persist, simulate, decode, sweep.

use majcolor::code::{validate_code, CodeLayout};
use majcolor::decoder::{Decoder, Weighting};
use majcolor::noisesim::{build_schedule, read_histories, run_shots, write_histories, ErrorParams, HistoryHeader};
use majcolor::threshold::{read_csv, run_threshold, write_csv, SweepConfig};
use majcolor::build_code;

#[test]
fn layout_survives_a_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d9.json");
    let l = build_code(9).unwrap();
    l.save(&path).unwrap();
    let back = CodeLayout::load(&path).unwrap();
    assert_eq!(back.vertices.len(), l.vertices.len());
    assert_eq!(back.plaquettes.len(), l.plaquettes.len());
    assert!(validate_code(&back).all_passed());
}

#[test]
fn histories_round_trip_and_decode_identically() {
    let l = build_code(5).unwrap();
    let params = ErrorParams::from_pp_rate(0.01).unwrap();
    let shots = run_shots(&build_schedule(&l), &params, 5, 300, 11);
    let header = HistoryHeader {
        d: 5,
        rounds: 5,
        n_plaquettes: l.plaquettes.len(),
        n_data: l.n_vertices(),
        shots: 300,
        epsilon: params.epsilon,
        seed: 11,
    };
    let mut buf = Vec::new();
    write_histories(&mut buf, &header, &shots).unwrap();
    let (h2, back) = read_histories(&buf[..]).unwrap();
    assert_eq!(h2, header);
    assert_eq!(back, shots);

    let dec = Decoder::new(&l, 5, &params, Weighting::Probability);
    let fails = |v: &[majcolor::noisesim::SyndromeHistory]| {
        v.iter().filter(|h| dec.decode(h).unwrap().logical_failure).count()
    };
    assert_eq!(fails(&shots), fails(&back));
}

#[test]
fn truncated_history_file_is_rejected() {
    let l = build_code(5).unwrap();
    let params = ErrorParams::new(0.001).unwrap();
    let shots = run_shots(&build_schedule(&l), &params, 2, 3, 0);
    let header = HistoryHeader { d: 5, rounds: 2, n_plaquettes: l.plaquettes.len(), n_data: l.n_vertices(), shots: 3, epsilon: 0.001, seed: 0 };
    let mut buf = Vec::new();
    write_histories(&mut buf, &header, &shots).unwrap();
    buf.truncate(buf.len() - 1);
    assert!(read_histories(&buf[..]).is_err());
}

#[test]
fn noiseless_sweep_has_no_failures() {
    let cfg = SweepConfig { d_list: vec![5, 9], eps_list: vec![0.0], shots: 200, ..SweepConfig::default() };
    let recs = run_threshold(&cfg).unwrap();
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().all(|r| r.failures == 0));
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let cfg = SweepConfig { d_list: vec![5], eps_list: vec![0.002, 0.001], shots: 400, seed: 8, ..SweepConfig::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_threshold(&cfg).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
    // Rows come out in ascending ε regardless of input order.
    assert!(one[0].epsilon < one[1].epsilon);

    let mut buf = Vec::new();
    write_csv(&mut buf, &one).unwrap();
    assert_eq!(read_csv(&buf[..]).unwrap(), one);
}

#[test]
fn larger_code_suppresses_errors_at_low_noise() {
    // 5ε = 0.4%, well below threshold.
    let cfg = SweepConfig { d_list: vec![5, 9], eps_list: vec![0.0008], shots: 3000, seed: 21, ..SweepConfig::default() };
    let recs = run_threshold(&cfg).unwrap();
    assert!(recs[1].rate_per_round < recs[0].rate_per_round, "{recs:?}");
}
