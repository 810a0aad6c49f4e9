mod common;

use common::{config, NONLINEAR};
use proptest::prelude::*;
use vlasov_core::exec::Serial;
use vlasov_core::geometry::build_bolza;
use vlasov_core::observables::TimeSeries;
use vlasov_lab::harness::run;
use vlasov_lab::io::{
    fmt_f64, read_checkpoint, read_json, read_series, read_surface, read_table, write_checkpoint,
    write_series, write_surface,
};
use vlasov_lab::RunReport;

#[test]
fn checkpoint_round_trips_bit_for_bit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(NONLINEAR);
    run(&cfg, tmp.path(), &Serial).unwrap();
    let (header, e) = read_checkpoint(&tmp.path().join("checkpoint.csv")).unwrap();
    assert_eq!(header.config_hash, cfg.hash());
    assert_eq!(header.particles, cfg.particles);
    assert_eq!(e.len(), cfg.particles);

    let again = tmp.path().join("again.csv");
    write_checkpoint(&again, &e, &header.config_hash).unwrap();
    let (h2, e2) = read_checkpoint(&again).unwrap();
    assert_eq!(header, h2);
    assert_eq!(e.time().to_bits(), e2.time().to_bits());
    for (p, q) in e.particles().iter().zip(e2.particles()) {
        let (f, g) = (p.frame(), q.frame());
        for (x, y) in [
            (f.a, g.a),
            (f.b, g.b),
            (f.c, g.c),
            (f.d, g.d),
            (p.r(), q.r()),
            (p.w(), q.w()),
        ] {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    assert_eq!(
        std::fs::read(tmp.path().join("checkpoint.csv")).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn run_directory_lists_its_files() {
    let tmp = tempfile::tempdir().unwrap();
    let mut report = run(&config(NONLINEAR), tmp.path(), &Serial).unwrap();
    for f in &report.files {
        assert!(tmp.path().join(f).is_file(), "{f} missing");
    }
    let stored: RunReport = read_json(&tmp.path().join("report.json")).unwrap();
    // wall time is not stored
    report.wall_time_s = 0.0;
    assert_eq!(stored, report);
    let (header, cols) = read_table(&tmp.path().join("phi_grid.csv")).unwrap();
    assert_eq!(header, ["x", "y", "phi"]);
    assert!(!cols[0].is_empty());
    let surface = read_surface(&tmp.path().join("surface.json")).unwrap();
    assert!(surface.relator_residual() < 1e-9);
}

#[test]
fn surface_description_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("surface.json");
    let s = build_bolza().unwrap();
    write_surface(&path, &s).unwrap();
    let back = read_surface(&path).unwrap();
    assert_eq!(s.description(), back.description());
}

#[test]
fn malformed_checkpoint_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.csv");
    std::fs::write(&path, "a,b,c,d,r,w\n1,0,0,1,1,1\n").unwrap();
    assert!(read_checkpoint(&path).is_err());
    std::fs::write(
        &path,
        "# {\"time\":0.0,\"seed\":1,\"config_hash\":\"x\",\"particles\":2}\na,b,c,d,r,w\n1,0,0,1,1,1\n",
    )
    .unwrap();
    assert!(read_checkpoint(&path).is_err());
}

#[test]
fn missing_column_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("s.csv");
    let s = TimeSeries::new(vec![0.0, 1.0], vec![2.0, 3.0])
        .unwrap()
        .with_label("c");
    write_series(&path, &s).unwrap();
    assert!(read_series(&path, Some("nope")).is_err());
    assert_eq!(read_series(&path, Some("c")).unwrap(), s);
}

proptest! {
    #[test]
    fn series_round_trip(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..40)) {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("s.csv");
        let times: Vec<f64> = (0..values.len()).map(|i| i as f64 * 0.1).collect();
        let s = TimeSeries::new(times, values).unwrap().with_label("value");
        write_series(&path, &s).unwrap();
        let back = read_series(&path, None).unwrap();
        for (a, b) in s.values.iter().zip(&back.values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(back.times, s.times);
    }

    #[test]
    fn number_format_round_trips(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
}
