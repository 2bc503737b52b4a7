use std::fs;

use qdlab_core::experiments::data::{block_data, block_plan, evolved_norm};
use qdlab_core::experiments::{
    emit, run, Campaign, Cell, DataProfile, ExperimentConfig, OutputFormat, Report, Verdict,
};
use qdlab_core::norms::{sobolev_norm, Exponent};
use serde_json::Value;

/// Defaults shrunk to run in well under a second each.
fn small(campaign: Campaign) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_campaign(campaign);
    match campaign {
        Campaign::Decay => {
            cfg.t_max = 1e3;
            cfg.t_points = 8;
            cfg.n_x = 64;
        }
        Campaign::EpsGain | Campaign::Cor3d | Campaign::TwoDInterp => {
            cfg.n = 16;
            cfg.box_wavelengths = 2.0;
            cfg.eps_values = vec![1.0, 0.5, 0.25];
            cfg.time_samples = 17;
        }
        Campaign::GpeDispersion => {
            cfg.n = 64;
            cfg.modes = vec![1.0];
        }
        Campaign::BoussinesqCheck => {}
        Campaign::BoundCheck => {
            cfg.h_points = 9;
            cfg.t_points = 1;
            cfg.eps_values = vec![1.0, 0.5];
            cfg.n_x = 64;
        }
    }
    cfg
}

fn run_small(campaign: Campaign) -> Report {
    run(&small(campaign)).unwrap_or_else(|e| panic!("{campaign}: {e}"))
}

#[test]
fn every_campaign_emits_rectangular_csv() {
    for campaign in Campaign::ALL {
        let report = run_small(campaign);
        assert!(!report.rows.is_empty(), "{campaign}");
        assert!(!report.assertions.is_empty(), "{campaign}");
        let text = emit::to_csv(&report).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader.headers().unwrap().clone();
        assert_eq!(header.len(), report.columns.len(), "{campaign}");
        let mut rows = 0;
        for record in reader.records() {
            assert_eq!(record.unwrap().len(), header.len(), "{campaign}");
            rows += 1;
        }
        assert_eq!(rows, report.rows.len(), "{campaign}");
    }
}

#[test]
fn emitted_files_are_byte_deterministic() {
    for campaign in [Campaign::BoussinesqCheck, Campaign::EpsGain, Campaign::Decay] {
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let a = tempfile::tempdir().unwrap();
            let b = tempfile::tempdir().unwrap();
            let pa = emit(&run_small(campaign), a.path(), format).unwrap();
            let pb = emit(&run_small(campaign), b.path(), format).unwrap();
            assert_eq!(pa.len(), pb.len());
            for (x, y) in pa.iter().zip(&pb) {
                assert_eq!(x.file_name(), y.file_name());
                assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
            }
        }
    }
}

#[test]
fn json_output_round_trips_table_and_config() {
    let report = run_small(Campaign::EpsGain);
    let dir = tempfile::tempdir().unwrap();
    let paths = emit(&report, dir.path(), OutputFormat::Json).unwrap();
    let v: Value = serde_json::from_str(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
    assert_eq!(v["campaign"], "eps_gain");
    assert_eq!(v["verdict"], report.verdict().as_str());
    let columns: Vec<&str> = v["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(columns, report.columns);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), report.rows.len());
    for (json_row, row) in rows.iter().zip(&report.rows) {
        for (cell, original) in json_row.as_array().unwrap().iter().zip(row) {
            match original {
                Cell::Float(x) => assert_eq!(cell.as_f64().unwrap(), *x),
                Cell::Int(i) => assert_eq!(cell.as_i64().unwrap(), *i),
                Cell::Text(s) => assert_eq!(cell.as_str().unwrap(), s),
                Cell::Bool(b) => assert_eq!(cell.as_bool().unwrap(), *b),
            }
        }
    }
    let config = toml::to_string(&v["summary"]["config"]).unwrap();
    let parsed = ExperimentConfig::from_toml_str(&config).unwrap();
    assert_eq!(parsed.n, 16);
    assert_eq!(parsed.eps_values, vec![1.0, 0.5, 0.25]);
}

#[test]
fn failing_tolerance_flips_verdict() {
    let mut cfg = small(Campaign::BoussinesqCheck);
    assert_eq!(run(&cfg).unwrap().verdict(), Verdict::Pass);
    cfg.identity_tolerance = 1e-30;
    let report = run(&cfg).unwrap();
    assert_eq!(report.verdict(), Verdict::Fail);
    assert_eq!(report.exit_code(), 1);
}

/// Doubling the block while halving the box and `eps` is an exact rescaling
/// of the lattice problem: space shrinks by 2 and time by 4.
#[test]
fn block_doubling_is_an_exact_rescaling() {
    let d = 3;
    let mut cfg = small(Campaign::EpsGain);
    cfg.n = 16;
    let eps = 0.25;
    let wide = block_plan(&cfg, 2.0 * eps, 1.0).unwrap();
    let narrow = block_plan(&cfg, eps, 2.0).unwrap();
    assert!((wide.grid.box_length() - 2.0 * narrow.grid.box_length()).abs() < 1e-12);
    assert!((wide.horizon - 4.0 * narrow.horizon).abs() < 1e-9 * wide.horizon);

    let fw = block_data(wide.grid, &wide.cutoff, DataProfile::Coherent, 5);
    let fn_ = block_data(narrow.grid, &narrow.cutoff, DataProfile::Coherent, 5);
    let lw = sobolev_norm(&fw, 0.0).unwrap();
    let ln = sobolev_norm(&fn_, 0.0).unwrap();
    for (q, r) in [(2, 6), (4, 4), (8, 3)] {
        let (qe, re) = (Exponent::int(q), Exponent::int(r));
        let nw = evolved_norm(&fw, &wide.params, qe, re, wide.horizon, 17).unwrap() / lw;
        let nn = evolved_norm(&fn_, &narrow.params, qe, re, narrow.horizon, 17).unwrap() / ln;
        let expected = 2f64.powf(d as f64 / 2.0 - d as f64 / r as f64 - 2.0 / q as f64);
        assert!(
            (nn / nw / expected - 1.0).abs() < 1e-10,
            "(q, r) = ({q}, {r}): {} against {expected}",
            nn / nw
        );
    }
}

#[test]
fn two_d_interpolation_slopes_are_exact() {
    let report = run_small(Campaign::TwoDInterp);
    assert_eq!(report.verdict(), Verdict::Pass, "{:?}", report.assertions);
}
