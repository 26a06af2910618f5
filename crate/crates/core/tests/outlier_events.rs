mod common;

use common::*;
use tradecast_core::arima::{fit, ArimaSpec};
use tradecast_core::outliers::{classify_max, detect, OutlierKind};
use tradecast_core::series::Series;
use tradecast_core::sim::simulate_arma;

#[test]
fn reference_models_flag_the_tabulated_years() {
    let cases: [(&str, ArimaSpec, Option<(OutlierKind, i32)>); 6] = [
        ("5201", ArimaSpec::new(0, 1, 0, true), Some((OutlierKind::AO, 1999))),
        ("5502", ArimaSpec::new(2, 0, 0, true), Some((OutlierKind::LS, 1997))),
        ("5603", ArimaSpec::new(0, 1, 0, true), Some((OutlierKind::LS, 2007))),
        ("5205", ArimaSpec::new(0, 1, 0, true), Some((OutlierKind::AO, 2011))),
        ("5703", ArimaSpec::new(1, 0, 0, true), Some((OutlierKind::LS, 1997))),
        ("6309", ArimaSpec::new(0, 1, 0, true), None),
    ];
    for (code, spec, want) in cases {
        let y = train(code);
        let m = fit(&y, spec).unwrap();
        let got: Vec<_> = detect(&m, &y, 2.5, 1).unwrap().iter().map(|e| (e.kind, e.year)).collect();
        assert_eq!(got, want.into_iter().collect::<Vec<_>>(), "{code}");
    }
}

fn clean_alarms(critical: f64, seeds: std::ops::Range<u64>) -> usize {
    seeds
        .filter(|&seed| {
            let y = simulate_arma(&[0.5], &[], 0.0, 1.0, 100, seed).unwrap();
            let m = fit(&y, ArimaSpec::new(1, 0, 0, true)).unwrap();
            !detect(&m, &y, critical, 5).unwrap().is_empty()
        })
        .count()
}

#[test]
fn clean_ar1_false_alarms_shrink_with_the_critical_value() {
    // The max over ~2n statistics exceeds 3 fairly often; a Bonferroni-sized
    // critical value keeps clean series quiet.
    let at3 = clean_alarms(3.0, 0..100);
    let at4 = clean_alarms(4.0, 0..100);
    assert!(at3 < 50, "{at3}/100");
    assert!(at4 <= at3 && at4 <= 5, "{at4}/100");
}

#[test]
fn level_shift_found_across_critical_values() {
    let clean = simulate_arma(&[0.5], &[], 0.0, 1.0, 100, 8).unwrap();
    let v: Vec<f64> = clean.values().iter().enumerate().map(|(t, x)| x + if t >= 40 { 8.0 } else { 0.0 }).collect();
    let y = Series::new(v, clean.start_year()).unwrap();
    let m = fit(&y, ArimaSpec::new(1, 0, 0, true)).unwrap();
    for critical in [2.5, 3.0, 3.5, 4.0] {
        let ev = detect(&m, &y, critical, 1).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!((ev[0].kind, ev[0].year - y.start_year()), (OutlierKind::LS, 40), "critical {critical}");
        assert!(ev[0].t_stat.abs() >= critical);
    }
}

#[test]
fn injected_pulse_is_an_additive_outlier() {
    let clean = simulate_arma(&[0.5], &[], 0.0, 1.0, 100, 21).unwrap();
    let mut v = clean.values().to_vec();
    v[50] += 8.0;
    let y = Series::new(v, clean.start_year()).unwrap();
    let m = fit(&y, ArimaSpec::new(1, 0, 0, true)).unwrap();
    let ev = detect(&m, &y, 3.0, 5).unwrap();
    assert_eq!(ev.len(), 1, "{ev:?}");
    assert_eq!(ev[0].kind, OutlierKind::AO);
    assert_eq!(ev[0].year - y.start_year(), 50);
    assert!(ev[0].t_stat.abs() > 3.0);
}

#[test]
fn classify_examples() {
    assert_eq!(classify_max(&[1.0, 4.0, 2.0], &[1.0, 1.0, 1.0]).unwrap(), (OutlierKind::AO, 1, 4.0));
    assert_eq!(classify_max(&[3.0, 0.0], &[3.0, 0.0]).unwrap(), (OutlierKind::LS, 0, 3.0));
    assert_eq!(classify_max(&[0.0], &[0.0]).unwrap(), (OutlierKind::AO, 0, 0.0));
}
