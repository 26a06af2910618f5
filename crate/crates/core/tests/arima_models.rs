mod common;

use common::*;
use tradecast_core::arima::{
    fit, forecast, ljung_box, ljung_box_residuals, percent_forecast_error, select_best, ArimaSpec,
};
use tradecast_core::arima::poly::is_stationary;
use tradecast_core::identify::{OrderCandidate, OrderSource};
use tradecast_core::nrca::DISPLAY_SCALE;
use tradecast_core::series::Series;
use tradecast_core::Error;

fn cand(p: usize, q: usize) -> OrderCandidate {
    OrderCandidate {
        p,
        q,
        source: OrderSource::Default,
        score: None,
    }
}

#[test]
fn drift_model_closed_form() {
    let y = train("6309");
    let m = fit(&y, ArimaSpec::new(0, 1, 0, true)).unwrap();
    let v = display("6309");
    let mu = (v[19] - v[0]) / 19.0;
    assert!((m.constant * DISPLAY_SCALE - mu).abs() < 1e-9);
    assert!((mu + 0.3653).abs() < 5e-5);
    let dev: f64 = v[..20].windows(2).map(|w| (w[1] - w[0] - mu).powi(2)).sum();
    let sd = (dev / 18.0).sqrt();
    assert!((m.sigma() * DISPLAY_SCALE - sd).abs() < 1e-9);
    assert!((sd - 2.250).abs() < 5e-4);
}

#[test]
fn constant_series_is_degenerate() {
    let y = Series::new(vec![5.0; 10], 2000).unwrap();
    assert!(matches!(fit(&y, ArimaSpec::new(0, 0, 0, true)), Err(Error::DegenerateVariance)));
}

#[test]
fn ar2_on_5502_converges_inside_the_unit_circle() {
    let m = fit(&train("5502"), ArimaSpec::new(2, 0, 0, true)).unwrap();
    assert!(m.converged);
    assert!(is_stationary(&m.ar));
}

#[test]
fn selection_over_reference_pools() {
    let m = select_best(&train("5201"), 1, &[cand(0, 0), cand(1, 0), cand(0, 1)], true).unwrap();
    assert_eq!(m.spec, ArimaSpec::new(0, 1, 0, true));
    let m = select_best(&train("5703"), 0, &[cand(1, 0), cand(0, 0), cand(2, 0)], true).unwrap();
    assert_eq!(m.spec, ArimaSpec::new(1, 0, 0, true));
}

#[test]
fn singleton_pool_returns_its_member() {
    let m = select_best(&train("5603"), 1, &[cand(1, 1)], true).unwrap();
    assert_eq!((m.spec.p, m.spec.q), (1, 1));
}

#[test]
fn ljung_box_on_reference_models() {
    let m = fit(&train("5201"), ArimaSpec::new(0, 1, 0, true)).unwrap();
    let d = ljung_box(&m, 6).unwrap();
    assert_eq!(d.df, 6);
    assert!((d.chi_square - 3.07).abs() < 0.02 && (d.p_value - 0.7997).abs() < 0.005);
    let m = fit(&train("5502"), ArimaSpec::new(2, 0, 0, true)).unwrap();
    assert_eq!(ljung_box(&m, 6).unwrap().df, 4);
}

#[test]
fn ljung_box_of_uncorrelated_residuals() {
    // A lone spike has zero autocorrelation at every positive lag.
    let mut e = vec![0.0; 12];
    e[4] = 1.0;
    let d = ljung_box_residuals(&e, 6, 0).unwrap();
    assert_eq!(d.chi_square, 0.0);
    assert!((d.p_value - 1.0).abs() < 1e-12);
}

#[test]
fn forecasts_of_5201() {
    let m = fit(&train("5201"), ArimaSpec::new(0, 1, 0, true)).unwrap();
    let f = forecast(&m, 3).unwrap();
    let pts = [184.45, 169.95, 155.46];
    let ses = [95.36, 134.85, 165.16];
    for (k, e) in f.entries.iter().enumerate() {
        assert_eq!(e.year, 2016 + k as i32);
        assert!((e.point * DISPLAY_SCALE - pts[k]).abs() < 0.01);
        assert!((e.stderr * DISPLAY_SCALE - ses[k]).abs() < 0.01);
    }
    let e = &f.entries[0];
    assert!((e.lo95 * DISPLAY_SCALE + 2.45).abs() < 0.01 && (e.hi95 * DISPLAY_SCALE - 371.34).abs() < 0.01);
}

#[test]
fn forecasts_of_6309_grow_with_sqrt_h() {
    let m = fit(&train("6309"), ArimaSpec::new(0, 1, 0, true)).unwrap();
    let se: Vec<f64> = forecast(&m, 3).unwrap().entries.iter().map(|e| e.stderr * DISPLAY_SCALE).collect();
    assert!((se[0] - 2.250).abs() < 5e-4 && (se[1] - 3.18).abs() < 5e-3 && (se[2] - 3.90).abs() < 5e-3);
}

#[test]
fn random_walk_forecast_repeats_last_value() {
    let y = train("5603");
    let m = fit(&y, ArimaSpec::new(0, 1, 0, false)).unwrap();
    for e in forecast(&m, 4).unwrap().entries {
        assert_eq!(e.point, y.last());
    }
}

#[test]
fn percent_error_examples() {
    assert!((percent_forecast_error(239.327, 184.445).unwrap() - 22.93).abs() < 5e-3);
    assert!((percent_forecast_error(50.073, 48.808).unwrap() - 2.53).abs() < 5e-3);
    assert_eq!(percent_forecast_error(7.0, 7.0).unwrap(), 0.0);
}
