use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use super::*;
use crate::dynamics::{hamiltonian, vector_field, CartesianState, HillParams};

fn oscillator(_: f64, y: &[f64], dy: &mut [f64]) -> Result<(), Error> {
    dy[0] = y[1];
    dy[1] = -y[0];
    Ok(())
}

#[test]
fn oscillator_full_period() {
    let sol = integrate(
        &oscillator,
        &[1.0, 0.0],
        (0.0, TAU),
        &Options::with_tolerances(1e-10, 1e-10),
        &[],
    )
    .unwrap();
    let end = sol.trajectory.last().unwrap();
    assert_eq!(end.t, TAU);
    assert!(
        (end.y[0] - 1.0).abs() < 1e-8 && end.y[1].abs() < 1e-8,
        "{:?}",
        end.y
    );
    assert_eq!(sol.status, Status::Completed);
}

#[test]
fn falling_zero_crossing() {
    let ev = [EventSpec::new(|_, y: &[f64]| y[0]).direction(Direction::Falling)];
    let sol = integrate(
        &oscillator,
        &[1.0, 0.0],
        (0.0, TAU),
        &Options::with_tolerances(1e-10, 1e-10),
        &ev,
    )
    .unwrap();
    // x = cos t falls through zero only at π/2.
    assert_eq!(sol.events.len(), 1);
    assert!((sol.events[0].t - FRAC_PI_2).abs() < 1e-9);
    let g = sol.events[0].y[0];
    assert!(g.abs() < 1e-12 * (1.0 + 1.0));

    let any = [EventSpec::new(|_, y: &[f64]| y[0])];
    let sol = integrate(
        &oscillator,
        &[1.0, 0.0],
        (0.0, TAU),
        &Options::with_tolerances(1e-10, 1e-10),
        &any,
    )
    .unwrap();
    let times: Vec<f64> = sol.events.iter().map(|e| e.t).collect();
    assert_eq!(times.len(), 2);
    assert!((times[1] - 1.5 * PI).abs() < 1e-9);
}

#[test]
fn terminal_event_stops_integration() {
    let ev = [EventSpec::new(|_, y: &[f64]| y[1] + 0.5).terminal()];
    let sol = integrate(
        &oscillator,
        &[1.0, 0.0],
        (0.0, 10.0),
        &Options::with_tolerances(1e-10, 1e-10),
        &ev,
    )
    .unwrap();
    assert_eq!(sol.status, Status::Terminated(0));
    let last = sol.trajectory.last().unwrap();
    // −sin t = −1/2
    assert!((last.t - PI / 6.0).abs() < 1e-9);
    assert_eq!(last.t, sol.events[0].t);
}

#[test]
fn dense_output_accuracy_and_endpoints() {
    let sol = integrate(
        &oscillator,
        &[1.0, 0.0],
        (0.0, TAU),
        &Options::with_tolerances(1e-10, 1e-10),
        &[],
    )
    .unwrap();
    let tr = &sol.trajectory;
    let y = tr.dense_eval(FRAC_PI_4).unwrap();
    assert!((y[0] - FRAC_PI_4.cos()).abs() < 1e-8 && (y[1] + FRAC_PI_4.sin()).abs() < 1e-8);
    for s in &tr.samples {
        assert_eq!(tr.dense_eval(s.t).unwrap(), s.y);
    }
    assert!(matches!(
        tr.dense_eval(7.0),
        Err(IntegratorError::OutOfSpan { .. })
    ));
    assert!(matches!(
        tr.dense_eval(-0.1),
        Err(IntegratorError::OutOfSpan { .. })
    ));
}

#[test]
fn dense_midpoints_match_reintegration() {
    let opts = Options::with_tolerances(1e-10, 1e-10);
    let sol = integrate(&oscillator, &[1.0, 0.3], (0.0, 5.0), &opts, &[]).unwrap();
    let tr = &sol.trajectory;
    for pair in tr.samples.windows(2) {
        let mid = 0.5 * (pair[0].t + pair[1].t);
        let dense = tr.dense_eval(mid).unwrap();
        let re = integrate(
            &oscillator,
            &pair[0].y,
            (pair[0].t, mid),
            &Options::with_tolerances(1e-13, 1e-13),
            &[],
        )
        .unwrap();
        let re = &re.trajectory.last().unwrap().y;
        for i in 0..2 {
            assert!((dense[i] - re[i]).abs() < 1e-7);
        }
    }
}

#[test]
fn fixed_step_order() {
    // Global error at fixed h and h/2 over [0, 2π].
    let err = |steps: usize| {
        let y =
            Dopri5::fixed_steps(&oscillator, 0.0, &[1.0, 0.0], TAU / steps as f64, steps).unwrap();
        (y[0] - 1.0).hypot(y[1])
    };
    let (coarse, fine) = (err(20), err(40));
    assert!(
        coarse / fine >= 2f64.powi(tableau::ORDER - 1),
        "{coarse} / {fine}"
    );
}

#[test]
fn tolerance_proportionality() {
    let err = |tol: f64| {
        let sol = integrate(
            &oscillator,
            &[1.0, 0.0],
            (0.0, 20.0),
            &Options::with_tolerances(tol, tol),
            &[],
        )
        .unwrap();
        let y = &sol.trajectory.last().unwrap().y;
        (y[0] - 20f64.cos()).hypot(y[1] + 20f64.sin())
    };
    assert!(err(1e-6) > err(1e-9) && err(1e-9) > err(1e-12));
}

#[test]
fn forward_then_backward_returns() {
    let opts = Options::with_tolerances(1e-10, 1e-10);
    let f = |_: f64, y: &[f64], dy: &mut [f64]| -> Result<(), Error> {
        dy[0] = y[1];
        dy[1] = -y[0] - 0.1 * y[0].powi(3);
        Ok(())
    };
    let fw = integrate(&f, &[0.5, 1.0], (0.0, 10.0), &opts, &[]).unwrap();
    let mid = fw.trajectory.last().unwrap().y.clone();
    let bw = integrate(&f, &mid, (10.0, 0.0), &opts, &[]).unwrap();
    let end = bw.trajectory.last().unwrap();
    assert_eq!(end.t, 0.0);
    assert!((end.y[0] - 0.5).abs() < 1e-7 && (end.y[1] - 1.0).abs() < 1e-7);
    let times: Vec<f64> = bw.trajectory.times().collect();
    assert!(times.windows(2).all(|w| w[1] < w[0]));
    // Dense output works backward too.
    let y = bw.trajectory.dense_eval(5.0).unwrap();
    let y_fw = fw.trajectory.dense_eval(5.0).unwrap();
    assert!((y[0] - y_fw[0]).abs() < 1e-7);
}

#[test]
fn deterministic() {
    let opts = Options::with_tolerances(1e-9, 1e-9);
    let a = integrate(&oscillator, &[0.2, 0.9], (0.0, 30.0), &opts, &[]).unwrap();
    let b = integrate(&oscillator, &[0.2, 0.9], (0.0, 30.0), &opts, &[]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn hill_energy_drift() {
    let p = HillParams::oblate(0.0, 0.0, 0.0).unwrap();
    let field = |_: f64, y: &[f64], dy: &mut [f64]| -> Result<(), Error> {
        let f = vector_field(
            &CartesianState::from_array([y[0], y[1], y[2], y[3]], 0.0),
            &p,
        )?;
        dy.copy_from_slice(&f);
        Ok(())
    };
    // Slightly eccentric bound orbit: inertial circular speed 1 at radius 1
    // corresponds to y = (0, 1) + rotation term.
    let y0 = [1.0, 0.0, 0.0, 1.1];
    let h0 = hamiltonian(&CartesianState::from_array(y0, 0.0), &p).unwrap();
    let sol = integrate(
        &field,
        &y0,
        (0.0, 20.0),
        &Options::with_tolerances(1e-12, 1e-12),
        &[],
    )
    .unwrap();
    for s in &sol.trajectory.samples {
        let st = CartesianState::from_array([s.y[0], s.y[1], s.y[2], s.y[3]], s.t);
        assert!((0.1..10.0).contains(&st.radius()));
        assert!((hamiltonian(&st, &p).unwrap() - h0).abs() < 1e-8);
    }
}

#[test]
fn field_errors_are_propagated_with_partial_result() {
    let f = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<(), Error> {
        if t > 1.0 {
            return Err(Error::SingularState("boom".into()));
        }
        dy[0] = y[0];
        Ok(())
    };
    let err = integrate(&f, &[1.0], (0.0, 2.0), &Options::default(), &[]).unwrap_err();
    assert!(matches!(err.error, IntegratorError::Field { .. }));
    assert!(!err.partial.trajectory.samples.is_empty());
}

#[test]
fn blow_up_reports_underflow() {
    // y' = y² from y = 1 blows up at t = 1.
    let f = |_: f64, y: &[f64], dy: &mut [f64]| -> Result<(), Error> {
        dy[0] = y[0] * y[0];
        Ok(())
    };
    let err = integrate(&f, &[1.0], (0.0, 2.0), &Options::default(), &[]).unwrap_err();
    assert!(
        matches!(err.error, IntegratorError::StepSizeUnderflow { .. }),
        "{:?}",
        err.error
    );
    let last = err.partial.trajectory.last().unwrap();
    assert!(last.t < 1.0 && last.t > 0.99);
}

#[test]
fn invalid_inputs() {
    assert!(integrate(
        &oscillator,
        &[1.0, 0.0],
        (0.0, 1.0),
        &Options::with_tolerances(0.0, 1e-9),
        &[]
    )
    .is_err());
    let ev = [EventSpec::new(|_, y: &[f64]| y[0]).refine_tol(0.0)];
    assert!(integrate(
        &oscillator,
        &[1.0, 0.0],
        (0.0, 1.0),
        &Options::default(),
        &ev
    )
    .is_err());
    let sol = integrate(
        &oscillator,
        &[1.0, 0.0],
        (1.0, 1.0),
        &Options::default(),
        &[],
    )
    .unwrap();
    assert_eq!(sol.trajectory.samples.len(), 1);
}
