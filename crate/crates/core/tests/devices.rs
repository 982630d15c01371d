use proptest::prelude::*;

use spinmca::interface::{
    calibrate, evaluate, saturation_current, trace_cycle, validate_schedule, ClockSchedule,
    IMParams, Phase,
};
use spinmca::memristor::{
    calibrate_switching, conductance, memristance, program_to_level, read_current, step_state,
    MemristorParams, MemristorState, WriteController, LEVELS,
};
use spinmca::spintronic::{
    conductance as dw_conductance, drive, read_dw_current, reset, DWParams, DWState,
};
use spinmca::Error;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Integrate a constant voltage in steps of `dt` until a rail is hit.
fn switch_time(p: &MemristorParams, from: MemristorState, v: f64, dt: f64) -> f64 {
    let target = if v > 0.0 { p.w_off } else { p.w_on };
    let mut s = from;
    let mut t = 0.0;
    while (s.w() - target).abs() > 1e-9 * p.length {
        s = step_state(&s, v, dt, p).unwrap();
        t += dt;
        assert!(t < 1e-6, "no switch at {v} V");
    }
    t
}

#[test]
fn memristor_resistance_oracles() {
    let p = MemristorParams::default();
    assert!(rel(memristance(&MemristorState::on(&p), &p), 5e3) < 1e-12);
    assert!(rel(memristance(&MemristorState::off(&p), &p), 5e6) < 1e-12);
    let mid = MemristorState::new(0.5 * (p.w_on + p.w_off), &p).unwrap();
    assert!(rel(memristance(&mid, &p), 2.5025e6) < 1e-12);
}

#[test]
fn memristor_dead_zone_and_zero_duration() {
    let p = MemristorParams::default();
    let s = MemristorState::new(2e-9, &p).unwrap();
    assert_eq!(step_state(&s, 0.2, 1e-3, &p).unwrap(), s);
    assert_eq!(step_state(&s, -0.7, 1e-3, &p).unwrap(), s);
    assert_eq!(step_state(&s, 1.0, 0.0, &p).unwrap(), s);
}

#[test]
fn memristor_switches_in_100ns_both_ways() {
    let p = MemristorParams::default();
    let t = switch_time(&p, MemristorState::on(&p), 1.0, 1e-10);
    assert!(rel(t, 100e-9) < 0.01, "{t}");
    let t = switch_time(&p, MemristorState::off(&p), -1.0, 1e-10);
    assert!(rel(t, 100e-9) < 0.01, "{t}");
    assert!(switch_time(&p, MemristorState::on(&p), 0.9, 1e-10) > 100e-9);
}

#[test]
fn memristor_integration_converges() {
    let p = MemristorParams::default();
    let run = |dt: f64| {
        let mut s = MemristorState::on(&p);
        for _ in 0..(80e-9 / dt).round() as usize {
            s = step_state(&s, 1.0, dt, &p).unwrap();
        }
        s.w()
    };
    let (coarse, fine) = (run(1e-9), run(0.5e-9));
    assert!(rel(coarse, fine) < 1e-3);
}

#[test]
fn calibration_rejects_dead_zone_voltage() {
    let p = MemristorParams::uncalibrated();
    assert!(matches!(
        calibrate_switching(&p, 100e-9, 0.5),
        Err(Error::Calibration(_))
    ));
    assert!(calibrate_switching(&p, 0.0, 1.0).is_err());
}

#[test]
fn ohmic_reads() {
    let p = MemristorParams::default();
    let on = MemristorState::on(&p);
    let off = MemristorState::off(&p);
    assert_eq!(read_current(&on, 0.0, &p).unwrap(), 0.0);
    assert!(rel(read_current(&on, 0.5, &p).unwrap(), 100e-6) < 1e-12);
    assert!(rel(read_current(&off, 0.5, &p).unwrap(), 0.1e-6) < 1e-12);
    assert!(matches!(
        read_current(&on, 0.8, &p),
        Err(Error::ReadDisturb { .. })
    ));
}

#[test]
fn program_and_verify() {
    let p = MemristorParams::default();
    let ctrl = WriteController::default();
    let off = MemristorState::off(&p);
    // Already at level 0.
    let (s, pulses) = program_to_level(&off, 0, &ctrl, &p).unwrap();
    assert_eq!((s, pulses), (off, 0));
    let (s, pulses) = program_to_level(&off, 31, &ctrl, &p).unwrap();
    assert!(pulses <= 100);
    assert!(
        (conductance(&s, &p) - p.level_conductance(31).unwrap()).abs() < 0.5 * p.level_spacing()
    );
    assert!(program_to_level(&off, 32, &ctrl, &p).is_err());
    for level in 0..=LEVELS {
        let (s, _) = program_to_level(&MemristorState::on(&p), level, &ctrl, &p).unwrap();
        assert_eq!(p.nearest_level(conductance(&s, &p)), level);
    }
}

#[test]
fn starved_controller_reports_programming_error() {
    let p = MemristorParams::default();
    let ctrl = WriteController {
        max_pulses: 2,
        ..Default::default()
    };
    let err = program_to_level(&MemristorState::off(&p), 17, &ctrl, &p).unwrap_err();
    assert!(matches!(
        err,
        Error::Programming {
            level: 17,
            pulses: 2
        }
    ));
}

#[test]
fn domain_wall_oracles() {
    let p = DWParams::default();
    let edge = DWState::new(0.0, &p).unwrap();
    assert_eq!(reset(&edge, &p).x(), 50e-9);
    let centred = reset(&edge, &p);
    assert_eq!(reset(&centred, &p), centred);
    assert!(rel(read_dw_current(&centred, &p), 7.5e-6) < 1e-12);
    assert!(rel(read_dw_current(&edge, &p), 5e-6) < 1e-12);
    let far = DWState::new(100e-9, &p).unwrap();
    assert!(rel(read_dw_current(&far, &p), 10e-6) < 1e-12);
    assert!(rel(dw_conductance(&far, &p), 1e-4) < 1e-12);

    assert!(rel(drive(&edge, 35e-6, 2e-9, &p).unwrap().x(), 100e-9) < 1e-9);
    assert_eq!(drive(&centred, 0.0, 1e-6, &p).unwrap(), centred);
    assert_eq!(drive(&centred, 35e-6, 2e-9, &p).unwrap().x(), 100e-9);
    assert_eq!(drive(&centred, -35e-6, 2e-9, &p).unwrap().x(), 0.0);
}

#[test]
fn im_defaults_and_calibration() {
    let im = IMParams::default();
    assert!(rel(saturation_current(&im), 17.5e-6) < 1e-12);
    let mut long = im;
    long.schedule.t_write *= 2.0;
    assert!(rel(saturation_current(&long), 8.75e-6) < 1e-12);

    let cal = calibrate(120e-6, 1e-6, &im).unwrap();
    assert!(rel(saturation_current(&cal), 120e-6) < 1e-12);
    assert!(rel(evaluate(120e-6, 0.0, &cal).unwrap(), 4e-6) < 1e-9);
    assert!(rel(evaluate(60e-6, 0.0, &cal).unwrap(), 2e-6) < 1e-9);
    assert!(calibrate(0.0, 1e-6, &im).is_err());
}

#[test]
fn im_saturates_at_the_edge_current() {
    let im = IMParams::default();
    let full = im.g_out * (im.dw.i_low() - im.i_0());
    for d in [17.5e-6, 20e-6, 80e-6] {
        assert!(rel(evaluate(d, 0.0, &im).unwrap(), full) < 1e-12);
        assert!(rel(-evaluate(0.0, d, &im).unwrap(), full) < 1e-12);
    }
}

#[test]
fn schedule_checks() {
    let r = validate_schedule(&ClockSchedule::default()).unwrap();
    assert!(rel(r.period, 5e-9) < 1e-12);
    assert!(r.warnings.is_empty());
    let equal = ClockSchedule {
        t_reset: 1e-9,
        t_write: 1e-9,
        t_read: 1e-9,
    };
    assert_eq!(validate_schedule(&equal).unwrap().warnings.len(), 1);
    let broken = ClockSchedule {
        t_write: 0.0,
        ..Default::default()
    };
    assert!(matches!(
        validate_schedule(&broken),
        Err(Error::Schedule(_))
    ));
}

#[test]
fn trace_has_three_phases_and_matches_evaluate() {
    let im = IMParams::default();
    let rows = trace_cycle(12e-6, 3e-6, &im, 0.1e-9).unwrap();
    assert_eq!(rows.len(), 50);
    assert!(rows.windows(2).all(|w| w[1].time > w[0].time));
    assert_eq!(rows[0].phase, Phase::Reset);
    let last = rows.last().unwrap();
    assert_eq!(last.phase, Phase::Read);
    assert!((last.output - evaluate(12e-6, 3e-6, &im).unwrap()).abs() < 1e-15);
    assert!(trace_cycle(-1.0, 0.0, &im, 1e-10).is_err());
}

proptest! {
    #[test]
    fn memristor_state_contained(pulses in prop::collection::vec((-2.0f64..2.0, 0.0f64..50e-9), 1..30)) {
        let p = MemristorParams::default();
        let mut s = MemristorState::off(&p);
        for (v, dt) in pulses {
            s = step_state(&s, v, dt, &p).unwrap();
            prop_assert!(s.w() >= p.w_on && s.w() <= p.w_off);
        }
    }

    #[test]
    fn wall_drive_symmetric_about_centre(i in 0.0f64..17e-6, t in 0.0f64..2e-9) {
        let p = DWParams::default();
        let c = DWState::centered(&p);
        let up = drive(&c, i, t, &p).unwrap().x();
        let down = drive(&c, -i, t, &p).unwrap().x();
        prop_assert!((up + down - p.strip_length).abs() < 1e-20);
    }

    #[test]
    fn im_linear_and_stateless(a in 0.0f64..40e-6, frac in -0.9f64..0.9) {
        let im = IMParams::default();
        let sat = saturation_current(&im);
        let delta = frac * sat;
        let (plus, minus) = if delta >= 0.0 { (a + delta, a) } else { (a, a - delta) };
        let out = evaluate(plus, minus, &im).unwrap();
        prop_assert!((out - im.linear_gain() * delta).abs() <= 1e-6 * im.linear_gain() * sat);
        prop_assert_eq!(out, evaluate(plus, minus, &im).unwrap());
    }
}
