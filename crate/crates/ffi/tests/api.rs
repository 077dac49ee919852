use std::ffi::{c_void, CStr};
use std::ptr;

use susplab_ffi::*;

fn last_error() -> String {
    let p = sl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn default_params_match_core() {
    let mut p = std::mem::MaybeUninit::<SlPlantParams>::uninit();
    assert_eq!(unsafe { sl_plant_params_default(p.as_mut_ptr()) }, SlStatus::Ok);
    let p = unsafe { p.assume_init() };
    let d = susplab::dynamics::SuspensionParams::default();
    assert_eq!((p.m_s, p.m_u, p.k11, p.f_max), (d.m_s, d.m_u, d.k11, d.f_max));
}

#[test]
fn null_pointers_are_reported() {
    assert_eq!(
        unsafe { sl_plant_params_default(ptr::null_mut()) },
        SlStatus::NullPointer
    );
    assert!(last_error().contains("null"));
    let mut out = 0.0;
    assert_eq!(
        unsafe { sl_fuzzy_infer(ptr::null(), 0.0, 0.0, 0.0, &mut out) },
        SlStatus::NullPointer
    );
    assert_eq!(unsafe { sl_road_len(ptr::null()) }, 0);
    unsafe {
        sl_fuzzy_free(ptr::null_mut());
        sl_road_free(ptr::null_mut());
        sl_timeseries_free(ptr::null_mut());
    }
}

#[test]
fn fuzzy_matches_core_and_clears_error() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { sl_fuzzy_new(350.0, 0.0, &mut h) }, SlStatus::InvalidParameter);
    assert!(last_error().contains("f_min"));
    assert_eq!(unsafe { sl_fuzzy_new(0.0, 350.0, &mut h) }, SlStatus::Ok);
    assert!(sl_last_error().is_null());
    let core = susplab::fuzzy::FuzzySystem::default().with_output_clamp(0.0, 350.0);
    for &(v, a, d) in &[(0.0, 0.0, 0.0), (0.3, -4.0, 0.01), (-1.0, 9.0, -0.05)] {
        let mut out = f64::NAN;
        assert_eq!(unsafe { sl_fuzzy_infer(h, v, a, d, &mut out) }, SlStatus::Ok);
        assert_eq!(out, core.infer(v, a, d));
    }
    let mut out = 0.0;
    assert_eq!(
        unsafe { sl_fuzzy_infer(h, f64::NAN, 0.0, 0.0, &mut out) },
        SlStatus::InvalidParameter
    );
    unsafe { sl_fuzzy_free(h) };
}

#[test]
fn road_round_trip_and_simulation() {
    let mut road = ptr::null_mut();
    assert_eq!(unsafe { sl_road_generate(3, 20.0, 1e-3, 2.0, &mut road) }, SlStatus::Ok);
    let n = unsafe { sl_road_len(road) };
    assert_eq!(n, 2001);
    let mut buf = vec![0.0; n + 5];
    let mut written = 0;
    assert_eq!(
        unsafe { sl_road_samples(road, buf.as_mut_ptr(), buf.len(), &mut written) },
        SlStatus::Ok
    );
    assert_eq!(written, n);
    let spec = susplab::road::RoadSpec {
        seed: 3,
        ..Default::default()
    };
    let core = susplab::road::generate_profile(&spec, 20.0, 1e-3, 2.0).unwrap();
    assert_eq!(&buf[..n], core.samples.as_slice());

    let mut ts = ptr::null_mut();
    let st = unsafe {
        sl_simulate(
            ptr::null(),
            ptr::null(),
            road,
            SlMode::SemiActiveFuzzyPid,
            2e4,
            2e4,
            100.0,
            1e-3,
            &mut ts,
        )
    };
    assert_eq!(st, SlStatus::Ok);
    assert_eq!(unsafe { sl_timeseries_len(ts) }, n);
    assert_eq!(sl_timeseries_channel_count(), 10);
    for i in 0..10 {
        let name = unsafe { CStr::from_ptr(sl_timeseries_channel_name(i)) }
            .to_str()
            .unwrap();
        assert_eq!(name, susplab::sim::TimeSeries::COLUMNS[i]);
    }
    assert!(sl_timeseries_channel_name(10).is_null());
    let mut fd = vec![0.0; n];
    assert_eq!(
        unsafe { sl_timeseries_channel(ts, 8, fd.as_mut_ptr(), n, ptr::null_mut()) },
        SlStatus::Ok
    );
    assert!(fd.iter().all(|f| (0.0..=350.0).contains(f)));
    assert_eq!(
        unsafe { sl_timeseries_channel(ts, 10, fd.as_mut_ptr(), n, ptr::null_mut()) },
        SlStatus::OutOfRange
    );
    let mut m = SlMetrics::default();
    assert_eq!(unsafe { sl_timeseries_metrics(ts, 0.5, &mut m) }, SlStatus::Ok);
    assert!(m.rms_accel > 0.0 && m.peak_accel >= m.rms_accel);
    assert_eq!(
        unsafe { sl_timeseries_metrics(ts, 5.0, &mut m) },
        SlStatus::InvalidParameter
    );
    unsafe { sl_timeseries_free(ts) };

    let mut ts = ptr::null_mut();
    let st = unsafe {
        sl_simulate(
            ptr::null(),
            ptr::null(),
            road,
            SlMode::SemiActiveFuzzyPid,
            0.0,
            1.0,
            1.0,
            1e-3,
            &mut ts,
        )
    };
    assert_eq!(st, SlStatus::InvalidParameter);
    assert!(ts.is_null());
    unsafe { sl_road_free(road) };
}

#[test]
fn coarse_step_diverges_as_numeric() {
    let samples = [0.0; 101];
    let mut road = ptr::null_mut();
    assert_eq!(
        unsafe { sl_road_from_samples(0.1, samples.as_ptr(), samples.len(), 20.0, &mut road) },
        SlStatus::Ok
    );
    let mut ts = ptr::null_mut();
    let st = unsafe {
        sl_simulate(
            ptr::null(),
            ptr::null(),
            road,
            SlMode::SemiActiveZero,
            1.0,
            1.0,
            1.0,
            0.1,
            &mut ts,
        )
    };
    assert_eq!(st, SlStatus::Numeric, "{}", last_error());
    assert!(last_error().contains("diverge"));
    assert!(ts.is_null());
    unsafe { sl_road_free(road) };
}

unsafe extern "C" fn sphere(user: *mut c_void, kp: f64, ki: f64, kd: f64) -> f64 {
    unsafe { *(user as *mut usize) += 1 };
    (kp - 0.5).powi(2) + (ki - 1.0).powi(2) + (kd - 1.5).powi(2)
}

#[test]
fn cfoa_drives_c_callback() {
    let mut calls = 0usize;
    let mut g = [0.0; 3];
    let mut score = f64::NAN;
    let st = unsafe {
        sl_cfoa_minimize(
            Some(sphere),
            &mut calls as *mut usize as *mut c_void,
            20,
            60,
            1,
            g.as_mut_ptr(),
            &mut score,
        )
    };
    assert_eq!(st, SlStatus::Ok);
    assert_eq!(calls, 20 * 61);
    assert!(score < 1e-2, "score {score}, gains {g:?}");
    assert_eq!(score, sphere_at(g));

    let st = unsafe { sl_cfoa_minimize(None, ptr::null_mut(), 20, 5, 1, g.as_mut_ptr(), ptr::null_mut()) };
    assert_eq!(st, SlStatus::NullPointer);
    let st = unsafe {
        sl_cfoa_minimize(
            Some(sphere),
            &mut calls as *mut usize as *mut c_void,
            1,
            5,
            1,
            g.as_mut_ptr(),
            ptr::null_mut(),
        )
    };
    assert_eq!(st, SlStatus::InvalidParameter);
}

fn sphere_at(g: [f64; 3]) -> f64 {
    let mut n = 0usize;
    unsafe { sphere(&mut n as *mut usize as *mut c_void, g[0], g[1], g[2]) }
}
