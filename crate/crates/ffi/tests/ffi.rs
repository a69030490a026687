use std::ffi::CStr;
use std::ptr;

use boundreg_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::os::raw::c_char; 256];
    let len = unsafe { br_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(len > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

fn generate(model: u8, theta0: f64, n: usize, seed: u64) -> *mut BrDataset {
    let mut data = ptr::null_mut();
    let st = unsafe { br_dataset_generate(model, theta0, n, BrDesign::Fixed, seed, &mut data) };
    assert_eq!(st, BrStatus::Ok);
    assert!(!data.is_null());
    data
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(br_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn transforms_match_library() {
    let mut out = 0.0;
    for (theta, y) in [(0.5, 2.0), (0.0, 3.0), (2.0, -1.0), (-0.5, 1.0)] {
        assert_eq!(unsafe { br_yj_forward(theta, y, &mut out) }, BrStatus::Ok);
        assert_eq!(out, boundreg::yj_forward(theta, y).unwrap());
        let mut back = 0.0;
        assert_eq!(
            unsafe { br_yj_inverse(theta, out, &mut back) },
            BrStatus::Ok
        );
        assert!((back - y).abs() < 1e-12);
    }
    assert_eq!(
        unsafe { br_sas_forward(1.0, 0.0, 0.7, &mut out) },
        BrStatus::Ok
    );
    assert!((out - 0.7).abs() < 1e-15);
}

#[test]
fn errors_map_to_codes_and_messages() {
    let mut out = 0.0;
    assert_eq!(
        unsafe { br_yj_inverse(-0.5, 3.0, &mut out) },
        BrStatus::Range
    );
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { br_yj_forward(f64::NAN, 1.0, &mut out) },
        BrStatus::Domain
    );
    assert_eq!(
        unsafe { br_yj_forward(1.0, 1.0, ptr::null_mut()) },
        BrStatus::NullPointer
    );
    assert!(last_error().contains("out"));
    assert_eq!(
        unsafe { br_sas_forward(-1.0, 0.0, 1.0, &mut out) },
        BrStatus::Parameter
    );
    let mut data = ptr::null_mut();
    assert_eq!(
        unsafe { br_dataset_generate(9, 0.5, 10, BrDesign::Fixed, 1, &mut data) },
        BrStatus::InvalidArgument
    );
    assert!(data.is_null());
}

#[test]
fn gn_eval_example() {
    let r = [-1.0, -2.0];
    let xs = [0.25, 0.75];
    let mut out = 0.0;
    assert_eq!(
        unsafe { br_gn_eval(r.as_ptr(), xs.as_ptr(), 2, -1.5, 0.5, &mut out) },
        BrStatus::Ok
    );
    assert_eq!(out, -0.25);
    assert_eq!(
        unsafe { br_gn_eval(r.as_ptr(), xs.as_ptr(), 0, -1.5, 0.5, &mut out) },
        BrStatus::InvalidArgument
    );
}

#[test]
fn dataset_round_trip_sorts() {
    let xs = [0.8, 0.2, 0.5];
    let ys = [2.0, 1.0, 3.0];
    let mut data = ptr::null_mut();
    assert_eq!(
        unsafe { br_dataset_new(xs.as_ptr(), ys.as_ptr(), 3, BrDesign::Random, &mut data) },
        BrStatus::Ok
    );
    assert_eq!(unsafe { br_dataset_len(data) }, 3);
    let (mut ox, mut oy) = ([0.0; 3], [0.0; 3]);
    assert_eq!(
        unsafe { br_dataset_copy(data, ox.as_mut_ptr(), oy.as_mut_ptr(), 3) },
        BrStatus::Ok
    );
    assert_eq!(ox, [0.2, 0.5, 0.8]);
    assert_eq!(oy, [1.0, 3.0, 2.0]);
    assert_eq!(
        unsafe { br_dataset_copy(data, ox.as_mut_ptr(), oy.as_mut_ptr(), 2) },
        BrStatus::InvalidArgument
    );
    unsafe { br_dataset_free(data) };

    let bad_x = [1.5];
    let mut data = ptr::null_mut();
    assert_eq!(
        unsafe { br_dataset_new(bad_x.as_ptr(), ys.as_ptr(), 1, BrDesign::Random, &mut data) },
        BrStatus::InvalidArgument
    );
    assert!(data.is_null());
    assert_eq!(unsafe { br_dataset_len(ptr::null()) }, 0);
    unsafe { br_dataset_free(ptr::null_mut()) };
}

#[test]
fn boundary_fit_examples() {
    let xs = [0.2, 0.5, 0.8];
    let ys = [1.0, 3.0, 2.0];
    let mut data = ptr::null_mut();
    assert_eq!(
        unsafe { br_dataset_new(xs.as_ptr(), ys.as_ptr(), 3, BrDesign::Random, &mut data) },
        BrStatus::Ok
    );
    let mut fit = ptr::null_mut();
    assert_eq!(
        unsafe {
            br_boundary_fit(
                data,
                BrFamily::Identity,
                ptr::null(),
                0,
                0.15,
                0.05,
                &mut fit,
            )
        },
        BrStatus::Ok
    );
    let mut v = 0.0;
    assert_eq!(
        unsafe { br_boundary_eval_raw(fit, 0.1, &mut v) },
        BrStatus::Ok
    );
    assert_eq!(v, 1.0);
    let mut fallback = 0;
    assert_eq!(
        unsafe { br_boundary_eval_smooth(fit, 0.5, &mut v, &mut fallback) },
        BrStatus::Ok
    );
    assert_eq!((v, fallback), (3.0, 0));
    assert_eq!(
        unsafe { br_boundary_eval_smooth(fit, 0.35, &mut v, &mut fallback) },
        BrStatus::Ok
    );
    assert_eq!(fallback, 1);
    unsafe { br_boundary_free(fit) };

    let mut fit = ptr::null_mut();
    assert_eq!(
        unsafe {
            br_boundary_fit(
                data,
                BrFamily::Identity,
                ptr::null(),
                0,
                -1.0,
                0.05,
                &mut fit,
            )
        },
        BrStatus::InvalidArgument
    );
    unsafe { br_dataset_free(data) };
}

#[test]
fn estimate_matches_library() {
    let data = generate(1, 0.5, 100, 7);
    let mut est = BrEstimate {
        theta: [0.0; 2],
        dim: 0,
        criterion_value: 0.0,
        evaluations: 0,
    };
    let st = unsafe {
        br_estimate(
            data,
            BrFamily::YeoJohnson,
            BrCriterion::Tcm,
            0.0,
            0.0,
            ptr::null(),
            ptr::null(),
            1,
            100,
            0,
            &mut est,
        )
    };
    assert_eq!(st, BrStatus::Ok);
    assert_eq!(est.dim, 1);
    assert!(est.evaluations <= 103);

    let spec = boundreg::ScenarioSpec {
        model: boundreg::Model::ParabolaWeibull,
        theta0: 0.5,
        n: 100,
        design: boundreg::Design::Fixed,
        seed: 7,
    };
    let lib = boundreg::minimize_theta(
        &boundreg::make_dataset(&spec).unwrap(),
        boundreg::Family::YeoJohnson,
        &boundreg::Family::YeoJohnson.default_box(),
        boundreg::Bandwidths::rule(100, 2.0),
        &boundreg::CriterionSpec::new(boundreg::CriterionKind::Tcm),
        boundreg::SearchOptions::default(),
    )
    .unwrap();
    assert_eq!(est.theta[0], lib.theta_hat[0]);
    assert_eq!(est.criterion_value, lib.criterion_value);

    let (lo, hi) = ([0.7], [0.7]);
    let st = unsafe {
        br_estimate(
            data,
            BrFamily::YeoJohnson,
            BrCriterion::Tks,
            0.0,
            0.0,
            lo.as_ptr(),
            hi.as_ptr(),
            1,
            100,
            1,
            &mut est,
        )
    };
    assert_eq!(st, BrStatus::Ok);
    assert_eq!(est.theta[0], 0.7);

    let (lo, hi) = ([0.2, -1.0], [3.0, 1.0]);
    let st = unsafe {
        br_estimate(
            data,
            BrFamily::SinhArcsinh,
            BrCriterion::Tcmks,
            0.0,
            0.0,
            lo.as_ptr(),
            hi.as_ptr(),
            2,
            50,
            0,
            &mut est,
        )
    };
    assert_eq!(st, BrStatus::Ok);
    assert_eq!(est.dim, 2);
    assert!((0.2..=3.0).contains(&est.theta[0]) && (-1.0..=1.0).contains(&est.theta[1]));

    let st = unsafe {
        br_estimate(
            data,
            BrFamily::YeoJohnson,
            BrCriterion::Tcm,
            0.0,
            0.0,
            lo.as_ptr(),
            hi.as_ptr(),
            2,
            100,
            0,
            &mut est,
        )
    };
    assert_eq!(st, BrStatus::InvalidArgument);
    unsafe { br_dataset_free(data) };
}

#[test]
fn residuals_are_nonpositive_for_raw_fit() {
    let data = generate(2, 1.0, 80, 3);
    let mut r = vec![0.0; 80];
    let theta = [1.0];
    let st = unsafe {
        br_residuals(
            data,
            BrFamily::YeoJohnson,
            theta.as_ptr(),
            1,
            0.2,
            0.1,
            1,
            r.as_mut_ptr(),
            80,
        )
    };
    assert_eq!(st, BrStatus::Ok);
    assert!(r.iter().all(|&v| v <= 0.0));
    assert!(r.iter().any(|&v| v == 0.0));
    let st = unsafe {
        br_residuals(
            data,
            BrFamily::YeoJohnson,
            theta.as_ptr(),
            1,
            0.2,
            0.1,
            0,
            r.as_mut_ptr(),
            10,
        )
    };
    assert_eq!(st, BrStatus::InvalidArgument);
    unsafe { br_dataset_free(data) };
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/boundreg.h"))
            .unwrap();
    assert!(header.contains("#ifndef BOUNDREG_H"));
    for name in [
        "br_last_error",
        "br_version",
        "br_yj_forward",
        "br_yj_inverse",
        "br_sas_forward",
        "br_gn_eval",
        "br_dataset_new",
        "br_dataset_generate",
        "br_dataset_len",
        "br_dataset_copy",
        "br_dataset_free",
        "br_boundary_fit",
        "br_boundary_eval_raw",
        "br_boundary_eval_smooth",
        "br_boundary_free",
        "br_estimate",
        "br_residuals",
        "typedef struct BrDataset BrDataset",
        "typedef struct BrBoundary BrBoundary",
        "BR_STATUS_OK = 0",
        "BR_STATUS_PANIC = 99",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
