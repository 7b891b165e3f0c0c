use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use hyperlat_ffi::*;

fn quotient(name: &str) -> CString {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name);
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn last_error() -> String {
    let p = hyperlat_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn lattice_code_and_decoder_round_trip() {
    unsafe {
        let mut lat = ptr::null_mut();
        assert_eq!(
            hyperlat_lattice_build(8, 3, quotient("8_3_n2.json").as_ptr(), &mut lat),
            HyperlatStatus::Ok
        );
        let (mut v, mut e, mut f, mut cells, mut h) = (0, 0, 0, 0, 0);
        assert_eq!(
            hyperlat_lattice_counts(lat, &mut v, &mut e, &mut f, &mut cells, &mut h),
            HyperlatStatus::Ok
        );
        assert_eq!((v, e, f, cells, h), (32, 48, 12, 2, 3));

        let mut edges = vec![0usize; 2 * e];
        assert_eq!(
            hyperlat_lattice_edges(lat, edges.as_mut_ptr(), edges.len()),
            HyperlatStatus::Ok
        );
        assert!(edges.iter().all(|&x| x < v));
        assert_eq!(
            hyperlat_lattice_edges(lat, edges.as_mut_ptr(), 3),
            HyperlatStatus::InvalidArgument
        );

        let mut code = ptr::null_mut();
        assert_eq!(hyperlat_code_analyze(lat, &mut code), HyperlatStatus::Ok);
        hyperlat_lattice_free(lat);
        let (mut n, mut k, mut dz, mut dx) = (0, 0, 0, 0);
        assert_eq!(
            hyperlat_code_parameters(code, &mut n, &mut k, &mut dz, &mut dx),
            HyperlatStatus::Ok
        );
        assert_eq!((n, k, dz, dx), (48, 6, 6, 2));

        // Flip edge 0: its two endpoints light up and the decoder flips it back.
        let (a, b) = (edges[0], edges[1]);
        let mut corr = vec![0u8; n];
        let mut w = 0;
        assert_eq!(
            hyperlat_code_decode(code, [a, b].as_ptr(), 2, corr.as_mut_ptr(), n, &mut w),
            HyperlatStatus::Ok
        );
        assert_eq!(w, 1);
        assert_eq!(corr.iter().map(|&x| x as usize).sum::<usize>(), 1);
        assert_eq!(corr[0], 1);

        assert_eq!(
            hyperlat_code_decode(code, [a].as_ptr(), 1, corr.as_mut_ptr(), n, ptr::null_mut()),
            HyperlatStatus::RuntimeFailure
        );
        assert!(last_error().starts_with("OddDefectCount"));
        assert_eq!(
            hyperlat_code_decode(code, [v].as_ptr(), 1, corr.as_mut_ptr(), n, ptr::null_mut()),
            HyperlatStatus::InvalidArgument
        );
        assert_eq!(
            hyperlat_code_decode(code, ptr::null(), 0, corr.as_mut_ptr(), n, &mut w),
            HyperlatStatus::Ok
        );
        assert_eq!(w, 0);
        hyperlat_code_free(code);
    }
}

#[test]
fn errors_map_to_statuses() {
    unsafe {
        let mut lat = ptr::null_mut();
        let bad = CString::new("{not json").unwrap();
        assert_eq!(
            hyperlat_lattice_build(8, 3, bad.as_ptr(), &mut lat),
            HyperlatStatus::InvalidInput
        );
        assert!(last_error().starts_with("ParseError"));
        assert!(lat.is_null());
        assert_eq!(
            hyperlat_lattice_build(8, 3, ptr::null(), &mut lat),
            HyperlatStatus::InvalidArgument
        );
        assert_eq!(
            hyperlat_lattice_build(8, 3, quotient("8_3_n1.json").as_ptr(), ptr::null_mut()),
            HyperlatStatus::InvalidArgument
        );
        // An {8,8} quotient cannot host a {10,3} lattice.
        assert_eq!(
            hyperlat_lattice_build(10, 3, quotient("8_3_n1.json").as_ptr(), &mut lat),
            HyperlatStatus::InvalidInput
        );
        assert_eq!(
            hyperlat_code_parameters(
                ptr::null(),
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut()
            ),
            HyperlatStatus::InvalidArgument
        );
        hyperlat_lattice_free(ptr::null_mut());
        hyperlat_code_free(ptr::null_mut());
        hyperlat_string_free(ptr::null_mut());
    }
}

#[test]
fn simulate_returns_csv() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    let config = serde_json::json!({
        "pattern": [8, 3],
        "quotients": [dir.join("8_3_n1.json"), dir.join("8_3_n2.json")],
        "p_grid": [0.05, 0.1],
        "trials": 100,
        "seed": 3,
    });
    let config = CString::new(config.to_string()).unwrap();
    unsafe {
        let mut csv = ptr::null_mut();
        assert_eq!(hyperlat_simulate(config.as_ptr(), &mut csv), HyperlatStatus::Ok);
        let text = CStr::from_ptr(csv).to_str().unwrap().to_owned();
        hyperlat_string_free(csv);
        assert!(text.starts_with("pattern,N,n,k,p,trials,failures"));
        assert_eq!(text.lines().count(), 5);

        let bad = CString::new(r#"{"pattern":[8,3]}"#).unwrap();
        assert_eq!(hyperlat_simulate(bad.as_ptr(), &mut csv), HyperlatStatus::InvalidInput);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/hyperlat.h")).unwrap();
    for f in [
        "hyperlat_last_error",
        "hyperlat_version",
        "hyperlat_lattice_build",
        "hyperlat_lattice_counts",
        "hyperlat_lattice_edges",
        "hyperlat_lattice_free",
        "hyperlat_code_analyze",
        "hyperlat_code_parameters",
        "hyperlat_code_decode",
        "hyperlat_code_free",
        "hyperlat_simulate",
        "hyperlat_string_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct HyperlatLattice HyperlatLattice;"));
    let v = unsafe { CStr::from_ptr(hyperlat_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
