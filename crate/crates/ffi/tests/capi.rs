use std::ffi::CStr;
use std::ptr;

use envlab_ffi::*;

fn space(p: f64, w: &[f64]) -> *mut EnvlabSpace {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { envlab_space_new(p, w.as_ptr(), w.len(), &mut s) }, EnvlabStatus::Ok);
    s
}

fn subspace(s: *const EnvlabSpace, rows: &[&[f64]]) -> *mut EnvlabSubspace {
    let n = rows[0].len();
    let flat: Vec<f64> = rows.concat();
    let mut y = ptr::null_mut();
    assert_eq!(unsafe { envlab_subspace_new(s, flat.as_ptr(), rows.len(), n, &mut y) }, EnvlabStatus::Ok);
    y
}

fn last_error() -> String {
    let p = envlab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn norm_and_duality_map() {
    let s = space(3.0, &[1.0, 1.0, 1.0]);
    assert_eq!(unsafe { envlab_space_atoms(s) }, 3);
    let f = [1.0, -2.0, 0.5];
    let mut norm = 0.0;
    assert_eq!(unsafe { envlab_space_norm(s, f.as_ptr(), 3, &mut norm) }, EnvlabStatus::Ok);
    let expect = (1.0f64 + 8.0 + 0.125).powf(1.0 / 3.0);
    assert!((norm - expect).abs() < 1e-12);

    let mut j = [0.0; 3];
    assert_eq!(unsafe { envlab_space_duality_map(s, f.as_ptr(), 3, j.as_mut_ptr()) }, EnvlabStatus::Ok);
    let pairing: f64 = f.iter().zip(&j).map(|(a, b)| a * b).sum();
    assert!((pairing - norm * norm).abs() < 1e-12);
    unsafe { envlab_space_free(s) };
}

#[test]
fn invalid_inputs_report_errors() {
    let mut s = ptr::null_mut();
    let w = [1.0, -1.0];
    assert_eq!(unsafe { envlab_space_new(2.0, w.as_ptr(), 2, &mut s) }, EnvlabStatus::InvalidArgument);
    assert!(s.is_null());
    assert!(!last_error().is_empty());

    let s = space(2.0, &[1.0, 1.0]);
    let f = [1.0, 2.0, 3.0];
    let mut norm = 0.0;
    assert_eq!(unsafe { envlab_space_norm(s, f.as_ptr(), 3, &mut norm) }, EnvlabStatus::Dimension);
    assert_eq!(unsafe { envlab_space_norm(ptr::null(), f.as_ptr(), 2, &mut norm) }, EnvlabStatus::NullPointer);
    assert!(last_error().contains("space"));
    unsafe { envlab_space_free(s) };
    unsafe { envlab_space_free(ptr::null_mut()) };
}

#[test]
fn subspace_basis_and_envelopes() {
    let s = space(3.0, &[1.0, 1.0, 1.0, 1.0]);
    let y = subspace(s, &[&[1.0, 1.0, 1.0, 1.0], &[0.0, 1.0, 2.0, 2.0]]);
    assert_eq!(unsafe { envlab_subspace_dim(y) }, 2);

    let mut small = [0.0; 4];
    assert_eq!(unsafe { envlab_subspace_basis(y, small.as_mut_ptr(), small.len()) }, EnvlabStatus::BufferTooSmall);
    let mut basis = [0.0; 8];
    assert_eq!(unsafe { envlab_subspace_basis(y, basis.as_mut_ptr(), basis.len()) }, EnvlabStatus::Ok);
    let mut inside = false;
    assert_eq!(unsafe { envlab_subspace_contains(y, basis[4..].as_ptr(), 4, 1e-9, &mut inside) }, EnvlabStatus::Ok);
    assert!(inside);

    let mut cond = ptr::null_mut();
    assert_eq!(unsafe { envlab_conditional_envelope(y, &mut cond) }, EnvlabStatus::Ok);
    assert_eq!(unsafe { envlab_subspace_dim(cond) }, 3);
    let mut alg = ptr::null_mut();
    assert_eq!(unsafe { envlab_algebraic_envelope(y, &mut alg) }, EnvlabStatus::Ok);
    assert_eq!(unsafe { envlab_subspace_dim(alg) }, 3);
    let mut lat = ptr::null_mut();
    assert_eq!(unsafe { envlab_lattice_closure(y, &mut lat) }, EnvlabStatus::Ok);
    assert_eq!(unsafe { envlab_subspace_dim(lat) }, 3);
    let step = [0.0, 1.0, 0.0, 0.0];
    assert_eq!(unsafe { envlab_subspace_contains(lat, step.as_ptr(), 4, 1e-9, &mut inside) }, EnvlabStatus::Ok);
    assert!(inside);

    for h in [y, cond, alg, lat] {
        unsafe { envlab_subspace_free(h) };
    }
    unsafe { envlab_space_free(s) };
}

#[test]
fn projection_constants() {
    let mut v = 0.0;
    assert_eq!(unsafe { envlab_c2(1.0, &mut v) }, EnvlabStatus::Ok);
    assert_eq!(v, f64::INFINITY);
    assert_eq!(unsafe { envlab_c2(2.0, &mut v) }, EnvlabStatus::Ok);
    assert!((v - 1.0).abs() < 1e-12);
    assert_eq!(unsafe { envlab_c2n_l1(2, &mut v) }, EnvlabStatus::Ok);
    assert!((v - 4.0 / std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(unsafe { envlab_c2n_l1(3, &mut v) }, EnvlabStatus::Ok);
    assert!((v - 1.5).abs() < 1e-12);
    assert_eq!(unsafe { envlab_c2n_l1(0, &mut v) }, EnvlabStatus::InvalidArgument);

    let s = space(1.0, &[1.0, 1.0, 1.0]);
    let y = subspace(s, &[&[1.0, -1.0, 0.0], &[0.0, 1.0, -1.0]]);
    let mut b = EnvlabProjectionBounds::default();
    assert_eq!(unsafe { envlab_min_projection_norm(y, 42, &mut b) }, EnvlabStatus::Ok);
    assert!(b.exact);
    assert!((b.upper - 4.0 / 3.0).abs() < 1e-9);
    assert!((b.lower - b.upper).abs() < 1e-9);
    unsafe {
        envlab_subspace_free(y);
        envlab_space_free(s);
    }
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(envlab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/envlab.h")).unwrap();
    for name in [
        "envlab_space_new",
        "envlab_space_norm",
        "envlab_space_duality_map",
        "envlab_subspace_new",
        "envlab_subspace_basis",
        "envlab_conditional_envelope",
        "envlab_algebraic_envelope",
        "envlab_lattice_closure",
        "envlab_c2",
        "envlab_min_projection_norm",
        "envlab_last_error",
        "typedef struct EnvlabSpace EnvlabSpace",
    ] {
        assert!(header.contains(name), "{name}");
    }
}
