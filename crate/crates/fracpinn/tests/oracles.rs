//! Training-free oracle suite: exact-derivative checks against finite
//! differences, near-tip field consistency and equilibrium, COD round
//! trips, DEM exactness, and traction-free crack faces.

mod common;

#[test]
fn spatial_jets_match_finite_differences() {
    common::check_spatial_jets_vs_fd().unwrap();
}

#[test]
fn parameter_gradients_match_finite_differences() {
    common::check_parameter_gradient_vs_fd().unwrap();
}

#[test]
fn williams_displacement_stress_consistency() {
    common::check_williams_consistency().unwrap();
}

#[test]
fn williams_field_satisfies_equilibrium() {
    common::check_williams_equilibrium().unwrap();
}

#[test]
fn cod_roundtrip_and_dem_exactness() {
    common::check_cod_roundtrip_and_dem().unwrap();
}

#[test]
fn crack_faces_are_traction_free() {
    common::check_face_traction_free().unwrap();
}
