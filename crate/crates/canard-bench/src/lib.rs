//! Shared fixtures for the criterion benchmarks (see `benches/`).

use canard_core::{chua3, chua4, ChuaParams3, ChuaParams4, SlowFastSystem};

/// The 3D Chua model at its canard-regime default parameters.
pub fn chua3_default() -> SlowFastSystem {
    chua3(ChuaParams3::default()).expect("built-in model is valid")
}

/// The 4D Chua model at its default parameters.
pub fn chua4_default() -> SlowFastSystem {
    chua4(ChuaParams4::default()).expect("built-in model is valid")
}
