//! Closed-form fiducials for small dimensions.

use num_complex::Complex64;

use crate::overlaps::FiducialVector;

/// `(√(3+√3), e^{iπ/4}√(3−√3)) / √6`; its orbit is the tetrahedral qubit SIC.
pub fn qubit() -> FiducialVector {
    let s3 = 3f64.sqrt();
    let a0 = ((3.0 + s3) / 6.0).sqrt();
    let a1 = ((3.0 - s3) / 6.0).sqrt();
    FiducialVector::new(vec![Complex64::new(a0, 0.0), Complex64::from_polar(a1, std::f64::consts::FRAC_PI_4)])
        .expect("valid")
}

/// `(0, 1, −1)/√2`, fiducial of the Clifford-invariant Hesse SIC.
pub fn hesse() -> FiducialVector {
    FiducialVector::from_reals(&[0.0, 1.0, -1.0]).expect("valid")
}

/// `(0, 1, 1)/√2`, whose Clifford orbit is the four Norrell SICs.
pub fn norrell() -> FiducialVector {
    FiducialVector::from_reals(&[0.0, 1.0, 1.0]).expect("valid")
}
