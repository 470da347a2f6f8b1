//! Numeric primitives shared by the channel, transceiver and analysis code.

pub mod bessel;
pub mod eigen;
pub mod linalg;
pub mod quadrature;
pub mod random;

pub use bessel::bessel_j0;
pub use eigen::{dominant_eigenpair, principal_eigenvector, Eigenpair};
pub use linalg::{cholesky_jittered, clip_to_psd_correlation, symmetric_eigen, norm, norm_sqr, vdot, CMatrix};
pub use quadrature::{integrate_1d, integrate_2d, rectangle, Quadrature, Region2D};
pub use random::{sample_angles, sample_complex_gaussian, wrap_angle, AngleFamily, RngStream};

pub use num_complex::Complex64 as C64;
