//! Radon and X-ray transforms on R^3 organized around the similitude group
//! SIM(3): forward transforms, the unitarizing Fourier multipliers, three
//! inversion routes and a residual-check harness for the operator identities.

pub mod error;
pub mod fft;
pub mod filter;
pub mod format;
pub mod grid;
pub mod group;
pub mod interp;
pub mod invert;
pub mod par;
pub mod verify;
pub mod xform;

pub use error::{Error, Result};
pub use grid::{apply_pi, dft3, idft3, GaussianBlob, Phantom, Spectrum3D, SplineVolume, Volume};
pub use group::{CharacterSet, Geometry, GroupElement, LineLabel, Mat3, PlaneLabel, Vec3};
