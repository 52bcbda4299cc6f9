//! Exact one-shot information quantities on finite distributions and the coding schemes
//! built from them: distributed lossless coding by random binning, lossless coding with a
//! coded helper, and lossy coding under a maximum-distortion criterion.
//!
//! Every quantity is in bits. Smooth quantities come with the sub-weighting that attains
//! them, and every scheme reports an exactly computed error probability for each realized
//! code, so bounds can be compared against measured behavior without sampling noise.

pub mod asymptotics;
pub mod binning;
pub mod error;
pub mod helper;
pub mod io;
pub mod prob;
pub mod rate_distortion;
pub mod rng;
pub mod smooth;

pub use error::{Error, ErrorKind, Result};
pub use prob::{FiniteDist, JointDist, Kernel, MassFunction};
pub use smooth::{SmoothResult, SubWeighting};
