//! Numerics for transmitting photon-subtracted two-mode squeezed states
//! through an optical fiber protected by a decoherence-free encoding and
//! bang-bang phase shifters.

pub mod bath;
pub mod bb;
pub mod channel;
pub mod constants;
pub mod design;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod quad;
pub mod special;
pub mod states;

pub use bath::BathSpec;
pub use bb::{JointModel, JointSpace, PulsePlacement, SegmentProfile, ToyBath};
pub use channel::{ChannelParams, RateSource};
pub use design::{FiberSpec, FrequencyUnit, Preset};
pub use entanglement::PptSpectrum;
pub use error::{Error, Result};
pub use fock::{FockOperator, FockSpace, Mode, SparseOperator};
pub use num_complex::Complex64;
pub use states::{build_state, ManifoldDensityMatrix, NonGaussianState};
