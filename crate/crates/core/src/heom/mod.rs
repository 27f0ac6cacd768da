//! Hierarchy construction: channel coefficients, index enumeration, the ADM
//! stack, and the generator.

mod channels;
mod generator;
mod index;
mod stack;

pub use channels::{
    bath_channel_coeffs, collect_channels, field_channel_coeffs, ChannelCoeffs, ChannelKind,
};
pub use generator::{CsrMatrix, HeomGenerator};
pub use index::{binomial, hierarchy_size, HierarchyIndex, IndexSet, MAX_CHANNELS, NONE};
pub use stack::AdmStack;
