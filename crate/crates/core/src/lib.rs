//! Compiles voxel robot morphologies into assembly-ready mesh blueprints.
//!
//! The flow is: [`voxel`] (parse, segment, kinematic tree) → [`body`]
//! (rigid bones and soft skin) → [`motor`] → [`electronics`] → [`wire`] →
//! [`score`], orchestrated by [`pipeline`]. All geometry runs on the
//! [`mesh`] kernel.

// Parameter checks are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod body;
pub mod mesh;
pub mod voxel;
pub mod motor;
pub mod electronics;
pub mod wire;
pub mod score;
pub mod pipeline;
pub mod fixtures;
