//! Similarity classes of `gl3` over `Z/p^l`, their shadows, transition
//! statistics, character degrees of finite matrix groups and the Clifford
//! assembly at finite level.

pub mod algebra;
pub mod classes;
pub mod clifford;
pub mod dixon;
pub mod fit;
pub mod mat3;
pub mod shadows;
