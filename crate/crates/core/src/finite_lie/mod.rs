//! Finite local rings, Lie lattices over them and Smith normal forms.
//!
//! The Kirillov orbit of a functional `w` on `p^m L / p^N L` has size
//! `q^E` where `E` is read off the elementary divisors of the commutator
//! matrix `R(w)`; see [`orbit_size_exponent`] and [`functional_orbit_exponent`].

mod lattice;
mod ring;
mod snf;

pub use lattice::{functional_orbit_exponent, orbit_size_exponent, smallest_nonresidue, LieKind, LieLattice, QuadInt, QuadMat};
pub use ring::{is_irreducible_mod_p, ring_make, GaloisRing, LocalRing, Zpl};
pub(crate) use ring::inv_mod;
pub use snf::{alternating_exponents, generic_exponents, identity, mat_mul, smith_normal_form, Matrix, SmithForm};
