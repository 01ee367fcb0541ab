//! Exact verification engine for equivariant holomorphic Morse inequalities.
//!
//! Everything here computes over exact integers and rationals: torus weights
//! and action chambers, window-certified equivariant character series,
//! Morse-style comparisons between fixed-point contributions and global
//! cohomology characters, Hodge-polynomial bookkeeping, and symplectic-cut
//! gluing and quantization checks.  Inputs are declarative fixed-point data;
//! every verdict is an exact identity or an exact counterexample, never a
//! numerical approximation.

pub mod character;
pub mod lattice;
pub mod scenario;

pub use character::{
    poly_divide_one_plus_t, CharacterSeries, Containment, Extent, MorsePolynomial, SeriesError,
    Window,
};
pub use scenario::{
    component_contribution, isolated_point_character, kc_character, validate_scenario,
    CohomologyOverride, Contribution, Diagnostic, FixedComponent, OverrideEntry, RaySpec,
    Scenario, ScenarioError,
};
pub use lattice::{
    dual_cone_contains, enumerate_chambers, find_reduction_vector, polarize, Chamber,
    ChamberCone, ConePosition, Int, LatticeError, Polarization, Rat, Weight,
};
