//! Exact symbolic engine for a class of pointed Hopf algebras attached to
//! braided vector spaces of diagonal type over free abelian groups.
//!
//! The crate is organized bottom-up:
//!
//! * [`scalars`] — the ground field, modeled as the rational function field
//!   Q(t₁,…,t_m), together with its unit group of signed Laurent monomials.
//! * [`lattice`] — free abelian groups, their characters, Smith normal form,
//!   and integer exponent-lattice solving.
//! * [`datum`] — input data (group elements, characters, linking and Cartan
//!   structure) with validation and structural analysis.
//! * [`engine`] — the algebra itself: graded bases, triangular normal forms,
//!   skew derivations, the bilinear pairing, dual bases and the Casimir
//!   element.
//! * [`repr`] — weight modules: Verma-type and simple highest weight modules,
//!   tensor products, decomposition and integrability checks.
//! * [`oracles`] — independent integer-only reference computations (Kostant
//!   partitions, Weyl dimensions, Freudenthal multiplicities, rank-one
//!   Clebsch-Gordan) used to cross-check the symbolic engine.
//! * [`presets`] — ready-made data used by the CLI and the test suite.

pub mod datum;
pub mod engine;
pub mod lattice;
pub mod linalg;
pub mod oracles;
pub mod presets;
pub mod repr;
pub mod scalars;
