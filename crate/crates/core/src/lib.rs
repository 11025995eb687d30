//! Chain-level models of direct limits of Morse homology along exhaustions:
//! GF(2) linear algebra, graded complexes, homotopy coherent diagrams over
//! the stage poset, their colimits and mapping telescopes.

pub mod cli;
pub mod colimit;
pub mod complex;
pub mod diagram;
pub mod error;
pub mod f2;
pub mod io;
pub mod nerve;
pub mod random;
pub mod scenario;

pub use complex::{ChainMap, Degree, GradedComplex, HomSpace, HomologySummary};
pub use diagram::{complete, make_strict, CoherentDiagram, PartialDiagram};
pub use error::{Error, Result};
pub use f2::{F2Matrix, F2Vector};
pub use nerve::PosetSimplex;
pub use scenario::{load_scenario, ExhaustionScenario};
