//! Parsing, grounding and SAT-based reasoning.

pub mod dpi;
pub mod ground;
pub mod reasoner;
pub mod sat;
pub mod syntax;

pub use dpi::{ground, Dpi, DpiEnvelope, DpiError, EntailmentKind, Polarity, Requirement, TestCase, TestCaseEnvelope, TestOrigin};
pub use ground::{GroundError, GroundTheory, Origin};
pub use reasoner::{check_validity, entails, is_coherent, is_consistent, AxiomSet, Reasoner, ValidityReport};
pub use syntax::{parse_formula, parse_kb, Axiom, AxiomId, AxiomKind, Formula, ParseError, SyntaxElement};
