//! Possibilistic Gödel logic programming.
//!
//! Programs are sets of certainty-weighted Horn clauses over propositional
//! atoms. Atoms are either abstract (truth values range over `[0, 1]`) or
//! sorted, in which case a context fixes a finite domain for the sort and a
//! normalized fuzzy set for the atom.
//!
//! - [`degrees`]: exact degrees in `[0, 1]` and the two implications.
//! - [`fuzzy`]: sort domains, fuzzy sets, trapezoids, necessity between sets.
//! - [`syntax`]: the `.pgl` language.
//! - [`semantics`]: interpretations, possibility distributions, necessity.
//! - [`engine`]: saturation with modus ponens and the fuzzy-unification rules.
//! - [`oracle`]: least-specific models and exhaustive derivation search.

pub mod degrees;
pub mod engine;
pub mod fuzzy;
pub mod oracle;
pub mod semantics;
pub mod syntax;
