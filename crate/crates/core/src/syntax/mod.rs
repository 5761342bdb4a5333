//! The `.pgl` language: AST, parser and printer.
//!
//! ```text
//! sort <id> = <num>..<num> [step <num>] [unit <id>]  |  sort <id> = {<label>, ...}
//! var <id>                                            # abstract atom
//! var <id> : <sort> = trapezoid(t1, t2, t3, t4)  |  var <id> : <sort> = {<elem>: <deg>, ...}
//! clause (<id> & ... & <id> -> <id>, <deg>)  |  clause (<id>, <deg>)
//! query <id>
//! ```
//!
//! `#` starts a line comment. Atoms used in clauses without a `var`
//! declaration are abstract.

mod ast;
mod format;
mod parser;

pub use ast::{
    AtomDecl, AtomId, Clause, Context, Formula, FuzzyVar, MembershipSource, Program,
    ProgramBuilder, ProgramError, SortId,
};
pub use format::format_program;
pub use parser::{parse_program, Diagnostic, DiagnosticKind, Location};

#[cfg(test)]
mod tests;
