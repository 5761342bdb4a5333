use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::degrees::Degree;
use crate::fuzzy::{FuzzyError, FuzzySet, SortDomain, Trapezoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("sort `{0}` is declared twice")]
    DuplicateSort(String),
    #[error("atom `{0}` is declared twice")]
    DuplicateAtom(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("undeclared atom `{0}`")]
    UnknownAtom(String),
    #[error("interpretation of `{atom}` is over `{found}` but the atom has sort `{expected}`")]
    SortMismatch {
        atom: String,
        expected: String,
        found: String,
    },
    #[error("interpretation of `{atom}`: {source}")]
    Interpretation { atom: String, source: FuzzyError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomDecl {
    pub name: String,
    /// `None` for abstract atoms, which have no fuzzy interpretation.
    pub sort: Option<SortId>,
}

/// Where a variable's membership function came from; kept for printing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MembershipSource {
    Trapezoid(Trapezoid),
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzyVar {
    pub source: MembershipSource,
    pub set: FuzzySet,
}

/// Sort domains plus the fuzzy interpretation `m` of every sorted atom.
///
/// Every stored set is normalized and lives on its atom's sort domain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Context {
    sorts: Vec<Arc<SortDomain>>,
    interp: BTreeMap<AtomId, (SortId, FuzzyVar)>,
}

impl Context {
    pub fn sorts(&self) -> &[Arc<SortDomain>] {
        &self.sorts
    }

    pub fn sort(&self, id: SortId) -> &Arc<SortDomain> {
        &self.sorts[id.0]
    }

    pub fn sort_id(&self, name: &str) -> Option<SortId> {
        self.sorts.iter().position(|s| s.name() == name).map(SortId)
    }

    pub fn membership(&self, atom: AtomId) -> Option<&FuzzySet> {
        self.interp.get(&atom).map(|(_, v)| &v.set)
    }

    pub fn var(&self, atom: AtomId) -> Option<&FuzzyVar> {
        self.interp.get(&atom).map(|(_, v)| v)
    }

    pub fn sort_of(&self, atom: AtomId) -> Option<SortId> {
        self.interp.get(&atom).map(|(s, _)| *s)
    }

    /// Sorted atoms in id order.
    pub fn sorted_atoms(&self) -> impl Iterator<Item = (AtomId, SortId, &FuzzySet)> + '_ {
        self.interp.iter().map(|(a, (s, v))| (*a, *s, &v.set))
    }
}

/// A certainty-weighted Horn clause `(p1 ∧ … ∧ pk → q, weight)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub body: Vec<AtomId>,
    pub head: AtomId,
    pub weight: Degree,
}

impl Clause {
    /// Repeated body atoms are collapsed, keeping first occurrences.
    pub fn new(body: impl IntoIterator<Item = AtomId>, head: AtomId, weight: Degree) -> Self {
        let mut unique = Vec::new();
        for atom in body {
            if !unique.contains(&atom) {
                unique.push(atom);
            }
        }
        Clause {
            body: unique,
            head,
            weight,
        }
    }

    pub fn fact(head: AtomId, weight: Degree) -> Self {
        Clause {
            body: Vec::new(),
            head,
            weight,
        }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    /// The head also occurs in the body.
    pub fn is_recursive(&self) -> bool {
        self.body.contains(&self.head)
    }

    /// The clause's Gödel formula: the head for a fact, else `body → head`.
    pub fn formula(&self) -> Formula {
        match self.body.split_first() {
            None => Formula::Atom(self.head),
            Some((first, rest)) => {
                let body = rest.iter().fold(Formula::Atom(*first), |acc, a| {
                    Formula::and(acc, Formula::Atom(*a))
                });
                Formula::implies(body, Formula::Atom(self.head))
            }
        }
    }
}

/// Formulas of propositional Gödel logic over the program's atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Zero,
    Atom(AtomId),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(id: AtomId) -> Self {
        Formula::Atom(id)
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Formula::Not(Box::new(a))
    }

    pub fn equiv(a: Formula, b: Formula) -> Self {
        Formula::Equiv(Box::new(a), Box::new(b))
    }

    /// Rewrites `∨`, `¬` and `≡` into `∧`, `→` and `0̄`.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::Zero | Formula::Atom(_) => self.clone(),
            Formula::And(a, b) => Formula::and(a.desugar(), b.desugar()),
            Formula::Implies(a, b) => Formula::implies(a.desugar(), b.desugar()),
            Formula::Or(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                Formula::and(
                    Formula::implies(Formula::implies(a.clone(), b.clone()), b.clone()),
                    Formula::implies(Formula::implies(b, a.clone()), a),
                )
            }
            Formula::Not(a) => Formula::implies(a.desugar(), Formula::Zero),
            Formula::Equiv(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                Formula::and(
                    Formula::implies(a.clone(), b.clone()),
                    Formula::implies(b, a),
                )
            }
        }
    }

    pub fn atoms(&self, out: &mut Vec<AtomId>) {
        match self {
            Formula::Zero => {}
            Formula::Atom(a) => {
                if !out.contains(a) {
                    out.push(*a)
                }
            }
            Formula::Not(a) => a.atoms(out),
            Formula::And(a, b)
            | Formula::Implies(a, b)
            | Formula::Or(a, b)
            | Formula::Equiv(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Zero => f.write_str("0"),
            Formula::Atom(a) => write!(f, "#{}", a.0),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Not(a) => write!(f, "~{a}"),
            Formula::Equiv(a, b) => write!(f, "({a} == {b})"),
        }
    }
}

/// Clauses over a vocabulary of atoms, optionally with a fuzzy context.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    atoms: Vec<AtomDecl>,
    clauses: Vec<Clause>,
    context: Option<Context>,
    queries: Vec<AtomId>,
}

impl Program {
    pub fn atoms(&self) -> &[AtomDecl] {
        &self.atoms
    }

    pub fn atom_ids(&self) -> impl Iterator<Item = AtomId> {
        (0..self.atoms.len()).map(AtomId)
    }

    pub fn atom(&self, id: AtomId) -> &AtomDecl {
        &self.atoms[id.0]
    }

    pub fn atom_name(&self, id: AtomId) -> &str {
        &self.atoms[id.0].name
    }

    pub fn atom_id(&self, name: &str) -> Option<AtomId> {
        self.atoms.iter().position(|a| a.name == name).map(AtomId)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn context(&self) -> Option<&Context> {
        self.context.as_ref()
    }

    pub fn queries(&self) -> &[AtomId] {
        &self.queries
    }

    /// No sorted atoms: only the plain Horn calculus applies.
    pub fn is_context_free(&self) -> bool {
        self.atoms.iter().all(|a| a.sort.is_none())
    }

    pub fn abstract_atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.atom_ids().filter(|a| self.atoms[a.0].sort.is_none())
    }

    /// Copy of the program with one clause removed.
    pub fn without_clause(&self, index: usize) -> Program {
        let mut p = self.clone();
        p.clauses.remove(index);
        p
    }

    /// Copy of the program with an extra clause over existing atoms.
    pub fn with_clause(&self, clause: Clause) -> Program {
        let mut p = self.clone();
        p.clauses.push(clause);
        p
    }

    pub fn with_clauses(&self, clauses: Vec<Clause>) -> Program {
        let mut p = self.clone();
        p.clauses = clauses;
        p
    }
}

/// Incremental, validating construction of a [`Program`].
#[derive(Debug, Default)]
pub struct ProgramBuilder {
    program: Program,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sort(&mut self, domain: SortDomain) -> Result<SortId, ProgramError> {
        let ctx = self.program.context.get_or_insert_with(Context::default);
        if ctx.sort_id(domain.name()).is_some() {
            return Err(ProgramError::DuplicateSort(domain.name().to_string()));
        }
        ctx.sorts.push(Arc::new(domain));
        Ok(SortId(ctx.sorts.len() - 1))
    }

    pub fn sort_id(&self, name: &str) -> Option<SortId> {
        self.program.context.as_ref().and_then(|c| c.sort_id(name))
    }

    pub fn domain(&self, sort: SortId) -> &Arc<SortDomain> {
        self.program
            .context
            .as_ref()
            .expect("no sorts declared")
            .sort(sort)
    }

    /// Declares a new abstract atom; the name must be fresh.
    pub fn declare_atom(&mut self, name: &str) -> Result<AtomId, ProgramError> {
        if self.program.atom_id(name).is_some() {
            return Err(ProgramError::DuplicateAtom(name.to_string()));
        }
        self.program.atoms.push(AtomDecl {
            name: name.to_string(),
            sort: None,
        });
        Ok(AtomId(self.program.atoms.len() - 1))
    }

    /// Looks an atom up by name, declaring it as abstract if unseen.
    pub fn atom(&mut self, name: &str) -> AtomId {
        match self.program.atom_id(name) {
            Some(id) => id,
            None => self.declare_atom(name).expect("fresh name"),
        }
    }

    /// Declares a sorted atom together with its fuzzy interpretation.
    pub fn fuzzy_atom(
        &mut self,
        name: &str,
        sort: SortId,
        var: FuzzyVar,
    ) -> Result<AtomId, ProgramError> {
        if self.program.atom_id(name).is_some() {
            return Err(ProgramError::DuplicateAtom(name.to_string()));
        }
        let ctx = self
            .program
            .context
            .as_mut()
            .ok_or_else(|| ProgramError::UnknownSort(format!("#{}", sort.0)))?;
        let domain = ctx
            .sorts
            .get(sort.0)
            .ok_or_else(|| ProgramError::UnknownSort(format!("#{}", sort.0)))?;
        if **var.set.domain() != **domain {
            return Err(ProgramError::SortMismatch {
                atom: name.to_string(),
                expected: domain.name().to_string(),
                found: var.set.domain().name().to_string(),
            });
        }
        var.set
            .check_normalized()
            .map_err(|source| ProgramError::Interpretation {
                atom: name.to_string(),
                source,
            })?;
        self.program.atoms.push(AtomDecl {
            name: name.to_string(),
            sort: Some(sort),
        });
        let id = AtomId(self.program.atoms.len() - 1);
        ctx.interp.insert(id, (sort, var));
        Ok(id)
    }

    /// Shorthand for a trapezoid-interpreted atom.
    pub fn trapezoid_atom(
        &mut self,
        name: &str,
        sort: SortId,
        trapezoid: Trapezoid,
    ) -> Result<AtomId, ProgramError> {
        let set = trapezoid
            .to_fuzzy_unchecked(self.domain(sort))
            .map_err(|source| ProgramError::Interpretation {
                atom: name.to_string(),
                source,
            })?;
        self.fuzzy_atom(
            name,
            sort,
            FuzzyVar {
                source: MembershipSource::Trapezoid(trapezoid),
                set,
            },
        )
    }

    pub fn clause(&mut self, clause: Clause) -> &mut Self {
        self.program.clauses.push(clause);
        self
    }

    pub fn fact(&mut self, head: AtomId, weight: Degree) -> &mut Self {
        self.clause(Clause::fact(head, weight))
    }

    pub fn rule(&mut self, body: &[AtomId], head: AtomId, weight: Degree) -> &mut Self {
        self.clause(Clause::new(body.iter().copied(), head, weight))
    }

    pub fn query(&mut self, goal: AtomId) -> &mut Self {
        self.program.queries.push(goal);
        self
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn build(self) -> Program {
        self.program
    }
}
