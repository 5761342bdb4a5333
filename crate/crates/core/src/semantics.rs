//! Many-valued interpretations, possibility distributions and necessity.
//!
//! An [`Interpretation`] picks one domain point per sort (shared by every
//! atom of that sort) and one truth degree per abstract atom. A sorted atom
//! `p` is then true to degree `μ_{m(p)}(i(σ_p))`. Interpretation spaces are
//! always finite: sorts range over their domains and abstract atoms over a
//! truth grid.

use std::sync::Arc;

use num_traits::CheckedMul;
use thiserror::Error;

use crate::degrees::{goedel_implies, min_all, reciprocal_implies, Degree};
use crate::syntax::{AtomId, Clause, Formula, Program};

/// Default cap on the number of interpretations enumerated.
pub const DEFAULT_MAX_SPACE: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("atom `{0}` has no interpretation")]
    AtomNotInterpretable(String),
    #[error("interpretation space has {size} points, above the cap of {cap}")]
    SpaceTooLarge { size: String, cap: usize },
    #[error("distribution and formula are over different interpretation spaces")]
    SpaceMismatch,
    #[error("invalid truth grid: {0}")]
    InvalidGrid(String),
    #[error("possibility distribution is not normalized")]
    NotNormalized,
    #[error("expected {expected} possibility values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

/// One extended interpretation: a domain point per sort and a degree per
/// abstract atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interpretation {
    /// Index into each sort's domain, by sort id.
    pub choices: Vec<usize>,
    /// Truth of each abstract atom, by atom id; `None` for sorted atoms.
    pub truths: Vec<Option<Degree>>,
}

impl Interpretation {
    /// Plain interpretation of a context-free program.
    pub fn plain(truths: Vec<Degree>) -> Self {
        Interpretation {
            choices: Vec::new(),
            truths: truths.into_iter().map(Some).collect(),
        }
    }

    pub fn atom_truth(&self, atom: AtomId, program: &Program) -> Result<Degree, SemanticsError> {
        let decl = program.atom(atom);
        let missing = || SemanticsError::AtomNotInterpretable(decl.name.clone());
        match decl.sort {
            None => self
                .truths
                .get(atom.0)
                .copied()
                .flatten()
                .ok_or_else(missing),
            Some(sort) => {
                let set = program
                    .context()
                    .and_then(|c| c.membership(atom))
                    .ok_or_else(missing)?;
                let choice = *self.choices.get(sort.0).ok_or_else(missing)?;
                if choice >= set.memberships().len() {
                    return Err(missing());
                }
                Ok(set.at(choice))
            }
        }
    }

    /// Truth of every atom, indexed by atom id.
    pub fn valuation(&self, program: &Program) -> Result<Vec<Degree>, SemanticsError> {
        program
            .atom_ids()
            .map(|a| self.atom_truth(a, program))
            .collect()
    }
}

/// Gödel evaluation given the truth of every atom.
pub fn eval_with(formula: &Formula, valuation: &[Degree]) -> Degree {
    match formula {
        Formula::Zero => Degree::ZERO,
        Formula::Atom(a) => valuation[a.0],
        Formula::And(a, b) => eval_with(a, valuation).min(eval_with(b, valuation)),
        Formula::Implies(a, b) => goedel_implies(eval_with(a, valuation), eval_with(b, valuation)),
        Formula::Or(a, b) => eval_with(a, valuation).max(eval_with(b, valuation)),
        Formula::Not(a) => {
            if eval_with(a, valuation).is_zero() {
                Degree::ONE
            } else {
                Degree::ZERO
            }
        }
        Formula::Equiv(a, b) => {
            let (x, y) = (eval_with(a, valuation), eval_with(b, valuation));
            if x == y {
                Degree::ONE
            } else {
                x.min(y)
            }
        }
    }
}

/// Truth degree of `formula` under `interp`.
pub fn eval_formula(
    interp: &Interpretation,
    formula: &Formula,
    program: &Program,
) -> Result<Degree, SemanticsError> {
    let mut atoms = Vec::new();
    formula.atoms(&mut atoms);
    let mut valuation = vec![Degree::ZERO; program.atoms().len()];
    for atom in atoms {
        if atom.0 >= valuation.len() {
            return Err(SemanticsError::AtomNotInterpretable(format!("#{}", atom.0)));
        }
        valuation[atom.0] = interp.atom_truth(atom, program)?;
    }
    Ok(eval_with(formula, &valuation))
}

/// `{0, 1}`, every clause weight and its complement, every membership value
/// of the context and its complement, plus midpoints between consecutive
/// values.
pub fn default_truth_grid(program: &Program) -> Result<Vec<Degree>, SemanticsError> {
    let mut base = vec![Degree::ZERO, Degree::ONE];
    for clause in program.clauses() {
        base.push(clause.weight);
        base.push(clause.weight.complement());
    }
    if let Some(ctx) = program.context() {
        for (_, _, set) in ctx.sorted_atoms() {
            for &m in set.memberships() {
                base.push(m);
                base.push(m.complement());
            }
        }
    }
    base.sort();
    base.dedup();
    refine_grid(&base)
}

/// Inserts the midpoint between every pair of consecutive grid values.
pub fn refine_grid(grid: &[Degree]) -> Result<Vec<Degree>, SemanticsError> {
    let mut sorted = grid.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut out = Vec::with_capacity(sorted.len() * 2);
    for pair in sorted.windows(2) {
        out.push(pair[0]);
        let mid = pair[0]
            .midpoint(pair[1])
            .ok_or_else(|| SemanticsError::InvalidGrid("midpoint overflows".into()))?;
        out.push(mid);
    }
    out.extend(sorted.last());
    Ok(out)
}

/// Multiples of `step` in `[0, 1]`, plus `1`.
pub fn uniform_grid(step: Degree) -> Result<Vec<Degree>, SemanticsError> {
    if step.is_zero() {
        return Err(SemanticsError::InvalidGrid("step must be positive".into()));
    }
    let mut out = vec![Degree::ZERO];
    let mut k: i64 = 1;
    loop {
        let value = step
            .value()
            .checked_mul(&k.into())
            .ok_or_else(|| SemanticsError::InvalidGrid("step too fine".into()))?;
        match Degree::new(value) {
            Ok(d) => out.push(d),
            Err(_) => break,
        }
        k += 1;
        if out.len() > 1_000_000 {
            return Err(SemanticsError::InvalidGrid("step too fine".into()));
        }
    }
    if !out.last().is_some_and(|d| d.is_one()) {
        out.push(Degree::ONE);
    }
    Ok(out)
}

/// A finite, explicitly enumerated set of interpretations for one program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpretationSpace {
    interps: Vec<Interpretation>,
    grid: Vec<Degree>,
    sort_sizes: Vec<usize>,
    abstract_mask: Vec<bool>,
}

impl InterpretationSpace {
    pub fn interpretations(&self) -> &[Interpretation] {
        &self.interps
    }

    pub fn len(&self) -> usize {
        self.interps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interps.is_empty()
    }

    pub fn grid(&self) -> &[Degree] {
        &self.grid
    }

    pub fn position(&self, interp: &Interpretation) -> Option<usize> {
        self.interps.iter().position(|i| i == interp)
    }

    pub fn is_for(&self, program: &Program) -> bool {
        let sizes: Vec<usize> = program
            .context()
            .map(|c| c.sorts().iter().map(|s| s.len()).collect())
            .unwrap_or_default();
        let mask: Vec<bool> = program.atoms().iter().map(|a| a.sort.is_none()).collect();
        sizes == self.sort_sizes && mask == self.abstract_mask
    }

    /// Truth of every atom in every interpretation, in space order.
    pub fn valuations(&self, program: &Program) -> Result<Vec<Vec<Degree>>, SemanticsError> {
        if !self.is_for(program) {
            return Err(SemanticsError::SpaceMismatch);
        }
        self.interps.iter().map(|i| i.valuation(program)).collect()
    }
}

/// Every interpretation of `program` whose abstract atoms take values in
/// `truth_grid`: the product of sort domains and one grid copy per abstract
/// atom.
pub fn enumerate_interpretations(
    program: &Program,
    truth_grid: &[Degree],
    max_space: usize,
) -> Result<InterpretationSpace, SemanticsError> {
    let mut grid = truth_grid.to_vec();
    grid.sort();
    grid.dedup();
    if !grid.first().is_some_and(|d| d.is_zero()) || !grid.last().is_some_and(|d| d.is_one()) {
        return Err(SemanticsError::InvalidGrid(
            "grid must contain 0 and 1".into(),
        ));
    }
    let sort_sizes: Vec<usize> = program
        .context()
        .map(|c| c.sorts().iter().map(|s| s.len()).collect())
        .unwrap_or_default();
    let abstract_atoms: Vec<AtomId> = program.abstract_atoms().collect();

    let mut size: u128 = 1;
    let factors = sort_sizes
        .iter()
        .copied()
        .chain(abstract_atoms.iter().map(|_| grid.len()));
    for f in factors {
        size = size.saturating_mul(f as u128);
    }
    if size > max_space as u128 {
        return Err(SemanticsError::SpaceTooLarge {
            size: size.to_string(),
            cap: max_space,
        });
    }

    let radices: Vec<usize> = sort_sizes
        .iter()
        .copied()
        .chain(abstract_atoms.iter().map(|_| grid.len()))
        .collect();
    let n_sorts = sort_sizes.len();
    let mut digits = vec![0usize; radices.len()];
    let mut interps = Vec::with_capacity(size as usize);
    loop {
        let mut truths = vec![None; program.atoms().len()];
        for (k, atom) in abstract_atoms.iter().enumerate() {
            truths[atom.0] = Some(grid[digits[n_sorts + k]]);
        }
        interps.push(Interpretation {
            choices: digits[..n_sorts].to_vec(),
            truths,
        });

        // odometer, last digit fastest
        let mut pos = radices.len();
        loop {
            if pos == 0 {
                let abstract_mask = program.atoms().iter().map(|a| a.sort.is_none()).collect();
                return Ok(InterpretationSpace {
                    interps,
                    grid,
                    sort_sizes,
                    abstract_mask,
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < radices[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Possibility values over an enumerated space. Always normalized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibilityDistribution {
    space: Arc<InterpretationSpace>,
    values: Vec<Degree>,
}

impl PossibilityDistribution {
    pub fn new(
        space: Arc<InterpretationSpace>,
        values: Vec<Degree>,
    ) -> Result<Self, SemanticsError> {
        if values.len() != space.len() {
            return Err(SemanticsError::LengthMismatch {
                expected: space.len(),
                actual: values.len(),
            });
        }
        if !values.iter().any(|v| v.is_one()) {
            return Err(SemanticsError::NotNormalized);
        }
        Ok(PossibilityDistribution { space, values })
    }

    /// Builds a distribution from sparse `(interpretation index, value)`
    /// pairs; every other interpretation gets 0.
    pub fn sparse(
        space: Arc<InterpretationSpace>,
        points: &[(usize, Degree)],
    ) -> Result<Self, SemanticsError> {
        let mut values = vec![Degree::ZERO; space.len()];
        for &(i, v) in points {
            let slot = values.get_mut(i).ok_or(SemanticsError::LengthMismatch {
                expected: space.len(),
                actual: i + 1,
            })?;
            *slot = v;
        }
        Self::new(space, values)
    }

    pub fn space(&self) -> &Arc<InterpretationSpace> {
        &self.space
    }

    pub fn values(&self) -> &[Degree] {
        &self.values
    }

    pub fn get(&self, index: usize) -> Degree {
        self.values[index]
    }
}

/// `min_k π_k ⇒ μ_k` over `(possibility, truth)` pairs.
pub fn necessity<I: IntoIterator<Item = (Degree, Degree)>>(pairs: I) -> Degree {
    min_all(pairs.into_iter().map(|(pi, mu)| reciprocal_implies(pi, mu)))
}

/// Necessity of `formula` under `pi`.
pub fn necessity_of_formula(
    formula: &Formula,
    pi: &PossibilityDistribution,
    program: &Program,
) -> Result<Degree, SemanticsError> {
    if !pi.space.is_for(program) {
        return Err(SemanticsError::SpaceMismatch);
    }
    let mut truths = Vec::with_capacity(pi.values.len());
    for interp in pi.space.interpretations() {
        truths.push(eval_formula(interp, formula, program)?);
    }
    Ok(necessity(pi.values.iter().copied().zip(truths)))
}

/// `pi` satisfies the weighted clause: the necessity of its formula reaches
/// the weight.
pub fn satisfies(
    pi: &PossibilityDistribution,
    clause: &Clause,
    program: &Program,
) -> Result<bool, SemanticsError> {
    Ok(necessity_of_formula(&clause.formula(), pi, program)? >= clause.weight)
}
