//! Bottom-up saturation computing the maximum degree of deduction.
//!
//! Rules: generalized modus ponens over clauses, and the three
//! fuzzy-unification rules over sorted atoms:
//!
//! ```text
//! SU   (p, α)                     ⊢ (p', min(α, N(m(p') | m(p))))
//! IN   (p1, α), (p2, β)           ⊢ (p', min(α, β))   if m(p') ≥ min(m(p1), m(p2))
//! UN   (p, α)                     ⊢ (p', 1)           if m(p') ≥ max(1 − α, m(p))
//! ```
//!
//! Candidate targets are the atoms declared in the program. Every derived
//! degree carries the [`ProofNode`] that produced it.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::degrees::{min_all, Degree};
use crate::fuzzy::{necessity_of_match, FuzzyError, FuzzySet};
use crate::syntax::{AtomId, Clause, Program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("atom `{0}` is not sorted")]
    NotSorted(String),
    #[error("atoms `{0}` and `{1}` have different sorts")]
    SortMismatch(String, String),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    Fact,
    #[serde(rename = "GMP")]
    Gmp,
    #[serde(rename = "SU")]
    Su,
    #[serde(rename = "IN")]
    In,
    #[serde(rename = "UN")]
    Un,
    Axiom0,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Rule::Fact => "Fact",
            Rule::Gmp => "GMP",
            Rule::Su => "SU",
            Rule::In => "IN",
            Rule::Un => "UN",
            Rule::Axiom0 => "Axiom0",
        };
        f.write_str(name)
    }
}

/// One derivation step with the steps it rests on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofNode {
    pub atom: AtomId,
    pub degree: Degree,
    pub rule: Rule,
    pub premises: Vec<Arc<ProofNode>>,
    pub side_conditions: BTreeMap<String, Degree>,
    /// Clause index for `Fact` and `GMP` steps.
    pub clause: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("proof step for `{atom}` ({rule}) does not replay: {reason}")]
pub struct ReplayError {
    pub atom: String,
    pub rule: Rule,
    pub reason: String,
}

impl ProofNode {
    pub fn axiom0(atom: AtomId) -> Self {
        ProofNode {
            atom,
            degree: Degree::ZERO,
            rule: Rule::Axiom0,
            premises: Vec::new(),
            side_conditions: BTreeMap::new(),
            clause: None,
        }
    }

    /// Number of steps in the tree.
    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(|p| p.size()).sum::<usize>()
    }

    /// Recomputes every step from the program and its context and checks it
    /// reproduces the recorded degree.
    pub fn verify(&self, program: &Program) -> Result<(), ReplayError> {
        for premise in &self.premises {
            premise.verify(program)?;
        }
        let fail = |reason: String| ReplayError {
            atom: program
                .atoms()
                .get(self.atom.0)
                .map(|a| a.name.clone())
                .unwrap_or_default(),
            rule: self.rule,
            reason,
        };
        if self.atom.0 >= program.atoms().len() {
            return Err(fail("atom out of range".into()));
        }
        let premise_degrees: Vec<Degree> = self.premises.iter().map(|p| p.degree).collect();
        let set = |atom: AtomId| -> Result<&FuzzySet, ReplayError> {
            program
                .context()
                .and_then(|c| c.membership(atom))
                .ok_or_else(|| fail(format!("atom #{} has no fuzzy set", atom.0)))
        };
        let expected = match self.rule {
            Rule::Axiom0 => {
                if !self.premises.is_empty() {
                    return Err(fail("axiom has premises".into()));
                }
                Degree::ZERO
            }
            Rule::Fact | Rule::Gmp => {
                let clause = self
                    .clause
                    .and_then(|i| program.clauses().get(i))
                    .ok_or_else(|| fail("missing clause".into()))?;
                if clause.head != self.atom {
                    return Err(fail("clause head differs".into()));
                }
                let body: Vec<AtomId> = self.premises.iter().map(|p| p.atom).collect();
                if body != clause.body || (self.rule == Rule::Fact) != clause.is_fact() {
                    return Err(fail("premises do not match the clause body".into()));
                }
                gmp(clause.weight, premise_degrees.iter().copied())
            }
            Rule::Su => {
                let [p] = self.premises.as_slice() else {
                    return Err(fail("expects one premise".into()));
                };
                let beta = necessity_of_match(set(self.atom)?, set(p.atom)?)
                    .map_err(|e| fail(e.to_string()))?;
                if self.side_conditions.get("beta") != Some(&beta) {
                    return Err(fail("beta differs".into()));
                }
                p.degree.min(beta)
            }
            Rule::In => {
                let [p1, p2] = self.premises.as_slice() else {
                    return Err(fail("expects two premises".into()));
                };
                let fired = intersection(
                    p1.degree,
                    set(p1.atom)?,
                    p2.degree,
                    set(p2.atom)?,
                    set(self.atom)?,
                )
                .map_err(|e| fail(e.to_string()))?;
                fired.ok_or_else(|| fail("side condition fails".into()))?
            }
            Rule::Un => {
                let [p] = self.premises.as_slice() else {
                    return Err(fail("expects one premise".into()));
                };
                let fired =
                    un(p.degree, set(p.atom)?, set(self.atom)?).map_err(|e| fail(e.to_string()))?;
                fired.ok_or_else(|| fail("side condition fails".into()))?
            }
        };
        if expected != self.degree {
            return Err(fail(format!(
                "recomputed {expected}, recorded {}",
                self.degree
            )));
        }
        Ok(())
    }

    pub fn to_trace(&self, program: &Program) -> TraceNode {
        TraceNode {
            goal: program.atom_name(self.atom).to_string(),
            degree: self.degree,
            rule: self.rule,
            clause: self.clause,
            premises: self.premises.iter().map(|p| p.to_trace(program)).collect(),
            side_conditions: self.side_conditions.clone(),
        }
    }
}

/// Serializable form of a proof tree, naming atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceNode {
    pub goal: String,
    pub degree: Degree,
    pub rule: Rule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause: Option<usize>,
    pub premises: Vec<TraceNode>,
    pub side_conditions: BTreeMap<String, Degree>,
}

/// `min(weight, β1, …, βk)`.
pub fn gmp(weight: Degree, body: impl IntoIterator<Item = Degree>) -> Degree {
    weight.min(min_all(body))
}

/// SU conclusion degree for `target` from `(source, alpha)`.
pub fn su(alpha: Degree, source: &FuzzySet, target: &FuzzySet) -> Result<Degree, FuzzyError> {
    Ok(alpha.min(necessity_of_match(target, source)?))
}

/// IN conclusion degree, or `None` when the side condition fails.
pub fn intersection(
    alpha: Degree,
    first: &FuzzySet,
    beta: Degree,
    second: &FuzzySet,
    target: &FuzzySet,
) -> Result<Option<Degree>, FuzzyError> {
    let meet = first.pointwise_min(second)?;
    Ok(target.dominates(&meet)?.then(|| alpha.min(beta)))
}

/// UN conclusion degree (always 1), or `None` when the side condition fails.
pub fn un(
    alpha: Degree,
    source: &FuzzySet,
    target: &FuzzySet,
) -> Result<Option<Degree>, FuzzyError> {
    let floor = source.raised_to(alpha.complement());
    Ok(target.dominates(&floor)?.then_some(Degree::ONE))
}

fn sorted_set(program: &Program, atom: AtomId) -> Result<&FuzzySet, EngineError> {
    if atom.0 >= program.atoms().len() {
        return Err(EngineError::UnknownAtom(format!("#{}", atom.0)));
    }
    program
        .context()
        .and_then(|c| c.membership(atom))
        .ok_or_else(|| EngineError::NotSorted(program.atom_name(atom).to_string()))
}

fn same_sort(program: &Program, a: AtomId, b: AtomId) -> Result<(), EngineError> {
    let ctx = program.context();
    let sort = |x| ctx.and_then(|c| c.sort_of(x));
    if sort(a) != sort(b) {
        return Err(EngineError::SortMismatch(
            program.atom_name(a).to_string(),
            program.atom_name(b).to_string(),
        ));
    }
    Ok(())
}

/// SU on program atoms.
pub fn apply_su(
    program: &Program,
    derived: (AtomId, Degree),
    target: AtomId,
) -> Result<(AtomId, Degree), EngineError> {
    let (source_set, target_set) = (
        sorted_set(program, derived.0)?,
        sorted_set(program, target)?,
    );
    same_sort(program, derived.0, target)?;
    Ok((target, su(derived.1, source_set, target_set)?))
}

/// IN on program atoms.
pub fn apply_in(
    program: &Program,
    first: (AtomId, Degree),
    second: (AtomId, Degree),
    target: AtomId,
) -> Result<Option<(AtomId, Degree)>, EngineError> {
    let (s1, s2, st) = (
        sorted_set(program, first.0)?,
        sorted_set(program, second.0)?,
        sorted_set(program, target)?,
    );
    same_sort(program, first.0, target)?;
    same_sort(program, second.0, target)?;
    Ok(intersection(first.1, s1, second.1, s2, st)?.map(|d| (target, d)))
}

/// UN on program atoms.
pub fn apply_un(
    program: &Program,
    derived: (AtomId, Degree),
    target: AtomId,
) -> Result<Option<(AtomId, Degree)>, EngineError> {
    let (source_set, target_set) = (
        sorted_set(program, derived.0)?,
        sorted_set(program, target)?,
    );
    same_sort(program, derived.0, target)?;
    Ok(un(derived.1, source_set, target_set)?.map(|d| (target, d)))
}

/// GMP for one clause against the current state; `None` unless it improves
/// the head.
pub fn apply_gmp(clause: &Clause, state: &DerivationState) -> Option<(AtomId, Degree)> {
    let degree = gmp(clause.weight, clause.body.iter().map(|b| state.degree(*b)));
    (degree > state.degree(clause.head)).then_some((clause.head, degree))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Strategy {
    /// Re-fire only rules whose premises improved.
    #[default]
    SemiNaive,
    /// Re-fire every rule on every pass.
    Naive,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineOptions {
    pub strategy: Strategy,
    /// Randomizes the order in which pending atoms are processed.
    pub schedule_seed: Option<u64>,
}

/// Best degree and proof for every atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationState {
    best: Vec<Degree>,
    proofs: Vec<Option<Arc<ProofNode>>>,
}

impl DerivationState {
    pub fn new(atoms: usize) -> Self {
        DerivationState {
            best: vec![Degree::ZERO; atoms],
            proofs: vec![None; atoms],
        }
    }

    pub fn degree(&self, atom: AtomId) -> Degree {
        self.best[atom.0]
    }

    pub fn degrees(&self) -> &[Degree] {
        &self.best
    }

    /// Proof of the current best degree; an `Axiom0` step when nothing was
    /// derived.
    pub fn proof(&self, atom: AtomId) -> Arc<ProofNode> {
        self.proofs[atom.0]
            .clone()
            .unwrap_or_else(|| Arc::new(ProofNode::axiom0(atom)))
    }

    fn premise(&self, atom: AtomId) -> Arc<ProofNode> {
        self.proof(atom)
    }

    fn offer(&mut self, node: ProofNode) -> bool {
        let slot = node.atom.0;
        if node.degree > self.best[slot] {
            self.best[slot] = node.degree;
            self.proofs[slot] = Some(Arc::new(node));
            true
        } else {
            false
        }
    }
}

/// Precomputed side conditions of the fuzzy-unification rules.
struct Tables {
    /// Sorted atoms grouped by sort.
    groups: Vec<Vec<AtomId>>,
    /// Sort group of each atom.
    group_of: Vec<Option<usize>>,
    /// `N(m(target) | m(source))`, keyed by (source, target).
    necessity: BTreeMap<(AtomId, AtomId), Degree>,
    /// IN targets for each unordered pair of same-sort atoms.
    in_targets: BTreeMap<(AtomId, AtomId), Vec<AtomId>>,
    /// Smallest premise degree at which UN fires, keyed by (source, target).
    un_threshold: BTreeMap<(AtomId, AtomId), Degree>,
}

impl Tables {
    fn new(program: &Program) -> Result<Self, EngineError> {
        let n = program.atoms().len();
        let mut group_of = vec![None; n];
        let mut groups: Vec<Vec<AtomId>> = Vec::new();
        if let Some(ctx) = program.context() {
            groups = vec![Vec::new(); ctx.sorts().len()];
            for (atom, sort, _) in ctx.sorted_atoms() {
                groups[sort.0].push(atom);
                group_of[atom.0] = Some(sort.0);
            }
        }
        let set = |a: AtomId| {
            program
                .context()
                .and_then(|c| c.membership(a))
                .expect("sorted atom")
        };

        let pairs: Vec<(AtomId, AtomId)> = groups
            .iter()
            .flat_map(|g| g.iter().flat_map(move |&a| g.iter().map(move |&b| (a, b))))
            .collect();
        let computed: Result<Vec<_>, FuzzyError> = pairs
            .par_iter()
            .map(|&(source, target)| {
                let (s, t) = (set(source), set(target));
                let nec = necessity_of_match(t, s)?;
                let floor = t
                    .memberships()
                    .iter()
                    .copied()
                    .min()
                    .unwrap_or(Degree::ZERO);
                let threshold = t.dominates(s)?.then(|| floor.complement());
                let meets: Vec<AtomId> = if source <= target {
                    let meet = s.pointwise_min(t)?;
                    let group = &groups[group_of[source.0].expect("sorted")];
                    let mut out = Vec::new();
                    for &cand in group {
                        if set(cand).dominates(&meet)? {
                            out.push(cand);
                        }
                    }
                    out
                } else {
                    Vec::new()
                };
                Ok(((source, target), nec, threshold, meets))
            })
            .collect();

        let mut tables = Tables {
            groups,
            group_of,
            necessity: BTreeMap::new(),
            in_targets: BTreeMap::new(),
            un_threshold: BTreeMap::new(),
        };
        for (key, nec, threshold, meets) in computed? {
            tables.necessity.insert(key, nec);
            if let Some(t) = threshold {
                tables.un_threshold.insert(key, t);
            }
            if key.0 <= key.1 {
                tables.in_targets.insert(key, meets);
            }
        }
        Ok(tables)
    }

    fn peers(&self, atom: AtomId) -> &[AtomId] {
        match self.group_of[atom.0] {
            Some(g) => &self.groups[g],
            None => &[],
        }
    }
}

/// Saturates `program` with default options.
pub fn saturate(program: &Program) -> Result<DerivationState, EngineError> {
    saturate_with(program, EngineOptions::default())
}

pub fn saturate_with(
    program: &Program,
    options: EngineOptions,
) -> Result<DerivationState, EngineError> {
    let tables = Tables::new(program)?;
    let mut state = DerivationState::new(program.atoms().len());
    let mut rules_by_body: Vec<Vec<usize>> = vec![Vec::new(); program.atoms().len()];
    for (i, clause) in program.clauses().iter().enumerate() {
        for b in &clause.body {
            rules_by_body[b.0].push(i);
        }
    }

    for (i, clause) in program.clauses().iter().enumerate() {
        if clause.is_fact() {
            state.offer(ProofNode {
                atom: clause.head,
                degree: clause.weight,
                rule: Rule::Fact,
                premises: Vec::new(),
                side_conditions: weight_note(clause.weight),
                clause: Some(i),
            });
        }
    }

    match options.strategy {
        Strategy::SemiNaive => {
            let mut rng = options.schedule_seed.map(ChaCha8Rng::seed_from_u64);
            let mut queue: VecDeque<AtomId> = program.atom_ids().collect();
            let mut queued = vec![true; program.atoms().len()];
            while !queue.is_empty() {
                let atom = match rng.as_mut() {
                    Some(rng) => {
                        let k = rng.gen_range(0..queue.len());
                        queue.swap_remove_back(k).expect("index in range")
                    }
                    None => queue.pop_front().expect("non-empty"),
                };
                queued[atom.0] = false;
                for improved in fire(program, &tables, &rules_by_body, &mut state, atom) {
                    if !queued[improved.0] {
                        queued[improved.0] = true;
                        queue.push_back(improved);
                    }
                }
            }
        }
        Strategy::Naive => loop {
            let mut changed = false;
            for atom in program.atom_ids() {
                changed |= !fire(program, &tables, &rules_by_body, &mut state, atom).is_empty();
            }
            if !changed {
                break;
            }
        },
    }
    Ok(state)
}

fn weight_note(weight: Degree) -> BTreeMap<String, Degree> {
    BTreeMap::from([("weight".to_string(), weight)])
}

/// Fires every rule instance having `atom` as a premise; returns the atoms
/// whose degree improved.
fn fire(
    program: &Program,
    tables: &Tables,
    rules_by_body: &[Vec<usize>],
    state: &mut DerivationState,
    atom: AtomId,
) -> Vec<AtomId> {
    let mut improved = Vec::new();
    let alpha = state.degree(atom);

    for &i in &rules_by_body[atom.0] {
        let clause = &program.clauses()[i];
        if let Some((head, degree)) = apply_gmp(clause, state) {
            let premises = clause.body.iter().map(|b| state.premise(*b)).collect();
            state.offer(ProofNode {
                atom: head,
                degree,
                rule: Rule::Gmp,
                premises,
                side_conditions: weight_note(clause.weight),
                clause: Some(i),
            });
            improved.push(head);
        }
    }

    for &target in tables.peers(atom) {
        let beta = tables.necessity[&(atom, target)];
        let degree = alpha.min(beta);
        if degree > state.degree(target) {
            let node = ProofNode {
                atom: target,
                degree,
                rule: Rule::Su,
                premises: vec![state.premise(atom)],
                side_conditions: BTreeMap::from([("beta".to_string(), beta)]),
                clause: None,
            };
            state.offer(node);
            improved.push(target);
        }

        if let Some(&threshold) = tables.un_threshold.get(&(atom, target)) {
            if alpha >= threshold && state.degree(target) < Degree::ONE {
                let node = ProofNode {
                    atom: target,
                    degree: Degree::ONE,
                    rule: Rule::Un,
                    premises: vec![state.premise(atom)],
                    side_conditions: BTreeMap::from([("floor".to_string(), alpha.complement())]),
                    clause: None,
                };
                state.offer(node);
                improved.push(target);
            }
        }
    }

    for &other in tables.peers(atom) {
        let key = if atom <= other {
            (atom, other)
        } else {
            (other, atom)
        };
        let degree = alpha.min(state.degree(other));
        for &target in &tables.in_targets[&key] {
            if degree > state.degree(target) {
                let node = ProofNode {
                    atom: target,
                    degree,
                    rule: Rule::In,
                    premises: vec![state.premise(key.0), state.premise(key.1)],
                    side_conditions: BTreeMap::new(),
                    clause: None,
                };
                state.offer(node);
                improved.push(target);
            }
        }
    }
    improved
}

/// Maximum degree of deduction of `goal`, with its proof.
pub fn query(program: &Program, goal: &str) -> Result<(Degree, Arc<ProofNode>), EngineError> {
    let atom = program
        .atom_id(goal)
        .ok_or_else(|| EngineError::UnknownAtom(goal.to_string()))?;
    let state = saturate(program)?;
    Ok((state.degree(atom), state.proof(atom)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, ProgramBuilder};
    use proptest::prelude::*;
    use proptest::strategy::Strategy;

    const FRIENDSHIP: &str = "
clause (mary_is_young, 0.8)
clause (john_is_young, 0.9)
clause (mary_is_young & john_is_young -> friend_mary_john, 0.6)
";

    const JOHN_AGE: &str = "
sort john_years_old = 0..120
var john_is_about_16 : john_years_old = trapezoid(14, 16, 16, 18)
var john_is_14_16 : john_years_old = trapezoid(12, 14, 16, 18)
var john_is_16_18 : john_years_old = trapezoid(14, 16, 18, 20)
clause (john_is_14_16, 1)
clause (john_is_16_18, 1)
";

    fn d(num: i64, den: i64) -> Degree {
        Degree::ratio(num, den)
    }

    fn id(p: &Program, name: &str) -> AtomId {
        p.atom_id(name).unwrap()
    }

    #[test]
    fn friendship() {
        let p = parse_program(FRIENDSHIP).unwrap();
        let (degree, proof) = query(&p, "friend_mary_john").unwrap();
        assert_eq!(degree, d(3, 5));
        assert_eq!(proof.rule, Rule::Gmp);
        assert_eq!(proof.premises.len(), 2);
        proof.verify(&p).unwrap();
    }

    #[test]
    fn gmp_examples() {
        assert_eq!(gmp(d(3, 5), [d(4, 5), d(9, 10)]), d(3, 5));
        assert_eq!(gmp(d(7, 10), [d(2, 5)]), d(2, 5));
        let p = parse_program("clause (p -> q, 0.7)\nclause (p, 0.4)").unwrap();
        let mut state = DerivationState::new(2);
        assert_eq!(apply_gmp(&p.clauses()[0], &state), None);
        state.best[id(&p, "p").0] = d(2, 5);
        assert_eq!(
            apply_gmp(&p.clauses()[0], &state),
            Some((id(&p, "q"), d(2, 5)))
        );
    }

    #[test]
    fn recursive_only_rules_give_zero() {
        let p = parse_program("clause (p & q -> q, 0.9)\nclause (p, 1)").unwrap();
        assert_eq!(query(&p, "q").unwrap().0, Degree::ZERO);
        assert_eq!(query(&p, "q").unwrap().1.rule, Rule::Axiom0);
    }

    #[test]
    fn base_cases() {
        let mut b = ProgramBuilder::new();
        b.declare_atom("q").unwrap();
        let empty = b.build();
        assert_eq!(query(&empty, "q").unwrap().0, Degree::ZERO);
        assert!(matches!(
            query(&empty, "r"),
            Err(EngineError::UnknownAtom(_))
        ));

        let p = parse_program("clause (q, 0.35)").unwrap();
        assert_eq!(query(&p, "q").unwrap().0, d(7, 20));
        let p = parse_program("clause (r -> q, 0.35)").unwrap();
        assert_eq!(query(&p, "q").unwrap().0, Degree::ZERO);
    }

    #[test]
    fn john_age() {
        let p = parse_program(JOHN_AGE).unwrap();
        let about = id(&p, "john_is_about_16");
        for premise in ["john_is_14_16", "john_is_16_18"] {
            let (_, degree) = apply_su(&p, (id(&p, premise), Degree::ONE), about).unwrap();
            assert_eq!(degree, Degree::ZERO);
        }
        let fired = apply_in(
            &p,
            (id(&p, "john_is_14_16"), Degree::ONE),
            (id(&p, "john_is_16_18"), Degree::ONE),
            about,
        )
        .unwrap();
        assert_eq!(fired, Some((about, Degree::ONE)));

        let (degree, proof) = query(&p, "john_is_about_16").unwrap();
        assert_eq!(degree, Degree::ONE);
        assert_eq!(proof.rule, Rule::In);
        let names: Vec<&str> = proof.premises.iter().map(|n| p.atom_name(n.atom)).collect();
        assert_eq!(names, ["john_is_14_16", "john_is_16_18"]);
        proof.verify(&p).unwrap();
    }

    const NESTED: &str = "
sort s = 0..10
var narrow : s = trapezoid(4, 5, 5, 6)
var wide : s = trapezoid(2, 4, 6, 8)
";

    #[test]
    fn su_examples() {
        let p = parse_program(NESTED).unwrap();
        let (narrow, wide) = (id(&p, "narrow"), id(&p, "wide"));
        assert_eq!(apply_su(&p, (narrow, d(9, 10)), wide).unwrap().1, d(9, 10));
        assert_eq!(
            apply_su(&p, (narrow, d(9, 10)), narrow).unwrap().1,
            d(9, 10)
        );
        assert!(matches!(
            apply_su(
                &parse_program("clause (a, 1)").unwrap(),
                (AtomId(0), Degree::ONE),
                AtomId(0)
            ),
            Err(EngineError::NotSorted(_))
        ));
    }

    #[test]
    fn in_examples() {
        let p = parse_program(NESTED).unwrap();
        let (narrow, wide) = (id(&p, "narrow"), id(&p, "wide"));
        assert_eq!(
            apply_in(&p, (wide, d(1, 2)), (wide, d(1, 2)), wide).unwrap(),
            Some((wide, d(1, 2)))
        );
        assert_eq!(
            apply_in(&p, (wide, Degree::ONE), (wide, Degree::ONE), narrow).unwrap(),
            None
        );
    }

    #[test]
    fn un_examples() {
        let p = parse_program(NESTED).unwrap();
        let (narrow, wide) = (id(&p, "narrow"), id(&p, "wide"));
        assert_eq!(
            apply_un(&p, (wide, Degree::ONE), wide).unwrap(),
            Some((wide, Degree::ONE))
        );
        assert_eq!(
            apply_un(&p, (narrow, Degree::ONE), wide).unwrap(),
            Some((wide, Degree::ONE))
        );
        assert_eq!(apply_un(&p, (narrow, d(99, 100)), wide).unwrap(), None);
        assert_eq!(apply_un(&p, (narrow, Degree::ZERO), wide).unwrap(), None);

        // a clipped target never attains 0, so it only exists as a transient set
        let ctx = p.context().unwrap();
        let narrow_set = ctx.membership(narrow).unwrap();
        let clipped = narrow_set.raised_to(d(2, 5));
        assert!(!clipped.is_normalized());
        assert_eq!(
            un(d(3, 5), narrow_set, &clipped).unwrap(),
            Some(Degree::ONE)
        );
        assert_eq!(un(d(1, 2), narrow_set, &clipped).unwrap(), None);

        let q = parse_program(&format!(
            "{NESTED}\nclause (narrow, 1)\nclause (narrow -> wide, 0.5)"
        ))
        .unwrap();
        let (degree, proof) = query(&q, "wide").unwrap();
        assert_eq!(degree, Degree::ONE);
        assert!(matches!(proof.rule, Rule::Un | Rule::Su | Rule::In));
        proof.verify(&q).unwrap();
        let (_, un_step) = apply_un(&q, (narrow, Degree::ONE), wide).unwrap().unwrap();
        assert_eq!(un_step, Degree::ONE);
    }

    #[test]
    fn tampered_proofs_fail_replay() {
        let p = parse_program(FRIENDSHIP).unwrap();
        let (_, proof) = query(&p, "friend_mary_john").unwrap();
        let mut bad = (*proof).clone();
        bad.degree = d(4, 5);
        assert!(bad.verify(&p).is_err());
        let mut bad = (*proof).clone();
        bad.premises.pop();
        assert!(bad.verify(&p).is_err());
        let mut bad = (*proof).clone();
        bad.rule = Rule::Su;
        assert!(bad.verify(&p).is_err());
    }

    #[test]
    fn trace_json_shape() {
        let p = parse_program(FRIENDSHIP).unwrap();
        let (_, proof) = query(&p, "friend_mary_john").unwrap();
        let trace = proof.to_trace(&p);
        let json = serde_json::to_value(&trace).unwrap();
        assert_eq!(json["goal"], "friend_mary_john");
        assert_eq!(json["rule"], "GMP");
        assert_eq!(json["clause"], 2);
        assert_eq!(json["degree"], serde_json::json!({"num": 3, "den": 5}));
        assert_eq!(json["premises"][0]["rule"], "Fact");
        let back: TraceNode = serde_json::from_value(json).unwrap();
        assert_eq!(back, trace);
    }

    fn weight() -> impl Strategy<Value = Degree> {
        (0i64..=4).prop_map(|k| Degree::ratio(k, 4))
    }

    fn abstract_program() -> impl Strategy<Value = Program> {
        let clause = (
            proptest::collection::vec(0usize..4, 0..3),
            0usize..4,
            weight(),
        );
        proptest::collection::vec(clause, 0..7).prop_map(|clauses| {
            let mut b = ProgramBuilder::new();
            let atoms: Vec<AtomId> = (0..4).map(|i| b.atom(&format!("a{i}"))).collect();
            for (body, head, w) in clauses {
                let body: Vec<AtomId> = body.into_iter().map(|i| atoms[i]).collect();
                b.clause(Clause::new(body, atoms[head], w));
            }
            b.build()
        })
    }

    fn contextual_program() -> impl Strategy<Value = Program> {
        let trap = (0i64..6, 0i64..4, 0i64..4, 0i64..4);
        let clause = (
            proptest::collection::vec(0usize..5, 0..3),
            0usize..5,
            weight(),
        );
        (
            proptest::collection::vec(trap, 1..5),
            proptest::collection::vec(clause, 0..6),
        )
            .prop_map(|(traps, clauses)| {
                let mut text = String::from("sort s = 0..11\n");
                for (i, (a, b, c, e)) in traps.iter().enumerate() {
                    let (t2, t3) = (a + b, a + b + c);
                    text.push_str(&format!(
                        "var f{i} : s = trapezoid({a}, {t2}, {t3}, {})\n",
                        t3 + e
                    ));
                }
                for (body, head, w) in clauses {
                    let name = |k: usize| format!("f{}", k % traps.len());
                    let body: Vec<String> = body.into_iter().map(name).collect();
                    if body.is_empty() {
                        text.push_str(&format!("clause ({}, {w})\n", name(head)));
                    } else {
                        text.push_str(&format!(
                            "clause ({} -> {}, {w})\n",
                            body.join(" & "),
                            name(head)
                        ));
                    }
                }
                parse_program(&text).unwrap()
            })
    }

    fn any_program() -> impl Strategy<Value = Program> {
        prop_oneof![abstract_program(), contextual_program()]
    }

    /// `{0, 1}`, the weights and the necessity values, closed under min.
    fn lattice(p: &Program) -> Vec<Degree> {
        let mut l = vec![Degree::ZERO, Degree::ONE];
        l.extend(p.clauses().iter().map(|c| c.weight));
        if let Some(ctx) = p.context() {
            for (_, _, a) in ctx.sorted_atoms() {
                for (_, _, b) in ctx.sorted_atoms() {
                    l.push(necessity_of_match(b, a).unwrap());
                }
            }
        }
        l
    }

    proptest! {
        #[test]
        fn proofs_replay(p in any_program()) {
            let state = saturate(&p).unwrap();
            for atom in p.atom_ids() {
                let proof = state.proof(atom);
                prop_assert_eq!(proof.degree, state.degree(atom));
                prop_assert!(proof.verify(&p).is_ok(), "{:?}", proof.verify(&p));
            }
        }

        #[test]
        fn degrees_stay_in_the_lattice(p in any_program()) {
            let l = lattice(&p);
            for &degree in saturate(&p).unwrap().degrees() {
                prop_assert!(l.contains(&degree));
            }
        }

        #[test]
        fn strategies_and_schedules_agree(p in any_program(), seed in any::<u64>()) {
            let reference = saturate(&p).unwrap();
            let naive = saturate_with(&p, EngineOptions { strategy: super::Strategy::Naive, schedule_seed: None }).unwrap();
            let shuffled = saturate_with(&p, EngineOptions { schedule_seed: Some(seed), ..Default::default() }).unwrap();
            prop_assert_eq!(reference.degrees(), naive.degrees());
            prop_assert_eq!(reference.degrees(), shuffled.degrees());
        }

        #[test]
        fn adding_a_clause_never_lowers_a_degree(p in any_program(), head in 0usize..4, body in 0usize..4, w in weight()) {
            let n = p.atoms().len();
            let extra = if body % 2 == 0 {
                Clause::fact(AtomId(head % n), w)
            } else {
                Clause::new([AtomId(body % n)], AtomId(head % n), w)
            };
            let before = saturate(&p).unwrap();
            let after = saturate(&p.with_clause(extra)).unwrap();
            for atom in p.atom_ids() {
                prop_assert!(after.degree(atom) >= before.degree(atom));
            }
        }

        #[test]
        fn two_clause_chain(beta in weight(), gamma in weight()) {
            let mut b = ProgramBuilder::new();
            let (p, q) = (b.atom("p"), b.atom("q"));
            b.fact(p, beta).rule(&[p], q, gamma);
            let program = b.build();
            prop_assert_eq!(query(&program, "q").unwrap().0, beta.min(gamma));
        }

        #[test]
        fn clauses_using_the_goal_are_irrelevant(p in abstract_program(), goal in 0usize..4) {
            let goal = AtomId(goal);
            let degree = saturate(&p).unwrap().degree(goal);
            for (i, c) in p.clauses().iter().enumerate() {
                if c.body.contains(&goal) {
                    prop_assert_eq!(saturate(&p.without_clause(i)).unwrap().degree(goal), degree);
                }
            }
        }
    }
}
