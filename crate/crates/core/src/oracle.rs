//! Independent ground truth for the engine.
//!
//! The semantic oracle builds the least-specific model of a program over an
//! enumerated interpretation space, evaluating clause formulas with the
//! Gödel evaluator. The syntactic oracle enumerates every reachable
//! `(atom, degree)` pair under the inference rules. Neither shares code with
//! the saturation engine beyond the fuzzy-set primitives.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::degrees::{max_all, min_all, Degree};
use crate::fuzzy::{necessity_of_match, FuzzyError, FuzzySet};
use crate::semantics::{
    default_truth_grid, enumerate_interpretations, eval_with, necessity, Interpretation,
    InterpretationSpace, PossibilityDistribution, SemanticsError,
};
use crate::syntax::{AtomId, Formula, Program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error("interpretation is not in the space")]
    MissingInterpretation,
    #[error("witness precondition fails: {0}")]
    Precondition(String),
}

/// Pointwise largest distribution satisfying every clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeastSpecificModel {
    pub space: Arc<InterpretationSpace>,
    pub pi_star: Vec<Degree>,
    pub normalized: bool,
}

impl LeastSpecificModel {
    /// The model as a distribution, when it is normalized.
    pub fn distribution(&self) -> Option<PossibilityDistribution> {
        PossibilityDistribution::new(self.space.clone(), self.pi_star.clone()).ok()
    }
}

/// `pi_star(I) = min_j max(1 − α_j, I(φ_j))`.
pub fn least_specific_model(
    program: &Program,
    space: &Arc<InterpretationSpace>,
) -> Result<LeastSpecificModel, OracleError> {
    let valuations = space.valuations(program)?;
    let formulas: Vec<(Formula, Degree)> = program
        .clauses()
        .iter()
        .map(|c| (c.formula(), c.weight))
        .collect();
    let pi_star: Vec<Degree> = valuations
        .par_iter()
        .map(|v| {
            min_all(
                formulas
                    .iter()
                    .map(|(f, w)| w.complement().max(eval_with(f, v))),
            )
        })
        .collect();
    let normalized = pi_star.iter().any(|d| d.is_one());
    Ok(LeastSpecificModel {
        space: space.clone(),
        pi_star,
        normalized,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SemanticDegree {
    pub degree: Degree,
    /// `false` when no distribution satisfies the program; the degree is
    /// then 1.
    pub satisfiable: bool,
}

/// Necessity of `goal` under the least-specific model.
pub fn semantic_degree(
    program: &Program,
    goal: AtomId,
    space: &Arc<InterpretationSpace>,
) -> Result<SemanticDegree, OracleError> {
    let model = least_specific_model(program, space)?;
    semantic_degree_in(&model, program, goal)
}

/// As [`semantic_degree`], reusing a computed model.
pub fn semantic_degree_in(
    model: &LeastSpecificModel,
    program: &Program,
    goal: AtomId,
) -> Result<SemanticDegree, OracleError> {
    if !model.normalized {
        return Ok(SemanticDegree {
            degree: Degree::ONE,
            satisfiable: false,
        });
    }
    let truths = model
        .space
        .interpretations()
        .iter()
        .map(|i| i.atom_truth(goal, program))
        .collect::<Result<Vec<_>, _>>()?;
    let degree = necessity(model.pi_star.iter().copied().zip(truths));
    Ok(SemanticDegree {
        degree,
        satisfiable: true,
    })
}

/// Enumerates the default-grid space and returns the semantic degree of
/// `goal`.
pub fn semantic_query(
    program: &Program,
    goal: AtomId,
    max_space: usize,
) -> Result<SemanticDegree, OracleError> {
    let grid = default_truth_grid(program)?;
    let space = Arc::new(enumerate_interpretations(program, &grid, max_space)?);
    semantic_degree(program, goal, &space)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivationSearch {
    pub degree: Degree,
    /// The round budget ran out before the search closed.
    pub exhausted: bool,
}

/// Every `(atom, degree)` pair derivable from `program`, closed under the
/// axiom, facts, GMP, SU, IN, UN and weakening to degrees already seen. One
/// round applies every rule to the pairs known at its start.
pub fn derivable_pairs(program: &Program, max_rounds: usize) -> (BTreeSet<(AtomId, Degree)>, bool) {
    let mut known: BTreeSet<(AtomId, Degree)> =
        program.atom_ids().map(|a| (a, Degree::ZERO)).collect();
    let sorted: Vec<(AtomId, usize, &FuzzySet)> = program
        .context()
        .map(|c| c.sorted_atoms().map(|(a, s, set)| (a, s.0, set)).collect())
        .unwrap_or_default();

    for _ in 0..max_rounds {
        let mut next = known.clone();
        let by_atom = |a: AtomId| {
            known
                .range((a, Degree::ZERO)..=(a, Degree::ONE))
                .map(|&(_, d)| d)
        };

        for clause in program.clauses() {
            let mut combos: Vec<Degree> = vec![clause.weight];
            for &b in &clause.body {
                combos = combos
                    .iter()
                    .flat_map(|&acc| by_atom(b).map(move |d| acc.min(d)))
                    .collect();
            }
            next.extend(combos.into_iter().map(|d| (clause.head, d)));
        }

        for &(p, sp, mp) in &sorted {
            for &(target, st, mt) in &sorted {
                if sp != st {
                    continue;
                }
                let beta = necessity_of_match(mt, mp).expect("same sort");
                for alpha in by_atom(p) {
                    next.insert((target, alpha.min(beta)));
                    let floor = mp.raised_to(alpha.complement());
                    if mt.dominates(&floor).expect("same sort") {
                        next.insert((target, Degree::ONE));
                    }
                }
                for &(other, so, mo) in &sorted {
                    if so != sp {
                        continue;
                    }
                    let meet = mp.pointwise_min(mo).expect("same sort");
                    if !mt.dominates(&meet).expect("same sort") {
                        continue;
                    }
                    for alpha in by_atom(p) {
                        for beta in by_atom(other) {
                            next.insert((target, alpha.min(beta)));
                        }
                    }
                }
            }
        }

        let values: BTreeSet<Degree> = next.iter().map(|&(_, d)| d).collect();
        let weakened: Vec<(AtomId, Degree)> = next
            .iter()
            .flat_map(|&(a, d)| values.range(..d).map(move |&w| (a, w)))
            .collect();
        next.extend(weakened);

        if next == known {
            return (known, false);
        }
        known = next;
    }
    (known, true)
}

/// Largest degree for `goal` among all derivable pairs.
pub fn enumerate_derivations(
    program: &Program,
    goal: AtomId,
    max_rounds: usize,
) -> DerivationSearch {
    let (pairs, exhausted) = derivable_pairs(program, max_rounds);
    let degree = max_all(
        pairs
            .range((goal, Degree::ZERO)..=(goal, Degree::ONE))
            .map(|&(_, d)| d),
    );
    DerivationSearch { degree, exhausted }
}

/// The distributions used to certify upper bounds on a goal's degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// Single fact `(goal, γ)`: `I₁(goal) = 1`, `I₀(goal) < 1 − γ`.
    Fact { goal: AtomId, gamma: Degree },
    /// Single rule `(body → goal, γ)`: `I₀(body) ≤ I₀(goal) < 1`.
    Rule { body: AtomId, goal: AtomId },
    /// Heaviest non-recursive fact for `goal` in a larger program: `I₁` all
    /// true, `I₀` all true except `I₀(goal) < 1 − γ`.
    HeadMax { goal: AtomId, gamma: Degree },
}

/// Builds the one- or two-point distribution for `kind`. `I₀` is unused
/// (and may be `None`) when `γ = 1`; `I₁` is unused for the rule case.
pub fn witness_distribution(
    kind: WitnessKind,
    program: &Program,
    space: &Arc<InterpretationSpace>,
    i0: Option<&Interpretation>,
    i1: Option<&Interpretation>,
) -> Result<PossibilityDistribution, OracleError> {
    let locate = |i: Option<&Interpretation>| -> Result<(usize, Vec<Degree>), OracleError> {
        let i = i.ok_or(OracleError::MissingInterpretation)?;
        let at = space
            .position(i)
            .ok_or(OracleError::MissingInterpretation)?;
        Ok((at, i.valuation(program)?))
    };
    let check = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(OracleError::Precondition(what.to_string()))
        }
    };
    let points = match kind {
        WitnessKind::Rule { body, goal } => {
            let (at, v) = locate(i0)?;
            check(
                v[body.0] <= v[goal.0] && v[goal.0] < Degree::ONE,
                "I0(body) <= I0(goal) < 1",
            )?;
            vec![(at, Degree::ONE)]
        }
        WitnessKind::Fact { goal, gamma } | WitnessKind::HeadMax { goal, gamma } => {
            let all_true = matches!(kind, WitnessKind::HeadMax { .. });
            let (at1, v1) = locate(i1)?;
            if all_true {
                check(v1.iter().all(|d| d.is_one()), "I1 maps every atom to 1")?;
            } else {
                check(v1[goal.0].is_one(), "I1(goal) = 1")?;
            }
            let mut points = vec![(at1, Degree::ONE)];
            if !gamma.is_one() {
                let (at0, v0) = locate(i0)?;
                check(v0[goal.0] < gamma.complement(), "I0(goal) < 1 - gamma")?;
                if all_true {
                    let others = v0
                        .iter()
                        .enumerate()
                        .all(|(k, d)| k == goal.0 || d.is_one());
                    check(others, "I0 maps every other atom to 1")?;
                }
                points.push((at0, gamma.complement()));
            }
            points
        }
    };
    Ok(PossibilityDistribution::sparse(space.clone(), &points)?)
}
