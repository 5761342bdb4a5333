//! Seeded random program generators shared by integration tests.

#![allow(dead_code)]

use pgl_core::degrees::Degree;
use pgl_core::fuzzy::{FuzzySet, SortDomain, Trapezoid};
use pgl_core::syntax::{AtomId, Clause, FuzzyVar, MembershipSource, Program, ProgramBuilder};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn weights() -> [Degree; 5] {
    [0, 1, 2, 3, 4].map(|k| Degree::ratio(k, 4))
}

pub fn weight(rng: &mut TestRng) -> Degree {
    *weights().choose(rng).unwrap()
}

fn random_clause(rng: &mut TestRng, atoms: &[AtomId]) -> Clause {
    let body_len = rng.gen_range(0..=3);
    let body: Vec<AtomId> = (0..body_len).map(|_| *atoms.choose(rng).unwrap()).collect();
    Clause::new(body, *atoms.choose(rng).unwrap(), weight(rng))
}

/// Up to `max_atoms` abstract atoms and `max_clauses` clauses with bodies of
/// up to three atoms. Recursive clauses occur naturally.
pub fn abstract_program(rng: &mut TestRng, max_atoms: usize, max_clauses: usize) -> Program {
    let mut b = ProgramBuilder::new();
    let n = rng.gen_range(1..=max_atoms);
    let atoms: Vec<AtomId> = (0..n).map(|i| b.atom(&format!("a{i}"))).collect();
    for _ in 0..rng.gen_range(0..=max_clauses) {
        b.clause(random_clause(rng, &atoms));
    }
    b.build()
}

fn random_membership(rng: &mut TestRng, domain: &std::sync::Arc<SortDomain>) -> FuzzyVar {
    let n = domain.len() as i64;
    if rng.gen_bool(0.5) {
        loop {
            let mut t: Vec<i64> = (0..4).map(|_| rng.gen_range(-1..=n)).collect();
            t.sort();
            let trap = Trapezoid::integers(t[0], t[1], t[2], t[3]);
            if let Ok(set) = trap.to_fuzzy(domain) {
                return FuzzyVar {
                    source: MembershipSource::Trapezoid(trap),
                    set,
                };
            }
        }
    }
    let mut values: Vec<Degree> = (0..domain.len()).map(|_| weight(rng)).collect();
    let top = rng.gen_range(0..values.len());
    let mut bottom = rng.gen_range(0..values.len() - 1);
    if bottom >= top {
        bottom += 1;
    }
    values[top] = Degree::ONE;
    values[bottom] = Degree::ZERO;
    let set = FuzzySet::new(domain.clone(), values).unwrap();
    FuzzyVar {
        source: MembershipSource::Explicit,
        set,
    }
}

/// One sort over `0..k` (2 ≤ k ≤ `max_elements`), up to `max_vars` fuzzy
/// variables with trapezoid or explicit memberships, and up to
/// `max_clauses` clauses over them.
pub fn contextual_program(
    rng: &mut TestRng,
    max_elements: usize,
    max_vars: usize,
    max_clauses: usize,
) -> Program {
    let mut b = ProgramBuilder::new();
    let k = rng.gen_range(2..=max_elements) as i64;
    let sort = b
        .sort(SortDomain::range("s", 0.into(), (k - 1).into(), 1.into()).unwrap())
        .unwrap();
    let domain = b.domain(sort).clone();
    let vars = rng.gen_range(1..=max_vars);
    let atoms: Vec<AtomId> = (0..vars)
        .map(|i| {
            let var = random_membership(rng, &domain);
            b.fuzzy_atom(&format!("f{i}"), sort, var).unwrap()
        })
        .collect();
    for _ in 0..rng.gen_range(0..=max_clauses) {
        b.clause(random_clause(rng, &atoms));
    }
    b.build()
}
