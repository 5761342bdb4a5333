use std::fmt::Write;

use super::ast::{MembershipSource, Program};
use crate::degrees::format_rational;
use crate::fuzzy::DomainShape;

/// Renders a program in the `.pgl` surface syntax.
///
/// Every atom is declared explicitly, in id order, so the output reparses to
/// a structurally equal program.
pub fn format_program(program: &Program) -> String {
    let mut out = String::from("# context\n");
    if let Some(ctx) = program.context() {
        for domain in ctx.sorts() {
            match domain.shape() {
                DomainShape::Range { lo, hi, step } => {
                    write!(
                        out,
                        "sort {} = {}..{}",
                        domain.name(),
                        format_rational(lo),
                        format_rational(hi)
                    )
                    .unwrap();
                    if !step.is_integer() || *step.numer() != 1 {
                        write!(out, " step {}", format_rational(step)).unwrap();
                    }
                    if let Some(unit) = domain.unit() {
                        write!(out, " unit {unit}").unwrap();
                    }
                }
                DomainShape::Labels => {
                    let labels: Vec<String> =
                        domain.elements().iter().map(|e| e.to_string()).collect();
                    write!(out, "sort {} = {{{}}}", domain.name(), labels.join(", ")).unwrap();
                }
            }
            out.push('\n');
        }
    }
    for id in program.atom_ids() {
        let decl = program.atom(id);
        let var = program.context().and_then(|c| c.var(id));
        match (decl.sort, var) {
            (Some(sort), Some(var)) => {
                let sort_name = program.context().unwrap().sort(sort).name();
                let body = match &var.source {
                    MembershipSource::Trapezoid(t) => {
                        let [t1, t2, t3, t4] = t.params().map(|p| format_rational(&p));
                        format!("trapezoid({t1}, {t2}, {t3}, {t4})")
                    }
                    MembershipSource::Explicit => var.set.to_string(),
                };
                writeln!(out, "var {} : {} = {}", decl.name, sort_name, body).unwrap();
            }
            _ => writeln!(out, "var {}", decl.name).unwrap(),
        }
    }
    if !program.clauses().is_empty() {
        out.push_str("# clauses\n");
    }
    for clause in program.clauses() {
        let head = program.atom_name(clause.head);
        if clause.is_fact() {
            writeln!(out, "clause ({head}, {})", clause.weight).unwrap();
        } else {
            let body: Vec<&str> = clause.body.iter().map(|a| program.atom_name(*a)).collect();
            writeln!(
                out,
                "clause ({} -> {head}, {})",
                body.join(" & "),
                clause.weight
            )
            .unwrap();
        }
    }
    for goal in program.queries() {
        writeln!(out, "query {}", program.atom_name(*goal)).unwrap();
    }
    out
}
