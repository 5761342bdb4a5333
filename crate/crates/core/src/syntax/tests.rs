use proptest::prelude::*;

use super::*;
use crate::degrees::Degree;
use crate::fuzzy::{Element, Trapezoid};

const FRIENDSHIP: &str = "
# two facts and a two-premise rule
clause (mary_is_young, 0.8)
clause (john_is_young, 0.9)
clause (mary_is_young & john_is_young -> friend_mary_john, 0.6)
query friend_mary_john
";

const JOHN_AGE: &str = "
sort john_years_old = 0..120 unit years
var john_is_about_16 : john_years_old = trapezoid(14, 16, 16, 18)
var john_is_14_16 : john_years_old = trapezoid(12, 14, 16, 18)
var john_is_16_18 : john_years_old = trapezoid(14, 16, 18, 20)
clause (john_is_14_16, 1)
clause (john_is_16_18, 1)
query john_is_about_16
";

#[test]
fn friendship_shape() {
    let p = parse_program(FRIENDSHIP).unwrap();
    let facts = p.clauses().iter().filter(|c| c.is_fact()).count();
    assert_eq!(facts, 2);
    let rule = p.clauses().iter().find(|c| !c.is_fact()).unwrap();
    assert_eq!(rule.body.len(), 2);
    assert_eq!(rule.weight, Degree::ratio(3, 5));
    assert_eq!(p.atom_name(rule.head), "friend_mary_john");
    assert!(p.is_context_free());
    assert_eq!(p.queries(), &[p.atom_id("friend_mary_john").unwrap()]);
}

#[test]
fn zero_weight_and_recursive_clauses() {
    let p = parse_program("clause (q, 0)").unwrap();
    assert_eq!(p.clauses()[0].weight, Degree::ZERO);
    let p = parse_program("clause (p & q -> q, 0.5)").unwrap();
    assert!(p.clauses()[0].is_recursive());
    assert!(!parse_program("clause (p -> q, 0.5)").unwrap().clauses()[0].is_recursive());
}

#[test]
fn duplicate_body_atoms_collapse() {
    let p = parse_program("clause (a & b & a -> c, 1)").unwrap();
    assert_eq!(p.clauses()[0].body.len(), 2);
}

#[test]
fn john_age_context() {
    let p = parse_program(JOHN_AGE).unwrap();
    assert!(!p.is_context_free());
    let ctx = p.context().unwrap();
    assert_eq!(ctx.sorts()[0].len(), 121);
    assert_eq!(ctx.sorts()[0].unit(), Some("years"));
    let about = p.atom_id("john_is_about_16").unwrap();
    let set = ctx.membership(about).unwrap();
    assert_eq!(
        set.membership(&Element::Number(15.into())),
        Some(Degree::ratio(1, 2))
    );
    match &ctx.var(about).unwrap().source {
        MembershipSource::Trapezoid(t) => assert_eq!(*t, Trapezoid::integers(14, 16, 16, 18)),
        other => panic!("unexpected source {other:?}"),
    }
}

#[test]
fn explicit_membership_maps() {
    let text = "
sort colour = {red, amber, green}
var stop : colour = {red: 1, amber: 0.5}
clause (stop, 0.7)
";
    let p = parse_program(text).unwrap();
    let set = p
        .context()
        .unwrap()
        .membership(p.atom_id("stop").unwrap())
        .unwrap();
    assert_eq!(set.to_string(), "{red: 1, amber: 0.5, green: 0}");
}

#[test]
fn declaration_order_is_free() {
    let text = "clause (a -> b, 1)\nvar b\nvar a\nquery a";
    let p = parse_program(text).unwrap();
    assert_eq!(p.atom_name(AtomId(0)), "b");
    assert_eq!(p.atom_name(AtomId(1)), "a");
}

fn diag(text: &str) -> Diagnostic {
    parse_program(text).expect_err("expected a diagnostic")
}

#[test]
fn diagnostics_carry_locations() {
    let d = diag("clause (a, 0.5)\nclause (b 0.5)");
    assert_eq!(d.kind, DiagnosticKind::Syntax);
    assert_eq!((d.location.line, d.location.column), (2, 11));

    let d = diag("var x : nosuch = trapezoid(0, 1, 1, 2)");
    assert_eq!(d.kind, DiagnosticKind::UndeclaredSort);
    assert_eq!(d.location.column, 9);

    let d = diag("clause (a, 0.5)\nquery zzz");
    assert_eq!(d.kind, DiagnosticKind::UndeclaredAtom);
    assert_eq!(d.location.line, 2);

    let d = diag("clause (a, 1.5)");
    assert_eq!(d.kind, DiagnosticKind::WeightOutOfRange);
    assert_eq!(d.location.column, 12);

    let d = diag("sort s = 0..10\nvar x : s = trapezoid(-5, -4, 20, 30)");
    assert_eq!(d.kind, DiagnosticKind::NotNormalized);
    assert_eq!(d.location.line, 2);

    let d = diag("sort s = {a, b}\nvar x : s = {a: 0.5, b: 0}");
    assert_eq!(d.kind, DiagnosticKind::NotNormalized);

    let d = diag("sort s = 0..3\nvar x : s = {0: 1, 7: 0}");
    assert_eq!(d.kind, DiagnosticKind::InvalidDomain);

    let d = diag("var a\nvar a");
    assert_eq!(d.kind, DiagnosticKind::Duplicate);

    let d = diag("clause (a, 0.5) @");
    assert_eq!(d.location.column, 17);

    let d = diag("sort s = 0..3\nsort s = 0..4");
    assert_eq!(d.kind, DiagnosticKind::Duplicate);
}

#[test]
fn format_examples() {
    let empty = format_program(&Program::default());
    assert_eq!(empty, "# context\n");
    assert_eq!(parse_program(&empty).unwrap(), Program::default());

    let p = parse_program(FRIENDSHIP).unwrap();
    assert_eq!(parse_program(&format_program(&p)).unwrap(), p);

    let p = parse_program(JOHN_AGE).unwrap();
    let text = format_program(&p);
    assert!(text.contains("trapezoid(14, 16, 16, 18)"), "{text}");
    assert!(
        text.contains("sort john_years_old = 0..120 unit years"),
        "{text}"
    );
    assert_eq!(parse_program(&text).unwrap(), p);
}

#[test]
fn format_keeps_rational_parameters() {
    let text = "sort s = 0..10 step 1/2\nvar x : s = trapezoid(1/3, 2, 2.5, 7)\nclause (x, 1/3)";
    let p = parse_program(text).unwrap();
    let out = format_program(&p);
    assert!(out.contains("step 0.5"), "{out}");
    assert!(out.contains("trapezoid(1/3, 2, 2.5, 7)"), "{out}");
    assert!(out.contains("clause (x, 1/3)"), "{out}");
    assert_eq!(parse_program(&out).unwrap(), p);
}

fn weight() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u32..=8).prop_map(|k| format!("{}", k as f64 / 8.0)),
        (1i64..=9, 1i64..=9).prop_map(|(a, b)| format!("{}/{}", a.min(b), a.max(b))),
    ]
}

fn random_program() -> impl Strategy<Value = String> {
    let clause = (
        proptest::collection::vec(0usize..5, 0..4),
        0usize..5,
        weight(),
    );
    let fuzzy = proptest::collection::vec((0i64..5, 0i64..3, 0i64..3, 0i64..5), 0..3);
    (
        proptest::collection::vec(clause, 0..7),
        fuzzy,
        proptest::collection::vec(0usize..5, 0..2),
    )
        .prop_map(|(clauses, fuzzy, queries)| {
            let mut text = String::new();
            if !fuzzy.is_empty() {
                text.push_str("sort s = 0..20\n");
            }
            for (i, (a, b, c, d)) in fuzzy.iter().enumerate() {
                let t1 = a;
                let t2 = t1 + b;
                let t3 = t2 + c;
                let t4 = t3 + d;
                text.push_str(&format!(
                    "var f{i} : s = trapezoid({t1}, {t2}, {t3}, {t4})\n"
                ));
            }
            let name = |k: usize| {
                if k < fuzzy.len() {
                    format!("f{k}")
                } else {
                    format!("a{k}")
                }
            };
            for (body, head, w) in &clauses {
                if body.is_empty() {
                    text.push_str(&format!("clause ({}, {w})\n", name(*head)));
                } else {
                    let body: Vec<String> = body.iter().map(|b| name(*b)).collect();
                    text.push_str(&format!(
                        "clause ({} -> {}, {w})\n",
                        body.join(" & "),
                        name(*head)
                    ));
                }
            }
            for q in queries {
                if clauses.iter().any(|(b, h, _)| *h == q || b.contains(&q)) || q < fuzzy.len() {
                    text.push_str(&format!("query {}\n", name(q)));
                }
            }
            text
        })
}

proptest! {
    #[test]
    fn round_trip(text in random_program()) {
        let p = parse_program(&text).unwrap();
        let formatted = format_program(&p);
        prop_assert_eq!(parse_program(&formatted).unwrap(), p);
    }

    #[test]
    fn malformed_input_never_panics(text in "\\PC{0,80}") {
        let _ = parse_program(&text);
    }

    #[test]
    fn mutated_programs_never_panic(text in random_program(), cut in 0usize..200, junk in "[(){}:,&>.=0-9a-z# -]{0,6}") {
        let mut mutated: String = text.chars().take(cut).collect();
        mutated.push_str(&junk);
        mutated.extend(text.chars().skip(cut));
        if let Err(d) = parse_program(&mutated) {
            prop_assert!(d.location.line >= 1 && d.location.column >= 1);
        }
    }
}
