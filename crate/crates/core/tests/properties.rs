mod common;

use common::{load, scenarios_dir};
use proptest::prelude::*;
use versekit::dsl::ast::{Expr, ExprKind};
use versekit::dsl::{detokenize, tokenize};
use versekit::extract::{clip_guard, eval_bool, eval_num, AgentView, EvalEnv, TriBool};
use versekit::scenario::HybridAutomaton;
use versekit::HyperRect;

fn kinds(src: &str) -> Vec<(versekit::dsl::TokenKind, String)> {
    tokenize(src).unwrap().into_iter().map(|t| (t.kind, t.lexeme)).collect()
}

fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        "[a-z][a-z0-9_]{0,6}(\\.[a-z_]{1,5})?",
        (0u32..1000).prop_map(|n| n.to_string()),
        (0.0f64..100.0).prop_map(|x| format!("{x}")),
        (1u32..9, -3i32..4).prop_map(|(m, e)| format!("{m}e{e}")),
        "[a-z ]{0,8}".prop_map(|s| format!("\"{s}\\\"x\"")),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "<", "<=", "==", "!=", ">=", "and", "or"]), inner.clone())
                .prop_map(|(a, op, b)| format!("{a} {op} {b}")),
            inner.clone().prop_map(|a| format!("not {a}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("f({a},\n        {b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("any({a} for o in others if {b})")),
        ]
    })
}

fn stmt(depth: usize) -> BoxedStrategy<String> {
    let simple = prop_oneof![
        Just("pass".to_string()),
        expr().prop_map(|e| format!("x = {e}  # note")),
        expr().prop_map(|e| format!("assert {e}, 'label'")),
    ];
    if depth == 0 {
        return simple.boxed();
    }
    prop_oneof![
        simple,
        (expr(), prop::collection::vec(stmt(depth - 1), 1..3), prop::collection::vec(stmt(depth - 1), 0..2)).prop_map(|(c, a, b)| {
            let mut s = format!("if {c}:\n");
            for x in a {
                s += &indent(&x);
            }
            if !b.is_empty() {
                s += "else:\n";
                for x in b {
                    s += &indent(&x);
                }
            }
            s
        }),
    ]
    .boxed()
}

fn indent(block: &str) -> String {
    block.lines().map(|l| format!("    {l}\n")).collect()
}

proptest! {
    #[test]
    fn tokens_survive_detokenizing(body in prop::collection::vec(stmt(2), 1..4)) {
        let mut src = "def decision(ego, others):\n".to_string();
        for s in &body {
            src += &indent(s);
        }
        let once = kinds(&src);
        let again = kinds(&detokenize(&tokenize(&src).unwrap()));
        prop_assert_eq!(once, again);
    }
}

#[test]
fn corpus_tokens_survive_detokenizing() {
    for f in std::fs::read_dir(scenarios_dir().join("logic")).unwrap() {
        let src = std::fs::read_to_string(f.unwrap().path()).unwrap();
        assert_eq!(kinds(&src), kinds(&detokenize(&tokenize(&src).unwrap())));
    }
}

fn numeric_terms<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match &e.kind {
        ExprKind::Compare(first, rest) => {
            // Mode operands fail `eval_num` and are skipped by the caller.
            out.push(first);
            out.extend(rest.iter().map(|r| &r.1));
        }
        ExprKind::Unary(_, a) => numeric_terms(a, out),
        ExprKind::Binary(_, a, b) => {
            numeric_terms(a, out);
            numeric_terms(b, out);
        }
        _ => {}
    }
}

fn env<'a>(aut: &'a HybridAutomaton, ego: usize, rects: &'a [HyperRect]) -> EvalEnv<'a> {
    let view = |i: usize| AgentView {
        rect: &rects[i],
        tactical: &aut.initial_modes[i].tactical,
        track: &aut.initial_modes[i].track,
    };
    EvalEnv {
        fields: &aut.agents[ego].fields,
        pos_dims: aut.agents[ego].pos_dims,
        ego: view(ego),
        others: (0..rects.len()).filter(|i| *i != ego).map(view).collect(),
        map: aut.map.as_ref(),
    }
}

/// Boxes near each agent's initial set, and points drawn from them.
fn boxes_and_points(aut: &HybridAutomaton) -> impl Strategy<Value = (Vec<HyperRect>, Vec<Vec<Vec<f64>>>)> {
    let dims: Vec<(usize, Vec<f64>)> = aut.initial.iter().map(|r| (r.dim(), r.center())).collect();
    let per_agent: Vec<_> = dims
        .into_iter()
        .map(|(n, c)| {
            prop::collection::vec((-6.0f64..6.0, 0.0f64..2.0), n).prop_map(move |v| {
                let lo: Vec<f64> = v.iter().zip(&c).map(|((o, _), c)| c + o).collect();
                let hi: Vec<f64> = lo.iter().zip(&v).map(|(l, (_, w))| l + w).collect();
                HyperRect::from_bounds(&lo, &hi).unwrap()
            })
        })
        .collect();
    per_agent.prop_flat_map(|rects| {
        let samples: Vec<_> = rects
            .iter()
            .map(|r| r.dims().iter().map(|iv| iv.lo..=iv.hi).collect::<Vec<_>>())
            .collect();
        (Just(rects), prop::collection::vec(samples, 20))
    })
}

fn guards(aut: &HybridAutomaton) -> Vec<(usize, Expr)> {
    let mut out = Vec::new();
    for (i, a) in aut.agents.iter().enumerate() {
        out.extend(a.transitions.iter().map(|t| (i, t.guard.clone())));
        out.extend(a.asserts.iter().map(|s| (i, s.predicate.clone())));
    }
    out
}

fn interval_soundness(aut: &HybridAutomaton, rects: &[HyperRect], points: &[Vec<Vec<f64>>]) -> Result<(), TestCaseError> {
    for (ego, g) in guards(aut) {
        let verdict = eval_bool(&g, &env(aut, ego, rects)).unwrap();
        let mut terms = Vec::new();
        numeric_terms(&g, &mut terms);
        let ranges: Vec<_> = terms.iter().map(|t| eval_num(t, &env(aut, ego, rects)).ok()).collect();
        let clipped = clip_guard(&g, &env(aut, ego, rects));
        for p in points {
            let prs: Vec<HyperRect> = p.iter().map(|s| HyperRect::point(s).unwrap()).collect();
            let penv = env(aut, ego, &prs);
            let concrete = eval_bool(&g, &penv).unwrap();
            prop_assert!(concrete != TriBool::Unknown, "point verdict of {}", g);
            if verdict != TriBool::Unknown {
                prop_assert_eq!(concrete, verdict, "{}", g);
            }
            if concrete == TriBool::DefTrue {
                let c = clipped.as_ref();
                prop_assert!(c.is_some_and(|c| c.contains_point(&p[ego])), "clip of {} drops {:?}", g, p[ego]);
            }
            for (t, range) in terms.iter().zip(&ranges) {
                if let (Some(range), Ok(v)) = (range, eval_num(t, &penv)) {
                    prop_assert!(range.lo <= v.lo && v.hi <= range.hi, "{} = {:?} outside {:?}", t, v, range);
                }
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn drone_guards_are_sound_over_boxes((rects, points) in boxes_and_points(&load("drone3_m5.json").0)) {
        interval_soundness(&load("drone3_m5.json").0, &rects, &points)?;
    }

    #[test]
    fn car_guards_are_sound_over_boxes((rects, points) in boxes_and_points(&load("car3_m1.json").0)) {
        interval_soundness(&load("car3_m1.json").0, &rects, &points)?;
    }

    #[test]
    fn noise_only_widens_where_guards_may_fire((rects, _) in boxes_and_points(&load("car3_m1.json").0)) {
        let (clear, _) = load("car3_m1.json");
        let (noisy, _) = load("car3_noisy_m1.json");
        for c in clear.candidates(&clear.initial_modes) {
            let a = clear.guard_on_sets(&c, &rects, &clear.initial_modes).unwrap();
            let b = noisy.guard_on_sets(&c, &rects, &noisy.initial_modes).unwrap();
            if b == TriBool::DefFalse {
                prop_assert_eq!(a, TriBool::DefFalse);
            }
            if a == TriBool::DefTrue {
                prop_assert!(b != TriBool::DefFalse);
            }
        }
    }
}
