use std::collections::BTreeMap;

use cfair::causal::{Edge, WeightedDag};
use cfair::scm::{Equation, Intervention, Scm};
use proptest::prelude::*;

/// Random linear SCM over `p` nodes in index order, edges only forward.
fn arb_scm() -> impl Strategy<Value = Scm> {
    (2usize..7)
        .prop_flat_map(|p| {
            let pairs = p * (p - 1) / 2;
            (
                Just(p),
                prop::collection::vec(prop::option::weighted(0.5, -2.0..2.0f64), pairs),
                prop::collection::vec(-3.0..3.0f64, p),
            )
        })
        .prop_map(|(p, weights, intercepts)| {
            let nodes: Vec<String> = (0..p).map(|i| format!("v{i}")).collect();
            let mut edges = Vec::new();
            let mut k = 0;
            for j in 0..p {
                for i in 0..j {
                    if let Some(w) = weights[k] {
                        edges.push(Edge {
                            from: nodes[i].clone(),
                            to: nodes[j].clone(),
                            weight: w,
                        });
                    }
                    k += 1;
                }
            }
            let dag = WeightedDag::new(nodes.clone(), edges).unwrap();
            let mut equations = BTreeMap::new();
            for (j, node) in nodes.iter().enumerate() {
                let parents = dag.parents(node);
                if !parents.is_empty() {
                    equations.insert(
                        node.clone(),
                        Equation {
                            intercept: intercepts[j],
                            coef: parents.iter().map(|(p, w)| (p.to_string(), *w)).collect(),
                        },
                    );
                }
            }
            let noise = nodes.iter().map(|n| (n.clone(), 1.0)).collect();
            Scm::from_parts(dag, equations, noise).unwrap()
        })
}

fn arb_case() -> impl Strategy<Value = (Scm, Vec<f64>, usize, f64)> {
    arb_scm().prop_flat_map(|scm| {
        let p = scm.graph().nodes().len();
        (
            Just(scm),
            prop::collection::vec(-5.0..5.0f64, p),
            0..p,
            -5.0..5.0f64,
        )
    })
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

proptest! {
    #[test]
    fn factual_intervention_returns_the_instance((scm, x, node, _) in arb_case()) {
        let iv = Intervention { node: scm.graph().nodes()[node].clone(), value: x[node] };
        prop_assert_eq!(scm.counterfactual(&x, &iv).unwrap(), x);
    }

    #[test]
    fn abduction_then_prediction_reconstructs_the_instance((scm, x, _, _) in arb_case()) {
        let u = scm.abduct(&x).unwrap();
        let back = scm.predict_from_noise(&u).unwrap();
        prop_assert!(close(&back, &x, 1e-9), "{back:?} vs {x:?}");
    }

    #[test]
    fn intervention_only_moves_descendants((scm, x, node, value) in arb_case()) {
        let name = scm.graph().nodes()[node].clone();
        let desc = scm.graph().descendants(&name).unwrap();
        let cf = scm.counterfactual(&x, &Intervention { node: name.clone(), value }).unwrap();
        prop_assert_eq!(cf[node], value);
        for (i, n) in scm.graph().nodes().iter().enumerate() {
            if i != node && !desc.contains(n) {
                prop_assert_eq!(cf[i].to_bits(), x[i].to_bits());
            }
        }
    }

    #[test]
    fn counterfactual_keeps_the_abducted_noise((scm, x, node, value) in arb_case()) {
        let name = scm.graph().nodes()[node].clone();
        let cf = scm.counterfactual(&x, &Intervention { node: name, value }).unwrap();
        let u = scm.abduct(&x).unwrap().0;
        let v = scm.abduct(&cf).unwrap().0;
        for i in 0..x.len() {
            if i != node {
                prop_assert!((u[i] - v[i]).abs() <= 1e-9 * (1.0 + u[i].abs()));
            }
        }
    }

    #[test]
    fn undoing_an_intervention_recovers_the_instance((scm, x, node, value) in arb_case()) {
        let name = scm.graph().nodes()[node].clone();
        let there = scm.counterfactual(&x, &Intervention { node: name.clone(), value }).unwrap();
        let back = scm.counterfactual(&there, &Intervention { node: name, value: x[node] }).unwrap();
        prop_assert!(close(&back, &x, 1e-9), "{back:?} vs {x:?}");
    }

    #[test]
    fn later_intervention_on_the_same_node_wins((scm, x, node, value) in arb_case()) {
        let name = scm.graph().nodes()[node].clone();
        let first = scm.counterfactual(&x, &Intervention { node: name.clone(), value: value + 1.0 }).unwrap();
        let chained = scm.counterfactual(&first, &Intervention { node: name.clone(), value }).unwrap();
        let direct = scm.counterfactual(&x, &Intervention { node: name, value }).unwrap();
        prop_assert!(close(&chained, &direct, 1e-9));
    }

    #[test]
    fn json_round_trip_preserves_the_model(scm in arb_scm()) {
        let text = scm.to_json();
        let back = Scm::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back.equations(), scm.equations());
    }
}

#[test]
fn intervention_effect_is_the_total_causal_effect() {
    // a -> b -> c and a -> c: total effect of a on c is 2*3 + 0.5
    let dag = WeightedDag::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![
            Edge { from: "a".into(), to: "b".into(), weight: 2.0 },
            Edge { from: "b".into(), to: "c".into(), weight: 3.0 },
            Edge { from: "a".into(), to: "c".into(), weight: 0.5 },
        ],
    )
    .unwrap();
    let eq = |intercept: f64, coef: &[(&str, f64)]| Equation {
        intercept,
        coef: coef.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    };
    let equations = BTreeMap::from([
        ("b".to_string(), eq(1.0, &[("a", 2.0)])),
        ("c".to_string(), eq(-1.0, &[("b", 3.0), ("a", 0.5)])),
    ]);
    let scm = Scm::from_parts(dag, equations, BTreeMap::new()).unwrap();
    let x = [1.0, 3.5, 10.0];
    let cf = scm.counterfactual(&x, &Intervention { node: "a".into(), value: 2.0 }).unwrap();
    assert_eq!(cf[0], 2.0);
    assert!((cf[1] - 5.5).abs() < 1e-12);
    assert!((cf[2] - (10.0 + 6.5)).abs() < 1e-12);
}
