use serde::{Deserialize, Serialize};

use super::{DynamicGraph, Edge, EdgeSet, GraphError, NodeId, ScheduleKind};

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    n: usize,
    kind: RawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prefix: Option<usize>,
    rounds: Vec<Vec<[i64; 2]>>,
}

#[derive(Deserialize, Serialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum RawKind {
    Explicit,
    Periodic,
    EventuallyPeriodic,
}

/// Parses the JSON schedule format. Duplicate edges within a round are
/// dropped with a warning; endpoint order inside a pair is irrelevant.
pub fn load_dynamic_graph(text: &str) -> Result<DynamicGraph, GraphError> {
    let raw: RawSchedule = serde_json::from_str(text)?;
    if raw.n == 0 {
        return Err(GraphError::Schema("field `n` must be at least 1".into()));
    }
    let declared = |name: &str, v: Option<usize>| {
        v.ok_or_else(|| GraphError::Schema(format!("missing field `{name}`")))
    };
    let expected_rounds = match raw.kind {
        RawKind::Explicit => declared("horizon", raw.horizon)?,
        RawKind::Periodic => declared("period", raw.period)?,
        RawKind::EventuallyPeriodic => {
            declared("prefix", raw.prefix)? + declared("period", raw.period)?
        }
    };
    if raw.rounds.len() != expected_rounds {
        return Err(GraphError::Schema(format!(
            "field `rounds` has {} entries, expected {expected_rounds}",
            raw.rounds.len()
        )));
    }

    let mut rounds = Vec::with_capacity(raw.rounds.len());
    for (i, pairs) in raw.rounds.iter().enumerate() {
        let round = i + 1;
        let mut edges = Vec::with_capacity(pairs.len());
        for &[u, v] in pairs {
            let invalid = |reason| GraphError::InvalidEdge {
                round,
                u,
                v,
                reason,
            };
            if u < 1 || v < 1 || u as u64 > raw.n as u64 || v as u64 > raw.n as u64 {
                return Err(invalid("endpoint outside 1..=n"));
            }
            let e = Edge::new(u as NodeId, v as NodeId).ok_or_else(|| invalid("self-loop"))?;
            edges.push(e);
        }
        let set = EdgeSet::from_edges(edges);
        if set.len() != pairs.len() {
            log::warn!(
                "round {round}: dropped {} duplicate edge(s)",
                pairs.len() - set.len()
            );
        }
        rounds.push(set);
    }

    match raw.kind {
        RawKind::Explicit => DynamicGraph::explicit(raw.n, rounds),
        RawKind::Periodic => DynamicGraph::periodic(raw.n, rounds),
        RawKind::EventuallyPeriodic => {
            let cycle = rounds.split_off(raw.prefix.unwrap_or(0));
            DynamicGraph::eventually_periodic(raw.n, rounds, cycle)
        }
    }
}

/// Serializes to the canonical JSON schedule format (sorted, deduplicated).
pub fn save_dynamic_graph(g: &DynamicGraph) -> String {
    let rounds = g
        .stored_rounds()
        .iter()
        .map(|set| set.iter().map(|e| [e.lo() as i64, e.hi() as i64]).collect())
        .collect();
    let (kind, horizon, period, prefix) = match g.kind() {
        ScheduleKind::Explicit => (RawKind::Explicit, g.horizon(), None, None),
        ScheduleKind::Periodic => (RawKind::Periodic, None, g.period(), None),
        ScheduleKind::EventuallyPeriodic { prefix } => {
            (RawKind::EventuallyPeriodic, None, g.period(), Some(prefix))
        }
    };
    let raw = RawSchedule {
        n: g.n(),
        kind,
        horizon,
        period,
        prefix,
        rounds,
    };
    serde_json::to_string(&raw).expect("schedule serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_based_id_is_rejected() {
        let text = r#"{"n":3,"kind":"periodic","period":1,"rounds":[[[0,1]]]}"#;
        let err = load_dynamic_graph(text).unwrap_err();
        match err {
            GraphError::InvalidEdge { round, u, v, .. } => assert_eq!((round, u, v), (1, 0, 1)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn self_loop_is_rejected() {
        let text = r#"{"n":3,"kind":"explicit","horizon":2,"rounds":[[],[[2,2]]]}"#;
        let err = load_dynamic_graph(text).unwrap_err().to_string();
        assert!(
            err.contains("round 2") && err.contains("self-loop"),
            "{err}"
        );
    }

    #[test]
    fn duplicates_are_normalized() {
        let text = r#"{"n":3,"kind":"periodic","period":1,"rounds":[[[2,1],[1,2],[3,2]]]}"#;
        let g = load_dynamic_graph(text).unwrap();
        assert_eq!(g.instance(1).unwrap().len(), 2);
        assert_eq!(
            save_dynamic_graph(&g),
            r#"{"n":3,"kind":"periodic","period":1,"rounds":[[[1,2],[2,3]]]}"#
        );
    }

    #[test]
    fn round_count_must_match() {
        let text = r#"{"n":2,"kind":"eventually_periodic","prefix":1,"period":2,"rounds":[[],[]]}"#;
        assert!(matches!(
            load_dynamic_graph(text),
            Err(GraphError::Schema(_))
        ));
        let text = r#"{"n":2,"kind":"explicit","rounds":[[]]}"#;
        let err = load_dynamic_graph(text).unwrap_err().to_string();
        assert!(err.contains("horizon"), "{err}");
    }

    #[test]
    fn unknown_field_is_named() {
        let text = r#"{"n":2,"kind":"periodic","period":1,"rounds":[[]],"extra":1}"#;
        let err = load_dynamic_graph(text).unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn eventually_periodic_round_trip() {
        let g = DynamicGraph::eventually_periodic(
            3,
            vec![EdgeSet::from_pairs([(1, 2)])],
            vec![EdgeSet::new(), EdgeSet::from_pairs([(2, 3), (1, 3)])],
        )
        .unwrap();
        let text = save_dynamic_graph(&g);
        assert_eq!(load_dynamic_graph(&text).unwrap(), g);
    }
}
