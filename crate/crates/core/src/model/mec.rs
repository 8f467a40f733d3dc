use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::{Process, StateId, Weight};

/// Maximal end components of the weight-abstracted MDP restricted to the
/// states flagged in `within`.
///
/// Standard refinement: compute SCCs, drop every action that may leave its
/// state's SCC, drop states without actions, repeat until stable. Each
/// component is returned sorted; components are ordered by smallest member.
pub fn maximal_end_components<W: Weight>(process: &Process<W>, within: &[bool]) -> Vec<Vec<StateId>> {
    let n = process.num_states();
    let mut alive: Vec<bool> = within.to_vec();
    let mut kept: Vec<Vec<usize>> = (0..n)
        .map(|q| if alive[q] { (0..process.choices(q).len()).collect() } else { Vec::new() })
        .collect();

    loop {
        let scc = scc_ids(process, &alive, &kept);
        let mut changed = false;
        for q in 0..n {
            if !alive[q] {
                continue;
            }
            let before = kept[q].len();
            kept[q].retain(|&i| {
                process.choices(q)[i]
                    .outcomes
                    .iter()
                    .all(|o| alive[o.to] && scc[o.to] == scc[q])
            });
            changed |= kept[q].len() != before;
            if kept[q].is_empty() {
                alive[q] = false;
                changed = true;
            }
        }
        if !changed {
            let mut groups: std::collections::BTreeMap<usize, Vec<StateId>> = Default::default();
            for q in (0..n).filter(|&q| alive[q]) {
                groups.entry(scc[q]).or_default().push(q);
            }
            let mut out: Vec<Vec<StateId>> = groups.into_values().collect();
            out.sort();
            return out;
        }
    }
}

fn scc_ids<W: Weight>(process: &Process<W>, alive: &[bool], kept: &[Vec<usize>]) -> Vec<usize> {
    let n = process.num_states();
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
    for _ in 0..n {
        g.add_node(());
    }
    for q in (0..n).filter(|&q| alive[q]) {
        for &i in &kept[q] {
            for o in &process.choices(q)[i].outcomes {
                if alive[o.to] {
                    g.add_edge(NodeIndex::new(q), NodeIndex::new(o.to), ());
                }
            }
        }
    }
    let mut id = vec![usize::MAX; n];
    for (k, comp) in tarjan_scc(&g).into_iter().enumerate() {
        for v in comp {
            id[v.index()] = k;
        }
    }
    id
}
