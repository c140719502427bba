use super::InteractionDigraph;

/// Partition of the nodes into strongly connected components.
///
/// Labels are numbered in order of each component's smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabeling {
    pub labels: Vec<usize>,
    pub cluster_count: usize,
}

impl ClusterLabeling {
    pub fn singletons(n: usize) -> Self {
        ClusterLabeling {
            labels: (0..n).collect(),
            cluster_count: n,
        }
    }

    /// Members of every cluster, indexed by label, each sorted ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.cluster_count];
        for &l in &self.labels {
            out[l] += 1;
        }
        out
    }
}

/// Strongly connected components of the influence digraph (edge `k -> i` iff `phi[i][k] > 0`).
pub fn strongly_connected_components(g: &InteractionDigraph) -> ClusterLabeling {
    components(&g.out_adjacency())
}

/// Iterative Tarjan over an adjacency list.
pub(crate) fn components(adj: &[Vec<usize>]) -> ClusterLabeling {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp = vec![UNSEEN; n];
    let mut comp_count = 0usize;
    let mut next_index = 0usize;
    // (node, position of the next edge to explore)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if let Some(&w) = adj[v].get(*edge) {
                *edge += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp[w] = comp_count;
                    if w == v {
                        break;
                    }
                }
                comp_count += 1;
            }
        }
    }

    // relabel by smallest member
    let mut remap = vec![UNSEEN; comp_count];
    let mut next = 0;
    let labels = comp
        .iter()
        .map(|&c| {
            if remap[c] == UNSEEN {
                remap[c] = next;
                next += 1;
            }
            remap[c]
        })
        .collect();
    ClusterLabeling {
        labels,
        cluster_count: comp_count,
    }
}
