//! Undirected bot friendship graph: construction from follower/following
//! sets, closeness centrality, giant component extraction, label-agreement
//! measurement, force-directed layout and exports.

pub mod gexf;
pub mod layout;

pub use layout::{layout_force, LayoutParams};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::types::{Party, UserId};

/// One graph node with its annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeData {
    pub uid: UserId,
    /// Single-party affinity, when known.
    pub label: Option<Party>,
    pub closeness: f64,
    /// Min-max-normalized closeness, used as display size.
    pub size: f64,
    pub x: f64,
    pub y: f64,
}

/// Undirected, deduplicated friendship graph over a chosen user set.
#[derive(Debug, Clone, PartialEq)]
pub struct FriendshipGraph {
    nodes: Vec<NodeData>,
    index: BTreeMap<UserId, usize>,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl FriendshipGraph {
    /// Build the graph over `members`: an edge joins two members when either
    /// lists the other among followers or followings. Self-loops are
    /// dropped, edges deduplicated, nodes ordered by uid.
    pub fn build(
        corpus: &Corpus,
        members: &BTreeSet<UserId>,
        labels: &BTreeMap<UserId, Party>,
    ) -> FriendshipGraph {
        let nodes: Vec<NodeData> = members
            .iter()
            .map(|uid| NodeData {
                uid: uid.clone(),
                label: labels.get(uid).copied(),
                closeness: 0.0,
                size: 0.0,
                x: 0.0,
                y: 0.0,
            })
            .collect();
        let index: BTreeMap<UserId, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.uid.clone(), i))
            .collect();

        let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (uid, &i) in &index {
            if let Some(user) = corpus.users.get(uid) {
                for other in user.followers.iter().chain(user.followings.iter()) {
                    if let Some(&j) = index.get(other) {
                        if i != j {
                            edge_set.insert((i.min(j), i.max(j)));
                        }
                    }
                }
            }
        }
        let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        FriendshipGraph {
            nodes,
            index,
            adj,
            edges,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeData] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    pub fn node_index(&self, uid: &UserId) -> Option<usize> {
        self.index.get(uid).copied()
    }

    /// Per-component closeness: for a node in a component of size `n_c`,
    /// closeness is `(n_c − 1) / Σ d(v, u)` over its component, 0 for
    /// isolated nodes. Unweighted BFS per source.
    pub fn closeness_centrality(&self) -> Vec<f64> {
        let n = self.node_count();
        (0..n)
            .into_par_iter()
            .map(|source| {
                let mut dist = vec![usize::MAX; n];
                let mut queue = VecDeque::new();
                dist[source] = 0;
                queue.push_back(source);
                let mut reached = 0usize;
                let mut total = 0usize;
                while let Some(v) = queue.pop_front() {
                    for &w in &self.adj[v] {
                        if dist[w] == usize::MAX {
                            dist[w] = dist[v] + 1;
                            total += dist[w];
                            reached += 1;
                            queue.push_back(w);
                        }
                    }
                }
                if reached == 0 {
                    0.0
                } else {
                    reached as f64 / total as f64
                }
            })
            .collect()
    }

    /// Compute closeness and store it on the nodes, with size as min-max
    /// normalized closeness (all-equal collapses to 1).
    pub fn annotate_closeness(&mut self) {
        let closeness = self.closeness_centrality();
        let min = closeness.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = closeness.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (node, c) in self.nodes.iter_mut().zip(closeness.iter()) {
            node.closeness = *c;
            node.size = if max > min { (c - min) / (max - min) } else { 1.0 };
        }
    }

    pub fn set_positions(&mut self, positions: &[(f64, f64)]) {
        for (node, (x, y)) in self.nodes.iter_mut().zip(positions.iter()) {
            node.x = *x;
            node.y = *y;
        }
    }

    /// Connected components as sorted node-index lists, largest first; ties
    /// ordered by their smallest uid.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut component = vec![start];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        component.push(w);
                        queue.push_back(w);
                    }
                }
            }
            component.sort_unstable();
            components.push(component);
        }
        // nodes are uid-sorted, so the smallest member index is also the
        // lexicographically smallest uid
        components.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        components
    }

    /// Induced subgraph of the largest connected component (ties broken by
    /// smallest uid). An empty graph stays empty.
    pub fn giant_component(&self) -> FriendshipGraph {
        let components = self.components();
        let Some(giant) = components.first() else {
            return self.clone();
        };
        self.induced(giant)
    }

    fn induced(&self, keep: &[usize]) -> FriendshipGraph {
        let keep_set: BTreeSet<usize> = keep.iter().copied().collect();
        let nodes: Vec<NodeData> = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        let index: BTreeMap<UserId, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.uid.clone(), i))
            .collect();
        let remap: BTreeMap<usize, usize> =
            keep.iter().enumerate().map(|(new, old)| (*old, new)).collect();
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .filter(|(a, b)| keep_set.contains(a) && keep_set.contains(b))
            .map(|(a, b)| (remap[a], remap[b]))
            .collect();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        FriendshipGraph {
            nodes,
            index,
            adj,
            edges,
        }
    }

    /// Fraction of edges whose endpoints carry the same single-party label,
    /// over edges with both endpoints labeled. Errors when no edge
    /// qualifies (in particular on edgeless graphs).
    pub fn label_agreement(&self) -> Result<f64> {
        let mut considered = 0usize;
        let mut agreeing = 0usize;
        for &(a, b) in &self.edges {
            if let (Some(la), Some(lb)) = (self.nodes[a].label, self.nodes[b].label) {
                considered += 1;
                if la == lb {
                    agreeing += 1;
                }
            }
        }
        if considered == 0 {
            return Err(Error::data(
                "label agreement is undefined: no edge joins two labeled nodes",
            ));
        }
        Ok(agreeing as f64 / considered as f64)
    }
}
