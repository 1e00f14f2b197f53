//! Stable graphs with labeled legs, their automorphisms and fixed-point decorations.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Connected stable graph; legs are labeled, `legs[l]` is the vertex carrying marking l.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StableGraph {
    pub genera: Vec<usize>,
    pub legs: Vec<usize>,
    /// Sorted, each pair with the smaller vertex first; loops are (v, v).
    pub edges: Vec<(usize, usize)>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

impl StableGraph {
    pub fn num_vertices(&self) -> usize {
        self.genera.len()
    }

    pub fn h1(&self) -> usize {
        self.edges.len() + 1 - self.num_vertices()
    }

    pub fn genus(&self) -> usize {
        self.genera.iter().sum::<usize>() + self.h1()
    }

    /// Incident half-edges plus legs.
    pub fn valence(&self, v: usize) -> usize {
        let half = self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum::<usize>();
        half + self.legs.iter().filter(|&&w| w == v).count()
    }

    pub fn is_stable(&self) -> bool {
        (0..self.num_vertices()).all(|v| 2 * self.genera[v] + self.valence(v) > 2)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// The graph with vertex v renamed to perm[v].
    pub fn relabel(&self, perm: &[usize]) -> StableGraph {
        let mut genera = vec![0; self.genera.len()];
        for (v, &h) in self.genera.iter().enumerate() {
            genera[perm[v]] = h;
        }
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (perm[a], perm[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        edges.sort_unstable();
        let legs = self.legs.iter().map(|&v| perm[v]).collect();
        StableGraph { genera, legs, edges }
    }

    pub fn canonical(&self) -> StableGraph {
        permutations(self.num_vertices()).iter().map(|p| self.relabel(p)).min().expect("at least one vertex")
    }

    /// Vertex permutations mapping the graph to itself.
    pub fn vertex_automorphisms(&self) -> Vec<Vec<usize>> {
        permutations(self.num_vertices()).into_iter().filter(|p| &self.relabel(p) == self).collect()
    }

    /// ∏ m! over parallel classes and ∏ m!·2^m over loop classes.
    pub fn edge_symmetry(&self) -> u64 {
        let mut out = 1u64;
        let mut i = 0;
        while i < self.edges.len() {
            let mut j = i;
            while j < self.edges.len() && self.edges[j] == self.edges[i] {
                j += 1;
            }
            let m = j - i;
            out *= factorial_u64(m);
            if self.edges[i].0 == self.edges[i].1 {
                out *= 1 << m;
            }
            i = j;
        }
        out
    }

    /// Order of the automorphism group fixing the legs.
    pub fn aut_order(&self) -> u64 {
        self.vertex_automorphisms().len() as u64 * self.edge_symmetry()
    }

    /// Flags as (vertex, kind): edge half-edges first in edge order, then legs.
    pub fn flags(&self) -> Vec<Flag> {
        let mut out = Vec::with_capacity(2 * self.edges.len() + self.legs.len());
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            out.push(Flag { vertex: a, kind: FlagKind::Half { edge: e, side: 0 } });
            out.push(Flag { vertex: b, kind: FlagKind::Half { edge: e, side: 1 } });
        }
        for (l, &v) in self.legs.iter().enumerate() {
            out.push(Flag { vertex: v, kind: FlagKind::Leg(l) });
        }
        out
    }

    /// Compact text form, e.g. `g[1,0] e[(0,0),(0,1)] l[1]`.
    pub fn signature(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for StableGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g: Vec<String> = self.genera.iter().map(usize::to_string).collect();
        let e: Vec<String> = self.edges.iter().map(|(a, b)| format!("({a},{b})")).collect();
        let l: Vec<String> = self.legs.iter().map(usize::to_string).collect();
        write!(f, "g[{}] e[{}] l[{}]", g.join(","), e.join(","), l.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlagKind {
    Half { edge: usize, side: usize },
    Leg(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Flag {
    pub vertex: usize,
    pub kind: FlagKind,
}

fn multisets(items: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, items: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..items {
            cur.push(i);
            go(i, items, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, items, size, &mut Vec::new(), &mut out);
    out
}

fn tuples(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..base).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// All connected stable graphs of genus g with n labeled legs, canonical and sorted.
pub fn enumerate_graphs(g: usize, n: usize) -> Result<Vec<StableGraph>> {
    if 2 * g + n <= 2 {
        return Err(Error::Unstable { g, n });
    }
    let mut found = BTreeSet::new();
    for nv in 1..=(2 * g + n - 2) {
        let pairs: Vec<(usize, usize)> = (0..nv).flat_map(|a| (a..nv).map(move |b| (a, b))).collect();
        let leg_maps = tuples(nv, n);
        for genera in tuples(g + 1, nv) {
            let sum: usize = genera.iter().sum();
            if sum > g {
                continue;
            }
            let ne = g - sum + nv - 1;
            for ms in multisets(pairs.len(), ne) {
                let edges: Vec<(usize, usize)> = ms.iter().map(|&i| pairs[i]).collect();
                for legs in &leg_maps {
                    let gr = StableGraph { genera: genera.clone(), legs: legs.clone(), edges: edges.clone() };
                    if gr.is_connected() && gr.is_stable() {
                        found.insert(gr.canonical());
                    }
                }
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// A stable graph with a fixed-point label on every vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecoratedGraph {
    pub graph: StableGraph,
    pub labels: Vec<usize>,
    pub aut_order: u64,
}

/// One representative per orbit of labelings in {0,1,2}^V.
pub fn decorate(graph: &StableGraph) -> Vec<DecoratedGraph> {
    let auts = graph.vertex_automorphisms();
    let edge_sym = graph.edge_symmetry();
    let nv = graph.num_vertices();
    let mut out = Vec::new();
    for labels in tuples(3, nv) {
        let image = |p: &Vec<usize>| {
            let mut l = vec![0; nv];
            for v in 0..nv {
                l[p[v]] = labels[v];
            }
            l
        };
        if auts.iter().any(|p| image(p) < labels) {
            continue;
        }
        let stab = auts.iter().filter(|p| image(p) == labels).count() as u64;
        out.push(DecoratedGraph { graph: graph.clone(), labels, aut_order: stab * edge_sym });
    }
    out
}
