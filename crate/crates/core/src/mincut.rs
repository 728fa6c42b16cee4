//! Exact minimization of binary labelling energies on a graph
//!
//! ```text
//! E(x) = Σ_i U_i(x_i) + Σ_{(i,j)} w_ij |x_i − x_j|,   x_i ∈ {0, 1}, w_ij ≥ 0
//! ```
//!
//! by a minimum s-t cut computed with Edmonds-Karp augmenting paths. Label 1
//! is the source side. Among all minimizers the one with the largest set of
//! label-1 nodes is returned, so ties resolve towards label 1.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

fn add_arc(arcs: &mut [Vec<Arc>], a: usize, b: usize, cap_ab: f64, cap_ba: f64) {
    let ra = arcs[b].len();
    let rb = arcs[a].len();
    arcs[a].push(Arc { to: b, residual: cap_ab, rev: ra });
    arcs[b].push(Arc { to: a, residual: cap_ba, rev: rb });
}

#[derive(Debug, Clone, Copy)]
struct Arc {
    to: usize,
    residual: f64,
    /// Index of the reverse arc in `arcs[to]`.
    rev: usize,
}

/// Binary labelling problem with unary costs and symmetric pairwise weights.
#[derive(Debug, Clone)]
pub struct BinaryLabeling {
    n: usize,
    unary: Vec<[f64; 2]>,
    pairs: Vec<(usize, usize, f64)>,
}

impl BinaryLabeling {
    pub fn new(n: usize) -> Self {
        BinaryLabeling { n, unary: vec![[0.0; 2]; n], pairs: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Adds `cost` to `U_i(label)`.
    pub fn add_unary(&mut self, i: usize, label: usize, cost: f64) {
        self.unary[i][label] += cost;
    }

    /// Adds `weight · |x_i − x_j|`; `weight` must be non-negative.
    pub fn add_pair(&mut self, i: usize, j: usize, weight: f64) {
        debug_assert!(weight >= 0.0);
        if weight > 0.0 && i != j {
            self.pairs.push((i, j, weight));
        }
    }

    pub fn energy(&self, labels: &[u8]) -> f64 {
        let unary: f64 = (0..self.n).map(|i| self.unary[i][labels[i] as usize]).sum();
        let pair: f64 = self
            .pairs
            .iter()
            .filter(|&&(i, j, _)| labels[i] != labels[j])
            .map(|&(_, _, w)| w)
            .sum();
        unary + pair
    }

    /// A minimizing labelling; the label-1 set is maximal among minimizers.
    pub fn minimize(&self) -> Vec<u8> {
        let n = self.n;
        let (source, sink) = (n, n + 1);
        let mut arcs: Vec<Vec<Arc>> = vec![Vec::new(); n + 2];
        let mut scale = 0.0f64;
        for (i, u) in self.unary.iter().enumerate() {
            let base = u[0].min(u[1]);
            // Cutting s→i puts i on the sink side (label 0); cutting i→t keeps it.
            let (to_label0, to_label1) = (u[0] - base, u[1] - base);
            scale = scale.max(to_label0).max(to_label1);
            if to_label0 > 0.0 {
                add_arc(&mut arcs, source, i, to_label0, 0.0);
            }
            if to_label1 > 0.0 {
                add_arc(&mut arcs, i, sink, to_label1, 0.0);
            }
        }
        for &(i, j, w) in &self.pairs {
            scale = scale.max(w);
            add_arc(&mut arcs, i, j, w, w);
        }
        let tol = 1e-13 * scale;

        // Edmonds-Karp: shortest augmenting paths by breadth-first search.
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n + 2];
        loop {
            parent.iter_mut().for_each(|p| *p = None);
            let mut queue = VecDeque::from([source]);
            let mut reached = false;
            while let Some(x) = queue.pop_front() {
                for (k, arc) in arcs[x].iter().enumerate() {
                    if arc.residual > tol && arc.to != source && parent[arc.to].is_none() {
                        parent[arc.to] = Some((x, k));
                        if arc.to == sink {
                            reached = true;
                            break;
                        }
                        queue.push_back(arc.to);
                    }
                }
                if reached {
                    break;
                }
            }
            if !reached {
                break;
            }
            let mut bottleneck = f64::INFINITY;
            let mut y = sink;
            while let Some((x, k)) = parent[y] {
                bottleneck = bottleneck.min(arcs[x][k].residual);
                y = x;
            }
            let mut y = sink;
            while let Some((x, k)) = parent[y] {
                arcs[x][k].residual -= bottleneck;
                let rev = arcs[x][k].rev;
                arcs[y][rev].residual += bottleneck;
                y = x;
            }
        }

        // Nodes that still reach the sink through residual arcs must take
        // label 0 in every minimum cut; all others can keep label 1.
        let mut reaches_sink = vec![false; n + 2];
        reaches_sink[sink] = true;
        let mut queue = VecDeque::from([sink]);
        while let Some(y) = queue.pop_front() {
            for arc in &arcs[y] {
                let x = arc.to;
                if !reaches_sink[x] && arcs[x][arc.rev].residual > tol {
                    reaches_sink[x] = true;
                    queue.push_back(x);
                }
            }
        }
        (0..n).map(|i| u8::from(!reaches_sink[i])).collect()
    }
}
