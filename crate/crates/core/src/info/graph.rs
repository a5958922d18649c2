//! Characteristic graphs and conditional graph entropy.

use super::InfoError;
use crate::prob::{JointDist, Problem};
use num::{ToPrimitive, Zero};
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;

/// Which input variable the graph lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    X,
    Y,
}

/// Enumeration cap for maximal independent sets.
pub const VERTEX_LIMIT: usize = 20;

/// An undirected simple graph on the support symbols of one input variable:
/// two inputs are adjacent when some positive-probability opposite-side
/// symbol forces their outputs apart.
#[derive(Clone, Debug)]
pub struct CharacteristicGraph {
    /// Vertex labels (support symbols, in alphabet order).
    pub labels: Vec<String>,
    /// Edges as index pairs `(i, j)` with `i < j`.
    pub edges: BTreeSet<(usize, usize)>,
}

impl CharacteristicGraph {
    pub fn new(labels: Vec<String>, edges: BTreeSet<(usize, usize)>) -> Self {
        for &(i, j) in &edges {
            assert!(i < j && j < labels.len(), "edge ({i},{j}) out of range or disordered");
        }
        CharacteristicGraph { labels, edges }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.edges.contains(&(a, b))
    }

    pub fn is_complete(&self) -> bool {
        let n = self.vertex_count();
        self.edges.len() == n * (n - 1) / 2
    }

    /// Edge list as JSON (debugging aid).
    pub fn to_json(&self) -> String {
        let edges: Vec<[&String; 2]> = self
            .edges
            .iter()
            .map(|&(i, j)| [&self.labels[i], &self.labels[j]])
            .collect();
        serde_json::json!({ "vertices": self.labels, "edges": edges }).to_string()
    }
}

/// Witsenhausen's characteristic graph of the chosen input side.
///
/// Requires a deterministic channel: `{v, v'}` is an edge when some
/// opposite-side symbol `w` has `p(v,w) > 0`, `p(v',w) > 0`, and
/// `f(v,w) ≠ f(v',w)`.
pub fn characteristic_graph(
    problem: &Problem,
    side: Side,
) -> Result<CharacteristicGraph, InfoError> {
    if !problem.channel().is_deterministic() {
        return Err(InfoError::RandomizedChannel);
    }
    let input = problem.input();
    let (this, other) = match side {
        Side::X => (problem.channel().x(), problem.channel().y()),
        Side::Y => (problem.channel().y(), problem.channel().x()),
    };
    let marg = input.marginalize(&[&this.name])?;
    let mut vertices: Vec<u32> = Vec::new();
    for s in 0..this.alphabet.len() as u32 {
        if !marg.prob_of(&[s]).is_zero() {
            vertices.push(s);
        }
    }
    let f = |v: u32, w: u32| -> Result<u32, InfoError> {
        let out = match side {
            Side::X => problem.channel().output_of(v, w),
            Side::Y => problem.channel().output_of(w, v),
        };
        out.map_err(InfoError::Prob)
    };
    let pair_prob = |v: u32, w: u32| match side {
        Side::X => input.prob_of(&[v, w]),
        Side::Y => input.prob_of(&[w, v]),
    };
    let mut edges = BTreeSet::new();
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            for w in 0..other.alphabet.len() as u32 {
                if !pair_prob(vertices[i], w).is_zero()
                    && !pair_prob(vertices[j], w).is_zero()
                    && f(vertices[i], w)? != f(vertices[j], w)?
                {
                    edges.insert((i, j));
                    break;
                }
            }
        }
    }
    let labels = vertices.iter().map(|&v| this.alphabet.symbol(v).to_string()).collect();
    Ok(CharacteristicGraph::new(labels, edges))
}

/// All maximal independent sets of a graph on `n` vertices, each sorted,
/// the list itself sorted. Runs Bron–Kerbosch with pivoting on the
/// complement graph (maximal cliques there are maximal independent sets
/// here). Capped at [`VERTEX_LIMIT`] vertices.
pub fn maximal_independent_sets(
    n: usize,
    edges: &BTreeSet<(usize, usize)>,
) -> Result<Vec<Vec<usize>>, InfoError> {
    if n > VERTEX_LIMIT {
        return Err(InfoError::GraphTooLarge(n));
    }
    if n == 0 {
        return Ok(vec![]);
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    // Adjacency in the complement graph.
    let mut adj = vec![0u32; n];
    for (i, row) in adj.iter_mut().enumerate() {
        for j in 0..n {
            if i != j && !edges.contains(&(i.min(j), i.max(j))) {
                *row |= 1 << j;
            }
        }
    }
    let mut out: Vec<u32> = Vec::new();
    bron_kerbosch(0, full, 0, &adj, &mut out);
    let mut sets: Vec<Vec<usize>> = out
        .into_iter()
        .map(|mask| (0..n).filter(|&v| mask & (1 << v) != 0).collect())
        .collect();
    sets.sort();
    Ok(sets)
}

fn bron_kerbosch(r: u32, p: u32, x: u32, adj: &[u32], out: &mut Vec<u32>) {
    if p == 0 && x == 0 {
        out.push(r);
        return;
    }
    // Pivot: the candidate (from p ∪ x) covering the most of p.
    let mut pivot = usize::MAX;
    let mut best = -1i32;
    let mut px = p | x;
    while px != 0 {
        let v = px.trailing_zeros() as usize;
        px &= px - 1;
        let cover = (p & adj[v]).count_ones() as i32;
        if cover > best {
            best = cover;
            pivot = v;
        }
    }
    let mut candidates = p & !adj[pivot];
    let mut p = p;
    let mut x = x;
    while candidates != 0 {
        let v = candidates.trailing_zeros() as usize;
        candidates &= candidates - 1;
        let bit = 1u32 << v;
        bron_kerbosch(r | bit, p & adj[v], x & adj[v], adj, out);
        p &= !bit;
        x |= bit;
    }
}

/// Solver knobs for [`graph_conditional_entropy`].
#[derive(Clone, Copy, Debug)]
pub struct GraphEntropyConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Stop when the objective improves by less than this over
    /// `stall_window` iterations.
    pub tolerance: f64,
    pub stall_window: usize,
    pub max_iterations: usize,
}

impl Default for GraphEntropyConfig {
    fn default() -> Self {
        GraphEntropyConfig {
            restarts: 8,
            seed: 0x5ec0_4b1d,
            tolerance: 1e-9,
            stall_window: 50,
            max_iterations: 20_000,
        }
    }
}

/// Conditional graph entropy of `vertex_var` given `given_var` under `joint`:
/// the minimum of `I(W;V|S)` over kernels from vertices into maximal
/// independent sets containing them.
///
/// The minimization alternates two closed-form steps: the induced
/// side-information posterior `q(w|s) = Σ_v p(v|s)·p(w|v)`, and the
/// entropy-regularized (exponentiated-gradient) update
/// `p(w|v) ∝ exp(Σ_s p(s|v)·ln q(w|s))` restricted to the sets containing
/// `v`. The objective is convex in the kernel, so every restart converges to
/// the global minimum; restarts guard against degenerate initializations.
pub fn graph_conditional_entropy(
    graph: &CharacteristicGraph,
    joint: &JointDist,
    vertex_var: &str,
    given_var: &str,
    config: &GraphEntropyConfig,
) -> Result<f64, InfoError> {
    let m = joint.marginalize(&[vertex_var, given_var])?;
    let vpos = m.positions(&[vertex_var])?[0];
    let spos = m.positions(&[given_var])?[0];
    let valpha = &m.vars()[vpos].alphabet;
    let salpha = &m.vars()[spos].alphabet;

    // Match graph vertices to the support of the vertex variable, by label.
    let vmarg = m.marginalize(&[vertex_var])?;
    let mut vertex_of_symbol = vec![usize::MAX; valpha.len()];
    let mut seen = vec![false; graph.vertex_count()];
    for s in 0..valpha.len() as u32 {
        if vmarg.prob_of(&[s]).is_zero() {
            continue;
        }
        match graph.labels.iter().position(|l| l == valpha.symbol(s)) {
            Some(v) => {
                vertex_of_symbol[s as usize] = v;
                seen[v] = true;
            }
            None => {
                return Err(InfoError::VertexMismatch(format!(
                    "support symbol `{}` is not a graph vertex",
                    valpha.symbol(s)
                )))
            }
        }
    }
    if let Some(v) = seen.iter().position(|&b| !b) {
        return Err(InfoError::VertexMismatch(format!(
            "graph vertex `{}` carries no probability",
            graph.labels[v]
        )));
    }

    let nv = graph.vertex_count();
    let ns = salpha.len();
    // p[v][s] over vertices and side symbols.
    let mut p = vec![vec![0.0f64; ns]; nv];
    for (key, w) in m.atoms() {
        let v = vertex_of_symbol[key[vpos] as usize];
        p[v][key[spos] as usize] += w.to_f64().unwrap_or(0.0);
    }

    let sets = maximal_independent_sets(nv, &graph.edges)?;
    let nw = sets.len();
    let mut allowed: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (wi, set) in sets.iter().enumerate() {
        for &v in set {
            allowed[v].push(wi);
        }
    }

    let p_v: Vec<f64> = p.iter().map(|row| row.iter().sum()).collect();
    let mut p_s = vec![0.0; ns];
    for row in &p {
        for (s, w) in row.iter().enumerate() {
            p_s[s] += w;
        }
    }

    let h_v_given_s: f64 = {
        let mut h = 0.0;
        for (v, row) in p.iter().enumerate() {
            let _ = v;
            for (s, &w) in row.iter().enumerate() {
                if w > 0.0 {
                    h += w * (p_s[s] / w).log2();
                }
            }
        }
        h
    };

    let run = |restart: usize| -> f64 {
        // Kernel rows over the allowed sets of each vertex.
        let mut k: Vec<Vec<f64>> = allowed
            .iter()
            .map(|a| vec![1.0 / a.len() as f64; a.len()])
            .collect();
        if restart > 0 {
            let mut rng =
                ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(restart as u64));
            let uni = rand::distributions::Uniform::new(0.0f64, 1.0);
            for row in &mut k {
                let mut total = 0.0;
                for slot in row.iter_mut() {
                    let e = -(1.0 - uni.sample(&mut rng)).ln() + 1e-9;
                    *slot = e;
                    total += e;
                }
                for slot in row.iter_mut() {
                    *slot /= total;
                }
            }
        }

        let objective = |k: &[Vec<f64>], q: &[Vec<f64>]| -> f64 {
            let mut obj = 0.0;
            for v in 0..nv {
                for (ai, &wi) in allowed[v].iter().enumerate() {
                    let kw = k[v][ai];
                    if kw <= 0.0 {
                        continue;
                    }
                    for s in 0..ns {
                        if p[v][s] > 0.0 {
                            obj += p[v][s] * kw * (kw / q[wi][s]).log2();
                        }
                    }
                }
            }
            obj
        };

        let induced_q = |k: &[Vec<f64>]| -> Vec<Vec<f64>> {
            let mut q = vec![vec![0.0f64; ns]; nw];
            for v in 0..nv {
                for (ai, &wi) in allowed[v].iter().enumerate() {
                    for s in 0..ns {
                        if p_s[s] > 0.0 {
                            q[wi][s] += p[v][s] / p_s[s] * k[v][ai];
                        }
                    }
                }
            }
            q
        };

        let mut history: Vec<f64> = Vec::with_capacity(config.max_iterations);
        let mut q = induced_q(&k);
        let mut obj = objective(&k, &q);
        history.push(obj);
        for it in 0..config.max_iterations {
            // Exponentiated update of each vertex row against the current q.
            for v in 0..nv {
                if p_v[v] <= 0.0 || allowed[v].len() == 1 {
                    continue;
                }
                let mut scores: Vec<f64> = allowed[v]
                    .iter()
                    .map(|&wi| {
                        let mut s_acc = 0.0;
                        for s in 0..ns {
                            if p[v][s] > 0.0 {
                                let qv = q[wi][s];
                                if qv <= 0.0 {
                                    return f64::NEG_INFINITY;
                                }
                                s_acc += p[v][s] / p_v[v] * qv.ln();
                            }
                        }
                        s_acc
                    })
                    .collect();
                let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for sc in &mut scores {
                    *sc = (*sc - top).exp();
                    total += *sc;
                }
                for (ai, sc) in scores.iter().enumerate() {
                    k[v][ai] = sc / total;
                }
            }
            q = induced_q(&k);
            obj = objective(&k, &q);
            history.push(obj);
            if it + 1 >= config.stall_window {
                let before = history[history.len() - 1 - config.stall_window];
                if before - obj < config.tolerance {
                    break;
                }
            }
        }
        obj
    };

    let values: Vec<f64> = (0..config.restarts.max(1))
        .into_par_iter()
        .map(run)
        .collect();
    // Deterministic reduction: strict improvement only, so ties keep the
    // lowest restart index.
    let mut best = values[0];
    for &v in &values[1..] {
        if v < best {
            best = v;
        }
    }

    // The value is provably inside [0, H(V|S)]; tolerate float slack only.
    if best < -1e-6 || best > h_v_given_s + 1e-6 {
        return Err(InfoError::Prob(crate::prob::ProbError::NegativeInformation(best)));
    }
    Ok(best.clamp(0.0, h_v_given_s))
}

/// Conditional graph entropy of the problem's chosen input side given the
/// other input, using the characteristic graph.
pub fn conditional_graph_entropy(
    problem: &Problem,
    side: Side,
    config: &GraphEntropyConfig,
) -> Result<f64, InfoError> {
    let graph = characteristic_graph(problem, side)?;
    let (vertex_var, given_var) = match side {
        Side::X => (&problem.channel().x().name, &problem.channel().y().name),
        Side::Y => (&problem.channel().y().name, &problem.channel().x().name),
    };
    graph_conditional_entropy(&graph, problem.input(), vertex_var, given_var, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{rat, Alphabet, Channel, Var};

    fn bit_var(name: &str) -> Var {
        Var::new(name, Alphabet::from_labels(&["0", "1"]).unwrap())
    }

    fn xor_problem() -> Problem {
        let x = bit_var("X");
        let y = bit_var("Y");
        let z = bit_var("Z");
        let ch = Channel::deterministic(x.clone(), y.clone(), z, |a, b| a ^ b).unwrap();
        Problem::new(JointDist::uniform(vec![x, y]).unwrap(), ch).unwrap()
    }

    fn constant_problem() -> Problem {
        let x = bit_var("X");
        let y = bit_var("Y");
        let z = bit_var("Z");
        let ch = Channel::deterministic(x.clone(), y.clone(), z, |_, _| 0).unwrap();
        Problem::new(JointDist::uniform(vec![x, y]).unwrap(), ch).unwrap()
    }

    #[test]
    fn xor_graph_is_complete() {
        let g = characteristic_graph(&xor_problem(), Side::X).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert!(g.is_complete());
        // Complete graph: conditional graph entropy collapses to H(X|Y) = 1.
        let h = conditional_graph_entropy(
            &xor_problem(),
            Side::X,
            &GraphEntropyConfig::default(),
        )
        .unwrap();
        assert!((h - 1.0).abs() < 1e-6, "got {h}");
    }

    #[test]
    fn constant_function_graph_is_edgeless() {
        let g = characteristic_graph(&constant_problem(), Side::X).unwrap();
        assert!(g.edges.is_empty());
        let h = conditional_graph_entropy(
            &constant_problem(),
            Side::X,
            &GraphEntropyConfig::default(),
        )
        .unwrap();
        assert!(h.abs() < 1e-9, "got {h}");
    }

    #[test]
    fn erasure_x_side_has_the_edge() {
        let x = bit_var("X");
        let y = bit_var("Y");
        let z = Var::new("Z", Alphabet::from_labels(&["e", "0", "1"]).unwrap());
        let ch = Channel::deterministic(x.clone(), y.clone(), z, |a, b| {
            if a == 0 {
                0
            } else {
                1 + b
            }
        })
        .unwrap();
        let p = Problem::new(JointDist::uniform(vec![x, y]).unwrap(), ch).unwrap();
        let gx = characteristic_graph(&p, Side::X).unwrap();
        assert!(gx.is_edge(0, 1));
    }

    #[test]
    fn randomized_channel_rejected() {
        let x = bit_var("X");
        let y = bit_var("Y");
        let z = bit_var("Z");
        let rows = vec![vec![rat(1, 2), rat(1, 2)]; 4];
        let ch = Channel::new(x.clone(), y.clone(), z, rows).unwrap();
        let p = Problem::new(JointDist::uniform(vec![x, y]).unwrap(), ch).unwrap();
        assert!(matches!(
            characteristic_graph(&p, Side::X),
            Err(InfoError::RandomizedChannel)
        ));
    }

    #[test]
    fn independent_set_enumeration() {
        // Path 1-2-3-4 (0-indexed 0-1-2-3).
        let edges: BTreeSet<(usize, usize)> = [(0, 1), (1, 2), (2, 3)].into_iter().collect();
        let sets = maximal_independent_sets(4, &edges).unwrap();
        assert_eq!(sets, vec![vec![0, 2], vec![0, 3], vec![1, 3]]);

        // Complete graph: the singletons.
        let k4: BTreeSet<(usize, usize)> =
            [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)].into_iter().collect();
        let sets = maximal_independent_sets(4, &k4).unwrap();
        assert_eq!(sets, vec![vec![0], vec![1], vec![2], vec![3]]);

        // Edgeless graph: one set with everything.
        let sets = maximal_independent_sets(3, &BTreeSet::new()).unwrap();
        assert_eq!(sets, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn path3_entropy_matches_forced_kernel() {
        // Path 0-1-2: maximal independent sets are {0,2} and {1}, so the
        // kernel is forced and I(W;V) = H(W) exactly.
        let tri = Var::new("V", Alphabet::from_labels(&["a", "b", "c"]).unwrap());
        let s = Var::new("S", Alphabet::from_labels(&["s"]).unwrap());
        let joint = JointDist::new(
            vec![tri, s],
            vec![
                (vec![0, 0], rat(1, 3)),
                (vec![1, 0], rat(1, 3)),
                (vec![2, 0], rat(1, 3)),
            ],
        )
        .unwrap();
        let edges: BTreeSet<(usize, usize)> = [(0, 1), (1, 2)].into_iter().collect();
        let graph = CharacteristicGraph::new(
            vec!["a".into(), "b".into(), "c".into()],
            edges,
        );
        let h = graph_conditional_entropy(
            &graph,
            &joint,
            "V",
            "S",
            &GraphEntropyConfig::default(),
        )
        .unwrap();
        let h2_third = -(1.0f64 / 3.0).log2() / 3.0 - (2.0f64 / 3.0).log2() * 2.0 / 3.0;
        assert!((h - h2_third).abs() < 1e-6, "got {h}, want {h2_third}");
    }

    #[test]
    fn vertex_cap_enforced() {
        let err = maximal_independent_sets(21, &BTreeSet::new()).unwrap_err();
        assert!(matches!(err, InfoError::GraphTooLarge(21)));
    }
}
