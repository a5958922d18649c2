//! Information measures and structural reductions.
//!
//! * Gács–Körner common information and residual information, both via the
//!   connected components of the bipartite support graph and via the
//!   constrained-minimization definition.
//! * Witsenhausen characteristic graphs and conditional graph entropy.
//! * Normal forms for `(p_XY, p_Z|XY)` problems and for `p_XYZ` triples.
//! * The two output-connectivity conditions that strengthen several bounds.

mod graph;
mod normal;

pub use graph::{
    maximal_independent_sets, CharacteristicGraph, GraphEntropyConfig, Side,
    characteristic_graph, conditional_graph_entropy, graph_conditional_entropy,
};
pub use normal::{normal_form, normal_form_xyz, NormalFormMap, XyzNormalForm};

use crate::prob::{Alphabet, JointDist, ProbError, Problem, Rat, Var};
use num::{ToPrimitive, Zero};
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Errors from the information-measure layer.
#[derive(Debug, thiserror::Error)]
pub enum InfoError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("operation requires a deterministic channel")]
    RandomizedChannel,
    #[error("graph has {0} vertices, above the limit of {limit}", limit = graph::VERTEX_LIMIT)]
    GraphTooLarge(usize),
    #[error("q-alphabet of size {got} cannot cover {need} common-information components")]
    QAlphabetTooSmall { need: usize, got: usize },
    #[error("support of size {0} is too large for the minimization check (limit 16)")]
    SupportTooLarge(usize),
    #[error("graph vertices do not match the distribution support: {0}")]
    VertexMismatch(String),
    #[error("not in normal form: {0}")]
    NotNormalForm(String),
}

/// Simple union-find over `0..n`.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb.max(ra)] = ra.min(rb);
        }
    }
}

/// The bipartite graph on the supports of two (grouped) variables, with an
/// edge wherever the joint probability is positive.
#[derive(Clone, Debug)]
pub struct BipartiteSupportGraph {
    /// Composite labels of the left symbols, in first-appearance order over
    /// the sorted atom listing.
    pub left_labels: Vec<String>,
    pub right_labels: Vec<String>,
    /// Edges as (left index, right index) with the atom's weight attached.
    pub edges: Vec<(usize, usize, Rat)>,
}

impl BipartiteSupportGraph {
    /// Build from the `(u, v)` grouping of a joint distribution.
    pub fn from_joint(
        dist: &JointDist,
        u: &[&str],
        v: &[&str],
    ) -> Result<BipartiteSupportGraph, InfoError> {
        let all: Vec<&str> = u.iter().chain(v.iter()).copied().collect();
        let m = dist.marginalize(&all)?;
        let upos = m.positions(u)?;
        let vpos = m.positions(v)?;
        let label_of = |key: &[u32], pos: &[usize]| -> String {
            pos.iter()
                .map(|&i| m.vars()[i].alphabet.symbol(key[i]))
                .collect::<Vec<_>>()
                .join("-")
        };
        let mut left_index: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        let mut right_index: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        let mut left_labels = Vec::new();
        let mut right_labels = Vec::new();
        let mut edges = Vec::new();
        for (key, w) in m.atoms() {
            let ukey: Vec<u32> = upos.iter().map(|&i| key[i]).collect();
            let vkey: Vec<u32> = vpos.iter().map(|&i| key[i]).collect();
            let li = *left_index.entry(ukey).or_insert_with(|| {
                left_labels.push(label_of(key, &upos));
                left_labels.len() - 1
            });
            let ri = *right_index.entry(vkey).or_insert_with(|| {
                right_labels.push(label_of(key, &vpos));
                right_labels.len() - 1
            });
            edges.push((li, ri, w.clone()));
        }
        Ok(BipartiteSupportGraph { left_labels, right_labels, edges })
    }

    /// Connected components; returns (left component ids, right component
    /// ids, component count). Ids are dense and ordered by first appearance.
    pub fn components(&self) -> (Vec<u32>, Vec<u32>, usize) {
        let nl = self.left_labels.len();
        let nr = self.right_labels.len();
        let mut uf = UnionFind::new(nl + nr);
        for (l, r, _) in &self.edges {
            uf.union(*l, nl + r);
        }
        let mut ids: BTreeMap<usize, u32> = BTreeMap::new();
        let mut next = 0u32;
        let mut left = vec![0u32; nl];
        let mut right = vec![0u32; nr];
        for (l, slot) in left.iter_mut().enumerate() {
            let root = uf.find(l);
            *slot = *ids.entry(root).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
        }
        for (r, slot) in right.iter_mut().enumerate() {
            let root = uf.find(nl + r);
            *slot = *ids.entry(root).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
        }
        (left, right, next as usize)
    }

    /// True when every support symbol lies in a single component.
    pub fn is_connected(&self) -> bool {
        let (_, _, n) = self.components();
        n <= 1
    }
}

/// The Gács–Körner common part of a pair of (grouped) variables: the
/// connected-component variable of their bipartite support graph.
#[derive(Clone, Debug)]
pub struct CommonPart {
    /// Component id of each positive-probability symbol on the `u` side.
    pub left_components: BTreeMap<String, u32>,
    /// Component id of each positive-probability symbol on the `v` side.
    pub right_components: BTreeMap<String, u32>,
    /// Distribution of the component variable (variable name `GK`).
    pub component_dist: JointDist,
    pub num_components: usize,
    /// Entropy of the component variable in bits.
    pub entropy: f64,
}

/// Compute the Gács–Körner common part of `(u, v)` under `dist`.
pub fn gacs_korner(dist: &JointDist, u: &[&str], v: &[&str]) -> Result<CommonPart, InfoError> {
    let graph = BipartiteSupportGraph::from_joint(dist, u, v)?;
    let (left, right, n) = graph.components();
    let mut probs = vec![Rat::zero(); n];
    for (l, _, w) in &graph.edges {
        probs[left[*l] as usize] += w;
    }
    let var = Var::new("GK", Alphabet::numeric(n)?);
    let weights = probs.iter().enumerate().map(|(i, w)| (vec![i as u32], w.clone())).collect();
    let component_dist = JointDist::new(vec![var], weights)?;
    let entropy = component_dist.entropy(&["GK"], &[])?;
    let left_components = graph
        .left_labels
        .iter()
        .zip(&left)
        .map(|(s, &c)| (s.clone(), c))
        .collect();
    let right_components = graph
        .right_labels
        .iter()
        .zip(&right)
        .map(|(s, &c)| (s.clone(), c))
        .collect();
    Ok(CommonPart {
        left_components,
        right_components,
        component_dist,
        num_components: n,
        entropy,
    })
}

/// Residual information `RI(U;V) = I(U;V) − H(U ⊓ V)`, in bits.
///
/// Values in `(−1e-12, 0)` are clipped to 0; anything lower is an error
/// (the quantity is provably nonnegative).
pub fn residual_information(dist: &JointDist, u: &[&str], v: &[&str]) -> Result<f64, InfoError> {
    let mi = dist.mutual_information(u, v, &[])?;
    let gk = gacs_korner(dist, u, v)?;
    let ri = mi - gk.entropy;
    if ri < 0.0 {
        if ri > crate::prob::NEG_TOLERANCE {
            return Ok(0.0);
        }
        return Err(InfoError::Prob(ProbError::NegativeInformation(ri)));
    }
    Ok(ri)
}

/// Residual information through its other definition: the minimum of
/// `I(U;V|Q)` over variables `Q` satisfying `I(Q;V|U) = I(Q;U|V) = 0`.
///
/// Those constraints force `q`'s conditional law to be constant on each
/// connected component of the support graph, so the feasible set is exactly
/// the per-component kernels into the `q`-alphabet. The component variable
/// itself is evaluated first, then `search_kernels` random kernels probe for
/// anything better; the minimum found is returned.
pub fn residual_information_via_minimization(
    dist: &JointDist,
    u: &[&str],
    v: &[&str],
    q_alphabet_size: usize,
    seed: u64,
) -> Result<f64, InfoError> {
    let graph = BipartiteSupportGraph::from_joint(dist, u, v)?;
    let support = graph.left_labels.len() * graph.right_labels.len();
    if support > 16 {
        return Err(InfoError::SupportTooLarge(support));
    }
    let (left, _, n_comp) = graph.components();
    if q_alphabet_size < n_comp {
        return Err(InfoError::QAlphabetTooSmall { need: n_comp, got: q_alphabet_size });
    }

    // Dense f64 view of the support: pair weights and the component of each.
    let pairs: Vec<(usize, usize, f64, usize)> = graph
        .edges
        .iter()
        .map(|(l, r, w)| (*l, *r, w.to_f64().unwrap_or(0.0), left[*l] as usize))
        .collect();
    let nl = graph.left_labels.len();
    let nr = graph.right_labels.len();

    // I(U;V|Q) for a given per-component kernel k[c][q].
    let objective = |k: &[Vec<f64>]| -> f64 {
        let mut p_q = vec![0.0; q_alphabet_size];
        let mut p_uq = vec![vec![0.0; q_alphabet_size]; nl];
        let mut p_vq = vec![vec![0.0; q_alphabet_size]; nr];
        for &(l, r, w, c) in &pairs {
            for q in 0..q_alphabet_size {
                let m = w * k[c][q];
                p_q[q] += m;
                p_uq[l][q] += m;
                p_vq[r][q] += m;
            }
        }
        let mut i = 0.0;
        for &(l, r, w, c) in &pairs {
            for q in 0..q_alphabet_size {
                let m = w * k[c][q];
                if m > 0.0 {
                    i += m * (m * p_q[q] / (p_uq[l][q] * p_vq[r][q])).log2();
                }
            }
        }
        i.max(0.0)
    };

    // Q = the component variable itself (one q per component).
    let mut identity = vec![vec![0.0; q_alphabet_size]; n_comp];
    for (c, row) in identity.iter_mut().enumerate() {
        row[c] = 1.0;
    }
    let mut best = objective(&identity);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = rand::distributions::Uniform::new(0.0f64, 1.0);
    const SEARCH_KERNELS: usize = 200;
    for _ in 0..SEARCH_KERNELS {
        let mut k = vec![vec![0.0; q_alphabet_size]; n_comp];
        for row in &mut k {
            let mut total = 0.0;
            for slot in row.iter_mut() {
                // Exponential spacings give a Dirichlet(1,...,1) sample.
                let e = -(1.0 - gamma.sample(&mut rng)).ln();
                *slot = e;
                total += e;
            }
            for slot in row.iter_mut() {
                *slot /= total;
            }
        }
        let v = objective(&k);
        if v < best {
            best = v;
        }
    }
    Ok(best)
}

/// The two output-reachability conditions used to strengthen bounds.
///
/// Condition 1 holds when no nontrivial split of the `X` alphabet separates
/// the outputs: equivalently, the graph joining `x` and `x'` whenever they can
/// both produce some common `z` (for some `y` in the full alphabet) is
/// connected. Condition 2 is the mirror statement for `Y`.
pub fn condition_checks(problem: &Problem) -> (bool, bool) {
    let nx = problem.x_alphabet().len();
    let ny = problem.y_alphabet().len();
    let nz = problem.z_alphabet().len();

    let connected = |n_side: usize, reach: &dyn Fn(u32) -> Vec<bool>| -> bool {
        if n_side <= 1 {
            return true;
        }
        let mut uf = UnionFind::new(n_side + nz);
        for s in 0..n_side as u32 {
            for (z, hit) in reach(s).iter().enumerate() {
                if *hit {
                    uf.union(s as usize, n_side + z);
                }
            }
        }
        let root = uf.find(0);
        (1..n_side).all(|s| uf.find(s) == root)
    };

    let cond1 = connected(nx, &|x: u32| {
        let mut hit = vec![false; nz];
        for y in 0..ny as u32 {
            for (z, slot) in hit.iter_mut().enumerate() {
                if !problem.channel().prob(x, y, z as u32).is_zero() {
                    *slot = true;
                }
            }
        }
        hit
    });
    let cond2 = connected(ny, &|y: u32| {
        let mut hit = vec![false; nz];
        for x in 0..nx as u32 {
            for (z, slot) in hit.iter_mut().enumerate() {
                if !problem.channel().prob(x, y, z as u32).is_zero() {
                    *slot = true;
                }
            }
        }
        hit
    });
    (cond1, cond2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{rat, Channel};
    use num::One;

    fn bit_var(name: &str) -> Var {
        Var::new(name, Alphabet::from_labels(&["0", "1"]).unwrap())
    }

    fn equal_bits() -> JointDist {
        JointDist::new(
            vec![bit_var("U"), bit_var("V")],
            vec![(vec![0, 0], rat(1, 2)), (vec![1, 1], rat(1, 2))],
        )
        .unwrap()
    }

    /// 2x2 full-support block of mass 3/4 plus an isolated (2,2) atom.
    fn block_plus_isolated() -> JointDist {
        let tri = Var::new("U", Alphabet::from_labels(&["0", "1", "2"]).unwrap());
        let tri2 = Var::new("V", Alphabet::from_labels(&["0", "1", "2"]).unwrap());
        JointDist::new(
            vec![tri, tri2],
            vec![
                (vec![0, 0], rat(3, 16)),
                (vec![0, 1], rat(3, 16)),
                (vec![1, 0], rat(3, 16)),
                (vec![1, 1], rat(3, 16)),
                (vec![2, 2], rat(1, 4)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identical_bits_have_two_components() {
        let cp = gacs_korner(&equal_bits(), &["U"], &["V"]).unwrap();
        assert_eq!(cp.num_components, 2);
        assert!((cp.entropy - 1.0).abs() < 1e-12);
        assert!(residual_information(&equal_bits(), &["U"], &["V"]).unwrap() < 1e-12);
    }

    #[test]
    fn independent_full_support_is_one_component() {
        let d = JointDist::uniform(vec![bit_var("U"), bit_var("V")]).unwrap();
        let cp = gacs_korner(&d, &["U"], &["V"]).unwrap();
        assert_eq!(cp.num_components, 1);
        assert_eq!(cp.entropy, 0.0);
        assert!(residual_information(&d, &["U"], &["V"]).unwrap() < 1e-12);
    }

    #[test]
    fn block_plus_isolated_entropy() {
        // Two components with masses 3/4 and 1/4.
        let cp = gacs_korner(&block_plus_isolated(), &["U"], &["V"]).unwrap();
        assert_eq!(cp.num_components, 2);
        let h2_quarter = -(0.25f64.log2() * 0.25 + 0.75f64.log2() * 0.75);
        assert!((cp.entropy - h2_quarter).abs() < 1e-12);
        // Inside the block U and V are independent, so RI = 0 here.
        let ri = residual_information(&block_plus_isolated(), &["U"], &["V"]).unwrap();
        assert!(ri.abs() < 1e-12);
    }

    #[test]
    fn dsbs_residual_equals_mutual_information() {
        // Connected support graph: no common part, RI = I.
        let d = JointDist::new(
            vec![bit_var("U"), bit_var("V")],
            vec![
                (vec![0, 0], rat(3, 8)),
                (vec![0, 1], rat(1, 8)),
                (vec![1, 0], rat(1, 8)),
                (vec![1, 1], rat(3, 8)),
            ],
        )
        .unwrap();
        let ri = residual_information(&d, &["U"], &["V"]).unwrap();
        let mi = d.mutual_information(&["U"], &["V"], &[]).unwrap();
        assert!((ri - mi).abs() < 1e-12);
        assert!(ri > 0.18); // 1 - H2(1/4) ≈ 0.1887
    }

    #[test]
    fn minimization_matches_closed_form() {
        for (d, q) in [
            (equal_bits(), 2),
            (JointDist::uniform(vec![bit_var("U"), bit_var("V")]).unwrap(), 2),
            (block_plus_isolated(), 3),
        ] {
            let ri = residual_information(&d, &["U"], &["V"]).unwrap();
            let rim =
                residual_information_via_minimization(&d, &["U"], &["V"], q, 7).unwrap();
            assert!(
                (ri - rim).abs() < 1e-6,
                "closed form {ri} vs minimization {rim}"
            );
        }
    }

    #[test]
    fn minimization_rejects_small_q() {
        let err = residual_information_via_minimization(&equal_bits(), &["U"], &["V"], 1, 0)
            .unwrap_err();
        assert!(matches!(err, InfoError::QAlphabetTooSmall { need: 2, got: 1 }));
    }

    #[test]
    fn grouped_variables_tensorize() {
        // RI(U²;V²) = 2·RI(U;V) for the doubly symmetric pair.
        let d = JointDist::new(
            vec![bit_var("U"), bit_var("V")],
            vec![
                (vec![0, 0], rat(3, 8)),
                (vec![0, 1], rat(1, 8)),
                (vec![1, 0], rat(1, 8)),
                (vec![1, 1], rat(3, 8)),
            ],
        )
        .unwrap();
        let d2 = d.iid_power(2, 1_000_000).unwrap();
        let ri1 = residual_information(&d, &["U"], &["V"]).unwrap();
        let ri2 = residual_information(&d2, &["U"], &["V"]).unwrap();
        assert!((ri2 - 2.0 * ri1).abs() < 1e-9);
    }

    fn and_problem() -> Problem {
        let x = bit_var("X");
        let y = bit_var("Y");
        let z = bit_var("Z");
        let ch = Channel::deterministic(x.clone(), y.clone(), z, |a, b| a & b).unwrap();
        let input = JointDist::uniform(vec![x, y]).unwrap();
        Problem::new(input, ch).unwrap()
    }

    fn erasure_problem() -> Problem {
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
        let input = JointDist::uniform(vec![x, y]).unwrap();
        Problem::new(input, ch).unwrap()
    }

    #[test]
    fn reachability_conditions() {
        assert_eq!(condition_checks(&and_problem()), (true, true));
        // Erasure: x=0 only reaches the erasure symbol while x=1 reaches
        // {0,1}, so the X side splits; the Y side stays connected through it.
        assert_eq!(condition_checks(&erasure_problem()), (false, true));
    }

    #[test]
    fn erasure_x_output_pair_is_disconnected() {
        // The (X,Z) support graph of controlled erasure splits into the
        // x=0 and x=1 components, so its residual information vanishes
        // even though I(X;Z) is large.
        let j = erasure_problem().joint().unwrap();
        let ri = residual_information(&j, &["X"], &["Z"]).unwrap();
        assert!(ri.abs() < 1e-12);
        let mi = j.mutual_information(&["X"], &["Z"], &[]).unwrap();
        assert!(mi > 0.9); // in fact H(X) = 1 here
        let gk = gacs_korner(&j, &["X"], &["Z"]).unwrap();
        assert_eq!(gk.num_components, 2);
        assert!((gk.entropy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_symbol_side_is_trivially_connected() {
        // X has one symbol, so no nontrivial X-partition exists and
        // Condition 1 holds vacuously. The Y side genuinely fails: y=0 only
        // reaches z=0 and y=1 only reaches z=1.
        let x = Var::new("X", Alphabet::from_labels(&["a"]).unwrap());
        let y = bit_var("Y");
        let z = bit_var("Z");
        let ch = Channel::deterministic(x.clone(), y.clone(), z, |_, b| b).unwrap();
        let input = JointDist::new(
            vec![x, y],
            vec![(vec![0, 0], rat(1, 2)), (vec![0, 1], rat(1, 2))],
        )
        .unwrap();
        let p = Problem::new(input, ch).unwrap();
        assert_eq!(condition_checks(&p), (true, false));
    }

    #[test]
    fn union_find_components_deterministic() {
        let g = BipartiteSupportGraph::from_joint(&block_plus_isolated(), &["U"], &["V"])
            .unwrap();
        let (l, r, n) = g.components();
        assert_eq!(n, 2);
        assert_eq!(l, vec![0, 0, 1]);
        assert_eq!(r, vec![0, 0, 1]);
        assert!(!g.is_connected());
        let mass: Rat = g.edges.iter().map(|(_, _, w)| w.clone()).sum();
        assert!(mass.is_one());
    }
}
