//! Multi-start projected pattern search over products of probability
//! simplices, with an interior-floor sweep.
//!
//! The lower-bound theorems take maxima over full-support distributions;
//! some of those maxima are only approached in the closure (mass vanishing
//! on part of the alphabet). The search therefore runs on the ε-interior of
//! the domain (every atom at least a floor) for a decreasing sweep of
//! floors, warm-starting each floor from the previous one. The per-floor
//! best values form a monotone trace; when the smallest floor clearly beats
//! the largest one the result is labeled a supremum over the open set
//! rather than an attained maximum.
//!
//! Moves are within-block pairwise mass transfers. When a linear equality
//! constraint ties the blocks together (the induced-output-marginal
//! constraint), moves instead follow a basis of the constraint's null
//! space through a feasible interior point supplied by the caller.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::BoundsError;

/// Free-dimension cap for a single search domain.
pub const FREE_DIM_LIMIT: usize = 24;

/// Knobs for the simplex search. Deserializable so a run configuration can
/// be loaded from a JSON file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Interior floors, swept in the given (descending) order.
    pub floors: Vec<f64>,
    /// Random restarts per floor, on top of the warm and center starts.
    pub restarts: usize,
    pub seed: u64,
    /// Initial mass-transfer step.
    pub initial_step: f64,
    /// Final step of the halving schedule.
    pub min_step: f64,
    /// How far the smallest floor must beat the largest one before the
    /// value is labeled a supremum over the open interior.
    pub supremum_margin: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            floors: vec![1e-2, 1e-3, 1e-4, 1e-6],
            restarts: 16,
            seed: 7,
            initial_step: 0.25,
            min_step: 1e-7,
            supremum_margin: 1e-5,
        }
    }
}

/// Linear equality constraints `A·q = b` across the concatenated candidate
/// vector, beyond each block's own sum-to-one constraint.
#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    /// A feasible point with full support; the search explores the
    /// constraint's null space around it.
    pub interior_point: Vec<f64>,
}

/// Deterministic map from a flattened candidate to an objective value in bits.
pub type Evaluator<'a> = Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>;

/// An objective over a product of probability simplices.
pub struct SimplexObjective<'a> {
    /// Sizes of the free blocks, in the order they appear in the candidate.
    pub blocks: Vec<usize>,
    pub constraint: Option<LinearConstraint>,
    /// Deterministic map from a candidate to the objective value in bits.
    pub evaluator: Evaluator<'a>,
}

/// One floor's best value.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct TracePoint {
    pub floor: f64,
    pub value: f64,
}

/// Result of a search: the best value over the floor sweep, the witness
/// that achieves it, and the per-floor trace.
#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub value: f64,
    /// Best candidate, split back into blocks.
    pub witness: Vec<Vec<f64>>,
    /// Floor at which the best value was found.
    pub floor: f64,
    /// Best value per floor, in sweep order (floors descending).
    pub trace: Vec<TracePoint>,
    /// True when the value is approached near the boundary rather than
    /// attained in the interior: the bound is a supremum over the open
    /// full-support set (its closure value).
    pub supremum: bool,
}

enum Direction {
    /// Move mass from one coordinate to another inside a block.
    Transfer { from: usize, to: usize },
    /// Follow a dense null-space direction (either sign).
    Dense(Vec<f64>),
}

struct Domain {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    n: usize,
    directions: Vec<Direction>,
}

impl Domain {
    fn split(&self, q: &[f64]) -> Vec<Vec<f64>> {
        self.sizes
            .iter()
            .zip(&self.offsets)
            .map(|(&s, &o)| q[o..o + s].to_vec())
            .collect()
    }
}

/// Maximize over the product of simplices with the documented total
/// free-dimension cap.
pub fn optimize_over_simplex(
    objective: &SimplexObjective,
    config: &OptimizerConfig,
) -> Result<SearchOutcome, BoundsError> {
    let total_free: usize = objective.blocks.iter().map(|&s| s.saturating_sub(1)).sum();
    if total_free > FREE_DIM_LIMIT {
        return Err(BoundsError::DimensionGuard { free: total_free, limit: FREE_DIM_LIMIT });
    }
    search(objective, config)
}

/// The same search with the cap applied per block instead of in total;
/// larger multi-block domains stay tractable because every move touches a
/// single block (or a fixed null-space direction).
pub(crate) fn search(
    objective: &SimplexObjective,
    config: &OptimizerConfig,
) -> Result<SearchOutcome, BoundsError> {
    if objective.blocks.is_empty() {
        return Err(BoundsError::EmptyDomain);
    }
    if let Some(&worst) = objective.blocks.iter().max() {
        if worst.saturating_sub(1) > FREE_DIM_LIMIT {
            return Err(BoundsError::DimensionGuard {
                free: worst.saturating_sub(1),
                limit: FREE_DIM_LIMIT,
            });
        }
    }
    let mut offsets = Vec::with_capacity(objective.blocks.len());
    let mut n = 0usize;
    for &s in &objective.blocks {
        if s == 0 {
            return Err(BoundsError::EmptyDomain);
        }
        offsets.push(n);
        n += s;
    }

    let directions = match &objective.constraint {
        None => {
            let mut dirs = Vec::new();
            for (b, &s) in objective.blocks.iter().enumerate() {
                for i in 0..s {
                    for j in 0..s {
                        if i != j {
                            dirs.push(Direction::Transfer {
                                from: offsets[b] + i,
                                to: offsets[b] + j,
                            });
                        }
                    }
                }
            }
            dirs
        }
        Some(c) => {
            if c.interior_point.len() != n {
                return Err(BoundsError::InfeasibleConstraint(
                    "interior point length does not match the domain".into(),
                ));
            }
            for (row, &b) in c.rows.iter().zip(&c.rhs) {
                let got: f64 = row.iter().zip(&c.interior_point).map(|(a, q)| a * q).sum();
                if (got - b).abs() > 1e-9 {
                    return Err(BoundsError::InfeasibleConstraint(format!(
                        "interior point misses a constraint row by {:.3e}",
                        (got - b).abs()
                    )));
                }
            }
            null_space_directions(&objective.blocks, &offsets, n, &c.rows)
        }
    };
    let domain = Domain { sizes: objective.blocks.clone(), offsets, n, directions };

    let mut floors = config.floors.clone();
    if floors.is_empty() {
        floors.push(1e-6);
    }
    floors.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // A floor must leave the center start feasible; with a supplied interior
    // point, it must also not exceed that point's smallest atom.
    let feasible_floor = |f: f64| -> f64 {
        let mut f = f;
        for &s in &domain.sizes {
            if s as f64 * f >= 1.0 {
                f = 0.5 / s as f64;
            }
        }
        if let Some(c) = &objective.constraint {
            let min_atom = c.interior_point.iter().cloned().fold(f64::INFINITY, f64::min);
            if f >= min_atom {
                f = 0.5 * min_atom;
            }
        }
        f
    };

    let eval = &objective.evaluator;
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut best: Option<(f64, Vec<f64>, f64)> = None; // value, point, floor
    let mut warm: Option<Vec<f64>> = None;

    for (floor_idx, &floor_raw) in floors.iter().enumerate() {
        let floor = feasible_floor(floor_raw);
        let mut starts: Vec<Vec<f64>> = Vec::new();
        if let Some(w) = &warm {
            starts.push(w.clone());
        }
        starts.push(center_start(&domain, objective.constraint.as_ref()));
        for r in 0..config.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream((floor_idx * config.restarts + r) as u64 + 1);
            starts.push(random_start(&domain, objective.constraint.as_ref(), floor, &mut rng));
        }

        // Restart climbs run at a coarse final step; only the floor's winner
        // gets polished down to the configured minimum step.
        let coarse = config.min_step.max(1e-5);
        let climbed: Vec<(usize, f64, Vec<f64>)> = starts
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let (v, q) = climb(&domain, eval, s.clone(), floor, config.initial_step, coarse);
                (i, v, q)
            })
            .collect();
        let (_, _, rough) = climbed
            .into_iter()
            .reduce(|a, b| if b.1 > a.1 { b } else { a })
            .expect("at least one start");
        let (value, point) =
            climb(&domain, eval, rough, floor, config.initial_step, config.min_step);

        trace.push(TracePoint { floor, value });
        let better = match &best {
            None => true,
            Some((bv, _, _)) => value >= *bv, // ties prefer the smaller floor
        };
        if better {
            best = Some((value, point.clone(), floor));
        }
        warm = Some(point);
    }

    let (value, point, floor) = best.expect("at least one floor");
    let supremum = trace.len() > 1
        && trace.last().unwrap().value > trace.first().unwrap().value + config.supremum_margin;
    Ok(SearchOutcome { value, witness: domain.split(&point), floor, trace, supremum })
}

fn center_start(domain: &Domain, constraint: Option<&LinearConstraint>) -> Vec<f64> {
    match constraint {
        Some(c) => c.interior_point.clone(),
        None => {
            let mut q = Vec::with_capacity(domain.n);
            for &s in &domain.sizes {
                q.extend(std::iter::repeat_n(1.0 / s as f64, s));
            }
            q
        }
    }
}

fn random_start(
    domain: &Domain,
    constraint: Option<&LinearConstraint>,
    floor: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    match constraint {
        None => {
            // Per block: a flat-Dirichlet sample mixed toward the floor so
            // every atom clears it.
            let mut q = Vec::with_capacity(domain.n);
            for &s in &domain.sizes {
                let mut g: Vec<f64> = (0..s)
                    .map(|_| -(1.0 - rng.gen::<f64>()).ln().max(1e-300))
                    .collect();
                let sum: f64 = g.iter().sum();
                let scale = 1.0 - s as f64 * floor;
                for v in &mut g {
                    *v = floor + scale * (*v / sum);
                }
                q.extend(g);
            }
            q
        }
        Some(c) => {
            // A random step from the interior point along the null space,
            // pulled back inside the floor.
            let dirs: Vec<&Vec<f64>> = domain
                .directions
                .iter()
                .filter_map(|d| match d {
                    Direction::Dense(v) => Some(v),
                    Direction::Transfer { .. } => None,
                })
                .collect();
            let mut delta = vec![0.0; domain.n];
            for d in dirs {
                let cft: f64 = rng.gen::<f64>() * 2.0 - 1.0;
                for (slot, &v) in delta.iter_mut().zip(d) {
                    *slot += cft * v;
                }
            }
            let mut t: f64 = 1.0;
            for (q0, &d) in c.interior_point.iter().zip(&delta) {
                if d < -1e-15 {
                    t = t.min(0.9 * (q0 - floor) / -d);
                }
            }
            t = t.max(0.0);
            c.interior_point.iter().zip(&delta).map(|(q0, &d)| q0 + t * d).collect()
        }
    }
}

/// Greedy best-improvement pattern search with step halving.
fn climb(
    domain: &Domain,
    eval: &(dyn Fn(&[f64]) -> f64 + Sync),
    mut q: Vec<f64>,
    floor: f64,
    initial_step: f64,
    min_step: f64,
) -> (f64, Vec<f64>) {
    let mut value = eval(&q);
    let mut step = initial_step;
    let mut cand = vec![0.0; domain.n];
    while step >= min_step {
        loop {
            let mut best_v = value + 1e-12;
            let mut best_q: Option<Vec<f64>> = None;
            for dir in &domain.directions {
                if !apply(dir, &q, step, floor, &mut cand) {
                    continue;
                }
                let v = eval(&cand);
                if v > best_v {
                    best_v = v;
                    best_q = Some(cand.clone());
                }
            }
            match best_q {
                Some(next) => {
                    value = best_v;
                    q = next;
                }
                None => break,
            }
        }
        step *= 0.5;
    }
    (value, q)
}

/// Try a move; `cand` receives the new point. Returns false when the move
/// is blocked by the floor.
fn apply(dir: &Direction, q: &[f64], step: f64, floor: f64, cand: &mut [f64]) -> bool {
    match dir {
        Direction::Transfer { from, to } => {
            let avail = q[*from] - floor;
            let t = step.min(avail);
            if t <= 1e-12 {
                return false;
            }
            cand.copy_from_slice(q);
            cand[*from] -= t;
            cand[*to] += t;
            true
        }
        Direction::Dense(d) => {
            let mut t = step;
            for (&qi, &di) in q.iter().zip(d) {
                if di < -1e-15 {
                    t = t.min((qi - floor) / -di);
                }
            }
            if t <= 1e-12 {
                return false;
            }
            for ((slot, &qi), &di) in cand.iter_mut().zip(q).zip(d) {
                *slot = qi + t * di;
            }
            true
        }
    }
}

/// Null-space basis of the stacked system (per-block sums fixed, plus the
/// caller's equality rows), as dense ± move directions.
fn null_space_directions(
    sizes: &[usize],
    offsets: &[usize],
    n: usize,
    extra_rows: &[Vec<f64>],
) -> Vec<Direction> {
    let mut m: Vec<Vec<f64>> = Vec::new();
    for (&s, &o) in sizes.iter().zip(offsets) {
        let mut row = vec![0.0; n];
        for slot in row.iter_mut().skip(o).take(s) {
            *slot = 1.0;
        }
        m.push(row);
    }
    for row in extra_rows {
        let mut r = row.clone();
        r.resize(n, 0.0);
        m.push(r);
    }

    // Gaussian elimination with partial pivoting to row echelon form.
    let rows = m.len();
    let mut pivot_col_of_row: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..n {
        let mut best = rank;
        let mut best_abs = 0.0;
        for (r, row) in m.iter().enumerate().skip(rank).take(rows - rank) {
            if row[col].abs() > best_abs {
                best_abs = row[col].abs();
                best = r;
            }
        }
        if best_abs < 1e-10 {
            continue;
        }
        m.swap(rank, best);
        let scale = m[rank][col];
        for v in &mut m[rank] {
            *v /= scale;
        }
        for r in 0..rows {
            if r != rank && m[r][col].abs() > 0.0 {
                let f = m[r][col];
                let (head, tail) = m.split_at_mut(rank.max(r));
                let (pivot_row, other) = if r < rank {
                    (&tail[0], &mut head[r])
                } else {
                    (&head[rank], &mut tail[0])
                };
                for (o, p) in other.iter_mut().zip(pivot_row) {
                    *o -= f * p;
                }
            }
        }
        pivot_col_of_row.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }

    let pivot_set: std::collections::BTreeSet<usize> = pivot_col_of_row.iter().copied().collect();
    let mut dirs = Vec::new();
    for free in 0..n {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut d = vec![0.0; n];
        d[free] = 1.0;
        for (r, &pc) in pivot_col_of_row.iter().enumerate() {
            d[pc] = -m[r][free];
        }
        // Normalize to unit max-magnitude so the step size means the same
        // thing for every direction.
        let peak = d.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if peak > 0.0 {
            for v in &mut d {
                *v /= peak;
            }
        }
        let neg: Vec<f64> = d.iter().map(|&v| -v).collect();
        dirs.push(Direction::Dense(d));
        dirs.push(Direction::Dense(neg));
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_small() -> OptimizerConfig {
        OptimizerConfig { restarts: 4, ..OptimizerConfig::default() }
    }

    #[test]
    fn binary_entropy_peaks_at_half() {
        let obj = SimplexObjective {
            blocks: vec![2],
            constraint: None,
            evaluator: Box::new(|q: &[f64]| super::super::dense::entropy(q)),
        };
        let out = optimize_over_simplex(&obj, &config_small()).unwrap();
        assert!((out.value - 1.0).abs() < 1e-9, "H max {}", out.value);
        assert!((out.witness[0][0] - 0.5).abs() < 1e-6);
        assert!(!out.supremum);
        assert_eq!(out.trace.len(), 4);
    }

    #[test]
    fn boundary_objective_is_labeled_supremum() {
        // max q[0] over the simplex: supremum 1 approached at the boundary.
        let obj = SimplexObjective {
            blocks: vec![3],
            constraint: None,
            evaluator: Box::new(|q: &[f64]| q[0]),
        };
        let out = optimize_over_simplex(&obj, &config_small()).unwrap();
        assert!(out.supremum, "trace {:?}", out.trace);
        assert!((out.value - 1.0).abs() < 1e-5);
        // Monotone trace as floors shrink.
        for w in out.trace.windows(2) {
            assert!(w[1].value >= w[0].value - 1e-12);
        }
    }

    #[test]
    fn total_dimension_guard_trips() {
        let obj = SimplexObjective {
            blocks: vec![13, 14],
            constraint: None,
            evaluator: Box::new(|_: &[f64]| 0.0),
        };
        match optimize_over_simplex(&obj, &config_small()) {
            Err(BoundsError::DimensionGuard { free, limit }) => {
                assert_eq!(free, 25);
                assert_eq!(limit, 24);
            }
            other => panic!("expected dimension guard, got {:?}", other.map(|o| o.value)),
        }
    }

    #[test]
    fn per_block_search_accepts_what_total_guard_rejects() {
        // 2 blocks * 13 free dims each: rejected by the public entry,
        // accepted by the block-move search.
        let obj = SimplexObjective {
            blocks: vec![14, 14],
            constraint: None,
            evaluator: Box::new(|q: &[f64]| super::super::dense::entropy(q) / 2.0),
        };
        assert!(optimize_over_simplex(&obj, &config_small()).is_err());
        let out = search(&obj, &config_small()).unwrap();
        // Max of (H(a)+H(b))/2 is log2(14).
        assert!((out.value - (14.0f64).log2()).abs() < 1e-6);
    }

    #[test]
    fn constrained_search_respects_linear_rows() {
        // Maximize entropy of a 4-vector subject to q0 + q1 = 0.7; optimum
        // (.35, .35, .15, .15).
        let constraint = LinearConstraint {
            rows: vec![vec![1.0, 1.0, 0.0, 0.0]],
            rhs: vec![0.7],
            interior_point: vec![0.4, 0.3, 0.2, 0.1],
        };
        let obj = SimplexObjective {
            blocks: vec![4],
            constraint: Some(constraint),
            evaluator: Box::new(|q: &[f64]| super::super::dense::entropy(q)),
        };
        let out = optimize_over_simplex(&obj, &config_small()).unwrap();
        let expect = -(2.0 * 0.35 * (0.35f64).log2() + 2.0 * 0.15 * (0.15f64).log2());
        assert!((out.value - expect).abs() < 1e-7, "got {} want {}", out.value, expect);
        let w = &out.witness[0];
        assert!((w[0] + w[1] - 0.7).abs() < 1e-9);
        assert!((w[0] - 0.35).abs() < 1e-5);
    }

    #[test]
    fn infeasible_interior_point_is_rejected() {
        let constraint = LinearConstraint {
            rows: vec![vec![1.0, 0.0]],
            rhs: vec![0.9],
            interior_point: vec![0.5, 0.5],
        };
        let obj = SimplexObjective {
            blocks: vec![2],
            constraint: Some(constraint),
            evaluator: Box::new(|_: &[f64]| 0.0),
        };
        assert!(matches!(
            optimize_over_simplex(&obj, &config_small()),
            Err(BoundsError::InfeasibleConstraint(_))
        ));
    }

    #[test]
    fn deterministic_given_config() {
        let obj = || SimplexObjective {
            blocks: vec![3, 3],
            constraint: None,
            evaluator: Box::new(|q: &[f64]| {
                super::super::dense::entropy(&q[0..3]) - 0.3 * super::super::dense::entropy(&q[3..6])
            }),
        };
        let a = search(&obj(), &config_small()).unwrap();
        let b = search(&obj(), &config_small()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.witness, b.witness);
        assert_eq!(a.trace, b.trace);
    }
}
