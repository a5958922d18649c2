//! Lower bounds on communication and randomness for three-user secure
//! computation, evaluated numerically.
//!
//! Three families are implemented:
//!
//! * [`prelim_bounds`] — cut-based bounds evaluated directly at the given
//!   input law (no optimization), requiring the problem in normal form.
//! * [`improved_bounds`] — distribution-switching bounds: each link bound
//!   is a maximum of rows, every row an optimization over switched input
//!   laws with prescribed pinned marginals, evaluated through the fixed
//!   channel. When an output-connectivity condition holds for an input
//!   side, the corresponding link's rows are replaced by the stronger
//!   fully-free versions.
//! * [`randomness_bounds`] — bounds on the total randomness-plus-output
//!   entropy rate, combining link bounds with switched bounds on
//!   conditional transcript entropies.
//!
//! Asymptotic (vanishing-error) bounds and the matching protocol rate
//! formulas live in [`asymptotic`].

mod asymptotic;
pub(crate) mod dense;
mod opt;

pub use asymptotic::{asymptotic_bounds, asymptotic_protocol_rates, AsymptoticRateReport, AsymptoticScheme};
pub use opt::{
    optimize_over_simplex, LinearConstraint, OptimizerConfig, SearchOutcome, SimplexObjective,
    TracePoint, FREE_DIM_LIMIT,
};

use serde::Serialize;
use thiserror::Error;

use crate::info::{condition_checks, normal_form, residual_information, InfoError};
use crate::prob::{ProbError, Problem};
use dense::{joint_from_x_conditionals, joint_from_y_conditionals, product_joint, DenseProblem};
use opt::search;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error("the problem is not in normal form")]
    NotNormalForm,
    #[error("the input law must have full support")]
    NotFullSupport,
    #[error("search domain has {free} free dimensions (limit {limit})")]
    DimensionGuard { free: usize, limit: usize },
    #[error("search domain is empty")]
    EmptyDomain,
    #[error("infeasible constraint: {0}")]
    InfeasibleConstraint(String),
    #[error("the channel must be deterministic")]
    RandomizedChannel,
    #[error("problem does not match the scheme: {0}")]
    ShapeMismatch(String),
    #[error("witness failed re-evaluation (off by {0:.3e})")]
    WitnessMismatch(f64),
}

/// One atom of a witness distribution.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessAtom {
    pub symbol: String,
    pub p: f64,
}

/// A distribution block of a witness, with display labels.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessBlock {
    pub name: String,
    pub pmf: Vec<WitnessAtom>,
}

/// The achieving distributions of one maximized term, with a note on which
/// marginals were pinned to the actual input law.
#[derive(Clone, Debug, Serialize)]
pub struct TermWitness {
    pub term: String,
    pub pinned: Vec<String>,
    pub blocks: Vec<WitnessBlock>,
    pub value: f64,
}

/// One row of a bound: a labeled value with its optimization evidence.
#[derive(Clone, Debug, Serialize)]
pub struct RowValue {
    pub label: String,
    pub value: f64,
    /// True when the value is a supremum over the open full-support set
    /// (approached near the boundary), reported at the closure.
    pub supremum: bool,
    /// Interior floor at which the best value was found (0 when the row
    /// needs no optimization).
    pub floor: f64,
    /// Best value per interior floor, floors descending.
    pub trace: Vec<TracePoint>,
    pub witnesses: Vec<TermWitness>,
}

/// A link (or randomness) bound: the best row and all rows behind it.
#[derive(Clone, Debug, Serialize)]
pub struct LinkBound {
    pub bits: f64,
    pub best_row: String,
    pub rows: Vec<RowValue>,
    /// Rows skipped because their search domain exceeded the dimension
    /// guard; the reported max over the remaining rows is still a valid
    /// lower bound.
    pub skipped: Vec<String>,
}

/// Output-reachability connectivity of the two input sides. The X side is
/// connected when no nontrivial split of the X alphabet reaches disjoint
/// output sets (quantified over the full Y alphabet); mirrored for Y.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConditionFlags {
    pub x_side: bool,
    pub y_side: bool,
}

/// A full bound report for the three links plus (when the theorem provides
/// one) the randomness rate.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub theorem: String,
    pub r12: LinkBound,
    pub r23: LinkBound,
    pub r31: LinkBound,
    pub randomness: Option<LinkBound>,
    pub conditions: Option<ConditionFlags>,
}

/// Report of the randomness lower bounds: all labeled rows plus their max.
#[derive(Clone, Debug, Serialize)]
pub struct RandomnessReport {
    pub theorem: String,
    pub best: f64,
    pub best_row: String,
    pub rows: Vec<RowValue>,
    /// Rows skipped because their search domain exceeded the dimension
    /// guard; the reported max is still a valid lower bound.
    pub skipped: Vec<String>,
    pub conditions: ConditionFlags,
}

pub(crate) fn link_from_rows(rows: Vec<RowValue>) -> LinkBound {
    let mut bits = f64::NEG_INFINITY;
    let mut best_row = String::new();
    for r in &rows {
        if r.value > bits {
            bits = r.value;
            best_row = r.label.clone();
        }
    }
    LinkBound { bits, best_row, rows, skipped: Vec::new() }
}

/// Collect rows, downgrading dimension-guard failures to skips. Errors out
/// only when no row survives (the bound would be vacuous).
pub(crate) fn link_from_row_results(
    results: Vec<(String, Result<RowValue, BoundsError>)>,
) -> Result<LinkBound, BoundsError> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut guard: Option<BoundsError> = None;
    for (label, res) in results {
        match res {
            Ok(row) => rows.push(row),
            Err(e @ BoundsError::DimensionGuard { .. }) => {
                skipped.push(label);
                guard = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    if rows.is_empty() {
        return Err(guard.unwrap_or(BoundsError::EmptyDomain));
    }
    let mut link = link_from_rows(rows);
    link.skipped = skipped;
    Ok(link)
}

pub(crate) fn row_constant(label: impl Into<String>, value: f64) -> RowValue {
    RowValue {
        label: label.into(),
        value,
        supremum: false,
        floor: 0.0,
        trace: Vec::new(),
        witnesses: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// Preliminary bounds: evaluated at the given law, no optimization.
// ---------------------------------------------------------------------------

/// Cut bounds at the given input law. Requires the problem in normal form.
pub fn prelim_bounds(problem: &Problem) -> Result<BoundReport, BoundsError> {
    ensure_normal_form(problem)?;
    let joint = problem.joint()?;
    let x = problem.channel().x().name.clone();
    let y = problem.channel().y().name.clone();
    let z = problem.channel().z().name.clone();
    let (x, y, z) = (x.as_str(), y.as_str(), z.as_str());

    let ri_xy = residual_information(&joint, &[x], &[y])?;
    let ri_xz = residual_information(&joint, &[x], &[z])?;
    let ri_yz = residual_information(&joint, &[y], &[z])?;
    let h_xz_y = joint.entropy(&[x, z], &[y])?;
    let h_yz_x = joint.entropy(&[y, z], &[x])?;
    let h_xy_z = joint.entropy(&[x, y], &[z])?;

    let r31 = link_from_rows(vec![row_constant(
        "max{RI(X;Y), RI(Y;Z)} + H(X,Z|Y) at the input law",
        ri_xy.max(ri_yz) + h_xz_y,
    )]);
    let r23 = link_from_rows(vec![row_constant(
        "max{RI(X;Y), RI(X;Z)} + H(Y,Z|X) at the input law",
        ri_xy.max(ri_xz) + h_yz_x,
    )]);
    let r12 = link_from_rows(vec![row_constant(
        "max{RI(X;Z), RI(Y;Z)} + H(X,Y|Z) at the input law",
        ri_xz.max(ri_yz) + h_xy_z,
    )]);

    Ok(BoundReport { theorem: "preliminary".into(), r12, r23, r31, randomness: None, conditions: None })
}

fn ensure_normal_form(problem: &Problem) -> Result<(), BoundsError> {
    if !normal_form(problem)?.is_identity() {
        return Err(BoundsError::NotNormalForm);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Term machinery for the switched-distribution searches.
// ---------------------------------------------------------------------------

pub(crate) struct Term<'a> {
    pub(crate) label: String,
    pub(crate) pinned: Vec<String>,
    pub(crate) names: Vec<String>,
    pub(crate) symbols: Vec<Vec<String>>,
    pub(crate) objective: SimplexObjective<'a>,
}

fn run_term(term: &Term, config: &OptimizerConfig) -> Result<(SearchOutcome, TermWitness), BoundsError> {
    let outcome = search(&term.objective, config)?;
    let flat: Vec<f64> = outcome.witness.iter().flatten().copied().collect();
    let again = (term.objective.evaluator)(&flat);
    if (again - outcome.value).abs() > 1e-9 {
        return Err(BoundsError::WitnessMismatch(again - outcome.value));
    }
    let blocks = term
        .names
        .iter()
        .zip(&term.symbols)
        .zip(&outcome.witness)
        .map(|((name, syms), pmf)| WitnessBlock {
            name: name.clone(),
            pmf: syms
                .iter()
                .cloned()
                .zip(pmf.iter().copied())
                .map(|(symbol, p)| WitnessAtom { symbol, p })
                .collect(),
        })
        .collect();
    let tw = TermWitness {
        term: term.label.clone(),
        pinned: term.pinned.clone(),
        blocks,
        value: outcome.value,
    };
    Ok((outcome, tw))
}

pub(crate) fn row_single(
    label: impl Into<String>,
    term: &Term,
    config: &OptimizerConfig,
) -> Result<RowValue, BoundsError> {
    let (o, tw) = run_term(term, config)?;
    Ok(RowValue {
        label: label.into(),
        value: o.value,
        supremum: o.supremum,
        floor: o.floor,
        trace: o.trace,
        witnesses: vec![tw],
    })
}

fn row_sum(
    label: impl Into<String>,
    t1: &Term,
    t2: &Term,
    config: &OptimizerConfig,
) -> Result<RowValue, BoundsError> {
    let (o1, w1) = run_term(t1, config)?;
    let (o2, w2) = run_term(t2, config)?;
    let trace = o1
        .trace
        .iter()
        .zip(&o2.trace)
        .map(|(a, b)| TracePoint { floor: a.floor.min(b.floor), value: a.value + b.value })
        .collect();
    Ok(RowValue {
        label: label.into(),
        value: o1.value + o2.value,
        supremum: o1.supremum || o2.supremum,
        floor: o1.floor.min(o2.floor),
        trace,
        witnesses: vec![w1, w2],
    })
}

/// Shared context for building search terms against one problem.
struct Cx<'a> {
    dp: &'a DenseProblem,
    xs: Vec<String>,
    ys: Vec<String>,
}

impl<'a> Cx<'a> {
    fn new(problem: &Problem, dp: &'a DenseProblem) -> Self {
        Cx {
            dp,
            xs: problem.x_alphabet().symbols().to_vec(),
            ys: problem.y_alphabet().symbols().to_vec(),
        }
    }

    fn pin_x(&self) -> String {
        "p_X pinned to the input X-marginal".to_string()
    }

    fn pin_y(&self) -> String {
        "p_Y pinned to the input Y-marginal".to_string()
    }

    fn cond_names_given_x(&self, var: &str) -> (Vec<String>, Vec<Vec<String>>) {
        let names = self.xs.iter().map(|x| format!("{var}|X={x}")).collect();
        let symbols = vec![self.ys.clone(); self.xs.len()];
        (names, symbols)
    }

    fn cond_names_given_y(&self, var: &str) -> (Vec<String>, Vec<Vec<String>>) {
        let names = self.ys.iter().map(|y| format!("{var}|Y={y}")).collect();
        let symbols = vec![self.xs.clone(); self.ys.len()];
        (names, symbols)
    }

    fn joint_symbols(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.xs.len() * self.ys.len());
        for x in &self.xs {
            for y in &self.ys {
                out.push(format!("({x},{y})"));
            }
        }
        out
    }

    /// `max over p_Y' of RI(Y';Z')` with the true `p_X` as a product factor.
    fn prod_ri_yz_pinned_x(&self) -> Term<'a> {
        let dp = self.dp;
        Term {
            label: "max_{p_Y'} RI(Y';Z') over p_X x p_Y'".into(),
            pinned: vec![self.pin_x()],
            names: vec!["p_Y'".into()],
            symbols: vec![self.ys.clone()],
            objective: SimplexObjective {
                blocks: vec![dp.ny],
                constraint: None,
                evaluator: Box::new(move |q: &[f64]| {
                    dp.tri(&product_joint(&dp.px, q)).ri_yz(dp)
                }),
            },
        }
    }

    /// `max over p_X' of RI(X';Z')` with the true `p_Y` as a product factor.
    fn prod_ri_xz_pinned_y(&self) -> Term<'a> {
        let dp = self.dp;
        Term {
            label: "max_{p_X'} RI(X';Z') over p_X' x p_Y".into(),
            pinned: vec![self.pin_y()],
            names: vec!["p_X'".into()],
            symbols: vec![self.xs.clone()],
            objective: SimplexObjective {
                blocks: vec![dp.nx],
                constraint: None,
                evaluator: Box::new(move |q: &[f64]| {
                    dp.tri(&product_joint(q, &dp.py)).ri_xz(dp)
                }),
            },
        }
    }

    /// Conditionals `p_{Y'|X}` with the true `p_X`, scoring `f(tri)`.
    fn cond_given_x(&self, label: &str, var: &str, f: fn(&dense::Tri, &DenseProblem) -> f64) -> Term<'a> {
        let dp = self.dp;
        let (names, symbols) = self.cond_names_given_x(var);
        Term {
            label: label.into(),
            pinned: vec![self.pin_x()],
            names,
            symbols,
            objective: SimplexObjective {
                blocks: vec![dp.ny; dp.nx],
                constraint: None,
                evaluator: Box::new(move |q: &[f64]| {
                    let t = dp.tri(&joint_from_x_conditionals(&dp.px, q, dp.ny));
                    f(&t, dp)
                }),
            },
        }
    }

    /// Conditionals `p_{X'|Y}` with the true `p_Y`, scoring `f(tri)`.
    fn cond_given_y(&self, label: &str, var: &str, f: fn(&dense::Tri, &DenseProblem) -> f64) -> Term<'a> {
        let dp = self.dp;
        let (names, symbols) = self.cond_names_given_y(var);
        Term {
            label: label.into(),
            pinned: vec![self.pin_y()],
            names,
            symbols,
            objective: SimplexObjective {
                blocks: vec![dp.nx; dp.ny],
                constraint: None,
                evaluator: Box::new(move |q: &[f64]| {
                    let t = dp.tri(&joint_from_y_conditionals(&dp.py, q, dp.nx));
                    f(&t, dp)
                }),
            },
        }
    }

    /// Fully free joint `p_{X'Y'}`, scoring `f(tri)`; optionally constrained
    /// to induce the true output marginal.
    fn free_joint(
        &self,
        label: &str,
        pin_z: bool,
        f: fn(&dense::Tri, &DenseProblem) -> f64,
    ) -> Term<'a> {
        let dp = self.dp;
        let constraint = if pin_z {
            let mut rows = Vec::with_capacity(dp.nz);
            for z in 0..dp.nz {
                let mut row = vec![0.0; dp.nx * dp.ny];
                for (i, slot) in row.iter_mut().enumerate() {
                    *slot = dp.w[i * dp.nz + z];
                }
                rows.push(row);
            }
            Some(LinearConstraint { rows, rhs: dp.pz.clone(), interior_point: dp.pxy.clone() })
        } else {
            None
        };
        let pinned = if pin_z {
            vec!["induced output marginal pinned to the input law's output marginal".to_string()]
        } else {
            Vec::new()
        };
        Term {
            label: label.into(),
            pinned,
            names: vec!["p_X'Y'".into()],
            symbols: vec![self.joint_symbols()],
            objective: SimplexObjective {
                blocks: vec![dp.nx * dp.ny],
                constraint,
                evaluator: Box::new(move |q: &[f64]| f(&dp.tri(q), dp)),
            },
        }
    }

    /// Shared-marginal row: one search over `p_X'` (shared), a product
    /// factor `p_Y'`, and conditionals `p_{Y''|X'}`; the first scorer sees
    /// the product law, the second the conditional joint.
    fn shared_x_row(
        &self,
        label: &str,
        f_prod: fn(&dense::Tri, &DenseProblem) -> f64,
        f_joint: fn(&dense::Tri, &DenseProblem) -> f64,
    ) -> Term<'a> {
        let dp = self.dp;
        let (nx, ny) = (dp.nx, dp.ny);
        let mut blocks = vec![nx, ny];
        blocks.extend(std::iter::repeat_n(ny, nx));
        let mut names = vec!["p_X'".to_string(), "p_Y'".to_string()];
        let (cnames, csyms) = self.cond_names_given_x("p_Y''");
        names.extend(cnames);
        let mut symbols = vec![self.xs.clone(), self.ys.clone()];
        symbols.extend(csyms);
        Term {
            label: label.into(),
            pinned: Vec::new(),
            names,
            symbols,
            objective: SimplexObjective {
                blocks,
                constraint: None,
                evaluator: Box::new(move |q: &[f64]| {
                    let bx = &q[0..nx];
                    let by = &q[nx..nx + ny];
                    let conds = &q[nx + ny..];
                    let a = f_prod(&dp.tri(&product_joint(bx, by)), dp);
                    let b = f_joint(&dp.tri(&joint_from_x_conditionals(bx, conds, ny)), dp);
                    a + b
                }),
            },
        }
    }

    /// Mirror of [`Cx::shared_x_row`] with the `p_Y'` marginal shared.
    fn shared_y_row(
        &self,
        label: &str,
        f_prod: fn(&dense::Tri, &DenseProblem) -> f64,
        f_joint: fn(&dense::Tri, &DenseProblem) -> f64,
    ) -> Term<'a> {
        let dp = self.dp;
        let (nx, ny) = (dp.nx, dp.ny);
        let mut blocks = vec![ny, nx];
        blocks.extend(std::iter::repeat_n(nx, ny));
        let mut names = vec!["p_Y'".to_string(), "p_X'".to_string()];
        let (cnames, csyms) = self.cond_names_given_y("p_X''");
        names.extend(cnames);
        let mut symbols = vec![self.ys.clone(), self.xs.clone()];
        symbols.extend(csyms);
        Term {
            label: label.into(),
            pinned: Vec::new(),
            names,
            symbols,
            objective: SimplexObjective {
                blocks,
                constraint: None,
                evaluator: Box::new(move |q: &[f64]| {
                    let by = &q[0..ny];
                    let bx = &q[ny..ny + nx];
                    let conds = &q[ny + nx..];
                    let a = f_prod(&dp.tri(&product_joint(bx, by)), dp);
                    let b = f_joint(&dp.tri(&joint_from_y_conditionals(by, conds, nx)), dp);
                    a + b
                }),
            },
        }
    }
}

// Scorers (free functions so they can be passed as `fn` pointers).
fn score_ri_yz(t: &dense::Tri, dp: &DenseProblem) -> f64 {
    t.ri_yz(dp)
}
fn score_ri_xz(t: &dense::Tri, dp: &DenseProblem) -> f64 {
    t.ri_xz(dp)
}
fn score_ixy_hxzy(t: &dense::Tri, _dp: &DenseProblem) -> f64 {
    // RI(X;Y) = I(X;Y) for full-support candidates (single component).
    t.i_xy() + t.h_xz_given_y()
}
fn score_ixy_hyzx(t: &dense::Tri, _dp: &DenseProblem) -> f64 {
    t.i_xy() + t.h_yz_given_x()
}
fn score_riyz_hxzy(t: &dense::Tri, dp: &DenseProblem) -> f64 {
    t.ri_yz(dp) + t.h_xz_given_y()
}
fn score_rixz_hyzx(t: &dense::Tri, dp: &DenseProblem) -> f64 {
    t.ri_xz(dp) + t.h_yz_given_x()
}
fn score_rixz_hxyz(t: &dense::Tri, dp: &DenseProblem) -> f64 {
    t.ri_xz(dp) + t.h_xy_given_z()
}
fn score_riyz_hxyz(t: &dense::Tri, dp: &DenseProblem) -> f64 {
    t.ri_yz(dp) + t.h_xy_given_z()
}

// ---------------------------------------------------------------------------
// Improved (distribution-switching) bounds.
// ---------------------------------------------------------------------------

/// Whether the conditional strengthening (free-marginal rows for links whose
/// connectivity condition holds) is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strengthening {
    /// Use the free rows whenever the side's condition holds (default).
    Auto,
    /// Always use the pinned-marginal rows (the base switching bound).
    Never,
}

/// Switched-distribution link bounds (see [`improved_bounds_with`]), with
/// the conditional strengthening applied automatically.
pub fn improved_bounds(problem: &Problem, config: &OptimizerConfig) -> Result<BoundReport, BoundsError> {
    improved_bounds_with(problem, config, Strengthening::Auto)
}

/// Switched-distribution link bounds. Requires full-support input and the
/// channel in normal form. Reports, per link, the max over its rows; the
/// randomness entry carries the consequence `rho >= H(M12)`. Rows whose
/// search domain trips the dimension guard are skipped (recorded per link);
/// the remaining rows still give valid bounds.
pub fn improved_bounds_with(
    problem: &Problem,
    config: &OptimizerConfig,
    strengthening: Strengthening,
) -> Result<BoundReport, BoundsError> {
    if !problem.input_has_full_support() {
        return Err(BoundsError::NotFullSupport);
    }
    ensure_normal_form(problem)?;
    let dp = DenseProblem::new(problem);
    let cx = Cx::new(problem, &dp);
    let (cond_x, cond_y) = condition_checks(problem);
    let free_x = strengthening == Strengthening::Auto && cond_x;
    let free_y = strengthening == Strengthening::Auto && cond_y;

    // 3-1 link.
    let r31 = if free_x {
        let la = "free row A: max_{p_X'} [ max_{p_Y'} RI(Y';Z') + max_{p_Y''|X'} RI(X';Y'') + H(X',Z''|Y'') ] (shared p_X')";
        let lb = "free row B: max_{p_X'Y'} RI(Y';Z') + H(X',Z'|Y')";
        link_from_row_results(vec![
            (la.into(), row_single(la, &cx.shared_x_row("RI(Y';Z') over p_X' x p_Y' plus RI(X';Y'') + H(X',Z''|Y'') over p_X' x p_Y''|X'", score_ri_yz, score_ixy_hxzy), config)),
            (lb.into(), row_single(lb, &cx.free_joint("RI(Y';Z') + H(X',Z'|Y') over free p_X'Y'", false, score_riyz_hxzy), config)),
        ])?
    } else {
        let la = "row A: max_{p_Y'} RI(Y';Z') + max_{p_Y''|X} [ RI(X;Y'') + H(X,Z''|Y'') ] (p_X pinned)";
        let lb = "row B: max_{p_Y'|X} RI(Y';Z') + H(X,Z'|Y') (p_X pinned)";
        link_from_row_results(vec![
            (la.into(), row_sum(la, &cx.prod_ri_yz_pinned_x(), &cx.cond_given_x("max_{p_Y''|X} RI(X;Y'') + H(X,Z''|Y'')", "p_Y''", score_ixy_hxzy), config)),
            (lb.into(), row_single(lb, &cx.cond_given_x("max_{p_Y'|X} RI(Y';Z') + H(X,Z'|Y')", "p_Y'", score_riyz_hxzy), config)),
        ])?
    };

    // 2-3 link.
    let r23 = if free_y {
        let la = "free row A: max_{p_Y'} [ max_{p_X'} RI(X';Z') + max_{p_X''|Y'} RI(X'';Y') + H(Y',Z''|X'') ] (shared p_Y')";
        let lb = "free row B: max_{p_X'Y'} RI(X';Z') + H(Y',Z'|X')";
        link_from_row_results(vec![
            (la.into(), row_single(la, &cx.shared_y_row("RI(X';Z') over p_X' x p_Y' plus RI(X'';Y') + H(Y',Z''|X'') over p_Y' x p_X''|Y'", score_ri_xz, score_ixy_hyzx), config)),
            (lb.into(), row_single(lb, &cx.free_joint("RI(X';Z') + H(Y',Z'|X') over free p_X'Y'", false, score_rixz_hyzx), config)),
        ])?
    } else {
        let la = "row A: max_{p_X'} RI(X';Z') + max_{p_X''|Y} [ RI(X'';Y) + H(Y,Z''|X'') ] (p_Y pinned)";
        let lb = "row B: max_{p_X'|Y} RI(X';Z') + H(Y,Z'|X') (p_Y pinned)";
        link_from_row_results(vec![
            (la.into(), row_sum(la, &cx.prod_ri_xz_pinned_y(), &cx.cond_given_y("max_{p_X''|Y} RI(X'';Y) + H(Y,Z''|X'')", "p_X''", score_ixy_hyzx), config)),
            (lb.into(), row_single(lb, &cx.cond_given_y("max_{p_X'|Y} RI(X';Z') + H(Y,Z'|X')", "p_X'", score_rixz_hyzx), config)),
        ])?
    };

    // 1-2 link: both marginals free in both rows.
    let la = "row A: max_{p_X'} [ max_{p_Y'} RI(Y';Z') + max_{p_Y''|X'} RI(X';Z'') + H(X',Y''|Z'') ] (shared p_X')";
    let lb = "row B: max_{p_Y'} [ max_{p_X'} RI(X';Z') + max_{p_X''|Y'} RI(Y';Z'') + H(X'',Y'|Z'') ] (shared p_Y')";
    let r12 = link_from_row_results(vec![
        (la.into(), row_single(la, &cx.shared_x_row("RI(Y';Z') over p_X' x p_Y' plus RI(X';Z'') + H(X',Y''|Z'') over p_X' x p_Y''|X'", score_ri_yz, score_rixz_hxyz), config)),
        (lb.into(), row_single(lb, &cx.shared_y_row("RI(X';Z') over p_X' x p_Y' plus RI(Y';Z'') + H(X'',Y'|Z'') over p_Y' x p_X''|Y'", score_ri_xz, score_riyz_hxyz), config)),
    ])?;

    let randomness = Some(LinkBound {
        bits: r12.bits,
        best_row: "rho >= H(M12), using the 1-2 link lower bound".into(),
        rows: vec![row_constant("rho >= H(M12), using the 1-2 link lower bound", r12.bits)],
        skipped: Vec::new(),
    });

    let theorem = if free_x || free_y {
        "improved (with conditional strengthening)".to_string()
    } else {
        "improved".to_string()
    };
    Ok(BoundReport {
        theorem,
        r12,
        r23,
        r31,
        randomness,
        conditions: Some(ConditionFlags { x_side: cond_x, y_side: cond_y }),
    })
}

// ---------------------------------------------------------------------------
// Randomness bounds.
// ---------------------------------------------------------------------------

/// Lower bounds on the randomness-plus-output entropy rate: six rows pairing
/// a link bound with a switched conditional-entropy bound, the direct
/// `rho >= H(M12)` consequence, and the residual-information expression at
/// the input law. Returns all labeled rows and their max.
pub fn randomness_bounds(
    problem: &Problem,
    config: &OptimizerConfig,
) -> Result<RandomnessReport, BoundsError> {
    let imp = improved_bounds(problem, config)?;
    let flags = imp.conditions.expect("improved bounds always report conditions");
    let dp = DenseProblem::new(problem);
    let cx = Cx::new(problem, &dp);

    let joint = problem.joint()?;
    let xn = problem.channel().x().name.clone();
    let yn = problem.channel().y().name.clone();
    let zn = problem.channel().z().name.clone();
    let (x, y, z) = (xn.as_str(), yn.as_str(), zn.as_str());
    let hx = joint.entropy(&[x], &[])?;
    let hy = joint.entropy(&[y], &[])?;
    let hz = joint.entropy(&[z], &[])?;
    let hzxy = joint.entropy(&[z], &[x, y])?;

    let mut rows: Vec<RowValue> = Vec::new();
    let mut skipped: Vec<String> = Vec::new();

    let m12 = ("H(M12)", imp.r12.bits, false);
    let m31 = ("H(M31)", imp.r31.bits, flags.x_side);
    let m23 = ("H(M23)", imp.r23.bits, flags.y_side);

    struct CondTerm<'a> {
        head: &'static str,        // conditional entropy being bounded
        term: Term<'a>,            // its switched bound
        entropy: (&'static str, f64, bool), // paired link entropy term
        subtract: (&'static str, f64),      // -H(X) / -H(Y) / -H(Z)
    }

    let cond_terms = vec![
        CondTerm {
            head: "H(M31|M12) >= max_{p_Y'|X} RI(X;Y') + H(X,Z'|Y')",
            term: cx.cond_given_x("max_{p_Y'|X} RI(X;Y') + H(X,Z'|Y')", "p_Y'", score_ixy_hxzy),
            entropy: m12,
            subtract: ("H(X)", hx),
        },
        CondTerm {
            head: "H(M23|M12) >= max_{p_X'|Y} RI(X';Y) + H(Y,Z'|X')",
            term: cx.cond_given_y("max_{p_X'|Y} RI(X';Y) + H(Y,Z'|X')", "p_X'", score_ixy_hyzx),
            entropy: m12,
            subtract: ("H(Y)", hy),
        },
        CondTerm {
            head: "H(M12|M31) >= max_{p_Y'|X} RI(X;Z') + H(X,Y'|Z')",
            term: cx.cond_given_x("max_{p_Y'|X} RI(X;Z') + H(X,Y'|Z')", "p_Y'", score_rixz_hxyz),
            entropy: m31,
            subtract: ("H(X)", hx),
        },
        CondTerm {
            head: "H(M23|M31) >= max_{p_X'Y'} RI(X';Z') + H(Y',Z'|X') (induced output marginal pinned)",
            term: cx.free_joint(
                "RI(X';Z') + H(Y',Z'|X') over free p_X'Y' with the output marginal pinned",
                true,
                score_rixz_hyzx,
            ),
            entropy: m31,
            subtract: ("H(Z)", hz),
        },
        CondTerm {
            head: "H(M12|M23) >= max_{p_X'|Y} RI(Y;Z') + H(X',Y|Z')",
            term: cx.cond_given_y("max_{p_X'|Y} RI(Y;Z') + H(X',Y|Z')", "p_X'", score_riyz_hxyz),
            entropy: m23,
            subtract: ("H(Y)", hy),
        },
        CondTerm {
            head: "H(M31|M23) >= max_{p_X'Y'} RI(Y';Z') + H(X',Z'|Y') (induced output marginal pinned)",
            term: cx.free_joint(
                "RI(Y';Z') + H(X',Z'|Y') over free p_X'Y' with the output marginal pinned",
                true,
                score_riyz_hxzy,
            ),
            entropy: m23,
            subtract: ("H(Z)", hz),
        },
    ];

    for ct in &cond_terms {
        let (ename, evalue, strengthened) = ct.entropy;
        let (sname, svalue) = ct.subtract;
        let note = if strengthened {
            " [link term strengthened under the connectivity condition]"
        } else {
            ""
        };
        let label = format!("rho >= {ename} + [{head}] - {sname} + H(Z|XY){note}", head = ct.head);
        match run_term(&ct.term, config) {
            Ok((o, tw)) => {
                let shift = evalue - svalue + hzxy;
                let trace = o
                    .trace
                    .iter()
                    .map(|t| TracePoint { floor: t.floor, value: t.value + shift })
                    .collect();
                rows.push(RowValue {
                    label,
                    value: o.value + shift,
                    supremum: o.supremum,
                    floor: o.floor,
                    trace,
                    witnesses: vec![tw],
                });
            }
            Err(BoundsError::DimensionGuard { .. }) => skipped.push(label),
            Err(e) => return Err(e),
        }
    }

    rows.push(row_constant("rho >= H(M12), using the 1-2 link lower bound", imp.r12.bits));

    // Residual-information expression at the input law (normal form checked
    // by the improved bounds above).
    let ri_xy = residual_information(&joint, &[x], &[y])?;
    let ri_xz = residual_information(&joint, &[x], &[z])?;
    let ri_yz = residual_information(&joint, &[y], &[z])?;
    let pair_max = (ri_xy + ri_xz).max(ri_xy + ri_yz).max(ri_xz + ri_yz);
    let general = pair_max + joint.entropy(&[y, z], &[x])? + joint.entropy(&[x, z], &[y])?
        + joint.entropy(&[x, y], &[z])?
        - joint.entropy(&[x, y], &[])?;
    rows.push(row_constant(
        "rho >= max pairwise sum of {RI(X;Y), RI(X;Z), RI(Y;Z)} + H(Y,Z|X) + H(X,Z|Y) + H(X,Y|Z) - H(X,Y) at the input law",
        general,
    ));

    let mut best = f64::NEG_INFINITY;
    let mut best_row = String::new();
    for r in &rows {
        if r.value > best {
            best = r.value;
            best_row = r.label.clone();
        }
    }
    Ok(RandomnessReport {
        theorem: "randomness".into(),
        best,
        best_row,
        rows,
        skipped,
        conditions: flags,
    })
}

// ---------------------------------------------------------------------------
// Rendering.
// ---------------------------------------------------------------------------

fn fmt_bits(v: f64) -> String {
    format!("{v:.6}")
}

fn markdown_rows(out: &mut String, name: &str, link: &LinkBound) {
    out.push_str(&format!("\n## {name} rows\n\n"));
    out.push_str("| row | bits | floor | status |\n|---|---|---|---|\n");
    for r in &link.rows {
        let status = if r.supremum { "supremum (closure)" } else { "attained" };
        out.push_str(&format!(
            "| {} | {} | {} | {} |\n",
            r.label,
            fmt_bits(r.value),
            if r.floor > 0.0 { format!("{:.0e}", r.floor) } else { "-".into() },
            status
        ));
    }
    for s in &link.skipped {
        out.push_str(&format!("| {s} | skipped (dimension guard) | - | - |\n"));
    }
    for r in &link.rows {
        if r.label != link.best_row || r.witnesses.is_empty() {
            continue;
        }
        out.push_str("\nBest-row witness:\n\n");
        for tw in &r.witnesses {
            out.push_str(&format!("- term `{}` = {}", tw.term, fmt_bits(tw.value)));
            if !tw.pinned.is_empty() {
                out.push_str(&format!(" ({})", tw.pinned.join("; ")));
            }
            out.push('\n');
            for b in &tw.blocks {
                let pmf: Vec<String> =
                    b.pmf.iter().map(|a| format!("{}: {:.6}", a.symbol, a.p)).collect();
                out.push_str(&format!("  - {} = {{{}}}\n", b.name, pmf.join(", ")));
            }
        }
    }
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# Lower bounds ({})\n\n", self.theorem));
        if let Some(c) = self.conditions {
            out.push_str(&format!(
                "Output-connectivity conditions: X side {}, Y side {}.\n\n",
                c.x_side, c.y_side
            ));
        }
        out.push_str("| quantity | bits | best row | status |\n|---|---|---|---|\n");
        let sup = |l: &LinkBound| {
            l.rows
                .iter()
                .find(|r| r.label == l.best_row)
                .map(|r| if r.supremum { "supremum (closure)" } else { "attained" })
                .unwrap_or("attained")
        };
        out.push_str(&format!("| r12 | {} | {} | {} |\n", fmt_bits(self.r12.bits), self.r12.best_row, sup(&self.r12)));
        out.push_str(&format!("| r23 | {} | {} | {} |\n", fmt_bits(self.r23.bits), self.r23.best_row, sup(&self.r23)));
        out.push_str(&format!("| r31 | {} | {} | {} |\n", fmt_bits(self.r31.bits), self.r31.best_row, sup(&self.r31)));
        if let Some(rho) = &self.randomness {
            out.push_str(&format!("| rho | {} | {} | {} |\n", fmt_bits(rho.bits), rho.best_row, sup(rho)));
        }
        markdown_rows(&mut out, "r12", &self.r12);
        markdown_rows(&mut out, "r23", &self.r23);
        markdown_rows(&mut out, "r31", &self.r31);
        if let Some(rho) = &self.randomness {
            markdown_rows(&mut out, "rho", rho);
        }
        out
    }
}

impl RandomnessReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("# Randomness lower bounds\n\n");
        out.push_str(&format!(
            "Output-connectivity conditions: X side {}, Y side {}.\n\n",
            self.conditions.x_side, self.conditions.y_side
        ));
        out.push_str(&format!("Best: **{}** bits via {}\n\n", fmt_bits(self.best), self.best_row));
        out.push_str("| row | bits | floor | status |\n|---|---|---|---|\n");
        for r in &self.rows {
            let status = if r.supremum { "supremum (closure)" } else { "attained" };
            out.push_str(&format!(
                "| {} | {} | {} | {} |\n",
                r.label,
                fmt_bits(r.value),
                if r.floor > 0.0 { format!("{:.0e}", r.floor) } else { "-".into() },
                status
            ));
        }
        for label in &self.skipped {
            out.push_str(&format!("| {label} | skipped (dimension guard) | - | - |\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests;
