use super::*;
use crate::builtin::{
    build_and, build_controlled_erasure, build_group_add, build_remote_ot, build_sum, GroupSpec,
};
use crate::prob::{rat, Alphabet, Channel, JointDist, Problem, Rat, Var};
use num::ToPrimitive;

fn h2(p: f64) -> f64 {
    let q = 1.0 - p;
    let term = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
    term(p) + term(q)
}

const LOG3: f64 = 1.584962500721156;

fn config(restarts: usize) -> OptimizerConfig {
    OptimizerConfig { restarts, ..OptimizerConfig::default() }
}

fn bit_var(name: &str) -> Var {
    Var::new(name, Alphabet::new(vec!["0".into(), "1".into()]).unwrap())
}

fn bern_pair(p: &Rat, q: &Rat) -> JointDist {
    let one = rat(1, 1);
    JointDist::new(
        vec![bit_var("X"), bit_var("Y")],
        vec![
            (vec![0, 0], (&one - p) * (&one - q)),
            (vec![0, 1], (&one - p) * q),
            (vec![1, 0], p * (&one - q)),
            (vec![1, 1], p * q),
        ],
    )
    .unwrap()
}

// --- preliminary bounds -----------------------------------------------------

#[test]
fn and_prelim_matches_closed_form() {
    let problem = build_and().unwrap().problem;
    let report = prelim_bounds(&problem).unwrap();
    // Uniform AND: RI(Y;Z) = I(Y;Z) = H(Z) - H(Z|Y) = H2(1/4) - 1/2, and the
    // conditional pair entropies are H(X,Z|Y) = H(X|Y) = 1 and
    // H(X,Y|Z) = 2 - H2(1/4), so r12 = 3/2 exactly.
    let i_yz = h2(0.25) - 0.5;
    assert!((report.r31.bits - (i_yz + 1.0)).abs() < 1e-9);
    assert!((report.r23.bits - (i_yz + 1.0)).abs() < 1e-9);
    assert!((report.r12.bits - 1.5).abs() < 1e-9);
    // Paper-rounded values.
    assert!((report.r31.bits - 1.311).abs() < 5e-3);
    assert!((report.r12.bits - 1.5).abs() < 5e-3);
    assert!(report.randomness.is_none());
}

#[test]
fn prelim_rejects_problems_not_in_normal_form() {
    // f(x, y) = x ignores y, so the two y symbols are equivalent.
    let x = bit_var("X");
    let y = bit_var("Y");
    let z = bit_var("Z");
    let table = [[0u32, 0], [1, 1]];
    let rows = (0..2)
        .flat_map(|xi: usize| (0..2).map(move |yi: usize| (xi, yi)))
        .map(|(xi, yi)| {
            let mut row = vec![rat(0, 1); 2];
            row[table[xi][yi] as usize] = rat(1, 1);
            row
        })
        .collect();
    let channel = Channel::new(x, y, z, rows).unwrap();
    let input = bern_pair(&rat(1, 2), &rat(1, 2));
    let problem = Problem::new(input, channel).unwrap();
    assert!(matches!(prelim_bounds(&problem), Err(BoundsError::NotNormalForm)));
}

// --- improved bounds ---------------------------------------------------------

#[test]
fn and_improved_reproduces_conditional_values() {
    let problem = build_and().unwrap().problem;
    let report = improved_bounds(&problem, &config(8)).unwrap();
    let c = report.conditions.unwrap();
    assert!(c.x_side && c.y_side);

    // Both connectivity conditions hold, so the 3-1 and 2-3 links use the
    // free rows, whose suprema are log 3 (approached as the interior floor
    // shrinks).
    assert!((report.r31.bits - LOG3).abs() < 5e-3, "r31 = {}", report.r31.bits);
    assert!((report.r23.bits - LOG3).abs() < 5e-3, "r23 = {}", report.r23.bits);
    // The 1-2 link peaks at an interior product law.
    assert!((report.r12.bits - 1.826).abs() < 5e-3, "r12 = {}", report.r12.bits);
    let rho = report.randomness.as_ref().unwrap();
    assert!((rho.bits - report.r12.bits).abs() < 1e-12);

    // The 1-2 row-A witness: shared p_X' near (0.544, 0.456) and the product
    // factor p_Y' near (0.603, 0.397).
    let row_a = &report.r12.rows[0];
    assert!((row_a.value - 1.825985).abs() < 5e-3);
    let blocks = &row_a.witnesses[0].blocks;
    let px1 = blocks[0].pmf[1].p;
    let py1 = blocks[1].pmf[1].p;
    assert!((px1 - 0.4596).abs() < 5e-3, "p_X'(1) = {px1}");
    assert!((py1 - 0.3966).abs() < 5e-3, "p_Y'(1) = {py1}");

    // The free rows for r31 peak at the boundary (one input pair removed),
    // so the winning row must be supremum-labeled with a monotone trace.
    let best31 = report.r31.rows.iter().find(|r| r.label == report.r31.best_row).unwrap();
    assert!(best31.supremum);
    for w in best31.trace.windows(2) {
        assert!(w[1].value >= w[0].value - 1e-9);
    }
}

#[test]
fn and_improved_without_strengthening_gives_middle_triple() {
    let problem = build_and().unwrap().problem;
    let report = improved_bounds_with(&problem, &config(8), Strengthening::Never).unwrap();
    assert!((report.r31.bits - 1.5).abs() < 5e-3, "r31 = {}", report.r31.bits);
    assert!((report.r23.bits - 1.5).abs() < 5e-3, "r23 = {}", report.r23.bits);
    assert!((report.r12.bits - 1.826).abs() < 5e-3, "r12 = {}", report.r12.bits);
    // Conditions are still reported even though the strengthening is off.
    let c = report.conditions.unwrap();
    assert!(c.x_side && c.y_side);
}

#[test]
fn sum_improved_reproduces_values() {
    let problem = build_sum().unwrap().problem;
    let report = improved_bounds(&problem, &config(8)).unwrap();
    assert!((report.r31.bits - LOG3).abs() < 5e-3, "r31 = {}", report.r31.bits);
    assert!((report.r23.bits - LOG3).abs() < 5e-3, "r23 = {}", report.r23.bits);
    assert!((report.r12.bits - 1.5).abs() < 5e-3, "r12 = {}", report.r12.bits);
}

#[test]
fn erasure_improved_reproduces_values() {
    for (p, q) in [(rat(1, 2), rat(1, 2)), (rat(1, 4), rat(1, 3))] {
        let problem = build_controlled_erasure(&p, &q, 1, None).unwrap().problem;
        let report = improved_bounds(&problem, &config(8)).unwrap();
        let c = report.conditions.unwrap();
        assert!(!c.x_side && c.y_side);
        let pf = p.to_f64().unwrap();
        assert!((report.r31.bits - (h2(pf) + pf)).abs() < 5e-3, "r31 = {}", report.r31.bits);
        assert!((report.r23.bits - 1.0).abs() < 5e-3, "r23 = {}", report.r23.bits);
        assert!((report.r12.bits - 1.0).abs() < 5e-3, "r12 = {}", report.r12.bits);
    }
}

#[test]
fn cyclic_group_improved_attains_log_order() {
    for n in [2usize, 3] {
        let problem = build_group_add(&GroupSpec::cyclic(n).unwrap()).unwrap().problem;
        let report = improved_bounds(&problem, &config(6)).unwrap();
        let target = (n as f64).log2();
        assert!((report.r31.bits - target).abs() < 5e-3, "n={n} r31 = {}", report.r31.bits);
        assert!((report.r23.bits - target).abs() < 5e-3, "n={n} r23 = {}", report.r23.bits);
        assert!((report.r12.bits - target).abs() < 5e-3, "n={n} r12 = {}", report.r12.bits);
    }
}

#[test]
fn remote_ot_2_1_improved_reaches_rate_region_corner() {
    let problem = build_remote_ot(2, 1).unwrap().problem;
    let report = improved_bounds(&problem, &config(8)).unwrap();
    // (r31, r23, r12) = (nm, n + log m, nm + log m) = (2, 2, 3).
    assert!((report.r31.bits - 2.0).abs() < 1e-2, "r31 = {}", report.r31.bits);
    assert!((report.r23.bits - 2.0).abs() < 1e-2, "r23 = {}", report.r23.bits);
    assert!((report.r12.bits - 3.0).abs() < 1e-2, "r12 = {}", report.r12.bits);
    // The 1-2 bound is a supremum over the open simplex.
    let best12 = report.r12.rows.iter().find(|r| r.label == report.r12.best_row).unwrap();
    assert!(best12.supremum);
}

#[test]
fn improved_dominates_preliminary_on_builtins() {
    let problems = [
        build_and().unwrap().problem,
        build_sum().unwrap().problem,
        build_controlled_erasure(&rat(1, 2), &rat(1, 2), 1, None).unwrap().problem,
    ];
    for problem in &problems {
        let pre = prelim_bounds(problem).unwrap();
        let imp = improved_bounds(problem, &config(6)).unwrap();
        assert!(imp.r31.bits >= pre.r31.bits - 1e-6);
        assert!(imp.r23.bits >= pre.r23.bits - 1e-6);
        assert!(imp.r12.bits >= pre.r12.bits - 1e-6);
    }
}

#[test]
fn improved_rejects_inputs_without_full_support() {
    let problem = build_and().unwrap().problem;
    let sparse = JointDist::new(
        vec![bit_var("X"), bit_var("Y")],
        vec![(vec![0, 0], rat(1, 2)), (vec![1, 1], rat(1, 2))],
    )
    .unwrap();
    let sparse_problem = problem.with_input(sparse).unwrap();
    assert!(matches!(
        improved_bounds(&sparse_problem, &config(2)),
        Err(BoundsError::NotFullSupport)
    ));
}

// --- randomness bounds -------------------------------------------------------

#[test]
fn and_randomness_best_row_reaches_log3_plus_three_quarters() {
    let problem = build_and().unwrap().problem;
    let report = randomness_bounds(&problem, &config(8)).unwrap();
    // The binding row pairs the 3-1 link bound (log 3) with the switched
    // conditional-entropy bound whose supremum is H2(1/4) + 3/4, minus H(Z).
    let target = LOG3 + 0.75;
    assert!((report.best - target).abs() < 5e-3, "best = {}", report.best);
    assert!(report.skipped.is_empty());
    // The direct rho >= H(M12) row carries the 1-2 link value.
    let m12_row = report
        .rows
        .iter()
        .find(|r| r.label.starts_with("rho >= H(M12)"))
        .unwrap();
    assert!((m12_row.value - 1.826).abs() < 5e-3);
}

#[test]
fn sum_randomness_is_log3_and_sound() {
    let problem = build_sum().unwrap().problem;
    let report = randomness_bounds(&problem, &config(8)).unwrap();
    assert!((report.best - LOG3).abs() < 5e-3, "best = {}", report.best);
    // The reference protocol attains rho = log 3, so the bound cannot
    // legitimately exceed it.
    assert!(report.best <= LOG3 + 1e-6);
}

#[test]
fn erasure_randomness_is_one() {
    let problem = build_controlled_erasure(&rat(1, 2), &rat(1, 2), 1, None).unwrap().problem;
    let report = randomness_bounds(&problem, &config(8)).unwrap();
    assert!((report.best - 1.0).abs() < 5e-3, "best = {}", report.best);
    assert!(report.best <= 1.0 + 1e-6);
}

#[test]
fn binary_group_general_randomness_row_is_tight() {
    let problem = build_group_add(&GroupSpec::cyclic(2).unwrap()).unwrap().problem;
    let report = randomness_bounds(&problem, &config(6)).unwrap();
    let general = report
        .rows
        .iter()
        .find(|r| r.label.contains("max pairwise sum"))
        .unwrap();
    // Uniform binary addition: all residual informations vanish and
    // H(Y,Z|X) + H(X,Z|Y) + H(X,Y|Z) - H(X,Y) = 3 - 2 = 1 = H(Z).
    assert!((general.value - 1.0).abs() < 1e-9);
    assert!((report.best - 1.0).abs() < 5e-3);
}

// --- asymptotic bounds ------------------------------------------------------

#[test]
fn asymptotic_field_addition_equals_output_entropy() {
    // Independent non-uniform inputs over F2.
    let base = build_group_add(&GroupSpec::cyclic(2).unwrap()).unwrap().problem;
    let input = bern_pair(&rat(3, 10), &rat(3, 10));
    let problem = base.with_input(input).unwrap();
    let joint = problem.joint().unwrap();
    let hz = joint.entropy(&["Z"], &[]).unwrap();
    let report = asymptotic_bounds(&problem).unwrap();
    assert!((report.r12.bits - hz).abs() < 1e-9, "r12 = {} vs {}", report.r12.bits, hz);
    assert!((report.r23.bits - hz).abs() < 1e-9);
    assert!((report.r31.bits - hz).abs() < 1e-9);
    assert!((report.randomness.as_ref().unwrap().bits - hz).abs() < 1e-9);
    // The scheme's closed-form rates agree.
    let rates = asymptotic_protocol_rates(AsymptoticScheme::KornerMarton, &problem).unwrap();
    assert!((rates.r12 - hz).abs() < 1e-12);
    assert!((rates.rho - hz).abs() < 1e-12);

    // Uniform F3: everything is log 3.
    let p3 = build_group_add(&GroupSpec::cyclic(3).unwrap()).unwrap().problem;
    let r3 = asymptotic_bounds(&p3).unwrap();
    assert!((r3.r12.bits - LOG3).abs() < 1e-9);
    assert!((r3.r23.bits - LOG3).abs() < 1e-9);
    assert!((r3.r31.bits - LOG3).abs() < 1e-9);
}

#[test]
fn asymptotic_separates_from_perfect_security() {
    // Binary addition with independent Bern(0.3) inputs: perfect security
    // needs a full bit on every link, but vanishing-error coding needs only
    // H(Z) = H2(0.42) < 1.
    let base = build_group_add(&GroupSpec::cyclic(2).unwrap()).unwrap().problem;
    let problem = base.with_input(bern_pair(&rat(3, 10), &rat(3, 10))).unwrap();
    let hz = problem.joint().unwrap().entropy(&["Z"], &[]).unwrap();
    assert!((hz - h2(0.42)).abs() < 1e-12);
    let asymptotic = asymptotic_bounds(&problem).unwrap();
    let perfect = improved_bounds(&problem, &config(6)).unwrap();
    assert!(perfect.r12.bits >= 1.0 - 5e-3);
    assert!(asymptotic.r12.bits < perfect.r12.bits - 1e-2);
}

#[test]
fn asymptotic_erasure_bounds_match_scheme_rates() {
    let (p, q) = (rat(1, 2), rat(1, 2));
    let problem = build_controlled_erasure(&p, &q, 1, None).unwrap().problem;
    let report = asymptotic_bounds(&problem).unwrap();
    let pf = 0.5;
    assert!((report.r12.bits - 1.0).abs() < 1e-6, "r12 = {}", report.r12.bits);
    assert!((report.r23.bits - 1.0).abs() < 1e-6, "r23 = {}", report.r23.bits);
    assert!((report.r31.bits - (h2(pf) + pf)).abs() < 1e-6, "r31 = {}", report.r31.bits);
    assert!((report.randomness.as_ref().unwrap().bits - 1.0).abs() < 1e-6);

    let rates = asymptotic_protocol_rates(AsymptoticScheme::SlepianWolfErasure, &problem).unwrap();
    assert!((rates.r12 - 1.0).abs() < 1e-12);
    assert!((rates.r23 - 1.0).abs() < 1e-12);
    assert!((rates.r31 - (h2(pf) + pf)).abs() < 1e-12);
    assert!((rates.rho - 1.0).abs() < 1e-12);

    // Asymmetric reveal bias: rates follow the closed forms.
    let problem2 =
        build_controlled_erasure(&rat(1, 4), &rat(1, 3), 1, None).unwrap().problem;
    let rates2 =
        asymptotic_protocol_rates(AsymptoticScheme::SlepianWolfErasure, &problem2).unwrap();
    assert!((rates2.r31 - (h2(0.25) + 0.25)).abs() < 1e-12);
    let hq = h2(1.0 / 3.0);
    assert!((rates2.r23 - (0.25 * hq + 0.75)).abs() < 1e-12);

    // The linear-coding scheme does not fit erasure problems.
    assert!(matches!(
        asymptotic_protocol_rates(AsymptoticScheme::KornerMarton, &problem),
        Err(BoundsError::ShapeMismatch(_))
    ));
}

#[test]
fn dsbs_xor_asymptotic_r12_is_crossover_entropy() {
    // Doubly symmetric binary source with disagreement 1/4, Z = X xor Y.
    let x = bit_var("X");
    let y = bit_var("Y");
    let z = bit_var("Z");
    let input = JointDist::new(
        vec![x.clone(), y.clone()],
        vec![
            (vec![0, 0], rat(3, 8)),
            (vec![0, 1], rat(1, 8)),
            (vec![1, 0], rat(1, 8)),
            (vec![1, 1], rat(3, 8)),
        ],
    )
    .unwrap();
    let rows = (0..2u32)
        .flat_map(|xi| (0..2u32).map(move |yi| (xi, yi)))
        .map(|(xi, yi)| {
            let mut row = vec![rat(0, 1); 2];
            row[(xi ^ yi) as usize] = rat(1, 1);
            row
        })
        .collect();
    let channel = Channel::new(x, y, z, rows).unwrap();
    let problem = Problem::new(input, channel).unwrap();
    let report = asymptotic_bounds(&problem).unwrap();
    // Both characteristic graphs are complete, so the bound collapses to
    // H(X|Y) + H(Y|X) - H(Z) = H2(1/4), matched by linear coding.
    assert!((report.r12.bits - h2(0.25)).abs() < 1e-3, "r12 = {}", report.r12.bits);
    let rates = asymptotic_protocol_rates(AsymptoticScheme::KornerMarton, &problem).unwrap();
    assert!((rates.r12 - h2(0.25)).abs() < 1e-12);
}

#[test]
fn reports_serialize_and_render() {
    let problem = build_and().unwrap().problem;
    let report = improved_bounds(&problem, &config(2)).unwrap();
    let json = report.to_json();
    assert!(json.contains("\"theorem\""));
    assert!(json.contains("\"witnesses\""));
    let md = report.to_markdown();
    assert!(md.contains("| r12 |"));
    assert!(md.contains("supremum"));

    let rho = randomness_bounds(&problem, &config(2)).unwrap();
    assert!(rho.to_json().contains("\"best\""));
    assert!(rho.to_markdown().contains("Best:"));
}
