use std::collections::BTreeMap;

use super::*;
use crate::bounds::improved_bounds;
use crate::builtin::{build_and, build_group_add, build_sum, GroupSpec};
use crate::protocol::transcript_distribution;

const LOG3: f64 = 1.584_962_500_721_156;
const LOG6: f64 = 2.584_962_500_721_156;

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

fn config(restarts: usize) -> OptimizerConfig {
    OptimizerConfig { restarts, ..OptimizerConfig::default() }
}

fn bit_var(name: &str) -> Var {
    Var::new(name, Alphabet::new(vec!["0".into(), "1".into()]).unwrap())
}

/// `X, Y` independent uniform bits, `Z = X ∧ Y`.
fn and_triple() -> JointDist {
    JointDist::new(
        vec![bit_var(var_names::X), bit_var(var_names::Y), bit_var(var_names::Z)],
        vec![
            (vec![0, 0, 0], rat(1, 4)),
            (vec![0, 1, 0], rat(1, 4)),
            (vec![1, 0, 0], rat(1, 4)),
            (vec![1, 1, 1], rat(1, 4)),
        ],
    )
    .unwrap()
}

fn independent_bits() -> JointDist {
    JointDist::uniform(vec![
        bit_var(var_names::X),
        bit_var(var_names::Y),
        bit_var(var_names::Z),
    ])
    .unwrap()
}

fn h2(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

#[test]
fn and_scheme_is_secure_with_log3_shares() {
    let scheme = build_and_cmss();
    let report = verify_cmss(&scheme).unwrap();
    assert!(report.all_pass(), "{report:?}");
    for h in scheme.share_entropies() {
        assert!((h - LOG3).abs() < 1e-9, "share entropy {h}");
    }
}

#[test]
fn additive_sharing_of_a_lone_secret_passes() {
    // X and Y are constants; Z is a uniform bit split additively over its
    // two incident edges: M23 = G, M31 = G xor Z for a uniform pad G.
    let single = Alphabet::new(vec!["0".into()]).unwrap();
    let double = Alphabet::new(vec!["0".into(), "1".into()]).unwrap();
    let secrets = JointDist::new(
        vec![
            Var::new(var_names::X, single.clone()),
            Var::new(var_names::Y, single.clone()),
            Var::new(var_names::Z, double.clone()),
        ],
        vec![(vec![0, 0, 0], rat(1, 2)), (vec![0, 0, 1], rat(1, 2))],
    )
    .unwrap();
    let mut kernel: ShareKernel = BTreeMap::new();
    for z in 0..2u32 {
        let row = (0..2u32).map(|g| ([0u32, g, g ^ z], rat(1, 2))).collect();
        kernel.insert([0, 0, z], row);
    }
    let scheme = CmssScheme::new(secrets, [single, double.clone(), double], kernel).unwrap();
    let report = verify_cmss(&scheme).unwrap();
    assert!(report.all_pass(), "{report:?}");
    let h = scheme.share_entropies();
    assert!(h[0].abs() < 1e-12);
    assert!((h[1] - 1.0).abs() < 1e-12);
    assert!((h[2] - 1.0).abs() < 1e-12);
}

#[test]
fn shares_copying_the_inputs_break_privacy() {
    // M12 = X, M23 = Y, M31 constant: correct for Alice and Bob, but Bob's
    // pair reveals X and Charlie cannot reconstruct X AND Y.
    let double = Alphabet::new(vec!["0".into(), "1".into()]).unwrap();
    let single = Alphabet::new(vec!["0".into()]).unwrap();
    let mut kernel: ShareKernel = BTreeMap::new();
    for (x, y) in [(0u32, 0u32), (0, 1), (1, 0), (1, 1)] {
        kernel.insert([x, y, x & y], vec![([x, y, 0], rat(1, 1))]);
    }
    let scheme = CmssScheme::new(and_triple(), [double.clone(), double, single], kernel).unwrap();
    let report = verify_cmss(&scheme).unwrap();
    assert!(report.correctness_alice);
    assert!(report.correctness_bob);
    assert!(!report.correctness_charlie);
    assert!(report.privacy_alice, "Alice's pair (X, const) is a function of her own secret");
    assert!(!report.privacy_bob);
    assert!(!report.privacy_charlie);
}

#[test]
fn kernel_validation_rejects_malformed_schemes() {
    let double = Alphabet::new(vec!["0".into(), "1".into()]).unwrap();
    let alphabets = [double.clone(), double.clone(), double.clone()];

    // Missing row for a positive-probability secret.
    let mut kernel: ShareKernel = BTreeMap::new();
    kernel.insert([0, 0, 0], vec![([0, 0, 0], rat(1, 1))]);
    let err = CmssScheme::new(and_triple(), alphabets.clone(), kernel).unwrap_err();
    assert!(matches!(err, CmssError::BadKernel(_)), "{err}");

    // Row that does not sum to one.
    let mut kernel: ShareKernel = BTreeMap::new();
    for (x, y) in [(0u32, 0u32), (0, 1), (1, 0), (1, 1)] {
        kernel.insert([x, y, x & y], vec![([0, 0, 0], rat(1, 2))]);
    }
    let err = CmssScheme::new(and_triple(), alphabets.clone(), kernel).unwrap_err();
    assert!(matches!(err, CmssError::BadKernel(_)), "{err}");

    // Share symbol outside its alphabet.
    let mut kernel: ShareKernel = BTreeMap::new();
    for (x, y) in [(0u32, 0u32), (0, 1), (1, 0), (1, 1)] {
        kernel.insert([x, y, x & y], vec![([7, 0, 0], rat(1, 1))]);
    }
    let err = CmssScheme::new(and_triple(), alphabets, kernel).unwrap_err();
    assert!(matches!(err, CmssError::BadKernel(_)), "{err}");

    // Secret variable named like a share.
    let clash = JointDist::new(
        vec![bit_var(var_names::M12), bit_var(var_names::Y), bit_var(var_names::Z)],
        vec![(vec![0, 0, 0], rat(1, 2)), (vec![1, 1, 1], rat(1, 2))],
    )
    .unwrap();
    let double = Alphabet::new(vec!["0".into(), "1".into()]).unwrap();
    let err = CmssScheme::new(
        clash,
        [double.clone(), double.clone(), double],
        BTreeMap::new(),
    )
    .unwrap_err();
    assert!(matches!(err, CmssError::NameClash(_)), "{err}");
}

#[test]
fn protocol_transcripts_become_valid_schemes() {
    let cases = vec![
        ("sum", build_sum().unwrap(), [LOG3, LOG3, LOG3]),
        ("and", build_and().unwrap(), [LOG6, LOG3, LOG3]),
        ("z2", build_group_add(&GroupSpec::cyclic(2).unwrap()).unwrap(), [1.0, 1.0, 1.0]),
    ];
    for (name, builtin, expected) in cases {
        let td = transcript_distribution(&builtin.protocol, builtin.problem.input()).unwrap();
        let red = protocol_to_cmss(&td).unwrap();
        assert!(!red.normal_form_applied, "{name}: triple already in normal form");
        assert!(red.report.all_pass(), "{name}: {:?}", red.report);
        let achieved = red.scheme.share_entropies();
        for (got, want) in achieved.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "{name}: share entropy {got} vs {want}");
        }
        // Reduction consistency: the share bounds for the derived secret
        // law never exceed what the derived scheme achieves.
        let bounds = cmss_bounds(red.scheme.secrets(), &config(6)).unwrap();
        for (bound, got) in
            [&bounds.r12, &bounds.r23, &bounds.r31].iter().zip(achieved)
        {
            assert!(
                bound.bits <= got + 1e-6,
                "{name}: bound {} exceeds achieved {got}",
                bound.bits
            );
        }
    }
}

#[test]
fn reduction_rejects_insecure_transcripts() {
    // A "protocol" for the AND triple whose M12 carries X in the clear.
    let single = Alphabet::new(vec!["0".into()]).unwrap();
    let joint = JointDist::new(
        vec![
            bit_var(var_names::X),
            bit_var(var_names::Y),
            bit_var(var_names::Z),
            bit_var(var_names::M12),
            Var::new(var_names::M23, single.clone()),
            Var::new(var_names::M31, single),
        ],
        vec![
            (vec![0, 0, 0, 0, 0, 0], rat(1, 4)),
            (vec![0, 1, 0, 0, 0, 0], rat(1, 4)),
            (vec![1, 0, 0, 1, 0, 0], rat(1, 4)),
            (vec![1, 1, 1, 1, 0, 0], rat(1, 4)),
        ],
    )
    .unwrap();
    let td = TranscriptDist { joint, expected_lengths: [None, None, None] };
    let err = protocol_to_cmss(&td).unwrap_err();
    assert!(matches!(err, CmssError::InsecureSource(_)), "{err}");
}

#[test]
fn and_share_bounds_certify_the_scheme_optimal() {
    let report = cmss_bounds(&and_triple(), &config(8)).unwrap();
    assert!(report.theorem.contains("switching"), "{}", report.theorem);
    for (name, link) in
        [("M12", &report.r12), ("M23", &report.r23), ("M31", &report.r31)]
    {
        assert!((link.bits - LOG3).abs() < 5e-3, "{name} bound {}", link.bits);
        // Soundness: the scheme with log 3 shares exists, so no valid
        // bound may exceed it.
        assert!(link.bits <= LOG3 + 1e-6, "{name} bound {} exceeds log 3", link.bits);
    }
    // The fixed-law rows alone are strictly weaker on every share.
    let h14 = h2(0.25);
    let fixed12 = report.r12.rows.iter().find(|r| r.label.contains("secret law")).unwrap();
    assert!((fixed12.value - 1.5).abs() < 1e-9, "fixed M12 row {}", fixed12.value);
    let fixed23 = report.r23.rows.iter().find(|r| r.label.contains("secret law")).unwrap();
    assert!((fixed23.value - (h14 + 0.5)).abs() < 1e-9, "fixed M23 row {}", fixed23.value);
}

#[test]
fn independent_bits_need_two_bit_shares() {
    let report = cmss_bounds(&independent_bits(), &config(6)).unwrap();
    assert!(report.theorem.contains("switching"), "{}", report.theorem);
    for (name, link) in
        [("M12", &report.r12), ("M23", &report.r23), ("M31", &report.r31)]
    {
        assert!((link.bits - 2.0).abs() < 5e-3, "{name} bound {}", link.bits);
        assert!(link.bits <= 2.0 + 1e-6, "{name} bound {} exceeds two bits", link.bits);
    }
}

#[test]
fn share_bounds_never_exceed_protocol_bounds() {
    // Any interactive protocol yields a dealer scheme with the same
    // transcript entropies, so per link the share bound must stay at or
    // below the protocol bound (both carry search tolerance).
    for (name, builtin) in
        [("sum", build_sum().unwrap()), ("and", build_and().unwrap())]
    {
        let protocol_report = improved_bounds(&builtin.problem, &config(8)).unwrap();
        let secrets = builtin.problem.joint().unwrap();
        let share_report = cmss_bounds(&secrets, &config(8)).unwrap();
        for (share, protocol) in [
            (&share_report.r12, &protocol_report.r12),
            (&share_report.r23, &protocol_report.r23),
            (&share_report.r31, &protocol_report.r31),
        ] {
            assert!(
                share.bits <= protocol.bits + 5e-3,
                "{name}: share bound {} vs protocol bound {}",
                share.bits,
                protocol.bits
            );
        }
    }
}

#[test]
fn sum_share_bounds_split_from_protocol_bounds() {
    // For the integer sum of two uniform bits the dealer only needs
    // H(M12) >= 1 while any protocol needs 1.5 bits on that link; the
    // outer shares still need log 3.
    let secrets = build_sum().unwrap().problem.joint().unwrap();
    let report = cmss_bounds(&secrets, &config(8)).unwrap();
    assert!((report.r12.bits - 1.0).abs() < 5e-3, "M12 bound {}", report.r12.bits);
    assert!((report.r23.bits - LOG3).abs() < 5e-3, "M23 bound {}", report.r23.bits);
    assert!((report.r31.bits - LOG3).abs() < 5e-3, "M31 bound {}", report.r31.bits);
}

#[test]
fn fixed_law_rows_only_without_pair_support() {
    // A common uniform bit X = Y = Z: no full-support switching family
    // applies, and each share's fixed-law bound is zero (any one share may
    // be trivial in isolation).
    let p = JointDist::new(
        vec![bit_var(var_names::X), bit_var(var_names::Y), bit_var(var_names::Z)],
        vec![(vec![0, 0, 0], rat(1, 2)), (vec![1, 1, 1], rat(1, 2))],
    )
    .unwrap();
    let report = cmss_bounds(&p, &config(2)).unwrap();
    assert!(report.theorem.contains("at the secret law"), "{}", report.theorem);
    for link in [&report.r12, &report.r23, &report.r31] {
        assert!(link.bits.abs() < 1e-12, "bound {}", link.bits);
        assert_eq!(link.rows.len(), 1);
    }
}

#[test]
fn sampling_bounds_match_closed_forms() {
    // Fully correlated bit: both residual informations and the pair
    // entropies vanish.
    let common = JointDist::new(
        vec![bit_var(var_names::X), bit_var(var_names::Y), bit_var(var_names::Z)],
        vec![(vec![0, 0, 0], rat(1, 2)), (vec![1, 1, 1], rat(1, 2))],
    )
    .unwrap();
    let report = sampling_bounds(&common).unwrap();
    assert!(!report.theorem.contains("normal form"), "{}", report.theorem);
    for link in [&report.r12, &report.r23, &report.r31] {
        assert!(link.bits.abs() < 1e-12, "bound {}", link.bits);
    }

    // AND triple: RI(X;Z) = RI(Y;Z) = h2(1/4) - 1/2 and RI(X;Y) = 0, so
    // the opposite link needs 1 + h2(1/4) bits while the incident links
    // need 1/2 + h2(1/4).
    let h14 = h2(0.25);
    let report = sampling_bounds(&and_triple()).unwrap();
    assert!((report.r12.bits - (1.0 + h14)).abs() < 1e-9, "r12 {}", report.r12.bits);
    assert!((report.r23.bits - (0.5 + h14)).abs() < 1e-9, "r23 {}", report.r23.bits);
    assert!((report.r31.bits - (0.5 + h14)).abs() < 1e-9, "r31 {}", report.r31.bits);
}

#[test]
fn sampling_reduces_redundant_secrets_to_normal_form() {
    // Independent secrets collapse under the normal form (every slice is
    // proportional), and rightly so: three users can sample independent
    // values with no communication, so the bounds must be zero.
    let report = sampling_bounds(&independent_bits()).unwrap();
    assert!(report.theorem.contains("normal form"), "{}", report.theorem);
    for link in [&report.r12, &report.r23, &report.r31] {
        assert!(link.bits.abs() < 1e-12, "bound {}", link.bits);
    }
}

#[test]
fn cmss_fixed_row_still_charges_independent_bits() {
    // Unlike sampling, a dealer scheme must make the shares determine each
    // secret, so independent uniform bits genuinely cost two bits per
    // share — the fixed-law row alone certifies H(M12) >= H(X,Y|Z) = 2.
    let report = cmss_bounds(&independent_bits(), &config(2)).unwrap();
    let fixed = report.r12.rows.iter().find(|r| r.label.contains("secret law")).unwrap();
    assert!((fixed.value - 2.0).abs() < 1e-9, "fixed row {}", fixed.value);
}

#[test]
fn bound_reports_reject_wrong_arity() {
    let pair = JointDist::uniform(vec![bit_var(var_names::X), bit_var(var_names::Y)]).unwrap();
    assert!(matches!(cmss_bounds(&pair, &config(1)), Err(CmssError::SecretArity(2))));
    assert!(matches!(sampling_bounds(&pair), Err(CmssError::SecretArity(2))));
}
