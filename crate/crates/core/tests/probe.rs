use secomp_core::bounds::{improved_bounds, OptimizerConfig};
use secomp_core::builtin::{build_group_add, build_remote_ot, GroupSpec};
use std::time::Instant;

fn light() -> OptimizerConfig {
    OptimizerConfig {
        floors: vec![1e-2, 1e-4, 1e-6],
        restarts: 3,
        ..OptimizerConfig::default()
    }
}

#[test]
fn probe_big_instances() {
    for (m, n, want) in [(4usize, 1usize, (4.0, 3.0, 6.0)), (2, 2, (4.0, 3.0, 5.0))] {
        let t = Instant::now();
        let problem = build_remote_ot(m, n).unwrap().problem;
        let report = improved_bounds(&problem, &light()).unwrap();
        println!(
            "OT({m},{n}): r31={:.4} r23={:.4} r12={:.4} want {:?} skipped12={:?} skipped31={:?} in {:?}",
            report.r31.bits, report.r23.bits, report.r12.bits, want,
            report.r12.skipped.len(), report.r31.skipped.len(),
            t.elapsed()
        );
        assert!((report.r31.bits - want.0).abs() < 1e-2, "r31={}", report.r31.bits);
        assert!((report.r23.bits - want.1).abs() < 1e-2, "r23={}", report.r23.bits);
        assert!((report.r12.bits - want.2).abs() < 1e-2, "r12={}", report.r12.bits);
    }

    let t = Instant::now();
    let problem = build_group_add(&GroupSpec::symmetric_3()).unwrap().problem;
    let report = improved_bounds(&problem, &light()).unwrap();
    let log6 = 6f64.log2();
    println!(
        "S3: r31={:.4} r23={:.4} r12={:.4} want {log6:.4} in {:?}",
        report.r31.bits, report.r23.bits, report.r12.bits,
        t.elapsed()
    );
    assert!((report.r31.bits - log6).abs() < 5e-3, "r31={}", report.r31.bits);
    assert!((report.r23.bits - log6).abs() < 5e-3, "r23={}", report.r23.bits);
    assert!((report.r12.bits - log6).abs() < 5e-3, "r12={}", report.r12.bits);
}
