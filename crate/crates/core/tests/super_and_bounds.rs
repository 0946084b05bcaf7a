use metagibbs::bounds::{check_thm3, check_thm4};
use metagibbs::env::DEFAULT_STATE_CAP;
use metagibbs::presets::{bern2, random_meta_instance, random_meta_shape, random_tiny_super, tiny_super};
use metagibbs::super_task::{hellstrom_intermediate_bounds, theorem2_terms};

#[test]
fn super_task_exact_identities() {
    let mut insts = vec![tiny_super(1, 1.0), tiny_super(2, 1.0)];
    insts.extend((0..20).map(|i| random_tiny_super(21, i, 1 + (i as usize % 2))));
    for inst in &insts {
        let t = theorem2_terms(inst, DEFAULT_STATE_CAP).unwrap();
        assert!(t.residual_2.abs() <= 1e-9, "{}", t.residual_2);
        assert!(t.residual_4.abs() <= 1e-9, "{}", t.residual_4);
        assert!(t.residual_1_cross.abs() <= 1e-9);
        assert!(t.residual_3_cross.abs() <= 1e-9);
        assert!(t.iskl_1.skl >= -1e-12 && t.iskl_4.skl >= -1e-12);
        assert!(t.losses.hat <= t.losses.bar + 1e-12);
    }
}

#[test]
fn bounds_hold_on_enumerable_instances() {
    let mut metas = vec![bern2()];
    for idx in 0..30u64 {
        let shape = random_meta_shape(31, idx);
        for g in [0.5, 1.0, 2.0] {
            metas.push(random_meta_instance(31, idx, shape, g));
        }
    }
    for inst in &metas {
        let r = check_thm3(inst).unwrap();
        assert!(r.slack >= -1e-9, "{r:?}");
        assert!(r.ingredients["chen_slack"] >= -1e-9, "{r:?}");
    }
    for i in 0..20 {
        let inst = random_tiny_super(41, i, 1 + (i as usize % 2));
        assert!(check_thm4(&inst).unwrap().slack >= -1e-9);
        let h = hellstrom_intermediate_bounds(&inst, DEFAULT_STATE_CAP).unwrap();
        assert!(h.sample_slack >= -1e-9 && h.task_slack_cross >= -1e-9, "{h:?}");
    }
}

/// The task-level bound controls the training weights on held-out tasks,
/// not the retrained weights; with the latter it can be violated.
#[test]
fn task_bound_needs_training_weights() {
    let violated = (0..20)
        .map(|i| {
            hellstrom_intermediate_bounds(&random_tiny_super(41, i, 1 + (i as usize % 2)), DEFAULT_STATE_CAP).unwrap()
        })
        .filter(|h| h.task_slack < -1e-9)
        .count();
    assert!(violated > 0);
    let h = hellstrom_intermediate_bounds(&tiny_super(1, 1.0), DEFAULT_STATE_CAP).unwrap();
    assert!(h.task_slack_cross >= -1e-9);
}
