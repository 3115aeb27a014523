use gossipvr::hardinstances::*;
use gossipvr::harness::reference_solution;
use gossipvr::network::NodeVector;
use gossipvr::objectives::{average_value, FiniteSumObjective};

#[test]
fn chain_reference_matches_geometric_series() {
    let kappa = 4.0;
    let q = chain_ratio(kappa);
    let dim = (1..)
        .find(|&d| q.powi(2 * d) / (1.0 - q * q) < 1e-10)
        .unwrap() as usize;
    let chain = strongly_convex_chain(6, 3, kappa, 1.0, dim).unwrap();
    let r = reference_solution(&chain, 1e-12).unwrap();
    let exact = chain.truncated_minimizer();
    let worst =
        r.x.iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
    // truncation only perturbs the tail, which carries less than 1e-10 of mass per slot
    let star = chain.x_star();
    let gap: f64 = exact
        .iter()
        .zip(&star)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    assert!(gap < 3.0 * 1e-10, "{gap}");
}

#[test]
fn chain_roles_follow_two_star_layout() {
    let chain = strongly_convex_chain(5, 1, 10.0, 1.0, 4).unwrap();
    assert_eq!(chain.role(0), ChainRole::Left);
    assert_eq!(chain.role(1), ChainRole::Right);
    assert!((2..5).all(|v| chain.role(v) == ChainRole::Filler));
    let seq = chain.sequence().unwrap();
    assert_eq!(seq.node_count(), 5);
}

#[test]
fn zero_chain_gradient_respects_progress() {
    // a node's gradient at x reaches at most one coordinate past prog(x)
    let (inst, _) = nonconvex_hard_objective(9, 4, 1.0, 1.0, 40, 80).unwrap();
    let d = inst.dim();
    let c = inst.scale();
    let mut g = vec![0.0; d];
    for k in 0..6 {
        let mut x = vec![0.0; d];
        for v in x.iter_mut().take(k) {
            *v = c;
        }
        for node in 0..9 {
            for j in 0..4 {
                inst.component_gradient(node, j, &x, &mut g);
                assert!(
                    prog(&g) <= k + 1,
                    "node {node} block {j} at prog {k}: {}",
                    prog(&g)
                );
            }
        }
    }
}

#[test]
fn zero_chain_roles_cover_partition() {
    let (inst, seq) = nonconvex_hard_objective(9, 2, 1.0, 1.0, 10, 10).unwrap();
    let p = seq
        .partition()
        .expect("rotating star records its partition");
    for &v in &p.s1 {
        assert_eq!(inst.role(v), ChainHalf::Odd);
    }
    for &v in &p.s2 {
        assert_eq!(inst.role(v), ChainHalf::Even);
    }
    for &v in &p.s3 {
        assert_eq!(inst.role(v), ChainHalf::Silent);
    }
}

#[test]
fn zero_chain_gap_bound_covers_start() {
    let (inst, _) = nonconvex_hard_objective(9, 4, 2.0, 0.5, 60, 120).unwrap();
    let start = average_value(&inst, &vec![0.0; inst.dim()]);
    // every point with all coordinates far above threshold is near the infimum
    let far = vec![10.0 * inst.scale(); inst.dim()];
    let low = average_value(&inst, &far);
    assert!(start - low <= inst.gap_bound() * (1.0 + 1e-9));
    assert!(start - low > 0.0);
}

#[test]
fn lower_bound_is_monotone_on_grid() {
    for a in 0..10 {
        for b in 0..10 {
            let here = lower_bound_value(16.0, 64.0, 40.0, 4, a as f64, b as f64).unwrap();
            let more_comm =
                lower_bound_value(16.0, 64.0, 40.0, 4, (a + 1) as f64, b as f64).unwrap();
            let more_comp =
                lower_bound_value(16.0, 64.0, 40.0, 4, a as f64, (b + 1) as f64).unwrap();
            assert!(more_comm.communication.unwrap() < here.communication.unwrap());
            assert!(more_comp.computation.unwrap() < here.computation.unwrap());
            assert!(more_comm.value <= here.value && more_comp.value <= here.value);
        }
    }
}

#[test]
fn progress_counter_flags_violations() {
    let mut counter = ProgressCounter::new(3, 2);
    let mut x = NodeVector::zeros(3, 10);
    counter.record(0, 0, 0, &x);
    x.block_mut(2)[4] = 1.0;
    // one communication and two calls allow prog 1
    counter.record(1, 1, 2, &x);
    assert_eq!(counter.global(), 5);
    assert_eq!(counter.per_node(), &[0, 0, 5]);
    let v = counter.violations();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].bound, progress_bound(3, 2, 1, 2));
}
