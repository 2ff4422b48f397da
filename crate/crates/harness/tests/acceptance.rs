//! Acceptance checks, one PASS/FAIL line each.
//!
//! Set `ACCEPTANCE_ONLY=1,7,8` to run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unified_ipp::belief::{
    gp_fuse, gp_init, occ_fuse, occ_init, GaussianMapBelief, MapBelief, MaternKernel, UncertaintyVariant,
};
use unified_ipp::grid::{InterestSpec, TerrainField};
use unified_ipp::metrics::{classification_metrics, ii_metric, mll_metric, UncertaintyTrace};
use unified_ipp::optim::{cmaes_minimize, CmaesOptions};
use unified_ipp::planning::{feasible_actions, greedy_plan, mcts_plan, LookaheadModel, PlanningContext};
use unified_ipp::reward::{exploration_reduction, step_reward};
use unified_ipp::sensors::{ConfusionMatrix, FieldOfView, Measurement};
use unified_ipp::unified::{assemble_state, interest_probability, Hyperparams};
use unified_ipp::{Action, GridGeometry, PlannerConfig, Pose};
use unified_ipp_harness::config::{BenchmarkConfig, FeatureKind, PlannerKind, Protocol};
use unified_ipp_harness::{run_benchmark, write_results};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------- interest probability against numeric integration ----------

fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// P(X ≥ t) for X ~ N(mu, sigma²), integrating the density piecewise over
/// one-sigma panels out to 40 sigma.
fn tail_by_quadrature(mu: f64, sigma: f64, t: f64) -> f64 {
    let hi = mu + 40.0 * sigma;
    if t >= hi {
        return 0.0;
    }
    let mut knots = vec![t.max(mu - 40.0 * sigma)];
    for k in -40..=40 {
        let x = mu + k as f64 * sigma;
        if x > knots[0] {
            knots.push(x);
        }
    }
    let f = |x: f64| normal_pdf(x, mu, sigma);
    knots.windows(2).map(|w| integrate(&f, w[0], w[1], 1e-15)).sum()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = GridGeometry::square(2).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mu: f64 = rng.random_range(0.0..1.0);
        let sigma: f64 = rng.random_range(1e-3..=1.0);
        let t: f64 = rng.random_range(0.0..=1.0);
        let kernel = MaternKernel::new(1e-3, sigma * sigma - 1e-8).unwrap();
        let belief = MapBelief::Gaussian(gp_init(g, kernel, mu, 0.01).unwrap());
        let spec = InterestSpec::threshold(t, (-10.0, 10.0)).unwrap();
        let p = interest_probability(&belief, &spec, 0).unwrap();
        let s = belief.as_gaussian().unwrap().variance(0).sqrt();
        worst = worst.max((p - tail_by_quadrature(mu, s, t)).abs());
    }
    check(worst < 1e-9, format!("max abs error {worst:.3e} over 1000 draws"))
}

// ---------- GP fusion against batch regression ----------

fn matern(a: [f64; 2], b: [f64; 2], l: f64, s2: f64) -> f64 {
    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let r = 3f64.sqrt() * d / l;
    s2 * (1.0 + r) * (-r).exp()
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let instances = 25;
    for _ in 0..instances {
        let g = GridGeometry::new(rng.random_range(2..=12), rng.random_range(2..=12)).unwrap();
        let n = g.len();
        let (l, s2): (f64, f64) = (rng.random_range(0.05..0.5), rng.random_range(0.5..2.0));
        let noise: f64 = rng.random_range(1e-3..0.1);
        let m0: f64 = rng.random_range(0.0..1.0);
        let obs: Vec<(usize, f64)> = (0..rng.random_range(1..=40)).map(|_| (rng.random_range(0..n), rng.random())).collect();

        let mut b = gp_init(g, MaternKernel::new(l, s2).unwrap(), m0, noise).unwrap();
        for &(c, y) in &obs {
            b = gp_fuse(&b, &Measurement::values(0, vec![(c, y)])).unwrap();
        }

        let centers: Vec<[f64; 2]> = (0..n).map(|c| g.cell_center(c)).collect();
        let k = DMatrix::from_fn(n, n, |i, j| matern(centers[i], centers[j], l, s2) + if i == j { 1e-8 } else { 0.0 });
        let q = obs.len();
        let kx = DMatrix::from_fn(n, q, |i, j| k[(i, obs[j].0)]);
        let a = DMatrix::from_fn(q, q, |i, j| k[(obs[i].0, obs[j].0)] + if i == j { noise } else { 0.0 });
        let chol = a.cholesky().expect("batch system is positive definite");
        let resid = DVector::from_fn(q, |i, _| obs[i].1 - m0);
        let mean = DVector::from_element(n, m0) + &kx * chol.solve(&resid);
        let cov = &k - &kx * chol.solve(&kx.transpose());
        for i in 0..n {
            worst = worst.max((b.mean()[i] - mean[i]).abs());
            for j in 0..n {
                worst = worst.max((b.covariance()[i * n + j] - cov[(i, j)]).abs());
            }
        }
    }
    check(worst < 1e-8, format!("max abs error {worst:.3e} over {instances} instances"))
}

// ---------- exploration special case ----------

fn random_belief(rng: &mut ChaCha8Rng) -> (MapBelief<f64>, Option<ConfusionMatrix<f64>>, InterestSpec<f64>) {
    let g = GridGeometry::new(rng.random_range(4..=9), rng.random_range(4..=9)).unwrap();
    if rng.random_bool(0.5) {
        let prior = gp_init(g, MaternKernel::new(rng.random_range(0.1..0.5), 1.0).unwrap(), 0.5, 0.01).unwrap();
        let obs: Vec<(usize, f64)> = (0..rng.random_range(0..15)).map(|_| (rng.random_range(0..g.len()), rng.random())).collect();
        let b = MapBelief::Gaussian(gp_fuse(&prior, &Measurement::values(0, obs)).unwrap());
        (b, None, InterestSpec::threshold(0.0, (0.0, 1.0)).unwrap())
    } else {
        let cm = ConfusionMatrix::uniform_noise(3, 0.8).unwrap();
        let prior = occ_init(g, 3, (0.01, 0.99)).unwrap();
        let obs: Vec<(usize, u16)> = (0..rng.random_range(0..30)).map(|_| (rng.random_range(0..g.len()), rng.random_range(1..=3))).collect();
        let b = MapBelief::Occupancy(occ_fuse(&prior, &Measurement::classes(0, obs), &cm).unwrap());
        (b, Some(cm), InterestSpec::classes([1, 2, 3], 3).unwrap())
    }
}

fn fuse_expected(belief: &MapBelief<f64>, cells: &[usize], cm: Option<&ConfusionMatrix<f64>>) -> MapBelief<f64> {
    let mut out = belief.clone();
    let m = match belief {
        MapBelief::Gaussian(b) => Measurement::values(0, cells.iter().map(|&c| (c, b.mean()[c])).collect()),
        MapBelief::Occupancy(b) => Measurement::classes(0, cells.iter().map(|&c| (c, b.argmax(c))).collect()),
    };
    out.fuse_in_place(&m, cm).unwrap();
    out
}

fn random_pose(rng: &mut ChaCha8Rng, g: GridGeometry) -> Pose {
    Pose::new(rng.random_range(0..g.width()), rng.random_range(0..g.height()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fov = FieldOfView::new(1);
    let (mut bit_equal, mut same_action) = (0, 0);
    for _ in 0..100 {
        let (before, cm, spec) = random_belief(&mut rng);
        let g = before.geometry();
        let cells = fov.cells(g, random_pose(&mut rng, g));
        let mut after = before.clone();
        let m = match &before {
            MapBelief::Gaussian(_) => Measurement::values(0, cells.iter().map(|&c| (c, rng.random())).collect()),
            MapBelief::Occupancy(_) => Measurement::classes(0, cells.iter().map(|&c| (c, rng.random_range(1..=3))).collect()),
        };
        after.fuse_in_place(&m, cm.as_ref()).unwrap();
        let h0 = before.uncertainty_grid(UncertaintyVariant::Reward);
        let h1 = after.uncertainty_grid(UncertaintyVariant::Reward);
        if step_reward(&before, &after, &spec).unwrap().to_bits() == exploration_reduction(&h0, &h1).to_bits() {
            bit_equal += 1;
        }

        let pose = random_pose(&mut rng, g);
        let mut best: Option<(Action, f64)> = None;
        for (a, next) in feasible_actions(g, pose) {
            let h = fuse_expected(&before, &fov.cells(g, next), cm.as_ref()).uncertainty_grid(UncertaintyVariant::Reward);
            let r = exploration_reduction(&h0, &h);
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((a, r));
            }
        }
        let hp = Hyperparams::new(&spec, &before).unwrap();
        let state = assemble_state(&before, &spec, pose, 10.0, hp).unwrap();
        let model = LookaheadModel { fov, confusion: cm.clone() };
        let ctx = PlanningContext { state: &state, belief: &before, spec: &spec, model: &model };
        if greedy_plan(&ctx, &PlannerConfig::default()).unwrap() == best.map(|b| b.0) {
            same_action += 1;
        }
    }
    check(
        bit_equal == 100 && same_action == 100,
        format!("bit-identical rewards {bit_equal}/100, greedy matches exploration greedy {same_action}/100"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let config = PlannerConfig {
        horizon: 1,
        mcts: unified_ipp::planning::MctsConfig { simulations: 64, ..Default::default() },
        ..Default::default()
    };
    let mut agree = 0;
    for k in 0..10 {
        let (belief, cm, _) = random_belief(&mut rng);
        let spec = match &belief {
            MapBelief::Gaussian(_) => InterestSpec::threshold(rng.random_range(0.2..0.8), (0.0, 1.0)).unwrap(),
            MapBelief::Occupancy(_) => InterestSpec::classes([rng.random_range(1..=3)], 3).unwrap(),
        };
        let pose = random_pose(&mut rng, belief.geometry());
        let hp = Hyperparams::new(&spec, &belief).unwrap();
        let state = assemble_state(&belief, &spec, pose, 10.0, hp).unwrap();
        let model = LookaheadModel { fov: FieldOfView::new(1), confusion: cm };
        let ctx = PlanningContext { state: &state, belief: &belief, spec: &spec, model: &model };
        let c = PlannerConfig { seed: k, ..config.clone() };
        if mcts_plan(&ctx, &c).unwrap() == greedy_plan(&ctx, &c).unwrap() {
            agree += 1;
        }
    }
    check(agree == 10, format!("{agree}/10 states agree"))
}

// ---------- benchmarks ----------

fn mean_ii(run: &unified_ipp_harness::BenchmarkRun, p: PlannerKind) -> f64 {
    run.summary.iter().find(|r| r.planner == p).and_then(|r| r.mean[0]).unwrap_or(f64::NAN)
}

fn threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn criterion_5() -> Outcome {
    let t0 = Instant::now();
    let cfg = BenchmarkConfig {
        protocol: Protocol::Static,
        missions: 30,
        repeats: 3,
        planners: vec![PlannerKind::Coverage, PlannerKind::Greedy, PlannerKind::Mcts],
        seed: 5,
        ..Default::default()
    };
    let run = run_benchmark(&cfg, threads()).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let (c, g, m) = (mean_ii(&run, PlannerKind::Coverage), mean_ii(&run, PlannerKind::Greedy), mean_ii(&run, PlannerKind::Mcts));
    let invalid: usize = run.summary.iter().map(|r| r.invalid).sum();
    check(
        g - c >= 5.0 && m - c >= 5.0 && m >= g - 1.0 && secs < 900.0,
        format!("II coverage {c:.2}, greedy {g:.2}, mcts {m:.2}; invalid {invalid}; {secs:.0} s"),
    )
}

fn criterion_6() -> Outcome {
    let mut cfg = BenchmarkConfig {
        protocol: Protocol::Varying,
        missions: 30,
        repeats: 3,
        planners: vec![PlannerKind::Coverage, PlannerKind::Greedy],
        seed: 6,
        ..Default::default()
    };
    cfg.mission.kind = FeatureKind::Discrete;
    let run = run_benchmark(&cfg, threads()).map_err(|e| e.to_string())?;
    let (c, g) = (mean_ii(&run, PlannerKind::Coverage), mean_ii(&run, PlannerKind::Greedy));
    let invalid: usize = run.summary.iter().map(|r| r.invalid).sum();
    check(g >= c, format!("II coverage {c:.2}, greedy {g:.2}; invalid {invalid}"))
}

// ---------- unit-level checks ----------

fn criterion_7() -> Outcome {
    let g = GridGeometry::square(2).unwrap();
    let cm = ConfusionMatrix::uniform_noise(3, 0.8).unwrap();
    let mut b = occ_init(g, 3, (0.01, 0.99)).unwrap();
    for _ in 0..50 {
        b = occ_fuse(&b, &Measurement::classes(0, vec![(0, 2)]), &cm).unwrap();
    }
    let p: f64 = b.cell(0)[1];
    check((p - 0.99).abs() <= 1e-9, format!("true-class probability {p}"))
}

fn criterion_8() -> Outcome {
    let mut trace = UncertaintyTrace::new();
    trace.push(100.0, 0.0).unwrap();
    let ii = ii_metric(&trace, 100.0).unwrap();

    let g = GridGeometry::square(2).unwrap();
    let unit: GaussianMapBelief<f64> = gp_init(g, MaternKernel::new(1e-4, 1.0 - 1e-8).unwrap(), 0.5, 0.01).unwrap();
    let field = TerrainField::continuous(g, vec![0.5; 4], 0.0, 1.0).unwrap();
    let mll = mll_metric(&unit, &field, &[true; 4]).unwrap();

    let g = GridGeometry::square(3).unwrap();
    let truth = [1u16, 1, 2, 2, 3, 3, 1, 2, 3];
    let pred = [1u16, 2, 2, 2, 3, 1, 1, 2, 2];
    let field = TerrainField::<f64>::discrete(g, truth.to_vec(), 3).unwrap();
    let spec = InterestSpec::classes([1, 2, 3], 3).unwrap();
    let prior = occ_init(g, 3, (0.01, 0.99)).unwrap();
    let m = Measurement::classes(0, pred.iter().enumerate().map(|(c, p)| (c, *p)).collect());
    let belief = occ_fuse(&prior, &m, &ConfusionMatrix::identity(3).unwrap()).unwrap();
    let (miou, f1) = classification_metrics(&belief, &field, &spec, &[true; 9]).unwrap();
    let mut table = [[0usize; 3]; 3];
    for (t, p) in truth.iter().zip(&pred) {
        table[*t as usize - 1][*p as usize - 1] += 1;
    }
    let (mut oi, mut of) = (0.0, 0.0);
    for f in 0..3 {
        let row: usize = table[f].iter().sum();
        let col: usize = (0..3).map(|t| table[t][f]).sum();
        oi += table[f][f] as f64 / (row + col - table[f][f]) as f64;
        of += 2.0 * table[f][f] as f64 / (row + col) as f64;
    }
    let (oi, of) = (100.0 * oi / 3.0, 100.0 * of / 3.0);
    check(
        ii == 50.0 && (mll - 91.894).abs() <= 1e-3 && (miou - oi).abs() < 1e-12 && (f1 - of).abs() < 1e-12,
        format!("II {ii}, MLL {mll:.4}, mIoU {miou:.6} (oracle {oi:.6}), F1 {f1:.6} (oracle {of:.6})"),
    )
}

fn criterion_9() -> Outcome {
    let mut worst_evals = 0;
    let mut solved = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let opts = CmaesOptions { population: 10, sigma0: 0.5, max_generations: 199, target: Some(1e-8) };
        let sphere = |x: &[f64]| -> unified_ipp::Result<f64> { Ok(x.iter().map(|v| v * v).sum()) };
        let r = cmaes_minimize(sphere, x0, &opts, &mut rng).map_err(|e| e.to_string())?;
        if r.best_f < 1e-8 && r.evaluations <= 2000 {
            solved += 1;
        }
        worst_evals = worst_evals.max(r.evaluations);
    }
    check(solved == 10, format!("{solved}/10 seeds below 1e-8, at most {worst_evals} evaluations"))
}

fn read_tree(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out = vec![("summary.csv".to_string(), std::fs::read(dir.join("summary.csv")).unwrap())];
    let mut eps: Vec<_> = std::fs::read_dir(dir.join("episodes")).unwrap().map(|e| e.unwrap().path()).collect();
    eps.sort();
    for p in eps {
        out.push((p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()));
    }
    out
}

fn criterion_10() -> Outcome {
    let mut cfg = BenchmarkConfig { missions: 2, repeats: 2, planners: PlannerKind::ALL.to_vec(), seed: 10, ..Default::default() };
    cfg.mission.budget = 25.0;
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    write_results(&run_benchmark(&cfg, 1).map_err(|e| e.to_string())?, &a, false).map_err(|e| e.to_string())?;
    write_results(&run_benchmark(&cfg, 2).map_err(|e| e.to_string())?, &b, false).map_err(|e| e.to_string())?;
    let (ta, tb) = (read_tree(&a), read_tree(&b));
    check(ta == tb && ta.len() == 17, format!("{} files compared, identical: {}", ta.len(), ta == tb))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "interest probability vs numeric integration", criterion_1),
        (2, "incremental GP fusion vs batch regression", criterion_2),
        (3, "exploration reward and greedy argmax invariance", criterion_3),
        (4, "MCTS horizon 1 equals greedy", criterion_4),
        (5, "continuous Static benchmark ordering", criterion_5),
        (6, "discrete Varying benchmark ordering", criterion_6),
        (7, "occupancy convergence to the clamp bound", criterion_7),
        (8, "metric unit checks", criterion_8),
        (9, "CMA-ES 10-d sphere self-test", criterion_9),
        (10, "benchmark determinism", criterion_10),
    ];
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {id:>2} {tag} [{secs:7.2} s] {name}: {detail}");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
