//! Acceptance suite: one test per criterion. Each prints a summary line
//! (visible with `-- --nocapture`) and enforces its runtime budget.
//!
//! ```text
//! cargo test -p aba-cli --test acceptance -- --nocapture
//! ```

use std::fmt::Write as _;
use std::time::Instant;

use aba_core::{
    balanced_plan, brute_force_max_assignment, brute_force_pairwise, build_base_batches,
    build_category_batches, build_interleaved_batches, compute_global_ordering, evaluate,
    random_partition, random_partition_with_categories, run_aba, run_hierarchical,
    solve_max_assignment, squared_euclidean, CategorySpec, CostMatrix, FeatureMatrix,
    HierarchyPlan, Partition, VariantSelector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Criterion {
    id: usize,
    name: &'static str,
    budget_s: f64,
    started: Instant,
}

impl Criterion {
    fn start(id: usize, name: &'static str, budget_s: f64) -> Self {
        Self {
            id,
            name,
            budget_s,
            started: Instant::now(),
        }
    }

    fn pass(self, detail: &str) {
        let elapsed = self.started.elapsed().as_secs_f64();
        println!(
            "acceptance {:02} {}: PASS ({}; {:.2}s of {:.0}s budget)",
            self.id, self.name, detail, elapsed, self.budget_s
        );
        assert!(
            elapsed < self.budget_s,
            "criterion {:02} exceeded its {}s budget ({elapsed:.2}s)",
            self.id,
            self.budget_s
        );
    }
}

fn uniform_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FeatureMatrix {
    let values: Vec<f64> = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    FeatureMatrix::from_vec(n, d, values).unwrap()
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FeatureMatrix {
    let values: Vec<f64> = (0..n * d)
        .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect();
    FeatureMatrix::from_vec(n, d, values).unwrap()
}

fn assert_balanced(p: &Partition, n: usize, k: usize, context: &str) {
    let sizes = p.cluster_sizes();
    let floor = n / k;
    let ceil = n.div_ceil(k);
    let larger = sizes.iter().filter(|&&s| s == ceil).count();
    assert!(
        sizes.iter().all(|&s| s == floor || s == ceil),
        "{context}: size outside {{{floor}, {ceil}}}: {sizes:?}"
    );
    if !n.is_multiple_of(k) {
        assert_eq!(larger, n % k, "{context}: wrong count of larger groups");
    }
}

/// Criterion 1 — the pairwise/centroid identity: for random point sets the
/// full pairwise sum equals n times the centroid SSE (1e-9 relative).
#[test]
fn c01_pairwise_centroid_identity() {
    let c = Criterion::start(1, "pairwise-centroid identity", 5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=50);
        let d = rng.random_range(1..=10);
        let m = uniform_matrix(&mut rng, n, d);

        let whole = Partition::from_labels(vec![0; n], 1).unwrap();
        let pairwise = brute_force_pairwise(&m, &whole).unwrap();

        let mut centroid = vec![0.0; d];
        for row in m.rows() {
            for (c, v) in centroid.iter_mut().zip(row) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= n as f64;
        }
        let sse: f64 = m.rows().map(|row| squared_euclidean(row, &centroid)).sum();
        let identity = n as f64 * sse;

        let rel = (pairwise - identity).abs() / pairwise.abs().max(identity.abs()).max(1.0);
        worst = worst.max(rel);
        assert!(rel <= 1e-9, "identity violated: {pairwise} vs {identity}");
    }
    c.pass(&format!("200 point sets, worst relative error {worst:.2e}"));
}

/// Criterion 2 — the assignment solver matches exhaustive enumeration on 500
/// random rectangular matrices (1e-9 absolute).
#[test]
fn c02_assignment_solver_matches_oracle() {
    let c = Criterion::start(2, "assignment solver vs oracle", 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let m = rng.random_range(1..=7);
        let n = rng.random_range(m..=7);
        let costs: Vec<f64> = (0..m * n).map(|_| rng.random_range(0.0..1.0)).collect();
        let matrix = CostMatrix::from_vec(m, n, costs).unwrap();
        let fast = solve_max_assignment(&matrix).unwrap();
        let slow = brute_force_max_assignment(&matrix).unwrap();
        let gap = (fast.total_cost - slow.total_cost).abs();
        worst = worst.max(gap);
        assert!(
            gap <= 1e-9,
            "case {case} ({m}x{n}): {} vs {}",
            fast.total_cost,
            slow.total_cost
        );
        let mut cols = fast.column_of_row.clone();
        cols.sort_unstable();
        cols.dedup();
        assert_eq!(cols.len(), m, "case {case}: columns not distinct");
    }
    c.pass(&format!("500 matrices, worst absolute gap {worst:.2e}"));
}

/// Criterion 3 — size constraints: every variant emits groups of size
/// ⌊N/K⌋ or ⌈N/K⌉ with exactly N mod K of the larger size.
#[test]
fn c03_size_constraints_all_variants() {
    let c = Criterion::start(3, "size constraints across variants", 30.0);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for case in 0..300 {
        // Mix of edge and bulk shapes; K spans 1..=N with the expensive
        // mid-range Ks drawn at reduced N so the suite stays inside budget.
        let n: usize = rng.random_range(1..=1000);
        let k = match case % 6 {
            0 => 1,
            1 => n,
            2 => rng.random_range(1..=n.min(16)),
            3 => rng.random_range(1..=n.min(64)),
            4 => rng.random_range(n.div_ceil(2)..=n),
            _ => {
                let n_small = rng.random_range(1..=200.min(n));
                rng.random_range(1..=n_small)
            }
        };
        let d = rng.random_range(1..=6);
        let m = uniform_matrix(&mut rng, n, d);
        let ordering = compute_global_ordering(&m);

        let p = match case % 3 {
            0 => run_aba(&m, &build_base_batches(&ordering, k).unwrap(), k, None),
            1 => run_aba(
                &m,
                &build_interleaved_batches(&ordering, k).unwrap(),
                k,
                None,
            ),
            _ => {
                let g = rng.random_range(1..=6usize);
                let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..g)).collect();
                let names = (0..g).map(|x| x.to_string()).collect();
                let cats = CategorySpec::new(labels, names).unwrap();
                let plan = build_category_batches(&ordering, k, &cats).unwrap();
                run_aba(&m, &plan, k, Some(&cats))
            }
        }
        .unwrap();
        assert_balanced(&p, n, k, &format!("case {case} (n={n}, k={k})"));
    }
    c.pass("300 instances across base, interleaved, category");
}

/// Criterion 4 — category constraint: per-(anticluster, category) tallies
/// stay within one of |N_g|/K for both the solver and the stratified
/// baseline.
#[test]
fn c04_category_tallies_within_bounds() {
    let c = Criterion::start(4, "category tallies within bounds", 30.0);
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for case in 0..100 {
        let n = rng.random_range(2..=500);
        let k = rng.random_range(1..=n.min(25));
        let g = rng.random_range(1..=6usize);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..g)).collect();
        let names = (0..g).map(|x| x.to_string()).collect();
        let cats = CategorySpec::new(labels.clone(), names).unwrap();
        let d = rng.random_range(1..=5);
        let m = uniform_matrix(&mut rng, n, d);
        let ordering = compute_global_ordering(&m);
        let plan = build_category_batches(&ordering, k, &cats).unwrap();

        let solved = run_aba(&m, &plan, k, Some(&cats)).unwrap();
        let sampled = random_partition_with_categories(&cats, k, case as u64).unwrap();
        for (which, p) in [("solver", &solved), ("baseline", &sampled)] {
            for gi in 0..g {
                let total = cats.members(gi).len();
                for (ki, members) in p.cluster_members().iter().enumerate() {
                    let tally = members.iter().filter(|&&i| labels[i] == gi).count();
                    assert!(
                        tally >= total / k && tally <= total.div_ceil(k),
                        "case {case} {which}: tally({ki},{gi})={tally} outside \
                         [{}, {}] (|N_g|={total}, k={k})",
                        total / k,
                        total.div_ceil(k)
                    );
                }
            }
        }
    }
    c.pass("100 instances, solver and stratified baseline");
}

/// Criterion 5 — hierarchical decomposition preserves the flat size bounds:
/// leaf sizes in {⌊N/K⌋, ⌈N/K⌉} with the exact count of larger leaves.
#[test]
fn c05_hierarchical_leaf_sizes() {
    let c = Criterion::start(5, "hierarchical leaf sizes", 60.0);
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for case in 0..200 {
        let levels = rng.random_range(1..=3usize);
        let factors: Vec<usize> = (0..levels).map(|_| rng.random_range(2..=12)).collect();
        let k: usize = factors.iter().product();
        let n = rng.random_range(k..=2000);
        let d = rng.random_range(1..=4);
        let m = uniform_matrix(&mut rng, n, d);
        let hp = HierarchyPlan::new(factors.clone()).unwrap();
        let p = run_hierarchical(&m, &hp, VariantSelector::Auto).unwrap();
        assert_eq!(p.k(), k);
        assert_balanced(
            &p,
            n,
            k,
            &format!("case {case} (n={n}, factors {factors:?})"),
        );
    }
    c.pass("200 hierarchical runs, 1-3 levels, factors 2-12");
}

/// Criterion 6 — direction of the quality comparison: on isotropic Gaussian
/// data the solver's centroid-SSE objective beats the mean of seeded random
/// partitions, and its diversity spread is smaller, in at least 9 of 10
/// fresh datasets.
#[test]
fn c06_quality_vs_random_baseline() {
    let c = Criterion::start(6, "solver vs random baseline", 60.0);
    let (n, d, k) = (2000, 10, 50);
    let mut wins_objective = 0;
    let mut wins_sd = 0;
    let mut both = 0;
    for data_seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + data_seed);
        let m = gaussian_matrix(&mut rng, n, d);
        let ordering = compute_global_ordering(&m);
        let plan = build_base_batches(&ordering, k).unwrap();
        let solved = evaluate(&m, &run_aba(&m, &plan, k, None).unwrap()).unwrap();

        let mut sse_sum = 0.0;
        let mut sd_sum = 0.0;
        for seed in 0..10u64 {
            let p = random_partition(n, k, 1000 * data_seed + seed).unwrap();
            let r = evaluate(&m, &p).unwrap();
            sse_sum += r.centroid_sse_objective;
            sd_sum += r.diversity_sd;
        }
        let objective_win = solved.centroid_sse_objective > sse_sum / 10.0;
        let sd_win = solved.diversity_sd < sd_sum / 10.0;
        wins_objective += objective_win as usize;
        wins_sd += sd_win as usize;
        both += (objective_win && sd_win) as usize;
    }
    assert!(
        both >= 9,
        "only {both}/10 seeds won both (objective {wins_objective}, sd {wins_sd})"
    );
    c.pass(&format!(
        "{both}/10 seeds won both (objective {wins_objective}/10, sd {wins_sd}/10)"
    ));
}

fn flat_solve(m: &FeatureMatrix, k: usize) -> Partition {
    let ordering = compute_global_ordering(m);
    let plan = build_base_batches(&ordering, k).unwrap();
    run_aba(m, &plan, k, None).unwrap()
}

/// Criterion 7 — two-level decompositions lose at most 0.5% of the flat
/// objective on a 20k-point Gaussian instance with K=500.
#[test]
fn c07_hierarchical_quality_deviation() {
    let c = Criterion::start(7, "hierarchical quality deviation", 300.0);
    let (n, d, k) = (20_000, 5, 500);
    let mut rng = ChaCha8Rng::seed_from_u64(700);
    let m = gaussian_matrix(&mut rng, n, d);

    let flat = evaluate(&m, &flat_solve(&m, k))
        .unwrap()
        .centroid_sse_objective;
    let mut detail = String::new();
    for factors in [vec![4, 125], vec![20, 25]] {
        let hp = HierarchyPlan::new(factors.clone()).unwrap();
        let p = run_hierarchical(&m, &hp, VariantSelector::Base).unwrap();
        let objective = evaluate(&m, &p).unwrap().centroid_sse_objective;
        let deviation = 100.0 * (objective - flat) / flat;
        let _ = write!(detail, "{factors:?}: {deviation:+.4}% ");
        assert!(
            deviation.abs() <= 0.5,
            "plan {factors:?} deviates {deviation:.4}% from flat"
        );
    }
    c.pass(detail.trim());
}

/// Criterion 8 — the balanced two-level plan is at least twice as fast as
/// the flat solve on the same instance, and the planner picks the divisor
/// pair minimizing K₁² + K₂².
#[test]
fn c08_hierarchical_speedup_and_balanced_plan() {
    let c = Criterion::start(8, "hierarchical speedup", 300.0);

    let plan = balanced_plan(5000, 2);
    assert_eq!(plan.factors(), &[50, 100]);
    let best_sum: usize = (2..=70)
        .filter(|d| 5000 % d == 0)
        .map(|d| d * d + (5000 / d) * (5000 / d))
        .min()
        .unwrap();
    assert_eq!(50 * 50 + 100 * 100, best_sum);

    let (n, d, k) = (20_000, 5, 500);
    let mut rng = ChaCha8Rng::seed_from_u64(800);
    let m = gaussian_matrix(&mut rng, n, d);

    let started = Instant::now();
    let flat = flat_solve(&m, k);
    let flat_time = started.elapsed().as_secs_f64();

    let hp = balanced_plan(k, 2);
    assert_eq!(hp.factors(), &[20, 25]);
    let started = Instant::now();
    let hier = run_hierarchical(&m, &hp, VariantSelector::Base).unwrap();
    let hier_time = started.elapsed().as_secs_f64();

    assert_eq!(flat.k(), hier.k());
    let speedup = flat_time / hier_time;
    assert!(
        speedup >= 2.0,
        "flat {flat_time:.2}s vs hierarchical {hier_time:.2}s: {speedup:.1}x"
    );
    c.pass(&format!(
        "flat {flat_time:.2}s, two-level {hier_time:.2}s ({speedup:.1}x); \
         balanced_plan(5000, 2) = [50, 100]"
    ));
}

/// Criterion 9 — the report's pairwise objective matches the O(N²) oracle
/// and cut cost complements it to the total pairwise sum (1e-9 relative).
#[test]
fn c09_pairwise_and_cut_coherence() {
    let c = Criterion::start(9, "pairwise/cut coherence", 30.0);
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for case in 0..50 {
        let n = rng.random_range(2..=300);
        let k = rng.random_range(1..=n.min(20));
        let d = rng.random_range(1..=6);
        let m = uniform_matrix(&mut rng, n, d);
        let p = random_partition(n, k, case as u64).unwrap();
        let report = evaluate(&m, &p).unwrap();

        let oracle_within = brute_force_pairwise(&m, &p).unwrap();
        let whole = Partition::from_labels(vec![0; n], 1).unwrap();
        let oracle_total = brute_force_pairwise(&m, &whole).unwrap();

        let scale = oracle_total.abs().max(1.0);
        assert!(
            (report.pairwise_objective - oracle_within).abs() <= 1e-9 * scale,
            "case {case}: pairwise {} vs oracle {oracle_within}",
            report.pairwise_objective
        );
        assert!(
            (report.cut_cost + report.pairwise_objective - oracle_total).abs() <= 1e-9 * scale,
            "case {case}: cut {} + within {} vs total {oracle_total}",
            report.cut_cost,
            report.pairwise_objective
        );
    }
    c.pass("50 instances, both identities at 1e-9 relative");
}

/// Criterion 10 — identical CLI invocations produce byte-identical label
/// files, and hierarchical runs are thread-count independent.
#[test]
fn c10_cli_determinism_and_thread_independence() {
    let c = Criterion::start(10, "CLI determinism", 60.0);
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    let mut text = String::from("a,b,c\n");
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..800 {
        let _ = writeln!(
            text,
            "{},{},{}",
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0)
        );
    }
    std::fs::write(&input, text).unwrap();

    let run = |labels: &str, extra: &[&str]| -> Vec<u8> {
        let labels_path = dir.path().join(labels);
        let metrics_path = dir.path().join(format!("{labels}.metrics.json"));
        let mut args = vec![
            "run".to_string(),
            "--input".into(),
            input.display().to_string(),
            "--labels-out".into(),
            labels_path.display().to_string(),
            "--metrics-out".into(),
            metrics_path.display().to_string(),
        ];
        args.extend(extra.iter().map(|s| s.to_string()));
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_aba"))
            .args(&args)
            .output()
            .expect("binary runs");
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        std::fs::read(&labels_path).unwrap()
    };

    // Flat solver path: identical invocations, identical bytes.
    let flat_args = ["--k", "24", "--preprocess", "standardize"];
    let a = run("flat_a.csv", &flat_args);
    let b = run("flat_b.csv", &flat_args);
    assert_eq!(a, b, "flat run not reproducible");

    // Hierarchical path: single- and multi-threaded runs agree bytewise.
    let t1 = run(
        "hier_t1.csv",
        &["--k", "24", "--hierarchy", "4x6", "--threads", "1"],
    );
    let t8 = run(
        "hier_t8.csv",
        &["--k", "24", "--hierarchy", "4x6", "--threads", "8"],
    );
    let t1_again = run(
        "hier_t1b.csv",
        &["--k", "24", "--hierarchy", "4x6", "--threads", "1"],
    );
    assert_eq!(t1, t8, "thread count changed hierarchical labels");
    assert_eq!(t1, t1_again, "hierarchical run not reproducible");
    c.pass("flat repeat, hierarchical repeat, threads 1 vs 8 all byte-identical");
}
