//! Acceptance suite: one test per library-level release criterion, each
//! printing a single PASS/FAIL line with its measured values (run with
//! `--nocapture` to see the lines for passing tests). The CLI determinism
//! criterion lives in the CLI crate's own acceptance target.

mod common;

use ibccf::admm::{
    self, AdmmConfig, BoundaryData, CommonProjection, SideArray, SideMap, TrainingData,
};
use ibccf::cf;
use ibccf::eval::{self, SynthSpec};
use ibccf::features::FeatureMap;
use ibccf::geometry::{self, gaussian_label_1d, gaussian_label_2d, Label1D, Label2D, Side};
use ibccf::oracle;
use ibccf::tracker::TrackerConfig;
use ibccf::{BoundaryBox, CenterBox};
use ndarray::{Array1, Array2, Array3, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn max_abs_diff<'a>(
    a: impl IntoIterator<Item = &'a f64>,
    b: impl IntoIterator<Item = &'a f64>,
) -> f64 {
    a.into_iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn criterion_01_center_training_matches_dense_oracle() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let ch = rng.gen_range(1..=3);
        let rows = rng.gen_range(4..=16);
        let cols = rng.gen_range(4..=16);
        let lambda = rng.gen_range(1e-4..1.0);
        let x = FeatureMap::new(
            Array3::from_shape_fn((ch, rows, cols), |_| rng.gen_range(-1.0..1.0)),
            1,
        );
        let y = Label2D {
            values: Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0)),
            peak: (rows / 2, cols / 2),
        };
        let fast = cf::train_center_filter(&x, &y, lambda).unwrap().spatial();
        let dense = oracle::dense_center_train(&x.data, &y.values, lambda);
        worst = worst.max(max_abs_diff(fast.iter(), dense.iter()));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-8 && elapsed < 5.0;
    report(
        "01 center training vs dense oracle",
        pass,
        &format!("20 instances, max diff {worst:.2e}, {elapsed:.2} s"),
    );
    assert!(pass, "max diff {worst:.3e}, elapsed {elapsed:.2} s");
}

#[test]
fn criterion_02_boundary_training_matches_dense_oracle() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + i);
        let ch = rng.gen_range(1..=8);
        let len = rng.gen_range(6..=32);
        let lambda = rng.gen_range(1e-4..1.0);
        let x = FeatureMap::new(
            Array3::from_shape_fn((ch, 1, len), |_| rng.gen_range(-1.0..1.0)),
            1,
        );
        let y = Label1D {
            values: Array1::from_shape_fn(len, |_| rng.gen_range(-1.0..1.0)),
            peak: len / 2,
        };
        let fast = cf::train_boundary_filter(&x, &y, lambda, Side::Left)
            .unwrap()
            .spatial();
        let dense_x = Array2::from_shape_fn((ch, len), |(c, k)| x.data[(c, 0, k)]);
        let dense = oracle::dense_boundary_train(&dense_x, &y.values, lambda);
        worst = worst.max(max_abs_diff(fast.iter(), dense.iter()));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-8;
    report(
        "02 boundary training vs dense oracle",
        pass,
        &format!("20 instances, max diff {worst:.2e}, {elapsed:.2} s"),
    );
    assert!(pass, "max diff {worst:.3e}");
}

/// Projection whose four sides share one index map, so the four scattered
/// columns share a support and their rank can be forced exactly.
fn shared_map_projection() -> CommonProjection {
    let map = || SideMap {
        center_idx: (10..30).collect(),
        boundary_idx: (5..25).collect(),
        boundary_shape: (2, 16),
    };
    CommonProjection::new((1, 8, 8), SideArray::from_fn(|_| map())).unwrap()
}

#[test]
fn criterion_03_g_update_matches_dense_solve_for_all_ranks() {
    let proj = shared_map_projection();
    let mut worst = 0.0f64;
    let mut trials = 0;
    for rank in 0..=4usize {
        for trial in 0..11u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(3000 + rank as u64 * 100 + trial);
            let mut base: Vec<Array2<f64>> = (0..4)
                .map(|_| Array2::from_shape_fn((2, 16), |_| rng.gen_range(-1.0..1.0)))
                .collect();
            // force the rank: keep `rank` independent vectors, fill the rest
            // with combinations of them (zero when rank is 0)
            for i in rank..4 {
                let mut combo = Array2::zeros((2, 16));
                for b in base.iter().take(rank) {
                    let scale = rng.gen_range(-1.0..1.0);
                    combo = combo + b * scale;
                }
                base[i] = combo;
            }
            let uk = SideArray([base[0].clone(), base[1].clone(), base[2].clone(), base[3].clone()]);
            let w = Array3::from_shape_fn((1, 8, 8), |_| rng.gen_range(-1.0..1.0));
            let p = Array3::from_shape_fn((1, 8, 8), |_| rng.gen_range(-0.3..0.3));
            let mu = rng.gen_range(0.05..0.5);
            let rho = rng.gen_range(0.5..2.0);
            let g = admm::solve_g(&w, &p, &uk, &proj, mu, rho).unwrap();

            let wv: Vec<f64> = w.iter().copied().collect();
            let pv: Vec<f64> = p.iter().copied().collect();
            let v: Vec<f64> = wv.iter().zip(pv.iter()).map(|(a, b)| a - b).collect();
            let mut cols = Vec::new();
            for (side, m) in proj.sides.iter() {
                let ukv: Vec<f64> = uk[side].iter().copied().collect();
                let mut q = vec![0.0; 64];
                for (i, &ci) in m.center_idx.iter().enumerate() {
                    q[ci] = ukv[m.boundary_idx[i]];
                }
                cols.push(q);
            }
            let dense = oracle::dense_penalized_projection(&cols, &v, mu, rho);
            worst = worst.max(max_abs_diff(g.iter(), dense.iter()));
            trials += 1;
        }
    }
    let pass = worst <= 1e-8 && trials >= 50;
    report(
        "03 g update vs dense solve, ranks 0-4",
        pass,
        &format!("{trials} trials, max diff {worst:.2e}"),
    );
    assert!(pass, "max diff {worst:.3e} over {trials} trials");
}

#[test]
fn criterion_04_u_update_matches_dense_rank_one_solve() {
    let proj = shared_map_projection();
    let mut worst = 0.0f64;
    let mut trials = 0;
    for t in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + t);
        let side = Side::ALL[(t % 4) as usize];
        let wk = Array2::from_shape_fn((2, 16), |_| rng.gen_range(-1.0..1.0));
        let qk = Array2::from_shape_fn((2, 16), |_| rng.gen_range(-0.4..0.4));
        let g = Array3::from_shape_fn((1, 8, 8), |_| rng.gen_range(-1.0..1.0));
        let mu = rng.gen_range(0.05..0.5);
        let gamma = rng.gen_range(0.5..2.0);
        let u = admm::solve_uk(&wk, &qk, &g, &proj, side, mu, gamma).unwrap();

        let m = &proj.sides[side];
        let gv: Vec<f64> = g.iter().copied().collect();
        let mut s = vec![0.0; 32];
        for (i, &bi) in m.boundary_idx.iter().enumerate() {
            s[bi] = gv[m.center_idx[i]];
        }
        let v: Vec<f64> = wk.iter().zip(qk.iter()).map(|(a, b)| a - b).collect();
        let dense = oracle::dense_rank_one_solve(&s, &v, mu, gamma);
        worst = worst.max(max_abs_diff(u.iter(), dense.iter()));
        trials += 1;
    }
    let pass = worst <= 1e-10 && trials >= 50;
    report(
        "04 u update vs dense rank-one solve",
        pass,
        &format!("{trials} trials, max diff {worst:.2e}"),
    );
    assert!(pass, "max diff {worst:.3e}");
}

fn random_training_data(seed: u64) -> TrainingData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = FeatureMap::new(Array3::from_shape_fn((2, 8, 8), |_| rng.gen_range(-1.0..1.0)), 1);
    let y = gaussian_label_2d(8, 8, 1.0).unwrap();
    let boundaries = SideArray::from_fn(|_| BoundaryData {
        x: FeatureMap::new(Array3::from_shape_fn((2, 3, 8), |_| rng.gen_range(-1.0..1.0)), 1),
        y: gaussian_label_1d(8, 0.8).unwrap(),
    });
    TrainingData { x, y, boundaries, lambda: 1e-2 }
}

#[test]
fn criterion_05_subproblem_solutions_are_stationary() {
    let mut worst_w = 0.0f64;
    let mut worst_wk = 0.0f64;
    for seed in 0..3u64 {
        let data = random_training_data(5000 + seed);
        let mut rng = ChaCha8Rng::seed_from_u64(5100 + seed);
        let dim = data.x.data.dim();
        let g = Array3::from_shape_fn(dim, |_| rng.gen_range(-0.5..0.5));
        let p = Array3::from_shape_fn(dim, |_| rng.gen_range(-0.2..0.2));
        let rho = 1.1;
        let w = admm::solve_w(&data, &g, &p, rho).unwrap();
        let f = |v: &[f64]| {
            let wv = Array3::from_shape_fn(dim, |(c, r, k)| v[(c * dim.1 + r) * dim.2 + k]);
            let mut resp = Array2::<f64>::zeros((dim.1, dim.2));
            for c in 0..dim.0 {
                resp = resp
                    + oracle::circ_conv2(
                        &wv.index_axis(Axis(0), c).to_owned(),
                        &data.x.data.index_axis(Axis(0), c).to_owned(),
                    );
            }
            let mut total = 0.0;
            for r in 0..dim.1 {
                for k in 0..dim.2 {
                    total += (resp[(r, k)] - data.y.values[(r, k)]).powi(2);
                }
            }
            total += data.lambda * wv.iter().map(|x| x * x).sum::<f64>();
            total
                + rho
                    * wv.iter()
                        .zip(g.iter())
                        .zip(p.iter())
                        .map(|((a, b), c)| (a - b - c).powi(2))
                        .sum::<f64>()
        };
        let flat: Vec<f64> = w.iter().copied().collect();
        let grad = oracle::fd_gradient(f, &flat, 1e-5);
        worst_w = worst_w.max(grad.iter().map(|v| v * v).sum::<f64>().sqrt());

        let side = Side::ALL[(seed % 4) as usize];
        let b = &data.boundaries[side];
        let (bank, len) = (b.x.channels() * b.x.rows(), b.x.cols());
        let uk = Array2::from_shape_fn((bank, len), |_| rng.gen_range(-0.5..0.5));
        let qk = Array2::from_shape_fn((bank, len), |_| rng.gen_range(-0.2..0.2));
        let gamma = 0.9;
        let wk = admm::solve_wk(&data, side, &uk, &qk, gamma).unwrap();
        let flat_x = Array2::from_shape_fn((bank, len), |(j, k)| {
            b.x.data[(j / b.x.rows(), j % b.x.rows(), k)]
        });
        let f1 = |v: &[f64]| {
            let wv = Array2::from_shape_fn((bank, len), |(j, k)| v[j * len + k]);
            let mut resp = Array1::<f64>::zeros(len);
            for j in 0..bank {
                resp = resp
                    + oracle::circ_conv1(
                        &wv.index_axis(Axis(0), j).to_owned(),
                        &flat_x.index_axis(Axis(0), j).to_owned(),
                    );
            }
            let mut total = 0.0;
            for k in 0..len {
                total += (resp[k] - b.y.values[k]).powi(2);
            }
            total += data.lambda * wv.iter().map(|x| x * x).sum::<f64>();
            total
                + gamma
                    * wv.iter()
                        .zip(uk.iter())
                        .zip(qk.iter())
                        .map(|((a, bb), c)| (a - bb - c).powi(2))
                        .sum::<f64>()
        };
        let flat: Vec<f64> = wk.iter().copied().collect();
        let grad = oracle::fd_gradient(f1, &flat, 1e-5);
        worst_wk = worst_wk.max(grad.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    let pass = worst_w <= 1e-6 && worst_wk <= 1e-6;
    report(
        "05 subproblem stationarity",
        pass,
        &format!("gradient norms: center {worst_w:.2e}, boundary {worst_wk:.2e}"),
    );
    assert!(pass, "gradient norms {worst_w:.3e} / {worst_wk:.3e}");
}

#[test]
fn criterion_06_admm_converges_fast_on_the_standard_fixture() {
    let (data, proj) = common::fixture_instance(60);
    let cfg = AdmmConfig::default();
    let sol = admm::run_admm(&data, &proj, &cfg).unwrap();
    let few = sol.diagnostics.converged && sol.diagnostics.iterations <= 10;

    let sol0 = admm::run_admm(&data, &proj, &AdmmConfig { mu: 0.0, ..cfg }).unwrap();
    let one_iter = sol0.diagnostics.iterations == 1;
    let indep_c = cf::train_center_filter(&data.x, &data.y, data.lambda)
        .unwrap()
        .spatial();
    let mut drift = max_abs_diff(sol0.state.w.iter(), indep_c.iter());
    for side in Side::ALL {
        let b = &data.boundaries[side];
        let indep = cf::train_boundary_filter(&b.x, &b.y, data.lambda, side)
            .unwrap()
            .spatial();
        drift = drift.max(max_abs_diff(sol0.state.wk[side].iter(), indep.iter()));
    }
    let pass = few && one_iter && drift <= 1e-8;
    report(
        "06 admm convergence on the 32x32 fixture",
        pass,
        &format!(
            "coupled: {} iterations, converged {}; decoupled: {} iteration, drift {drift:.2e}",
            sol.diagnostics.iterations, sol.diagnostics.converged, sol0.diagnostics.iterations
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_coupling_pulls_common_angles_toward_ninety_degrees() {
    let spread = |sol: &admm::AdmmSolution, proj: &CommonProjection| -> f64 {
        Side::ALL
            .iter()
            .map(|&s| {
                (90.0 - admm::common_angle(&sol.state.w, &sol.state.wk[s], proj, s).unwrap()).abs()
            })
            .sum::<f64>()
            / 4.0
    };
    let mut holds = 0;
    let mut lines = Vec::new();
    let seeds: Vec<u64> = (0..10).collect();
    for &seed in &seeds {
        let (data, proj) = common::fixture_instance(700 + seed);
        let free = admm::run_admm(&data, &proj, &AdmmConfig { mu: 0.0, ..AdmmConfig::default() })
            .unwrap();
        let tied = admm::run_admm(&data, &proj, &AdmmConfig::default()).unwrap();
        let s0 = spread(&free, &proj);
        let s1 = spread(&tied, &proj);
        if s1 <= s0 {
            holds += 1;
        }
        lines.push(format!("seed {seed}: mu 0 {s0:.2}, mu 0.1 {s1:.2}"));
    }
    let pass = holds > seeds.len() / 2;
    report(
        "07 near-orthogonality effect",
        pass,
        &format!("{holds}/{} seeds hold; {}", seeds.len(), lines.join("; ")),
    );
    assert!(pass, "only {holds}/{} seeds hold", seeds.len());
}

fn mean_iou(gt: &[BoundaryBox], boxes: &[BoundaryBox]) -> f64 {
    let evaluated = gt.len() - 1;
    let sum: f64 = gt
        .iter()
        .zip(boxes.iter())
        .skip(1)
        .map(|(g, b)| geometry::iou(g, b))
        .sum();
    sum / evaluated as f64
}

#[test]
fn criterion_08_boundary_tracking_beats_center_only_under_aspect_change() {
    let start = Instant::now();
    let spec = SynthSpec::new("aspect", 192, 320)
        .schedule_geometric(CenterBox::new(160.0, 96.0, 14.0, 28.0), 30, [0.0, 0.0], [1.08, 0.96])
        .seed(21);
    let seq = eval::synth_sequence(&spec).unwrap();
    let full = eval::run_ope(&seq, &TrackerConfig::default()).unwrap();
    let center_only = eval::run_ope(
        &seq,
        &TrackerConfig { disable_boundaries: true, ..TrackerConfig::default() },
    )
    .unwrap();
    let iou_full = mean_iou(&seq.gt, &full.boxes);
    let iou_center = mean_iou(&seq.gt, &center_only.boxes);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = iou_full >= 0.6 && iou_full - iou_center >= 0.05 && elapsed < 60.0;
    report(
        "08 aspect-ratio ablation",
        pass,
        &format!("mean IoU full {iou_full:.3}, center-only {iou_center:.3}, {elapsed:.1} s"),
    );
    assert!(
        pass,
        "full {iou_full:.3}, center-only {iou_center:.3}, elapsed {elapsed:.1} s"
    );
}

#[test]
fn criterion_09_overlap_metrics_match_hand_computed_values() {
    let gt = vec![BoundaryBox::from_ltwh(0.0, 0.0, 10.0, 10.0).unwrap(); 4];
    let boxes = vec![
        gt[0],
        BoundaryBox::from_ltwh(0.0, 0.0, 2.0, 10.0).unwrap(),
        BoundaryBox::from_ltwh(0.0, 0.0, 6.0, 10.0).unwrap(),
        BoundaryBox::from_ltwh(0.0, 0.0, 7.0, 10.0).unwrap(),
    ];
    let op05 = eval::overlap_precision(&gt, &boxes, 0.5);
    let curve = eval::success_curve(&gt, &boxes);
    let auc = eval::auc(&curve);
    let monotone = curve.windows(2).all(|p| p[1].1 <= p[0].1 + 1e-12);
    let pass = (op05 - 2.0 / 3.0).abs() <= 1e-12
        && (auc - 10.0 / 21.0).abs() <= 1e-12
        && monotone
        && curve.len() == 21;
    report(
        "09 overlap metrics hand values",
        pass,
        &format!("OP(0.5) {op05:.3}, AUC {auc:.3}, monotone {monotone}"),
    );
    assert!(pass, "OP(0.5) {op05}, AUC {auc}");
}
