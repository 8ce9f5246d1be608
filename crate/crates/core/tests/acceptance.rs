//! Acceptance suite. Each test prints one `criterion N ...: PASS|FAIL` line
//! straight to stderr (bypassing output capture) and then asserts.

mod common;

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use speclust::eigen::{eigensolve, LanczosConfig};
use speclust::graph::EdgeList;
use speclust::io;
use speclust::kmeans::{kmeans, kmeanspp_indices, lloyd, pairwise_sq_dist, KmeansConfig};
use speclust::laplacian::{degrees, recover_row_eigvecs, row_scale, sym_scale};
use speclust::metrics::{adjusted_rand_index, ncut, ratio_cut, Partition};
use speclust::pipeline::{run, PipelineConfig, PipelineInput};
use speclust::sbm::{sbm_generate, SbmConfig};
use speclust::{CooMatrix, DenseMatrix, DupPolicy};

fn report(n: usize, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {n} ({name}): {verdict}; {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_1_eigensolver_oracle_suite() {
    let t = Instant::now();
    let mut rng = rng(1001);
    let (mut worst_val, mut worst_res, mut worst_orth) = (0.0f64, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for case in 0..200 {
        let n = rng.random_range(20..=200);
        let density = rng.random_range(0.02..=0.10);
        let k = rng.random_range(1..=10);
        let a = random_symmetric(&mut rng, n, density);
        let cfg = LanczosConfig::new(k).with_seed(case);
        let b = match eigensolve(&a, &cfg) {
            Ok(b) => b,
            Err(e) => {
                failures.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let (oracle, _) = oracle_eigen(&a);
        for j in 0..k {
            worst_val = worst_val.max((b.values[j] - oracle[j]).abs());
            worst_res = worst_res.max(residual(&a, b.values[j], &b.vector(j)));
        }
        worst_orth = worst_orth.max(orthonormality_defect(&b.vectors));
    }
    let elapsed = t.elapsed();
    let pass = failures.is_empty()
        && worst_val <= 1e-8
        && worst_res <= 1e-6
        && worst_orth <= 1e-8
        && elapsed < Duration::from_secs(60);
    report(
        1,
        "eigensolver oracle suite",
        pass,
        format!(
            "200 matrices, max |value error| {worst_val:.2e}, max residual {worst_res:.2e}, \
             max orthonormality defect {worst_orth:.2e}, {:.1} s, errors {failures:?}",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_2_spectral_equivalence() {
    let mut rng = rng(2002);
    let mut worst = 0.0f64;
    let mut worst_value = 0.0f64;
    for case in 0..50 {
        let n = rng.random_range(4..=64);
        let extra = rng.random_range(0..=2 * n);
        let w = random_connected(&mut rng, n, extra);
        let k = rng.random_range(1..=6.min(n - 1));
        let d = degrees(&w).unwrap();
        let s = sym_scale(&w, &d).unwrap();
        let b = eigensolve(&s, &LanczosConfig::new(k).with_seed(case).with_tol(1e-12)).unwrap();
        let v = recover_row_eigvecs(&b.vectors, &d).unwrap();
        let p = row_scale(&w, &d).unwrap();
        let oracle = oracle_real_eigenvalues(&to_nalgebra(&p));
        for j in 0..k {
            worst = worst.max(residual(&p, b.values[j], &v.column(j)));
            worst_value = worst_value.max((b.values[j] - oracle[j]).abs());
        }
    }
    report(
        2,
        "spectral equivalence",
        worst <= 1e-8,
        format!(
            "50 connected graphs, max row-stochastic residual {worst:.2e}, \
             max |value - dense row-stochastic value| {worst_value:.2e}"
        ),
    );
}

#[test]
fn criterion_3_distance_expansion() {
    let mut rng = rng(3003);
    let mut worst = 0.0f64;
    let mut zero_ok = true;
    for case in 0..100 {
        let n = rng.random_range(1..=200);
        let k = rng.random_range(1..=20);
        let d = rng.random_range(1..=30);
        let scale = 10f64.powi(rng.random_range(-3..=3));
        let v = DenseMatrix::new(n, d, (0..n * d).map(|_| scale * rng.random_range(-1.0..1.0)).collect()).unwrap();
        // every other instance takes some centroids straight from the points
        let c_rows: Vec<Vec<f64>> = (0..k)
            .map(|j| {
                if case % 2 == 0 && j % 2 == 0 {
                    v.row(rng.random_range(0..n)).to_vec()
                } else {
                    (0..d).map(|_| scale * rng.random_range(-1.0..1.0)).collect()
                }
            })
            .collect();
        let c = DenseMatrix::from_rows(&c_rows).unwrap();
        let s = pairwise_sq_dist(&v, &c).unwrap();
        for i in 0..n {
            for j in 0..k {
                let naive: f64 = v.row(i).iter().zip(c.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                let got = s.get(i, j);
                if naive == 0.0 {
                    zero_ok &= got == 0.0;
                } else {
                    worst = worst.max((got - naive).abs() / naive);
                }
            }
        }
    }
    report(
        3,
        "distance expansion",
        worst <= 1e-9 && zero_ok,
        format!("100 instances, max relative error {worst:.2e}, identical rows exactly zero: {zero_ok}"),
    );
}

fn blobs(rng: &mut rand_chacha::ChaCha8Rng) -> (DenseMatrix, Vec<usize>) {
    let centers = [(-10.0, -10.0), (-10.0, 10.0), (10.0, -10.0), (10.0, 10.0)];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (b, &(cx, cy)) in centers.iter().enumerate() {
        for _ in 0..100 {
            rows.push(vec![cx + rng.random_range(-1.0..1.0), cy + rng.random_range(-1.0..1.0)]);
            labels.push(b);
        }
    }
    (DenseMatrix::from_rows(&rows).unwrap(), labels)
}

#[test]
fn criterion_4_kmeans_properties() {
    let mut rng = rng(4004);
    let mut monotone = true;
    let mut distinct = true;
    for case in 0..100 {
        let n = rng.random_range(2..=300);
        let d = rng.random_range(1..=8);
        let k = rng.random_range(1..=n.min(12));
        // a few repeated rows exercise ties and duplicate handling
        let mut rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        for i in 0..n / 10 {
            rows[i] = rows[n - 1 - i].clone();
        }
        let v = DenseMatrix::from_rows(&rows).unwrap();
        let idx = kmeanspp_indices(&v, k, case).unwrap();
        let mut sorted = idx.clone();
        sorted.sort();
        sorted.dedup();
        distinct &= sorted.len() == k;
        let l = kmeans(&v, &KmeansConfig::new(k).with_seed(case)).unwrap();
        monotone &= l.sse_history.windows(2).all(|w| w[1] <= w[0]);
        let init = DenseMatrix::from_rows(&(0..k).map(|j| rows[j * n / k].clone()).collect::<Vec<_>>()).unwrap();
        let l = lloyd(&v, &init, &KmeansConfig::new(k)).unwrap();
        monotone &= l.sse_history.windows(2).all(|w| w[1] <= w[0]);
    }
    let mut perfect = 0;
    for seed in 0..100 {
        let (v, truth) = blobs(&mut rng);
        let l = kmeans(&v, &KmeansConfig::new(4).with_seed(seed)).unwrap();
        if adjusted_rand_index(&l.labels, &truth).unwrap() == 1.0 {
            perfect += 1;
        }
    }
    report(
        4,
        "k-means properties",
        monotone && distinct && perfect >= 95,
        format!(
            "SSE non-increasing on 100 instances: {monotone}, k-means++ indices distinct: {distinct}, \
             blobs recovered exactly in {perfect}/100 seeds (single k-means++ start)"
        ),
    );
}

fn syn_workload(seed: u64) -> (CooMatrix, Vec<usize>) {
    let g = sbm_generate(&SbmConfig::new(vec![100; 20], 0.3, 0.01, seed)).unwrap();
    (g.matrix, g.labels)
}

#[test]
fn criterion_5_sbm_reproduction() {
    let t = Instant::now();
    let mut aris = Vec::new();
    for seed in 0..10 {
        let (w, truth) = syn_workload(seed);
        let r = run(&PipelineConfig::new(PipelineInput::Matrix(w), 20).with_seed(seed)).unwrap();
        aris.push(adjusted_rand_index(&r.labeling.labels, &truth).unwrap());
    }
    let elapsed = t.elapsed();
    let good = aris.iter().filter(|&&a| a >= 0.95).count();
    let shown: Vec<String> = aris.iter().map(|a| format!("{a:.4}")).collect();
    report(
        5,
        "20-block SBM, n = 2000",
        good >= 9 && elapsed < Duration::from_secs(120),
        format!("ARI >= 0.95 in {good}/10 seeds [{}], {:.1} s", shown.join(", "), elapsed.as_secs_f64()),
    );
}

/// The larger 200-block run; reported, not asserted beyond completing.
#[test]
#[ignore = "n = 20000; run with --ignored, preferably in release mode"]
fn criterion_5_optional_large_sbm() {
    let t = Instant::now();
    let g = sbm_generate(&SbmConfig::new(vec![100; 200], 0.3, 0.01, 1)).unwrap();
    let r = run(&PipelineConfig::new(PipelineInput::Matrix(g.matrix), 200).with_seed(1)).unwrap();
    let ari = adjusted_rand_index(&r.labeling.labels, &g.labels).unwrap();
    let line = format!(
        "criterion 5 optional (200-block SBM, n = 20000): completed; ARI {ari:.4}, {:.1} s (eigen {:.1} s, k-means {:.1} s)\n",
        t.elapsed().as_secs_f64(),
        r.timings.eigen.as_secs_f64(),
        r.timings.kmeans.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

#[test]
fn criterion_6_ideal_case() {
    let mut rng = rng(6006);
    let mut exact = 0;
    let mut zero_ncut = 0;
    for seed in 0..20 {
        let k = rng.random_range(2..=6);
        let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(5..=40)).collect();
        let (w, truth) = block_diagonal(&mut rng, &sizes);
        let r = run(&PipelineConfig::new(PipelineInput::Matrix(w.to_coo()), k).with_seed(seed)).unwrap();
        if adjusted_rand_index(&r.labeling.labels, &truth).unwrap() == 1.0 {
            exact += 1;
        }
        let recomputed = ncut(&w, &Partition::new(r.labeling.labels.clone(), k).unwrap()).unwrap();
        if recomputed == 0.0 && r.ncut_value == 0.0 {
            zero_ncut += 1;
        }
    }
    report(
        6,
        "ideal-case exactness",
        exact == 20 && zero_ncut == 20,
        format!("components recovered exactly in {exact}/20 seeds, ncut = 0 in {zero_ncut}/20"),
    );
}

fn extreme_value(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    match rng.random_range(0..6) {
        0 => f64::from_bits(rng.random_range(1..(1u64 << 52))), // subnormal
        1 => -0.0,
        2 => rng.random_range(-1.0..1.0) * 1e300,
        3 => rng.random_range(-1.0..1.0) * 1e-300,
        _ => rng.random_range(-1.0..1.0),
    }
}

#[test]
fn criterion_7_format_roundtrips() {
    let mut rng = rng(7007);
    let dir = tempfile::tempdir().unwrap();
    let same = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
    let mut failures = Vec::new();
    for case in 0..1000 {
        let n_rows = rng.random_range(0..=30);
        let n_cols = rng.random_range(0..=30);
        let nnz = if n_rows * n_cols == 0 { 0 } else { rng.random_range(0..=3 * (n_rows + n_cols)) };
        let t: Vec<_> = (0..nnz)
            .map(|_| (rng.random_range(0..n_rows), rng.random_range(0..n_cols), extreme_value(&mut rng)))
            .collect();
        let coo = CooMatrix::from_triplets(n_rows, n_cols, &t).unwrap().canonicalize(DupPolicy::Sum).unwrap();
        let csr = coo.to_csr().unwrap();
        let back = csr.to_coo();
        let coo_ok = back.rows() == coo.rows() && back.cols() == coo.cols() && same(back.vals(), coo.vals());
        let csr_ok = back.to_csr().unwrap() == csr && csr.validate().is_ok();

        let mut buf = Vec::new();
        io::write_coo(&mut buf, &coo).unwrap();
        let read = io::read_coo(buf.as_slice()).unwrap();
        let file_ok = read.rows() == coo.rows() && read.cols() == coo.cols() && same(read.vals(), coo.vals())
            && read.n_rows() == n_rows && read.n_cols() == n_cols;

        let (dn, dd) = (rng.random_range(1..=20), rng.random_range(1..=10));
        let dense = DenseMatrix::new(dn, dd, (0..dn * dd).map(|_| extreme_value(&mut rng)).collect()).unwrap();
        let path = dir.path().join(format!("d{}", case % 4));
        io::save_dense(&path, &dense).unwrap();
        let dense_ok = {
            let r = io::load_dense(&path).unwrap();
            r.n_rows() == dn && r.n_cols() == dd && same(r.data(), dense.data())
        };

        let labels: Vec<Option<usize>> = (0..rng.random_range(0..50))
            .map(|_| if rng.random_bool(0.1) { None } else { Some(rng.random_range(0..1_000_000)) })
            .collect();
        let mut buf = Vec::new();
        io::write_labels_opt(&mut buf, &labels).unwrap();
        let labels_ok = io::read_labels_opt(buf.as_slice()).unwrap() == labels;

        let n = rng.random_range(2..=40);
        let mut pairs: Vec<(usize, usize)> = (0..rng.random_range(0..60))
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .filter(|(i, j)| i != j)
            .collect();
        let mut seen = std::collections::BTreeSet::new();
        pairs.retain(|&(i, j)| seen.insert((i.min(j), i.max(j))));
        let e = EdgeList::new(pairs, n).unwrap();
        let mut buf = Vec::new();
        io::write_edges(&mut buf, &e).unwrap();
        let edges_ok = EdgeList::new(io::read_edges(buf.as_slice()).unwrap(), n).unwrap() == e;

        if !(coo_ok && csr_ok && file_ok && dense_ok && labels_ok && edges_ok) {
            failures.push(case);
        }
    }
    report(
        7,
        "format roundtrips",
        failures.is_empty(),
        format!("1000 instances of COO/CSR, sparse, dense, label and edge files; failing cases {failures:?}"),
    );
}

#[test]
fn criterion_8_thread_independence() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_speclust");
    let path = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    let status = Command::new(bin)
        .args(["gen-sbm", "--blocks", &vec!["100"; 20].join(","), "--p-in", "0.3", "--p-out", "0.01", "--seed", "3"])
        .args(["--matrix-out", &path("w.mtx"), "--labels-out", &path("truth.labels")])
        .output()
        .unwrap();
    assert!(status.status.success());
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let labels = path(&format!("t{threads}.labels"));
        let out = Command::new(bin)
            .args(["cluster", "--matrix", &path("w.mtx"), "--k", "20", "--seed", "3", "--threads", threads])
            .args(["--labels-out", &labels])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        let eig = stdout.lines().find(|l| l.starts_with("eigenvalues=")).unwrap().to_string();
        outputs.push((std::fs::read(&labels).unwrap(), eig));
    }
    let labels_same = outputs[0].0 == outputs[1].0;
    let eig_same = outputs[0].1 == outputs[1].1;
    report(
        8,
        "determinism across thread counts",
        labels_same && eig_same,
        format!("label files identical for --threads 1 and 8: {labels_same}, eigenvalue lines identical: {eig_same}"),
    );
}

#[test]
fn criterion_9_metric_hand_values() {
    let w = csr_from(3, &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)]);
    let p = Partition::new(vec![0, 1, 1], 2).unwrap();
    let nc = ncut(&w, &p).unwrap();
    let rc = ratio_cut(&w, &p).unwrap();
    let hand = (nc - 2.0 / 3.0).abs() <= 1e-15 && rc == 0.75;

    let mut rng = rng(9009);
    let mut invariant = true;
    for _ in 0..100 {
        let n = rng.random_range(1..=200);
        let ka = rng.random_range(1..=10);
        let kb = rng.random_range(1..=10);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        let perm = random_permutation(&mut rng, ka);
        let a2: Vec<usize> = a.iter().map(|&l| perm[l] + 7).collect();
        let base = adjusted_rand_index(&a, &b).unwrap();
        invariant &= adjusted_rand_index(&a2, &b).unwrap() == base
            && adjusted_rand_index(&a, &a2).unwrap() == 1.0;
    }
    report(
        9,
        "metric hand values",
        hand && invariant,
        format!("path split ncut {nc:?} (2/3), ratio cut {rc:?} (0.75), ARI relabel-invariant on 100 partitions: {invariant}"),
    );
}
