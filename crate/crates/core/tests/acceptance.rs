//! Acceptance suite: one check per criterion, each printing a PASS/FAIL
//! line. Runs without the libtest harness so the lines always show up and
//! the timing checks never share the CPU with other tests in this binary.

mod common;

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use typerec::cluster_eval::{
    adjusted_mutual_information, adjusted_rand, class_entropy, cluster_entropy, contingency,
    expected_mutual_information, homogeneity_completeness_v, mutual_information, silhouette,
    silhouette_samples,
};
use typerec::domain::{
    default_catalog, parse_mbti, Dataset, Rating, SurveyRecord, PSYCHOLOGY, RELIGION_SPIRITUALITY,
};
use typerec::ingest::{load_dataset, type_frequencies, write_dataset};
use typerec::kmeans::{fit, init_kmeanspp, lloyd, InitMethod, KmeansConfig};
use typerec::linalg::{dot, Matrix};
use typerec::pca::fit_pca;
use typerec::recommend::build_profiles;

use common::run_cli;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure(
        (a - b).abs() <= tol,
        format!("{what}: {a} vs {b} (tol {tol:e})"),
    )
}

fn cli_ok(args: &[&str]) -> Result<String, String> {
    let (code, out, err) = run_cli(args);
    ensure(
        code == 0,
        format!("`{}` exited {code}: {err}", args.join(" ")),
    )?;
    Ok(out)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SURVEY_FREQUENCIES: [(&str, u64); 16] = [
    ("intp", 221),
    ("intj", 160),
    ("infj", 134),
    ("infp", 111),
    ("istp", 81),
    ("entp", 76),
    ("enfp", 71),
    ("istj", 65),
    ("isfj", 26),
    ("isfp", 22),
    ("entj", 17),
    ("estp", 12),
    ("enfj", 11),
    ("esfp", 5),
    ("estj", 5),
    ("esfj", 3),
];

fn dataset_shape() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("survey.csv");
    let start = Instant::now();
    cli_ok(&[
        "synth",
        "--paper-frequencies",
        "--seed",
        "1",
        "-o",
        path_str(&out),
    ])?;
    let elapsed = start.elapsed().as_secs_f64();
    let d = load_dataset(&out, &default_catalog()).map_err(|e| e.to_string())?;
    ensure(d.len() == 1020, format!("{} records", d.len()))?;
    let freq = type_frequencies(&d);
    for (code, n) in SURVEY_FREQUENCIES {
        let got = freq.get(parse_mbti(code).unwrap());
        ensure(got == n, format!("{code}: {got} != {n}"))?;
    }
    let sizes: Vec<usize> = d
        .catalog()
        .categories()
        .iter()
        .map(|c| c.genres.len())
        .collect();
    ensure(
        d.catalog().len() == 121,
        format!("{} genres", d.catalog().len()),
    )?;
    ensure(
        sizes == [30, 34, 25, 21, 11],
        format!("category sizes {sizes:?}"),
    )?;
    ensure(
        d.records().iter().all(|r| r.ratings.len() == 121),
        "ragged rating rows",
    )?;
    ensure(elapsed < 1.0, format!("synth took {elapsed:.3}s"))?;
    Ok(format!("1020 records, 121 genres, synth {elapsed:.3}s"))
}

fn metric_oracles() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let instances = 300;
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.random_range(2..=8);
        let kt = rng.random_range(1..=4);
        let kp = rng.random_range(1..=4);
        let t = common::random_labels(&mut rng, n, kt);
        let p = common::random_labels(&mut rng, n, kp);
        let ct = contingency(&t, &p).unwrap();
        let got = homogeneity_completeness_v(&ct);
        let (h, c, v) = common::hcv(&t, &p);
        let pairs = [
            (got.homogeneity, h, "homogeneity"),
            (got.completeness, c, "completeness"),
            (got.v_measure, v, "v-measure"),
            (
                mutual_information(&ct),
                common::mutual_information(&t, &p),
                "MI",
            ),
            (
                adjusted_rand(&ct).unwrap(),
                common::ari_pairs(&t, &p),
                "ARI",
            ),
        ];
        for (a, b, what) in pairs {
            worst = worst.max((a - b).abs());
            close(a, b, 1e-9, &format!("{what} on {t:?}/{p:?}"))?;
        }
    }
    Ok(format!("{instances} instances, max deviation {worst:.1e}"))
}

fn exact_emi() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..40 {
        let n = rng.random_range(2..=7);
        let t = {
            let k = rng.random_range(1..=3);
            common::random_labels(&mut rng, n, k)
        };
        let p = {
            let k = rng.random_range(1..=3);
            common::random_labels(&mut rng, n, k)
        };
        let emi = expected_mutual_information(&contingency(&t, &p).unwrap());
        let oracle = common::permutation_emi(&t, &p);
        worst = worst.max((emi - oracle).abs());
        close(emi, oracle, 1e-6, &format!("E[MI] on {t:?}/{p:?}"))?;
    }
    let trials = 500;
    let mut sum = 0.0;
    for _ in 0..trials {
        let t = common::random_labels(&mut rng, 60, 4);
        let p = common::random_labels(&mut rng, 60, 5);
        sum += adjusted_mutual_information(&contingency(&t, &p).unwrap()).unwrap();
    }
    let mean = sum / trials as f64;
    close(mean, 0.0, 0.02, "mean AMI of random labelings")?;
    Ok(format!(
        "E[MI] max deviation {worst:.1e}; mean chance AMI {mean:+.4}"
    ))
}

fn survey_dataset(seed: u64) -> Dataset {
    typerec::ingest::generate_synthetic(&typerec::ingest::SynthConfig::survey(seed)).unwrap()
}

fn perfect_clustering() -> Check {
    let d = survey_dataset(4);
    let truth = d.labels();
    let pred: Vec<usize> = truth.iter().map(|t| t.index()).collect();
    let ct = contingency(&truth, &pred).unwrap();
    let hcv = homogeneity_completeness_v(&ct);
    for (v, what) in [
        (hcv.homogeneity, "homogeneity"),
        (hcv.completeness, "completeness"),
        (hcv.v_measure, "v-measure"),
        (adjusted_rand(&ct).unwrap(), "ARI"),
        (adjusted_mutual_information(&ct).unwrap(), "AMI"),
    ] {
        close(v, 1.0, 1e-12, what)?;
    }
    Ok("all five scores equal 1".into())
}

fn metric_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut identity_checks = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=60);
        let t = {
            let k = rng.random_range(1..=6);
            common::random_labels(&mut rng, n, k)
        };
        let p = {
            let k = rng.random_range(1..=6);
            common::random_labels(&mut rng, n, k)
        };
        let ct = contingency(&t, &p).unwrap();
        let hc = class_entropy(&ct);
        let hk = cluster_entropy(&ct);
        let mi = mutual_information(&ct);
        let s = homogeneity_completeness_v(&ct);
        if hc + hk > 0.0 {
            close(s.v_measure, 2.0 * mi / (hc + hk), 1e-12, "V identity")?;
            identity_checks += 1;
        }
        let ari = adjusted_rand(&ct).unwrap();
        let ami = adjusted_mutual_information(&ct).unwrap();
        let emi = expected_mutual_information(&ct);
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        ensure(
            unit(s.homogeneity) && unit(s.completeness) && unit(s.v_measure),
            "h/c/v out of [0,1]",
        )?;
        ensure((-1.0..=1.0).contains(&ari), format!("ARI {ari}"))?;
        ensure(mi >= 0.0 && mi <= hc.min(hk) + 1e-12, format!("MI {mi}"))?;
        ensure(
            emi >= -1e-12 && emi <= hc.min(hk) + 1e-12,
            format!("E[MI] {emi}"),
        )?;
        ensure(ami.is_finite() && ami <= 1.0, format!("AMI {ami}"))?;
        if p.iter().any(|&x| x != p[0]) {
            let pts = common::random_rows(&mut rng, n, 2);
            let sil = silhouette(&common::matrix(&pts), &p).unwrap();
            ensure((-1.0..=1.0).contains(&sil), format!("silhouette {sil}"))?;
        }
    }
    Ok(format!(
        "identity on {identity_checks} instances; ranges on 1000 fuzzed inputs"
    ))
}

fn silhouette_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let n = rng.random_range(3..=200);
        let d = rng.random_range(1..=5);
        let pts = common::random_rows(&mut rng, n, d);
        let mut labels = {
            let k = rng.random_range(2..=6);
            common::random_labels(&mut rng, n, k)
        };
        labels[0] = 0;
        labels[1] = 1;
        let got = silhouette_samples(&common::matrix(&pts), &labels).unwrap();
        let want = common::silhouette_direct(&pts, &labels);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
            close(*g, *w, 1e-12, "silhouette sample")?;
        }
        let mean = want.iter().sum::<f64>() / n as f64;
        close(
            silhouette(&common::matrix(&pts), &labels).unwrap(),
            mean,
            1e-12,
            "silhouette mean",
        )?;
    }
    let fixture = Matrix::from_rows(&[[0.0], [0.1], [10.0], [10.1]]).unwrap();
    let s = silhouette(&fixture, &[0, 0, 1, 1]).unwrap();
    ensure(s >= 0.98, format!("1-D fixture scored {s}"))?;
    Ok(format!("max deviation {worst:.1e}; fixture {s:.4}"))
}

fn kmeans_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for run in 0..100 {
        let n = rng.random_range(5..=80);
        let d = rng.random_range(1..=6);
        let k = rng.random_range(1..=n.min(8));
        let data = common::matrix(&common::random_rows(&mut rng, n, d));
        let cfg = KmeansConfig {
            tol: 0.0,
            ..KmeansConfig::new(k, run)
        };
        let init = init_kmeanspp(&data, k, run).unwrap();
        let r = lloyd(&data, &init, &cfg).unwrap();
        for w in r.inertia_history.windows(2) {
            ensure(
                w[1] <= w[0] * (1.0 + 1e-12) + 1e-12,
                format!("run {run}: inertia rose {} -> {}", w[0], w[1]),
            )?;
        }
    }

    let square = vec![
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
    ];
    let best = common::best_bipartition_sse(&square);
    ensure(best == 1.0, format!("enumeration optimum {best}"))?;
    let r = fit(&common::matrix(&square), &KmeansConfig::new(2, 0)).unwrap();
    ensure(
        r.inertia == 1.0,
        format!("square fixture inertia {}", r.inertia),
    )?;

    let (blobs, _) = common::planted_blobs(&mut rng, 20, 5);
    let mean_inertia = |init: InitMethod| -> f64 {
        (0..30u64)
            .map(|seed| {
                let cfg = KmeansConfig {
                    init,
                    restarts: 1,
                    ..KmeansConfig::new(16, seed)
                };
                fit(&blobs, &cfg).unwrap().inertia
            })
            .sum::<f64>()
            / 30.0
    };
    let pp = mean_inertia(InitMethod::KmeansPlusPlus);
    let random = mean_inertia(InitMethod::Random);
    ensure(
        pp <= random,
        format!("kmeans++ {pp:.2} > random {random:.2}"),
    )?;
    Ok(format!(
        "monotone on 100 runs; square 1.0; blobs kmeans++ {pp:.1} vs random {random:.1}"
    ))
}

fn pca_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let shapes = [(50, 20), (50, 20), (50, 20), (50, 20), (50, 20), (10, 4)];
    for (n, d) in shapes {
        let rows = common::random_rows(&mut rng, n, d);
        let model = fit_pca(&common::matrix(&rows), d).unwrap();
        for i in 0..d {
            for j in 0..d {
                let g = dot(model.components.row(i), model.components.row(j));
                close(g, if i == j { 1.0 } else { 0.0 }, 1e-9, "component gram")?;
            }
        }
        let (values, vectors) = common::jacobi_max_pivot(&common::covariance(&rows));
        for i in 0..d {
            let ev = model.explained_variance[i];
            worst = worst.max((ev - values[i]).abs());
            close(ev, values[i], 1e-6, &format!("eigenvalue {i}"))?;
            let c = model.components.row(i);
            let sign = if dot(c, &vectors[i]) < 0.0 { -1.0 } else { 1.0 };
            for (a, b) in c.iter().zip(&vectors[i]) {
                worst = worst.max((a - sign * b).abs());
                close(*a, sign * b, 1e-6, &format!("eigenvector {i}"))?;
            }
        }
    }
    let line: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, 2.0 * i as f64 - 3.0]).collect();
    let model = fit_pca(&Matrix::from_rows(&line).unwrap(), 2).unwrap();
    let second = model.explained_variance[1];
    ensure(
        second.abs() <= 1e-12,
        format!("collinear second variance {second:e}"),
    )?;
    Ok(format!(
        "max deviation {worst:.1e}; collinear second variance {second:.1e}"
    ))
}

fn table_pipeline() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("survey.csv");
    let report = dir.path().join("report.csv");
    cli_ok(&[
        "synth",
        "--paper-frequencies",
        "--seed",
        "9",
        "-o",
        path_str(&data),
    ])?;
    let start = Instant::now();
    cli_ok(&[
        "evaluate",
        "--input",
        path_str(&data),
        "--seed",
        "9",
        "-o",
        path_str(&report),
    ])?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut rdr = csv::Reader::from_path(&report).map_err(|e| e.to_string())?;
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let metrics = [
        "time",
        "homo",
        "compl",
        "v-meas",
        "ARI",
        "AMI",
        "Silhouette",
    ];
    ensure(
        header[..2] == ["category", "method"] && header[2..] == metrics,
        format!("header {header:?}"),
    )?;
    let rows: Vec<csv::StringRecord> = rdr
        .records()
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(rows.len() == 15, format!("{} rows", rows.len()))?;
    let cats = [
        "fiction-books",
        "nonfiction-books",
        "music",
        "movies",
        "video-games",
    ];
    let methods = ["kmeans++", "random", "pca-based"];
    for (i, row) in rows.iter().enumerate() {
        ensure(row.len() == 9, format!("row {i} has {} fields", row.len()))?;
        ensure(
            row[0] == *cats[i / 3] && row[1] == *methods[i % 3],
            format!("row {i} is {}/{}", &row[0], &row[1]),
        )?;
        for f in row.iter().skip(2) {
            f.parse::<f64>()
                .map_err(|_| format!("row {i}: {f:?} is not numeric"))?;
        }
    }
    ensure(elapsed <= 5.0, format!("evaluate took {elapsed:.2}s"))?;
    Ok(format!("15 rows in {elapsed:.2}s"))
}

fn recommendation_behavior() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut d = survey_dataset(10);
    let intp = parse_mbti("intp").unwrap();
    let profiles = build_profiles(&d);
    let cat = d.catalog();
    let (psy, rel) = (
        cat.index_of(PSYCHOLOGY).unwrap(),
        cat.index_of(RELIGION_SPIRITUALITY).unwrap(),
    );
    let p = &profiles.get(intp).unwrap().genres;
    let (mp, mr) = (p[psy].mean_nonzero.unwrap(), p[rel].mean_nonzero.unwrap());
    ensure(
        mp > mr,
        format!("planted means not separated: {mp:.3} vs {mr:.3}"),
    )?;

    let mut records = d.records().to_vec();
    records.push(SurveyRecord {
        respondent_id: "cold_start".into(),
        mbti: intp,
        ratings: vec![Rating::NO_EXPERIENCE; cat.len()],
    });
    d = Dataset::new(cat.clone(), records).map_err(|e| e.to_string())?;
    let path = dir.path().join("survey.csv");
    let file = std::fs::File::create(&path).map_err(|e| e.to_string())?;
    write_dataset(file, &d).map_err(|e| e.to_string())?;
    let input = path_str(&path);

    let typed = cli_ok(&[
        "recommend",
        "--input",
        input,
        "--type",
        "intp",
        "--top",
        "121",
        "--format",
        "json",
    ])?;
    let typed: serde_json::Value = serde_json::from_str(&typed).map_err(|e| e.to_string())?;
    let genres: Vec<&str> = typed["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["genre"].as_str().unwrap())
        .collect();
    let rank = |g: &str| genres.iter().position(|x| *x == g);
    let (rp, rr) = (rank(PSYCHOLOGY), rank(RELIGION_SPIRITUALITY));
    ensure(
        matches!((rp, rr), (Some(a), Some(b)) if a < b),
        format!("Psychology at {rp:?}, Religion & Spirituality at {rr:?}"),
    )?;

    let cold = cli_ok(&[
        "recommend",
        "--input",
        input,
        "--user-row",
        "cold_start",
        "--top",
        "121",
        "--format",
        "json",
    ])?;
    let cold: serde_json::Value = serde_json::from_str(&cold).map_err(|e| e.to_string())?;
    ensure(
        cold["items"] == typed["items"],
        "cold-start ranking differs from type profile",
    )?;
    Ok(format!(
        "Psychology rank {} ({mp:.2}) above Religion & Spirituality rank {} ({mr:.2}); cold start identical",
        rp.unwrap() + 1,
        rr.unwrap() + 1
    ))
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("survey.csv");
    cli_ok(&[
        "synth",
        "--paper-frequencies",
        "--seed",
        "11",
        "-o",
        path_str(&data),
    ])?;
    let input = path_str(&data);
    let commands: Vec<(&str, Vec<&str>)> = vec![
        (
            "synth.csv",
            vec!["synth", "--paper-frequencies", "--seed", "11"],
        ),
        (
            "cluster_pp.csv",
            vec!["cluster", "--input", input, "--seed", "3", "--no-timing"],
        ),
        (
            "cluster_rand.json",
            vec![
                "cluster",
                "--input",
                input,
                "--seed",
                "3",
                "--init",
                "random",
                "--no-timing",
            ],
        ),
        (
            "cluster_pca.json",
            vec![
                "cluster",
                "--input",
                input,
                "--seed",
                "3",
                "--pca-dims",
                "2",
                "--no-timing",
            ],
        ),
        (
            "evaluate.csv",
            vec!["evaluate", "--input", input, "--seed", "3", "--no-timing"],
        ),
        (
            "evaluate.json",
            vec![
                "evaluate",
                "--input",
                input,
                "--seed",
                "3",
                "--no-timing",
                "--restarts",
                "3",
            ],
        ),
        (
            "scatter.csv",
            vec![
                "scatter",
                "--input",
                input,
                "--seed",
                "3",
                "--dims",
                "3",
                "--with-clusters",
                "16",
            ],
        ),
        (
            "recommend.json",
            vec!["recommend", "--input", input, "--type", "infj"],
        ),
        (
            "pair.csv",
            vec![
                "pairtable",
                "--input",
                input,
                "--type",
                "intp",
                "--genre-a",
                PSYCHOLOGY,
                "--genre-b",
                RELIGION_SPIRITUALITY,
            ],
        ),
        ("freq.csv", vec!["freq", "--input", input]),
    ];
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{run}_{name}"));
            let mut argv = args.clone();
            argv.extend(["-o", path_str(&out)]);
            cli_ok(&argv)?;
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure(!outputs[0].is_empty(), format!("{name}: empty output"))?;
        ensure(
            outputs[0] == outputs[1],
            format!("{name}: outputs differ between runs"),
        )?;
    }
    Ok(format!(
        "{} subcommand outputs byte-identical",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("dataset shape fidelity", dataset_shape),
        ("metric oracle equivalence", metric_oracles),
        ("exact E[MI] and chance-level AMI", exact_emi),
        ("perfect-clustering fixture", perfect_clustering),
        ("metric identities and ranges", metric_identities),
        ("silhouette oracle", silhouette_oracle),
        ("k-means correctness", kmeans_correctness),
        ("PCA correctness", pca_correctness),
        ("evaluation table shape and timing", table_pipeline),
        ("recommendation behavior", recommendation_behavior),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2}: {name} ({detail})", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {:>2}: {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
