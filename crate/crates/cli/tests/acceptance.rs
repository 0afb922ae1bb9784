//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p workbench-cli --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command as Process, Stdio};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use workbench_cli as cli;
use workbench_core::cluster::{gmm_em_fit, granularity_to_n, Covariance, Limits};
use workbench_core::field::{CountingField, Field, PrimeField, Rationals};
use workbench_core::matrix::check::{check_general, check_unitriangular, Tally};
use workbench_core::matrix::sample::{all_unitriangular, random_low_rank, random_matrix, random_unitriangular, SampleField};
use workbench_core::matrix::{
    cfast_invmx, det_mx, det_seqmx, fast_invmx, fast_mult_seqmx, fast_mult_seqmx_with_cutoff, invmx, mul_seqmx,
    mulmx, rank_elim_seqmx, rank_mx, seqmx_of_mx,
};
use workbench_core::AbstractMatrix;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn granularity() -> Outcome {
    let n: Vec<usize> = (1..=5).map(|g| granularity_to_n(720, g).unwrap()).collect();
    ensure(n == [72, 80, 90, 102, 120], format!("n(720, 1..=5) = {n:?}"))
}

fn unitriangular_sample<F: SampleField>(field: &F, seed: u64) -> Vec<AbstractMatrix<F::Elem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..500)
        .map(|_| {
            let n = rng.gen_range(0..=32);
            random_unitriangular(field, n, &mut rng)
        })
        .collect()
}

fn refinement_on<F: SampleField>(field: &F) -> usize {
    unitriangular_sample(field, 2)
        .iter()
        .filter(|m| cfast_invmx(field, &seqmx_of_mx(m)) != Ok(seqmx_of_mx(&fast_invmx(field, m).unwrap())))
        .count()
}

fn refinement() -> Outcome {
    let q = refinement_on(&Rationals::new());
    let gf = refinement_on(&PrimeField::new(101).unwrap());
    ensure(q + gf == 0, format!("500 matrices per field, sizes 0..=32: mismatches Q={q} GF(101)={gf}"))
}

fn s2_on<F: SampleField>(field: &F) -> usize {
    unitriangular_sample(field, 2)
        .iter()
        .filter(|m| {
            let fast = fast_invmx(field, m).unwrap();
            invmx(field, m).as_ref() != Ok(&fast)
                || mulmx(field, m, &fast) != Ok(AbstractMatrix::identity(field, m.dim()))
        })
        .count()
}

fn s2_equivalence() -> Outcome {
    let q = s2_on(&Rationals::new());
    let gf = s2_on(&PrimeField::new(101).unwrap());
    ensure(q + gf == 0, format!("fast_invmx = invmx and M * M^-1 = I: failures Q={q} GF(101)={gf}"))
}

fn translations_on<F: SampleField>(field: &F) -> [usize; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = [0; 3];
    for case in 0..200 {
        let n = rng.gen_range(0..=16);
        let a = if case % 4 == 3 {
            let r = rng.gen_range(0..=n);
            random_low_rank(field, n, r, &mut rng)
        } else {
            random_matrix(field, n, &mut rng)
        };
        let b = random_matrix(field, n, &mut rng);
        let (sa, sb) = (seqmx_of_mx(&a), seqmx_of_mx(&b));
        failures[0] += usize::from(fast_mult_seqmx(field, &sa, &sb) != Ok(seqmx_of_mx(&mulmx(field, &a, &b).unwrap())));
        failures[1] += usize::from(det_seqmx(field, &sa) != Ok(det_mx(field, &a)));
        failures[2] += usize::from(rank_elim_seqmx(field, &sa) != Ok(rank_mx(field, &a)));
    }
    failures
}

fn translations() -> Outcome {
    let q = translations_on(&Rationals::new());
    let gf = translations_on(&PrimeField::new(101).unwrap());
    ensure(
        q.iter().chain(&gf).all(|&f| f == 0),
        format!("200 matrices per field, sizes 0..=16: failures [mul, det, rank] Q={q:?} GF(101)={gf:?}"),
    )
}

fn exhaustive() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for p in [2, 3] {
        let field = PrimeField::new(p).unwrap();
        let mut tally = Tally::default();
        let mut count = 0;
        for n in 0..=3 {
            let all = all_unitriangular(&field, n);
            count += all.len();
            for m in &all {
                check_unitriangular(&field, m, &mut tally);
                for b in &all {
                    check_general(&field, m, b, &mut tally);
                }
            }
        }
        ok &= tally.all_passed();
        let failed: usize = tally.outcomes().iter().map(|o| o.failed).sum();
        detail.push(format!("GF({p}): {count} matrices, {failed} failed checks"));
    }
    ensure(ok, detail.join("; "))
}

fn strassen() -> Outcome {
    let f = PrimeField::new(101).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut sizes = vec![0, 1, 2, 3, 5, 8, 17, 31, 32, 33, 64, 65, 100, 127, 128, 129];
    sizes.extend((0..6).map(|_| rng.gen_range(1..=129)));
    let mut mismatches = 0;
    for &n in &sizes {
        let a = seqmx_of_mx(&random_matrix(&f, n, &mut rng));
        let b = seqmx_of_mx(&random_matrix(&f, n, &mut rng));
        let naive = mul_seqmx(&f, &a, &b).unwrap();
        let cutoffs: &[usize] = if n <= 33 { &[1, 8, 64] } else { &[8, 64] };
        for &c in cutoffs {
            mismatches += usize::from(fast_mult_seqmx_with_cutoff(&f, &a, &b, c).as_ref() != Ok(&naive));
        }
    }
    let a = seqmx_of_mx(&random_matrix(&f, 512, &mut rng));
    let b = seqmx_of_mx(&random_matrix(&f, 512, &mut rng));
    let counting = CountingField::new(&f);
    fast_mult_seqmx_with_cutoff(&counting, &a, &b, 64).unwrap();
    let count = counting.multiplications();
    ensure(
        mismatches == 0 && count == 89_915_392 && count < 512u64.pow(3),
        format!(
            "{} sizes up to 129: {mismatches} mismatches; count(512, cutoff 64) = {count} (naive {})",
            sizes.len(),
            512u64.pow(3)
        ),
    )
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let parsed = <cli::Cli as clap::Parser>::try_parse_from(std::iter::once("workbench").chain(args.iter().copied()))
        .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    cli::run(parsed, &mut out).map_err(|e| e.line())?;
    Ok(String::from_utf8(out).expect("utf-8 output"))
}

fn recovery() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name).display().to_string();
    run_cli(&["fixtures", "-o", &p("fx")])?;
    run_cli(&["parse", &p("fx"), "-o", &p("corpus.json")])?;
    run_cli(&["extract", &p("corpus.json"), "-o", &p("features.csv")])?;
    let mut expected = vec!["det_seqmxP", "fast_mult_seqmxP", "rank_elim_seqmxE"];
    expected.sort();
    let mut hits = 0;
    for seed in 0..100u64 {
        let seed = seed.to_string();
        run_cli(&[
            "cluster",
            &p("features.csv"),
            "--algorithm",
            "kmeans-pp",
            "--granularity",
            "3",
            "--runs",
            "200",
            "--seed",
            &seed,
            "-o",
            &p("report.json"),
        ])?;
        let text = run_cli(&["suggest", &p("report.json"), "--lemma", "cfast_invmxP"])?;
        let mut listed: Vec<&str> = text
            .lines()
            .skip(1)
            .filter_map(|l| l.split_whitespace().next())
            .collect();
        listed.sort();
        hits += usize::from(listed == expected);
    }
    ensure(hits >= 95, format!("exact three-lemma suggestion for {hits}/100 master seeds"))
}

fn em_monotone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut violations = 0;
    for case in 0..50u64 {
        let m = rng.gen_range(2..=200);
        let d = rng.gen_range(1..=24);
        let n = rng.gen_range(1..=m.min(8));
        let centers: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let points: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let c = &centers[rng.gen_range(0..n)];
                c.iter().map(|x| x + rng.gen_range(-0.1..0.1)).collect()
            })
            .collect();
        let cov = if case % 2 == 0 { Covariance::Full } else { Covariance::Diagonal };
        let fit = gmm_em_fit(&points, n, cov, case, &Limits::default()).map_err(|e| e.to_string())?;
        for w in fit.trace.windows(2) {
            let drop = w[0] - w[1];
            worst = worst.max(drop);
            violations += usize::from(drop > 1e-9);
        }
    }
    ensure(
        violations == 0,
        format!("50 datasets: {violations} decreasing steps, largest decrease {worst:.3e}"),
    )
}

fn pipeline(bin: &str, dir: &Path, jobs: &str) -> Result<(Vec<u8>, Vec<u8>), String> {
    let run = |args: &[&str]| -> Result<(), String> {
        let status = Process::new(bin)
            .args(args)
            .env_remove(cli::SEED_ENV)
            .stdout(Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if status.success() {
            Ok(())
        } else {
            Err(format!("`workbench {}` failed: {status}", args.join(" ")))
        }
    };
    let p = |name: &str| dir.join(name).display().to_string();
    run(&["fixtures", "-o", &p("fx"), "--seed", "5"])?;
    run(&["parse", &p("fx"), "-o", &p("corpus.json")])?;
    run(&["extract", &p("corpus.json"), "-o", &p("features.csv")])?;
    run(&["cluster", &p("features.csv"), "--seed", "17", "--jobs", jobs, "-o", &p("report.json")])?;
    let read = |name: &str| std::fs::read(dir.join(name)).map_err(|e| e.to_string());
    Ok((read("features.csv")?, read("report.json")?))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_workbench");
    let mut outputs = Vec::new();
    for jobs in ["1", "1", "4", "4"] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        outputs.push(pipeline(bin, dir.path(), jobs)?);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    ensure(
        same,
        format!(
            "4 executions (jobs 1, 1, 4, 4): CSV {} bytes, report {} bytes, identical = {same}",
            outputs[0].0.len(),
            outputs[0].1.len()
        ),
    )
}

fn performance() -> Outcome {
    let f = PrimeField::new(101).unwrap();
    let m = seqmx_of_mx(&random_unitriangular(&f, 256, &mut ChaCha8Rng::seed_from_u64(10)));
    let start = Instant::now();
    let inv = cfast_invmx(&f, &m).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let check = mul_seqmx(&f, &m, &inv).unwrap();
    let identity = check.rows().iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, x)| if i == j { f.is_one(x) } else { f.is_zero(x) })
    });
    ensure(
        identity && elapsed < Duration::from_secs(5),
        format!("256x256 over GF(101) in {:.3} s, inverse verified = {identity}", elapsed.as_secs_f64()),
    )
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "granularity rule", limit: Duration::from_secs(1), run: granularity },
        Criterion { id: 2, name: "refinement equation", limit: Duration::from_secs(30), run: refinement },
        Criterion { id: 3, name: "inversion equivalence", limit: Duration::from_secs(60), run: s2_equivalence },
        Criterion { id: 4, name: "translation lemmas", limit: Duration::from_secs(30), run: translations },
        Criterion { id: 5, name: "exhaustive small fields", limit: Duration::from_secs(5), run: exhaustive },
        Criterion { id: 6, name: "strassen oracle and count", limit: Duration::from_secs(120), run: strassen },
        Criterion { id: 7, name: "planted pattern recovery", limit: Duration::from_secs(300), run: recovery },
        Criterion { id: 8, name: "EM monotonicity", limit: Duration::from_secs(60), run: em_monotone },
        Criterion { id: 9, name: "pipeline determinism", limit: Duration::from_secs(120), run: determinism },
        Criterion { id: 10, name: "desk-scale inversion", limit: Duration::from_secs(5), run: performance },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= c.limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {} s limit", c.limit.as_secs())),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "[{}] {:>2}. {:<26} {:>8.2} s  {detail}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
