use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use super::farthest::farthest_first;
use super::gmm::{gmm_em, Covariance};
use super::kmeans::{kmeans, KMeansInit};
use super::{check_input, granularity_to_n, AlgorithmKind, ClusterError, ClusterParams, Limits, Partition, Real};
use crate::features::FeatureTable;

/// Seed of run `run`: the `(run + 1)`-th output of SplitMix64 started at
/// `master`.
pub fn derive_seed(master: u64, run: u64) -> u64 {
    let mut z = master.wrapping_add(run.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn cluster_once<T: Real>(
    points: &[Vec<T>],
    n: usize,
    algorithm: AlgorithmKind,
    seed: u64,
    limits: &Limits,
) -> Result<Partition<T>, ClusterError> {
    match algorithm {
        AlgorithmKind::KmeansPp => kmeans(points, n, KMeansInit::PlusPlus, seed, limits),
        AlgorithmKind::KmeansRandom => kmeans(points, n, KMeansInit::Random, seed, limits),
        AlgorithmKind::GmmFull => gmm_em(points, n, Covariance::Full, seed, limits),
        AlgorithmKind::GmmDiag => gmm_em(points, n, Covariance::Diagonal, seed, limits),
        AlgorithmKind::FarthestFirst => farthest_first(points, n, seed),
    }
}

fn round3<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64((x * 1000.0).round() / 1000.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCluster {
    pub lemmas: Vec<String>,
    #[serde(serialize_with = "round3")]
    pub frequency: f64,
    #[serde(serialize_with = "round3")]
    pub proximity: f64,
}

/// Identifies the feature table a report was computed from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFingerprint {
    pub lemmas: Vec<String>,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    #[serde(flatten)]
    pub settings: ClusterParams,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub params: ReportParams,
    pub corpus: CorpusFingerprint,
    pub clusters: Vec<ReportCluster>,
}

impl ClusterReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Tallies runs given as `(member indices, proximity)` per cluster into
/// filtered, sorted report entries. The result does not depend on the
/// order of `runs`.
pub fn tally(
    names: &[String],
    runs: &[Vec<(Vec<usize>, f64)>],
    freq_threshold: f64,
    prox_threshold: f64,
) -> Vec<ReportCluster> {
    let mut counts: BTreeMap<Vec<String>, (usize, f64)> = BTreeMap::new();
    for run in runs {
        for (members, prox) in run {
            let mut set: Vec<String> = members.iter().map(|&i| names[i].clone()).collect();
            set.sort();
            counts.entry(set).or_insert((0, *prox)).0 += 1;
        }
    }
    let total = runs.len() as f64;
    let mut out: Vec<ReportCluster> = counts
        .into_iter()
        .map(|(lemmas, (count, proximity))| ReportCluster {
            lemmas,
            frequency: count as f64 / total,
            proximity,
        })
        .filter(|c| c.frequency >= freq_threshold && c.proximity >= prox_threshold)
        .collect();
    out.sort_by(|a, b| {
        b.frequency
            .total_cmp(&a.frequency)
            .then(b.proximity.total_cmp(&a.proximity))
            .then_with(|| a.lemmas.cmp(&b.lemmas))
    });
    out
}

/// Runs the chosen back end `params.runs` times with derived seeds and
/// aggregates exact lemma sets. `jobs > 1` spreads runs over that many
/// threads; the report is identical either way.
pub fn run_repeated(table: &FeatureTable, params: &ClusterParams, jobs: usize) -> Result<ClusterReport, ClusterError> {
    params.validate()?;
    let n = granularity_to_n(table.len(), params.granularity)?;
    check_input(&table.rows, n)?;
    let limits = params.limits();
    let one = |i: usize| {
        let seed = derive_seed(params.master_seed, i as u64);
        cluster_once(&table.rows, n, params.algorithm, seed, &limits)
            .map(|p| p.members().into_iter().zip(p.proximity).collect::<Vec<_>>())
    };
    let runs: Vec<Vec<(Vec<usize>, f64)>> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| ClusterError::InvalidParams(e.to_string()))?;
        pool.install(|| (0..params.runs).into_par_iter().map(one).collect::<Result<_, _>>())?
    } else {
        (0..params.runs).map(one).collect::<Result<_, _>>()?
    };
    Ok(ClusterReport {
        params: ReportParams {
            settings: *params,
            n,
        },
        corpus: CorpusFingerprint {
            lemmas: table.lemma_names.clone(),
            sha256: table.digest(),
        },
        clusters: tally(&table.lemma_names, &runs, params.freq_threshold, params.prox_threshold),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suggestion {
    /// The other members of a cluster containing the query lemma.
    pub lemmas: Vec<String>,
    pub frequency: f64,
    pub proximity: f64,
}

/// Report clusters containing `lemma`, in report order, without the query
/// itself. Clusters where it stands alone contribute nothing.
pub fn suggest(report: &ClusterReport, lemma: &str) -> Result<Vec<Suggestion>, ClusterError> {
    if !report.corpus.lemmas.iter().any(|l| l == lemma) {
        return Err(ClusterError::UnknownLemma(lemma.to_string()));
    }
    Ok(report
        .clusters
        .iter()
        .filter(|c| c.lemmas.iter().any(|l| l == lemma) && c.lemmas.len() > 1)
        .map(|c| Suggestion {
            lemmas: c.lemmas.iter().filter(|l| *l != lemma).cloned().collect(),
            frequency: c.frequency,
            proximity: c.proximity,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::ExtractionConfig;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(rows: Vec<Vec<f64>>) -> FeatureTable {
        FeatureTable {
            lemma_names: (0..rows.len()).map(|i| format!("l{i:02}")).collect(),
            rows,
            config: ExtractionConfig::with_steps(1),
        }
    }

    fn blobs() -> FeatureTable {
        // two tight groups of ten
        let rows = (0..20)
            .map(|i| {
                let base = if i < 10 { 0.1 } else { 0.8 };
                let jitter = (i % 10) as f64 * 0.001;
                let mut r = vec![base + jitter; 8];
                r[0] = base;
                r
            })
            .collect();
        table(rows)
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }

    #[test]
    fn stable_partition_gives_frequency_one() {
        let t = blobs();
        let params = ClusterParams {
            granularity: 1,
            runs: 20,
            ..Default::default()
        };
        for algorithm in AlgorithmKind::ALL {
            let r = run_repeated(&t, &ClusterParams { algorithm, ..params }, 1).unwrap();
            assert_eq!(r.params.n, 2);
            assert_eq!(r.clusters.len(), 2, "{algorithm}");
            assert!(r.clusters.iter().all(|c| c.frequency == 1.0 && c.lemmas.len() == 10));
        }
    }

    #[test]
    fn single_run_frequencies_are_one() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i * 7 % 11) as f64 / 11.0; 8]).collect();
        let params = ClusterParams {
            runs: 1,
            prox_threshold: 0.0,
            ..Default::default()
        };
        let r = run_repeated(&table(rows), &params, 1).unwrap();
        assert!(!r.clusters.is_empty());
        assert!(r.clusters.iter().all(|c| c.frequency == 1.0));
    }

    #[test]
    fn all_singletons_when_n_equals_points() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 / 6.0; 8]).collect();
        // L = 6, g = 5 gives n = 1; use the engine directly for n = L
        for algorithm in AlgorithmKind::ALL {
            let p = cluster_once(&rows, 6, algorithm, 9, &Limits::default()).unwrap();
            assert!(p.members().iter().all(|m| m.len() == 1), "{algorithm}");
        }
        let names: Vec<String> = (0..6).map(|i| i.to_string()).collect();
        let runs: Vec<_> = (0..5)
            .map(|s| {
                let p = cluster_once(&rows, 6, AlgorithmKind::KmeansRandom, s, &Limits::default()).unwrap();
                p.members().into_iter().zip(p.proximity).collect::<Vec<_>>()
            })
            .collect();
        let report = tally(&names, &runs, 0.6, 0.5);
        assert_eq!(report.len(), 6);
        assert!(report.iter().all(|c| c.lemmas.len() == 1 && c.frequency == 1.0));
    }

    #[test]
    fn tally_ignores_run_order() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![((i * 13) % 17) as f64 / 17.0, (i % 5) as f64 / 5.0]).collect();
        let names: Vec<String> = (0..40).map(|i| format!("n{i}")).collect();
        let mut runs: Vec<_> = (0..50)
            .map(|s| {
                let p = cluster_once(&rows, 5, AlgorithmKind::KmeansPp, derive_seed(1, s), &Limits::default()).unwrap();
                p.members().into_iter().zip(p.proximity).collect::<Vec<_>>()
            })
            .collect();
        let base = tally(&names, &runs, 0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            runs.shuffle(&mut rng);
            assert_eq!(tally(&names, &runs, 0.0, 0.0), base);
        }
        for w in base.windows(2) {
            assert!(w[0].frequency >= w[1].frequency);
        }
    }

    #[test]
    fn deterministic_and_parallel_safe() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![((i * 13) % 17) as f64 / 17.0; 8]).collect();
        let t = table(rows);
        for algorithm in AlgorithmKind::ALL {
            let params = ClusterParams {
                algorithm,
                runs: 16,
                master_seed: 3,
                freq_threshold: 0.0,
                prox_threshold: 0.0,
                ..Default::default()
            };
            let a = run_repeated(&t, &params, 1).unwrap().to_json();
            assert_eq!(a, run_repeated(&t, &params, 1).unwrap().to_json());
            assert_eq!(a, run_repeated(&t, &params, 4).unwrap().to_json());
        }
    }

    #[test]
    fn precondition_errors() {
        let t = table(vec![]);
        assert!(matches!(
            run_repeated(&t, &ClusterParams::default(), 1),
            Err(ClusterError::TooFewPoints { .. })
        ));
        let p = ClusterParams {
            granularity: 6,
            ..Default::default()
        };
        assert_eq!(run_repeated(&blobs(), &p, 1), Err(ClusterError::BadGranularity(6)));
    }

    #[test]
    fn json_rounds_scores() {
        let report = ClusterReport {
            params: ReportParams {
                settings: ClusterParams::default(),
                n: 3,
            },
            corpus: CorpusFingerprint {
                lemmas: vec!["a".into()],
                sha256: "00".into(),
            },
            clusters: vec![ReportCluster {
                lemmas: vec!["a".into()],
                frequency: 0.8154,
                proximity: 2.0 / 3.0,
            }],
        };
        let json = report.to_json();
        assert!(json.contains("\"frequency\": 0.815"));
        assert!(json.contains("\"proximity\": 0.667"));
        assert!(json.contains("\"masterSeed\": 0"));
        assert!(json.contains("\"algorithm\": \"kmeans-pp\""));
        let back: ClusterReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.params, report.params);
        assert_eq!(back.clusters[0].frequency, 0.815);
    }

    #[test]
    fn suggestions() {
        let lemmas: Vec<String> = ["a", "b", "c", "d", "e", "z"].iter().map(|s| s.to_string()).collect();
        let cluster = |ls: &[&str], f| ReportCluster {
            lemmas: ls.iter().map(|s| s.to_string()).collect(),
            frequency: f,
            proximity: 0.9,
        };
        let report = ClusterReport {
            params: ReportParams {
                settings: ClusterParams::default(),
                n: 2,
            },
            corpus: CorpusFingerprint {
                lemmas,
                sha256: String::new(),
            },
            clusters: vec![cluster(&["a", "b", "c", "d"], 0.9), cluster(&["e"], 1.0)],
        };
        let s = suggest(&report, "a").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].lemmas, ["b", "c", "d"]);
        assert!(suggest(&report, "e").unwrap().is_empty());
        assert!(suggest(&report, "z").unwrap().is_empty());
        assert_eq!(suggest(&report, "q"), Err(ClusterError::UnknownLemma("q".into())));
    }
}
