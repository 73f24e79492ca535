use std::path::{Path, PathBuf};

use rankkernel::clustering::{average_linkage, cut_tree, dendrogram_purity, PurityMode};
use rankkernel::dataset::{DatasetFormat, RankingDataset, Record};
use rankkernel::estimators::{
    compute_gram, draw_batches, estimate_gram_with, induced_sq_distance_matrix, EstimatorConfig,
    GramEstimate, GramOptions, Pairing, PSD_TOLERANCE,
};
use rankkernel::io::{sidecar_path, write_gram, write_json, write_matrix};
use rankkernel::mmd::permutation_test_gram;
use rankkernel::rng::{derive_seed, stream};
use rankkernel::sampling::{
    censor_topk, sample_mallows, sample_mixture_labelled, MallowsDistance, MallowsModel,
    MixtureModel,
};
use rankkernel::selfcheck::{run_selfcheck, MAX_SELFCHECK_DEGREE};
use rankkernel::{
    median_bandwidth, Distance, Error, KernelFamily, KernelSpec, PartialRanking, Permutation,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    ClusterArgs, EstimatorArgs, GramArgs, KernelArgs, MmdArgs, SampleArgs, SelfcheckArgs,
};
use crate::Failure;

const DEFAULT_EXACT_LIMIT: u64 = 100_000_000;

fn required<T: Clone>(value: &Option<T>, name: &str) -> Result<T, Failure> {
    value
        .clone()
        .ok_or_else(|| Failure::usage(format!("missing required option --{name}")))
}

fn format_of(name: &Option<String>) -> Result<DatasetFormat, Failure> {
    Ok(name.as_deref().unwrap_or("rankings-text").parse()?)
}

fn read_dataset(path: &Path, format: &Option<String>) -> Result<RankingDataset, Failure> {
    let d = RankingDataset::read(path, format_of(format)?)?;
    if d.is_empty() {
        return Err(Failure::usage(format!("{} has no records", path.display())));
    }
    Ok(d)
}

pub fn parse_distance(s: &str) -> Result<Distance, Failure> {
    let d = match s {
        "kendall" => Distance::Kendall,
        "hamming" => Distance::Hamming,
        "cayley" => Distance::Cayley,
        "footrule" | "spearman-footrule" | "spearman_footrule" => Distance::SpearmanFootrule,
        "rank-corr" | "spearman-rank-corr" | "spearman_rank_corr" => Distance::SpearmanRankCorr,
        "linf" => Distance::Linf,
        other => match other.strip_prefix("lp:").map(str::parse::<f64>) {
            Some(Ok(p)) => Distance::Lp(p),
            _ => return Err(Failure::usage(format!("unknown distance `{s}`"))),
        },
    };
    d.validate()?;
    Ok(d)
}

fn parse_permutation(s: &str) -> Result<Permutation, Failure> {
    let items = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::usage(format!("bad permutation `{s}`")))?;
    Ok(Permutation::new(items)?)
}

enum Bandwidth {
    Fixed(f64),
    Median,
}

/// Kernel spec before a `median` bandwidth has been resolved against data.
struct KernelPlan {
    spec: KernelSpec,
    bandwidth: Option<Bandwidth>,
}

fn kernel_plan(k: &KernelArgs) -> Result<KernelPlan, Failure> {
    let family = match k.kernel.as_deref().unwrap_or("mallows") {
        "kendall" => KernelFamily::Kendall,
        "mallows" => KernelFamily::Mallows,
        "polynomial" => KernelFamily::Polynomial,
        "hamming" => KernelFamily::Hamming,
        "exp-semimetric" | "exp_semimetric" => KernelFamily::ExpSemimetric,
        "distance-induced" | "distance_induced" => KernelFamily::DistanceInduced,
        other => return Err(Failure::usage(format!("unknown kernel `{other}`"))),
    };
    let uses_bandwidth = matches!(family, KernelFamily::Mallows | KernelFamily::ExpSemimetric);
    let bandwidth = match k.bandwidth.as_deref() {
        None if uses_bandwidth => Some(Bandwidth::Fixed(1.0)),
        None => None,
        Some(_) if !uses_bandwidth => {
            return Err(Failure::usage(format!("--bandwidth does not apply to {family:?}")))
        }
        Some("median") => Some(Bandwidth::Median),
        Some(v) => Some(Bandwidth::Fixed(v.parse().map_err(|_| {
            Failure::usage(format!("bandwidth must be a number or `median`, got `{v}`"))
        })?)),
    };
    let spec = KernelSpec {
        family,
        bandwidth: match bandwidth {
            Some(Bandwidth::Fixed(b)) => Some(b),
            _ => None,
        },
        degree_m: match family {
            KernelFamily::Polynomial => Some(k.degree_m.unwrap_or(2)),
            _ => k.degree_m,
        },
        base_distance: match (&k.base_distance, family) {
            (Some(d), _) => Some(parse_distance(d)?),
            (None, KernelFamily::ExpSemimetric | KernelFamily::DistanceInduced) => {
                Some(Distance::Kendall)
            }
            (None, _) => None,
        },
        center: k.center.as_deref().map(parse_permutation).transpose()?,
        scale: k.scale,
    };
    Ok(KernelPlan { spec, bandwidth })
}

/// Resolves `median` from one seeded uniform completion per ranking.
fn resolve_kernel(
    plan: KernelPlan,
    rankings: &[PartialRanking],
    seed: Option<u64>,
) -> Result<KernelSpec, Failure> {
    let mut spec = plan.spec;
    if let Some(Bandwidth::Median) = plan.bandwidth {
        let seed = seed.ok_or_else(|| Failure::usage("--bandwidth median needs --seed"))?;
        let mut rng = stream(derive_seed(seed, u64::MAX), 0);
        let completions: Vec<Permutation> =
            rankings.iter().map(|r| r.sample_uniform(&mut rng)).collect();
        let base = spec.base_distance.unwrap_or(Distance::Kendall);
        spec.bandwidth = Some(median_bandwidth(&completions, base)?);
    }
    spec.validate()?;
    Ok(spec)
}

fn estimator_config(e: &EstimatorArgs) -> Result<EstimatorConfig, Failure> {
    let samples = e.samples.unwrap_or(20);
    if samples == 0 {
        return Err(Failure::usage("--samples must be positive"));
    }
    let config = match e.estimator.as_deref().unwrap_or("antithetic") {
        "exact" => EstimatorConfig::Exact {
            limit: e.exact_limit.unwrap_or(DEFAULT_EXACT_LIMIT) as u128,
        },
        "mc" => EstimatorConfig::MonteCarlo { samples },
        "antithetic" => EstimatorConfig::Antithetic { samples },
        other => return Err(Failure::usage(format!("unknown estimator `{other}`"))),
    };
    if !matches!(config, EstimatorConfig::Exact { .. }) && e.seed.is_none() {
        return Err(Failure::usage("stochastic estimators need --seed"));
    }
    Ok(config)
}

fn gram_for(
    rankings: &[PartialRanking],
    kernel: &KernelArgs,
    estimator: &EstimatorArgs,
    exact_diagonal: bool,
) -> Result<GramEstimate, Failure> {
    let config = estimator_config(estimator)?;
    let spec = resolve_kernel(kernel_plan(kernel)?, rankings, estimator.seed)?;
    let seed = estimator.seed.unwrap_or(0);
    let limit = estimator.exact_limit.unwrap_or(DEFAULT_EXACT_LIMIT) as u128;
    let gram = match config {
        EstimatorConfig::MonteCarlo { samples } | EstimatorConfig::Antithetic { samples }
            if exact_diagonal =>
        {
            let pairing = match config {
                EstimatorConfig::MonteCarlo { .. } => Pairing::Iid,
                _ => Pairing::AntitheticPairs,
            };
            let batches = draw_batches(rankings, samples, pairing, seed)?;
            let options = GramOptions {
                exact_diagonal_limit: Some(limit),
            };
            let mut g = estimate_gram_with(&spec, &batches, options)?;
            g.seed = Some(seed);
            g
        }
        _ => compute_gram(&spec, rankings, &config, seed)?,
    };
    Ok(gram)
}

pub fn gram(a: &GramArgs) -> Result<(), Failure> {
    let input = required(&a.input, "input")?;
    let output = required(&a.output, "output")?;
    let data = read_dataset(&input, &a.format)?;
    let rankings = data.rankings();
    let g = gram_for(&rankings, &a.kernel, &a.estimator, a.exact_diagonal)?;
    let min_eig = if a.check_psd {
        Some(g.check_psd(PSD_TOLERANCE).map_err(Failure::property)?)
    } else {
        None
    };
    write_gram(&output, &g)?;
    if let Some(path) = &a.distances {
        let d = induced_sq_distance_matrix(&g);
        write_matrix(path, &d.matrix)?;
        write_json(
            &sidecar_path(path),
            &json!({ "clamp_events": d.clamp_events, "gram": output }),
        )?;
        eprintln!("distances: {} clamped entries", d.clamp_events);
    }
    println!(
        "wrote {0}x{0} {1:?} Gram matrix to {2}",
        g.dim(),
        g.estimator,
        output.display()
    );
    if let Some(l) = min_eig {
        println!("minimum eigenvalue {l:.3e} (PSD check passed)");
    }
    Ok(())
}

pub fn mmd(a: &MmdArgs) -> Result<(), Failure> {
    let x = read_dataset(&required(&a.x, "x")?, &a.format)?;
    let y = read_dataset(&required(&a.y, "y")?, &a.format)?;
    if x.degree != y.degree {
        return Err(Error::DegreeMismatch {
            left: x.degree,
            right: y.degree,
        }
        .into());
    }
    let seed = a
        .estimator
        .seed
        .ok_or_else(|| Failure::usage("mmd needs --seed for the shuffles"))?;
    let pooled: Vec<PartialRanking> = x.rankings().into_iter().chain(y.rankings()).collect();
    let g = gram_for(&pooled, &a.kernel, &a.estimator, false)?;
    let report = permutation_test_gram(&g, (x.len(), y.len()), a.shuffles.unwrap_or(199), seed)?;
    #[derive(Serialize)]
    struct Output<'a> {
        #[serde(flatten)]
        report: &'a rankkernel::mmd::MMDReport,
        kernel: &'a KernelSpec,
        samples_per_ranking: Option<usize>,
    }
    let out = Output {
        report: &report,
        kernel: &g.kernel,
        samples_per_ranking: g.samples_per_ranking.first().copied(),
    };
    if let Some(path) = &a.output {
        write_json(path, &out)?;
    }
    println!(
        "MMD² = {:.6e}, p = {:.4} ({} shuffles, m = {}, n = {}, {:?})",
        report.statistic,
        report.p_value,
        report.num_shuffles,
        report.sample_sizes.0,
        report.sample_sizes.1,
        report.estimator
    );
    Ok(())
}

pub fn cluster(a: &ClusterArgs) -> Result<(), Failure> {
    let data = read_dataset(&required(&a.input, "input")?, &a.format)?;
    let dir = required(&a.output_dir, "output-dir")?;
    let mode = match a.purity.as_deref().unwrap_or("per-class") {
        "per-class" | "per_class" => PurityMode::PerClass,
        "pooled" => PurityMode::Pooled,
        other => return Err(Failure::usage(format!("unknown purity mode `{other}`"))),
    };
    let k = a.clusters.unwrap_or(10).min(data.len());
    let g = gram_for(&data.rankings(), &a.kernel, &a.estimator, false)?;
    let dist = induced_sq_distance_matrix(&g);
    let mut tree = average_linkage(&dist.matrix)?;
    tree.labels = data.labels();
    let assignment = cut_tree(&tree, k)?;
    std::fs::create_dir_all(&dir).map_err(Error::from)?;
    write_json(&dir.join("dendrogram.json"), &tree)?;
    let mut csv = String::from("leaf,cluster,label\n");
    for (i, (c, r)) in assignment.iter().zip(&data.records).enumerate() {
        csv.push_str(&format!("{i},{c},{}\n", r.label.as_deref().unwrap_or("")));
    }
    std::fs::write(dir.join("clusters.csv"), csv).map_err(Error::from)?;
    let purity = match &tree.labels {
        Some(labels) => match dendrogram_purity(&tree, labels, mode) {
            Ok(p) => Some(p),
            Err(Error::UndefinedPurity(msg)) => {
                eprintln!("purity undefined: {msg}");
                None
            }
            Err(e) => return Err(e.into()),
        },
        None => None,
    };
    write_json(
        &dir.join("report.json"),
        &json!({
            "leaves": tree.leaves,
            "clusters": k,
            "purity": purity,
            "purity_mode": mode,
            "clamp_events": dist.clamp_events,
            "estimator": g.estimator,
            "samples_per_ranking": g.samples_per_ranking.first(),
            "seed": g.seed,
            "kernel": g.kernel,
        }),
    )?;
    match purity {
        Some(p) => println!("{} leaves, {k} clusters, dendrogram purity {p:.4}", tree.leaves),
        None => println!("{} leaves, {k} clusters", tree.leaves),
    }
    Ok(())
}

pub fn sample(a: &SampleArgs) -> Result<(), Failure> {
    let seed = required(&a.seed, "seed")?;
    let n = required(&a.degree, "degree")?;
    let count = required(&a.count, "count")?;
    let output: PathBuf = required(&a.output, "output")?;
    if n == 0 {
        return Err(Failure::usage("--degree must be positive"));
    }
    let theta = a.theta.unwrap_or(1.0);
    let mut rng = stream(seed, 0);
    let draws: Vec<(Permutation, Option<usize>)> = match a.model.as_deref().unwrap_or("mallows") {
        "mallows" => {
            let distance = match a.distance.as_deref().unwrap_or("kendall") {
                "kendall" => MallowsDistance::Kendall,
                "hamming" => MallowsDistance::Hamming,
                other => return Err(Failure::usage(format!("unknown Mallows distance `{other}`"))),
            };
            let center = match &a.center {
                Some(c) => parse_permutation(c)?,
                None => Permutation::identity(n),
            };
            if center.degree() != n {
                return Err(Failure::usage("--center must have --degree items"));
            }
            let model = MallowsModel::new(center, theta, distance)?;
            sample_mallows(&model, count, &mut rng)?.into_iter().map(|s| (s, None)).collect()
        }
        "mixture" => sample_mixture_labelled(&MixtureModel::reference(n, theta)?, count, &mut rng)?
            .into_iter()
            .map(|(s, c)| (s, Some(c)))
            .collect(),
        "uniform" => (0..count).map(|_| (Permutation::random(n, &mut rng), None)).collect(),
        other => return Err(Failure::usage(format!("unknown model `{other}`"))),
    };
    let records = draws
        .into_iter()
        .map(|(s, c)| {
            let ranking = match a.topk {
                Some(k) => censor_topk(&s, k)?,
                None => PartialRanking::from_permutation(&s),
            };
            let label = if a.label_components {
                Some(format!("c{}", c.unwrap_or(0)))
            } else {
                None
            };
            Ok(Record { ranking, label })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let data = RankingDataset::new(n, records)?;
    data.write(&output, format_of(&a.format)?)?;
    println!("wrote {count} rankings of {n} items to {}", output.display());
    Ok(())
}

pub fn selfcheck(a: &SelfcheckArgs) -> Result<(), Failure> {
    let report = run_selfcheck(a.max_degree.unwrap_or(MAX_SELFCHECK_DEGREE))?;
    for c in &report.checks {
        let status = if c.passed { "ok  " } else { "FAIL" };
        println!("{status} {} ({} cases)", c.name, c.cases);
        if let Some(x) = &c.counterexample {
            println!("     counterexample: {x}");
        }
    }
    if let Some(path) = &a.output {
        write_json(path, &report)?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::property("self-check failed"))
    }
}
