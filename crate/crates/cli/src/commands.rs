use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use emopair::annotation::{
    annotate_corpus, load_annotations, rebinarize, save_annotations, AnnotateOptions, Annotator,
    LexiconAnnotator, RemoteAnnotator, RemoteConfig, SegmentedPost,
};
use emopair::corpus::{load_corpus, parse_time_bound, TimeRange};
use emopair::diststats::{
    emotion_frequency, pair_count_histogram, top_k_share, DistributionSummary,
};
use emopair::emonet::{
    build_cooccurrence, matrix_to_network, node_stats, render_network, write_matrix_csv,
    NetworkFormat,
};
use emopair::logit::{
    effective_alpha, fit_logistic, fit_marginal, significant_marginal, significant_pairs,
    write_table, Coefficient, FitConfig, FitResult, SignificantPair,
};
use emopair::pairfeat::{
    build_design_matrix, build_vocabulary, default_min_support, DesignMatrix, PairMode,
    PairVocabulary,
};
use emopair::simulate::{generate_corpus, to_raw_posts, PlantedModel};
use emopair::{AnnotatedPost, EmotionPolicy, Error, SentimentMap};
use serde::Serialize;

use crate::args::*;

pub enum Failure {
    /// Bad flags; nothing was run.
    Usage(String),
    Pipeline(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Pipeline(e)
    }
}

type Outcome = Result<(), Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

fn write_with(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    write_with(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::other)?;
        writeln!(out)
    })
}

fn time_range(args: &CorpusArgs) -> Result<Option<TimeRange>, Failure> {
    if args.all_time {
        return Ok(None);
    }
    let bound = |s: &str, end| parse_time_bound(s, end).map_err(|e| usage(e.to_string()));
    let start = bound(&args.since, false)?;
    let end = bound(&args.until, true)?;
    TimeRange::new(start, end)
        .map(Some)
        .map_err(|e| usage(e.to_string()))
}

fn policy(args: &LabeledArgs) -> Result<EmotionPolicy, Failure> {
    if !(0.0..=1.0).contains(&args.min_confidence) {
        return Err(usage("--min-confidence must lie in [0, 1]"));
    }
    Ok(EmotionPolicy {
        include_neutral: args.include_neutral,
        min_confidence: args.min_confidence,
    })
}

fn load_labeled(args: &LabeledArgs) -> Result<Vec<AnnotatedPost>, Error> {
    let mut posts = load_annotations(&args.input)?;
    if let Some(policy) = args.binarize {
        rebinarize(&mut posts, policy);
    }
    Ok(posts)
}

fn fit_config(args: &FitOptions) -> Result<FitConfig, Failure> {
    let config = FitConfig {
        max_iterations: args.max_iterations,
        tolerance: args.tolerance,
        ridge: args.ridge,
        alpha: args.alpha,
        correction: args.correction,
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn sentiment_map(args: &NetworkOptions) -> Result<SentimentMap, Error> {
    match &args.sentiment_map {
        Some(path) => SentimentMap::load(path),
        None => Ok(SentimentMap::default()),
    }
}

fn pair_mode(args: &PairOptions) -> PairMode {
    if args.ordered_pairs {
        PairMode::Ordered
    } else {
        PairMode::Unordered
    }
}

fn check_pair_options(args: &PairOptions) -> Outcome {
    if args.min_support == Some(0) {
        return Err(usage("--min-support must be at least 1"));
    }
    Ok(())
}

pub fn ingest(args: IngestArgs) -> Outcome {
    let range = time_range(&args.corpus)?;
    let (posts, manifest) = load_corpus(&args.corpus.input, range)?;
    let include_title = !args.corpus.ignore_titles;

    if let Some(path) = &args.output {
        #[derive(Serialize)]
        struct Segmented<'a> {
            id: &'a str,
            created_utc: i64,
            source: &'a str,
            sentences: Vec<String>,
        }
        write_with(path, |out| {
            for post in &posts {
                let seg = SegmentedPost::new(post.clone(), include_title);
                let record = Segmented {
                    id: &post.id,
                    created_utc: post.created_utc,
                    source: &post.source,
                    sentences: seg.sentences.into_iter().map(|s| s.text).collect(),
                };
                serde_json::to_writer(&mut *out, &record).map_err(io::Error::other)?;
                writeln!(out)?;
            }
            Ok(())
        })?;
    }
    match &args.manifest {
        Some(path) => write_json(path, &manifest)?,
        None => println!(
            "{}",
            serde_json::to_string_pretty(&manifest).expect("manifest serializes")
        ),
    }
    Ok(())
}

pub fn annotate(args: AnnotateArgs) -> Outcome {
    let range = time_range(&args.corpus)?;
    if args.concurrency == 0 || args.attempts == 0 {
        return Err(usage("--concurrency and --attempts must be at least 1"));
    }
    let backend: Box<dyn Annotator> = match args.backend {
        Backend::Lexicon => match &args.rules {
            Some(rules) => Box::new(LexiconAnnotator::load(
                rules,
                args.depression_rules.as_deref(),
            )?),
            None => {
                let depression = match &args.depression_rules {
                    Some(path) => {
                        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                        emopair::annotation::parse_rules(&text)?
                    }
                    None => Vec::new(),
                };
                let identity = LexiconAnnotator::identity();
                Box::new(LexiconAnnotator::new(
                    identity.emotion_rules().to_vec(),
                    depression,
                ))
            }
        },
        Backend::Remote => {
            let endpoint = args.endpoint.clone().ok_or_else(|| {
                usage("--endpoint or EMOPAIR_ANNOTATOR_URL is required for the remote backend")
            })?;
            Box::new(RemoteAnnotator::new(RemoteConfig::new(endpoint)))
        }
    };

    let (posts, manifest) = load_corpus(&args.corpus.input, range)?;
    let include_title = !args.corpus.ignore_titles;
    let segmented: Vec<SegmentedPost> = posts
        .into_iter()
        .map(|p| SegmentedPost::new(p, include_title))
        .collect();
    let options = AnnotateOptions {
        binarization: args.binarize,
        concurrency: args.concurrency,
        attempts: args.attempts,
        ..AnnotateOptions::default()
    };
    let labeled = annotate_corpus(&segmented, backend.as_ref(), &options)?;
    save_annotations(&args.output, &labeled)?;
    println!(
        "annotated {} posts ({} sentences, {} skipped records)",
        labeled.len(),
        manifest.sentence_count,
        manifest.skipped_records
    );
    Ok(())
}

fn write_network_artifacts(
    posts: &[AnnotatedPost],
    policy: &EmotionPolicy,
    options: &NetworkOptions,
    format: NetworkFormat,
    network_path: &Path,
    matrix_path: Option<&Path>,
) -> Result<(), Error> {
    let sentiment = sentiment_map(options)?;
    let matrix = build_cooccurrence(posts, policy, options.count_mode);
    let network = matrix_to_network(&matrix, &node_stats(posts, policy), &sentiment);
    fs::write(network_path, render_network(&network, format))
        .map_err(|e| Error::io(network_path, e))?;
    if let Some(path) = matrix_path {
        write_with(path, |out| {
            write_matrix_csv(out, &matrix, options.order, &sentiment)
        })?;
    }
    Ok(())
}

pub fn network(args: NetworkArgs) -> Outcome {
    let policy = policy(&args.labeled)?;
    let posts = load_labeled(&args.labeled)?;
    write_network_artifacts(
        &posts,
        &policy,
        &args.network,
        args.format,
        &args.output,
        args.matrix_output.as_deref(),
    )?;
    Ok(())
}

fn frequency(
    posts: &[AnnotatedPost],
    policy: &EmotionPolicy,
    options: &StatsOptions,
) -> Result<(DistributionSummary, f64), Error> {
    let summary = emotion_frequency(posts, options.unit, policy)?;
    let share = top_k_share(&summary, options.top_k)?;
    Ok((summary, share))
}

pub fn stats(args: StatsArgs) -> Outcome {
    let policy = policy(&args.labeled)?;
    if args.stats.top_k == 0 {
        return Err(usage("--top-k must be at least 1"));
    }
    let posts = load_labeled(&args.labeled)?;
    let (summary, share) = frequency(&posts, &policy, &args.stats)?;
    if let Some(path) = &args.output {
        write_with(path, |out| summary.write_tsv(out))?;
    }
    if let Some(path) = &args.histogram_output {
        let hist = pair_count_histogram(&posts, &policy);
        write_with(path, |out| hist.write_tsv(out))?;
    }
    println!("posts: {}", posts.len());
    println!("emotions ranked: {}", summary.len());
    println!("top-{} share: {share}", args.stats.top_k);
    Ok(())
}

fn vocabulary(
    posts: &[AnnotatedPost],
    policy: &EmotionPolicy,
    args: &PairOptions,
) -> Result<PairVocabulary, Error> {
    let min_support = args
        .min_support
        .unwrap_or_else(|| default_min_support(posts.len()));
    build_vocabulary(posts, min_support, policy, pair_mode(args))
}

pub fn pairs(args: PairsArgs) -> Outcome {
    let policy = policy(&args.labeled)?;
    check_pair_options(&args.pairs)?;
    let posts = load_labeled(&args.labeled)?;
    let vocab = vocabulary(&posts, &policy, &args.pairs)?;
    let matrix = build_design_matrix(&posts, &vocab, &policy)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    write_with(&args.out_dir.join("matrix.csv"), |out| {
        matrix.write_triplets(out)
    })?;
    write_with(&args.out_dir.join("vocabulary.csv"), |out| {
        vocab.write_csv(out)
    })?;
    write_with(&args.out_dir.join("outcome.csv"), |out| {
        matrix.write_outcome(out)
    })?;
    println!(
        "{} posts x {} pair features",
        matrix.n_rows(),
        matrix.n_features()
    );
    Ok(())
}

/// Fit results in either joint or marginal mode.
struct Regression {
    vocabulary: PairVocabulary,
    matrix: DesignMatrix,
    table: Vec<Coefficient>,
    significant: Vec<SignificantPair>,
    metadata: Metadata,
}

#[derive(Serialize)]
struct Metadata {
    mode: &'static str,
    config: FitConfig,
    effective_alpha: f64,
    iterations: usize,
    log_likelihood: Option<f64>,
    converged: bool,
    separation_flag: bool,
    rows: usize,
    pair_columns: usize,
    min_support: usize,
    ordered_pairs: bool,
    include_neutral: bool,
    min_confidence: f64,
    significant_pairs: usize,
}

fn regress(
    posts: &[AnnotatedPost],
    policy: &EmotionPolicy,
    pair_args: &PairOptions,
    fit_args: &FitOptions,
    config: FitConfig,
) -> Result<Regression, Error> {
    // A single-class outcome is the more useful diagnosis than the empty
    // vocabulary it usually also produces.
    let ones = posts.iter().filter(|p| p.outcome == 1).count();
    if ones == 0 || ones == posts.len() {
        return Err(Error::DegenerateOutcome {
            class: u8::from(ones > 0),
        });
    }
    let vocabulary = vocabulary(posts, policy, pair_args)?;
    let matrix = build_design_matrix(posts, &vocabulary, policy)?;
    let (table, significant, mode, iterations, log_likelihood, converged, separation_flag) =
        if fit_args.marginal {
            let fits = fit_marginal(&matrix, &config)?;
            let table = fits
                .iter()
                .zip(&vocabulary.pairs)
                .map(|(f, pair)| Coefficient {
                    name: pair.to_string(),
                    ..f.feature(0).clone()
                })
                .collect();
            let significant =
                significant_marginal(&fits, &vocabulary, config.alpha, config.correction);
            (
                table,
                significant,
                "marginal",
                fits.iter().map(|f| f.iterations).sum(),
                None,
                fits.iter().all(|f| f.converged),
                fits.iter().any(|f| f.separation_flag),
            )
        } else {
            let fit: FitResult = fit_logistic(&matrix, &config)?;
            let significant = significant_pairs(&fit, &vocabulary, config.alpha, config.correction);
            (
                fit.coefficients.clone(),
                significant,
                "joint",
                fit.iterations,
                Some(fit.log_likelihood),
                fit.converged,
                fit.separation_flag,
            )
        };
    let metadata = Metadata {
        mode,
        effective_alpha: effective_alpha(config.alpha, config.correction, vocabulary.len()),
        config,
        iterations,
        log_likelihood,
        converged,
        separation_flag,
        rows: matrix.n_rows(),
        pair_columns: matrix.n_features(),
        min_support: vocabulary.min_support,
        ordered_pairs: pair_args.ordered_pairs,
        include_neutral: policy.include_neutral,
        min_confidence: policy.min_confidence,
        significant_pairs: significant.len(),
    };
    Ok(Regression {
        vocabulary,
        matrix,
        table,
        significant,
        metadata,
    })
}

fn print_significant(rows: &[SignificantPair]) {
    println!(
        "{:<28} {:>10} {:>9} {:>9} {:>11} {:>10}",
        "pair", "coef", "se", "z", "p", "odds_ratio"
    );
    for r in rows {
        let c = &r.stats;
        println!(
            "{:<28} {:>10.4} {:>9.4} {:>9.3} {:>11.3e} {:>10.3}",
            r.pair.to_string(),
            c.coefficient,
            c.std_error,
            c.z,
            c.p_value,
            c.odds_ratio
        );
    }
}

pub fn fit(args: FitArgs) -> Outcome {
    let policy = policy(&args.labeled)?;
    check_pair_options(&args.pairs)?;
    let config = fit_config(&args.fit)?;
    let posts = load_labeled(&args.labeled)?;
    let reg = regress(&posts, &policy, &args.pairs, &args.fit, config)?;
    if let Some(path) = &args.output {
        write_with(path, |out| write_table(out, &reg.table))?;
    }
    if let Some(path) = &args.significant_output {
        write_with(path, |out| {
            write_table(out, reg.significant.iter().map(|r| &r.stats))
        })?;
    }
    if let Some(path) = &args.metadata {
        write_json(path, &reg.metadata)?;
    }
    println!(
        "{} posts, {} pair features, {} significant",
        reg.matrix.n_rows(),
        reg.vocabulary.len(),
        reg.significant.len()
    );
    print_significant(&reg.significant);
    Ok(())
}

fn run_directory(base: &Path) -> Result<PathBuf, Error> {
    fs::create_dir_all(base).map_err(|e| Error::io(base, e))?;
    let stamp = chrono::Utc::now().format("run-%Y%m%dT%H%M%SZ").to_string();
    let mut candidate = base.join(&stamp);
    let mut n = 1;
    loop {
        match fs::create_dir(&candidate) {
            Ok(()) => return Ok(candidate),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                candidate = base.join(format!("{stamp}-{n}"));
                n += 1;
            }
            Err(e) => return Err(Error::io(&candidate, e)),
        }
    }
}

pub const REPORT_ARTIFACTS: [&str; 7] = [
    "frequency.tsv",
    "pair_counts.tsv",
    "matrix.csv",
    "network.graphml",
    "results.csv",
    "significant.csv",
    "metadata.json",
];

pub fn report(args: ReportArgs) -> Outcome {
    let policy = policy(&args.labeled)?;
    check_pair_options(&args.pairs)?;
    if args.stats.top_k == 0 {
        return Err(usage("--top-k must be at least 1"));
    }
    let config = fit_config(&args.fit)?;
    let posts = load_labeled(&args.labeled)?;

    // Compute everything before creating the run directory so a failing
    // stage leaves nothing behind.
    let (summary, share) = frequency(&posts, &policy, &args.stats)?;
    let hist = pair_count_histogram(&posts, &policy);
    let reg = regress(&posts, &policy, &args.pairs, &args.fit, config)?;
    let sentiment = sentiment_map(&args.network)?;

    let dir = run_directory(&args.out_dir)?;
    write_with(&dir.join("frequency.tsv"), |out| summary.write_tsv(out))?;
    write_with(&dir.join("pair_counts.tsv"), |out| hist.write_tsv(out))?;
    let matrix = build_cooccurrence(&posts, &policy, args.network.count_mode);
    write_with(&dir.join("matrix.csv"), |out| {
        write_matrix_csv(out, &matrix, args.network.order, &sentiment)
    })?;
    let network = matrix_to_network(&matrix, &node_stats(&posts, &policy), &sentiment);
    let graphml = dir.join("network.graphml");
    fs::write(&graphml, render_network(&network, NetworkFormat::GraphMl))
        .map_err(|e| Error::io(&graphml, e))?;
    write_with(&dir.join("results.csv"), |out| write_table(out, &reg.table))?;
    write_with(&dir.join("significant.csv"), |out| {
        write_table(out, reg.significant.iter().map(|r| &r.stats))
    })?;
    write_json(&dir.join("metadata.json"), &reg.metadata)?;

    #[derive(Serialize)]
    struct Manifest<'a> {
        input: String,
        posts: usize,
        top_k: usize,
        top_k_share: f64,
        artifacts: &'a [&'a str],
    }
    let input = args
        .labeled
        .input
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    write_json(
        &dir.join("manifest.json"),
        &Manifest {
            input,
            posts: posts.len(),
            top_k: args.stats.top_k,
            top_k_share: share,
            artifacts: &REPORT_ARTIFACTS,
        },
    )?;
    println!("{}", dir.display());
    Ok(())
}

pub fn simulate(args: SimulateArgs) -> Outcome {
    if args.posts == 0 {
        return Err(usage("--posts must be at least 1"));
    }
    let mut model = match &args.model {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str::<PlantedModel>(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => PlantedModel::example(args.seed),
    };
    model.seed = args.seed;
    model.validate().map_err(|e| usage(e.to_string()))?;

    let posts = generate_corpus(&model, args.posts)?;
    save_annotations(&args.output, &posts)?;
    if let Some(path) = &args.truth {
        write_json(path, &model)?;
    }
    if let Some(path) = &args.raw_output {
        write_with(path, |out| {
            for post in to_raw_posts(&posts, 1_500_000_000) {
                let record = serde_json::json!({
                    "id": post.id,
                    "created_utc": post.created_utc,
                    "title": post.title,
                    "selftext": post.body,
                    "subreddit": post.source,
                });
                writeln!(out, "{record}")?;
            }
            Ok(())
        })?;
    }
    let positives = posts.iter().filter(|p| p.outcome == 1).count();
    println!(
        "simulated {} posts ({positives} with outcome 1)",
        posts.len()
    );
    Ok(())
}
