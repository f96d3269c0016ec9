//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use emopair::annotation::{load_annotations, SentenceEmotion};
use emopair::diststats::{
    emotion_frequency, pair_count_histogram, pairs_in, top_k_share, FrequencyUnit,
};
use emopair::emonet::{build_cooccurrence, CountMode};
use emopair::logit::{
    fit_logistic, gradient, objective, significant_pairs, std_normal_cdf, Correction, FitConfig,
};
use emopair::pairfeat::{
    build_design_matrix, build_vocabulary, extract_pairs, DesignMatrix, PairMode,
};
use emopair::simulate::{generate_corpus, PlantedModel};
use emopair::{
    AnnotatedPost, DepressionClass, DepressionLabel, EmotionLabel, EmotionPolicy, Error,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

/// SplitMix64; keeps the suite free of an RNG dependency.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    fn uniform(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || {
        format!("took {elapsed:.2?}, limit {limit:?}")
    })?;
    Ok(elapsed)
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn emopair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emopair"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn post(id: usize, emotions: &[EmotionLabel], outcome: u8) -> AnnotatedPost {
    AnnotatedPost {
        post_id: format!("a{id}"),
        sentence_emotions: emotions
            .iter()
            .enumerate()
            .map(|(index, &emotion)| SentenceEmotion {
                index,
                emotion,
                confidence: 1.0,
            })
            .collect(),
        depression: DepressionLabel {
            class: if outcome == 1 {
                DepressionClass::Severe
            } else {
                DepressionClass::NotDepressed
            },
            confidence: 1.0,
        },
        outcome,
    }
}

/// Up to `max_posts` posts of up to six sentences over all 28 labels.
fn random_corpus(rng: &mut Rng, max_posts: usize) -> Vec<AnnotatedPost> {
    (0..1 + rng.below(max_posts))
        .map(|i| {
            let emotions: Vec<_> = (0..rng.below(7))
                .map(|_| EmotionLabel::ALL[rng.below(EmotionLabel::ALL.len())])
                .collect();
            post(i, &emotions, rng.below(2) as u8)
        })
        .collect()
}

fn closed_form_two_by_two() -> Check {
    let start = Instant::now();
    let mut rng = Rng(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let cells: Vec<usize> = (0..4).map(|_| 1 + rng.below(60)).collect();
        let (n11, n10, n01, n00) = (cells[0], cells[1], cells[2], cells[3]);
        let mut dense = Vec::new();
        let mut y = Vec::new();
        for (x, out, n) in [(1, 1, n11), (1, 0, n10), (0, 1, n01), (0, 0, n00)] {
            dense.extend(std::iter::repeat_n(vec![x], n));
            y.extend(std::iter::repeat_n(out, n));
        }
        let matrix = DesignMatrix::from_dense(&dense, y).map_err(|e| e.to_string())?;
        let fit = fit_logistic(&matrix, &FitConfig::default()).map_err(|e| e.to_string())?;
        let expected = ((n11 * n00) as f64 / (n10 * n01) as f64).ln();
        let err = (fit.feature(0).coefficient - expected).abs();
        worst = worst.max(err);
        ensure(err <= 1e-6, || {
            format!("cells {cells:?}: beta1 off by {err:e}")
        })?;
    }
    let elapsed = within_time(start, Duration::from_secs(1))?;
    Ok(format!("20 tables, max |error| {worst:.1e}, {elapsed:.2?}"))
}

fn planted_recovery() -> Check {
    let start = Instant::now();
    let model = PlantedModel::example(20_240_601);
    let nonzero = model.pairs.iter().filter(|p| p.coefficient != 0.0).count();
    ensure(model.pairs.len() == 12 && nonzero == 6, || {
        "model shape".into()
    })?;
    ensure(
        model.pairs.iter().all(|p| p.coefficient.abs() <= 1.2),
        || "coefficient range".into(),
    )?;
    let posts = generate_corpus(&model, 20_000).map_err(|e| e.to_string())?;
    let vocab = model.vocabulary(&posts);
    let matrix = build_design_matrix(&posts, &vocab, &EmotionPolicy::default())
        .map_err(|e| e.to_string())?;
    let fit = fit_logistic(&matrix, &FitConfig::default()).map_err(|e| e.to_string())?;

    let mut worst = 0.0f64;
    for (c, truth) in fit.coefficients.iter().zip(model.coefficients()) {
        let off = (c.coefficient - truth).abs() / c.std_error;
        worst = worst.max(off);
        ensure(off <= 3.0, || format!("{} off by {off:.2} SE", c.name))?;
    }
    let found: Vec<_> = significant_pairs(&fit, &vocab, 0.05, Correction::Bonferroni)
        .into_iter()
        .map(|r| r.pair)
        .collect();
    let planted: Vec<_> = model
        .pairs
        .iter()
        .filter(|p| p.coefficient != 0.0)
        .map(|p| p.pair())
        .collect();
    let errors = planted.iter().filter(|p| !found.contains(p)).count()
        + found.iter().filter(|p| !planted.contains(p)).count();
    ensure(errors <= 1, || format!("{errors} selection errors"))?;
    let elapsed = within_time(start, Duration::from_secs(30))?;
    Ok(format!(
        "max deviation {worst:.2} SE, {} selected, {errors} selection errors, {elapsed:.2?}",
        found.len()
    ))
}

fn cooccurrence_brute_force() -> Check {
    let mut rng = Rng(3);
    for round in 0..50 {
        let posts = random_corpus(&mut rng, 200);
        for include_neutral in [false, true] {
            let policy = EmotionPolicy {
                include_neutral,
                ..EmotionPolicy::default()
            };
            let matrix = build_cooccurrence(&posts, &policy, CountMode::Distinct);
            for a in EmotionLabel::ALL {
                ensure(matrix.get(a, a) == 0, || {
                    format!("corpus {round}: diagonal {a}")
                })?;
                for b in EmotionLabel::ALL {
                    ensure(matrix.get(a, b) == matrix.get(b, a), || {
                        format!("corpus {round}: asymmetric {a}-{b}")
                    })?;
                    if a == b {
                        continue;
                    }
                    let admitted = |e: EmotionLabel| include_neutral || e != EmotionLabel::Neutral;
                    let mut brute = 0;
                    for p in &posts {
                        let has = |x| {
                            p.sentence_emotions
                                .iter()
                                .any(|s| s.emotion == x && admitted(x))
                        };
                        if has(a) && has(b) {
                            brute += 1;
                        }
                    }
                    ensure(matrix.get(a, b) == brute, || {
                        format!("corpus {round}: {a}-{b} = {} vs {brute}", matrix.get(a, b))
                    })?;
                }
            }
        }
    }
    Ok("50 corpora, both neutral policies, exact".into())
}

fn distribution_properties() -> Check {
    let mut rng = Rng(4);
    let policy = EmotionPolicy::default();
    let mut checked = 0;
    for round in 0..50 {
        let posts = random_corpus(&mut rng, 200);
        for unit in [FrequencyUnit::Sentence, FrequencyUnit::PostPresence] {
            let Ok(summary) = emotion_frequency(&posts, unit, &policy) else {
                continue;
            };
            checked += 1;
            ensure(summary.cdf.windows(2).all(|w| w[0] <= w[1]), || {
                format!("corpus {round}: cdf decreases")
            })?;
            let last = *summary.cdf.last().unwrap();
            ensure((last - 1.0).abs() <= 1e-12, || {
                format!("corpus {round}: cdf ends at {last}")
            })?;
            let all = top_k_share(&summary, summary.len()).map_err(|e| e.to_string())?;
            ensure(all == 1.0, || {
                format!("corpus {round}: top-all share {all}")
            })?;
        }
        let mut expected: BTreeMap<u64, u64> = BTreeMap::new();
        for p in &posts {
            let mut distinct: Vec<_> = p
                .sentence_emotions
                .iter()
                .map(|s| s.emotion)
                .filter(|&e| e != EmotionLabel::Neutral)
                .collect();
            distinct.sort();
            distinct.dedup();
            let k = distinct.len() as u64;
            let pairs = extract_pairs(p, &policy, PairMode::Unordered).len() as u64;
            ensure(
                pairs == k * k.saturating_sub(1) / 2 && pairs == pairs_in(k),
                || format!("corpus {round}: {} has {pairs} pairs for k={k}", p.post_id),
            )?;
            *expected.entry(k * k.saturating_sub(1) / 2).or_default() += 1;
        }
        let hist = pair_count_histogram(&posts, &policy);
        ensure(hist.by_pairs == expected, || {
            format!("corpus {round}: histogram mismatch")
        })?;
    }

    // Bundled fixture: share counted by an independent script.
    let posts = load_annotations(&fixture("labeled.jsonl")).map_err(|e| e.to_string())?;
    let summary =
        emotion_frequency(&posts, FrequencyUnit::Sentence, &policy).map_err(|e| e.to_string())?;
    let share = top_k_share(&summary, 8).map_err(|e| e.to_string())?;
    let expected = 3051.0 / 4117.0;
    ensure((share - expected).abs() <= 1e-12, || {
        format!("fixture top-8 share {share}, expected {expected}")
    })?;
    Ok(format!(
        "{checked} summaries, fixture top-8 share {share:.6}"
    ))
}

fn gradient_and_normal_cdf() -> Check {
    let mut rng = Rng(5);
    let dense: Vec<Vec<u8>> = (0..400)
        .map(|_| (0..5).map(|_| (rng.uniform() < 0.3) as u8).collect())
        .collect();
    let y: Vec<u8> = (0..400).map(|_| (rng.uniform() < 0.4) as u8).collect();
    let matrix = DesignMatrix::from_dense(&dense, y).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for point in 0..10 {
        let beta: Vec<f64> = (0..6).map(|_| 4.0 * rng.uniform() - 2.0).collect();
        let analytic = gradient(&matrix, &beta, 0.0);
        for j in 0..beta.len() {
            let h = 1e-5;
            let mut up = beta.clone();
            let mut down = beta.clone();
            up[j] += h;
            down[j] -= h;
            let fd = (objective(&matrix, &up, 0.0) - objective(&matrix, &down, 0.0)) / (2.0 * h);
            let rel = (fd - analytic[j]).abs() / analytic[j].abs().max(1.0);
            worst = worst.max(rel);
            ensure(rel <= 1e-4, || {
                format!("point {point}, coordinate {j}: relative error {rel:e}")
            })?;
        }
    }
    let phi = std_normal_cdf(1.959964);
    ensure((phi - 0.975).abs() <= 1e-6, || {
        format!("Phi(1.959964) = {phi}")
    })?;
    let mut z = -12.0;
    while z <= 12.0 {
        let sum = std_normal_cdf(z) + std_normal_cdf(-z);
        ensure((sum - 1.0).abs() <= 1e-12, || {
            format!("Phi({z}) + Phi(-{z}) = {sum}")
        })?;
        z += 0.01;
    }
    Ok(format!(
        "gradient max relative error {worst:.1e}, Phi(1.959964) = {phi:.9}"
    ))
}

fn report_once(out: &Path) -> Result<PathBuf, String> {
    let input = fixture("labeled.jsonl");
    let output = emopair(&[
        "report",
        "-i",
        input.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    ensure(output.status.success(), || {
        String::from_utf8_lossy(&output.stderr).into_owned()
    })?;
    let dir = String::from_utf8_lossy(&output.stdout).trim().to_string();
    Ok(PathBuf::from(dir))
}

fn report_determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = report_once(tmp.path())?;
    let second = report_once(tmp.path())?;
    ensure(first != second, || "runs share a directory".into())?;
    let mut names: Vec<_> = fs::read_dir(&first)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    ensure(names.len() >= 8, || {
        format!("only {} artifacts", names.len())
    })?;
    for name in &names {
        let a = fs::read(first.join(name)).map_err(|e| e.to_string())?;
        let b = fs::read(second.join(name)).map_err(|e| e.to_string())?;
        ensure(a == b, || {
            format!("{} differs between runs", name.to_string_lossy())
        })?;
    }

    let results = fs::read_to_string(first.join("results.csv")).map_err(|e| e.to_string())?;
    let mut lines = results.lines();
    ensure(lines.next() == Some("pair,coef,se,z,p,odds_ratio"), || {
        "results header".into()
    })?;
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let coef: f64 = fields[1]
            .parse()
            .map_err(|_| format!("bad coef in {line}"))?;
        let or: f64 = fields[5]
            .parse()
            .map_err(|_| format!("bad odds ratio in {line}"))?;
        let rel = (or - coef.exp()).abs() / coef.exp();
        ensure(rel <= 1e-9, || {
            format!("{}: odds ratio {or} vs exp(coef) {}", fields[0], coef.exp())
        })?;
        ensure((or > 1.0) == (coef > 0.0), || {
            format!("{}: direction mismatch", fields[0])
        })?;
        rows += 1;
    }
    Ok(format!(
        "{} artifacts byte-identical, {rows} result rows",
        names.len()
    ))
}

fn error_paths() -> Check {
    let config = FitConfig::default();
    let fit_fixture = |name: &str| -> Result<Error, String> {
        let posts =
            load_annotations(&fixture(&format!("errors/{name}"))).map_err(|e| e.to_string())?;
        let policy = EmotionPolicy::default();
        let vocab =
            build_vocabulary(&posts, 1, &policy, PairMode::Unordered).map_err(|e| e.to_string())?;
        let matrix = build_design_matrix(&posts, &vocab, &policy).map_err(|e| e.to_string())?;
        fit_logistic(&matrix, &config)
            .err()
            .ok_or_else(|| format!("{name} fitted"))
    };
    for (name, kind) in [
        ("single_class.jsonl", "DegenerateOutcome"),
        ("constant_column.jsonl", "ConstantColumn"),
        ("separation.jsonl", "SeparationDetected"),
    ] {
        let err = fit_fixture(name)?;
        ensure(err.kind() == kind, || {
            format!("{name}: {} instead of {kind}", err.kind())
        })?;

        let path = fixture(&format!("errors/{name}"));
        let out = emopair(&["fit", "-i", path.to_str().unwrap(), "--min-support", "1"]);
        let stderr = String::from_utf8_lossy(&out.stderr);
        ensure(out.status.code() == Some(1), || {
            format!("{name}: exit {:?}", out.status.code())
        })?;
        ensure(
            stderr.lines().count() == 1 && stderr.starts_with(&format!("error[{kind}]")),
            || format!("{name}: stderr {stderr:?}"),
        )?;
    }

    let labeled = fixture("labeled.jsonl");
    let labeled = labeled.to_str().unwrap();
    for args in [
        vec!["fit", "--alpha", "2", "-i", labeled],
        vec!["fit", "--bogus"],
        vec!["fit"],
        vec!["stats", "-i", labeled, "--top-k", "0"],
        vec!["frobnicate"],
    ] {
        let out = emopair(&args);
        let stderr = String::from_utf8_lossy(&out.stderr);
        ensure(out.status.code() == Some(2), || {
            format!("{args:?}: exit {:?}", out.status.code())
        })?;
        ensure(
            stderr.starts_with("error[Usage]") && stderr.lines().count() == 1,
            || format!("{args:?}: stderr {stderr:?}"),
        )?;
    }
    let out = emopair(&["fit", "-i", "/nonexistent/labeled.jsonl"]);
    ensure(out.status.code() == Some(1), || {
        format!("missing input: exit {:?}", out.status.code())
    })?;
    let out = emopair(&["fit", "-i", labeled]);
    ensure(out.status.success(), || {
        format!("fixture fit: exit {:?}", out.status.code())
    })?;
    Ok(
        "3 named errors, exit 1 on pipeline errors, exit 2 on usage errors, exit 0 on success"
            .into(),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("closed-form 2x2 logistic oracle", closed_form_two_by_two),
        ("planted coefficient recovery", planted_recovery),
        (
            "co-occurrence brute-force equivalence",
            cooccurrence_brute_force,
        ),
        ("distribution properties", distribution_properties),
        ("gradient and normal CDF", gradient_and_normal_cdf),
        ("report determinism and odds ratios", report_determinism),
        ("error paths and exit codes", error_paths),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
