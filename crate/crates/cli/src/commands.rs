use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use croann::data::{file_sha256, parse_csv, RawDataset, SplitCounts};
use croann::stats::Stats;
use croann::trainer::{run_trials, trial_seed, Execution, ProgressRecord, TrialSet};

use crate::config::{parse_pairs, RunConfig, SWEEPABLE};
use crate::reference;
use crate::CliError;

pub const SUMMARY_CSV: &str = "summary.csv";
pub const TRIALS_CSV: &str = "trials.csv";
pub const PROGRESS_CSV: &str = "progress.csv";
pub const MANIFEST: &str = "manifest.txt";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const REPORT_MD: &str = "report.md";

/// Command-line overrides shared by `train` and `sweep`.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Loaded and checked dataset for one run.
struct Prepared {
    raw: RawDataset,
    counts: SplitCounts,
    sha256: String,
}

fn prepare(config: &mut RunConfig) -> Result<Prepared, CliError> {
    let path = &config.dataset.path;
    if !path.is_file() {
        return Err(CliError::Io {
            path: path.clone(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "dataset file not found"),
        });
    }
    let sha256 = file_sha256(path)?;
    if let Some(expected) = &config.dataset.sha256 {
        if !expected.eq_ignore_ascii_case(&sha256) {
            return Err(CliError::Config(format!(
                "{} has sha256 {sha256}, expected {expected}",
                path.display()
            )));
        }
    }
    config.dataset.sha256 = Some(sha256.clone());
    config.dataset.path = fs::canonicalize(path).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e,
    })?;
    let raw = parse_csv(&config.dataset.path, &config.dataset.schema)?;
    let counts = config.dataset.counts.fit_to(raw.len())?;
    Ok(Prepared {
        raw,
        counts,
        sha256,
    })
}

fn apply_overrides(config: &mut RunConfig, o: &Overrides, command: &str) -> PathBuf {
    if let Some(seed) = o.seed {
        config.seed = seed;
    }
    let out = o
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| {
            PathBuf::from("runs").join(format!(
                "{}-{}-{}",
                config.dataset.name,
                command,
                now_millis()
            ))
        });
    let out = std::path::absolute(&out).unwrap_or(out);
    config.out = Some(out.clone());
    out
}

fn now_millis() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis())
}

fn trials(
    config: &RunConfig,
    data: &Prepared,
    jobs: Option<usize>,
    progress: &Mutex<Vec<ProgressRecord>>,
) -> Result<TrialSet, CliError> {
    let settings = config.settings(data.raw.n_attributes(), data.raw.n_classes());
    let sink = |r: &ProgressRecord| progress.lock().unwrap().push(*r);
    let run = || {
        run_trials(
            &data.raw,
            data.counts,
            &settings,
            config.trials,
            config.seed,
            Execution::Parallel,
            &sink,
        )
    };
    Ok(with_jobs(jobs, run)?)
}

#[cfg(feature = "parallel")]
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("failed to build thread pool")
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<T>(_jobs: Option<usize>, f: impl FnOnce() -> T) -> T {
    f()
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn manifest(
    config: &RunConfig,
    data: &Prepared,
    command: &str,
    extra: &[(&str, String)],
) -> String {
    let mut s =
        String::from("# croann run manifest; rerun with `croann <command> --config <this file>`\n");
    let last_seed = trial_seed(config.seed, config.trials - 1);
    let mut meta = vec![
        ("meta.command", command.to_owned()),
        ("meta.created_ms", now_millis().to_string()),
        ("meta.version", env!("CARGO_PKG_VERSION").to_owned()),
        ("meta.dataset_sha256", data.sha256.clone()),
        ("meta.rows", data.raw.len().to_string()),
        ("meta.dropped_rows", data.raw.dropped_rows.to_string()),
        (
            "meta.resolved_split",
            format!(
                "{},{},{}",
                data.counts.train, data.counts.validation, data.counts.test
            ),
        ),
        ("meta.seeds", format!("{}..={}", config.seed, last_seed)),
    ];
    meta.extend(extra.iter().cloned());
    for (k, v) in meta {
        let _ = writeln!(s, "{k} = {v}");
    }
    s.push_str(&config.to_text());
    s
}

pub fn summary_csv(set: &TrialSet) -> String {
    let mut s = String::from("split,mean,std,min,max\n");
    for (name, st) in [
        ("train", set.summary.train),
        ("validation", set.summary.validation),
        ("test", set.summary.test),
    ] {
        let _ = writeln!(s, "{name},{},{},{},{}", st.mean, st.std, st.min, st.max);
    }
    s
}

pub fn trials_csv(set: &TrialSet) -> String {
    let mut s =
        String::from("trial,seed,train_error,validation_error,test_error,fe_used,stop_reason\n");
    for r in &set.reports {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.trial,
            r.seed,
            r.train_error,
            r.validation_error,
            r.test_error,
            r.fe_used,
            r.stop_reason
        );
    }
    s
}

fn progress_csv(mut records: Vec<ProgressRecord>) -> String {
    records.sort_by_key(|r| (r.trial, r.fe_count));
    let mut s = String::from("trial,fe_count,train_fitness,val_fitness\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.trial, r.fe_count, r.train_fitness, r.val_fitness
        );
    }
    s
}

/// Runs all trials of a config and writes summary, per-trial, progress and
/// manifest files. Returns the output directory.
pub fn train(config_path: &Path, overrides: &Overrides) -> Result<PathBuf, CliError> {
    let mut config = RunConfig::load(config_path)?;
    let out = apply_overrides(&mut config, overrides, "train");
    let data = prepare(&mut config)?;
    let progress = Mutex::new(Vec::new());
    let set = trials(&config, &data, overrides.jobs, &progress)?;

    fs::create_dir_all(&out).map_err(|e| CliError::Io {
        path: out.clone(),
        source: e,
    })?;
    write(&out.join(SUMMARY_CSV), &summary_csv(&set))?;
    write(&out.join(TRIALS_CSV), &trials_csv(&set))?;
    write(
        &out.join(PROGRESS_CSV),
        &progress_csv(progress.into_inner().unwrap()),
    )?;
    write(&out.join(MANIFEST), &manifest(&config, &data, "train", &[]))?;
    Ok(out)
}

/// Runs the full trial set once per value of `param`, all other parameters
/// held at their configured values.
pub fn sweep(
    config_path: &Path,
    param: &str,
    values: &[String],
    overrides: &Overrides,
) -> Result<PathBuf, CliError> {
    if !SWEEPABLE.contains(&param) {
        return Err(CliError::Config(format!(
            "{param:?} cannot be swept; choose one of {}",
            SWEEPABLE.join(", ")
        )));
    }
    if values.is_empty() {
        return Err(CliError::Usage("sweep needs at least one value".into()));
    }
    let mut config = RunConfig::load(config_path)?;
    let out = apply_overrides(&mut config, overrides, "sweep");
    let data = prepare(&mut config)?;

    let mut variants = Vec::with_capacity(values.len());
    for v in values {
        let mut c = config.clone();
        c.set_sweep_param(param, v)?;
        variants.push(c);
    }
    fs::create_dir_all(&out).map_err(|e| CliError::Io {
        path: out.clone(),
        source: e,
    })?;
    let mut csv = String::from("value,test_mean,test_std\n");
    for (raw, c) in values.iter().zip(&variants) {
        let set = trials(c, &data, overrides.jobs, &Mutex::new(Vec::new()))?;
        let _ = writeln!(
            csv,
            "{raw},{},{}",
            set.summary.test.mean, set.summary.test.std
        );
        // rewritten after every point so partial sweeps survive interruption
        write(&out.join(SWEEP_CSV), &csv)?;
    }
    let extra = [
        ("meta.sweep_param", param.to_owned()),
        ("meta.sweep_values", values.join(",")),
    ];
    write(
        &out.join(MANIFEST),
        &manifest(&config, &data, "sweep", &extra),
    )?;
    Ok(out)
}

#[derive(Debug, Clone)]
struct ReportRow {
    dataset: String,
    source: String,
    created: u128,
    train: Stats,
    validation: Stats,
    test: Stats,
}

fn find_summaries(dir: &Path, found: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut entries: Vec<_> = entries.filter_map(|e| e.ok()).map(|e| e.path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            find_summaries(&p, found)?;
        } else if p.file_name().is_some_and(|n| n == SUMMARY_CSV) {
            found.push(p);
        }
    }
    Ok(())
}

fn parse_summary(path: &Path) -> Result<BTreeMap<String, Stats>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let bad = |msg: &str| CliError::Config(format!("{}: {msg}", path.display()));
    let mut rows = BTreeMap::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad("expected split,mean,std,min,max"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("non-numeric statistic"));
        rows.insert(
            f[0].to_owned(),
            Stats {
                mean: num(f[1])?,
                std: num(f[2])?,
                min: num(f[3])?,
                max: num(f[4])?,
            },
        );
    }
    Ok(rows)
}

/// Collects every run below `dir` into a markdown table next to the
/// published reference rows. Writes `report.md` into `dir` and returns it.
pub fn report(dir: &Path) -> Result<String, CliError> {
    let mut summaries = Vec::new();
    find_summaries(dir, &mut summaries)?;
    if summaries.is_empty() {
        return Err(CliError::Usage(format!(
            "no {SUMMARY_CSV} found under {}",
            dir.display()
        )));
    }
    let mut rows = Vec::new();
    for path in summaries {
        let run_dir = path.parent().unwrap_or(dir);
        let meta = fs::read_to_string(run_dir.join(MANIFEST))
            .ok()
            .map(|t| parse_pairs(&t))
            .transpose()?
            .unwrap_or_default();
        let stats = parse_summary(&path)?;
        let get = |k: &str| {
            stats
                .get(k)
                .copied()
                .ok_or_else(|| CliError::Config(format!("{}: missing {k} row", path.display())))
        };
        let label = run_dir
            .strip_prefix(dir)
            .unwrap_or(run_dir)
            .display()
            .to_string();
        rows.push(ReportRow {
            dataset: meta
                .get("dataset.name")
                .cloned()
                .unwrap_or_else(|| "?".into()),
            source: format!("run {}", if label.is_empty() { ".".into() } else { label }),
            created: meta
                .get("meta.created_ms")
                .and_then(|v| v.parse().ok())
                .unwrap_or(0),
            train: get("train")?,
            validation: get("validation")?,
            test: get("test")?,
        });
    }
    rows.sort_by(|a, b| (&a.dataset, a.created).cmp(&(&b.dataset, b.created)));

    let mut datasets: Vec<String> = rows.iter().map(|r| r.dataset.clone()).collect();
    datasets.dedup();
    let mut table = String::new();
    let _ = writeln!(
        table,
        "| dataset | source | train mean | train std | train min | train max | validation mean | validation std | validation min | validation max | test mean | test std | test min | test max |"
    );
    let _ = writeln!(table, "|{}", "---|".repeat(14));
    let line = |t: &mut String, dataset: &str, source: &str, s: [Stats; 3]| {
        let _ = write!(t, "| {dataset} | {source} |");
        for st in s {
            let _ = write!(
                t,
                " {:.2} | {:.2} | {:.2} | {:.2} |",
                st.mean, st.std, st.min, st.max
            );
        }
        t.push('\n');
    };
    for d in &datasets {
        for r in rows.iter().filter(|r| &r.dataset == d) {
            line(&mut table, d, &r.source, [r.train, r.validation, r.test]);
        }
        if let Some(p) = reference::published(d) {
            line(
                &mut table,
                d,
                "[published CROANN]",
                [p.train, p.validation, p.test],
            );
        }
    }
    table.push_str("\nError rates in percent. Rows tagged [published CROANN] are reference values from the original publication, not produced by this tool.\n");
    write(&dir.join(REPORT_MD), &table)?;
    Ok(table)
}
