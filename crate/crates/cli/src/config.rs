//! Run configuration: flat `key = value` text with dotted namespaces.
//!
//! ```text
//! # comment
//! dataset.name = iris
//! cro.pop_size = 20
//! ```
//!
//! Any key can be overridden from the environment by upper-casing it,
//! replacing dots with underscores and prefixing `CROANN_`:
//! `cro.pop_size` becomes `CROANN_CRO_POP_SIZE`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use croann::cro::CroParams;
use croann::data::{CsvSchema, SplitCounts};
use croann::operators::OperatorParams;
use croann::slfn::NetworkConfig;
use croann::trainer::{StoppingConfig, TrainSettings};

use crate::CliError;

pub const ENV_PREFIX: &str = "CROANN_";

/// Known datasets with canonical file layouts and split counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Iris,
    Cancer,
    Diabetes,
}

impl Preset {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "iris" => Some(Preset::Iris),
            "cancer" => Some(Preset::Cancer),
            "diabetes" => Some(Preset::Diabetes),
            _ => None,
        }
    }

    pub fn schema(self) -> CsvSchema {
        match self {
            Preset::Iris => CsvSchema::iris(),
            Preset::Cancer => CsvSchema::breast_cancer(),
            Preset::Diabetes => CsvSchema::diabetes(),
        }
    }

    pub fn counts(self) -> SplitCounts {
        match self {
            Preset::Iris => SplitCounts::new(75, 37, 38),
            Preset::Cancer => SplitCounts::new(349, 175, 175),
            Preset::Diabetes => SplitCounts::new(384, 192, 192),
        }
    }

    pub fn fe_limit(self) -> u64 {
        match self {
            Preset::Diabetes => 172_800,
            _ => 50_000,
        }
    }

    pub fn max_window_count(self) -> u32 {
        match self {
            Preset::Diabetes => 500,
            _ => 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub name: String,
    pub path: PathBuf,
    pub schema: CsvSchema,
    pub counts: SplitCounts,
    /// Expected SHA-256 of the dataset file, checked before running.
    pub sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub cro: CroParams,
    pub hidden: usize,
    pub alpha: f64,
    pub beta: f64,
    pub operators: OperatorParams,
    pub stopping: StoppingConfig,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// Keys accepted by [`RunConfig::from_map`].
pub const KEYS: &[&str] = &[
    "dataset.name",
    "dataset.path",
    "dataset.attribute_columns",
    "dataset.label_column",
    "dataset.missing",
    "dataset.header",
    "dataset.labels",
    "dataset.train",
    "dataset.validation",
    "dataset.test",
    "dataset.sha256",
    "cro.pop_size",
    "cro.initial_ke",
    "cro.buffer_init",
    "cro.mole_coll",
    "cro.ke_loss_rate",
    "cro.decomp_threshold",
    "cro.synth_threshold",
    "network.hidden",
    "network.alpha",
    "network.beta",
    "operators.gaussian_variance",
    "operators.decomp_perturb_prob",
    "stopping.fe_limit",
    "stopping.window_size",
    "stopping.max_window_count",
    "run.trials",
    "run.seed",
    "run.out",
];

/// Parameters that `sweep` may vary.
pub const SWEEPABLE: &[&str] = &[
    "operators.gaussian_variance",
    "cro.pop_size",
    "cro.buffer_init",
    "cro.initial_ke",
    "cro.mole_coll",
    "cro.ke_loss_rate",
    "cro.decomp_threshold",
    "cro.synth_threshold",
];

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", n + 1)))?;
        map.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    Ok(map)
}

/// Environment variable that overrides `key`.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "_").to_uppercase())
}

/// Applies `CROANN_*` overrides for every known key.
pub fn apply_env(
    map: &mut BTreeMap<String, String>,
    vars: impl IntoIterator<Item = (String, String)>,
) {
    let vars: BTreeMap<String, String> = vars.into_iter().collect();
    for key in KEYS {
        if let Some(v) = vars.get(&env_name(key)) {
            map.insert((*key).to_owned(), v.clone());
        }
    }
}

fn value<T: FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T, CliError> {
    match map.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse()
            .map_err(|_| CliError::Config(format!("{key}: cannot parse {raw:?}"))),
    }
}

fn list<T: FromStr>(raw: &str, key: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{key}: cannot parse {s:?}")))
        })
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::load_with_env(path, std::env::vars())
    }

    pub fn load_with_env(
        path: &Path,
        vars: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut map = parse_pairs(&text)?;
        apply_env(&mut map, vars);
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_map(&map, base)
    }

    /// Builds a config from parsed pairs; relative paths resolve against `base`.
    /// Keys under `meta.` are informational and ignored.
    pub fn from_map(map: &BTreeMap<String, String>, base: &Path) -> Result<Self, CliError> {
        for key in map.keys() {
            if !KEYS.contains(&key.as_str()) && !key.starts_with("meta.") {
                return Err(CliError::Config(format!("unknown key {key:?}")));
            }
        }
        let name = map
            .get("dataset.name")
            .cloned()
            .ok_or_else(|| CliError::Config("dataset.name is required".into()))?;
        let preset = Preset::from_name(&name);
        let path = map
            .get("dataset.path")
            .map(|p| base.join(p))
            .ok_or_else(|| CliError::Config("dataset.path is required".into()))?;

        let mut schema = match preset {
            Some(p) => p.schema(),
            None => {
                if !map.contains_key("dataset.attribute_columns")
                    || !map.contains_key("dataset.label_column")
                {
                    return Err(CliError::Config(format!(
                        "dataset {name:?} is not a preset; set dataset.attribute_columns and dataset.label_column"
                    )));
                }
                CsvSchema::new(Vec::new(), 0)
            }
        };
        if let Some(raw) = map.get("dataset.attribute_columns") {
            schema.attribute_columns = list(raw, "dataset.attribute_columns")?;
            if schema
                .attribute_names
                .as_ref()
                .is_some_and(|n| n.len() != schema.attribute_columns.len())
            {
                schema.attribute_names = None;
            }
        }
        schema.label_column = value(map, "dataset.label_column", schema.label_column)?;
        if let Some(m) = map.get("dataset.missing") {
            schema.missing_marker = (!m.is_empty()).then(|| m.clone());
        }
        schema.has_header = value(map, "dataset.header", schema.has_header)?;
        if let Some(raw) = map.get("dataset.labels") {
            schema.labels = Some(raw.split(',').map(|s| s.trim().to_owned()).collect());
        }
        let default_counts = preset.map(Preset::counts);
        let count = |key: &str, d: Option<usize>| -> Result<usize, CliError> {
            match (map.get(key), d) {
                (None, Some(d)) => Ok(d),
                (None, None) => Err(CliError::Config(format!("{key} is required"))),
                (Some(_), _) => value(map, key, 0),
            }
        };
        let counts = SplitCounts::new(
            count("dataset.train", default_counts.map(|c| c.train))?,
            count("dataset.validation", default_counts.map(|c| c.validation))?,
            count("dataset.test", default_counts.map(|c| c.test))?,
        );

        let d = CroParams::default();
        let cro = CroParams {
            pop_size: value(map, "cro.pop_size", d.pop_size)?,
            initial_ke: value(map, "cro.initial_ke", d.initial_ke)?,
            buffer_init: value(map, "cro.buffer_init", d.buffer_init)?,
            mole_coll: value(map, "cro.mole_coll", d.mole_coll)?,
            ke_loss_rate: value(map, "cro.ke_loss_rate", d.ke_loss_rate)?,
            decomp_threshold: value(map, "cro.decomp_threshold", d.decomp_threshold)?,
            synth_threshold: value(map, "cro.synth_threshold", d.synth_threshold)?,
            fe_limit: value(
                map,
                "stopping.fe_limit",
                preset.map_or(d.fe_limit, Preset::fe_limit),
            )?,
        };
        let od = OperatorParams::default();
        let operators = OperatorParams {
            gaussian_variance: value(map, "operators.gaussian_variance", od.gaussian_variance)?,
            decomp_perturb_prob: value(
                map,
                "operators.decomp_perturb_prob",
                od.decomp_perturb_prob,
            )?,
        };
        let sd = StoppingConfig::default();
        let stopping = StoppingConfig {
            window_size: value(map, "stopping.window_size", sd.window_size)?,
            max_window_count: value(
                map,
                "stopping.max_window_count",
                preset.map_or(sd.max_window_count, Preset::max_window_count),
            )?,
        };

        let config = RunConfig {
            dataset: DatasetConfig {
                name,
                path,
                schema,
                counts,
                sha256: map.get("dataset.sha256").cloned(),
            },
            cro,
            hidden: value(map, "network.hidden", NetworkConfig::DEFAULT_HIDDEN)?,
            alpha: value(map, "network.alpha", NetworkConfig::DEFAULT_ALPHA)?,
            beta: value(map, "network.beta", NetworkConfig::DEFAULT_BETA)?,
            operators,
            stopping,
            trials: value(map, "run.trials", 50)?,
            seed: value(map, "run.seed", 1)?,
            out: map.get("run.out").map(|p| base.join(p)),
        };
        config.settings(1, 2).validate()?;
        if config.trials == 0 {
            return Err(CliError::Config("run.trials must be at least 1".into()));
        }
        Ok(config)
    }

    /// Training settings for a dataset with `n0` attributes and `n2` classes.
    pub fn settings(&self, n0: usize, n2: usize) -> TrainSettings {
        TrainSettings {
            cro: self.cro,
            network: NetworkConfig {
                n0,
                n1: self.hidden,
                n2,
                alpha: self.alpha,
                beta: self.beta,
            },
            operators: self.operators,
            stopping: self.stopping,
        }
    }

    /// Sets one sweepable parameter from its textual value.
    pub fn set_sweep_param(&mut self, key: &str, raw: &str) -> Result<(), CliError> {
        let bad = || CliError::Config(format!("{key}: cannot parse {raw:?}"));
        match key {
            "operators.gaussian_variance" => {
                self.operators.gaussian_variance = raw.parse().map_err(|_| bad())?
            }
            "cro.pop_size" => self.cro.pop_size = raw.parse().map_err(|_| bad())?,
            "cro.buffer_init" => self.cro.buffer_init = raw.parse().map_err(|_| bad())?,
            "cro.initial_ke" => self.cro.initial_ke = raw.parse().map_err(|_| bad())?,
            "cro.mole_coll" => self.cro.mole_coll = raw.parse().map_err(|_| bad())?,
            "cro.ke_loss_rate" => self.cro.ke_loss_rate = raw.parse().map_err(|_| bad())?,
            "cro.decomp_threshold" => self.cro.decomp_threshold = raw.parse().map_err(|_| bad())?,
            "cro.synth_threshold" => self.cro.synth_threshold = raw.parse().map_err(|_| bad())?,
            other => {
                return Err(CliError::Config(format!(
                    "{other:?} cannot be swept; choose one of {}",
                    SWEEPABLE.join(", ")
                )))
            }
        }
        self.settings(1, 2).validate()?;
        Ok(())
    }

    /// Fully resolved config in the same `key = value` format, loadable by
    /// [`RunConfig::load`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let d = &self.dataset;
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("dataset.name", d.name.clone());
        line("dataset.path", d.path.display().to_string());
        line(
            "dataset.attribute_columns",
            join(&d.schema.attribute_columns),
        );
        line("dataset.label_column", d.schema.label_column.to_string());
        line(
            "dataset.missing",
            d.schema.missing_marker.clone().unwrap_or_default(),
        );
        line("dataset.header", d.schema.has_header.to_string());
        if let Some(labels) = &d.schema.labels {
            line("dataset.labels", labels.join(","));
        }
        line("dataset.train", d.counts.train.to_string());
        line("dataset.validation", d.counts.validation.to_string());
        line("dataset.test", d.counts.test.to_string());
        if let Some(h) = &d.sha256 {
            line("dataset.sha256", h.clone());
        }
        line("cro.pop_size", self.cro.pop_size.to_string());
        line("cro.initial_ke", fmt_f64(self.cro.initial_ke));
        line("cro.buffer_init", fmt_f64(self.cro.buffer_init));
        line("cro.mole_coll", fmt_f64(self.cro.mole_coll));
        line("cro.ke_loss_rate", fmt_f64(self.cro.ke_loss_rate));
        line(
            "cro.decomp_threshold",
            self.cro.decomp_threshold.to_string(),
        );
        line("cro.synth_threshold", fmt_f64(self.cro.synth_threshold));
        line("network.hidden", self.hidden.to_string());
        line("network.alpha", fmt_f64(self.alpha));
        line("network.beta", fmt_f64(self.beta));
        line(
            "operators.gaussian_variance",
            fmt_f64(self.operators.gaussian_variance),
        );
        line(
            "operators.decomp_perturb_prob",
            fmt_f64(self.operators.decomp_perturb_prob),
        );
        line("stopping.fe_limit", self.cro.fe_limit.to_string());
        line(
            "stopping.window_size",
            self.stopping.window_size.to_string(),
        );
        line(
            "stopping.max_window_count",
            self.stopping.max_window_count.to_string(),
        );
        line("run.trials", self.trials.to_string());
        line("run.seed", self.seed.to_string());
        if let Some(out) = &self.out {
            line("run.out", out.display().to_string());
        }
        s
    }
}

/// Shortest representation that parses back to the same value.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const IRIS: &str = "dataset.name = iris\ndataset.path = ../data/iris.data\n";

    fn load(text: &str) -> Result<RunConfig, CliError> {
        RunConfig::from_map(&parse_pairs(text).unwrap(), Path::new("/cfg"))
    }

    #[test]
    fn defaults_follow_preset() {
        let c = load(IRIS).unwrap();
        assert_eq!(c.cro, CroParams::default());
        assert_eq!(c.dataset.counts, SplitCounts::new(75, 37, 38));
        assert_eq!(c.dataset.path, Path::new("/cfg/../data/iris.data"));
        assert_eq!(c.stopping.window_size, 100);
        assert_eq!(c.stopping.max_window_count, 300);
        assert_eq!((c.trials, c.hidden), (50, 5));
        assert_eq!(c.operators.gaussian_variance, 0.1);

        let d = load("dataset.name = diabetes\ndataset.path = x\n").unwrap();
        assert_eq!(d.cro.fe_limit, 172_800);
        assert_eq!(d.stopping.max_window_count, 500);
    }

    #[test]
    fn comments_and_whitespace() {
        let c = load("# header\n\n  dataset.name=iris  \ndataset.path =p\ncro.pop_size = 7 \n")
            .unwrap();
        assert_eq!(c.cro.pop_size, 7);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = load(&format!("{IRIS}cro.pop = 3\n")).unwrap_err();
        assert!(err.to_string().contains("cro.pop"));
    }

    #[test]
    fn invalid_value_rejected() {
        assert!(load(&format!("{IRIS}cro.mole_coll = 2\n")).is_err());
        assert!(load(&format!("{IRIS}cro.pop_size = many\n")).is_err());
        assert!(load(&format!("{IRIS}run.trials = 0\n")).is_err());
        assert!(parse_pairs("no equals sign").is_err());
    }

    #[test]
    fn env_overrides() {
        assert_eq!(env_name("cro.pop_size"), "CROANN_CRO_POP_SIZE");
        let mut map = parse_pairs(IRIS).unwrap();
        apply_env(
            &mut map,
            [
                ("CROANN_CRO_POP_SIZE".to_owned(), "9".to_owned()),
                ("CROANN_UNRELATED".to_owned(), "x".to_owned()),
            ],
        );
        let c = RunConfig::from_map(&map, Path::new(".")).unwrap();
        assert_eq!(c.cro.pop_size, 9);
    }

    #[test]
    fn text_round_trip() {
        let mut c = load(&format!(
            "{IRIS}cro.ke_loss_rate = 0.123456789\ndataset.sha256 = abc\n"
        ))
        .unwrap();
        c.out = Some(PathBuf::from("/tmp/out"));
        let again =
            RunConfig::from_map(&parse_pairs(&c.to_text()).unwrap(), Path::new("/elsewhere"))
                .unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn custom_dataset_needs_columns() {
        assert!(load("dataset.name = mine\ndataset.path = m.csv\n").is_err());
        let c = load(
            "dataset.name = mine\ndataset.path = m.csv\ndataset.attribute_columns = 0,2\n\
             dataset.label_column = 1\ndataset.train = 4\ndataset.validation = 2\ndataset.test = 2\n",
        )
        .unwrap();
        assert_eq!(c.dataset.schema.attribute_columns, vec![0, 2]);
        assert_eq!(c.dataset.counts.total(), 8);
    }

    #[test]
    fn sweep_params() {
        let mut c = load(IRIS).unwrap();
        for key in SWEEPABLE {
            c.set_sweep_param(key, "1").unwrap();
        }
        assert_eq!(c.cro.pop_size, 1);
        assert!(c.set_sweep_param("network.hidden", "3").is_err());
        assert!(c.set_sweep_param("cro.mole_coll", "abc").is_err());
    }
}
