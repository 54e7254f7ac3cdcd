use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::RunArgs;
use crate::error::{Error, Result};
use crate::pipeline::{FitConfig, DEFAULT_MIN_SAMPLE};
use crate::qmap::ProbabilitySet;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ProbsSpec {
    Text(String),
    List(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum YearsSpec {
    Text(String),
    List(Vec<i32>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    obs: Option<PathBuf>,
    #[serde(rename = "mod")]
    model_data: Option<PathBuf>,
    climatology: Option<PathBuf>,
    model: Option<PathBuf>,
    output: Option<PathBuf>,
    probs: Option<ProbsSpec>,
    epsilon: Option<f64>,
    train_years: Option<YearsSpec>,
    test_years: Option<YearsSpec>,
    min_sample: Option<usize>,
}

/// Run configuration after merging the JSON file with command-line flags.
///
/// Relative paths in the file are taken relative to the file's directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub obs: Option<PathBuf>,
    pub model_data: Option<PathBuf>,
    pub climatology: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub probs: Option<ProbabilitySet<f64>>,
    pub epsilon: Option<f64>,
    pub train_years: Option<Vec<i32>>,
    pub test_years: Option<Vec<i32>>,
    pub min_sample: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rel = |p: Option<PathBuf>| p.map(|p| if p.is_absolute() { p } else { base.join(p) });
        let years = |y: Option<YearsSpec>| -> Result<Option<Vec<i32>>> {
            match y {
                None => Ok(None),
                Some(YearsSpec::Text(s)) => parse_years(&s).map(Some),
                Some(YearsSpec::List(v)) => normalize_years(v).map(Some),
            }
        };
        Ok(RunConfig {
            obs: rel(file.obs),
            model_data: rel(file.model_data),
            climatology: rel(file.climatology),
            model: rel(file.model),
            output: rel(file.output),
            probs: match file.probs {
                None => None,
                Some(ProbsSpec::Text(s)) => Some(parse_probs(&s)?),
                Some(ProbsSpec::List(v)) => Some(ProbabilitySet::new(v)?),
            },
            epsilon: file.epsilon,
            train_years: years(file.train_years)?,
            test_years: years(file.test_years)?,
            min_sample: file.min_sample,
        })
    }

    /// Loads `--config` if given, then lets each flag override.
    pub fn resolve(args: &RunArgs) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let over = |slot: &mut Option<PathBuf>, flag: &Option<PathBuf>| {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        };
        over(&mut cfg.obs, &args.obs);
        over(&mut cfg.model_data, &args.model_data);
        over(&mut cfg.climatology, &args.climatology);
        over(&mut cfg.model, &args.model);
        over(&mut cfg.output, &args.out);
        if let Some(s) = &args.probs {
            cfg.probs = Some(parse_probs(s)?);
        }
        if args.epsilon.is_some() {
            cfg.epsilon = args.epsilon;
        }
        if let Some(s) = &args.train_years {
            cfg.train_years = Some(parse_years(s)?);
        }
        if let Some(s) = &args.test_years {
            cfg.test_years = Some(parse_years(s)?);
        }
        if args.min_sample.is_some() {
            cfg.min_sample = args.min_sample;
        }
        Ok(cfg)
    }

    /// Fitting parameters with defaults filled in; validated.
    pub fn fit_config(&self) -> Result<FitConfig> {
        let train_years = self
            .train_years
            .clone()
            .ok_or_else(|| Error::invalid("missing train_years (flag or config)"))?;
        let cfg = FitConfig {
            probs: self.probs.clone().unwrap_or_else(ProbabilitySet::percentiles),
            epsilon: self.epsilon.unwrap_or(1e-6),
            train_years,
            min_sample: self.min_sample.unwrap_or(DEFAULT_MIN_SAMPLE),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_probs(s: &str) -> Result<ProbabilitySet<f64>> {
    let bad = || Error::invalid(format!("cannot parse probabilities '{s}'"));
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match parts[..] {
            [a, b, c] => ProbabilitySet::from_range(a, b, c),
            _ => Err(bad()),
        }
    } else {
        let v = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        ProbabilitySet::new(v)
    }
}

/// Parses years such as `2001-2005`, `2001,2003` or `1991-1995,2001`.
///
/// The result is sorted and free of duplicates.
pub fn parse_years(s: &str) -> Result<Vec<i32>> {
    let bad = || Error::invalid(format!("cannot parse years '{s}'"));
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(bad());
        }
        match item.split_once('-') {
            Some((a, b)) => {
                let a: i32 = a.trim().parse().map_err(|_| bad())?;
                let b: i32 = b.trim().parse().map_err(|_| bad())?;
                if b < a {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|_| bad())?),
        }
    }
    normalize_years(out)
}

fn normalize_years(mut v: Vec<i32>) -> Result<Vec<i32>> {
    if v.is_empty() {
        return Err(Error::invalid("empty year list"));
    }
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn years() {
        assert_eq!(parse_years("2001-2003").unwrap(), vec![2001, 2002, 2003]);
        assert_eq!(parse_years("2005, 2001-2002,2001").unwrap(), vec![2001, 2002, 2005]);
        assert!(parse_years("2003-2001").is_err());
        assert!(parse_years("").is_err());
        assert!(parse_years("x").is_err());
    }

    #[test]
    fn probs() {
        assert_eq!(parse_probs("0.01:0.99:0.01").unwrap(), ProbabilitySet::percentiles());
        assert_eq!(parse_probs("0.1,0.5,0.9").unwrap().as_slice(), &[0.1, 0.5, 0.9]);
        assert!(parse_probs("0.5,0.1").is_err());
        assert!(parse_probs("0:1").is_err());
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        fs::write(
            &p,
            r#"{"obs": "obs", "mod": "/abs/mod", "train_years": [2002, 2001], "probs": [0.25, 0.5, 0.75], "min_sample": 2}"#,
        )
        .unwrap();
        let args = RunArgs {
            config: Some(p),
            train_years: Some("1991-1992".into()),
            ..RunArgs::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.obs, Some(dir.path().join("obs")));
        assert_eq!(cfg.model_data, Some(PathBuf::from("/abs/mod")));
        assert_eq!(cfg.train_years, Some(vec![1991, 1992]));
        let fc = cfg.fit_config().unwrap();
        assert_eq!(fc.probs.len(), 3);
        assert_eq!(fc.epsilon, 1e-6);
        assert_eq!(fc.min_sample, 2);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_params() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        fs::write(&p, r#"{"obz": "x"}"#).unwrap();
        assert!(matches!(RunConfig::load(&p), Err(Error::InvalidInput(_))));
        let cfg = RunConfig {
            train_years: Some(vec![2001]),
            epsilon: Some(0.7),
            ..RunConfig::default()
        };
        assert!(cfg.fit_config().is_err());
        let cfg = RunConfig {
            train_years: Some(vec![2001]),
            min_sample: Some(49),
            ..RunConfig::default()
        };
        assert!(cfg.fit_config().is_err());
    }
}
