//! `--dataset` values: a generator recipe or a CSV path.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use zeroloss_core::data::{
    bad_point_set, fashion_standin, prostate_standin, synthetic1, synthetic2, uniform_sphere,
};
use zeroloss_core::{Dataset, Result};

/// `uniform:n=50:d=10:seed=3`, `bad-set:d=5`, `synthetic1`, `synthetic2:seed=4`,
/// `prostate-standin`, `fashion-standin`, `file:<path>` or a bare path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DatasetSpec {
    Uniform { n: usize, d: usize, seed: u64 },
    BadSet { d: usize },
    Synthetic1 { seed: u64 },
    Synthetic2 { seed: u64 },
    ProstateStandin { seed: u64 },
    FashionStandin { seed: u64 },
    File(PathBuf),
}

impl DatasetSpec {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DatasetSpec::Uniform { n, d, seed } => uniform_sphere(*n, *d, *seed),
            DatasetSpec::BadSet { d } => bad_point_set(*d),
            DatasetSpec::Synthetic1 { seed } => synthetic1(*seed),
            DatasetSpec::Synthetic2 { seed } => synthetic2(*seed),
            DatasetSpec::ProstateStandin { seed } => prostate_standin(*seed),
            DatasetSpec::FashionStandin { seed } => fashion_standin(*seed),
            DatasetSpec::File(p) => Dataset::read_csv(p),
        }
    }

    /// Dataset written by a previous `dataset gen` into `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        DatasetSpec::File(dir.join("dataset.csv"))
    }

    pub fn is_standin(&self) -> bool {
        matches!(self, DatasetSpec::ProstateStandin { .. } | DatasetSpec::FashionStandin { .. })
    }
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::Uniform { n, d, seed } => write!(f, "uniform:n={n}:d={d}:seed={seed}"),
            DatasetSpec::BadSet { d } => write!(f, "bad-set:d={d}"),
            DatasetSpec::Synthetic1 { seed } => write!(f, "synthetic1:seed={seed}"),
            DatasetSpec::Synthetic2 { seed } => write!(f, "synthetic2:seed={seed}"),
            DatasetSpec::ProstateStandin { seed } => write!(f, "prostate-standin:seed={seed}"),
            DatasetSpec::FashionStandin { seed } => write!(f, "fashion-standin:seed={seed}"),
            DatasetSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

fn options(parts: &[&str], allowed: &[&str]) -> std::result::Result<Vec<(String, u64)>, String> {
    parts
        .iter()
        .map(|p| {
            let (k, v) = p.split_once('=').ok_or_else(|| format!("expected key=value, got {p:?}"))?;
            if !allowed.contains(&k) {
                return Err(format!("unknown dataset option {k:?} (allowed: {})", allowed.join(", ")));
            }
            let v: u64 = v.parse().map_err(|_| format!("option {k} must be a nonnegative integer, got {v:?}"))?;
            Ok((k.to_string(), v))
        })
        .collect()
}

fn get(opts: &[(String, u64)], key: &str, default: Option<u64>) -> std::result::Result<u64, String> {
    opts.iter()
        .rev()
        .find(|(k, _)| k == key)
        .map(|(_, v)| *v)
        .or(default)
        .ok_or_else(|| format!("dataset option {key} is required"))
}

impl FromStr for DatasetSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(DatasetSpec::File(PathBuf::from(path)));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let rest = &parts[1..];
        let spec = match parts[0] {
            "uniform" => {
                let o = options(rest, &["n", "d", "seed"])?;
                DatasetSpec::Uniform {
                    n: get(&o, "n", None)? as usize,
                    d: get(&o, "d", None)? as usize,
                    seed: get(&o, "seed", Some(0))?,
                }
            }
            "bad-set" => {
                let o = options(rest, &["d"])?;
                DatasetSpec::BadSet { d: get(&o, "d", Some(3))? as usize }
            }
            "synthetic1" => DatasetSpec::Synthetic1 { seed: get(&options(rest, &["seed"])?, "seed", Some(0))? },
            "synthetic2" => DatasetSpec::Synthetic2 { seed: get(&options(rest, &["seed"])?, "seed", Some(0))? },
            "prostate-standin" => {
                DatasetSpec::ProstateStandin { seed: get(&options(rest, &["seed"])?, "seed", Some(0))? }
            }
            "fashion-standin" => {
                DatasetSpec::FashionStandin { seed: get(&options(rest, &["seed"])?, "seed", Some(0))? }
            }
            _ if s.ends_with(".csv") || Path::new(s).exists() => DatasetSpec::File(PathBuf::from(s)),
            other => {
                return Err(format!(
                    "unknown dataset {other:?}; expected uniform, bad-set, synthetic1, synthetic2, \
                     prostate-standin, fashion-standin or a CSV path"
                ))
            }
        };
        Ok(spec)
    }
}

impl TryFrom<String> for DatasetSpec {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<DatasetSpec> for String {
    fn from(s: DatasetSpec) -> String {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_strings() {
        for s in [
            "uniform:n=50:d=10:seed=3",
            "bad-set:d=5",
            "synthetic1:seed=0",
            "synthetic2:seed=9",
            "prostate-standin:seed=1",
            "fashion-standin:seed=2",
            "file:some/data.csv",
        ] {
            let spec: DatasetSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!("synthetic2".parse::<DatasetSpec>().unwrap(), DatasetSpec::Synthetic2 { seed: 0 });
        assert_eq!("bad-set".parse::<DatasetSpec>().unwrap(), DatasetSpec::BadSet { d: 3 });
    }

    #[test]
    fn rejects_bad_options() {
        assert!("uniform:n=5".parse::<DatasetSpec>().is_err());
        assert!("bad-set:n=5".parse::<DatasetSpec>().is_err());
        assert!("nonsense".parse::<DatasetSpec>().is_err());
        assert!("synthetic1:seed=x".parse::<DatasetSpec>().is_err());
    }
}
