//! Experiment configuration: `[section]` headers, `key = value` lines and
//! `#` comments. Lists are comma separated; a single value is broadcast to
//! every user.

use std::collections::BTreeMap;

use cogpower::{EfficiencyFunction, NetworkConfig, Profile};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key [{section}] {key}")]
    UnknownKey { section: String, key: String },
    #[error("[{section}] {key}: {msg}")]
    Value {
        section: String,
        key: String,
        msg: String,
    },
    #[error("{0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

const KNOWN: &[(&str, &[&str])] = &[
    ("scenario", &["name"]),
    (
        "network",
        &[
            "users",
            "spreading",
            "sigma2",
            "gains",
            "rates",
            "p_max",
            "alpha",
            "block_duration",
            "xi_min",
            "leaders",
            "num_leaders",
        ],
    ),
    ("efficiency", &["family", "c", "r", "m"]),
    ("sweep", &["variable", "values", "from", "to", "step"]),
    (
        "learning",
        &[
            "dynamics",
            "runs",
            "max_steps",
            "horizon",
            "init",
            "priors",
            "record_every",
        ],
    ),
    ("hybrid", &["grid_points", "grid_spread"]),
    ("output", &["path"]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    BestResponse,
    Fictitious,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Profile(Profile),
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Priors {
    Given(Vec<f64>),
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningSettings {
    pub dynamics: Dynamics,
    pub runs: usize,
    pub max_steps: usize,
    pub horizon: usize,
    pub init: Init,
    pub priors: Priors,
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub network: NetworkConfig,
    pub efficiency: EfficiencyFunction,
    /// Explicit leader indices, if given.
    pub leaders: Option<Vec<usize>>,
    /// Sensing-cost values for sweeps over `alpha`.
    pub alphas: Vec<f64>,
    pub learning: LearningSettings,
    pub grid_points: usize,
    pub grid_spread: f64,
    pub output: Option<String>,
}

type Sections = BTreeMap<String, BTreeMap<String, (usize, String)>>;

fn tokenize(text: &str) -> Result<Sections> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line: line_no,
                msg: format!("malformed section header {line:?}"),
            })?;
            let name = name.trim().to_string();
            if !KNOWN.iter().any(|(s, _)| *s == name) {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    msg: format!("unknown section [{name}]"),
                });
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            msg: format!("expected key = value, got {line:?}"),
        })?;
        let section = current.clone().ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            msg: "key outside of any section".into(),
        })?;
        let key = key.trim().to_string();
        let allowed = KNOWN.iter().find(|(s, _)| *s == section).unwrap().1;
        if !allowed.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { section, key });
        }
        let entries = sections.get_mut(&section).unwrap();
        if entries.contains_key(&key) {
            return Err(ConfigError::Syntax {
                line: line_no,
                msg: format!("duplicate key {key}"),
            });
        }
        entries.insert(key, (line_no, value.trim().to_string()));
    }
    Ok(sections)
}

struct Reader<'a> {
    sections: &'a Sections,
}

impl Reader<'_> {
    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|(_, v)| v.as_str())
    }

    fn err(section: &str, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::Value {
            section: section.into(),
            key: key.into(),
            msg: msg.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        self.raw(section, key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Self::err(section, key, format!("cannot parse {v:?}")))
            })
            .transpose()
    }

    fn list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(section, key)
            .map(|v| {
                v.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| Self::err(section, key, format!("cannot parse {t:?}")))
                    })
                    .collect()
            })
            .transpose()
    }

    fn per_user(&self, key: &str, k: usize, default: f64) -> Result<Vec<f64>> {
        match self.list("network", key)? {
            None => Ok(vec![default; k]),
            Some(v) if v.len() == 1 => Ok(vec![v[0]; k]),
            Some(v) if v.len() == k => Ok(v),
            Some(v) => Err(Self::err(
                "network",
                key,
                format!("expected 1 or {k} values, got {}", v.len()),
            )),
        }
    }
}

fn efficiency(r: &Reader) -> Result<EfficiencyFunction> {
    let family = r.raw("efficiency", "family").unwrap_or("exp");
    let c = r.parse::<f64>("efficiency", "c")?;
    let rate = r.parse::<f64>("efficiency", "r")?;
    let m = r.parse::<u32>("efficiency", "m")?;
    let built = match family {
        "exp" => {
            if m.is_some() {
                return Err(Reader::err(
                    "efficiency",
                    "m",
                    "only applies to family = goodman",
                ));
            }
            match (c, rate) {
                (Some(_), Some(_)) => {
                    return Err(ConfigError::Invalid(
                        "[efficiency] c and r are mutually exclusive".into(),
                    ))
                }
                (Some(c), None) => EfficiencyFunction::exp_outage(c),
                (None, Some(rate)) => EfficiencyFunction::from_spectral_efficiency(rate),
                (None, None) => {
                    return Err(ConfigError::Invalid("[efficiency] needs c or r".into()))
                }
            }
        }
        "goodman" => {
            if c.is_some() || rate.is_some() {
                return Err(ConfigError::Invalid(
                    "[efficiency] goodman takes only m".into(),
                ));
            }
            let m = m.ok_or_else(|| ConfigError::Invalid("[efficiency] goodman needs m".into()))?;
            EfficiencyFunction::goodman(m)
        }
        other => {
            return Err(Reader::err(
                "efficiency",
                "family",
                format!("unknown family {other:?} (exp or goodman)"),
            ))
        }
    };
    built.map_err(|e| ConfigError::Invalid(e.to_string()))
}

fn sweep_values(r: &Reader) -> Result<Vec<f64>> {
    if let Some(v) = r.raw("sweep", "variable") {
        if v != "alpha" {
            return Err(Reader::err("sweep", "variable", "only alpha can be swept"));
        }
    }
    let values = r.list("sweep", "values")?;
    let range = (
        r.parse::<f64>("sweep", "from")?,
        r.parse::<f64>("sweep", "to")?,
        r.parse::<f64>("sweep", "step")?,
    );
    match (values, range) {
        (Some(_), (Some(_), _, _) | (_, Some(_), _) | (_, _, Some(_))) => Err(
            ConfigError::Invalid("[sweep] give either values or from/to/step".into()),
        ),
        (Some(v), _) => Ok(v),
        (None, (Some(from), Some(to), Some(step))) => {
            if step.is_nan() || step <= 0.0 || to < from {
                return Err(ConfigError::Invalid(
                    "[sweep] needs step > 0 and to >= from".into(),
                ));
            }
            let count = ((to - from) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|i| from + i as f64 * step).collect())
        }
        (None, (None, None, None)) => Ok(Vec::new()),
        _ => Err(ConfigError::Invalid(
            "[sweep] from, to and step go together".into(),
        )),
    }
}

fn learning(r: &Reader, k: usize) -> Result<LearningSettings> {
    let dynamics = match r.raw("learning", "dynamics").unwrap_or("both") {
        "br" => Dynamics::BestResponse,
        "fp" => Dynamics::Fictitious,
        "both" => Dynamics::Both,
        other => {
            return Err(Reader::err(
                "learning",
                "dynamics",
                format!("unknown dynamics {other:?} (br, fp or both)"),
            ))
        }
    };
    let init = match r.raw("learning", "init") {
        None | Some("random") => Init::Random,
        Some(s) => {
            let p =
                Profile::parse(s).map_err(|e| Reader::err("learning", "init", e.to_string()))?;
            if s.split(',').count() != k {
                return Err(Reader::err(
                    "learning",
                    "init",
                    format!("expected {k} actions"),
                ));
            }
            Init::Profile(p)
        }
    };
    let priors = match r.raw("learning", "priors") {
        None | Some("random") => Priors::Random,
        Some(_) => {
            let v = r.list("learning", "priors")?.unwrap();
            let v = if v.len() == 1 { vec![v[0]; k] } else { v };
            if v.len() != k || v.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Reader::err(
                    "learning",
                    "priors",
                    format!("expected 1 or {k} values in [0, 1]"),
                ));
            }
            Priors::Given(v)
        }
    };
    let record_every = r.parse::<usize>("learning", "record_every")?.unwrap_or(1);
    if record_every == 0 {
        return Err(Reader::err(
            "learning",
            "record_every",
            "must be at least 1",
        ));
    }
    Ok(LearningSettings {
        dynamics,
        runs: r.parse("learning", "runs")?.unwrap_or(1),
        max_steps: r.parse("learning", "max_steps")?.unwrap_or(1000),
        horizon: r.parse("learning", "horizon")?.unwrap_or(10_000),
        init,
        priors,
        record_every,
    })
}

pub fn parse(text: &str) -> Result<ExperimentConfig> {
    let sections = tokenize(text)?;
    let r = Reader {
        sections: &sections,
    };
    let k: usize = r
        .parse("network", "users")?
        .ok_or_else(|| ConfigError::Invalid("[network] users is required".into()))?;
    let spreading: u32 = r
        .parse("network", "spreading")?
        .ok_or_else(|| ConfigError::Invalid("[network] spreading is required".into()))?;

    let mut network =
        NetworkConfig::symmetric(k, spreading, r.parse("network", "alpha")?.unwrap_or(0.0));
    network.sigma2 = r.parse("network", "sigma2")?.unwrap_or(1.0);
    network.gains = r.per_user("gains", k, 1.0)?;
    network.rates = r.per_user("rates", k, 1.0)?;
    network.p_max = r.per_user("p_max", k, f64::INFINITY)?;
    network.block_duration = r.parse("network", "block_duration")?.unwrap_or(1.0);
    network.xi_min = r.parse("network", "xi_min")?.unwrap_or(0.0);
    network
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let explicit = r
        .list("network", "leaders")?
        .map(|v| {
            v.iter()
                .map(|x| {
                    if x.fract() == 0.0 && *x >= 0.0 && (*x as usize) < k {
                        Ok(*x as usize)
                    } else {
                        Err(Reader::err(
                            "network",
                            "leaders",
                            format!("bad user index {x}"),
                        ))
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let count = r.parse::<usize>("network", "num_leaders")?;
    let leaders = match (explicit, count) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invalid(
                "[network] leaders and num_leaders are mutually exclusive".into(),
            ))
        }
        (Some(v), None) => Some(v),
        (None, Some(l)) if l <= k => Some((0..l).collect()),
        (None, Some(l)) => {
            return Err(Reader::err(
                "network",
                "num_leaders",
                format!("{l} exceeds K = {k}"),
            ))
        }
        (None, None) => None,
    };

    Ok(ExperimentConfig {
        name: r.raw("scenario", "name").unwrap_or("unnamed").to_string(),
        network,
        efficiency: efficiency(&r)?,
        leaders,
        alphas: sweep_values(&r)?,
        learning: learning(&r, k)?,
        grid_points: r.parse("hybrid", "grid_points")?.unwrap_or(200),
        grid_spread: r.parse("hybrid", "grid_spread")?.unwrap_or(10.0),
        output: r.raw("output", "path").map(str::to_string),
    })
}
