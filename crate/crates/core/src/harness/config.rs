//! Flat `key = value` configuration.
//!
//! Blank lines and `#` comments are ignored. Command-line flags named like the
//! keys (`--seed 7`, `--flock.n_agents=50`) override the file.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use super::HarnessError;
use crate::advisor::DEFAULT_HYSTERESIS;
use crate::colony::ColonyParams;
use crate::graph::ColorId;
use crate::metrics::DEFAULT_LAMBDA;
use crate::workloads::{
    gen_churn, gen_communities, gen_flocking, ChurnAction, ChurnSchedule, CommunitySpec, FlockSpec, ScheduledAction,
    VertexChurn, Workload,
};

fn config_error(message: impl Into<String>) -> HarnessError {
    HarnessError::Config(message.into())
}

/// Raw key/value pairs, consumed key by key so leftovers can be reported.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut map = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_error(format!("line {}: expected `key = value`", i + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(config_error(format!("line {}: empty key", i + 1)));
            }
            if map.values.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(config_error(format!("line {}: `{key}` set twice", i + 1)));
            }
        }
        Ok(map)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    /// Applies `--key value` and `--key=value` flags on top of the file.
    pub fn override_with(&mut self, flags: &[String]) -> Result<(), HarnessError> {
        let mut rest = flags.iter();
        while let Some(flag) = rest.next() {
            let body = flag
                .strip_prefix("--")
                .ok_or_else(|| config_error(format!("expected `--key value`, got `{flag}`")))?;
            match body.split_once('=') {
                Some((key, value)) => self.set(key, value),
                None => {
                    let value = rest.next().ok_or_else(|| config_error(format!("`--{body}` needs a value")))?;
                    self.set(body, value);
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, HarnessError> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(text) => text
                .parse()
                .map(Some)
                .map_err(|_| config_error(format!("`{key}`: cannot parse `{text}`"))),
        }
    }

    fn take_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T, HarnessError> {
        Ok(self.take(key)?.unwrap_or(default))
    }

    fn finish(self) -> Result<(), HarnessError> {
        match self.values.keys().next() {
            Some(key) => Err(config_error(format!("unknown key `{key}`"))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadKind {
    Communities(CommunitySpec),
    Churn(CommunitySpec, ChurnSchedule),
    Flocking(FlockSpec),
}

/// A generator plus the colors registered up front and the tick count.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub kind: WorkloadKind,
    pub colors: u64,
    pub steps: usize,
}

impl GenConfig {
    fn from_map(map: &mut ConfigMap, seed: u64) -> Result<Self, HarnessError> {
        let seed = map.take_or("gen_seed", seed)?;
        let colors = map.take_or("colors", 2)?;
        let steps: usize = map.take_or("steps", 1000)?;
        let community = |map: &mut ConfigMap| -> Result<CommunitySpec, HarnessError> {
            let d = CommunitySpec::default();
            Ok(CommunitySpec {
                n_per_community: map.take_or("community.n", d.n_per_community)?,
                k: map.take_or("community.k", d.k)?,
                w_in: map.take_or("community.w_in", d.w_in)?,
                w_out: map.take_or("community.w_out", d.w_out)?,
                p_in: map.take_or("community.p_in", d.p_in)?,
                p_out: map.take_or("community.p_out", d.p_out)?,
                seed,
            })
        };
        let workload: String = map
            .take("workload")?
            .ok_or_else(|| config_error("`workload` is required"))?;
        let kind = match workload.as_str() {
            "communities" => WorkloadKind::Communities(community(map)?),
            "churn" => {
                let spec = community(map)?;
                let actions = match map.take::<String>("churn.actions")? {
                    Some(text) => parse_actions(&text)?,
                    None => Vec::new(),
                };
                let remove_rate: f64 = map.take_or("churn.remove_rate", 0.0)?;
                let add_rate: f64 = map.take_or("churn.add_rate", 0.0)?;
                let from = map.take_or("churn.from", 1)?;
                let until = map.take_or("churn.until", steps)?;
                let churn = (remove_rate > 0.0 || add_rate > 0.0).then_some(VertexChurn {
                    remove_rate,
                    add_rate,
                    from,
                    until,
                });
                WorkloadKind::Churn(
                    spec,
                    ChurnSchedule {
                        steps,
                        actions,
                        churn,
                        seed,
                    },
                )
            }
            "flocking" => {
                let d = FlockSpec::default();
                WorkloadKind::Flocking(FlockSpec {
                    n_agents: map.take_or("flock.n_agents", d.n_agents)?,
                    world: map.take_or("flock.world", d.world)?,
                    comm_radius: map.take_or("flock.comm_radius", d.comm_radius)?,
                    perception: map.take_or("flock.perception", d.perception)?,
                    spread: map.take_or("flock.spread", d.spread)?,
                    min_speed: map.take_or("flock.min_speed", d.min_speed)?,
                    max_speed: map.take_or("flock.max_speed", d.max_speed)?,
                    cohesion: map.take_or("flock.cohesion", d.cohesion)?,
                    alignment: map.take_or("flock.alignment", d.alignment)?,
                    separation: map.take_or("flock.separation", d.separation)?,
                    separation_radius: map.take_or("flock.separation_radius", d.separation_radius)?,
                    noise: map.take_or("flock.noise", d.noise)?,
                    predator_count: map.take_or("flock.predator_count", d.predator_count)?,
                    predator_speed: map.take_or("flock.predator_speed", d.predator_speed)?,
                    flee_radius: map.take_or("flock.flee_radius", d.flee_radius)?,
                    flee: map.take_or("flock.flee", d.flee)?,
                    duration: steps,
                    seed,
                })
            }
            other => return Err(config_error(format!("unknown workload `{other}`"))),
        };
        Ok(Self { kind, colors, steps })
    }

    pub fn generate(&self) -> Result<Workload, HarnessError> {
        let workload = match &self.kind {
            WorkloadKind::Communities(spec) => gen_communities(spec)?
                .with_colors(self.colors)
                .with_extra_ticks(self.steps.saturating_sub(1)),
            WorkloadKind::Churn(spec, schedule) => {
                let base = gen_communities(spec)?.with_colors(self.colors);
                gen_churn(&base, spec, schedule)?
            }
            WorkloadKind::Flocking(spec) => gen_flocking(spec)?.with_colors(self.colors),
        };
        Ok(workload)
    }
}

/// Comma-separated `<tick>:<action>[:args]` items, e.g.
/// `100:merge:0:1:1.0,150:split:0:1,200:community:4,200:add_color:2,300:remove_color:0`.
pub fn parse_actions(text: &str) -> Result<Vec<ScheduledAction>, HarnessError> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let bad = || config_error(format!("bad churn action `{item}`"));
        let num = |k: usize| parts.get(k).ok_or_else(bad)?.parse::<u64>().map_err(|_| bad());
        let at = num(0)? as usize;
        let action = match (parts.get(1).copied(), parts.len()) {
            (Some("merge"), 5) => ChurnAction::Merge {
                a: num(2)? as u32,
                b: num(3)? as u32,
                p: parts[4].parse().map_err(|_| bad())?,
            },
            (Some("split"), 4) => ChurnAction::Split {
                a: num(2)? as u32,
                b: num(3)? as u32,
            },
            (Some("community"), 3) => ChurnAction::AddCommunity { size: num(2)? as usize },
            (Some("add_color"), 3) => ChurnAction::AddColor(ColorId(num(2)?)),
            (Some("remove_color"), 3) => ChurnAction::RemoveColor(ColorId(num(2)?)),
            _ => return Err(bad()),
        };
        out.push(ScheduledAction { at, action });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Trace(PathBuf),
    Generated(GenConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ColonyParams,
    pub lambda: f64,
    pub h: u32,
    pub seed: u64,
    pub max_steps: u64,
    pub source: Source,
    /// Metrics CSV; standard output when absent.
    pub metrics: Option<PathBuf>,
    pub advice: Option<PathBuf>,
    /// Snapshot directory.
    pub snapshots: Option<PathBuf>,
    pub snapshot_every: u64,
}

impl RunConfig {
    pub fn from_map(mut map: ConfigMap) -> Result<Self, HarnessError> {
        let d = ColonyParams::default();
        let params = ColonyParams {
            alpha: map.take_or("alpha", d.alpha)?,
            beta: map.take_or("beta", d.beta)?,
            gamma: map.take_or("gamma", d.gamma)?,
            rho: map.take_or("rho", d.rho)?,
            q: map.take_or("q", d.q)?,
            epsilon: map.take_or("epsilon", d.epsilon)?,
            phi_min: map.take_or("phi_min", d.phi_min)?,
            eta: map.take_or("eta", d.eta)?,
            tau: map.take_or("tau", d.tau)?,
        };
        params.validate()?;
        let lambda: f64 = map.take_or("lambda", DEFAULT_LAMBDA)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(config_error("`lambda` must be in [0, 1]"));
        }
        let h = map.take_or("h", DEFAULT_HYSTERESIS)?;
        if h == 0 {
            return Err(config_error("`h` must be >= 1"));
        }
        let seed = map.take_or("seed", 0)?;
        let max_steps = map.take_or("max_steps", u64::MAX)?;
        if max_steps == 0 {
            return Err(config_error("`max_steps` must be >= 1"));
        }
        let source = match map.take::<PathBuf>("trace")? {
            Some(path) if map.contains("workload") => {
                return Err(config_error(format!(
                    "both `trace` ({}) and `workload` given",
                    path.display()
                )))
            }
            Some(path) => Source::Trace(path),
            None if map.contains("workload") => Source::Generated(GenConfig::from_map(&mut map, seed)?),
            None => return Err(config_error("one of `trace` or `workload` is required")),
        };
        let config = Self {
            params,
            lambda,
            h,
            seed,
            max_steps,
            source,
            metrics: map.take("metrics")?,
            advice: map.take("advice")?,
            snapshots: map.take("snapshots")?,
            snapshot_every: map.take_or("snapshot_every", 100)?,
        };
        map.finish()?;
        Ok(config)
    }
}

/// What `gen` writes: a trace and its ground-truth sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct GenJob {
    pub gen: GenConfig,
    pub trace: PathBuf,
    pub truth: PathBuf,
}

impl GenJob {
    pub fn from_map(mut map: ConfigMap) -> Result<Self, HarnessError> {
        let seed = map.take_or("seed", 0)?;
        let gen = GenConfig::from_map(&mut map, seed)?;
        let trace: PathBuf = map.take("trace")?.ok_or_else(|| config_error("`trace` is required"))?;
        let truth = map.take("truth")?.unwrap_or_else(|| {
            let mut name = trace.clone().into_os_string();
            name.push(".truth");
            PathBuf::from(name)
        });
        map.finish()?;
        Ok(Self { gen, trace, truth })
    }
}
