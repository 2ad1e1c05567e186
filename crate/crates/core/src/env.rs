//! Task abstraction, difficulty schedules, the instance record and the reward contract.

use std::collections::BTreeMap;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::rng::{derive_seed, stochastic_round, TaskRng};

/// Retry budget for rejection-sampling generators, per difficulty level.
pub const MAX_RETRIES: u64 = 1000;

/// One generated problem. Field order is the canonical JSONL key order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub task: String,
    pub seed: u64,
    pub difficulty: f64,
    pub prompt: String,
    pub answer: String,
    #[serde(default)]
    pub metadata: Map<String, Value>,
}

impl TaskInstance {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn meta(&self, key: &str) -> Option<&Value> {
        self.metadata.get(key)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub reward: f64,
    pub details: Map<String, Value>,
}

impl ScoreResult {
    pub fn new(reward: f64) -> Self {
        let reward = if reward.is_finite() { reward.clamp(0.0, 1.0) } else { 0.0 };
        ScoreResult {
            reward,
            details: Map::new(),
        }
    }

    pub fn binary(ok: bool) -> Self {
        ScoreResult::new(if ok { 1.0 } else { 0.0 })
    }

    pub fn parse_error(msg: impl fmt::Display) -> Self {
        ScoreResult::new(0.0).with("parse_error", msg.to_string())
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }
}

/// Affine map `base + rate * d`, clamped to `[min, max]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub base: f64,
    pub rate: f64,
    pub min: f64,
    pub max: f64,
    /// Discrete parameters pass through stochastic rounding.
    pub discrete: bool,
}

impl ParamSpec {
    pub fn continuous(name: &'static str, base: f64, rate: f64, min: f64, max: f64) -> Self {
        ParamSpec { name, base, rate, min, max, discrete: false }
    }

    pub fn discrete(name: &'static str, base: f64, rate: f64, min: f64, max: f64) -> Self {
        ParamSpec { name, base, rate, min, max, discrete: true }
    }

    pub fn raw(&self, d: f64) -> f64 {
        (self.base + self.rate * d).clamp(self.min, self.max)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DifficultySchedule {
    pub params: Vec<ParamSpec>,
}

impl DifficultySchedule {
    pub fn new(params: Vec<ParamSpec>) -> Self {
        DifficultySchedule { params }
    }

    /// Maps a knob value to concrete parameters. Discrete values are drawn in
    /// schedule order from `rng`.
    pub fn map(&self, d: f64, rng: &mut TaskRng) -> Params {
        assert!(d >= 0.0 && d.is_finite(), "difficulty must be finite and >= 0");
        let mut values = BTreeMap::new();
        for spec in &self.params {
            let raw = spec.raw(d);
            let v = if spec.discrete {
                stochastic_round(raw.max(0.0), rng) as f64
            } else {
                raw
            };
            values.insert(spec.name, v);
        }
        Params { values }
    }

    /// Pre-rounding parameter table at knob `d`, for documentation and `list`.
    pub fn table(&self, d: f64) -> Map<String, Value> {
        self.params
            .iter()
            .map(|p| (p.name.to_string(), Value::from(p.raw(d))))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params {
    values: BTreeMap<&'static str, f64>,
}

impl Params {
    pub fn from_pairs(pairs: &[(&'static str, f64)]) -> Self {
        Params {
            values: pairs.iter().copied().collect(),
        }
    }

    pub fn get(&self, name: &str) -> f64 {
        *self
            .values
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn usize(&self, name: &str) -> usize {
        self.get(name).round().max(0.0) as usize
    }

    pub fn set(&mut self, name: &'static str, value: f64) {
        self.values.insert(name, value);
    }

    pub fn to_json(&self) -> Value {
        Value::Object(
            self.values
                .iter()
                .map(|(k, v)| (k.to_string(), Value::from(*v)))
                .collect(),
        )
    }
}

/// Prompt, answer and metadata produced by a generator.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Generated {
    pub prompt: String,
    pub answer: String,
    pub metadata: Map<String, Value>,
}

impl Generated {
    pub fn new(prompt: impl Into<String>, answer: impl Into<String>) -> Self {
        Generated {
            prompt: prompt.into(),
            answer: answer.into(),
            metadata: Map::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }
}

/// A generator attempt that should be retried with a fresh stream.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("rejected: {0}")]
pub struct Reject(pub String);

impl Reject {
    pub fn new(msg: impl Into<String>) -> Self {
        Reject(msg.into())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("difficulty must be a finite non-negative number, got {0}")]
    BadDifficulty(f64),
    #[error("task `{task}` exhausted its retry budget: {last}")]
    Exhausted { task: String, last: String },
}

pub trait Task: Sync {
    fn name(&self) -> &'static str;

    fn schedule(&self) -> DifficultySchedule;

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject>;

    /// Must never panic on arbitrary candidate text; [`score`] adds a guard anyway.
    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult;

    /// Size measure used to audit difficulty control, read back from metadata.
    fn size_proxy(&self, _instance: &TaskInstance) -> Option<f64> {
        None
    }
}

/// Generates the instance for `(task, seed, difficulty)`.
///
/// Each attempt gets its own derived stream, so a rejection loop replays
/// identically. After [`MAX_RETRIES`] rejections the knob is halved, then
/// dropped to zero, before giving up.
pub fn generate(task: &dyn Task, seed: u64, difficulty: f64) -> Result<TaskInstance, GenError> {
    if !(difficulty.is_finite() && difficulty >= 0.0) {
        return Err(GenError::BadDifficulty(difficulty));
    }
    let schedule = task.schedule();
    let mut levels = vec![difficulty];
    for level in [difficulty / 2.0, 0.0] {
        if !levels.contains(&level) {
            levels.push(level);
        }
    }
    let mut last = String::new();
    for (stage, level) in levels.iter().enumerate() {
        let label = format!("{}#{}", task.name(), stage);
        for attempt in 0..MAX_RETRIES {
            let mut rng = TaskRng::new(derive_seed(seed, &label, attempt));
            let params = schedule.map(*level, &mut rng);
            match task.generate(&params, &mut rng) {
                Ok(g) => {
                    let mut metadata = g.metadata;
                    metadata.insert("params".into(), params.to_json());
                    if stage > 0 {
                        metadata.insert("effective_difficulty".into(), Value::from(*level));
                    }
                    return Ok(TaskInstance {
                        task: task.name().to_string(),
                        seed,
                        difficulty,
                        prompt: g.prompt,
                        answer: g.answer,
                        metadata,
                    });
                }
                Err(Reject(msg)) => last = msg,
            }
        }
    }
    Err(GenError::Exhausted {
        task: task.name().to_string(),
        last,
    })
}

/// Scores a candidate; never panics and always returns a reward in `[0, 1]`.
pub fn score(task: &dyn Task, instance: &TaskInstance, candidate: &str) -> ScoreResult {
    if instance.task != task.name() {
        return ScoreResult::new(0.0).with(
            "error",
            format!("instance is for `{}`, not `{}`", instance.task, task.name()),
        );
    }
    match catch_unwind(AssertUnwindSafe(|| task.score(instance, candidate))) {
        Ok(r) => ScoreResult { reward: ScoreResult::new(r.reward).reward, details: r.details },
        Err(_) => ScoreResult::new(0.0).with("error", "scorer failed on this candidate"),
    }
}

/// Lowercases and trims surrounding whitespace and punctuation.
pub fn normalize_word(s: &str) -> String {
    s.trim()
        .trim_matches(|c: char| c.is_whitespace() || c.is_ascii_punctuation())
        .to_lowercase()
}

/// Parses `[1, 4]`-style integer lists. Brackets are optional.
pub fn parse_index_list(s: &str) -> Option<Vec<i64>> {
    let t = s.trim().trim_matches('`').trim();
    let t = t.strip_prefix('[').unwrap_or(t);
    let t = t.strip_suffix(']').unwrap_or(t);
    let t = t.trim();
    if t.is_empty() {
        return Some(Vec::new());
    }
    t.split(',')
        .map(|p| p.trim().parse::<i64>().ok())
        .collect()
}

pub fn render_index_list(xs: &[usize]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Jaccard similarity of two finite sets, with empty-vs-empty = 1.
pub fn jaccard<T: Ord>(a: &std::collections::BTreeSet<T>, b: &std::collections::BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Reads an array of strings out of instance metadata.
pub fn meta_strings(instance: &TaskInstance, key: &str) -> Option<Vec<String>> {
    instance
        .meta(key)?
        .as_array()?
        .iter()
        .map(|v| v.as_str().map(str::to_string))
        .collect()
}

pub fn meta_str<'a>(instance: &'a TaskInstance, key: &str) -> Option<&'a str> {
    instance.meta(key)?.as_str()
}

pub fn meta_f64(instance: &TaskInstance, key: &str) -> Option<f64> {
    instance.meta(key)?.as_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Flaky;

    impl Task for Flaky {
        fn name(&self) -> &'static str {
            "flaky"
        }
        fn schedule(&self) -> DifficultySchedule {
            DifficultySchedule::new(vec![ParamSpec::discrete("n", 1.0, 1.0, 0.0, 10.0)])
        }
        fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
            // Only tiny instances succeed, forcing the fallback at high d.
            if params.usize("n") > 2 {
                return Err(Reject::new("too big"));
            }
            Ok(Generated::new(format!("n={}", params.usize("n")), rng.below(10).to_string()))
        }
        fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
            ScoreResult::binary(candidate == instance.answer)
        }
    }

    #[test]
    fn map_difficulty_is_monotone_and_clamped() {
        let s = DifficultySchedule::new(vec![
            ParamSpec::discrete("len", 2.0, 0.8, 1.0, 20.0),
            ParamSpec::continuous("p", 0.1, 0.5, 0.0, 0.6),
        ]);
        let mut rng = TaskRng::new(0);
        let at0 = s.map(0.0, &mut rng);
        let at5 = s.map(5.0, &mut rng);
        assert_eq!(at0.usize("len"), 2);
        assert!(at5.usize("len") >= 2);
        assert_eq!(at5.get("p"), 0.6);
    }

    #[test]
    fn fallback_reduces_difficulty_deterministically() {
        let a = generate(&Flaky, 11, 8.0).unwrap();
        let b = generate(&Flaky, 11, 8.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.difficulty, 8.0);
        assert!(a.metadata.contains_key("effective_difficulty"));
    }

    #[test]
    fn negative_difficulty_is_rejected() {
        assert!(matches!(generate(&Flaky, 1, -1.0), Err(GenError::BadDifficulty(_))));
    }

    #[test]
    fn canonical_key_order() {
        let inst = generate(&Flaky, 1, 0.0).unwrap();
        let line = inst.to_json_line();
        let order = ["\"task\"", "\"seed\"", "\"difficulty\"", "\"prompt\"", "\"answer\"", "\"metadata\""];
        let pos: Vec<usize> = order.iter().map(|k| line.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{line}");
    }

    #[test]
    fn score_guards_task_mismatch() {
        let mut inst = generate(&Flaky, 1, 0.0).unwrap();
        inst.task = "other".into();
        assert_eq!(score(&Flaky, &inst, "1").reward, 0.0);
    }

    #[test]
    fn index_lists() {
        assert_eq!(parse_index_list("[0, 4]"), Some(vec![0, 4]));
        assert_eq!(parse_index_list(" [ ] "), Some(vec![]));
        assert_eq!(parse_index_list("[1, x]"), None);
        assert_eq!(render_index_list(&[1, 4]), "[1, 4]");
    }
}
