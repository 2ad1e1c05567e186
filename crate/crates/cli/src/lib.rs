//! Batch generation, answer-file scoring and the line-delimited JSON serve loop.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use verigen::{derive_seed, generate, get_task, score, task_names, Task, TaskInstance};

/// Why a command could not run: the caller's fault or the environment's.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

pub fn lookup(name: &str) -> Result<&'static dyn Task, CliError> {
    get_task(name).ok_or_else(|| CliError::Usage(format!("unknown task `{name}`; available: {}", task_names().join(", "))))
}

/// Seed of the `i`-th instance in a batch.
pub fn instance_seed(seed: u64, task: &str, i: u64) -> u64 {
    derive_seed(seed, task, i)
}

/// Generates `count` instances; order follows the index whatever the number
/// of workers.
pub fn gen_batch(task: &str, seed: u64, difficulty: f64, count: u64, jobs: usize) -> Result<Vec<TaskInstance>, CliError> {
    let t = lookup(task)?;
    if !(difficulty.is_finite() && difficulty >= 0.0) {
        return Err(CliError::Usage(format!("difficulty must be a finite number >= 0, got {difficulty}")));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().context("starting worker pool")?;
    let out: Result<Vec<TaskInstance>> = pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| generate(t, instance_seed(seed, task, i), difficulty).map_err(anyhow::Error::from))
            .collect()
    });
    Ok(out?)
}

pub fn write_jsonl(instances: &[TaskInstance], mut w: impl Write) -> Result<()> {
    for inst in instances {
        writeln!(w, "{}", inst.to_json_line())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_instances(text: &str) -> Result<Vec<TaskInstance>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("instance line {}", i + 1)))
        .collect()
}

/// One line of an answer file: a JSON object carrying `answer` (or
/// `candidate`) and optionally `task` and `seed`, or else raw answer text.
#[derive(Clone, Debug, PartialEq)]
pub struct AnswerLine {
    pub key: Option<(String, u64)>,
    pub answer: String,
}

pub fn read_answers(text: &str) -> Vec<AnswerLine> {
    text.lines()
        .map(|l| {
            let parsed: Option<Map<String, Value>> = serde_json::from_str(l).ok();
            match parsed {
                Some(obj) if obj.contains_key("answer") || obj.contains_key("candidate") => {
                    let answer = obj.get("answer").or_else(|| obj.get("candidate"));
                    let answer = match answer {
                        Some(Value::String(s)) => s.clone(),
                        Some(other) => other.to_string(),
                        None => String::new(),
                    };
                    let key = match (obj.get("task").and_then(Value::as_str), obj.get("seed").and_then(Value::as_u64)) {
                        (Some(t), Some(s)) => Some((t.to_string(), s)),
                        _ => None,
                    };
                    AnswerLine { key, answer }
                }
                _ => AnswerLine { key: None, answer: l.to_string() },
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scored {
    pub task: String,
    pub seed: u64,
    pub reward: f64,
    pub details: Map<String, Value>,
}

impl Scored {
    pub fn to_json_line(&self) -> String {
        json!({"task": self.task, "seed": self.seed, "reward": self.reward, "details": self.details}).to_string()
    }
}

/// Joins answers by `(task, seed)` when every answer line is keyed, by line
/// otherwise. Instances without an answer get reward 0.
pub fn score_all(instances: &[TaskInstance], answers: &[AnswerLine]) -> Result<Vec<Scored>> {
    let keyed = !answers.is_empty() && answers.iter().all(|a| a.key.is_some());
    let by_key: HashMap<(String, u64), &str> = if keyed {
        answers.iter().map(|a| (a.key.clone().expect("keyed"), a.answer.as_str())).collect()
    } else {
        HashMap::new()
    };
    instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let candidate = if keyed {
                by_key.get(&(inst.task.clone(), inst.seed)).copied()
            } else {
                answers.get(i).map(|a| a.answer.as_str())
            };
            let (reward, details) = match candidate {
                Some(c) => {
                    let t = get_task(&inst.task).with_context(|| format!("unknown task `{}` in instance file", inst.task))?;
                    let r = score(t, inst, c);
                    (r.reward, r.details)
                }
                None => {
                    let mut d = Map::new();
                    d.insert("missing".into(), Value::Bool(true));
                    (0.0, d)
                }
            };
            Ok(Scored { task: inst.task.clone(), seed: inst.seed, reward, details })
        })
        .collect()
}

/// Per-task mean reward, in first-appearance order.
pub fn summary(scored: &[Scored]) -> String {
    let mut order: Vec<&str> = Vec::new();
    let mut acc: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for s in scored {
        let e = acc.entry(&s.task).or_insert_with(|| {
            order.push(&s.task);
            (0, 0.0)
        });
        e.0 += 1;
        e.1 += s.reward;
    }
    let width = order.iter().map(|t| t.len()).max().unwrap_or(4).max(4);
    let mut out = format!("{:width$}  {:>6}  {:>11}\n", "task", "n", "mean_reward");
    for t in order {
        let (n, sum) = acc[t];
        out.push_str(&format!("{t:width$}  {n:>6}  {:>11.4}\n", sum / n as f64));
    }
    out
}

/// Task names with their pre-rounding parameters at knob 0 and 5.
pub fn task_table() -> Value {
    let rows: Vec<Value> = verigen::all_tasks()
        .iter()
        .map(|t| {
            let s = t.schedule();
            json!({"name": t.name(), "params_d0": s.table(0.0), "params_d5": s.table(5.0)})
        })
        .collect();
    Value::Array(rows)
}

fn error_response(msg: impl std::fmt::Display) -> Response {
    Response(vec![("ok".into(), "false".into())]).value("error", &Value::from(msg.to_string()))
}

/// A response object whose members are already-serialized JSON, so instance
/// records keep their canonical key order.
struct Response(Vec<(String, String)>);

impl Response {
    fn ok() -> Self {
        Response(vec![("ok".into(), "true".into())])
    }

    fn raw(mut self, key: &str, json: String) -> Self {
        self.0.push((key.into(), json));
        self
    }

    fn value(self, key: &str, v: &Value) -> Self {
        self.raw(key, v.to_string())
    }

    fn render(&self) -> String {
        let members: Vec<String> = self.0.iter().map(|(k, v)| format!("{}:{v}", Value::from(k.as_str()))).collect();
        format!("{{{}}}", members.join(","))
    }
}

fn handle(req: &Value) -> Response {
    let Some(op) = req.get("op").and_then(Value::as_str) else {
        return error_response("missing `op`");
    };
    match op {
        "list" => Response::ok().value("tasks", &task_table()),
        "gen" => {
            let Some(task) = req.get("task").and_then(Value::as_str) else {
                return error_response("gen needs `task`");
            };
            let seed = req.get("seed").map_or(Some(0), Value::as_u64);
            let difficulty = req.get("difficulty").map_or(Some(0.0), Value::as_f64);
            let (Some(seed), Some(difficulty)) = (seed, difficulty) else {
                return error_response("`seed` must be a non-negative integer and `difficulty` a number");
            };
            let count = match req.get("count") {
                None => None,
                Some(c) => match c.as_u64() {
                    Some(c) => Some(c),
                    None => return error_response("`count` must be a non-negative integer"),
                },
            };
            match gen_batch(task, seed, difficulty, count.unwrap_or(1), 1) {
                Ok(batch) => match count {
                    None => Response::ok().raw("instance", batch[0].to_json_line()),
                    Some(_) => {
                        let lines: Vec<String> = batch.iter().map(TaskInstance::to_json_line).collect();
                        Response::ok().raw("instances", format!("[{}]", lines.join(",")))
                    }
                },
                Err(CliError::Usage(m)) => error_response(m),
                Err(CliError::Runtime(e)) => error_response(format!("{e:#}")),
            }
        }
        "score" => {
            let inst: TaskInstance = match req.get("instance").map(|v| serde_json::from_value(v.clone())) {
                Some(Ok(i)) => i,
                Some(Err(e)) => return error_response(format!("bad instance: {e}")),
                None => return error_response("score needs `instance`"),
            };
            let Some(candidate) = req.get("candidate").and_then(Value::as_str) else {
                return error_response("score needs a string `candidate`");
            };
            let Some(t) = get_task(&inst.task) else {
                return error_response(format!("unknown task `{}`", inst.task));
            };
            let r = score(t, &inst, candidate);
            Response::ok().value("reward", &json!(r.reward)).value("details", &Value::Object(r.details))
        }
        other => error_response(format!("unknown op `{other}`")),
    }
}

/// Answers one request line. An `id` field, if present, is echoed back.
pub fn handle_line(line: &str) -> String {
    let resp = match serde_json::from_str::<Value>(line) {
        Ok(req) if req.is_object() => {
            let resp = handle(&req);
            match req.get("id") {
                Some(id) => resp.value("id", id),
                None => resp,
            }
        }
        Ok(_) => error_response("request must be a JSON object"),
        Err(e) => error_response(format!("malformed JSON: {e}")),
    };
    resp.render()
}

/// Serves requests until the input closes. Blank lines are skipped.
pub fn serve(input: impl BufRead, mut output: impl Write) -> Result<()> {
    for line in input.lines() {
        let line = line.context("reading request")?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(output, "{}", handle_line(&line))?;
        output.flush()?;
    }
    Ok(())
}
