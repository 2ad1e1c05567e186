//! Procedural generators and algorithmic verifiers for symbolic reasoning tasks.

pub mod algebra;
pub mod bayes;
pub mod cfg;
pub mod env;
pub mod grammar;
pub mod nli;
pub mod planning;
pub mod prover;
pub mod regex;
pub mod registry;
pub mod rng;
pub mod sequence;
pub mod sets;
pub mod tptp;

pub use env::{generate, score, DifficultySchedule, GenError, Generated, ParamSpec, Params, Reject, ScoreResult, Task, TaskInstance};
pub use registry::{all_tasks, get_task, task_names};
pub use rng::{derive_seed, stochastic_round, TaskRng};
