//! The toy MPCCs and the six contact-implicit trajectory optimization
//! benchmarks, each exposed as a parameter struct that builds an
//! [`NlpProblem`](crate::nlp::NlpProblem) with analytic derivatives and
//! generates initial guesses.

mod cartpole;
mod hopper;
mod push_box;
mod push_t;
mod toy;
mod trajectory;
mod transport;
mod waiter;

pub use cartpole::CartpoleParams;
pub use hopper::HopperParams;
pub use push_box::PushBoxParams;
pub use push_t::PushTParams;
pub use toy::{cq_fail_toy, toy_mpcc, CqFailParams, ToyMpccParams};
pub use trajectory::{decode_trajectory, encode_trajectory, Trajectory};
pub use transport::TransportParams;
pub use waiter::WaiterParams;

use crate::nlp::{NlpError, NlpProblem, ProductMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    AllZero,
    PassiveRollout,
    NoisyRollout { seed: u64, sigma: f64 },
}

impl std::str::FromStr for InitialGuess {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all_zero" | "zero" => Ok(InitialGuess::AllZero),
            "passive" | "passive_rollout" => Ok(InitialGuess::PassiveRollout),
            "noisy" | "noisy_rollout" => Ok(InitialGuess::NoisyRollout {
                seed: 0,
                sigma: 0.1,
            }),
            other => Err(format!(
                "unknown guess mode '{other}' (expected all_zero, passive, noisy)"
            )),
        }
    }
}

/// A problem definition: parameters plus the recipe turning them into an NLP.
pub trait ProblemDef: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, mode: ProductMode) -> Result<NlpProblem, NlpError>;
    fn initial_guess(&self, guess: &InitialGuess) -> Vec<f64>;
    /// serialized parameters, for run manifests
    fn params_json(&self) -> serde_json::Value;
}

pub const PROBLEM_NAMES: &[&str] = &[
    "toy_mpcc",
    "cq_fail",
    "cartpole",
    "push_box",
    "transport",
    "push_t",
    "hopper",
    "waiter",
];

/// Instantiates a problem from its registry name, optional TOML parameter
/// text, and `key=value` override pairs applied on top.
pub fn problem_from_config(
    name: &str,
    params_toml: Option<&str>,
    overrides: &[(String, String)],
) -> Result<Box<dyn ProblemDef>, String> {
    fn load<T: serde::de::DeserializeOwned + serde::Serialize + Default>(
        params_toml: Option<&str>,
        overrides: &[(String, String)],
    ) -> Result<T, String> {
        let mut table: toml::Table = match params_toml {
            Some(text) => text.parse().map_err(|e| format!("bad TOML: {e}"))?,
            None => toml::Table::new(),
        };
        for (key, value) in overrides {
            let parsed: toml::Value = value
                .parse::<i64>()
                .map(toml::Value::Integer)
                .or_else(|_| value.parse::<f64>().map(toml::Value::Float))
                .or_else(|_| value.parse::<bool>().map(toml::Value::Boolean))
                .unwrap_or_else(|_| toml::Value::String(value.clone()));
            table.insert(key.clone(), parsed);
        }
        // fill unset keys from the defaults so serde(default) is not required
        let defaults = toml::Table::try_from(T::default()).map_err(|e| e.to_string())?;
        for (k, v) in defaults {
            table.entry(k).or_insert(v);
        }
        table.try_into().map_err(|e| format!("bad parameters: {e}"))
    }
    match name {
        "toy_mpcc" => Ok(Box::new(load::<ToyMpccParams>(params_toml, overrides)?)),
        "cq_fail" => Ok(Box::new(load::<CqFailParams>(params_toml, overrides)?)),
        "cartpole" => Ok(Box::new(load::<CartpoleParams>(params_toml, overrides)?)),
        "push_box" => Ok(Box::new(load::<PushBoxParams>(params_toml, overrides)?)),
        "transport" => Ok(Box::new(load::<TransportParams>(params_toml, overrides)?)),
        "push_t" => Ok(Box::new(load::<PushTParams>(params_toml, overrides)?)),
        "hopper" => Ok(Box::new(load::<HopperParams>(params_toml, overrides)?)),
        "waiter" => Ok(Box::new(load::<WaiterParams>(params_toml, overrides)?)),
        other => Err(format!(
            "unknown problem '{other}' (expected one of {})",
            PROBLEM_NAMES.join(", ")
        )),
    }
}

/// Seeded standard normal samples via Box-Muller, used by noisy rollouts.
pub(crate) fn gaussian_noise(rng: &mut ChaCha8Rng, out: &mut [f64], sigma: f64) {
    let mut i = 0;
    while i < out.len() {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        out[i] += sigma * r * c;
        i += 1;
        if i < out.len() {
            out[i] += sigma * r * s;
            i += 1;
        }
    }
}

pub(crate) fn apply_noise(x: &mut [f64], seed: u64, sigma: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_noise(&mut rng, x, sigma);
}
