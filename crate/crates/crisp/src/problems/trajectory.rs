//! Lossless conversion between the flat decision vector and a per-step view.

use crate::nlp::NlpProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    /// per-step variable names in declaration order
    pub names: Vec<String>,
    /// one row per step, each of length `names.len()`
    pub steps: Vec<Vec<f64>>,
}

/// Splits `x` by the problem's variable layout. Returns `None` for problems
/// without a trajectory structure (the toys).
pub fn decode_trajectory(problem: &NlpProblem, x: &[f64]) -> Option<Trajectory> {
    let layout = problem.layout.as_ref()?;
    let stride = layout.stride();
    let steps = (0..layout.horizon)
        .map(|i| x[i * stride..(i + 1) * stride].to_vec())
        .collect();
    Some(Trajectory {
        dt: layout.dt,
        names: layout.per_step.iter().map(|v| v.name.clone()).collect(),
        steps,
    })
}

pub fn encode_trajectory(traj: &Trajectory) -> Vec<f64> {
    let mut x = Vec::with_capacity(traj.steps.len() * traj.names.len());
    for step in &traj.steps {
        x.extend_from_slice(step);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::toy_mpcc;

    #[test]
    fn toys_have_no_layout() {
        assert!(decode_trajectory(&toy_mpcc(), &[0.0, 0.0]).is_none());
    }
}
