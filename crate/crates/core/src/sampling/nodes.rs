//! Vertex-subset selection for sampling bandlimited signals.
//!
//! Greedy, A-design and E-design share one backward-elimination loop: start from all
//! vertices and repeatedly drop the vertex whose removal leaves the best objective.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::bounds::{a_design_objective, bandlimited_crb_trace, e_design_objective, sampled_band, FisherInfo};
use crate::error::{Error, Result};
use crate::linalg::spd_condition;
use crate::spectrum::Spectrum;

/// Largest condition number of `V_SR^T V_SR` accepted for a random subset.
pub const RANDOM_MAX_CONDITION: f64 = 1e6;
pub const RANDOM_MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodePolicy {
    Greedy,
    ADesign,
    EDesign,
    Random,
}

impl NodePolicy {
    pub fn tag(&self) -> &'static str {
        match self {
            NodePolicy::Greedy => "greedy",
            NodePolicy::ADesign => "a-design",
            NodePolicy::EDesign => "e-design",
            NodePolicy::Random => "random",
        }
    }
}

impl fmt::Display for NodePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for NodePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(NodePolicy::Greedy),
            "a-design" => Ok(NodePolicy::ADesign),
            "e-design" => Ok(NodePolicy::EDesign),
            "random" => Ok(NodePolicy::Random),
            other => Err(Error::Config(format!("unknown sampling policy `{other}`"))),
        }
    }
}

/// One elimination step: every candidate's objective (`+inf` when its information
/// matrix is singular) and the vertex that was dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct RemovalStep {
    pub candidates: Vec<(usize, f64)>,
    pub removed: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodePolicyResult {
    /// Sorted vertex indices.
    pub subset: Vec<usize>,
    pub policy: NodePolicy,
    /// Policy objective at `subset`: the bound trace for greedy and random, the
    /// A-design trace, or the smallest singular value of `V_SR` for E-design.
    pub objective: f64,
    /// Trace bound on the Dirichlet energy at `subset`.
    pub crb_trace: f64,
    pub steps: Vec<RemovalStep>,
}

fn check_budget(spec: &Spectrum, r: usize, d: usize, j: &FisherInfo) -> Result<()> {
    let m = spec.dim();
    if r == 0 || r > m {
        return Err(Error::BandOutOfRange { r, m });
    }
    if d < r || d > m {
        return Err(Error::InfeasibleBudget { d, r });
    }
    if j.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: j.dim(),
        });
    }
    Ok(())
}

/// Value the elimination loop minimizes for `policy` on subset `s`.
fn removal_objective(policy: NodePolicy, spec: &Spectrum, r: usize, s: &[usize], j: &FisherInfo) -> f64 {
    let value = match policy {
        NodePolicy::Greedy => j.restrict(s).and_then(|js| bandlimited_crb_trace(spec, r, s, &js)),
        NodePolicy::ADesign => j.restrict(s).and_then(|js| a_design_objective(spec, r, s, &js)),
        NodePolicy::EDesign => e_design_objective(spec, r, s).map(|v| -v),
        NodePolicy::Random => unreachable!("random selection does not eliminate"),
    };
    match value {
        Ok(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    }
}

fn finish(
    policy: NodePolicy,
    spec: &Spectrum,
    r: usize,
    subset: Vec<usize>,
    j: &FisherInfo,
    steps: Vec<RemovalStep>,
) -> Result<NodePolicyResult> {
    let js = j.restrict(&subset)?;
    let crb_trace = bandlimited_crb_trace(spec, r, &subset, &js)?;
    let objective = match policy {
        NodePolicy::Greedy | NodePolicy::Random => crb_trace,
        NodePolicy::ADesign => a_design_objective(spec, r, &subset, &js)?,
        NodePolicy::EDesign => e_design_objective(spec, r, &subset)?,
    };
    Ok(NodePolicyResult {
        subset,
        policy,
        objective,
        crb_trace,
        steps,
    })
}

fn eliminate(policy: NodePolicy, spec: &Spectrum, r: usize, d: usize, j: &FisherInfo) -> Result<NodePolicyResult> {
    check_budget(spec, r, d, j)?;
    let mut current: Vec<usize> = (0..spec.dim()).collect();
    let mut steps = Vec::new();
    while current.len() > d {
        let candidates: Vec<(usize, f64)> = (0..current.len())
            .into_par_iter()
            .map(|pos| {
                let mut s = current.clone();
                let node = s.remove(pos);
                (node, removal_objective(policy, spec, r, &s, j))
            })
            .collect();
        // strict comparison: the lowest vertex index wins ties
        let mut best: Option<(usize, f64)> = None;
        for (pos, &(_, v)) in candidates.iter().enumerate() {
            if v.is_finite() && best.is_none_or(|(_, bv)| v < bv) {
                best = Some((pos, v));
            }
        }
        let (pos, objective) = best.ok_or(Error::AllCandidatesSingular)?;
        let removed = current.remove(pos);
        steps.push(RemovalStep {
            candidates,
            removed,
            objective,
        });
    }
    finish(policy, spec, r, current, j, steps)
}

/// Backward elimination on the trace bound `sum_{m=2}^{R} lambda_m [(V_SR^T J_S V_SR)^{-1}]_mm`.
pub fn greedy_node_selection(spec: &Spectrum, r: usize, d: usize, j: &FisherInfo) -> Result<NodePolicyResult> {
    eliminate(NodePolicy::Greedy, spec, r, d, j)
}

/// Backward elimination on `Tr((V_SR^T J_S V_SR)^{-1})`.
pub fn adesign_selection(spec: &Spectrum, r: usize, d: usize, j: &FisherInfo) -> Result<NodePolicyResult> {
    eliminate(NodePolicy::ADesign, spec, r, d, j)
}

/// Backward elimination maximizing the smallest singular value of `V_SR`.
pub fn edesign_selection(spec: &Spectrum, r: usize, d: usize, j: &FisherInfo) -> Result<NodePolicyResult> {
    eliminate(NodePolicy::EDesign, spec, r, d, j)
}

/// Uniform `D`-subset, redrawn until `cond(V_SR^T V_SR) <= 1e6`.
pub fn random_selection(spec: &Spectrum, r: usize, d: usize, j: &FisherInfo, seed: u64) -> Result<NodePolicyResult> {
    check_budget(spec, r, d, j)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_MAX_ATTEMPTS {
        let mut subset = rand::seq::index::sample(&mut rng, spec.dim(), d).into_vec();
        subset.sort_unstable();
        let vsr = sampled_band(spec, r, &subset)?;
        if spd_condition(&vsr.tr_mul(&vsr)) <= RANDOM_MAX_CONDITION {
            return finish(NodePolicy::Random, spec, r, subset, j, Vec::new());
        }
    }
    Err(Error::NoFeasibleSubset {
        attempts: RANDOM_MAX_ATTEMPTS,
    })
}

pub fn select_nodes(
    policy: NodePolicy,
    spec: &Spectrum,
    r: usize,
    d: usize,
    j: &FisherInfo,
    seed: u64,
) -> Result<NodePolicyResult> {
    match policy {
        NodePolicy::Greedy => greedy_node_selection(spec, r, d, j),
        NodePolicy::ADesign => adesign_selection(spec, r, d, j),
        NodePolicy::EDesign => edesign_selection(spec, r, d, j),
        NodePolicy::Random => random_selection(spec, r, d, j, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::spectrum::decompose;

    fn p3() -> Spectrum {
        let g = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        decompose(&g.laplacian()).unwrap()
    }

    #[test]
    fn full_budget_keeps_everything() {
        let spec = p3();
        let j = FisherInfo::iid(3, 1.0).unwrap();
        for p in [
            NodePolicy::Greedy,
            NodePolicy::ADesign,
            NodePolicy::EDesign,
            NodePolicy::Random,
        ] {
            let res = select_nodes(p, &spec, 2, 3, &j, 1).unwrap();
            assert_eq!(res.subset, vec![0, 1, 2]);
            assert!(res.steps.is_empty());
        }
    }

    #[test]
    fn budget_below_band_rejected() {
        let spec = p3();
        let j = FisherInfo::iid(3, 1.0).unwrap();
        assert!(matches!(
            greedy_node_selection(&spec, 2, 1, &j),
            Err(Error::InfeasibleBudget { d: 1, r: 2 })
        ));
    }

    #[test]
    fn p3_greedy_drops_middle() {
        // V_R rows for P3: the middle vertex carries no information about frequency 2
        let spec = p3();
        let j = FisherInfo::iid(3, 1.0).unwrap();
        let res = greedy_node_selection(&spec, 2, 2, &j).unwrap();
        assert_eq!(res.subset, vec![0, 2]);
        assert_eq!(res.steps.len(), 1);
        assert_eq!(res.steps[0].removed, 1);
    }

    #[test]
    fn policy_names_round_trip() {
        for p in [
            NodePolicy::Greedy,
            NodePolicy::ADesign,
            NodePolicy::EDesign,
            NodePolicy::Random,
        ] {
            assert_eq!(p.tag().parse::<NodePolicy>().unwrap(), p);
        }
    }
}
