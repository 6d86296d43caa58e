use std::collections::VecDeque;

use super::{rho_from_precs, ChiField, Grid};
use crate::dynamics::reduced_density_matrix;
use crate::error::{Error, Result};
use crate::model::{DensityMatrix, ModelParams, PrincipalAmplitudes};

/// `e^{−9/2}`: the 3σ contour of a unit-peak branch Gaussian.
pub const DEFAULT_EPS: f64 = 0.011108996538242306;

/// Nodes where one branch component exceeds the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsSupport {
    pub gamma: usize,
    pub eps: f64,
    /// Sorted flat node indices.
    pub cells: Vec<usize>,
}

impl EpsSupport {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.cells.binary_search(&k).is_ok()
    }
}

/// ε-supports `{Ω : h^γ_t(Ω) > ε}` of every branch component.
pub fn eps_supports(field: &ChiField, eps: f64) -> Result<Vec<EpsSupport>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidEps(eps));
    }
    Ok(field
        .h
        .iter()
        .enumerate()
        .map(|(gamma, h)| EpsSupport {
            gamma,
            eps,
            cells: (0..h.len()).filter(|&k| h[k] > eps).collect(),
        })
        .collect())
}

/// True iff no node belongs to two supports.
pub fn disjoint(supports: &[EpsSupport]) -> bool {
    for (a, sa) in supports.iter().enumerate() {
        for sb in &supports[a + 1..] {
            let (small, large) = if sa.len() <= sb.len() { (sa, sb) } else { (sb, sa) };
            if small.cells.iter().any(|&k| large.contains(k)) {
                return false;
            }
        }
    }
    true
}

/// Smallest 4-neighbour graph distance between two supports; `None` if
/// either is empty. Zero means they share a node.
pub fn support_distance(grid: &Grid, a: &EpsSupport, b: &EpsSupport) -> Option<usize> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let mut dist = vec![usize::MAX; grid.len()];
    let mut queue = VecDeque::new();
    for &k in &a.cells {
        dist[k] = 0;
        queue.push_back(k);
    }
    while let Some(k) = queue.pop_front() {
        if b.contains(k) {
            return Some(dist[k]);
        }
        for nb in grid.neighbours(k) {
            if dist[nb] == usize::MAX {
                dist[nb] = dist[k] + 1;
                queue.push_back(nb);
            }
        }
    }
    None
}

/// Disjointness with a margin: every pair of supports at graph distance
/// greater than `gap_cells`. `gap_cells = 0` is plain [`disjoint`].
pub fn disjoint_with_gap(grid: &Grid, supports: &[EpsSupport], gap_cells: usize) -> bool {
    if gap_cells == 0 {
        return disjoint(supports);
    }
    for (a, sa) in supports.iter().enumerate() {
        for sb in &supports[a + 1..] {
            if let Some(d) = support_distance(grid, sa, sb) {
                if d <= gap_cells {
                    return false;
                }
            }
        }
    }
    true
}

/// 4-connected components of the superlevel set `{χ² > eps}`, each a
/// sorted list of node indices, ordered by their smallest node.
pub fn superlevel_components(field: &ChiField, eps: f64) -> Vec<Vec<usize>> {
    let grid = &field.grid;
    let inside: Vec<bool> = field.chi2.iter().map(|&v| v > eps).collect();
    let mut seen = vec![false; grid.len()];
    let mut components = Vec::new();
    for start in 0..grid.len() {
        if !inside[start] || seen[start] {
            continue;
        }
        let mut component = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(k) = queue.pop_front() {
            component.push(k);
            for nb in grid.neighbours(k) {
                if inside[nb] && !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

/// Nodes where χ² exceeds `floor` and is strictly larger than at all
/// 4-neighbours: the peaks of the apparatus distribution.
pub fn local_maxima(field: &ChiField, floor: f64) -> Vec<usize> {
    let grid = &field.grid;
    (0..grid.len())
        .filter(|&k| {
            let v = field.chi2[k];
            v > floor && grid.neighbours(k).all(|nb| field.chi2[nb] < v)
        })
        .collect()
}

/// Outcome statistics read off the apparatus once the supports separate.
#[derive(Debug, Clone)]
pub struct Readout {
    /// `∫_{S^γ} dμ χ²` per branch.
    pub support_mass: Vec<f64>,
    /// Support masses renormalized by their total: the outcome
    /// distribution conditioned on landing in some support.
    pub probabilities: Vec<f64>,
    /// `|c_γ|²`.
    pub born: Vec<f64>,
    /// `max_γ |p_γ − |c_γ|²|`.
    pub prc_deviation: f64,
    /// Diagonal of the reconstructed reduced state.
    pub precs_diagonal: Vec<f64>,
    /// `Σ_γ |c_γ|² |γ⟩⟨γ|`.
    pub decohered: DensityMatrix,
    /// Trace distance between `decohered` and the exact reduced state.
    pub decoherence_distance: f64,
}

/// Reads the outcome distribution from disjoint supports and compares it
/// with the Born weights.
pub fn readout(
    params: &ModelParams,
    c: &PrincipalAmplitudes,
    field: &ChiField,
    supports: &[EpsSupport],
) -> Result<Readout> {
    c.check_matches(params)?;
    if supports.len() != c.len() {
        return Err(Error::AmplitudeLength {
            expected: c.len(),
            got: supports.len(),
        });
    }
    if !disjoint(supports) {
        return Err(Error::NotDisjoint);
    }
    let support_mass: Vec<f64> = supports.iter().map(|s| field.mass(&s.cells)).collect();
    let total: f64 = support_mass.iter().sum();
    let probabilities: Vec<f64> = support_mass.iter().map(|m| m / total).collect();
    let born = c.weights();
    let prc_deviation = probabilities
        .iter()
        .zip(&born)
        .map(|(p, b)| (p - b).abs())
        .fold(0.0, f64::max);
    let precs_diagonal = rho_from_precs(params, c, field)?.diagonal();
    let decohered = DensityMatrix::decohered(c);
    let exact = reduced_density_matrix(params, c, field.t)?;
    Ok(Readout {
        support_mass,
        probabilities,
        born,
        prc_deviation,
        precs_diagonal,
        decoherence_distance: decohered.trace_distance(&exact),
        decohered,
    })
}
