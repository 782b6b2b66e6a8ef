//! Kites: the sign of `z = ±√(α/β)` at each node and the block system it induces.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::StepSettings;
use crate::curves::{newton_node, CurveParam, NodePair, ParamValue};
use crate::error::{Error, Result};
use crate::hungarian::min_cost_assignment;
use crate::lattice::{detect_kite, KiteNormalization};
use crate::permgroup::{block_system, BlockSystem, PermGroup, Permutation};
use crate::poly::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KiteDecoration {
    pub normalization: KiteNormalization,
    /// Coefficients of `1/z` and `z` in the equation in kite coordinates.
    pub alpha: C64,
    pub beta: C64,
    pub nodes: Vec<NodePair>,
    /// First kite coordinate of each node.
    pub z: Vec<C64>,
    /// `+1` when `z` is the principal root of `α/β`, else `-1`.
    pub signs: Vec<i8>,
    /// Largest `|z² − α/β|`.
    pub residual_max: f64,
    /// Relative size of the smallest singular value of the sampled system.
    pub fit_residual: f64,
}

impl KiteDecoration {
    /// Node indices grouped by sign, positive first.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let pos: Vec<usize> = (0..self.signs.len()).filter(|&i| self.signs[i] > 0).collect();
        let neg: Vec<usize> = (0..self.signs.len()).filter(|&i| self.signs[i] < 0).collect();
        [pos, neg].into_iter().filter(|b| !b.is_empty()).collect()
    }
}

fn smallest_singular_vector(rows: &[Vec<C64>]) -> Result<(Vec<C64>, f64)> {
    let n = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let svd = m.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Numerical("singular value decomposition failed".into()))?;
    let sv = &svd.singular_values;
    let (imin, smin) = sv.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let v: Vec<C64> = (0..n).map(|j| vt[(imin, j)].conj()).collect();
    Ok((v, smin / smax.max(f64::MIN_POSITIVE)))
}

/// Nodes of a kite curve with their square-root labels.
pub fn kite_decoration(param: &CurveParam, tol: f64) -> Result<KiteDecoration> {
    let norm = detect_kite(&param.polygon).ok_or_else(|| Error::InvalidInput("polygon is not a kite".into()))?;
    let nodes = param.self_intersections(tol)?;
    decorate(param, norm, nodes, tol)
}

fn kite_curve(param: &CurveParam, norm: &KiteNormalization) -> crate::curves::FactoredCurve {
    let dual = norm.map.dual_linear().expect("kite map is unimodular");
    param.factored().transform_exponents(dual)
}

fn decorate(param: &CurveParam, norm: KiteNormalization, nodes: Vec<NodePair>, tol: f64) -> Result<KiteDecoration> {
    let curve = kite_curve(param, &norm);
    let (cmin, cmax) = norm.axis_range(&param.polygon);
    let specials = curve.special_points();
    let radii: Vec<f64> = specials.iter().map(|a| a.norm()).filter(|&r| r > 0.0).collect();
    let rho = if radii.is_empty() { 1.0 } else { (radii.iter().map(|r| r.ln()).sum::<f64>() / radii.len() as f64).exp() };
    let unknowns = (cmax - cmin + 1) as usize + 2;
    let mut rows = Vec::new();
    let count = 3 * unknowns + 8;
    for i in 0..count {
        let t = C64::from_polar(rho * (0.6 + 0.8 * (i as f64 + 0.5) / count as f64), TAU * (i as f64 * 0.618_033_988_7 + 0.1));
        let Some((z, w)) = curve.evaluate(t) else { continue };
        let mut row = vec![z.inv()];
        row.extend((cmin..=cmax).map(|c| w.powi(c as i32)));
        row.push(z);
        let scale = row.iter().map(|x| x.norm()).fold(0.0, f64::max);
        rows.push(row.into_iter().map(|x| x / scale).collect());
    }
    let (v, fit_residual) = smallest_singular_vector(&rows)?;
    let alpha = v[0];
    let beta = v[unknowns - 1];
    if alpha.norm() == 0.0 || beta.norm() == 0.0 {
        return Err(Error::Numerical("not a kite curve: vanishing extreme coefficient".into()));
    }
    let ratio = alpha / beta;
    let root = ratio.sqrt();
    let mut z = Vec::new();
    let mut signs = Vec::new();
    let mut residual_max: f64 = 0.0;
    for n in &nodes {
        let (zn, _) = curve.evaluate(n.t).ok_or_else(|| Error::Numerical("node at a special point".into()))?;
        residual_max = residual_max.max((zn * zn - ratio).norm());
        signs.push(if (zn - root).norm() <= (zn + root).norm() { 1 } else { -1 });
        z.push(zn);
    }
    if residual_max > tol * ratio.norm().max(1.0) {
        return Err(Error::Numerical(format!("not a kite curve: node residual {residual_max:.3e}")));
    }
    Ok(KiteDecoration { normalization: norm, alpha, beta, nodes, z, signs, residual_max, fit_residual })
}

/// Result of continuing a node list along a loop of slot parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeTrack {
    pub permutation: Permutation,
    pub residual: f64,
    pub steps_used: usize,
}

fn node_cost(a: &NodePair, b: &NodePair) -> f64 {
    let direct = (a.t - b.t).norm().max((a.s - b.s).norm());
    let swapped = (a.t - b.s).norm().max((a.s - b.t).norm());
    direct.min(swapped)
}

fn param_separation(nodes: &[NodePair]) -> f64 {
    let pts: Vec<C64> = nodes.iter().flat_map(|n| [n.t, n.s]).collect();
    crate::poly::min_pairwise_distance(&pts)
}

/// Follows every node along `path(θ)`, `θ ∈ [0, 1]`, with `path(0) = path(1)`
/// the parameters of `base`.
pub fn track_nodes(
    base: &CurveParam,
    nodes: &[NodePair],
    path: &dyn Fn(f64) -> Vec<ParamValue>,
    settings: StepSettings,
    tol: f64,
) -> Result<NodeTrack> {
    let newton_tol = tol.max(1e-12);
    let full = 1.0 / settings.steps as f64;
    let mut current = nodes.to_vec();
    let (mut theta, mut h) = (0.0f64, full);
    let mut steps = 0;
    while theta < 1.0 {
        let next = (theta + h).min(1.0);
        let curve = base.with_params(&path(next)).factored();
        let sep = param_separation(&current);
        let mut moved = Vec::with_capacity(current.len());
        let mut ok = true;
        for n in &current {
            match newton_node(&curve, n.t, n.s, newton_tol) {
                Ok(m) if node_cost(n, &m) < sep / 3.0 => moved.push(m),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && (current.len() < 2 || param_separation(&moved) > 0.0) {
            current = moved;
            theta = next;
            steps += 1;
            h = (h * 2.0).min(full);
        } else {
            h /= 2.0;
            if h < settings.min_step {
                return Err(Error::TrackingFailure { theta, reason: "node continuation step underflow".into() });
            }
        }
    }
    let cost: Vec<Vec<f64>> = current.iter().map(|a| nodes.iter().map(|b| node_cost(a, b)).collect()).collect();
    let assign = min_cost_assignment(&cost);
    let residual = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, f64::max);
    Ok(NodeTrack { permutation: Permutation::from_images(assign).expect("bijection"), residual, steps_used: steps })
}

/// Loops moving slot `i` once around a circle through it, centred near slot `j`.
pub fn kite_sample_loops(param: &CurveParam, nodes: &[NodePair], settings: StepSettings, tol: f64) -> Result<Vec<NodeTrack>> {
    let base = param.params();
    let finite: Vec<(usize, C64)> = base.iter().enumerate().filter_map(|(i, a)| a.finite().map(|x| (i, x))).collect();
    let mut out = Vec::new();
    for &(i, ai) in &finite {
        for &(j, aj) in &finite {
            if i == j {
                continue;
            }
            let gap = (ai - aj).norm();
            let center = aj + C64::new(0.05, 0.07) * gap;
            let path = |theta: f64| {
                let mut v = base.clone();
                v[i] = ParamValue::Finite(center + (ai - center) * C64::from_polar(1.0, TAU * theta));
                v
            };
            out.push(track_nodes(param, nodes, &path, settings, tol)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KiteReport {
    pub decoration: KiteDecoration,
    pub generators: Vec<Permutation>,
    /// Decimal order of the generated group.
    pub group_order: String,
    pub transitive: bool,
    /// Finest block system joining two nodes of equal sign, when the group is transitive.
    pub block_system: Option<BlockSystem>,
    /// Every generator maps sign blocks onto sign blocks.
    pub preserves_decoration: bool,
}

/// Decoration, sampled monodromy and the block system it generates.
pub fn kite_monodromy(param: &CurveParam, settings: StepSettings, tol: f64) -> Result<KiteReport> {
    let decoration = kite_decoration(param, tol)?;
    let n = decoration.nodes.len();
    let tracks = kite_sample_loops(param, &decoration.nodes, settings, tol)?;
    let generators: Vec<Permutation> = tracks.into_iter().map(|t| t.permutation).collect();
    let group = PermGroup::generated_by(n, &generators)?;
    let blocks = decoration.blocks();
    let preserves_decoration = generators.iter().all(|g| {
        blocks.iter().all(|b| {
            let img: Vec<i8> = b.iter().map(|&x| decoration.signs[g.apply(x)]).collect();
            img.iter().all(|&s| s == img[0])
        })
    });
    let transitive = n > 0 && group.is_transitive();
    let block_system = match blocks.iter().find(|b| b.len() >= 2) {
        Some(b) if transitive => Some(block_system(&group, b[0], b[1])?),
        _ => None,
    };
    Ok(KiteReport { group_order: group.order().to_string(), decoration, generators, transitive, block_system, preserves_decoration })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::harnack_params;
    use crate::lattice::LatticePolygon;

    fn kite(top: i64, bottom: i64) -> CurveParam {
        let pts = [(-1, 0), (1, 0), (0, top), (0, -bottom)].map(|(x, y)| crate::lattice::LatticePoint::new(x, y));
        let poly = LatticePolygon::convex_hull(&pts).unwrap();
        harnack_params(&poly, 1.0).unwrap()
    }

    #[test]
    fn four_point_kite_has_two_blocks_of_two() {
        let c = kite(3, 2);
        let d = kite_decoration(&c, 1e-9).unwrap();
        assert_eq!(d.nodes.len(), 4);
        assert!(d.residual_max < 1e-8);
        let mut sizes: Vec<usize> = d.blocks().iter().map(|b| b.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![2, 2]);
    }

    #[test]
    fn three_point_kite_splits_one_and_two() {
        let c = kite(2, 2);
        let d = kite_decoration(&c, 1e-9).unwrap();
        assert_eq!(d.nodes.len(), 3);
        let mut sizes: Vec<usize> = d.blocks().iter().map(|b| b.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2]);
    }

    #[test]
    fn one_point_kite_is_decorated() {
        let c = kite(1, 1);
        let d = kite_decoration(&c, 1e-9).unwrap();
        assert_eq!(d.nodes.len(), 1);
        assert_eq!(d.blocks().len(), 1);
    }

    #[test]
    fn non_kite_is_rejected() {
        let c = harnack_params(&LatticePolygon::square(3).unwrap(), 1.0).unwrap();
        assert!(kite_decoration(&c, 1e-9).is_err());
    }

    #[test]
    fn kite_monodromy_is_imprimitive() {
        let r = kite_monodromy(&kite(3, 2), StepSettings::default(), 1e-9).unwrap();
        assert!(r.preserves_decoration);
        assert!(r.transitive, "generators {:?}", r.generators);
        assert!(r.block_system.as_ref().unwrap().is_nontrivial());
    }
}
