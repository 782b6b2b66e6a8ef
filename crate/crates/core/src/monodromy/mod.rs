//! Monodromy of node parameters along loops of curve parameters.

mod kite;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::curves::{roots_in_cstar, TriangleParam};
use crate::error::{Error, Result};
use crate::hungarian::min_cost_assignment;
use crate::permgroup::Permutation;
use crate::poly::{self, C64};

pub use kite::{kite_decoration, kite_monodromy, kite_sample_loops, track_nodes, KiteDecoration, KiteReport, NodeTrack};

/// Step control for continuation along a loop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSettings {
    /// Number of steps of the undivided discretization.
    pub steps: usize,
    /// Smallest admissible step as a fraction of the loop length.
    pub min_step: f64,
}

impl Default for StepSettings {
    fn default() -> Self {
        StepSettings { steps: 256, min_step: 2f64.powi(-20) }
    }
}

impl StepSettings {
    pub fn refined(self) -> Self {
        StepSettings { steps: self.steps * 2, ..self }
    }
}

/// Shape of a loop in parameter space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LoopPath {
    Constant,
    /// Every parameter multiplied by `e^{2πiθ}`.
    Scale,
    /// One parameter runs to the circle `|x − center| = radius`, around it once
    /// counterclockwise, and back. When it already lies inside the circle the
    /// loop is the circle through it.
    Lasso { slot: usize, center: C64, radius: f64 },
    /// The pieces in order, each run on an equal share of `[0, 1]`.
    Concat(Vec<LoopPath>),
}

impl LoopPath {
    fn at(&self, base: &[C64], theta: f64) -> Vec<C64> {
        match self {
            LoopPath::Constant => base.to_vec(),
            LoopPath::Scale => {
                let w = C64::from_polar(1.0, TAU * theta);
                base.iter().map(|a| a * w).collect()
            }
            LoopPath::Lasso { slot, center, radius } => {
                let mut a = base.to_vec();
                a[*slot] = lasso_point(base[*slot], *center, *radius, theta);
                a
            }
            LoopPath::Concat(parts) => {
                if parts.is_empty() || theta >= 1.0 {
                    return base.to_vec();
                }
                let n = parts.len() as f64;
                let i = ((theta * n).floor() as usize).min(parts.len() - 1);
                parts[i].at(base, theta * n - i as f64)
            }
        }
    }
}

fn lasso_point(a0: C64, center: C64, radius: f64, theta: f64) -> C64 {
    let d = a0 - center;
    if d.norm() <= radius {
        return center + d * C64::from_polar(1.0, TAU * theta);
    }
    let entry = center + d * (radius / d.norm());
    if theta < 1.0 / 3.0 {
        a0 + (entry - a0) * (3.0 * theta)
    } else if theta < 2.0 / 3.0 {
        center + (entry - center) * C64::from_polar(1.0, TAU * (3.0 * theta - 1.0))
    } else {
        entry + (a0 - entry) * (3.0 * theta - 2.0)
    }
}

/// A closed loop of parameter lists starting and ending at `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamLoop {
    pub base: Vec<C64>,
    pub path: LoopPath,
    pub settings: StepSettings,
}

impl ParamLoop {
    pub fn new(base: Vec<C64>, path: LoopPath) -> Result<Self> {
        let lp = ParamLoop { base, path, settings: StepSettings::default() };
        lp.validate()?;
        Ok(lp)
    }

    pub fn with_settings(mut self, settings: StepSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn constant(base: Vec<C64>) -> Self {
        ParamLoop { base, path: LoopPath::Constant, settings: StepSettings::default() }
    }

    /// Parameters at `θ ∈ [0, 1]`; exactly `base` at both ends.
    pub fn at(&self, theta: f64) -> Vec<C64> {
        if theta <= 0.0 || theta >= 1.0 {
            return self.base.clone();
        }
        self.path.at(&self.base, theta)
    }

    fn validate(&self) -> Result<()> {
        fn check(p: &LoopPath, n: usize) -> Result<()> {
            match p {
                LoopPath::Lasso { slot, center, radius } => {
                    if *slot >= n {
                        return Err(Error::InvalidInput(format!("slot {slot} out of range")));
                    }
                    if !(*radius > 0.0) || !center.is_finite() {
                        return Err(Error::InvalidInput("lasso needs a finite center and positive radius".into()));
                    }
                    Ok(())
                }
                LoopPath::Concat(parts) => parts.iter().try_for_each(|q| check(q, n)),
                _ => Ok(()),
            }
        }
        check(&self.path, self.base.len())?;
        for i in 0..=512 {
            if self.at(i as f64 / 512.0).iter().any(|a| a.norm() < 1e-12) {
                return Err(Error::InvalidInput("loop passes through a vanishing parameter".into()));
            }
        }
        Ok(())
    }
}

/// Result of following the roots of one `P_k` around a loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackResult {
    pub k: i64,
    /// Root `i` of the start list ends at root `permutation[i]`.
    pub permutation: Permutation,
    /// Largest distance in the final end-to-start matching.
    pub residual: f64,
    /// Largest per-step matching distance.
    pub max_step_distance: f64,
    pub steps_used: usize,
    pub start_roots: Vec<C64>,
}

/// Per-class tracking results for one loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedPermutation {
    pub per_k: BTreeMap<i64, TrackResult>,
}

impl TrackedPermutation {
    /// Permutation on all nodes, labelled by `(k, index)` in increasing order.
    pub fn combined(&self) -> Permutation {
        let mut images = Vec::new();
        let mut offset = 0;
        for r in self.per_k.values() {
            images.extend(r.permutation.images().iter().map(|&j| j + offset));
            offset += r.permutation.degree();
        }
        Permutation::from_images(images).expect("blockwise bijection")
    }
}

fn match_roots(from: &[C64], to: &[C64]) -> (Vec<usize>, f64) {
    let cost: Vec<Vec<f64>> = from.iter().map(|a| to.iter().map(|b| (a - b).norm()).collect()).collect();
    let assign = min_cost_assignment(&cost);
    let worst = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, f64::max);
    (assign, worst)
}

fn class_roots(tri: &TriangleParam, a: &[C64], k: i64, tol: f64) -> Result<Vec<C64>> {
    let np = tri.with_a(a.to_vec()).node_polynomial(k)?;
    Ok(roots_in_cstar(&np, tol)?.roots)
}

/// Follows the roots of `P_k` along the loop and reads off the permutation.
pub fn track_roots(tri: &TriangleParam, lp: &ParamLoop, k: i64, tol: f64) -> Result<TrackResult> {
    if lp.base.len() != tri.a.len() {
        return Err(Error::InvalidInput("loop and triangle have different parameter counts".into()));
    }
    let start = class_roots(tri, &lp.base, k, tol)?;
    let n = start.len();
    let full = 1.0 / lp.settings.steps as f64;
    let floor = lp.settings.min_step;
    let mut current = start.clone();
    let mut sep = poly::min_pairwise_distance(&current);
    let (mut theta, mut h) = (0.0f64, full);
    let mut steps = 0usize;
    let mut max_step: f64 = 0.0;
    while theta < 1.0 {
        let next_theta = (theta + h).min(1.0);
        let roots = class_roots(tri, &lp.at(next_theta), k, tol)?;
        let ok = if roots.len() != n {
            None
        } else {
            let (assign, worst) = match_roots(&current, &roots);
            if n < 2 || worst < sep / 3.0 {
                Some((assign, worst, roots))
            } else {
                None
            }
        };
        match ok {
            Some((assign, worst, roots)) => {
                current = assign.iter().map(|&j| roots[j]).collect();
                sep = poly::min_pairwise_distance(&current);
                max_step = max_step.max(worst);
                theta = next_theta;
                steps += 1;
                h = (h * 2.0).min(full);
            }
            None => {
                h /= 2.0;
                if h < floor {
                    return Err(Error::TrackingFailure { theta, reason: format!("step underflow for class {k}") });
                }
            }
        }
    }
    let (assign, residual) = match_roots(&current, &start);
    Ok(TrackResult {
        k,
        permutation: Permutation::from_images(assign).expect("assignment is a bijection"),
        residual,
        max_step_distance: max_step,
        steps_used: steps,
        start_roots: start,
    })
}

/// Tracks every class along the same loop, one thread per class.
pub fn track_all(tri: &TriangleParam, lp: &ParamLoop, tol: f64) -> Result<TrackedPermutation> {
    let ks: Vec<i64> = (1..=tri.max_k()).collect();
    let results: Vec<Result<TrackResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ks.iter().map(|&k| scope.spawn(move || track_roots(tri, lp, k, tol))).collect();
        handles.into_iter().map(|h| h.join().expect("tracking thread panicked")).collect()
    });
    let mut per_k = BTreeMap::new();
    for r in results {
        let r = r?;
        per_k.insert(r.k, r);
    }
    Ok(TrackedPermutation { per_k })
}

/// Coefficients of `P_k` split as `P0 + a_slot · P1`.
fn split_linear(tri: &TriangleParam, k: i64, slot: usize) -> Result<(Vec<C64>, Vec<C64>)> {
    let mut rest = tri.a.clone();
    rest.remove(slot);
    let np = tri.node_polynomial(k)?;
    let sig = poly::elementary_symmetric(&rest);
    let get = |m: i64| if m < 0 || m as usize >= sig.len() { C64::new(0.0, 0.0) } else { sig[m as usize] };
    let mut p0 = vec![C64::new(0.0, 0.0); np.coefficients.len()];
    let mut p1 = p0.clone();
    // The coefficient at each exponent comes from a single j; invert the exponent map.
    let ell = tri.ell;
    for j in 0..=ell {
        let e = match tri.regime(k) {
            crate::curves::Regime::Generic => j,
            crate::curves::Regime::Halved => {
                if (tri.p - j).rem_euclid(2) == 0 {
                    continue;
                }
                if tri.p % 2 == 0 {
                    (j - 1) / 2
                } else {
                    j / 2
                }
            }
        } as usize;
        let lambda = np.multiplier[e];
        if lambda.norm() == 0.0 {
            continue;
        }
        let sign = if (ell - j) % 2 == 0 { 1.0 } else { -1.0 };
        p0[e] = lambda * get(ell - j) * sign;
        p1[e] = lambda * get(ell - j - 1) * sign;
    }
    Ok((p0, p1))
}

/// Values of `a_slot` where `P_k` has a double root, other parameters fixed.
pub fn discriminant_points(tri: &TriangleParam, k: i64, slot: usize) -> Result<Vec<C64>> {
    let (p0, p1) = split_linear(tri, k, slot)?;
    let w = poly::sub(&poly::mul(&p0, &poly::derivative(&p1)), &poly::mul(&poly::derivative(&p0), &p1));
    let (wt, _) = poly::trim_zeros(&w);
    let mut wt = wt.to_vec();
    let big = wt.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while wt.len() > 1 && wt.last().unwrap().norm() <= 1e-13 * big {
        wt.pop();
    }
    if wt.len() < 2 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for t in poly::roots(&wt)? {
        if t.norm() < 1e-12 {
            continue;
        }
        let d = poly::eval(&p1, t);
        if d.norm() < 1e-14 {
            continue;
        }
        let a = -poly::eval(&p0, t) / d;
        if a.is_finite() && a.norm() > 1e-12 {
            out.push(a);
        }
    }
    Ok(out)
}

/// Values of `a_slot` where the extreme coefficients of `P_k` vanish.
fn degree_drop_points(tri: &TriangleParam, k: i64, slot: usize) -> Result<Vec<C64>> {
    let (p0, p1) = split_linear(tri, k, slot)?;
    let mut out = Vec::new();
    let lo = p0.iter().zip(&p1).position(|(a, b)| a.norm() > 0.0 || b.norm() > 0.0);
    let hi = p0.iter().zip(&p1).rposition(|(a, b)| a.norm() > 0.0 || b.norm() > 0.0);
    for e in [lo, hi].into_iter().flatten() {
        if p1[e].norm() > 0.0 {
            out.push(-p0[e] / p1[e]);
        }
    }
    Ok(out)
}

/// A small loop of the first parameter around a point where two roots of `P_k` collide.
pub fn discriminant_loop(tri: &TriangleParam, k: i64) -> Result<ParamLoop> {
    discriminant_loop_in_slot(tri, k, 0)
}

pub fn discriminant_loop_in_slot(tri: &TriangleParam, k: i64, slot: usize) -> Result<ParamLoop> {
    if slot >= tri.a.len() {
        return Err(Error::InvalidInput(format!("slot {slot} out of range")));
    }
    let fibers = tri.fiber_sizes();
    if fibers.get(&k).copied().unwrap_or(0) < 2 {
        return Err(Error::InvalidInput(format!("empty discriminant: class {k} has fewer than two nodes")));
    }
    let a0 = tri.a[slot];
    let mut candidates = discriminant_points(tri, k, slot)?;
    if candidates.is_empty() {
        return Err(Error::Numerical(format!("no discriminant point found for class {k}")));
    }
    candidates.sort_by(|x, y| (x - a0).norm().total_cmp(&(y - a0).norm()));
    let target = candidates[0];
    let mut forbidden: Vec<C64> = candidates[1..].to_vec();
    forbidden.push(C64::new(0.0, 0.0));
    for kk in 1..=tri.max_k() {
        if kk != k && fibers.get(&kk).copied().unwrap_or(0) >= 2 {
            forbidden.extend(discriminant_points(tri, kk, slot)?);
        }
        forbidden.extend(degree_drop_points(tri, kk, slot)?);
    }
    let gap = forbidden.iter().map(|f| (f - target).norm()).fold(f64::INFINITY, f64::min);
    let radius = (1e-2 * target.norm()).min(0.3 * gap);
    if !(radius > 1e-10) {
        return Err(Error::Numerical(format!("discriminant point of class {k} is too close to another singular value")));
    }
    ParamLoop::new(tri.a.clone(), LoopPath::Lasso { slot, center: target, radius })
}
