//! Dense complex polynomials (ascending coefficients) and their roots.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eval(coeffs: &[C64], t: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * t + a)
}

/// Value and first derivative by Horner's scheme.
pub fn eval_with_derivative(coeffs: &[C64], t: C64) -> (C64, C64) {
    let zero = C64::new(0.0, 0.0);
    let mut p = zero;
    let mut dp = zero;
    for &a in coeffs.iter().rev() {
        dp = dp * t + p;
        p = p * t + a;
    }
    (p, dp)
}

pub fn derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs.iter().enumerate().skip(1).map(|(j, &a)| a * j as f64).collect()
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or_default() - b.get(i).copied().unwrap_or_default())
        .collect()
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[C64]) -> Vec<C64> {
    let mut p = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        p = mul(&p, &[-r, C64::new(1.0, 0.0)]);
    }
    p
}

/// Elementary symmetric polynomials `σ_0 = 1, σ_1, …, σ_n` of `a`.
pub fn elementary_symmetric(a: &[C64]) -> Vec<C64> {
    let mut s = vec![C64::new(0.0, 0.0); a.len() + 1];
    s[0] = C64::new(1.0, 0.0);
    for (k, &x) in a.iter().enumerate() {
        for m in (1..=k + 1).rev() {
            let prev = s[m - 1];
            s[m] += prev * x;
        }
    }
    s
}

/// `|P(t)| / Σ |c_j| |t|^j`: the relative backward error of `t` as a root.
pub fn backward_error(coeffs: &[C64], t: C64) -> f64 {
    let r = t.norm();
    let scale = coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm());
    if scale == 0.0 {
        return 0.0;
    }
    eval(coeffs, t).norm() / scale
}

/// Removes exact zeros at both ends. Returns the trimmed slice and the number of
/// leading zero coefficients removed (the order of vanishing at 0).
pub fn trim_zeros(coeffs: &[C64]) -> (&[C64], usize) {
    let lo = coeffs.iter().position(|a| *a != C64::new(0.0, 0.0));
    let Some(lo) = lo else { return (&coeffs[0..0], 0) };
    let hi = coeffs.iter().rposition(|a| *a != C64::new(0.0, 0.0)).unwrap();
    (&coeffs[lo..=hi], lo)
}

/// All roots of a polynomial whose extreme coefficients are nonzero, by
/// Aberth–Ehrlich simultaneous iteration followed by Newton polishing.
pub fn roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    let c0 = coeffs[0];
    if lead.norm() == 0.0 || c0.norm() == 0.0 {
        return Err(Error::Numerical("extreme coefficient vanishes".into()));
    }
    if n == 1 {
        return Ok(vec![-c0 / lead]);
    }
    let d = derivative(coeffs);
    let mut z = initial_guesses(coeffs);
    let mut done = vec![false; n];
    for _ in 0..1000 {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = eval_with_derivative(coeffs, z[i]);
            if backward_error(coeffs, z[i]) <= 2.0 * f64::EPSILON {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let s: C64 = (0..n).filter(|&j| j != i).map(|j| C64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
            if !w.is_finite() {
                continue;
            }
            z[i] -= w;
            if w.norm() <= 4.0 * f64::EPSILON * z[i].norm() {
                done[i] = true;
            }
        }
        if done.iter().all(|&x| x) {
            break;
        }
    }
    for r in z.iter_mut() {
        *r = polish(coeffs, &d, *r);
    }
    if z.iter().any(|r| !r.is_finite()) {
        return Err(Error::Numerical("root iteration diverged".into()));
    }
    Ok(z)
}

/// Starting points on circles whose radii come from the upper convex hull of
/// `(j, log|c_j|)`.
fn initial_guesses(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let pts: Vec<(f64, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm() > 0.0)
        .map(|(j, a)| (j as f64, a.norm().ln()))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(n);
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (k0, k1) = (w[0].0 as usize, w[1].0 as usize);
        let m = k1 - k0;
        let radius = ((w[0].1 - w[1].1) / m as f64).exp();
        for j in 0..m {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64 + 2.0 * std::f64::consts::PI * k0 as f64 / n as f64 + sigma;
            out.push(C64::from_polar(radius, theta));
        }
    }
    out
}

fn polish(coeffs: &[C64], d: &[C64], mut t: C64) -> C64 {
    let mut err = backward_error(coeffs, t);
    for _ in 0..4 {
        let dp = eval(d, t);
        if dp.norm() == 0.0 {
            break;
        }
        let next = t - eval(coeffs, t) / dp;
        let e = backward_error(coeffs, next);
        if !(e < err) {
            break;
        }
        t = next;
        err = e;
    }
    t
}

/// Sorts by argument in `(-π, π]` (ties within `1e-9` broken by modulus).
pub fn sort_by_arg_then_modulus(v: &mut [C64]) {
    let key = |z: &C64| {
        let a = z.arg();
        if a <= -std::f64::consts::PI + 1e-9 {
            std::f64::consts::PI
        } else {
            a
        }
    };
    v.sort_by(|a, b| {
        let (pa, pb) = (key(a), key(b));
        if (pa - pb).abs() > 1e-9 {
            pa.partial_cmp(&pb).unwrap()
        } else {
            a.norm().partial_cmp(&b.norm()).unwrap()
        }
    });
}

pub fn min_pairwise_distance(v: &[C64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            m = m.min((v[i] - v[j]).norm());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_recover_known_roots() {
        let known = vec![c(1.0, 0.0), c(0.0, 2.0), c(-3.0, 0.0), c(0.5, 0.5), c(100.0, -7.0), c(0.01, 0.0)];
        let p = from_roots(&known);
        let mut r = roots(&p).unwrap();
        sort_by_arg_then_modulus(&mut r);
        let mut k = known.clone();
        sort_by_arg_then_modulus(&mut k);
        for (a, b) in r.iter().zip(&k) {
            assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()), "{a} vs {b}");
        }
    }

    #[test]
    fn random_roots_of_moderate_degree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for deg in [5usize, 12, 24, 36] {
            let known: Vec<C64> = (0..deg)
                .map(|_| C64::from_polar(rng.gen_range(0.2..5.0), rng.gen_range(-3.14..3.14)))
                .collect();
            let p = from_roots(&known);
            let r = roots(&p).unwrap();
            for k in &known {
                let best = r.iter().map(|x| (x - k).norm()).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-6 * (1.0 + k.norm()), "deg {deg}: {k} missed by {best}");
            }
            for x in &r {
                assert!(backward_error(&p, *x) < 1e-13);
            }
        }
    }

    #[test]
    fn elementary_symmetric_matches_expansion() {
        let a = vec![c(1.0, 0.0), c(2.0, 1.0), c(-0.5, 3.0)];
        let s = elementary_symmetric(&a);
        // prod (t + a_i) = sum sigma_{n-j} t^j
        let neg: Vec<C64> = a.iter().map(|x| -x).collect();
        let p = from_roots(&neg);
        for j in 0..=3 {
            assert!((p[j] - s[3 - j]).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_and_horner() {
        let p = vec![c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 1.0), c(3.0, 0.0)];
        let t = c(0.7, -0.2);
        let (v, dv) = eval_with_derivative(&p, t);
        assert!((v - eval(&p, t)).norm() < 1e-14);
        assert!((dv - eval(&derivative(&p), t)).norm() < 1e-14);
    }

    #[test]
    fn trim_reports_valuation() {
        let z = c(0.0, 0.0);
        let p = vec![z, z, c(1.0, 0.0), c(2.0, 0.0), z];
        let (t, v) = trim_zeros(&p);
        assert_eq!(t.len(), 2);
        assert_eq!(v, 2);
    }
}
