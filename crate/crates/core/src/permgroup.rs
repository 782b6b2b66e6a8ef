//! Permutation groups on `{0, …, n-1}`: deterministic Schreier–Sims with the
//! base `0, 1, …, n-1`, deck groups of finite maps, and block systems.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obstruction::{pushout, FinMap};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { images: (0..n).collect() }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidInput("image array is not a bijection".into()));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p = Permutation::identity(n);
        p.images.swap(a, b);
        p
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { images: other.images.iter().map(|&x| self.images[x]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn support(&self) -> Vec<usize> {
        self.images.iter().enumerate().filter(|(i, &x)| *i != x).map(|(i, _)| i).collect()
    }

    /// Nontrivial cycles, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] || self.images[s] == s {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut x = self.images[s];
            while x != s {
                seen[x] = true;
                c.push(x);
                x = self.images[x];
            }
            out.push(c);
        }
        out
    }

    pub fn is_transposition(&self) -> bool {
        let c = self.cycles();
        c.len() == 1 && c[0].len() == 2
    }

    /// Restriction to a subset that is mapped into itself, reindexed in the subset's order.
    pub fn restrict(&self, subset: &[usize]) -> Option<Permutation> {
        let mut images = Vec::with_capacity(subset.len());
        for &x in subset {
            images.push(subset.iter().position(|&y| y == self.images[x])?);
        }
        Some(Permutation { images })
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let s: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", s.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Level {
    base: usize,
    gens: Vec<Permutation>,
    /// `reps[x]` maps the base point to `x`, for `x` in the orbit.
    reps: Vec<Option<Permutation>>,
}

/// A permutation group stored as a stabilizer chain.
#[derive(Clone, Debug)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Permutation>,
    levels: Vec<Level>,
}

impl PermGroup {
    pub fn trivial(degree: usize) -> Self {
        let levels = (0..degree.saturating_sub(1))
            .map(|b| {
                let mut reps = vec![None; degree];
                reps[b] = Some(Permutation::identity(degree));
                Level { base: b, gens: Vec::new(), reps }
            })
            .collect();
        PermGroup { degree, generators: Vec::new(), levels }
    }

    pub fn generated_by(degree: usize, gens: &[Permutation]) -> Result<Self> {
        let mut g = PermGroup::trivial(degree);
        for p in gens {
            if p.degree() != degree {
                return Err(Error::DomainMismatch(format!("generator of degree {} in group of degree {degree}", p.degree())));
            }
            g.add_generator(p.clone());
        }
        Ok(g)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn add_generator(&mut self, p: Permutation) {
        if self.contains(&p) {
            return;
        }
        self.generators.push(p.clone());
        self.extend_level(0, p);
    }

    fn sift(&self, mut g: Permutation, from: usize) -> Permutation {
        for level in &self.levels[from.min(self.levels.len())..] {
            let x = g.apply(level.base);
            match &level.reps[x] {
                Some(r) => g = r.inverse().compose(&g),
                None => return g,
            }
        }
        g
    }

    fn extend_level(&mut self, li: usize, g: Permutation) {
        self.levels[li].gens.push(g);
        self.rebuild_orbit(li);
        loop {
            let mut added = false;
            let level = &self.levels[li];
            let orbit: Vec<usize> = (0..self.degree).filter(|&x| level.reps[x].is_some()).collect();
            let gens = level.gens.clone();
            'outer: for &x in &orbit {
                for s in &gens {
                    let rx = self.levels[li].reps[x].clone().unwrap();
                    let y = s.apply(x);
                    let ry = self.levels[li].reps[y].clone().unwrap();
                    let schreier = ry.inverse().compose(&s.compose(&rx));
                    let residue = self.sift(schreier, li + 1);
                    if !residue.is_identity() {
                        self.extend_level(li + 1, residue);
                        added = true;
                        break 'outer;
                    }
                }
            }
            if !added {
                break;
            }
        }
    }

    fn rebuild_orbit(&mut self, li: usize) {
        let n = self.degree;
        let level = &mut self.levels[li];
        let mut reps: Vec<Option<Permutation>> = vec![None; n];
        reps[level.base] = Some(Permutation::identity(n));
        let mut queue = vec![level.base];
        let mut head = 0;
        while head < queue.len() {
            let x = queue[head];
            head += 1;
            for s in &level.gens {
                let y = s.apply(x);
                if reps[y].is_none() {
                    reps[y] = Some(s.compose(reps[x].as_ref().unwrap()));
                    queue.push(y);
                }
            }
        }
        level.reps = reps;
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        p.degree() == self.degree && self.sift(p.clone(), 0).is_identity()
    }

    pub fn order(&self) -> BigUint {
        self.levels
            .iter()
            .map(|l| BigUint::from(l.reps.iter().filter(|r| r.is_some()).count()))
            .fold(BigUint::one(), |a, b| a * b)
    }

    pub fn orbit(&self, x: usize) -> Vec<usize> {
        orbit(self.degree, &self.generators, x)
    }

    pub fn is_transitive(&self) -> bool {
        self.degree <= 1 || self.orbit(0).len() == self.degree
    }
}

fn orbit(n: usize, gens: &[Permutation], x: usize) -> Vec<usize> {
    let mut seen = vec![false; n];
    seen[x] = true;
    let mut queue = vec![x];
    let mut head = 0;
    while head < queue.len() {
        let y = queue[head];
        head += 1;
        for s in gens {
            let z = s.apply(y);
            if !seen[z] {
                seen[z] = true;
                queue.push(z);
            }
        }
    }
    queue.sort();
    queue
}

/// Order of the group generated by `gens`.
pub fn group_order(degree: usize, gens: &[Permutation]) -> Result<BigUint> {
    Ok(PermGroup::generated_by(degree, gens)?.order())
}

/// Generators of the deck group of a finite map: adjacent transpositions inside each fiber.
pub fn deck_generators(f: &FinMap) -> Vec<Permutation> {
    let n = f.domain_size();
    let mut out = Vec::new();
    for fiber in f.fibers() {
        for w in fiber.windows(2) {
            out.push(Permutation::transposition(n, w[0], w[1]));
        }
    }
    out
}

pub fn deck_group(f: &FinMap) -> PermGroup {
    PermGroup::generated_by(f.domain_size(), &deck_generators(f)).expect("generators share the domain")
}

/// Checks `⟨Aut f, Aut g⟩ = Aut(f ⋆ g)` by comparing orders; the left side is
/// always contained in the right, so equal orders mean equal groups.
pub fn verify_deckpushout(f: &FinMap, g: &FinMap) -> Result<bool> {
    if !f.is_surjective() || !g.is_surjective() {
        return Err(Error::HypothesisViolated("maps must be surjective".into()));
    }
    let h = pushout(f, g)?;
    let mut gens = deck_generators(f);
    gens.extend(deck_generators(g));
    let group = PermGroup::generated_by(f.domain_size(), &gens)?;
    Ok(group.order() == h.aut_order())
}

/// Every surjection from `{0..n}` onto some `{0..k}` whose values first appear
/// in increasing order; these represent all surjections up to relabelling the target.
pub fn canonical_surjections(n: usize) -> Vec<FinMap> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<FinMap>) {
        if cur.len() == n {
            out.push(FinMap { assignment: cur.clone(), codomain: if n == 0 { 0 } else { max + 1 } });
            return;
        }
        let limit = if cur.is_empty() { 0 } else { max + 1 };
        for v in 0..=limit {
            cur.push(v);
            rec(n, cur, max.max(v), out);
            cur.pop();
        }
    }
    rec(n, &mut cur, 0, &mut out);
    out
}

/// A partition of the domain into blocks of imprimitivity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSystem {
    pub blocks: Vec<Vec<usize>>,
}

impl BlockSystem {
    /// Neither the partition into singletons nor the single block.
    pub fn is_nontrivial(&self) -> bool {
        self.blocks.len() > 1 && self.blocks.iter().any(|b| b.len() > 1)
    }
}

/// The finest block system in which `a` and `b` share a block.
pub fn block_system(group: &PermGroup, a: usize, b: usize) -> Result<BlockSystem> {
    let n = group.degree();
    if a >= n || b >= n {
        return Err(Error::InvalidInput("seed outside the domain".into()));
    }
    if !group.is_transitive() {
        return Err(Error::NonTransitive);
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let nx = parent[y];
            parent[y] = r;
            y = nx;
        }
        r
    }
    let mut queue = vec![(a, b)];
    {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    while let Some((x, y)) = queue.pop() {
        for g in group.generators() {
            let (u, v) = (find(&mut parent, g.apply(x)), find(&mut parent, g.apply(y)));
            if u != v {
                parent[u.max(v)] = u.min(v);
                queue.push((u, v));
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut index_of = vec![usize::MAX; n];
    for x in 0..n {
        let r = find(&mut parent, x);
        if index_of[r] == usize::MAX {
            index_of[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[index_of[r]].push(x);
    }
    Ok(BlockSystem { blocks })
}

/// A nontrivial block system of a transitive group, if one exists.
pub fn find_nontrivial_block_system(group: &PermGroup) -> Result<Option<BlockSystem>> {
    for b in 1..group.degree() {
        let sys = block_system(group, 0, b)?;
        if sys.is_nontrivial() {
            return Ok(Some(sys));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obstruction::factorial;

    fn cycle(n: usize) -> Permutation {
        Permutation::from_images((0..n).map(|i| (i + 1) % n).collect()).unwrap()
    }

    #[test]
    fn symmetric_group_orders() {
        for n in 1..9 {
            let g = PermGroup::generated_by(n, &[cycle(n), Permutation::transposition(n, 0, 1.min(n - 1))]).unwrap();
            assert_eq!(g.order(), factorial(n));
        }
    }

    #[test]
    fn large_symmetric_groups_from_transpositions() {
        for n in [16usize, 25] {
            let gens: Vec<Permutation> = (0..n - 1).map(|i| Permutation::transposition(n, i, i + 1)).collect();
            assert_eq!(group_order(n, &gens).unwrap(), factorial(n));
        }
        assert_eq!(factorial(16).to_string(), "20922789888000");
    }

    #[test]
    fn dihedral_and_cyclic() {
        let n = 7;
        let c = PermGroup::generated_by(n, &[cycle(n)]).unwrap();
        assert_eq!(c.order(), BigUint::from(7u32));
        let refl = Permutation::from_images((0..n).map(|i| (n - i) % n).collect()).unwrap();
        let d = PermGroup::generated_by(n, &[cycle(n), refl.clone()]).unwrap();
        assert_eq!(d.order(), BigUint::from(14u32));
        assert!(d.contains(&refl.compose(&cycle(n))));
        assert!(!d.contains(&Permutation::transposition(n, 0, 1)));
    }

    #[test]
    fn alternating_group() {
        let n = 6;
        let gens: Vec<Permutation> = (0..n - 2)
            .map(|i| Permutation::transposition(n, i, i + 1).compose(&Permutation::transposition(n, i + 1, i + 2)))
            .collect();
        assert_eq!(group_order(n, &gens).unwrap(), BigUint::from(360u32));
    }

    #[test]
    fn deck_group_order_is_product_of_factorials() {
        let f = FinMap::new(vec![0, 1, 0, 2, 1, 0, 2, 2, 2], 3).unwrap();
        assert_eq!(deck_group(&f).order(), f.aut_order());
        assert_eq!(f.aut_order(), BigUint::from(6u32 * 2 * 24));
    }

    #[test]
    fn deckpushout_example() {
        let f = FinMap::new(vec![0, 0, 1, 2], 3).unwrap();
        let g = FinMap::new(vec![0, 1, 1, 2], 3).unwrap();
        assert!(verify_deckpushout(&f, &g).unwrap());
    }

    #[test]
    fn canonical_surjection_counts_are_bell_numbers() {
        let bell = [1usize, 1, 2, 5, 15, 52, 203];
        for (n, &b) in bell.iter().enumerate() {
            assert_eq!(canonical_surjections(n).len(), b);
        }
    }

    #[test]
    fn blocks_of_wreath_product() {
        // Two blocks {0,1}, {2,3}: swap inside block and swap blocks.
        let a = Permutation::transposition(4, 0, 1);
        let s = Permutation::from_images(vec![2, 3, 0, 1]).unwrap();
        let g = PermGroup::generated_by(4, &[a, s]).unwrap();
        assert_eq!(g.order(), BigUint::from(8u32));
        let sys = block_system(&g, 0, 1).unwrap();
        assert_eq!(sys.blocks, vec![vec![0, 1], vec![2, 3]]);
        assert!(sys.is_nontrivial());
        let all = block_system(&g, 0, 2).unwrap();
        assert_eq!(all.blocks.len(), 1);
        assert!(find_nontrivial_block_system(&g).unwrap().is_some());
    }

    #[test]
    fn primitive_group_has_no_blocks() {
        let g = PermGroup::generated_by(5, &[cycle(5), Permutation::transposition(5, 0, 1)]).unwrap();
        assert!(find_nontrivial_block_system(&g).unwrap().is_none());
    }

    #[test]
    fn intransitive_group_is_rejected() {
        let g = PermGroup::generated_by(4, &[Permutation::transposition(4, 0, 1)]).unwrap();
        assert_eq!(block_system(&g, 0, 1), Err(Error::NonTransitive));
    }

    #[test]
    fn cycles_and_restrict() {
        let p = Permutation::from_images(vec![1, 0, 3, 4, 2, 5]).unwrap();
        assert_eq!(p.cycles(), vec![vec![0, 1], vec![2, 3, 4]]);
        assert_eq!(p.to_string(), "(0 1)(2 3 4)");
        assert_eq!(p.restrict(&[2, 3, 4]).unwrap().images(), &[1, 2, 0]);
        assert!(p.restrict(&[0, 2]).is_none());
        assert!(p.compose(&p.inverse()).is_identity());
    }
}
