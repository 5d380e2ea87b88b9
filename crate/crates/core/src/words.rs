//! Reduced words over a symmetric generating set: sphere and ball counts,
//! lexicographic sphere enumeration, exact evaluation and finite-radius
//! freeness certificates.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Default cap on the number of words a single enumeration may visit.
pub const DEFAULT_WORD_BUDGET: u64 = 1_000_000;

/// A symmetric generating set with an exact group law on its elements.
pub trait WordGroup: Sync {
    type Element: Clone + Eq + Hash + Send + Sync;

    fn num_generators(&self) -> usize;
    /// Index of the inverse generator; an involution without fixed points.
    fn inverse_letter(&self, letter: usize) -> usize;
    fn identity(&self) -> Self::Element;
    fn generator(&self, letter: usize) -> &Self::Element;
    fn compose(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;

    /// `q = 2r − 1`, the branching number of the Cayley tree.
    fn branching(&self) -> u64 {
        (self.num_generators() as u64).saturating_sub(1)
    }
}

/// A sequence of generator indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Word {
    letters: Vec<usize>,
}

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Self { letters }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Checks reducedness and letter range against `group`.
    pub fn validate<G: WordGroup + ?Sized>(&self, group: &G) -> Result<()> {
        let n = group.num_generators();
        for (pos, &l) in self.letters.iter().enumerate() {
            if l >= n {
                return Err(Error::LetterOutOfRange { letter: l, generators: n });
            }
            if pos > 0 && group.inverse_letter(self.letters[pos - 1]) == l {
                return Err(Error::NonReducedWord { position: pos });
            }
        }
        Ok(())
    }

    /// Reversed letters, each replaced by its inverse.
    pub fn inverse<G: WordGroup + ?Sized>(&self, group: &G) -> Self {
        Self {
            letters: self.letters.iter().rev().map(|&l| group.inverse_letter(l)).collect(),
        }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self { letters }
    }
}

/// `(|S_n|, |B_n|)` for the `(q+1)`-regular tree: `|S_0| = 1` and
/// `|S_n| = (q+1)q^{n−1}` for `n ≥ 1`.
pub fn word_counts(q: u64, n: u32) -> (BigUint, BigUint) {
    let mut sphere = BigUint::one();
    let mut ball = BigUint::one();
    for k in 1..=n {
        sphere = if k == 1 { BigUint::from(q + 1) } else { sphere * q };
        ball += &sphere;
    }
    (sphere, ball)
}

pub fn sphere_count(q: u64, n: u32) -> BigUint {
    word_counts(q, n).0
}

pub fn ball_count(q: u64, n: u32) -> BigUint {
    word_counts(q, n).1
}

/// Errors unless the ball of radius `n` fits within `budget` words.
pub fn check_budget(q: u64, n: u32, budget: u64) -> Result<u64> {
    let ball = ball_count(q, n);
    match ball.to_u64() {
        Some(b) if b <= budget => Ok(b),
        _ => Err(Error::BudgetExceeded { needed: ball.to_string(), budget }),
    }
}

/// Lexicographic stream of the reduced words of a fixed length.
pub struct SphereWords<'a, G: WordGroup + ?Sized> {
    group: &'a G,
    current: Option<Vec<usize>>,
}

/// Reduced words of length `n` in lexicographic order on letter indices.
pub fn enumerate_sphere<G: WordGroup + ?Sized>(group: &G, n: usize) -> SphereWords<'_, G> {
    let mut first = Vec::with_capacity(n);
    let ok = fill_minimal(group, &mut first, n);
    SphereWords { group, current: ok.then_some(first) }
}

fn fill_minimal<G: WordGroup + ?Sized>(group: &G, letters: &mut Vec<usize>, n: usize) -> bool {
    while letters.len() < n {
        match smallest_allowed(group, letters.last().copied(), 0) {
            Some(l) => letters.push(l),
            None => return false,
        }
    }
    true
}

fn smallest_allowed<G: WordGroup + ?Sized>(
    group: &G,
    prev: Option<usize>,
    from: usize,
) -> Option<usize> {
    let forbidden = prev.map(|p| group.inverse_letter(p));
    (from..group.num_generators()).find(|&l| Some(l) != forbidden)
}

impl<G: WordGroup + ?Sized> Iterator for SphereWords<'_, G> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let current = self.current.take()?;
        let out = Word::new(current.clone());
        let n = current.len();
        let mut letters = current;
        // advance to the lexicographic successor
        while let Some(last) = letters.pop() {
            let prev = letters.last().copied();
            if let Some(l) = smallest_allowed(self.group, prev, last + 1) {
                letters.push(l);
                if fill_minimal(self.group, &mut letters, n) {
                    self.current = Some(letters);
                }
                break;
            }
        }
        Some(out)
    }
}

/// Exact product of the generators in letter order.
pub fn evaluate_word<G: WordGroup + ?Sized>(group: &G, word: &Word) -> Result<G::Element> {
    word.validate(group)?;
    let mut acc = group.identity();
    for &l in word.letters() {
        acc = group.compose(&acc, group.generator(l));
    }
    Ok(acc)
}

/// Outcome of an exhaustive ball enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreenessReport {
    pub radius_checked: u32,
    pub ball_size_expected: u64,
    pub ball_size_found: u64,
    pub is_free_to_radius: bool,
    pub first_collision: Option<(Word, Word)>,
}

/// Evaluates every word of the ball `B_n` exactly and counts distinct
/// elements. A pass certifies that no relation of length `≤ 2n` holds.
pub fn verify_freeness<G: WordGroup + ?Sized>(
    group: &G,
    n: u32,
    budget: u64,
) -> Result<FreenessReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("freeness radius must be ≥ 1".into()));
    }
    let expected = check_budget(group.branching(), n, budget)?;

    // Subtrees by first letter are independent; merge them in letter order
    // so the reported collision does not depend on scheduling.
    let subtrees: Vec<Vec<(G::Element, Word)>> = (0..group.num_generators())
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            let mut letters = vec![first];
            let start = group.generator(first).clone();
            collect_subtree(group, &mut letters, start, n as usize, &mut out);
            out
        })
        .collect();

    let mut seen: HashMap<G::Element, Word> = HashMap::with_capacity(expected as usize);
    seen.insert(group.identity(), Word::empty());
    let mut first_collision = None;
    for (element, word) in subtrees.into_iter().flatten() {
        if let Some(prior) = seen.get(&element) {
            if first_collision.is_none() {
                first_collision = Some((prior.clone(), word));
            }
        } else {
            seen.insert(element, word);
        }
    }
    let found = seen.len() as u64;
    Ok(FreenessReport {
        radius_checked: n,
        ball_size_expected: expected,
        ball_size_found: found,
        is_free_to_radius: found == expected,
        first_collision,
    })
}

fn collect_subtree<G: WordGroup + ?Sized>(
    group: &G,
    letters: &mut Vec<usize>,
    value: G::Element,
    max_len: usize,
    out: &mut Vec<(G::Element, Word)>,
) {
    if letters.len() < max_len {
        let last = *letters.last().expect("nonempty prefix");
        let forbidden = group.inverse_letter(last);
        for l in 0..group.num_generators() {
            if l == forbidden {
                continue;
            }
            let next = group.compose(&value, group.generator(l));
            letters.push(l);
            collect_subtree(group, letters, next, max_len, out);
            letters.pop();
        }
    }
    out.push((value, Word::new(letters.clone())));
}

/// Visits every reduced word of length `≤ n` (depth first, letters in
/// increasing order) with a value carried along by `step`.
pub fn walk_ball<G, T, F, V>(group: &G, n: usize, root: T, step: &F, visit: &mut V)
where
    G: WordGroup + ?Sized,
    F: Fn(&T, usize) -> T,
    V: FnMut(&[usize], &T),
{
    fn go<G, T, F, V>(group: &G, n: usize, letters: &mut Vec<usize>, value: &T, step: &F, visit: &mut V)
    where
        G: WordGroup + ?Sized,
        F: Fn(&T, usize) -> T,
        V: FnMut(&[usize], &T),
    {
        visit(letters, value);
        if letters.len() == n {
            return;
        }
        let forbidden = letters.last().map(|&l| group.inverse_letter(l));
        for l in 0..group.num_generators() {
            if Some(l) == forbidden {
                continue;
            }
            let next = step(value, l);
            letters.push(l);
            go(group, n, letters, &next, step, visit);
            letters.pop();
        }
    }
    let mut letters = Vec::with_capacity(n);
    go(group, n, &mut letters, &root, step, visit);
}

pub(crate) fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::build_generator_set;
    use std::collections::HashSet;

    /// Free group on letters {0..2r}, elements as freely reduced letter strings.
    struct FreeGroup {
        gens: Vec<Vec<usize>>,
    }

    impl FreeGroup {
        fn new(rank: usize) -> Self {
            Self { gens: (0..2 * rank).map(|l| vec![l]).collect() }
        }
    }

    impl WordGroup for FreeGroup {
        type Element = Vec<usize>;
        fn num_generators(&self) -> usize {
            self.gens.len()
        }
        fn inverse_letter(&self, l: usize) -> usize {
            l ^ 1
        }
        fn identity(&self) -> Vec<usize> {
            vec![]
        }
        fn generator(&self, l: usize) -> &Vec<usize> {
            &self.gens[l]
        }
        fn compose(&self, a: &Vec<usize>, b: &Vec<usize>) -> Vec<usize> {
            let mut out = a.clone();
            for &l in b {
                if out.last() == Some(&(l ^ 1)) {
                    out.pop();
                } else {
                    out.push(l);
                }
            }
            out
        }
    }

    fn brute_reduced(k: usize, n: usize, inv: impl Fn(usize) -> usize) -> usize {
        // all k^n strings, keep the reduced ones
        let total = k.pow(n as u32);
        (0..total)
            .filter(|&code| {
                let mut c = code;
                let mut letters = Vec::new();
                for _ in 0..n {
                    letters.push(c % k);
                    c /= k;
                }
                letters.windows(2).all(|w| inv(w[0]) != w[1])
            })
            .count()
    }

    #[test]
    fn counts_examples() {
        assert_eq!(word_counts(3, 2), (12u32.into(), 17u32.into()));
        assert_eq!(word_counts(5, 5), (3750u32.into(), 4687u32.into()));
        assert_eq!(word_counts(1, 4), (2u32.into(), 9u32.into()));
        assert_eq!(word_counts(7, 0), (1u32.into(), 1u32.into()));
        // enumeration oracle
        assert_eq!(brute_reduced(4, 2, |l| l ^ 1), 12);
        assert_eq!(brute_reduced(6, 3, |l| l ^ 1), 150);
    }

    #[test]
    fn counts_recurrences_and_closed_form() {
        for q in [1u64, 3, 5, 9, 13] {
            for n in 1..12u32 {
                let (s, b) = word_counts(q, n);
                let (s1, b1) = word_counts(q, n + 1);
                assert_eq!(&b1 - &b, s1.clone());
                assert_eq!(s1, &s * q);
                let closed = if q == 1 {
                    BigUint::from(2 * n + 1)
                } else {
                    (BigUint::from(q + 1) * num_traits::pow(BigUint::from(q), n as usize) - 2u32)
                        / (q - 1)
                };
                assert_eq!(b, closed);
            }
        }
    }

    #[test]
    fn sphere_enumeration_counts_and_order() {
        let g = build_generator_set(5).unwrap();
        let s0: Vec<_> = enumerate_sphere(&g, 0).collect();
        assert_eq!(s0, vec![Word::empty()]);
        assert_eq!(enumerate_sphere(&g, 1).count(), 6);
        assert_eq!(enumerate_sphere(&g, 2).count(), 30);
        for n in 0..5 {
            let words: Vec<_> = enumerate_sphere(&g, n).collect();
            assert_eq!(words.len() as u64, sphere_count(5, n as u32).to_u64().unwrap());
            assert!(words.windows(2).all(|w| w[0] < w[1]), "lexicographic, no repeats");
            let set: HashSet<_> = words.iter().collect();
            assert_eq!(set.len(), words.len());
            for w in &words {
                assert_eq!(w.len(), n);
                w.validate(&g).unwrap();
            }
        }
    }

    #[test]
    fn evaluation_basics() {
        let g = build_generator_set(5).unwrap();
        assert!(evaluate_word(&g, &Word::empty()).unwrap().is_identity());
        for i in 0..6 {
            assert_eq!(evaluate_word(&g, &Word::new(vec![i])).unwrap(), g.rotations[i]);
            let bad = Word::new(vec![i, g.inverse_of[i]]);
            assert!(matches!(evaluate_word(&g, &bad), Err(Error::NonReducedWord { position: 1 })));
        }
        assert!(matches!(
            evaluate_word(&g, &Word::new(vec![6])),
            Err(Error::LetterOutOfRange { .. })
        ));
    }

    #[test]
    fn evaluation_is_multiplicative_and_inverts() {
        let g = build_generator_set(5).unwrap();
        let words: Vec<_> = enumerate_sphere(&g, 3).collect();
        for w in words.iter().step_by(7) {
            let e = evaluate_word(&g, w).unwrap();
            let inv = evaluate_word(&g, &w.inverse(&g)).unwrap();
            assert!(e.multiply(&inv).is_identity());
            assert_eq!(inv, e.transpose());
            assert!(e.den_exp() <= 3);
            for u in enumerate_sphere(&g, 2) {
                let cat = w.concat(&u);
                if cat.validate(&g).is_ok() {
                    let lhs = evaluate_word(&g, &cat).unwrap();
                    let rhs = e.multiply(&evaluate_word(&g, &u).unwrap());
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn freeness_for_abstract_free_group() {
        let f = FreeGroup::new(2);
        let r = verify_freeness(&f, 4, DEFAULT_WORD_BUDGET).unwrap();
        assert!(r.is_free_to_radius);
        assert_eq!(r.ball_size_found, 161);
    }

    #[test]
    fn freeness_lps_five_radius_three() {
        let g = build_generator_set(5).unwrap();
        let r = verify_freeness(&g, 3, DEFAULT_WORD_BUDGET).unwrap();
        assert!(r.is_free_to_radius);
        assert_eq!(r.ball_size_found, 187);
        assert_eq!(r.first_collision, None);
    }

    #[test]
    fn duplicated_generator_collides() {
        let mut g = build_generator_set(5).unwrap();
        // replace the pair (4, 5) by a copy of the pair (0, 1)
        let (a, b) = (0usize, g.inverse_of[0]);
        let others: Vec<usize> = (0..6).filter(|&i| i != a && i != b).collect();
        let (c, d) = (others[0], g.inverse_of[others[0]]);
        g.rotations[c] = g.rotations[a].clone();
        g.rotations[d] = g.rotations[b].clone();
        let r = verify_freeness(&g, 1, DEFAULT_WORD_BUDGET).unwrap();
        assert!(!r.is_free_to_radius);
        assert_eq!(r.ball_size_found, 5);
        assert!(r.first_collision.is_some());
    }

    #[test]
    fn budget_is_enforced() {
        let g = build_generator_set(5).unwrap();
        let err = verify_freeness(&g, 5, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 1000, .. }));
        assert!(verify_freeness(&g, 0, 1000).is_err());
    }

    #[test]
    fn walk_ball_visits_every_word_once() {
        let g = build_generator_set(5).unwrap();
        let mut count = 0usize;
        walk_ball(&g, 3, (), &|_, _| (), &mut |letters, _| {
            count += 1;
            assert!(letters.len() <= 3);
        });
        assert_eq!(count, 187);
    }
}
