//! Words in the operators `L`, `Ḹ` and `G_0^{(i)}`, and the expansion of
//! `G_p^{(i)}` into such words.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::stochint::Kind;

/// A first- or second-order differential operator acting on functions of
/// `(x, t)`. Noise components are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Op {
    L,
    Lbar,
    G(usize),
}

/// `word[0]` is applied last; the innermost operator acts on the identity,
/// so `[G(2), G(1)]` is `G_0^{(2)} B_1` and `[L]` is the drift.
pub type Word = Vec<Op>;

/// A linear combination of words with exact coefficients.
pub type Combination = Vec<(BigRational, Word)>;

pub fn word_name(word: &[Op]) -> String {
    let mut parts: Vec<String> = Vec::with_capacity(word.len());
    for (g, op) in word.iter().enumerate() {
        let inner = g + 1 == word.len();
        parts.push(match (op, inner) {
            (Op::L, false) => "L".into(),
            (Op::Lbar, false) => "Lbar".into(),
            (Op::G(i), false) => format!("G{i}"),
            (Op::L, true) => "a".into(),
            (Op::Lbar, true) => "abar".into(),
            (Op::G(i), true) => format!("B{i}"),
        });
    }
    parts.join(" ")
}

pub struct WordDisplay<'a>(pub &'a [Op]);

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&word_name(self.0))
    }
}

/// Highest derivative order of `a` and `B` needed to evaluate `word`.
pub fn derivative_depth(word: &[Op]) -> usize {
    let Some((inner, outer)) = word.split_last() else {
        return 0;
    };
    let base = usize::from(*inner == Op::Lbar);
    base + outer
        .iter()
        .map(|op| match op {
            Op::L => 2,
            Op::Lbar | Op::G(_) => 1,
        })
        .sum::<usize>()
}

fn base_op(kind: Kind) -> Op {
    match kind {
        Kind::Ito => Op::L,
        Kind::Stratonovich => Op::Lbar,
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| {
        acc * BigInt::from(n - i) / BigInt::from(i + 1)
    })
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, v| acc * BigInt::from(v))
}

/// `G_p^{(i)} = (1/p!) Σ_q (-1)^q C(p,q) L^q G_0^{(i)} L^{p-q}`, with `Ḹ`
/// in place of `L` for the Stratonovich family.
pub fn g_operator(kind: Kind, p: u32, i: usize) -> Combination {
    let base = base_op(kind);
    let pf = factorial(p);
    (0..=p)
        .map(|q| {
            let mut c = BigRational::new(binomial(p, q), pf.clone());
            if q % 2 == 1 {
                c = -c;
            }
            let mut w = vec![base; q as usize];
            w.push(Op::G(i));
            w.extend(std::iter::repeat_n(base, (p - q) as usize));
            (c, w)
        })
        .collect()
}

/// Operator of the expansion term `G_{l_1}^{(i_1)} .. G_{l_k}^{(i_k)} L^j`
/// applied to the identity. Identical words are merged and zero
/// coefficients dropped.
pub fn term_operator(kind: Kind, l: &[u32], i: &[usize], j: u32) -> Combination {
    let base = base_op(kind);
    let mut acc: Combination = vec![(BigRational::one(), Vec::new())];
    for (&lg, &ig) in l.iter().zip(i) {
        let g = g_operator(kind, lg, ig);
        let mut next = Vec::with_capacity(acc.len() * g.len());
        for (c, w) in &acc {
            for (d, v) in &g {
                let mut word = w.clone();
                word.extend_from_slice(v);
                next.push((c * d, word));
            }
        }
        acc = next;
    }
    for (_, w) in acc.iter_mut() {
        w.extend(std::iter::repeat_n(base, j as usize));
    }
    merge(acc)
}

pub fn merge(c: Combination) -> Combination {
    let mut map: BTreeMap<Word, BigRational> = BTreeMap::new();
    for (coef, w) in c {
        *map.entry(w).or_insert_with(BigRational::zero) += coef;
    }
    map.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(w, c)| (c, w))
        .collect()
}
