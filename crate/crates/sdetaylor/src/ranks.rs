//! Term sets of the unified expansions and their rank counts.

use std::collections::BTreeSet;

/// A tuple `(k, j, l_1, ..., l_k)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct TermKey {
    pub k: usize,
    pub j: u32,
    pub l: Vec<u32>,
}

impl TermKey {
    pub fn weight_sum(&self) -> u32 {
        self.l.iter().sum()
    }

    pub fn is_wiener(&self) -> bool {
        self.k > 0
    }
}

/// All `l` in `N^k` with `Σl = s`, lexicographic.
fn compositions(k: usize, s: u32) -> Vec<Vec<u32>> {
    fn rec(k: usize, s: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == k {
            cur.push(s);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=s {
            cur.push(v);
            rec(k, s - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        if s == 0 {
            out.push(Vec::new());
        }
    } else {
        rec(k, s, &mut Vec::new(), &mut out);
    }
    out
}

fn collect<F: Fn(usize, u32, u32) -> bool>(kmax: usize, smax: u32, keep: F) -> Vec<TermKey> {
    let mut out = Vec::new();
    for k in 0..=kmax {
        for j in 0..=smax {
            for s in 0..=smax - j {
                if !keep(k, j, s) {
                    continue;
                }
                for l in compositions(k, s) {
                    out.push(TermKey { k, j, l });
                }
            }
        }
    }
    out.sort();
    out
}

/// `A_q`: tuples with `k + j + Σl = q`.
pub fn enumerate_aq(q: usize) -> Vec<TermKey> {
    if q == 0 {
        return Vec::new();
    }
    collect(q, q as u32, |k, j, s| k + (j + s) as usize == q)
}

/// `D_q`: tuples with `k + 2(j + Σl) = q`.
pub fn enumerate_dq(q: usize) -> Vec<TermKey> {
    if q == 0 {
        return Vec::new();
    }
    collect(q, q as u32 / 2, |k, j, s| k + 2 * (j + s) as usize == q)
}

/// `U_r`: tuples with `k + j + Σl <= r` and `k + 2(j + Σl) >= r + 1`.
pub fn enumerate_ur(r: usize) -> Vec<TermKey> {
    collect(r, r as u32, |k, j, s| {
        let m = (j + s) as usize;
        k + m <= r && k + 2 * m > r
    })
}

/// Distinct weight vectors `l` of Wiener tuples in `⋃_{q<=r}` of a family.
pub fn distinct_integrals(r: usize, family: fn(usize) -> Vec<TermKey>) -> BTreeSet<Vec<u32>> {
    (1..=r)
        .flat_map(family)
        .filter(TermKey::is_wiener)
        .map(|t| t.l)
        .collect()
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn rank_a(r: usize) -> u64 {
    (1u64 << r) - 1
}

/// Parity-split closed form for the rank of the `D` family.
pub fn rank_d(r: usize) -> u64 {
    let r = r as u64;
    let mut total = 0;
    for s in 0..r {
        let top = if r % 2 == 1 {
            (r - 1) / 2 + s / 2
        } else {
            r / 2 - 1 + (s + 1) / 2
        };
        for l in s..=top {
            total += binom(l, s);
        }
    }
    total
}

pub fn n_m(r: usize) -> u64 {
    2 * ((1u64 << r) - 1) - r as u64
}

pub fn n_e(r: usize) -> u64 {
    let r = r as u64;
    let mut total = 0;
    for s in 1..=r {
        let h = (r - s) / 2;
        for l in 0..=h {
            total += binom(h + s - l, s);
        }
    }
    total
}

/// Multi-indices over `{time, wiener}` of the classical expansions that are
/// not pure time integrals, filtered by `fits(time, wiener)`.
fn classical_multi_indices(r: usize, fits: impl Fn(usize, usize) -> bool) -> usize {
    let mut n = 0;
    for len in 1..=r {
        for mask in 0u32..(1 << len) {
            let w = mask.count_ones() as usize;
            if w > 0 && fits(len - w, w) {
                n += 1;
            }
        }
    }
    n
}

/// Enumeration counterpart of [`n_m`].
pub fn n_m_enumerated(r: usize) -> usize {
    classical_multi_indices(r, |_, _| true)
}

/// Enumeration counterpart of [`n_e`].
pub fn n_e_enumerated(r: usize) -> usize {
    classical_multi_indices(r, |t, w| w + 2 * t <= r)
}

pub fn rank_a_enumerated(r: usize) -> usize {
    distinct_integrals(r, enumerate_aq).len()
}

pub fn rank_d_enumerated(r: usize) -> usize {
    distinct_integrals(r, enumerate_dq).len()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RankRow {
    pub r: usize,
    pub rank_a: u64,
    pub n_m: u64,
    pub f: f64,
    pub rank_d: u64,
    pub n_e: u64,
    pub g: f64,
}

pub fn rank_row(r: usize) -> RankRow {
    let (ra, nm, rd, ne) = (rank_a(r), n_m(r), rank_d(r), n_e(r));
    RankRow {
        r,
        rank_a: ra,
        n_m: nm,
        f: nm as f64 / ra as f64,
        rank_d: rd,
        n_e: ne,
        g: ne as f64 / rd as f64,
    }
}

pub fn rank_table(r_max: usize) -> Vec<RankRow> {
    (1..=r_max).map(rank_row).collect()
}

/// CSV with columns `r,rank_A,n_M,f,rank_D,n_E,g`.
pub fn rank_table_csv(r_max: usize) -> String {
    let mut s = String::from("r,rank_A,n_M,f,rank_D,n_E,g\n");
    for row in rank_table(r_max) {
        s.push_str(&format!(
            "{},{},{},{:.4},{},{},{:.4}\n",
            row.r, row.rank_a, row.n_m, row.f, row.rank_d, row.n_e, row.g
        ));
    }
    s
}
