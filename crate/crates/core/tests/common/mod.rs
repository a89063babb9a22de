//! Oracles and generators shared by the integration tests. Nothing here calls
//! into the solver internals being checked.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use mfeq::{Action, Coeff, FunctionalEquation, Monomial, Series, StepSpec, VarTable};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub const SUBST_NAMES: [&str; 3] = ["r1", "r2", "r3"];

/// A polynomial with up to `max_terms` terms, coefficients in `-2..=2`, and
/// small exponents in every variable of `table`.
pub fn random_poly(rng: &mut ChaCha8Rng, table: &Arc<VarTable>, max_terms: usize) -> Series {
    let n = rng.gen_range(0..=max_terms);
    let terms: Vec<(Monomial, Coeff)> = (0..n)
        .map(|_| {
            let exps: Vec<u32> = (0..table.len())
                .map(|i| match table.name(i) {
                    "x" => u32::from(rng.gen_bool(0.25)),
                    _ => rng.gen_range(0..=2),
                })
                .collect();
            (Monomial::from_slice(&exps), Coeff::from(rng.gen_range(-2i64..=2)))
        })
        .collect();
    Series::from_terms(table, terms).unwrap()
}

/// A random equation with `m ≤ 3` substitution variables and `|𝒥| ≤ 4`
/// distinct steps with entries in `{-1, 0, 1, 2}`.
pub fn random_equation(rng: &mut ChaCha8Rng, x_cap: u32, q_cap: u32) -> FunctionalEquation {
    let m = rng.gen_range(1..=3);
    let mut names = vec!["x", "q"];
    names.extend_from_slice(&SUBST_NAMES[..m]);
    let table = Arc::new(VarTable::new(&names, &[("x", x_cap), ("q", q_cap)]).unwrap());
    let n_steps = rng.gen_range(0..=4);
    let mut all: Vec<Vec<i32>> = vec![vec![]];
    for _ in 0..m {
        all = all.into_iter().flat_map(|p| (-1..=2).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    all.shuffle(rng);
    let steps = all.into_iter().take(n_steps).map(|j| StepSpec::new(j, random_poly(rng, &table, 3))).collect();
    let e = random_poly(rng, &table, 4);
    FunctionalEquation::new(&table, &SUBST_NAMES[..m], e, steps).unwrap()
}

/// `(a_{i,k}, b_{i,k})` for `k = n + 1` read straight off the prefix: `b` is 1
/// iff no entry so far is `-1`, and `a` sums the entries after the last `-1`.
pub fn prefix_state(prefix: &[Vec<i32>], m: usize) -> (Vec<u32>, Vec<bool>) {
    let mut a = vec![0; m];
    let mut b = vec![true; m];
    for i in 0..m {
        let column: Vec<i32> = prefix.iter().map(|j| j[i]).collect();
        let start = match column.iter().rposition(|&v| v == -1) {
            Some(p) => {
                b[i] = false;
                p + 1
            }
            None => 0,
        };
        a[i] = column[start..].iter().map(|&v| v as u32).sum();
    }
    (a, b)
}

/// `f` with each substitution variable `r` sent to `q^a r^b`, through the
/// public single-variable substitution only.
fn evaluate_at(f: &Series, vars: &[&str], a: &[u32], b: &[bool]) -> Series {
    let mut out = f.clone();
    for (i, v) in vars.iter().enumerate() {
        out = out.substitute(v, Action::Shift(a[i])).unwrap();
        if !b[i] {
            out = out.substitute(v, Action::One).unwrap();
        }
    }
    out
}

/// The closed-form sum over every step sequence of length up to the x cap,
/// with no sharing, memo, or pruning.
pub fn naive_sequence_sum(eq: &FunctionalEquation) -> Series {
    let vars = eq.subst_vars();
    let m = vars.len();
    let table = eq.table();
    let x = Series::var(table, "x").unwrap();
    let mut total = Series::zero(table);
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..=eq.x_cap() {
        for seq in &layer {
            let js: Vec<Vec<i32>> = seq.iter().map(|&s| eq.steps()[s].j.clone()).collect();
            let mut term = Series::one(table);
            for k in 0..seq.len() {
                let (a, b) = prefix_state(&js[..k], m);
                term = term.mul(&x).unwrap().mul(&evaluate_at(&eq.steps()[seq[k]].f, &vars, &a, &b)).unwrap();
            }
            let (a, b) = prefix_state(&js, m);
            total = total.add(&term.mul(&evaluate_at(eq.e(), &vars, &a, &b)).unwrap()).unwrap();
        }
        layer = layer.iter().flat_map(|p| (0..eq.steps().len()).map(move |s| [p.clone(), vec![s]].concat())).collect();
    }
    total
}

/// `Σ q^{inv(w)}` over binary words with `k` zeros and `n - k` ones, an
/// inversion being a 1 before a 0; dense coefficients.
pub fn interleaving_poly(n: u32, k: u32) -> Vec<i64> {
    let mut counts: BTreeMap<u32, i64> = BTreeMap::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() != n - k {
            continue;
        }
        let mut ones = 0;
        let mut inv = 0;
        for pos in 0..n {
            if mask >> pos & 1 == 1 {
                ones += 1;
            } else {
                inv += ones;
            }
        }
        *counts.entry(inv).or_default() += 1;
    }
    let deg = counts.keys().max().copied().unwrap_or(0);
    (0..=deg).map(|d| counts.get(&d).copied().unwrap_or(0)).collect()
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Parallelogram polyominoes of area ≤ `max_area` found as raw cell sets:
/// every subset of a bounding box that is connected, row- and
/// column-convex, and contains the box's bottom-left and top-right cells.
/// Returns `(area, left height, right height, width, height)` per shape.
pub fn cell_set_polyominoes(max_area: u32) -> Vec<(u32, u32, u32, u32, u32)> {
    let mut out = Vec::new();
    for w in 1..=max_area {
        for h in 1..=max_area {
            if w + h - 1 > max_area {
                continue;
            }
            let cells = w * h;
            let idx = |c: u32, r: u32| c * h + r;
            for mask in 0u64..(1 << cells) {
                let area = mask.count_ones();
                if area > max_area || area < w + h - 1 {
                    continue;
                }
                let has = |c: u32, r: u32| mask >> idx(c, r) & 1 == 1;
                if !has(0, 0) || !has(w - 1, h - 1) {
                    continue;
                }
                let convex = |len: u32, get: &dyn Fn(u32) -> bool| {
                    let filled: Vec<u32> = (0..len).filter(|&i| get(i)).collect();
                    filled.is_empty() || filled.last().unwrap() - filled[0] + 1 == filled.len() as u32
                };
                let cols_ok = (0..w).all(|c| convex(h, &|r| has(c, r)));
                let rows_ok = (0..h).all(|r| convex(w, &|c| has(c, r)));
                if !cols_ok || !rows_ok || !connected(mask, w, h) {
                    continue;
                }
                let left = (0..h).filter(|&r| has(0, r)).count() as u32;
                let right = (0..h).filter(|&r| has(w - 1, r)).count() as u32;
                out.push((area, left, right, w, h));
            }
        }
    }
    out
}

fn connected(mask: u64, w: u32, h: u32) -> bool {
    let start = mask.trailing_zeros();
    let mut seen = 1u64 << start;
    let mut stack = vec![start];
    while let Some(i) = stack.pop() {
        let (c, r) = (i / h, i % h);
        let mut nbrs = Vec::with_capacity(4);
        if r > 0 {
            nbrs.push(i - 1);
        }
        if r + 1 < h {
            nbrs.push(i + 1);
        }
        if c > 0 {
            nbrs.push(i - h);
        }
        if c + 1 < w {
            nbrs.push(i + h);
        }
        for nb in nbrs {
            if mask >> nb & 1 == 1 && seen >> nb & 1 == 0 {
                seen |= 1 << nb;
                stack.push(nb);
            }
        }
    }
    seen == mask
}

/// Every permutation of `1..=n`.
pub fn permutations(n: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for v in 1..=n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                (0..=p.len()).map(move |i| {
                    let mut q = p.clone();
                    q.insert(i, v);
                    q
                })
            })
            .collect();
    }
    out
}

/// `(ℓ, 𝕄-descent count, α, β, γ)` computed from the definitions for a
/// permutation already known to be a valid (L)(M)(R)-word.
pub fn lmr_stats(w: &[u32], l: u32, m: u32) -> (u32, u32, u32, u32, u32) {
    let is_mid = |v: u32| v > l && v <= l + m;
    let is_high = |v: u32| v > l + m;
    let mut inv = 0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            inv += u32::from(w[i] > w[j]);
        }
    }
    let mids: Vec<(usize, u32)> = w.iter().copied().enumerate().filter(|&(_, v)| is_mid(v)).collect();
    let descent_idx: Vec<usize> = (0..mids.len().saturating_sub(1)).filter(|&i| mids[i].1 > mids[i + 1].1).collect();
    let first_high = w.iter().position(|&v| is_high(v)).unwrap();
    let alpha = match descent_idx.last() {
        None => 0,
        Some(&d) => mids[d + 1..].iter().filter(|&&(p, _)| p < first_high).count() as u32,
    };
    let beta = match mids.last() {
        None => 0,
        Some(&(last, _)) => w[..last].iter().filter(|&&v| is_high(v)).count() as u32,
    };
    let gamma = mids.iter().filter(|&&(p, _)| p > first_high).count() as u32;
    (inv, descent_idx.len() as u32, alpha, beta, gamma)
}

/// Whether a permutation of `1..=l+m+r` is an (L)(M)(R)-word.
pub fn is_lmr_word(w: &[u32], l: u32, m: u32) -> bool {
    let n = w.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if w[i] > w[j] && w[j] > w[k] {
                    return false;
                }
            }
        }
    }
    satisfies_blocks(w, l, m)
}

/// Parallelogram polyominoes of area ≤ `max_area` grown column by column
/// from the staircase description: each column is an interval
/// `[bottom, top]`, bottoms and tops never decrease, neighbouring columns
/// share an edge, and the first column starts at row 0. Same tuple layout as
/// [`cell_set_polyominoes`].
pub fn column_polyominoes(max_area: u32) -> Vec<(u32, u32, u32, u32, u32)> {
    fn grow(
        max_area: u32,
        area: u32,
        first_height: u32,
        width: u32,
        (bottom, top): (u32, u32),
        out: &mut Vec<(u32, u32, u32, u32, u32)>,
    ) {
        out.push((area, first_height, top - bottom + 1, width, top + 1));
        for nb in bottom..=top {
            for nt in top.max(nb)..nb + (max_area - area) {
                grow(max_area, area + nt - nb + 1, first_height, width + 1, (nb, nt), out);
            }
        }
    }
    let mut out = Vec::new();
    for h in 1..=max_area {
        grow(max_area, h, h, 1, (0, h - 1), &mut out);
    }
    out
}

/// 321-avoiding permutations of `1..=n`, built left to right: a new value
/// is rejected when some earlier value sits above a smaller earlier value
/// that is still above the new one.
pub fn avoiders_321(n: u32) -> Vec<Vec<u32>> {
    fn go(n: u32, word: &mut Vec<u32>, used: &mut Vec<bool>, out: &mut Vec<Vec<u32>>) {
        if word.len() == n as usize {
            out.push(word.clone());
            return;
        }
        // largest value that already has a bigger value before it
        let mut max_seen = 0;
        let mut max_middle = 0;
        for &v in word.iter() {
            if v < max_seen {
                max_middle = max_middle.max(v);
            }
            max_seen = max_seen.max(v);
        }
        for v in 1..=n {
            if used[v as usize] || v < max_middle {
                continue;
            }
            used[v as usize] = true;
            word.push(v);
            go(n, word, used, out);
            word.pop();
            used[v as usize] = false;
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::new(), &mut vec![false; n as usize + 1], &mut out);
    out
}

/// The block conditions of an (L)(M)(R)-word, assuming 321-avoidance.
pub fn satisfies_blocks(w: &[u32], l: u32, m: u32) -> bool {
    let low: Vec<u32> = w.iter().copied().filter(|&v| v <= l).collect();
    let high: Vec<u32> = w.iter().copied().filter(|&v| v > l + m).collect();
    let increasing = |s: &[u32]| s.windows(2).all(|p| p[0] < p[1]);
    let last_low = w.iter().rposition(|&v| v <= l).unwrap();
    let first_high = w.iter().position(|&v| v > l + m).unwrap();
    increasing(&low) && increasing(&high) && last_low < first_high
}
