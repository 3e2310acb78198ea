//! Brick-wise dynamic program over kernel moves.
//!
//! Per brick, the candidate moves are all `v` with `A2·v = 0`,
//! `|v_j| <= radius` and `l <= x + v <= u`. An inner program enumerates them
//! coordinate by coordinate and compresses them to their `A1`-image, keeping
//! the best gain per image. The outer program then chains bricks with state
//! `σ = Σ A1·v^i`, bounded by the sigma radius, and reads the answer at
//! `σ = 0`.
//!
//! Columns are split by their support so the inner program stays small:
//! columns touching `A2` are enumerated first, columns with a single nonzero
//! in one `A2` row (slacks, auxiliaries) are folded in per row through a
//! precomputed absorption table, and columns touching only `A1` come last.

use std::collections::BTreeMap;
use std::ops::Add;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};
use crate::ilp::NFoldInstance;

type Key = SmallVec<[i64; 8]>;

pub(crate) trait Gain: Clone + Ord + Add<Output = Self> {
    fn nil() -> Self;
    fn from_big(v: &BigInt) -> Self;
    fn into_big(self) -> BigInt;
}

impl Gain for i128 {
    fn nil() -> Self {
        0
    }
    fn from_big(v: &BigInt) -> Self {
        v.to_i128().expect("gain range checked before dispatch")
    }
    fn into_big(self) -> BigInt {
        BigInt::from(self)
    }
}

impl Gain for BigInt {
    fn nil() -> Self {
        Zero::zero()
    }
    fn from_big(v: &BigInt) -> Self {
        v.clone()
    }
    fn into_big(self) -> BigInt {
        self
    }
}

/// A kernel move found by the program, with its gain `f(x) - f(x+g)`.
#[derive(Debug, Clone)]
pub(crate) struct Direction {
    pub g: Vec<i64>,
    pub gain: BigRational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    /// Nonzero in at least one `A2` row.
    Local,
    /// The only nonzero of the column sits in this `A2` row.
    Private(usize),
    /// Nonzero only in `A1`.
    Global,
    /// All zero.
    Free,
}

struct Layout {
    a1: Vec<Vec<i64>>,
    a2: Vec<Vec<i64>>,
    local: Vec<usize>,
    private: Vec<Vec<usize>>,
    global: Vec<usize>,
    free: Vec<usize>,
}

impl Layout {
    fn new(inst: &NFoldInstance) -> Result<Self> {
        let a1 = inst
            .a1()
            .to_i64_rows()
            .ok_or_else(|| invalid("A1 entries exceed 64-bit range"))?;
        let a2 = inst
            .a2()
            .to_i64_rows()
            .ok_or_else(|| invalid("A2 entries exceed 64-bit range"))?;
        let (mut local, mut global, mut free) = (vec![], vec![], vec![]);
        let mut private = vec![vec![]; inst.s()];
        for c in 0..inst.t() {
            match classify(&a1, &a2, c) {
                Column::Local => local.push(c),
                Column::Private(k) => private[k].push(c),
                Column::Global => global.push(c),
                Column::Free => free.push(c),
            }
        }
        Ok(Self {
            a1,
            a2,
            local,
            private,
            global,
            free,
        })
    }
}

fn classify(a1: &[Vec<i64>], a2: &[Vec<i64>], c: usize) -> Column {
    let in_a1 = a1.iter().any(|row| row[c] != 0);
    let a2_rows: Vec<usize> = (0..a2.len()).filter(|&k| a2[k][c] != 0).collect();
    match (in_a1, a2_rows.len()) {
        (false, 0) => Column::Free,
        (false, 1) => Column::Private(a2_rows[0]),
        (_, 0) => Column::Global,
        _ => Column::Local,
    }
}

/// Per-coordinate move range and gain table at the current point.
struct CoordTable<V> {
    lo: i64,
    gains: Vec<V>,
}

impl<V: Gain> CoordTable<V> {
    fn hi(&self) -> i64 {
        self.lo + self.gains.len() as i64 - 1
    }

    fn values(&self) -> impl Iterator<Item = (i64, &V)> {
        self.gains
            .iter()
            .enumerate()
            .map(move |(k, g)| (self.lo + k as i64, g))
    }
}

pub(crate) struct SearchParams {
    pub radius: u64,
    pub sigma: u64,
    pub budget: u64,
    /// Moves are scored as `x + step·g`; ranges shrink accordingly.
    pub step: u64,
}

/// Finds the kernel move `g` maximizing `f(x) - f(x + step·g)` subject to
/// `x + step·g` staying in bounds, or `None` when no such move improves.
pub(crate) fn best_direction(
    inst: &NFoldInstance,
    x: &[BigInt],
    params: &SearchParams,
) -> Result<Option<Direction>> {
    let layout = Layout::new(inst)?;
    let obj = inst.objective();
    let denom = obj.common_denominator();
    let radius = BigInt::from(params.radius);
    let lambda = BigInt::from(params.step.max(1));

    let mut ranges = Vec::with_capacity(inst.dim());
    let mut raw_gains: Vec<Vec<BigInt>> = Vec::with_capacity(inst.dim());
    let mut max_gain = BigInt::zero();
    for i in 0..inst.dim() {
        let lo = (&inst.lower()[i] - &x[i]).div_ceil(&lambda).max(-&radius);
        let hi = (&inst.upper()[i] - &x[i])
            .div_floor(&lambda)
            .min(radius.clone());
        if lo > hi || lo.is_positive() || hi.is_negative() {
            return Err(invalid(format!("coordinate {i} lies outside its bounds")));
        }
        let (lo, hi) = (
            lo.to_i64().ok_or_else(|| overflow(params))?,
            hi.to_i64().ok_or_else(|| overflow(params))?,
        );
        let q = (&obj.quadratic_coefficients()[i] * BigRational::from_integer(denom.clone()))
            .to_integer();
        let c =
            (&obj.linear_coefficients()[i] * BigRational::from_integer(denom.clone())).to_integer();
        let xi = &x[i];
        let gains: Vec<BigInt> = (lo..=hi)
            .map(|v| {
                let v = BigInt::from(v) * &lambda;
                // f(x) - f(x+v) = -(q(2xv + v²) + cv)
                -(&q * (BigInt::from(2) * xi * &v + &v * &v) + &c * &v)
            })
            .collect();
        for g in &gains {
            if g.abs() > max_gain {
                max_gain = g.abs();
            }
        }
        ranges.push((lo, hi));
        raw_gains.push(gains);
    }
    check_key_range(inst, &layout, &ranges, params)?;

    let headroom = BigInt::from(1u8) << 120u32;
    let found = if max_gain * BigInt::from(inst.dim() + 1) < headroom {
        run::<i128>(inst, &layout, &ranges, &raw_gains, params)?
    } else {
        run::<BigInt>(inst, &layout, &ranges, &raw_gains, params)?
    };
    Ok(found.map(|(g, gain)| Direction {
        g,
        gain: BigRational::new(gain, denom),
    }))
}

fn overflow(params: &SearchParams) -> Error {
    Error::Resource(format!(
        "move range at radius {} exceeds 64-bit state coordinates",
        params.radius
    ))
}

fn check_key_range(
    inst: &NFoldInstance,
    layout: &Layout,
    ranges: &[(i64, i64)],
    params: &SearchParams,
) -> Result<()> {
    let mut total: i128 = 0;
    for (i, &(lo, hi)) in ranges.iter().enumerate() {
        let c = i % inst.t();
        let coef = layout
            .a1
            .iter()
            .chain(&layout.a2)
            .map(|row| i128::from(row[c]).abs())
            .max()
            .unwrap_or(0);
        total += coef * i128::from(lo.abs().max(hi.abs()));
    }
    if total >= 1i128 << 62 {
        return Err(overflow(params));
    }
    Ok(())
}

struct Node<V> {
    key: Key,
    gain: V,
    prev: u32,
    value: i64,
}

/// A layer of deduplicated states; ties keep the earliest insertion.
struct Layer<V> {
    nodes: Vec<Node<V>>,
    index: FxHashMap<Key, u32>,
}

impl<V: Gain> Layer<V> {
    fn new() -> Self {
        Self {
            nodes: Vec::new(),
            index: FxHashMap::default(),
        }
    }

    fn offer(&mut self, key: Key, gain: V, prev: u32, value: i64) {
        if let Some(&at) = self.index.get(&key) {
            let node = &mut self.nodes[at as usize];
            if gain > node.gain {
                node.gain = gain;
                node.prev = prev;
                node.value = value;
            }
        } else {
            self.index.insert(key.clone(), self.nodes.len() as u32);
            self.nodes.push(Node {
                key,
                gain,
                prev,
                value,
            });
        }
    }
}

struct Work {
    used: u64,
    budget: u64,
    radius: u64,
    sigma: u64,
}

impl Work {
    fn charge(&mut self, amount: u64) -> Result<()> {
        self.used = self.used.saturating_add(amount);
        if self.used > self.budget {
            return Err(Error::Resource(format!(
                "augmentation search with brick radius {} and sigma radius {} exceeded the node budget of {}",
                self.radius, self.sigma, self.budget
            )));
        }
        Ok(())
    }
}

/// Best assignment of a row's private columns absorbing each offset `d`.
struct Absorption<V> {
    table: BTreeMap<i64, (V, SmallVec<[i64; 4]>)>,
    min: i64,
    max: i64,
}

/// One candidate of a brick: its `A1`-image, gain, and full move.
struct Candidate<V> {
    image: Key,
    gain: V,
    moves: Vec<i64>,
}

fn run<V: Gain>(
    inst: &NFoldInstance,
    layout: &Layout,
    ranges: &[(i64, i64)],
    raw: &[Vec<BigInt>],
    params: &SearchParams,
) -> Result<Option<(Vec<i64>, BigInt)>> {
    let (r, t, n) = (inst.r(), inst.t(), inst.bricks());
    let tables: Vec<CoordTable<V>> = ranges
        .iter()
        .zip(raw)
        .map(|(&(lo, _), gains)| CoordTable {
            lo,
            gains: gains.iter().map(V::from_big).collect(),
        })
        .collect();
    let mut work = Work {
        used: 0,
        budget: params.budget,
        radius: params.radius,
        sigma: params.sigma,
    };
    let sigma = i64::try_from(params.sigma).unwrap_or(i64::MAX / 4);

    let mut bricks = Vec::with_capacity(n);
    for i in 0..n {
        let coords = &tables[i * t..(i + 1) * t];
        bricks.push(brick_candidates(layout, r, coords, sigma, &mut work)?);
    }

    // suffix[i][k]: range of Σ_{i' >= i} image_k over the remaining bricks
    let mut suffix = vec![vec![(0i64, 0i64); r]; n + 1];
    for i in (0..n).rev() {
        for k in 0..r {
            let lo = bricks[i].iter().map(|c| c.image[k]).min().unwrap_or(0);
            let hi = bricks[i].iter().map(|c| c.image[k]).max().unwrap_or(0);
            suffix[i][k] = (suffix[i + 1][k].0 + lo, suffix[i + 1][k].1 + hi);
        }
    }

    let mut layers: Vec<Layer<V>> = Vec::with_capacity(n + 1);
    let mut root = Layer::new();
    root.offer(Key::from_elem(0, r), V::nil(), u32::MAX, -1);
    layers.push(root);
    for i in 0..n {
        let prev = &layers[i];
        work.charge(prev.nodes.len() as u64 * bricks[i].len() as u64)?;
        let mut next = Layer::new();
        for (pi, node) in prev.nodes.iter().enumerate() {
            'cand: for (ci, cand) in bricks[i].iter().enumerate() {
                let mut key = node.key.clone();
                for k in 0..r {
                    let v = key[k] + cand.image[k];
                    let (lo, hi) = suffix[i + 1][k];
                    if v.abs() > sigma || -v < lo || -v > hi {
                        continue 'cand;
                    }
                    key[k] = v;
                }
                next.offer(
                    key,
                    node.gain.clone() + cand.gain.clone(),
                    pi as u32,
                    ci as i64,
                );
            }
        }
        layers.push(next);
    }

    let last = &layers[n];
    let Some(&end) = last.index.get(&Key::from_elem(0, r)) else {
        return Ok(None);
    };
    let best = last.nodes[end as usize].gain.clone();
    if best <= V::nil() {
        return Ok(None);
    }
    let mut g = vec![0i64; n * t];
    let mut at = end;
    for i in (0..n).rev() {
        let node = &layers[i + 1].nodes[at as usize];
        let cand = &bricks[i][node.value as usize];
        g[i * t..(i + 1) * t].copy_from_slice(&cand.moves);
        at = node.prev;
    }
    Ok(Some((g, best.into_big())))
}

fn brick_candidates<V: Gain>(
    layout: &Layout,
    r: usize,
    coords: &[CoordTable<V>],
    sigma: i64,
    work: &mut Work,
) -> Result<Vec<Candidate<V>>> {
    let s = layout.a2.len();
    let t = coords.len();

    let mut absorb: Vec<Absorption<V>> = Vec::with_capacity(s);
    for (k, cols) in layout.private.iter().enumerate() {
        absorb.push(absorption_table(&layout.a2[k], cols, coords, work)?);
    }

    // constant best choice for all-zero columns
    let mut free_moves = Vec::with_capacity(layout.free.len());
    let mut free_gain = V::nil();
    for &c in &layout.free {
        let (v, g) = coords[c]
            .values()
            .max_by(|(va, ga), (vb, gb)| ga.cmp(gb).then(vb.abs().cmp(&va.abs())).then(vb.cmp(va)))
            .map(|(v, g)| (v, g.clone()))
            .expect("range contains zero");
        free_moves.push((c, v));
        free_gain = free_gain + g;
    }

    // rem[p][k]: range still reachable in local row k after the p-th local column
    let nl = layout.local.len();
    let mut rem = vec![vec![(0i64, 0i64); s]; nl + 1];
    for k in 0..s {
        rem[nl][k] = (absorb[k].min, absorb[k].max);
    }
    for p in (0..nl).rev() {
        let c = layout.local[p];
        for k in 0..s {
            let a = layout.a2[k][c];
            let (x, y) = (a * coords[c].lo, a * coords[c].hi());
            rem[p][k] = (rem[p + 1][k].0 + x.min(y), rem[p + 1][k].1 + x.max(y));
        }
    }

    let mut layers: Vec<Layer<V>> = Vec::new();
    let mut root = Layer::new();
    root.offer(Key::from_elem(0, r + s), free_gain, u32::MAX, 0);
    layers.push(root);

    for (p, &c) in layout.local.iter().enumerate() {
        let prev = layers.last().expect("root layer");
        work.charge(prev.nodes.len() as u64 * coords[c].gains.len() as u64)?;
        let mut next = Layer::new();
        for (pi, node) in prev.nodes.iter().enumerate() {
            'value: for (v, g) in coords[c].values() {
                let mut key = node.key.clone();
                for k in 0..r {
                    key[k] += layout.a1[k][c] * v;
                }
                for k in 0..s {
                    let val = key[r + k] + layout.a2[k][c] * v;
                    let (lo, hi) = rem[p + 1][k];
                    if -val < lo || -val > hi {
                        continue 'value;
                    }
                    key[r + k] = val;
                }
                next.offer(key, node.gain.clone() + g.clone(), pi as u32, v);
            }
        }
        layers.push(next);
    }

    // fold private columns in, closing every local row
    {
        let prev = layers.last().expect("root layer");
        work.charge(prev.nodes.len() as u64)?;
        let mut next = Layer::new();
        'node: for (pi, node) in prev.nodes.iter().enumerate() {
            let mut gain = node.gain.clone();
            for (k, table) in absorb.iter().enumerate() {
                match table.table.get(&-node.key[r + k]) {
                    Some((g, _)) => gain = gain + g.clone(),
                    None => continue 'node,
                }
            }
            let mut key = node.key.clone();
            key.truncate(r);
            next.offer(key, gain, pi as u32, 0);
        }
        layers.push(next);
    }

    for &c in &layout.global {
        let prev = layers.last().expect("root layer");
        work.charge(prev.nodes.len() as u64 * coords[c].gains.len() as u64)?;
        let mut next = Layer::new();
        for (pi, node) in prev.nodes.iter().enumerate() {
            for (v, g) in coords[c].values() {
                let mut key = node.key.clone();
                for k in 0..r {
                    key[k] += layout.a1[k][c] * v;
                }
                next.offer(key, node.gain.clone() + g.clone(), pi as u32, v);
            }
        }
        layers.push(next);
    }

    let last = layers.last().expect("root layer");
    let mut out = Vec::new();
    let mut order: Vec<usize> = (0..last.nodes.len())
        .filter(|&ni| last.nodes[ni].key.iter().all(|v| v.abs() <= 2 * sigma))
        .collect();
    order.sort_by(|&a, &b| last.nodes[a].key.cmp(&last.nodes[b].key));
    let absorb_layer = 1 + nl;
    for ni in order {
        let node = &last.nodes[ni];
        let mut moves = vec![0i64; t];
        for &(c, v) in &free_moves {
            moves[c] = v;
        }
        let mut at = ni as u32;
        for layer in (1..layers.len()).rev() {
            let nd = &layers[layer].nodes[at as usize];
            if layer > absorb_layer {
                moves[layout.global[layer - absorb_layer - 1]] = nd.value;
            } else if layer == absorb_layer {
                let before = &layers[layer - 1].nodes[nd.prev as usize];
                for (k, table) in absorb.iter().enumerate() {
                    let (_, vals) = &table.table[&-before.key[r + k]];
                    for (&c, &v) in layout.private[k].iter().zip(vals) {
                        moves[c] = v;
                    }
                }
            } else {
                moves[layout.local[layer - 1]] = nd.value;
            }
            at = nd.prev;
        }
        out.push(Candidate {
            image: node.key.clone(),
            gain: node.gain.clone(),
            moves,
        });
    }
    Ok(out)
}

fn absorption_table<V: Gain>(
    row: &[i64],
    cols: &[usize],
    coords: &[CoordTable<V>],
    work: &mut Work,
) -> Result<Absorption<V>> {
    let mut table: BTreeMap<i64, (V, SmallVec<[i64; 4]>)> = BTreeMap::new();
    table.insert(0, (V::nil(), SmallVec::new()));
    for &c in cols {
        work.charge(table.len() as u64 * coords[c].gains.len() as u64)?;
        let mut next: BTreeMap<i64, (V, SmallVec<[i64; 4]>)> = BTreeMap::new();
        for (d, (g, vals)) in &table {
            for (v, gv) in coords[c].values() {
                let nd = d + row[c] * v;
                let ng = g.clone() + gv.clone();
                let better = next.get(&nd).is_none_or(|(old, _)| ng > *old);
                if better {
                    let mut nv = vals.clone();
                    nv.push(v);
                    next.insert(nd, (ng, nv));
                }
            }
        }
        table = next;
    }
    let min = *table.keys().next().expect("table contains zero");
    let max = *table.keys().next_back().expect("table contains zero");
    Ok(Absorption { table, min, max })
}
