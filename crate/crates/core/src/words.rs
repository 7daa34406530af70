//! Enumeration of weighted word sums `∫ f dμₙ = Σ_{|w|=n} w_w f(A_w)`.
//!
//! Products are kept as a normalised matrix (largest entry in `[1/2, 1)`)
//! plus a power-of-two exponent, so long products of contractions never
//! underflow. `ln|det|` is carried along the path additively and supplies
//! the smallest singular value, which is otherwise the least accurate one.
//!
//! The first levels are expanded breadth-first, merging bit-identical
//! products (commuting or idempotent families collapse to a handful of
//! distinct products per level). Once the frontier would exceed
//! [`FRONTIER_CAP`] the remaining depth is covered by depth-first search
//! from each frontier node, split across workers.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use crate::error::{invalid, BudgetLimit, Error, Result};
use crate::linalg::{log_phi_from_singular_values, mul_into, singular_values_into};
use crate::logsum::{LogSum, LogValue};
use crate::measure::FiniteMatrixMeasure;

/// Maximum number of distinct products kept in the breadth-first frontier.
pub const FRONTIER_CAP: usize = 1 << 14;

const CHECK_EVERY: u64 = 1024;

/// Limits on every exponential loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WordBudget {
    pub max_word_length: usize,
    /// Cap on the number of products formed by a single enumeration.
    pub max_words: u64,
    pub wall_clock_cap: Duration,
}

impl Default for WordBudget {
    fn default() -> Self {
        Self {
            max_word_length: 256,
            max_words: 10_000_000,
            wall_clock_cap: Duration::from_secs(120),
        }
    }
}

impl WordBudget {
    pub fn new(max_word_length: usize, max_words: u64, wall_clock_cap: Duration) -> Result<Self> {
        if max_word_length == 0 || max_words == 0 || wall_clock_cap.is_zero() {
            return invalid("word budget limits must all be positive");
        }
        Ok(Self {
            max_word_length,
            max_words,
            wall_clock_cap,
        })
    }
}

/// The integrand of a word sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    /// `‖A‖^s`
    Norm(f64),
    /// `φ^s(A)`
    Phi(f64),
}

impl Kernel {
    pub fn exponent(self) -> f64 {
        match self {
            Kernel::Norm(s) | Kernel::Phi(s) => s,
        }
    }

    fn validate(self) -> Result<()> {
        let s = self.exponent();
        if !(s > 0.0) || !s.is_finite() {
            return invalid(format!("kernel exponent must be positive and finite, got {s}"));
        }
        Ok(())
    }
}

/// Word sums for every length `1..=depth` from a single enumeration.
#[derive(Clone, Debug)]
pub struct LevelSums {
    sums: Vec<LogValue>,
    products: Vec<u64>,
    max_log_norm: Vec<f64>,
    argmax: Vec<Vec<usize>>,
}

impl LevelSums {
    pub fn depth(&self) -> usize {
        self.sums.len()
    }

    /// `Σ_{|w|=m} w_w f(A_w)`, for `1 ≤ m ≤ depth`.
    pub fn sum(&self, m: usize) -> LogValue {
        self.sums[m - 1]
    }

    /// Number of products formed at length `m`.
    pub fn products(&self, m: usize) -> u64 {
        self.products[m - 1]
    }

    /// `max_{|w|=m} ln ‖A_w‖` (`-∞` if every product vanishes).
    pub fn max_log_norm(&self, m: usize) -> f64 {
        self.max_log_norm[m - 1]
    }

    /// A word of length `m` attaining [`max_log_norm`](Self::max_log_norm),
    /// as atom indices of the input measure.
    pub fn argmax_word(&self, m: usize) -> &[usize] {
        &self.argmax[m - 1]
    }

    /// Smallest `m` whose sum is zero.
    pub fn first_zero_level(&self) -> Option<usize> {
        self.sums.iter().position(|s| s.is_zero()).map(|i| i + 1)
    }
}

/// Runs word enumerations under a [`WordBudget`] and keeps running totals.
///
/// The wall-clock cap is measured from construction.
#[derive(Debug)]
pub struct Engine {
    budget: WordBudget,
    workers: usize,
    started: Instant,
    products: AtomicU64,
}

impl Engine {
    pub fn new(budget: WordBudget) -> Self {
        Self {
            budget,
            workers: 1,
            started: Instant::now(),
            products: AtomicU64::new(0),
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn budget(&self) -> &WordBudget {
        &self.budget
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Products formed over the engine's lifetime.
    pub fn products_formed(&self) -> u64 {
        self.products.load(Ordering::Relaxed)
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    /// `ln Σ_{|w|=n} w_w f(A_w)`.
    pub fn weighted_power_sum(&self, mu: &FiniteMatrixMeasure, n: usize, kernel: Kernel) -> Result<LogValue> {
        Ok(self.level_sums(mu, kernel, n)?.sum(n))
    }

    /// Word sums of every length up to `depth`.
    pub fn level_sums(&self, mu: &FiniteMatrixMeasure, kernel: Kernel, depth: usize) -> Result<LevelSums> {
        kernel.validate()?;
        if depth == 0 {
            return invalid("word length must be at least 1");
        }
        if depth > self.budget.max_word_length {
            return Err(Error::BudgetExhausted {
                word_length: depth,
                products: 0,
                reason: BudgetLimit::WordLength,
            });
        }
        self.check_clock(depth, 0)?;
        Run::new(self, mu, kernel, depth).execute()
    }

    fn check_clock(&self, depth: usize, products: u64) -> Result<()> {
        if self.started.elapsed() > self.budget.wall_clock_cap {
            return Err(Error::BudgetExhausted {
                word_length: depth,
                products,
                reason: BudgetLimit::WallClock,
            });
        }
        Ok(())
    }
}

struct Letter {
    mat: Vec<f64>,
    exp2: i64,
    ln_w: f64,
    ln_det: f64,
    /// representative index in the caller's atom list
    origin: usize,
}

#[derive(Clone)]
struct Node {
    mat: Vec<f64>,
    exp2: i64,
    ln_w: f64,
    ln_det: f64,
    word: Vec<u32>,
}

/// Per-thread accumulators.
struct Tally {
    sums: Vec<LogSum>,
    products: Vec<u64>,
    max_log_norm: Vec<f64>,
    argmax: Vec<Vec<u32>>,
}

impl Tally {
    fn new(depth: usize) -> Self {
        Self {
            sums: (0..depth).map(|_| LogSum::new()).collect(),
            products: vec![0; depth],
            max_log_norm: vec![f64::NEG_INFINITY; depth],
            argmax: vec![Vec::new(); depth],
        }
    }

    #[inline]
    fn record(&mut self, level: usize, ln_term: f64, ln_norm: f64, word: &[u32]) {
        self.sums[level].push(ln_term);
        if ln_norm > self.max_log_norm[level] {
            self.max_log_norm[level] = ln_norm;
            self.argmax[level].clear();
            self.argmax[level].extend_from_slice(word);
        }
    }

    fn absorb(&mut self, other: Tally) {
        for (level, sum) in other.sums.into_iter().enumerate() {
            self.sums[level].merge(sum);
            self.products[level] += other.products[level];
            if other.max_log_norm[level] > self.max_log_norm[level] {
                self.max_log_norm[level] = other.max_log_norm[level];
                self.argmax[level] = other.argmax[level].clone();
            }
        }
    }
}

/// Scratch space for evaluating kernels.
struct Evaluator {
    d: usize,
    kernel: Kernel,
    scratch: Vec<f64>,
    sv: Vec<f64>,
}

impl Evaluator {
    fn new(d: usize, kernel: Kernel) -> Self {
        Self {
            d,
            kernel,
            scratch: Vec::new(),
            sv: vec![0.0; d],
        }
    }

    /// Returns `(ln f(A), ln ‖A‖)` for the product `mat · 2^exp2`.
    #[inline]
    fn eval(&mut self, mat: &[f64], exp2: i64, ln_det: f64) -> (f64, f64) {
        let d = self.d;
        let ln_scale = exp2 as f64 * std::f64::consts::LN_2;
        singular_values_into(d, mat, &mut self.scratch, &mut self.sv);
        let ln_norm = self.sv[0].ln() + ln_scale;
        let value = match self.kernel {
            Kernel::Norm(s) => s * ln_norm,
            Kernel::Phi(s) if s >= d as f64 => s / d as f64 * ln_det,
            Kernel::Phi(s) => {
                if d >= 2 {
                    let head: f64 = self.sv[..d - 1].iter().map(|x| x.ln()).sum();
                    let ln_last = ln_det - d as f64 * ln_scale - head;
                    let cap = self.sv[d - 2].ln();
                    self.sv[d - 1] = ln_last.min(cap).exp();
                }
                log_phi_from_singular_values(&self.sv, s) + s * ln_scale
            }
        };
        (value, ln_norm)
    }
}

/// Rescales `buf` so its largest entry lies in `[1/2, 1)`; returns the
/// power of two removed, or `None` for the zero matrix.
#[inline]
fn normalize(buf: &mut [f64]) -> Option<i64> {
    let top = buf.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if top == 0.0 {
        return None;
    }
    let e = binary_exponent(top);
    if e != 0 {
        scale_by_pow2(buf, -e);
    }
    Some(e)
}

/// `e` with `x = f · 2^e`, `f ∈ [1/2, 1)`, for finite `x > 0`.
fn binary_exponent(x: f64) -> i64 {
    let raw = ((x.to_bits() >> 52) & 0x7ff) as i64;
    if raw == 0 {
        return binary_exponent(x * pow2(64)) - 64;
    }
    raw - 1022
}

fn pow2(e: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

fn scale_by_pow2(buf: &mut [f64], mut e: i64) {
    while e != 0 {
        let step = e.clamp(-1000, 1000);
        let f = pow2(step);
        buf.iter_mut().for_each(|x| *x *= f);
        e -= step;
    }
}

struct Run<'a> {
    engine: &'a Engine,
    d: usize,
    kernel: Kernel,
    depth: usize,
    letters: Vec<Letter>,
    formed: AtomicU64,
    abort: AtomicBool,
    failure: std::sync::Mutex<Option<Error>>,
}

impl<'a> Run<'a> {
    fn new(engine: &'a Engine, mu: &FiniteMatrixMeasure, kernel: Kernel, depth: usize) -> Self {
        Self {
            engine,
            d: mu.dim(),
            kernel,
            depth,
            letters: merge_atoms(mu),
            formed: AtomicU64::new(0),
            abort: AtomicBool::new(false),
            failure: std::sync::Mutex::new(None),
        }
    }

    fn execute(self) -> Result<LevelSums> {
        let mut tally = Tally::new(self.depth);
        let mut eval = Evaluator::new(self.d, self.kernel);

        // level 1
        tally.products[0] = self.letters.len() as u64;
        self.charge(self.letters.len() as u64, 1)?;
        let mut frontier: Vec<Node> = self
            .letters
            .iter()
            .enumerate()
            .map(|(i, l)| Node {
                mat: l.mat.clone(),
                exp2: l.exp2,
                ln_w: l.ln_w,
                ln_det: l.ln_det,
                word: vec![i as u32],
            })
            .collect();
        for node in &frontier {
            let (lk, ln_norm) = eval.eval(&node.mat, node.exp2, node.ln_det);
            tally.record(0, node.ln_w + lk, ln_norm, &node.word);
        }

        let mut level = 1;
        while level < self.depth
            && !frontier.is_empty()
            && frontier.len().saturating_mul(self.letters.len()) <= FRONTIER_CAP
        {
            frontier = self.expand(&frontier, level, &mut tally, &mut eval)?;
            level += 1;
        }

        if level < self.depth && !frontier.is_empty() {
            self.descend(&frontier, level, &mut tally)?;
        }

        self.engine
            .products
            .fetch_add(self.formed.load(Ordering::Relaxed), Ordering::Relaxed);
        Ok(self.finish(tally))
    }

    fn finish(&self, tally: Tally) -> LevelSums {
        LevelSums {
            sums: tally.sums.into_iter().map(LogSum::finish).collect(),
            products: tally.products,
            max_log_norm: tally.max_log_norm,
            argmax: tally
                .argmax
                .into_iter()
                .map(|w| w.iter().map(|&i| self.letters[i as usize].origin).collect())
                .collect(),
        }
    }

    /// Charges `n` freshly formed products against the budget.
    fn charge(&self, n: u64, word_length: usize) -> Result<()> {
        let total = self.formed.fetch_add(n, Ordering::Relaxed) + n;
        let fail = |reason| Error::BudgetExhausted {
            word_length,
            products: total,
            reason,
        };
        if self.abort.load(Ordering::Relaxed) {
            return Err(self
                .failure
                .lock()
                .ok()
                .and_then(|f| f.clone())
                .unwrap_or_else(|| fail(BudgetLimit::WordCount)));
        }
        let err = if total > self.engine.budget.max_words {
            Some(fail(BudgetLimit::WordCount))
        } else if self.engine.started.elapsed() > self.engine.budget.wall_clock_cap {
            Some(fail(BudgetLimit::WallClock))
        } else {
            None
        };
        match err {
            Some(e) => {
                if let Ok(mut slot) = self.failure.lock() {
                    slot.get_or_insert_with(|| e.clone());
                }
                self.abort.store(true, Ordering::Relaxed);
                Err(e)
            }
            None => Ok(()),
        }
    }

    /// One breadth-first level with merging of identical products.
    fn expand(&self, frontier: &[Node], level: usize, tally: &mut Tally, eval: &mut Evaluator) -> Result<Vec<Node>> {
        let dd = self.d * self.d;
        let formed = (frontier.len() * self.letters.len()) as u64;
        tally.products[level] += formed;
        self.charge(formed, level + 1)?;

        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut next: Vec<Node> = Vec::new();
        let mut buf = vec![0.0; dd];
        for node in frontier {
            for (li, letter) in self.letters.iter().enumerate() {
                mul_into(self.d, &node.mat, &letter.mat, &mut buf);
                let Some(e) = normalize(&mut buf) else { continue };
                let exp2 = node.exp2 + letter.exp2 + e;
                let ln_w = node.ln_w + letter.ln_w;
                let mut key: Vec<u64> = buf.iter().map(|x| x.to_bits()).collect();
                key.push(exp2 as u64);
                match index.get(&key) {
                    Some(&slot) => {
                        let n = &mut next[slot];
                        n.ln_w = crate::logsum::log_add_exp(n.ln_w, ln_w);
                    }
                    None => {
                        index.insert(key, next.len());
                        let mut word = node.word.clone();
                        word.push(li as u32);
                        next.push(Node {
                            mat: buf.clone(),
                            exp2,
                            ln_w,
                            ln_det: node.ln_det + letter.ln_det,
                            word,
                        });
                    }
                }
            }
        }
        for node in &next {
            let (lk, ln_norm) = eval.eval(&node.mat, node.exp2, node.ln_det);
            tally.record(level, node.ln_w + lk, ln_norm, &node.word);
        }
        Ok(next)
    }

    /// Depth-first completion of every frontier node at length `level`.
    fn descend(&self, frontier: &[Node], level: usize, tally: &mut Tally) -> Result<()> {
        let workers = self.engine.workers.min(frontier.len()).max(1);
        if workers == 1 {
            let mut local = Tally::new(self.depth);
            self.descend_chunk(frontier, level, &mut local)?;
            tally.absorb(local);
            return Ok(());
        }
        let chunk = frontier.len().div_ceil(workers);
        let results: Vec<Result<Tally>> = std::thread::scope(|scope| {
            let handles: Vec<_> = frontier
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        let mut local = Tally::new(self.depth);
                        self.descend_chunk(part, level, &mut local).map(|_| local)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("word enumeration worker panicked"))
                .collect()
        });
        for r in results {
            tally.absorb(r?);
        }
        Ok(())
    }

    fn descend_chunk(&self, nodes: &[Node], level: usize, tally: &mut Tally) -> Result<()> {
        let dd = self.d * self.d;
        let mut dfs = Dfs {
            run: self,
            eval: Evaluator::new(self.d, self.kernel),
            stack: vec![0.0; (self.depth + 1) * dd],
            word: vec![0; self.depth],
            pending: 0,
        };
        for node in nodes {
            dfs.stack[(level - 1) * dd..level * dd].copy_from_slice(&node.mat);
            dfs.word[..level].copy_from_slice(&node.word);
            dfs.visit(level, node.exp2, node.ln_w, node.ln_det, tally)?;
        }
        self.charge(dfs.pending, self.depth)?;
        Ok(())
    }
}

struct Dfs<'r, 'a> {
    run: &'r Run<'a>,
    eval: Evaluator,
    /// stack[(m-1)·d² ..] holds the normalised prefix of length m
    stack: Vec<f64>,
    word: Vec<u32>,
    pending: u64,
}

impl Dfs<'_, '_> {
    /// Extends the prefix of length `m` stored on the stack.
    fn visit(&mut self, m: usize, exp2: i64, ln_w: f64, ln_det: f64, tally: &mut Tally) -> Result<()> {
        let d = self.run.d;
        let dd = d * d;
        let run = self.run;
        for (li, letter) in run.letters.iter().enumerate() {
            {
                let (head, tail) = self.stack.split_at_mut(m * dd);
                mul_into(d, &head[(m - 1) * dd..], &letter.mat, &mut tail[..dd]);
            }
            tally.products[m] += 1;
            self.pending += 1;
            if self.pending >= CHECK_EVERY {
                run.charge(self.pending, m + 1)?;
                self.pending = 0;
            }
            let child = &mut self.stack[m * dd..(m + 1) * dd];
            let Some(e) = normalize(child) else { continue };
            let child_exp2 = exp2 + letter.exp2 + e;
            let child_w = ln_w + letter.ln_w;
            let child_det = ln_det + letter.ln_det;
            self.word[m] = li as u32;
            let (lk, ln_norm) = self.eval.eval(&self.stack[m * dd..(m + 1) * dd], child_exp2, child_det);
            tally.record(m, child_w + lk, ln_norm, &self.word[..=m]);
            if m + 1 < run.depth {
                self.visit(m + 1, child_exp2, child_w, child_det, tally)?;
            }
        }
        Ok(())
    }
}

/// Normalised atoms with bit-identical matrices merged (weights added).
fn merge_atoms(mu: &FiniteMatrixMeasure) -> Vec<Letter> {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut letters: Vec<Letter> = Vec::new();
    for (origin, atom) in mu.atoms().iter().enumerate() {
        let mut mat = atom.matrix.as_slice().to_vec();
        let ln_w = atom.weight.ln();
        let ln_det = atom.matrix.determinant().abs().ln();
        let exp2 = normalize(&mut mat).unwrap_or(0);
        let mut key: Vec<u64> = mat.iter().map(|x| x.to_bits()).collect();
        key.push(exp2 as u64);
        match index.get(&key) {
            Some(&i) => letters[i].ln_w = crate::logsum::log_add_exp(letters[i].ln_w, ln_w),
            None => {
                index.insert(key, letters.len());
                letters.push(Letter {
                    mat,
                    exp2,
                    ln_w,
                    ln_det,
                    origin,
                });
            }
        }
    }
    letters
}
