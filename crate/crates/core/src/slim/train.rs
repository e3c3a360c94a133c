//! Exact SLIM training by depth-first branch and bound.
//!
//! Examples are first collapsed into unique feature patterns with positive
//! and negative counts. A node fixes the coefficients of the first `d`
//! features in search order. Its lower bound is the committed penalty plus
//! a loss bound: patterns that agree on every unfixed feature receive the
//! same contribution from the unfixed coefficients and the intercept, so
//! each such group can do no better than the best single threshold on its
//! partial scores. A local search supplies the first incumbent.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use super::{objective_from_counts, BinaryDataset, Optimality, SlimConfig, SlimError, SlimModel};

/// Objective gap below which two values are treated as possibly tied when
/// pruning. Pruning only discards nodes whose bound exceeds the incumbent
/// by more than this.
const PRUNE_TOL: f64 = 1e-9;

struct Problem<'a> {
    cfg: &'a SlimConfig,
    n: usize,
    j: usize,
    k: usize,
    lambda_max: i32,
    /// Largest |Σ λ_j x_j| reachable under the cardinality cap.
    m: i64,
    pats: Vec<Vec<u8>>,
    pos: Vec<u64>,
    neg: Vec<u64>,
    /// Patterns with a 1 in each column.
    cols: Vec<Vec<usize>>,
}

impl<'a> Problem<'a> {
    fn new(d: &BinaryDataset, cfg: &'a SlimConfig) -> Result<Self, SlimError> {
        cfg.validate(d.j())?;
        if !d.has_both_classes() {
            return Err(SlimError::SingleClass);
        }
        let mut index: HashMap<&[u8], usize> = HashMap::new();
        let (mut pats, mut pos, mut neg) = (Vec::new(), Vec::new(), Vec::new());
        for (row, &y) in d.rows().iter().zip(d.labels()) {
            let p = *index.entry(row.as_slice()).or_insert_with(|| {
                pats.push(row.clone());
                pos.push(0);
                neg.push(0);
                pats.len() - 1
            });
            if y == 1 {
                pos[p] += 1;
            } else {
                neg[p] += 1;
            }
        }
        let j = d.j();
        let cols = (0..j).map(|c| (0..pats.len()).filter(|&p| pats[p][c] != 0).collect()).collect();
        let k = cfg.max_features.min(j);
        Ok(Self {
            cfg,
            n: d.n(),
            j,
            k,
            lambda_max: cfg.coeff_bound,
            m: k as i64 * cfg.coeff_bound as i64,
            pats,
            pos,
            neg,
            cols,
        })
    }
}

/// Search order: descending single-feature separation max(AUC, 1 − AUC),
/// column index breaking ties.
pub fn feature_order(d: &BinaryDataset) -> Vec<usize> {
    let n_pos = d.labels().iter().filter(|&&y| y == 1).count() as f64;
    let n_neg = d.n() as f64 - n_pos;
    let sep: Vec<f64> = (0..d.j())
        .map(|c| {
            let (mut p1, mut n1) = (0.0, 0.0);
            for (row, &y) in d.rows().iter().zip(d.labels()) {
                if row[c] != 0 {
                    if y == 1 {
                        p1 += 1.0;
                    } else {
                        n1 += 1.0;
                    }
                }
            }
            let (p0, n0) = (n_pos - p1, n_neg - n1);
            let denom = n_pos * n_neg;
            if denom == 0.0 {
                return 0.5;
            }
            let a = (p1 * n0 + 0.5 * (p1 * n1 + p0 * n0)) / denom;
            a.max(1.0 - a)
        })
        .collect();
    let mut order: Vec<usize> = (0..d.j()).collect();
    order.sort_by(|&a, &b| sep[b].total_cmp(&sep[a]).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone)]
struct Candidate {
    obj: f64,
    lambda: Vec<i32>,
    intercept: i32,
    nnz: usize,
    sum_abs: i64,
}

impl Candidate {
    /// Objective, then fewer nonzeros, smaller Σ|λ_j|, smaller |λ0|, then
    /// lexicographic (λ_1..λ_J, λ0).
    fn better_than(&self, o: &Candidate) -> bool {
        self.obj
            .total_cmp(&o.obj)
            .then(self.nnz.cmp(&o.nnz))
            .then(self.sum_abs.cmp(&o.sum_abs))
            .then(self.intercept.abs().cmp(&o.intercept.abs()))
            .then_with(|| self.lambda.cmp(&o.lambda))
            .then(self.intercept.cmp(&o.intercept))
            .is_lt()
    }
}

/// Score histograms over `[-m, m]`.
struct Hist {
    m: i64,
    pos: Vec<u64>,
    neg: Vec<u64>,
    total_pos: u64,
    total_neg: u64,
}

impl Hist {
    fn new(m: i64) -> Self {
        let w = (2 * m + 1) as usize;
        Self { m, pos: vec![0; w], neg: vec![0; w], total_pos: 0, total_neg: 0 }
    }

    fn from_scores(pr: &Problem<'_>, scores: &[i64]) -> Self {
        let mut h = Hist::new(pr.m);
        for (p, &s) in scores.iter().enumerate() {
            h.add(s, pr.pos[p], pr.neg[p]);
        }
        h
    }

    fn add(&mut self, s: i64, pos: u64, neg: u64) {
        let i = (s + self.m) as usize;
        self.pos[i] += pos;
        self.neg[i] += neg;
        self.total_pos += pos;
        self.total_neg += neg;
    }

    fn remove(&mut self, s: i64, pos: u64, neg: u64) {
        let i = (s + self.m) as usize;
        self.pos[i] -= pos;
        self.neg[i] -= neg;
        self.total_pos -= pos;
        self.total_neg -= neg;
    }

    /// Best intercept for fixed coefficients: minimal objective, then
    /// smallest |λ0|, then smallest λ0. Returns (objective, λ0).
    ///
    /// With t = −λ0 the model predicts +1 iff s > t, so predictions only
    /// change when t crosses an occupied score. Each interval between
    /// occupied scores is one behavior; within it the t closest to zero
    /// (inside the intercept bound) is the best representative.
    fn best_intercept(&self, n: usize, nnz: usize, su: f64, cfg: &SlimConfig) -> (f64, i32) {
        let b = cfg.intercept_bound as i64;
        let mut best: Option<(f64, i32)> = None;
        let mut consider = |lo: i64, hi: i64, fneg: u64, fpos: u64| {
            let (lo, hi) = (lo.max(-b), hi.min(b));
            if lo > hi {
                return;
            }
            let t = 0i64.clamp(lo, hi);
            let l0 = (-t) as i32;
            let obj = objective_from_counts(fneg, fpos, n, nnz, su, cfg);
            let better = match best {
                None => true,
                Some((bo, bl)) => obj.total_cmp(&bo).then(l0.abs().cmp(&bl.abs())).then(l0.cmp(&bl)).is_lt(),
            };
            if better {
                best = Some((obj, l0));
            }
        };
        let (mut fneg, mut fpos) = (0u64, self.total_neg);
        let mut lo = i64::MIN / 4;
        for (i, (&p, &q)) in self.pos.iter().zip(&self.neg).enumerate() {
            if p == 0 && q == 0 {
                continue;
            }
            let s = i as i64 - self.m;
            consider(lo, s - 1, fneg, fpos);
            fneg += p;
            fpos -= q;
            lo = s;
        }
        consider(lo, i64::MAX / 4, fneg, fpos);
        best.expect("the intervals cover every threshold")
    }
}

fn penalty(pr: &Problem<'_>, lambda: &[i32]) -> (usize, f64, i64) {
    let mut nnz = 0;
    let mut su = 0.0;
    let mut sa = 0i64;
    for (j, &l) in lambda.iter().enumerate() {
        if l != 0 {
            nnz += 1;
            su += pr.cfg.u[j];
            sa += l.abs() as i64;
        }
    }
    (nnz, su, sa)
}

fn leaf(pr: &Problem<'_>, lambda: &[i32], scores: &[i64]) -> Candidate {
    let (nnz, su, sa) = penalty(pr, lambda);
    let (obj, intercept) = Hist::from_scores(pr, scores).best_intercept(pr.n, nnz, su, pr.cfg);
    Candidate { obj, lambda: lambda.to_vec(), intercept, nnz, sum_abs: sa }
}

/// Coordinate descent over single-coefficient changes, re-optimizing the
/// intercept after each trial move.
fn local_search(pr: &Problem<'_>, order: &[usize]) -> Candidate {
    let mut lambda = vec![0i32; pr.j];
    let mut scores = vec![0i64; pr.pats.len()];
    let mut hist = Hist::from_scores(pr, &scores);
    let mut current = leaf(pr, &lambda, &scores);
    for _ in 0..200 {
        let (nnz, su, sa) = penalty(pr, &lambda);
        let mut best_move: Option<(f64, usize, i64, usize, i32)> = None;
        for &c in order {
            let old = lambda[c];
            for v in -pr.lambda_max..=pr.lambda_max {
                if v == old {
                    continue;
                }
                let new_nnz = nnz - usize::from(old != 0) + usize::from(v != 0);
                if new_nnz > pr.k {
                    continue;
                }
                let delta = (v - old) as i64;
                for &p in &pr.cols[c] {
                    hist.remove(scores[p], pr.pos[p], pr.neg[p]);
                    hist.add(scores[p] + delta, pr.pos[p], pr.neg[p]);
                }
                let new_su = su - if old != 0 { pr.cfg.u[c] } else { 0.0 } + if v != 0 { pr.cfg.u[c] } else { 0.0 };
                let (obj, _) = hist.best_intercept(pr.n, new_nnz, new_su, pr.cfg);
                for &p in &pr.cols[c] {
                    hist.remove(scores[p] + delta, pr.pos[p], pr.neg[p]);
                    hist.add(scores[p], pr.pos[p], pr.neg[p]);
                }
                let new_sa = sa - old.abs() as i64 + v.abs() as i64;
                let better = match best_move {
                    None => true,
                    Some((bo, bn, bs, _, _)) => {
                        obj.total_cmp(&bo).then(new_nnz.cmp(&bn)).then(new_sa.cmp(&bs)).is_lt()
                    }
                };
                if better {
                    best_move = Some((obj, new_nnz, new_sa, c, v));
                }
            }
        }
        match best_move {
            Some((obj, _, _, c, v)) if obj < current.obj => {
                let delta = (v - lambda[c]) as i64;
                for &p in &pr.cols[c] {
                    hist.remove(scores[p], pr.pos[p], pr.neg[p]);
                    scores[p] += delta;
                    hist.add(scores[p], pr.pos[p], pr.neg[p]);
                }
                lambda[c] = v;
                current = leaf(pr, &lambda, &scores);
            }
            _ => break,
        }
    }
    current
}

struct Search<'a, 'b> {
    pr: &'b Problem<'a>,
    order: Vec<usize>,
    /// `groups[d][p]`: id of pattern `p` among patterns agreeing on the
    /// features `order[d..]`.
    groups: Vec<Vec<u32>>,
    best: Candidate,
    nodes: u64,
    node_budget: Option<u64>,
    deadline: Option<Instant>,
    exhausted: bool,
    buf: Vec<(u32, i64, usize)>,
}

impl Search<'_, '_> {
    fn out_of_budget(&mut self) -> bool {
        if self.exhausted {
            return true;
        }
        if self.node_budget.is_some_and(|b| self.nodes >= b) {
            self.exhausted = true;
        } else if self.nodes % 64 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.exhausted = true;
        }
        self.exhausted
    }

    /// Lower bound on the objective of any completion of the node at
    /// `depth` with partial `scores` and the given committed penalty.
    fn bound(&mut self, depth: usize, scores: &[i64], nnz: usize, su: f64) -> f64 {
        self.nodes += 1;
        let pr = self.pr;
        if nnz >= pr.k {
            // No free coefficients remain: the intercept is the only shift.
            let (obj, _) = Hist::from_scores(pr, scores).best_intercept(pr.n, nnz, su, pr.cfg);
            return obj;
        }
        let g = &self.groups[depth];
        self.buf.clear();
        self.buf.extend((0..scores.len()).map(|p| (g[p], scores[p], p)));
        self.buf.sort_unstable_by_key(|&(gid, s, _)| (gid, s));
        let (cp, cm) = (pr.cfg.c_plus, pr.cfg.c_minus);
        let (mut total_fn, mut total_fp) = (0u64, 0u64);
        let mut i = 0;
        while i < self.buf.len() {
            let gid = self.buf[i].0;
            let mut end = i;
            let mut neg_total = 0u64;
            while end < self.buf.len() && self.buf[end].0 == gid {
                neg_total += pr.neg[self.buf[end].2];
                end += 1;
            }
            // Threshold below every score: all predicted positive.
            let (mut fneg, mut fpos) = (0u64, neg_total);
            let (mut best_fn, mut best_fp) = (fneg, fpos);
            let mut best_w = cm * fpos as f64;
            let mut a = i;
            while a < end {
                let s = self.buf[a].1;
                while a < end && self.buf[a].1 == s {
                    let p = self.buf[a].2;
                    fneg += pr.pos[p];
                    fpos -= pr.neg[p];
                    a += 1;
                }
                let w = cp * fneg as f64 + cm * fpos as f64;
                if w < best_w {
                    best_w = w;
                    best_fn = fneg;
                    best_fp = fpos;
                }
            }
            total_fn += best_fn;
            total_fp += best_fp;
            i = end;
        }
        objective_from_counts(total_fn, total_fp, pr.n, nnz, su, pr.cfg)
    }

    fn consider(&mut self, c: Candidate) {
        if c.better_than(&self.best) {
            self.best = c;
        }
    }

    fn dfs(&mut self, depth: usize, lambda: &mut Vec<i32>, scores: &mut Vec<i64>, nnz: usize, su: f64) {
        let pr = self.pr;
        if depth == pr.j || nnz >= pr.k {
            let c = leaf(pr, lambda, scores);
            self.consider(c);
            return;
        }
        let f = self.order[depth];
        let u = pr.cfg.u[f];
        let mut children: Vec<(f64, i32)> = Vec::with_capacity(2 * pr.lambda_max as usize + 1);
        for v in -pr.lambda_max..=pr.lambda_max {
            if self.out_of_budget() {
                return;
            }
            let (cn, cs) = if v != 0 { (nnz + 1, su + u) } else { (nnz, su) };
            for &p in &pr.cols[f] {
                scores[p] += v as i64;
            }
            let b = self.bound(depth + 1, scores, cn, cs);
            for &p in &pr.cols[f] {
                scores[p] -= v as i64;
            }
            children.push((b, v));
        }
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.abs().cmp(&b.1.abs())).then(a.1.cmp(&b.1)));
        for (b, v) in children {
            if b > self.best.obj + PRUNE_TOL {
                break;
            }
            if self.out_of_budget() {
                return;
            }
            let (cn, cs) = if v != 0 { (nnz + 1, su + u) } else { (nnz, su) };
            lambda[f] = v;
            for &p in &pr.cols[f] {
                scores[p] += v as i64;
            }
            self.dfs(depth + 1, lambda, scores, cn, cs);
            for &p in &pr.cols[f] {
                scores[p] -= v as i64;
            }
            lambda[f] = 0;
        }
    }
}

fn suffix_groups(pr: &Problem<'_>, order: &[usize]) -> Vec<Vec<u32>> {
    let np = pr.pats.len();
    let mut groups = vec![vec![0u32; np]; pr.j + 1];
    for d in (0..pr.j).rev() {
        let f = order[d];
        let mut ids: HashMap<(u32, u8), u32> = HashMap::new();
        for p in 0..np {
            let key = (groups[d + 1][p], pr.pats[p][f]);
            let next = ids.len() as u32;
            groups[d][p] = *ids.entry(key).or_insert(next);
        }
    }
    groups
}

fn to_model(d: &BinaryDataset, cfg: &SlimConfig, c: Candidate, opt: Optimality) -> SlimModel {
    SlimModel {
        names: d.names().to_vec(),
        coefficients: c.lambda,
        intercept: c.intercept,
        label: None,
        objective: Some(c.obj),
        optimality: Some(opt),
        config: Some(cfg.clone()),
    }
}

/// Trains a SLIM model. The result is proven optimal unless a node or time
/// budget stops the search first.
pub fn train(d: &BinaryDataset, cfg: &SlimConfig) -> Result<SlimModel, SlimError> {
    let pr = Problem::new(d, cfg)?;
    let order = feature_order(d);
    let incumbent = local_search(&pr, &order);
    let groups = suffix_groups(&pr, &order);
    let mut s = Search {
        pr: &pr,
        order,
        groups,
        best: incumbent,
        nodes: 0,
        node_budget: cfg.node_budget,
        deadline: cfg.time_budget_ms.map(|ms| Instant::now() + Duration::from_millis(ms)),
        exhausted: false,
        buf: Vec::new(),
    };
    let root_bound = s.bound(0, &vec![0; pr.pats.len()], 0, 0.0);
    if root_bound <= s.best.obj + PRUNE_TOL {
        let mut lambda = vec![0; pr.j];
        let mut scores = vec![0; pr.pats.len()];
        s.dfs(0, &mut lambda, &mut scores, 0, 0.0);
    }
    let opt = if s.exhausted { Optimality::BudgetBest } else { Optimality::ProvenOptimal };
    Ok(to_model(d, cfg, s.best, opt))
}

/// Largest instance brute_force_train accepts, in assignments.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// Exhaustive scan over every coefficient vector and every intercept.
/// Ties go to fewer nonzeros, then smaller Σ|λ_j|, smaller |λ0|, then
/// lexicographic (λ, λ0).
pub fn brute_force_train(d: &BinaryDataset, cfg: &SlimConfig) -> Result<SlimModel, SlimError> {
    cfg.validate(d.j())?;
    if !d.has_both_classes() {
        return Err(SlimError::SingleClass);
    }
    let lam = cfg.coeff_bound;
    let size = ((2 * lam + 1) as f64).powi(d.j() as i32) * (2 * cfg.intercept_bound + 1) as f64;
    if size > BRUTE_FORCE_LIMIT {
        return Err(SlimError::TooLarge(size));
    }
    let j = d.j();
    let m = j as i64 * lam as i64;
    let mut lambda = vec![-lam; j];
    let mut best: Option<Candidate> = None;
    let width = (2 * m + 1) as usize;
    loop {
        let nnz = lambda.iter().filter(|&&l| l != 0).count();
        if nnz <= cfg.max_features {
            let su: f64 = lambda.iter().zip(&cfg.u).filter(|(&l, _)| l != 0).map(|(_, &u)| u).sum();
            let sa: i64 = lambda.iter().map(|&l| l.abs() as i64).sum();
            // Cumulative counts of scores ≤ t, for t in [−m, m].
            let mut pos_le = vec![0u64; width];
            let mut neg_le = vec![0u64; width];
            for (row, &y) in d.rows().iter().zip(d.labels()) {
                let s: i64 = lambda.iter().zip(row).map(|(&l, &x)| if x != 0 { l as i64 } else { 0 }).sum();
                let i = (s + m) as usize;
                if y == 1 {
                    pos_le[i] += 1;
                } else {
                    neg_le[i] += 1;
                }
            }
            for i in 1..width {
                pos_le[i] += pos_le[i - 1];
                neg_le[i] += neg_le[i - 1];
            }
            let total_neg = neg_le[width - 1];
            for l0 in -cfg.intercept_bound..=cfg.intercept_bound {
                let t = -(l0 as i64);
                let (fneg, nle) = if t < -m {
                    (0, 0)
                } else {
                    let i = (t.min(m) + m) as usize;
                    (pos_le[i], neg_le[i])
                };
                let obj = objective_from_counts(fneg, total_neg - nle, d.n(), nnz, su, cfg);
                let c = Candidate { obj, lambda: lambda.clone(), intercept: l0, nnz, sum_abs: sa };
                if best.as_ref().is_none_or(|b| c.better_than(b)) {
                    best = Some(c);
                }
            }
        }
        // Odometer increment.
        let mut i = j;
        loop {
            if i == 0 {
                let b = best.expect("at least the zero model is feasible");
                return Ok(to_model(d, cfg, b, Optimality::ProvenOptimal));
            }
            i -= 1;
            if lambda[i] < lam {
                lambda[i] += 1;
                break;
            }
            lambda[i] = -lam;
        }
    }
}
