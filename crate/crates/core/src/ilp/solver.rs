//! Exact depth-first branch-and-bound over region assignments.
//!
//! Every ground-truth label has at least one partner and, by the coverage
//! constraint, so does every proposal label. Writing `M` for the set of
//! co-occurring label pairs, this gives
//!
//! ```text
//! splits = |M| - |K_x|,   merges = |M| - |K_y|,
//! objective = (alpha + beta) |M| - alpha |K_x| - beta |K_y|
//! ```
//!
//! so the search minimizes the integer `|M|`. Regions only interact through
//! shared labels, which splits the problem into independent components.
//!
//! Search order is fixed: free regions by descending size, then region index;
//! values with the region's original label first, then ascending label. The
//! returned assignment is the first optimum in that lexicographic order.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{SolveStats, TedModel, TedSolution};
use crate::error::{Result, TedError};
use crate::volume::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverLimits {
    /// Total search nodes over all components.
    pub max_nodes: u64,
    pub max_seconds: Option<f64>,
}

impl Default for SolverLimits {
    fn default() -> Self {
        Self { max_nodes: 10_000_000, max_seconds: None }
    }
}

/// One connected group of regions with labels renumbered locally.
struct SubProblem {
    /// Global region index per local region.
    regions: Vec<usize>,
    gt: Vec<usize>,
    /// Local proposal indices, ascending.
    cands: Vec<Vec<usize>>,
    identity: Vec<usize>,
    sizes: Vec<usize>,
    /// Global proposal index per local proposal index.
    prop_global: Vec<usize>,
    n_gt: usize,
    n_prop: usize,
}

impl SubProblem {
    fn new(model: &TedModel, regions: Vec<usize>) -> Self {
        let gt_index = |k: Label| model.gt_labels.binary_search(&k).unwrap();
        let prop_index = |l: Label| model.prop_labels.binary_search(&l).unwrap();
        let mut gt_local = std::collections::BTreeMap::new();
        let mut prop_local = std::collections::BTreeMap::new();
        for &r in &regions {
            let reg = &model.regions[r];
            gt_local.entry(gt_index(reg.gt_label)).or_insert(0);
            for &c in &reg.candidates {
                prop_local.entry(prop_index(c)).or_insert(0);
            }
        }
        for (i, v) in gt_local.values_mut().enumerate() {
            *v = i;
        }
        for (i, v) in prop_local.values_mut().enumerate() {
            *v = i;
        }
        let reg = |r: usize| &model.regions[r];
        Self {
            gt: regions.iter().map(|&r| gt_local[&gt_index(reg(r).gt_label)]).collect(),
            cands: regions
                .iter()
                .map(|&r| reg(r).candidates.iter().map(|&c| prop_local[&prop_index(c)]).collect())
                .collect(),
            identity: regions.iter().map(|&r| prop_local[&prop_index(reg(r).prop_label)]).collect(),
            sizes: regions.iter().map(|&r| reg(r).size()).collect(),
            prop_global: prop_local.keys().copied().collect(),
            n_gt: gt_local.len(),
            n_prop: prop_local.len(),
            regions,
        }
    }

    fn whole(model: &TedModel) -> Self {
        Self::new(model, (0..model.regions.len()).collect())
    }

    /// Original label first, then the rest ascending.
    fn value_order(&self, r: usize) -> Vec<usize> {
        let id = self.identity[r];
        std::iter::once(id).chain(self.cands[r].iter().copied().filter(|&c| c != id)).collect()
    }

    fn objective_lb(&self, matches_lb: usize, alpha: f64, beta: f64) -> f64 {
        (alpha + beta) * matches_lb as f64 - alpha * self.n_gt as f64 - beta * self.n_prop as f64
    }
}

/// Incremental bookkeeping for a partial assignment.
struct State<'a> {
    p: &'a SubProblem,
    assign: Vec<Option<usize>>,
    pair: Vec<u32>,
    matches: usize,
    cover: Vec<u32>,
    avail: Vec<u32>,
    uncovered: usize,
    /// Proposal labels that are uncovered with no undecided region left to cover them.
    dead: usize,
    by_gt: Vec<Vec<usize>>,
    stamp: Vec<u32>,
    stamp_gen: u32,
    scratch: Vec<usize>,
}

impl<'a> State<'a> {
    fn new(p: &'a SubProblem) -> Self {
        let mut avail = vec![0u32; p.n_prop];
        for cs in &p.cands {
            for &c in cs {
                avail[c] += 1;
            }
        }
        let mut by_gt = vec![Vec::new(); p.n_gt];
        for (r, &g) in p.gt.iter().enumerate() {
            by_gt[g].push(r);
        }
        let dead = avail.iter().filter(|&&a| a == 0).count();
        Self {
            p,
            assign: vec![None; p.regions.len()],
            pair: vec![0; p.n_gt * p.n_prop],
            matches: 0,
            cover: vec![0; p.n_prop],
            avail,
            uncovered: p.n_prop,
            dead,
            by_gt,
            stamp: vec![0; p.n_prop],
            stamp_gen: 0,
            scratch: Vec::new(),
        }
    }

    fn assign(&mut self, r: usize, l: usize) {
        debug_assert!(self.assign[r].is_none());
        self.assign[r] = Some(l);
        self.cover[l] += 1;
        if self.cover[l] == 1 {
            self.uncovered -= 1;
        }
        for &c in &self.p.cands[r] {
            self.avail[c] -= 1;
            if self.avail[c] == 0 && self.cover[c] == 0 {
                self.dead += 1;
            }
        }
        let slot = &mut self.pair[self.p.gt[r] * self.p.n_prop + l];
        *slot += 1;
        if *slot == 1 {
            self.matches += 1;
        }
    }

    fn unassign(&mut self, r: usize) {
        let l = self.assign[r].take().expect("region is assigned");
        let slot = &mut self.pair[self.p.gt[r] * self.p.n_prop + l];
        *slot -= 1;
        if *slot == 0 {
            self.matches -= 1;
        }
        for &c in &self.p.cands[r] {
            if self.avail[c] == 0 && self.cover[c] == 0 {
                self.dead -= 1;
            }
            self.avail[c] += 1;
        }
        self.cover[l] -= 1;
        if self.cover[l] == 0 {
            self.uncovered += 1;
        }
    }

    fn has_pair(&self, g: usize, l: usize) -> bool {
        self.pair[g * self.p.n_prop + l] > 0
    }

    /// Lower bound on `|M|` over all completions.
    ///
    /// New pairs are needed (a) once per uncovered proposal label and (b) for
    /// each ground-truth label, at least as many as there are pairwise
    /// disjoint candidate sets among its undecided regions that cannot reuse
    /// an existing pair. Each bound counts distinct pairs, so their maximum
    /// is admissible.
    fn bound(&mut self) -> usize {
        let mut hitting = 0;
        for g in 0..self.p.n_gt {
            self.scratch.clear();
            for &r in &self.by_gt[g] {
                if self.assign[r].is_none() && !self.p.cands[r].iter().any(|&c| self.has_pair(g, c)) {
                    self.scratch.push(r);
                }
            }
            if self.scratch.is_empty() {
                continue;
            }
            let cands = &self.p.cands;
            self.scratch.sort_by_key(|&r| cands[r].len());
            self.stamp_gen = self.stamp_gen.wrapping_add(1);
            if self.stamp_gen == 0 {
                self.stamp.fill(0);
                self.stamp_gen = 1;
            }
            for &r in &self.scratch {
                if cands[r].iter().all(|&c| self.stamp[c] != self.stamp_gen) {
                    hitting += 1;
                    for &c in &cands[r] {
                        self.stamp[c] = self.stamp_gen;
                    }
                }
            }
        }
        self.matches + hitting.max(self.uncovered)
    }
}

struct Budget {
    nodes: u64,
    max_nodes: u64,
    deadline: Option<Instant>,
    exhausted: bool,
}

impl Budget {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes >= self.max_nodes {
            self.exhausted = true;
        } else if self.nodes.is_multiple_of(256) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.exhausted = true;
                }
            }
        }
        !self.exhausted
    }
}

struct ComponentResult {
    assignment: Vec<usize>,
    optimal: bool,
    matches_lb: usize,
}

fn count_matches(p: &SubProblem, assignment: &[usize]) -> usize {
    let mut seen = std::collections::HashSet::new();
    for (r, &l) in assignment.iter().enumerate() {
        seen.insert((p.gt[r], l));
    }
    seen.len()
}

/// Greedy per-label cover followed by a coverage repair; `None` if the
/// repair gets stuck.
fn greedy_incumbent(p: &SubProblem, order: &[usize]) -> Option<Vec<usize>> {
    let n = p.regions.len();
    let mut assignment: Vec<Option<usize>> = (0..n).map(|r| (p.cands[r].len() == 1).then(|| p.cands[r][0])).collect();
    let mut by_gt = vec![Vec::new(); p.n_gt];
    for &r in order {
        by_gt[p.gt[r]].push(r);
    }
    for (g, members) in by_gt.iter().enumerate() {
        let mut chosen: Vec<usize> = (0..n).filter(|&r| p.gt[r] == g).filter_map(|r| assignment[r]).collect();
        loop {
            let open: Vec<usize> =
                members.iter().copied().filter(|&r| !p.cands[r].iter().any(|c| chosen.contains(c))).collect();
            if open.is_empty() {
                break;
            }
            let mut hits = vec![0usize; p.n_prop];
            for &r in &open {
                for &c in &p.cands[r] {
                    hits[c] += 1;
                }
            }
            let best = (0..p.n_prop).max_by_key(|&c| (hits[c], std::cmp::Reverse(c))).unwrap();
            chosen.push(best);
        }
        for &r in members {
            assignment[r] = p.value_order(r).into_iter().find(|c| chosen.contains(c));
        }
    }
    let mut assignment: Vec<usize> = assignment.into_iter().collect::<Option<_>>()?;
    let mut cover = vec![0u32; p.n_prop];
    for &l in &assignment {
        cover[l] += 1;
    }
    for l in 0..p.n_prop {
        if cover[l] > 0 {
            continue;
        }
        let r = *order.iter().find(|&&r| p.cands[r].contains(&l) && cover[assignment[r]] >= 2)?;
        cover[assignment[r]] -= 1;
        assignment[r] = l;
        cover[l] += 1;
    }
    Some(assignment)
}

fn solve_component(p: &SubProblem, budget: &mut Budget) -> ComponentResult {
    let n = p.regions.len();
    let mut order: Vec<usize> = (0..n).filter(|&r| p.cands[r].len() > 1).collect();
    order.sort_by(|&a, &b| p.sizes[b].cmp(&p.sizes[a]).then(p.regions[a].cmp(&p.regions[b])));
    let values: Vec<Vec<usize>> = (0..n).map(|r| p.value_order(r)).collect();

    let mut state = State::new(p);
    for r in 0..n {
        if p.cands[r].len() == 1 {
            state.assign(r, p.cands[r][0]);
        }
    }
    let root_lb = state.bound();

    let identity = p.identity.clone();
    let mut best = identity.clone();
    let mut best_m = count_matches(p, &identity);
    let mut best_from_search = true;
    if let Some(g) = greedy_incumbent(p, &order) {
        let m = count_matches(p, &g);
        if m < best_m {
            best = g;
            best_m = m;
            best_from_search = false;
        }
    }
    let finished = |best_m: usize, from_search: bool| root_lb == best_m && from_search;
    if order.is_empty() || finished(best_m, best_from_search) {
        return ComponentResult { assignment: best, optimal: true, matches_lb: best_m };
    }

    let depth_max = order.len();
    let mut choice = vec![usize::MAX; depth_max];
    let mut depth = 0usize;
    let mut aborted = false;
    loop {
        if depth == depth_max {
            // every accepted leaf improves on the incumbent
            best = state.assign.iter().map(|a| a.unwrap()).collect();
            best_m = state.matches;
            best_from_search = true;
            depth -= 1;
            continue;
        }
        let r = order[depth];
        let next = if choice[depth] == usize::MAX {
            0
        } else {
            state.unassign(r);
            choice[depth] + 1
        };
        if next >= values[r].len() {
            choice[depth] = usize::MAX;
            if depth == 0 {
                break;
            }
            depth -= 1;
            continue;
        }
        choice[depth] = next;
        state.assign(r, values[r][next]);
        if !budget.tick() {
            aborted = true;
            break;
        }
        if state.dead > 0 {
            continue;
        }
        let lb = state.bound();
        if lb > best_m || (lb == best_m && best_from_search) {
            continue;
        }
        depth += 1;
    }
    if aborted {
        ComponentResult { assignment: best, optimal: false, matches_lb: root_lb }
    } else {
        ComponentResult { assignment: best, optimal: true, matches_lb: best_m }
    }
}

/// Connected components of the region/label incidence graph.
fn components(model: &TedModel) -> Vec<Vec<usize>> {
    let n_gt = model.gt_labels.len();
    let mut parent: Vec<usize> = (0..n_gt + model.prop_labels.len()).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for reg in &model.regions {
        let g = model.gt_labels.binary_search(&reg.gt_label).unwrap();
        for &c in &reg.candidates {
            let l = n_gt + model.prop_labels.binary_search(&c).unwrap();
            let (a, b) = (find(&mut parent, g), find(&mut parent, l));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for (r, reg) in model.regions.iter().enumerate() {
        let g = model.gt_labels.binary_search(&reg.gt_label).unwrap();
        groups.entry(find(&mut parent, g)).or_default().push(r);
    }
    groups.into_values().collect()
}

/// Minimizes `alpha * splits + beta * merges` over all admissible
/// assignments that use every proposal label.
///
/// If a limit is hit the best assignment found so far is returned with
/// `optimal = false` and a gap against a proven lower bound.
pub fn solve_exact(model: &TedModel, limits: &SolverLimits) -> Result<TedSolution> {
    let start = Instant::now();
    if let Some(s) = limits.max_seconds {
        if s.is_nan() || s < 0.0 {
            return Err(TedError::InvalidParameter(format!("max_seconds must be non-negative, got {s}")));
        }
    }
    let mut budget = Budget {
        nodes: 0,
        max_nodes: limits.max_nodes.max(1),
        deadline: limits.max_seconds.map(|s| start + Duration::from_secs_f64(s)),
        exhausted: false,
    };

    let weightless = model.alpha + model.beta == 0.0;
    let comps = if weightless { Vec::new() } else { components(model) };
    let mut assignment = model.identity_assignment();
    let mut optimal = true;
    let mut lb_objective = 0.0;
    for regions in &comps {
        let p = SubProblem::new(model, regions.clone());
        let res = if budget.exhausted {
            // out of budget: keep the identity, bound from the root
            let mut state = State::new(&p);
            for r in 0..p.regions.len() {
                if p.cands[r].len() == 1 {
                    state.assign(r, p.cands[r][0]);
                }
            }
            ComponentResult { assignment: p.identity.clone(), optimal: false, matches_lb: state.bound() }
        } else {
            solve_component(&p, &mut budget)
        };
        optimal &= res.optimal;
        lb_objective += p.objective_lb(res.matches_lb, model.alpha, model.beta);
        for (local, &l) in res.assignment.iter().enumerate() {
            assignment[p.regions[local]] = model.prop_labels[p.prop_global[l]];
        }
    }

    let mut sol = TedSolution::from_assignment(model, assignment)?;
    sol.optimal = optimal;
    sol.gap = if optimal { 0.0 } else { (sol.objective - lb_objective.max(0.0)).max(0.0) };
    sol.stats =
        SolveStats { nodes: budget.nodes, wall_seconds: start.elapsed().as_secs_f64(), components: comps.len() };
    Ok(sol)
}

/// Lower bound on the objective of any feasible completion of `partial`,
/// or `None` if the fixed part already rules out covering every label.
pub fn lower_bound(model: &TedModel, partial: &[Option<Label>]) -> Result<Option<f64>> {
    if partial.len() != model.regions.len() {
        return Err(TedError::InvalidParameter("partial assignment has the wrong length".into()));
    }
    let p = SubProblem::whole(model);
    let mut state = State::new(&p);
    for (r, fixed) in partial.iter().enumerate() {
        if let Some(l) = fixed {
            if model.regions[r].candidates.binary_search(l).is_err() {
                return Err(TedError::InvalidRegion(r, format!("label {l} is not admissible")));
            }
            let local = p.prop_global.iter().position(|&g| model.prop_labels[g] == *l).unwrap();
            state.assign(r, local);
        }
    }
    if state.dead > 0 {
        return Ok(None);
    }
    let lb = state.bound();
    Ok(Some(p.objective_lb(lb, model.alpha, model.beta).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::{brute_force_solve, brute_force_solve_with, build_model, DEFAULT_ENUMERATION_CAP};
    use crate::tolerance::CandidateRegion;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn region(k: Label, l: Label, cands: &[Label], size: usize) -> CandidateRegion {
        let mut candidates = cands.to_vec();
        candidates.sort_unstable();
        CandidateRegion { gt_label: k, prop_label: l, candidates, locations: (0..size).collect() }
    }

    /// Random model: every proposal label is some region's original label.
    fn random_model(seed: u64, alpha: f64, beta: f64) -> TedModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_regions = rng.gen_range(1..9);
        let n_gt = rng.gen_range(1..4u32);
        let n_prop = rng.gen_range(1..5u32);
        let mut regions = Vec::new();
        for i in 0..n_regions {
            let k = rng.gen_range(1..=n_gt);
            let l = if (i as u32) < n_prop { i as u32 + 1 } else { rng.gen_range(1..=n_prop) };
            let mut cands: Vec<Label> = (1..=n_prop).filter(|&c| c == l || rng.gen_bool(0.4)).collect();
            cands.retain(|&c| c <= n_prop.min(n_regions as u32) || c == l);
            regions.push(region(k, l, &cands, rng.gen_range(1..5)));
        }
        let props: std::collections::BTreeSet<Label> = regions.iter().map(|r| r.prop_label).collect();
        for r in &mut regions {
            r.candidates.retain(|c| props.contains(c));
        }
        build_model(regions, alpha, beta).unwrap()
    }

    fn lex_first_optimum(model: &TedModel) -> Vec<Label> {
        let n = model.regions().len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| model.regions()[b].size().cmp(&model.regions()[a].size()).then(a.cmp(&b)));
        let values: Vec<Vec<Label>> = model
            .regions()
            .iter()
            .map(|r| {
                std::iter::once(r.prop_label)
                    .chain(r.candidates.iter().copied().filter(|&c| c != r.prop_label))
                    .collect()
            })
            .collect();
        let mut digits = vec![0usize; n];
        let mut best: Option<(u64, Vec<Label>)> = None;
        'outer: loop {
            let mut a = vec![0; n];
            for (pos, &r) in order.iter().enumerate() {
                a[r] = values[r][digits[pos]];
            }
            if let Ok(s) = TedSolution::from_assignment(model, a.clone()) {
                let cost = s.splits + s.merges;
                if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                    best = Some((cost, a));
                }
            }
            let mut pos = n;
            loop {
                if pos == 0 {
                    break 'outer;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < values[order[pos]].len() {
                    break;
                }
                digits[pos] = 0;
            }
        }
        best.unwrap().1
    }

    #[test]
    fn identity_when_nothing_to_fix() {
        let m = build_model(vec![region(1, 1, &[1, 2], 3), region(2, 2, &[1, 2], 3)], 1.0, 1.0).unwrap();
        let s = solve_exact(&m, &SolverLimits::default()).unwrap();
        assert_eq!((s.objective, s.optimal, s.gap), (0.0, true, 0.0));
        assert_eq!(s.assignment, vec![1, 2]);
    }

    #[test]
    fn absorbed_shift() {
        // gt 2 begins inside proposal 1 within tolerance
        let m = build_model(vec![region(1, 1, &[1], 10), region(2, 1, &[1, 2], 2), region(2, 2, &[2], 10)], 1.0, 1.0)
            .unwrap();
        let s = solve_exact(&m, &SolverLimits::default()).unwrap();
        assert_eq!(s.objective, 0.0);
        assert_eq!(s.assignment, vec![1, 2, 2]);
    }

    #[test]
    fn weightless_returns_identity() {
        let m = build_model(vec![region(1, 1, &[1, 2], 1), region(1, 2, &[1, 2], 1)], 0.0, 0.0).unwrap();
        let s = solve_exact(&m, &SolverLimits::default()).unwrap();
        assert_eq!(s.assignment, vec![1, 2]);
        assert!(s.optimal);
    }

    #[test]
    fn node_limit_reports_incumbent_and_gap() {
        // many independent-looking choices inside one component
        let mut regions = Vec::new();
        for k in 1..=6u32 {
            regions.push(region(k, k, &[k], 20));
            for j in 0..3 {
                let other = (k % 6) + 1;
                regions.push(region(k, other, &[k, other], 1 + j));
            }
        }
        regions.sort_by(|a, b| {
            (a.gt_label, a.prop_label, &a.candidates, a.size()).cmp(&(
                b.gt_label,
                b.prop_label,
                &b.candidates,
                b.size(),
            ))
        });
        let m = build_model(regions, 1.0, 1.0).unwrap();
        let full = solve_exact(&m, &SolverLimits::default()).unwrap();
        assert!(full.optimal);
        let cut = solve_exact(&m, &SolverLimits { max_nodes: 1, max_seconds: None }).unwrap();
        assert!(!cut.optimal);
        assert!(cut.objective >= full.objective);
        assert!(cut.gap >= 0.0);
        assert!(cut.objective - cut.gap <= full.objective + 1e-9);
    }

    #[test]
    fn matches_oracle_on_random_models() {
        for seed in 0..300 {
            let m = random_model(seed, 1.0, 1.0);
            let exact = solve_exact(&m, &SolverLimits::default()).unwrap();
            let brute = brute_force_solve(&m).unwrap();
            assert_eq!(exact.objective, brute.objective, "seed {seed}");
            assert!(exact.optimal);
            assert_eq!(exact.assignment, lex_first_optimum(&m), "seed {seed}");
        }
    }

    #[test]
    fn weighted_objectives_match_oracle() {
        for seed in 0..100 {
            let m = random_model(seed, 0.5 + (seed % 3) as f64, 2.0 - (seed % 2) as f64 * 2.0);
            let exact = solve_exact(&m, &SolverLimits::default()).unwrap();
            assert_eq!(exact.objective, brute_force_solve(&m).unwrap().objective, "seed {seed}");
        }
    }

    #[test]
    fn bound_is_admissible_on_partials() {
        for seed in 0..150 {
            let m = random_model(seed, 1.0, 2.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
            for _ in 0..5 {
                let partial: Vec<Option<Label>> = m
                    .regions()
                    .iter()
                    .map(|r| rng.gen_bool(0.5).then(|| r.candidates[rng.gen_range(0..r.candidates.len())]))
                    .collect();
                let best = brute_force_solve_with(&m, &partial, DEFAULT_ENUMERATION_CAP).unwrap();
                let lb = lower_bound(&m, &partial).unwrap();
                match (lb, best) {
                    (Some(lb), Some(best)) => {
                        assert!(lb <= best.objective + 1e-9, "seed {seed}: {lb} > {}", best.objective)
                    }
                    (None, Some(best)) => panic!("seed {seed}: pruned a feasible node with optimum {}", best.objective),
                    (_, None) => {}
                }
            }
        }
    }

    proptest! {
        #[test]
        fn weight_scaling(seed in 0u64..10_000, c in 0.1f64..10.0) {
            let m = random_model(seed, 1.0, 2.0);
            let scaled = build_model(m.regions().to_vec(), c, 2.0 * c).unwrap();
            let a = solve_exact(&m, &SolverLimits::default()).unwrap();
            let b = solve_exact(&scaled, &SolverLimits::default()).unwrap();
            prop_assert!((b.objective - c * a.objective).abs() <= 1e-9 * (1.0 + b.objective.abs()));
            prop_assert_eq!((a.splits, a.merges), (b.splits, b.merges));
        }

        #[test]
        fn solution_is_self_consistent(seed in 0u64..10_000) {
            let m = random_model(seed, 1.0, 1.0);
            let s = solve_exact(&m, &SolverLimits::default()).unwrap();
            let again = TedSolution::from_assignment(&m, s.assignment.clone()).unwrap();
            prop_assert_eq!(&again.matches, &s.matches);
            prop_assert_eq!(&again.splits_per_gt_label, &s.splits_per_gt_label);
            prop_assert_eq!(&again.merges_per_prop_label, &s.merges_per_prop_label);
            prop_assert_eq!((again.splits, again.merges), (s.splits, s.merges));
        }
    }
}
