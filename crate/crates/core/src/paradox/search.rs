use std::collections::HashMap;

use rayon::prelude::*;

use super::{Classifier, ParadoxCertificate, ParadoxError};
use crate::group::{Element, FiniteWindow, GroupModel};

/// Piece assignment problem for one choice of translators: every window
/// element gets one label (`A_i` for `i < ta.len()`, then the `B_j`), and
/// each checkable covering instance costs one unless hit exactly once.
struct Split {
    ta: Vec<usize>,
    tb: Vec<usize>,
}

struct Instance {
    members: Vec<(usize, u8)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PieceCountResult {
    pub pieces: usize,
    /// Minimal interior defect over all certificates with at most `pieces`
    /// pieces found by the search.
    pub defect: usize,
    pub certificate: Option<ParadoxCertificate>,
    pub splits: usize,
    /// Every split up to this count was solved without truncation.
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallParadoxReport {
    pub window_size: usize,
    pub rows: Vec<PieceCountResult>,
    /// Some split hit the state budget; its defect is an upper bound.
    pub budget_exhausted: bool,
}

impl SmallParadoxReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["pieces", "defect", "splits", "exhaustive"])
            .expect("in-memory csv");
        for r in &self.rows {
            w.write_record([
                r.pieces.to_string(),
                r.defect.to_string(),
                r.splits.to_string(),
                r.exhaustive.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
    }

    pub fn row(&self, pieces: usize) -> Option<&PieceCountResult> {
        self.rows.iter().find(|r| r.pieces == pieces)
    }
}

struct SplitOutcome {
    pieces: usize,
    defect: usize,
    labels: Vec<u8>,
    truncated: bool,
}

/// Minimizes interior covering violations over all piece assignments on
/// `window`, for every split of distinct pool translators into the two
/// sides with at most `max_pieces` pieces in total. Each split is solved by
/// a dynamic program over a depth-first order of the constraint graph; at
/// most `budget` partial states are kept per step, and truncation is
/// reported rather than hidden.
pub fn search_small_paradox(
    model: &GroupModel,
    window: &FiniteWindow,
    pool: &FiniteWindow,
    max_pieces: usize,
    budget: usize,
) -> Result<SmallParadoxReport, ParadoxError> {
    if window.is_empty() || pool.is_empty() {
        return Err(ParadoxError::Precondition("window and pool must be nonempty".into()));
    }
    if budget == 0 {
        return Err(ParadoxError::Precondition("budget must be positive".into()));
    }
    // preimages[t][y] = index of t^{-1} y in the window
    let mut preimages = Vec::with_capacity(pool.len());
    for t in pool {
        let t_inv = model.inv(t)?;
        let col = window
            .iter()
            .map(|y| Ok(window.index_of(&model.mul(&t_inv, y)?)))
            .collect::<Result<Vec<_>, crate::group::GroupError>>()?;
        preimages.push(col);
    }
    let splits = enumerate_splits(pool.len(), max_pieces);
    let outcomes: Vec<SplitOutcome> = splits
        .par_iter()
        .map(|s| solve_split(s, &preimages, window.len(), budget))
        .collect();

    let mut rows = Vec::new();
    let mut best: Option<(usize, usize)> = None;
    let mut exhaustive = true;
    let mut seen = 0;
    let mut budget_exhausted = false;
    for pieces in 2..=max_pieces {
        for (i, o) in outcomes.iter().enumerate().filter(|(_, o)| o.pieces == pieces) {
            seen += 1;
            exhaustive &= !o.truncated;
            budget_exhausted |= o.truncated;
            if best.is_none_or(|(d, _)| o.defect < d) {
                best = Some((o.defect, i));
            }
        }
        let Some((defect, i)) = best else { continue };
        rows.push(PieceCountResult {
            pieces,
            defect,
            certificate: Some(certificate(&splits[i], &outcomes[i].labels, window, pool)),
            splits: seen,
            exhaustive,
        });
    }
    Ok(SmallParadoxReport {
        window_size: window.len(),
        rows,
        budget_exhausted,
    })
}

fn enumerate_splits(pool: usize, max_pieces: usize) -> Vec<Split> {
    let subsets: Vec<Vec<usize>> = (1u64..1 << pool.min(20))
        .map(|mask| (0..pool).filter(|i| mask >> i & 1 == 1).collect())
        .collect();
    let mut out = Vec::new();
    for ta in &subsets {
        for tb in &subsets {
            // the two sides play symmetric roles
            if ta.len() + tb.len() > max_pieces || (ta.len(), ta) > (tb.len(), tb) {
                continue;
            }
            out.push(Split {
                ta: ta.clone(),
                tb: tb.clone(),
            });
        }
    }
    out
}

fn instances(split: &Split, preimages: &[Vec<Option<usize>>], n: usize) -> Vec<Instance> {
    let mut out = Vec::new();
    for side in [(&split.ta, 0usize), (&split.tb, split.ta.len())] {
        let (ts, offset) = side;
        for y in 0..n {
            let members: Option<Vec<(usize, u8)>> = ts
                .iter()
                .enumerate()
                .map(|(k, &t)| preimages[t][y].map(|x| (x, (offset + k) as u8)))
                .collect();
            if let Some(members) = members {
                out.push(Instance { members });
            }
        }
    }
    out
}

fn dfs_order(n: usize, insts: &[Instance]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for inst in insts {
        for &(x, _) in &inst.members {
            for &(y, _) in &inst.members {
                if x != y {
                    adj[x].push(y);
                }
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            if seen[x] {
                continue;
            }
            seen[x] = true;
            order.push(x);
            stack.extend(adj[x].iter().rev().filter(|y| !seen[**y]));
        }
    }
    order
}

fn solve_split(split: &Split, preimages: &[Vec<Option<usize>>], n: usize, cap: usize) -> SplitOutcome {
    let insts = instances(split, preimages, n);
    let labels = (split.ta.len() + split.tb.len()) as u8;
    let order = dfs_order(n, &insts);
    let mut pos = vec![0; n];
    for (s, &x) in order.iter().enumerate() {
        pos[x] = s;
    }
    let mut resolve_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut last_use: Vec<usize> = pos.clone();
    for (k, inst) in insts.iter().enumerate() {
        let last = inst.members.iter().map(|(x, _)| pos[*x]).max().unwrap_or(0);
        resolve_at[last].push(k);
        for (x, _) in &inst.members {
            last_use[*x] = last_use[*x].max(last);
        }
    }

    // Frontier elements in assignment order, with their labels in the key.
    let mut frontier: Vec<usize> = Vec::new();
    let mut layer: Vec<(Vec<u8>, usize)> = vec![(Vec::new(), 0)];
    let mut back: Vec<Vec<(usize, u8)>> = Vec::with_capacity(n);
    let mut truncated = false;
    let mut label_of = vec![0u8; n];
    for (s, &x) in order.iter().enumerate() {
        let mut extended = frontier.clone();
        extended.push(x);
        let keep: Vec<usize> = (0..extended.len()).filter(|&i| last_use[extended[i]] > s).collect();
        let mut next: HashMap<Vec<u8>, (usize, usize, u8)> = HashMap::new();
        for (pi, (key, cost)) in layer.iter().enumerate() {
            for l in 0..labels {
                for (i, &e) in frontier.iter().enumerate() {
                    label_of[e] = key[i];
                }
                label_of[x] = l;
                let mut c = *cost;
                for &k in &resolve_at[s] {
                    let hits = insts[k]
                        .members
                        .iter()
                        .filter(|(e, want)| label_of[*e] == *want)
                        .count();
                    if hits != 1 {
                        c += 1;
                    }
                }
                let nk: Vec<u8> = keep.iter().map(|&i| if i < key.len() { key[i] } else { l }).collect();
                let cand = (c, pi, l);
                next.entry(nk)
                    .and_modify(|v| {
                        if cand < *v {
                            *v = cand;
                        }
                    })
                    .or_insert(cand);
            }
        }
        let mut entries: Vec<(Vec<u8>, (usize, usize, u8))> = next.into_iter().collect();
        entries.sort_by(|a, b| (a.1 .0, &a.0).cmp(&(b.1 .0, &b.0)));
        if entries.len() > cap {
            entries.truncate(cap);
            truncated = true;
        }
        back.push(entries.iter().map(|(_, (_, p, l))| (*p, *l)).collect());
        layer = entries.into_iter().map(|(k, (c, _, _))| (k, c)).collect();
        frontier = keep.iter().map(|&i| extended[i]).collect();
    }

    let (mut idx, defect) = layer
        .iter()
        .enumerate()
        .min_by_key(|(i, (_, c))| (*c, *i))
        .map(|(i, (_, c))| (i, *c))
        .unwrap_or((0, 0));
    let mut assigned = vec![0u8; n];
    for s in (0..order.len()).rev() {
        let (p, l) = back[s][idx];
        assigned[order[s]] = l;
        idx = p;
    }
    SplitOutcome {
        pieces: labels as usize,
        defect,
        labels: assigned,
        truncated,
    }
}

fn certificate(split: &Split, labels: &[u8], window: &FiniteWindow, pool: &FiniteWindow) -> ParadoxCertificate {
    let members = |l: usize| {
        Classifier::Member(
            window
                .iter()
                .zip(labels)
                .filter(|(_, &m)| m as usize == l)
                .map(|(x, _)| x.to_string())
                .collect(),
        )
    };
    let tr = |ts: &[usize]| ts.iter().map(|&t| pool.as_slice()[t].clone()).collect::<Vec<Element>>();
    let na = split.ta.len();
    ParadoxCertificate {
        g: tr(&split.ta),
        h: tr(&split.tb),
        a: (0..na).map(members).collect(),
        b: (0..split.tb.len()).map(|j| members(na + j)).collect(),
    }
}
