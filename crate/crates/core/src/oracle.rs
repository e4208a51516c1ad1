//! Brute-force optimal editing by enumerating plans in cost layers, plus plan
//! verification and tie detection.

use std::cell::RefCell;
use std::time::Instant;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lset::compute_lsets;
use crate::model::{ArcId, ArcKind, EditPlan, Instance, Scaled};
use crate::sim::{follows_tpath, Agent, Outcome, DEFAULT_BRANCH_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    /// Ties go to the smaller arc rank.
    #[serde(rename = "lex")]
    Lexicographic,
    /// Every tie resolution must yield a path through all critical arcs.
    Robust,
}

impl std::fmt::Display for Semantics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Semantics::Lexicographic => "lex",
            Semantics::Robust => "robust",
        })
    }
}

impl std::str::FromStr for Semantics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lex" | "lexicographic" => Ok(Semantics::Lexicographic),
            "robust" => Ok(Semantics::Robust),
            _ => Err(Error::Parse(format!("unknown semantics {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Solution {
    pub cost: usize,
    pub plan: EditPlan,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactOptions {
    /// Largest plan cost to try; `None` tries every plan.
    pub budget: Option<usize>,
    pub deadline: Option<Instant>,
}

/// Exhaustive solver for one weighted graph.
///
/// Feasibility depends only on which arcs are present, so results are cached
/// by arc mask and shared by every instance that differs only in which arcs
/// are addable (see [`Instance::same_structure`]).
pub struct ExactOracle<'a> {
    agent: Agent<'a>,
    cache: RefCell<FxHashMap<u128, [Option<bool>; 2]>>,
}

impl<'a> ExactOracle<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        ExactOracle { agent: Agent::new(instance), cache: RefCell::default() }
    }

    pub fn instance(&self) -> &'a Instance {
        self.agent.instance
    }

    pub fn feasible(&self, present: &[bool], semantics: Semantics) -> bool {
        let slot = semantics as usize;
        let key = (present.len() <= 128).then(|| {
            present.iter().enumerate().fold(0u128, |k, (i, &p)| k | (p as u128) << i)
        });
        if let Some(key) = key {
            if let Some(hit) = self.cache.borrow().get(&key).and_then(|e| e[slot]) {
                return hit;
            }
        }
        let ok = match semantics {
            Semantics::Lexicographic => self.agent.lex_feasible(present),
            Semantics::Robust => self.agent.robust_feasible(present),
        };
        if let Some(key) = key {
            self.cache.borrow_mut().entry(key).or_default()[slot] = Some(ok);
        }
        ok
    }

    /// Minimum-cost feasible plan for `variant`, which must share this
    /// oracle's weighted structure.
    ///
    /// Plans are tried by cost, and within a cost layer in lexicographic
    /// order of their arcs' positions in the list "base arcs by id, then
    /// addable arcs by id". Deleting a critical arc is never tried.
    pub fn solve(
        &self,
        variant: &Instance,
        semantics: Semantics,
        opts: &ExactOptions,
    ) -> Result<Option<Solution>> {
        if !variant.same_structure(self.instance()) {
            return Err(Error::IncompatibleVariants);
        }
        let universe: Vec<ArcId> = variant
            .base_arcs()
            .filter(|a| !variant.critical.contains(&a.id))
            .chain(variant.addable_arcs())
            .map(|a| a.id)
            .collect();
        let top = opts.budget.unwrap_or(universe.len()).min(universe.len());
        let mut present: Vec<bool> = variant.arcs.iter().map(|a| a.is_base()).collect();
        let mut counter = 0u32;
        for k in 0..=top {
            let mut combo: Vec<usize> = (0..k).collect();
            loop {
                counter = counter.wrapping_add(1);
                if counter % 1024 == 0 && opts.deadline.is_some_and(|d| Instant::now() > d) {
                    return Err(Error::Timeout);
                }
                for &i in &combo {
                    present[universe[i]] ^= true;
                }
                let ok = self.feasible(&present, semantics);
                for &i in &combo {
                    present[universe[i]] ^= true;
                }
                if ok {
                    let chosen = combo.iter().map(|&i| universe[i]);
                    let plan = EditPlan::new(
                        chosen.clone().filter(|&a| variant.arcs[a].kind == ArcKind::Base),
                        chosen.filter(|&a| variant.arcs[a].kind == ArcKind::Addable),
                    );
                    return Ok(Some(Solution { cost: k, plan }));
                }
                if !next_combination(&mut combo, universe.len()) {
                    break;
                }
            }
        }
        match opts.budget {
            Some(budget) if top < universe.len() => {
                Err(Error::BudgetExceeded { budget, infeasible_below: top + 1 })
            }
            _ => Ok(None),
        }
    }
}

/// Advances `combo` (strictly increasing indices below `n`) to the next
/// combination in lexicographic order.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive minimum-cost plan.
pub fn solve_exact(
    inst: &Instance,
    semantics: Semantics,
    opts: &ExactOptions,
) -> Result<Option<Solution>> {
    inst.ensure_valid()?;
    ExactOracle::new(inst).solve(inst, semantics, opts)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub semantics: Semantics,
    pub feasible: bool,
    pub cost: usize,
    /// The deterministic outcome, or every tie resolution under robust semantics.
    pub outcomes: Vec<Outcome>,
    /// Critical arcs missed by at least one outcome.
    pub missing: Vec<ArcId>,
}

pub fn verify_plan(
    inst: &Instance,
    plan: &EditPlan,
    semantics: Semantics,
) -> Result<VerificationReport> {
    let view = inst.apply(plan)?;
    let agent = Agent::new(inst);
    let outcomes = match semantics {
        Semantics::Lexicographic => vec![agent.simulate(&view.present)],
        Semantics::Robust => agent.outcomes(&view.present, DEFAULT_BRANCH_CAP)?,
    };
    let missing = inst
        .critical
        .iter()
        .copied()
        .filter(|c| outcomes.iter().any(|o| o.path().map_or(true, |p| !p.contains(c))))
        .collect();
    let feasible = outcomes.iter().all(|o| follows_tpath(o, &inst.critical));
    Ok(VerificationReport { semantics, feasible, cost: plan.cost(), outcomes, missing })
}

/// Largest arc count for which [`is_tie_free`] checks every view.
pub const TIE_FREE_EXHAUSTIVE_MAX_ARCS: usize = 20;

/// True when no arc subset of G+A makes the agent face a tie at a vertex it
/// visits. Above [`TIE_FREE_EXHAUSTIVE_MAX_ARCS`] arcs a sufficient check is
/// used instead: no two arcs leaving a vertex can ever have equal perceived
/// value for any path costs of their heads.
pub fn is_tie_free(inst: &Instance) -> bool {
    let m = inst.m();
    if m <= TIE_FREE_EXHAUSTIVE_MAX_ARCS {
        let agent = Agent::new(inst);
        let mut present = vec![false; m];
        for mask in 0u32..(1u32 << m) {
            for (i, p) in present.iter_mut().enumerate() {
                *p = mask >> i & 1 == 1;
            }
            if agent.has_tie(&present) {
                return false;
            }
        }
        true
    } else {
        structurally_tie_free(inst)
    }
}

/// Sufficient condition for tie-freeness over all views.
pub fn structurally_tie_free(inst: &Instance) -> bool {
    let Ok(l) = compute_lsets(inst, usize::MAX) else { return false };
    let sc = Scaled::new(inst);
    let out = inst.out_arcs();
    out.iter().all(|list| {
        let mut values: Vec<i128> = Vec::new();
        for &id in list {
            let mut own: Vec<i128> = l.per_vertex[inst.arcs[id].head]
                .iter()
                .map(|&d| sc.perceived(sc.weight[id], d))
                .collect();
            own.sort_unstable();
            own.dedup();
            values.extend(own);
        }
        let total = values.len();
        values.sort_unstable();
        values.dedup();
        values.len() == total
    })
}
