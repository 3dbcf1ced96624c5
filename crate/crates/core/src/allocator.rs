//! Allocations meeting every agent's guarantee `V_n(alpha_i)`.
//!
//! The pipeline sorts each agent's row, runs a recursive moving-knife
//! procedure on the ordered instance, and maps the result back with a picking
//! sequence. A separate cut-and-choose procedure gives two agents the tighter
//! worst-case share.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::mms::MmsSolver;
use crate::model::{order_vector, Allocation, DisutilityVector, Instance};
use crate::rational::{from_u64, Rational};
use crate::region::classify_guarantee;
use crate::shares::{guarantee, hill_share, ShareQuery};

/// Each row sorted non-increasingly, with `permutations[i][p]` the original
/// object at sorted position `p` for agent `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedReduction {
    pub ordered: Instance,
    pub permutations: Vec<Vec<usize>>,
}

pub fn reduce_to_ordered(inst: &Instance) -> OrderedReduction {
    let (rows, permutations) = inst.profile().iter().map(order_vector).unzip();
    OrderedReduction {
        ordered: Instance::from_parts(rows, inst.scale_factors().to_vec()),
        permutations,
    }
}

/// One recursion level. Vectors indexed like `agents` hold values in that
/// level's renormalized units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnifeLevel {
    /// Agents still unserved at this level, ascending.
    pub agents: Vec<usize>,
    /// First ordered position still in the pool.
    pub start: usize,
    pub alphas: Vec<Rational>,
    pub guarantees: Vec<Rational>,
    /// Objects every knife passed when the loop stopped.
    pub knife: usize,
    /// Each agent's disutility for the objects before her knife.
    pub prefix: Vec<Rational>,
    /// Last position added, which the served agent does not take.
    pub removed: Option<usize>,
    pub chosen: usize,
    /// Ordered positions given to `chosen`.
    pub bundle: Vec<usize>,
    /// Each agent's disutility for `bundle`.
    pub served_cost: Vec<Rational>,
    /// `1 - served_cost`, the divisor for the next level.
    pub renormalization: Vec<Rational>,
    /// The pool ran out before every knife passed its guarantee.
    pub exhausted: bool,
}

impl KnifeLevel {
    /// Every other agent with positive `alpha` considers the served bundle
    /// worth at least `(1 - V)/(n'-1)`. Vacuous on exhausted or final levels.
    pub fn served_cost_bound_holds(&self) -> bool {
        let np = self.agents.len();
        if self.exhausted || np < 2 {
            return true;
        }
        let denom = from_u64(np as u64 - 1);
        self.agents.iter().enumerate().all(|(j, &a)| {
            a == self.chosen
                || self.alphas[j].is_zero()
                || self.served_cost[j] >= (Rational::one() - &self.guarantees[j]) / &denom
        })
    }

    /// For `n' >= 3`, scaling `alpha` by the worst case of that bound keeps it
    /// in the same bracket and the same flat/increasing piece for `n'-1`.
    pub fn region_carry_holds(&self) -> bool {
        let np = self.agents.len() as u64;
        if np < 3 {
            return true;
        }
        self.alphas
            .iter()
            .zip(&self.guarantees)
            .filter(|(a, _)| !a.is_zero())
            .all(|(a, v)| region_carry(np, a, v))
    }
}

/// Whether `alpha/(1 - (1-V)/(n-1))` falls in the region of `alpha` at `n-1`.
pub fn region_carry(n: u64, alpha: &Rational, v: &Rational) -> bool {
    let shrink = Rational::one() - (Rational::one() - v) / from_u64(n - 1);
    let beta = alpha / shrink;
    match (
        classify_guarantee(n, alpha),
        classify_guarantee(n - 1, &beta),
    ) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnifeTrace {
    pub levels: Vec<KnifeLevel>,
}

fn check_ordered(inst: &Instance) -> Result<()> {
    for (i, row) in inst.profile().iter().enumerate() {
        if row.values().windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Validation(format!(
                "agent {} is not ordered (disutilities must be non-increasing)",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Recursive moving knife on an ordered instance. Bundles are in ordered
/// positions. Ties go to the lowest agent index.
pub fn moving_knife(ordered: &Instance) -> Result<(Allocation, KnifeTrace)> {
    check_ordered(ordered)?;
    let n = ordered.n();
    let m = ordered.m();
    let mut rows: Vec<Vec<Rational>> = ordered
        .profile()
        .iter()
        .map(|r| r.values().to_vec())
        .collect();
    let mut bundles = vec![Vec::new(); n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut start = 0;
    let mut trace = KnifeTrace::default();

    if n == 1 {
        bundles[0] = (0..m).collect();
        return Ok((Allocation::from_parts_unchecked(bundles), trace));
    }

    loop {
        let np = active.len() as u64;
        let alphas: Vec<Rational> = active
            .iter()
            .map(|&i| rows[i].get(start).cloned().unwrap_or_else(Rational::zero))
            .collect();
        let guarantees: Vec<Rational> = alphas
            .iter()
            .map(|a| guarantee(np, a))
            .collect::<Result<_>>()?;

        let mut prefix = vec![Rational::zero(); active.len()];
        let mut t = 0;
        let under = |prefix: &[Rational]| prefix.iter().zip(&guarantees).any(|(p, v)| p <= v);
        let mut exhausted = false;
        while under(&prefix) {
            if start + t == m {
                exhausted = true;
                break;
            }
            for (j, &i) in active.iter().enumerate() {
                prefix[j] += &rows[i][start + t];
            }
            t += 1;
        }

        if exhausted {
            let j = prefix
                .iter()
                .zip(&guarantees)
                .position(|(p, v)| p <= v)
                .expect("loop stopped while some agent was under");
            let chosen = active[j];
            bundles[chosen] = (start..m).collect();
            trace.levels.push(KnifeLevel {
                agents: active.clone(),
                start,
                alphas,
                guarantees,
                knife: t,
                served_cost: prefix.clone(),
                renormalization: prefix.iter().map(|c| Rational::one() - c).collect(),
                prefix,
                removed: None,
                chosen,
                bundle: bundles[chosen].clone(),
                exhausted: true,
            });
            break;
        }

        let last = start + t - 1;
        let before: Vec<Rational> = active
            .iter()
            .enumerate()
            .map(|(j, &i)| &prefix[j] - &rows[i][last])
            .collect();
        let j = before
            .iter()
            .zip(&guarantees)
            .position(|(p, v)| p <= v)
            .expect("some agent was under before the last step");
        let chosen = active[j];
        bundles[chosen] = (start..last).collect();
        let served_cost = before;
        let renormalization: Vec<Rational> =
            served_cost.iter().map(|c| Rational::one() - c).collect();

        trace.levels.push(KnifeLevel {
            agents: active.clone(),
            start,
            alphas,
            guarantees,
            knife: t,
            prefix,
            removed: Some(last),
            chosen,
            bundle: bundles[chosen].clone(),
            served_cost,
            renormalization: renormalization.clone(),
            exhausted: false,
        });

        active.remove(j);
        start = last;
        if active.len() == 1 {
            bundles[active[0]] = (start..m).collect();
            break;
        }
        for (jj, &i) in trace
            .levels
            .last()
            .expect("pushed")
            .agents
            .iter()
            .enumerate()
        {
            if i == chosen {
                continue;
            }
            let f = &renormalization[jj];
            if !f.is_zero() {
                for x in &mut rows[i][start..] {
                    *x = &*x / f;
                }
            }
        }
    }
    Ok((Allocation::from_parts_unchecked(bundles), trace))
}

/// Maps an allocation of ordered positions back to original objects. Rounds
/// run from the last position to the first; in each round the holder of
/// that position takes her least costly remaining object (lowest index on
/// ties). At round `t` only `t` objects remain, so what she takes costs at
/// most her `t`-th largest disutility, which is what the position cost her.
pub fn lift_allocation(red: &OrderedReduction, ordered_alloc: &Allocation) -> Result<Allocation> {
    let n = red.ordered.n();
    let m = red.ordered.m();
    if ordered_alloc.n() != n {
        return Err(Error::Validation(format!(
            "allocation has {} bundles for {n} agents",
            ordered_alloc.n()
        )));
    }
    let checked = Allocation::new(ordered_alloc.bundles().to_vec(), m)?;
    let mut holder = vec![0; m];
    for (i, b) in checked.bundles().iter().enumerate() {
        for &p in b {
            holder[p] = i;
        }
    }
    let mut inverse = vec![vec![0; m]; n];
    for (i, perm) in red.permutations.iter().enumerate() {
        for (p, &e) in perm.iter().enumerate() {
            inverse[i][e] = p;
        }
    }
    let mut taken = vec![false; m];
    let mut bundles = vec![Vec::new(); n];
    for t in (0..m).rev() {
        let a = holder[t];
        let row = red.ordered.agent(a);
        let e = (0..m)
            .filter(|&e| !taken[e])
            .min_by(|&x, &y| {
                row.get(inverse[a][x])
                    .cmp(row.get(inverse[a][y]))
                    .then(x.cmp(&y))
            })
            .expect("one object per round");
        taken[e] = true;
        bundles[a].push(e);
    }
    Ok(Allocation::from_parts_unchecked(bundles))
}

/// Per-agent outcome, in normalized units of the agent's own row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentReport {
    pub alpha: Rational,
    pub guarantee: Rational,
    pub achieved: Rational,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationOutcome {
    pub allocation: Allocation,
    pub agents: Vec<AgentReport>,
    pub reduction: OrderedReduction,
    pub ordered_allocation: Allocation,
    pub trace: KnifeTrace,
}

/// Scores an allocation against each agent's guarantee.
pub fn report(inst: &Instance, alloc: &Allocation) -> Result<Vec<AgentReport>> {
    if alloc.n() != inst.n() {
        return Err(Error::Validation(format!(
            "allocation has {} bundles for {} agents",
            alloc.n(),
            inst.n()
        )));
    }
    let n = inst.n() as u64;
    inst.profile()
        .iter()
        .zip(alloc.bundles())
        .map(|(v, b)| {
            let alpha = v.alpha();
            let guarantee = guarantee(n, &alpha)?;
            let achieved = v.of(b);
            Ok(AgentReport {
                satisfied: achieved <= guarantee,
                alpha,
                guarantee,
                achieved,
            })
        })
        .collect()
}

/// Sort, moving knife, lift.
pub fn allocate(inst: &Instance) -> Result<AllocationOutcome> {
    let reduction = reduce_to_ordered(inst);
    let (ordered_allocation, trace) = moving_knife(&reduction.ordered)?;
    let allocation = lift_allocation(&reduction, &ordered_allocation)?;
    let agents = report(inst, &allocation)?;
    Ok(AllocationOutcome {
        allocation,
        agents,
        reduction,
        ordered_allocation,
        trace,
    })
}

/// Worst-case share of a two-agent row; all-zero rows have none.
fn two_agent_share(v: &DisutilityVector) -> Result<Option<Rational>> {
    if v.is_zero() {
        return Ok(None);
    }
    let q = ShareQuery::finite(2, v.len() as u64, v.alpha())?;
    Ok(Some(hill_share(&q)))
}

/// Cut and choose for two agents. The agent with the smaller worst-case share
/// splits by her exact MinMax partition; the other takes the bundle she
/// minds less, or on a tie the one heavier for the splitter.
pub fn allocate_two_agents_tight(inst: &Instance) -> Result<Allocation> {
    allocate_two_agents_tight_with(inst, &MmsSolver::default())
}

pub fn allocate_two_agents_tight_with(inst: &Instance, solver: &MmsSolver) -> Result<Allocation> {
    if inst.n() != 2 {
        return Err(Error::Domain(format!(
            "cut and choose needs exactly 2 agents, got {}",
            inst.n()
        )));
    }
    let shares = [
        two_agent_share(inst.agent(0))?,
        two_agent_share(inst.agent(1))?,
    ];
    let divider = match (&shares[0], &shares[1]) {
        (_, None) => 0,
        (None, Some(_)) => 1,
        (Some(a), Some(b)) => usize::from(b < a),
    };
    let chooser = 1 - divider;
    let split = solver.solve(inst.agent(divider), 2)?.allocation;
    let vd = inst.agent(divider);
    let vc = inst.agent(chooser);
    let (b0, b1) = (split.bundle(0), split.bundle(1));
    let pick_first = match vc.of(b0).cmp(&vc.of(b1)) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => vd.of(b0) >= vd.of(b1),
    };
    let (mine, theirs) = if pick_first { (b0, b1) } else { (b1, b0) };
    let mut bundles = vec![Vec::new(); 2];
    bundles[chooser] = mine.to_vec();
    bundles[divider] = theirs.to_vec();
    Allocation::new(bundles, inst.m())
}
