//! The four-stage query rewriting: collapsing, split, loop and forest
//! rewritings, each producing candidates (a query paired with a root
//! splitting).
//!
//! Two modes are available. [`Mode::Exhaustive`] follows the definitions
//! literally and is only feasible for very small queries. [`Mode::Guided`]
//! enumerates the subset of rewritings that can arise from a match into a
//! canonical model (root count bounded by the number of individuals, split
//! terms that are roots, forest chains along enumerated trees whose extra
//! nodes are branching points). Both modes are sound; guided mode keeps
//! every rewriting needed for completeness.

mod canon;
mod collapse;
mod forest;
mod loops;
pub mod shape;
mod split;

use std::collections::BTreeSet;

use crate::dl::name;
use crate::error::{Error, Result};
use crate::query::{Query, Term};

pub use canon::canonical;
pub use collapse::{collapsings, set_partitions};
pub use forest::forest_rewritings;
pub use loops::loop_rewritings;
pub use shape::{
    is_forest_shaped, is_root_splitting, is_tree_shaped, reach, sub_query, tree_mapping,
    tree_mapping_at, TreeMapping,
};
pub use split::split_rewritings;

/// A query together with a root splitting.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Candidate {
    pub query: Query,
    pub roots: BTreeSet<Term>,
}

impl Candidate {
    pub fn new(query: Query, roots: BTreeSet<Term>) -> Candidate {
        Candidate { query, roots }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Guided,
}

#[derive(Clone, Copy, Debug)]
pub struct RewriteConfig {
    pub mode: Mode,
    /// Upper bound on the number of root `≈`-classes; `None` is unbounded.
    pub max_root_classes: Option<usize>,
    /// Maximal number of candidates a single stage may produce.
    pub budget: usize,
}

pub const DEFAULT_BUDGET: usize = 1_000_000;

impl RewriteConfig {
    pub fn exhaustive() -> RewriteConfig {
        RewriteConfig { mode: Mode::Exhaustive, max_root_classes: None, budget: DEFAULT_BUDGET }
    }

    /// Guided rewriting with at most `individuals` root classes.
    pub fn guided(individuals: usize) -> RewriteConfig {
        RewriteConfig {
            mode: Mode::Guided,
            max_root_classes: Some(individuals),
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> RewriteConfig {
        self.budget = budget;
        self
    }
}

/// Output of every stage, for stage dumps and tests.
#[derive(Clone, Debug)]
pub struct Stages {
    pub collapsings: Vec<Query>,
    pub split: Vec<Candidate>,
    pub loops: Vec<Candidate>,
    pub forest: Vec<Candidate>,
}

/// Runs all four stages on a connected query.
pub fn rewrite(q: &Query, kb: &crate::dl::Kb, cfg: &RewriteConfig) -> Result<Stages> {
    let collapsings = collapse::collapsings(q);
    let split = split::split_rewritings(q, kb, cfg)?;
    let loops = loops::loop_rewritings(&split, kb, cfg)?;
    let forest = forest::forest_rewritings(&loops, kb, cfg)?;
    Ok(Stages { collapsings, split, loops, forest })
}

/// Fresh variables live in a reserved namespace: user names never start
/// with an underscore.
pub(crate) fn fresh(prefix: &str, i: usize) -> Term {
    Term::Var(name(&format!("_{prefix}{i}")))
}

pub(crate) fn is_fresh(t: &Term) -> bool {
    t.is_var() && t.name().starts_with('_')
}

/// Counts produced candidates against the configured budget.
pub(crate) struct Budget {
    stage: &'static str,
    limit: usize,
    used: usize,
}

impl Budget {
    pub(crate) fn new(stage: &'static str, cfg: &RewriteConfig) -> Budget {
        Budget { stage, limit: cfg.budget, used: 0 }
    }

    pub(crate) fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            Err(Error::BudgetExceeded { stage: self.stage, limit: self.limit })
        } else {
            Ok(())
        }
    }
}

/// Calls `f` on every element of the cartesian product of `options`.
pub(crate) fn for_each_product<T, F>(options: &[Vec<T>], mut f: F) -> Result<()>
where
    F: FnMut(&[&T]) -> Result<()>,
{
    if options.iter().any(Vec::is_empty) {
        return Ok(());
    }
    let mut idx = vec![0usize; options.len()];
    loop {
        let pick: Vec<&T> = idx.iter().zip(options).map(|(&i, o)| &o[i]).collect();
        f(&pick)?;
        let mut k = options.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// All subsets of `items` (by index order), smallest first.
pub(crate) fn subsets<T: Clone>(items: &[T], max_size: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    for size in 1..=max_size.min(items.len()) {
        for combo in itertools::Itertools::combinations(items.iter().cloned(), size) {
            out.push(combo);
        }
    }
    out
}
