//! Collapsings: identifying terms by adding equality atoms.

use crate::query::{Atom, Query};

/// All set partitions of `0..n` as restricted growth strings (`block[i]` is
/// the block of element `i`), the discrete partition first.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        // Opening a new block first puts finer partitions earlier.
        let upper = if i == 0 { 0 } else { max + 1 };
        for b in (0..=upper).rev() {
            cur.push(b);
            go(i + 1, n, cur, max.max(b), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), 0, &mut out);
    out
}

/// One query per coarsening of the `≈`-partition of `q`.
pub fn collapsings(q: &Query) -> Vec<Query> {
    collapsings_filtered(q, false)
}

/// Like [`collapsings`], optionally skipping partitions that identify two
/// distinct individuals (those admit no ground mapping).
pub(crate) fn collapsings_filtered(q: &Query, keep_individuals_apart: bool) -> Vec<Query> {
    let classes = q.classes();
    let mut out = Vec::new();
    for blocks in set_partitions(classes.len()) {
        let mut reps: Vec<Option<usize>> = vec![None; classes.len()];
        let mut extra = Vec::new();
        let mut clash = false;
        for (c, &b) in blocks.iter().enumerate() {
            match reps[b] {
                None => reps[b] = Some(c),
                Some(first) => {
                    let has_ind = |k: usize| classes[k].iter().any(|t| t.is_ind());
                    if keep_individuals_apart && has_ind(first) && has_ind(c) {
                        clash = true;
                    }
                    extra.push(Atom::Eq(classes[first][0].clone(), classes[c][0].clone()));
                }
            }
        }
        if !clash {
            out.push(q.with_atoms(extra));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dl::Role;
    use crate::query::Term;

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..7).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn query_itself_comes_first() {
        let q = Query::build([Atom::role(Role::named("r"), Term::var("x"), Term::var("y"))]);
        let cs = collapsings(&q);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0], q);
    }
}
