use std::collections::VecDeque;

use super::{Ctl, KripkeStructure, Step, VerifyError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub state: usize,
    pub name: String,
    /// The transition taken to get here; `None` for the first state.
    pub via: Option<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    /// Shortest path to a violation of a failing top-level `AG p`.
    pub counterexample: Option<Vec<PathStep>>,
}

/// Labelling checker over the adequate set {EX, EU, EG}; the remaining
/// operators are rewritten through their dualities.
pub struct Checker<'a> {
    k: &'a KripkeStructure,
    predecessors: Vec<Vec<usize>>,
    /// Largest number of rounds any EU/EG fixpoint needed so far.
    pub max_rounds: usize,
}

impl<'a> Checker<'a> {
    pub fn new(k: &'a KripkeStructure) -> Self {
        let mut predecessors = vec![Vec::new(); k.len()];
        for (s, outs) in k.successors.iter().enumerate() {
            for t in outs {
                if !predecessors[t.target].contains(&s) {
                    predecessors[t.target].push(s);
                }
            }
        }
        Checker { k, predecessors, max_rounds: 0 }
    }

    /// Satisfaction set of `f` as a membership vector.
    pub fn sat(&mut self, f: &Ctl) -> Result<Vec<bool>, VerifyError> {
        let n = self.k.len();
        Ok(match f {
            Ctl::True => vec![true; n],
            Ctl::False => vec![false; n],
            Ctl::Atom(a) => {
                if !self.k.propositions.contains(a) {
                    return Err(VerifyError::UnknownAtom(a.clone()));
                }
                self.k.states.iter().map(|s| s.labels.contains(a)).collect()
            }
            Ctl::Not(g) => self.sat(g)?.into_iter().map(|b| !b).collect(),
            Ctl::And(a, b) => zip(self.sat(a)?, self.sat(b)?, |x, y| x && y),
            Ctl::Or(a, b) => zip(self.sat(a)?, self.sat(b)?, |x, y| x || y),
            Ctl::Implies(a, b) => zip(self.sat(a)?, self.sat(b)?, |x, y| !x || y),
            Ctl::EX(g) => {
                let s = self.sat(g)?;
                self.pre_exists(&s)
            }
            Ctl::EU(a, b) => {
                let (sa, sb) = (self.sat(a)?, self.sat(b)?);
                self.eu(&sa, sb)
            }
            Ctl::EG(g) => {
                let s = self.sat(g)?;
                self.eg(s)
            }
            Ctl::EF(g) => self.sat(&Ctl::eu(Ctl::True, (**g).clone()))?,
            Ctl::AX(g) => self.sat(&Ctl::not(Ctl::ex(Ctl::not((**g).clone()))))?,
            Ctl::AF(g) => self.sat(&Ctl::not(Ctl::eg(Ctl::not((**g).clone()))))?,
            Ctl::AG(g) => self.sat(&Ctl::not(Ctl::ef(Ctl::not((**g).clone()))))?,
            Ctl::AU(a, b) => {
                // A[a U b] = !(E[!b U (!a & !b)] | EG !b)
                let (na, nb) = (Ctl::not((**a).clone()), Ctl::not((**b).clone()));
                let f = Ctl::not(Ctl::or(Ctl::eu(nb.clone(), Ctl::and(na, nb.clone())), Ctl::eg(nb)));
                self.sat(&f)?
            }
        })
    }

    fn pre_exists(&self, target: &[bool]) -> Vec<bool> {
        self.k
            .successors
            .iter()
            .map(|outs| outs.iter().any(|t| target[t.target]))
            .collect()
    }

    /// Least fixpoint Z = b | (a & EX Z), grown one predecessor layer per round.
    fn eu(&mut self, a: &[bool], b: Vec<bool>) -> Vec<bool> {
        let mut z = b;
        let mut frontier: Vec<usize> = (0..z.len()).filter(|&s| z[s]).collect();
        let mut rounds = 0;
        while !frontier.is_empty() {
            rounds += 1;
            let mut next = Vec::new();
            for &s in &frontier {
                for &p in &self.predecessors[s] {
                    if a[p] && !z[p] {
                        z[p] = true;
                        next.push(p);
                    }
                }
            }
            frontier = next;
        }
        self.max_rounds = self.max_rounds.max(rounds);
        z
    }

    /// Greatest fixpoint Z = a & EX Z, removing every state without a
    /// successor in Z once per round.
    fn eg(&mut self, a: Vec<bool>) -> Vec<bool> {
        let mut z = a;
        let mut rounds = 0;
        loop {
            let doomed: Vec<usize> = (0..z.len())
                .filter(|&s| z[s] && !self.k.successors[s].iter().any(|t| z[t.target]))
                .collect();
            if doomed.is_empty() {
                break;
            }
            rounds += 1;
            for s in doomed {
                z[s] = false;
            }
        }
        self.max_rounds = self.max_rounds.max(rounds);
        z
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// Checks `f` at the initial state of `k`.
pub fn check_ctl(k: &KripkeStructure, f: &Ctl) -> Result<Verdict, VerifyError> {
    let mut checker = Checker::new(k);
    let sat = checker.sat(f)?;
    let holds = sat[k.initial];
    let counterexample = match (holds, f.invariant_body()) {
        (false, Some(body)) => {
            let good = checker.sat(body)?;
            shortest_path_to(k, |s| !good[s])
        }
        _ => None,
    };
    Ok(Verdict { holds, counterexample })
}

/// Breadth-first search from the initial state.
fn shortest_path_to(k: &KripkeStructure, target: impl Fn(usize) -> bool) -> Option<Vec<PathStep>> {
    let mut parent: Vec<Option<(usize, Step)>> = vec![None; k.len()];
    let mut seen = vec![false; k.len()];
    seen[k.initial] = true;
    let mut queue = VecDeque::from([k.initial]);
    let mut found = None;
    while let Some(s) = queue.pop_front() {
        if target(s) {
            found = Some(s);
            break;
        }
        for t in &k.successors[s] {
            if !seen[t.target] {
                seen[t.target] = true;
                parent[t.target] = Some((s, t.step.clone()));
                queue.push_back(t.target);
            }
        }
    }
    let mut s = found?;
    let mut path = Vec::new();
    loop {
        let via = parent[s].as_ref().map(|(_, step)| step.clone());
        path.push(PathStep { state: s, name: k.states[s].name.clone(), via });
        match &parent[s] {
            Some((p, _)) => s = *p,
            None => break,
        }
    }
    path.reverse();
    Some(path)
}
