//! Reference implementations used by the acceptance checks. They share no
//! code with the library beyond its data types.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use plantmine::plant_transform::{ActionMap, EcTransition, Fsm, FsmEdge, FunctionBlock, Guard};
use plantmine::verify::{ControllerFsm, Ctl, CtlTransition, KripkeStructure};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// series-parallel workflows

#[derive(Debug, Clone)]
pub enum Sp {
    Act(String),
    Seq(Vec<Sp>),
    Xor(Vec<Sp>),
    And(Vec<Sp>),
}

pub fn random_sp(rng: &mut ChaCha8Rng, leaves: &[String]) -> Sp {
    if leaves.len() == 1 {
        return Sp::Act(leaves[0].clone());
    }
    let k = rng.random_range(2..=leaves.len().min(3));
    // k nonempty contiguous groups
    let mut cuts: Vec<usize> = (1..leaves.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort();
    let mut children = Vec::new();
    let mut start = 0;
    for c in cuts.into_iter().chain([leaves.len()]) {
        children.push(random_sp(rng, &leaves[start..c]));
        start = c;
    }
    match rng.random_range(0..3) {
        0 => Sp::Seq(children),
        1 => Sp::Xor(children),
        _ => Sp::And(children),
    }
}

fn shuffle_words(a: &[String], b: &[String], out: &mut BTreeSet<Vec<String>>, prefix: &mut Vec<String>) {
    if a.is_empty() || b.is_empty() {
        let mut w = prefix.clone();
        w.extend_from_slice(a);
        w.extend_from_slice(b);
        out.insert(w);
        return;
    }
    prefix.push(a[0].clone());
    shuffle_words(&a[1..], b, out, prefix);
    prefix.pop();
    prefix.push(b[0].clone());
    shuffle_words(a, &b[1..], out, prefix);
    prefix.pop();
}

/// Complete trace language of a workflow.
pub fn language(sp: &Sp) -> BTreeSet<Vec<String>> {
    match sp {
        Sp::Act(a) => BTreeSet::from([vec![a.clone()]]),
        Sp::Xor(cs) => cs.iter().flat_map(language).collect(),
        Sp::Seq(cs) => cs.iter().fold(BTreeSet::from([Vec::new()]), |acc, c| {
            let lc = language(c);
            acc.iter()
                .flat_map(|x| lc.iter().map(move |y| x.iter().chain(y).cloned().collect()))
                .collect()
        }),
        Sp::And(cs) => cs.iter().fold(BTreeSet::from([Vec::new()]), |acc, c| {
            let lc = language(c);
            let mut out = BTreeSet::new();
            for x in &acc {
                for y in &lc {
                    shuffle_words(x, y, &mut out, &mut Vec::new());
                }
            }
            out
        }),
    }
}

// ---------------------------------------------------------------------------
// footprint and alpha places

pub fn direct_succession(log: &[Vec<String>]) -> HashSet<(String, String)> {
    let mut out = HashSet::new();
    for t in log {
        for w in t.windows(2) {
            out.insert((w[0].clone(), w[1].clone()));
        }
    }
    out
}

/// Maximal pairs (A, B) over `alphabet` by exhaustive subset enumeration.
pub fn brute_force_yw(alphabet: &[String], log: &[Vec<String>]) -> BTreeSet<(BTreeSet<String>, BTreeSet<String>)> {
    let succ = direct_succession(log);
    let gt = |a: &str, b: &str| succ.contains(&(a.to_string(), b.to_string()));
    let causal = |a: &str, b: &str| gt(a, b) && !gt(b, a);
    let unrelated = |a: &str, b: &str| !gt(a, b) && !gt(b, a);
    let n = alphabet.len();
    let set = |mask: u32| -> Vec<&str> { (0..n).filter(|i| mask & (1 << i) != 0).map(|i| alphabet[i].as_str()).collect() };
    let mut xw = Vec::new();
    for am in 1u32..(1 << n) {
        let a = set(am);
        if !a.iter().all(|x| a.iter().all(|y| unrelated(x, y))) {
            continue;
        }
        for bm in 1u32..(1 << n) {
            let b = set(bm);
            if b.iter().all(|x| b.iter().all(|y| unrelated(x, y))) && a.iter().all(|x| b.iter().all(|y| causal(x, y))) {
                xw.push((am, bm));
            }
        }
    }
    let sub = |x: u32, y: u32| x & y == x;
    xw.iter()
        .filter(|&&(a, b)| !xw.iter().any(|&(a2, b2)| (a, b) != (a2, b2) && sub(a, a2) && sub(b, b2)))
        .map(|&(a, b)| {
            (
                set(a).into_iter().map(String::from).collect(),
                set(b).into_iter().map(String::from).collect(),
            )
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Petri nets

#[derive(Debug, Clone)]
pub struct SmallNet {
    pub places: usize,
    /// (pre places, post places) per transition
    pub transitions: Vec<(Vec<usize>, Vec<usize>)>,
    pub m0: Vec<u32>,
}

pub fn random_net(rng: &mut ChaCha8Rng) -> SmallNet {
    let places = rng.random_range(1..=5);
    let nt = rng.random_range(1..=5);
    let pick = |rng: &mut ChaCha8Rng, lo: usize| -> Vec<usize> {
        let k = rng.random_range(lo..=places.min(2));
        let mut ps: Vec<usize> = (0..places).collect();
        ps.shuffle(rng);
        ps.truncate(k);
        ps.sort();
        ps
    };
    let transitions = (0..nt)
        .map(|_| {
            let lo = usize::from(rng.random_bool(0.9));
            (pick(rng, lo), pick(rng, 0))
        })
        .collect();
    let m0 = (0..places).map(|_| rng.random_range(0..=2)).collect();
    SmallNet { places, transitions, m0 }
}

pub fn fire_small(net: &SmallNet, m: &[u32], t: usize) -> Option<Vec<u32>> {
    let (pre, post) = &net.transitions[t];
    if pre.iter().any(|&p| m[p] == 0) {
        return None;
    }
    let mut next = m.to_vec();
    for &p in pre {
        next[p] -= 1;
    }
    for &p in post {
        next[p] += 1;
    }
    Some(next)
}

/// Markings reachable within `depth` firings, by depth-first enumeration.
/// Stops early once more than `cap` markings are known.
pub fn enumerate_markings(net: &SmallNet, depth: usize, cap: usize) -> BTreeMap<Vec<u32>, usize> {
    fn go(net: &SmallNet, m: Vec<u32>, left: usize, seen: &mut BTreeMap<Vec<u32>, usize>, cap: usize) {
        if seen.len() > cap {
            return;
        }
        // revisit only when more depth remains than last time
        match seen.get(&m) {
            Some(&l) if l >= left => return,
            _ => {}
        }
        seen.insert(m.clone(), left);
        if left == 0 {
            return;
        }
        for t in 0..net.transitions.len() {
            if let Some(next) = fire_small(net, &m, t) {
                go(net, next, left - 1, seen, cap);
            }
        }
    }
    let mut seen = BTreeMap::new();
    go(net, net.m0.clone(), depth, &mut seen, cap);
    seen
}

// ---------------------------------------------------------------------------
// CTL

pub fn random_kripke(rng: &mut ChaCha8Rng, atoms: &[&str]) -> KripkeStructure {
    let n = rng.random_range(1..=8);
    let labels: Vec<BTreeSet<String>> = (0..n)
        .map(|_| atoms.iter().filter(|_| rng.random_bool(0.5)).map(|a| a.to_string()).collect())
        .collect();
    let mut edges = Vec::new();
    for s in 0..n {
        for _ in 0..rng.random_range(1..=3) {
            edges.push((s, rng.random_range(0..n)));
        }
    }
    KripkeStructure::from_parts(labels, 0, &edges, atoms.iter().map(|a| a.to_string()))
}

pub fn random_formula(rng: &mut ChaCha8Rng, atoms: &[String], depth: usize) -> Ctl {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..10) {
            0 => Ctl::True,
            1 => Ctl::False,
            _ => Ctl::atom(&atoms[rng.random_range(0..atoms.len())]),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_formula(rng, atoms, depth - 1);
    match rng.random_range(0..12) {
        0 => Ctl::not(sub(rng)),
        1 => Ctl::and(sub(rng), sub(rng)),
        2 => Ctl::or(sub(rng), sub(rng)),
        3 => Ctl::implies(sub(rng), sub(rng)),
        4 => Ctl::ex(sub(rng)),
        5 => Ctl::ef(sub(rng)),
        6 => Ctl::eg(sub(rng)),
        7 => Ctl::eu(sub(rng), sub(rng)),
        8 => Ctl::ax(sub(rng)),
        9 => Ctl::af(sub(rng)),
        10 => Ctl::ag(sub(rng)),
        _ => Ctl::au(sub(rng), sub(rng)),
    }
}

/// Path-semantics evaluator. Every infinite path of a finite structure is
/// represented, for the purpose of X/F/G/U over state formulas, by some
/// lasso: a simple path followed by an edge back into it.
pub struct PathEvaluator<'a> {
    k: &'a KripkeStructure,
    /// (states of the simple path, index the last state loops back to)
    lassos: Vec<Vec<(Vec<usize>, usize)>>,
}

impl<'a> PathEvaluator<'a> {
    pub fn new(k: &'a KripkeStructure) -> Self {
        let lassos = (0..k.len())
            .map(|s| {
                let mut out = Vec::new();
                let mut path = vec![s];
                Self::collect(k, &mut path, &mut out);
                out
            })
            .collect();
        PathEvaluator { k, lassos }
    }

    fn collect(k: &KripkeStructure, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, usize)>) {
        let last = *path.last().unwrap();
        let targets: BTreeSet<usize> = k.successors[last].iter().map(|t| t.target).collect();
        for t in targets {
            match path.iter().position(|&x| x == t) {
                Some(j) => out.push((path.clone(), j)),
                None => {
                    path.push(t);
                    Self::collect(k, path, out);
                    path.pop();
                }
            }
        }
    }

    fn second(path: &[usize], j: usize) -> usize {
        if path.len() > 1 {
            path[1]
        } else {
            path[j]
        }
    }

    pub fn eval(&self, f: &Ctl) -> Vec<bool> {
        let n = self.k.len();
        let exists = |pred: &dyn Fn(&[usize], usize) -> bool| -> Vec<bool> {
            (0..n).map(|s| self.lassos[s].iter().any(|(p, j)| pred(p, *j))).collect()
        };
        let forall = |pred: &dyn Fn(&[usize], usize) -> bool| -> Vec<bool> {
            (0..n).map(|s| self.lassos[s].iter().all(|(p, j)| pred(p, *j))).collect()
        };
        let until = |a: &[bool], b: &[bool], p: &[usize]| -> bool {
            for &s in p {
                if b[s] {
                    return true;
                }
                if !a[s] {
                    return false;
                }
            }
            false
        };
        match f {
            Ctl::True => vec![true; n],
            Ctl::False => vec![false; n],
            Ctl::Atom(a) => self.k.states.iter().map(|s| s.labels.contains(a)).collect(),
            Ctl::Not(g) => self.eval(g).into_iter().map(|x| !x).collect(),
            Ctl::And(a, b) => self.eval(a).into_iter().zip(self.eval(b)).map(|(x, y)| x && y).collect(),
            Ctl::Or(a, b) => self.eval(a).into_iter().zip(self.eval(b)).map(|(x, y)| x || y).collect(),
            Ctl::Implies(a, b) => self.eval(a).into_iter().zip(self.eval(b)).map(|(x, y)| !x || y).collect(),
            Ctl::EX(g) => {
                let s = self.eval(g);
                exists(&|p, j| s[Self::second(p, j)])
            }
            Ctl::AX(g) => {
                let s = self.eval(g);
                forall(&|p, j| s[Self::second(p, j)])
            }
            Ctl::EF(g) => {
                let s = self.eval(g);
                exists(&|p, _| p.iter().any(|&x| s[x]))
            }
            Ctl::AF(g) => {
                let s = self.eval(g);
                forall(&|p, _| p.iter().any(|&x| s[x]))
            }
            Ctl::EG(g) => {
                let s = self.eval(g);
                exists(&|p, _| p.iter().all(|&x| s[x]))
            }
            Ctl::AG(g) => {
                let s = self.eval(g);
                forall(&|p, _| p.iter().all(|&x| s[x]))
            }
            Ctl::EU(a, b) => {
                let (sa, sb) = (self.eval(a), self.eval(b));
                exists(&|p, _| until(&sa, &sb, p))
            }
            Ctl::AU(a, b) => {
                let (sa, sb) = (self.eval(a), self.eval(b));
                forall(&|p, _| until(&sa, &sb, p))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// FSMs and plant blocks

pub const CONTROLS: [&str; 2] = ["c0", "c1"];
pub const SENSORS: [&str; 3] = ["s0", "s1", "s2"];

pub fn random_fsm(rng: &mut ChaCha8Rng, max_states: usize) -> Fsm {
    let n = rng.random_range(1..=max_states);
    let states: Vec<String> = (0..n).map(|i| format!("Q{i}")).collect();
    let mut edges = Vec::new();
    for s in 0..n {
        for _ in 0..rng.random_range(0..=3) {
            let label = if rng.random_bool(0.4) {
                CONTROLS[rng.random_range(0..CONTROLS.len())]
            } else {
                SENSORS[rng.random_range(0..SENSORS.len())]
            };
            edges.push(FsmEdge { from: states[s].clone(), label: label.to_string(), to: states[rng.random_range(0..n)].clone() });
        }
    }
    Fsm::new(states, "Q0", edges).expect("generated FSM is valid")
}

/// Control actions c*, sensor actions s* with random latch effects.
pub fn random_action_map(rng: &mut ChaCha8Rng) -> ActionMap {
    let mut map = ActionMap::default();
    for c in CONTROLS {
        map = map.control(c);
    }
    for s in SENSORS {
        let effect = match rng.random_range(0..3) {
            0 => None,
            1 => Some(("v0", rng.random_bool(0.5))),
            _ => Some(("v1", rng.random_bool(0.5))),
        };
        map = map.sensor(s, effect);
    }
    map.initial_valuation = BTreeMap::from([("v0".to_string(), rng.random_bool(0.5)), ("v1".to_string(), rng.random_bool(0.5))]);
    map
}

/// Observation of an ECC transition: the consumed input event, the emitted
/// sensor event, or nothing for a silent hand-over.
fn observe<'a>(fb: &'a FunctionBlock, t: &'a EcTransition) -> Option<&'a str> {
    match &t.guard {
        Guard::Event(e) => Some(e),
        Guard::Ndt => fb.emission(&t.to),
    }
}

fn silent_closure(fb: &FunctionBlock, set: BTreeSet<String>) -> BTreeSet<String> {
    let mut out = set.clone();
    let mut queue: VecDeque<String> = set.into_iter().collect();
    while let Some(s) = queue.pop_front() {
        for t in fb.transitions_from(&s) {
            if observe(fb, t).is_none() && out.insert(t.to.clone()) {
                queue.push_back(t.to.clone());
            }
        }
    }
    out
}

/// Compares the prefix-closed languages of `fsm` and `fb` up to words of
/// length `depth` by exploring pairs of determinized state sets. Returns
/// the first distinguishing word, if any.
pub fn language_difference(fsm: &Fsm, fb: &FunctionBlock, depth: usize) -> Option<Vec<String>> {
    let fsm_step = |set: &BTreeSet<String>, l: &str| -> BTreeSet<String> {
        fsm.edges.iter().filter(|e| set.contains(&e.from) && e.label == l).map(|e| e.to.clone()).collect()
    };
    let fb_step = |set: &BTreeSet<String>, l: &str| -> BTreeSet<String> {
        let direct = fb
            .transitions
            .iter()
            .filter(|t| set.contains(&t.from) && observe(fb, t) == Some(l))
            .map(|t| t.to.clone())
            .collect();
        silent_closure(fb, direct)
    };
    let fsm_labels = |set: &BTreeSet<String>| -> BTreeSet<String> {
        fsm.edges.iter().filter(|e| set.contains(&e.from)).map(|e| e.label.clone()).collect()
    };
    let fb_labels = |set: &BTreeSet<String>| -> BTreeSet<String> {
        fb.transitions
            .iter()
            .filter(|t| set.contains(&t.from))
            .filter_map(|t| observe(fb, t).map(String::from))
            .collect()
    };

    let start = (BTreeSet::from([fsm.initial.clone()]), silent_closure(fb, BTreeSet::from([fb.initial.clone()])));
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, Vec::<String>::new())]);
    while let Some(((a, b), word)) = queue.pop_front() {
        if word.len() >= depth {
            continue;
        }
        let (la, lb) = (fsm_labels(&a), fb_labels(&b));
        if la != lb {
            let mut w = word.clone();
            w.push(la.symmetric_difference(&lb).next().unwrap().clone());
            return Some(w);
        }
        for l in la {
            let next = (fsm_step(&a, &l), fb_step(&b, &l));
            if seen.insert(next.clone()) {
                let mut w = word.clone();
                w.push(l);
                queue.push_back((next, w));
            }
        }
    }
    None
}

/// Deterministic controller over the plant's interface with random
/// reactions.
pub fn random_controller(rng: &mut ChaCha8Rng, fb: &FunctionBlock) -> ControllerFsm {
    let n = rng.random_range(1..=3);
    let states: Vec<String> = (0..n).map(|i| format!("C{i}")).collect();
    let inputs: BTreeSet<String> = fb.event_outputs.clone();
    let outputs: BTreeSet<String> = fb.event_inputs.clone();
    let outs: Vec<&String> = outputs.iter().collect();
    let mut transitions = Vec::new();
    for s in &states {
        for i in &inputs {
            if rng.random_bool(0.7) {
                let output = (!outs.is_empty() && rng.random_bool(0.6)).then(|| outs[rng.random_range(0..outs.len())].clone());
                transitions.push(CtlTransition {
                    from: s.clone(),
                    input: i.clone(),
                    output,
                    to: states[rng.random_range(0..n)].clone(),
                });
            }
        }
    }
    let ctl = ControllerFsm { states, initial: "C0".into(), inputs, outputs, transitions };
    ctl.validate().expect("generated controller is valid");
    ctl
}
