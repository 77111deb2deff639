use super::cond::{bind, eval_cond};
use super::{Cond, Resm, ResmError};
use crate::olap::Olap;
use crate::smgraph::StopEvent;

/// Test applied to one stop by a consuming transition.
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Any,
    /// Stop at a PoI of `dimension` (canonical name), optionally satisfying
    /// a condition.
    Dim { dimension: String, cond: Option<Cond> },
}

impl Predicate {
    fn test(&self, stop: &StopEvent, olap: &Olap) -> Result<bool, ResmError> {
        match self {
            Predicate::Any => Ok(true),
            Predicate::Dim { dimension, cond } => {
                if &stop.dimension != dimension {
                    return Ok(false);
                }
                match cond {
                    None => Ok(true),
                    Some(c) => eval_cond(c, stop, olap),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
struct State {
    eps: Vec<usize>,
    /// (predicate, target)
    moves: Vec<(usize, usize)>,
}

/// Thompson-style NFA whose consuming transitions carry stop predicates.
#[derive(Debug, Clone)]
pub struct ResmAutomaton {
    states: Vec<State>,
    predicates: Vec<Predicate>,
    start: usize,
    accept: usize,
}

struct Builder<'a> {
    olap: &'a Olap,
    states: Vec<State>,
    predicates: Vec<Predicate>,
}

impl Builder<'_> {
    fn state(&mut self) -> usize {
        self.states.push(State::default());
        self.states.len() - 1
    }

    fn eps(&mut self, from: usize, to: usize) {
        self.states[from].eps.push(to);
    }

    fn consume(&mut self, from: usize, pred: Predicate, to: usize) {
        self.predicates.push(pred);
        let p = self.predicates.len() - 1;
        self.states[from].moves.push((p, to));
    }

    /// Returns the fragment's (entry, exit) states.
    fn fragment(&mut self, e: &Resm) -> Result<(usize, usize), ResmError> {
        let s = self.state();
        match e {
            Resm::Dim(name) | Resm::DimCond(name, _) => {
                let dim = self
                    .olap
                    .dimension(name)
                    .map_err(|_| ResmError::UnknownDimension(name.clone()))?;
                let cond = match e {
                    Resm::DimCond(_, c) => {
                        bind(c, dim, self.olap)?;
                        Some(c.clone())
                    }
                    _ => None,
                };
                let a = self.state();
                self.consume(s, Predicate::Dim { dimension: dim.name().to_owned(), cond }, a);
                Ok((s, a))
            }
            Resm::Epsilon => {
                let a = self.state();
                self.eps(s, a);
                Ok((s, a))
            }
            Resm::Wildcard => {
                let a = self.state();
                self.eps(s, a);
                self.consume(a, Predicate::Any, a);
                Ok((s, a))
            }
            Resm::Concat(l, r) => {
                let (ls, la) = self.fragment(l)?;
                let (rs, ra) = self.fragment(r)?;
                self.eps(s, ls);
                self.eps(la, rs);
                Ok((s, ra))
            }
            Resm::Star(inner) => {
                let (is, ia) = self.fragment(inner)?;
                let a = self.state();
                self.eps(s, is);
                self.eps(s, a);
                self.eps(ia, is);
                self.eps(ia, a);
                Ok((s, a))
            }
        }
    }
}

impl ResmAutomaton {
    /// Binds names against `olap` and translates the expression.
    pub fn compile(e: &Resm, olap: &Olap) -> Result<Self, ResmError> {
        let mut b = Builder { olap, states: Vec::new(), predicates: Vec::new() };
        let (start, accept) = b.fragment(e)?;
        Ok(ResmAutomaton { states: b.states, predicates: b.predicates, start, accept })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    fn close(&self, set: &mut [bool], stack: &mut Vec<usize>) {
        while let Some(q) = stack.pop() {
            for &r in &self.states[q].eps {
                if !set[r] {
                    set[r] = true;
                    stack.push(r);
                }
            }
        }
    }

    fn add(&self, set: &mut [bool], q: usize, stack: &mut Vec<usize>) {
        if !set[q] {
            set[q] = true;
            stack.push(q);
            self.close(set, stack);
        }
    }

    /// Whether the automaton accepts exactly `seq`.
    pub fn accepts(&self, seq: &[StopEvent], olap: &Olap) -> Result<bool, ResmError> {
        self.run(seq, olap, false)
    }

    /// Whether some contiguous sub-sequence of `seq` (possibly empty) is
    /// accepted.
    pub fn matches(&self, seq: &[StopEvent], olap: &Olap) -> Result<bool, ResmError> {
        self.run(seq, olap, true)
    }

    fn run(&self, seq: &[StopEvent], olap: &Olap, unanchored: bool) -> Result<bool, ResmError> {
        let n = self.states.len();
        let mut current = vec![false; n];
        let mut stack = Vec::new();
        self.add(&mut current, self.start, &mut stack);
        if unanchored && current[self.accept] {
            return Ok(true);
        }
        let mut verdicts: Vec<Option<bool>> = vec![None; self.predicates.len()];
        for stop in seq {
            verdicts.iter_mut().for_each(|v| *v = None);
            let mut next = vec![false; n];
            for q in (0..n).filter(|&q| current[q]) {
                for &(p, r) in &self.states[q].moves {
                    let ok = match verdicts[p] {
                        Some(v) => v,
                        None => {
                            let v = self.predicates[p].test(stop, olap)?;
                            verdicts[p] = Some(v);
                            v
                        }
                    };
                    if ok {
                        self.add(&mut next, r, &mut stack);
                    }
                }
            }
            if unanchored {
                // a match may begin at any later position
                self.add(&mut next, self.start, &mut stack);
                if next[self.accept] {
                    return Ok(true);
                }
            }
            current = next;
            if !unanchored && !current.iter().any(|&b| b) {
                return Ok(false);
            }
        }
        Ok(current[self.accept])
    }
}
