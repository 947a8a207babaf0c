//! Contours as lattice paths (after translating 𝗈* to the origin) and an
//! incremental checker for the northeast splitting rule.

use crate::error::{Error, Result};
use crate::lattice::{dual_origin_map, dual_origin_unmap, Dir, Site, Translate};
use crate::level_lines::Contour;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Path {
    pub start: Site,
    pub steps: Vec<Dir>,
}

impl Path {
    pub fn new(start: Site, steps: Vec<Dir>) -> Self {
        Path { start, steps }
    }

    pub fn from_word(start: Site, word: &str) -> Result<Self> {
        let steps = word
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| Dir::from_letter(c).ok_or_else(|| Error::Invalid(format!("bad step letter {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Path { start, steps })
    }

    pub fn word(&self) -> String {
        self.steps.iter().map(|d| d.letter()).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn vertices(&self) -> Vec<Site> {
        let mut v = Vec::with_capacity(self.steps.len() + 1);
        let mut p = self.start;
        v.push(p);
        for d in &self.steps {
            p = p + d.delta();
            v.push(p);
        }
        v
    }

    pub fn end(&self) -> Site {
        self.steps.iter().fold(self.start, |p, d| p + d.delta())
    }

    pub fn displacement(&self) -> Site {
        self.end() - self.start
    }

    /// Oriented bonds as (tail vertex, direction).
    pub fn bonds(&self) -> Vec<(Site, Dir)> {
        let mut out = Vec::with_capacity(self.steps.len());
        let mut p = self.start;
        for &d in &self.steps {
            out.push((p, d));
            p = p + d.delta();
        }
        out
    }

    /// Whether the path is an open contour obeying the splitting rule with
    /// unrevisited endpoints.
    pub fn is_admissible(&self) -> bool {
        if self.steps.is_empty() {
            return false;
        }
        let mut t = Tracker::new(self.start, self.steps.len() as i64 + 1);
        for &d in &self.steps {
            if !t.can_step(d) {
                return false;
            }
            t.push(d);
        }
        t.can_end()
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn concat(&self, other: &Path) -> Result<Path> {
        if other.start != self.end() {
            return Err(Error::Invalid("concatenated paths do not meet".into()));
        }
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Ok(Path {
            start: self.start,
            steps,
        })
    }

    /// Sub-path between vertex indices `i ≤ j`.
    pub fn slice(&self, i: usize, j: usize) -> Path {
        let start = self.steps[..i].iter().fold(self.start, |p, d| p + d.delta());
        Path {
            start,
            steps: self.steps[i..j].to_vec(),
        }
    }

    /// The corresponding dual-lattice contour (undoing ι).
    pub fn to_contour(&self) -> Result<Contour> {
        Contour::from_steps(dual_origin_unmap(self.start), &self.steps)
    }

    pub fn from_contour(c: &Contour) -> Path {
        Path {
            start: dual_origin_map(c.start()),
            steps: c.steps(),
        }
    }
}

impl Translate for Path {
    fn translate(&self, v: Site) -> Self {
        Path {
            start: self.start + v,
            steps: self.steps.clone(),
        }
    }
}

#[inline]
fn bit(d: Dir) -> u8 {
    1 << d.index()
}

#[derive(Debug, Clone, Copy, Default)]
struct VState {
    used: u8,
    visits: u8,
    /// First visit paired two sides of the same northeast group, so a
    /// second pass through the remaining two sides is allowed.
    splittable: bool,
}

#[derive(Debug, Clone, Copy)]
struct Undo {
    p: usize,
    p_old: VState,
    q: usize,
    q_old: VState,
    in_side: Option<Dir>,
}

/// Grid-backed state of a path under construction.
///
/// A vertex may be visited twice only if the first visit used two sides of
/// the same group ({N,W} or {E,S}); the second visit then uses the other two.
/// The start vertex is never revisited, and a path may only end at a vertex
/// visited once.
#[derive(Debug, Clone)]
pub struct Tracker {
    radius: i64,
    side: i64,
    grid: Vec<VState>,
    start: Site,
    cur: Site,
    in_side: Option<Dir>,
    stack: Vec<Undo>,
}

impl Tracker {
    /// A tracker for paths that stay within `radius` (ℓ∞) of `start`.
    pub fn new(start: Site, radius: i64) -> Self {
        let side = 2 * radius + 3;
        let mut t = Tracker {
            radius: radius + 1,
            side,
            grid: vec![VState::default(); (side * side) as usize],
            start,
            cur: start,
            in_side: None,
            stack: Vec::new(),
        };
        let i = t.idx(start).unwrap();
        t.grid[i].visits = 1;
        t
    }

    #[inline]
    fn idx(&self, s: Site) -> Option<usize> {
        let dx = s.x - self.start.x + self.radius;
        let dy = s.y - self.start.y + self.radius;
        if dx < 0 || dy < 0 || dx >= self.side || dy >= self.side {
            None
        } else {
            Some((dy * self.side + dx) as usize)
        }
    }

    pub fn position(&self) -> Site {
        self.cur
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    pub fn visits(&self, s: Site) -> u8 {
        self.idx(s).map(|i| self.grid[i].visits).unwrap_or(0)
    }

    pub fn can_step(&self, d: Dir) -> bool {
        let Some(pi) = self.idx(self.cur) else { return false };
        let ps = self.grid[pi];
        if ps.used & bit(d) != 0 {
            return false;
        }
        let q = self.cur + d.delta();
        if q == self.start {
            return false;
        }
        let Some(qi) = self.idx(q) else { return false };
        let qs = self.grid[qi];
        match qs.visits {
            0 => true,
            1 => qs.splittable && qs.used & bit(d.opposite()) == 0,
            _ => false,
        }
    }

    pub fn push(&mut self, d: Dir) {
        let pi = self.idx(self.cur).unwrap();
        let q = self.cur + d.delta();
        let qi = self.idx(q).unwrap();
        self.stack.push(Undo {
            p: pi,
            p_old: self.grid[pi],
            q: qi,
            q_old: self.grid[qi],
            in_side: self.in_side,
        });
        let ps = &mut self.grid[pi];
        ps.used |= bit(d);
        if ps.visits == 1 {
            if let Some(a) = self.in_side {
                ps.splittable = a.ne_group() == d.ne_group();
            }
        }
        let qs = &mut self.grid[qi];
        qs.visits += 1;
        qs.used |= bit(d.opposite());
        self.in_side = Some(d.opposite());
        self.cur = q;
    }

    pub fn pop(&mut self) {
        let u = self.stack.pop().expect("pop on empty tracker");
        self.grid[u.p] = u.p_old;
        self.grid[u.q] = u.q_old;
        self.in_side = u.in_side;
        self.cur = self.cur - self.last_delta(u);
    }

    fn last_delta(&self, u: Undo) -> Site {
        let s = self.side as usize;
        let (px, py) = ((u.p % s) as i64, (u.p / s) as i64);
        let (qx, qy) = ((u.q % s) as i64, (u.q / s) as i64);
        Site::new(qx - px, qy - py)
    }

    /// The current vertex can be the endpoint of a contour.
    pub fn can_end(&self) -> bool {
        self.depth() > 0 && self.visits(self.cur) == 1
    }
}

/// Depth-first enumeration of admissible paths from `start`.
///
/// `prune(tracker, steps)` is called after every push; returning true cuts
/// the branch. `emit(tracker, steps)` is called at every reachable endpoint
/// (including intermediate depths) where the path may legally end.
pub fn enumerate_paths<P, E>(start: Site, max_len: usize, first: &[Dir], mut prune: P, mut emit: E)
where
    P: FnMut(&Tracker, &[Dir]) -> bool,
    E: FnMut(&Tracker, &[Dir]),
{
    let mut t = Tracker::new(start, max_len as i64 + 1);
    let mut steps: Vec<Dir> = Vec::with_capacity(max_len);
    fn rec<P, E>(t: &mut Tracker, steps: &mut Vec<Dir>, max_len: usize, allowed: &[Dir], prune: &mut P, emit: &mut E)
    where
        P: FnMut(&Tracker, &[Dir]) -> bool,
        E: FnMut(&Tracker, &[Dir]),
    {
        if steps.len() == max_len {
            return;
        }
        for &d in allowed {
            if !t.can_step(d) {
                continue;
            }
            t.push(d);
            steps.push(d);
            if !prune(t, steps) {
                if t.can_end() {
                    emit(t, steps);
                }
                rec(t, steps, max_len, &Dir::ALL, prune, emit);
            }
            steps.pop();
            t.pop();
        }
    }
    let first = if first.is_empty() { &Dir::ALL[..] } else { first };
    rec(&mut t, &mut steps, max_len, first, &mut prune, &mut emit);
}
