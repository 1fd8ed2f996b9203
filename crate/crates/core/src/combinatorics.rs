//! Renormalization combinatorics: ordered, marked interval cycles, their
//! canonical form, the `*`-product, factorization and extraction.
//!
//! A valid combinatorial datum is a single π-cycle through all `N·m`
//! labels, so every label is `π^t(P)` for a unique `t < N·m`. The canonical
//! form records, for each time `t`, the position of label `π^t(P)` on its
//! fiber (fiber `t mod N`). Two data are equivalent exactly when these
//! tables agree.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::boxmap::ExtendedMap;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::renorm::PeriodicInterval;

/// Explicit labelled form ⟨A, A^Crit, π, P, m⟩ with labels `0..N·m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinatorialData {
    pub n_type: usize,
    pub m: usize,
    /// Labels of each fiber, ordered left to right.
    pub intervals: Vec<Vec<usize>>,
    /// The critical label of each fiber.
    pub crit_marks: Vec<usize>,
    /// `pi[label]` is the image label.
    pub pi: Vec<usize>,
    /// The critical label on fiber 0.
    pub marked_p: usize,
}

/// Equivalence class of a [`CombinatorialData`], in time-indexed form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Combinatorics {
    n_type: usize,
    m: usize,
    /// `pos[t]`: position of `π^t(P)` on fiber `t mod N`.
    pos: Vec<usize>,
    /// `crit[f]`: the time of the critical label of fiber `f`.
    crit: Vec<usize>,
}

impl CombinatorialData {
    fn label_fiber(&self) -> Result<Vec<usize>> {
        let k = self.n_type * self.m;
        let mut fiber = vec![usize::MAX; k];
        for (f, labels) in self.intervals.iter().enumerate() {
            for &l in labels {
                if l >= k || fiber[l] != usize::MAX {
                    return Err(Error::InvalidCombinatorics("labels must be 0..N*m, each used once"));
                }
                fiber[l] = f;
            }
        }
        Ok(fiber)
    }

    /// Check every defining property, returning the first violated one.
    pub fn validate(&self) -> Result<()> {
        canonical_form(self).map(|_| ())
    }
}

/// Canonical representative of a datum; validates it on the way.
pub fn canonical_form(data: &CombinatorialData) -> Result<Combinatorics> {
    let (n, m) = (data.n_type, data.m);
    if n == 0 {
        return Err(Error::InvalidCombinatorics("N must be positive"));
    }
    if m < 2 {
        return Err(Error::InvalidCombinatorics("m must be at least 2"));
    }
    if data.intervals.len() != n || data.intervals.iter().any(|v| v.len() != m) {
        return Err(Error::InvalidCombinatorics("each fiber needs exactly m labels"));
    }
    let k = n * m;
    if data.pi.len() != k || data.crit_marks.len() != n {
        return Err(Error::InvalidCombinatorics("table sizes do not match N*m"));
    }
    let fiber = data.label_fiber()?;
    let mut position = vec![0usize; k];
    for labels in &data.intervals {
        for (q, &l) in labels.iter().enumerate() {
            position[l] = q;
        }
    }
    for (f, &c) in data.crit_marks.iter().enumerate() {
        if c >= k || fiber[c] != f {
            return Err(Error::InvalidCombinatorics("critical mark must lie on its own fiber"));
        }
    }
    if data.marked_p != data.crit_marks[0] {
        return Err(Error::InvalidCombinatorics("P must be the critical label of fiber 0"));
    }
    let mut seen = vec![false; k];
    for l in 0..k {
        let img = data.pi[l];
        if img >= k || seen[img] {
            return Err(Error::InvalidCombinatorics("pi is not a permutation"));
        }
        seen[img] = true;
        if fiber[img] != (fiber[l] + 1) % n {
            return Err(Error::InvalidCombinatorics("pi must map fiber j to fiber j+1"));
        }
    }
    let mut pos = Vec::with_capacity(k);
    let mut time_of = vec![usize::MAX; k];
    let mut l = data.marked_p;
    for t in 0..k {
        if time_of[l] != usize::MAX {
            return Err(Error::InvalidCombinatorics("pi is not a single cycle through all labels"));
        }
        time_of[l] = t;
        pos.push(position[l]);
        l = data.pi[l];
    }
    let crit = data.crit_marks.iter().map(|&c| time_of[c]).collect();
    Combinatorics::from_times(n, m, pos, crit)
}

impl Combinatorics {
    /// Build from the time-indexed position table, validating everything.
    pub fn from_times(n_type: usize, m: usize, pos: Vec<usize>, crit: Vec<usize>) -> Result<Self> {
        let c = Combinatorics {
            n_type,
            m,
            pos,
            crit,
        };
        c.check()?;
        Ok(c)
    }

    /// The period-doubling combinatorics of type 1.
    pub fn doubling() -> Self {
        Combinatorics::from_times(1, 2, vec![0, 1], vec![0]).expect("valid")
    }

    /// The unique period-3 combinatorics of type 1.
    pub fn period_three() -> Self {
        Combinatorics::from_times(1, 3, vec![1, 2, 0], vec![0]).expect("valid")
    }

    fn check(&self) -> Result<()> {
        let (n, m) = (self.n_type, self.m);
        if n == 0 {
            return Err(Error::InvalidCombinatorics("N must be positive"));
        }
        if m < 2 {
            return Err(Error::InvalidCombinatorics("m must be at least 2"));
        }
        let k = n * m;
        if self.pos.len() != k || self.crit.len() != n {
            return Err(Error::InvalidCombinatorics("table sizes do not match N*m"));
        }
        let mut used = vec![false; k];
        for (t, &q) in self.pos.iter().enumerate() {
            let g = (t % n) * m + q;
            if q >= m || used[g] {
                return Err(Error::InvalidCombinatorics("positions per fiber must be a permutation"));
            }
            used[g] = true;
        }
        if self.crit[0] != 0 {
            return Err(Error::InvalidCombinatorics("P must be the critical label of fiber 0"));
        }
        for (f, &c) in self.crit.iter().enumerate() {
            if c >= k || c % n != f {
                return Err(Error::InvalidCombinatorics("critical mark must lie on its own fiber"));
            }
        }
        // Monotonicity of π around each critical label: increasing to the
        // left, decreasing to the right, and π(c) rightmost.
        for f in 0..n {
            let c = self.crit[f];
            let cp = self.pos[c];
            if self.pos[(c + 1) % k] != m - 1 {
                return Err(Error::InvalidCombinatorics("image of a critical label must be rightmost"));
            }
            let times: Vec<usize> = (f..k).step_by(n).collect();
            for &a in &times {
                for &b in &times {
                    let (pa, pb) = (self.pos[a], self.pos[b]);
                    if pa >= pb || a == c || b == c {
                        continue;
                    }
                    let (ia, ib) = (self.pos[(a + 1) % k], self.pos[(b + 1) % k]);
                    if pb < cp && ia > ib {
                        return Err(Error::InvalidCombinatorics("pi must increase left of the critical label"));
                    }
                    if pa > cp && ia < ib {
                        return Err(Error::InvalidCombinatorics("pi must decrease right of the critical label"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_type(&self) -> usize {
        self.n_type
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Period `N·m` of the label cycle.
    pub fn cycle_len(&self) -> usize {
        self.n_type * self.m
    }

    /// Position of `π^t(P)` on its fiber.
    pub fn position(&self, t: usize) -> usize {
        self.pos[t]
    }

    pub fn positions(&self) -> &[usize] {
        &self.pos
    }

    /// Time of the critical label on each fiber.
    pub fn crit_times(&self) -> &[usize] {
        &self.crit
    }

    /// Critical times in increasing order (the visit order used for the
    /// fibers of the renormalized map).
    pub fn sorted_crit_times(&self) -> Vec<usize> {
        let mut t = self.crit.clone();
        t.sort_unstable();
        t
    }

    /// Explicit data with label `t` standing for `π^t(P)`.
    pub fn to_data(&self) -> CombinatorialData {
        let (n, m, k) = (self.n_type, self.m, self.cycle_len());
        let mut intervals = vec![vec![0usize; m]; n];
        for t in 0..k {
            intervals[t % n][self.pos[t]] = t;
        }
        CombinatorialData {
            n_type: n,
            m,
            intervals,
            crit_marks: self.crit.clone(),
            pi: (0..k).map(|t| (t + 1) % k).collect(),
            marked_p: 0,
        }
    }

    /// The versioned canonical string.
    pub fn canonical(&self) -> String {
        format!("{self}")
    }

    /// Parse a canonical string; every field is cross-checked.
    pub fn parse(s: &str) -> Result<Self> {
        parse_canonical(s).ok_or(Error::Parse)
    }

    pub fn is_primitive(&self) -> Result<bool> {
        Ok(factorize(self)?.len() == 1)
    }
}

impl fmt::Display for Combinatorics {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, m, k) = (self.n_type, self.m, self.cycle_len());
        let data = self.to_data();
        write!(out, "v1;N={n};m={m};ord=")?;
        for (f, labels) in data.intervals.iter().enumerate() {
            if f > 0 {
                write!(out, "/")?;
            }
            write_list(out, labels.iter().copied())?;
        }
        write!(out, ";pi=")?;
        let global = |t: usize| (t % n) * m + self.pos[t];
        let mut table = vec![0usize; k];
        for t in 0..k {
            table[global(t)] = global((t + 1) % k);
        }
        write_list(out, table.into_iter())?;
        write!(out, ";crit=")?;
        write_list(out, self.crit.iter().map(|&c| self.pos[c]))?;
        write!(out, ";P={}", global(0))
    }
}

fn write_list(out: &mut fmt::Formatter<'_>, items: impl Iterator<Item = usize>) -> fmt::Result {
    for (i, v) in items.enumerate() {
        if i > 0 {
            write!(out, ",")?;
        }
        write!(out, "{v}")?;
    }
    Ok(())
}

fn parse_list(s: &str) -> Option<Vec<usize>> {
    s.split(',')
        .map(|t| {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                None
            } else {
                t.parse().ok()
            }
        })
        .collect()
}

fn parse_canonical(s: &str) -> Option<Combinatorics> {
    let mut parts = s.trim().split(';');
    if parts.next()? != "v1" {
        return None;
    }
    let n: usize = parts.next()?.strip_prefix("N=")?.parse().ok()?;
    let m: usize = parts.next()?.strip_prefix("m=")?.parse().ok()?;
    let ord = parts.next()?.strip_prefix("ord=")?;
    let pi = parse_list(parts.next()?.strip_prefix("pi=")?)?;
    let crit_pos = parse_list(parts.next()?.strip_prefix("crit=")?)?;
    let p: usize = parts.next()?.strip_prefix("P=")?.parse().ok()?;
    if parts.next().is_some() || n == 0 || m < 2 || n.checked_mul(m)? > 1 << 20 {
        return None;
    }
    let k = n * m;
    let fibers: Vec<Vec<usize>> = ord.split('/').map(parse_list).collect::<Option<_>>()?;
    if fibers.len() != n || crit_pos.len() != n {
        return None;
    }
    let mut pos = vec![usize::MAX; k];
    for (f, labels) in fibers.iter().enumerate() {
        if labels.len() != m {
            return None;
        }
        for (q, &t) in labels.iter().enumerate() {
            if t >= k || t % n != f || pos[t] != usize::MAX {
                return None;
            }
            pos[t] = q;
        }
    }
    let crit: Vec<usize> = crit_pos
        .iter()
        .enumerate()
        .map(|(f, &q)| fibers[f].get(q).copied())
        .collect::<Option<_>>()?;
    let c = Combinatorics::from_times(n, m, pos, crit).ok()?;
    // The redundant fields must agree with the order data.
    let canonical = c.canonical();
    let expect_tail = canonical.split(";pi=").nth(1)?;
    let given_tail = format!(
        "{};crit={};P={}",
        join(&pi),
        join(&crit_pos),
        p
    );
    (expect_tail == given_tail).then_some(c)
}

fn join(v: &[usize]) -> String {
    let mut s = String::new();
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("{x}"));
    }
    s
}

/// Visit index of the critical label reached next after leaving label `i`
/// ("offset"), and the orientation with which the sublabels of `i` are laid
/// out, for the product construction.
struct Layout {
    offset: Vec<usize>,
    flip: Vec<bool>,
}

fn layout(c: &Combinatorics) -> Layout {
    let (n, k) = (c.n_type, c.cycle_len());
    let t = c.sorted_crit_times();
    let crit_pos: Vec<usize> = c.crit.iter().map(|&ct| c.pos[ct]).collect();
    // Label s lies on the decreasing side of its fiber's critical label.
    let reverses = |s: usize| c.pos[s] > crit_pos[s % n];
    let mut offset = vec![0usize; k];
    let mut flip = vec![false; k];
    for i in 0..k {
        // Labels in (t[r-1], t[r]] get offset r; label 0 closes the cycle
        // and is reached after the last critical label.
        let (r, end) = if i == 0 {
            (0, k)
        } else {
            (t.iter().take_while(|&&tr| tr < i).count(), i)
        };
        offset[i] = r;
        let start = if i == 0 || r == n { t[n - 1] } else { t[r - 1] };
        flip[i] = (start + 1..end).filter(|&s| reverses(s)).count() % 2 == 1;
    }
    Layout { offset, flip }
}

/// `M1 * M2`: each label of `M1` is subdivided into the `m2` labels of `M2`.
pub fn product(m1: &Combinatorics, m2: &Combinatorics) -> Result<Combinatorics> {
    if m1.n_type != m2.n_type {
        return Err(Error::NMismatch {
            left: m1.n_type,
            right: m2.n_type,
        });
    }
    let n = m1.n_type;
    let (k1, k2) = (m1.cycle_len(), m2.cycle_len());
    let mm2 = m2.m;
    let lay = layout(m1);
    let k = k1 * mm2;
    let mut pos = vec![0usize; k];
    for (tau, slot) in pos.iter_mut().enumerate() {
        let (i, q) = (tau % k1, tau / k1);
        let j = (q * n + lay.offset[i]) % k2;
        let sub = if lay.flip[i] { mm2 - 1 - m2.pos[j] } else { m2.pos[j] };
        *slot = m1.pos[i] * mm2 + sub;
    }
    let t1 = m1.sorted_crit_times();
    let mut crit = vec![0usize; n];
    for (r, &tr) in t1.iter().enumerate() {
        let j = m2.crit[r];
        let q = (j - r) / n;
        crit[tr % n] = q * k1 + tr;
    }
    Combinatorics::from_times(n, m1.m * mm2, pos, crit)
}

/// Split `M = M1 * M2` with `m(M1) = m1`, if such a decomposition exists.
pub fn decompose(mc: &Combinatorics, m1: usize) -> Option<(Combinatorics, Combinatorics)> {
    let (n, m) = (mc.n_type, mc.m);
    if m1 < 2 || m % m1 != 0 || m / m1 < 2 {
        return None;
    }
    let mm2 = m / m1;
    let k1 = n * m1;
    let k2 = n * mm2;
    let k = n * m;
    // Blocks {τ ≡ i mod k1} must be contiguous runs of length m2.
    let mut pos1 = vec![0usize; k1];
    for i in 0..k1 {
        let lo = (i..k).step_by(k1).map(|t| mc.pos[t]).min()?;
        let hi = (i..k).step_by(k1).map(|t| mc.pos[t]).max()?;
        if hi - lo + 1 != mm2 || lo % mm2 != 0 {
            return None;
        }
        pos1[i] = lo / mm2;
    }
    let crit1: Vec<usize> = mc.crit.iter().map(|&c| c % k1).collect();
    let outer = Combinatorics::from_times(n, m1, pos1, crit1).ok()?;
    let lay = layout(&outer);
    let mut pos2 = vec![usize::MAX; k2];
    for tau in 0..k {
        let (i, q) = (tau % k1, tau / k1);
        let j = (q * n + lay.offset[i]) % k2;
        let sub = mc.pos[tau] - outer.pos[i] * mm2;
        let v = if lay.flip[i] { mm2 - 1 - sub } else { sub };
        if pos2[j] == usize::MAX {
            pos2[j] = v;
        } else if pos2[j] != v {
            return None;
        }
    }
    let t1 = outer.sorted_crit_times();
    let mut crit2 = vec![0usize; n];
    for (r, &tr) in t1.iter().enumerate() {
        let c = mc.crit[tr % n];
        if c % k1 != tr {
            return None;
        }
        crit2[r] = ((c / k1) * n + r) % k2;
    }
    let inner = Combinatorics::from_times(n, mm2, pos2, crit2).ok()?;
    (product(&outer, &inner).ok()? == *mc).then_some((outer, inner))
}

/// Largest `m` accepted by [`factorize`].
pub const FACTORIZE_CAP: usize = 64;

/// Primitive factors in tower order: `M = F_1 * F_2 * … * F_r`.
pub fn factorize(mc: &Combinatorics) -> Result<Vec<Combinatorics>> {
    if mc.m > FACTORIZE_CAP {
        return Err(Error::CombinatorialExplosion {
            m: mc.m,
            cap: FACTORIZE_CAP,
        });
    }
    let mut out = Vec::new();
    let mut rest = mc.clone();
    'outer: loop {
        for m1 in 2..rest.m {
            if let Some((a, b)) = decompose(&rest, m1) {
                out.push(a);
                rest = b;
                continue 'outer;
            }
        }
        out.push(rest);
        return Ok(out);
    }
}

/// Every valid combinatorics with the given `N` and `m`, in a fixed order.
pub fn enumerate_valid(n_type: usize, m: usize) -> Result<Vec<Combinatorics>> {
    let per_fiber = 1usize
        .checked_shl((m as u32).saturating_sub(1))
        .ok_or(Error::CombinatorialExplosion { m, cap: 24 })?;
    let total = per_fiber
        .checked_pow(n_type as u32)
        .filter(|&t| t <= 1 << 26)
        .ok_or(Error::CombinatorialExplosion { m, cap: 24 })?;
    if n_type == 0 || m < 2 {
        return Err(Error::InvalidArgument("need N >= 1 and m >= 2"));
    }
    // Unimodal bijection for a subset S of {0..m-2}: critical position |S|,
    // left labels increase onto S, right labels decrease onto the rest.
    let maps: Vec<(usize, Vec<usize>)> = (0..per_fiber)
        .map(|mask| {
            let left: Vec<usize> = (0..m - 1).filter(|b| mask >> b & 1 == 1).collect();
            let right: Vec<usize> = (0..m - 1).rev().filter(|b| mask >> b & 1 == 0).collect();
            let c = left.len();
            let mut sigma = Vec::with_capacity(m);
            sigma.extend_from_slice(&left);
            sigma.push(m - 1);
            sigma.extend_from_slice(&right);
            (c, sigma)
        })
        .collect();
    let k = n_type * m;
    let mut out = Vec::new();
    let mut choice = vec![0usize; n_type];
    let mut pos = vec![0usize; k];
    for mut idx in 0..total {
        for slot in choice.iter_mut() {
            *slot = idx % per_fiber;
            idx /= per_fiber;
        }
        let start = maps[choice[0]].0;
        let mut q = start;
        let mut ok = true;
        for (t, slot) in pos.iter_mut().enumerate() {
            if t > 0 && t % n_type == 0 && q == start {
                ok = false;
                break;
            }
            *slot = q;
            q = maps[choice[t % n_type]].1[q];
        }
        if !ok || q != start {
            continue;
        }
        let mut crit = vec![0usize; n_type];
        for (f, c) in crit.iter_mut().enumerate() {
            let cp = maps[choice[f]].0;
            *c = (f..k).step_by(n_type).find(|&t| pos[t] == cp).expect("cycle covers fiber");
        }
        if let Ok(c) = Combinatorics::from_times(n_type, m, pos.clone(), crit) {
            out.push(c);
        }
    }
    Ok(out)
}

/// Read the combinatorics of a verified periodic interval off its orbit.
pub fn extract<T: Real>(f: &ExtendedMap<T>, periodic: &PeriodicInterval<T>) -> Result<CombinatorialData> {
    let n = f.n_type();
    let orbit = periodic.orbit();
    let k = orbit.len();
    if k == 0 || k % n != 0 {
        return Err(Error::InvalidArgument("orbit length must be a multiple of N"));
    }
    let m = k / n;
    let mut intervals = vec![Vec::with_capacity(m); n];
    for fiber in 0..n {
        let mut labels: Vec<usize> = (fiber..k).step_by(n).collect();
        labels.sort_by(|&a, &b| orbit[a].center().total_cmp(&orbit[b].center()));
        for w in labels.windows(2) {
            let (a, b) = (&orbit[w[0]], &orbit[w[1]]);
            let tol = T::from_f64(1e-10) * a.length().max(b.length());
            if a.overlap(b) > tol {
                return Err(Error::OrderAmbiguity {
                    first: w[0],
                    second: w[1],
                });
            }
        }
        intervals[fiber] = labels;
    }
    let mut crit_marks = vec![0usize; n];
    for (fiber, mark) in crit_marks.iter_mut().enumerate() {
        *mark = periodic.visit_times()[fiber];
    }
    let data = CombinatorialData {
        n_type: n,
        m,
        intervals,
        crit_marks,
        pi: (0..k).map(|t| (t + 1) % k).collect(),
        marked_p: 0,
    };
    data.validate()?;
    Ok(data)
}
