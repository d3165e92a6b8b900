use serde::{Deserialize, Serialize};

use super::{wrap_parameter, ArcLengthMap, TWO_PI};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Steklov,
    Neumann,
}

/// A boundary arc to be converted to Neumann: midpoint parameter and
/// arclength half-length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcSpec {
    pub center: f64,
    pub half_length: f64,
}

/// One arc of a partition, in unwrapped parameter coordinates `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcView {
    pub index: usize,
    pub start: f64,
    pub end: f64,
    pub label: Label,
}

impl ArcView {
    pub fn parameter_length(&self) -> f64 {
        self.end - self.start
    }

    fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

/// Cyclic list of labeled parameter arcs covering `[0, 2π)`.
///
/// Arc `i` is `[starts[i], starts[i+1])`, with the last arc closing at
/// `starts[0] + 2π`. `starts[0]` lies in `[0, 2π)` and the sequence is
/// non-decreasing, so zero-length arcs (markers) are representable and the
/// arcs tile the period exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPartition {
    starts: Vec<f64>,
    labels: Vec<Label>,
}

impl BoundaryPartition {
    pub fn all_steklov() -> Self {
        Self {
            starts: vec![0.0],
            labels: vec![Label::Steklov],
        }
    }

    /// Builds a partition from counterclockwise Neumann parameter intervals
    /// `(start, end)`; everything else is Steklov. `start == end` is a
    /// zero-length marker.
    pub fn from_neumann_arcs(arcs: &[(f64, f64)]) -> Result<Self> {
        if arcs.is_empty() {
            return Ok(Self::all_steklov());
        }
        let mut spans: Vec<(f64, f64)> = arcs
            .iter()
            .map(|&(a, b)| {
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::Partition(format!("non-finite arc ({a}, {b})")));
                }
                let a = wrap_parameter(a);
                let len = if a == wrap_parameter(b) && b - a < TWO_PI {
                    0.0
                } else {
                    let l = (b - a).rem_euclid(TWO_PI);
                    if l == 0.0 {
                        TWO_PI
                    } else {
                        l
                    }
                };
                Ok((a, len))
            })
            .collect::<Result<_>>()?;
        spans.sort_by(|x, y| x.0.total_cmp(&y.0));
        let total: f64 = spans.iter().map(|s| s.1).sum();
        if total > TWO_PI {
            return Err(Error::Partition("Neumann arcs overlap".into()));
        }
        let mut cyclic = Vec::with_capacity(2 * spans.len());
        for (i, &(a, len)) in spans.iter().enumerate() {
            let end = a + len;
            let next = if i + 1 < spans.len() {
                spans[i + 1].0
            } else {
                spans[0].0 + TWO_PI
            };
            if end > next + 1e-15 {
                return Err(Error::Partition(format!(
                    "Neumann arcs overlap near parameter {next}"
                )));
            }
            cyclic.push((a, Label::Neumann));
            if end < next {
                cyclic.push((end, Label::Steklov));
            }
        }
        Ok(Self::normalized(cyclic))
    }

    fn normalized(cyclic: Vec<(f64, Label)>) -> Self {
        let n = cyclic.len();
        let wrapped: Vec<f64> = cyclic.iter().map(|c| wrap_parameter(c.0)).collect();
        let k = (1..n).find(|&i| wrapped[i] < wrapped[i - 1]).unwrap_or(0);
        let mut starts = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for j in 0..n {
            let i = (k + j) % n;
            let mut s = wrapped[i];
            if let Some(&prev) = starts.last() {
                while s < prev {
                    s += TWO_PI;
                }
            }
            starts.push(s);
            labels.push(cyclic[i].1);
        }
        Self { starts, labels }
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn arc(&self, index: usize) -> ArcView {
        let end = if index + 1 < self.starts.len() {
            self.starts[index + 1]
        } else {
            self.starts[0] + TWO_PI
        };
        ArcView {
            index,
            start: self.starts[index],
            end,
            label: self.labels[index],
        }
    }

    pub fn arcs(&self) -> impl Iterator<Item = ArcView> + '_ {
        (0..self.len()).map(|i| self.arc(i))
    }

    pub fn neumann_arcs(&self) -> impl Iterator<Item = ArcView> + '_ {
        self.arcs().filter(|a| a.label == Label::Neumann)
    }

    pub fn is_all_steklov(&self) -> bool {
        self.arcs()
            .all(|a| a.label == Label::Steklov || a.parameter_length() == 0.0)
    }

    /// Shifts `t` into the unwrapped window `[starts[0], starts[0] + 2π)`.
    fn unwrap(&self, t: f64) -> f64 {
        let s0 = self.starts[0];
        let mut u = s0 + wrap_parameter(t - s0);
        if u >= s0 + TWO_PI {
            u = s0;
        }
        u
    }

    /// Index of the positive-length arc containing parameter `t`.
    pub fn arc_index_at(&self, t: f64) -> usize {
        let u = self.unwrap(t);
        self.arcs()
            .find(|a| a.contains(u))
            .map(|a| a.index)
            .unwrap_or(self.len() - 1)
    }

    pub fn label_at(&self, t: f64) -> Label {
        self.labels[self.arc_index_at(t)]
    }

    pub fn arc_arclength(&self, map: &ArcLengthMap, index: usize) -> f64 {
        let a = self.arc(index);
        map.arclength_at(a.end) - map.arclength_at(a.start)
    }

    /// Parameter of the arclength midpoint of an arc.
    pub fn arc_center(&self, map: &ArcLengthMap, index: usize) -> f64 {
        let a = self.arc(index);
        let mid = 0.5 * (map.arclength_at(a.start) + map.arclength_at(a.end));
        wrap_parameter(map.parameter_at(mid))
    }

    pub fn total_length(&self, map: &ArcLengthMap, label: Label) -> f64 {
        self.arcs()
            .filter(|a| a.label == label)
            .map(|a| map.arclength_at(a.end) - map.arclength_at(a.start))
            .sum()
    }

    /// Arclength of the `label` region inside the parameter window `[ta, tb]`
    /// (`0 ≤ tb − ta ≤ 2π`).
    pub fn measure_in(&self, map: &ArcLengthMap, label: Label, ta: f64, tb: f64) -> f64 {
        let mut total = 0.0;
        for arc in self.arcs().filter(|a| a.label == label) {
            for shift in [-TWO_PI, 0.0, TWO_PI, 2.0 * TWO_PI] {
                let lo = arc.start.max(ta + shift);
                let hi = arc.end.min(tb + shift);
                if hi > lo {
                    total += map.arclength_at(hi) - map.arclength_at(lo);
                }
            }
        }
        total
    }

    /// Relabels an arc of arclength `2ε` centred at `spec.center` as
    /// Neumann. Returns the new partition and the index of the inserted arc.
    pub fn insert_neumann_arc(&self, map: &ArcLengthMap, spec: ArcSpec) -> Result<(Self, usize)> {
        let eps = spec.half_length;
        if !(eps >= 0.0 && eps.is_finite() && spec.center.is_finite()) {
            return Err(Error::Partition(format!("invalid arc spec {spec:?}")));
        }
        let c = self.unwrap(spec.center);
        let host = self.arc(self.arc_index_at(c));
        if host.label != Label::Steklov {
            return Err(Error::Partition(format!(
                "arc centre {} lies in a Neumann arc",
                spec.center
            )));
        }
        let (lo, hi) = if eps == 0.0 {
            (c, c)
        } else {
            let sc = map.arclength_at(c);
            (map.parameter_at(sc - eps), map.parameter_at(sc + eps))
        };
        let single = self.len() == 1;
        let fits = if single {
            2.0 * eps < map.perimeter()
        } else {
            eps == 0.0 || (lo > host.start && hi < host.end)
        };
        if !fits {
            return Err(Error::Partition(format!(
                "Neumann arc of half-length {eps} does not fit inside the Steklov arc [{}, {})",
                host.start, host.end
            )));
        }

        let mut cyclic: Vec<(f64, Label)> = Vec::with_capacity(self.len() + 2);
        let mut inserted_at = 0;
        if single {
            cyclic.push((lo, Label::Neumann));
            cyclic.push((hi, Label::Steklov));
        } else {
            for arc in self.arcs() {
                if arc.index == host.index {
                    if lo > arc.start {
                        cyclic.push((arc.start, Label::Steklov));
                    }
                    inserted_at = cyclic.len();
                    cyclic.push((lo, Label::Neumann));
                    cyclic.push((hi, Label::Steklov));
                } else {
                    cyclic.push((arc.start, arc.label));
                }
            }
        }
        Ok(self.renormalized(cyclic, inserted_at))
    }

    /// Grows Neumann arc `index` by `delta` of arclength on both sides.
    pub fn extend_neumann_arc(&self, map: &ArcLengthMap, index: usize, delta: f64) -> Result<Self> {
        if index >= self.len() {
            return Err(Error::Partition(format!("no arc with index {index}")));
        }
        let arc = self.arc(index);
        if arc.label != Label::Neumann {
            return Err(Error::Partition(format!("arc {index} is not Neumann")));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Partition(format!("invalid extension {delta}")));
        }
        if delta == 0.0 {
            return Ok(self.clone());
        }
        let n = self.len();
        let prev = self.arc((index + n - 1) % n);
        let next = self.arc((index + 1) % n);
        if prev.label != Label::Steklov || next.label != Label::Steklov {
            return Err(Error::Partition(
                "extension collides with an adjacent Neumann arc".into(),
            ));
        }
        let room = |a: &ArcView| map.arclength_at(a.end) - map.arclength_at(a.start);
        let fits = if n == 2 {
            2.0 * delta < room(&prev)
        } else {
            delta < room(&prev) && delta < room(&next)
        };
        if !fits {
            return Err(Error::Partition(format!(
                "extension by {delta} exhausts the neighbouring Steklov arc"
            )));
        }
        let new_start = map.parameter_at(map.arclength_at(arc.start) - delta);
        let new_end = map.parameter_at(map.arclength_at(arc.end) + delta);
        let cyclic: Vec<(f64, Label)> = self
            .arcs()
            .map(|a| {
                if a.index == index {
                    (new_start, a.label)
                } else if a.index == next.index {
                    (new_end, a.label)
                } else {
                    (a.start, a.label)
                }
            })
            .collect();
        Ok(self.renormalized(cyclic, index).0)
    }

    /// Normalizes and maps a position in `cyclic` to its normalized index.
    fn renormalized(&self, cyclic: Vec<(f64, Label)>, position: usize) -> (Self, usize) {
        let n = cyclic.len();
        let wrapped: Vec<f64> = cyclic.iter().map(|c| wrap_parameter(c.0)).collect();
        let k = (1..n).find(|&i| wrapped[i] < wrapped[i - 1]).unwrap_or(0);
        (Self::normalized(cyclic), (position + n - k) % n)
    }
}
