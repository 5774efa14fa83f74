//! Carrying-state algebra: which passengers are on board.
//!
//! A state space is built per vehicle over that vehicle's candidate
//! passengers (local indices `0..n`). States are ordered by popcount and then
//! lexicographically by member list, so index 0 is always the empty state.

use std::fmt;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Largest number of passengers a single state space can track.
pub const MAX_PASSENGERS: usize = 128;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CarryingState {
    bits: u128,
}

impl CarryingState {
    pub const EMPTY: CarryingState = CarryingState { bits: 0 };

    pub fn from_members(members: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::EMPTY;
        for p in members {
            s = s.with(p);
        }
        s
    }

    #[inline]
    pub fn contains(self, p: usize) -> bool {
        self.bits >> p & 1 == 1
    }

    #[inline]
    pub fn with(self, p: usize) -> Self {
        CarryingState {
            bits: self.bits | 1 << p,
        }
    }

    #[inline]
    pub fn without(self, p: usize) -> Self {
        CarryingState {
            bits: self.bits & !(1 << p),
        }
    }

    #[inline]
    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn bits(self) -> u128 {
        self.bits
    }

    /// Members in ascending order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let p = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(p)
        })
    }

    /// Binary rendering over `n` passengers, e.g. `[0,1,1]`.
    pub fn binary(self, n: usize) -> String {
        let parts: Vec<&str> = (0..n).map(|p| if self.contains(p) { "1" } else { "0" }).collect();
        format!("[{}]", parts.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transition {
    Pickup(usize),
    Dropoff(usize),
    Neutral,
}

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct StateSpace {
    passengers: usize,
    capacity: usize,
    states: Vec<CarryingState>,
    lookup: FxHashMap<CarryingState, u32>,
    pickup: Vec<u32>,
    dropoff: Vec<u32>,
}

/// Enumerates every state with at most `capacity` members that contains no
/// pair from `pruned_pairs`, together with the pickup/dropoff transition
/// tables restricted to surviving states.
pub fn enumerate_states(
    passengers: usize,
    capacity: usize,
    pruned_pairs: &[(usize, usize)],
) -> Result<StateSpace> {
    if capacity == 0 {
        return Err(Error::Domain("state space capacity must be at least 1".into()));
    }
    if passengers > MAX_PASSENGERS {
        return Err(Error::Domain(format!(
            "a state space tracks at most {MAX_PASSENGERS} passengers, got {passengers}"
        )));
    }
    let mut conflicts = vec![0u128; passengers];
    for &(a, b) in pruned_pairs {
        if a >= passengers || b >= passengers || a == b {
            return Err(Error::Domain(format!("pruned pair ({a}, {b}) is out of range")));
        }
        conflicts[a] |= 1 << b;
        conflicts[b] |= 1 << a;
    }

    // Level k is built from level k-1 by appending a larger, compatible
    // member; this keeps each level in lexicographic order.
    let mut states = vec![CarryingState::EMPTY];
    let mut level: Vec<(CarryingState, usize)> = vec![(CarryingState::EMPTY, 0)];
    for _ in 0..capacity.min(passengers) {
        let mut next = Vec::new();
        for &(s, from) in &level {
            for (p, &conflict) in conflicts.iter().enumerate().skip(from) {
                if conflict & s.bits == 0 {
                    next.push((s.with(p), p + 1));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        states.extend(next.iter().map(|x| x.0));
        level = next;
    }

    let lookup: FxHashMap<CarryingState, u32> =
        states.iter().enumerate().map(|(i, s)| (*s, i as u32)).collect();
    let mut pickup = vec![NONE; states.len() * passengers];
    let mut dropoff = vec![NONE; states.len() * passengers];
    for (w, s) in states.iter().enumerate() {
        for p in 0..passengers {
            let slot = w * passengers + p;
            if s.contains(p) {
                dropoff[slot] = lookup[&s.without(p)];
            } else if s.len() < capacity {
                if let Some(&t) = lookup.get(&s.with(p)) {
                    pickup[slot] = t;
                }
            }
        }
    }
    Ok(StateSpace {
        passengers,
        capacity,
        states,
        lookup,
        pickup,
        dropoff,
    })
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn passengers(&self) -> usize {
        self.passengers
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn state(&self, w: usize) -> CarryingState {
        self.states[w]
    }

    pub fn states(&self) -> &[CarryingState] {
        &self.states
    }

    pub fn index_of(&self, s: CarryingState) -> Option<usize> {
        self.lookup.get(&s).map(|&w| w as usize)
    }

    #[inline]
    pub fn pickup(&self, w: usize, p: usize) -> Option<usize> {
        let t = self.pickup[w * self.passengers + p];
        (t != NONE).then_some(t as usize)
    }

    #[inline]
    pub fn dropoff(&self, w: usize, p: usize) -> Option<usize> {
        let t = self.dropoff[w * self.passengers + p];
        (t != NONE).then_some(t as usize)
    }

    pub fn transition(&self, w: usize, t: Transition) -> Result<Option<usize>> {
        if w >= self.states.len() {
            return Err(Error::Domain(format!(
                "state index {w} is not in a space of {} states",
                self.states.len()
            )));
        }
        let check = |p: usize| {
            if p >= self.passengers {
                Err(Error::Domain(format!("passenger index {p} out of range")))
            } else {
                Ok(())
            }
        };
        Ok(match t {
            Transition::Pickup(p) => {
                check(p)?;
                self.pickup(w, p)
            }
            Transition::Dropoff(p) => {
                check(p)?;
                self.dropoff(w, p)
            }
            Transition::Neutral => Some(w),
        })
    }

    /// Character rendering with default labels `p1`, `p2`, ...
    pub fn format_state(&self, w: usize) -> String {
        format_members(self.states[w], self.passengers, |p| format!("p{}", p + 1))
    }

    /// Character rendering with caller-supplied labels, one per passenger.
    pub fn format_state_with(&self, w: usize, labels: &[String]) -> String {
        format_members(self.states[w], self.passengers, |p| labels[p].clone())
    }
}

fn format_members(s: CarryingState, n: usize, label: impl Fn(usize) -> String) -> String {
    let parts: Vec<String> = (0..n)
        .map(|p| if s.contains(p) { label(p) } else { "-".to_string() })
        .collect();
    format!("[{}]", parts.join(" "))
}

impl fmt::Display for CarryingState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members().map(|p| format!("p{}", p + 1)).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
