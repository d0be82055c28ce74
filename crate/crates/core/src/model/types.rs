use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// A commuting mode. The derived ordering is the canonical order used for
/// every deterministic tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Bike,
    Bus,
    Car,
    Walk,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Bike, Mode::Bus, Mode::Car, Mode::Walk];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Bike => "bike",
            Mode::Bus => "bus",
            Mode::Car => "car",
            Mode::Walk => "walk",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bike" | "bicycle" => Ok(Mode::Bike),
            "bus" => Ok(Mode::Bus),
            "car" => Ok(Mode::Car),
            "walk" => Ok(Mode::Walk),
            _ => Err(ModelError::UnknownMode(s.to_string())),
        }
    }
}

/// One of the six evaluation criteria, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Ecology,
    Comfort,
    Price,
    Time,
    Practicality,
    Safety,
}

impl Criterion {
    pub const ALL: [Criterion; 6] = [
        Criterion::Ecology,
        Criterion::Comfort,
        Criterion::Price,
        Criterion::Time,
        Criterion::Practicality,
        Criterion::Safety,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Ecology => "ecology",
            Criterion::Comfort => "comfort",
            Criterion::Price => "price",
            Criterion::Time => "time",
            Criterion::Practicality => "practicality",
            Criterion::Safety => "safety",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ecology" => Ok(Criterion::Ecology),
            "comfort" => Ok(Criterion::Comfort),
            "price" | "cost" => Ok(Criterion::Price),
            "time" => Ok(Criterion::Time),
            "practicality" => Ok(Criterion::Practicality),
            "safety" => Ok(Criterion::Safety),
            _ => Err(ModelError::UnknownCriterion(s.to_string())),
        }
    }
}

/// One value per mode. Serializes as an object keyed by mode name.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerMode<T> {
    pub bike: T,
    pub bus: T,
    pub car: T,
    pub walk: T,
}

impl<T> PerMode<T> {
    pub fn from_fn(mut f: impl FnMut(Mode) -> T) -> Self {
        PerMode {
            bike: f(Mode::Bike),
            bus: f(Mode::Bus),
            car: f(Mode::Car),
            walk: f(Mode::Walk),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mode, &T)> {
        Mode::ALL.into_iter().map(move |m| (m, &self[m]))
    }

    pub fn map<U>(&self, mut f: impl FnMut(Mode, &T) -> U) -> PerMode<U> {
        PerMode::from_fn(|m| f(m, &self[m]))
    }

    pub fn try_from_fn<E>(mut f: impl FnMut(Mode) -> Result<T, E>) -> Result<Self, E> {
        Ok(PerMode {
            bike: f(Mode::Bike)?,
            bus: f(Mode::Bus)?,
            car: f(Mode::Car)?,
            walk: f(Mode::Walk)?,
        })
    }
}

impl<T> Index<Mode> for PerMode<T> {
    type Output = T;

    fn index(&self, m: Mode) -> &T {
        match m {
            Mode::Bike => &self.bike,
            Mode::Bus => &self.bus,
            Mode::Car => &self.car,
            Mode::Walk => &self.walk,
        }
    }
}

impl<T> IndexMut<Mode> for PerMode<T> {
    fn index_mut(&mut self, m: Mode) -> &mut T {
        match m {
            Mode::Bike => &mut self.bike,
            Mode::Bus => &mut self.bus,
            Mode::Car => &mut self.car,
            Mode::Walk => &mut self.walk,
        }
    }
}

/// One value per criterion. Serializes as an object keyed by criterion name.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerCriterion<T> {
    pub ecology: T,
    pub comfort: T,
    pub price: T,
    pub time: T,
    pub practicality: T,
    pub safety: T,
}

impl<T> PerCriterion<T> {
    pub fn from_fn(mut f: impl FnMut(Criterion) -> T) -> Self {
        PerCriterion {
            ecology: f(Criterion::Ecology),
            comfort: f(Criterion::Comfort),
            price: f(Criterion::Price),
            time: f(Criterion::Time),
            practicality: f(Criterion::Practicality),
            safety: f(Criterion::Safety),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Criterion, &T)> {
        Criterion::ALL.into_iter().map(move |c| (c, &self[c]))
    }

    pub fn map<U>(&self, mut f: impl FnMut(Criterion, &T) -> U) -> PerCriterion<U> {
        PerCriterion::from_fn(|c| f(c, &self[c]))
    }
}

impl PerCriterion<f64> {
    pub fn splat(v: f64) -> Self {
        Self::from_fn(|_| v)
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::from_fn(|c| a[c.index()])
    }

    pub fn to_array(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (c, v) in self.iter() {
            out[c.index()] = *v;
        }
        out
    }

    pub fn sum(&self) -> f64 {
        self.iter().map(|(_, v)| *v).sum()
    }
}

impl<T> Index<Criterion> for PerCriterion<T> {
    type Output = T;

    fn index(&self, c: Criterion) -> &T {
        match c {
            Criterion::Ecology => &self.ecology,
            Criterion::Comfort => &self.comfort,
            Criterion::Price => &self.price,
            Criterion::Time => &self.time,
            Criterion::Practicality => &self.practicality,
            Criterion::Safety => &self.safety,
        }
    }
}

impl<T> IndexMut<Criterion> for PerCriterion<T> {
    fn index_mut(&mut self, c: Criterion) -> &mut T {
        match c {
            Criterion::Ecology => &mut self.ecology,
            Criterion::Comfort => &mut self.comfort,
            Criterion::Price => &mut self.price,
            Criterion::Time => &mut self.time,
            Criterion::Practicality => &mut self.practicality,
            Criterion::Safety => &mut self.safety,
        }
    }
}

/// Six criterion weights on the 0..=10 Likert scale.
pub type PriorityVector = PerCriterion<f64>;

/// Checks that every priority is finite and within `[0, 10]`.
pub fn validate_priorities(p: &PriorityVector) -> Result<(), ModelError> {
    for (c, v) in p.iter() {
        if !v.is_finite() || !(0.0..=10.0).contains(v) {
            return Err(ModelError::OutOfRange {
                what: format!("priority {c}"),
                value: *v,
            });
        }
    }
    Ok(())
}

/// A 4x6 grid indexed by `(Mode, Criterion)`.
///
/// The same shape carries two kinds of content: value matrices (objective or
/// perceived scores in `[0, 10]`) and filter matrices (strictly positive
/// multiplicative factors). Use [`validate_values`](Self::validate_values) or
/// [`validate_factors`](Self::validate_factors) to check the relevant invariant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeCriterionMatrix(pub PerMode<PerCriterion<f64>>);

/// A matrix of multiplicative perception factors.
pub type FilterMatrix = ModeCriterionMatrix;

impl ModeCriterionMatrix {
    pub fn filled(v: f64) -> Self {
        Self::from_fn(|_, _| v)
    }

    /// The neutral filter: every factor is 1.
    pub fn ones() -> Self {
        Self::filled(1.0)
    }

    pub fn from_fn(mut f: impl FnMut(Mode, Criterion) -> f64) -> Self {
        ModeCriterionMatrix(PerMode::from_fn(|m| PerCriterion::from_fn(|c| f(m, c))))
    }

    /// Rows in canonical mode order, columns in canonical criterion order.
    pub fn from_rows(rows: [[f64; 6]; 4]) -> Self {
        Self::from_fn(|m, c| rows[m.index()][c.index()])
    }

    pub fn get(&self, m: Mode, c: Criterion) -> f64 {
        self.0[m][c]
    }

    pub fn set(&mut self, m: Mode, c: Criterion, v: f64) {
        self.0[m][c] = v;
    }

    pub fn row(&self, m: Mode) -> &PerCriterion<f64> {
        &self.0[m]
    }

    pub fn entries(&self) -> impl Iterator<Item = (Mode, Criterion, f64)> + '_ {
        Mode::ALL
            .into_iter()
            .flat_map(move |m| Criterion::ALL.into_iter().map(move |c| (m, c, self.get(m, c))))
    }

    pub fn map(&self, mut f: impl FnMut(Mode, Criterion, f64) -> f64) -> Self {
        Self::from_fn(|m, c| f(m, c, self.get(m, c)))
    }

    pub fn validate_values(&self) -> Result<(), ModelError> {
        for (m, c, v) in self.entries() {
            if !v.is_finite() || !(0.0..=10.0).contains(&v) {
                return Err(ModelError::OutOfRange {
                    what: format!("value ({m}, {c})"),
                    value: v,
                });
            }
        }
        Ok(())
    }

    pub fn validate_factors(&self) -> Result<(), ModelError> {
        for (m, c, v) in self.entries() {
            if !v.is_finite() || v <= 0.0 {
                return Err(ModelError::OutOfRange {
                    what: format!("filter factor ({m}, {c})"),
                    value: v,
                });
            }
        }
        Ok(())
    }
}
