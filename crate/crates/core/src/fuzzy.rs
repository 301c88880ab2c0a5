//! Triangular fuzzy numbers and the nine-grade linguistic judgment scale.
//!
//! Arithmetic is componentwise, the usual approximation for positive
//! triangular numbers. Addition tolerates zero components so that running
//! sums can start from zero; reciprocal and root demand strictly positive
//! components.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FahpError, Result};

/// A triangular fuzzy number `(l, m, u)` with `l <= m <= u`.
///
/// Serialized as a three-element array `[l, m, u]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", try_from = "[f64; 3]")]
pub struct Tfn {
    l: f64,
    m: f64,
    u: f64,
}

impl Tfn {
    pub const ONE: Tfn = Tfn { l: 1.0, m: 1.0, u: 1.0 };
    pub const ZERO: Tfn = Tfn { l: 0.0, m: 0.0, u: 0.0 };

    pub fn new(l: f64, m: f64, u: f64) -> Result<Self> {
        if !(l.is_finite() && m.is_finite() && u.is_finite()) || l > m || m > u {
            return Err(FahpError::InvalidTfn { l, m, u });
        }
        Ok(Self { l, m, u })
    }

    /// A crisp value as a degenerate triangle.
    pub fn crisp(x: f64) -> Self {
        Self { l: x, m: x, u: x }
    }

    /// Builds a judgment value, which must additionally be strictly positive.
    pub fn positive(l: f64, m: f64, u: f64) -> Result<Self> {
        let t = Self::new(l, m, u)?;
        t.ensure_positive()?;
        Ok(t)
    }

    /// Builds without checking the ordering. Only for callers that need to
    /// represent malformed input, e.g. to report it.
    pub(crate) const fn new_unchecked(l: f64, m: f64, u: f64) -> Self {
        Self { l, m, u }
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn components(&self) -> [f64; 3] {
        [self.l, self.m, self.u]
    }

    pub fn is_ordered(&self) -> bool {
        self.l <= self.m && self.m <= self.u
    }

    pub fn is_positive(&self) -> bool {
        self.l > 0.0
    }

    fn ensure_positive(&self) -> Result<()> {
        if self.l > 0.0 {
            Ok(())
        } else {
            Err(FahpError::NonPositiveComponent { l: self.l, m: self.m, u: self.u })
        }
    }

    /// `(1/u, 1/m, 1/l)`.
    pub fn reciprocal(&self) -> Result<Self> {
        self.ensure_positive()?;
        Ok(Self { l: 1.0 / self.u, m: 1.0 / self.m, u: 1.0 / self.l })
    }

    /// Componentwise `k`-th root.
    pub fn root(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(FahpError::InvalidRootOrder);
        }
        self.ensure_positive()?;
        if k == 1 {
            return Ok(*self);
        }
        let e = 1.0 / f64::from(k);
        Ok(Self { l: self.l.powf(e), m: self.m.powf(e), u: self.u.powf(e) })
    }

    /// Degree of membership of `x`, piecewise linear with apex at `m`.
    pub fn membership(&self, x: f64) -> f64 {
        if x < self.l || x > self.u {
            0.0
        } else if x == self.m {
            1.0
        } else if x < self.m {
            (x - self.l) / (self.m - self.l)
        } else {
            (self.u - x) / (self.u - self.m)
        }
    }

    /// Centre-of-area defuzzification, `(l + m + u) / 3`.
    pub fn centroid(&self) -> f64 {
        (self.l + self.m + self.u) / 3.0
    }
}

impl Add for Tfn {
    type Output = Tfn;

    fn add(self, rhs: Tfn) -> Tfn {
        Tfn { l: self.l + rhs.l, m: self.m + rhs.m, u: self.u + rhs.u }
    }
}

impl Mul for Tfn {
    type Output = Tfn;

    fn mul(self, rhs: Tfn) -> Tfn {
        Tfn { l: self.l * rhs.l, m: self.m * rhs.m, u: self.u * rhs.u }
    }
}

impl std::iter::Sum for Tfn {
    fn sum<I: Iterator<Item = Tfn>>(iter: I) -> Tfn {
        iter.fold(Tfn::ZERO, Add::add)
    }
}

impl std::iter::Product for Tfn {
    fn product<I: Iterator<Item = Tfn>>(iter: I) -> Tfn {
        iter.fold(Tfn::ONE, Mul::mul)
    }
}

impl From<Tfn> for [f64; 3] {
    fn from(t: Tfn) -> Self {
        t.components()
    }
}

impl TryFrom<[f64; 3]> for Tfn {
    type Error = FahpError;

    fn try_from([l, m, u]: [f64; 3]) -> Result<Self> {
        Tfn::new(l, m, u)
    }
}

impl fmt::Display for Tfn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.l, self.m, self.u)
    }
}

pub fn tfn_add(a: Tfn, b: Tfn) -> Tfn {
    a + b
}

pub fn tfn_mul(a: Tfn, b: Tfn) -> Tfn {
    a * b
}

pub fn tfn_reciprocal(a: Tfn) -> Result<Tfn> {
    a.reciprocal()
}

pub fn tfn_root(a: Tfn, k: u32) -> Result<Tfn> {
    a.root(k)
}

pub fn membership(a: Tfn, x: f64) -> f64 {
    a.membership(x)
}

pub fn defuzzify_coa(a: Tfn) -> f64 {
    a.centroid()
}

/// The nine linguistic grades of the fuzzy pairwise comparison scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinguisticGrade {
    EquallyImportant,
    EquallyToModeratelyImportant,
    ModeratelyImportant,
    ModeratelyToStronglyImportant,
    StronglyImportant,
    StronglyToVeryStronglyImportant,
    VeryStronglyImportant,
    VeryStronglyToExtremelyImportant,
    ExtremelyImportant,
}

const GRADE_TABLE: [(LinguisticGrade, &str, [f64; 3]); 9] = [
    (LinguisticGrade::EquallyImportant, "Equally Important", [1.0, 1.0, 1.0]),
    (LinguisticGrade::EquallyToModeratelyImportant, "Equally to Moderately Important", [1.0, 2.0, 3.0]),
    (LinguisticGrade::ModeratelyImportant, "Moderately Important", [2.0, 3.0, 4.0]),
    (LinguisticGrade::ModeratelyToStronglyImportant, "Moderately to Strongly Important", [3.0, 4.0, 5.0]),
    (LinguisticGrade::StronglyImportant, "Strongly Important", [4.0, 5.0, 6.0]),
    (LinguisticGrade::StronglyToVeryStronglyImportant, "Strongly to Very Strongly Important", [5.0, 6.0, 7.0]),
    (LinguisticGrade::VeryStronglyImportant, "Very Strongly Important", [6.0, 7.0, 8.0]),
    (LinguisticGrade::VeryStronglyToExtremelyImportant, "Very Strongly to Extremely Important", [7.0, 8.0, 9.0]),
    (LinguisticGrade::ExtremelyImportant, "Extremely Important", [8.0, 9.0, 9.0]),
];

impl LinguisticGrade {
    pub const ALL: [LinguisticGrade; 9] = [
        LinguisticGrade::EquallyImportant,
        LinguisticGrade::EquallyToModeratelyImportant,
        LinguisticGrade::ModeratelyImportant,
        LinguisticGrade::ModeratelyToStronglyImportant,
        LinguisticGrade::StronglyImportant,
        LinguisticGrade::StronglyToVeryStronglyImportant,
        LinguisticGrade::VeryStronglyImportant,
        LinguisticGrade::VeryStronglyToExtremelyImportant,
        LinguisticGrade::ExtremelyImportant,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        GRADE_TABLE[self.index()].1
    }

    /// Position on the crisp 1..9 scale.
    pub fn saaty_value(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_saaty_value(v: u8) -> Option<Self> {
        Self::ALL.get(usize::from(v).checked_sub(1)?).copied()
    }

    pub fn tfn(self) -> Tfn {
        let [l, m, u] = GRADE_TABLE[self.index()].2;
        Tfn::new_unchecked(l, m, u)
    }

    pub fn reciprocal_tfn(self) -> Tfn {
        let [l, m, u] = GRADE_TABLE[self.index()].2;
        Tfn::new_unchecked(1.0 / u, 1.0 / m, 1.0 / l)
    }
}

impl fmt::Display for LinguisticGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LinguisticGrade {
    type Err = FahpError;

    /// Case-insensitive match on the grade label; runs of whitespace collapse.
    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.split_whitespace().collect::<Vec<_>>().join(" ");
        GRADE_TABLE
            .iter()
            .find(|(_, label, _)| label.eq_ignore_ascii_case(&wanted))
            .map(|(g, _, _)| *g)
            .ok_or_else(|| FahpError::UnknownGrade(s.to_owned()))
    }
}

impl Serialize for LinguisticGrade {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for LinguisticGrade {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A grade together with its direction: `inverted` selects the reciprocal
/// triangle, i.e. the column element is preferred over the row element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeChoice {
    pub grade: LinguisticGrade,
    #[serde(default)]
    pub inverted: bool,
}

impl GradeChoice {
    pub fn direct(grade: LinguisticGrade) -> Self {
        Self { grade, inverted: false }
    }

    pub fn inverted(grade: LinguisticGrade) -> Self {
        Self { grade, inverted: true }
    }

    pub fn tfn(self) -> Tfn {
        linguistic_to_tfn(self.grade, self.inverted)
    }

    /// The 17 distinct choices; the inverted equal grade is the same as the
    /// direct one and is left out.
    pub fn all() -> impl Iterator<Item = GradeChoice> {
        LinguisticGrade::ALL
            .into_iter()
            .map(GradeChoice::direct)
            .chain(LinguisticGrade::ALL[1..].iter().copied().map(GradeChoice::inverted))
    }

    /// The choice whose defuzzified value is closest to `value`.
    pub fn nearest(value: f64) -> GradeChoice {
        let mut best = GradeChoice::direct(LinguisticGrade::EquallyImportant);
        let mut best_dist = f64::INFINITY;
        for c in Self::all() {
            let d = (c.tfn().centroid() - value).abs();
            if d < best_dist {
                best = c;
                best_dist = d;
            }
        }
        best
    }

    /// Recovers the choice that produced `t`, if any.
    pub fn from_tfn(t: &Tfn) -> Option<GradeChoice> {
        Self::all().find(|c| {
            let g = c.tfn();
            [g.l, g.m, g.u].iter().zip([t.l, t.m, t.u]).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
        })
    }
}

impl fmt::Display for GradeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverted {
            write!(f, "{} (inverted)", self.grade)
        } else {
            write!(f, "{}", self.grade)
        }
    }
}

pub fn linguistic_to_tfn(grade: LinguisticGrade, inverted: bool) -> Tfn {
    if inverted {
        grade.reciprocal_tfn()
    } else {
        grade.tfn()
    }
}
