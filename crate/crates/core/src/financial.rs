//! Bid-price stage over the technically qualified contractors.
//!
//! Amounts are integer minor units (two decimals) end to end; decimal strings
//! are parsed digit by digit and never go through floating point. The
//! difference recorded per contractor is `bid - estimate` and the smallest
//! difference wins.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FahpError, Result};

/// Currency amount in minor units (1/100 of the major unit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub const fn from_minor(minor: i64) -> Self {
        Money(minor)
    }

    pub const fn from_major(major: i64) -> Self {
        Money(major * 100)
    }

    pub fn minor(self) -> i64 {
        self.0
    }

    pub fn checked_add(self, rhs: Money) -> Option<Money> {
        self.0.checked_add(rhs.0).map(Money)
    }

    pub fn checked_sub(self, rhs: Money) -> Option<Money> {
        self.0.checked_sub(rhs.0).map(Money)
    }

    /// With thousands separators, e.g. `-1,468,495.12`.
    pub fn grouped(self) -> String {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let digits = (abs / 100).to_string();
        let mut major = String::with_capacity(digits.len() + digits.len() / 3);
        for (i, ch) in digits.chars().enumerate() {
            if i > 0 && (digits.len() - i) % 3 == 0 {
                major.push(',');
            }
            major.push(ch);
        }
        format!("{sign}{major}.{:02}", abs % 100)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl FromStr for Money {
    type Err = FahpError;

    /// Accepts an optional sign, comma thousands separators and up to two
    /// decimals: `143,034,460.84`, `-1468495.12`, `300000000`.
    fn from_str(s: &str) -> Result<Self> {
        let err = || FahpError::InvalidAmount(s.to_owned());
        let t = s.trim();
        let (neg, t) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        if int.is_empty() || frac.len() > 2 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        if int.contains(',') {
            let groups: Vec<&str> = int.split(',').collect();
            let ok = (1..=3).contains(&groups[0].len()) && groups[1..].iter().all(|g| g.len() == 3);
            if !ok {
                return Err(err());
            }
        }
        let mut major: i64 = 0;
        for b in int.bytes().filter(|&b| b != b',') {
            if !b.is_ascii_digit() {
                return Err(err());
            }
            major = major.checked_mul(10).and_then(|m| m.checked_add(i64::from(b - b'0'))).ok_or_else(err)?;
        }
        let mut cents: i64 = 0;
        for (i, b) in frac.bytes().enumerate() {
            cents += i64::from(b - b'0') * if i == 0 { 10 } else { 1 };
        }
        let minor = major.checked_mul(100).and_then(|m| m.checked_add(cents)).ok_or_else(err)?;
        Ok(Money(if neg { -minor } else { minor }))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Estimates at or above this require bid security (300,000,000.00).
pub const DEFAULT_BID_SECURITY_THRESHOLD: Money = Money::from_major(300_000_000);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bid {
    pub contractor_id: String,
    pub price: Money,
    #[serde(default)]
    pub security_document: Option<String>,
}

impl Bid {
    pub fn new(contractor_id: impl Into<String>, price: Money) -> Self {
        Self { contractor_id: contractor_id.into(), price, security_document: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.price > Money::ZERO {
            Ok(())
        } else {
            Err(FahpError::InvalidAmount(self.price.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BidDifference {
    pub contractor_id: String,
    pub bid: Money,
    pub difference: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinancialResult {
    pub estimate: Money,
    pub rows: Vec<BidDifference>,
    pub winner: String,
    /// Other contractors with the same minimum difference, if any.
    #[serde(default)]
    pub tied_with: Vec<String>,
    pub security_required: bool,
}

impl FinancialResult {
    pub fn winning_row(&self) -> &BidDifference {
        self.rows.iter().find(|r| r.contractor_id == self.winner).expect("winner is one of the rows")
    }
}

pub fn bid_security_required(estimate: Money, threshold: Money) -> bool {
    estimate >= threshold
}

/// `bid - estimate` for every bid; bids must come from `qualified`.
pub fn compute_differences(estimate: Money, bids: &[Bid], qualified: &[String]) -> Result<Vec<BidDifference>> {
    if bids.is_empty() {
        return Err(FahpError::Empty);
    }
    let allowed: HashSet<&str> = qualified.iter().map(String::as_str).collect();
    let mut seen = HashSet::new();
    bids.iter()
        .map(|b| {
            if !allowed.contains(b.contractor_id.as_str()) {
                return Err(FahpError::UnknownContractor(b.contractor_id.clone()));
            }
            if !seen.insert(b.contractor_id.as_str()) {
                return Err(FahpError::DuplicateBid(b.contractor_id.clone()));
            }
            b.validate()?;
            let difference =
                b.price.checked_sub(estimate).ok_or_else(|| FahpError::InvalidAmount(b.price.to_string()))?;
            Ok(BidDifference { contractor_id: b.contractor_id.clone(), bid: b.price, difference })
        })
        .collect()
}

/// The minimum difference wins; equal minima go to the lexicographically
/// first id and the others are returned as ties.
pub fn select_winner(diffs: &[BidDifference]) -> Result<(String, Vec<String>)> {
    let min = diffs.iter().map(|d| d.difference).min().ok_or(FahpError::Empty)?;
    let mut best: Vec<&str> = diffs.iter().filter(|d| d.difference == min).map(|d| d.contractor_id.as_str()).collect();
    best.sort_unstable();
    let winner = best[0].to_owned();
    Ok((winner, best[1..].iter().map(|s| s.to_string()).collect()))
}

/// Full bid-price stage. `qualified` is the screened-in set in ranking
/// order; rows follow that order.
pub fn evaluate_financial(
    estimate: Money,
    bids: &[Bid],
    qualified: &[String],
    security_threshold: Money,
) -> Result<FinancialResult> {
    if estimate <= Money::ZERO {
        return Err(FahpError::InvalidAmount(estimate.to_string()));
    }
    let mut rows = compute_differences(estimate, bids, qualified)?;
    if let Some(q) = qualified.iter().find(|q| !rows.iter().any(|r| &r.contractor_id == *q)) {
        return Err(FahpError::MissingBid(q.clone()));
    }
    let security_required = bid_security_required(estimate, security_threshold);
    if security_required {
        if let Some(b) = bids.iter().find(|b| b.security_document.as_deref().is_none_or(|d| d.trim().is_empty())) {
            return Err(FahpError::MissingBidSecurity(b.contractor_id.clone()));
        }
    }
    rows.sort_by_key(|r| qualified.iter().position(|q| *q == r.contractor_id));
    let (winner, tied_with) = select_winner(&rows)?;
    Ok(FinancialResult { estimate, rows, winner, tied_with, security_required })
}
