//! Calendar months and simulation windows.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CalendarError;

/// A Gregorian year and month, written `YYYY-MM`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    year: i32,
    month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self, CalendarError> {
        if !(1..=12).contains(&month) {
            return Err(CalendarError::InvalidMonth(month));
        }
        if !(1..=9999).contains(&year) {
            return Err(CalendarError::InvalidYear(year));
        }
        Ok(YearMonth { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    /// Month number, 1 = January.
    pub fn month(self) -> u32 {
        self.month
    }

    pub fn days(self) -> u32 {
        let (ny, nm) = if self.month == 12 {
            (self.year + 1, 1)
        } else {
            (self.year, self.month + 1)
        };
        let first_next = NaiveDate::from_ymd_opt(ny, nm, 1).expect("valid date");
        let first = self.first_day();
        (first_next - first).num_days() as u32
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month, 1).expect("valid date")
    }

    /// Weekday of the given day of this month (1-based).
    pub fn weekday(self, day: u32) -> Weekday {
        NaiveDate::from_ymd_opt(self.year, self.month, day)
            .expect("day within month")
            .weekday()
    }

    pub fn succ(self) -> Self {
        self.add_months(1)
    }

    pub fn add_months(self, n: u32) -> Self {
        let idx = self.index() + i64::from(n);
        Self::from_index(idx)
    }

    /// Number of months from `earlier` to `self`; negative when `self` is before.
    pub fn months_since(self, earlier: YearMonth) -> i64 {
        self.index() - earlier.index()
    }

    fn index(self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    fn from_index(idx: i64) -> Self {
        YearMonth {
            year: idx.div_euclid(12) as i32,
            month: idx.rem_euclid(12) as u32 + 1,
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = CalendarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CalendarError::Malformed(s.to_string());
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        YearMonth::new(year, month)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An inclusive range of months.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonthWindow {
    pub start: YearMonth,
    pub end: YearMonth,
}

impl MonthWindow {
    pub fn new(start: YearMonth, end: YearMonth) -> Result<Self, CalendarError> {
        if start > end {
            return Err(CalendarError::InvertedWindow { start, end });
        }
        Ok(MonthWindow { start, end })
    }

    /// A window of `months` months beginning at `start`.
    pub fn with_len(start: YearMonth, months: u32) -> Result<Self, CalendarError> {
        if months == 0 {
            return Err(CalendarError::EmptyWindow);
        }
        Ok(MonthWindow {
            start,
            end: start.add_months(months - 1),
        })
    }

    pub fn len(&self) -> u32 {
        (self.end.months_since(self.start) + 1) as u32
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, month: YearMonth) -> bool {
        self.start <= month && month <= self.end
    }

    pub fn months(&self) -> impl Iterator<Item = YearMonth> + '_ {
        let start = self.start;
        (0..self.len()).map(move |i| start.add_months(i))
    }

    pub fn is_year_aligned(&self) -> bool {
        self.len() % 12 == 0
    }
}
