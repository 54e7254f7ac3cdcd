//! Model and observation calendars and the daily time index built on them.
//!
//! Climate model output comes on three calendars: the proleptic Gregorian
//! calendar, a 365-day calendar without leap days, and an idealized 360-day
//! calendar of twelve 30-day months. Everything downstream groups days by
//! month label, so all three only need to agree on what a "month" is.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Month lengths of a non-leap Gregorian year.
pub(crate) const NOLEAP_MONTH_DAYS: [u8; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

/// Supported calendars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CalendarKind {
    #[serde(rename = "gregorian")]
    Gregorian,
    #[serde(rename = "noleap_365")]
    NoLeap365,
    #[serde(rename = "fixed_360")]
    Fixed360,
}

impl CalendarKind {
    pub fn name(self) -> &'static str {
        match self {
            CalendarKind::Gregorian => "gregorian",
            CalendarKind::NoLeap365 => "noleap_365",
            CalendarKind::Fixed360 => "fixed_360",
        }
    }

    pub fn is_leap_year(self, year: i32) -> bool {
        match self {
            CalendarKind::Gregorian => {
                (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
            }
            CalendarKind::NoLeap365 | CalendarKind::Fixed360 => false,
        }
    }

    /// Number of days in `month` (1..=12) of `year`.
    pub fn month_length(self, year: i32, month: u8) -> u8 {
        debug_assert!((1..=12).contains(&month));
        match self {
            CalendarKind::Fixed360 => 30,
            CalendarKind::NoLeap365 => NOLEAP_MONTH_DAYS[month as usize - 1],
            CalendarKind::Gregorian => {
                if month == 2 && self.is_leap_year(year) {
                    29
                } else {
                    NOLEAP_MONTH_DAYS[month as usize - 1]
                }
            }
        }
    }

    pub fn year_length(self, year: i32) -> u16 {
        match self {
            CalendarKind::Fixed360 => 360,
            CalendarKind::NoLeap365 => 365,
            CalendarKind::Gregorian => {
                if self.is_leap_year(year) {
                    366
                } else {
                    365
                }
            }
        }
    }

    pub fn is_valid(self, date: Date) -> bool {
        (1..=12).contains(&date.month)
            && date.day >= 1
            && date.day <= self.month_length(date.year, date.month)
    }

    /// 1-based ordinal day within the year.
    pub fn day_of_year(self, date: Date) -> u16 {
        let before: u16 = (1..date.month)
            .map(|m| self.month_length(date.year, m) as u16)
            .sum();
        before + date.day as u16
    }

    /// Days elapsed since 0000-01-01 of this calendar. Only differences matter.
    fn day_number(self, date: Date) -> i64 {
        let y = date.year as i64;
        let doy = self.day_of_year(date) as i64 - 1;
        match self {
            CalendarKind::Fixed360 => y * 360 + doy,
            CalendarKind::NoLeap365 => y * 365 + doy,
            CalendarKind::Gregorian => {
                // Leap days in years [0, y); floor division keeps this valid for y <= 0.
                let prev = y - 1;
                let leaps = prev.div_euclid(4) - prev.div_euclid(100) + prev.div_euclid(400) + 1;
                y * 365 + leaps + doy
            }
        }
    }
}

impl fmt::Display for CalendarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CalendarKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gregorian" => Ok(CalendarKind::Gregorian),
            "noleap_365" => Ok(CalendarKind::NoLeap365),
            "fixed_360" => Ok(CalendarKind::Fixed360),
            other => Err(Error::invalid(format!(
                "unknown calendar '{other}' (expected gregorian, noleap_365 or fixed_360)"
            ))),
        }
    }
}

/// A (year, month, day) triple. Validity depends on the calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Date {
    pub year: i32,
    pub month: u8,
    pub day: u8,
}

impl Date {
    pub const fn new(year: i32, month: u8, day: u8) -> Self {
        Date { year, month, day }
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for Date {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("malformed date '{s}' (expected YYYY-MM-DD)"));
        let s_trim = s.trim();
        // Allow a leading minus sign on the year.
        let (neg, body) = match s_trim.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s_trim),
        };
        let mut parts = body.split('-');
        let (y, m, d) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(y), Some(m), Some(d), None) => (y, m, d),
            _ => return Err(bad()),
        };
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u8 = m.parse().map_err(|_| bad())?;
        let day: u8 = d.parse().map_err(|_| bad())?;
        Ok(Date::new(if neg { -year } else { year }, month, day))
    }
}

/// Calendar labels for one step of a [`TimeIndex`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DayLabel {
    pub year: i32,
    pub month: u8,
    pub day: u8,
    /// 1-based ordinal day of the year under the index's calendar.
    pub day_of_year: u16,
}

impl DayLabel {
    pub fn date(&self) -> Date {
        Date::new(self.year, self.month, self.day)
    }
}

/// Contiguous run of daily steps on a calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeIndex {
    calendar: CalendarKind,
    start: Date,
    labels: Vec<DayLabel>,
}

impl TimeIndex {
    /// Builds the index of `n_days` consecutive days starting at `start`.
    pub fn new(calendar: CalendarKind, start: Date, n_days: usize) -> Result<Self> {
        if !calendar.is_valid(start) {
            return Err(Error::invalid(format!(
                "start date {start} is not valid in the {calendar} calendar"
            )));
        }
        if n_days == 0 {
            return Err(Error::invalid("time index needs at least one day"));
        }
        let mut labels = Vec::with_capacity(n_days);
        let mut date = start;
        let mut doy = calendar.day_of_year(start);
        for _ in 0..n_days {
            labels.push(DayLabel {
                year: date.year,
                month: date.month,
                day: date.day,
                day_of_year: doy,
            });
            if date.day < calendar.month_length(date.year, date.month) {
                date.day += 1;
                doy += 1;
            } else if date.month < 12 {
                date.month += 1;
                date.day = 1;
                doy += 1;
            } else {
                date = Date::new(date.year + 1, 1, 1);
                doy = 1;
            }
        }
        Ok(TimeIndex {
            calendar,
            start,
            labels,
        })
    }

    pub fn calendar(&self) -> CalendarKind {
        self.calendar
    }

    pub fn start(&self) -> Date {
        self.start
    }

    pub fn n_days(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[DayLabel] {
        &self.labels
    }

    pub fn label(&self, day: usize) -> DayLabel {
        self.labels[day]
    }

    pub fn end(&self) -> Date {
        self.labels[self.labels.len() - 1].date()
    }

    /// Position of `date` in the index, if covered.
    pub fn index_of(&self, date: Date) -> Option<usize> {
        if !self.calendar.is_valid(date) {
            return None;
        }
        let offset = self.calendar.day_number(date) - self.calendar.day_number(self.start);
        if offset < 0 || offset as usize >= self.labels.len() {
            None
        } else {
            Some(offset as usize)
        }
    }

    /// Day indices labelled with `month`, in chronological order.
    pub fn month_mask(&self, month: u8) -> Vec<usize> {
        self.days_where(|l| l.month == month)
    }

    /// Day indices labelled with `month` whose year is in `years`.
    pub fn month_mask_in_years(&self, month: u8, years: &[i32]) -> Vec<usize> {
        self.days_where(|l| l.month == month && years.contains(&l.year))
    }

    /// Day indices whose year is in `years`.
    pub fn days_in_years(&self, years: &[i32]) -> Vec<usize> {
        self.days_where(|l| years.contains(&l.year))
    }

    /// Distinct years touched by the index, ascending.
    pub fn years(&self) -> Vec<i32> {
        let first = self.labels[0].year;
        let last = self.labels[self.labels.len() - 1].year;
        (first..=last).collect()
    }

    pub fn covers_year(&self, year: i32) -> bool {
        let first = self.labels[0].year;
        let last = self.labels[self.labels.len() - 1].year;
        (first..=last).contains(&year)
    }

    /// True if the index covers every day of `year`.
    pub fn covers_whole_year(&self, year: i32) -> bool {
        let jan1 = self.index_of(Date::new(year, 1, 1));
        let dec = Date::new(year, 12, self.calendar.month_length(year, 12));
        jan1.is_some() && self.index_of(dec).is_some()
    }

    /// Sub-index covering whole years `first..=last`.
    pub fn slice_years(&self, first: i32, last: i32) -> Result<(usize, TimeIndex)> {
        if first > last {
            return Err(Error::invalid(format!("empty year range {first}..{last}")));
        }
        let lo = self.index_of(Date::new(first, 1, 1));
        let hi = self.index_of(Date::new(last, 12, self.calendar.month_length(last, 12)));
        match (lo, hi) {
            (Some(lo), Some(hi)) => Ok((
                lo,
                TimeIndex::new(self.calendar, Date::new(first, 1, 1), hi - lo + 1)?,
            )),
            _ => Err(Error::invalid(format!(
                "years {first}..={last} not fully covered by time index {}..{}",
                self.start,
                self.end()
            ))),
        }
    }

    fn days_where(&self, pred: impl Fn(&DayLabel) -> bool) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| pred(l))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Builds a [`TimeIndex`]; free-function form of [`TimeIndex::new`].
pub fn build_time_index(calendar: CalendarKind, start: Date, n_days: usize) -> Result<TimeIndex> {
    TimeIndex::new(calendar, start, n_days)
}

/// Day indices of `time` whose month label equals `month`.
pub fn month_mask(time: &TimeIndex, month: u8) -> Result<Vec<usize>> {
    if !(1..=12).contains(&month) {
        return Err(Error::invalid(format!("month {month} outside 1..=12")));
    }
    Ok(time.month_mask(month))
}
