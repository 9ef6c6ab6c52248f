//! Proleptic Gregorian calendar dates as day counts (Rata Die).
//!
//! Simulations index time as whole days; dates only matter at the edges
//! (schedules, seasonality, ISO-week aggregation), so a small fixed-point
//! date type avoids pulling in a full datetime dependency.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Calendar date, stored as days since 0001-01-01 (Rata Die day 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Date(i64);

const DAYS_IN_MONTH: [i64; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

fn is_leap(y: i64) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

fn days_in_month(y: i64, m: u32) -> i64 {
    if m == 2 && is_leap(y) {
        29
    } else {
        DAYS_IN_MONTH[(m - 1) as usize]
    }
}

impl Date {
    pub fn from_ymd(y: i64, m: u32, d: u32) -> Self {
        assert!((1..=12).contains(&m), "month out of range: {m}");
        assert!(
            d >= 1 && (d as i64) <= days_in_month(y, m),
            "day out of range: {y}-{m}-{d}"
        );
        let ym1 = y - 1;
        let mut days = 365 * ym1 + ym1.div_euclid(4) - ym1.div_euclid(100) + ym1.div_euclid(400);
        for mm in 1..m {
            days += days_in_month(y, mm);
        }
        Date(days + d as i64)
    }

    pub fn ymd(&self) -> (i64, u32, u32) {
        // Invert Rata Die by searching the year then the month.
        let mut y = (self.0 as f64 / 365.2425).floor() as i64 + 1;
        loop {
            let start = Date::from_ymd(y, 1, 1).0;
            let len = if is_leap(y) { 366 } else { 365 };
            if self.0 < start {
                y -= 1;
            } else if self.0 >= start + len {
                y += 1;
            } else {
                let mut rem = self.0 - start;
                let mut m = 1u32;
                while rem >= days_in_month(y, m) {
                    rem -= days_in_month(y, m);
                    m += 1;
                }
                return (y, m, rem as u32 + 1);
            }
        }
    }

    pub fn rata_die(&self) -> i64 {
        self.0
    }

    pub fn from_rata_die(n: i64) -> Self {
        Date(n)
    }

    pub fn year(&self) -> i64 {
        self.ymd().0
    }

    /// Days since January 1st of this date's year (January 1st = 0).
    pub fn day_of_year(&self) -> i64 {
        self.0 - Date::from_ymd(self.year(), 1, 1).0
    }

    /// Monday = 0 .. Sunday = 6.
    pub fn weekday(&self) -> u32 {
        (self.0 - 1).rem_euclid(7) as u32
    }

    /// ISO-8601 week: `(iso_year, week_number)`.
    pub fn iso_week(&self) -> (i64, u32) {
        // The Thursday of this date's week determines the ISO year and week.
        let thursday = self.0 - self.weekday() as i64 + 3;
        let year = Date(thursday).ymd().0;
        let jan1 = Date::from_ymd(year, 1, 1).0;
        let week = ((thursday - jan1) / 7 + 1) as u32;
        (year, week)
    }

    pub fn succ(&self, days: i64) -> Self {
        Date(self.0 + days)
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, m, d) = self.ymd();
        write!(f, "{y:04}-{m:02}-{d:02}")
    }
}

impl FromStr for Date {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('-').collect();
        if parts.len() != 3 {
            return Err(format!("expected YYYY-MM-DD, got {s:?}"));
        }
        let y: i64 = parts[0].parse().map_err(|_| format!("bad year in {s:?}"))?;
        let m: u32 = parts[1]
            .parse()
            .map_err(|_| format!("bad month in {s:?}"))?;
        let d: u32 = parts[2].parse().map_err(|_| format!("bad day in {s:?}"))?;
        if !(1..=12).contains(&m) || d < 1 || (d as i64) > days_in_month(y, m) {
            return Err(format!("date out of range: {s:?}"));
        }
        Ok(Date::from_ymd(y, m, d))
    }
}

impl TryFrom<String> for Date {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Date> for String {
    fn from(d: Date) -> String {
        d.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_ymd() {
        for &(y, m, d) in &[
            (2020, 2, 29),
            (2020, 3, 15),
            (1999, 12, 31),
            (2021, 1, 1),
            (2000, 2, 29),
        ] {
            let date = Date::from_ymd(y, m, d);
            assert_eq!(date.ymd(), (y, m, d));
        }
    }

    #[test]
    fn day_arithmetic() {
        let a = Date::from_ymd(2020, 2, 28);
        assert_eq!(a.succ(1).to_string(), "2020-02-29");
        assert_eq!(a.succ(2).to_string(), "2020-03-01");
        assert_eq!(
            Date::from_ymd(2020, 12, 31).rata_die() - Date::from_ymd(2020, 1, 1).rata_die(),
            365
        );
    }

    #[test]
    fn weekdays_and_iso_weeks() {
        // 2020-03-15 was a Sunday.
        assert_eq!(Date::from_ymd(2020, 3, 15).weekday(), 6);
        // ISO week edge cases around new year.
        assert_eq!(Date::from_ymd(2020, 1, 1).iso_week(), (2020, 1));
        assert_eq!(Date::from_ymd(2021, 1, 1).iso_week(), (2020, 53));
        assert_eq!(Date::from_ymd(2021, 1, 4).iso_week(), (2021, 1));
        assert_eq!(Date::from_ymd(2016, 1, 3).iso_week(), (2015, 53));
    }

    #[test]
    fn parse_and_display() {
        let d: Date = "2020-05-04".parse().unwrap();
        assert_eq!(d.to_string(), "2020-05-04");
        assert!("2020-13-01".parse::<Date>().is_err());
        assert!("2021-02-29".parse::<Date>().is_err());
    }
}
