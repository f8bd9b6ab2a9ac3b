//! Civil-time grid arithmetic.
//!
//! The market operates on a uniform 5-minute civil-time grid with no DST
//! shifts, so timestamps are plain seconds since the Unix epoch interpreted
//! as local market time. A day always holds [`STEPS_PER_DAY`] intervals.

use core::fmt;

/// Grid step in seconds.
pub const STEP_SECS: i64 = 300;
/// Seconds per civil day.
pub const DAY_SECS: i64 = 86_400;
/// Dispatch intervals per day.
pub const STEPS_PER_DAY: usize = 288;

/// A point on the uniform market-time grid, in seconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(pub i64);

impl Timestamp {
    /// Construct from a civil date and time of day.
    pub fn from_ymd_hms(year: i32, month: u32, day: u32, h: u32, m: u32, s: u32) -> Timestamp {
        let days = days_from_civil(year, month, day);
        Timestamp(days * DAY_SECS + i64::from(h) * 3600 + i64::from(m) * 60 + i64::from(s))
    }

    /// Midnight of the given civil date.
    pub fn from_date(year: i32, month: u32, day: u32) -> Timestamp {
        Timestamp::from_ymd_hms(year, month, day, 0, 0, 0)
    }

    pub fn secs(self) -> i64 {
        self.0
    }

    /// True when aligned to the 5-minute grid.
    pub fn is_aligned(self) -> bool {
        self.0.rem_euclid(STEP_SECS) == 0
    }

    /// True at a day boundary (midnight).
    pub fn is_midnight(self) -> bool {
        self.0.rem_euclid(DAY_SECS) == 0
    }

    /// Dispatch interval index within the day, 1 (00:00) through 288 (23:55).
    pub fn interval_index(self) -> usize {
        (self.0.rem_euclid(DAY_SECS) / STEP_SECS) as usize + 1
    }

    /// Day of week, 0 = Monday through 6 = Sunday.
    pub fn day_of_week(self) -> usize {
        // 1970-01-01 was a Thursday (= 3 counting from Monday).
        ((self.0.div_euclid(DAY_SECS) + 3).rem_euclid(7)) as usize
    }

    /// Midnight at the start of this timestamp's day.
    pub fn day_start(self) -> Timestamp {
        Timestamp(self.0.div_euclid(DAY_SECS) * DAY_SECS)
    }

    pub fn add_steps(self, steps: i64) -> Timestamp {
        Timestamp(self.0 + steps * STEP_SECS)
    }

    pub fn add_days(self, days: i64) -> Timestamp {
        Timestamp(self.0 + days * DAY_SECS)
    }

    /// Whole grid steps from `earlier` to `self`.
    pub fn steps_since(self, earlier: Timestamp) -> i64 {
        (self.0 - earlier.0) / STEP_SECS
    }

    /// Civil (year, month, day) of this timestamp.
    pub fn ymd(self) -> (i32, u32, u32) {
        civil_from_days(self.0.div_euclid(DAY_SECS))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (y, mo, d) = self.ymd();
        let tod = self.0.rem_euclid(DAY_SECS);
        let (h, mi, s) = (tod / 3600, (tod % 3600) / 60, tod % 60);
        write!(f, "{y:04}-{mo:02}-{d:02}T{h:02}:{mi:02}:{s:02}")
    }
}

/// Days since 1970-01-01 for a civil date (proleptic Gregorian).
pub fn days_from_civil(year: i32, month: u32, day: u32) -> i64 {
    let y = i64::from(year) - i64::from(month <= 2);
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let m = i64::from(month);
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + i64::from(day) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Civil (year, month, day) for days since 1970-01-01.
pub fn civil_from_days(days: i64) -> (i32, u32, u32) {
    let z = days + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = (if mp < 10 { mp + 3 } else { mp - 9 }) as u32;
    (((y + i64::from(m <= 2)) as i32), m, d)
}
