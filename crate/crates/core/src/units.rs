//! Thin newtypes over `f64` for the physical quantities that cross module
//! boundaries. Only the products and quotients that appear in the accounting
//! are implemented, so mixing up joules and kilowatt-hours fails to compile.

use core::fmt;
use core::ops::{Add, Div, Mul, Sub};

/// Joules per kilowatt-hour.
pub const JOULES_PER_KWH: f64 = 3.6e6;
/// Megajoules per kilowatt-hour.
pub const MJ_PER_KWH: f64 = 3.6;
pub const SECONDS_PER_DAY: f64 = 86_400.0;
/// Julian year.
pub const DAYS_PER_YEAR: f64 = 365.25;

macro_rules! quantity {
    ($(#[$meta:meta])* $name:ident, $unit:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
        pub struct $name(pub f64);

        impl $name {
            pub const ZERO: Self = Self(0.0);

            #[inline]
            pub fn value(self) -> f64 {
                self.0
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self(self.0 + rhs.0)
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self(self.0 - rhs.0)
            }
        }

        impl Mul<f64> for $name {
            type Output = Self;
            fn mul(self, rhs: f64) -> Self {
                Self(self.0 * rhs)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(&self.0, f)?;
                f.write_str(concat!(" ", $unit))
            }
        }
    };
}

quantity!(
    /// Energy in joules.
    Joules,
    "J"
);
quantity!(
    /// Energy in kilowatt-hours.
    KilowattHours,
    "kWh"
);
quantity!(
    /// Power in watts.
    Watts,
    "W"
);
quantity!(
    /// Time in seconds.
    Seconds,
    "s"
);
quantity!(
    /// Mass of CO2-equivalent emissions in grams.
    GramsCo2e,
    "gCO2eq"
);

impl Joules {
    pub fn from_megajoules(mj: f64) -> Self {
        Self(mj * 1e6)
    }

    pub fn megajoules(self) -> f64 {
        self.0 / 1e6
    }
}

impl KilowattHours {
    pub fn to_joules(self) -> Joules {
        Joules(self.0 * JOULES_PER_KWH)
    }

    pub fn megajoules(self) -> f64 {
        self.0 * MJ_PER_KWH
    }
}

impl Seconds {
    pub fn from_days(days: f64) -> Self {
        Self(days * SECONDS_PER_DAY)
    }

    pub fn days(self) -> f64 {
        self.0 / SECONDS_PER_DAY
    }

    pub fn years(self) -> f64 {
        self.days() / DAYS_PER_YEAR
    }
}

impl Mul<Seconds> for Watts {
    type Output = Joules;
    fn mul(self, rhs: Seconds) -> Joules {
        Joules(self.0 * rhs.0)
    }
}

impl Div<Watts> for Joules {
    type Output = Seconds;
    fn div(self, rhs: Watts) -> Seconds {
        Seconds(self.0 / rhs.0)
    }
}

impl Div<Seconds> for Joules {
    type Output = Watts;
    fn div(self, rhs: Seconds) -> Watts {
        Watts(self.0 / rhs.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_time_energy() {
        let e = Watts(2.0) * Seconds(3600.0);
        assert_eq!(e, Joules(7200.0));
        assert_eq!(e / Watts(2.0), Seconds(3600.0));
        assert_eq!(e / Seconds(3600.0), Watts(2.0));
    }

    #[test]
    fn conversions() {
        assert_eq!(KilowattHours(1.0).to_joules(), Joules(3.6e6));
        assert_eq!(KilowattHours(1.0).megajoules(), 3.6);
        assert_eq!(Seconds(86_400.0).days(), 1.0);
        assert_eq!(Seconds::from_days(365.25).years(), 1.0);
        assert_eq!(Joules::from_megajoules(3.17).megajoules(), 3.17);
    }

    #[test]
    fn display_carries_unit() {
        assert_eq!(alloc::format!("{}", Watts(0.93)), "0.93 W");
    }
}
