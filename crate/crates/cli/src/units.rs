//! Unit-suffixed quantities such as `"5 um"` or `"-6.8 GHz"`, parsed to SI.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

pub trait Dimension {
    const NAME: &'static str;
    /// SI unit written back into resolved configs.
    const BASE: &'static str;
    fn scale(unit: &str) -> Option<f64>;
}

macro_rules! dimension {
    ($name:ident, $label:literal, $base:literal, { $($unit:literal => $factor:expr),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq)]
        pub struct $name;

        impl Dimension for $name {
            const NAME: &'static str = $label;
            const BASE: &'static str = $base;
            fn scale(unit: &str) -> Option<f64> {
                match unit {
                    $($unit => Some($factor),)+
                    _ => None,
                }
            }
        }
    };
}

dimension!(LengthDim, "length", "m", {
    "m" => 1.0, "mm" => 1e-3, "um" => 1e-6, "μm" => 1e-6, "µm" => 1e-6, "nm" => 1e-9,
});
dimension!(FrequencyDim, "frequency", "Hz", {
    "Hz" => 1.0, "kHz" => 1e3, "MHz" => 1e6, "GHz" => 1e9, "THz" => 1e12,
});
dimension!(PowerDim, "power", "W", {
    "W" => 1.0, "mW" => 1e-3, "uW" => 1e-6, "μW" => 1e-6, "µW" => 1e-6, "nW" => 1e-9,
});
dimension!(TemperatureDim, "temperature", "K", {
    "K" => 1.0, "mK" => 1e-3, "uK" => 1e-6, "μK" => 1e-6, "µK" => 1e-6, "nK" => 1e-9,
});
dimension!(TimeDim, "time", "s", {
    "s" => 1.0, "ms" => 1e-3, "us" => 1e-6, "μs" => 1e-6, "µs" => 1e-6, "ns" => 1e-9,
});
dimension!(AngleDim, "angle", "rad", {
    "rad" => 1.0, "mrad" => 1e-3, "deg" => std::f64::consts::PI / 180.0,
});
dimension!(MassDim, "mass", "kg", {
    "kg" => 1.0, "g" => 1e-3, "u" => 1.660_539_066_60e-27, "amu" => 1.660_539_066_60e-27,
});
dimension!(IntensityDim, "intensity", "W/m^2", {
    "W/m^2" => 1.0, "mW/cm^2" => 10.0, "W/cm^2" => 1e4,
});

pub type Length = Quantity<LengthDim>;
/// Cyclic frequency in Hz; multiply by 2 pi for angular quantities.
pub type Frequency = Quantity<FrequencyDim>;
pub type Power = Quantity<PowerDim>;
pub type Temperature = Quantity<TemperatureDim>;
pub type Time = Quantity<TimeDim>;
pub type Angle = Quantity<AngleDim>;
pub type Mass = Quantity<MassDim>;
pub type Intensity = Quantity<IntensityDim>;

#[derive(Debug, PartialEq)]
pub struct UnitError(String);

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantity<D> {
    si: f64,
    dim: PhantomData<D>,
}

impl<D: Dimension> Quantity<D> {
    pub fn from_si(si: f64) -> Self {
        Self { si, dim: PhantomData }
    }

    pub fn si(&self) -> f64 {
        self.si
    }

    pub fn parse(text: &str) -> Result<Self, UnitError> {
        let text = text.trim();
        let split = text
            .char_indices()
            .find(|&(i, c)| {
                c.is_alphabetic() && !(matches!(c, 'e' | 'E') && exponent_marker(text, i))
            })
            .map(|(i, _)| i)
            .ok_or_else(|| UnitError(format!("{} `{text}` has no unit; write e.g. \"5 {}\"", D::NAME, D::BASE)))?;
        let (number, unit) = text.split_at(split);
        let value: f64 = number
            .trim()
            .parse()
            .map_err(|_| UnitError(format!("cannot read a number from `{text}`")))?;
        if !value.is_finite() {
            return Err(UnitError(format!("`{text}` is not finite")));
        }
        let unit = unit.trim();
        let factor = D::scale(unit)
            .ok_or_else(|| UnitError(format!("`{unit}` is not a {} unit (in `{text}`)", D::NAME)))?;
        Ok(Self::from_si(apply(value, factor)))
    }
}

/// Divides by decimal prefixes below one so that "5 um" is exactly `5e-6`.
fn apply(value: f64, factor: f64) -> f64 {
    let exponent = factor.log10();
    if factor < 1.0 && (exponent - exponent.round()).abs() < 1e-12 {
        value / 10f64.powi(-exponent.round() as i32)
    } else {
        value * factor
    }
}

/// `e` at `i` belongs to the number when it sits between a digit and a digit or sign.
fn exponent_marker(text: &str, i: usize) -> bool {
    let before = text[..i].chars().next_back();
    let after = text[i + 1..].chars().next();
    matches!(before, Some(c) if c.is_ascii_digit() || c == '.')
        && matches!(after, Some(c) if c.is_ascii_digit() || c == '-' || c == '+')
}

impl<D: Dimension> Serialize for Quantity<D> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("{:e} {}", self.si, D::BASE))
    }
}

impl<'de, D: Dimension> Deserialize<'de> for Quantity<D> {
    fn deserialize<De: Deserializer<'de>>(deserializer: De) -> Result<Self, De::Error> {
        struct V<D>(PhantomData<D>);
        impl<D: Dimension> Visitor<'_> for V<D> {
            type Value = Quantity<D>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a {} string with a unit, e.g. \"1 {}\"", D::NAME, D::BASE)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                Quantity::parse(v).map_err(E::custom)
            }
        }
        deserializer.deserialize_str(V(PhantomData))
    }
}
