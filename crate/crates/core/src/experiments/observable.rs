use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Point;

/// A fixed family of smooth test functions on the channel, named by their formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Observable {
    One,
    X,
    Y,
    XY,
    CosX,
    Cos2X,
    CosXOnePlusY,
    SinXOnePlusY,
}

pub const OBSERVABLE_NAMES: [&str; 8] = ["one", "x", "y", "xy", "cos(x)", "cos(2x)", "cos(x)(1+y)", "sin(x)(1+y)"];

impl Observable {
    pub fn eval(self, p: Point) -> f64 {
        match self {
            Observable::One => 1.0,
            Observable::X => p.x,
            Observable::Y => p.y,
            Observable::XY => p.x * p.y,
            Observable::CosX => p.x.cos(),
            Observable::Cos2X => (2.0 * p.x).cos(),
            Observable::CosXOnePlusY => p.x.cos() * (1.0 + p.y),
            Observable::SinXOnePlusY => p.x.sin() * (1.0 + p.y),
        }
    }

    pub fn name(self) -> &'static str {
        let all = [
            Observable::One,
            Observable::X,
            Observable::Y,
            Observable::XY,
            Observable::CosX,
            Observable::Cos2X,
            Observable::CosXOnePlusY,
            Observable::SinXOnePlusY,
        ];
        OBSERVABLE_NAMES[all.iter().position(|o| *o == self).expect("listed")]
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        Ok(match key.as_str() {
            "one" | "1" => Observable::One,
            "x" => Observable::X,
            "y" => Observable::Y,
            "xy" | "x*y" => Observable::XY,
            "cos(x)" => Observable::CosX,
            "cos(2x)" => Observable::Cos2X,
            "cos(x)(1+y)" | "cos(x)*(1+y)" => Observable::CosXOnePlusY,
            "sin(x)(1+y)" | "sin(x)*(1+y)" => Observable::SinXOnePlusY,
            _ => {
                return Err(Error::Parse(format!(
                    "unknown observable '{s}', expected one of {}",
                    OBSERVABLE_NAMES.join(", ")
                )))
            }
        })
    }
}

impl TryFrom<String> for Observable {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Observable> for String {
    fn from(o: Observable) -> String {
        o.name().to_string()
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for name in OBSERVABLE_NAMES {
            let o: Observable = name.parse().unwrap();
            assert_eq!(o.name(), name);
        }
        assert_eq!("cos(x) * (1 + y)".parse::<Observable>().unwrap(), Observable::CosXOnePlusY);
        assert!("exp(x)".parse::<Observable>().is_err());
    }

    #[test]
    fn values() {
        let p = Point::new(0.0, 2.0);
        assert_eq!(Observable::CosXOnePlusY.eval(p), 3.0);
        assert_eq!(Observable::XY.eval(p), 0.0);
    }
}
