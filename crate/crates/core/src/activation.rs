//! Scalar activations and their Lipschitz data.
//!
//! Every activation carries a declared Lipschitz constant `lip` and its value
//! at zero. The constant that drives the certificates is
//! `L = max(lip, |σ(0)|)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{input, Error, Result};
use crate::rng;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Relu,
    LeakyRelu {
        slope: f64,
    },
    /// Hard-sigmoid style clip: `clamp(t + 1/2, 0, 1)`.
    Clip,
    /// `amplitude * tanh(rate * t)`.
    ScaledTanh {
        amplitude: f64,
        rate: f64,
    },
    Custom(ScalarFn),
}

/// A scalar activation `σ: ℝ → ℝ` with a declared Lipschitz constant.
#[derive(Clone)]
pub struct Activation {
    name: String,
    kind: Kind,
    lip: f64,
    at_zero: f64,
}

impl Activation {
    pub fn relu() -> Self {
        Self::builtin("relu", Kind::Relu, 1.0)
    }

    /// `max(t, slope·t)`; Lipschitz constant `max(1, |slope|)`.
    pub fn leaky_relu(slope: f64) -> Result<Self> {
        if !slope.is_finite() {
            return input("leaky relu slope must be finite");
        }
        Ok(Self::builtin(
            &format!("leaky_relu({slope})"),
            Kind::LeakyRelu { slope },
            slope.abs().max(1.0),
        ))
    }

    /// Hard-sigmoid clip with `σ(0) = 1/2` and Lipschitz constant 1.
    pub fn clip() -> Self {
        Self::builtin("clip", Kind::Clip, 1.0)
    }

    /// `amplitude·tanh(rate·t)` with Lipschitz constant `|amplitude·rate|`.
    pub fn scaled_tanh(amplitude: f64, rate: f64) -> Result<Self> {
        if !(amplitude.is_finite() && rate.is_finite()) || amplitude * rate == 0.0 {
            return input("scaled tanh needs finite, nonzero amplitude and rate");
        }
        Ok(Self::builtin(
            &format!("scaled_tanh({amplitude},{rate})"),
            Kind::ScaledTanh { amplitude, rate },
            (amplitude * rate).abs(),
        ))
    }

    /// A user-supplied activation with a user-declared Lipschitz constant.
    ///
    /// The declaration is trusted; call [`Activation::spot_check`] to test it.
    pub fn custom<F>(name: &str, lip: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lip.is_finite() && lip > 0.0) {
            return input("declared Lipschitz constant must be positive and finite");
        }
        let at_zero = f(0.0);
        if !at_zero.is_finite() {
            return input("activation must be finite at 0");
        }
        Ok(Self {
            name: name.to_string(),
            kind: Kind::Custom(Arc::new(f)),
            lip,
            at_zero,
        })
    }

    fn builtin(name: &str, kind: Kind, lip: f64) -> Self {
        let mut act = Self {
            name: name.to_string(),
            kind,
            lip,
            at_zero: 0.0,
        };
        act.at_zero = act.eval(0.0);
        act
    }

    /// Parse a builtin by name: `relu`, `clip`, `leaky_relu:<slope>`,
    /// `tanh` or `tanh:<amplitude>,<rate>`.
    pub fn from_name(name: &str) -> Result<Self> {
        let (head, args) = match name.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (name, None),
        };
        let nums = |a: &str| -> Result<Vec<f64>> {
            a.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("activation argument {s:?}: {e}")))
                })
                .collect()
        };
        match (head.to_ascii_lowercase().as_str(), args) {
            ("relu", None) => Ok(Self::relu()),
            ("clip" | "hard_sigmoid", None) => Ok(Self::clip()),
            ("leaky_relu", None) => Self::leaky_relu(0.01),
            ("leaky_relu", Some(a)) => match nums(a)?.as_slice() {
                [s] => Self::leaky_relu(*s),
                _ => input("leaky_relu takes one slope"),
            },
            ("tanh", None) => Self::scaled_tanh(1.0, 1.0),
            ("tanh", Some(a)) => match nums(a)?.as_slice() {
                [amp, rate] => Self::scaled_tanh(*amp, *rate),
                _ => input("tanh takes amplitude,rate"),
            },
            _ => input(format!("unknown activation {name:?}")),
        }
    }

    /// Replace the declared Lipschitz constant.
    ///
    /// Only a constant at least as large as the builtin one keeps the
    /// certificates valid; smaller values are rejected.
    pub fn with_declared_lipschitz(mut self, lip: f64) -> Result<Self> {
        if !(lip.is_finite() && lip > 0.0) {
            return input("declared Lipschitz constant must be positive and finite");
        }
        if !matches!(self.kind, Kind::Custom(_)) && lip < self.lip {
            return input(format!(
                "declared Lipschitz constant {lip} is below the true constant {} of {}",
                self.lip, self.name
            ));
        }
        self.lip = lip;
        Ok(self)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Relu => t.max(0.0),
            Kind::LeakyRelu { slope } => {
                if t >= 0.0 {
                    t
                } else {
                    slope * t
                }
            }
            Kind::Clip => (t + 0.5).clamp(0.0, 1.0),
            Kind::ScaledTanh { amplitude, rate } => amplitude * (rate * t).tanh(),
            Kind::Custom(f) => f(t),
        }
    }

    /// Apply in place to a slice. Hot loop of every grid evaluation.
    #[inline]
    pub fn apply_slice(&self, values: &mut [f64]) {
        match &self.kind {
            Kind::Relu => values.iter_mut().for_each(|v| *v = v.max(0.0)),
            Kind::Clip => values.iter_mut().for_each(|v| *v = (*v + 0.5).clamp(0.0, 1.0)),
            _ => values.iter_mut().for_each(|v| *v = self.eval(*v)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Declared Lipschitz constant `L′`.
    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn at_zero(&self) -> f64 {
        self.at_zero
    }

    /// `L = max(L′, |σ(0)|)`.
    pub fn constant(&self) -> f64 {
        self.lip.max(self.at_zero.abs())
    }

    /// Largest observed `|σ(a) − σ(b)| / |a − b|` over random pairs drawn
    /// from `[-range, range]`. Errors if it exceeds the declared constant.
    pub fn spot_check(&self, pairs: usize, range: f64, seed: u64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..pairs {
            let mut r = rng::stream(seed, i as u64);
            let a = r.random_range(-range..=range);
            // half the pairs are close together to probe kinks
            let b = if i % 2 == 0 {
                r.random_range(-range..=range)
            } else {
                a + r.random_range(-1e-3..=1e-3)
            };
            if a == b {
                continue;
            }
            let ratio = (self.eval(a) - self.eval(b)).abs() / (a - b).abs();
            worst = worst.max(ratio);
        }
        if worst > self.lip * (1.0 + 1e-9) {
            return Err(Error::Precondition(format!(
                "activation {} has observed slope {worst} above declared {}",
                self.name, self.lip
            )));
        }
        Ok(worst)
    }
}

impl fmt::Debug for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Activation")
            .field("name", &self.name)
            .field("lip", &self.lip)
            .field("at_zero", &self.at_zero)
            .finish()
    }
}

impl Serialize for Activation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Activation", 4)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("lip", &self.lip)?;
        st.serialize_field("at_zero", &self.at_zero)?;
        st.serialize_field("L", &self.constant())?;
        st.end()
    }
}

/// The coordinatewise map `σ̄` applied after every hidden affine layer.
///
/// `PerUnit` assigns a possibly different activation to each of the `W`
/// hidden units (the same assignment in every layer). Certificates then use
/// the largest constant `L` of the mixture.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", content = "activations", rename_all = "snake_case")]
pub enum Nonlinearity {
    Uniform(Activation),
    PerUnit(Vec<Activation>),
}

impl Nonlinearity {
    /// `L` of the map: the maximum over its coordinates.
    pub fn constant(&self) -> f64 {
        match self {
            Self::Uniform(a) => a.constant(),
            Self::PerUnit(v) => v.iter().map(Activation::constant).fold(0.0, f64::max),
        }
    }

    /// Largest declared `L′` over the coordinates.
    pub fn max_lip(&self) -> f64 {
        match self {
            Self::Uniform(a) => a.lip(),
            Self::PerUnit(v) => v.iter().map(Activation::lip).fold(0.0, f64::max),
        }
    }

    /// Checks that a per-unit assignment matches the width.
    pub fn check_width(&self, width: usize) -> Result<()> {
        match self {
            Self::PerUnit(v) if v.len() != width => input(format!(
                "per-unit activation list has {} entries, width is {width}",
                v.len()
            )),
            Self::PerUnit(v) if v.is_empty() => input("empty activation list"),
            _ => Ok(()),
        }
    }

    /// Apply to the pre-activations of `unit`, stored contiguously.
    #[inline]
    pub fn apply_unit(&self, unit: usize, values: &mut [f64]) {
        match self {
            Self::Uniform(a) => a.apply_slice(values),
            Self::PerUnit(v) => v[unit].apply_slice(values),
        }
    }

    #[inline]
    pub fn eval_unit(&self, unit: usize, t: f64) -> f64 {
        match self {
            Self::Uniform(a) => a.eval(t),
            Self::PerUnit(v) => v[unit].eval(t),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Uniform(a) => a.name().to_string(),
            Self::PerUnit(v) => {
                let names: Vec<&str> = v.iter().map(Activation::name).collect();
                format!("mixed[{}]", names.join(","))
            }
        }
    }
}

impl From<Activation> for Nonlinearity {
    fn from(a: Activation) -> Self {
        Self::Uniform(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_constants() {
        let relu = Activation::relu();
        assert_eq!((relu.lip(), relu.at_zero(), relu.constant()), (1.0, 0.0, 1.0));
        let clip = Activation::clip();
        assert_eq!((clip.lip(), clip.at_zero(), clip.constant()), (1.0, 0.5, 1.0));
        let leaky = Activation::leaky_relu(0.1).unwrap();
        assert_eq!(leaky.constant(), 1.0);
        assert_eq!(leaky.eval(-2.0), -0.2);
        let tanh = Activation::scaled_tanh(2.0, 1.5).unwrap();
        assert_eq!(tanh.lip(), 3.0);
    }

    #[test]
    fn clip_saturates() {
        let clip = Activation::clip();
        assert_eq!(clip.eval(-3.0), 0.0);
        assert_eq!(clip.eval(0.25), 0.75);
        assert_eq!(clip.eval(7.0), 1.0);
    }

    #[test]
    fn declared_constants_survive_spot_checks() {
        for act in [
            Activation::relu(),
            Activation::clip(),
            Activation::leaky_relu(-1.5).unwrap(),
            Activation::scaled_tanh(0.5, 4.0).unwrap(),
        ] {
            let worst = act.spot_check(2_000, 5.0, 11).unwrap();
            assert!(worst <= act.lip() * (1.0 + 1e-9), "{}", act.name());
        }
    }

    #[test]
    fn spot_check_catches_understated_custom_constant() {
        let act = Activation::custom("triple", 1.0, |t| 3.0 * t).unwrap();
        assert!(act.spot_check(100, 1.0, 0).is_err());
    }

    #[test]
    fn cannot_understate_builtin() {
        assert!(Activation::relu().with_declared_lipschitz(0.5).is_err());
        assert_eq!(
            Activation::relu()
                .with_declared_lipschitz(2.0)
                .unwrap()
                .constant(),
            2.0
        );
    }

    #[test]
    fn parse_names() {
        assert_eq!(Activation::from_name("relu").unwrap().name(), "relu");
        assert_eq!(Activation::from_name("clip").unwrap().at_zero(), 0.5);
        assert_eq!(Activation::from_name("leaky_relu:0.2").unwrap().eval(-1.0), -0.2);
        assert_eq!(Activation::from_name("tanh:2,0.5").unwrap().lip(), 1.0);
        assert!(Activation::from_name("swish").is_err());
        assert!(Activation::from_name("tanh:1").is_err());
    }

    #[test]
    fn mixture_constant_is_max() {
        let mix = Nonlinearity::PerUnit(vec![
            Activation::relu(),
            Activation::scaled_tanh(1.0, 2.0).unwrap(),
        ]);
        assert_eq!(mix.constant(), 2.0);
        assert!(mix.check_width(2).is_ok());
        assert!(mix.check_width(3).is_err());
    }
}
