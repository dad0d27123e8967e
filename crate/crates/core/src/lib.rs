//! Finite-element toolkit for discrete Korn inequalities built on the
//! trace-free symmetric gradient, for piecewise-quadratic vector fields on
//! tetrahedral meshes.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.
//! File formats, reports and the command-line front end live in the
//! `kornforge` companion crate.
//!
//! Module map:
//!
//! - [`mesh`]: tetrahedral meshes, face registry, generation and red refinement.
//! - [`fespace`]: P2 Lagrange shape functions, quadrature, dof maps, field evaluation.
//! - [`diffops`]: differential operators, jumps, face projection, enrichment,
//!   conformal Killing fields and the moment projection onto them.
//! - [`forms`]: assembled quadratic forms for every (semi)norm involved.
//! - [`spectra`]: extremal generalized eigenvalues (sharp constants).
//! - [`verify`]: named property checks with measured constants.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod diffops;
pub mod error;
pub mod fespace;
pub mod forms;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod spectra;
pub mod verify;

pub use error::{Error, Result};

/// Floating-point helpers that work without `std`.
pub(crate) mod fmath {
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline]
    pub fn acos(x: f64) -> f64 {
        libm::acos(x)
    }
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
}

/// JSON has no representation for non-finite numbers; they are written as
/// the strings `"inf"`, `"-inf"` and `"nan"`.
#[cfg(feature = "serde")]
pub mod serde_float {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> core::result::Result<S::Ok, S::Error> {
        if x.is_nan() {
            s.serialize_str("nan")
        } else if x.is_infinite() {
            s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(alloc::string::String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(de::Error::invalid_value(de::Unexpected::Str(other), &"a number, inf, -inf or nan")),
            },
        }
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> core::result::Result<S::Ok, S::Error> {
            match x {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<Option<f64>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(with = "super")] f64);
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}
