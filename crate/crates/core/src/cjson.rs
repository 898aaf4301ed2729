//! Complex numbers on the wire: `[re, im]`, or a bare number for a real value.

use num_complex::Complex64;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use std::fmt;

pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&c.re)?;
    t.serialize_element(&c.im)?;
    t.end()
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    d.deserialize_any(ComplexVisitor)
}

struct ComplexVisitor;

impl<'de> Visitor<'de> for ComplexVisitor {
    type Value = Complex64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a [re, im] pair")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Complex64, E> {
        Ok(Complex64::new(v, 0.0))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Complex64, E> {
        Ok(Complex64::new(v as f64, 0.0))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Complex64, E> {
        Ok(Complex64::new(v as f64, 0.0))
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Complex64, A::Error> {
        let re: f64 = seq
            .next_element()?
            .ok_or_else(|| de::Error::invalid_length(0, &self))?;
        let im: f64 = seq
            .next_element()?
            .ok_or_else(|| de::Error::invalid_length(1, &self))?;
        if seq.next_element::<f64>()?.is_some() {
            return Err(de::Error::invalid_length(3, &self));
        }
        Ok(Complex64::new(re, im))
    }
}
