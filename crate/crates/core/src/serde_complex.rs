//! Serializes `Complex64` fields as `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

pub fn serialize<S: Serializer>(z: &Complex64, serializer: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(serializer)
}
