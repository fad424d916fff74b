//! Finite probability spaces, channels and relative entropy.

mod channel;
mod dist;
mod divergence;
mod extreal;
mod finset;

pub use channel::{is_section, section_violation, Channel, DetMap};
pub use dist::Dist;
pub use divergence::{conditional_kl, joint, kl};
pub use extreal::{ExtReal, LogBase};
pub use finset::{FinSet, PRODUCT_SEP, UNION_SEP};
