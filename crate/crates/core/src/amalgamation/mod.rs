//! Amalgamation classes and the random class of a permitted P2 set.

mod class;
mod p2;

pub use class::{
    age, amalgamate, check_ap, check_hp, enumerate_rp2, random_amalgam, Amalgam, ApReport, ApTriple, ApVerdict,
    ClassSpec, HpReport, HpViolation,
};
pub use p2::{check_1_adequate, link, point_type, AdequacyReport, Link, P2Spec, PointType};
pub(crate) use p2::{all_links, all_point_types, apply_link, apply_point_type};
