//! Bundled instances.
//!
//! The figure-eight instance is committed as data, transcribed from the
//! dual graph of the branched surface carried by the suspension flow of the
//! torus map `[[2,1],[1,1]]` blown up at the origin. The double cover is
//! generated from it deterministically.

use crate::model::{parse_complex, VeeringComplex};

pub const FIG8_JSON: &str = include_str!("../data/fig8.json");

/// Names of the instances available through [`load`].
pub fn bundled_datasets() -> Vec<&'static str> {
    vec!["fig8", "fig8-cover2"]
}

/// The figure-eight instance.
pub fn fig8() -> VeeringComplex {
    parse_complex(FIG8_JSON).expect("bundled fig8 instance must parse")
}

/// Double cyclic cover of the figure-eight instance along its fiber
/// cocycle.
pub fn fig8_cover2() -> VeeringComplex {
    let base = fig8();
    let w = base
        .fiber_cocycle
        .clone()
        .expect("bundled fig8 instance carries a fiber cocycle");
    base.cyclic_cover(2, &w)
        .expect("double cover of fig8 must be connected and valid")
}

/// Look a bundled instance up by name.
pub fn load(name: &str) -> Option<VeeringComplex> {
    match name {
        "fig8" => Some(fig8()),
        "fig8-cover2" => Some(fig8_cover2()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_list_is_stable() {
        assert_eq!(bundled_datasets(), bundled_datasets());
        assert_eq!(bundled_datasets(), vec!["fig8", "fig8-cover2"]);
    }

    #[test]
    fn every_bundled_dataset_validates() {
        for name in bundled_datasets() {
            let cx = load(name).unwrap();
            assert!(cx.validate().passed(), "{name} fails validation");
        }
    }
}
