//! Named experiment presets.
//!
//! Each preset bundles the initialization, parameterization, optimizer,
//! frequency lattice and domain of one reference experiment family. Widths
//! are post-symmetrization totals: experiments draw `width / 2` neurons and
//! antisymmetrically double them, so `width` is the neuron count actually
//! trained. Optimizer settings are defaults, overridable per run.

use crate::error::{LfpError, Result};
use crate::nn::{InitSpec, NetForm, ParamDist};
use crate::train::Optimizer;

/// A named experiment configuration.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub d: usize,
    pub form: NetForm,
    pub init: InitSpec,
    /// Default trained width (after antisymmetric doubling; always even).
    pub default_width: usize,
    pub optimizer: Optimizer,
    /// Training-loss threshold at which runs stop.
    pub stop_loss: f64,
    /// Default step budget.
    pub max_steps: usize,
    pub lattice_l_prime: f64,
    pub lattice_k_max: i64,
    /// Canonical training domain.
    pub domain: Vec<(f64, f64)>,
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 4] = ["fig1_smooth", "fig1_rough", "fig2_xor", "fig3_sweep"];

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<Preset> {
    match name {
        "fig1_smooth" => Ok(Preset {
            name: "fig1_smooth",
            d: 1,
            form: NetForm::OneD,
            init: InitSpec {
                w: ParamDist::Uniform { lo: -0.1, hi: 0.1 },
                r: ParamDist::Uniform {
                    lo: -0.25,
                    hi: 0.25,
                },
                l: ParamDist::Uniform { lo: -1.0, hi: 1.0 },
            },
            default_width: 5000,
            optimizer: Optimizer::gd(3e-5),
            stop_loss: 1e-6,
            max_steps: 200_000,
            lattice_l_prime: 20.0,
            lattice_k_max: 2000,
            domain: vec![(-1.0, 1.0)],
        }),
        "fig1_rough" => Ok(Preset {
            name: "fig1_rough",
            d: 1,
            form: NetForm::OneD,
            init: InitSpec {
                w: ParamDist::Uniform { lo: -2.0, hi: 2.0 },
                r: ParamDist::Uniform { lo: -2.0, hi: 2.0 },
                l: ParamDist::Uniform { lo: -1.0, hi: 1.0 },
            },
            default_width: 5000,
            optimizer: Optimizer::gd(3e-5),
            stop_loss: 1e-6,
            max_steps: 200_000,
            lattice_l_prime: 20.0,
            lattice_k_max: 2000,
            domain: vec![(-1.0, 1.0)],
        }),
        "fig2_xor" => Ok(Preset {
            name: "fig2_xor",
            d: 2,
            form: NetForm::GeneralD,
            init: InitSpec {
                w: ParamDist::Normal { std: 1.0 },
                // variance 0.49 per coordinate
                r: ParamDist::Normal { std: 0.7 },
                l: ParamDist::Uniform { lo: -4.0, hi: 4.0 },
            },
            default_width: 1000,
            optimizer: Optimizer::gd(3e-5),
            stop_loss: 1e-6,
            max_steps: 200_000,
            lattice_l_prime: 24.0,
            lattice_k_max: 120,
            domain: vec![(-1.0, 1.0), (-1.0, 1.0)],
        }),
        "fig3_sweep" => Ok(Preset {
            name: "fig3_sweep",
            d: 1,
            form: NetForm::OneD,
            init: InitSpec {
                w: ParamDist::XavierNormal,
                r: ParamDist::XavierNormal,
                // kink positions have no fan convention; spread them over
                // the training domain
                l: ParamDist::Uniform { lo: 0.0, hi: 1.0 },
            },
            default_width: 5000,
            optimizer: Optimizer::adam(1e-4),
            stop_loss: 1e-6,
            max_steps: 400_000,
            lattice_l_prime: 1.0,
            lattice_k_max: 1024,
            domain: vec![(0.0, 1.0)],
        }),
        other => Err(LfpError::Config(format!(
            "unknown preset {other:?}; expected one of {PRESET_NAMES:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_names_resolve_and_are_consistent() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert_eq!(p.name, name);
            assert_eq!(p.domain.len(), p.d);
            assert_eq!(p.default_width % 2, 0, "widths are post-doubling totals");
            assert!(p.stop_loss > 0.0);
            assert!(p.lattice_k_max >= 2);
        }
        assert!(preset("fig9_unknown").is_err());
    }

    #[test]
    fn pinned_values_do_not_drift() {
        let smooth = preset("fig1_smooth").unwrap();
        assert_eq!(smooth.init.w, ParamDist::Uniform { lo: -0.1, hi: 0.1 });
        assert_eq!(
            smooth.init.r,
            ParamDist::Uniform {
                lo: -0.25,
                hi: 0.25
            }
        );
        assert_eq!(smooth.init.l, ParamDist::Uniform { lo: -1.0, hi: 1.0 });
        assert_eq!(smooth.lattice_l_prime, 20.0);
        assert_eq!(smooth.lattice_k_max, 2000);

        let rough = preset("fig1_rough").unwrap();
        assert_eq!(rough.init.w, ParamDist::Uniform { lo: -2.0, hi: 2.0 });
        assert_eq!(rough.init.r, ParamDist::Uniform { lo: -2.0, hi: 2.0 });

        let xor = preset("fig2_xor").unwrap();
        assert_eq!(xor.d, 2);
        assert_eq!(xor.form, NetForm::GeneralD);
        assert_eq!(xor.init.w, ParamDist::Normal { std: 1.0 });
        assert_eq!(xor.init.r, ParamDist::Normal { std: 0.7 });
        assert_eq!(xor.init.l, ParamDist::Uniform { lo: -4.0, hi: 4.0 });
        assert_eq!(xor.lattice_l_prime, 24.0);
        assert_eq!(xor.lattice_k_max, 120);

        let sweep = preset("fig3_sweep").unwrap();
        assert_eq!(sweep.init.w, ParamDist::XavierNormal);
        assert_eq!(sweep.init.r, ParamDist::XavierNormal);
        assert_eq!(sweep.default_width, 5000);
        match sweep.optimizer {
            Optimizer::Adam { lr, .. } => assert_eq!(lr, 1e-4),
            other => panic!("fig3_sweep must default to Adam, got {other:?}"),
        }
    }
}
