use super::canceller::{composite_canceller, CancellerSpec};
use super::controller::{controller_tf, ControllerSpec};
use super::Fotf;
use crate::error::Result;

/// Plant `G`, pre-compensator `C1` and feedback controller `C2` in the
/// series arrangement `C2 -> C1 -> G` under unity negative feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopModel {
    pub plant: Fotf,
    pub canceller: CancellerSpec,
    pub controller: ControllerSpec,
}

/// Closed-loop maps of a [`LoopModel`]. The disturbance enters at the plant
/// input, between `C1` and `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopMaps {
    /// Open loop `C2 C1 G`.
    pub open_loop: Fotf,
    /// Reference to output, `L/(1+L)`.
    pub complementary: Fotf,
    /// Reference to error, `1/(1+L)`.
    pub sensitivity: Fotf,
    /// Input disturbance to output, `G/(1+L)`.
    pub disturbance: Fotf,
    /// Reference to plant input, `C2 C1/(1+L)`.
    pub effort: Fotf,
}

impl LoopModel {
    pub fn new(plant: Fotf, canceller: CancellerSpec, controller: ControllerSpec) -> Self {
        LoopModel {
            plant,
            canceller,
            controller,
        }
    }

    /// `C2 C1`.
    pub fn compensator(&self) -> Result<Fotf> {
        Ok(controller_tf(&self.controller)?.mul(&composite_canceller(&self.canceller)?))
    }
}

/// All closed-loop maps share the characteristic polynomial `nL + dL`, built
/// from the component numerators and denominators without any cancellation.
pub fn loop_maps(m: &LoopModel) -> Result<LoopMaps> {
    maps_from_parts(&m.plant, &m.compensator()?)
}

/// Loop maps for an arbitrary forward compensator in place of `C2 C1`.
pub fn maps_from_parts(plant: &Fotf, comp: &Fotf) -> Result<LoopMaps> {
    let open_loop = comp.mul(plant);
    let (n_l, d_l) = (open_loop.num(), open_loop.den());
    let characteristic = n_l.add(d_l);
    Ok(LoopMaps {
        complementary: Fotf::new(n_l.clone(), characteristic.clone())?,
        sensitivity: Fotf::new(d_l.clone(), characteristic.clone())?,
        disturbance: Fotf::new(plant.num().mul(comp.den()), characteristic.clone())?,
        effort: Fotf::new(comp.num().mul(plant.den()), characteristic)?,
        open_loop,
    })
}
