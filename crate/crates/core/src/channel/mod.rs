//! BS-RIS and RIS-UE channel generation under the IID Rayleigh and the
//! clustered geometric models.

mod doppler;
mod geometric;
mod iid;
mod realization;
mod scenario;
pub(crate) mod steering;

pub use doppler::{doppler_correlation, signed_doppler_correlation, TemporalColoring};
pub use geometric::{gen_geometric, line_of_sight, GeometricGenerator};
pub use iid::{gen_iid, IidGenerator};
pub use realization::{ChannelRealization, Cluster, ClusterTruth, Direction, Ray};
pub use scenario::{db_to_linear, linear_to_db, Scenario};
pub use steering::steering_vector;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mathkit::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelModel {
    Iid,
    Geometric,
}

impl ChannelModel {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelModel::Iid => "iid",
            ChannelModel::Geometric => "geometric",
        }
    }
}

impl std::str::FromStr for ChannelModel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(Self::Iid),
            "geometric" => Ok(Self::Geometric),
            other => Err(crate::error::invalid("channel", format!("unknown channel model `{other}`"))),
        }
    }
}

/// `(sigma_h^2, sigma_g^2)`: average per-entry gain of each link.
///
/// The geometric cluster powers are normalized to 1, so there the gains
/// reduce to the large-scale terms.
pub fn average_gains(scenario: &Scenario, model: ChannelModel) -> (f64, f64) {
    match model {
        ChannelModel::Iid => (
            scenario.bs_ris_gain() * scenario.bs_ris_variance,
            scenario.ris_ue_gain() * scenario.ris_ue_variance,
        ),
        ChannelModel::Geometric => (scenario.bs_ris_gain(), scenario.ris_ue_gain()),
    }
}

/// Either generator, built once and reused across trials.
#[derive(Debug, Clone)]
pub enum ChannelGenerator {
    Iid(IidGenerator),
    Geometric(GeometricGenerator),
}

impl ChannelGenerator {
    pub fn new(scenario: &Scenario, model: ChannelModel) -> Result<Self> {
        Ok(match model {
            ChannelModel::Iid => Self::Iid(IidGenerator::new(scenario)?),
            ChannelModel::Geometric => Self::Geometric(GeometricGenerator::new(scenario)?),
        })
    }

    pub fn generate(&self, rng: &mut RngStream) -> ChannelRealization {
        match self {
            Self::Iid(g) => g.generate(rng),
            Self::Geometric(g) => g.generate(rng),
        }
    }
}
