//! Joint trajectory, power and artificial-noise design for a secure
//! two-phase UAV link.
//!
//! In the first half of every slot the ground receiver (Bob) broadcasts
//! artificial noise (AN); in the second half the UAV transmitter (Alice)
//! sends its message together with an amplified copy of what it received.
//! Bob cancels the AN he generated, a passive ground eavesdropper cannot.
//! The average secrecy rate over a fixed horizon is maximized by block
//! coordinate descent over Alice's power, Bob's power, the power split and
//! the trajectory.

pub mod alice_power;
pub mod an_split;
pub mod bcd;
pub mod bob_power;
pub mod error;
pub mod experiments;
pub mod scenario;
pub mod secrecy;
pub mod trajectory;

pub use bcd::{bcd_solve, bcd_solve_observed, Block, BlockEvent, SchemeKind, SolveReport};
pub use error::{Error, Result};
pub use scenario::{Point, PowerBudget, PowerLimits, ScenarioConfig, SolverTolerances, Trajectory};
pub use secrecy::{average_secrecy_rate, PowerAllocation, SlotLink};
