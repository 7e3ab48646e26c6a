//! Gadgets reducing 3-SAT to motivating-subgraph and reward-placement
//! problems, with maps between assignments and solutions.

pub mod cnf;

pub use cnf::{parse_dimacs, render_dimacs, sat_oracle, Assignment, CnfError, Formula3Cnf, Literal};
pub mod mms;
pub mod mtr;

pub use mms::{assignment_to_mms, build_mms_gadget, mms_to_assignment, MmsConstants, MmsError, MmsGadget};
pub use mtr::{
    assignment_to_rewards, build_mtr_gadget, build_mtr_gadget_padded, rewards_to_assignment, verify_constants, MtrConstants,
    MtrError, MtrGadget,
};
