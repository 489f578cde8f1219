pub mod bus;
pub mod feedback;
pub mod follow;
pub mod retarget;
pub mod simulate;
pub mod solve;
