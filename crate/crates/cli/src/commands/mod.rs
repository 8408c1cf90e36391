pub mod classify;
pub mod equilibrium;
pub mod portrait;
pub mod propagate;
pub mod scan;

pub use classify::cmd_classify;
pub use equilibrium::{cmd_equilibrium, EquilibriumReport};
pub use portrait::{cmd_portrait, render_svg, write_portrait_csv, Portrait, PortraitGrid};
pub use propagate::{cmd_propagate, Coords, PropagateOutput, PropagateRequest, PropagateSummary};
pub use scan::{cmd_scan, write_scan_csv};
