//! Forcing and initial-data generators, independent oracles, and the
//! estimate catalogue that audits solver output.

mod audit;
mod forcing;
mod heat;
mod initial;
mod manufactured;
mod modes;
mod quadrature;
mod records;
mod sweeps;

pub use audit::{
    bochner_w2, energy_records, funds3_record, holder_report, verify_prop31, verify_theorem12, AuditConfig,
    HolderReport, LedgerTotals,
};
pub use forcing::{
    make_forcing, make_rough_forcing, rough_radial_field, ForcingShape, ForcingSource, ForcingSpec, TimeProfile,
};
pub use heat::{heat_reference, HeatVariant};
pub use initial::{make_initial, InitialSpec};
pub use manufactured::{manufactured_forcing, ManufacturedSolution};
pub use modes::SineMode;
pub use quadrature::radial_cell_average;
pub use records::{fmt_f64, EstimateId, EstimateRecord, RecordMeta, SweepReport, Uniformity};
pub use sweeps::{dnq_mu_sweep, mu_limit_study, MuLimitRow, MuLimitTable, STANDARD_MU_SWEEP};
