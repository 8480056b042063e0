//! Stylized-facts toolkit: band-pass cycles, cyclicality, inequality, firm
//! moments and the Phillips, Okun and Beveridge relations.
//!
//! Definitions used throughout:
//! * unemployment rate: `1 - employed / households` (everyone is in the
//!   labor force);
//! * vacancy rate: `sum_j max(0, ceil(planned hours / hours per worker) -
//!   headcount) / households`;
//! * real wage: hours-weighted nominal wage over the CPI level `sum_j p_j`;
//! * labor productivity: real GDP per labor hour.

pub mod filter;
pub mod firms;
pub mod inequality;
pub mod relations;
pub mod report;
pub mod series;
pub mod stats;

pub use filter::{bandpass_cycle, Band, FilterError};
pub use firms::{firm_moments, FirmBlock};
pub use inequality::{income_shares, lorenz_gini, Lorenz, SharePaths};
pub use relations::{relation_points, Relation, Relations};
pub use report::{analyze, Analysis, FactError, FactReport};
pub use series::MacroSeries;
pub use stats::{cyclicality, moments, ols, pearson, Cyclicality};
