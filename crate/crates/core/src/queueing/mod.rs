//! Request queues at each node type: service-rate matrix, multiclass
//! processor-sharing metrics, steady ruler, the no-caching baseline and a
//! CTMC simulator of the same queues.

mod ctmc;
mod metrics;
mod model;
mod rates;

pub use ctmc::{ctmc_simulate, CtmcOptions, CtmcQueue, CtmcTrace, Transition};
pub use metrics::{
    class_loads, node_densities, queue_metrics, ClassLoads, ClassMetrics, NodeMetrics, NodeState, QueueMetrics,
};
pub use model::{compare_with_baseline, BaselineComparison, QueueModel, SteadyRuler};
pub use rates::{rate_matrix, CaseRates, RateMatrix};
