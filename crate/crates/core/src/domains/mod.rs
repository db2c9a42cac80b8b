//! Concrete objectives: budget allocation with uncertain profits and
//! influence spread on a graph.

mod budget;
mod influence;

pub use budget::{
    make_adversarial_instance, make_random_instance, BudgetAllocInstance, BudgetInstanceFile, BudgetObjective,
    ProfitUncertaintySet, RandomInstanceSpec,
};
pub use influence::{influence_set_objective, InfluenceObjective, SAMPLED_EXACT_COINS};
