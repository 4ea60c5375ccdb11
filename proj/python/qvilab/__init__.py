"""Finite-horizon MDP planning with emulated quantum value iteration."""

from ._core import (
    Mdp,
    brute_force_optimal,
    btp_cost,
    fit_slope,
    hard_instance,
    policy_value,
    qme1_cost,
    qme2_cost,
    qmebo_cost,
    qmebo_exact,
    qms_cost,
    random_mdp,
    random_sparse_mdp,
    solve,
    value_iteration,
)

__all__ = [
    "Mdp",
    "brute_force_optimal",
    "btp_cost",
    "fit_slope",
    "hard_instance",
    "policy_value",
    "qme1_cost",
    "qme2_cost",
    "qmebo_cost",
    "qmebo_exact",
    "qms_cost",
    "random_mdp",
    "random_sparse_mdp",
    "solve",
    "value_iteration",
]
