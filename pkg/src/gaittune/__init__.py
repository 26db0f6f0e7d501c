"""Convex gait optimization with closed-loop Bayesian tuning of cost weights.

The pipeline: a QP plans CoM/ZMP/footstep trajectories for a linear
inverted pendulum, an iterative LQR controller tracks the plan on a
disturbance-injected point-mass plant, and a Gaussian-process Bayesian
optimizer tunes the QP cost weights to minimize a fall-penalized
velocity-tracking objective.
"""

from gaittune.lipm import ComState, LipmParams, ZmpPoint, propagate, zmp_of, rcof_of
from gaittune.qp import GaitWeights, GaitTask, GaitPlan, build_problem, solve_qp, plan_gait
from gaittune.swing import SwingTrajectory, plan_swing
from gaittune.plant import PlantParams, PlantState, PlantTrace, Disturbance, simulate
from gaittune.gp import SquaredExponentialKernel, GaussianProcess
from gaittune.bo import BayesOpt, BoConfig, BoRun

__all__ = [
    "ComState", "LipmParams", "ZmpPoint", "propagate", "zmp_of", "rcof_of",
    "GaitWeights", "GaitTask", "GaitPlan", "build_problem", "solve_qp", "plan_gait",
    "SwingTrajectory", "plan_swing",
    "PlantParams", "PlantState", "PlantTrace", "Disturbance", "simulate",
    "SquaredExponentialKernel", "GaussianProcess",
    "BayesOpt", "BoConfig", "BoRun",
]

__version__ = "0.1.0"
