# -*- coding: utf-8 -*-
"""实验分派"""
from .experiments import EXPERIMENT_RUNNERS, ExperimentOutcome, run_experiment
