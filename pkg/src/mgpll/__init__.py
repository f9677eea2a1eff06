# MGPLL: multi-level adversarial partial-label learning
# Numerical core, PL datasets, model, training and evaluation harness

__version__ = "0.1.0"
