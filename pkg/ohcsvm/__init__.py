# ---------------------------------------------------------------------
# ohcsvm/__init__.py
# ---------------------------------------------------------------------
# Failure classification of open-hole composite plates with soft-margin
# SVMs on classical (RBF, polynomial, sigmoid) and simulated quantum
# (IQP, HE2) kernels.
# ---------------------------------------------------------------------

__version__ = "1.0.0"
