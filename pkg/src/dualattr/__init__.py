"""dualattr: multi-touch attribution with a dual-attention recurrent model.

Subpackages:
  seqdata    - ad-event log parsing, sequence building, sampling, vocab
  tensorcore - dense tensors with reverse-mode differentiation
  darnn      - the dual-attention recurrent model and its trainer
  baselines  - logistic-regression, simple-probabilistic and rule models
  evalkit    - AUC/log-loss, channel ROI, budget allocation, log replay
  cli        - command-line orchestration
"""

__version__ = "0.1.0"
