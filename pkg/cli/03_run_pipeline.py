# -----------------------------------------------------------
# cli/03_run_pipeline.py
# -----------------------------------------------------------
# Run the labeling / kernel / SVM pipeline from a config file
# -----------------------------------------------------------

"""
python3 cli/03_run_pipeline.py --config configs/synthetic.json
python3 cli/03_run_pipeline.py --config configs/synthetic.json --stage fit --workers 4
python3 cli/03_run_pipeline.py --config configs/synthetic.json --seed-override split_seed=7
"""

import utils  # noqa: F401  (puts the repo root on sys.path)
from ohcsvm.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
