"""Global constants for MetaQuant.

These values serve as defaults for configuration dataclasses.  Run configs
override them per experiment; the few process-level knobs at the bottom
read environment variables instead.
"""

import os

# Quantizer
MIN_BITWIDTH = 1
MAX_BITWIDTH = 8
DEFAULT_STE_CLIP = 1.0
DEFAULT_GRAD_CLIP = 1.0

# Hypernetwork
DEFAULT_HIDDEN_WIDTH = 64
# Bitwidth code fed to each block is q / BITWIDTH_ENCODING_SCALE.
BITWIDTH_ENCODING_SCALE = 8.0

# Training
DEFAULT_EPOCHS = 40
DEFAULT_WARM_EPOCHS = 12
DEFAULT_HALVE_EVERY = 6
DEFAULT_BATCH_SIZE = 64
DEFAULT_LR = 0.1
DEFAULT_MOMENTUM = 0.9
DEFAULT_WEIGHT_DECAY = 1e-4

# Search
DEFAULT_POPULATION = 50
DEFAULT_GENERATIONS = 20
DEFAULT_PARENTS = 10
DEFAULT_MUTATION_PROB = 0.1
OFFSPRING_RETRIES = 100
DEFAULT_EVAL_SAMPLES = 1024
EXHAUSTIVE_CAP = 10_000

# Size accounting
FLOAT_BITS = 32
SIDE_PARAMS_PER_LAYER = 3  # gamma, alpha, beta

# Datasets
DEFAULT_SPLIT = (0.8, 0.1, 0.1)
DEFAULT_IMAGE_SIZE = 8
DEFAULT_CLASSES = 4

# Checkpoints
CHECKPOINT_MAGIC = b"MQNCKPT1"
CHECKPOINT_FORMAT_VERSION = 1

# Process-level knobs (read after .env is loaded)
LOG_LEVEL_ENV = "METAQUANT_LOG_LEVEL"
EVAL_WORKERS_ENV = "METAQUANT_EVAL_WORKERS"
OUTPUT_DIR_ENV = "METAQUANT_OUTPUT_DIR"
DEFAULT_LOG_LEVEL = "INFO"


def env_eval_workers() -> int:
    return int(os.environ.get(EVAL_WORKERS_ENV, "1"))
