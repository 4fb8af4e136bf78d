import logging

DEFAULT_LEVEL = logging.INFO
SEED = 1234
