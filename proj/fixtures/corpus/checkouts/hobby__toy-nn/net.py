import logging

logging.info("toy")
