class Analysis():
    def __init__(self, data, message):
        logger.info("Initializing")

        if data is None:
            logger.debug("Data not yet available")
        else:
            logger.debug("Data available")
        if message is None:
            logger.debug("No message received")
