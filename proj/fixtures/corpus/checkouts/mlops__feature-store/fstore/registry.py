import logging

logger = logging.getLogger(__name__)


class FeatureRegistry:
    def __init__(self):
        self._features = {}

    def register(self, name, dtype, description=""):
        if name in self._features:
            logger.warning("Feature %s already registered; overwriting", name)
        self._features[name] = {"dtype": dtype, "description": description}
        logger.info("Registered feature " + name)

    def get(self, name):
        try:
            return self._features[name]
        except KeyError:
            logger.error("Unknown feature %s", name)
            raise

    def describe(self):
        match len(self._features):
            case 0:
                logger.info("Registry is empty")
            case n:
                logger.info("Registry holds %d features", n)
        return sorted(self._features)
