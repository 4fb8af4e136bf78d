import argparse
import logging

from fstore.ingest import ingest

logger = logging.getLogger("fstore.cli")


def build_parser():
    parser = argparse.ArgumentParser(prog="fstore")
    parser.add_argument("paths", nargs="+")
    parser.add_argument("--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    logger.debug("Arguments: %s", vars(args))
    store = open_store()
    count = ingest(store, args.paths)
    logger.info(f"Done: {count} rows")
    return 0


def open_store():
    from fstore.backends import LocalStore

    return LocalStore()
