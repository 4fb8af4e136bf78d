import csv
import logging

logger = logging.getLogger(__name__)


def read_rows(path, required):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            logger.error("File %s lacks columns %s", path, missing)
            return rows
        for i, row in enumerate(reader):
            if not all(row[c] for c in required):
                logger.debug("Skipping incomplete row %d", i)
                continue
            rows.append(row)
    logger.info("Read %d rows from %s", len(rows), path)
    return rows


def ingest(store, paths, required=("id", "ts")):
    total = 0
    for path in paths:
        rows = read_rows(path, required)
        store.write(rows)
        total += len(rows)
    logger.info("Ingested %d rows from %d files", total, len(paths))
    return total
