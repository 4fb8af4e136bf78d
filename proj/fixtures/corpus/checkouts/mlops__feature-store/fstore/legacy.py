import os
# R�sum� of legacy helpers (latin-1 encoded)


def legacy_path(name):
    return os.path.join("legacy", name)
