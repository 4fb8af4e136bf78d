#!/usr/bin/env python
"""Export a trained classifier to ONNX."""
import argparse
import logging
import sys

import torch

from vision_kit.models.resnet import resnet18

logging.basicConfig(level=logging.INFO)


def parse_args(argv):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("checkpoint")
    parser.add_argument("--output", default="model.onnx")
    parser.add_argument("--classes", type=int, default=10)
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv if argv is not None else sys.argv[1:])
    model = resnet18(args.classes, pretrained=args.checkpoint)
    model.eval()
    dummy = torch.randn(1, 3, 224, 224)
    try:
        torch.onnx.export(model, dummy, args.output, opset_version=17)
    except RuntimeError:
        logging.exception("ONNX export failed")
        return 1
    logging.info("Wrote %s", args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
