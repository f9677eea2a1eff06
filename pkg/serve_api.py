#!/usr/bin/env python3
"""
Prediction API server for a trained checkpoint.

Endpoints:
- GET  /health
- GET  /api/model    dimensions, class names and configuration
- POST /api/predict  class predictions for a batch of feature rows

Usage:
    python serve_api.py --checkpoint out/model.npz
    MGPLL_CHECKPOINT=out/model.npz python serve_api.py --port 8080
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from src.mgpll.errors import MgpllError

ENV_CHECKPOINT = "MGPLL_CHECKPOINT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="MGPLL prediction API server")
    parser.add_argument("-c", "--checkpoint", type=Path, default=None,
                        help=f"Model checkpoint (or set {ENV_CHECKPOINT})")
    parser.add_argument("-p", "--port", type=int, default=8000, help="Port to listen on (default: 8000)")
    parser.add_argument("--host", type=str, default="127.0.0.1", help="Host to bind to (default: 127.0.0.1)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log requests at INFO level")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    checkpoint = args.checkpoint or os.environ.get(ENV_CHECKPOINT)
    if not checkpoint:
        print(f"error[config]: no checkpoint; pass --checkpoint or set {ENV_CHECKPOINT}", file=sys.stderr)
        return 2

    try:
        import uvicorn

        from src.mgpll.model import load_checkpoint
        from src.mgpll.serving import create_app
    except ImportError as e:
        print(f"error[dependency]: {e} (pip install fastapi uvicorn)", file=sys.stderr)
        return 1

    try:
        model = load_checkpoint(checkpoint).model
        app = create_app(checkpoint, model=model)
    except MgpllError as e:
        print(f"error[{e.category}]: {e}", file=sys.stderr)
        return 2

    print("MGPLL prediction API")
    print("=" * 40)
    print(f"Checkpoint: {checkpoint}")
    print(f"Model:      d={model.n_features} L={model.n_classes} scaler={'yes' if model.scaler else 'no'}")
    print(f"API:        http://{args.host}:{args.port}/api/predict")
    print(f"Docs:       http://{args.host}:{args.port}/docs")

    try:
        uvicorn.run(app, host=args.host, port=args.port)
    except KeyboardInterrupt:
        print("\nShutting down...")
    return 0


if __name__ == "__main__":
    sys.exit(main())
