"""Sidecar command line: serve checkpoints, make fixtures, record transcripts."""

from __future__ import annotations

import argparse
import base64
import json
import sys
from pathlib import Path

import numpy as np
import torch

from .models import (
    ARCHITECTURES,
    TRAINED_VARIANTS,
    build_model,
    count_parameters,
    parameter_count_matches,
    seeded_checkpoint,
)
from .server import (
    INPUT_SIZE,
    CheckpointMismatchError,
    InferenceSession,
    ModelSpec,
    serve_stdio,
    serve_tcp,
)


def _spec_from_args(args) -> ModelSpec:
    num_classes = args.classes or TRAINED_VARIANTS[args.arch][1]
    spec = ModelSpec(
        architecture=args.arch,
        clip_depth=args.depth,
        num_classes=num_classes,
        checkpoint_path=args.checkpoint,
    )
    if getattr(args, "norm_mean", None):
        spec.mean = tuple(float(v) for v in args.norm_mean.split(","))
    if getattr(args, "norm_std", None):
        spec.std = tuple(float(v) for v in args.norm_std.split(","))
    return spec


def cmd_serve(args) -> int:
    try:
        session = InferenceSession(
            _spec_from_args(args), allow_param_mismatch=args.allow_param_mismatch
        )
    except (CheckpointMismatchError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(
        f"serving {args.arch} depth {args.depth} "
        f"({session.param_count} parameters) on {args.listen}",
        file=sys.stderr,
        flush=True,
    )
    if args.listen == "stdio":
        serve_stdio(session)
        return 0
    kind, _, address = args.listen.partition(":")
    if kind != "tcp" or not address:
        print(f"error: --listen must be stdio or tcp:HOST:PORT, got {args.listen!r}", file=sys.stderr)
        return 1
    host, _, port = address.rpartition(":")
    serve_tcp(session, host or "127.0.0.1", int(port), max_connections=args.max_connections)
    return 0


def cmd_make_checkpoint(args) -> int:
    num_classes = args.classes or TRAINED_VARIANTS[args.arch][1]
    state = seeded_checkpoint(args.arch, args.depth, num_classes, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    torch.save(state, out)
    print(f"wrote seeded {args.arch} checkpoint to {out}")
    return 0


def cmd_params(args) -> int:
    failures = 0
    for arch, (depths, classes) in TRAINED_VARIANTS.items():
        for depth in depths:
            model = build_model(arch, depth, classes)
            ok, actual, published = parameter_count_matches(arch, depth, model)
            status = "ok" if ok else "MISMATCH"
            print(
                f"{arch:<12} depth {depth:>2}: {actual:>12,} parameters "
                f"(published {published / 1e6:.2f}M) {status}"
            )
            failures += 0 if ok else 1
    return 1 if failures else 0


def cmd_record_transcript(args) -> int:
    spec = _spec_from_args(args)
    session = InferenceSession(spec, allow_param_mismatch=args.allow_param_mismatch)
    rng = np.random.default_rng(args.seed)
    lines = []

    hello_request = {"op": "hello"}
    lines.append({"send": hello_request, "recv": session.handle_line(json.dumps(hello_request).encode())})
    for request_id in range(args.clips):
        frames = rng.integers(
            0, 256, size=(spec.clip_depth, INPUT_SIZE, INPUT_SIZE, 3), dtype=np.uint8
        )
        request = {
            "op": "infer",
            "id": request_id,
            "shape": [3, spec.clip_depth, INPUT_SIZE, INPUT_SIZE],
            "data_b64": base64.b64encode(frames.tobytes()).decode("ascii"),
        }
        lines.append({"send": request, "recv": session.handle_line(json.dumps(request).encode())})

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for entry in lines:
            fh.write(json.dumps(entry) + "\n")
    print(f"recorded hello + {args.clips} infer round-trips to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gesturekit-sidecar", description="Neural inference server for the gesture pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_args(p, with_checkpoint=True):
        p.add_argument("--arch", required=True, choices=ARCHITECTURES)
        p.add_argument("--depth", type=int, required=True, choices=(8, 16, 32))
        p.add_argument("--classes", type=int, default=None, help="defaults to the trained variant")
        if with_checkpoint:
            p.add_argument("--checkpoint", help="state_dict .pt file; omit for random init")
            p.add_argument("--norm-mean", help="per-channel mean, e.g. 0.5,0.5,0.5")
            p.add_argument("--norm-std", help="per-channel std, e.g. 0.5,0.5,0.5")
            p.add_argument("--allow-param-mismatch", action="store_true")

    p_serve = sub.add_parser("serve", help="answer wire-protocol requests")
    add_model_args(p_serve)
    p_serve.add_argument("--listen", default="stdio", help="stdio or tcp:HOST:PORT")
    p_serve.add_argument("--max-connections", type=int, default=None, help="stop after N connections (tcp)")
    p_serve.set_defaults(func=cmd_serve)

    p_make = sub.add_parser("make-checkpoint", help="write a seeded random-init checkpoint")
    add_model_args(p_make, with_checkpoint=False)
    p_make.add_argument("--seed", type=int, default=0)
    p_make.add_argument("--out", required=True)
    p_make.set_defaults(func=cmd_make_checkpoint)

    p_params = sub.add_parser("params", help="parameter counts vs published figures")
    p_params.set_defaults(func=cmd_params)

    p_rec = sub.add_parser("record-transcript", help="record golden request/response pairs")
    add_model_args(p_rec)
    p_rec.add_argument("--clips", type=int, default=3)
    p_rec.add_argument("--seed", type=int, default=0)
    p_rec.add_argument("--out", required=True)
    p_rec.set_defaults(func=cmd_record_transcript)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
