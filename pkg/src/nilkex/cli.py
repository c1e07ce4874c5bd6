"""nilkex command line: verify | certify | kex | attack.

Exit codes: 0 success, 1 check failure, 2 usage, 3 degenerate setup,
4 unsupported platform, 5 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .attacks import break_protocol1_ut, break_protocol2_ut
from .commutators import certify_class, certify_engel, run_identity_suite
from .errors import DecodeError, PlatformError, SetupError, UnsupportedPlatformError
from .groups import Platform, parse_platform
from .protocols import Transcript, random_session_params, run_session

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DEGENERATE, EXIT_UNSUPPORTED, EXIT_MALFORMED = range(6)

# exhaustive enumeration is refused above this group order
MAX_EXHAUSTIVE_ORDER = 4096


class UsageError(Exception):
    pass


def _platform(text: str) -> Platform:
    try:
        return parse_platform(text)
    except PlatformError as exc:
        raise UsageError(str(exc)) from exc


def _check_exhaustive(platform: Platform) -> None:
    if platform.order > MAX_EXHAUSTIVE_ORDER:
        raise UsageError(
            f"{platform.name} has order {platform.order}; --exhaustive is limited to "
            f"{MAX_EXHAUSTIVE_ORDER}"
        )


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _certificates(platform: Platform, args, engel_ks) -> tuple[list, bool]:
    certs = [
        certify_class(platform, exhaustive=args.exhaustive, samples=args.samples, seed=args.seed)
    ]
    for k in engel_ks:
        certs.append(
            certify_engel(
                platform, k, exhaustive=args.exhaustive, samples=args.samples, seed=args.seed
            )
        )
    ok = not certs[0].refuted and all(c.recheck() for c in certs)
    # the claimed non-Engel degree must come out non-Engel, the class must come out Engel
    for c in certs[1:]:
        if c.k == platform.claimed_not_engel and c.is_engel and args.exhaustive:
            ok = False
        if c.k >= platform.claimed_class and not c.is_engel:
            ok = False
    return certs, ok


def _describe(cert) -> str:
    d = cert.to_dict()
    if d["kind"] == "class":
        line = f"class {d['status']}: class_upper={d['class_upper']} mode={d['mode']}"
        if d["gamma_orders"]:
            line += f" |gamma_k|={d['gamma_orders']}"
        if d["class_witness"]:
            line += f" witness={','.join(d['class_witness'])}"
        return line
    line = f"engel k={d['k']}: {d['verdict']} mode={d['mode']} pairs={d['pairs_checked']}"
    if d["witness"]:
        line += f" witness={','.join(d['witness'])}"
    return line


def _default_engel_ks(platform: Platform, requested) -> list[int]:
    if requested:
        return requested
    ks = [platform.claimed_class]
    if platform.claimed_not_engel:
        ks.insert(0, platform.claimed_not_engel)
    return ks


def cmd_verify(args) -> int:
    platform = _platform(args.platform)
    if args.exhaustive:
        _check_exhaustive(platform)
    results = run_identity_suite(platform, args.samples, args.seed)
    ok = all(p == t for p, t in results.values())
    payload = {
        "platform": platform.name,
        "samples": args.samples,
        "seed": args.seed,
        "checks": {k: {"passed": p, "total": t} for k, (p, t) in results.items()},
    }
    lines = [f"{platform.name}: identity suite, {args.samples} samples, seed {args.seed}"]
    lines += [
        f"  {'PASS' if p == t else 'FAIL'} {name}: {p}/{t}" for name, (p, t) in results.items()
    ]
    if args.exhaustive:
        certs, cert_ok = _certificates(platform, args, _default_engel_ks(platform, None))
        ok = ok and cert_ok
        payload["certificates"] = [c.to_dict() for c in certs]
        lines += ["  " + _describe(c) for c in certs]
    payload["ok"] = ok
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_certify(args) -> int:
    platform = _platform(args.platform)
    if args.exhaustive:
        _check_exhaustive(platform)
    certs, ok = _certificates(platform, args, _default_engel_ks(platform, args.engel))
    payload = {"platform": platform.name, "ok": ok, "certificates": [c.to_dict() for c in certs]}
    if args.output:
        Path(args.output).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _emit(args, payload, "\n".join([platform.name] + ["  " + _describe(c) for c in certs]))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_kex(args) -> int:
    platform = _platform(args.platform)
    try:
        params = random_session_params(args.protocol, platform, n=args.n, seed=args.seed)
        transcript, keys = run_session(params)
    except SetupError as exc:
        print(f"degenerate setup: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    wire = transcript.to_bytes()
    if args.output:
        Path(args.output).write_bytes(wire)
    agree = len({k.bytes for k in keys}) == 1
    payload = {
        "transcript": transcript.to_dict(),
        "keys": {str(j): k.hex() for j, k in enumerate(keys, start=1)},
        "agree": agree,
        "output": args.output,
    }
    lines = [
        f"Protocol {'I' * args.protocol} on {platform.name}, n={params.n}, "
        f"{params.users} users, seed {args.seed}",
        f"transcript {transcript.transcript_id} ({len(wire)} bytes)"
        + (f" -> {args.output}" if args.output else ""),
    ]
    lines += [f"  user {j}: {k.hex()}" for j, k in enumerate(keys, start=1)]
    lines.append("keys agree" if agree else "KEYS DISAGREE")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if agree else EXIT_FAIL


def cmd_attack(args) -> int:
    try:
        data = Path(args.input).read_bytes()
    except OSError as exc:
        print(f"cannot read transcript: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    try:
        transcript = Transcript.from_bytes(data)
    except DecodeError as exc:
        print(f"malformed transcript: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    attack = break_protocol1_ut if transcript.protocol == 1 else break_protocol2_ut
    try:
        report = attack(transcript)
    except UnsupportedPlatformError as exc:
        print(f"unsupported platform: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    d = report.to_dict()
    lines = [
        f"attack on transcript {report.transcript_id} ({report.platform}, Protocol "
        f"{'I' * transcript.protocol})",
        "  exponents mod {}: {}".format(
            report.exponent_modulus,
            " ".join(f"a{j}={a}" for j, a in report.recovered_exponents.items()),
        ),
        f"  key: {d['key']}",
        f"  group multiplications: {report.operations_count}",
        "  SUCCESS" if report.success else f"  FAILED: {report.error}",
    ]
    _emit(args, d, "\n".join(lines))
    return EXIT_OK if report.success else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nilkex", description="Nilpotent-group multilinear key exchange toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--format", choices=["text", "json"], default="text")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify", help="run the commutator identity suite on a platform")
    p.add_argument("--platform", required=True, help="ut:<m>:<q> or wreath:<p>")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--exhaustive", action="store_true", help="also print exhaustive certificates")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("certify", help="class and Engel certificates")
    p.add_argument("--platform", required=True)
    p.add_argument("--engel", type=int, action="append", help="Engel degree k (repeatable)")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--output", help="write the certificates as JSON")
    common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("kex", help="run a key-exchange session")
    p.add_argument("--protocol", type=int, choices=[1, 2], required=True)
    p.add_argument("--platform", required=True)
    p.add_argument("--n", type=int, help="linearity degree (default: largest the platform allows)")
    p.add_argument("--output", help="transcript file (wire format)")
    common(p)
    p.set_defaults(func=cmd_kex)

    p = sub.add_parser("attack", help="recover the key from a UT transcript")
    p.add_argument("--input", required=True, help="transcript file")
    common(p, seed=False)
    p.set_defaults(func=cmd_attack)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "samples", 1) < 1:
        parser.error("--samples must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"nilkex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
