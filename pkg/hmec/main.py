"""
Command-line front end.

    python -m hmec keygen  --out key.txt [--mode strict|lenient]
    python -m hmec encrypt --key key.txt --in plain.txt --out cipher.hmec [--mode ...]
    python -m hmec decrypt --key key.txt --in cipher.hmec --out plain.txt
    python -m hmec analyze --key key.txt [--corpus DIR] [--tests sensitivity,kpa,...] --out report.csv
    python -m hmec orbit   --r 3.57 --x0 0.99 --n 1000 --out orbit.csv [--override-region]

Data goes to --out (stdout when omitted); diagnostics go to stderr.

Exit codes:
    0  success
    2  usage error
    3  key file error
    4  I/O error
    5  non-ASCII input in strict mode
    6  malformed container or ciphertext
    7  analysis request error
    8  parameter outside the chaotic region, or invalid grid
"""

import argparse
import asyncio
import logging
import sys
import uuid
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from pydantic import ValidationError

from .analysis import AnalysisOutcome, AnalysisRequest, default_corpus, parse_tests, run_local
from .chaos import LogisticParams, generate_orbit
from .cipher import Mode, decrypt, encrypt
from .cryptanalysis import InitialStateGrid, KeyGrid
from .utilities.container import CipherContainer, pack_container, parse_container
from .utilities.errors import (
    AnalysisError,
    ChaoticRegionError,
    GridError,
    HmecError,
    KeyFileError,
    MalformedCiphertextError,
    MalformedContainerError,
    NonAsciiInputError,
    NonInvertibleKeyError,
)
from .utilities.keyfile import generate_key, load_key, save_key, serialize_key
from .utilities.reports import write_attack_csv, write_orbit_csv, write_report_csv
from .utilities.settings import Settings, get_settings
from .utilities.temporal_client import get_temporal_client
from .workflows import AnalysisWorkflow

logger = logging.getLogger("hmec")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_KEY = 3
EXIT_IO = 4
EXIT_NON_ASCII = 5
EXIT_MALFORMED = 6
EXIT_ANALYSIS = 7
EXIT_REGION = 8

EXIT_CODES = (
    (KeyFileError, EXIT_KEY),
    (NonInvertibleKeyError, EXIT_KEY),
    (NonAsciiInputError, EXIT_NON_ASCII),
    (MalformedContainerError, EXIT_MALFORMED),
    (MalformedCiphertextError, EXIT_MALFORMED),
    (AnalysisError, EXIT_ANALYSIS),
    (ChaoticRegionError, EXIT_REGION),
    (GridError, EXIT_REGION),
)


def exit_code_for(error: HmecError) -> int:
    for cls, code in EXIT_CODES:
        if isinstance(error, cls):
            return code
    return EXIT_USAGE


# -- I/O helpers ---------------------------------------------------------------

def read_input(path: Optional[str]) -> bytes:
    if path is None or path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def write_output(path: Optional[str], data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def write_text_output(path: Optional[str], render) -> None:
    """render(stream) writes CSV text; stdout when no path is given."""
    if path is None or path == "-":
        render(sys.stdout)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as stream:
            render(stream)


def load_corpus(directory: str) -> Tuple[List[bytes], List[str]]:
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory {directory} does not exist")
    files = sorted(p for p in root.iterdir() if p.is_file())
    if not files:
        raise AnalysisError(f"corpus directory {directory} holds no files")
    return [p.read_bytes() for p in files], [p.name for p in files]


def build_grid(args: argparse.Namespace) -> Optional[KeyGrid]:
    given = (args.grid_min, args.grid_max, args.grid_step)
    if all(v is None for v in given):
        return None
    if any(v is None for v in given):
        raise GridError("--grid-min, --grid-max and --grid-step must be given together")
    try:
        return KeyGrid(r_min=args.grid_min, r_max=args.grid_max, step=args.grid_step)
    except ValidationError as e:
        raise GridError(f"invalid grid: {e}") from e


def build_x0_grid(spec: Optional[str]) -> Optional[InitialStateGrid]:
    if spec is None:
        return None
    try:
        x_min, x_max, step = (float(v) for v in spec.split(","))
        return InitialStateGrid(x_min=x_min, x_max=x_max, step=step)
    except (ValueError, ValidationError) as e:
        raise GridError(f"--widen-x0 expects 'min,max,step' inside (0, 1): {e}") from e


# -- subcommands -----------------------------------------------------------------

def cmd_keygen(args: argparse.Namespace, settings: Settings) -> int:
    keyfile = generate_key(Mode(args.mode or Mode.LENIENT))
    if args.out is None or args.out == "-":
        write_output(None, serialize_key(keyfile).encode("utf-8"))
    else:
        save_key(keyfile, args.out)
    logger.info("Generated key (r=%.9f, mode=%s)", keyfile.key.r, keyfile.mode.value)
    return EXIT_OK


def cmd_encrypt(args: argparse.Namespace, settings: Settings) -> int:
    keyfile = load_key(args.key)
    mode = Mode(args.mode) if args.mode else keyfile.mode
    plaintext = read_input(args.input)
    payload = encrypt(keyfile.key, plaintext, mode)
    container = CipherContainer(mode=mode, original_length=len(plaintext), payload=payload)
    write_output(args.out, pack_container(container))
    logger.info("Encrypted %d bytes (%s mode) into %d payload bytes", len(plaintext), mode.value, len(payload))
    return EXIT_OK


def cmd_decrypt(args: argparse.Namespace, settings: Settings) -> int:
    keyfile = load_key(args.key)
    container = parse_container(read_input(args.input))
    if args.mode and Mode(args.mode) is not container.mode:
        logger.warning("Container was written in %s mode; ignoring --mode %s", container.mode.value, args.mode)
    plaintext = decrypt(keyfile.key, container.payload, container.mode, length=container.original_length)
    write_output(args.out, plaintext)
    logger.info("Decrypted %d bytes", len(plaintext))
    return EXIT_OK


def build_request(args: argparse.Namespace) -> AnalysisRequest:
    keyfile = load_key(args.key)
    mode = Mode(args.mode) if args.mode else keyfile.mode
    tests = parse_tests(args.tests)
    if args.corpus:
        corpus, names = load_corpus(args.corpus)
    else:
        corpus, names = default_corpus(seed=args.seed), None

    options = dict(
        mode=mode,
        tests=tests,
        flips_per_text=args.flips,
        seed=args.seed,
        iterations=args.iterations,
        tolerance=args.tolerance,
        prefix_length=args.prefix_length,
        x0_grid=build_x0_grid(args.widen_x0),
    )
    grid = build_grid(args)
    if grid is not None:
        options.update(identifiability_grid=grid, attack_grid=grid, keyspace_grid=grid)
    try:
        return AnalysisRequest.build(keyfile.key, corpus, names, **options)
    except ValidationError as e:
        raise AnalysisError(f"invalid analysis request: {e}") from e


async def run_temporal(request: AnalysisRequest, settings: Settings) -> AnalysisOutcome:
    client = await get_temporal_client(settings)
    workflow_id = f"hmec-analysis-{uuid.uuid4().hex[:12]}"
    logger.info("Submitting %s to task queue %s", workflow_id, settings.task_queue)
    result = await client.execute_workflow(
        AnalysisWorkflow.run,
        {"request": request.model_dump(mode="json")},
        id=workflow_id,
        task_queue=settings.task_queue,
    )
    return AnalysisOutcome.model_validate(result)


def cmd_analyze(args: argparse.Namespace, settings: Settings) -> int:
    request = build_request(args)
    request.validate_for_run()
    if args.backend == "temporal":
        outcome = asyncio.run(run_temporal(request, settings))
    else:
        outcome = run_local(request, workers=settings.workers, chunk_size=settings.chunk_size)

    write_text_output(args.out, lambda stream: write_report_csv(outcome.rows, stream))
    if args.attack_out:
        if not outcome.attacks:
            raise AnalysisError("--attack-out needs the kpa test")
        first = request.subject(0)
        result = outcome.attacks[first]
        write_text_output(
            args.attack_out,
            lambda stream: write_attack_csv(result.candidates, stream, with_x0=request.x0_grid is not None),
        )
        logger.info("Attack candidates for %s written to %s", first, args.attack_out)
    return EXIT_OK


def cmd_orbit(args: argparse.Namespace, settings: Settings) -> int:
    if args.override_region:
        params = LogisticParams.unrestricted(args.r)
    else:
        try:
            params = LogisticParams(r=args.r)
        except ValidationError as e:
            raise ChaoticRegionError(
                f"r={args.r} is outside the chaotic region [3.57, 4.0]; pass --override-region to plot it anyway"
            ) from e
    orbit = generate_orbit(params, args.x0, args.n)
    write_text_output(args.out, lambda stream: write_orbit_csv(orbit.values(), stream))
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hmec", description="Hybrid message-embedded chaotic cipher")
    sub = parser.add_subparsers(dest="command", required=True)

    def mode_flag(p):
        p.add_argument("--mode", choices=[m.value for m in Mode], help="Embedding mode (default: from the key file)")

    p = sub.add_parser("keygen", help="Generate a random key file")
    p.add_argument("--out", help="Key file to write (default: stdout)")
    mode_flag(p)
    p.set_defaults(handler=cmd_keygen)

    for name, handler, help_text in (
        ("encrypt", cmd_encrypt, "Encrypt a file into a container"),
        ("decrypt", cmd_decrypt, "Decrypt a container"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--key", required=True, help="Key file")
        p.add_argument("--in", dest="input", help="Input file (default: stdin)")
        p.add_argument("--out", help="Output file (default: stdout)")
        mode_flag(p)
        p.set_defaults(handler=handler)

    p = sub.add_parser("analyze", help="Run the cryptanalysis suite and write a CSV report")
    p.add_argument("--key", required=True, help="Key file")
    p.add_argument("--corpus", help="Directory of plaintext files (default: 20 random 1 KiB texts)")
    p.add_argument("--tests", default="all", help="Comma separated subset of sensitivity,keysens,identifiability,kpa,keyspace")
    p.add_argument("--out", help="Report CSV (default: stdout)")
    p.add_argument("--attack-out", help="Candidate CSV for the attack on the first corpus entry")
    p.add_argument("--backend", choices=["local", "temporal"], default="local")
    p.add_argument("--grid-min", type=float, help="Grid r_min for identifiability, kpa and keyspace")
    p.add_argument("--grid-max", type=float)
    p.add_argument("--grid-step", type=float)
    p.add_argument("--widen-x0", help="Also search x0 over 'min,max,step' in the known-plaintext attack")
    p.add_argument("--flips", type=int, default=50, help="Plaintext bit flips per corpus entry")
    p.add_argument("--iterations", type=int, default=64, help="Output bytes compared by the identifiability scan")
    p.add_argument("--tolerance", type=float, default=0.0, help="State tolerance; 0 compares ciphertext bytes")
    p.add_argument("--prefix-length", type=int, default=5, help="Known plaintext bytes for the attack")
    p.add_argument("--seed", type=int, default=0)
    mode_flag(p)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("orbit", help="Write a logistic map orbit as CSV")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--n", type=int, required=True, help="Number of samples, x0 included")
    p.add_argument("--out", help="Orbit CSV (default: stdout)")
    p.add_argument("--override-region", action="store_true", help="Allow r outside [3.57, 4.0]")
    p.set_defaults(handler=cmd_orbit)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = get_settings()
    except ValueError as e:
        print(f"hmec: {e}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=settings.log_level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.handler(args, settings)
    except HmecError as e:
        logger.error("%s: %s", e.error_type, e)
        return exit_code_for(e)
    except OSError as e:
        logger.error("I/O error: %s", e)
        return EXIT_IO
    except ValueError as e:
        logger.error("Invalid argument: %s", e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
