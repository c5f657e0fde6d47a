"""Command-line entry point: ``torus4 {params,circuit,simulate,specs,symmetries}``."""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from pydantic import ConfigDict, ValidationError

from . import __version__
from .bench import MemoryExperimentConfig, code_distance, resolve_lattice, run_memory_experiment, specs_table, specs_text
from .circuit import CheckMismatch, CircuitError, build_round, effective_checks, metadata_json, qubit_labels, repeat_rounds, to_text
from .complex import css_from_lattice
from .homology import distance_exact, distance_upper_bound, logical_basis_linear
from .lattice import HnfMatrix, LatticeError, load_lattice
from .symmetry import SymmetryError

log = logging.getLogger("torus4")

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 3
EXACT_DISTANCE_MAX_N = 60
DEFAULT_SPEC_ENTRIES = ((16, 8, 9), (45, 15, 16), (45, 15, 250))


class ConfigError(Exception):
    pass


class ExperimentConfig(MemoryExperimentConfig):
    """Memory-experiment settings plus where to put the results."""

    model_config = ConfigDict(extra="forbid")
    output: str | None = None
    emit_plot_data: bool = False


def default_threads() -> int:
    env = os.environ.get("TORUS4_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"TORUS4_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def config_hash(cfg: ExperimentConfig) -> str:
    body = cfg.model_dump(exclude={"output", "threads"})
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()[:16]


def _lattice_from_args(args) -> HnfMatrix:
    if getattr(args, "lattice_file", None):
        return load_lattice(Path(args.lattice_file))
    if getattr(args, "hnf", None):
        return HnfMatrix.from_shorthand(args.hnf)
    if getattr(args, "lattice", None):
        return resolve_lattice(args.lattice)
    return HnfMatrix.from_shorthand((1, 0, 0, 0, 1, 0, 0, 1, 0, 1))


def _add_lattice_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--hnf", help="ten HNF entries a11,a12,a13,a14,a22,a23,a24,a33,a34,a44")
    g.add_argument("--lattice-file", help="JSON file with a 'basis' or 'hnf' 4x4 matrix")
    g.add_argument("--lattice", help="tabulated name such as Det9 or Hadamard")


# ---------------------------------------------------------------------------


def cmd_params(args) -> int:
    h = _lattice_from_args(args)
    code = css_from_lattice(h)
    basis = logical_basis_linear(code)
    if code.n <= EXACT_DISTANCE_MAX_N:
        rep = distance_exact(code, basis, w_max=args.max_weight)
        if rep.d is None:
            rep = distance_upper_bound(code, basis, trials=args.trials, seed=args.seed)
    else:
        rep = distance_upper_bound(code, basis, trials=args.trials, seed=args.seed)
    d = rep.d
    print(f"[[{code.n},{code.k},{d}]]")
    note = "" if rep.method == "exact" else f" (upper bound, {rep.trials} trials, seed {rep.seed})"
    print(f"lattice {h}  det {h.det}  distance method {rep.method}{note}  dx {rep.dx}  dz {rep.dz}")
    if args.json:
        Path(args.json).write_text(json.dumps({"hnf": list(h.shorthand), "n": code.n, "k": code.k, "d": d,
                                               "method": rep.method, "dx": rep.dx, "dz": rep.dz}, indent=1))
    return EXIT_OK


def cmd_circuit(args) -> int:
    h = _lattice_from_args(args)
    code = css_from_lattice(h)
    c = repeat_rounds(build_round(args.circuit, h, code), args.rounds, final_noiseless=not args.no_final_round)
    c.check_schedulable()
    if not args.skip_verify:
        effective_checks(c, code)
    text = to_text(c, qubit_labels(c, code))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.circuit}_{'_'.join(map(str, h.shorthand))}_r{args.rounds}"
    (out / f"{stem}.txt").write_text(text)
    (out / f"{stem}.json").write_text(metadata_json(c, code))
    print(f"wrote {out / (stem + '.txt')}  CNOT layers per round {c.cnot_depth // max(1, c.num_rounds)}  "
          f"digest {c.digest()}")
    return EXIT_OK


def _config_from_args(args) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config: {e}") from None
    if args.hnf:
        data["lattice"] = args.hnf
    elif args.lattice_file:
        data["lattice"] = list(load_lattice(Path(args.lattice_file)).shorthand)
    elif args.lattice:
        data["lattice"] = args.lattice
    flags = {"circuit": args.circuit, "rounds": args.rounds, "p": args.p, "shots": args.shots,
             "decoder": args.decoder, "seed": args.seed, "postselect_weight": args.postselect_weight,
             "output": args.out, "threads": args.threads}
    data.update({k: v for k, v in flags.items() if v is not None})
    if args.emit_plot_data:
        data["emit_plot_data"] = True
    if args.no_adaptive:
        data["target_rel_ci"] = None
    data.setdefault("threads", default_threads())
    cfg = ExperimentConfig.model_validate(data)
    resolve_lattice(cfg.lattice)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    if args.dump_config:
        print(cfg.model_dump_json(indent=1))
        return EXIT_OK
    digest = config_hash(cfg)
    out = Path(cfg.output or f"runs/{digest}")
    (out / "circuits").mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(out / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
    logging.getLogger("torus4").addHandler(handler)
    try:
        (out / "config.json").write_text(cfg.model_dump_json(indent=1))
        h = resolve_lattice(cfg.lattice)
        code = css_from_lattice(h)
        rounds = cfg.rounds or code_distance(h, code)
        circ = repeat_rounds(build_round(cfg.circuit, h, code), rounds)
        (out / "circuits" / f"{cfg.circuit}_r{rounds}.txt").write_text(to_text(circ, qubit_labels(circ, code)))
        t0 = time.perf_counter()
        res = run_memory_experiment(MemoryExperimentConfig.model_validate(
            cfg.model_dump(exclude={"output", "emit_plot_data"})))
        header = f"# config_sha256={digest} seed={cfg.seed} version={__version__}\n"
        (out / "results.csv").write_text(header + res.to_csv())
        payload = json.loads(res.to_json())
        payload["provenance"] = {"config_sha256": digest, "seed": cfg.seed, "version": __version__,
                                 "elapsed": time.perf_counter() - t0}
        (out / "results.json").write_text(json.dumps(payload, indent=1))
        if cfg.emit_plot_data:
            (out / "plot_data.csv").write_text(header + res.plot_data())
    finally:
        logging.getLogger("torus4").removeHandler(handler)
        handler.close()
    for pt in res.points:
        print(f"p={pt.p:g}  shots={pt.shots}  failures={pt.failures}  per-round={pt.per_round:.3e}  "
              f"[{pt.per_round_low:.3e}, {pt.per_round_high:.3e}]  per-qubit={pt.per_qubit:.3e}")
    print(f"results in {out}")
    return EXIT_OK


def cmd_specs(args) -> int:
    entries = DEFAULT_SPEC_ENTRIES
    if args.entry:
        try:
            entries = [tuple(int(v) for v in e.split(",")) for e in args.entry]
        except ValueError:
            raise ConfigError("--entry expects det,d,blocks") from None
        if any(len(e) != 3 for e in entries):
            raise ConfigError("--entry expects det,d,blocks")
    rows = specs_table(entries)
    text = specs_text(rows)
    print(text, end="")
    if args.out:
        Path(args.out).write_text(text)
    return EXIT_OK


def cmd_symmetries(args) -> int:
    from .symmetry import verify_catalog, symmetry_catalog

    h = _lattice_from_args(args)
    code = css_from_lattice(h)
    basis = logical_basis_linear(code)
    if args.verify:
        try:
            data = json.loads(Path(args.verify).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read catalog: {e}") from None
        verify_catalog(data, code, basis)
        print(f"catalog {args.verify}: {len(data['gates'])} gates re-verified")
        return EXIT_OK
    cat = symmetry_catalog(h, code, basis)
    kinds: dict[str, int] = {}
    for g in cat.gates:
        kinds[g.kind] = kinds.get(g.kind, 0) + 1
    print(f"lattice {h}: {len(cat.automorphisms)} cell-preserving automorphisms, "
          f"{len(cat.dualities)} ZX dualities, gates {kinds}")
    if args.out:
        Path(args.out).write_text(cat.to_json())
        print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torus4", description="4D geometric codes: parameters, circuits, "
                                 "noisy memory experiments and symmetry gates.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print [[n,k,d]] for a lattice")
    _add_lattice_flags(p)
    p.add_argument("--trials", type=int, default=10_000, help="random information sets for the upper bound")
    p.add_argument("--max-weight", type=int, default=8, help="largest weight tried by the exact search")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="also write the report to this file")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("circuit", help="emit a syndrome-extraction circuit")
    _add_lattice_flags(p)
    p.add_argument("--circuit", choices=("starfish", "compact"), default="compact")
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--no-final-round", action="store_true", help="omit the trailing noiseless round")
    p.add_argument("--skip-verify", action="store_true", help="skip the effective-check verification")
    p.add_argument("--out", default="circuits")
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("simulate", help="run a memory experiment sweep")
    _add_lattice_flags(p)
    p.add_argument("--config", help="JSON experiment config; flags override its fields")
    p.add_argument("--circuit", choices=("starfish", "compact"))
    p.add_argument("--rounds", type=int)
    p.add_argument("--p", type=float, nargs="+")
    p.add_argument("--shots", type=int)
    p.add_argument("--decoder", choices=("power", "bposd"))
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--postselect-weight", type=int)
    p.add_argument("--no-adaptive", action="store_true", help="always run the full shot budget")
    p.add_argument("--emit-plot-data", action="store_true")
    p.add_argument("--out", help="run directory (default runs/<config hash>)")
    p.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("specs", help="machine-spec arithmetic")
    p.add_argument("--entry", action="append", help="det,d,blocks (repeatable)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_specs)

    p = sub.add_parser("symmetries", help="automorphisms, ZX dualities and fold gates")
    _add_lattice_flags(p)
    p.add_argument("--out", help="write the gate catalog JSON here")
    p.add_argument("--verify", help="re-verify a previously written catalog")
    p.set_defaults(func=cmd_symmetries)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValidationError, LatticeError, FileNotFoundError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (CheckMismatch, CircuitError, SymmetryError, AssertionError) as e:
        print(f"invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
