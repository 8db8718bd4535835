"""Command-line front end: run a configured scenario or sweep, emit CSV plot data.

Exit status: 0 success, 1 configuration error, 2 runtime error. Rows are
buffered and only written once the whole run has succeeded.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass

from .analytic import analytic_rates
from .config import MODES, PRESETS, ConfigDocument, ConfigError, load_document
from .network import eavesdropper_exposure
from .simulation import simulate

CSV_HEADER = "length_km,bob_id,mode,qber,sifted_rate_hz,net_bit_rate_hz"

# 2-5 % QBER and 3e3-4e4 bit/s net rate reported for the experiments
ENVELOPE_QBER = (0.02, 0.05)
ENVELOPE_NBR_HZ = (3e3, 4e4)


@dataclass(frozen=True)
class ResultRow:
    length_km: float
    bob_id: int
    mode: str
    qber: float
    sifted_rate_hz: float
    net_bit_rate_hz: float

    def csv(self) -> str:
        return ",".join(
            [
                _fmt(self.length_km),
                str(self.bob_id),
                self.mode,
                _fmt(self.qber),
                _fmt(self.sifted_rate_hz),
                _fmt(self.net_bit_rate_hz),
            ]
        )

    @property
    def in_envelope(self) -> bool:
        return (
            ENVELOPE_QBER[0] <= self.qber <= ENVELOPE_QBER[1]
            and ENVELOPE_NBR_HZ[0] <= self.net_bit_rate_hz <= ENVELOPE_NBR_HZ[1]
        )


def _fmt(x: float) -> str:
    return f"{x:.6g}"


@dataclass
class RunResult:
    rows: list[ResultRow]
    summary: str

    def csv_text(self) -> str:
        return "\n".join([CSV_HEADER, *(r.csv() for r in self.rows)]) + "\n"


def run(doc: ConfigDocument, mode: str | None = None) -> RunResult:
    mode = mode or doc.run.mode
    if mode not in MODES:
        raise ConfigError("run.mode", f"must be one of {', '.join(MODES)}, got {mode!r}")
    lengths = list(doc.run.sweep_lengths_km) or [None]
    rows: list[ResultRow] = []
    distilled_bits = 0
    aborted = 0
    for length in lengths:
        scenario = doc.scenario(length)
        topo = scenario.topology
        if mode == "analytic":
            for bob in analytic_rates(scenario):
                rows.append(
                    ResultRow(
                        topo.axis_length_km(bob.bob_id), bob.bob_id, mode,
                        bob.qber, bob.sifted_rate_hz, bob.net_bit_rate_hz,
                    )
                )
        else:
            for bob in simulate(scenario, run_distillation=True):
                rep = bob.report
                rows.append(
                    ResultRow(
                        topo.axis_length_km(bob.bob_id), bob.bob_id, mode,
                        rep.qber, rep.sifted_rate_hz, rep.net_bit_rate_hz,
                    )
                )
                distilled_bits += len(bob.distilled.bob)
                aborted += not bob.distilled.success
    rows.sort(key=lambda r: (r.length_km, r.bob_id))
    return RunResult(rows, _summary(doc, mode, rows, distilled_bits if mode == "montecarlo" else None, aborted))


def _summary(doc: ConfigDocument, mode: str, rows: list[ResultRow], distilled_bits, aborted) -> str:
    scenario = doc.scenario()
    qbers = [r.qber for r in rows]
    nbrs = [r.net_bit_rate_hz for r in rows]
    lines = [
        f"ponqkd: mode={mode} placement={doc.topology.placement} fan_out={doc.topology.fan_out}"
        f" clock={doc.source.clock_rate_hz:.6g} Hz rows={len(rows)}",
        f"  qber: {min(qbers):.4%} .. {max(qbers):.4%}",
        f"  net bit rate: {min(nbrs):.6g} .. {max(nbrs):.6g} bit/s",
        f"  rows inside 2-5% QBER and 3e3-4e4 bit/s: {sum(r.in_envelope for r in rows)}",
        f"  eavesdropper exposure: mu = {eavesdropper_exposure(scenario):.6g} at the most exposed point",
    ]
    if distilled_bits is not None:
        lines.append(f"  distilled key bits (all sessions): {distilled_bits}, aborted sessions: {aborted}")
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ponqkd", description="B92 QKD over passive optical networks: QBER and net bit rate.")
    p.add_argument("--config", metavar="PATH", help="TOML configuration file")
    p.add_argument("--preset", choices=PRESETS, help="built-in scenario; --config overlays it")
    p.add_argument("--mode", choices=MODES, help="override run.mode")
    p.add_argument("--seed", type=int, help="override run.seed")
    p.add_argument("--slots", type=int, help="override run.slots (Monte Carlo)")
    p.add_argument("--out", default="-", metavar="PATH", help="CSV destination, '-' for stdout")
    return p


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ponqkd-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help exits 0, bad flags exit 1
        return int(exc.code or 0)

    try:
        text = None
        if args.config is not None:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError("--config", f"cannot read {args.config}: {exc.strerror}") from None
        overrides = {}
        for key in ("mode", "seed", "slots"):
            if getattr(args, key) is not None:
                overrides.setdefault("run", {})[key] = getattr(args, key)
        doc = load_document(text, args.preset, overrides)
    except ConfigError as exc:
        print(f"ponqkd: config error: {exc}", file=stderr)
        return 1

    try:
        result = run(doc)
        csv_text = result.csv_text()
        if args.out == "-":
            stdout.write(csv_text)
            stdout.flush()
        else:
            _write_atomic(args.out, csv_text)
    except ConfigError as exc:
        print(f"ponqkd: config error: {exc}", file=stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - any failure past config is a runtime error
        print(f"ponqkd: runtime error: {type(exc).__name__}: {exc}", file=stderr)
        return 2
    stderr.write(result.summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
