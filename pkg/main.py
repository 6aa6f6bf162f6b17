"""
FinQuakes - random vs technical trading on herding networks.
Run: python main.py <subcommand> [--flags]

Subcommands: analyze, backtest, simulate, fit, synth, fetch, reproduce <figN>.
Artifacts go to --output-dir (default $FINQUAKE_OUTPUT_DIR or ./output);
the JSON summary is the only thing printed on standard output.
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv

from agents.orchestrator import RECIPES, Orchestrator
from utils.artifact_store import dumps
from utils.config import env_log_level, load_config
from utils.errors import FinQuakeError

# Load environment variables
load_dotenv()

logger = logging.getLogger("finquake")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _common_flags() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; absent flags leave the config untouched."""
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)

    io = p.add_argument_group("input / output")
    io.add_argument("--config", help="key=value config file (overridden by flags)")
    io.add_argument("--input", help="CSV with one daily close per row")
    io.add_argument("--column", help="value column: 0-based index or header name")
    io.add_argument("--output-dir", dest="output_dir")
    io.add_argument("--seed", type=int, help="master seed (default 42)")
    io.add_argument("--runs", type=int, help="independent runs to cumulate (default 10)")
    io.add_argument("--workers", type=int, help="parallel worker processes")
    io.add_argument("--resume", action="store_true", help="reuse per-run records whose manifest matches")
    io.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING, ERROR")

    strat = p.add_argument_group("strategies / backtest")
    strat.add_argument("--strategies", help="comma list out of rnd,mom,rsi")
    strat.add_argument("--mom-lag", dest="mom_lag", type=int)
    strat.add_argument("--rsi-period", dest="rsi_period", type=int)
    strat.add_argument("--windows", help="comma list of window counts N_w, e.g. 3,9,18,30")

    dma = p.add_argument_group("DMA / Hurst")
    dma.add_argument("--hurst-window", dest="hurst_window", type=int)
    dma.add_argument("--hurst-step", dest="hurst_step", type=int)
    dma.add_argument("--points-per-decade", dest="points_per_decade", type=int)
    dma.add_argument("--prefactor", choices=("terms", "reduced"))

    net = p.add_argument_group("network")
    net.add_argument("--network", choices=("sw", "sf"))
    net.add_argument("--lattice-side", dest="lattice_side", type=int)
    net.add_argument("--rewiring", type=float)
    net.add_argument("--n-nodes", dest="n_nodes", type=int)
    net.add_argument("--attachment", type=int)

    quake = p.add_argument_group("quake engine")
    quake.add_argument("--alpha", type=float, help="transfer fraction in [0, 1)")
    quake.add_argument("--threshold", type=float)
    quake.add_argument("--placement", choices=("none", "fraction", "hubs", "count"))
    quake.add_argument("--p-rnd", dest="p_rnd", type=float)
    quake.add_argument("--hub-k-min", dest="hub_k_min", type=int)
    quake.add_argument("--n-random", dest="n_random", type=int)
    quake.add_argument("--quakes", type=int)
    quake.add_argument("--on-exhaust", dest="on_exhaust", choices=("stop", "wrap"))
    quake.add_argument("--wealth-every", dest="wealth_every", type=int)

    synth = p.add_argument_group("synthetic series")
    synth.add_argument("--model", dest="synth_model", choices=("gbm", "iid-gaussian-walk"))
    synth.add_argument("--length", type=int)
    synth.add_argument("--mu", type=float)
    synth.add_argument("--sigma", type=float)
    synth.add_argument("--start-price", dest="start_price", type=float)

    fit = p.add_argument_group("fits")
    fit.add_argument("--bins-per-decade", dest="bins_per_decade", type=int)
    fit.add_argument("--x-min", dest="x_min", type=float)

    fetch = p.add_argument_group("fetch")
    fetch.add_argument("--ticker")
    fetch.add_argument("--start")
    fetch.add_argument("--end")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="finquake", description="Financial quakes and random traders")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="returns, DMA curve, global and sliding Hurst")
    sub.add_parser("backtest", parents=[common], help="RND / MOM / RSI win rates per trading window")
    sub.add_parser("simulate", parents=[common], help="financial quakes on a trader network")
    sub.add_parser("fit", parents=[common], help="power-law vs exponential fit of a value column")
    sub.add_parser("synth", parents=[common], help="write a seeded synthetic series")
    sub.add_parser("fetch", parents=[common], help="download daily closes from Yahoo Finance")
    rep = sub.add_parser("reproduce", parents=[common], help="run one figure recipe")
    rep.add_argument("figure", choices=RECIPES)
    return parser


def configure_logging(level: str) -> None:
    logging.basicConfig(stream=sys.stderr, level=level.upper(), format=LOG_FORMAT, force=True)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse, validate, execute; returns the process exit status."""
    try:
        args = vars(build_parser().parse_args(argv))
    except SystemExit as e:
        return int(e.code or 0)

    command = args.pop("command")
    figure = args.pop("figure", None)
    config_file = args.pop("config", None)
    level = args.pop("log_level", None) or env_log_level()
    try:
        configure_logging(level)
    except ValueError:
        sys.stderr.write(f"error: unknown log level {level!r}\n")
        return 2

    try:
        cfg = load_config(config_file, **args)
        orchestrator = Orchestrator(cfg)
        if command == "reproduce":
            summary = orchestrator.reproduce(figure)
        else:
            summary = getattr(orchestrator, command)()
    except (FinQuakeError, ValueError, OSError) as e:
        logger.error("❌ %s failed: %s", command, e)
        sys.stderr.write(f"error: {e}\n")
        return 2

    sys.stdout.write(dumps(summary))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
