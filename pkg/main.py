#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Main entry point for phasefront

Runs one named scenario:
1. bargmann-map      - Bargmann transform of a datum on a phase grid (CSV + binary map)
2. wavefront         - Wave front detection by conic decay fits
3. flow              - Hamiltonian flow of a phase-space point
4. evolve            - Strang-split Schrodinger evolution with snapshots
5. propagation-check - Wave fronts of u(t) against the flow image of u(0)'s
6. anomaly-demo      - New singular directions created by a nonlinearity
7. paradiff-probe    - Telescoping, symbol smoothing and seminorm probes
"""

import sys
import argparse
import logging
from pathlib import Path

# Add the repository root to path
sys.path.insert(0, str(Path(__file__).parent))

from phasefront.cli import load_config, run  # noqa: E402
from phasefront.config import settings  # noqa: E402
from phasefront.errors import ConfigInvalid  # noqa: E402
from phasefront.schemas import SCENARIOS  # noqa: E402


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True,
    )


def main(argv=None) -> int:
    """Parse arguments, run the scenario and return the exit code."""
    parser = argparse.ArgumentParser(
        description='Numerical lab for wave front sets, quadratic flows and paradifferential splittings',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Wave front of the constant signal with default detection settings
  python main.py wavefront

  # Harmonic-oscillator propagation check at t = pi/8, pi/4, 3pi/8
  python main.py propagation-check --out runs/propagation

  # Slope doubling of a chirp under u -> u^2, from a JSON config
  python main.py anomaly-demo --config configs/anomaly.json

  # Paradifferential probes on a smaller grid
  python main.py paradiff-probe --L 8 --N 2048 --seed 3

Exit codes: 0 PASS/COMPLETE, 1 FAIL or module error, 2 configuration error.
        """
    )

    parser.add_argument('scenario', choices=SCENARIOS, help='Scenario to run')
    parser.add_argument('--config', type=Path, default=None, help='JSON config (ScenarioConfig document)')
    parser.add_argument('--out', type=Path, default=None, help='Output directory (default: runs/<scenario>)')
    parser.add_argument('--seed', type=int, default=None, help='Seed for randomized probes')
    parser.add_argument('--L', type=float, default=None, help='Half-width of the sampling window')
    parser.add_argument('--N', type=int, default=None, help='Number of grid points (power of two)')
    parser.add_argument('--log-level', type=str, default=settings.LOG_LEVEL,
                        help=f'Logging level (default: {settings.LOG_LEVEL})')

    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    try:
        config = load_config(args.config, args.scenario, {'seed': args.seed, 'L': args.L, 'N': args.N})
    except ConfigInvalid as e:
        print("="*70)
        print("CONFIGURATION ERROR")
        print("="*70)
        print(str(e))
        return 2

    out_dir = args.out or Path('runs') / args.scenario
    return run(config, out_dir)


if __name__ == '__main__':
    sys.exit(main())
