"""BER against SNR for 1, 3 and 5 repetitions.

Pass --mc to add a Monte Carlo estimate at each point (slow at low BER).
"""

import argparse

from zeroris import SystemConfig
from zeroris import figures as fg
from zeroris import montecarlo as mc


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mc", action="store_true", help="add Monte Carlo estimates")
    parser.add_argument("--bits", type=int, default=200_000)
    args = parser.parse_args()

    table = fg.run_figure("fig_ber_vs_snr_reps", snr_db=tuple(range(-10, 3, 2)))
    print(f"{'R':>2} {'snr_db':>7} {'averaged':>10} {'per_bit':>10}" + (f" {'mc':>10}" if args.mc else ""))
    for r, snr, _, combined, per_bit in table.rows:
        line = f"{r:>2} {snr:>7} {combined:>10.3e} {per_bit:>10.3e}"
        if args.mc:
            cfg = fg.repetition_config(SystemConfig(), snr).replace(repetitions=r)
            line += f" {mc.simulate_link(cfg, cfg.ecsr_override, args.bits, r * 100 + snr + 50).value:>10.3e}"
        print(line)


if __name__ == "__main__":
    main()
