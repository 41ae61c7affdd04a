"""BER and energy efficiency against the number of harvesting elements (N = 300, K = 4)."""

from zeroris import SystemConfig
from zeroris import figures as fg


def main():
    table = fg.fig_lnl_comparison(SystemConfig(), n1_values=range(150, 300, 10), efficiencies=(0.75,))
    print(f"{'model':>5} {'N1':>4} {'ecsr':>7} {'ber':>10} {'ee_bit_per_j':>12}")
    for model, _, n1, ecsr, ber, ee in table.rows:
        print(f"{model:>5} {n1:>4} {ecsr:>7.4f} {ber:>10.3e} {ee:>12.3f}")
    for model in ("leh", "nleh"):
        best = min(table.where(model=model).rows, key=lambda r: r[4])
        print(f"{model}: lowest BER {best[4]:.3e} at N1 = {best[2]}")


if __name__ == "__main__":
    main()
