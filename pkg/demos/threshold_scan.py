"""Per-repetition BER against detector threshold for three (M, N2) cases."""

from zeroris import figures as fg


def main():
    table = fg.run_figure("fig_ber_vs_threshold", span_db=12.0, points=25)
    for m, n2 in fg.THRESHOLD_CASES:
        rows = table.where(M=m, N2=n2)
        approx = rows.where(kind="approx").rows[0]
        best = min(rows.where(kind="grid").rows, key=lambda r: r[4])
        print(f"M={m} N2={n2}: approximate threshold {approx[3]:.2f} dB (BER {approx[4]:.4f}), "
              f"grid minimum {best[3]:.2f} dB (BER {best[4]:.4f})")
        for _, _, _, db, ber, bound in rows.where(kind="grid").rows:
            print(f"    {db:7.2f} dB  ber {ber:.4f}  bound {bound:.4f}")


if __name__ == "__main__":
    main()
