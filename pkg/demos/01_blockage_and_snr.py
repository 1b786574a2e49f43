#!/usr/bin/env python3
"""One link, one uncertain blocker: closed-form blockage probability and the
resulting SNR mixture, followed over a one-second prediction window.

A non-connected car drives toward the line of sight between two connected
vehicles. Its position is known only as a Gaussian belief that widens with
the lookahead, so the link's SNR becomes a two-component mixture whose
blocked weight is the closed-form rectangle integral of that belief.
"""

import numpy as np

from losmap import (
    ChannelParams,
    LinkCondition,
    Point2,
    PredictionParams,
    blockage_probability_single,
    blockage_region,
    initialize_ncav_estimate,
    predict,
    service_probability,
    snr_distribution,
)

TX = Point2(0.0, 0.0)
RX = Point2(60.0, 0.0)
HALF_WIDTH = 0.9

channel = ChannelParams()
pred = PredictionParams(horizon=1.0, step=0.1)

# the blocker starts 8 m to the side, heading across the link at 8 m/s
belief0 = initialize_ncav_estimate(Point2(30.0, -8.0), (0.0, 8.0),
                                   footprint_sigma=1.0)

region = blockage_region(TX, RX, HALF_WIDTH)
print(f"link length 60 m; blocking region u in [{region.u_min}, {region.u_max}],"
      f" v in [{region.v_min}, {region.v_max}]")
print(f"clear-sky mean SNR at 60 m: "
      f"{channel.gamma0_db - 38.77 - 16.7*np.log10(60) - 18.2*np.log10(28):.1f} dB")
print()
print("lookahead  sigma_pos  P(blocked)   P(SNR > 10 dB)  P(SNR > 20 dB)")
rows = []
for n in range(pred.n_samples):
    t = n * pred.step
    belief = predict(belief0, t, pred)
    p_block = blockage_probability_single(belief, TX, RX, HALF_WIDTH)
    mix = snr_distribution(60.0, LinkCondition.LOS, [p_block], channel)
    s10 = service_probability(mix, 10.0)
    s20 = service_probability(mix, 20.0)
    rows.append((t, belief.position_sigma(), p_block, s10, s20))
    print(f"  {t:4.1f} s   {rows[-1][1]:7.3f} m   {p_block:9.6f}"
          f"    {s10:12.6f}   {s20:12.6f}")

# cross-check the worked closed form against sampling at the worst epoch
worst_t, *_ = max(rows, key=lambda r: r[2])
belief = predict(belief0, worst_t, pred)
rng = np.random.default_rng(0)
pts = rng.normal([belief.mean.x, belief.mean.y], belief.position_sigma(),
                 size=(200_000, 2))
mc = float(np.mean((pts[:, 0] > region.u_min) & (pts[:, 0] < region.u_max)
                   & (pts[:, 1] > region.v_min) & (pts[:, 1] < region.v_max)))
analytic = blockage_probability_single(belief, TX, RX, HALF_WIDTH)
print(f"\nworst epoch t={worst_t:.1f}s: closed form {analytic:.5f}, "
      f"200k-sample Monte Carlo {mc:.5f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ts = [r[0] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.5))
    ax1.plot(ts, [r[2] for r in rows], "o-")
    ax1.set_xlabel("lookahead [s]")
    ax1.set_ylabel("blockage probability")
    ax2.plot(ts, [r[3] for r in rows], "o-", label="threshold 10 dB")
    ax2.plot(ts, [r[4] for r in rows], "s-", label="threshold 20 dB")
    ax2.set_xlabel("lookahead [s]")
    ax2.set_ylabel("service probability")
    ax2.legend()
    fig.tight_layout()
    fig.savefig("demos_blockage_and_snr.png", dpi=120)
    print("plot written to demos_blockage_and_snr.png")
except ImportError:
    pass
