"""Exact mixture halfwidth against its closed-form relaxation along one stream,
with the relative gap and U_t / t."""

import numpy as np
from _common import parser, save

from ebcs import eb
from ebcs.streams import parse_dist, sample_path


def main():
    args = parser(__doc__).parse_args()
    horizon = 10**4 if args.quick else 10**5
    cfg = eb.EbConfig(alpha=0.05, kappa=0.25)
    x, _ = sample_path(parse_dist("bernoulli:0.5", seed=2), horizon)
    idx = np.unique(np.geomspace(1, horizon, 400).astype(int)) - 1
    apx = eb.apx_path(x, cfg).take(idx)
    mix = eb.mix_path(x[: idx[-1] + 1], cfg).take(idx)
    u = apx.aux["u_t"]
    rows = [(int(i + 1), float(a), int(v), float(m), float((a - m) / m), float(uu), float(uu / (i + 1)))
            for i, a, v, m, uu in zip(idx, apx.halfwidth, apx.valid, mix.halfwidth, u)]
    save(args.out_dir, "mixture_vs_closed_form.csv",
         ("t", "apx", "apx_valid", "mix", "rel_gap", "u_t", "u_t_over_t"), rows)


if __name__ == "__main__":
    main()
