"""Median halfwidths of the closed-form, WSR and HRMS sequences on Bernoulli(0.5),
plus U_t and U_t/t on the same grid."""

from _common import parser, save

from ebcs import harness
from ebcs.streams import parse_dist


def main():
    args = parser(__doc__).parse_args()
    horizon, seeds = (10**4, 5) if args.quick else (10**6, 20)
    cfg = harness.RunConfig(alpha=0.05, kappa=0.25)
    for dist in ("bernoulli:0.5", "beta:5,2", "uniform"):
        header, rows = harness.compare(parse_dist(dist), ("apx", "mix", "wsr", "hrms"), horizon, seeds, cfg,
                                       per_decade=32)
        save(args.out_dir, f"widths_{dist.split(':')[0]}.csv", header, rows)


if __name__ == "__main__":
    main()
