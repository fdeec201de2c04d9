"""Mixture halfwidth for several prior scales kappa, with kappa_Z per kappa."""

from _common import parser, save

from ebcs import harness
from ebcs.streams import parse_dist


def main():
    args = parser(__doc__).parse_args()
    horizon, seeds = (10**4, 5) if args.quick else (10**5, 20)
    header, rows = harness.kappa_sweep(parse_dist("bernoulli:0.5"), [0.1, 0.25, 1, 10, 100], horizon, seeds,
                                       alpha=0.05)
    save(args.out_dir, "kappa_sweep.csv", header, rows)


if __name__ == "__main__":
    main()
