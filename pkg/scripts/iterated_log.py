"""Median halfwidths of the two iterated-logarithm sequences (stitched and HRMS)
next to the closed-form one."""

from _common import parser, save

from ebcs import harness
from ebcs.streams import parse_dist


def main():
    args = parser(__doc__).parse_args()
    horizon, seeds = (10**4, 5) if args.quick else (10**6, 20)
    cfg = harness.RunConfig(alpha=0.05)
    header, rows = harness.compare(parse_dist("bernoulli:0.5"), ("stch", "hrms", "apx"), horizon, seeds, cfg,
                                   per_decade=32)
    save(args.out_dir, "iterated_log.csv", header, rows)


if __name__ == "__main__":
    main()
