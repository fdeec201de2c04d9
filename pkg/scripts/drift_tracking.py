"""Single-path intervals under a drifting mean (switch and sinusoid scenarios)
and the any-time miscoverage of each method over many seeds."""

from _common import parser, save

from ebcs import harness
from ebcs.streams import parse_dist, sample_path


def main():
    args = parser(__doc__).parse_args()
    horizon, reps = (2000, 50) if args.quick else (10**4, 200)
    cfg = harness.RunConfig(alpha=0.05)
    methods = ("apx", "wsr", "hrms")
    for name, dist in (("switch", "switch:0.8,0.2,0.1"), ("sinusoid", "sinusoid:0.4")):
        spec = parse_dist(dist, seed=1)
        x, mp = sample_path(spec, horizon)
        header, rows = harness.track(x, methods, cfg, mp.mu)
        save(args.out_dir, f"drift_{name}_path.csv", header, rows)
        header, rows = harness.coverage_rows(harness.coverage(spec, methods, reps, horizon, cfg))
        save(args.out_dir, f"drift_{name}_coverage.csv", header, rows)


if __name__ == "__main__":
    main()
