"""Any-time miscoverage of the matrix closed-form bound and the Wang-Ramdas
bound on d = 3 matrix streams, plus one tracked path."""

from _common import parser, save

from ebcs import harness
from ebcs.streams import matrix_mean, parse_dist, sample_path


def main():
    args = parser(__doc__).parse_args()
    horizon, reps = (2000, 25) if args.quick else (10**4, 500)
    methods = ("mat_apx", "wang_ramdas")
    for gen in ("rotated-beta:2,5", "diagonal-bernoulli:0.5"):
        spec = parse_dist(gen, seed=33, d=3)
        res = harness.matrix_coverage(spec, methods, reps, horizon, alpha=0.05, kappa=0.25)
        name = gen.split(":")[0]
        save(args.out_dir, f"matrix_{name}_coverage.csv", *harness.coverage_rows(res))
        xs, _ = sample_path(spec, horizon)
        header, rows = harness.matrix_track(xs, methods, 0.05, 0.25, matrix_mean(spec))
        save(args.out_dir, f"matrix_{name}_path.csv", header, rows)


if __name__ == "__main__":
    main()
