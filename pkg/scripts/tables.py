"""E psi_E(|X - mu|) against sigma^2/2 for several laws, and the limiting widths."""

from _common import parser, save

from ebcs import harness


def main():
    args = parser(__doc__).parse_args()
    header, rows = harness.asymptotics_rows(0.05, times=(10**3, 10**4, 10**6, 10**9))
    save(args.out_dir, "tables.csv", header, rows)


if __name__ == "__main__":
    main()
