"""Write a synthetic stable/chatter dataset in the ingest CSV+JSON layout.

    python scripts/make_synthetic_dataset.py data/synth --n-stable 40 --n-chatter 40
"""
import argparse

from tdachatter.synth import generate_dataset, write_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--n-stable", type=int, default=40)
    ap.add_argument("--n-chatter", type=int, default=40)
    ap.add_argument("--noise", type=float, default=0.05)
    ap.add_argument("--duration", type=float, default=0.1, help="seconds per record")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    recs = generate_dataset(args.n_stable, args.n_chatter, args.noise, args.seed,
                            duration=args.duration)
    write_dataset(recs, args.out)
    print(f"{len(recs)} records -> {args.out}")


if __name__ == "__main__":
    main()
