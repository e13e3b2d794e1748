import argparse

from goldilocks_sir.commands import Subparsers, add_parser, emit
from goldilocks_sir.dao import RunDAO
from goldilocks_sir.deps import session_scope


def register(subparsers: "Subparsers[argparse.ArgumentParser]") -> None:
    parser = add_parser(subparsers, "runs", "list runs recorded in the ledger")
    parser.add_argument("--limit", type=int, default=20, help="rows to show")
    parser.add_argument("--offset", type=int, default=0, help="rows to skip")
    parser.add_argument(
        "--database-url",
        default=None,
        help="SQLAlchemy URL (default: GOLDILOCKS_DATABASE_URL or ./runs/ledger.db)",
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    with session_scope(args.database_url) as db:
        records = RunDAO(db).list(limit=args.limit, offset=args.offset)
        lines = [
            f"{r.id:>4}  {r.digest[:12]}  {r.scenario_id:<20} "
            f"{r.classification or '-':<15} {r.s_infinity:.4f}  {r.s_star:.4f}"
            for r in records
        ]
    emit("\n".join(lines) + "\n" if lines else "no runs recorded\n")
    return 0
