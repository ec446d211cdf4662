import json
import logging

from commands import add_pipeline_flags, pipeline_config, resolve_jobs
from utils.evalkit import evaluate_dataset

logger = logging.getLogger(__name__)


def run_evaluate(cli, args) -> int:
    jobs = resolve_jobs(args)
    config = pipeline_config(args)

    report = evaluate_dataset(args.dataset, config, jobs=jobs)
    with open(args.out, 'w') as f:
        json.dump(report.to_dict(), f, indent=4)
    if args.table:
        with open(args.table, 'w') as f:
            f.write(report.format_table() + "\n")

    print(report.format_table())
    return 0


def setup(cli):
    parser = cli.add_command('evaluate', run_evaluate, help='score the detector on an inpainted/ + mask/ dataset')
    parser.add_argument('--dataset', required=True, help='dataset root directory')
    parser.add_argument('--out', required=True, help='JSON metrics report')
    parser.add_argument('--table', help='also write the plain-text table to this file')
    add_pipeline_flags(parser)
