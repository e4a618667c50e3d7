import logging

from hilfer_impulse.config import load_config
from hilfer_impulse.management.base import HilferCommand
from hilfer_impulse.output import write_trajectory
from hilfer_impulse.solver import solve
from hilfer_impulse.systems import MeshSpec

logger = logging.getLogger(__name__)


class Command(HilferCommand):
    help = "Solves the system in a JSON configuration and writes its trajectory as CSV"

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True, help="Path to the JSON run configuration")
        parser.add_argument(
            "--out",
            default=None,
            help="CSV file to write (defaults to output.csv from the configuration)",
        )
        parser.add_argument(
            "--points",
            type=int,
            default=None,
            help="Mesh points per interval, overriding the configuration",
        )

    def handle(self, config: str, out: str | None = None, points: int | None = None, **options):
        run_config = load_config(config)
        mesh = run_config.mesh
        if points is not None:
            mesh = MeshSpec(points_per_interval=points, grading=mesh.grading)
        trajectory = solve(run_config.system, mesh)
        path = out or run_config.output_csv
        if path is None:
            path = "trajectory.csv"
            logger.info(f"No output path given, writing {path}")
        rows = write_trajectory(path, trajectory)
        self.stdout.write(f"Wrote {rows} rows to {path}")
