import logging
from functools import partial
from pathlib import Path

from hilfer_impulse.example import closed_form_example, example_system
from hilfer_impulse.exceptions import ConfigError, ParameterError
from hilfer_impulse.management.base import HilferCommand
from hilfer_impulse.output import write_closed_form, write_trajectory
from hilfer_impulse.runner import SolveRunner, Task
from hilfer_impulse.solver import solve
from hilfer_impulse.systems import MeshSpec

logger = logging.getLogger(__name__)


def parse_nu_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as error:
        raise ConfigError(f"--nu must be a comma-separated list of numbers, got {text!r}") from error
    if not values:
        raise ConfigError("--nu needs at least one value")
    for value in values:
        if not 0 <= value <= 1:
            raise ParameterError(f"Each nu must be in [0, 1], got {value}")
    return values


class Command(HilferCommand):
    help = "Writes the trajectories of the worked example (mu = 0.4, x0 = 1) for several nu"

    def add_arguments(self, parser):
        parser.add_argument(
            "--nu",
            default="0.25,0.5,0.75,1",
            help="Comma-separated list of type parameters",
        )
        parser.add_argument("--out", default=".", help="Directory to write the CSV files into")
        parser.add_argument(
            "--points",
            type=int,
            default=None,
            help="Mesh points per interval",
        )
        parser.add_argument(
            "--concurrency",
            "-c",
            type=int,
            default=None,
            help="How many solves to run at once",
        )

    def handle(
        self,
        nu: str,
        out: str,
        points: int | None = None,
        concurrency: int | None = None,
        **options,
    ):
        nus = parse_nu_list(nu)
        mesh = MeshSpec() if points is None else MeshSpec(points_per_interval=points)
        tasks = [Task(f"nu={value:g}", partial(solve, example_system(value), mesh)) for value in nus]
        results = SolveRunner(concurrency=concurrency).run(tasks)
        for result in results:
            if result.error is not None:
                raise result.error
        # Files are written here, in nu order, once every solve is back
        directory = Path(out)
        for value, result in zip(nus, results):
            path = directory / f"trajectory_nu_{value:g}.csv"
            write_trajectory(path, result.value)
            self.stdout.write(f"Wrote {path}")
        layout = next(
            (result.value for value, result in zip(nus, results) if value == 1),
            None,
        )
        if layout is None:
            layout = solve(example_system(1.0), mesh)
        caputo = example_system(1.0).order
        path = directory / "closed_form.csv"
        write_closed_form(path, layout, partial(closed_form_example, order=caputo))
        self.stdout.write(f"Wrote {path}")
