from hilfer_impulse.management.base import HilferCommand
from hilfer_impulse.selftest import SUITES, run_suites


class Command(HilferCommand):
    help = "Runs the closed-form, composition and Laplace oracle suites"

    def add_arguments(self, parser):
        parser.add_argument(
            "--points",
            type=int,
            default=128,
            help="Grid points for the operator suites (also reported at twice this)",
        )
        parser.add_argument(
            "--suite",
            choices=list(SUITES),
            action="append",
            default=None,
            help="Only run this suite (may be repeated)",
        )

    def handle(self, points: int, suite: list[str] | None = None, **options):
        results = run_suites(suite, points)
        self.stdout.write(f"{'case':<44} {'error':>10} {'refined':>10} {'tolerance':>10}  result")
        for result in results:
            self.stdout.write(f"[{result.suite}] ({result.duration:.2f}s)")
            for case in result.cases:
                refined = "" if case.refined_error is None else f"{case.refined_error:.3e}"
                self.stdout.write(
                    f"{case.name:<44} {case.error:>10.3e} {refined:>10} {case.tolerance:>10.1e}  {'pass' if case.passed else 'FAIL'}"
                )
        failed = [result.suite for result in results if not result.passed]
        if failed:
            self.fail_check("Failed suites: " + ", ".join(failed))
        self.stdout.write("All suites passed")
