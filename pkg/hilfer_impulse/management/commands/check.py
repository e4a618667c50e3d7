import logging

from hilfer_impulse.config import ESTIMATE, RunConfig, load_config
from hilfer_impulse.contraction import contraction_constant, estimate_lipschitz
from hilfer_impulse.exceptions import ConfigError
from hilfer_impulse.management.base import HilferCommand
from hilfer_impulse.solver import PiecewiseTrajectory, solve
from hilfer_impulse.stability import (
    DOMINANCE_TOLERANCE,
    SECOND_PARAMS,
    certificate,
    check_envelope_dominance,
    check_generalized_dominance,
    verify_lyapunov,
)
from hilfer_impulse.systems import MeshSpec

logger = logging.getLogger(__name__)


class Command(HilferCommand):
    help = "Checks the contraction and Mittag-Leffler stability conditions of a configuration"

    def add_arguments(self, parser):
        parser.add_argument("--config", required=True, help="Path to the JSON run configuration")
        parser.add_argument(
            "--envelope-param",
            choices=SECOND_PARAMS,
            default=None,
            help="Second Mittag-Leffler parameter of the stability envelope",
        )
        parser.add_argument(
            "--points",
            type=int,
            default=None,
            help="Mesh points per interval, overriding the configuration",
        )

    def handle(
        self,
        config: str,
        envelope_param: str | None = None,
        points: int | None = None,
        **options,
    ):
        run_config = load_config(config)
        if not (run_config.contraction or run_config.lyapunov or run_config.generalized):
            raise ConfigError(
                "Nothing to check: give a contraction, lyapunov or generalized block"
            )
        failures = []
        if run_config.contraction:
            failures += self.check_contraction(run_config)
        if run_config.lyapunov or run_config.generalized:
            mesh = run_config.mesh
            if points is not None:
                mesh = MeshSpec(points_per_interval=points, grading=mesh.grading)
            trajectory = solve(run_config.system, mesh)
            if run_config.lyapunov:
                failures += self.check_lyapunov(run_config, trajectory, envelope_param)
            if run_config.generalized:
                failures += self.check_generalized(run_config, trajectory)
        if failures:
            self.fail_check("Failed: " + ", ".join(failures))
        self.stdout.write("All checks passed")

    def check_contraction(self, run_config: RunConfig) -> list[str]:
        system = run_config.system
        options = run_config.contraction
        assert options is not None
        L, impulses = options.L, options.impulses
        if ESTIMATE in (L, impulses):
            estimated_L, estimated_impulses = estimate_lipschitz(
                system.g,
                system.impulse_maps,
                system.schedule,
                system.mode,
                box=options.box,
                samples=options.samples,
                seed=options.seed,
            )
            if L == ESTIMATE:
                L = estimated_L
                self.stdout.write(f"Estimated L={L:.6f}")
            if impulses == ESTIMATE:
                impulses = estimated_impulses
                self.stdout.write(
                    "Estimated I=[" + ", ".join(f"{value:.6f}" for value in impulses) + "]"
                )
        report = contraction_constant(
            float(L), list(impulses), system.order, system.schedule, options.p, system.mode
        )
        self.stdout.write(f"K={report.K:.6f} p={report.p_used:.6f}")
        for name, term in zip(("impulse", "first interval", "later intervals"), report.terms):
            self.stdout.write(f"  {name}: {term:.6f}")
        if report.contraction:
            self.stdout.write("Contraction: yes")
            return []
        self.stdout.write("Contraction: no (K >= 1)")
        return ["contraction"]

    def check_lyapunov(
        self,
        run_config: RunConfig,
        trajectory: PiecewiseTrajectory,
        envelope_param: str | None,
    ) -> list[str]:
        system = run_config.system
        lyap = run_config.lyapunov
        assert lyap is not None
        failures = []
        report = verify_lyapunov(system, trajectory, lyap, run_config.grid_stride)
        for check in report.checks:
            where = "" if check.t is None else f" at t={check.t:g}"
            status = "ok" if check.passed else "FAILED"
            self.stdout.write(f"{check.name}: margin {check.margin:.3e}{where} {status}")
        if not report.passed:
            failures.append("lyapunov")
        cert = certificate(
            lyap,
            system.order,
            interval_count=len(trajectory.of_kind("active")),
            second_param=envelope_param or run_config.envelope_param,
            h=run_config.h,
        )
        cert = check_envelope_dominance(trajectory, cert, system.schedule, system.mode)
        assert cert.margin is not None
        self.stdout.write(
            f"Envelope dominance (h={cert.h:.6f}, gamma={cert.gamma:g}): margin {cert.margin:.3e}"
        )
        if not cert.verdict:
            failures.append("envelope dominance")
        return failures

    def check_generalized(self, run_config: RunConfig, trajectory: PiecewiseTrajectory) -> list[str]:
        spec = run_config.generalized
        assert spec is not None
        margin = check_generalized_dominance(trajectory, spec, run_config.system.order)
        self.stdout.write(f"Generalized envelope: margin {margin:.3e}")
        if margin < -DOMINANCE_TOLERANCE:
            return ["generalized envelope"]
        return []
