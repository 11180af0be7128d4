"""
Servicio de ejecución de experimentos.

Construye el POVM de la configuración, ejecuta los análisis
seleccionados en el orden declarado y persiste informes JSON,
compañeros CSV y el manifiesto de la ejecución.
"""

from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd

from config.settings import APP_NAME, APP_VERSION, CONFIG_SCHEMA_VERSION, OUTPUT_DIR, Tolerances, get_tolerances
from repository.analysis import (
    absolute_continuity_audit,
    axis_event,
    cell_shrink_scaling,
    default_refinement_sequences,
    enumerate_events,
    joint_localization_bound,
    necessary_condition_family,
    necessary_condition_verdict,
    norm1_report,
    point_shrinking_sequence,
    refinement_check,
)
from repository.covariant import (
    CoherentGrid,
    FiducialVector,
    WeylSystem,
    absolute_continuity_constant,
    build_coherent_povm,
    build_fiducial,
    build_wh_povm,
    covariance_sweep,
    resolution_sweep,
)
from repository.marginals import (
    MarkovKernel,
    extract_kernel,
    fourier_basis,
    marginal_kernel_identity_check,
    marginal_p,
    marginal_q,
    position_basis,
    smear_in_basis,
)
from repository.povm import (
    DiscretePOVM,
    is_commutative,
    is_projective,
    pvm_from_basis,
    save_povm,
    sharp_position_pvm,
    spectrum_support,
    validate_povm,
)
from services.experiment_config import (
    ANALYSES,
    ExperimentConfig,
    config_hash,
    load_config,
    parse_config,
)
from services.report_writer import ReportWriter, sanitize_non_finite
from utils.exceptions import (
    ArtifactError,
    ConfigurationError,
    KernelError,
    NormalizationDefectError,
    NormOneException,
    RejectedInputError,
    handle_exception,
)
from utils.logger import LoggerMixin, log_function_call

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

MODES = ("check", "build", "sweep", "marginal")

# Flujo aleatorio del fiducial; cada análisis usa su posición en ANALYSES + 1
FIDUCIAL_STREAM = 0


@dataclass
class AnalysisOutcome:
    """Resultado de un análisis listo para persistir."""

    name: str
    passed: bool
    result: Dict[str, Any]
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    kernels: Dict[str, MarkovKernel] = field(default_factory=dict)


@dataclass
class RunResult:
    """Código de salida y manifiesto de una ejecución."""

    exit_code: int
    manifest: Dict[str, Any] = field(default_factory=dict)
    manifest_path: Optional[Path] = None
    error: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "exit_code": self.exit_code,
            "manifest": str(self.manifest_path) if self.manifest_path else None,
            "summary": self.manifest.get("summary", {}),
            "error": self.error,
        }


def mode_config(config: ExperimentConfig, mode: str) -> ExperimentConfig:
    """
    Ajusta la selección de análisis al modo de ejecución.

    Raises:
        ConfigurationError: Si el modo no existe o no aplica a la construcción
    """
    if mode not in MODES:
        raise ConfigurationError(f"Modo no soportado: {mode}. Soportados: {', '.join(MODES)}")
    kind = config.construction.kind
    if mode == "check":
        return config
    if mode == "build":
        analyses = ["validate"]
    elif mode == "sweep":
        if kind == "coherent":
            analyses = ["scaling"]
        elif kind == "wh":
            analyses = ["resolution-sweep"]
        else:
            raise ConfigurationError(
                f"El modo sweep requiere una construcción 'coherent' o 'wh', se recibió '{kind}'",
                config_key="construction.kind",
            )
    else:
        analyses = ["marginals"] + (["kernel-identity"] if kind == "wh" else [])
    payload = config.model_dump(by_alias=True)
    payload["analyses"] = analyses
    return parse_config(payload)


@log_function_call
def build_povm(
    config: ExperimentConfig,
    tolerances: Tolerances,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[DiscretePOVM, Optional[FiducialVector]]:
    """Construye el POVM descrito por la configuración y su fiducial, si lo tiene."""
    c = config.construction
    if c.kind == "wh":
        fiducial = build_fiducial(c.fiducial.to_spec(), c.d, basis="lattice", rng=rng)
        return build_wh_povm(c.d, fiducial, tolerances, c.thresholds.normalization), fiducial
    if c.kind == "coherent":
        fiducial = build_fiducial(c.fiducial.to_spec(), c.N, basis="fock", rng=rng)
        grid = CoherentGrid(c.N, c.L, c.h)
        povm = build_coherent_povm(grid, fiducial, c.truncation, c.thresholds.normalization, tolerances)
        return povm, fiducial
    if c.kind == "pvm":
        if c.basis == "position":
            return sharp_position_pvm(c.d, tolerances), None
        return pvm_from_basis(fourier_basis(c.d), basis_name="fourier", tolerances=tolerances), None
    kernel = MarkovKernel(np.asarray(c.kernel, dtype=np.float64), name="config", tolerances=tolerances)
    return smear_in_basis(c.basis, kernel, tolerances=tolerances).povm, None


class RunContext:
    """Estado compartido por los análisis de una ejecución."""

    def __init__(self, config: ExperimentConfig, tolerances: Tolerances):
        self.config = config
        self.tolerances = tolerances
        self.povm: Optional[DiscretePOVM] = None
        self.fiducial: Optional[FiducialVector] = None
        self._family: Optional[List[DiscretePOVM]] = None

    def rng(self, stream: int) -> Optional[np.random.Generator]:
        if self.config.seed is None:
            return None
        return np.random.default_rng([self.config.seed, stream])

    @property
    def family(self) -> List[DiscretePOVM]:
        """POVMs coherentes sobre los niveles de h del barrido, de grueso a fino."""
        if self._family is None:
            c = self.config.construction
            levels = sorted(set(self.config.sweep.h_levels), reverse=True)
            self._family = [
                build_coherent_povm(
                    CoherentGrid(c.N, c.L, h),
                    self.fiducial,
                    c.truncation,
                    c.thresholds.normalization,
                    self.tolerances,
                )
                for h in levels
            ]
        return self._family

    @property
    def default_point(self) -> List[float]:
        if self.config.sweep.point is not None:
            return list(self.config.sweep.point)
        finest = min(self.config.sweep.h_levels) / 2.0
        return [finest, finest]


class ExperimentRunner(LoggerMixin):
    """Ejecuta una configuración de experimento y escribe sus artefactos."""

    def __init__(self):
        super().__init__()
        self._handlers: Dict[str, Callable[[RunContext, Optional[np.random.Generator]], AnalysisOutcome]] = {
            "validate": self._validate,
            "covariance": self._covariance,
            "norm1": self._norm1,
            "necessary-condition": self._necessary_condition,
            "refinement": self._refinement,
            "scaling": self._scaling,
            "marginals": self._marginals,
            "kernel-identity": self._kernel_identity,
            "joint-bound": self._joint_bound,
            "absolute-continuity": self._absolute_continuity,
            "resolution-sweep": self._resolution_sweep,
        }

    # Entrada

    def run_path(
        self,
        config_path: Union[str, Path],
        mode: str = "check",
        out: Optional[Union[str, Path]] = None,
        seed: Optional[int] = None,
        tol_overrides: Optional[Mapping[str, float]] = None,
    ) -> RunResult:
        """
        Carga la configuración, aplica las opciones de línea de comandos y ejecuta.

        Returns:
            Resultado con código 2 si la configuración no es válida
        """
        try:
            config = load_config(
                config_path,
                seed=seed,
                output_dir=str(out) if out is not None else None,
                tolerances=tol_overrides,
            )
            config = mode_config(config, mode)
        except ConfigurationError as e:
            self.log_operation("load_config", e.message, level="error", config_path=str(config_path))
            return RunResult(exit_code=EXIT_CONFIG_ERROR, error=e.to_dict())
        return self.run(config, mode)

    def run(self, config: ExperimentConfig, mode: str = "check") -> RunResult:
        """Ejecuta una configuración ya validada."""
        started_at = _timestamp()
        output_dir = Path(config.output_dir) if config.output_dir else OUTPUT_DIR
        try:
            writer = ReportWriter(output_dir)
        except (OSError, ArtifactError) as e:
            error = e.to_dict() if isinstance(e, ArtifactError) else ArtifactError(str(e)).to_dict()
            self.log_operation("run", f"No se pudo preparar {output_dir}", level="error")
            return RunResult(exit_code=EXIT_CONFIG_ERROR, error=error)

        digest = config_hash(config)
        ctx = RunContext(config, get_tolerances(config.tolerances))
        summary: Dict[str, bool] = {}
        error: Optional[Dict[str, Any]] = None
        exit_code = EXIT_OK
        self.log_operation(
            "run",
            f"Ejecución {mode}: {config.construction.kind}, análisis {', '.join(config.analyses)}",
            config_hash=digest,
        )

        try:
            ctx.povm, ctx.fiducial = build_povm(config, ctx.tolerances, ctx.rng(FIDUCIAL_STREAM))
        except NormalizationDefectError as e:
            self.log_operation("build", e.message, level="error")
            error, exit_code = e.to_dict(), EXIT_CHECK_FAILED
            summary["construction"] = False
        except (RejectedInputError, KernelError) as e:
            self.log_operation("build", e.message, level="error")
            return RunResult(exit_code=EXIT_CONFIG_ERROR, error=e.to_dict())

        try:
            if error is None:
                for name in config.analyses:
                    outcome = self._dispatch(name, ctx)
                    summary[name] = self._persist(writer, digest, outcome)
                if mode == "build":
                    target = writer.register("povm.json", "json", "build")
                    save_povm(ctx.povm, target)
                    summary["build"] = True
            writer.verify()
        except ArtifactError as e:
            self.log_operation("persist", e.message, level="error")
            return RunResult(exit_code=EXIT_CONFIG_ERROR, error=e.to_dict())

        if not all(summary.values()):
            exit_code = EXIT_CHECK_FAILED
        manifest = {
            "schema": CONFIG_SCHEMA_VERSION,
            "toolkit": APP_NAME,
            "toolkit_version": APP_VERSION,
            "mode": mode,
            "config_hash": digest,
            "selection": config.selection(),
            "seed": config.seed,
            "output_dir": str(output_dir),
            "started_at": started_at,
            "finished_at": _timestamp(),
            "files": writer.files,
            "summary": summary,
            "exit_code": exit_code,
            "error": error,
        }
        try:
            manifest_path = writer.write_manifest(manifest)
        except ArtifactError as e:
            return RunResult(exit_code=EXIT_CONFIG_ERROR, manifest=manifest, error=e.to_dict())

        self.log_operation(
            "run",
            f"Ejecución terminada con código {exit_code}: "
            f"{sum(summary.values())}/{len(summary)} verificaciones superadas",
            exit_code=exit_code,
        )
        return RunResult(exit_code=exit_code, manifest=manifest, manifest_path=manifest_path, error=error)

    # Despacho y persistencia

    def _dispatch(self, name: str, ctx: RunContext) -> AnalysisOutcome:
        handler = handle_exception(self._handlers[name])
        try:
            outcome = handler(ctx, ctx.rng(ANALYSES.index(name) + 1))
        except NormOneException as e:
            self.log_operation(name, f"El análisis {name} terminó con error: {e.message}", level="error")
            return AnalysisOutcome(name=name, passed=False, result={"error": e.to_dict()})
        self.log_operation(name, f"Análisis {name}: {'superado' if outcome.passed else 'fallido'}")
        return outcome

    def _persist(self, writer: ReportWriter, digest: str, outcome: AnalysisOutcome) -> bool:
        result, non_finite = sanitize_non_finite(outcome.result)
        passed = outcome.passed and not non_finite
        if non_finite:
            self.log_operation(
                outcome.name,
                f"Valores no finitos en {outcome.name}: {', '.join(non_finite[:5])}",
                level="warning",
            )
        payload = {
            "analysis": outcome.name,
            "config_hash": digest,
            "passed": passed,
            "result": result,
        }
        if non_finite:
            payload["non_finite"] = non_finite
        writer.write_json(f"{outcome.name}.json", payload, analysis=outcome.name)
        for table, frame in outcome.tables.items():
            writer.write_csv(f"{outcome.name}.{table}.csv", frame, analysis=outcome.name)
        for key, kernel in outcome.kernels.items():
            kernel.save_csv(writer.register(f"{outcome.name}.kernel-{key}.csv", "csv", outcome.name))
        return passed

    # Análisis

    def _validate(self, ctx: RunContext, rng: Optional[np.random.Generator]) -> AnalysisOutcome:
        povm = ctx.povm
        report = validate_povm(povm, ctx.tolerances)
        result = {
            "povm": povm.describe(),
            "validation": report.to_dict(),
            "commutative": is_commutative(povm).to_dict(),
            "projective": is_projective(povm).to_dict(),
            "support_size": len(spectrum_support(povm)),
        }
        atoms = pd.DataFrame([asdict(a) for a in report.atoms])
        return AnalysisOutcome("validate", report.passed, result, tables={"atoms": atoms})

    def _covariance(self, ctx: RunContext, rng: Optional[np.random.Generator]) -> AnalysisOutcome:
        system = WeylSystem(ctx.povm.dim)
        sweep = covariance_sweep(ctx.povm, system, rng=rng, tolerances=ctx.tolerances)
        relations = system.check_relations()
        relations_hold = all(value <= ctx.tolerances.equality for value in relations.values())
        result = {"sweep": sweep.to_dict(), "relations": relations}
        return AnalysisOutcome("covariance", sweep.passed and relations_hold, result)

    def _norm1(self, ctx: RunContext, rng: Optional[np.random.Generator]) -> AnalysisOutcome:
        povm = ctx.povm
        events = enumerate_events(povm.space, rng=rng)
        necessary = necessary_condition_verdict(povm)
        report = norm1_report(povm, events, tolerances=ctx.tolerances, necessary=necessary)
        records = pd.DataFrame([
            {
                "event": position,
                "kind": record.kind,
                "size": len(record.atoms),
                "norm": record.norm,
                "gap": record.gap,
                "zero": record.zero,
                "expectation": record.expectation,
                "state_ref": record.state_ref,
                "exceeds_identity": record.exceeds_identity,
            }
            for position, record in enumerate(report.records)
        ])
        result = {"report": report.to_dict(), "necessary_condition": necessary.to_dict()}
        return AnalysisOutcome("norm1", report.has_norm1, result, tables={"records": records})

    def _necessary_condition(self, ctx: RunContext, rng: Optional[np.random.Generator]) -> AnalysisOutcome:
        verdict = necessary_condition_verdict(ctx.povm)
        result: Dict[str, Any] = {"verdict": verdict.to_dict()}
        tables = {}
        if ctx.config.construction.kind == "coherent" and len(set(ctx.config.sweep.h_levels)) >= 2:
            trend = necessary_condition_family(ctx.family)
            result["trend"] = trend.to_dict()
            tables["levels"] = pd.DataFrame(trend.levels)
        passed = verdict.atom_norm_ceiling <= 1.0 + ctx.tolerances.equality
        return AnalysisOutcome("necessary-condition", passed, result, tables=tables)

    def _refinement(self, ctx: RunContext, rng: Optional[np.random.Generator]) -> AnalysisOutcome:
        povm = ctx.povm
        reports = [
            ("single", refinement_check(povm, sequence, ctx.tolerances))
            for sequence in default_refinement_sequences(povm.space)
        ]
        if ctx.config.construction.kind == "coherent" and len(set(ctx.config.sweep.h_levels)) >= 2:
            sequence = point_shrinking_sequence(ctx.family, ctx.default_point)
            reports.append(("nested-grids", refinement_check(ctx.family, sequence, ctx.tolerances)))

        limit = povm.normalization_defect + 1e-10
        passed = all(
            report.dominated and (report.identity_deviation is None or report.identity_deviation <= limit)
            for _, report in reports
        )
        result = {
            "sequences": [{"scope": scope, **report.to_dict()} for scope, report in reports],
            "normalization_defect": povm.normalization_defect,
        }
        rows = [
            {"sequence": index, "scope": scope, "direction": report.direction, "step": step,
             "deviation": deviation, "measure": measure, "bound": bound}
            for index, (scope, report) in enumerate(reports)
            for step, (deviation, measure, bound) in enumerate(zip(report.deviations, report.measures, report.bounds))
        ]
        return AnalysisOutcome("refinement", passed, result, tables={"steps": pd.DataFrame(rows)})

    def _scaling(self, ctx: RunContext, rng: Optional[np.random.Generator]) -> AnalysisOutcome:
        fit = cell_shrink_scaling(ctx.family, point=ctx.config.sweep.point)
        return AnalysisOutcome("scaling", fit.in_range, fit.to_dict(), tables={"levels": pd.DataFrame(fit.levels)})

    def _marginals(self, ctx: RunContext, rng: Optional[np.random.Generator]) -> AnalysisOutcome:
        povm = ctx.povm
        is_wh = ctx.config.construction.kind == "wh"
        result: Dict[str, Any] = {"parent_defect": povm.normalization_defect}
        kernels: Dict[str, MarkovKernel] = {}
        passed = True
        for axis, marginal in (("q", marginal_q(povm)), ("p", marginal_p(povm))):
            report = validate_povm(marginal)
            entry: Dict[str, Any] = {
                "povm": marginal.describe(),
                "validation": report.to_dict(),
                "commutative": is_commutative(marginal, ctx.tolerances.support).to_dict(),
                "max_singleton_norm": float(marginal.atom_norms().max()),
            }
            passed = passed and report.passed
            if is_wh:
                basis = position_basis(povm.dim) if axis == "q" else fourier_basis(povm.dim)
                extraction = extract_kernel(marginal, basis, name=f"marginal-{axis}", tolerances=ctx.tolerances)
                entry["kernel"] = extraction.to_dict()
                passed = passed and extraction.passed
                if extraction.kernel is not None:
                    kernels[axis] = extraction.kernel
            result[axis] = entry
        return AnalysisOutcome("marginals", passed, result, kernels=kernels)

    def _kernel_identity(self, ctx: RunContext, rng: Optional[np.random.Generator]) -> AnalysisOutcome:
        checks = [
            marginal_kernel_identity_check(ctx.povm.dim, ctx.fiducial, axis, ctx.tolerances)
            for axis in ("q", "p")
        ]
        result = {check.axis: check.to_dict() for check in checks}
        return AnalysisOutcome("kernel-identity", all(check.passed for check in checks), result)

    def _joint_bound(self, ctx: RunContext, rng: Optional[np.random.Generator]) -> AnalysisOutcome:
        povm = ctx.povm
        joint = ctx.config.joint
        n_q, n_p = povm.space.axis_sizes
        bound = joint_localization_bound(povm, axis_event(n_q, joint.q), axis_event(n_p, joint.p))
        passed = bound.norm <= 1.0 + ctx.tolerances.equality + povm.normalization_defect
        return AnalysisOutcome("joint-bound", passed, bound.to_dict())

    def _absolute_continuity(self, ctx: RunContext, rng: Optional[np.random.Generator]) -> AnalysisOutcome:
        povm = ctx.povm
        constant = absolute_continuity_constant(povm, ctx.tolerances)
        events = [tagged.event for tagged in enumerate_events(povm.space, rng=rng)]
        audit = absolute_continuity_audit(povm, events, ctx.tolerances)
        result = {"constant": constant.to_dict(), "audit": audit.to_dict()}
        return AnalysisOutcome("absolute-continuity", audit.passed, result)

    def _resolution_sweep(self, ctx: RunContext, rng: Optional[np.random.Generator]) -> AnalysisOutcome:
        sweep_config = ctx.config.sweep
        sweep = resolution_sweep(sweep_config.d_values, sweep_config.fiducials_per_d, rng, ctx.tolerances)
        return AnalysisOutcome(
            "resolution-sweep", sweep.passed, sweep.to_dict(), tables={"samples": pd.DataFrame(sweep.rows)}
        )


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")
