"""
INVERSE ORCHESTRATOR
Owns one instance of every solver and routes problem documents:
- Forward solves and Pareto sweeps
- Classical KKT inverse
- Exact, linearized and successive-linearization inverse models
- KKT-residual inverse
- Model comparison and property verification
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from config import InverseOptions, KernelOptions, LpOptions, SlpOptions
from models.errors import InvalidScheme, NonPositiveObjective, TradeoffError
from models.problem import ForwardProblem
from models.scaling import ScalingScheme, SchemeKind, relative_scheme
from solvers.convex_kernel import ConvexKernel
from solvers.forward import ForwardSolver
from solvers.inverse import InverseSolver
from solvers.kes import KesConfig, KesSolver, Normalization, Penalty
from solvers.linear_inverse import LinearInverseSolver, LiopInstance
from solvers.linprog import LpSolver
from workbench.documents import ProblemDocument
from workbench.reports import TradeoffReport, sweep_frame

INVERSE_MODELS = ("iop", "iop_r", "iop_a", "liop", "slp")


class InverseOrchestrator:
    """
    Dispatches a ProblemDocument to the handler for its model and wraps
    every inverse outcome in a TradeoffReport.
    """

    def __init__(
        self,
        kernel_options: Optional[KernelOptions] = None,
        lp_options: Optional[LpOptions] = None,
        inverse_options: Optional[InverseOptions] = None,
        slp_options: Optional[SlpOptions] = None,
    ):
        self.logger = logging.getLogger("tradeoff.orchestrator")
        self.kernel = ConvexKernel(kernel_options)
        self.lp_solver = LpSolver(lp_options)
        self.forward = ForwardSolver(self.kernel, self.lp_solver)
        self.inverse = InverseSolver(self.kernel, self.forward, inverse_options)
        self.linear_inverse = LinearInverseSolver(self.lp_solver, inverse_options)
        self.kes = KesSolver(self.kernel, self.lp_solver, self.linear_inverse)
        self.slp_options = slp_options or SlpOptions.from_env()
        self.handlers: Dict[str, Callable[[ProblemDocument], Dict]] = {
            "forward": self._handle_forward,
            "sweep": self._handle_sweep,
            "classical": self._handle_classical,
            "kes": self._handle_kes,
        }
        for model in INVERSE_MODELS:
            self.handlers[model] = self._handle_inverse
        self.logger.debug("✅ solvers initialized")

    @classmethod
    def from_options(cls, options: Dict) -> "InverseOrchestrator":
        """Build from a document's options block: {"kernel": {...}, "lp": {...}, "inverse": {...}, "slp": {...}}"""
        return cls(
            KernelOptions.from_env().with_overrides(**options.get("kernel", {})),
            LpOptions.from_env().with_overrides(**options.get("lp", {})),
            InverseOptions.from_env().with_overrides(**options.get("inverse", {})),
            SlpOptions.from_env().with_overrides(**options.get("slp", {})),
        )

    def get_status(self) -> Dict:
        return {
            "components": [c.get_status() for c in
                           (self.kernel, self.lp_solver, self.forward, self.inverse, self.linear_inverse, self.kes)],
            "slp_options": self.slp_options.to_dict(),
        }

    # ------------------------------------------------------------- dispatch

    def run(self, document: ProblemDocument) -> Dict:
        """Run one document; solver options in the document apply to this run only"""
        runner = InverseOrchestrator.from_options(document.options) if document.options else self
        handler = runner.handlers[document.model]
        self.logger.info(f"running {document.model} on a problem with {document.problem.n_vars} variables")
        start = time.perf_counter()
        payload = handler(document)
        payload["model"] = document.model
        payload["seconds"] = time.perf_counter() - start
        return payload

    def run_many(self, documents: List[ProblemDocument], jobs: int = 1) -> List[Dict]:
        if jobs <= 1 or len(documents) <= 1:
            return [self.run(d) for d in documents]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(self.run, documents))

    # ------------------------------------------------------------- handlers

    def _handle_forward(self, document: ProblemDocument) -> Dict:
        if document.alpha is None:
            raise InvalidScheme("the forward model needs a weight vector alpha")
        sample = self.forward.solve_fop(document.problem, document.alpha)
        return {
            "alpha": sample.alpha.normalized.tolist(),
            "x": sample.x.tolist(),
            "f": dict(zip(document.problem.objective_names, sample.f.tolist())),
            "kernel": sample.kernel_report,
        }

    def _handle_sweep(self, document: ProblemDocument) -> Dict:
        grid_size = int(document.parameters.get("grid_size", 101))
        jobs = int(document.parameters.get("jobs", 1))
        samples = self.forward.sweep_pareto(document.problem, grid_size, seed=document.seed, jobs=jobs)
        return {"frame": sweep_frame(samples, document.problem.objective_names)}

    def _handle_classical(self, document: ProblemDocument) -> Dict:
        xhat = self._require_xhat(document)
        membership = self.forward.membership(document.problem, xhat)
        result = self.forward.classical_inverse(document.problem, xhat)
        payload = {
            "membership": membership.verdict.value,
            "verdict": result.verdict.value,
        }
        if result.found:
            payload.update({
                "alpha": result.weights.normalized.tolist(),
                "sigma": result.sigma.tolist(),
                "pi": result.pi.tolist(),
            })
        return payload

    def _handle_inverse(self, document: ProblemDocument) -> Dict:
        problem, xhat = document.problem, self._require_xhat(document)
        model = document.model
        start = time.perf_counter()
        payload: Dict = {}
        if model == "iop_r":
            result = self.inverse.solve_iop_relative(problem, xhat, self._reference(document))
        elif model == "iop_a":
            result = self.inverse.solve_iop_absolute(problem, xhat)
        elif model == "iop":
            result = self.inverse.solve_iop(problem, xhat, self.scheme_for(document))
        elif model == "liop":
            kappa = document.parameters.get("kappa")
            instance = LiopInstance.at_xhat(problem, xhat, self.scheme_for(document),
                                            None if kappa is None else float(kappa))
            result = self.linear_inverse.solve_liop(instance)
        else:
            options = self.slp_options
            if "slp_step_tol" in document.parameters:
                options = options.with_overrides(step_tol=float(document.parameters["slp_step_tol"]))
            trace = self.linear_inverse.run_slp(problem, xhat, self.scheme_for(document), options)
            payload["trace"] = trace
            if trace.final_result is None:
                payload["report"] = None
                return payload
            result = trace.final_result
        payload["report"] = TradeoffReport.from_result(result, time.perf_counter() - start)
        payload["result"] = result
        return payload

    def _handle_kes(self, document: ProblemDocument) -> Dict:
        problem, xhat = document.problem, self._require_xhat(document)
        config = self.kes_config_for(document)
        start = time.perf_counter()
        outcome = self.kes.solve_kes(problem, xhat, config)
        seconds = time.perf_counter() - start
        payload = {
            "config": config.to_dict(),
            "alpha_raw": outcome.weights.raw.tolist(),
            "residuals": outcome.residuals,
            "dual": outcome.dual,
        }
        plan = self.forward.solve_fop(problem, outcome.weights)
        payload["report"] = TradeoffReport.from_plan("kes", plan, problem.objective_values(xhat),
                                                     problem.objective_names, seconds)
        return payload

    # ------------------------------------------------------------- requests

    @staticmethod
    def _require_xhat(document: ProblemDocument) -> np.ndarray:
        if document.xhat is None:
            raise InvalidScheme(f"model {document.model} needs an input point xhat")
        return document.xhat

    @staticmethod
    def _reference(document: ProblemDocument) -> int:
        return int(document.scheme.get("kref", 1)) - 1

    def scheme_for(self, document: ProblemDocument) -> ScalingScheme:
        problem = document.problem
        request = document.scheme
        default = {"iop_a": "absolute"}.get(document.model, "relative")
        kind = SchemeKind(request.get("kind", default))
        reference = self._reference(document)
        if kind is SchemeKind.RELATIVE:
            return relative_scheme(problem, self._require_xhat(document), reference)
        if kind is SchemeKind.ABSOLUTE:
            return ScalingScheme.absolute(problem.n_objectives)
        if request.get("mu") is None:
            raise InvalidScheme("a general scheme needs mu")
        return ScalingScheme.general(request["mu"], reference)

    def kes_config_for(self, document: ProblemDocument) -> KesConfig:
        request = document.kes
        normalization = request.get("normalization", "fix")
        if normalization == "fix":
            norm = Normalization.fix_weight(int(request.get("fix", 1)) - 1)
        elif normalization == "mu":
            norm = Normalization.mu_weighted(self.scheme_for(document))
        elif normalization == "l1":
            norm = Normalization.l1_unit()
        else:
            raise InvalidScheme(f"unknown KES normalization {normalization!r}")
        return KesConfig(
            penalty=Penalty(request.get("penalty", "sos")),
            normalization=norm,
            include_eq_residuals=bool(request.get("include_eq_residuals", True)),
            gap_as_l1=bool(request.get("gap_as_l1", False)),
            stationarity_scale=float(request.get("delta_scale", 1.0)),
        )

    # ------------------------------------------------------------- pipelines

    def compare(self, problem: ForwardProblem, xhat, reference: int = 0, kappa: Optional[float] = None,
                kes_delta_scale: float = 1.0, kes_penalty: Penalty = Penalty.SUM_OF_SQUARES) -> List[TradeoffReport]:
        """Relative exact, linearized, SLP and KES models on one input, distances taken to the exact model.

        KES runs once per fixed weight; the reported row fixes the objective
        the exact model weighs most.
        """
        xhat = problem.point(xhat)
        scheme = relative_scheme(problem, xhat, reference)

        start = time.perf_counter()
        exact = self.inverse.solve_iop(problem, xhat, scheme)
        reports = [TradeoffReport.from_result(exact, time.perf_counter() - start)]

        start = time.perf_counter()
        liop = self.linear_inverse.solve_liop(LiopInstance.at_xhat(problem, xhat, scheme, kappa))
        reports.append(TradeoffReport.from_result(liop, time.perf_counter() - start, reference=exact))

        start = time.perf_counter()
        trace = self.linear_inverse.run_slp(problem, xhat, scheme, self.slp_options)
        if trace.final_result is not None:
            report = TradeoffReport.from_result(trace.final_result, time.perf_counter() - start, reference=exact)
            reports.append(report)
        else:
            self.logger.warning(f"⚠️ SLP produced no result ({trace.termination.value})")

        f_hat = problem.objective_values(xhat)
        chosen = int(np.argmax(exact.alpha_normalized))
        kes_weights = {}
        chosen_report = None
        for k in range(problem.n_objectives):
            start = time.perf_counter()
            config = KesConfig(kes_penalty, Normalization.fix_weight(k), stationarity_scale=kes_delta_scale)
            outcome = self.kes.solve_kes(problem, xhat, config)
            kes_weights[problem.objective_names[k]] = outcome.weights.normalized.tolist()
            if k == chosen:
                plan = self.forward.solve_fop(problem, outcome.weights)
                chosen_report = TradeoffReport.from_plan(
                    "kes", plan, f_hat, problem.objective_names, time.perf_counter() - start,
                    extra={"kes_fix": k + 1},
                )
        chosen_report.extra["kes_weights_by_fix"] = kes_weights
        reports.append(chosen_report.against(exact))
        return reports

    def verify(self, document: ProblemDocument) -> pd.DataFrame:
        """Property checks on one input point; one row per check.

        A solve that raises becomes a failed row and the checks built on it are skipped.
        """
        problem, xhat = document.problem, self._require_xhat(document)
        rows = []

        def failed(name: str, error: TradeoffError):
            self.logger.warning(f"⚠️ check {name} could not run: {error}")
            rows.append({"check": name, "passed": False, "value": np.nan, "tolerance": np.nan})

        def check(name: str, fn: Callable[[], tuple]):
            try:
                value, tolerance, passed = fn()
            except TradeoffError as e:
                failed(name, e)
                return
            rows.append({"check": name, "passed": bool(passed), "value": float(value), "tolerance": tolerance})

        def solve(name: str, fn: Callable[[], object]):
            try:
                return fn()
            except TradeoffError as e:
                failed(name, e)
                return None

        K = problem.n_objectives
        uniform = solve("forward_solve", lambda: self.forward.solve_fop(problem, np.full(K, 1.0 / K)))
        if uniform is not None:
            check("kernel_kkt_residual", lambda: self._within(
                uniform.kernel_report["kkt_residuals"]["stationarity"], self.kernel.options.tol * 10))
        try:
            scheme = self.scheme_for(document)
        except NonPositiveObjective:
            scheme = ScalingScheme.absolute(K)
        exact = solve("inverse_solve", lambda: self.inverse.solve_iop(problem, xhat, scheme))
        if exact is not None:
            check("weight_normalization", lambda: self._within(abs(float(scheme.mu @ exact.alpha.raw) - 1.0), 1e-6))
            positive = exact.alpha_normalized > 1e-7
            check("weighted_deviations_equal_epsilon", lambda: self._within(
                float(np.max(np.abs(exact.ratios[positive] - exact.epsilon_star), initial=0.0)), 1e-6))
            check("resolve_consistency", lambda: self._within(
                self.forward.resolve_consistency(problem, exact.alpha, exact.x_star), 1e-6))
            if exact.verdict.value == "Perfect" and not scheme.has_zero:
                check("pairwise_identity", lambda: self._pairwise_gap(scheme, exact))

        liop = solve("linearized_solve",
                     lambda: self.linear_inverse.solve_liop(LiopInstance.at_xhat(problem, xhat, scheme)))
        if liop is not None and exact is not None and not liop.trust_binding:
            check("linearized_lower_bound", lambda: (liop.epsilon_star - exact.epsilon_star, 1e-8,
                                                     liop.epsilon_star <= exact.epsilon_star + 1e-8))
        check("kes_linearized_bridge", lambda: self._within(self.kes.kes_liop_bridge(problem, xhat, scheme).distance,
                                                            1e-6))
        check("kes_degenerate_bridge", lambda: self._within(self.kes.kes_as_degenerate_iop(problem, xhat, 0).distance,
                                                            1e-6))
        frame = pd.DataFrame(rows, columns=["check", "passed", "value", "tolerance"])
        failed = int((~frame["passed"]).sum())
        if failed:
            self.logger.warning(f"⚠️ {failed} of {len(frame)} checks failed")
        return frame

    @staticmethod
    def _within(value: float, tolerance: float) -> tuple:
        return float(value), tolerance, float(value) <= tolerance

    @staticmethod
    def _pairwise_gap(scheme: ScalingScheme, result) -> tuple:
        """u[k1, k2] (f_k1(x*) - f_k1(xhat)) against f_k2(x*) - f_k2(xhat)"""
        diff = result.f_xstar - result.f_xhat
        u = scheme.pairwise()
        gap = float(np.max(np.abs(u * diff[:, None] - diff[None, :])))
        tolerance = 1e-6 * max(1.0, float(np.max(np.abs(result.f_xhat))))
        return gap, tolerance, gap <= tolerance
