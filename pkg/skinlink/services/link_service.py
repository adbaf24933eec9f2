from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence

from skinlink.config import settings
from skinlink.models.schemas import (
    SWEEP_AXIS_FIELDS,
    JitterReport,
    LinkGeometry,
    McConfig,
    MetricsReport,
    RunConfig,
    RxConfig,
    SubBandSpec,
    SweepAxis,
    SweepRow,
    TxConfig,
    ValidationReport,
    ValidationRow,
)
from skinlink.services import link_metrics, monte_carlo
from skinlink.services.channel import (
    BeamFootprint,
    MisalignmentParams,
    derive_beam,
    derive_misalignment,
    path_loss,
    xi_in_studied_range,
)
from skinlink.services.noise_snr import (
    average_snr,
    from_db,
    peak_snr,
    responsivity,
    snr_gain,
    to_db,
)
from skinlink.services.skin_attenuation import SkinAttenuationTable, load_table

logger = logging.getLogger(__name__)


@lru_cache(maxsize=8)
def cached_table(path: str) -> SkinAttenuationTable:
    return load_table(path)


@dataclass(frozen=True)
class LinkInputs:
    """Everything the closed forms and the simulator need for one design point."""

    geometry: LinkGeometry
    tx: TxConfig
    rx: RxConfig
    beam: BeamFootprint
    params: MisalignmentParams
    sigma_s: float
    resp: float
    h_l: float
    gain: float
    gamma_th: float

    @property
    def h_l_sq(self) -> float:
        return self.h_l * self.h_l

    @property
    def b_lambda(self) -> float:
        return self.rx.scheme.psi * self.gain


class LinkEvaluationService:
    def __init__(self, table: Optional[SkinAttenuationTable] = None, rel_tol: Optional[float] = None):
        self.table = table
        self.rel_tol = rel_tol if rel_tol is not None else settings.lerch_rel_tol

    def _table_for(self, config: RunConfig) -> SkinAttenuationTable:
        if config.attenuation_file is not None:
            return cached_table(str(config.attenuation_file))
        if self.table is None:
            self.table = cached_table(str(settings.attenuation_file))
        return self.table

    def resolve(self, config: RunConfig, normalized_snr_db: Optional[float] = None) -> LinkInputs:
        table = self._table_for(config)
        geometry = config.geometry()
        tx = config.tx()
        rx = config.rx()

        beam = derive_beam(geometry)
        params = derive_misalignment(geometry)
        sigma_s = geometry.sigma_s
        if config.xi is not None:
            params = params.with_xi(config.xi)
            sigma_s = math.sqrt(beam.w_eq_sq / (4.0 * config.xi))

        resp = responsivity(rx.eta, tx.wavelength)
        h_l = path_loss(table, tx.wavelength, geometry.delta)
        gain = snr_gain(resp, h_l * h_l, tx, rx)

        if normalized_snr_db is not None:
            gamma_th = average_snr(params, resp, h_l * h_l, tx, rx) / from_db(normalized_snr_db)
        elif config.gamma_th is not None:
            gamma_th = config.gamma_th
        else:
            gamma_th = link_metrics.gamma_threshold(config.rate_threshold, rx.scheme)

        return LinkInputs(
            geometry=geometry,
            tx=tx,
            rx=rx,
            beam=beam,
            params=params,
            sigma_s=sigma_s,
            resp=resp,
            h_l=h_l,
            gain=gain,
            gamma_th=gamma_th,
        )

    def evaluate(self, config: RunConfig, normalized_snr_db: Optional[float] = None) -> MetricsReport:
        link = self.resolve(config, normalized_snr_db)
        params = link.params
        scheme = link.rx.scheme

        avg = average_snr(params, link.resp, link.h_l_sq, link.tx, link.rx)
        peak = peak_snr(params, link.gain)
        se = link_metrics.ergodic_spectral_efficiency(params, link.b_lambda, self.rel_tol)
        se_lb = link_metrics.ergodic_se_lower_bound(params, link.b_lambda)
        band = link_metrics.capacity(
            SubBandSpec.narrowband(link.tx.bandwidth, link.tx.wavelength),
            params,
            self._table_for(config),
            link.geometry.delta,
            link.tx,
            link.rx,
            self.rel_tol,
        )
        outage = link_metrics.outage_probability(
            params, link.resp, link.h_l_sq, link.tx, link.rx, link.gamma_th
        )

        if band.vacuous:
            logger.warning("Capacity lower bound is vacuous (%.6g bits/s)", band.lower_bound)

        return MetricsReport(
            wavelength_nm=link.tx.wavelength * 1e9,
            delta_mm=link.geometry.delta * 1e3,
            scheme=scheme,
            psi=scheme.psi,
            responsivity=link.resp,
            path_loss=link.h_l,
            a0=params.a0,
            w_eq_mm=params.w_eq * 1e3,
            xi=params.xi,
            avg_snr=avg,
            avg_snr_db=to_db(avg) if avg > 0 else None,
            peak_snr=peak,
            peak_snr_db=to_db(peak) if peak > 0 else None,
            gamma_th=link.gamma_th,
            outage_probability=outage,
            spectral_efficiency=se,
            spectral_efficiency_lower_bound=se_lb,
            capacity_bps=band.value,
            capacity_lower_bound_bps=band.lower_bound,
            capacity_is_lower_bound=scheme.psi != 1.0,
            vacuous_bound=band.vacuous,
            threshold_exceeds_peak=link.gamma_th > peak,
            xi_out_of_studied_range=not xi_in_studied_range(params.xi),
        )

    def jitter(self, config: RunConfig, target_outage: float) -> JitterReport:
        link = self.resolve(config)
        solution = link_metrics.solve_jitter(
            target_outage, link.gamma_th, link.beam, link.resp, link.h_l_sq, link.tx, link.rx
        )
        band = link_metrics.capacity_at_target_outage(
            target_outage,
            link.gamma_th,
            link.beam,
            link.resp,
            link.h_l_sq,
            link.tx,
            link.rx,
            self.rel_tol,
        )
        logger.info(
            "Jitter tolerance at P_o=%g: sigma_s=%.6g mm (xi=%.6g)",
            target_outage,
            solution.sigma_s * 1e3,
            solution.xi,
        )
        return JitterReport(
            target_outage=target_outage,
            gamma_th=link.gamma_th,
            h_value=solution.h_value,
            sigma_s_mm=solution.sigma_s * 1e3,
            xi=solution.xi,
            w_eq_mm=link.beam.w_eq * 1e3,
            capacity_bps=band.value,
            capacity_lower_bound_bps=band.lower_bound,
            capacity_is_lower_bound=link.rx.scheme.psi != 1.0,
        )

    def _evaluate_point(self, config: RunConfig, point: Dict[str, float]) -> SweepRow:
        updates = {}
        normalized = None
        for name, value in point.items():
            field = SWEEP_AXIS_FIELDS[name][0]
            if field is None:
                normalized = value
            else:
                updates[field] = value
        report = self.evaluate(config.with_updates(**updates), normalized_snr_db=normalized)
        return SweepRow(axes=dict(point), report=report)

    def sweep(
        self,
        config: RunConfig,
        axes: Sequence[SweepAxis],
        workers: Optional[int] = None,
    ) -> List[SweepRow]:
        """Evaluate the cartesian grid of ``axes``; rows follow the grid order (last axis fastest)."""
        grid = itertools.product(*[[(axis.name, float(v)) for v in axis.values()] for axis in axes])
        points = [dict(combo) for combo in grid]
        self._table_for(config)
        logger.info("Sweeping %d point(s) over %s", len(points), ", ".join(a.name for a in axes))
        with ThreadPoolExecutor(max_workers=workers or settings.sweep_workers) as executor:
            return list(executor.map(lambda point: self._evaluate_point(config, point), points))

    def validate(
        self,
        config: RunConfig,
        mc: McConfig,
        sigma_limit: float = 3.0,
    ) -> ValidationReport:
        """Compare every closed form with its Monte Carlo estimate."""
        report = self.evaluate(config)
        link = self.resolve(config)
        estimates = monte_carlo.estimate_metrics(
            mc,
            link.params,
            link.sigma_s,
            link.resp,
            link.h_l_sq,
            link.tx,
            link.rx,
            link.gamma_th,
        )
        closed = {
            "avg_snr": report.avg_snr,
            "outage": report.outage_probability,
            "se": report.spectral_efficiency,
        }
        # outage spread is at least the binomial one at the closed-form probability
        floors = {"outage": monte_carlo.binomial_std_error(report.outage_probability, mc.n_samples)}
        rows = [
            _validation_row(name, closed[name], estimates[name], sigma_limit, floors.get(name, 0.0))
            for name in ("avg_snr", "outage", "se")
        ]
        for row in rows:
            logger.info(
                "%s: closed=%.9g mc=%.9g (se %.3g, z=%s) %s",
                row.metric,
                row.closed_form,
                row.mc_mean,
                row.mc_std_error,
                row.z_score,
                "ok" if row.passed else "FAIL",
            )
        meta = monte_carlo.metadata(mc)
        return ValidationReport(
            rows=rows,
            n_samples=mc.n_samples,
            seed=mc.seed,
            rng=meta["rng"],
            block_size=mc.block_size,
            sigma_limit=sigma_limit,
            passed=all(row.passed for row in rows),
        )


def _validation_row(
    metric: str,
    closed: float,
    estimate: monte_carlo.McEstimate,
    limit: float,
    std_error_floor: float = 0.0,
) -> ValidationRow:
    """z-score of the Monte Carlo mean; the standard error never drops below ``std_error_floor``."""
    difference = estimate.mean - closed
    std_error = max(estimate.std_error, std_error_floor)
    z_score: Optional[float] = None
    if std_error > 0:
        z_score = difference / std_error
    elif abs(difference) <= 1e-12 * max(1.0, abs(closed)):
        z_score = 0.0
    return ValidationRow(
        metric=metric,
        closed_form=closed,
        mc_mean=estimate.mean,
        mc_std_error=std_error,
        z_score=z_score,
        passed=z_score is not None and abs(z_score) <= limit,
    )
