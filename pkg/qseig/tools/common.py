import sys
from typing import Optional

import click
from loguru import logger
from pydantic import ValidationError

from qseig.config.constants import EXIT_CODE
from qseig.config.exceptions import InvalidConfig, InvalidParams, QsEigError
from qseig.data.read_api import read_run_config
from qseig.data.schemas import RunConfig, SchemeConfig
from qseig.pipe.AbsPipe import AbsPipe


def configure_logger(debug_able: bool):
    logger.remove()
    logger.add(sys.stderr, level='DEBUG' if debug_able else 'INFO')
    if debug_able:
        logger.warning('debug mode is on')


def parse_tau_list(value: Optional[str]) -> list[float]:
    """'0.01, 0.1,0.5' -> [0.01, 0.1, 0.5]."""
    if value is None:
        return []
    try:
        return [float(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise InvalidParams(f'liste de tau invalide {value!r}')


def load_config(config_path: Optional[str], seed: Optional[int] = None, tau: Optional[float] = None) -> RunConfig:
    """Lit la configuration et applique les surcharges --seed / --tau."""
    if not config_path:
        raise InvalidParams('--config est requis')
    config = read_run_config(config_path)
    update = {}
    if seed is not None:
        update['seed'] = seed
    if tau is not None:
        update['tau'] = tau
    if update:
        try:
            scheme = SchemeConfig.model_validate({**config.scheme.model_dump(), **update})
        except ValidationError as e:
            raise InvalidConfig(str(e))
        config = config.model_copy(update={'scheme': scheme})
    return config


def echo_summary(name: str, pipe: AbsPipe):
    """Tableau récapitulatif sur la sortie standard."""
    report = pipe.report
    click.echo(f'== {name} (exit {pipe.exit_code}) ==')
    if 'terminated_by' in report:
        click.echo(f"terminated_by: {report['terminated_by']}  steps: {report['steps']}")
    bounds = report.get('bounds')
    if bounds:
        click.echo(f"tau={report.get('tau', float('nan')):g}  lambda1={bounds['lambda1']:.6g}  c_e={bounds['c_e']:.4g}")
        click.echo(f"  tau_nonexpansion={bounds['tau_nonexpansion']:.4g}  "
                   f"tau_quasi_stiefel={bounds['tau_quasi_stiefel']:.4g}  "
                   f"tau_contraction={bounds['tau_contraction']:.4g}  tau_energy={bounds['tau_energy']:.4g}")
    final = report.get('final')
    if final:
        errors = final.get('relative_errors') or [None] * len(final['eigenvalues'])
        click.echo(f"{'i':>3}  {'lambda_i':>22}  {'err_i':>10}  {'residual':>10}")
        for i, (lam, err, res) in enumerate(zip(final['eigenvalues'], errors, final['residual_norms']), start=1):
            err_txt = f'{err:.3e}' if err is not None else '-'
            click.echo(f'{i:>3}  {lam:>22.15g}  {err_txt:>10}  {res:>10.3e}')
    if 'runs' in report:
        for run in report['runs']:
            click.echo(f"tau={run['tau']:<8g} {run['terminated_by']:<14} steps={run['steps']:<7} "
                       f"max err_i={max(run['relative_errors']):.3e}")
        click.echo(f"tau_independent: {report['tau_independent']}")
    if 'results' in report:
        for r in report['results']:
            status = 'PASS' if r['passed'] else ('FAIL' if r['gating'] else 'INFO')
            click.echo(f"[{status}] {r['name']:<48} marge={r['slack']:.3e}  {r['detail']}")
    if 'energy_ref' in report:
        for i, item in enumerate(report['eigenvalues'], start=1):
            click.echo(f"{i:>3}  {item['value']:>22.15g}  {item['residual']:.3e}")
        click.echo(f"E_ref = {report['energy_ref']:.15g}")


def do_run(name: str, pipe: AbsPipe, emit_summary: bool = True) -> int:
    """Enchaîne les étapes d'un pipe et traduit les erreurs en codes de sortie."""
    try:
        pipe.pipe_prepare()
        pipe.pipe_run()
        pipe.pipe_report()
        pipe.pipe_write()
    except QsEigError as e:
        logger.error(str(e))
        return e.exit_code
    except Exception as e:
        logger.exception(e)
        return EXIT_CODE.CONFIG_ERROR
    if emit_summary:
        echo_summary(name, pipe)
    return pipe.exit_code
