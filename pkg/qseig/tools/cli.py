import click
from loguru import logger

from qseig.config.exceptions import InvalidParams, QsEigError
from qseig.data.data_reader_writer import FileBasedDataWriter
from qseig.libs.config_reader import set_serial
from qseig.libs.version import __version__
from qseig.pipe.AbsPipe import AbsPipe
from qseig.pipe.ReferencePipe import ReferencePipe
from qseig.pipe.SolvePipe import SolvePipe
from qseig.pipe.SweepPipe import SweepPipe
from qseig.pipe.VerifyPipe import VerifyPipe
from qseig.tools.common import configure_logger, do_run, load_config, parse_tau_list

config_option = click.option(
    '-c',
    '--config',
    'config_path',
    type=click.Path(),
    help='experiment config file (key = value lines)',
    default=None,
)
seed_option = click.option(
    '--seed',
    'seed',
    type=click.IntRange(0, 2 ** 64 - 1),
    help='seed of the initial state, overrides scheme.seed',
    default=None,
)


@click.group()
@click.version_option(__version__, '--version', '-v', help='display the version and exit')
@click.option('--serial', 'serial', is_flag=True, default=False,
              help='single-threaded deterministic mode')
@click.option('-d', '--debug', 'debug_able', is_flag=True, default=False,
              help='Enables detailed debugging information during the execution of the CLI commands.')
def cli(serial, debug_able):
    set_serial(serial)
    configure_logger(debug_able)


def _execute(ctx: click.Context, name: str, build_pipe) -> None:
    """Construit le pipe ; toute erreur avant l'exécution est une erreur de configuration."""
    try:
        pipe: AbsPipe = build_pipe()
    except QsEigError as e:
        logger.error(str(e))
        ctx.exit(e.exit_code)
    ctx.exit(do_run(name, pipe, emit_summary=pipe.config.outputs.emit_summary))


@cli.command()
@config_option
@click.option('--tau', 'tau', type=str, default=None, help='time step, overrides scheme.tau')
@seed_option
@click.pass_context
def solve(ctx, config_path, tau, seed):
    """Run the quasi-orthogonal iteration and write history and report."""
    def build():
        taus = parse_tau_list(tau)
        if len(taus) > 1:
            raise InvalidParams(f'solve accepte une seule valeur de tau, reçu {taus}')
        config = load_config(config_path, seed=seed, tau=taus[0] if taus else None)
        return SolvePipe(config, FileBasedDataWriter(''))
    _execute(ctx, AbsPipe.PIP_SOLVE, build)


@cli.command('tau-sweep')
@config_option
@click.option('--tau', 'tau', type=str, default=None, help='comma-separated time steps (at least two)')
@seed_option
@click.pass_context
def tau_sweep(ctx, config_path, tau, seed):
    """Run the same problem for several time steps from one initial state."""
    def build():
        config = load_config(config_path, seed=seed)
        return SweepPipe(config, FileBasedDataWriter(''), parse_tau_list(tau))
    _execute(ctx, AbsPipe.PIP_SWEEP, build)


@cli.command()
@config_option
@seed_option
@click.pass_context
def verify(ctx, config_path, seed):
    """Check every provable invariant of the method on the configured problem."""
    _execute(ctx, AbsPipe.PIP_VERIFY,
             lambda: VerifyPipe(load_config(config_path, seed=seed), FileBasedDataWriter('')))


@cli.command()
@config_option
@seed_option
@click.pass_context
def reference(ctx, config_path, seed):
    """Compute reference eigenpairs by explicitly orthonormalized subspace iteration."""
    _execute(ctx, AbsPipe.PIP_REFERENCE,
             lambda: ReferencePipe(load_config(config_path, seed=seed), FileBasedDataWriter('')))


if __name__ == '__main__':
    cli()
